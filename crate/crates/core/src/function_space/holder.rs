//! Sup norms, Hölder constants and Hölder norms on the admissible grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::shift_space::MetricConfig;

use super::function::CylinderFunction;

/// `(|f|_0, Hol_f, |f|_gamma)` for one function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderNorm {
    pub sup_norm: f64,
    pub holder_constant: f64,
    pub gamma: f64,
    pub norm: f64,
}

impl HolderNorm {
    fn new(sup_norm: f64, holder_constant: f64, gamma: f64) -> Self {
        Self {
            sup_norm,
            holder_constant,
            gamma,
            norm: sup_norm + holder_constant,
        }
    }
}

/// Which prefix pairs enter a Hölder quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairScope {
    /// Every pair of distinct admissible prefixes.
    All,
    /// Only pairs whose first symbols have equal sections.
    SameSection,
}

pub fn sup_norm(f: &CylinderFunction) -> Result<f64> {
    let table = f.space().prefixes(f.depth())?;
    Ok(table
        .codes
        .iter()
        .map(|&c| f.value_by_code(c).abs())
        .fold(0.0, f64::max))
}

/// `sup |f(x) - f(y)| / d_c(x, y)^gamma` over distinct admissible prefixes
/// of the function's depth.
pub fn holder_constant(f: &CylinderFunction, cfg: &MetricConfig) -> Result<f64> {
    holder_constant_scoped(f, cfg, PairScope::All)
}

pub fn holder_constant_scoped(f: &CylinderFunction, cfg: &MetricConfig, scope: PairScope) -> Result<f64> {
    let depth = f.depth();
    if depth == 0 {
        return Ok(0.0);
    }
    let space = f.space();
    let table = space.prefixes(depth)?;
    let count = table.len() as u128;
    let pairs = count * count.saturating_sub(1) / 2;
    if pairs > space.budget().pairs {
        return Err(Error::Budget {
            what: "prefix pairs",
            required: pairs,
            budget: space.budget().pairs,
        });
    }

    let alphabet = space.alphabet();
    let mut digits = vec![0usize; table.len() * depth];
    for (row, &code) in digits.chunks_mut(depth).zip(&table.codes) {
        space.decode_into(code, row);
    }
    let values: Vec<f64> = table.codes.iter().map(|&c| f.value_by_code(c)).collect();
    let groups: Vec<usize> = digits.chunks(depth).map(|row| space.section_id(row[0])).collect();
    let mut scales = Vec::with_capacity(depth);
    let mut s = 1.0;
    for _ in 0..depth {
        scales.push(s);
        s /= cfg.c;
    }
    let gamma = cfg.gamma;

    let best = (0..table.len())
        .into_par_iter()
        .map(|i| {
            let xi = &digits[i * depth..(i + 1) * depth];
            let vi = values[i];
            let mut local = 0.0f64;
            for j in (i + 1)..table.len() {
                let delta = (values[j] - vi).abs();
                if delta == 0.0 || (scope == PairScope::SameSection && groups[i] != groups[j]) {
                    continue;
                }
                let xj = &digits[j * depth..(j + 1) * depth];
                let mut d = 0.0;
                for t in 0..depth {
                    d += alphabet.distance(xi[t], xj[t]) * scales[t];
                }
                let q = if gamma == 1.0 {
                    delta / d
                } else if delta <= local * d.min(1.0) {
                    // d^gamma >= min(d, 1), so this pair cannot raise the max
                    continue;
                } else {
                    delta / d.powf(gamma)
                };
                local = local.max(q);
            }
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

pub fn holder_norm(f: &CylinderFunction, cfg: &MetricConfig) -> Result<HolderNorm> {
    holder_norm_scoped(f, cfg, PairScope::All)
}

pub fn holder_norm_scoped(f: &CylinderFunction, cfg: &MetricConfig, scope: PairScope) -> Result<HolderNorm> {
    Ok(HolderNorm::new(
        sup_norm(f)?,
        holder_constant_scoped(f, cfg, scope)?,
        cfg.gamma,
    ))
}
