//! The Ruelle operator `L_psi` and its generalized form over `B(A, I)`.
//!
//! For a prefix `x` of the image table,
//!
//! ```text
//! (L_psi f)(x) = sum_{a in s(x(0))} w(a) exp(psi(a x)) f(a x)
//! ```
//!
//! where the section is the whole alphabet on a plain space. Sums run in
//! ascending symbol order, so results do not depend on the thread count.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function_space::{holder_norm, holder_norm_scoped, CylinderFunction, HolderNorm, PairScope};
use crate::shift_space::{MetricConfig, ShiftSpace};

/// `L_psi` on a fixed space and metric.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    potential: CylinderFunction,
    exp_potential: Vec<f64>,
    metric: MetricConfig,
}

/// Explicit a-priori bounds on `L_psi f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    /// `mu(M) e^{|psi|_0} |f|_0`
    pub sup_bound: f64,
    /// `mu(M) e^{|psi|_0} c^{-gamma} (Hol_f + |f|_0 Hol_psi)`
    pub holder_bound: f64,
    /// `mu(M) e^{|psi|_0} ((1 + |psi|_gamma) c^{-gamma} + 1)`
    pub opnorm_bound: f64,
}

/// Bounds together with the norms they were computed from and the measured
/// norms of the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub bounds: NormBounds,
    pub potential: HolderNorm,
    pub function: HolderNorm,
    /// Image norm with the pair scope used for bound checks.
    pub image: HolderNorm,
    /// Image Hölder constant over every pair, including pairs whose first
    /// symbols have different sections.
    pub image_holder_all_pairs: f64,
    /// True when section-boundary pairs were excluded from `image`.
    pub cross_section_pairs_excluded: bool,
}

impl OperatorHandle {
    pub fn new(potential: CylinderFunction, metric: MetricConfig) -> Result<Self> {
        if potential.depth() > metric.depth {
            return Err(Error::invalid(format!(
                "potential depth {} exceeds the truncation depth {}",
                potential.depth(),
                metric.depth
            )));
        }
        let space = potential.space().clone();
        let table = space.prefixes(potential.depth())?;
        let mut exp_potential = vec![0.0; potential.raw_values().len()];
        for &c in &table.codes {
            let v = potential.value_by_code(c);
            let e = v.exp();
            if !e.is_finite() {
                return Err(Error::ExpOverflow {
                    value: v,
                    prefix: space.decode(c, potential.depth()),
                });
            }
            exp_potential[c] = e;
        }
        Ok(Self {
            potential,
            exp_potential,
            metric,
        })
    }

    /// The same operator family with a different potential.
    pub fn with_potential(&self, potential: CylinderFunction) -> Result<Self> {
        Self::new(potential, self.metric)
    }

    pub fn potential(&self) -> &CylinderFunction {
        &self.potential
    }

    pub fn space(&self) -> &Arc<ShiftSpace> {
        self.potential.space()
    }

    pub fn metric(&self) -> &MetricConfig {
        &self.metric
    }

    /// Depth of `L_psi f` for an input of depth `f_depth`: prepending uses up
    /// one coordinate, but a nonuniform section keeps `x(0)` in play.
    pub fn result_depth(&self, f_depth: usize) -> usize {
        let r = self.potential.depth().max(f_depth).saturating_sub(1);
        if self.space().has_uniform_sections() {
            r
        } else {
            r.max(1)
        }
    }

    /// Which pairs the Hölder quotient of an image may use while keeping the
    /// a-priori bounds valid.
    pub fn image_scope(&self) -> PairScope {
        if self.space().has_uniform_sections() {
            PairScope::All
        } else {
            PairScope::SameSection
        }
    }

    pub fn apply(&self, f: &CylinderFunction) -> Result<CylinderFunction> {
        let space = self.space();
        if !Arc::ptr_eq(space, f.space()) {
            return Err(Error::invalid("function and potential live on different spaces"));
        }
        if f.depth() + 1 > self.metric.depth {
            return Err(Error::invalid(format!(
                "function depth {} leaves no room below the truncation depth {}",
                f.depth(),
                self.metric.depth
            )));
        }
        let n = space.symbols();
        let r = self.result_depth(f.depth());
        let out_table = space.prefixes(r)?;
        let ext = space.table_size(r)?; // n^r, code offset of the prepended symbol
        let top = if r == 0 { 1 } else { ext / n };
        let psi_div = space.table_size(r + 1 - self.potential.depth())?;
        let f_div = space.table_size(r + 1 - f.depth())?;
        let weights = space.alphabet().weights();
        let psi = &self.exp_potential;
        let fv = f.raw_values();

        let sums: Vec<f64> = out_table
            .codes
            .par_iter()
            .map(|&p| {
                let x0 = if r == 0 { 0 } else { p / top };
                let mut acc = 0.0;
                for &a in space.section(x0) {
                    let ax = a * ext + p;
                    acc += weights[a] * psi[ax / psi_div] * fv[ax / f_div];
                }
                acc
            })
            .collect();
        let mut values = vec![0.0; ext];
        for (&p, v) in out_table.codes.iter().zip(sums) {
            values[p] = v;
        }
        Ok(CylinderFunction::from_raw(space, r, values))
    }

    /// `L_psi^times f`.
    pub fn compose_apply(&self, f: &CylinderFunction, times: usize) -> Result<CylinderFunction> {
        if times == 0 {
            return Err(Error::invalid("times must be >= 1"));
        }
        let mut g = self.apply(f)?;
        for _ in 1..times {
            g = self.apply(&g)?;
        }
        Ok(g)
    }

    /// Norm of an image function under the pair scope of `image_scope`.
    pub fn image_norm(&self, g: &CylinderFunction) -> Result<HolderNorm> {
        holder_norm_scoped(g, &self.metric, self.image_scope())
    }

    fn mass_factor(&self, psi_sup: f64) -> f64 {
        self.space().alphabet().total_mass() * psi_sup.exp()
    }

    /// `mu(M) e^{|psi|_0} ((1 + |psi|_gamma) / c^gamma + 1)`.
    pub fn opnorm_bound(&self) -> Result<f64> {
        let psi = holder_norm(&self.potential, &self.metric)?;
        Ok(self.opnorm_bound_from(&psi))
    }

    fn opnorm_bound_from(&self, psi: &HolderNorm) -> f64 {
        let k = self.mass_factor(psi.sup_norm);
        k * ((1.0 + psi.norm) / self.metric.c_gamma() + 1.0)
    }

    pub fn compute_bounds(&self, f: &CylinderFunction) -> Result<NormBounds> {
        let psi = holder_norm(&self.potential, &self.metric)?;
        let fnorm = holder_norm(f, &self.metric)?;
        Ok(self.bounds_from(&psi, &fnorm))
    }

    fn bounds_from(&self, psi: &HolderNorm, f: &HolderNorm) -> NormBounds {
        let k = self.mass_factor(psi.sup_norm);
        NormBounds {
            sup_bound: k * f.sup_norm,
            holder_bound: k / self.metric.c_gamma() * (f.holder_constant + f.sup_norm * psi.holder_constant),
            opnorm_bound: self.opnorm_bound_from(psi),
        }
    }

    pub fn bounds_report(&self, f: &CylinderFunction) -> Result<BoundsReport> {
        let psi = holder_norm(&self.potential, &self.metric)?;
        let fnorm = holder_norm(f, &self.metric)?;
        let image_fn = self.apply(f)?;
        let image = self.image_norm(&image_fn)?;
        let all = holder_norm(&image_fn, &self.metric)?;
        Ok(BoundsReport {
            bounds: self.bounds_from(&psi, &fnorm),
            potential: psi,
            function: fnorm,
            image,
            image_holder_all_pairs: all.holder_constant,
            cross_section_pairs_excluded: self.image_scope() == PairScope::SameSection,
        })
    }

    /// `max_p |L_psi(p / |p|_gamma)|_gamma`, a lower estimate of the grid
    /// operator norm.
    pub fn estimate_opnorm(&self, probes: &[CylinderFunction]) -> Result<f64> {
        if probes.is_empty() {
            return Err(Error::invalid("at least one probe is required"));
        }
        let mut best = 0.0f64;
        for (i, p) in probes.iter().enumerate() {
            let norm = holder_norm(p, &self.metric)?.norm;
            if norm == 0.0 {
                return Err(Error::invalid(format!("probe {i} has zero norm")));
            }
            let image = self.apply(&p.scale(1.0 / norm))?;
            best = best.max(self.image_norm(&image)?.norm);
        }
        Ok(best)
    }
}
