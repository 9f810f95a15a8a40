//! Leading eigenvalue and topological pressure of a transfer operator.
//!
//! Power iteration runs on tables of the operator's stable result depth, so
//! every step is exact on the truncated grid. For potentials reading at most
//! two coordinates the dense transfer matrix gives an independent oracle.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::function_space::{sup_norm, CylinderFunction};
use crate::transfer::OperatorHandle;

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalue: f64,
    pub pressure: f64,
    /// Sup-normalized, strictly positive on admissible prefixes.
    pub eigenfunction: CylinderFunction,
    pub iterations: usize,
    /// `|L h - lambda h|_0 / |h|_0` at return.
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            max_iter: 10_000,
        }
    }
}

/// Depth at which `L_psi` maps tables to tables of the same depth.
fn stable_depth(op: &OperatorHandle) -> usize {
    let p = op.potential().depth();
    let mut d = p.saturating_sub(1);
    while op.result_depth(d) != d {
        d += 1;
    }
    d
}

pub fn power_iteration(op: &OperatorHandle, opts: PowerOptions) -> Result<SpectralResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    if opts.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let space = op.space();
    let mut h = CylinderFunction::constant(space, 1.0).extend_to(stable_depth(op))?;
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let g = op.apply(&h)?;
        let lambda = sup_norm(&g)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::DegenerateSpectrum(format!(
                "image sup norm {lambda} at iteration {it}"
            )));
        }
        let residual = sup_norm(&g.axpby(1.0, &h, -lambda)?)?;
        history.push(residual);
        if residual <= opts.tol * lambda {
            if h.min_value()? <= 0.0 {
                return Err(Error::DegenerateSpectrum(
                    "leading eigenfunction is not strictly positive".into(),
                ));
            }
            return Ok(SpectralResult {
                eigenvalue: lambda,
                pressure: lambda.ln(),
                eigenfunction: h,
                iterations: it,
                residual,
                residual_history: history,
            });
        }
        h = g.scale(1.0 / lambda);
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Dense transfer matrix `B[a][m] = w(a) e^{psi(a, m)} 1[a may precede m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub entries: DMatrix<f64>,
}

impl TransferMatrix {
    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    /// `(L f)(m) = sum_a B[a][m] f(a)` for `f` reading one coordinate.
    pub fn apply_vector(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.order();
        if f.len() != n {
            return Err(Error::invalid(format!("vector length {} != {n}", f.len())));
        }
        Ok((0..n)
            .map(|m| (0..n).fold(0.0, |acc, a| acc + self.entries[(a, m)] * f[a]))
            .collect())
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.entries
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub fn matrix_oracle(op: &OperatorHandle) -> Result<TransferMatrix> {
    let psi = op.potential();
    if psi.depth() > 2 {
        return Err(Error::Unsupported(format!(
            "transfer matrix needs a potential of depth <= 2, got {}",
            psi.depth()
        )));
    }
    let space = op.space();
    let alphabet = space.alphabet();
    let n = alphabet.len();
    let psi2 = psi.extend_to(2)?;
    let mut entries = DMatrix::zeros(n, n);
    for a in 0..n {
        for m in 0..n {
            if space.allows(a, m) {
                entries[(a, m)] = alphabet.weight(a) * psi2.value_by_code(a * n + m).exp();
            }
        }
    }
    Ok(TransferMatrix { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift_space::{Alphabet, MetricConfig, ShiftSpace, TransitionConstraint};
    use std::sync::Arc;

    fn cfg() -> MetricConfig {
        MetricConfig::new(2.0, 1.0, 4).unwrap()
    }

    fn golden() -> Arc<ShiftSpace> {
        ShiftSpace::generalized(
            Alphabet::finite(2).unwrap(),
            TransitionConstraint::from_matrix(2, &[1, 1, 1, 0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn full_shift_eigenvalue_is_alphabet_size() {
        for k in 1..5 {
            let s = ShiftSpace::plain(Alphabet::finite(k).unwrap());
            let op = OperatorHandle::new(CylinderFunction::zero(&s), cfg()).unwrap();
            let r = power_iteration(&op, PowerOptions::default()).unwrap();
            assert_eq!(r.eigenvalue, k as f64);
            assert_eq!(r.residual, 0.0);
            assert!(r.eigenfunction.raw_values().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn golden_mean_gives_golden_ratio() {
        let s = golden();
        let op = OperatorHandle::new(CylinderFunction::zero(&s), cfg()).unwrap();
        let r = power_iteration(&op, PowerOptions::default()).unwrap();
        // larger root of t^2 - t - 1
        let (tr, det) = (1.0f64, -1.0f64);
        let root = (tr + (tr * tr - 4.0 * det).sqrt()) / 2.0;
        assert!((r.eigenvalue - root).abs() < 1e-10 * root);
        assert!((r.pressure - root.ln()).abs() < 1e-10);
        let m = matrix_oracle(&op).unwrap();
        assert_eq!(m.entries, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]));
        assert!((m.spectral_radius() - root).abs() < 1e-12);
    }

    #[test]
    fn circle_with_cosine_potential() {
        let s = ShiftSpace::plain(Alphabet::circle(256).unwrap());
        let psi = CylinderFunction::from_coord_fn(&s, 1, |x| x[0].cos()).unwrap();
        let op = OperatorHandle::new(psi, cfg()).unwrap();
        let r = power_iteration(&op, PowerOptions::default()).unwrap();
        // 2 pi I_0(1) from its power series
        let mut term = 1.0f64;
        let mut i0 = 1.0;
        for k in 1..30 {
            term *= 0.25 / (k * k) as f64;
            i0 += term;
        }
        let expected = 2.0 * std::f64::consts::PI * i0;
        assert!((r.eigenvalue - expected).abs() < 1e-6 * expected);
        assert_eq!(r.eigenfunction.depth(), 0);
    }

    #[test]
    fn weighted_matrix_is_column_stochastic() {
        let s = ShiftSpace::plain(Alphabet::finite_weighted(vec![0.3, 0.7]).unwrap());
        let op = OperatorHandle::new(CylinderFunction::zero(&s), cfg()).unwrap();
        let m = matrix_oracle(&op).unwrap();
        assert_eq!(m.entries, DMatrix::from_row_slice(2, 2, &[0.3, 0.3, 0.7, 0.7]));
        assert!((m.spectral_radius() - 1.0).abs() < 1e-12);
        assert_eq!(m.apply_vector(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn matrix_action_matches_apply_for_two_coordinate_potential() {
        let s = ShiftSpace::generalized(
            Alphabet::finite(3).unwrap(),
            TransitionConstraint::from_matrix(3, &[1, 1, 0, 0, 1, 1, 1, 1, 1]).unwrap(),
        )
        .unwrap();
        let psi = CylinderFunction::from_prefix_fn(&s, 2, |x| 0.3 * x[0] as f64 - 0.2 * (x[1] as f64).powi(2)).unwrap();
        let op = OperatorHandle::new(psi, cfg()).unwrap();
        let f = CylinderFunction::from_prefix_fn(&s, 1, |x| 1.0 + x[0] as f64).unwrap();
        let img = op.apply(&f).unwrap();
        let via = matrix_oracle(&op).unwrap().apply_vector(&[1.0, 2.0, 3.0]).unwrap();
        for m in 0..3 {
            assert!((img.raw_values()[m] - via[m]).abs() < 1e-12 * via[m]);
        }
        let r = power_iteration(&op, PowerOptions::default()).unwrap();
        let rho = matrix_oracle(&op).unwrap().spectral_radius();
        assert!((r.eigenvalue - rho).abs() < 1e-10 * rho);
    }

    #[test]
    fn constant_shift_scales_eigenvalue() {
        let s = golden();
        let psi = CylinderFunction::from_prefix_fn(&s, 2, |x| 0.1 * (x[0] + 2 * x[1]) as f64).unwrap();
        let base = power_iteration(&OperatorHandle::new(psi.clone(), cfg()).unwrap(), PowerOptions::default()).unwrap();
        let shifted_psi = psi.map(|v| v + 0.7).unwrap();
        let shifted = power_iteration(&OperatorHandle::new(shifted_psi, cfg()).unwrap(), PowerOptions::default()).unwrap();
        assert!((shifted.pressure - base.pressure - 0.7).abs() < 1e-10);
    }

    #[test]
    fn residual_certificate_holds() {
        let s = golden();
        let op = OperatorHandle::new(CylinderFunction::zero(&s), cfg()).unwrap();
        let opts = PowerOptions::default();
        let r = power_iteration(&op, opts).unwrap();
        let img = op.apply(&r.eigenfunction).unwrap();
        let res = sup_norm(&img.axpby(1.0, &r.eigenfunction, -r.eigenvalue).unwrap()).unwrap();
        assert!(res <= opts.tol * r.eigenvalue * sup_norm(&r.eigenfunction).unwrap());
        assert_eq!(r.residual_history.len(), r.iterations);
    }

    #[test]
    fn failures_are_reported() {
        // period-2 constraint: the sup ratio never settles on a positive eigenvector
        let s = ShiftSpace::generalized(
            Alphabet::finite(2).unwrap(),
            TransitionConstraint::from_matrix(2, &[0, 1, 1, 0]).unwrap(),
        )
        .unwrap();
        let psi = CylinderFunction::from_prefix_fn(&s, 1, |x| x[0] as f64).unwrap();
        let op = OperatorHandle::new(psi, cfg()).unwrap();
        let opts = PowerOptions { tol: 1e-13, max_iter: 50 };
        assert!(matches!(power_iteration(&op, opts), Err(Error::Convergence { .. })));

        let zero_mass = ShiftSpace::plain(Alphabet::finite_weighted(vec![0.0, 0.0]).unwrap());
        let op = OperatorHandle::new(CylinderFunction::zero(&zero_mass), cfg()).unwrap();
        assert!(matches!(power_iteration(&op, opts), Err(Error::DegenerateSpectrum(_))));

        let s3 = ShiftSpace::plain(Alphabet::finite(2).unwrap());
        let deep = CylinderFunction::zero(&s3).extend_to(3).unwrap();
        let op = OperatorHandle::new(deep, cfg()).unwrap();
        assert!(matches!(matrix_oracle(&op), Err(Error::Unsupported(_))));
    }

    #[test]
    fn deep_potential_iterates_on_stable_tables() {
        let s = ShiftSpace::plain(Alphabet::finite(2).unwrap());
        let psi = CylinderFunction::from_prefix_fn(&s, 3, |x| 0.1 * x[2] as f64).unwrap();
        let op = OperatorHandle::new(psi, cfg()).unwrap();
        let r = power_iteration(&op, PowerOptions::default()).unwrap();
        assert_eq!(r.eigenfunction.depth(), 2);
        assert!(r.residual <= 1e-13 * r.eigenvalue);
    }
}
