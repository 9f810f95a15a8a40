//! Power-series expansion of `psi -> L_psi`, derivative operators and
//! remainder bounds.
//!
//! The expansion around `psi` in direction `beta` is
//!
//! ```text
//! L_{psi+beta} phi = sum_{n>=0} (1/n!) L_psi(phi beta^n)
//! ```
//!
//! and the k-th derivative acts as `D^k(beta_1..beta_k) phi = L_psi(phi beta_1 .. beta_k)`.
//! Every term is dominated by `(1/n!) |L_psi| (2 |beta|_gamma)^n |phi|_gamma`;
//! `|L_psi|` is replaced by the certified `opnorm_bound`.

use crate::error::{Error, Result};
use crate::function_space::{holder_norm, CylinderFunction};
use crate::transfer::OperatorHandle;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `(1/n!) L_psi(phi beta^n)`.
pub fn taylor_term(
    op: &OperatorHandle,
    beta: &CylinderFunction,
    n: usize,
    phi: &CylinderFunction,
) -> Result<CylinderFunction> {
    let mut integrand = phi.clone();
    for _ in 0..n {
        integrand = integrand.mul(beta)?;
    }
    Ok(op.apply(&integrand)?.scale(1.0 / factorial(n)))
}

/// `sum_{j=0}^{n} (1/j!) L_psi(phi beta^j)`, accumulated in ascending order.
pub fn taylor_partial_sum(
    op: &OperatorHandle,
    beta: &CylinderFunction,
    phi: &CylinderFunction,
    n: usize,
) -> Result<CylinderFunction> {
    let mut integrand = phi.clone();
    let mut sum = op.apply(&integrand)?;
    for j in 1..=n {
        integrand = integrand.mul(beta)?;
        sum = sum.add(&op.apply(&integrand)?.scale(1.0 / factorial(j)))?;
    }
    Ok(sum)
}

/// `sum_{j>n} v^j / j!`, summed directly so that small arguments keep full
/// relative accuracy.
pub fn exp_tail(v: f64, n: usize) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if v.abs() > 1.0 + n as f64 / 2.0 {
        let partial: f64 = (0..=n).map(|j| v.powi(j as i32) / factorial(j)).sum();
        return v.exp() - partial;
    }
    let mut term = v.powi(n as i32 + 1) / factorial(n + 1);
    let mut sum = 0.0f64;
    let mut j = n + 1;
    while term != 0.0 && term.abs() > 1e-18 * sum.abs() {
        sum += term;
        j += 1;
        term *= v / j as f64;
    }
    sum
}

/// `opnorm_proxy * (e^{2 b} - sum_{j<=n} (2 b)^j / j!)`: the bound on the
/// remainder operator after order `n` when `|beta|_gamma = b`.
pub fn remainder_norm_bound(opnorm_proxy: f64, beta_norm: f64, n: usize) -> f64 {
    opnorm_proxy * exp_tail(2.0 * beta_norm, n)
}

/// `L_psi(phi * sum_{j>n} beta^j / j!)`, the remainder after order `n`
/// evaluated without forming the difference `L_{psi+beta} phi - S_n`.
pub fn remainder_apply(
    op: &OperatorHandle,
    beta: &CylinderFunction,
    phi: &CylinderFunction,
    n: usize,
) -> Result<CylinderFunction> {
    let tail = beta.map(|b| exp_tail(b, n))?;
    op.apply(&phi.mul(&tail)?)
}

/// `D^k Theta(psi)(beta_1, .., beta_k) phi = L_psi(phi beta_1 .. beta_k)`.
pub fn derivative_apply(
    op: &OperatorHandle,
    directions: &[&CylinderFunction],
    phi: &CylinderFunction,
) -> Result<CylinderFunction> {
    if directions.is_empty() {
        return Err(Error::invalid("at least one direction is required"));
    }
    let mut integrand = phi.clone();
    for beta in directions {
        integrand = integrand.mul(beta)?;
    }
    op.apply(&integrand)
}

/// Series truncation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub max_order: usize,
    /// Stop once the term bound drops below `rel_tol` times the norm of the
    /// running sum.
    pub rel_tol: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            max_order: 12,
            rel_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TaylorSeries {
    pub sum: CylinderFunction,
    /// Highest order included.
    pub order: usize,
    /// Certified bound on the image norm of what was left out.
    pub remainder_bound: f64,
}

/// Sums the expansion of `L_{psi+beta} phi` until the term bound is
/// negligible or `max_order` is reached.
pub fn taylor_series(
    op: &OperatorHandle,
    beta: &CylinderFunction,
    phi: &CylinderFunction,
    opts: SeriesOptions,
) -> Result<TaylorSeries> {
    let cfg = op.metric();
    let opnorm = op.opnorm_bound()?;
    let b = holder_norm(beta, cfg)?.norm;
    let phi_norm = holder_norm(phi, cfg)?.norm;
    let mut integrand = phi.clone();
    let mut sum = op.apply(&integrand)?;
    let mut order = 0;
    for j in 1..=opts.max_order {
        let term_bound = opnorm * (2.0 * b).powi(j as i32) / factorial(j) * phi_norm;
        if term_bound < opts.rel_tol * op.image_norm(&sum)?.norm {
            break;
        }
        integrand = integrand.mul(beta)?;
        sum = sum.add(&op.apply(&integrand)?.scale(1.0 / factorial(j)))?;
        order = j;
    }
    Ok(TaylorSeries {
        sum,
        order,
        remainder_bound: remainder_norm_bound(opnorm, b, order) * phi_norm,
    })
}

/// One row of a series-convergence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub order: usize,
    /// `|L_{psi+beta} phi - S_n|_gamma`.
    pub error: f64,
    /// `remainder_norm_bound(opnorm_bound, |beta|_gamma, n) * |phi|_gamma`.
    pub bound: f64,
}

impl SeriesRow {
    pub fn holds(&self, slack: f64) -> bool {
        self.error <= self.bound * (1.0 + slack)
    }
}

/// Truncation errors and their bounds for orders `1..=max_order`.
pub fn series_check(
    op: &OperatorHandle,
    beta: &CylinderFunction,
    phi: &CylinderFunction,
    max_order: usize,
) -> Result<Vec<SeriesRow>> {
    let cfg = op.metric();
    let shifted = op.with_potential(op.potential().add(beta)?)?;
    let exact = shifted.apply(phi)?;
    let opnorm = op.opnorm_bound()?;
    let b = holder_norm(beta, cfg)?.norm;
    let phi_norm = holder_norm(phi, cfg)?.norm;
    let mut integrand = phi.clone();
    let mut sum = op.apply(&integrand)?;
    let mut rows = Vec::with_capacity(max_order);
    for n in 1..=max_order {
        integrand = integrand.mul(beta)?;
        sum = sum.add(&op.apply(&integrand)?.scale(1.0 / factorial(n)))?;
        rows.push(SeriesRow {
            order: n,
            error: op.image_norm(&exact.sub(&sum)?)?.norm,
            bound: remainder_norm_bound(opnorm, b, n) * phi_norm,
        });
    }
    Ok(rows)
}

/// Image norms of the order-`n` remainder for `beta` scaled by each factor.
pub fn remainder_decay(
    op: &OperatorHandle,
    beta: &CylinderFunction,
    phi: &CylinderFunction,
    n: usize,
    scales: &[f64],
) -> Result<Vec<f64>> {
    scales
        .iter()
        .map(|&t| op.image_norm(&remainder_apply(op, &beta.scale(t), phi, n)?).map(|h| h.norm))
        .collect()
}

/// Finite-difference discrepancies of the first two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    pub steps: Vec<f64>,
    /// `|(L_{psi+h beta} - L_{psi-h beta}) phi / 2h - D^1(beta) phi|_gamma`
    pub first: Vec<f64>,
    /// `|(L_{psi+h beta} - 2 L_psi + L_{psi-h beta}) phi / h^2 - D^2(beta, beta) phi|_gamma`
    pub second: Vec<f64>,
    /// Observed orders between consecutive steps; `None` when a
    /// discrepancy vanishes.
    pub first_orders: Vec<Option<f64>>,
    pub second_orders: Vec<Option<f64>>,
    /// Set when a discrepancy grew as the step shrank, i.e. rounding
    /// dominates truncation.
    pub cancellation: bool,
}

impl FdReport {
    pub fn min_first_order(&self) -> Option<f64> {
        min_order(&self.first_orders)
    }

    pub fn min_second_order(&self) -> Option<f64> {
        min_order(&self.second_orders)
    }
}

fn min_order(v: &[Option<f64>]) -> Option<f64> {
    v.iter().flatten().copied().reduce(f64::min)
}

fn observed_orders(steps: &[f64], errs: &[f64]) -> Vec<Option<f64>> {
    steps
        .windows(2)
        .zip(errs.windows(2))
        .map(|(h, e)| {
            (e[0] > 0.0 && e[1] > 0.0).then(|| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        })
        .collect()
}

/// Central-difference check at steps `h` and `h / 2`.
pub fn finite_difference_check(
    op: &OperatorHandle,
    beta: &CylinderFunction,
    phi: &CylinderFunction,
    h: f64,
) -> Result<FdReport> {
    finite_difference_sweep(op, beta, phi, &[h, h / 2.0])
}

/// Central-difference check over a decreasing list of steps.
pub fn finite_difference_sweep(
    op: &OperatorHandle,
    beta: &CylinderFunction,
    phi: &CylinderFunction,
    steps: &[f64],
) -> Result<FdReport> {
    if steps.is_empty() || steps.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::invalid("steps must be positive and finite"));
    }
    let base = op.apply(phi)?;
    let d1 = derivative_apply(op, &[beta], phi)?;
    let d2 = derivative_apply(op, &[beta, beta], phi)?;
    let mut first = Vec::with_capacity(steps.len());
    let mut second = Vec::with_capacity(steps.len());
    for &h in steps {
        let plus = op.with_potential(op.potential().axpby(1.0, beta, h)?)?.apply(phi)?;
        let minus = op.with_potential(op.potential().axpby(1.0, beta, -h)?)?.apply(phi)?;
        let central = plus.zip_with(&minus, |p, m| (p - m) / (2.0 * h))?;
        first.push(op.image_norm(&central.sub(&d1)?)?.norm);
        let curv = plus
            .sub(&base.scale(2.0))?
            .add(&minus)?
            .scale(1.0 / (h * h));
        second.push(op.image_norm(&curv.sub(&d2)?)?.norm);
    }
    let cancellation = first.windows(2).chain(second.windows(2)).any(|w| w[1] > w[0]);
    Ok(FdReport {
        first_orders: observed_orders(steps, &first),
        second_orders: observed_orders(steps, &second),
        steps: steps.to_vec(),
        first,
        second,
        cancellation,
    })
}
