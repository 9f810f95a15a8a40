//! The invariant battery run by `ruelle suite`.
//!
//! Every check draws its random inputs from one `chacha8-v1` stream seeded by
//! the scenario seed, in a fixed order, so the report is a deterministic
//! function of the config.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use ruelle_core::analyticity::{
    derivative_apply, finite_difference_sweep, remainder_decay, series_check, taylor_term,
};
use ruelle_core::function_space::{holder_norm, random_function, sup_norm, ProbeRng};
use ruelle_core::shift_space::prefix_distance;
use ruelle_core::{
    matrix_oracle, power_iteration, CylinderFunction, Error, MetricConfig, OperatorHandle, PowerOptions, Result,
    Scenario, ShiftSpace, TransitionConstraint,
};

/// Largest prefix table used for random probes.
const PROBE_TABLE_LIMIT: usize = 1024;
/// Relative slack on the right-hand side of inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-12;
const SPECTRAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// Outcome of one invariant over all its cases.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: &'static str,
    pub cases: usize,
    /// Worst case value: relative excess for inequalities, relative error
    /// for identities, observed order for convergence rates.
    pub measured: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn skipped(group: &'static str, name: &'static str, note: impl Into<String>) -> Self {
        Self {
            group,
            name,
            cases: 0,
            measured: f64::NAN,
            comparison: Comparison::AtMost,
            tolerance: 0.0,
            passed: true,
            note: Some(note.into()),
        }
    }

    fn failed(group: &'static str, name: &'static str, err: &Error) -> Self {
        Self {
            passed: false,
            note: Some(err.to_string()),
            ..Self::skipped(group, name, "")
        }
    }
}

/// Running worst case of a family of comparisons.
struct Tally {
    group: &'static str,
    name: &'static str,
    comparison: Comparison,
    tolerance: f64,
    cases: usize,
    worst: f64,
}

impl Tally {
    fn at_most(group: &'static str, name: &'static str, tolerance: f64) -> Self {
        Self {
            group,
            name,
            comparison: Comparison::AtMost,
            tolerance,
            cases: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    fn at_least(group: &'static str, name: &'static str, tolerance: f64) -> Self {
        Self {
            comparison: Comparison::AtLeast,
            worst: f64::INFINITY,
            ..Self::at_most(group, name, tolerance)
        }
    }

    fn record(&mut self, v: f64) {
        self.cases += 1;
        self.worst = match self.comparison {
            Comparison::AtMost if v.is_nan() => f64::INFINITY,
            Comparison::AtLeast if v.is_nan() => f64::NEG_INFINITY,
            Comparison::AtMost => self.worst.max(v),
            Comparison::AtLeast => self.worst.min(v),
        };
    }

    /// Records `(lhs - rhs) / |rhs|` for the claim `lhs <= rhs`.
    fn le(&mut self, lhs: f64, rhs: f64) {
        let excess = if rhs != 0.0 {
            (lhs - rhs) / rhs.abs()
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        self.record(excess);
    }

    /// Records `|a - b| / scale` for the claim `a == b`.
    fn eq(&mut self, a: f64, b: f64, scale: f64) {
        let d = (a - b).abs();
        self.record(if d == 0.0 { 0.0 } else { d / scale.abs() });
    }

    fn finish(self) -> Check {
        if self.cases == 0 {
            return Check::skipped(self.group, self.name, "no applicable cases");
        }
        let passed = match self.comparison {
            Comparison::AtMost => self.worst <= self.tolerance,
            Comparison::AtLeast => self.worst >= self.tolerance,
        };
        Check {
            group: self.group,
            name: self.name,
            cases: self.cases,
            measured: self.worst,
            comparison: self.comparison,
            tolerance: self.tolerance,
            passed,
            note: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub probe_depth: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Deepest prefix depth below the truncation depth whose admissible table
/// stays within `limit` entries.
pub fn probe_depth(space: &Arc<ShiftSpace>, metric: &MetricConfig, limit: usize) -> Result<usize> {
    if metric.depth == 1 {
        return Ok(0);
    }
    let mut d = 1;
    while d + 1 < metric.depth {
        match space.table_size(d + 1) {
            Ok(n) if n <= 1 << 20 => {}
            _ => break,
        }
        if space.prefixes(d + 1)?.len() > limit {
            break;
        }
        d += 1;
    }
    Ok(d)
}

/// Runs a fallible group, turning an error into a failed check.
fn guarded(out: &mut Vec<Check>, group: &'static str, name: &'static str, f: impl FnOnce(&mut Vec<Check>) -> Result<()>) {
    let before = out.len();
    if let Err(e) = f(out) {
        out.truncate(before);
        out.push(Check::failed(group, name, &e));
    }
}

pub fn run_suite(sc: &Scenario) -> Result<SuiteReport> {
    let space = &sc.space;
    let metric = sc.metric;
    let depth = probe_depth(space, &metric, PROBE_TABLE_LIMIT)?;
    let mut rng = CylinderFunction::probe_rng(sc.seed);
    let mut checks = Vec::new();

    guarded(&mut checks, "function-space", "norm_battery", |out| {
        norm_checks(out, sc, depth, &mut rng)
    });
    guarded(&mut checks, "transfer-operator", "operator_battery", |out| {
        operator_checks(out, sc, depth, &mut rng)
    });
    guarded(&mut checks, "shift-space", "combinatorics", |out| {
        shift_checks(out, sc, &mut rng)
    });
    guarded(&mut checks, "analyticity", "series_battery", |out| {
        analyticity_checks(out, sc, depth, &mut rng)
    });
    guarded(&mut checks, "spectral", "spectral_battery", |out| {
        spectral_checks(out, sc, depth, &mut rng)
    });
    Ok(SuiteReport {
        probe_depth: depth,
        checks,
    })
}

/// Every two symbols have a common admissible successor.
fn shares_successors(space: &ShiftSpace) -> bool {
    let n = space.symbols();
    (0..n).all(|a| (a..n).all(|b| (0..n).any(|s| space.allows(a, s) && space.allows(b, s))))
}

fn norm_checks(out: &mut Vec<Check>, sc: &Scenario, depth: usize, rng: &mut ProbeRng) -> Result<()> {
    let (space, cfg) = (&sc.space, &sc.metric);
    let group = "function-space";
    let mut product = Tally::at_most(group, "product_inequality", INEQUALITY_SLACK);
    let mut k_fold = Tally::at_most(group, "k_fold_product_inequality", INEQUALITY_SLACK);
    let mut sup_mult = Tally::at_most(group, "sup_submultiplicative", 0.0);
    let mut triangle = Tally::at_most(group, "norm_triangle_inequality", INEQUALITY_SLACK);
    let mut extension = Tally::at_most(group, "depth_extension_invariance", 0.0);
    let extend_ok = depth < cfg.depth
        && space.table_size(depth + 1).is_ok_and(|n| n <= 1 << 20)
        && space.prefixes(depth + 1)?.len() <= 4 * PROBE_TABLE_LIMIT;
    // without a common successor two words have no identical tails, and
    // extension can only shrink the quotients
    let shared = shares_successors(space);
    for i in 0..sc.params.probes {
        let psi = random_function(space, depth, -1.0, 1.0, rng)?;
        let phi = random_function(space, depth, -1.0, 1.0, rng)?;
        let (np, nf) = (holder_norm(&psi, cfg)?, holder_norm(&phi, cfg)?);
        let prod = holder_norm(&phi.mul(&psi)?, cfg)?;
        product.le(prod.norm, 2.0 * np.norm * nf.norm);
        sup_mult.le(prod.sup_norm, np.sup_norm * nf.sup_norm);
        triangle.le(holder_norm(&phi.add(&psi)?, cfg)?.norm, np.norm + nf.norm);

        let k = 2 + i % 4;
        let factors = (0..k)
            .map(|_| random_function(space, depth, -1.0, 1.0, rng))
            .collect::<Result<Vec<_>>>()?;
        let mut rhs = 2f64.powi(k as i32 - 1);
        for f in &factors {
            rhs *= holder_norm(f, cfg)?.norm;
        }
        let lhs = holder_norm(&CylinderFunction::product(space, &factors)?, cfg)?.norm;
        k_fold.le(lhs, rhs);

        if extend_ok && i < 10 {
            let ext = holder_norm(&phi.extend_to(depth + 1)?, cfg)?;
            let (ds, dh) = (ext.sup_norm - nf.sup_norm, ext.holder_constant - nf.holder_constant);
            extension.record(if shared { ds.abs() + dh.abs() } else { ds.max(0.0) + dh.max(0.0) });
        }
    }
    out.extend([product, k_fold, sup_mult, triangle, extension].map(Tally::finish));
    Ok(())
}

fn operator_checks(out: &mut Vec<Check>, sc: &Scenario, depth: usize, rng: &mut ProbeRng) -> Result<()> {
    let (space, cfg) = (&sc.space, sc.metric);
    let group = "transfer-operator";
    let mut sup = Tally::at_most(group, "sup_bound", INEQUALITY_SLACK);
    let mut hol = Tally::at_most(group, "holder_bound", INEQUALITY_SLACK);
    let mut opn = Tally::at_most(group, "opnorm_estimate_below_bound", INEQUALITY_SLACK);
    let mut lin = Tally::at_most(group, "linearity", IDENTITY_TOL);
    let mut pos = Tally::at_most(group, "positivity", 0.0);
    for i in 0..sc.params.probes {
        let psi = random_function(space, depth, -1.0, 1.0, rng)?;
        let phi = random_function(space, depth, -1.0, 1.0, rng)?;
        let op = OperatorHandle::new(psi, cfg)?;
        let report = op.bounds_report(&phi)?;
        sup.le(report.image.sup_norm, report.bounds.sup_bound);
        hol.le(report.image.holder_constant, report.bounds.holder_bound);

        let g = random_function(space, depth, -1.0, 1.0, rng)?;
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (lf, lg) = (op.apply(&phi)?, op.apply(&g)?);
        let lhs = op.apply(&phi.axpby(a, &g, b)?)?;
        let rhs = lf.axpby(a, &lg, b)?;
        let scale = a.abs() * sup_norm(&lf)? + b.abs() * sup_norm(&lg)?;
        lin.eq(lhs.max_abs_diff(&rhs)?, 0.0, scale.max(f64::MIN_POSITIVE));

        let nonneg = random_function(space, depth, 0.0, 1.0, rng)?;
        pos.record((-op.apply(&nonneg)?.min_value()?).max(0.0));

        if i % 10 == 0 {
            let probes = (0..5)
                .map(|_| random_function(space, depth, -1.0, 1.0, rng))
                .collect::<Result<Vec<_>>>()?;
            opn.le(op.estimate_opnorm(&probes)?, report.bounds.opnorm_bound);
        }
    }
    out.extend([sup, hol, opn, lin, pos].map(Tally::finish));

    out.push(coincidence_check(sc, depth, rng)?);
    out.push(matrix_check(sc, rng)?);
    Ok(())
}

/// Plain `L_psi` against the generalized operator under `A = 1, I = R`.
pub fn coincidence_check(sc: &Scenario, depth: usize, rng: &mut ProbeRng) -> Result<Check> {
    let group = "transfer-operator";
    let alphabet = sc.space.alphabet().clone();
    let n = alphabet.len();
    let budget = sc.space.budget();
    let plain = ShiftSpace::build(alphabet.clone(), None, budget)?;
    let trivial = ShiftSpace::build(alphabet, Some(TransitionConstraint::full(n)), budget)?;
    let mut tally = Tally::at_most(group, "generalized_plain_coincidence", 0.0);
    let mut compare = |psi_p: CylinderFunction, f_p: CylinderFunction, psi_t: CylinderFunction, f_t: CylinderFunction| -> Result<()> {
        let a = OperatorHandle::new(psi_p, sc.metric)?.apply(&f_p)?;
        let b = OperatorHandle::new(psi_t, sc.metric)?.apply(&f_t)?;
        let same = a.depth() == b.depth() && a.raw_values().iter().zip(b.raw_values()).all(|(x, y)| x.to_bits() == y.to_bits());
        tally.record(if same { 0.0 } else { 1.0 });
        Ok(())
    };
    if let (Ok(p), Ok(t)) = (sc.with_space(plain.clone()), sc.with_space(trivial.clone())) {
        compare(p.potential, p.function, t.potential, t.function)?;
    }
    let pair_depth = depth.min(probe_depth(&plain, &sc.metric, PROBE_TABLE_LIMIT)?);
    for _ in 0..10 {
        let mut twin = rng.clone();
        let psi_p = random_function(&plain, pair_depth, -1.0, 1.0, rng)?;
        let f_p = random_function(&plain, pair_depth, -1.0, 1.0, rng)?;
        let psi_t = random_function(&trivial, pair_depth, -1.0, 1.0, &mut twin)?;
        let f_t = random_function(&trivial, pair_depth, -1.0, 1.0, &mut twin)?;
        compare(psi_p, f_p, psi_t, f_t)?;
    }
    Ok(tally.finish())
}

fn matrix_check(sc: &Scenario, rng: &mut ProbeRng) -> Result<Check> {
    let group = "transfer-operator";
    let (space, cfg) = (&sc.space, sc.metric);
    if cfg.depth < 2 {
        return Ok(Check::skipped(group, "matrix_equivalence", "needs metric.depth >= 2"));
    }
    let mut tally = Tally::at_most(group, "matrix_equivalence", IDENTITY_TOL);
    let mut potentials = Vec::new();
    if sc.potential.depth() <= 2 {
        potentials.push(sc.potential.clone());
    }
    for _ in 0..3 {
        potentials.push(random_function(space, 2, -1.0, 1.0, rng)?);
    }
    let n = space.alphabet().len();
    for psi in potentials {
        let op = OperatorHandle::new(psi, cfg)?;
        let f = random_function(space, 1, -1.0, 1.0, rng)?;
        let image = op.apply(&f)?;
        let fv: Vec<f64> = (0..n).map(|a| f.value_by_code(a)).collect();
        let via = matrix_oracle(&op)?.apply_vector(&fv)?;
        let scale = sup_norm(&image)?.max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for (m, v) in via.iter().enumerate() {
            let got = if image.depth() == 0 { image.value_by_code(0) } else { image.value_by_code(m) };
            worst = worst.max((got - v).abs());
        }
        tally.eq(worst, 0.0, scale);
    }
    Ok(tally.finish())
}

fn shift_checks(out: &mut Vec<Check>, sc: &Scenario, rng: &mut ProbeRng) -> Result<()> {
    let space = &sc.space;
    let alphabet = space.alphabet();
    let n = alphabet.len();
    let c = sc.metric.c;
    let group = "shift-space";

    let mut contraction = Tally::at_most(group, "prepend_contraction", IDENTITY_TOL);
    let len = sc.metric.depth;
    for _ in 0..sc.params.probes {
        let x: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
        let y: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
        let a = rng.random_range(0..n);
        let d0 = prefix_distance(alphabet, &x, &y, c);
        if d0 == 0.0 {
            continue;
        }
        let ax: Vec<usize> = std::iter::once(a).chain(x.iter().copied()).collect();
        let ay: Vec<usize> = std::iter::once(a).chain(y.iter().copied()).collect();
        contraction.eq(prefix_distance(alphabet, &ax, &ay, c), d0 / c, d0 / c);
    }
    out.push(contraction.finish());

    let mut axioms = Tally::at_most(group, "metric_axioms", IDENTITY_TOL);
    if let Some(t) = (1..=3.min(sc.metric.depth)).rev().find(|&t| (n as u128).pow(t as u32) <= 64) {
        let seqs = space.enumerate_admissible(t)?;
        for x in &seqs {
            for y in &seqs {
                let dxy = prefix_distance(alphabet, x.symbols(), y.symbols(), c);
                let dyx = prefix_distance(alphabet, y.symbols(), x.symbols(), c);
                let bad_identity = (x == y) != (dxy == 0.0);
                axioms.record(if bad_identity || dxy != dyx { f64::INFINITY } else { 0.0 });
                for z in &seqs {
                    let dxz = prefix_distance(alphabet, x.symbols(), z.symbols(), c);
                    let dyz = prefix_distance(alphabet, y.symbols(), z.symbols(), c);
                    if dxz > 0.0 {
                        axioms.record((dxz - dxy - dyz) / dxz);
                    }
                }
            }
        }
    }
    out.push(axioms.finish());

    let mut equivalence = Tally::at_most(group, "section_admissibility_equivalence", 0.0);
    let mut preimages = Tally::at_most(group, "preimage_cardinality", 0.0);
    let mut projection = Tally::at_most(group, "projection_consistency", 0.0);
    let top = (1..sc.metric.depth.min(4))
        .rev()
        .find(|&t| (n as u128).pow(t as u32 + 1) <= 100_000);
    if let Some(t) = top {
        let total = n.pow(t as u32);
        for code in 0..total {
            let x = space.decode(code, t);
            let x_ok = space.is_admissible(&x);
            let mut count = 0;
            for a in 0..n {
                let ax: Vec<usize> = std::iter::once(a).chain(x.iter().copied()).collect();
                let lhs = space.is_admissible(&ax);
                let rhs = space.section(x[0]).contains(&a) && x_ok;
                equivalence.record(if lhs == rhs { 0.0 } else { 1.0 });
                count += lhs as usize;
            }
            if x_ok {
                preimages.record((count as f64 - space.section(x[0]).len() as f64).abs());
            }
        }
        let shorter = space.enumerate_admissible(t)?;
        let longer = space.enumerate_admissible(t + 1)?;
        let mut seen = std::collections::BTreeMap::new();
        for y in &longer {
            *seen.entry(y.symbols()[..t].to_vec()).or_insert(0usize) += 1;
        }
        projection.record((seen.len() as f64 - shorter.len() as f64).abs());
        for x in &shorter {
            let last = x.symbols()[t - 1];
            let successors = (0..n).filter(|&b| space.allows(last, b)).count();
            let got = seen.get(x.symbols()).copied().unwrap_or(0);
            projection.record((got as f64 - successors as f64).abs());
        }
    }
    out.extend([equivalence, preimages, projection].map(Tally::finish));
    Ok(())
}

/// Random `(psi, beta, phi)` with positive `beta` scaled to a norm in
/// `[0.25, 1]` and positive `phi`.
pub fn random_triple(
    space: &Arc<ShiftSpace>,
    cfg: &MetricConfig,
    depth: usize,
    rng: &mut ProbeRng,
) -> Result<(CylinderFunction, CylinderFunction, CylinderFunction)> {
    let psi = random_function(space, depth, -1.0, 1.0, rng)?;
    let raw = random_function(space, depth, 0.1, 1.0, rng)?;
    let target = rng.random_range(0.25..=1.0);
    let beta = raw.scale(target / holder_norm(&raw, cfg)?.norm);
    let phi = random_function(space, depth, 0.5, 1.5, rng)?;
    Ok((psi, beta, phi))
}

fn analyticity_checks(out: &mut Vec<Check>, sc: &Scenario, depth: usize, rng: &mut ProbeRng) -> Result<()> {
    let (space, cfg) = (&sc.space, sc.metric);
    let group = "analyticity";
    let order = sc.params.order;
    let mut series = Tally::at_most(group, "series_remainder_bound", INEQUALITY_SLACK);
    let mut terms = Tally::at_most(group, "term_bound", INEQUALITY_SLACK);
    let mut decay = Tally::at_most(group, "remainder_decay_ratio", 1.5);
    let mut fd1 = Tally::at_least(group, "finite_difference_first_order", 1.9);
    let mut fd2 = Tally::at_least(group, "finite_difference_second_order", 1.9);
    let mut zero = Tally::at_most(group, "zero_direction_exact", 0.0);
    let mut symmetry = Tally::at_most(group, "derivative_symmetry", IDENTITY_TOL);
    let mut linear = Tally::at_most(group, "derivative_multilinearity", IDENTITY_TOL);
    let mut scaling = Tally::at_most(group, "derivative_scaling", IDENTITY_TOL);

    let mut triples = vec![(sc.potential.clone(), sc.direction.clone(), sc.function.clone(), false)];
    for _ in 0..5 {
        let (psi, beta, phi) = random_triple(space, &cfg, depth, rng)?;
        triples.push((psi, beta, phi, true));
    }
    let h = sc.params.step;
    let steps = [h, h / 2.0, h / 4.0];
    for (psi, beta, phi, random) in &triples {
        let op = OperatorHandle::new(psi.clone(), cfg)?;
        for row in series_check(&op, beta, phi, order)? {
            series.le(row.error, row.bound);
        }
        let opnorm = op.opnorm_bound()?;
        let b = holder_norm(beta, &cfg)?.norm;
        let phi_norm = holder_norm(phi, &cfg)?.norm;
        let mut fact = 1.0;
        for n in 0..=order {
            if n > 0 {
                fact *= n as f64;
            }
            let t = op.image_norm(&taylor_term(&op, beta, n, phi)?)?.norm;
            terms.le(t, opnorm * (2.0 * b).powi(n as i32) / fact * phi_norm);
        }
        if *random {
            for n in 1..=order {
                let r = remainder_decay(&op, beta, phi, n, &[1.0, 0.5, 0.25])?;
                let expected = 2f64.powi(n as i32 + 1);
                for w in r.windows(2) {
                    if w[0] > 0.0 && w[1] > 0.0 {
                        let ratio = w[0] / w[1];
                        decay.record((ratio / expected).max(expected / ratio));
                    }
                }
            }
            // order-one direction so the h^2 term stays above rounding
            let fd_beta = random_function(space, depth, 0.5, 1.5, rng)?;
            let rep = finite_difference_sweep(&op, &fd_beta, phi, &steps)?;
            fd1.record(rep.min_first_order().unwrap_or(f64::NAN));
            fd2.record(rep.min_second_order().unwrap_or(f64::NAN));
        }
        let z = finite_difference_sweep(&op, &CylinderFunction::zero(space), phi, &steps)?;
        zero.record(z.first.iter().chain(&z.second).fold(0.0, |m, v| m.max(v.abs())));

        let other = random_function(space, depth, -1.0, 1.0, rng)?;
        let d12 = derivative_apply(&op, &[beta, &other], phi)?;
        let d21 = derivative_apply(&op, &[&other, beta], phi)?;
        let scale = sup_norm(&d12)?.max(f64::MIN_POSITIVE);
        symmetry.eq(d12.max_abs_diff(&d21)?, 0.0, scale);

        let (s, t) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let combo = derivative_apply(&op, &[&beta.axpby(s, &other, t)?], phi)?;
        let parts = derivative_apply(&op, &[beta], phi)?.axpby(s, &derivative_apply(&op, &[&other], phi)?, t)?;
        let scale = (s.abs() * sup_norm(&derivative_apply(&op, &[beta], phi)?)?
            + t.abs() * sup_norm(&derivative_apply(&op, &[&other], phi)?)?)
        .max(f64::MIN_POSITIVE);
        linear.eq(combo.max_abs_diff(&parts)?, 0.0, scale);

        let k2 = derivative_apply(&op, &[beta, beta], phi)?;
        let tb = beta.scale(0.5);
        let scaled = derivative_apply(&op, &[&tb, &tb], phi)?;
        scaling.eq(scaled.max_abs_diff(&k2.scale(0.25))?, 0.0, (0.25 * sup_norm(&k2)?).max(f64::MIN_POSITIVE));
    }
    out.extend([series, terms, decay, fd1, fd2, zero, symmetry, linear, scaling].map(Tally::finish));
    Ok(())
}

fn spectral_checks(out: &mut Vec<Check>, sc: &Scenario, depth: usize, rng: &mut ProbeRng) -> Result<()> {
    let group = "spectral";
    let cfg = sc.metric;
    let opts = PowerOptions {
        tol: sc.params.tol,
        max_iter: sc.params.max_iter,
    };
    let op = OperatorHandle::new(sc.potential.clone(), cfg)?;
    let base = match power_iteration(&op, opts) {
        Ok(r) => r,
        Err(e) => {
            out.push(Check::failed(group, "power_iteration_residual", &e));
            return Ok(());
        }
    };
    let mut residual = Tally::at_most(group, "power_iteration_residual", opts.tol);
    residual.record(base.residual / base.eigenvalue);
    out.push(residual.finish());

    if sc.potential.depth() <= 2 {
        let mut oracle = Tally::at_most(group, "matrix_oracle_agreement", SPECTRAL_TOL);
        let rho = matrix_oracle(&op)?.spectral_radius();
        oracle.eq(base.eigenvalue, rho, rho);
        out.push(oracle.finish());
    } else {
        out.push(Check::skipped(group, "matrix_oracle_agreement", "potential reads more than two coordinates"));
    }

    let mut shift = Tally::at_most(group, "pressure_shift_law", SPECTRAL_TOL);
    let shifted = power_iteration(&op.with_potential(sc.potential.map(|v| v + 0.5)?)?, opts)?;
    shift.eq(shifted.pressure - base.pressure, 0.5, 1.0);
    out.push(shift.finish());

    let mut monotone = Tally::at_most(group, "pressure_monotonicity", IDENTITY_TOL);
    for _ in 0..3 {
        let lower = random_function(&sc.space, depth, -1.0, 1.0, rng)?;
        let bump = random_function(&sc.space, depth, 0.0, 0.5, rng)?;
        let upper = lower.add(&bump)?;
        let l1 = power_iteration(&op.with_potential(lower)?, opts)?.eigenvalue;
        let l2 = power_iteration(&op.with_potential(upper)?, opts)?.eigenvalue;
        monotone.le(l1, l2);
    }
    out.push(monotone.finish());
    Ok(())
}
