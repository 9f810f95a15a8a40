//! Acceptance suite. Each criterion prints one PASS or FAIL line; the
//! process exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ruelle_core::analyticity::{derivative_apply, finite_difference_sweep, remainder_decay, series_check};
use ruelle_core::function_space::{holder_norm, random_function, ProbeRng};
use ruelle_core::{
    matrix_oracle, power_iteration, Alphabet, CylinderFunction, IntervalSet, MetricConfig, OperatorHandle,
    PowerOptions, Scenario, ShiftSpace, TransitionConstraint, TruncatedSequence,
};

const SLACK: f64 = 1e-9;

/// Counts checks and keeps the first few failures.
#[derive(Default)]
struct Tally {
    checks: usize,
    failed: usize,
    messages: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            if self.messages.len() < 6 {
                self.messages.push(what());
            }
        }
    }

    /// `lhs <= rhs (1 + slack)`.
    fn at_most(&mut self, lhs: f64, rhs: f64, slack: f64, what: &str) {
        self.check(lhs <= rhs + slack * rhs.abs(), || format!("{what}: {lhs:e} > {rhs:e}"));
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

type Criterion = fn() -> ruelle_core::Result<Tally>;

fn main() {
    let criteria: [(&str, Option<u64>, Criterion); 8] = [
        ("norm inequalities", Some(60), norm_inequalities),
        ("analyticity series", Some(30), analyticity_series),
        ("derivative correctness", Some(30), derivative_correctness),
        ("spectral oracles", Some(10), spectral_oracles),
        ("generalized/plain coincidence", None, coincidence),
        ("countable alphabet", None, countable_alphabet),
        ("combinatorial checks", None, combinatorial),
        ("determinism", None, determinism),
    ];
    let mut all_passed = true;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let over_time = limit.is_some_and(|s| elapsed > Duration::from_secs(s));
        let (passed, detail) = match outcome {
            Ok(Ok(t)) => {
                let mut detail = format!("{}/{} checks", t.checks - t.failed, t.checks);
                if !t.notes.is_empty() {
                    detail.push_str(&format!("; {}", t.notes.join("; ")));
                }
                if !t.messages.is_empty() {
                    detail.push_str(&format!("; failures: {}", t.messages.join(" | ")));
                }
                (t.failed == 0 && t.checks > 0, detail)
            }
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        let passed = passed && !over_time;
        let limit = limit.map_or(String::new(), |s| format!(" of {s}s"));
        println!(
            "{} criterion {}: {name}: {detail} [{:.2}s{limit}]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
        );
        all_passed &= passed;
    }
    if !all_passed {
        std::process::exit(1);
    }
}

fn rng(seed: u64) -> ProbeRng {
    CylinderFunction::probe_rng(seed)
}

fn finite_space(k: usize, matrix: Option<&[u8]>) -> Arc<ShiftSpace> {
    let alphabet = Alphabet::finite(k).unwrap();
    match matrix {
        Some(m) => ShiftSpace::generalized(alphabet, TransitionConstraint::from_matrix(k, m).unwrap()).unwrap(),
        None => ShiftSpace::plain(alphabet),
    }
}

/// Every length-`depth` word over `n` symbols accepted by `allowed`, in
/// lexicographic order.
fn words(n: usize, depth: usize, allowed: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..n).filter_map(move |s| {
                    if w.last().is_some_and(|&p| !allowed(p, s)) {
                        return None;
                    }
                    let mut v = w.clone();
                    v.push(s);
                    Some(v)
                })
            })
            .collect();
    }
    out
}

fn arc(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(2.0 * PI - d)
}

/// One family of the norm-inequality suite.
struct Family {
    name: &'static str,
    space: Arc<ShiftSpace>,
    metric: MetricConfig,
    depth: usize,
    /// `(a, m) -> a may precede m`, written independently of the space.
    allowed: Box<dyn Fn(usize, usize) -> bool>,
    symbol_distance: Box<dyn Fn(usize, usize) -> f64>,
}

impl Family {
    fn new(name: &'static str, space: Arc<ShiftSpace>, c: f64, gamma: f64, depth: usize) -> Self {
        Self {
            name,
            metric: MetricConfig::new(c, gamma, depth + 1).unwrap(),
            depth,
            allowed: Box::new(|_, _| true),
            symbol_distance: Box::new(|a, b| (a != b) as u8 as f64),
            space,
        }
    }

    fn sft(name: &'static str, k: usize, matrix: &'static [u8], c: f64, gamma: f64, depth: usize) -> Self {
        Self {
            allowed: Box::new(move |a, m| matrix[a * k + m] == 1),
            ..Self::new(name, finite_space(k, Some(matrix)), c, gamma, depth)
        }
    }

    fn circle(name: &'static str, n: usize, depth: usize) -> Self {
        let node = move |j: usize| 2.0 * PI * j as f64 / n as f64;
        Self {
            symbol_distance: Box::new(move |a, b| arc(node(a), node(b))),
            ..Self::new(name, ShiftSpace::plain(Alphabet::circle(n).unwrap()), 2.0, 1.0, depth)
        }
    }

    /// Hölder constant by direct enumeration of word pairs.
    fn brute_holder(&self, f: &CylinderFunction) -> f64 {
        let ws = words(self.space.symbols(), f.depth(), &self.allowed);
        let values: Vec<f64> = ws
            .iter()
            .map(|w| f.evaluate(&TruncatedSequence(w.clone())).unwrap())
            .collect();
        let mut best = 0.0f64;
        for i in 0..ws.len() {
            for j in (i + 1)..ws.len() {
                let mut d = 0.0;
                let mut scale = 1.0;
                for t in 0..f.depth() {
                    d += (self.symbol_distance)(ws[i][t], ws[j][t]) * scale;
                    scale /= self.metric.c;
                }
                best = best.max((values[i] - values[j]).abs() / d.powf(self.metric.gamma));
            }
        }
        best
    }
}

fn norm_inequalities() -> ruelle_core::Result<Tally> {
    const GOLDEN: &[u8] = &[1, 1, 1, 0];
    const SFT3: &[u8] = &[1, 1, 0, 0, 1, 1, 1, 1, 1];
    const SFT4: &[u8] = &[1, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1];
    let families = [
        Family::new("full-2", finite_space(2, None), 2.0, 1.0, 3),
        Family::new("full-3", finite_space(3, None), 3.0, 0.7, 3),
        Family::new("full-4", finite_space(4, None), 2.5, 0.5, 3),
        Family::sft("golden", 2, GOLDEN, 2.0, 1.0, 4),
        Family::sft("sft-3", 3, SFT3, 3.0, 0.7, 4),
        Family::sft("sft-4", 4, SFT4, 2.0, 0.8, 3),
        Family::circle("circle-32", 32, 2),
        Family::circle("circle-256", 256, 1),
    ];
    let mut t = Tally::default();
    for (fi, fam) in families.iter().enumerate() {
        let cfg = &fam.metric;
        let mut r = rng(1000 + fi as u64);
        let cases = 100;
        for i in 0..cases {
            let psi_depth = 1 + i % fam.depth;
            let phi_depth = 1 + (i / fam.depth) % fam.depth;
            let psi = random_function(&fam.space, psi_depth, -1.0, 1.0, &mut r)?;
            let phi = random_function(&fam.space, phi_depth, -2.0, 2.0, &mut r)?;
            let np = holder_norm(&psi, cfg)?;
            let nf = holder_norm(&phi, cfg)?;
            let prod = psi.mul(&phi)?;
            let npr = holder_norm(&prod, cfg)?;
            let tag = |what: &str| format!("{} case {i} {what}", fam.name);

            t.at_most(npr.norm, 2.0 * np.norm * nf.norm, SLACK, &tag("product"));
            t.at_most(npr.sup_norm, np.sup_norm * nf.sup_norm, 0.0, &tag("sup product"));
            t.at_most(holder_norm(&psi.add(&phi)?, cfg)?.norm, np.norm + nf.norm, SLACK, &tag("triangle"));

            let k = 2 + i % 4;
            let factors = (0..k)
                .map(|j| random_function(&fam.space, 1 + (i + j) % fam.depth, -1.5, 1.5, &mut r))
                .collect::<ruelle_core::Result<Vec<_>>>()?;
            let mut rhs = 2f64.powi(k as i32 - 1);
            for f in &factors {
                rhs *= holder_norm(f, cfg)?.norm;
            }
            let lhs = holder_norm(&CylinderFunction::product(&fam.space, &factors)?, cfg)?.norm;
            t.at_most(lhs, rhs, SLACK, &tag(&format!("{k}-fold product")));

            let op = OperatorHandle::new(psi.clone(), *cfg)?;
            let rep = op.bounds_report(&phi)?;
            t.at_most(rep.image.sup_norm, rep.bounds.sup_bound, SLACK, &tag("sup bound"));
            t.at_most(rep.image.holder_constant, rep.bounds.holder_bound, SLACK, &tag("holder bound"));
            t.at_most(rep.image.norm, rep.bounds.opnorm_bound * nf.norm, SLACK, &tag("operator norm"));
            let probe = op.estimate_opnorm(std::slice::from_ref(&phi))?;
            t.at_most(probe, rep.bounds.opnorm_bound, SLACK, &tag("operator norm estimate"));

            if i < 3 {
                for (f, scanned) in [(&psi, np.holder_constant), (&phi, nf.holder_constant), (&prod, npr.holder_constant)] {
                    let brute = fam.brute_holder(f);
                    t.check((scanned - brute).abs() <= 1e-12 * brute.max(1.0), || {
                        tag(&format!("holder scan {scanned:e} vs enumeration {brute:e}"))
                    });
                }
            }
        }
        t.note(format!("{} x{cases}", fam.name));
    }
    Ok(t)
}

/// A random table rescaled to `|f|_gamma` drawn from `[0.25, 1]`.
fn unit_ball_function(
    space: &Arc<ShiftSpace>,
    cfg: &MetricConfig,
    depth: usize,
    lo: f64,
    hi: f64,
    r: &mut ProbeRng,
) -> ruelle_core::Result<CylinderFunction> {
    let f = random_function(space, depth, lo, hi, r)?;
    let target = 0.25 + 0.75 * random_function(space, 0, 0.0, 1.0, r)?.raw_values()[0];
    Ok(f.scale(target / holder_norm(&f, cfg)?.norm))
}

fn analytic_settings() -> Vec<(&'static str, Arc<ShiftSpace>, MetricConfig, usize)> {
    vec![
        ("full-2", finite_space(2, None), MetricConfig::new(2.0, 1.0, 4).unwrap(), 3),
        ("golden", finite_space(2, Some(&[1, 1, 1, 0])), MetricConfig::new(2.0, 1.0, 4).unwrap(), 3),
        (
            "sft-3",
            finite_space(3, Some(&[1, 1, 0, 0, 1, 1, 1, 1, 1])),
            MetricConfig::new(3.0, 0.7, 4).unwrap(),
            3,
        ),
        ("circle-32", ShiftSpace::plain(Alphabet::circle(32).unwrap()), MetricConfig::new(2.0, 1.0, 3).unwrap(), 2),
    ]
}

fn analyticity_series() -> ruelle_core::Result<Tally> {
    let scales = [1.0, 0.5, 0.25];
    let mut t = Tally::default();
    let mut spread = (f64::INFINITY, 0.0f64);
    for (si, (name, space, cfg, depth)) in analytic_settings().into_iter().enumerate() {
        let mut r = rng(2000 + si as u64);
        for case in 0..5 {
            let psi = random_function(&space, depth, -1.0, 1.0, &mut r)?;
            let beta = unit_ball_function(&space, &cfg, depth, -1.0, 1.0, &mut r)?;
            let phi = random_function(&space, depth, -1.0, 1.0, &mut r)?;
            let op = OperatorHandle::new(psi, cfg)?;
            for row in series_check(&op, &beta, &phi, 8)? {
                t.at_most(row.error, row.bound, SLACK, &format!("{name} case {case} order {}", row.order));
            }

            // positive data keep the leading remainder coefficient away from zero
            let beta = unit_ball_function(&space, &cfg, depth, 0.0, 1.0, &mut r)?;
            let phi = random_function(&space, depth, 0.5, 1.5, &mut r)?;
            for n in 1..=8 {
                let rem = remainder_decay(&op, &beta, &phi, n, &scales)?;
                let target = 2f64.powi(n as i32 + 1);
                for w in rem.windows(2) {
                    let ratio = w[0] / w[1];
                    spread = (spread.0.min(ratio / target), spread.1.max(ratio / target));
                    t.check(ratio >= target / 1.5 && ratio <= 1.5 * target, || {
                        format!("{name} case {case} order {n}: ratio {ratio:.4} vs {target}")
                    });
                }
            }
        }
    }
    t.note(format!("ratio/2^(n+1) in [{:.3}, {:.3}]", spread.0, spread.1));
    Ok(t)
}

fn observed_orders(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

fn derivative_correctness() -> ruelle_core::Result<Tally> {
    let steps = [1e-2, 5e-3, 2.5e-3];
    let mut t = Tally::default();
    let mut worst = f64::INFINITY;
    for (si, (name, space, cfg, depth)) in analytic_settings().into_iter().enumerate() {
        let mut r = rng(3000 + si as u64);
        for case in 0..3 {
            let psi = random_function(&space, depth, -1.0, 1.0, &mut r)?;
            let beta = random_function(&space, depth, -1.0, 1.0, &mut r)?;
            let phi = random_function(&space, depth, -1.0, 1.0, &mut r)?;
            let op = OperatorHandle::new(psi.clone(), cfg)?;
            let d1 = derivative_apply(&op, &[&beta], &phi)?;
            let d2 = derivative_apply(&op, &[&beta, &beta], &phi)?;
            let base = op.apply(&phi)?;
            let mut first = Vec::new();
            let mut second = Vec::new();
            for &h in &steps {
                let plus = op.with_potential(psi.axpby(1.0, &beta, h)?)?.apply(&phi)?;
                let minus = op.with_potential(psi.axpby(1.0, &beta, -h)?)?.apply(&phi)?;
                let central = plus.sub(&minus)?.scale(0.5 / h);
                let curvature = plus.sub(&base.scale(2.0))?.add(&minus)?.scale(1.0 / (h * h));
                first.push(op.image_norm(&central.sub(&d1)?)?.norm);
                second.push(op.image_norm(&curvature.sub(&d2)?)?.norm);
            }
            for (label, errs) in [("first", &first), ("second", &second)] {
                for p in observed_orders(&steps, errs) {
                    worst = worst.min(p);
                    t.check(p >= 1.9, || format!("{name} case {case} {label} derivative order {p:.3}"));
                }
            }
            let sweep = finite_difference_sweep(&op, &beta, &phi, &steps)?;
            let lib = sweep.min_first_order().zip(sweep.min_second_order());
            t.check(lib.is_some_and(|(a, b)| a >= 1.9 && b >= 1.9), || {
                format!("{name} case {case} reported orders {lib:?}")
            });

            let zero = CylinderFunction::zero(&space);
            for dirs in [vec![&zero], vec![&zero, &zero], vec![&zero, &beta]] {
                let d = derivative_apply(&op, &dirs, &phi)?;
                t.check(d.raw_values().iter().all(|&v| v == 0.0), || {
                    format!("{name} case {case}: zero direction gave a nonzero derivative")
                });
            }
            let z = finite_difference_sweep(&op, &zero, &phi, &steps)?;
            t.check(z.first.iter().chain(&z.second).all(|&e| e == 0.0), || {
                format!("{name} case {case}: zero direction gave nonzero differences")
            });
        }
    }
    t.note(format!("min observed order {worst:.3}"));
    Ok(t)
}

/// `2 pi I_0(1)` from the Bessel series.
fn exp_cos_integral() -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..40 {
        sum += term;
        term *= 0.25 / (k * k) as f64;
    }
    2.0 * PI * sum
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn spectral_oracles() -> ruelle_core::Result<Tally> {
    let mut t = Tally::default();
    let opts = PowerOptions::default();

    let golden = finite_space(2, Some(&[1, 1, 1, 0]));
    let cfg = MetricConfig::new(2.0, 1.0, 3)?;
    let op = OperatorHandle::new(CylinderFunction::zero(&golden), cfg)?;
    let res = power_iteration(&op, opts)?;
    // largest root of x^2 - x - 1, the characteristic polynomial of [[1,1],[1,0]]
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    t.check((res.pressure - phi.ln()).abs() <= 1e-10, || {
        format!("golden pressure {} vs {}", res.pressure, phi.ln())
    });
    let radius = matrix_oracle(&op)?.spectral_radius();
    t.check((radius.ln() - res.pressure).abs() <= 1e-10 && relative(radius, phi) <= 1e-10, || {
        format!("golden matrix radius {radius} vs power {}", res.eigenvalue)
    });
    t.note(format!("golden |P - log phi| = {:.1e}", (res.pressure - phi.ln()).abs()));

    for k in 2..=4 {
        let space = finite_space(k, None);
        for c in [0.0, 1.0] {
            let op = OperatorHandle::new(CylinderFunction::constant(&space, c), cfg)?;
            let lambda = power_iteration(&op, opts)?.eigenvalue;
            let expected = k as f64 * f64::exp(c);
            t.check(relative(lambda, expected) <= 1e-10, || format!("{k}-shift c={c}: {lambda} vs {expected}"));
        }
    }

    let circle = ShiftSpace::plain(Alphabet::circle(256)?);
    let psi = CylinderFunction::from_coord_fn(&circle, 1, |x| x[0].cos())?;
    let op = OperatorHandle::new(psi, MetricConfig::new(2.0, 1.0, 2)?)?;
    let lambda = power_iteration(&op, opts)?.eigenvalue;
    let expected = exp_cos_integral();
    t.check(relative(lambda, expected) <= 1e-6, || format!("xy circle: {lambda} vs {expected}"));
    t.note(format!("xy relative error {:.1e}", relative(lambda, expected)));
    Ok(t)
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn bundled_scenarios() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .expect("scenario directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
}

fn coincidence() -> ruelle_core::Result<Tally> {
    let mut t = Tally::default();
    let paths = bundled_scenarios();
    for path in &paths {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let sc = Scenario::load(path)?;
        let alphabet = sc.space.alphabet().clone();
        let n = alphabet.len();
        let budget = sc.space.budget();
        let plain_space = ShiftSpace::build(alphabet.clone(), None, budget)?;
        let full = TransitionConstraint::new(n, vec![1.0; n * n], IntervalSet::real_line())?;
        let general_space = ShiftSpace::build(alphabet, Some(full), budget)?;
        let plain = sc.with_space(plain_space.clone())?;
        let general = sc.with_space(general_space.clone())?;
        t.check(general.space.is_generalized() && !plain.space.is_generalized(), || {
            format!("{name}: twin spaces have the wrong kind")
        });
        let plain_op = OperatorHandle::new(plain.potential.clone(), plain.metric)?;
        let general_op = OperatorHandle::new(general.potential.clone(), general.metric)?;

        let mut pairs = vec![
            (plain.function.clone(), general.function.clone()),
            (plain.direction.clone(), general.direction.clone()),
        ];
        let mut r = rng(sc.seed);
        let depth = sc.metric.depth - 1;
        for _ in 0..5 {
            let f = random_function(&plain_space, depth, -1.0, 1.0, &mut r)?;
            let g = f.rebind(&general_space)?;
            pairs.push((f, g));
        }
        for (k, (f, g)) in pairs.iter().enumerate() {
            let a = plain_op.apply(f)?;
            let b = general_op.apply(g)?;
            t.check(a.bit_identical(&b)?, || format!("{name}: input {k} differs"));
        }
    }
    t.note(format!("{} scenarios", paths.len()));
    Ok(t)
}

fn step(v: f64) -> f64 {
    (v > 0.0) as u8 as f64
}

fn countable_alphabet() -> ruelle_core::Result<Tally> {
    let mut t = Tally::default();
    let atoms = 20;
    // independent copies of the atoms, weights and section rule
    let z: Vec<f64> = (1..=atoms).map(|i| 1.0 - 2f64.powi(-i)).chain([1.0]).collect();
    let mass: f64 = (1..=atoms).map(|i| 2f64.powi(-i)).sum();
    let p: Vec<f64> = (1..=atoms).map(|i| 2f64.powi(-i) / mass).chain([0.0]).collect();
    let rule = |a: usize, m: usize| z[m] > 0.8 || z[a] < 0.6;
    let n = z.len();

    let alphabet = Alphabet::geometric_atoms(atoms as usize)?;
    t.check(alphabet.len() == n && (0..n).all(|i| (alphabet.coord(i) - z[i]).abs() <= 1e-15), || {
        "atom coordinates differ".to_string()
    });
    let interval = IntervalSet::new(vec![(1.0, f64::INFINITY)])?;
    let constraint = TransitionConstraint::from_fn(&alphabet, interval, |a, m| step(m - 0.8) + step(0.6 - a))?;
    let space = ShiftSpace::generalized(alphabet.clone(), constraint.clone())?;
    let cfg = MetricConfig::new(2.0, 1.0, 4)?;

    for m in 0..n {
        let expected: Vec<usize> = (0..n).filter(|&a| rule(a, m)).collect();
        t.check(space.section(m) == expected.as_slice(), || format!("section of {m} differs"));
    }

    let mut r = rng(6000);
    let mut worst = 0.0f64;
    for depth in [2usize, 3] {
        for _ in 0..3 {
            let psi = random_function(&space, depth, -1.0, 1.0, &mut r)?;
            let phi = random_function(&space, depth, -1.0, 1.0, &mut r)?;
            let image = OperatorHandle::new(psi.clone(), cfg)?.apply(&phi)?;
            let eval = |f: &CylinderFunction, w: Vec<usize>| f.evaluate(&TruncatedSequence(w)).unwrap();
            for x in words(n, depth - 1, &|a, m| rule(a, m)) {
                let mut oracle = 0.0;
                for a in (0..n).filter(|&a| rule(a, x[0])) {
                    let ax: Vec<usize> = std::iter::once(a).chain(x.iter().copied()).collect();
                    oracle += p[a] * eval(&psi, ax.clone()).exp() * eval(&phi, ax);
                }
                let got = eval(&image, x.clone());
                let err = (got - oracle).abs();
                worst = worst.max(err);
                t.check(err <= 1e-12 * oracle.abs().max(1.0), || format!("apply at {x:?}: {got} vs {oracle}"));
            }
        }
    }
    t.note(format!("max |apply - oracle| = {worst:.1e}"));

    // with psi = 0 and phi = 1 the image is the measure of each section
    let ones = OperatorHandle::new(CylinderFunction::zero(&space), cfg)?.apply(&CylinderFunction::constant(&space, 1.0))?;
    for m in 0..n {
        let section_mass: f64 = (0..n).filter(|&a| rule(a, m)).map(|a| p[a]).sum();
        let got = ones.evaluate(&TruncatedSequence(vec![m]))?;
        t.check((got - section_mass).abs() <= 1e-15, || format!("section mass at {m}: {got} vs {section_mass}"));
        if z[m] <= 0.8 {
            t.check(got < 1.0 - 1e-3, || format!("section at {m} was not restricted"));
        }
    }

    for radius in [0.05, 0.1, 0.2, 0.5] {
        let expected = (0..n).all(|m| {
            (0..n).all(|m2| (z[m] - z[m2]).abs() >= radius || (0..n).all(|a| rule(a, m) == rule(a, m2)))
        });
        let got = constraint.sectional_triviality(&alphabet, radius)?.trivial;
        t.check(got == expected, || format!("triviality at radius {radius}: {got} vs {expected}"));
        if radius == 0.1 {
            t.check(got, || "not sectionally trivial at radius 0.1".to_string());
        }
    }

    let bundled = Scenario::load(&scenario_dir().join("countable.toml"))?;
    let image = OperatorHandle::new(bundled.potential.clone(), bundled.metric)?.apply(&bundled.function)?;
    for m in 0..n {
        let oracle: f64 = (0..n)
            .filter(|&a| rule(a, m))
            .map(|a| p[a] * (0.5 * z[a] * z[m]).exp() * (1.0 + z[a]))
            .sum();
        let got = image.evaluate(&TruncatedSequence(vec![m]))?;
        t.check((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), || {
            format!("bundled scenario at {m}: {got} vs {oracle}")
        });
    }
    Ok(t)
}

fn combinatorial() -> ruelle_core::Result<Tally> {
    let mut t = Tally::default();
    let golden = finite_space(2, Some(&[1, 1, 1, 0]));
    let mut fib = vec![0u64, 1, 1];
    while fib.len() <= 12 {
        let k = fib.len();
        fib.push(fib[k - 1] + fib[k - 2]);
    }
    for depth in 2..=10 {
        let count = golden.prefixes(depth)?.len() as u64;
        let enumerated = golden.enumerate_admissible(depth)?.len() as u64;
        t.check(count == fib[depth + 2] && enumerated == count, || {
            format!("depth {depth}: {count} prefixes, {enumerated} enumerated, F = {}", fib[depth + 2])
        });
    }

    let atoms = Alphabet::geometric_atoms(20)?;
    let countable = TransitionConstraint::from_fn(&atoms, IntervalSet::new(vec![(1.0, f64::INFINITY)])?, |a, m| {
        step(m - 0.8) + step(0.6 - a)
    })?;
    let spaces: Vec<(&str, Arc<ShiftSpace>, usize)> = vec![
        ("golden", golden.clone(), 4),
        ("sft-3", finite_space(3, Some(&[1, 1, 0, 0, 1, 1, 1, 1, 1])), 4),
        ("sft-4", finite_space(4, Some(&[1, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 1])), 4),
        ("full-3", finite_space(3, None), 4),
        ("countable", ShiftSpace::generalized(atoms, countable)?, 3),
    ];
    for (name, space, max_depth) in &spaces {
        let n = space.symbols();
        for depth in 1..*max_depth {
            // every word, admissible or not
            for x in words(n, depth, &|_, _| true) {
                let x_ok = space.is_admissible(&x);
                let section: BTreeSet<usize> = space.section(x[0]).iter().copied().collect();
                let mut preimages = BTreeSet::new();
                for a in 0..n {
                    let ax: Vec<usize> = std::iter::once(a).chain(x.iter().copied()).collect();
                    let ax_ok = space.is_admissible(&ax);
                    t.check(ax_ok == (section.contains(&a) && x_ok), || {
                        format!("{name}: prepend {a} to {x:?} disagrees with the section")
                    });
                    if ax_ok {
                        preimages.insert(a);
                    }
                }
                if x_ok {
                    t.check(preimages.len() == section.len() && preimages == section, || {
                        format!("{name}: {} preimages of {x:?}, section has {}", preimages.len(), section.len())
                    });
                }
            }
        }
    }
    t.note(format!("{} spaces exhaustive", spaces.len()));
    Ok(t)
}

fn run_suite(config: &Path, out: &Path, threads: usize) -> std::process::ExitStatus {
    Command::new(env!("CARGO_BIN_EXE_ruelle"))
        .arg("suite")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--threads")
        .arg(threads.to_string())
        .output()
        .expect("run ruelle")
        .status
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().is_some_and(|n| n != "manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> ruelle_core::Result<Tally> {
    let mut t = Tally::default();
    let tmp = tempfile::tempdir()?;
    for name in ["golden-mean", "sft-three", "xy-circle"] {
        let config = scenario_dir().join(format!("{name}.toml"));
        let mut runs = Vec::new();
        for threads in [1, 2] {
            let out = tmp.path().join(format!("{name}-{threads}"));
            let status = run_suite(&config, &out, threads);
            t.check(status.success(), || format!("{name} with {threads} threads exited with {status}"));
            t.check(out.join("manifest.json").exists(), || format!("{name}: no manifest"));
            runs.push(outputs(&out));
        }
        t.check(!runs[0].is_empty() && runs[0] == runs[1], || {
            let names = |r: &Vec<(String, Vec<u8>)>| r.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
            format!("{name}: outputs differ ({:?} vs {:?})", names(&runs[0]), names(&runs[1]))
        });
        t.note(format!("{name}: {} files", runs[0].len()));
    }
    Ok(t)
}
