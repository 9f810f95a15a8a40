//! Subcommand implementations. Each returns its artifacts in memory; the
//! caller writes them and the manifest.

use serde_json::{json, Value};

use ruelle_core::analyticity::{
    derivative_apply, finite_difference_sweep, remainder_decay, series_check, taylor_series, taylor_term,
    SeriesOptions,
};
use ruelle_core::function_space::{holder_norm, random_function, PROBE_GENERATOR};
use ruelle_core::{
    matrix_oracle, power_iteration, CylinderFunction, HolderNorm, OperatorHandle, PowerOptions, Result, Scenario,
};

use crate::output::{num, Artifact, Table};
use crate::suite::{probe_depth, run_suite, INEQUALITY_SLACK};

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// False when a checked invariant or bound was violated.
    pub passed: bool,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
}

pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub config_hash: &'a str,
}

fn norm_json(h: &HolderNorm) -> Value {
    json!({
        "sup_norm": h.sup_norm,
        "holder_constant": h.holder_constant,
        "gamma": h.gamma,
        "norm": h.norm,
    })
}

fn function_table(f: &CylinderFunction) -> Result<Table> {
    let mut header: Vec<String> = (0..f.depth()).map(|k| format!("x{k}")).collect();
    header.push("value".into());
    let mut t = Table::new(&header);
    for (prefix, v) in f.rows()? {
        let mut row: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
        row.push(num(v));
        t.push(row);
    }
    Ok(t)
}

fn operator(sc: &Scenario) -> Result<OperatorHandle> {
    OperatorHandle::new(sc.potential.clone(), sc.metric)
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQUALITY_SLACK * rhs.abs()
}

pub fn apply(ctx: &Context) -> Result<Outcome> {
    let sc = ctx.scenario;
    let image = operator(sc)?.apply(&sc.function)?;
    let table = function_table(&image)?;
    let summary = vec![format!("image depth {}, {} admissible prefixes", image.depth(), table.len())];
    Ok(Outcome {
        artifacts: vec![table.into_artifact("image.csv", ctx.config_hash)],
        passed: true,
        summary,
    })
}

pub fn bounds(ctx: &Context) -> Result<Outcome> {
    let sc = ctx.scenario;
    let op = operator(sc)?;
    let report = op.bounds_report(&sc.function)?;
    let depth = probe_depth(&sc.space, &sc.metric, 1024)?;
    let mut rng = CylinderFunction::probe_rng(sc.seed);
    let probes = (0..sc.params.probes)
        .map(|_| random_function(&sc.space, depth, -1.0, 1.0, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let estimate = op.estimate_opnorm(&probes)?;
    let b = report.bounds;
    let sup_ok = holds(report.image.sup_norm, b.sup_bound);
    let hol_ok = holds(report.image.holder_constant, b.holder_bound);
    let op_ok = holds(estimate, b.opnorm_bound);
    let mut value = json!({
        "config_sha256": ctx.config_hash,
        "potential": norm_json(&report.potential),
        "function": norm_json(&report.function),
        "image": norm_json(&report.image),
        "image_holder_constant_all_pairs": report.image_holder_all_pairs,
        "bounds": {
            "sup_bound": b.sup_bound,
            "holder_bound": b.holder_bound,
            "opnorm_bound": b.opnorm_bound,
        },
        "opnorm_estimate": {
            "value": estimate,
            "probes": probes.len(),
            "probe_depth": depth,
            "probe_generator": PROBE_GENERATOR,
            "seed": sc.seed,
        },
        "checks": {
            "sup_bound": sup_ok,
            "holder_bound": hol_ok,
            "opnorm_bound": op_ok,
        },
        "relative_slack": INEQUALITY_SLACK,
        "cross_section_pairs_excluded": report.cross_section_pairs_excluded,
    });
    if report.cross_section_pairs_excluded {
        value["note"] = json!(
            "sections are not uniform: the image Hölder constant and its bound only cover pairs whose first symbols share a section"
        );
    }
    let summary = vec![
        format!("|L f|_0 = {} <= {} : {sup_ok}", num(report.image.sup_norm), num(b.sup_bound)),
        format!("Hol(L f) = {} <= {} : {hol_ok}", num(report.image.holder_constant), num(b.holder_bound)),
        format!("opnorm estimate {} <= {} : {op_ok}", num(estimate), num(b.opnorm_bound)),
    ];
    Ok(Outcome {
        artifacts: vec![Artifact::json("bounds.json", &value)],
        passed: sup_ok && hol_ok && op_ok,
        summary,
    })
}

pub fn norms(ctx: &Context) -> Result<Outcome> {
    let sc = ctx.scenario;
    let entry = |f: &CylinderFunction, source: String| -> Result<Value> {
        let mut v = norm_json(&holder_norm(f, &sc.metric)?);
        v["depth"] = json!(f.depth());
        v["source"] = json!(source);
        Ok(v)
    };
    let value = json!({
        "config_sha256": ctx.config_hash,
        "metric": {"c": sc.metric.c, "gamma": sc.metric.gamma, "depth": sc.metric.depth},
        "potential": entry(&sc.potential, sc.potential_source.describe())?,
        "function": entry(&sc.function, sc.function_source.describe())?,
        "direction": entry(&sc.direction, sc.direction_source.describe())?,
    });
    let summary = ["potential", "function", "direction"]
        .iter()
        .map(|k| format!("{k}: |.|_gamma = {}", num(value[k]["norm"].as_f64().unwrap_or(f64::NAN))))
        .collect();
    Ok(Outcome {
        artifacts: vec![Artifact::json("norms.json", &value)],
        passed: true,
        summary,
    })
}

/// Smallest positive distance between alphabet points.
fn default_radius(sc: &Scenario) -> f64 {
    let a = sc.space.alphabet();
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let d = a.distance(i, j);
            if d > 0.0 {
                best = best.min(d);
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}

pub fn sections(ctx: &Context) -> Result<Outcome> {
    let sc = ctx.scenario;
    let space = &sc.space;
    let alphabet = space.alphabet();
    let mut table = Table::new(&["symbol", "coordinate", "weight", "section_id", "section_size", "section"]);
    for m in 0..alphabet.len() {
        let s = space.section(m);
        table.push(vec![
            m.to_string(),
            num(alphabet.coord(m)),
            num(alphabet.weight(m)),
            space.section_id(m).to_string(),
            s.len().to_string(),
            s.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
        ]);
    }
    let radius = sc.params.radius.unwrap_or_else(|| default_radius(sc));
    let triviality = match space.constraint() {
        Some(c) => {
            let t = c.sectional_triviality(alphabet, radius)?;
            json!({"trivial": t.trivial, "witness": t.witness.map(|(m, n)| vec![m, n])})
        }
        None => json!({"trivial": true, "witness": null}),
    };
    let mut counts = Vec::new();
    for d in 1..=sc.metric.depth {
        match space.prefixes(d) {
            Ok(t) => counts.push(json!({"depth": d, "count": t.len()})),
            Err(_) => break,
        }
    }
    let value = json!({
        "config_sha256": ctx.config_hash,
        "generalized": space.is_generalized(),
        "uniform_sections": space.has_uniform_sections(),
        "radius": radius,
        "sectional_triviality": triviality,
        "admissible_counts": counts,
    });
    let summary = vec![
        format!("uniform sections: {}", space.has_uniform_sections()),
        format!("sectionally trivial at radius {}: {}", num(radius), value["sectional_triviality"]["trivial"]),
    ];
    Ok(Outcome {
        artifacts: vec![
            table.into_artifact("sections.csv", ctx.config_hash),
            Artifact::json("sections.json", &value),
        ],
        passed: true,
        summary,
    })
}

pub fn taylor_check(ctx: &Context) -> Result<Outcome> {
    let sc = ctx.scenario;
    let op = operator(sc)?;
    let (beta, phi) = (&sc.direction, &sc.function);
    let order = sc.params.order;
    let opnorm = op.opnorm_bound()?;
    let b = holder_norm(beta, &sc.metric)?.norm;
    let phi_norm = holder_norm(phi, &sc.metric)?.norm;

    let mut passed = true;
    let mut csv = Table::new(&["order", "error", "bound"]);
    let mut rows = Vec::new();
    for r in series_check(&op, beta, phi, order)? {
        let ok = holds(r.error, r.bound);
        passed &= ok;
        csv.push(vec![r.order.to_string(), num(r.error), num(r.bound)]);
        rows.push(json!({"order": r.order, "error": r.error, "bound": r.bound, "holds": ok}));
    }

    let mut terms = Vec::new();
    let mut fact = 1.0;
    for n in 0..=order {
        if n > 0 {
            fact *= n as f64;
        }
        let t = op.image_norm(&taylor_term(&op, beta, n, phi)?)?.norm;
        let bound = opnorm * (2.0 * b).powi(n as i32) / fact * phi_norm;
        let ok = holds(t, bound);
        passed &= ok;
        terms.push(json!({"order": n, "image_norm": t, "bound": bound, "holds": ok}));
    }

    let scales = [1.0, 0.5, 0.25];
    let mut decay_csv = Table::new(&["order", "scale", "remainder"]);
    let mut decay = Vec::new();
    for n in 1..=order {
        let r = remainder_decay(&op, beta, phi, n, &scales)?;
        for (s, v) in scales.iter().zip(&r) {
            decay_csv.push(vec![n.to_string(), num(*s), num(*v)]);
        }
        let expected = 2f64.powi(n as i32 + 1);
        let ratios: Vec<f64> = r.windows(2).map(|w| w[0] / w[1]).collect();
        let ok = if r.iter().all(|&v| v > 0.0) {
            ratios.iter().all(|&q| q >= expected / 1.5 && q <= expected * 1.5)
        } else {
            true
        };
        passed &= ok;
        decay.push(json!({"order": n, "remainders": r, "ratios": ratios, "expected_ratio": expected, "holds": ok}));
    }

    let series = taylor_series(&op, beta, phi, SeriesOptions::default())?;
    let exact = op.with_potential(op.potential().add(beta)?)?.apply(phi)?;
    let value = json!({
        "config_sha256": ctx.config_hash,
        "beta_norm": b,
        "phi_norm": phi_norm,
        "opnorm_bound": opnorm,
        "truncation": rows,
        "terms": terms,
        "remainder_decay": decay,
        "series": {
            "order_used": series.order,
            "remainder_bound": series.remainder_bound,
            "max_abs_error": exact.max_abs_diff(&series.sum)?,
        },
        "relative_slack": INEQUALITY_SLACK,
        "passed": passed,
    });
    let summary = vec![
        format!("|beta|_gamma = {}, opnorm bound {}", num(b), num(opnorm)),
        format!("series truncation, term and decay checks: {}", if passed { "pass" } else { "FAIL" }),
    ];
    Ok(Outcome {
        artifacts: vec![
            Artifact::json("taylor.json", &value),
            csv.into_artifact("taylor.csv", ctx.config_hash),
            decay_csv.into_artifact("remainder_decay.csv", ctx.config_hash),
        ],
        passed,
        summary,
    })
}

pub fn derivative_check(ctx: &Context) -> Result<Outcome> {
    let sc = ctx.scenario;
    let op = operator(sc)?;
    let (beta, phi) = (&sc.direction, &sc.function);
    let h = sc.params.step;
    let steps = [h, h / 2.0, h / 4.0];
    let rep = finite_difference_sweep(&op, beta, phi, &steps)?;
    let zero = finite_difference_sweep(&op, &CylinderFunction::zero(&sc.space), phi, &steps)?;
    let zero_max = zero.first.iter().chain(&zero.second).fold(0.0f64, |m, v| m.max(*v));

    let d1 = derivative_apply(&op, &[beta, phi], phi)?;
    let d2 = derivative_apply(&op, &[phi, beta], phi)?;
    let symmetry = d1.max_abs_diff(&d2)?;

    let order_ok = |o: Option<f64>, errors: &[f64]| match o {
        Some(v) => v >= 1.9,
        None => errors.iter().all(|&e| e == 0.0),
    };
    let first_ok = order_ok(rep.min_first_order(), &rep.first);
    let second_ok = order_ok(rep.min_second_order(), &rep.second);
    let passed = first_ok && second_ok && zero_max == 0.0;

    let mut csv = Table::new(&["h", "first_error", "second_error"]);
    for ((h, e1), e2) in rep.steps.iter().zip(&rep.first).zip(&rep.second) {
        csv.push(vec![num(*h), num(*e1), num(*e2)]);
    }
    let value = json!({
        "config_sha256": ctx.config_hash,
        "steps": rep.steps,
        "first_errors": rep.first,
        "second_errors": rep.second,
        "first_orders": rep.first_orders,
        "second_orders": rep.second_orders,
        "min_first_order": rep.min_first_order(),
        "min_second_order": rep.min_second_order(),
        "required_order": 1.9,
        "cancellation_flagged": rep.cancellation,
        "zero_direction_max_error": zero_max,
        "symmetry_max_abs_difference": symmetry,
        "checks": {"first_order": first_ok, "second_order": second_ok, "zero_direction": zero_max == 0.0},
        "passed": passed,
    });
    let fmt = |o: Option<f64>| o.map(num).unwrap_or_else(|| "exact".into());
    let summary = vec![
        format!("first derivative order {}", fmt(rep.min_first_order())),
        format!("second derivative order {}", fmt(rep.min_second_order())),
        format!("cancellation flagged: {}", rep.cancellation),
    ];
    Ok(Outcome {
        artifacts: vec![
            Artifact::json("derivative.json", &value),
            csv.into_artifact("derivative.csv", ctx.config_hash),
        ],
        passed,
        summary,
    })
}

pub fn pressure(ctx: &Context) -> Result<Outcome> {
    let sc = ctx.scenario;
    let op = operator(sc)?;
    let opts = PowerOptions {
        tol: sc.params.tol,
        max_iter: sc.params.max_iter,
    };
    let r = power_iteration(&op, opts)?;
    let oracle = if sc.potential.depth() <= 2 {
        let rho = matrix_oracle(&op)?.spectral_radius();
        json!({"eigenvalue": rho, "relative_difference": (r.eigenvalue - rho).abs() / rho})
    } else {
        Value::Null
    };
    let mut residuals = Table::new(&["iteration", "residual"]);
    for (i, v) in r.residual_history.iter().enumerate() {
        residuals.push(vec![(i + 1).to_string(), num(*v)]);
    }
    let value = json!({
        "config_sha256": ctx.config_hash,
        "eigenvalue": r.eigenvalue,
        "pressure": r.pressure,
        "iterations": r.iterations,
        "residual": r.residual,
        "tol": opts.tol,
        "eigenfunction_depth": r.eigenfunction.depth(),
        "matrix_oracle": oracle,
    });
    let summary = vec![
        format!("lambda = {}", num(r.eigenvalue)),
        format!("pressure = {}", num(r.pressure)),
        format!("{} iterations, residual {}", r.iterations, num(r.residual)),
    ];
    Ok(Outcome {
        artifacts: vec![
            Artifact::json("pressure.json", &value),
            residuals.into_artifact("residuals.csv", ctx.config_hash),
            function_table(&r.eigenfunction)?.into_artifact("eigenfunction.csv", ctx.config_hash),
        ],
        passed: true,
        summary,
    })
}

pub fn suite(ctx: &Context) -> Result<Outcome> {
    let sc = ctx.scenario;
    let report = run_suite(sc)?;
    let mut csv = Table::new(&["group", "name", "cases", "measured", "comparison", "tolerance", "passed"]);
    for c in &report.checks {
        let cmp = match c.comparison {
            crate::suite::Comparison::AtMost => "<=",
            crate::suite::Comparison::AtLeast => ">=",
        };
        csv.push(vec![
            c.group.into(),
            c.name.into(),
            c.cases.to_string(),
            num(c.measured),
            cmp.into(),
            num(c.tolerance),
            c.passed.to_string(),
        ]);
    }
    let passed = report.passed();
    let value = json!({
        "config_sha256": ctx.config_hash,
        "scenario": sc.name,
        "seed": sc.seed,
        "probe_generator": PROBE_GENERATOR,
        "probe_depth": report.probe_depth,
        "passed": passed,
        "checks": report.checks,
    });
    let mut summary: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {}/{} ({} cases, measured {})",
                if c.passed { "PASS" } else { "FAIL" },
                c.group,
                c.name,
                c.cases,
                num(c.measured)
            )
        })
        .collect();
    summary.push(format!("{} of {} checks passed", report.checks.iter().filter(|c| c.passed).count(), report.checks.len()));
    Ok(Outcome {
        artifacts: vec![
            Artifact::json("suite.json", &value),
            csv.into_artifact("suite.csv", ctx.config_hash),
        ],
        passed,
        summary,
    })
}
