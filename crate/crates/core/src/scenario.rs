//! Scenario files: a TOML description of the alphabet, metric, constraint,
//! the functions involved and per-operation parameters.
//!
//! Validation errors name the offending key and, where the key appears in
//! the file, its 1-based line. The full schema is documented in
//! `docs/config.md`.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::function_space::{CylinderFunction, Expr};
use crate::shift_space::{Alphabet, Budget, IntervalSet, MetricConfig, MetricKind, ShiftSpace, TransitionConstraint};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    seed: Option<Spanned<i64>>,
    alphabet: Spanned<RawAlphabet>,
    metric: Spanned<RawMetric>,
    constraint: Option<Spanned<RawConstraint>>,
    potential: Option<Spanned<RawFunction>>,
    function: Option<Spanned<RawFunction>>,
    direction: Option<Spanned<RawFunction>>,
    #[serde(default)]
    parameters: RawParameters,
    #[serde(default)]
    limits: RawLimits,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlphabet {
    kind: Spanned<String>,
    size: Option<Spanned<i64>>,
    weights: Option<Spanned<RawWeights>>,
    points: Option<Spanned<Vec<f64>>>,
    interval: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawWeights {
    Named(String),
    List(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    kind: Option<Spanned<String>>,
    c: Spanned<f64>,
    gamma: Option<Spanned<f64>>,
    depth: Spanned<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    matrix: Option<Spanned<Vec<i64>>>,
    expression: Option<Spanned<String>>,
    interval: Option<Spanned<Vec<Vec<f64>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    expr: Option<Spanned<String>>,
    table: Option<Spanned<String>>,
    depth: Option<Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParameters {
    order: Option<Spanned<i64>>,
    step: Option<Spanned<f64>>,
    tol: Option<Spanned<f64>>,
    max_iter: Option<Spanned<i64>>,
    probes: Option<Spanned<i64>>,
    radius: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLimits {
    prefix_budget: Option<Spanned<i64>>,
    pair_budget: Option<Spanned<i64>>,
}

/// Per-operation parameters with their defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    /// Highest series order checked.
    pub order: usize,
    /// Largest finite-difference step; the sweep uses `h, h/2, h/4`.
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Number of random probe functions.
    pub probes: usize,
    /// Radius for the sectional-triviality check; `None` means the smallest
    /// positive distance in the alphabet.
    pub radius: Option<f64>,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            order: 8,
            step: 1e-2,
            tol: 1e-13,
            max_iter: 10_000,
            probes: 100,
            radius: None,
        }
    }
}

/// Where a function came from, kept for reports and for re-tabulating on
/// another space over the same alphabet.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSource {
    Expr { text: String, depth: Option<usize> },
    Table { path: PathBuf, depth: Option<usize> },
    Default(f64),
}

impl FunctionSource {
    pub fn tabulate(&self, space: &Arc<ShiftSpace>) -> Result<CylinderFunction> {
        match self {
            FunctionSource::Expr { text, depth } => Expr::parse(text)?.to_function(space, depth.unwrap_or(0)),
            FunctionSource::Table { path, depth } => {
                let f = read_table(space, path)?;
                match depth {
                    Some(d) if *d > f.depth() => f.extend_to(*d),
                    _ => Ok(f),
                }
            }
            FunctionSource::Default(v) => Ok(CylinderFunction::constant(space, *v)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FunctionSource::Expr { text, .. } => text.clone(),
            FunctionSource::Table { path, .. } => format!("table:{}", path.display()),
            FunctionSource::Default(v) => format!("{v}"),
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: Option<String>,
    pub seed: u64,
    pub space: Arc<ShiftSpace>,
    pub metric: MetricConfig,
    pub potential: CylinderFunction,
    pub function: CylinderFunction,
    pub direction: CylinderFunction,
    pub potential_source: FunctionSource,
    pub function_source: FunctionSource,
    pub direction_source: FunctionSource,
    pub params: Parameters,
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.src.len());
        self.src[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, key: &str, span: Range<usize>, message: impl Into<String>) -> Result<T> {
        Err(Error::Config {
            key: key.to_string(),
            line: Some(self.line(span)),
            message: message.into(),
        })
    }

    /// Re-anchors a library error at a config key.
    fn wrap(&self, key: &str, span: Range<usize>, e: Error) -> Error {
        let message = match e {
            Error::Config { message, .. } => message,
            other => other.to_string(),
        };
        Error::Config {
            key: key.to_string(),
            line: Some(self.line(span)),
            message,
        }
    }

    fn positive(&self, key: &str, v: &Spanned<i64>) -> Result<usize> {
        match usize::try_from(*v.get_ref()) {
            Ok(n) if n > 0 => Ok(n),
            _ => self.err(key, v.span(), format!("must be a positive integer, got {}", v.get_ref())),
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&src, base)
    }

    /// Parses scenario text; table paths resolve against `base`.
    pub fn parse(src: &str, base: &Path) -> Result<Self> {
        let ctx = Ctx { src };
        let raw: RawScenario = toml::from_str(src).map_err(|e| Error::Config {
            key: "scenario".into(),
            line: e.span().map(|s| ctx.line(s)),
            message: e.message().to_string(),
        })?;

        let seed = match &raw.seed {
            None => 0,
            Some(s) => u64::try_from(*s.get_ref())
                .map_err(|_| ctx.wrap("seed", s.span(), Error::invalid("seed must be nonnegative")))?,
        };

        let alphabet = build_alphabet(&ctx, &raw)?;
        let metric = build_metric(&ctx, &raw.metric)?;

        let constraint = raw
            .constraint
            .as_ref()
            .map(|c| build_constraint(&ctx, c, &alphabet))
            .transpose()?;
        let budget = build_budget(&ctx, &raw.limits)?;
        let space = ShiftSpace::build(alphabet, constraint, budget).map_err(|e| match e {
            Error::Config { key, message, .. } => {
                let span = raw.constraint.as_ref().map(|c| c.span()).unwrap_or(0..0);
                Error::Config {
                    key,
                    line: raw.constraint.as_ref().map(|_| ctx.line(span)),
                    message,
                }
            }
            other => other,
        })?;

        let load = |key: &str, f: &Option<Spanned<RawFunction>>, default: f64, max_depth: usize| {
            build_function(&ctx, key, f, default, &space, base, max_depth)
        };
        let (potential, potential_source) = load("potential", &raw.potential, 0.0, metric.depth)?;
        let (function, function_source) = load("function", &raw.function, 1.0, metric.depth - 1)?;
        let (direction, direction_source) = load("direction", &raw.direction, 1.0, metric.depth - 1)?;

        Ok(Self {
            name: raw.name,
            seed,
            space,
            metric,
            potential,
            function,
            direction,
            potential_source,
            function_source,
            direction_source,
            params: build_parameters(&ctx, &raw.parameters)?,
        })
    }
}

impl Scenario {
    /// The same scenario over another space on the same alphabet, with every
    /// function re-tabulated from its source.
    pub fn with_space(&self, space: Arc<ShiftSpace>) -> Result<Self> {
        if space.alphabet().len() != self.space.alphabet().len() {
            return Err(Error::invalid("target space has a different alphabet size"));
        }
        Ok(Self {
            potential: self.potential_source.tabulate(&space)?,
            function: self.function_source.tabulate(&space)?,
            direction: self.direction_source.tabulate(&space)?,
            space,
            ..self.clone()
        })
    }
}

fn build_alphabet(ctx: &Ctx, raw: &RawScenario) -> Result<Alphabet> {
    let a = raw.alphabet.get_ref();
    let kind = a.kind.get_ref().as_str();
    let size = a.size.as_ref().map(|s| ctx.positive("alphabet.size", s)).transpose()?;
    let need_size = || match size {
        Some(n) => Ok(n),
        None => ctx.err("alphabet.size", raw.alphabet.span(), format!("required for kind '{kind}'")),
    };
    let weights_span = a.weights.as_ref().map(|w| w.span()).unwrap_or(raw.alphabet.span());
    let explicit = |n: usize| -> Result<Option<Vec<f64>>> {
        match a.weights.as_ref().map(|w| w.get_ref()) {
            Some(RawWeights::List(w)) => {
                if w.len() != n {
                    return ctx.err("alphabet.weights", weights_span.clone(), format!("expected {n} weights, got {}", w.len()));
                }
                Ok(Some(w.clone()))
            }
            _ => Ok(None),
        }
    };
    let named = a.weights.as_ref().and_then(|w| match w.get_ref() {
        RawWeights::Named(s) => Some(s.as_str()),
        RawWeights::List(_) => None,
    });
    let bad_weights = |allowed: &str| {
        ctx.err::<Alphabet>(
            "alphabet.weights",
            weights_span.clone(),
            format!("'{}' is not valid for kind '{kind}'; expected {allowed}", named.unwrap_or("")),
        )
    };
    let wrap = |e: Error| ctx.wrap("alphabet", raw.alphabet.span(), e);

    let mut alphabet = match kind {
        "finite-discrete" => {
            let n = match (size, a.weights.as_ref().map(|w| w.get_ref())) {
                (Some(n), _) => n,
                (None, Some(RawWeights::List(w))) if !w.is_empty() => w.len(),
                _ => need_size()?,
            };
            match (explicit(n)?, named) {
                (Some(w), _) => Alphabet::finite_weighted(w).map_err(wrap)?,
                (None, None | Some("uniform")) => Alphabet::finite(n).map_err(wrap)?,
                _ => bad_weights("\"uniform\" or a list")?,
            }
        }
        "circle-quadrature" => {
            let n = need_size()?;
            match (explicit(n)?, named) {
                (None, None | Some("quadrature")) => Alphabet::circle(n).map_err(wrap)?,
                (None, Some("uniform")) => {
                    let c = Alphabet::circle(n).map_err(wrap)?;
                    Alphabet::new(c.coords().to_vec(), vec![1.0; n], MetricKind::Arc).map_err(wrap)?
                }
                (Some(w), _) => {
                    let c = Alphabet::circle(n).map_err(wrap)?;
                    Alphabet::new(c.coords().to_vec(), w, MetricKind::Arc).map_err(wrap)?
                }
                _ => bad_weights("\"quadrature\", \"uniform\" or a list")?,
            }
        }
        "interval-quadrature" => {
            let n = need_size()?;
            let (lo, hi) = match a.interval.as_ref() {
                Some(iv) if iv.get_ref().len() == 2 => (iv.get_ref()[0], iv.get_ref()[1]),
                Some(iv) => return ctx.err("alphabet.interval", iv.span(), "expected [lo, hi]"),
                None => (0.0, 1.0),
            };
            let base = Alphabet::interval(lo, hi, n).map_err(wrap)?;
            match (explicit(n)?, named) {
                (None, None | Some("quadrature")) => base,
                (None, Some("uniform")) => {
                    Alphabet::new(base.coords().to_vec(), vec![1.0; n], MetricKind::Absolute).map_err(wrap)?
                }
                (Some(w), _) => Alphabet::new(base.coords().to_vec(), w, MetricKind::Absolute).map_err(wrap)?,
                _ => bad_weights("\"quadrature\", \"uniform\" or a list")?,
            }
        }
        "atom-list" => match &a.points {
            Some(points) => {
                let n = points.get_ref().len();
                let w = match (explicit(n)?, named) {
                    (Some(w), _) => w,
                    (None, None | Some("uniform")) => vec![1.0; n],
                    _ => return bad_weights("\"uniform\" or a list"),
                };
                Alphabet::new(points.get_ref().clone(), w, MetricKind::Absolute).map_err(wrap)?
            }
            None => {
                let n = need_size()?;
                match named {
                    None | Some("geometric") => Alphabet::geometric_atoms(n).map_err(wrap)?,
                    _ => bad_weights("\"geometric\" (or give alphabet.points)")?,
                }
            }
        },
        other => {
            return ctx.err(
                "alphabet.kind",
                a.kind.span(),
                format!("unknown kind '{other}'; expected finite-discrete, circle-quadrature, interval-quadrature or atom-list"),
            )
        }
    };

    if let Some(mk) = &raw.metric.get_ref().kind {
        let metric = match mk.get_ref().as_str() {
            "discrete" => MetricKind::Discrete,
            "arc" => MetricKind::Arc,
            "absolute" => MetricKind::Absolute,
            other => {
                return ctx.err(
                    "metric.kind",
                    mk.span(),
                    format!("unknown metric '{other}'; expected discrete, arc or absolute"),
                )
            }
        };
        if metric != alphabet.metric() {
            alphabet = Alphabet::new(alphabet.coords().to_vec(), alphabet.weights().to_vec(), metric)
                .map_err(|e| ctx.wrap("metric.kind", mk.span(), e))?;
        }
    }
    Ok(alphabet)
}

fn build_metric(ctx: &Ctx, raw: &Spanned<RawMetric>) -> Result<MetricConfig> {
    let m = raw.get_ref();
    let c = *m.c.get_ref();
    if !(c > 1.0) || !c.is_finite() {
        return ctx.err("metric.c", m.c.span(), format!("must be a finite number > 1, got {c}"));
    }
    let gamma = m.gamma.as_ref().map(|g| *g.get_ref()).unwrap_or(1.0);
    if !(gamma > 0.0 && gamma <= 1.0) {
        let span = m.gamma.as_ref().map(|g| g.span()).unwrap_or(raw.span());
        return ctx.err("metric.gamma", span, format!("must lie in (0, 1], got {gamma}"));
    }
    let depth = ctx.positive("metric.depth", &m.depth)?;
    MetricConfig::new(c, gamma, depth).map_err(|e| ctx.wrap("metric", raw.span(), e))
}

fn build_constraint(ctx: &Ctx, raw: &Spanned<RawConstraint>, alphabet: &Alphabet) -> Result<TransitionConstraint> {
    let c = raw.get_ref();
    let interval = match &c.interval {
        None => IntervalSet::point(1.0),
        Some(iv) => {
            let mut pieces = Vec::with_capacity(iv.get_ref().len());
            for p in iv.get_ref() {
                if p.len() != 2 {
                    return ctx.err("constraint.interval", iv.span(), "each piece must be [lo, hi]");
                }
                pieces.push((p[0], p[1]));
            }
            IntervalSet::new(pieces).map_err(|e| ctx.wrap("constraint.interval", iv.span(), e))?
        }
    };
    let n = alphabet.len();
    match (&c.matrix, &c.expression) {
        (Some(m), None) => {
            if m.get_ref().len() != n * n {
                return ctx.err(
                    "constraint.matrix",
                    m.span(),
                    format!("expected {} entries for {n} symbols, got {}", n * n, m.get_ref().len()),
                );
            }
            let values = m.get_ref().iter().map(|&v| v as f64).collect();
            TransitionConstraint::new(n, values, interval).map_err(|e| ctx.wrap("constraint.matrix", m.span(), e))
        }
        (None, Some(e)) => {
            let expr = Expr::parse(e.get_ref()).map_err(|err| ctx.wrap("constraint.expression", e.span(), err))?;
            if expr.depth() > 2 {
                return ctx.err("constraint.expression", e.span(), "may only read x0 (predecessor) and x1 (successor)");
            }
            TransitionConstraint::from_fn(alphabet, interval, |a, m| expr.eval(&[a, m]))
                .map_err(|err| ctx.wrap("constraint.expression", e.span(), err))
        }
        _ => ctx.err("constraint", raw.span(), "give exactly one of 'matrix' or 'expression'"),
    }
}

fn build_parameters(ctx: &Ctx, raw: &RawParameters) -> Result<Parameters> {
    let mut p = Parameters::default();
    if let Some(v) = &raw.order {
        p.order = ctx.positive("parameters.order", v)?;
    }
    if let Some(v) = &raw.max_iter {
        p.max_iter = ctx.positive("parameters.max_iter", v)?;
    }
    if let Some(v) = &raw.probes {
        p.probes = ctx.positive("parameters.probes", v)?;
    }
    let positive_real = |key: &str, v: &Spanned<f64>| {
        let x = *v.get_ref();
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            ctx.err(key, v.span(), format!("must be a positive finite number, got {x}"))
        }
    };
    if let Some(v) = &raw.step {
        p.step = positive_real("parameters.step", v)?;
    }
    if let Some(v) = &raw.tol {
        p.tol = positive_real("parameters.tol", v)?;
    }
    if let Some(v) = &raw.radius {
        p.radius = Some(positive_real("parameters.radius", v)?);
    }
    Ok(p)
}

fn build_budget(ctx: &Ctx, raw: &RawLimits) -> Result<Budget> {
    let mut b = Budget::default();
    if let Some(p) = &raw.prefix_budget {
        b.prefixes = ctx.positive("limits.prefix_budget", p)? as u128;
    }
    if let Some(p) = &raw.pair_budget {
        b.pairs = ctx.positive("limits.pair_budget", p)? as u128;
    }
    Ok(b)
}

fn build_function(
    ctx: &Ctx,
    key: &str,
    raw: &Option<Spanned<RawFunction>>,
    default: f64,
    space: &Arc<ShiftSpace>,
    base: &Path,
    max_depth: usize,
) -> Result<(CylinderFunction, FunctionSource)> {
    let Some(raw) = raw else {
        return Ok((CylinderFunction::constant(space, default), FunctionSource::Default(default)));
    };
    let f = raw.get_ref();
    let depth = f.depth.as_ref().map(|d| match usize::try_from(*d.get_ref()) {
        Ok(v) => Ok(v),
        Err(_) => ctx.err(&format!("{key}.depth"), d.span(), "must be a nonnegative integer"),
    });
    let depth = depth.transpose()?;
    let (func, source, span) = match (&f.expr, &f.table) {
        (Some(e), None) => {
            let k = format!("{key}.expr");
            let expr = Expr::parse(e.get_ref()).map_err(|err| ctx.wrap(&k, e.span(), err))?;
            let func = expr
                .to_function(space, depth.unwrap_or(0))
                .map_err(|err| ctx.wrap(&k, e.span(), err))?;
            let source = FunctionSource::Expr {
                text: e.get_ref().clone(),
                depth,
            };
            (func, source, e.span())
        }
        (None, Some(t)) => {
            let k = format!("{key}.table");
            let path = base.join(t.get_ref());
            let source = FunctionSource::Table { path, depth };
            let func = source.tabulate(space).map_err(|err| ctx.wrap(&k, t.span(), err))?;
            (func, source, t.span())
        }
        _ => return ctx.err(key, raw.span(), "give exactly one of 'expr' or 'table'"),
    };
    if func.depth() > max_depth {
        return ctx.err(
            key,
            span,
            format!("reads {} coordinates but at most {max_depth} are allowed at metric.depth", func.depth()),
        );
    }
    Ok((func, source))
}

/// Reads a CSV table: a header row, then one row per admissible prefix with
/// the 0-based symbol indices followed by the value. Lines starting with `#`
/// are ignored.
pub fn read_table(space: &Arc<ShiftSpace>, path: &Path) -> Result<CylinderFunction> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let width = reader.headers()?.len();
    if width == 0 {
        return Err(Error::invalid(format!("{}: empty header", path.display())));
    }
    let depth = width - 1;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Error::invalid(format!("{}: data row {}: {what}", path.display(), i + 1));
        let mut prefix = Vec::with_capacity(depth);
        for field in record.iter().take(depth) {
            prefix.push(field.parse::<usize>().map_err(|_| bad("bad symbol index"))?);
        }
        let value = record
            .get(depth)
            .ok_or_else(|| bad("missing value"))?
            .parse::<f64>()
            .map_err(|_| bad("bad value"))?;
        rows.push((prefix, value));
    }
    CylinderFunction::from_rows(space, depth, rows)
}
