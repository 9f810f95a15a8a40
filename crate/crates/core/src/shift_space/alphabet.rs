//! Discretized alphabets: a finite point set with a metric and a-priori weights.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// How pairwise distances between alphabet points are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// `d(n, j) = 0` iff `n = j`, `1` otherwise.
    Discrete,
    /// Geodesic distance on the unit circle, coordinates read as angles.
    Arc,
    /// `|x - y|` on the real line.
    Absolute,
    /// User-supplied distance matrix.
    Explicit,
}

/// A finite alphabet `M` with coordinates, metric `d` and weights `mu`.
///
/// Immutable after construction; the full distance matrix is precomputed.
#[derive(Debug, Clone)]
pub struct Alphabet {
    coords: Vec<f64>,
    weights: Vec<f64>,
    dist: Vec<f64>,
    metric: MetricKind,
    total_mass: f64,
}

impl Alphabet {
    /// Builds an alphabet whose distances follow `metric`.
    pub fn new(coords: Vec<f64>, weights: Vec<f64>, metric: MetricKind) -> Result<Self> {
        if metric == MetricKind::Explicit {
            return Err(Error::invalid(
                "use Alphabet::with_distances for explicit metrics",
            ));
        }
        let n = coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = point_distance(metric, i, j, coords[i], coords[j]);
            }
        }
        Self::assemble(coords, weights, dist, metric)
    }

    /// Builds an alphabet from an explicit row-major distance matrix. The
    /// matrix must be a metric on the point set; the triangle inequality is
    /// verified by enumerating all triples.
    pub fn with_distances(coords: Vec<f64>, weights: Vec<f64>, dist: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        if dist.len() != n * n {
            return Err(Error::invalid(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        let a = Self::assemble(coords, weights, dist, MetricKind::Explicit)?;
        if let Some((i, j, k)) = a.triangle_violation() {
            return Err(Error::invalid(format!(
                "distance matrix violates the triangle inequality at ({i}, {j}, {k})"
            )));
        }
        Ok(a)
    }

    fn assemble(coords: Vec<f64>, weights: Vec<f64>, dist: Vec<f64>, metric: MetricKind) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::invalid("alphabet needs at least one point"));
        }
        if weights.len() != n {
            return Err(Error::invalid(format!(
                "{} weights given for {} points",
                weights.len(),
                n
            )));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(Error::invalid(format!("weight {i} is {w}, must be finite and >= 0")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        for i in 0..n {
            for j in 0..n {
                let d = dist[i * n + j];
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::invalid(format!("d({i}, {j}) = {d} is not a finite nonnegative number")));
                }
                if (i == j) != (d == 0.0) {
                    return Err(Error::invalid(format!(
                        "d({i}, {j}) = {d}: the metric must vanish exactly on the diagonal"
                    )));
                }
                if d != dist[j * n + i] {
                    return Err(Error::invalid(format!("metric is not symmetric at ({i}, {j})")));
                }
            }
        }
        let total_mass = weights.iter().sum();
        Ok(Self {
            coords,
            weights,
            dist,
            metric,
            total_mass,
        })
    }

    /// `k` symbols with coordinates `1..=k`, the discrete metric and the
    /// counting measure.
    pub fn finite(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|i| i as f64).collect(), vec![1.0; k], MetricKind::Discrete)
    }

    /// `k` discrete symbols with explicit weights.
    pub fn finite_weighted(weights: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        Self::new((1..=k).map(|i| i as f64).collect(), weights, MetricKind::Discrete)
    }

    /// `n` uniform nodes `2 pi j / n` on the circle with trapezoid weights
    /// `2 pi / n` (Lebesgue measure) and the arc metric.
    pub fn circle(n: usize) -> Result<Self> {
        let h = 2.0 * PI / n as f64;
        Self::new((0..n).map(|j| j as f64 * h).collect(), vec![h; n], MetricKind::Arc)
    }

    /// `n >= 2` uniform nodes on `[lo, hi]` with composite trapezoid weights
    /// and the absolute-value metric.
    pub fn interval(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::invalid("interval quadrature needs n >= 2 and hi > lo"));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let coords = (0..n).map(|j| lo + j as f64 * h).collect();
        let mut weights = vec![h; n];
        weights[0] = h / 2.0;
        weights[n - 1] = h / 2.0;
        Self::new(coords, weights, MetricKind::Absolute)
    }

    /// Atoms `z_i = 1 - 2^-i`, `i = 1..=n`, with probability weights
    /// proportional to `2^-i`, plus the accumulation point `1` carrying
    /// zero weight. Euclidean metric.
    pub fn geometric_atoms(n: usize) -> Result<Self> {
        let mut coords: Vec<f64> = (1..=n).map(|i| 1.0 - 0.5f64.powi(i as i32)).collect();
        let raw: Vec<f64> = (1..=n).map(|i| 0.5f64.powi(i as i32)).collect();
        let norm: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|p| p / norm).collect();
        coords.push(1.0);
        weights.push(0.0);
        Self::new(coords, weights, MetricKind::Absolute)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// `mu(M)`, the sum of all weights.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.coords.len() + j]
    }

    /// Exhaustive triangle-inequality scan; returns the first violating
    /// triple `(i, j, k)` with `d(i, k) > d(i, j) + d(j, k)`.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let dij = self.distance(i, j);
                for k in 0..n {
                    let lhs = self.distance(i, k);
                    let rhs = dij + self.distance(j, k);
                    if lhs > rhs * (1.0 + 1e-12) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn is_valid_index(&self, i: usize) -> bool {
        i < self.len()
    }
}

fn point_distance(metric: MetricKind, i: usize, j: usize, x: f64, y: f64) -> f64 {
    match metric {
        MetricKind::Discrete => {
            if i == j {
                0.0
            } else {
                1.0
            }
        }
        MetricKind::Arc => {
            if i == j {
                return 0.0;
            }
            let raw = (x - y).abs().rem_euclid(2.0 * PI);
            raw.min(2.0 * PI - raw)
        }
        MetricKind::Absolute => (x - y).abs(),
        MetricKind::Explicit => unreachable!("explicit metrics carry their own matrix"),
    }
}
