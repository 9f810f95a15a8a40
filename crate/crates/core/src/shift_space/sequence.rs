//! Truncated sequences, the shift map and the geometric sequence metric.

use crate::error::{Error, Result};

use super::alphabet::Alphabet;

/// Parameters of the sequence metric `d_c` and the Hölder exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    /// Decay base, `c > 1`.
    pub c: f64,
    /// Hölder exponent in `(0, 1]`.
    pub gamma: f64,
    /// Truncation depth `N >= 1`.
    pub depth: usize,
}

impl MetricConfig {
    pub fn new(c: f64, gamma: f64, depth: usize) -> Result<Self> {
        if !(c.is_finite() && c > 1.0) {
            return Err(Error::config("metric.c", format!("c must be > 1, got {c}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::config(
                "metric.gamma",
                format!("gamma must lie in (0, 1], got {gamma}"),
            ));
        }
        if depth == 0 {
            return Err(Error::config("metric.depth", "depth must be >= 1"));
        }
        Ok(Self { c, gamma, depth })
    }

    /// `c^gamma`, the contraction of Hölder quotients under prepending.
    pub fn c_gamma(&self) -> f64 {
        self.c.powf(self.gamma)
    }
}

/// Coordinates `x(0) .. x(N-1)` of a sequence, as alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruncatedSequence(pub Vec<usize>);

impl TruncatedSequence {
    pub fn new(alphabet: &Alphabet, symbols: Vec<usize>) -> Result<Self> {
        if let Some(s) = symbols.iter().find(|s| !alphabet.is_valid_index(**s)) {
            return Err(Error::invalid(format!(
                "symbol index {s} out of range for an alphabet of {} points",
                alphabet.len()
            )));
        }
        Ok(Self(symbols))
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sigma(x)`, padding the freed last coordinate with `pad`.
    pub fn shift(&self, pad: usize) -> Self {
        let mut out = Vec::with_capacity(self.0.len());
        out.extend_from_slice(self.0.get(1..).unwrap_or(&[]));
        if !self.0.is_empty() {
            out.push(pad);
        }
        Self(out)
    }

    /// `ax = (a, x(0), ..., x(N-2))`; the last coordinate falls off so the
    /// depth is preserved.
    pub fn prepend(&self, a: usize) -> Self {
        let mut out = Vec::with_capacity(self.0.len());
        if !self.0.is_empty() {
            out.push(a);
            out.extend_from_slice(&self.0[..self.0.len() - 1]);
        }
        Self(out)
    }

    /// `ax` keeping every coordinate, so the depth grows by one.
    pub fn prepend_extend(&self, a: usize) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(a);
        out.extend_from_slice(&self.0);
        Self(out)
    }
}

/// `sum_k d(x_k, y_k) / c^k` over the stored coordinates; the tail beyond
/// the truncation contributes nothing.
pub fn sequence_distance(
    alphabet: &Alphabet,
    x: &TruncatedSequence,
    y: &TruncatedSequence,
    cfg: &MetricConfig,
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "sequence depths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(prefix_distance(alphabet, &x.0, &y.0, cfg.c))
}

/// Truncated `d_c` between two equal-length index slices.
#[inline]
pub fn prefix_distance(alphabet: &Alphabet, x: &[usize], y: &[usize], c: f64) -> f64 {
    let mut scale = 1.0;
    let mut sum = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sum += alphabet.distance(a, b) * scale;
        scale /= c;
    }
    sum
}
