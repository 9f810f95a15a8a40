//! Transition constraints `(A, I)` and the sections they induce.

use crate::error::{Error, Result};

use super::alphabet::Alphabet;
use super::sequence::TruncatedSequence;

/// A finite union of closed intervals `[lo, hi]`; endpoints may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    pieces: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &pieces {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::config(
                    "constraint.interval",
                    format!("[{lo}, {hi}] is not a closed interval"),
                ));
            }
        }
        Ok(Self { pieces })
    }

    /// The whole real line.
    pub fn real_line() -> Self {
        Self {
            pieces: vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    /// The single point `{v}`.
    pub fn point(v: f64) -> Self {
        Self { pieces: vec![(v, v)] }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.pieces.iter().any(|&(lo, hi)| lo <= v && v <= hi)
    }
}

/// A transition function `A` tabulated on all ordered pairs, together with
/// the closed set `I`. Sections `s(m) = {a : A(a, m) in I}` are computed
/// once at construction.
#[derive(Debug, Clone)]
pub struct TransitionConstraint {
    n: usize,
    a_values: Vec<f64>,
    interval: IntervalSet,
    allowed: Vec<bool>,
    sections: Vec<Vec<usize>>,
    section_ids: Vec<usize>,
}

impl TransitionConstraint {
    /// `a_values` is row-major: entry `a * n + m` holds `A(a, m)`.
    pub fn new(n: usize, a_values: Vec<f64>, interval: IntervalSet) -> Result<Self> {
        if a_values.len() != n * n {
            return Err(Error::config(
                "constraint.matrix",
                format!("expected {} entries for {n} symbols, got {}", n * n, a_values.len()),
            ));
        }
        let allowed: Vec<bool> = a_values.iter().map(|&v| interval.contains(v)).collect();
        let sections: Vec<Vec<usize>> = (0..n)
            .map(|m| (0..n).filter(|&a| allowed[a * n + m]).collect())
            .collect();
        let mut distinct: Vec<&Vec<usize>> = Vec::new();
        let section_ids = sections
            .iter()
            .map(|s| match distinct.iter().position(|d| *d == s) {
                Some(id) => id,
                None => {
                    distinct.push(s);
                    distinct.len() - 1
                }
            })
            .collect();
        Ok(Self {
            n,
            a_values,
            interval,
            allowed,
            sections,
            section_ids,
        })
    }

    /// Tabulates `A(a, m) = f(coord(a), coord(m))`.
    pub fn from_fn(alphabet: &Alphabet, interval: IntervalSet, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let n = alphabet.len();
        let mut values = Vec::with_capacity(n * n);
        for a in 0..n {
            for m in 0..n {
                values.push(f(alphabet.coord(a), alphabet.coord(m)));
            }
        }
        Self::new(n, values, interval)
    }

    /// A 0-1 transition matrix with `I = {1}`.
    pub fn from_matrix(n: usize, matrix: &[u8]) -> Result<Self> {
        Self::new(n, matrix.iter().map(|&v| v as f64).collect(), IntervalSet::point(1.0))
    }

    /// `A = 1`, `I = R`: every transition allowed.
    pub fn full(n: usize) -> Self {
        Self::new(n, vec![1.0; n * n], IntervalSet::real_line()).expect("sizes agree")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn interval(&self) -> &IntervalSet {
        &self.interval
    }

    pub fn a_value(&self, a: usize, m: usize) -> f64 {
        self.a_values[a * self.n + m]
    }

    /// `A(a, m) in I`, i.e. `a` may precede `m`.
    #[inline]
    pub fn allows(&self, a: usize, m: usize) -> bool {
        self.allowed[a * self.n + m]
    }

    /// `s(m)` in ascending index order.
    #[inline]
    pub fn section(&self, m: usize) -> &[usize] {
        &self.sections[m]
    }

    /// Symbols with equal sections share an id.
    #[inline]
    pub fn section_id(&self, m: usize) -> usize {
        self.section_ids[m]
    }

    /// True when every symbol has the same section.
    pub fn has_uniform_sections(&self) -> bool {
        self.section_ids.iter().all(|&id| id == 0)
    }

    /// Symbols whose section is empty.
    pub fn empty_sections(&self) -> Vec<usize> {
        (0..self.n).filter(|&m| self.sections[m].is_empty()).collect()
    }

    /// Every consecutive pair `(x(k), x(k+1))` passes the membership test.
    pub fn is_admissible(&self, x: &TruncatedSequence) -> bool {
        self.is_admissible_slice(x.symbols())
    }

    pub fn is_admissible_slice(&self, x: &[usize]) -> bool {
        x.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// Checks `s(m) = s(m')` for all pairs at distance `< radius`; on failure
    /// the first offending pair in lexicographic order is returned.
    pub fn sectional_triviality(&self, alphabet: &Alphabet, radius: f64) -> Result<SectionalTriviality> {
        if !(radius > 0.0) {
            return Err(Error::invalid(format!("radius must be > 0, got {radius}")));
        }
        if alphabet.len() != self.n {
            return Err(Error::invalid("constraint and alphabet sizes differ"));
        }
        for m in 0..self.n {
            for m2 in (m + 1)..self.n {
                if alphabet.distance(m, m2) < radius && self.section_ids[m] != self.section_ids[m2] {
                    return Ok(SectionalTriviality {
                        trivial: false,
                        witness: Some((m, m2)),
                    });
                }
            }
        }
        Ok(SectionalTriviality {
            trivial: true,
            witness: None,
        })
    }
}

/// Outcome of a sectional-triviality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionalTriviality {
    pub trivial: bool,
    pub witness: Option<(usize, usize)>,
}
