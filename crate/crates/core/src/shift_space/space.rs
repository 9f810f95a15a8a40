//! The truncated shift space: alphabet, optional transition constraint and
//! cached tables of admissible prefixes.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

use super::alphabet::Alphabet;
use super::constraint::TransitionConstraint;
use super::sequence::TruncatedSequence;

const MAX_DEPTH: usize = 40;

/// Resource limits for exhaustive scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest number of prefixes a table may hold.
    pub prefixes: u128,
    /// Largest number of prefix pairs a Hölder scan may visit.
    pub pairs: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            prefixes: 1 << 24,
            pairs: 100_000_000,
        }
    }
}

/// Admissible prefixes of one depth, in lexicographic order. Prefix codes
/// are base-`n` integers with `x(0)` as the most significant digit.
#[derive(Debug)]
pub struct PrefixTable {
    pub depth: usize,
    pub codes: Vec<usize>,
    mask: Vec<bool>,
}

impl PrefixTable {
    pub fn contains(&self, code: usize) -> bool {
        self.mask.get(code).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// `B` (no constraint) or `B(A, I)` at finite truncation.
///
/// Functions and operators hold an `Arc<ShiftSpace>`; two objects are
/// compatible only when they share the same allocation.
#[derive(Debug)]
pub struct ShiftSpace {
    alphabet: Alphabet,
    constraint: Option<TransitionConstraint>,
    all_symbols: Vec<usize>,
    budget: Budget,
    tables: Vec<OnceLock<Arc<PrefixTable>>>,
}

impl ShiftSpace {
    /// The full shift over `alphabet`, used by the plain operator.
    pub fn plain(alphabet: Alphabet) -> Arc<Self> {
        Self::build(alphabet, None, Budget::default()).expect("plain spaces always validate")
    }

    /// `B(A, I)`; every section must be nonempty.
    pub fn generalized(alphabet: Alphabet, constraint: TransitionConstraint) -> Result<Arc<Self>> {
        Self::build(alphabet, Some(constraint), Budget::default())
    }

    pub fn build(alphabet: Alphabet, constraint: Option<TransitionConstraint>, budget: Budget) -> Result<Arc<Self>> {
        if let Some(tc) = &constraint {
            if tc.len() != alphabet.len() {
                return Err(Error::config(
                    "constraint",
                    format!(
                        "constraint covers {} symbols but the alphabet has {}",
                        tc.len(),
                        alphabet.len()
                    ),
                ));
            }
            let empty = tc.empty_sections();
            if !empty.is_empty() {
                return Err(Error::config(
                    "constraint.interval",
                    format!("symbols {empty:?} have empty sections: no admissible predecessor"),
                ));
            }
        }
        let all_symbols = (0..alphabet.len()).collect();
        Ok(Arc::new(Self {
            alphabet,
            constraint,
            all_symbols,
            budget,
            tables: (0..=MAX_DEPTH).map(|_| OnceLock::new()).collect(),
        }))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn constraint(&self) -> Option<&TransitionConstraint> {
        self.constraint.as_ref()
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_generalized(&self) -> bool {
        self.constraint.is_some()
    }

    /// `s(m)`; the whole alphabet for the plain space.
    #[inline]
    pub fn section(&self, m: usize) -> &[usize] {
        match &self.constraint {
            Some(tc) => tc.section(m),
            None => &self.all_symbols,
        }
    }

    #[inline]
    pub fn section_id(&self, m: usize) -> usize {
        self.constraint.as_ref().map_or(0, |tc| tc.section_id(m))
    }

    pub fn has_uniform_sections(&self) -> bool {
        self.constraint.as_ref().is_none_or(|tc| tc.has_uniform_sections())
    }

    #[inline]
    pub fn allows(&self, a: usize, m: usize) -> bool {
        self.constraint.as_ref().is_none_or(|tc| tc.allows(a, m))
    }

    pub fn is_admissible(&self, x: &[usize]) -> bool {
        self.constraint.as_ref().is_none_or(|tc| tc.is_admissible_slice(x))
    }

    /// `n^depth`, checked against the prefix budget.
    pub fn table_size(&self, depth: usize) -> Result<usize> {
        let n = self.symbols() as u128;
        let size = n
            .checked_pow(depth as u32)
            .filter(|s| *s <= self.budget.prefixes && depth <= MAX_DEPTH)
            .ok_or(Error::Budget {
                what: "prefixes",
                required: n.saturating_pow(depth as u32),
                budget: self.budget.prefixes,
            })?;
        Ok(size as usize)
    }

    /// Base-`n` digits of `code`, most significant first.
    pub fn decode(&self, code: usize, depth: usize) -> Vec<usize> {
        let mut out = vec![0; depth];
        self.decode_into(code, &mut out);
        out
    }

    #[inline]
    pub fn decode_into(&self, mut code: usize, out: &mut [usize]) {
        let n = self.symbols();
        for slot in out.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
    }

    pub fn encode(&self, x: &[usize]) -> usize {
        let n = self.symbols();
        x.iter().fold(0, |acc, &s| acc * n + s)
    }

    /// The cached table of admissible prefixes of the given depth.
    pub fn prefixes(&self, depth: usize) -> Result<Arc<PrefixTable>> {
        let size = self.table_size(depth)?;
        let slot = &self.tables[depth];
        if let Some(t) = slot.get() {
            return Ok(t.clone());
        }
        let n = self.symbols();
        let mask: Vec<bool> = if depth == 0 {
            vec![true]
        } else {
            // admissible(ax) = allows(a, x0) && admissible(x)
            let shorter = self.prefixes(depth - 1)?;
            let tail = size / n;
            (0..size)
                .map(|code| {
                    let a = code / tail;
                    let rest = code % tail;
                    let x0 = if depth >= 2 { rest / (tail / n) } else { 0 };
                    shorter.contains(rest) && (depth < 2 || self.allows(a, x0))
                })
                .collect()
        };
        let codes = mask
            .iter()
            .enumerate()
            .filter_map(|(c, ok)| ok.then_some(c))
            .collect();
        let table = Arc::new(PrefixTable { depth, codes, mask });
        Ok(slot.get_or_init(|| table).clone())
    }

    /// All admissible sequences of the given depth, lexicographically.
    pub fn enumerate_admissible(&self, depth: usize) -> Result<Vec<TruncatedSequence>> {
        let table = self.prefixes(depth)?;
        Ok(table
            .codes
            .iter()
            .map(|&c| TruncatedSequence(self.decode(c, depth)))
            .collect())
    }
}
