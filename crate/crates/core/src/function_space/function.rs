use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::shift_space::{ShiftSpace, TruncatedSequence};

/// A real function of the first `depth` coordinates, tabulated on the
/// admissible prefixes of its space.
///
/// Values live in a dense table indexed by prefix code; entries of
/// inadmissible prefixes are kept at zero and never read.
#[derive(Clone)]
pub struct CylinderFunction {
    space: Arc<ShiftSpace>,
    depth: usize,
    values: Vec<f64>,
}

impl fmt::Debug for CylinderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylinderFunction")
            .field("depth", &self.depth)
            .field("values", &self.values)
            .finish()
    }
}

impl PartialEq for CylinderFunction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) && self.depth == other.depth && self.values == other.values
    }
}

impl CylinderFunction {
    pub fn constant(space: &Arc<ShiftSpace>, value: f64) -> Self {
        Self {
            space: space.clone(),
            depth: 0,
            values: vec![value],
        }
    }

    pub fn zero(space: &Arc<ShiftSpace>) -> Self {
        Self::constant(space, 0.0)
    }

    /// Tabulates `f(prefix)` for every admissible prefix of the given depth.
    pub fn from_prefix_fn(space: &Arc<ShiftSpace>, depth: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let table = space.prefixes(depth)?;
        let mut values = vec![0.0; space.table_size(depth)?];
        let mut buf = vec![0; depth];
        for &code in &table.codes {
            space.decode_into(code, &mut buf);
            let v = f(&buf);
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite value {v} at prefix {buf:?}")));
            }
            values[code] = v;
        }
        Ok(Self {
            space: space.clone(),
            depth,
            values,
        })
    }

    /// Tabulates `f(coordinates)` where the slice holds the point
    /// coordinates of the prefix symbols.
    pub fn from_coord_fn(space: &Arc<ShiftSpace>, depth: usize, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let alphabet = space.alphabet().clone();
        let mut coords = vec![0.0; depth];
        Self::from_prefix_fn(space, depth, |x| {
            for (slot, &s) in coords.iter_mut().zip(x) {
                *slot = alphabet.coord(s);
            }
            f(&coords)
        })
    }

    /// Builds a function from `(prefix, value)` rows. Every admissible prefix
    /// must be given exactly once.
    pub fn from_rows(
        space: &Arc<ShiftSpace>,
        depth: usize,
        rows: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        let table = space.prefixes(depth)?;
        let size = space.table_size(depth)?;
        let mut values = vec![0.0; size];
        let mut seen = vec![false; size];
        for (prefix, v) in rows {
            if prefix.len() != depth || prefix.iter().any(|&s| s >= space.symbols()) {
                return Err(Error::invalid(format!("prefix {prefix:?} does not fit depth {depth}")));
            }
            let code = space.encode(&prefix);
            if !table.contains(code) {
                return Err(Error::invalid(format!("prefix {prefix:?} is not admissible")));
            }
            if seen[code] {
                return Err(Error::invalid(format!("prefix {prefix:?} given twice")));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite value at prefix {prefix:?}")));
            }
            seen[code] = true;
            values[code] = v;
        }
        if let Some(&missing) = table.codes.iter().find(|&&c| !seen[c]) {
            return Err(Error::invalid(format!(
                "no value for admissible prefix {:?}",
                space.decode(missing, depth)
            )));
        }
        Ok(Self {
            space: space.clone(),
            depth,
            values,
        })
    }

    pub(crate) fn from_raw(space: &Arc<ShiftSpace>, depth: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(Some(values.len()), space.table_size(depth).ok());
        Self {
            space: space.clone(),
            depth,
            values,
        }
    }

    pub fn space(&self) -> &Arc<ShiftSpace> {
        &self.space
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The dense value table; only admissible codes carry meaning.
    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value_by_code(&self, code: usize) -> f64 {
        self.values[code]
    }

    /// `(prefix, value)` for each admissible prefix, lexicographically.
    pub fn rows(&self) -> Result<Vec<(Vec<usize>, f64)>> {
        let table = self.space.prefixes(self.depth)?;
        Ok(table
            .codes
            .iter()
            .map(|&c| (self.space.decode(c, self.depth), self.values[c]))
            .collect())
    }

    /// Value at the admissible sequence `x`, read from its first `depth`
    /// coordinates.
    pub fn evaluate(&self, x: &TruncatedSequence) -> Result<f64> {
        if x.len() < self.depth {
            return Err(Error::invalid(format!(
                "sequence of depth {} is shorter than the function depth {}",
                x.len(),
                self.depth
            )));
        }
        if x.symbols().iter().any(|&s| s >= self.space.symbols()) {
            return Err(Error::invalid("symbol index out of range"));
        }
        if !self.space.is_admissible(x.symbols()) {
            return Err(Error::invalid(format!("sequence {:?} is not admissible", x.symbols())));
        }
        Ok(self.values[self.space.encode(&x.symbols()[..self.depth])])
    }

    /// The same function read as a function of `depth` coordinates.
    pub fn extend_to(&self, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::invalid(format!(
                "cannot shrink a depth-{} function to depth {depth}",
                self.depth
            )));
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        let table = self.space.prefixes(depth)?;
        let div = self.space.table_size(depth - self.depth)?;
        let mut values = vec![0.0; self.space.table_size(depth)?];
        for &code in &table.codes {
            values[code] = self.values[code / div];
        }
        Ok(Self::from_raw(&self.space, depth, values))
    }

    /// Moves the table onto another space over the same alphabet. Fails if
    /// the target admits a prefix this function has no value for.
    pub fn rebind(&self, space: &Arc<ShiftSpace>) -> Result<Self> {
        if space.symbols() != self.space.symbols() {
            return Err(Error::invalid("alphabet sizes differ"));
        }
        let ours = self.space.prefixes(self.depth)?;
        let theirs = space.prefixes(self.depth)?;
        if let Some(&c) = theirs.codes.iter().find(|&&c| !ours.contains(c)) {
            return Err(Error::invalid(format!(
                "prefix {:?} is admissible in the target space only",
                space.decode(c, self.depth)
            )));
        }
        let mut values = vec![0.0; self.values.len()];
        for &c in &theirs.codes {
            values[c] = self.values[c];
        }
        Ok(Self::from_raw(space, self.depth, values))
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::invalid("functions live on different alphabets or constraints"))
        }
    }

    /// Pointwise map, preserving depth.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let table = self.space.prefixes(self.depth)?;
        let mut values = vec![0.0; self.values.len()];
        for &c in &table.codes {
            values[c] = f(self.values[c]);
        }
        Ok(Self::from_raw(&self.space, self.depth, values))
    }

    /// Pointwise combination at the larger of the two depths.
    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        self.check_space(other)?;
        let depth = self.depth.max(other.depth);
        let table = self.space.prefixes(depth)?;
        let da = self.space.table_size(depth - self.depth)?;
        let db = self.space.table_size(depth - other.depth)?;
        let mut values = vec![0.0; self.space.table_size(depth)?];
        for &c in &table.codes {
            values[c] = f(self.values[c / da], other.values[c / db]);
        }
        Ok(Self::from_raw(&self.space, depth, values))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        let values = self.values.iter().map(|v| v * alpha).collect();
        Self::from_raw(&self.space, self.depth, values)
    }

    /// `alpha * self + beta * other`.
    pub fn axpby(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.zip_with(other, |a, b| alpha * a + beta * b)
    }

    pub fn exp(&self) -> Result<Self> {
        self.map(f64::exp)
    }

    pub fn powi(&self, n: u32) -> Result<Self> {
        self.map(|v| v.powi(n as i32))
    }

    /// `f_1 * ... * f_k`; the empty product is the constant one.
    pub fn product<'a>(space: &Arc<ShiftSpace>, factors: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        factors
            .into_iter()
            .try_fold(Self::constant(space, 1.0), |acc, f| acc.mul(f))
    }

    /// Largest pointwise absolute difference on the common admissible table.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let diff = self.sub(other)?;
        let table = self.space.prefixes(diff.depth)?;
        Ok(table
            .codes
            .iter()
            .map(|&c| diff.values[c].abs())
            .fold(0.0, f64::max))
    }

    /// Minimum value over admissible prefixes.
    pub fn min_value(&self) -> Result<f64> {
        let table = self.space.prefixes(self.depth)?;
        Ok(table
            .codes
            .iter()
            .map(|&c| self.values[c])
            .fold(f64::INFINITY, f64::min))
    }

    /// Bitwise equality of values on the admissible table, ignoring which
    /// space object the functions are attached to.
    pub fn bit_identical(&self, other: &Self) -> Result<bool> {
        if self.depth != other.depth || self.space.symbols() != other.space.symbols() {
            return Ok(false);
        }
        let a = self.space.prefixes(self.depth)?;
        let b = other.space.prefixes(other.depth)?;
        Ok(a.codes == b.codes
            && a
                .codes
                .iter()
                .all(|&c| self.values[c].to_bits() == other.values[c].to_bits()))
    }
}
