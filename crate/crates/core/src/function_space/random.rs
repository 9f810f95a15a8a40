//! Seeded random cylinder functions for probing norms and operators.
//!
//! Generator `chacha8-v1`: a `ChaCha8Rng` seeded with `seed_from_u64(seed)`;
//! a random table draws one `f64` uniformly from `[lo, hi)` per admissible
//! prefix, visiting prefixes in lexicographic order.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::shift_space::ShiftSpace;

use super::function::CylinderFunction;

/// Name and version of the probe generator.
pub const PROBE_GENERATOR: &str = "chacha8-v1";

pub type ProbeRng = ChaCha8Rng;

impl super::function::CylinderFunction {
    /// A fresh generator for the given seed.
    pub fn probe_rng(seed: u64) -> ProbeRng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}

pub fn random_function(
    space: &Arc<ShiftSpace>,
    depth: usize,
    lo: f64,
    hi: f64,
    rng: &mut ProbeRng,
) -> Result<CylinderFunction> {
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty value range [{lo}, {hi})")));
    }
    CylinderFunction::from_prefix_fn(space, depth, |_| rng.random_range(lo..hi))
}
