use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Work caps for enumeration and quadrature. Defaults are desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest admissible count of enumerated tuples (e.g. `|A|^k`).
    pub max_tuples: u64,
    /// Largest admissible number of quadrature samples.
    pub max_samples: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_tuples: 10_000_000,
            max_samples: 1_000_000,
        }
    }
}

/// `base^exp`, saturating at `u128::MAX`.
pub fn saturating_pow(base: usize, exp: u32) -> u128 {
    (base as u128).checked_pow(exp).unwrap_or(u128::MAX)
}

impl Budget {
    pub fn check_tuples(&self, what: &str, base: usize, exp: u32) -> Result<()> {
        let needed = saturating_pow(base, exp);
        if needed > u128::from(self.max_tuples) {
            return Err(Error::budget(what, needed, self.max_tuples.into()));
        }
        Ok(())
    }

    pub fn check_samples(&self, what: &str, needed: u128) -> Result<()> {
        if needed > u128::from(self.max_samples) {
            return Err(Error::budget(what, needed, self.max_samples.into()));
        }
        Ok(())
    }
}
