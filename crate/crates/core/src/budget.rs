use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Upper limit on elementary evaluations an enumeration may perform.
/// Exceeding it is an error, never a silent approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Budget {
    pub const DEFAULT: Budget = Budget(100_000_000);

    pub fn check(self, required: &BigUint) -> Result<u64> {
        match required.to_u64() {
            Some(r) if r <= self.0 => Ok(r),
            _ => Err(Error::BudgetExceeded {
                required: required.to_string(),
                budget: self.0,
            }),
        }
    }

    /// Checks `base^exp` evaluations.
    pub fn check_power(self, base: u64, exp: u64) -> Result<u64> {
        self.check(&BigUint::from(base).pow(exp as u32))
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}
