//! Search-space guards shared by the enumerations.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default cap on the number of candidates any single enumeration may visit.
pub const DEFAULT_CANDIDATE_LIMIT: u128 = 100_000_000;

/// Largest field order accepted by [`crate::gf::Field::new`].
pub const DEFAULT_FIELD_ORDER_LIMIT: u64 = 1 << 20;

/// Largest field order for which the pruned classification search is attempted.
pub const PRUNED_SEARCH_MAX_Q: u32 = 13;

/// Environment variable overriding [`DEFAULT_CANDIDATE_LIMIT`].
pub const SIZE_LIMIT_ENV: &str = "FFPOS_SIZE_LIMIT";

/// The active candidate limit; `FFPOS_SIZE_LIMIT` wins when it parses.
pub fn candidate_limit() -> u128 {
    static LIMIT: OnceLock<u128> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var(SIZE_LIMIT_ENV)
            .ok()
            .and_then(|s| s.trim().replace('_', "").parse().ok())
            .unwrap_or(DEFAULT_CANDIDATE_LIMIT)
    })
}

pub(crate) fn check(size: u128, limit: u128) -> Result<()> {
    if size > limit {
        Err(Error::SizeExceeded { size, limit })
    } else {
        Ok(())
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
