//! Rank/kernel tolerance policy.
//!
//! A singular value σ counts as zero iff σ ≤ ε·max(1, σ_max), where σ_max is
//! the largest singular value of the same operator.  The test is
//! scale-invariant for large operators and absolute near the origin, which is
//! the right behaviour for double precision.
//!
//! ε defaults to 1e-10 and can be overridden by the `TORSIONLAB_EPS`
//! environment variable or programmatically via [`set_rank_eps`] (command-line
//! flags win over the environment).  The value is process-global; everything
//! else in the crate is pure.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

pub const DEFAULT_RANK_EPS: f64 = 1e-10;

static EPS_BITS: OnceLock<AtomicU64> = OnceLock::new();

fn cell() -> &'static AtomicU64 {
    EPS_BITS.get_or_init(|| {
        let from_env = std::env::var("TORSIONLAB_EPS")
            .ok()
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|e| e.is_finite() && *e > 0.0);
        AtomicU64::new(from_env.unwrap_or(DEFAULT_RANK_EPS).to_bits())
    })
}

/// Current relative rank tolerance ε.
pub fn rank_eps() -> f64 {
    f64::from_bits(cell().load(Ordering::Relaxed))
}

/// Overrides ε for the rest of the process. Returns the previous value.
pub fn set_rank_eps(eps: f64) -> f64 {
    assert!(eps.is_finite() && eps > 0.0, "rank tolerance must be positive");
    f64::from_bits(cell().swap(eps.to_bits(), Ordering::Relaxed))
}

/// Zero test for a singular value, given the largest singular value of the
/// same operator.
pub fn is_zero_singular_value(sigma: f64, sigma_max: f64) -> bool {
    sigma <= rank_eps() * sigma_max.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_threshold_is_scale_aware() {
        assert!(is_zero_singular_value(0.0, 0.0));
        assert!(is_zero_singular_value(1e-11, 1.0));
        assert!(!is_zero_singular_value(1e-9, 1.0));
        // large operator: threshold scales with sigma_max
        assert!(is_zero_singular_value(1e-5, 1e6));
        // small operator: threshold stays absolute
        assert!(!is_zero_singular_value(1e-9, 1e-12));
    }
}
