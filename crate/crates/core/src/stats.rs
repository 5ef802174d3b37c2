//! Small numeric helpers shared across modules: Gaussian tail functions,
//! bracketed bisection and deterministic seed derivation.

use statrs::function::erf;

/// Gaussian tail function Q(x) = P(Z > x) for a standard normal Z.
pub fn q_function(x: f64) -> f64 {
    0.5 * erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal CDF, Phi(x) = 1 - Q(x).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Bisection on `[lo, hi]`, which must bracket a sign change of `f`.
///
/// Iterates until `|f(mid)| < tol` or `max_iter` halvings, returning the
/// midpoint either way. Returns `None` when the endpoints do not bracket a
/// root.
pub fn bisect<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, f: F, tol: f64, max_iter: usize) -> Option<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid.abs() < tol {
            break;
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(mid)
}

/// Derives an independent child seed from a base seed and a salt
/// (splitmix64 step). Used to give each scenario / power sweep its own
/// reproducible RNG stream.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
