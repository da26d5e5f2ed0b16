//! Log-domain arithmetic helpers shared by every series evaluator.
//!
//! All sums in this crate are accumulated in log space: the natural log of a
//! nonnegative quantity, with `f64::NEG_INFINITY` standing for log 0.

/// log(exp(a) + exp(b)) without overflow.
#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log(ell!) via the log-gamma function; overflow-free for ell well past 10^6.
#[inline]
pub fn log_factorial(ell: usize) -> f64 {
    statrs::function::gamma::ln_gamma(ell as f64 + 1.0)
}
