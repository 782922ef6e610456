//! Small numerical kernels: stable log-sum-exp and bracketed root finding.

use crate::error::{Result, ZipperError};

/// ln(e^a + e^b), exact for -∞ arguments.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln Σ e^{x_i}; -∞ for an empty or all -∞ input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Root of `f` in `[lo, hi]` by Newton steps safeguarded with bisection.
///
/// `f` returns the value and derivative. The endpoints must bracket a sign
/// change (a zero at an endpoint is accepted).
pub fn safeguarded_newton<F>(f: F, lo: f64, hi: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(ZipperError::Numeric(format!("no sign change on [{a}, {b}]")));
    }
    let negative_at_a = fa < 0.0;
    let mut x = 0.5 * (a + b);
    let mut last_step = b - a;
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == negative_at_a {
            a = x;
        } else {
            b = x;
        }
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > a && newton < b && (newton - x).abs() < 0.5 * last_step {
            newton
        } else {
            0.5 * (a + b)
        };
        last_step = (next - x).abs();
        if last_step <= 2.0 * f64::EPSILON * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Err(ZipperError::Numeric(format!("root finding did not converge within {max_iter} iterations")))
}

/// Largest point where the monotone predicate still holds, by bisection on
/// `[lo, hi]` with `pred(lo) == true` and `pred(hi) == false`.
pub fn bisect_threshold<P>(pred: P, mut lo: f64, mut hi: f64, max_iter: usize) -> f64
where
    P: Fn(f64) -> bool,
{
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
