use crate::error::{Error, Result};

/// `1/φ` for the golden ratio `φ`.
const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Bisection for a root of `f` on `[lo, hi]`.
///
/// Requires a sign change. Returns the midpoint of the final bracket, whose
/// width is at most `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    try_bisect(|x| Ok(f(x)), lo, hi, tol)
}

/// [`bisect`] for functions whose evaluation may fail; the first failure aborts.
pub fn try_bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) || !(lo < hi) {
        return Err(Error::range("bisection bracket", hi - lo));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { lo, hi });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Reports [`Error::NotUnimodal`] when the search collapses onto an end of the
/// bracket or ends below an endpoint value, i.e. no interior maximum exists.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !(lo < hi) {
        return Err(Error::range("golden-section bracket", hi - lo));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let edge = fx < f(lo).max(f(hi)) || (x - lo) <= tol || (hi - x) <= tol;
    if edge || !fx.is_finite() {
        return Err(Error::NotUnimodal { lo, hi });
    }
    Ok(x)
}

/// `(f(x + h) - f(x - h)) / 2h`.
pub fn central_diff<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Composite Simpson rule with `points` samples (rounded up to odd, at least 3).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, points: usize) -> f64 {
    let points = points.max(3) | 1;
    let intervals = points - 1;
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}
