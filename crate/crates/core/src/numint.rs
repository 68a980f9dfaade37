//! Small quadrature helpers used by verification code and test oracles.

use crate::scalar::Scalar;

/// Adaptive Simpson quadrature of `f` over `[lo, hi]` to absolute
/// tolerance `tol`.
pub fn adaptive_simpson<R: Scalar>(f: &impl Fn(R) -> R, lo: R, hi: R, tol: f64) -> R {
    let half = R::from_f64(0.5);
    let mid = (lo + hi) * half;
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = simpson(lo, hi, flo, fmid, fhi);
    recurse(f, lo, hi, flo, fmid, fhi, whole, tol, 50)
}

fn simpson<R: Scalar>(lo: R, hi: R, flo: R, fmid: R, fhi: R) -> R {
    (hi - lo) / R::from_f64(6.0) * (flo + R::from_f64(4.0) * fmid + fhi)
}

#[allow(clippy::too_many_arguments)]
fn recurse<R: Scalar>(
    f: &impl Fn(R) -> R,
    lo: R,
    hi: R,
    flo: R,
    fmid: R,
    fhi: R,
    whole: R,
    tol: f64,
    depth: u32,
) -> R {
    let half = R::from_f64(0.5);
    let mid = (lo + hi) * half;
    let lm = (lo + mid) * half;
    let rm = (mid + hi) * half;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(lo, mid, flo, flm, fmid);
    let right = simpson(mid, hi, fmid, frm, fhi);
    let delta = left + right - whole;
    if depth == 0 || delta.abs().value() <= 15.0 * tol {
        left + right + delta / R::from_f64(15.0)
    } else {
        recurse(f, lo, mid, flo, flm, fmid, left, tol * 0.5, depth - 1)
            + recurse(f, mid, hi, fmid, frm, fhi, right, tol * 0.5, depth - 1)
    }
}

/// Composite trapezoid sum of samples `y` on uniformly spaced nodes `dx` apart.
pub fn trapezoid<R: Scalar>(y: &[R], dx: R) -> R {
    if y.len() < 2 {
        return R::zero();
    }
    let half = R::from_f64(0.5);
    let mut acc = (y[0] + y[y.len() - 1]) * half;
    for v in &y[1..y.len() - 1] {
        acc += *v;
    }
    acc * dx
}
