//! Scalar root finding: Brent's method and Newton safeguarded by a bracket.

use crate::error::{Error, Result};

/// Brent's method on `[lo, hi]`. Requires a sign change between the endpoints.
///
/// Stops when the residual magnitude drops below `f_tol` or the bracket
/// shrinks below `rel_tol` relative to the iterate.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * (b.abs().max(1.0) * 1e-3);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= f_tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when a == c
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else {
            tol1.copysign(xm)
        };
        fb = f(b);
    }
    Err(Error::NoConvergence {
        residual: fb,
        max_iter,
    })
}

/// Newton iteration kept inside a sign-change bracket `[lo, hi]`.
///
/// Whenever the Newton step leaves the bracket (or the derivative is
/// unusable) the step degrades to bisection, so convergence is guaranteed
/// for a continuous function with a sign change. Terminates on
/// `|f(x)| < f_tol`.
pub fn newton_bracketed<F, D>(
    mut f: F,
    mut df: D,
    lo: f64,
    hi: f64,
    x0: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut x = if x0 > a && x0 < b { x0 } else { 0.5 * (a + b) };
    let mut fx = f(x);
    for _ in 0..max_iter {
        if fx.abs() < f_tol {
            return Ok(x);
        }
        // shrink the bracket around the sign change
        if fx.signum() == flo.signum() {
            a = x;
            flo = fx;
        } else {
            b = x;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        x = if slope.is_finite() && slope != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            return Ok(x);
        }
        fx = f(x);
    }
    Err(Error::NoConvergence {
        residual: fx,
        max_iter,
    })
}

/// Scans `n` log-spaced points of `[lo, hi]` and returns every consecutive
/// pair with a sign change (non-finite values break the scan segment).
pub fn sign_change_brackets<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    n: usize,
) -> Vec<(f64, f64)> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let ln_lo = lo.ln();
    let step = (hi.ln() - ln_lo) / (n - 1) as f64;
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n {
        let x = (ln_lo + step * i as f64).exp();
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if let Some((px, pfx)) = prev {
            if pfx == 0.0 || pfx.signum() != fx.signum() {
                out.push((px, x));
            }
        }
        prev = Some((x, fx));
    }
    out
}
