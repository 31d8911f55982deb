//! Safeguarded bracketing root finder (Brent's method).

use crate::error::{Error, Result};

/// Find a root of `f` in the bracket `[a, b]`, where `f(a)` and `f(b)` have
/// opposite signs. Combines inverse quadratic interpolation and secant steps
/// with a bisection safeguard. `xtol` is an absolute tolerance on the root
/// location.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let mut a = a;
    let mut b = b;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numeric(
            format!("brent: no sign change on [{a}, {b}]"),
            fa.abs().min(fb.abs()),
        ));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() <= xtol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond = (s - lo) * (s - b) >= 0.0
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < xtol)
            || (!mflag && (c - d).abs() < xtol);
        if cond {
            s = (a + b) / 2.0;
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

/// Scan `[a, b]` at `n` uniform samples for the first sign change of `f`
/// (ignoring the value at `a` itself), then polish with [`brent`].
/// Returns `None` if no sign change is found.
pub fn first_sign_change<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    xtol: f64,
) -> Result<Option<f64>> {
    let h = (b - a) / n as f64;
    let mut x_prev = a + h;
    let mut f_prev = f(x_prev);
    for i in 2..=n {
        let x = a + h * i as f64;
        let fx = f(x);
        if f_prev == 0.0 {
            return Ok(Some(x_prev));
        }
        if f_prev.signum() != fx.signum() {
            return Ok(Some(brent(&mut f, x_prev, x, xtol)?));
        }
        x_prev = x;
        f_prev = fx;
    }
    Ok(None)
}
