//! Scalar root finding: Brent's method and a safeguarded Newton iteration.

/// Brent's method on a sign-changing bracket [a, b].
/// Returns the root to absolute tolerance `tol` (on x) or after 200 iterations.
pub fn brent<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, &'static str> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err("bracket does not change sign");
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
        if fb == 0.0 || (b - a).abs() < tol {
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
        let cond = !((lo.min(b) < s && s < lo.max(b))
            && !(mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            && !(!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            && !(mflag && (b - c).abs() < tol)
            && !(!mflag && (c - d).abs() < tol));
        if cond {
            s = 0.5 * (a + b);
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

/// Newton iteration on a monotone function with a sign-changing bracket as
/// safety net: steps that leave the bracket or fail to shrink fall back to
/// bisection. `f` returns (value, derivative).
pub fn newton_bracketed<F: Fn(f64) -> (f64, f64)>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    xtol: f64,
) -> f64 {
    let mut x = x0.clamp(lo.min(hi), lo.max(hi));
    for _ in 0..100 {
        let (v, dv) = f(x);
        if v == 0.0 {
            return x;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step_ok = dv != 0.0 && dv.is_finite();
        let mut xn = if step_ok { x - v / dv } else { f64::NAN };
        if !xn.is_finite() || xn <= lo.min(hi) || xn >= lo.max(hi) {
            xn = 0.5 * (lo + hi);
        }
        if (xn - x).abs() <= xtol * (1.0 + x.abs()) {
            return xn;
        }
        x = xn;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cos_root() {
        let r = brent(&|x: f64| x.cos(), 1.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn brent_rejects_bad_bracket() {
        assert!(brent(&|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn newton_bracketed_converges() {
        // root of x^3 - 2 (increasing), bracket [1,2]
        let f = |x: f64| (x * x * x - 2.0, 3.0 * x * x);
        let r = newton_bracketed(&f, 1.0, 2.0, 1.5, 1e-15);
        assert!((r - 2.0f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn newton_survives_flat_derivative() {
        // derivative vanishes at 0 but bisection safety net still converges
        let f = |x: f64| (x * x * x - 1e-6, 3.0 * x * x);
        let r = newton_bracketed(&f, -1.0, 1.0, 0.0, 1e-13);
        assert!((r - 0.01).abs() < 1e-10, "r={r}");
    }
}
