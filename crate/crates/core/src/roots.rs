//! Bracketed scalar root refinement.

/// Refine a sign-changing bracket `[a, b]` of `f` with Brent's
/// bisection/secant/inverse-quadratic hybrid.
///
/// Stops when `|f| <= ftol`, the bracket shrinks below `xtol`, or after
/// `max_iter` iterations. Returns `None` if `f(a)` and `f(b)` share a sign.
pub fn brent<F>(mut f: F, a: f64, b: f64, ftol: f64, xtol: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if fb.abs() <= ftol || m.abs() <= tol {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 0.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 0.0, 1e-12, 50).is_none());
    }

    #[test]
    fn handles_flat_plateau_and_steep_wall() {
        let r = brent(
            |x: f64| (x - 0.3).tanh().powi(3),
            -5.0,
            5.0,
            1e-30,
            1e-15,
            200,
        )
        .unwrap();
        assert!((r - 0.3).abs() < 1e-9);
        let r = brent(
            |x: f64| (50.0 * (x - 1.0)).exp() - 1.0,
            0.0,
            3.0,
            1e-14,
            0.0,
            200,
        )
        .unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stops_on_residual() {
        let r = brent(|x| x - 1.0, 0.0, 10.0, 1e-3, 0.0, 100).unwrap();
        assert!((r - 1.0).abs() <= 1e-3);
    }
}
