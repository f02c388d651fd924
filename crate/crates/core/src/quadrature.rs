//! Adaptive Simpson quadrature.

/// Default absolute tolerance used by the bid engine.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Default recursion limit.
pub const DEFAULT_MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` with the default tolerance and depth.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    adaptive_simpson(f, a, b, DEFAULT_TOLERANCE, DEFAULT_MAX_DEPTH)
}

/// Adaptive Simpson rule with Richardson correction.
///
/// The tolerance is split in half at every bisection so the accumulated
/// absolute error stays near `tol`. Recursion stops at `max_depth` even if the
/// local criterion has not been met.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -adaptive_simpson(f, b, a, tol, max_depth);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
    refine(&f, Panel { a, b, fa, fm, fb, whole }, tol, max_depth)
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let (flm, frm) = (f(lm), f(rm));
    let h = p.b - p.a;
    let left = h * (p.fa + 4.0 * flm + p.fm) / 12.0;
    let right = h * (p.fm + 4.0 * frm + p.fb) / 12.0;
    let delta = left + right - p.whole;

    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let l = Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
    let r = Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
    refine(f, l, 0.5 * tol, depth - 1) + refine(f, r, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact() {
        let v = integrate(|x| 3.0 * x * x * x - x + 2.0, 0.0, 2.0);
        // 3/4 * 16 - 2 + 4
        assert!((v - 14.0).abs() < 1e-14);
    }

    #[test]
    fn high_degree_polynomial() {
        for n in 1..12 {
            let v = integrate(|x: f64| x.powi(n), 0.0, 1.0);
            assert!((v - 1.0 / (n as f64 + 1.0)).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn square_root_singular_derivative() {
        let v = integrate(f64::sqrt, 0.0, 1.0);
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn transcendental() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI);
        assert!((v - 2.0).abs() < 1e-10);
        let v = integrate(f64::exp, -1.0, 1.0);
        assert!((v - (1f64.exp() - (-1f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        assert_eq!(integrate(|x| x, 0.3, 0.3), 0.0);
        let fwd = integrate(|x| x * x, 0.0, 1.0);
        let back = integrate(|x| x * x, 1.0, 0.0);
        assert!((fwd + back).abs() < 1e-15);
    }
}
