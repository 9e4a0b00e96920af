//! Reference quadrature and eigenvalue routines shared by the integration suites.
//! They use nothing from the library under test.

#![allow(dead_code)]

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 1e-15 * (left + right).abs() {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let f = &|x: f64| {
        let y = f(x);
        assert!(y.is_finite(), "integrand is {y} at {x}");
        y
    };
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_a^∞ f` through `r = a·e^x`, cut where the integrand has decayed below `tol`.
pub fn simpson_to_infinity(f: &dyn Fn(f64) -> f64, a: f64, x_max: f64, tol: f64) -> f64 {
    let g = |x: f64| {
        let r = a * x.exp();
        f(r) * r
    };
    simpson(&g, 0.0, x_max, tol)
}

/// Surface area of the unit sphere in ℝ^d for d = 1, 2, 3, 4.
pub fn sphere(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => panic!("dimension {d} not tabulated"),
    }
}

/// Smallest eigenvalue of the Dirichlet second-difference matrix on `(0, width)` with `n`
/// interior nodes, from a dense symmetric eigensolve.
pub fn dirichlet_eigenvalue(width: f64, n: usize) -> f64 {
    let h = width / (n + 1) as f64;
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 / (h * h),
        1 => -1.0 / (h * h),
        _ => 0.0,
    });
    nalgebra::SymmetricEigen::new(a)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Richardson extrapolation of the second-order eigenvalue sequence at `n`, `2n + 1`.
pub fn dirichlet_eigenvalue_extrapolated(width: f64, n: usize) -> f64 {
    let coarse = dirichlet_eigenvalue(width, n);
    let fine = dirichlet_eigenvalue(width, 2 * n + 1);
    (4.0 * fine - coarse) / 3.0
}
