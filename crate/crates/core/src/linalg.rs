//! Dense complex linear-algebra helpers shared by the spectral and contour
//! modules: real→complex promotion, shifted LU solves, spectral norms and
//! condition numbers via SVD, and Gauss–Legendre quadrature rules.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Promote a real matrix to complex entries.
pub fn to_complex(a: MatRef<'_, f64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(a[(i, j)], 0.0))
}

/// Build the shifted matrix `lambda*I - a` for a real `a`.
pub fn shifted(a: MatRef<'_, f64>, lambda: C64) -> Mat<C64> {
    let n = a.nrows();
    let mut m = Mat::from_fn(n, n, |i, j| C64::new(-a[(i, j)], 0.0));
    for i in 0..n {
        m[(i, i)] += lambda;
    }
    m
}

/// Complex identity matrix.
pub fn identity_c(n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// y = a·z for a real matrix and a complex vector.
pub fn matvec_real(a: MatRef<'_, f64>, z: &[C64]) -> Vec<C64> {
    let n = a.nrows();
    let mut y = vec![C64::new(0.0, 0.0); n];
    // column-major walk matches faer's storage order
    for j in 0..a.ncols() {
        let zj = z[j];
        if zj.re == 0.0 && zj.im == 0.0 {
            continue;
        }
        for i in 0..n {
            y[i] += a[(i, j)] * zj;
        }
    }
    y
}

/// y = a·z for complex matrix and vector.
pub fn matvec_c(a: MatRef<'_, C64>, z: &[C64]) -> Vec<C64> {
    let n = a.nrows();
    let mut y = vec![C64::new(0.0, 0.0); n];
    for j in 0..a.ncols() {
        let zj = z[j];
        for i in 0..n {
            y[i] += a[(i, j)] * zj;
        }
    }
    y
}

pub fn vec_norm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value (operator 2-norm).
pub fn spectral_norm(m: MatRef<'_, C64>) -> f64 {
    let svd = m.svd().expect("svd failed to converge");
    let s = svd.S();
    if s.dim() == 0 {
        0.0
    } else {
        s[0].re
    }
}

/// Extreme singular values `(sigma_min, sigma_max)`.
pub fn extreme_singular_values(m: MatRef<'_, C64>) -> (f64, f64) {
    let svd = m.svd().expect("svd failed to converge");
    let s = svd.S();
    let k = s.dim();
    if k == 0 {
        return (0.0, 0.0);
    }
    (s[k - 1].re, s[0].re)
}

pub fn trace(m: MatRef<'_, C64>) -> C64 {
    let mut t = C64::new(0.0, 0.0);
    for i in 0..m.nrows() {
        t += m[(i, i)];
    }
    t
}

/// Inverse of `lambda*I - a` by partial-pivot LU; errors on a singular shift.
pub fn inverse_shifted(a: MatRef<'_, f64>, lambda: C64) -> Result<Mat<C64>> {
    let m = shifted(a, lambda);
    let lu = m.partial_piv_lu();
    let inv = lu.inverse();
    // a blown-up inverse means the shift sat (numerically) on the spectrum
    for j in 0..inv.ncols() {
        for i in 0..inv.nrows() {
            let c = inv[(i, j)];
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::SingularShift { lambda, nearest: lambda });
            }
        }
    }
    Ok(inv)
}

/// Solve `(lambda*I - a) w = rhs` and report the relative residual.
pub fn solve_shifted(a: MatRef<'_, f64>, lambda: C64, rhs: &[C64]) -> Result<(Vec<C64>, f64)> {
    let n = a.nrows();
    if rhs.len() != n {
        return Err(Error::Config(format!(
            "rhs length {} does not match matrix dimension {}",
            rhs.len(),
            n
        )));
    }
    let m = shifted(a, lambda);
    let lu = m.as_ref().partial_piv_lu();
    let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
    let w = lu.solve(&b);
    let w: Vec<C64> = (0..n).map(|i| w[(i, 0)]).collect();
    if !w.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::SingularShift { lambda, nearest: lambda });
    }
    let mw = matvec_c(m.as_ref(), &w);
    let resid: Vec<C64> = mw.iter().zip(rhs).map(|(a, b)| a - b).collect();
    let rel = vec_norm(&resid) / vec_norm(rhs).max(f64::MIN_POSITIVE);
    Ok((w, rel))
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Chebyshev-based initial guess
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(t) and P_{n-1}(t) by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = t;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { t } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * pn - pn1) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped onto the segment from `p` to `q` in the complex
/// plane. Each item is `(node, weight·dλ)`, so `∮ f dλ ≈ Σ f(node)·weight`.
pub fn segment_rule(p: C64, q: C64, n: usize) -> Vec<(C64, C64)> {
    let (x, w) = gauss_legendre(n);
    let mid = (p + q) * 0.5;
    let half = (q - p) * 0.5;
    x.iter()
        .zip(w.iter())
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_low_orders_match_closed_forms() {
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3.0f64.sqrt();
        assert_abs_diff_eq!(x[0], -r, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], r, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-15);

        let (x, w) = gauss_legendre(3);
        let r = (3.0f64 / 5.0).sqrt();
        assert_abs_diff_eq!(x[0], -r, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[2], r, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0], 5.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // an n-point rule is exact through degree 2n-1
        for n in [4usize, 9, 16, 32] {
            let (x, w) = gauss_legendre(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
            for deg in 0..(2 * n) {
                let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert_abs_diff_eq!(quad, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn segment_rule_integrates_line_segment() {
        // ∫ z dz from 0 to 1+i equals (1+i)^2/2 = i
        let p = C64::new(0.0, 0.0);
        let q = C64::new(1.0, 1.0);
        let s: C64 = segment_rule(p, q, 8).iter().map(|&(z, w)| z * w).sum();
        assert_abs_diff_eq!(s.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.im, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn solve_shifted_inverts_small_system() {
        // a = [[0, 1], [-4, 0]], lambda = 1: (I - a) w = rhs
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => 1.0,
            (1, 0) => -4.0,
            _ => 0.0,
        });
        let rhs = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let (w, rel) = solve_shifted(a.as_ref(), C64::new(1.0, 0.0), &rhs).unwrap();
        assert!(rel < 1e-12);
        // (1 - a) = [[1,-1],[4,1]], inverse first column = (1/5, -4/5)
        assert_abs_diff_eq!(w[0].re, 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1].re, -0.8, epsilon = 1e-14);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new(-(i as f64) - 1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert_abs_diff_eq!(spectral_norm(m.as_ref()), 3.0, epsilon = 1e-12);
        let (lo, hi) = extreme_singular_values(m.as_ref());
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-12);
    }
}
