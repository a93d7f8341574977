//! 1D polynomial machinery: Legendre/Jacobi recurrences, Gauss nodes,
//! Legendre series, and the endpoint-vanishing edge bubble family.
//!
//! The bubble family used on edges is
//!
//!   b_k(t) = (1-t)/2 · (1+t)/2 · P_{k-2}^{(1,1)}(t),   k ≥ 2,
//!
//! which has the two closed Legendre forms
//!
//!   b_k  = γ_k (L_k - L_{k-2}),   γ_k = -(k-1) / (2(2k-1)),
//!   b_k' = -((k-1)/2) L_{k-1}.
//!
//! These make mass and stiffness matrices of the bubble basis exactly
//! computable (pentadiagonal and diagonal, respectively).

use crate::error::{Error, Result};

/// Values L_0(x) .. L_n(x).
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(1.0);
    if n == 0 {
        return v;
    }
    v.push(x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * v[k] - kf * v[k - 1]) / (kf + 1.0);
        v.push(next);
    }
    v
}

/// Values and first derivatives of L_0..L_n at x.
pub fn legendre_all_with_deriv(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let v = legendre_all(n, x);
    let mut d = vec![0.0; n + 1];
    if n >= 1 {
        d[1] = 1.0;
    }
    for k in 1..n {
        // L'_{k+1} = L'_{k-1} + (2k+1) L_k
        d[k + 1] = d[k - 1] + (2.0 * k as f64 + 1.0) * v[k];
    }
    (v, d)
}

/// Values of the Jacobi polynomials P^(α,β)_0..n at x.
pub fn jacobi_all(alpha: f64, beta: f64, n: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(1.0);
    if n == 0 {
        return v;
    }
    v.push(0.5 * (alpha - beta) + 0.5 * (alpha + beta + 2.0) * x);
    for m in 2..=n {
        let mf = m as f64;
        let s = 2.0 * mf + alpha + beta;
        let a1 = 2.0 * mf * (mf + alpha + beta) * (s - 2.0);
        let a2 = (s - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (s - 1.0) * s * (s - 2.0);
        let a4 = 2.0 * (mf + alpha - 1.0) * (mf + beta - 1.0) * s;
        let next = ((a2 + a3 * x) * v[m - 1] - a4 * v[m - 2]) / a1;
        v.push(next);
    }
    v
}

/// Values and derivatives of P^(α,β)_0..n at x, using
/// d/dx P^(α,β)_m = (m+α+β+1)/2 · P^(α+1,β+1)_{m-1}.
pub fn jacobi_all_with_deriv(alpha: f64, beta: f64, n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let v = jacobi_all(alpha, beta, n, x);
    let mut d = vec![0.0; n + 1];
    if n >= 1 {
        let up = jacobi_all(alpha + 1.0, beta + 1.0, n - 1, x);
        for m in 1..=n {
            d[m] = 0.5 * (m as f64 + alpha + beta + 1.0) * up[m - 1];
        }
    }
    (v, d)
}

/// Homogenized Jacobi values H_m(u, v) = v^m P^(α,β)_m(u/v) together
/// with the partial derivatives (∂H/∂u, ∂H/∂v), for m = 0..n.
///
/// The recurrence is polynomial in (u, v), so no division by v occurs.
pub fn jacobi_homogenized(alpha: f64, beta: f64, n: usize, u: f64, v: f64) -> Vec<[f64; 3]> {
    let mut h = Vec::with_capacity(n + 1);
    h.push([1.0, 0.0, 0.0]);
    if n == 0 {
        return h;
    }
    let c1 = 0.5 * (alpha + beta + 2.0);
    let c0 = 0.5 * (alpha - beta);
    h.push([c1 * u + c0 * v, c1, c0]);
    for m in 2..=n {
        let mf = m as f64;
        let s = 2.0 * mf + alpha + beta;
        let a1 = 2.0 * mf * (mf + alpha + beta) * (s - 2.0);
        let a2 = (s - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (s - 1.0) * s * (s - 2.0);
        let a4 = 2.0 * (mf + alpha - 1.0) * (mf + beta - 1.0) * s;
        let (p, q) = (h[m - 1], h[m - 2]);
        let lin = a2 * v + a3 * u;
        let val = (lin * p[0] - a4 * v * v * q[0]) / a1;
        let du = (a3 * p[0] + lin * p[1] - a4 * v * v * q[1]) / a1;
        let dv = (a2 * p[0] + lin * p[2] - a4 * (2.0 * v * q[0] + v * v * q[2])) / a1;
        h.push([val, du, dv]);
    }
    h
}

/// Gauss-Legendre rule with n nodes on (-1, 1); exact for degree 2n-1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess, then Newton on L_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let v = legendre_all(n, x);
            dp = n as f64 * (x * v[n] - v[n - 1]) / (x * x - 1.0);
            let dx = v[n] / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Coefficient γ_k in b_k = γ_k (L_k - L_{k-2}).
pub fn bubble_gamma(k: usize) -> f64 {
    let kf = k as f64;
    -(kf - 1.0) / (2.0 * (2.0 * kf - 1.0))
}

/// Value and derivative of the edge bubble b_k at t.
pub fn bubble_eval(k: usize, t: f64) -> (f64, f64) {
    debug_assert!(k >= 2);
    let l = legendre_all(k, t);
    let g = bubble_gamma(k);
    let kf = k as f64;
    (g * (l[k] - l[k - 2]), -0.5 * (kf - 1.0) * l[k - 1])
}

/// Values (and derivatives) of b_2..b_deg at t, sharing one Legendre sweep.
pub fn bubble_eval_all(deg: usize, t: f64) -> Vec<(f64, f64)> {
    if deg < 2 {
        return Vec::new();
    }
    let l = legendre_all(deg, t);
    (2..=deg)
        .map(|k| {
            let kf = k as f64;
            (bubble_gamma(k) * (l[k] - l[k - 2]), -0.5 * (kf - 1.0) * l[k - 1])
        })
        .collect()
}

/// A polynomial stored as a Legendre series Σ c_k L_k.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1 {
    pub coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly1 { coeffs }
    }

    pub fn zero() -> Self {
        Poly1 { coeffs: vec![0.0] }
    }

    /// Degree bound (index of the last coefficient).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Degree ignoring trailing coefficients below `tol`.
    pub fn numerical_degree(&self, tol: f64) -> usize {
        let mut d = 0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.abs() > tol {
                d = k;
            }
        }
        d
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.degree();
        let l = legendre_all(n, x);
        self.coeffs.iter().zip(&l).map(|(c, v)| c * v).sum()
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let n = self.degree();
        let (_, d) = legendre_all_with_deriv(n, x);
        self.coeffs.iter().zip(&d).map(|(c, v)| c * v).sum()
    }

    /// Derivative as a Legendre series.
    pub fn derivative(&self) -> Poly1 {
        let n = self.coeffs.len();
        let mut d = vec![0.0; n.max(2) - 1];
        for j in 1..n {
            let mut k = j as i64 - 1;
            while k >= 0 {
                d[k as usize] += (2.0 * k as f64 + 1.0) * self.coeffs[j];
                k -= 2;
            }
        }
        Poly1::new(d)
    }

    /// Antiderivative F with F(-1) = 0.
    pub fn antiderivative(&self) -> Poly1 {
        let n = self.coeffs.len();
        let mut a = vec![0.0; n + 1];
        a[0] += self.coeffs[0];
        a[1] += self.coeffs[0];
        for k in 1..n {
            let kf = k as f64;
            a[k + 1] += self.coeffs[k] / (2.0 * kf + 1.0);
            a[k - 1] -= self.coeffs[k] / (2.0 * kf + 1.0);
        }
        Poly1::new(a)
    }

    pub fn scaled(&self, s: f64) -> Poly1 {
        Poly1::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![0.0; n];
        for (k, v) in self.coeffs.iter().enumerate() {
            c[k] += v;
        }
        for (k, v) in other.coeffs.iter().enumerate() {
            c[k] += v;
        }
        Poly1::new(c)
    }

    /// L² norm on (-1,1), from orthogonality of the Legendre basis.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * c * 2.0 / (2.0 * k as f64 + 1.0))
            .sum::<f64>()
            .sqrt()
    }
}

/// Legendre series of the bubble expansion Σ β_k b_k (β indexed from k=2).
pub fn bubble_series_to_legendre(beta: &[f64]) -> Poly1 {
    let deg = beta.len() + 1;
    let mut c = vec![0.0; deg + 1];
    for (i, &b) in beta.iter().enumerate() {
        let k = i + 2;
        let g = bubble_gamma(k);
        c[k] += b * g;
        c[k - 2] -= b * g;
    }
    Poly1::new(c)
}

/// Expand an endpoint-vanishing polynomial (given as a Legendre series)
/// in the bubble basis b_2..b_deg by back-substitution.
///
/// Returns the bubble coefficients and the leftover (L_0, L_1) residual,
/// which must be ~0 when the input really vanishes at ±1.
pub fn legendre_to_bubble(poly: &Poly1) -> (Vec<f64>, [f64; 2]) {
    let deg = poly.degree();
    if deg < 2 {
        return (Vec::new(), [poly.coeffs.first().copied().unwrap_or(0.0), poly.coeffs.get(1).copied().unwrap_or(0.0)]);
    }
    let mut rho = poly.coeffs.clone();
    let mut beta = vec![0.0; deg - 1]; // β_2..β_deg
    for k in (2..=deg).rev() {
        let b = rho[k] / bubble_gamma(k);
        beta[k - 2] = b;
        rho[k] = 0.0;
        rho[k - 2] += b * bubble_gamma(k);
    }
    (beta, [rho[0], rho[1]])
}

/// Checked variant of [`legendre_to_bubble`]: errors if the input does
/// not vanish at the endpoints.
pub fn legendre_to_bubble_checked(poly: &Poly1, tol: f64) -> Result<Vec<f64>> {
    let scale = poly.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1.0);
    let (beta, res) = legendre_to_bubble(poly);
    if res[0].abs() > tol * scale || res[1].abs() > tol * scale {
        return Err(Error::NonVanishingEndpoints(poly.eval(-1.0), poly.eval(1.0)));
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_recurrence_matches_closed_forms() {
        for &x in &[-0.9, -0.3, 0.0, 0.7, 1.0] {
            let v = legendre_all(4, x);
            assert_relative_eq!(v[2], 0.5 * (3.0 * x * x - 1.0), max_relative = 1e-14, epsilon = 1e-14);
            assert_relative_eq!(v[3], 0.5 * (5.0 * x * x * x - 3.0 * x), max_relative = 1e-14, epsilon = 1e-14);
        }
        let (_, d) = legendre_all_with_deriv(3, 0.4);
        assert_relative_eq!(d[3], 0.5 * (15.0 * 0.4 * 0.4 - 3.0), epsilon = 1e-14);
    }

    #[test]
    fn jacobi_matches_legendre_at_zero_weights() {
        for &x in &[-0.8, 0.1, 0.9] {
            let j = jacobi_all(0.0, 0.0, 5, x);
            let l = legendre_all(5, x);
            for k in 0..=5 {
                assert_relative_eq!(j[k], l[k], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn homogenized_jacobi_equals_scaled_jacobi() {
        // H_m(u, v) = v^m P_m(u/v) for v > 0, including derivative checks.
        let (alpha, beta) = (1.0, 1.0);
        let (u, v) = (0.3, 0.8);
        let h = jacobi_homogenized(alpha, beta, 6, u, v);
        let p = jacobi_all(alpha, beta, 6, u / v);
        for m in 0..=6 {
            assert_relative_eq!(h[m][0], v.powi(m as i32) * p[m], epsilon = 1e-13);
        }
        let eps = 1e-6;
        let hp = jacobi_homogenized(alpha, beta, 6, u + eps, v);
        let hm = jacobi_homogenized(alpha, beta, 6, u - eps, v);
        let hv = jacobi_homogenized(alpha, beta, 6, u, v + eps);
        let hw = jacobi_homogenized(alpha, beta, 6, u, v - eps);
        for m in 0..=6 {
            assert_relative_eq!(h[m][1], (hp[m][0] - hm[m][0]) / (2.0 * eps), epsilon = 1e-7);
            assert_relative_eq!(h[m][2], (hv[m][0] - hw[m][0]) / (2.0 * eps), epsilon = 1e-7);
        }
    }

    #[test]
    fn gauss_nodes_integrate_monomials() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            for d in 0..=(2 * n - 1) {
                let num: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(d as i32)).sum();
                let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
                assert!((num - exact).abs() < 1e-13, "n={n} d={d}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn bubble_two_is_the_quadratic_bump() {
        for &t in &[-1.0, -0.4, 0.0, 0.6, 1.0] {
            let (v, d) = bubble_eval(2, t);
            assert_relative_eq!(v, (1.0 - t * t) / 4.0, epsilon = 1e-14);
            assert_relative_eq!(d, -t / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn bubbles_vanish_at_endpoints() {
        for k in 2..=30 {
            for &t in &[-1.0, 1.0] {
                let (v, _) = bubble_eval(k, t);
                assert!(v.abs() < 1e-13, "b_{k}({t}) = {v}");
            }
        }
    }

    #[test]
    fn bubble_legendre_form_matches_jacobi_product() {
        // b_k = (1-t²)/4 · P^(1,1)_{k-2}, the form the 2D edge functions use
        for k in 2..=12 {
            for &t in &[-0.9, -0.37, 0.0, 0.51, 0.98] {
                let (v, _) = bubble_eval(k, t);
                let j = jacobi_all(1.0, 1.0, k - 2, t);
                let direct = 0.25 * (1.0 - t * t) * j[k - 2];
                assert_relative_eq!(v, direct, epsilon = 1e-13, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn legendre_bubble_round_trip() {
        let beta = vec![0.7, -1.3, 0.2, 0.05, -2.0];
        let poly = bubble_series_to_legendre(&beta);
        let (back, res) = legendre_to_bubble(&poly);
        assert!(res[0].abs() < 1e-14 && res[1].abs() < 1e-14);
        for (a, b) in beta.iter().zip(&back) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn poly_derivative_and_antiderivative() {
        let p = Poly1::new(vec![0.3, -1.0, 2.0, 0.5]);
        for &x in &[-0.8, 0.0, 0.55] {
            let h = 1e-6;
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            assert_relative_eq!(p.derivative().eval(x), fd, epsilon = 1e-8);
            assert_relative_eq!(p.eval_deriv(x), fd, epsilon = 1e-8);
        }
        let a = p.antiderivative();
        assert!(a.eval(-1.0).abs() < 1e-14);
        assert_relative_eq!(a.derivative().eval(0.3), p.eval(0.3), epsilon = 1e-12);
    }

    #[test]
    fn poly_l2_norm_matches_quadrature() {
        let p = Poly1::new(vec![1.0, 0.5, -0.25, 2.0]);
        let (x, w) = gauss_legendre(8);
        let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * p.eval(*xi).powi(2)).sum();
        assert_relative_eq!(p.l2_norm(), quad.sqrt(), epsilon = 1e-13);
    }
}
