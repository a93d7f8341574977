//! 1D p-approximation on (-1, 1): truncated Chebyshev expansions and an
//! endpoint-matched approximant.
//!
//! The matched approximant corrects the truncated expansion with the
//! endpoint correctors ((1±x)/2)^p, which carry the norm growth
//! ‖·‖_{H^s} ~ p^{s-1/2} needed for trace-norm error bounds.

use crate::error::{Error, Result};
use crate::poly1d::gauss_legendre;

/// Chebyshev series Σ a_i T_i on (-1, 1).
#[derive(Clone, Debug)]
pub struct ChebyshevExpansion {
    pub coeffs: Vec<f64>,
}

impl ChebyshevExpansion {
    /// Coefficients a_0..a_n by Chebyshev-Gauss quadrature with
    /// `quad_size` nodes (must be > n; aliasing is pushed beyond the
    /// quadrature size).
    pub fn compute(f: impl Fn(f64) -> f64, n: usize, quad_size: usize) -> Result<Self> {
        if quad_size <= n {
            return Err(Error::Config(format!(
                "chebyshev quadrature size {quad_size} must exceed the truncation {n}"
            )));
        }
        let m = quad_size;
        let mut fv = Vec::with_capacity(m);
        let mut theta = Vec::with_capacity(m);
        for j in 0..m {
            let th = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
            theta.push(th);
            fv.push(f(th.cos()));
        }
        let mut coeffs = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut s = 0.0;
            for j in 0..m {
                s += fv[j] * (i as f64 * theta[j]).cos();
            }
            coeffs.push(s * if i == 0 { 1.0 } else { 2.0 } / m as f64);
        }
        Ok(ChebyshevExpansion { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }

    pub fn truncated(&self, p: usize) -> ChebyshevExpansion {
        ChebyshevExpansion { coeffs: self.coeffs.iter().copied().take(p + 1).collect() }
    }
}

/// Truncated Chebyshev projection of f to degree p, computed with a
/// tail margin of `tail` extra coefficients (the tail is returned for
/// diagnostics).
pub struct ChebyshevProjection {
    /// The degree-p projection.
    pub projection: ChebyshevExpansion,
    /// The full computed expansion including the tail.
    pub full: ChebyshevExpansion,
}

pub fn chebyshev_project(f: impl Fn(f64) -> f64, p: usize, tail: usize) -> Result<ChebyshevProjection> {
    let n = p + tail.max(20);
    let full = ChebyshevExpansion::compute(f, n, n + 16)?;
    Ok(ChebyshevProjection { projection: full.truncated(p), full })
}

/// Endpoint corrector ((1±x)/2)^p: 1 at the marked endpoint, 0 at the
/// other one.
#[derive(Clone, Copy, Debug)]
pub struct EndpointCorrector {
    pub degree: usize,
    /// true: corrector for +1, i.e. ((1+x)/2)^p.
    pub positive_end: bool,
}

impl EndpointCorrector {
    pub fn eval(&self, x: f64) -> f64 {
        let s = if self.positive_end { 0.5 * (1.0 + x) } else { 0.5 * (1.0 - x) };
        s.powi(self.degree as i32)
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let p = self.degree as f64;
        let sgn = if self.positive_end { 1.0 } else { -1.0 };
        let s = if self.positive_end { 0.5 * (1.0 + x) } else { 0.5 * (1.0 - x) };
        sgn * 0.5 * p * s.powi(self.degree as i32 - 1)
    }

    /// ‖ψ_p‖_{L²} = sqrt(2/(2p+1)), from ∫ ((1+x)/2)^{2p} dx.
    pub fn l2_norm(&self) -> f64 {
        (2.0 / (2.0 * self.degree as f64 + 1.0)).sqrt()
    }

    /// |ψ_p|_{H¹} = (p/2)·sqrt(2/(2p-1)).
    pub fn h1_seminorm(&self) -> f64 {
        let p = self.degree as f64;
        0.5 * p * (2.0 / (2.0 * p - 1.0)).sqrt()
    }

    /// Legendre coefficients (by exact quadrature) up to degree `n`.
    pub fn legendre_coeffs(&self, n: usize) -> Vec<f64> {
        let rule_n = (self.degree + n) / 2 + 2;
        let (xs, ws) = gauss_legendre(rule_n);
        let mut out = vec![0.0; n + 1];
        for (&x, &w) in xs.iter().zip(&ws) {
            let v = self.eval(x);
            let leg = crate::poly1d::legendre_all(n, x);
            for (k, o) in out.iter_mut().enumerate() {
                *o += w * v * leg[k] * (2.0 * k as f64 + 1.0) / 2.0;
            }
        }
        out
    }
}

/// The pair (ψ_p^-, ψ_p^+).
pub fn endpoint_correctors(p: usize) -> (EndpointCorrector, EndpointCorrector) {
    (
        EndpointCorrector { degree: p, positive_end: false },
        EndpointCorrector { degree: p, positive_end: true },
    )
}

/// Endpoint-matched degree-p approximant
/// f_p = P_p f + (f - P_p f)(-1) ψ_p^- + (f - P_p f)(+1) ψ_p^+.
#[derive(Clone, Debug)]
pub struct MatchedApproximant {
    pub projection: ChebyshevExpansion,
    pub minus_weight: f64,
    pub plus_weight: f64,
    pub degree: usize,
}

impl MatchedApproximant {
    pub fn eval(&self, x: f64) -> f64 {
        let (cm, cp) = endpoint_correctors(self.degree);
        self.projection.eval(x) + self.minus_weight * cm.eval(x) + self.plus_weight * cp.eval(x)
    }
}

pub fn approx_endpoint_matched(f: impl Fn(f64) -> f64, p: usize) -> Result<MatchedApproximant> {
    let fm = f(-1.0);
    let fp = f(1.0);
    let proj = chebyshev_project(f, p, 24)?.projection;
    Ok(MatchedApproximant {
        minus_weight: fm - proj.eval(-1.0),
        plus_weight: fp - proj.eval(1.0),
        projection: proj,
        degree: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn projection_reproduces_chebyshev_basis() {
        // f = T_3: coefficient vector e_3 for p >= 3
        let t3 = |x: f64| 4.0 * x * x * x - 3.0 * x;
        let pr = chebyshev_project(t3, 5, 20).unwrap().projection;
        for (i, &c) in pr.coeffs.iter().enumerate() {
            let expect = if i == 3 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-13, "a_{i} = {c}");
        }
    }

    #[test]
    fn odd_coefficients_of_even_functions_vanish() {
        let pr = chebyshev_project(|x: f64| x.abs(), 9, 30).unwrap().projection;
        for i in (1..=9).step_by(2) {
            assert!(pr.coeffs[i].abs() < 1e-14, "a_{i} = {}", pr.coeffs[i]);
        }
    }

    #[test]
    fn exponential_tail_is_small() {
        // |a_9| of exp(x) is about 2·I_9(1) ≈ 1.1e-8 < 1e-7
        let full = ChebyshevExpansion::compute(|x: f64| x.exp(), 12, 64).unwrap();
        assert!(full.coeffs[9].abs() < 1e-7);
        assert!(full.coeffs[9].abs() > 1e-9);
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let e = ChebyshevExpansion { coeffs: vec![0.3, -1.2, 0.5, 0.02, 1.1] };
        for &x in &[-1.0f64, -0.4, 0.0, 0.8, 1.0] {
            // direct via cos(k arccos x) on |x|<=1
            let th = x.clamp(-1.0, 1.0).acos();
            let direct: f64 = e.coeffs.iter().enumerate().map(|(k, c)| c * (k as f64 * th).cos()).sum();
            assert_relative_eq!(e.eval(x), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn correctors_satisfy_endpoint_conditions() {
        for p in [1, 4, 17, 64] {
            let (cm, cp) = endpoint_correctors(p);
            assert_relative_eq!(cp.eval(1.0), 1.0);
            assert_relative_eq!(cp.eval(-1.0), 0.0);
            assert_relative_eq!(cm.eval(-1.0), 1.0);
            assert_relative_eq!(cm.eval(1.0), 0.0);
        }
    }

    #[test]
    fn corrector_norms_match_quadrature() {
        for p in [2, 5, 16, 40] {
            let (_, cp) = endpoint_correctors(p);
            let (xs, ws) = gauss_legendre(p + 4);
            let l2: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * cp.eval(x).powi(2)).sum();
            let h1: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * cp.eval_deriv(x).powi(2)).sum();
            assert_relative_eq!(cp.l2_norm(), l2.sqrt(), max_relative = 1e-12);
            assert_relative_eq!(cp.h1_seminorm(), h1.sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn matched_approximant_interpolates_endpoints() {
        let f = |x: f64| (2.0 * x).sin() + 0.3 * x.exp();
        for p in [2, 6, 11] {
            let a = approx_endpoint_matched(f, p).unwrap();
            assert!((a.eval(1.0) - f(1.0)).abs() < 1e-12);
            assert!((a.eval(-1.0) - f(-1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomials_are_reproduced_exactly() {
        let f = |x: f64| 0.5 - x + 2.0 * x * x * x;
        let a = approx_endpoint_matched(f, 4).unwrap();
        assert!(a.minus_weight.abs() < 1e-12 && a.plus_weight.abs() < 1e-12);
        for &x in &[-0.9, -0.2, 0.33, 0.8] {
            assert_relative_eq!(a.eval(x), f(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_is_l2_stable_on_a_probe_set() {
        // ‖P_p f‖ ≤ C ‖f‖ with C logged and modest
        let (xs, ws) = gauss_legendre(60);
        let l2 = |f: &dyn Fn(f64) -> f64| -> f64 {
            xs.iter().zip(&ws).map(|(&x, &w)| w * f(x) * f(x)).sum::<f64>().sqrt()
        };
        let probes: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(|x: f64| x.abs()),
            Box::new(|x: f64| (1.0 + x).powf(0.9)),
            Box::new(|x: f64| (6.0 * x).sin()),
            Box::new(|x: f64| 1.0 / (1.0 + 25.0 * x * x)),
        ];
        let mut worst: f64 = 0.0;
        for f in &probes {
            for p in [2, 5, 9, 14] {
                let pr = chebyshev_project(f.as_ref(), p, 24).unwrap().projection;
                let ratio = l2(&|x| pr.eval(x)) / l2(f.as_ref());
                worst = worst.max(ratio);
            }
        }
        println!("chebyshev projection L2 stability constant on probes: {worst:.4}");
        assert!(worst <= 3.0, "stability constant {worst}");
    }

    #[test]
    fn spectral_convergence_for_entire_functions() {
        // L² error of the matched approximant of exp decays faster than
        // any fixed power: the log-log slope over p = 2..12 is steep
        let f = |x: f64| x.exp();
        let (xs, ws) = gauss_legendre(40);
        let mut lp = Vec::new();
        let mut le = Vec::new();
        for p in 2..=12 {
            let a = approx_endpoint_matched(f, p).unwrap();
            let e2: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * (f(x) - a.eval(x)).powi(2)).sum();
            lp.push((p as f64).ln());
            le.push(e2.sqrt().max(1e-300).ln());
        }
        let n = lp.len() as f64;
        let (sx, sy): (f64, f64) = (lp.iter().sum(), le.iter().sum());
        let sxx: f64 = lp.iter().map(|a| a * a).sum();
        let sxy: f64 = lp.iter().zip(&le).map(|(a, b)| a * b).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(slope < -4.0, "slope {slope}");
    }
}
