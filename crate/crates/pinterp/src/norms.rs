//! Computable Sobolev norms.
//!
//! On edges: a discrete fractional-order norm built from the generalized
//! eigenpairs of (stiffness, mass) on a high-degree endpoint-vanishing
//! "oracle" space. The degree-s norm of u = Σ y_m v_m (with VᵀMV = I)
//! is (Σ λ_m^s y_m²)^{1/2}; s = 0 gives L², s = 1 the H¹ seminorm.
//!
//! On elements: L², H¹ seminorm and the H(curl)/H(div) graph norms by
//! quadrature.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly1d::{bubble_eval_all, bubble_gamma, Poly1};
use crate::quadrature::{QuadRule1d, QuadRule2d};

/// Endpoint-vanishing polynomial space of degree P on an edge, with the
/// generalized eigenstructure of (H¹₀ stiffness, mass).
pub struct OracleEdgeSpace {
    /// Oracle degree P; the space is span{b_2..b_P}, dimension P-1.
    pub degree: usize,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// Ascending generalized eigenvalues of (stiffness, mass).
    pub eigenvalues: DVector<f64>,
    /// Eigenvectors with VᵀMV = I, columns matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl OracleEdgeSpace {
    pub fn new(degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidDegree(degree, "oracle degree >= 2"));
        }
        let n = degree - 1;
        // closed-form Gram matrices in the bubble basis b_k = γ_k (L_k - L_{k-2})
        let mut mass = DMatrix::zeros(n, n);
        let mut stiffness = DMatrix::zeros(n, n);
        let leg = |k: usize| 2.0 / (2.0 * k as f64 + 1.0);
        for a in 0..n {
            let k = a + 2;
            let gk = bubble_gamma(k);
            mass[(a, a)] = gk * gk * (leg(k) + leg(k - 2));
            if a + 2 < n {
                let g2 = bubble_gamma(k + 2);
                mass[(a, a + 2)] = -gk * g2 * leg(k);
                mass[(a + 2, a)] = mass[(a, a + 2)];
            }
            let kf = k as f64;
            let d = 0.5 * (kf - 1.0);
            stiffness[(a, a)] = d * d * leg(k - 1);
        }
        let chol = Cholesky::new(mass.clone()).ok_or(Error::EigenFailure("mass not SPD"))?;
        // reduce A v = λ M v to the symmetric standard problem
        let linv_a = chol.l().solve_lower_triangular(&stiffness).ok_or(Error::EigenFailure("triangular solve"))?;
        let c = chol.l().solve_lower_triangular(&linv_a.transpose()).ok_or(Error::EigenFailure("triangular solve"))?;
        let c = 0.5 * (&c + c.transpose());
        let eig = c.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let mut eigenvalues = DVector::zeros(n);
        let mut w = DMatrix::zeros(n, n);
        for (pos, &idx) in order.iter().enumerate() {
            eigenvalues[pos] = eig.eigenvalues[idx];
            w.set_column(pos, &eig.eigenvectors.column(idx));
        }
        if eigenvalues[0] <= 0.0 {
            return Err(Error::EigenFailure("nonpositive eigenvalue"));
        }
        // V = L^{-T} W
        let eigenvectors = chol
            .l()
            .transpose()
            .solve_upper_triangular(&w)
            .ok_or(Error::EigenFailure("back substitution"))?;
        Ok(OracleEdgeSpace { degree, mass, stiffness, eigenvalues, eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.degree - 1
    }

    /// Coefficients -> eigencoordinates y = Vᵀ M c.
    pub fn to_eigen(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        self.eigenvectors.transpose() * (&self.mass * coeffs)
    }

    /// Discrete fractional norm of order s ∈ [0, 1].
    pub fn fractional_norm(&self, coeffs: &DVector<f64>, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidFractionalOrder(s));
        }
        let y = self.to_eigen(coeffs);
        let mut sum = 0.0;
        for (m, ym) in y.iter().enumerate() {
            sum += self.eigenvalues[m].powf(s) * ym * ym;
        }
        Ok(sum.sqrt())
    }

    /// Gram matrix of the fractional inner product: M V Λ^s Vᵀ M.
    pub fn fractional_gram(&self, s: f64) -> Result<FractionalGram> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidFractionalOrder(s));
        }
        let mv = &self.mass * &self.eigenvectors;
        let mut scaled = mv.clone();
        for (m, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[m].powf(s);
        }
        let g = &scaled * mv.transpose();
        Ok(FractionalGram { order: s, matrix: 0.5 * (&g + g.transpose()) })
    }

    /// L² projection of a function onto the oracle space.
    pub fn project_l2(&self, rule: &QuadRule1d, f: impl Fn(f64) -> f64) -> DVector<f64> {
        let values: Vec<f64> = rule.nodes.iter().map(|&t| f(t)).collect();
        self.project_l2_values(rule, &values)
    }

    /// L² projection from values already sampled at the rule nodes.
    pub fn project_l2_values(&self, rule: &QuadRule1d, values: &[f64]) -> DVector<f64> {
        let n = self.dim();
        let mut rhs = DVector::zeros(n);
        for ((&t, &w), &fv) in rule.nodes.iter().zip(&rule.weights).zip(values) {
            let fw = fv * w;
            for (a, (b, _)) in bubble_eval_all(self.degree, t).into_iter().enumerate() {
                rhs[a] += fw * b;
            }
        }
        Cholesky::new(self.mass.clone()).expect("oracle mass SPD").solve(&rhs)
    }

    /// Projection onto the leading subspace span{b_2..b_{sub_degree}} in
    /// the inner product of `gram`: the minimizer of ‖target - ·‖_gram.
    pub fn project_subspace(
        &self,
        gram: &FractionalGram,
        target: &DVector<f64>,
        sub_degree: usize,
    ) -> Result<DVector<f64>> {
        let m = sub_degree.saturating_sub(1).min(self.dim());
        if m == 0 {
            return Ok(DVector::zeros(0));
        }
        let g_sub = gram.matrix.view((0, 0), (m, m)).into_owned();
        let rhs_full = &gram.matrix * target;
        let rhs = rhs_full.rows(0, m).into_owned();
        let chol = Cholesky::new(g_sub).ok_or(Error::SingularSystem("fractional Gram block"))?;
        Ok(chol.solve(&rhs))
    }

    /// Legendre form of a member given by bubble coefficients.
    pub fn to_poly(&self, coeffs: &DVector<f64>) -> Poly1 {
        crate::poly1d::bubble_series_to_legendre(coeffs.as_slice())
    }

    /// Evaluate a member at t.
    pub fn eval(&self, coeffs: &DVector<f64>, t: f64) -> f64 {
        bubble_eval_all(self.degree, t)
            .iter()
            .zip(coeffs.iter())
            .map(|((b, _), c)| b * c)
            .sum()
    }
}

/// Fractional-order Gram matrix on the oracle basis.
pub struct FractionalGram {
    pub order: f64,
    pub matrix: DMatrix<f64>,
}

/// Discrete interpolation scale between L² and the full H¹ norm on the
/// whole polynomial space P_P(-1,1) (no endpoint constraints) in the
/// Legendre basis. This realizes H^s(I) for functions that do not
/// vanish at the endpoints, e.g. the endpoint correctors.
///
/// Both Gram matrices are closed-form: the mass matrix is diagonal and
/// (L'_j, L'_k) = min(j,k)(min(j,k)+1) for j ≡ k (mod 2).
pub struct IntervalScale {
    pub degree: usize,
    pub mass: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl IntervalScale {
    pub fn new(degree: usize) -> Result<Self> {
        let n = degree + 1;
        let mut mass = DMatrix::zeros(n, n);
        let mut h1 = DMatrix::zeros(n, n);
        for j in 0..n {
            mass[(j, j)] = 2.0 / (2.0 * j as f64 + 1.0);
            for k in 0..n {
                if (j + k) % 2 == 0 {
                    let m = j.min(k) as f64;
                    h1[(j, k)] = m * (m + 1.0);
                }
            }
        }
        // interpolation pair (L², H¹): eigenpairs of (M + K, M)
        h1 += &mass;
        let chol = Cholesky::new(mass.clone()).ok_or(Error::EigenFailure("mass not SPD"))?;
        let linv = chol.l().solve_lower_triangular(&h1).ok_or(Error::EigenFailure("solve"))?;
        let c = chol
            .l()
            .solve_lower_triangular(&linv.transpose())
            .ok_or(Error::EigenFailure("solve"))?;
        let c = 0.5 * (&c + c.transpose());
        let eig = c.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let mut eigenvalues = DVector::zeros(n);
        let mut w = DMatrix::zeros(n, n);
        for (pos, &idx) in order.iter().enumerate() {
            eigenvalues[pos] = eig.eigenvalues[idx];
            w.set_column(pos, &eig.eigenvectors.column(idx));
        }
        let eigenvectors = chol
            .l()
            .transpose()
            .solve_upper_triangular(&w)
            .ok_or(Error::EigenFailure("back substitution"))?;
        Ok(IntervalScale { degree, mass, eigenvalues, eigenvectors })
    }

    /// Interpolation norm of order s of a Legendre series: s = 0 is L²,
    /// s = 1 the full H¹ norm.
    pub fn norm(&self, legendre_coeffs: &[f64], s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidFractionalOrder(s));
        }
        let mut c = DVector::zeros(self.degree + 1);
        for (k, &v) in legendre_coeffs.iter().enumerate().take(self.degree + 1) {
            c[k] = v;
        }
        let y = self.eigenvectors.transpose() * (&self.mass * c);
        let mut sum = 0.0;
        for (m, ym) in y.iter().enumerate() {
            sum += self.eigenvalues[m].powf(s) * ym * ym;
        }
        Ok(sum.sqrt())
    }
}

/// Aronszajn-Slobodeckij realization of the endpoint-weighted 1/2-norm:
/// double integral of |u(x)-u(y)|²/|x-y|² plus ∫ u²/dist(x, ∂I).
/// Cross-check companion of the spectral norm; `u` must vanish at ±1.
pub fn gagliardo_htilde_half(u: impl Fn(f64) -> f64, n: usize) -> Result<f64> {
    let (va, vb) = (u(-1.0), u(1.0));
    if va.abs() > 1e-9 || vb.abs() > 1e-9 {
        return Err(Error::NonVanishingEndpoints(va, vb));
    }
    // distinct node sets, so x != y everywhere
    let gx = crate::quadrature::interval_rule(n);
    let gy = crate::quadrature::interval_rule(n + 1);
    let mut seminorm2 = 0.0;
    for (&x, &wx) in gx.nodes.iter().zip(&gx.weights) {
        let ux = u(x);
        for (&y, &wy) in gy.nodes.iter().zip(&gy.weights) {
            let d = (ux - u(y)) / (x - y);
            seminorm2 += wx * wy * d * d;
        }
    }
    // ∫ u²/min(1-x, 1+x), split at the kink
    let half = crate::quadrature::interval_rule(n);
    let mut weight2 = 0.0;
    for (&t, &w) in half.nodes.iter().zip(&half.weights) {
        // left half x ∈ (-1, 0): dist = 1 + x
        let xl = 0.5 * (t - 1.0);
        weight2 += 0.5 * w * u(xl) * u(xl) / (1.0 + xl);
        // right half x ∈ (0, 1): dist = 1 - x
        let xr = 0.5 * (t + 1.0);
        weight2 += 0.5 * w * u(xr) * u(xr) / (1.0 - xr);
    }
    Ok((seminorm2 + weight2).sqrt())
}

#[derive(Clone, Copy, Debug)]
pub struct ScalarNorms {
    pub l2: f64,
    pub h1_semi: f64,
}

/// L² norm and H¹ seminorm of a scalar function with analytic gradient.
pub fn scalar_norms(
    rule: &QuadRule2d,
    f: impl Fn([f64; 2]) -> f64,
    grad: impl Fn([f64; 2]) -> [f64; 2],
) -> ScalarNorms {
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        let v = f(x);
        let g = grad(x);
        l2 += w * v * v;
        h1 += w * (g[0] * g[0] + g[1] * g[1]);
    }
    ScalarNorms { l2: l2.sqrt(), h1_semi: h1.sqrt() }
}

#[derive(Clone, Copy, Debug)]
pub struct VectorNorms {
    pub l2: f64,
    /// L² norm of the scalar differential (curl or div).
    pub diff_l2: f64,
    /// Graph norm: (l2² + diff_l2²)^{1/2}.
    pub graph: f64,
}

/// L², curl/div-part and graph norm of a vector field whose scalar
/// differential is supplied analytically.
pub fn vector_norms(
    rule: &QuadRule2d,
    u: impl Fn([f64; 2]) -> [f64; 2],
    d: impl Fn([f64; 2]) -> f64,
) -> VectorNorms {
    let mut l2 = 0.0;
    let mut dd = 0.0;
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        let v = u(x);
        let dv = d(x);
        l2 += w * (v[0] * v[0] + v[1] * v[1]);
        dd += w * dv * dv;
    }
    VectorNorms { l2: l2.sqrt(), diff_l2: dd.sqrt(), graph: (l2 + dd).sqrt() }
}
