//! Discrete harmonic extension of polynomial boundary traces.
//!
//! Given a continuous piecewise polynomial on ∂K of per-edge degree ≤ p,
//! the extension is the unique member of P_p(K) with that trace whose
//! gradient is orthogonal to the gradients of all interior bubbles —
//! equivalently, the minimal-H¹-seminorm polynomial extension.
//!
//! Boundary conditions are imposed by an explicit hierarchical lifting
//! (vertex hats + edge functions), followed by an SPD solve for the
//! bubble correction.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly1d::{legendre_to_bubble, Poly1};
use crate::spaces::ScalarSpace;

/// Piecewise-polynomial boundary data: one polynomial per edge, in the
/// edge parameter t ∈ [-1, 1] (start vertex at t = -1).
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub edge_polys: Vec<Poly1>,
}

impl BoundaryTrace {
    pub fn new(edge_polys: Vec<Poly1>) -> Self {
        BoundaryTrace { edge_polys }
    }

    /// Trace assembled from vertex values and per-edge bubble
    /// coefficients (β_2..), the common construction in this crate.
    pub fn from_vertex_and_bubbles(vertex_values: &[f64], bubbles: &[Vec<f64>]) -> Self {
        let n = vertex_values.len();
        let polys = (0..n)
            .map(|e| {
                let (va, vb) = (vertex_values[e], vertex_values[(e + 1) % n]);
                let lin = Poly1::new(vec![0.5 * (va + vb), 0.5 * (vb - va)]);
                lin.add(&crate::poly1d::bubble_series_to_legendre(&bubbles[e]))
            })
            .collect();
        BoundaryTrace { edge_polys: polys }
    }

    pub fn num_edges(&self) -> usize {
        self.edge_polys.len()
    }

    /// Largest vertex mismatch between adjacent edges.
    pub fn vertex_mismatch(&self) -> f64 {
        let n = self.num_edges();
        (0..n)
            .map(|e| (self.edge_polys[e].eval(1.0) - self.edge_polys[(e + 1) % n].eval(-1.0)).abs())
            .fold(0.0, f64::max)
    }

    fn magnitude(&self) -> f64 {
        self.edge_polys
            .iter()
            .flat_map(|p| p.coeffs.iter())
            .fold(0.0f64, |a, &c| a.max(c.abs()))
    }
}

/// Discrete harmonic extension into the scalar space.
///
/// The result F has the given trace (up to roundoff) and satisfies
/// (∇F, ∇φ) = 0 for every interior bubble φ.
pub fn discrete_harmonic_extend(space: &ScalarSpace, trace: &BoundaryTrace) -> Result<DVector<f64>> {
    let element = &space.element;
    let p = space.degree;
    if p < 1 {
        return Err(Error::InvalidDegree(p, "p >= 1"));
    }
    if trace.num_edges() != element.num_edges() {
        return Err(Error::Config("trace edge count does not match the element".into()));
    }
    let scale = trace.magnitude().max(1.0);
    if trace.vertex_mismatch() > 1e-9 * scale {
        return Err(Error::DiscontinuousTrace(trace.vertex_mismatch()));
    }
    for (e, poly) in trace.edge_polys.iter().enumerate() {
        let deg = poly.numerical_degree(1e-12 * scale);
        if deg > p {
            return Err(Error::TraceDegree { edge: e, got: deg, max: p });
        }
    }

    // explicit lifting: vertex hats + per-edge bubble expansion
    let mut coeffs = DVector::zeros(space.dim());
    for (e, poly) in trace.edge_polys.iter().enumerate() {
        let v_start = poly.eval(-1.0);
        coeffs[space.vertex_indices[element.edges[e].start]] = v_start;
        let v_end = poly.eval(1.0);
        let lin = Poly1::new(vec![0.5 * (v_start + v_end), 0.5 * (v_end - v_start)]);
        let remainder = poly.add(&lin.scaled(-1.0));
        let (beta, resid) = legendre_to_bubble(&remainder);
        if resid[0].abs() > 1e-9 * scale || resid[1].abs() > 1e-9 * scale {
            return Err(Error::NonVanishingEndpoints(resid[0], resid[1]));
        }
        for (slot, &b) in beta.iter().enumerate() {
            if slot < space.edge_indices[e].len() {
                let idx = space.edge_indices[e][slot];
                coeffs[idx] += b / space.scale(idx);
            } else if b.abs() > 1e-10 * scale {
                return Err(Error::TraceDegree { edge: e, got: slot + 2, max: p });
            }
        }
    }

    // bubble correction: K_bb c = -K_b· lift
    let bubbles = space.bubble_indices();
    if !bubbles.is_empty() {
        let nb = bubbles.len();
        let mut kbb = DMatrix::zeros(nb, nb);
        let mut rhs = DVector::zeros(nb);
        let k_lift = &space.stiffness * &coeffs;
        for (a, &i) in bubbles.iter().enumerate() {
            rhs[a] = -k_lift[i];
            for (b, &j) in bubbles.iter().enumerate() {
                kbb[(a, b)] = space.stiffness[(i, j)];
            }
        }
        let chol = Cholesky::new(kbb).ok_or(Error::SingularSystem("bubble stiffness"))?;
        let c = chol.solve(&rhs);
        for (a, &i) in bubbles.iter().enumerate() {
            coeffs[i] += c[a];
        }
    }
    Ok(coeffs)
}
