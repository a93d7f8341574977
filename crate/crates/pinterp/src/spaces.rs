//! Polynomial spaces on the reference elements.
//!
//! Scalar spaces use a boundary-adapted hierarchical basis: vertex hats,
//! per-edge functions whose trace on their own edge is the bubble b_k
//! (and which vanish on the other edges), and interior bubbles. On the
//! triangle the edge and interior functions are built from homogenized
//! Jacobi polynomials in the barycentric coordinates (collapsed
//! coordinates); on the square they are tensor products of the 1D
//! hierarchical basis. Edge and interior functions are L²-normalized.
//!
//! Vector spaces cover both Nédélec edge-element families and their
//! rotations (Raviart-Thomas, Brezzi-Douglas-Marini). A rotated family
//! shares coefficients with its curl-conforming counterpart: the RT/BDM
//! basis fields are exactly the rotations of the Nédélec basis fields.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::geometry::{vec2, ElementKind, RefElement};
use crate::poly1d::{
    bubble_eval_all, bubble_gamma, jacobi_all_with_deriv, jacobi_homogenized, Poly1,
};
use crate::quadrature::{element_rule, interval_rule, QuadRule2d};

/// Tabulated basis values and first derivatives, one column per point.
pub struct BasisTable {
    pub val: DMatrix<f64>,
    pub dx: DMatrix<f64>,
    pub dy: DMatrix<f64>,
}

#[derive(Clone, Copy, Debug)]
enum ScalarItem {
    Constant,
    Vertex(usize),
    /// Edge function of degree k >= 2 attached to an edge.
    Edge { edge: usize, k: usize },
    /// Interior bubble. On the triangle: λ0λ1λ2·Dubiner_{ij}; on the
    /// square: b_i(x)·b_j(y).
    Interior { i: usize, j: usize },
}

/// Scalar polynomial space P_p (triangle) or Q_p (square).
pub struct ScalarSpace {
    pub element: RefElement,
    pub degree: usize,
    items: Vec<ScalarItem>,
    scales: Vec<f64>,
    pub vertex_indices: Vec<usize>,
    /// Per edge, the indices of the edge functions k = 2..=p.
    pub edge_indices: Vec<Vec<usize>>,
    /// The bubble selector: indices of basis functions vanishing on ∂K.
    pub interior_indices: Vec<usize>,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    mass_chol: Cholesky<f64, Dyn>,
    pub gram_rule: QuadRule2d,
}

/// Per-point staged recurrence data shared by all basis functions.
pub(crate) enum PointCtx {
    Constant,
    Tri {
        lam: [f64; 3],
        /// Homogenized P^(1,1) values and partials per edge.
        edge_h: Vec<Vec<[f64; 3]>>,
        /// Homogenized Legendre in (λ1-λ0, λ0+λ1), per interior index i.
        int_f: Vec<[f64; 3]>,
        /// Jacobi P^(2i+1,0) values/derivatives in z = 2λ2-1, per i.
        int_g: Vec<(Vec<f64>, Vec<f64>)>,
    },
    Sq {
        /// 1D hierarchical values/derivatives in x and y: [h-, h+, b2..bp].
        hx: Vec<(f64, f64)>,
        hy: Vec<(f64, f64)>,
    },
}

/// 1D hierarchical basis [h-, h+, b_2..b_deg] values and derivatives.
fn hier1d(deg: usize, t: f64) -> Vec<(f64, f64)> {
    if deg == 0 {
        return vec![(1.0, 0.0)];
    }
    let mut v = Vec::with_capacity(deg + 1);
    v.push((0.5 * (1.0 - t), -0.5));
    v.push((0.5 * (1.0 + t), 0.5));
    v.extend(bubble_eval_all(deg, t));
    v
}

impl ScalarSpace {
    /// Build the space of degree `p` (p = 0 is the constant space and is
    /// used internally for L² projections of differentiated quantities).
    pub fn new(element_kind: ElementKind, p: usize) -> Self {
        let element = RefElement::new(element_kind);
        let n_edges = element.num_edges();
        let mut items = Vec::new();
        let mut vertex_indices = Vec::new();
        let mut edge_indices = vec![Vec::new(); n_edges];
        let mut interior_indices = Vec::new();

        if p == 0 {
            items.push(ScalarItem::Constant);
        } else {
            for v in 0..element.vertices.len() {
                vertex_indices.push(items.len());
                items.push(ScalarItem::Vertex(v));
            }
            for (e, slots) in edge_indices.iter_mut().enumerate() {
                for k in 2..=p {
                    slots.push(items.len());
                    items.push(ScalarItem::Edge { edge: e, k });
                }
            }
            match element_kind {
                ElementKind::Triangle => {
                    if p >= 3 {
                        for i in 0..=(p - 3) {
                            for j in 0..=(p - 3 - i) {
                                interior_indices.push(items.len());
                                items.push(ScalarItem::Interior { i, j });
                            }
                        }
                    }
                }
                ElementKind::Square => {
                    for i in 2..=p {
                        for j in 2..=p {
                            interior_indices.push(items.len());
                            items.push(ScalarItem::Interior { i, j });
                        }
                    }
                }
            }
        }

        let gram_rule = element_rule(&element, 2 * p + 6);
        let mut space = ScalarSpace {
            element,
            degree: p,
            scales: vec![1.0; items.len()],
            items,
            vertex_indices,
            edge_indices,
            interior_indices,
            mass: DMatrix::zeros(0, 0),
            stiffness: DMatrix::zeros(0, 0),
            mass_chol: Cholesky::new(DMatrix::identity(1, 1)).unwrap(),
            gram_rule,
        };

        // L²-normalize edge and interior functions, then assemble Grams.
        let table = space.tabulate(&space.gram_rule.points.clone());
        let w = &space.gram_rule.weights;
        let n = space.dim();
        for i in 0..n {
            if matches!(space.items[i], ScalarItem::Edge { .. } | ScalarItem::Interior { .. }) {
                let nrm2: f64 = (0..w.len()).map(|q| w[q] * table.val[(i, q)] * table.val[(i, q)]).sum();
                space.scales[i] = 1.0 / nrm2.sqrt();
            }
        }
        let table = space.tabulate(&space.gram_rule.points.clone());
        space.mass = gram(&table.val, w);
        space.stiffness = gram(&table.dx, w) + gram(&table.dy, w);
        space.mass_chol = Cholesky::new(space.mass.clone()).expect("scalar mass matrix must be SPD");
        space
    }

    pub fn dim(&self) -> usize {
        self.items.len()
    }

    pub fn scale(&self, i: usize) -> f64 {
        self.scales[i]
    }

    /// Bubble selector: basis functions vanishing on the element boundary.
    pub fn bubble_indices(&self) -> &[usize] {
        &self.interior_indices
    }

    pub(crate) fn stage(&self, x: [f64; 2]) -> PointCtx {
        let p = self.degree;
        if p == 0 {
            return PointCtx::Constant;
        }
        match self.element.kind {
            ElementKind::Triangle => {
                let lam = self.element.barycentric(x);
                let mut edge_h = Vec::with_capacity(3);
                for e in 0..3 {
                    let (a, b) = (self.element.edges[e].start, self.element.edges[e].end);
                    edge_h.push(if p >= 2 {
                        jacobi_homogenized(1.0, 1.0, p - 2, lam[b] - lam[a], lam[a] + lam[b])
                    } else {
                        Vec::new()
                    });
                }
                let (int_f, int_g) = if p >= 3 {
                    let f = jacobi_homogenized(0.0, 0.0, p - 3, lam[1] - lam[0], lam[0] + lam[1]);
                    let z = 2.0 * lam[2] - 1.0;
                    let g = (0..=(p - 3))
                        .map(|i| jacobi_all_with_deriv(2.0 * i as f64 + 1.0, 0.0, p - 3 - i, z))
                        .collect();
                    (f, g)
                } else {
                    (Vec::new(), Vec::new())
                };
                PointCtx::Tri { lam, edge_h, int_f, int_g }
            }
            ElementKind::Square => PointCtx::Sq { hx: hier1d(p, x[0]), hy: hier1d(p, x[1]) },
        }
    }

    /// Value and gradient of basis function `idx` from staged data.
    pub(crate) fn eval_item(&self, ctx: &PointCtx, idx: usize) -> (f64, [f64; 2]) {
        let s = self.scales[idx];
        let (v, g) = match (&self.items[idx], ctx) {
            (ScalarItem::Constant, _) => (1.0, [0.0, 0.0]),
            (ScalarItem::Vertex(i), PointCtx::Tri { lam, .. }) => {
                (lam[*i], self.element.barycentric_gradients()[*i])
            }
            (ScalarItem::Edge { edge, k }, PointCtx::Tri { lam, edge_h, .. }) => {
                let gl = self.element.barycentric_gradients();
                let (a, b) = (self.element.edges[*edge].start, self.element.edges[*edge].end);
                let h = edge_h[*edge][k - 2];
                let prod = lam[a] * lam[b];
                let dprod = vec2::add(vec2::scale(lam[b], gl[a]), vec2::scale(lam[a], gl[b]));
                let du = vec2::sub(gl[b], gl[a]);
                let dv = vec2::add(gl[a], gl[b]);
                let grad = [
                    dprod[0] * h[0] + prod * (h[1] * du[0] + h[2] * dv[0]),
                    dprod[1] * h[0] + prod * (h[1] * du[1] + h[2] * dv[1]),
                ];
                (prod * h[0], grad)
            }
            (ScalarItem::Interior { i, j }, PointCtx::Tri { lam, int_f, int_g, .. }) => {
                let gl = self.element.barycentric_gradients();
                let w = lam[0] * lam[1] * lam[2];
                let dw = [
                    lam[1] * lam[2] * gl[0][0] + lam[0] * lam[2] * gl[1][0] + lam[0] * lam[1] * gl[2][0],
                    lam[1] * lam[2] * gl[0][1] + lam[0] * lam[2] * gl[1][1] + lam[0] * lam[1] * gl[2][1],
                ];
                let f = int_f[*i];
                let du = vec2::sub(gl[1], gl[0]);
                let dv = vec2::add(gl[0], gl[1]);
                let df = [f[1] * du[0] + f[2] * dv[0], f[1] * du[1] + f[2] * dv[1]];
                let (gv, gd) = (&int_g[*i].0, &int_g[*i].1);
                let g = gv[*j];
                let dg = [2.0 * gd[*j] * gl[2][0], 2.0 * gd[*j] * gl[2][1]];
                let val = w * f[0] * g;
                let grad = [
                    dw[0] * f[0] * g + w * df[0] * g + w * f[0] * dg[0],
                    dw[1] * f[0] * g + w * df[1] * g + w * f[0] * dg[1],
                ];
                (val, grad)
            }
            (ScalarItem::Vertex(i), PointCtx::Sq { hx, hy }) => {
                // vertex order: (-1,-1), (1,-1), (1,1), (-1,1)
                let (ix, iy) = [(0, 0), (1, 0), (1, 1), (0, 1)][*i];
                (hx[ix].0 * hy[iy].0, [hx[ix].1 * hy[iy].0, hx[ix].0 * hy[iy].1])
            }
            (ScalarItem::Edge { edge, k }, PointCtx::Sq { hx, hy }) => {
                // own-edge trace equals b_k in the edge parameter; edges 2,3
                // run against the coordinate direction, giving a parity sign.
                let sign = if (*edge == 2 || *edge == 3) && k % 2 == 1 { -1.0 } else { 1.0 };
                let (fx, fy) = match edge {
                    0 => (hx[*k], hy[0]),
                    1 => (hx[1], hy[*k]),
                    2 => (hx[*k], hy[1]),
                    _ => (hx[0], hy[*k]),
                };
                (sign * fx.0 * fy.0, [sign * fx.1 * fy.0, sign * fx.0 * fy.1])
            }
            (ScalarItem::Interior { i, j }, PointCtx::Sq { hx, hy }) => {
                let (fx, fy) = (hx[*i], hy[*j]);
                (fx.0 * fy.0, [fx.1 * fy.0, fx.0 * fy.1])
            }
            _ => unreachable!("staging mismatch"),
        };
        (s * v, [s * g[0], s * g[1]])
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> BasisTable {
        let n = self.dim();
        let np = points.len();
        let mut val = DMatrix::zeros(n, np);
        let mut dx = DMatrix::zeros(n, np);
        let mut dy = DMatrix::zeros(n, np);
        for (q, &x) in points.iter().enumerate() {
            let ctx = self.stage(x);
            for i in 0..n {
                let (v, g) = self.eval_item(&ctx, i);
                val[(i, q)] = v;
                dx[(i, q)] = g[0];
                dy[(i, q)] = g[1];
            }
        }
        BasisTable { val, dx, dy }
    }

    /// Evaluate the member with the given coefficients at many points.
    pub fn eval_coeffs(&self, coeffs: &DVector<f64>, points: &[[f64; 2]]) -> Vec<(f64, [f64; 2])> {
        assert_eq!(coeffs.len(), self.dim());
        points
            .iter()
            .map(|&x| {
                let ctx = self.stage(x);
                let mut v = 0.0;
                let mut g = [0.0, 0.0];
                for i in 0..self.dim() {
                    let c = coeffs[i];
                    if c == 0.0 {
                        continue;
                    }
                    let (vi, gi) = self.eval_item(&ctx, i);
                    v += c * vi;
                    g[0] += c * gi[0];
                    g[1] += c * gi[1];
                }
                (v, g)
            })
            .collect()
    }

    pub fn eval_coeffs_at(&self, coeffs: &DVector<f64>, x: [f64; 2]) -> (f64, [f64; 2]) {
        self.eval_coeffs(coeffs, &[x])[0]
    }

    /// Trace of a member on an edge, as a Legendre series in the edge
    /// parameter t ∈ [-1, 1] (start vertex at t = -1). Exact.
    pub fn edge_trace(&self, coeffs: &DVector<f64>, edge: usize) -> Poly1 {
        if self.degree == 0 {
            return Poly1::new(vec![coeffs[0]]);
        }
        let e = &self.element.edges[edge];
        let mut leg = vec![0.0; self.degree + 1];
        let c_start = coeffs[self.vertex_indices[e.start]];
        let c_end = coeffs[self.vertex_indices[e.end]];
        leg[0] += 0.5 * (c_start + c_end);
        if self.degree >= 1 {
            leg[1] += 0.5 * (c_end - c_start);
        }
        for (slot, &idx) in self.edge_indices[edge].iter().enumerate() {
            let k = slot + 2;
            let c = coeffs[idx] * self.scales[idx];
            let g = bubble_gamma(k);
            leg[k] += c * g;
            leg[k - 2] -= c * g;
        }
        Poly1::new(leg)
    }

    /// Solve M c = rhs with the cached Cholesky factor.
    pub fn mass_solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.mass_chol.solve(rhs)
    }

    pub fn mass_solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.mass_chol.solve(rhs)
    }

    /// L² condition number of the mass matrix (diagnostic).
    pub fn mass_condition(&self) -> f64 {
        let eig = self.mass.clone().symmetric_eigen().eigenvalues;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &e in eig.iter() {
            lo = lo.min(e);
            hi = hi.max(e);
        }
        hi / lo
    }
}

/// Checked constructor for user-facing code: degree-0 spaces are an
/// internal device (projection targets for differentiated quantities)
/// and are not valid here.
pub fn build_scalar_space(kind: ElementKind, p: usize) -> Result<ScalarSpace> {
    if p < 1 {
        return Err(Error::InvalidDegree(p, "p >= 1"));
    }
    Ok(ScalarSpace::new(kind, p))
}

fn gram(table: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut scaled = table.clone();
    for (q, &w) in weights.iter().enumerate() {
        scaled.column_mut(q).scale_mut(w);
    }
    let g = &scaled * table.transpose();
    // symmetrize against roundoff
    0.5 * (&g + g.transpose())
}

/// L²-project a scalar function onto the space using the given rule.
pub fn project_scalar(
    space: &ScalarSpace,
    rule: &QuadRule2d,
    f: impl Fn([f64; 2]) -> f64,
) -> DVector<f64> {
    let mut rhs = DVector::zeros(space.dim());
    for (q, &x) in rule.points.iter().enumerate() {
        let ctx = space.stage(x);
        let fw = f(x) * rule.weights[q];
        for i in 0..space.dim() {
            let (v, _) = space.eval_item(&ctx, i);
            rhs[i] += fw * v;
        }
    }
    space.mass_solve(&rhs)
}

// ---------------------------------------------------------------------------
// Vector spaces
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorFamily {
    NedelecFirst,
    NedelecSecond,
    RaviartThomas,
    BrezziDouglasMarini,
}

impl VectorFamily {
    pub fn name(self) -> &'static str {
        match self {
            VectorFamily::NedelecFirst => "Ned1",
            VectorFamily::NedelecSecond => "Ned2",
            VectorFamily::RaviartThomas => "RT",
            VectorFamily::BrezziDouglasMarini => "BDM",
        }
    }

    /// True for the H(div)-conforming families (rotations of the others).
    pub fn is_div_conforming(self) -> bool {
        matches!(self, VectorFamily::RaviartThomas | VectorFamily::BrezziDouglasMarini)
    }

    /// The curl-conforming family this one is the rotation of.
    pub fn curl_side(self) -> VectorFamily {
        match self {
            VectorFamily::RaviartThomas => VectorFamily::NedelecFirst,
            VectorFamily::BrezziDouglasMarini => VectorFamily::NedelecSecond,
            other => other,
        }
    }
}

impl std::str::FromStr for VectorFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ned1" | "Ned1" => Ok(VectorFamily::NedelecFirst),
            "ned2" | "Ned2" => Ok(VectorFamily::NedelecSecond),
            "rt" | "RT" => Ok(VectorFamily::RaviartThomas),
            "bdm" | "BDM" => Ok(VectorFamily::BrezziDouglasMarini),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

enum VectorRep {
    /// (φ_i, 0) and (0, φ_i) over a scalar space: the second Nédélec
    /// family (P_p)² on the triangle, (Q_p)² on the square.
    Pairs(ScalarSpace),
    /// First family on the triangle: (P_{p-1})² ⊕ span{x⊥ q}, with q
    /// running over `hom` homogeneous polynomials of degree p-1.
    TriFirst { scalar: ScalarSpace, hom: usize },
    /// First family on the square: Q_{p-1,p} × Q_{p,p-1}.
    SqFirst { deg: usize },
}

/// Tabulated vector basis data, one column per point. Components and
/// differentials are those of the family itself (curl for Nédélec
/// spaces, both curl and div always available).
pub struct VecTable {
    pub vx: DMatrix<f64>,
    pub vy: DMatrix<f64>,
    pub curl: DMatrix<f64>,
    pub div: DMatrix<f64>,
}

/// One evaluated vector-space member.
#[derive(Clone, Copy, Debug)]
pub struct VecSample {
    pub value: [f64; 2],
    pub curl: f64,
    pub div: f64,
}

pub struct VectorSpace {
    pub element: RefElement,
    pub degree: usize,
    pub family: VectorFamily,
    rotated: bool,
    rep: VectorRep,
    scales: Vec<f64>,
    pub mass: DMatrix<f64>,
    mass_chol: Cholesky<f64, Dyn>,
    /// Columns span the trace-free bubble subspace in coefficient space
    /// (tangential trace for curl-conforming families, normal trace for
    /// the div-conforming ones).
    pub bubbles: DMatrix<f64>,
    pub gram_rule: QuadRule2d,
}

impl VectorSpace {
    pub fn new(element_kind: ElementKind, p: usize, family: VectorFamily) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidDegree(p, "p >= 1"));
        }
        let element = RefElement::new(element_kind);
        let rotated = family.is_div_conforming();
        let rep = match (element_kind, family.curl_side()) {
            (_, VectorFamily::NedelecSecond) => VectorRep::Pairs(ScalarSpace::new(element_kind, p)),
            (ElementKind::Triangle, VectorFamily::NedelecFirst) => {
                VectorRep::TriFirst { scalar: ScalarSpace::new(element_kind, p - 1), hom: p }
            }
            (ElementKind::Square, VectorFamily::NedelecFirst) => VectorRep::SqFirst { deg: p },
            _ => unreachable!(),
        };
        let gram_rule = element_rule(&element, 2 * p + 6);
        let n = match &rep {
            VectorRep::Pairs(s) => 2 * s.dim(),
            VectorRep::TriFirst { scalar, hom } => 2 * scalar.dim() + hom,
            VectorRep::SqFirst { deg } => 2 * deg * (deg + 1),
        };
        let mut space = VectorSpace {
            element,
            degree: p,
            family,
            rotated,
            rep,
            scales: vec![1.0; n],
            mass: DMatrix::zeros(0, 0),
            mass_chol: Cholesky::new(DMatrix::identity(1, 1)).unwrap(),
            bubbles: DMatrix::zeros(0, 0),
            gram_rule,
        };
        // L²-normalize, then assemble the Gram.
        let table = space.tabulate(&space.gram_rule.points.clone());
        let w = &space.gram_rule.weights;
        for i in 0..n {
            let nrm2: f64 = (0..w.len())
                .map(|q| w[q] * (table.vx[(i, q)] * table.vx[(i, q)] + table.vy[(i, q)] * table.vy[(i, q)]))
                .sum();
            space.scales[i] = 1.0 / nrm2.sqrt();
        }
        let table = space.tabulate(&space.gram_rule.points.clone());
        space.mass = gram(&table.vx, w) + gram(&table.vy, w);
        space.mass_chol =
            Cholesky::new(space.mass.clone()).ok_or(Error::SingularSystem("vector mass matrix"))?;
        space.bubbles = space.compute_bubbles();
        Ok(space)
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    pub fn mass_solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.mass_chol.solve(rhs)
    }

    pub fn mass_solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.mass_chol.solve(rhs)
    }

    /// Unrotated (curl-side) value, curl and div of basis function `i`.
    fn eval_item_raw(&self, ctx: &VecCtx, i: usize) -> ([f64; 2], f64, f64) {
        match (&self.rep, ctx) {
            (VectorRep::Pairs(s), VecCtx::Scalar(sctx)) => {
                let ns = s.dim();
                if i < ns {
                    let (v, g) = s.eval_item(sctx, i);
                    ([v, 0.0], -g[1], g[0])
                } else {
                    let (v, g) = s.eval_item(sctx, i - ns);
                    ([0.0, v], g[0], g[1])
                }
            }
            (VectorRep::TriFirst { scalar, hom }, VecCtx::TriFirst { sctx, q, x }) => {
                let ns = scalar.dim();
                if i < 2 * ns {
                    if i < ns {
                        let (v, g) = scalar.eval_item(sctx, i);
                        ([v, 0.0], -g[1], g[0])
                    } else {
                        let (v, g) = scalar.eval_item(sctx, i - ns);
                        ([0.0, v], g[0], g[1])
                    }
                } else {
                    // x⊥ q_j with q_j = x1^(hom-1-j) · H_j(x2, x1)
                    let j = i - 2 * ns;
                    let m = hom - 1 - j;
                    let h = q[j];
                    let x1m = x[0].powi(m as i32);
                    let qv = h[0] * x1m;
                    let dq1 = h[2] * x1m
                        + if m > 0 { m as f64 * x[0].powi(m as i32 - 1) * h[0] } else { 0.0 };
                    let dq2 = h[1] * x1m;
                    let val = [-x[1] * qv, x[0] * qv];
                    let curl = 2.0 * qv + x[0] * dq1 + x[1] * dq2;
                    let div = -x[1] * dq1 + x[0] * dq2;
                    (val, curl, div)
                }
            }
            (VectorRep::SqFirst { deg }, VecCtx::SqFirst { lo_x, hi_x, lo_y, hi_y }) => {
                let p = *deg;
                let nx = p * (p + 1); // Q_{p-1,p} block
                if i < nx {
                    let (a, b) = (i / (p + 1), i % (p + 1));
                    let (f, g) = (lo_x[a], hi_y[b]);
                    ([f.0 * g.0, 0.0], -f.0 * g.1, f.1 * g.0)
                } else {
                    let j = i - nx;
                    let (a, b) = (j / p, j % p);
                    let (f, g) = (hi_x[a], lo_y[b]);
                    ([0.0, f.0 * g.0], f.1 * g.0, f.0 * g.1)
                }
            }
            _ => unreachable!("staging mismatch"),
        }
    }

    pub(crate) fn stage(&self, x: [f64; 2]) -> VecCtx {
        match &self.rep {
            VectorRep::Pairs(s) => VecCtx::Scalar(s.stage(x)),
            VectorRep::TriFirst { scalar, hom } => VecCtx::TriFirst {
                sctx: scalar.stage(x),
                q: if *hom >= 1 {
                    jacobi_homogenized(0.0, 0.0, hom - 1, x[1], x[0])
                } else {
                    Vec::new()
                },
                x,
            },
            VectorRep::SqFirst { deg } => VecCtx::SqFirst {
                lo_x: hier1d(deg - 1, x[0]),
                hi_x: hier1d(*deg, x[0]),
                lo_y: hier1d(deg - 1, x[1]),
                hi_y: hier1d(*deg, x[1]),
            },
        }
    }

    /// Value/curl/div of basis function `i`, in the family's own
    /// orientation (rotated for RT/BDM) and scaling.
    pub(crate) fn eval_item(&self, ctx: &VecCtx, i: usize) -> ([f64; 2], f64, f64) {
        let (v, c, d) = self.eval_item_raw(ctx, i);
        let s = self.scales[i];
        if self.rotated {
            // w = rot(v) = (v2, -v1): curl w = -div v, div w = curl v
            ([s * v[1], -s * v[0]], -s * d, s * c)
        } else {
            ([s * v[0], s * v[1]], s * c, s * d)
        }
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> VecTable {
        let n = self.dim();
        let np = points.len();
        let mut vx = DMatrix::zeros(n, np);
        let mut vy = DMatrix::zeros(n, np);
        let mut curl = DMatrix::zeros(n, np);
        let mut div = DMatrix::zeros(n, np);
        for (q, &x) in points.iter().enumerate() {
            let ctx = self.stage(x);
            for i in 0..n {
                let (v, c, d) = self.eval_item(&ctx, i);
                vx[(i, q)] = v[0];
                vy[(i, q)] = v[1];
                curl[(i, q)] = c;
                div[(i, q)] = d;
            }
        }
        VecTable { vx, vy, curl, div }
    }

    pub fn eval_coeffs(&self, coeffs: &DVector<f64>, points: &[[f64; 2]]) -> Vec<VecSample> {
        assert_eq!(coeffs.len(), self.dim());
        points
            .iter()
            .map(|&x| {
                let ctx = self.stage(x);
                let mut out = VecSample { value: [0.0, 0.0], curl: 0.0, div: 0.0 };
                for i in 0..self.dim() {
                    let c = coeffs[i];
                    if c == 0.0 {
                        continue;
                    }
                    let (v, cu, dv) = self.eval_item(&ctx, i);
                    out.value[0] += c * v[0];
                    out.value[1] += c * v[1];
                    out.curl += c * cu;
                    out.div += c * dv;
                }
                out
            })
            .collect()
    }

    pub fn eval_coeffs_at(&self, coeffs: &DVector<f64>, x: [f64; 2]) -> VecSample {
        self.eval_coeffs(coeffs, &[x])[0]
    }

    /// Boundary trace that must vanish for a bubble: tangential component
    /// for curl-conforming families, normal component for div-conforming.
    pub fn boundary_trace_at(&self, coeffs: &DVector<f64>, edge: usize, t: f64) -> f64 {
        let x = self.element.edge_point(edge, t);
        let s = self.eval_coeffs_at(coeffs, x);
        let e = &self.element.edges[edge];
        if self.rotated {
            vec2::dot(s.value, e.normal)
        } else {
            vec2::dot(s.value, e.tangent)
        }
    }

    /// Kernel of the boundary-trace sampling map, via the spectral
    /// decomposition of its normal matrix. Columns are orthonormal.
    fn compute_bubbles(&self) -> DMatrix<f64> {
        let n = self.dim();
        let nt = self.degree + 3;
        let g = interval_rule(nt);
        let ne = self.element.num_edges();
        let mut rows = DMatrix::zeros(ne * nt, n);
        for e in 0..ne {
            let edge = self.element.edges[e];
            for (qi, (&t, &w)) in g.nodes.iter().zip(&g.weights).enumerate() {
                let x = self.element.edge_point(e, t);
                let ctx = self.stage(x);
                for i in 0..n {
                    let (v, _, _) = self.eval_item(&ctx, i);
                    let tr = if self.rotated { vec2::dot(v, edge.normal) } else { vec2::dot(v, edge.tangent) };
                    rows[(e * nt + qi, i)] = tr * w.sqrt();
                }
            }
        }
        let normal = rows.transpose() * &rows;
        let eig = normal.symmetric_eigen();
        let max_eig = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b)).max(1.0);
        let tol = 1e-12 * max_eig;
        let mut cols = Vec::new();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= tol {
                cols.push(eig.eigenvectors.column(k).clone_owned());
            }
        }
        let mut out = DMatrix::zeros(n, cols.len());
        for (k, c) in cols.iter().enumerate() {
            out.set_column(k, c);
        }
        out
    }
}

pub(crate) enum VecCtx {
    Scalar(PointCtx),
    TriFirst { sctx: PointCtx, q: Vec<[f64; 3]>, x: [f64; 2] },
    SqFirst { lo_x: Vec<(f64, f64)>, hi_x: Vec<(f64, f64)>, lo_y: Vec<(f64, f64)>, hi_y: Vec<(f64, f64)> },
}

/// L²-project a vector field onto the space.
pub fn project_vector(
    space: &VectorSpace,
    rule: &QuadRule2d,
    f: impl Fn([f64; 2]) -> [f64; 2],
) -> DVector<f64> {
    let mut rhs = DVector::zeros(space.dim());
    for (q, &x) in rule.points.iter().enumerate() {
        let ctx = space.stage(x);
        let fv = f(x);
        let w = rule.weights[q];
        for i in 0..space.dim() {
            let (v, _, _) = space.eval_item(&ctx, i);
            rhs[i] += w * (fv[0] * v[0] + fv[1] * v[1]);
        }
    }
    space.mass_solve(&rhs)
}

// ---------------------------------------------------------------------------
// Whitney (lowest-order edge) fields
// ---------------------------------------------------------------------------

/// Analytic value of the Whitney field attached to `edge` (curl-side
/// orientation). Its tangential trace is 1/2 on its own edge and 0 on
/// the others, so the edge circulations are ∫ = δ.
pub fn whitney_value(element: &RefElement, edge: usize, x: [f64; 2]) -> [f64; 2] {
    match element.kind {
        ElementKind::Triangle => {
            let lam = element.barycentric(x);
            let gl = element.barycentric_gradients();
            let (a, b) = (element.edges[edge].start, element.edges[edge].end);
            vec2::sub(vec2::scale(lam[a], gl[b]), vec2::scale(lam[b], gl[a]))
        }
        ElementKind::Square => {
            let e = &element.edges[edge];
            // linear hat: 1 on the edge, 0 on the opposite edge
            let hat = match edge {
                0 => 0.5 * (1.0 - x[1]),
                1 => 0.5 * (1.0 + x[0]),
                2 => 0.5 * (1.0 + x[1]),
                _ => 0.5 * (1.0 - x[0]),
            };
            vec2::scale(0.5 * hat, e.tangent)
        }
    }
}

/// Constant curl of the Whitney field.
pub fn whitney_curl(element: &RefElement, edge: usize) -> f64 {
    match element.kind {
        ElementKind::Triangle => {
            let gl = element.barycentric_gradients();
            let (a, b) = (element.edges[edge].start, element.edges[edge].end);
            2.0 * vec2::cross(gl[a], gl[b])
        }
        ElementKind::Square => 0.25,
    }
}

/// Coefficients of the Whitney fields in a (curl-conforming) vector
/// space, one vector per edge. Exact because the fields lie in every
/// supported space.
pub fn whitney_coefficients(space: &VectorSpace) -> Result<Vec<DVector<f64>>> {
    if space.family.is_div_conforming() {
        return Err(Error::UnsupportedFamily {
            family: space.family.name(),
            element: "whitney fields are curl-side objects",
        });
    }
    let element = space.element.clone();
    let mut out = Vec::with_capacity(element.num_edges());
    for e in 0..element.num_edges() {
        let c = project_vector(space, &space.gram_rule, |x| whitney_value(&element, e, x));
        // verify the projection reproduced the field
        for &t in &[-0.71, 0.13, 0.64] {
            for edge in 0..element.num_edges() {
                let x = element.edge_point(edge, t);
                let got = space.eval_coeffs_at(&c, x).value;
                let want = whitney_value(&element, e, x);
                let err = vec2::norm(vec2::sub(got, want));
                if err > 1e-10 {
                    return Err(Error::IncompatibleSpaces { op: "whitney", residual: err });
                }
            }
        }
        out.push(c);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Differential-operator matrices
// ---------------------------------------------------------------------------

/// Strictly interior, reproducible sample points for residual checks.
pub fn sample_points(element: &RefElement, n: usize) -> Vec<[f64; 2]> {
    let phi = 0.618_033_988_749_894_9;
    (0..n)
        .map(|k| {
            let a = ((k as f64 + 0.37) * phi).fract();
            let b = ((k as f64 + 1.71) * phi * phi).fract();
            match element.kind {
                ElementKind::Triangle => {
                    // fold into the unit simplex, shrink slightly inside
                    let (mut u, mut v) = (a, b);
                    if u + v > 1.0 {
                        u = 1.0 - u;
                        v = 1.0 - v;
                    }
                    let s = 0.94;
                    let c = (1.0 - s) / 3.0;
                    element.from_unit(c + s * u, c + s * v)
                }
                ElementKind::Square => [0.94 * (2.0 * a - 1.0), 0.94 * (2.0 * b - 1.0)],
            }
        })
        .collect()
}

fn verify_scalar_to_vector(
    op: &'static str,
    src: &ScalarSpace,
    dst: &VectorSpace,
    mat: &DMatrix<f64>,
    image: impl Fn(&ScalarSpace, &DVector<f64>, [f64; 2]) -> [f64; 2],
) -> Result<()> {
    let pts = sample_points(&src.element, 20);
    let mut worst: f64 = 0.0;
    for trial in 0..3 {
        let mut c = DVector::zeros(src.dim());
        for i in 0..src.dim() {
            c[i] = (((i * 37 + trial * 101 + 13) % 19) as f64 - 9.0) / 9.0;
        }
        let d = mat * &c;
        let mut err: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for &x in &pts {
            let want = image(src, &c, x);
            let got = dst.eval_coeffs_at(&d, x).value;
            err = err.max(vec2::norm(vec2::sub(got, want)));
            scale = scale.max(vec2::norm(want));
        }
        worst = worst.max(err / scale);
    }
    if worst > 1e-9 {
        return Err(Error::IncompatibleSpaces { op, residual: worst });
    }
    Ok(())
}

fn verify_vector_to_scalar(
    op: &'static str,
    src: &VectorSpace,
    dst: &ScalarSpace,
    mat: &DMatrix<f64>,
    image: impl Fn(&VectorSpace, &DVector<f64>, [f64; 2]) -> f64,
) -> Result<()> {
    let pts = sample_points(&src.element, 20);
    let mut worst: f64 = 0.0;
    for trial in 0..3 {
        let mut c = DVector::zeros(src.dim());
        for i in 0..src.dim() {
            c[i] = (((i * 53 + trial * 71 + 7) % 17) as f64 - 8.0) / 8.0;
        }
        let d = mat * &c;
        let mut err: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for &x in &pts {
            let want = image(src, &c, x);
            let got = dst.eval_coeffs_at(&d, x).0;
            err = err.max((got - want).abs());
            scale = scale.max(want.abs());
        }
        worst = worst.max(err / scale);
    }
    if worst > 1e-9 {
        return Err(Error::IncompatibleSpaces { op, residual: worst });
    }
    Ok(())
}

/// Matrix of the gradient, mapping scalar coefficients into vector
/// coefficients. Errors if ∇(src) does not lie in dst.
pub fn gradient_matrix(src: &ScalarSpace, dst: &VectorSpace) -> Result<DMatrix<f64>> {
    let rule = element_rule(&src.element, src.degree + dst.degree + 2);
    let st = src.tabulate(&rule.points);
    let dt = dst.tabulate(&rule.points);
    let rhs = weighted_product(&dt.vx, &st.dx, &rule.weights) + weighted_product(&dt.vy, &st.dy, &rule.weights);
    let mat = dst.mass_solve_matrix(&rhs);
    verify_scalar_to_vector("grad", src, dst, &mat, |s, c, x| s.eval_coeffs_at(c, x).1)?;
    Ok(mat)
}

/// Matrix of the rotated gradient (∂f/∂x2, -∂f/∂x1).
pub fn scalar_curl_matrix(src: &ScalarSpace, dst: &VectorSpace) -> Result<DMatrix<f64>> {
    let rule = element_rule(&src.element, src.degree + dst.degree + 2);
    let st = src.tabulate(&rule.points);
    let dt = dst.tabulate(&rule.points);
    let rhs = weighted_product(&dt.vx, &st.dy, &rule.weights) - weighted_product(&dt.vy, &st.dx, &rule.weights);
    let mat = dst.mass_solve_matrix(&rhs);
    verify_scalar_to_vector("curl_scalar", src, dst, &mat, |s, c, x| {
        let g = s.eval_coeffs_at(c, x).1;
        [g[1], -g[0]]
    })?;
    Ok(mat)
}

/// Matrix of the scalar curl ∂u2/∂x1 - ∂u1/∂x2 on a vector space.
pub fn curl_matrix(src: &VectorSpace, dst: &ScalarSpace) -> Result<DMatrix<f64>> {
    let rule = element_rule(&src.element, src.degree + dst.degree + 2);
    let st = src.tabulate(&rule.points);
    let dt = dst.tabulate(&rule.points);
    let rhs = weighted_product(&dt.val, &st.curl, &rule.weights);
    let mat = dst.mass_solve_matrix(&rhs);
    verify_vector_to_scalar("curl", src, dst, &mat, |s, c, x| s.eval_coeffs_at(c, x).curl)?;
    Ok(mat)
}

/// Matrix of the divergence on a vector space.
pub fn divergence_matrix(src: &VectorSpace, dst: &ScalarSpace) -> Result<DMatrix<f64>> {
    let rule = element_rule(&src.element, src.degree + dst.degree + 2);
    let st = src.tabulate(&rule.points);
    let dt = dst.tabulate(&rule.points);
    let rhs = weighted_product(&dt.val, &st.div, &rule.weights);
    let mat = dst.mass_solve_matrix(&rhs);
    verify_vector_to_scalar("div", src, dst, &mat, |s, c, x| s.eval_coeffs_at(c, x).div)?;
    Ok(mat)
}

/// Matrix of the rotation (u1, u2) -> (u2, -u1) between vector spaces.
pub fn rotation_matrix(src: &VectorSpace, dst: &VectorSpace) -> Result<DMatrix<f64>> {
    let rule = element_rule(&src.element, src.degree + dst.degree + 2);
    let st = src.tabulate(&rule.points);
    let dt = dst.tabulate(&rule.points);
    let rhs = weighted_product(&dt.vx, &st.vy, &rule.weights) - weighted_product(&dt.vy, &st.vx, &rule.weights);
    let mat = dst.mass_solve_matrix(&rhs);
    // verify pointwise
    let pts = sample_points(&src.element, 12);
    let mut c = DVector::zeros(src.dim());
    for i in 0..src.dim() {
        c[i] = (((i * 29 + 3) % 13) as f64 - 6.0) / 6.0;
    }
    let d = &mat * &c;
    for &x in &pts {
        let u = src.eval_coeffs_at(&c, x).value;
        let v = dst.eval_coeffs_at(&d, x).value;
        let err = vec2::norm(vec2::sub(v, vec2::rot(u)));
        if err > 1e-9 {
            return Err(Error::IncompatibleSpaces { op: "rot", residual: err });
        }
    }
    Ok(mat)
}

fn weighted_product(a: &DMatrix<f64>, b: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut aw = a.clone();
    for (q, &wq) in w.iter().enumerate() {
        aw.column_mut(q).scale_mut(wq);
    }
    aw * b.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_dimensions() {
        assert_eq!(ScalarSpace::new(ElementKind::Triangle, 2).dim(), 6);
        assert_eq!(ScalarSpace::new(ElementKind::Square, 3).dim(), 16);
        assert_eq!(ScalarSpace::new(ElementKind::Triangle, 1).dim(), 3);
        for p in 1..=8 {
            assert_eq!(ScalarSpace::new(ElementKind::Triangle, p).dim(), (p + 1) * (p + 2) / 2);
            assert_eq!(ScalarSpace::new(ElementKind::Square, p).dim(), (p + 1) * (p + 1));
        }
    }

    #[test]
    fn checked_constructor_rejects_degree_zero() {
        assert!(build_scalar_space(ElementKind::Triangle, 0).is_err());
        assert!(build_scalar_space(ElementKind::Square, 1).is_ok());
    }

    #[test]
    fn degree_one_triangle_has_no_bubbles() {
        let s = ScalarSpace::new(ElementKind::Triangle, 1);
        assert!(s.bubble_indices().is_empty());
    }

    #[test]
    fn bubbles_vanish_on_the_boundary() {
        for kind in [ElementKind::Triangle, ElementKind::Square] {
            let s = ScalarSpace::new(kind, 6);
            let mut c = DVector::zeros(s.dim());
            for (j, &i) in s.interior_indices.iter().enumerate() {
                c[i] = 1.0 + 0.3 * j as f64;
            }
            for e in 0..s.element.num_edges() {
                for &t in &[-0.95, -0.32, 0.11, 0.78, 1.0] {
                    let x = s.element.edge_point(e, t);
                    let (v, _) = s.eval_coeffs_at(&c, x);
                    assert!(v.abs() < 1e-12, "{kind:?} edge {e}: {v}");
                }
            }
        }
    }

    #[test]
    fn mass_matrices_are_spd_and_quadrature_stable() {
        for kind in [ElementKind::Triangle, ElementKind::Square] {
            let s = ScalarSpace::new(kind, 5);
            // SPD: Cholesky succeeded in the constructor. Quadrature
            // stability: a rule with bare minimal degree must agree.
            let lean = element_rule(&s.element, 2 * 5 + 2);
            let t = s.tabulate(&lean.points);
            let m2 = gram(&t.val, &lean.weights);
            let diff = (&m2 - &s.mass).norm() / s.mass.norm();
            assert!(diff < 1e-12, "{kind:?}: {diff}");
        }
    }

    #[test]
    fn edge_traces_are_exact() {
        for kind in [ElementKind::Triangle, ElementKind::Square] {
            let s = ScalarSpace::new(kind, 5);
            let mut c = DVector::zeros(s.dim());
            for i in 0..s.dim() {
                c[i] = ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5;
            }
            for e in 0..s.element.num_edges() {
                let tr = s.edge_trace(&c, e);
                for &t in &[-1.0, -0.62, 0.05, 0.44, 1.0] {
                    let x = s.element.edge_point(e, t);
                    let (v, _) = s.eval_coeffs_at(&c, x);
                    assert_relative_eq!(tr.eval(t), v, epsilon = 1e-11, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for kind in [ElementKind::Triangle, ElementKind::Square] {
            let s = ScalarSpace::new(kind, 7);
            let mut c = DVector::zeros(s.dim());
            for i in 0..s.dim() {
                c[i] = (((i * 13 + 5) % 9) as f64 - 4.0) / 4.0;
            }
            let h = 1e-6;
            for &x in sample_points(&s.element, 6).iter() {
                let (_, g) = s.eval_coeffs_at(&c, x);
                let fx = (s.eval_coeffs_at(&c, [x[0] + h, x[1]]).0 - s.eval_coeffs_at(&c, [x[0] - h, x[1]]).0) / (2.0 * h);
                let fy = (s.eval_coeffs_at(&c, [x[0], x[1] + h]).0 - s.eval_coeffs_at(&c, [x[0], x[1] - h]).0) / (2.0 * h);
                assert_relative_eq!(g[0], fx, epsilon = 1e-6, max_relative = 1e-6);
                assert_relative_eq!(g[1], fy, epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn vector_dimensions() {
        let n2 = VectorSpace::new(ElementKind::Triangle, 1, VectorFamily::NedelecSecond).unwrap();
        assert_eq!(n2.dim(), 6);
        let rt = VectorSpace::new(ElementKind::Triangle, 1, VectorFamily::RaviartThomas).unwrap();
        assert_eq!(rt.dim(), 3);
        for p in 1..=5 {
            let n2 = VectorSpace::new(ElementKind::Triangle, p, VectorFamily::NedelecSecond).unwrap();
            assert_eq!(n2.dim(), (p + 1) * (p + 2));
            let n1 = VectorSpace::new(ElementKind::Triangle, p, VectorFamily::NedelecFirst).unwrap();
            assert_eq!(n1.dim(), p * (p + 2));
            let sq = VectorSpace::new(ElementKind::Square, p, VectorFamily::NedelecFirst).unwrap();
            assert_eq!(sq.dim(), 2 * p * (p + 1));
        }
    }

    #[test]
    fn vector_bubble_counts_and_traces() {
        for p in 1..=5 {
            let n2 = VectorSpace::new(ElementKind::Triangle, p, VectorFamily::NedelecSecond).unwrap();
            assert_eq!(n2.bubbles.ncols(), (p + 1) * (p - 1), "Ned2 p={p}");
            let n1 = VectorSpace::new(ElementKind::Triangle, p, VectorFamily::NedelecFirst).unwrap();
            assert_eq!(n1.bubbles.ncols(), p * (p - 1), "Ned1 p={p}");
            // traces of bubble combinations vanish
            for space in [&n2, &n1] {
                for k in 0..space.bubbles.ncols().min(3) {
                    let c: DVector<f64> = space.bubbles.column(k).clone_owned();
                    for e in 0..3 {
                        for &t in &[-0.8, 0.1, 0.9] {
                            assert!(space.boundary_trace_at(&c, e, t).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rt_bubbles_have_no_normal_trace() {
        let rt = VectorSpace::new(ElementKind::Triangle, 3, VectorFamily::RaviartThomas).unwrap();
        assert!(rt.bubbles.ncols() > 0);
        let c: DVector<f64> = rt.bubbles.column(0).clone_owned();
        for e in 0..3 {
            for &t in &[-0.5, 0.3] {
                assert!(rt.boundary_trace_at(&c, e, t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn whitney_duality() {
        for kind in [ElementKind::Triangle, ElementKind::Square] {
            let el = RefElement::new(kind);
            let g = interval_rule(6);
            for l in 0..el.num_edges() {
                for lp in 0..el.num_edges() {
                    let edge = el.edges[lp];
                    let circ = g.integrate(|t| {
                        let x = el.edge_point(lp, t);
                        vec2::dot(whitney_value(&el, l, x), edge.tangent)
                    });
                    let expect = if l == lp { 1.0 } else { 0.0 };
                    assert!((circ - expect).abs() < 1e-12, "{kind:?} {l} {lp}: {circ}");
                }
            }
        }
    }

    #[test]
    fn whitney_reproduces_constant_fields() {
        // constants lie in the lowest-order space; circulation coefficients
        // must reconstruct them
        for kind in [ElementKind::Triangle, ElementKind::Square] {
            let el = RefElement::new(kind);
            let g = interval_rule(6);
            let u = [0.7, -0.4];
            let mut coeff = Vec::new();
            for l in 0..el.num_edges() {
                let edge = el.edges[l];
                coeff.push(g.integrate(|_t| vec2::dot(u, edge.tangent)));
            }
            for &x in sample_points(&el, 8).iter() {
                let mut v = [0.0, 0.0];
                for (l, &c) in coeff.iter().enumerate() {
                    let w = whitney_value(&el, l, x);
                    v[0] += c * w[0];
                    v[1] += c * w[1];
                }
                assert!(vec2::norm(vec2::sub(v, u)) < 1e-12);
            }
        }
    }

    #[test]
    fn whitney_curl_matches_finite_difference() {
        for kind in [ElementKind::Triangle, ElementKind::Square] {
            let el = RefElement::new(kind);
            let h = 1e-6;
            let x = el.centroid();
            for l in 0..el.num_edges() {
                let c = whitney_curl(&el, l);
                let fd = (whitney_value(&el, l, [x[0] + h, x[1]])[1] - whitney_value(&el, l, [x[0] - h, x[1]])[1]) / (2.0 * h)
                    - (whitney_value(&el, l, [x[0], x[1] + h])[0] - whitney_value(&el, l, [x[0], x[1] - h])[0]) / (2.0 * h);
                assert_relative_eq!(c, fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn rotation_carries_ned_to_div_families() {
        // rot applied to every Ned2 basis field lands in the BDM span
        let ned = VectorSpace::new(ElementKind::Triangle, 2, VectorFamily::NedelecSecond).unwrap();
        let bdm = VectorSpace::new(ElementKind::Triangle, 2, VectorFamily::BrezziDouglasMarini).unwrap();
        let r = rotation_matrix(&ned, &bdm).unwrap();
        assert_eq!(r.nrows(), bdm.dim());
        let n1 = VectorSpace::new(ElementKind::Triangle, 2, VectorFamily::NedelecFirst).unwrap();
        let rt = VectorSpace::new(ElementKind::Triangle, 2, VectorFamily::RaviartThomas).unwrap();
        rotation_matrix(&n1, &rt).unwrap();
    }

    #[test]
    fn rt_contains_x_times_scalars() {
        // x·q for q ∈ P_{p-1} must be representable in RT_p
        let rt = VectorSpace::new(ElementKind::Triangle, 2, VectorFamily::RaviartThomas).unwrap();
        let c = project_vector(&rt, &rt.gram_rule, |x| [x[0] * (x[0] + 0.5 * x[1]), x[1] * (x[0] + 0.5 * x[1])]);
        for &x in sample_points(&rt.element, 10).iter() {
            let got = rt.eval_coeffs_at(&c, x).value;
            let q = x[0] + 0.5 * x[1];
            assert!(vec2::norm(vec2::sub(got, [x[0] * q, x[1] * q])) < 1e-10);
        }
    }

    #[test]
    fn grad_of_constant_is_zero_column() {
        let s = ScalarSpace::new(ElementKind::Triangle, 2);
        let v = VectorSpace::new(ElementKind::Triangle, 1, VectorFamily::NedelecSecond).unwrap();
        // degree-one scalar space contains constants: project 1 and check
        let srcp1 = ScalarSpace::new(ElementKind::Triangle, 2);
        let ones = project_scalar(&srcp1, &srcp1.gram_rule, |_| 1.0);
        let g = gradient_matrix(&s, &v).unwrap();
        let img = &g * &ones;
        assert!(img.norm() < 1e-11);
    }

    #[test]
    fn curl_of_gradient_is_zero() {
        let sp = ScalarSpace::new(ElementKind::Triangle, 4);
        let vs = VectorSpace::new(ElementKind::Triangle, 3, VectorFamily::NedelecSecond).unwrap();
        let img = ScalarSpace::new(ElementKind::Triangle, 2);
        let g = gradient_matrix(&sp, &vs).unwrap();
        let c = curl_matrix(&vs, &img).unwrap();
        assert!((c * g).norm() < 1e-9);
    }

    #[test]
    fn div_after_rot_equals_curl() {
        let ned = VectorSpace::new(ElementKind::Triangle, 2, VectorFamily::NedelecSecond).unwrap();
        let bdm = VectorSpace::new(ElementKind::Triangle, 2, VectorFamily::BrezziDouglasMarini).unwrap();
        let img = ScalarSpace::new(ElementKind::Triangle, 1);
        let r = rotation_matrix(&ned, &bdm).unwrap();
        let d = divergence_matrix(&bdm, &img).unwrap();
        let c = curl_matrix(&ned, &img).unwrap();
        let diff = (&d * &r - &c).norm() / c.norm();
        assert!(diff < 1e-9, "div∘rot vs curl: {diff}");
    }

    #[test]
    fn exact_sequence_rank_on_bubbles() {
        // kernel of curl restricted to Ned2 bubbles = gradients of scalar
        // bubbles of degree p+1 (rank check)
        let p = 4;
        let vs = VectorSpace::new(ElementKind::Triangle, p, VectorFamily::NedelecSecond).unwrap();
        let img = ScalarSpace::new(ElementKind::Triangle, p - 1);
        let c = curl_matrix(&vs, &img).unwrap();
        let cb = c * &vs.bubbles;
        let svd = cb.svd(false, false);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax).count();
        let n_bub = vs.bubbles.ncols();
        let grad_bubbles = ScalarSpace::new(ElementKind::Triangle, p + 1).bubble_indices().len();
        assert_eq!(n_bub - rank, grad_bubbles);
    }

    #[test]
    fn incompatible_spaces_are_rejected() {
        let sp = ScalarSpace::new(ElementKind::Triangle, 4);
        let vs = VectorSpace::new(ElementKind::Triangle, 2, VectorFamily::NedelecSecond).unwrap();
        assert!(gradient_matrix(&sp, &vs).is_err());
    }

    #[test]
    fn mass_condition_growth_is_logged() {
        for p in [5, 10, 15, 20] {
            let s = ScalarSpace::new(ElementKind::Triangle, p);
            let c = s.mass_condition();
            assert!(c.is_finite() && c > 0.0);
            println!("triangle mass condition p={p}: {c:.3e}");
        }
    }
}
