//! Projection-based interpolation operators.
//!
//! * [`l2_project`]: plain L² projection onto a scalar space.
//! * [`Workspace::h1_interpolate`]: vertex interpolant + per-edge
//!   projections in the discrete fractional 1/2-norm, lifted by the
//!   discrete harmonic extension + an interior H¹-seminorm projection.
//! * [`Workspace::hcurl_interpolate`]: Whitney part from edge
//!   circulations, a boundary-potential edge stage projected in the
//!   same fractional norm and lifted through the gradient of the
//!   harmonic extension, and an interior constrained least-squares
//!   stage for the curl (a saddle-point solve).
//! * [`Workspace::hdiv_interpolate`]: the rotation of the H(curl)
//!   operator; coefficients are shared exactly between a div-conforming
//!   space and its curl-conforming counterpart.
//!
//! A [`Workspace`] caches everything that depends only on (element,
//! degree, family, quadrature profile); all operator applications are
//! pure and reuse it.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::extension::{discrete_harmonic_extend, BoundaryTrace};
use crate::fields::{CurlField, DivField, RotatedInv, ScalarField, Singularity};
use crate::geometry::{vec2, ElementKind, RefElement};
use crate::norms::{FractionalGram, OracleEdgeSpace};
use crate::poly1d::gauss_legendre;
use crate::quadrature::{
    edge_graded_rule, element_rule, interval_graded_rule, interval_rule_for_degree,
    vertex_graded_rule, GradedEnd, QuadRule1d, QuadRule2d,
};
use crate::spaces::{
    curl_matrix, gradient_matrix, whitney_coefficients, whitney_value, ScalarSpace, VecSample,
    VectorFamily, VectorSpace,
};

/// Quadrature profile for one operator application family.
#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    /// Extra exactness margin over the minimal 2p for volume rules.
    pub degree_margin: usize,
    /// Levels of geometric grading for singular fields.
    pub graded_levels: usize,
    pub graded_ratio: f64,
    /// Override for the oracle degree (default max(4p, 40)).
    pub oracle_degree: Option<usize>,
    /// Where the target fields are singular.
    pub singularity: Singularity,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            degree_margin: 6,
            graded_levels: 12,
            graded_ratio: 0.15,
            oracle_degree: None,
            singularity: Singularity::None,
        }
    }
}

impl QuadConfig {
    pub fn with_singularity(mut self, s: Singularity) -> Self {
        self.singularity = s;
        self
    }
}

/// L² projection onto a scalar space with the given rule.
pub fn l2_project(
    space: &ScalarSpace,
    rule: &QuadRule2d,
    f: impl Fn([f64; 2]) -> f64,
) -> DVector<f64> {
    crate::spaces::project_scalar(space, rule, f)
}

/// The three-part H¹ interpolant.
pub struct H1InterpolantParts {
    /// Vertex (linear/bilinear) interpolant coefficients.
    pub vertex_part: DVector<f64>,
    /// Lifted edge projections (harmonic extension of the edge stage).
    pub edge_part: DVector<f64>,
    /// Interior H¹-seminorm projection.
    pub interior_part: DVector<f64>,
    /// Sum of the three parts.
    pub total: DVector<f64>,
    /// Per-edge projections in bubble coefficients (b_2..b_p).
    pub edge_projections: Vec<DVector<f64>>,
    /// Per-edge oracle representations of the targets (diagnostics).
    pub edge_targets: Vec<DVector<f64>>,
}

/// The three-part H(curl)/H(div) interpolant.
pub struct CurlInterpolantParts {
    /// Edge circulations of the input.
    pub circulations: Vec<f64>,
    /// Whitney (lowest-order) part.
    pub whitney_part: DVector<f64>,
    /// Per-edge boundary-potential projections (bubble coefficients in
    /// the potential degree).
    pub edge_potentials: Vec<DVector<f64>>,
    /// Harmonic extension of the summed potential (scalar coefficients
    /// in the potential space).
    pub potential: DVector<f64>,
    /// Gradient of the extension, in vector coefficients.
    pub gradient_part: DVector<f64>,
    /// Interior bubble part from the constrained minimization.
    pub interior_part: DVector<f64>,
    /// Lagrange multipliers of the interior constraints (diagnostics).
    pub multipliers: DVector<f64>,
    /// Sum of the three parts.
    pub total: DVector<f64>,
}

/// Per-edge boundary-potential data: the fractional projections onto
/// the endpoint-vanishing polynomials of the potential degree, and the
/// full oracle-space targets they were projected from.
pub struct BoundaryPotential {
    pub projections: Vec<DVector<f64>>,
    pub targets: Vec<DVector<f64>>,
}

struct CurlMachinery {
    vector: VectorSpace,
    scalar_pot: ScalarSpace,
    pot_degree: usize,
    grad_pot: DMatrix<f64>,
    curl_img: DMatrix<f64>,
    whitney: Vec<DVector<f64>>,
    /// Saddle-point factorization for the interior stage.
    saddle: LU<f64, Dyn, Dyn>,
    n_bubbles: usize,
    n_constraints: usize,
}

/// Shared immutable state for all interpolations at one
/// (element, degree, family, quadrature profile).
pub struct Workspace {
    pub element: RefElement,
    pub degree: usize,
    pub family: VectorFamily,
    pub config: QuadConfig,
    pub scalar: ScalarSpace,
    /// Image space of curl/div: degree p-1.
    pub scalar_img: ScalarSpace,
    pub oracle: OracleEdgeSpace,
    pub frac_half: FractionalGram,
    pub volume_rule: QuadRule2d,
    /// One 1D rule per edge for traces, circulations and potentials.
    pub edge_rules: Vec<QuadRule1d>,
    curl: Option<CurlMachinery>,
}

impl Workspace {
    pub fn new(
        element_kind: ElementKind,
        p: usize,
        family: VectorFamily,
        config: QuadConfig,
    ) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidDegree(p, "p >= 1"));
        }
        let element = RefElement::new(element_kind);
        let scalar = ScalarSpace::new(element_kind, p);
        let scalar_img = ScalarSpace::new(element_kind, p - 1);
        let oracle_degree = config.oracle_degree.unwrap_or((4 * p).max(40));
        let oracle = OracleEdgeSpace::new(oracle_degree)?;
        let frac_half = oracle.fractional_gram(0.5)?;

        // the floor keeps low-degree rules accurate enough for smooth
        // non-polynomial data (trig probes at p = 1 would otherwise see
        // ~1e-8 quadrature error against the much finer edge rules)
        let vol_degree = (2 * p + config.degree_margin).max(16);
        let volume_rule = match config.singularity {
            Singularity::None => element_rule(&element, vol_degree),
            Singularity::Vertex(v) => {
                vertex_graded_rule(&element, v, config.graded_levels, config.graded_ratio, vol_degree)
            }
            Singularity::Edge(e) => {
                edge_graded_rule(&element, e, config.graded_levels, config.graded_ratio, vol_degree)
            }
        };
        let edge_rules = (0..element.num_edges())
            .map(|_| match config.singularity {
                Singularity::None => interval_rule_for_degree(2 * oracle_degree + 8),
                _ => interval_graded_rule(
                    GradedEnd::Both,
                    config.graded_levels.max(18),
                    config.graded_ratio,
                    oracle_degree + 4,
                ),
            })
            .collect();

        let curl_side = family.curl_side();
        let curl = Self::build_curl_machinery(element_kind, p, curl_side, &scalar_img)?;

        Ok(Workspace {
            element,
            degree: p,
            family,
            config,
            scalar,
            scalar_img,
            oracle,
            frac_half,
            volume_rule,
            edge_rules,
            curl,
        })
    }

    fn build_curl_machinery(
        element_kind: ElementKind,
        p: usize,
        curl_side: VectorFamily,
        scalar_img: &ScalarSpace,
    ) -> Result<Option<CurlMachinery>> {
        // The tensor second family on the square has no matching
        // polynomial potential space (∇Q_{p+1} ⊄ (Q_p)²); the edge/face
        // interpolation there uses the first family.
        if element_kind == ElementKind::Square && curl_side == VectorFamily::NedelecSecond {
            return Ok(None);
        }
        let pot_degree = match curl_side {
            VectorFamily::NedelecSecond => p + 1,
            _ => p,
        };
        let vector = VectorSpace::new(element_kind, p, curl_side)?;
        let scalar_pot = ScalarSpace::new(element_kind, pot_degree);
        let grad_pot = gradient_matrix(&scalar_pot, &vector)?;
        let curl_img = curl_matrix(&vector, scalar_img)?;
        let whitney = whitney_coefficients(&vector)?;

        // interior saddle system
        let bubbles = &vector.bubbles;
        let nb = bubbles.ncols();
        let pot_bubble_idx = scalar_pot.bubble_indices();
        let nc = pot_bubble_idx.len();
        let cb = &curl_img * bubbles;
        let q = cb.transpose() * &scalar_img.mass * &cb;
        // constraint rows: (β_m, ∇φ_j) with φ_j the potential bubbles
        let mut grad_bub = DMatrix::zeros(vector.dim(), nc);
        for (col, &j) in pot_bubble_idx.iter().enumerate() {
            grad_bub.set_column(col, &grad_pot.column(j));
        }
        let g = grad_bub.transpose() * &vector.mass * bubbles;
        // the constraint count must match the curl-free bubble dimension
        // (discrete exact sequence), otherwise the saddle system is rank
        // deficient
        if nb > 0 {
            let svd = cb.clone().svd(false, false);
            let smax = svd.singular_values.max();
            let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10 * smax.max(1e-300)).count();
            if nb - rank != nc {
                return Err(Error::SingularSystem("curl-free bubble count does not match constraints"));
            }
        }
        let mut saddle = DMatrix::zeros(nb + nc, nb + nc);
        saddle.view_mut((0, 0), (nb, nb)).copy_from(&q);
        saddle.view_mut((0, nb), (nb, nc)).copy_from(&g.transpose());
        saddle.view_mut((nb, 0), (nc, nb)).copy_from(&g);
        let saddle = saddle.lu();
        Ok(Some(CurlMachinery {
            vector,
            scalar_pot,
            pot_degree,
            grad_pot,
            curl_img,
            whitney,
            saddle,
            n_bubbles: nb,
            n_constraints: nc,
        }))
    }

    fn curl_machinery(&self) -> Result<&CurlMachinery> {
        self.curl.as_ref().ok_or(Error::UnsupportedFamily {
            family: self.family.name(),
            element: self.element.kind.name(),
        })
    }

    /// The curl-conforming vector space the interpolant coefficients
    /// live in (for RT/BDM this is the unrotated counterpart with the
    /// same coefficients).
    pub fn vector_space(&self) -> Result<&VectorSpace> {
        Ok(&self.curl_machinery()?.vector)
    }

    pub fn potential_space(&self) -> Result<&ScalarSpace> {
        Ok(&self.curl_machinery()?.scalar_pot)
    }

    /// Evaluate curl-side coefficients (value, curl, div).
    pub fn eval_curl_side(&self, coeffs: &DVector<f64>, x: [f64; 2]) -> Result<VecSample> {
        Ok(self.curl_machinery()?.vector.eval_coeffs_at(coeffs, x))
    }

    /// Evaluate coefficients as the div-conforming (rotated) field:
    /// value = rot(curl-side value), div = curl-side curl.
    pub fn eval_div_side(&self, coeffs: &DVector<f64>, x: [f64; 2]) -> Result<([f64; 2], f64)> {
        let s = self.eval_curl_side(coeffs, x)?;
        Ok((vec2::rot(s.value), s.curl))
    }

    // -- H¹ interpolation ---------------------------------------------------

    pub fn h1_interpolate(&self, g: &dyn ScalarField) -> Result<H1InterpolantParts> {
        let element = &self.element;
        let space = &self.scalar;
        let p = self.degree;
        let n = space.dim();

        let mut vertex_part = DVector::zeros(n);
        let mut vertex_values = Vec::with_capacity(element.vertices.len());
        for (i, &v) in element.vertices.iter().enumerate() {
            let gv = g.eval(v);
            if !gv.is_finite() {
                return Err(Error::NonFinite("vertex value"));
            }
            vertex_values.push(gv);
            vertex_part[space.vertex_indices[i]] = gv;
        }

        // per-edge fractional projections of (g - g1)|_edge
        let mut edge_projections = Vec::new();
        let mut edge_targets = Vec::new();
        let mut bubble_lists = Vec::new();
        for e in 0..element.num_edges() {
            let (a, b) = (element.edges[e].start, element.edges[e].end);
            let (va, vb) = (vertex_values[a], vertex_values[b]);
            let target = self.oracle.project_l2(&self.edge_rules[e], |t| {
                g.eval(element.edge_point(e, t)) - 0.5 * ((1.0 - t) * va + (1.0 + t) * vb)
            });
            let proj = self.oracle.project_subspace(&self.frac_half, &target, p)?;
            bubble_lists.push(proj.iter().copied().collect::<Vec<f64>>());
            edge_projections.push(proj);
            edge_targets.push(target);
        }

        let trace = BoundaryTrace::from_vertex_and_bubbles(
            &vec![0.0; element.num_edges()],
            &bubble_lists,
        );
        let edge_part = discrete_harmonic_extend(space, &trace)?;

        // interior H¹-seminorm projection of the residual
        let boundary = &vertex_part + &edge_part;
        let mut r = DVector::zeros(n);
        for (q, &x) in self.volume_rule.points.iter().enumerate() {
            let w = self.volume_rule.weights[q];
            let ctx = space.stage(x);
            let mut gb = [0.0, 0.0];
            for i in 0..n {
                let c = boundary[i];
                if c != 0.0 {
                    let (_, gr) = space.eval_item(&ctx, i);
                    gb[0] += c * gr[0];
                    gb[1] += c * gr[1];
                }
            }
            let gg = g.grad(x);
            let res = [w * (gg[0] - gb[0]), w * (gg[1] - gb[1])];
            for i in 0..n {
                let (_, gr) = space.eval_item(&ctx, i);
                r[i] += res[0] * gr[0] + res[1] * gr[1];
            }
        }
        let bubbles = space.bubble_indices();
        let mut interior_part = DVector::zeros(n);
        if !bubbles.is_empty() {
            let nb = bubbles.len();
            let mut kbb = DMatrix::zeros(nb, nb);
            let mut rhs = DVector::zeros(nb);
            for (ai, &i) in bubbles.iter().enumerate() {
                rhs[ai] = r[i];
                for (bi, &j) in bubbles.iter().enumerate() {
                    kbb[(ai, bi)] = space.stiffness[(i, j)];
                }
            }
            let chol = Cholesky::new(kbb).ok_or(Error::SingularSystem("interior stiffness"))?;
            let c = chol.solve(&rhs);
            for (ai, &i) in bubbles.iter().enumerate() {
                interior_part[i] = c[ai];
            }
        }

        let total = &boundary + &interior_part;
        Ok(H1InterpolantParts {
            vertex_part,
            edge_part,
            interior_part,
            total,
            edge_projections,
            edge_targets,
        })
    }

    // -- boundary potential --------------------------------------------------

    /// Edge circulations ∫ u·σ of a field.
    pub fn circulations(&self, u: &dyn CurlField) -> Vec<f64> {
        (0..self.element.num_edges())
            .map(|e| {
                let tangent = self.element.edges[e].tangent;
                self.edge_rules[e]
                    .integrate(|t| vec2::dot(u.eval(self.element.edge_point(e, t)), tangent))
            })
            .collect()
    }

    /// The boundary potential stage: per edge, the arclength
    /// antiderivative of the tangential trace of (u - u₁), represented
    /// in the oracle space, together with its fractional projection
    /// onto the endpoint-vanishing polynomials of the potential degree.
    ///
    pub fn boundary_potential(
        &self,
        u: &dyn CurlField,
        circulations: &[f64],
    ) -> Result<BoundaryPotential> {
        let mach = self.curl_machinery()?;
        let element = &self.element;
        let mut projections = Vec::new();
        let mut targets = Vec::new();
        for e in 0..element.num_edges() {
            let edge = element.edges[e];
            let h = |t: f64| {
                let x = element.edge_point(e, t);
                let mut v = u.eval(x);
                for (m, &c) in circulations.iter().enumerate() {
                    let wv = whitney_value(element, m, x);
                    v[0] -= c * wv[0];
                    v[1] -= c * wv[1];
                }
                vec2::dot(v, edge.tangent)
            };
            let rule = &self.edge_rules[e];
            let psi = antiderivative_at_nodes(&h, rule);
            // closing the loop over the edge must give zero (Whitney duality)
            let scale = psi.values.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
            if psi.total.abs() > 1e-9 * scale.max(circulations.iter().fold(1.0f64, |a, &b| a.max(b.abs()))) {
                return Err(Error::NonZeroCirculation { edge: e, value: psi.total });
            }
            let target = self.oracle.project_l2_values(rule, &psi.values);
            let proj = self.oracle.project_subspace(&self.frac_half, &target, mach.pot_degree)?;
            projections.push(proj);
            targets.push(target);
        }
        Ok(BoundaryPotential { projections, targets })
    }

    // -- H(curl) interpolation ----------------------------------------------

    pub fn hcurl_interpolate(&self, u: &dyn CurlField) -> Result<CurlInterpolantParts> {
        let mach = self.curl_machinery()?;
        let element = &self.element;
        let nv = mach.vector.dim();

        // Whitney part from edge circulations
        let circulations = self.circulations(u);
        let mut whitney_part = DVector::zeros(nv);
        for (m, &c) in circulations.iter().enumerate() {
            whitney_part += c * &mach.whitney[m];
        }

        // boundary potential stage
        let edge_potentials = self.boundary_potential(u, &circulations)?.projections;
        let bubble_lists: Vec<Vec<f64>> =
            edge_potentials.iter().map(|p| p.iter().copied().collect()).collect();
        let trace =
            BoundaryTrace::from_vertex_and_bubbles(&vec![0.0; element.num_edges()], &bubble_lists);
        let potential = discrete_harmonic_extend(&mach.scalar_pot, &trace)?;
        let gradient_part = &mach.grad_pot * &potential;

        // interior constrained minimization
        let boundary = &whitney_part + &gradient_part;
        let nb = mach.n_bubbles;
        let nc = mach.n_constraints;
        let mut interior_part = DVector::zeros(nv);
        let mut multipliers = DVector::zeros(nc);
        if nb > 0 {
            // accumulate r_i = (curl_w, curl v_i), s_i = (w, v_i)
            let mut r = DVector::zeros(nv);
            let mut s = DVector::zeros(nv);
            for (q, &x) in self.volume_rule.points.iter().enumerate() {
                let w = self.volume_rule.weights[q];
                let ctx = mach.vector.stage(x);
                let mut bval = [0.0, 0.0];
                let mut bcurl = 0.0;
                for i in 0..nv {
                    let c = boundary[i];
                    if c != 0.0 {
                        let (v, cu, _) = mach.vector.eval_item(&ctx, i);
                        bval[0] += c * v[0];
                        bval[1] += c * v[1];
                        bcurl += c * cu;
                    }
                }
                let uv = u.eval(x);
                let resid = [w * (uv[0] - bval[0]), w * (uv[1] - bval[1])];
                let resid_curl = w * (u.curl(x) - bcurl);
                for i in 0..nv {
                    let (v, cu, _) = mach.vector.eval_item(&ctx, i);
                    r[i] += resid_curl * cu;
                    s[i] += resid[0] * v[0] + resid[1] * v[1];
                }
            }
            let b1 = mach.vector.bubbles.transpose() * r;
            let pot_bubbles = mach.scalar_pot.bubble_indices();
            let mut b2 = DVector::zeros(nc);
            for (col, &j) in pot_bubbles.iter().enumerate() {
                b2[col] = mach.grad_pot.column(j).dot(&s);
            }
            let mut rhs = DVector::zeros(nb + nc);
            rhs.rows_mut(0, nb).copy_from(&b1);
            rhs.rows_mut(nb, nc).copy_from(&b2);
            let sol = mach
                .saddle
                .solve(&rhs)
                .ok_or(Error::SingularSystem("interior saddle system"))?;
            interior_part = &mach.vector.bubbles * sol.rows(0, nb);
            multipliers = sol.rows(nb, nc).into_owned();
        }

        let total = &boundary + &interior_part;
        Ok(CurlInterpolantParts {
            circulations,
            whitney_part,
            edge_potentials,
            potential,
            gradient_part,
            interior_part,
            multipliers,
            total,
        })
    }

    // -- H(div) interpolation -------------------------------------------------

    /// The rotated H(curl) interpolation: coefficients of the result are
    /// exactly those of the curl-side interpolant of the rotated-back
    /// input, interpreted in the div-conforming space.
    pub fn hdiv_interpolate(&self, u: &dyn DivField) -> Result<CurlInterpolantParts> {
        if !self.family.is_div_conforming() {
            return Err(Error::UnsupportedFamily {
                family: self.family.name(),
                element: "hdiv needs an RT/BDM workspace",
            });
        }
        self.hcurl_interpolate(&RotatedInv(u))
    }

    /// L² projection onto the curl/div image space (degree p-1), using
    /// the workspace volume rule.
    pub fn project_img(&self, f: impl Fn([f64; 2]) -> f64) -> DVector<f64> {
        l2_project(&self.scalar_img, &self.volume_rule, f)
    }

    /// Gradient of a potential-space member, in vector coefficients.
    pub fn gradient_of_potential(&self, pot_coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.curl_machinery()?.grad_pot * pot_coeffs)
    }

    /// Apply the image-space curl matrix to curl-side coefficients.
    pub fn curl_coeffs(&self, coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.curl_machinery()?.curl_img * coeffs)
    }
}

struct NodeAntiderivative {
    values: Vec<f64>,
    /// ∫ over the whole edge.
    total: f64,
}

/// Values of t ↦ ∫_{-1}^{t} h(s) ds at the nodes of `rule`, by
/// incremental Gauss integration between consecutive (sorted) nodes.
fn antiderivative_at_nodes(h: &dyn Fn(f64) -> f64, rule: &QuadRule1d) -> NodeAntiderivative {
    let n = rule.nodes.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| rule.nodes[i].partial_cmp(&rule.nodes[j]).unwrap());
    let (gx, gw) = gauss_legendre(16);
    let segment = |a: f64, b: f64| -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        if half <= 0.0 {
            return 0.0;
        }
        gx.iter().zip(&gw).map(|(&x, &w)| half * w * h(mid + half * x)).sum()
    };
    let mut values = vec![0.0; n];
    let mut acc = 0.0;
    let mut prev = -1.0;
    for &idx in &order {
        let t = rule.nodes[idx];
        acc += segment(prev, t);
        values[idx] = acc;
        prev = t;
    }
    let total = acc + segment(prev, 1.0);
    NodeAntiderivative { values, total }
}
