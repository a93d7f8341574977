//! Numerical integration on the interval, triangle and square.
//!
//! Plain rules are Gauss (tensorized through collapsed coordinates on
//! the triangle). For integrands that are singular at a vertex or along
//! an edge there are composite rules on geometrically graded subdomains.

use crate::geometry::{ElementKind, RefElement};
use crate::poly1d::gauss_legendre;

/// Where a composite rule is graded towards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grading {
    Vertex { vertex: usize, levels: usize, ratio: f64 },
    Edge { edge: usize, levels: usize, ratio: f64 },
}

/// Quadrature rule on a 2D reference element.
#[derive(Clone, Debug)]
pub struct QuadRule2d {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Polynomial exactness degree (for graded rules: of the local rules).
    pub exactness: usize,
    pub grading: Option<Grading>,
}

impl QuadRule2d {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn integrate(&self, mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Quadrature rule on (-1, 1) or a composite refinement of it.
#[derive(Clone, Debug)]
pub struct QuadRule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadRule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss rule with n nodes on (-1, 1); exact for degree 2n - 1.
pub fn interval_rule(n: usize) -> QuadRule1d {
    assert!(n >= 1, "interval rule needs at least one node");
    let (nodes, weights) = gauss_legendre(n);
    QuadRule1d { nodes, weights, exactness: 2 * n - 1 }
}

/// Gauss rule on (-1, 1) exact at least for the given degree.
pub fn interval_rule_for_degree(degree: usize) -> QuadRule1d {
    interval_rule(degree / 2 + 1)
}

/// Which endpoint(s) a graded interval rule accumulates towards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradedEnd {
    Lower,
    Upper,
    Both,
}

/// Composite Gauss rule on (-1, 1) with geometrically graded
/// subintervals towards one or both endpoints.
pub fn interval_graded_rule(end: GradedEnd, levels: usize, ratio: f64, local_nodes: usize) -> QuadRule1d {
    assert!(levels >= 1 && ratio > 0.0 && ratio < 1.0);
    let base = interval_rule(local_nodes);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut push_graded = |lo: f64, hi: f64, towards_lo: bool| {
        // breakpoints at distance len·ratio^j from the graded endpoint
        let len = hi - lo;
        let mut cuts = Vec::with_capacity(levels + 2);
        cuts.push(0.0);
        for j in (0..=levels).rev() {
            cuts.push(len * ratio.powi(j as i32));
        }
        for w in cuts.windows(2) {
            let (a, b) = if towards_lo { (lo + w[0], lo + w[1]) } else { (hi - w[1], hi - w[0]) };
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            if half <= 0.0 {
                // subinterval width underflowed next to the endpoint
                continue;
            }
            for (x, wt) in base.nodes.iter().zip(&base.weights) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
    };
    match end {
        GradedEnd::Lower => push_graded(-1.0, 1.0, true),
        GradedEnd::Upper => push_graded(-1.0, 1.0, false),
        GradedEnd::Both => {
            push_graded(-1.0, 0.0, true);
            push_graded(0.0, 1.0, false);
        }
    }
    QuadRule1d { nodes, weights, exactness: 2 * local_nodes - 1 }
}

/// Rule on the reference element, exact for polynomials of (total or
/// per-variable, matching the element's polynomial family) degree
/// `degree`.
pub fn element_rule(element: &RefElement, degree: usize) -> QuadRule2d {
    match element.kind {
        ElementKind::Square => {
            let g = interval_rule_for_degree(degree);
            let mut points = Vec::with_capacity(g.len() * g.len());
            let mut weights = Vec::with_capacity(g.len() * g.len());
            for (x, wx) in g.nodes.iter().zip(&g.weights) {
                for (y, wy) in g.nodes.iter().zip(&g.weights) {
                    points.push([*x, *y]);
                    weights.push(wx * wy);
                }
            }
            QuadRule2d { points, weights, exactness: degree, grading: None }
        }
        ElementKind::Triangle => {
            let v = &element.vertices;
            triangle_rule(v[0], v[1], v[2], degree)
        }
    }
}

/// Collapsed-coordinate Gauss rule on the triangle (v0, v1, v2).
///
/// Points come from the Duffy map of a tensor Gauss rule; the extra
/// Jacobian factor raises the needed degree in the collapsed direction
/// by one.
pub fn triangle_rule(v0: [f64; 2], v1: [f64; 2], v2: [f64; 2], degree: usize) -> QuadRule2d {
    let ga = interval_rule_for_degree(degree);
    let gb = interval_rule_for_degree(degree + 1);
    let jac = {
        let d1 = [v1[0] - v0[0], v1[1] - v0[1]];
        let d2 = [v2[0] - v0[0], v2[1] - v0[1]];
        (d1[0] * d2[1] - d1[1] * d2[0]).abs()
    };
    let mut points = Vec::with_capacity(ga.len() * gb.len());
    let mut weights = Vec::with_capacity(ga.len() * gb.len());
    for (b, wb) in gb.nodes.iter().zip(&gb.weights) {
        let eta = 0.5 * (1.0 + b);
        for (a, wa) in ga.nodes.iter().zip(&ga.weights) {
            let xi = 0.25 * (1.0 + a) * (1.0 - b);
            points.push([
                v0[0] + xi * (v1[0] - v0[0]) + eta * (v2[0] - v0[0]),
                v0[1] + xi * (v1[1] - v0[1]) + eta * (v2[1] - v0[1]),
            ]);
            weights.push(wa * wb * (1.0 - b) / 8.0 * jac);
        }
    }
    QuadRule2d { points, weights, exactness: degree, grading: None }
}

fn rectangle_rule(x0: f64, x1: f64, y0: f64, y1: f64, degree: usize) -> QuadRule2d {
    let g = interval_rule_for_degree(degree);
    let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
    let (mx, my) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (x, wx) in g.nodes.iter().zip(&g.weights) {
        for (y, wy) in g.nodes.iter().zip(&g.weights) {
            points.push([mx + hx * x, my + hy * y]);
            weights.push(wx * wy * hx * hy);
        }
    }
    QuadRule2d { points, weights, exactness: degree, grading: None }
}

/// Composite rule graded geometrically towards `vertex`, for integrands
/// with a point singularity there (e.g. powers of the distance ρ).
///
/// The element is split into shrinking similar copies K_j = v + ratio^j (K - v);
/// the annuli between consecutive copies carry local Gauss rules.
pub fn vertex_graded_rule(
    element: &RefElement,
    vertex: usize,
    levels: usize,
    ratio: f64,
    local_degree: usize,
) -> QuadRule2d {
    assert!(vertex < element.vertices.len(), "vertex index out of range");
    assert!(levels >= 1 && ratio > 0.0 && ratio < 1.0);
    let v = element.vertices[vertex];
    let shrink = |p: [f64; 2], s: f64| [v[0] + s * (p[0] - v[0]), v[1] + s * (p[1] - v[1])];
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut add = |r: QuadRule2d| {
        points.extend(r.points);
        weights.extend(r.weights);
    };
    match element.kind {
        ElementKind::Triangle => {
            // vertices of the full triangle, with `v` first
            let others: Vec<[f64; 2]> =
                (0..3).filter(|&i| i != vertex).map(|i| element.vertices[i]).collect();
            let (a, b) = (others[0], others[1]);
            for j in 0..levels {
                let (s0, s1) = (ratio.powi(j as i32), ratio.powi(j as i32 + 1));
                let (a0, b0) = (shrink(a, s0), shrink(b, s0));
                let (a1, b1) = (shrink(a, s1), shrink(b, s1));
                // annulus (a1, a0, b0, b1) split along a diagonal
                add(triangle_rule(a1, a0, b0, local_degree));
                add(triangle_rule(a1, b0, b1, local_degree));
            }
            let s = ratio.powi(levels as i32);
            add(triangle_rule(v, shrink(a, s), shrink(b, s), local_degree));
        }
        ElementKind::Square => {
            // L-shaped annuli assembled from two rectangles
            let opposite = shrink([element.vertices[(vertex + 2) % 4][0], element.vertices[(vertex + 2) % 4][1]], 1.0);
            let dir = [opposite[0] - v[0], opposite[1] - v[1]]; // (±2, ±2)
            let corner = |s: f64| [v[0] + s * dir[0], v[1] + s * dir[1]];
            let rect = |p: [f64; 2], q: [f64; 2], deg: usize| {
                rectangle_rule(p[0].min(q[0]), p[0].max(q[0]), p[1].min(q[1]), p[1].max(q[1]), deg)
            };
            for j in 0..levels {
                let (s0, s1) = (ratio.powi(j as i32), ratio.powi(j as i32 + 1));
                let (c0, c1) = (corner(s0), corner(s1));
                // column beyond the inner square, full height of the outer one
                add(rect([c1[0], v[1]], [c0[0], c0[1]], local_degree));
                // row on top of the inner square
                add(rect([v[0], c1[1]], [c1[0], c0[1]], local_degree));
            }
            let c = corner(ratio.powi(levels as i32));
            add(rect(v, c, local_degree));
        }
    }
    QuadRule2d {
        points,
        weights,
        exactness: local_degree,
        grading: Some(Grading::Vertex { vertex, levels, ratio }),
    }
}

/// Composite rule graded towards an edge, for integrands whose
/// derivatives blow up along that whole edge (e.g. powers of the
/// distance to it).
pub fn edge_graded_rule(
    element: &RefElement,
    edge: usize,
    levels: usize,
    ratio: f64,
    local_degree: usize,
) -> QuadRule2d {
    assert!(edge < element.num_edges());
    assert!(levels >= 1 && ratio > 0.0 && ratio < 1.0);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut add = |r: QuadRule2d| {
        points.extend(r.points);
        weights.extend(r.weights);
    };
    match element.kind {
        ElementKind::Triangle => {
            // strips parallel to `edge`, accumulating towards it; the
            // strip at relative height h..1 is the similar triangle
            // scaled about the opposite vertex.
            let apex = element.vertices[(edge + 2) % 3];
            let a = element.vertices[element.edges[edge].start];
            let b = element.vertices[element.edges[edge].end];
            let towards = |p: [f64; 2], s: f64| [apex[0] + s * (p[0] - apex[0]), apex[1] + s * (p[1] - apex[1])];
            for j in 0..levels {
                // trapezoid between scales s0 (nearer the edge) and s1
                let (s0, s1) = (1.0 - ratio.powi(j as i32 + 1), 1.0 - ratio.powi(j as i32));
                let (a0, b0) = (towards(a, s0), towards(b, s0));
                let (a1, b1) = (towards(a, s1), towards(b, s1));
                if j == 0 {
                    add(triangle_rule(apex, a0, b0, local_degree));
                } else {
                    add(triangle_rule(a1, a0, b0, local_degree));
                    add(triangle_rule(a1, b0, b1, local_degree));
                }
            }
            let s = 1.0 - ratio.powi(levels as i32);
            add(triangle_rule(towards(a, s), a, b, local_degree));
            add(triangle_rule(towards(a, s), b, towards(b, s), local_degree));
        }
        ElementKind::Square => {
            let n = element.edges[edge].normal;
            // distance from the edge in the inward normal direction, 0..2
            let strip = |d0: f64, d1: f64, deg: usize| {
                // corners of the strip: edge endpoints moved inwards
                let a = element.vertices[element.edges[edge].start];
                let b = element.vertices[element.edges[edge].end];
                let shift = |p: [f64; 2], d: f64| [p[0] - d * n[0], p[1] - d * n[1]];
                let (p0, p1) = (shift(a, d0), shift(b, d1.min(2.0)));
                rectangle_rule(p0[0].min(p1[0]), p0[0].max(p1[0]), p0[1].min(p1[1]), p0[1].max(p1[1]), deg)
            };
            for j in 0..levels {
                let (d0, d1) = (2.0 * ratio.powi(j as i32 + 1), 2.0 * ratio.powi(j as i32));
                add(strip(d0, d1, local_degree));
            }
            add(strip(0.0, 2.0 * ratio.powi(levels as i32), local_degree));
        }
    }
    QuadRule2d {
        points,
        weights,
        exactness: local_degree,
        grading: Some(Grading::Edge { edge, levels, ratio }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn one_point_gauss_is_the_midpoint_rule() {
        let r = interval_rule(1);
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn interval_rule_integrates_squares() {
        let r = interval_rule(2);
        assert_relative_eq!(r.integrate(|x| x * x), 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(r.integrate(|_| 1.0), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn element_rules_have_the_element_measure() {
        for el in [RefElement::triangle(), RefElement::square()] {
            for deg in [0, 3, 8, 20] {
                let r = element_rule(&el, deg);
                assert_relative_eq!(r.weights.iter().sum::<f64>(), el.area, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn square_rule_integrates_x2y2() {
        let r = element_rule(&RefElement::square(), 4);
        assert_relative_eq!(r.integrate(|p| p[0] * p[0] * p[1] * p[1]), 4.0 / 9.0, epsilon = 1e-13);
    }

    #[test]
    fn triangle_rule_is_exact_for_monomials() {
        // oracle: the same integrals with a much finer rule
        let el = RefElement::triangle();
        for deg in 1..=10 {
            let r = element_rule(&el, deg);
            let fine = element_rule(&el, deg + 12);
            for i in 0..=deg {
                for j in 0..=(deg - i) {
                    let f = |p: [f64; 2]| p[0].powi(i as i32) * p[1].powi(j as i32);
                    let a = r.integrate(f);
                    let b = fine.integrate(f);
                    assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "deg {deg} monomial {i},{j}");
                }
            }
        }
    }

    #[test]
    fn graded_rules_keep_the_measure_and_polynomial_exactness() {
        for el in [RefElement::triangle(), RefElement::square()] {
            let g = vertex_graded_rule(&el, 0, 6, 0.2, 8);
            assert_relative_eq!(g.weights.iter().sum::<f64>(), el.area, epsilon = 1e-12);
            let plain = element_rule(&el, 8);
            let f = |p: [f64; 2]| 0.3 + p[0] * p[1] + p[1] * p[1] * p[0];
            assert_relative_eq!(g.integrate(f), plain.integrate(f), epsilon = 1e-12);

            let ge = edge_graded_rule(&el, 0, 6, 0.2, 8);
            assert_relative_eq!(ge.weights.iter().sum::<f64>(), el.area, epsilon = 1e-12);
            assert_relative_eq!(ge.integrate(f), plain.integrate(f), epsilon = 1e-12);
        }
    }

    #[test]
    fn vertex_graded_rule_converges_for_distance_powers() {
        // self-consistency: doubled levels must agree to 1e-9 for ρ^0.6 and ρ^1.0
        let el = RefElement::triangle();
        let v = el.vertices[0];
        for alpha in [0.6, 1.0] {
            let f = |p: [f64; 2]| ((p[0] - v[0]).powi(2) + (p[1] - v[1]).powi(2)).sqrt().powf(alpha);
            let a = vertex_graded_rule(&el, 0, 12, 0.15, 12).integrate(f);
            let b = vertex_graded_rule(&el, 0, 24, 0.15, 12).integrate(f);
            assert!((a - b).abs() <= 1e-9 * b.abs(), "alpha={alpha}: {a} vs {b}");
        }
    }

    #[test]
    fn edge_graded_rule_converges_for_edge_distance_powers() {
        let el = RefElement::triangle();
        let f = |p: [f64; 2]| p[1].max(0.0).powf(1.5);
        let a = edge_graded_rule(&el, 0, 12, 0.15, 12).integrate(f);
        let b = edge_graded_rule(&el, 0, 24, 0.15, 12).integrate(f);
        assert!((a - b).abs() <= 1e-11 * b.abs());
    }

    #[test]
    fn graded_interval_rule_handles_endpoint_singularities() {
        // ∫_{-1}^{1} (1+x)^{-0.4} dx = 2^{0.6}/0.6; the integrand is not
        // exactly evaluable closer to -1 than f64 resolution allows, so
        // the achievable accuracy is ~1e-9 here.
        let exact = 2f64.powf(0.6) / 0.6;
        let r = interval_graded_rule(GradedEnd::Lower, 14, 0.15, 12);
        assert_relative_eq!(r.integrate(|x| (1.0 + x).powf(-0.4)), exact, max_relative = 1e-8);
        let rb = interval_graded_rule(GradedEnd::Both, 14, 0.15, 12);
        assert_relative_eq!(rb.integrate(|x| (1.0 + x).powf(-0.4)), exact, max_relative = 1e-8);
        assert_relative_eq!(rb.integrate(|_| 1.0), 2.0, epsilon = 1e-13);
        // mildly singular integrands reach full accuracy
        let r2 = interval_graded_rule(GradedEnd::Lower, 25, 0.15, 12);
        assert_relative_eq!(
            r2.integrate(|x| (1.0 + x).powf(1.5)),
            2f64.powf(2.5) / 2.5,
            max_relative = 1e-11
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn prop_rules_integrate_random_polynomials(
            deg in 0usize..7,
            cx in -2.0f64..2.0,
            cy in -2.0f64..2.0,
            c0 in -2.0f64..2.0,
        ) {
            // random polynomial of total degree `deg` built from a few monomials
            let f = move |p: [f64; 2]| {
                c0 + cx * p[0].powi(deg as i32) + cy * p[1].powi(deg as i32)
                    + cx * cy * p[0].powi((deg / 2) as i32) * p[1].powi((deg - deg / 2) as i32)
            };
            for el in [RefElement::triangle(), RefElement::square()] {
                let r = element_rule(&el, deg);
                let fine = element_rule(&el, deg + 10);
                let (a, b) = (r.integrate(f), fine.integrate(f));
                prop_assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0));
            }
        }
    }
}
