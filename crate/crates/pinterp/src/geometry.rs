//! Reference elements: the equilateral triangle and the square.
//!
//! The triangle has vertices (-1,0), (1,0), (0,√3); the square is
//! (-1,1)². Both have all edges of length 2, so every edge is
//! parameterized by t ∈ [-1,1] with unit speed. Edges are enumerated
//! counterclockwise starting at vertex 0, and the edge tangent follows
//! the traversal direction.

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ElementKind {
    Triangle,
    Square,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Triangle => "triangle",
            ElementKind::Square => "square",
        }
    }
}

impl std::str::FromStr for ElementKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "triangle" | "tri" => Ok(ElementKind::Triangle),
            "square" | "quad" => Ok(ElementKind::Square),
            other => Err(crate::Error::Config(format!("unknown element `{other}`"))),
        }
    }
}

/// One oriented edge of a reference element.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    /// Index of the vertex the edge starts at (t = -1).
    pub start: usize,
    /// Index of the vertex the edge ends at (t = +1).
    pub end: usize,
    /// Unit tangent, pointing from `start` to `end`.
    pub tangent: [f64; 2],
    /// Outward unit normal.
    pub normal: [f64; 2],
    /// Edge length (2 for both reference elements).
    pub length: f64,
}

/// Reference element geometry.
#[derive(Clone, Debug)]
pub struct RefElement {
    pub kind: ElementKind,
    pub vertices: Vec<[f64; 2]>,
    pub edges: Vec<Edge>,
    pub area: f64,
}

impl RefElement {
    pub fn new(kind: ElementKind) -> Self {
        match kind {
            ElementKind::Triangle => Self::triangle(),
            ElementKind::Square => Self::square(),
        }
    }

    pub fn triangle() -> Self {
        let vertices = vec![[-1.0, 0.0], [1.0, 0.0], [0.0, SQRT3]];
        let edges = make_edges(&vertices);
        RefElement { kind: ElementKind::Triangle, vertices, edges, area: SQRT3 }
    }

    pub fn square() -> Self {
        let vertices = vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        let edges = make_edges(&vertices);
        RefElement { kind: ElementKind::Square, vertices, edges, area: 4.0 }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Point on edge `e` at parameter t ∈ [-1, 1].
    pub fn edge_point(&self, e: usize, t: f64) -> [f64; 2] {
        let a = self.vertices[self.edges[e].start];
        let b = self.vertices[self.edges[e].end];
        [0.5 * ((1.0 - t) * a[0] + (1.0 + t) * b[0]), 0.5 * ((1.0 - t) * a[1] + (1.0 + t) * b[1])]
    }

    /// Barycentric coordinates on the triangle, λ_i(vertex j) = δ_ij.
    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        debug_assert_eq!(self.kind, ElementKind::Triangle);
        let l2 = x[1] / SQRT3;
        let l1 = 0.5 * (x[0] + 1.0 - l2);
        [1.0 - l1 - l2, l1, l2]
    }

    /// Gradients of the barycentric coordinates (constant).
    pub fn barycentric_gradients(&self) -> [[f64; 2]; 3] {
        debug_assert_eq!(self.kind, ElementKind::Triangle);
        let g2 = [0.0, 1.0 / SQRT3];
        let g1 = [0.5, -0.5 / SQRT3];
        [[-0.5, -0.5 / SQRT3], g1, g2]
    }

    pub fn centroid(&self) -> [f64; 2] {
        let mut c = [0.0, 0.0];
        for v in &self.vertices {
            c[0] += v[0];
            c[1] += v[1];
        }
        let n = self.vertices.len() as f64;
        [c[0] / n, c[1] / n]
    }

    /// True if `x` lies in the closed element, up to `tol`.
    pub fn contains(&self, x: [f64; 2], tol: f64) -> bool {
        match self.kind {
            ElementKind::Triangle => self.barycentric(x).iter().all(|&l| l >= -tol),
            ElementKind::Square => x[0].abs() <= 1.0 + tol && x[1].abs() <= 1.0 + tol,
        }
    }

    /// Map a point from the unit reference simplex/square into the element.
    ///
    /// For the triangle the domain is {ξ,η ≥ 0, ξ+η ≤ 1}; for the square
    /// it is [0,1]².
    pub fn from_unit(&self, xi: f64, eta: f64) -> [f64; 2] {
        match self.kind {
            ElementKind::Triangle => {
                let (v0, v1, v2) = (self.vertices[0], self.vertices[1], self.vertices[2]);
                [
                    v0[0] + xi * (v1[0] - v0[0]) + eta * (v2[0] - v0[0]),
                    v0[1] + xi * (v1[1] - v0[1]) + eta * (v2[1] - v0[1]),
                ]
            }
            ElementKind::Square => [2.0 * xi - 1.0, 2.0 * eta - 1.0],
        }
    }
}

fn make_edges(vertices: &[[f64; 2]]) -> Vec<Edge> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let (a, b) = (vertices[i], vertices[j]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            let tangent = [d[0] / len, d[1] / len];
            // Outward normal for a counterclockwise boundary.
            let normal = [tangent[1], -tangent[0]];
            Edge { start: i, end: j, tangent, normal, length: len }
        })
        .collect()
}

/// Small 2D vector helpers used throughout the crate.
pub mod vec2 {
    pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
        a[0] * b[0] + a[1] * b[1]
    }
    pub fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        [a[0] - b[0], a[1] - b[1]]
    }
    pub fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        [a[0] + b[0], a[1] + b[1]]
    }
    pub fn scale(s: f64, a: [f64; 2]) -> [f64; 2] {
        [s * a[0], s * a[1]]
    }
    pub fn norm(a: [f64; 2]) -> f64 {
        dot(a, a).sqrt()
    }
    /// 2D cross product a × b = a1 b2 - a2 b1.
    pub fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
        a[0] * b[1] - a[1] * b[0]
    }
    /// Rotation (u1, u2) -> (u2, -u1).
    pub fn rot(a: [f64; 2]) -> [f64; 2] {
        [a[1], -a[0]]
    }
    /// Inverse rotation (u1, u2) -> (-u2, u1).
    pub fn rot_inv(a: [f64; 2]) -> [f64; 2] {
        [-a[1], a[0]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vec2::{cross, dot, norm};

    #[test]
    fn triangle_matches_reference_geometry() {
        let t = RefElement::triangle();
        assert_eq!(t.vertices[0], [-1.0, 0.0]);
        assert_eq!(t.vertices[1], [1.0, 0.0]);
        assert_eq!(t.vertices[2], [0.0, SQRT3]);
        // area = ½·base·height = √3
        assert!((t.area - SQRT3).abs() < 1e-15);
        for e in &t.edges {
            assert!((e.length - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn square_matches_reference_geometry() {
        let q = RefElement::square();
        assert_eq!(q.vertices, vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]);
        assert_eq!(q.area, 4.0);
    }

    #[test]
    fn edges_have_unit_outward_normals() {
        for el in [RefElement::triangle(), RefElement::square()] {
            let c = el.centroid();
            for e in &el.edges {
                assert!((norm(e.tangent) - 1.0).abs() < 1e-14);
                assert!((norm(e.normal) - 1.0).abs() < 1e-14);
                assert!(dot(e.tangent, e.normal).abs() < 1e-14);
                // normal points away from the centroid
                let mid = [
                    0.5 * (el.vertices[e.start][0] + el.vertices[e.end][0]),
                    0.5 * (el.vertices[e.start][1] + el.vertices[e.end][1]),
                ];
                assert!(dot(e.normal, [mid[0] - c[0], mid[1] - c[1]]) > 0.0);
                // counterclockwise traversal: tangent = rotated normal
                assert!(cross(e.normal, e.tangent) > 0.0);
            }
        }
    }

    #[test]
    fn barycentric_is_dual_to_vertices() {
        let t = RefElement::triangle();
        for (i, &v) in t.vertices.iter().enumerate() {
            let l = t.barycentric(v);
            for (j, &lj) in l.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((lj - expect).abs() < 1e-14);
            }
        }
        let g = t.barycentric_gradients();
        // finite-difference check of the constant gradients
        let x = [0.2, 0.4];
        let h = 1e-6;
        for (i, gi) in g.iter().enumerate() {
            let dx = (t.barycentric([x[0] + h, x[1]])[i] - t.barycentric([x[0] - h, x[1]])[i]) / (2.0 * h);
            let dy = (t.barycentric([x[0], x[1] + h])[i] - t.barycentric([x[0], x[1] - h])[i]) / (2.0 * h);
            assert!((dx - gi[0]).abs() < 1e-9);
            assert!((dy - gi[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_points_interpolate_vertices() {
        let el = RefElement::square();
        for (e, edge) in el.edges.iter().enumerate() {
            assert_eq!(el.edge_point(e, -1.0), el.vertices[edge.start]);
            assert_eq!(el.edge_point(e, 1.0), el.vertices[edge.end]);
        }
    }
}
