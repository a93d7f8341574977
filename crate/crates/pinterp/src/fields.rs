//! Field traits and the catalog of test fields with known Sobolev
//! regularity.
//!
//! Interpolation operators consume fields only through point values;
//! the scalar differential (gradient, curl or div) must be supplied
//! analytically — there is no numerical differentiation in any
//! operator path.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{vec2, ElementKind, RefElement};

/// Scalar function with analytic gradient.
pub trait ScalarField: Sync + Send {
    fn eval(&self, x: [f64; 2]) -> f64;
    fn grad(&self, x: [f64; 2]) -> [f64; 2];
}

/// Vector field with analytic scalar curl.
pub trait CurlField: Sync + Send {
    fn eval(&self, x: [f64; 2]) -> [f64; 2];
    fn curl(&self, x: [f64; 2]) -> f64;
}

/// Vector field with analytic divergence.
pub trait DivField: Sync + Send {
    fn eval(&self, x: [f64; 2]) -> [f64; 2];
    fn div(&self, x: [f64; 2]) -> f64;
}

/// Closure-backed scalar field.
pub struct FnScalar<F, G> {
    pub f: F,
    pub g: G,
}

impl<F: Fn([f64; 2]) -> f64 + Sync + Send, G: Fn([f64; 2]) -> [f64; 2] + Sync + Send> ScalarField
    for FnScalar<F, G>
{
    fn eval(&self, x: [f64; 2]) -> f64 {
        (self.f)(x)
    }
    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        (self.g)(x)
    }
}

/// Closure-backed curl field.
pub struct FnCurl<F, G> {
    pub f: F,
    pub c: G,
}

impl<F: Fn([f64; 2]) -> [f64; 2] + Sync + Send, G: Fn([f64; 2]) -> f64 + Sync + Send> CurlField
    for FnCurl<F, G>
{
    fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        (self.f)(x)
    }
    fn curl(&self, x: [f64; 2]) -> f64 {
        (self.c)(x)
    }
}

/// View a curl field as a div field through the rotation
/// rot(u1, u2) = (u2, -u1): div(rot u) = curl u.
pub struct Rotated<F>(pub F);

impl<F: CurlField> DivField for Rotated<F> {
    fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        vec2::rot(self.0.eval(x))
    }
    fn div(&self, x: [f64; 2]) -> f64 {
        self.0.curl(x)
    }
}

/// View a div field as a curl field through the inverse rotation.
pub struct RotatedInv<F>(pub F);

impl<F: DivField> CurlField for RotatedInv<F> {
    fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        vec2::rot_inv(self.0.eval(x))
    }
    fn curl(&self, x: [f64; 2]) -> f64 {
        self.0.div(x)
    }
}

impl<F: CurlField + ?Sized> CurlField for &F {
    fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        (**self).eval(x)
    }
    fn curl(&self, x: [f64; 2]) -> f64 {
        (**self).curl(x)
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn eval(&self, x: [f64; 2]) -> f64 {
        (**self).eval(x)
    }
    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        (**self).grad(x)
    }
}

impl<F: DivField + ?Sized> DivField for &F {
    fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        (**self).eval(x)
    }
    fn div(&self, x: [f64; 2]) -> f64 {
        (**self).div(x)
    }
}

/// Where a field's derivatives blow up, for quadrature selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Singularity {
    None,
    /// Point singularity at a vertex (by index).
    Vertex(usize),
    /// Line singularity along an edge (by index).
    Edge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Scalar,
    Vector,
}

enum FieldImpl {
    Scalar(Arc<dyn ScalarField>),
    Vector(Arc<dyn CurlField>),
}

/// A catalog entry: evaluators plus the regularity bookkeeping used by
/// the convergence harness.
pub struct TestField {
    pub name: String,
    pub kind: FieldKind,
    /// Regularity exponent r: the field lies in H^{1+s} (scalar) or
    /// H^s(curl) (vector) for every s < r.
    pub regularity: f64,
    /// Why the label holds.
    pub regularity_note: String,
    pub singularity: Singularity,
    imp: FieldImpl,
}

impl TestField {
    pub fn as_scalar(&self) -> Result<&dyn ScalarField> {
        match &self.imp {
            FieldImpl::Scalar(f) => Ok(f.as_ref()),
            _ => Err(Error::OperatorFieldMismatch { op: "scalar", field: self.name.clone() }),
        }
    }
    pub fn as_vector(&self) -> Result<&dyn CurlField> {
        match &self.imp {
            FieldImpl::Vector(f) => Ok(f.as_ref()),
            _ => Err(Error::OperatorFieldMismatch { op: "vector", field: self.name.clone() }),
        }
    }
}

struct RhoAlpha {
    vertex: [f64; 2],
    alpha: f64,
}

impl RhoAlpha {
    fn rho(&self, x: [f64; 2]) -> f64 {
        vec2::norm(vec2::sub(x, self.vertex))
    }
}

impl ScalarField for RhoAlpha {
    fn eval(&self, x: [f64; 2]) -> f64 {
        self.rho(x).powf(self.alpha)
    }
    fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        let d = vec2::sub(x, self.vertex);
        let r = vec2::norm(d);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        vec2::scale(self.alpha * r.powf(self.alpha - 2.0), d)
    }
}

/// ∇ρ^α: curl-free, singular at the vertex.
struct GradRhoAlpha {
    inner: RhoAlpha,
}

impl CurlField for GradRhoAlpha {
    fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        self.inner.grad(x)
    }
    fn curl(&self, _x: [f64; 2]) -> f64 {
        0.0
    }
}

/// (d^{α+1}, 0), d = distance to the bottom edge: curl = -(α+1) d^α.
struct EdgePower {
    alpha: f64,
    /// offset so the field works on both elements (d = x2 on T, 1+x2 on Q)
    offset: f64,
}

impl EdgePower {
    fn d(&self, x: [f64; 2]) -> f64 {
        (x[1] + self.offset).max(0.0)
    }
}

impl CurlField for EdgePower {
    fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        [self.d(x).powf(self.alpha + 1.0), 0.0]
    }
    fn curl(&self, x: [f64; 2]) -> f64 {
        -(self.alpha + 1.0) * self.d(x).powf(self.alpha)
    }
}

/// The standard catalog for an element: smooth trig fields, vertex
/// singularities ρ^α, an edge-singular curl field, and curl-free
/// gradient fields.
pub fn catalog(element: ElementKind) -> Vec<TestField> {
    let el = RefElement::new(element);
    let v0 = el.vertices[0];
    let edge_offset = match element {
        ElementKind::Triangle => 0.0,
        ElementKind::Square => 1.0,
    };
    let mut out = Vec::new();

    out.push(TestField {
        name: "trig".into(),
        kind: FieldKind::Scalar,
        regularity: f64::INFINITY,
        regularity_note: "entire function; all Sobolev norms finite".into(),
        singularity: Singularity::None,
        imp: FieldImpl::Scalar(Arc::new(FnScalar {
            f: |x: [f64; 2]| (x[0]).sin() * (0.8 * x[1]).cos(),
            g: |x: [f64; 2]| {
                [
                    x[0].cos() * (0.8 * x[1]).cos(),
                    -0.8 * x[0].sin() * (0.8 * x[1]).sin(),
                ]
            },
        })),
    });

    out.push(TestField {
        name: "trig_vec".into(),
        kind: FieldKind::Vector,
        regularity: f64::INFINITY,
        regularity_note: "entire components; all Sobolev norms finite".into(),
        singularity: Singularity::None,
        imp: FieldImpl::Vector(Arc::new(FnCurl {
            f: |x: [f64; 2]| [(x[1]).sin(), (0.7 * x[0]).cos()],
            c: |x: [f64; 2]| -0.7 * (0.7 * x[0]).sin() - x[1].cos(),
        })),
    });

    for alpha in [0.6, 1.5, 2.5] {
        out.push(TestField {
            name: format!("rho{alpha}"),
            kind: FieldKind::Scalar,
            regularity: alpha,
            regularity_note: format!(
                "ρ^α with α={alpha} lies in H^{{1+s}} exactly for s < α \
                 (polar integration of |D^{{1+s}} ρ^α|² ~ ρ^{{2(α-1-s)}}·ρ near the vertex)"
            ),
            singularity: Singularity::Vertex(0),
            imp: FieldImpl::Scalar(Arc::new(RhoAlpha { vertex: v0, alpha })),
        });
    }

    out.push(TestField {
        name: "edge_power1.5".into(),
        kind: FieldKind::Vector,
        regularity: 1.5,
        regularity_note: "u = (d^2.5, 0) with d the edge distance; curl = -2.5 d^1.5 \
                          lies in H^s exactly for s < 2 (1D line singularity), so \
                          u ∈ H^s(curl) for every s < 2; the label keeps the \
                          conservative α = 1.5"
            .into(),
        singularity: Singularity::Edge(0),
        imp: FieldImpl::Vector(Arc::new(EdgePower { alpha: 1.5, offset: edge_offset })),
    });

    for alpha in [0.6, 1.5] {
        out.push(TestField {
            name: format!("grad_rho{alpha}"),
            kind: FieldKind::Vector,
            regularity: alpha,
            regularity_note: "∇ρ^α ~ ρ^{α-1} lies in H^s exactly for s < α; curl-free".to_string(),
            singularity: Singularity::Vertex(0),
            imp: FieldImpl::Vector(Arc::new(GradRhoAlpha {
                inner: RhoAlpha { vertex: v0, alpha },
            })),
        });
    }

    out.push(TestField {
        name: "grad_xy".into(),
        kind: FieldKind::Vector,
        regularity: f64::INFINITY,
        regularity_note: "∇(x1 x2) = (x2, x1); polynomial and curl-free".into(),
        singularity: Singularity::None,
        imp: FieldImpl::Vector(Arc::new(FnCurl {
            f: |x: [f64; 2]| [x[1], x[0]],
            c: |_| 0.0,
        })),
    });

    out
}

/// Look up a catalog field by name; `rho` and `grad_rho` accept an
/// explicit alpha through the `alpha` parameter.
pub fn find_field(element: ElementKind, name: &str, alpha: Option<f64>) -> Result<TestField> {
    let el = RefElement::new(element);
    if let Some(a) = alpha {
        match name {
            "rho" | "rho_alpha" => {
                return Ok(TestField {
                    name: format!("rho{a}"),
                    kind: FieldKind::Scalar,
                    regularity: a,
                    regularity_note: format!("ρ^α, α={a}: in H^{{1+s}} for s < α"),
                    singularity: Singularity::Vertex(0),
                    imp: FieldImpl::Scalar(Arc::new(RhoAlpha { vertex: el.vertices[0], alpha: a })),
                })
            }
            "grad_rho" => {
                return Ok(TestField {
                    name: format!("grad_rho{a}"),
                    kind: FieldKind::Vector,
                    regularity: a,
                    regularity_note: format!("∇ρ^α, α={a}: in H^s for s < α; curl-free"),
                    singularity: Singularity::Vertex(0),
                    imp: FieldImpl::Vector(Arc::new(GradRhoAlpha {
                        inner: RhoAlpha { vertex: el.vertices[0], alpha: a },
                    })),
                })
            }
            "edge_power" => {
                let offset = if element == ElementKind::Square { 1.0 } else { 0.0 };
                return Ok(TestField {
                    name: format!("edge_power{a}"),
                    kind: FieldKind::Vector,
                    regularity: a,
                    regularity_note: format!("(d^{}, 0) with edge-distance d", a + 1.0),
                    singularity: Singularity::Edge(0),
                    imp: FieldImpl::Vector(Arc::new(EdgePower { alpha: a, offset })),
                });
            }
            _ => {}
        }
    }
    catalog(element)
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownField(name.to_string()))
}
