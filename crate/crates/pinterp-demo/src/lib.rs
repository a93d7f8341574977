//! Browser demo of the projection-based interpolation operators.
//!
//! Three interactive operations, each returning JSON for the plain
//! canvas front-end in `www/`:
//!
//! * [`convergence_curve`]: interpolation error against the polynomial
//!   degree for a catalog field (log-log data).
//! * [`error_field`]: |g - Π¹_p g| sampled on a triangle raster
//!   (heatmap data).
//! * [`matched_1d`]: a 1D function, its truncated Chebyshev projection
//!   and the endpoint-matched approximant (curve data).
//!
//! Everything here is plain data-in/data-out so the crate also compiles
//! and tests natively.

use wasm_bindgen::prelude::wasm_bindgen;

use pinterp::fields::{find_field, Singularity};
use pinterp::geometry::RefElement;
use pinterp::harness::Operator;
use pinterp::interpolation::{l2_project, QuadConfig, Workspace};
use pinterp::spaces::VectorFamily;
use pinterp::ElementKind;

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

fn convergence_curve_impl(op: &str, field: &str, alpha: f64, p_max: usize) -> Result<String, String> {
    let operator: Operator = op.parse().map_err(|e| format!("{e}"))?;
    let p_max = p_max.clamp(2, 16);
    let alpha_opt = if matches!(field, "rho" | "grad_rho" | "edge_power") { Some(alpha) } else { None };
    let f = find_field(ElementKind::Triangle, field, alpha_opt).map_err(|e| format!("{e}"))?;
    let mut rows = Vec::new();
    for p in 1..=p_max {
        let quad = QuadConfig::default().with_singularity(f.singularity);
        let family = match operator {
            Operator::PiDiv => VectorFamily::BrezziDouglasMarini,
            _ => VectorFamily::NedelecSecond,
        };
        let ws = Workspace::new(ElementKind::Triangle, p, family, quad).map_err(|e| format!("{e}"))?;
        let (err, _label) = match operator {
            Operator::Pi0 => {
                let g = f.as_scalar().map_err(|e| format!("{e}"))?;
                let coeffs = l2_project(&ws.scalar, &ws.volume_rule, |x| g.eval(x));
                let mut l2 = 0.0;
                for (q, (v, _)) in
                    ws.scalar.eval_coeffs(&coeffs, &ws.volume_rule.points).iter().enumerate()
                {
                    let d = g.eval(ws.volume_rule.points[q]) - v;
                    l2 += ws.volume_rule.weights[q] * d * d;
                }
                (l2.sqrt(), "L2 error")
            }
            Operator::Pi1 => {
                let g = f.as_scalar().map_err(|e| format!("{e}"))?;
                let parts = ws.h1_interpolate(g).map_err(|e| format!("{e}"))?;
                let mut h1 = 0.0;
                for (q, (_, gr)) in
                    ws.scalar.eval_coeffs(&parts.total, &ws.volume_rule.points).iter().enumerate()
                {
                    let gg = g.grad(ws.volume_rule.points[q]);
                    let e = [gg[0] - gr[0], gg[1] - gr[1]];
                    h1 += ws.volume_rule.weights[q] * (e[0] * e[0] + e[1] * e[1]);
                }
                (h1.sqrt(), "H1 seminorm error")
            }
            Operator::PiCurl | Operator::PiDiv => {
                let u = f.as_vector().map_err(|e| format!("{e}"))?;
                let parts = match operator {
                    Operator::PiCurl => ws.hcurl_interpolate(&u),
                    _ => ws.hdiv_interpolate(&pinterp::fields::Rotated(&u)),
                }
                .map_err(|e| format!("{e}"))?;
                let vs = ws.vector_space().map_err(|e| format!("{e}"))?;
                let mut g2 = 0.0;
                for (q, s) in
                    vs.eval_coeffs(&parts.total, &ws.volume_rule.points).iter().enumerate()
                {
                    let x = ws.volume_rule.points[q];
                    let w = ws.volume_rule.weights[q];
                    let uv = u.eval(x);
                    let e = [uv[0] - s.value[0], uv[1] - s.value[1]];
                    let dc = u.curl(x) - s.curl;
                    g2 += w * (e[0] * e[0] + e[1] * e[1] + dc * dc);
                }
                (g2.sqrt(), "graph-norm error")
            }
        };
        rows.push(serde_json::json!({ "p": p, "error": err }));
    }
    Ok(serde_json::json!({
        "operator": operator.name(),
        "field": f.name,
        "label": match operator {
            Operator::Pi0 => "L2 error",
            Operator::Pi1 => "H1 seminorm error",
            _ => "graph-norm error",
        },
        "points": rows,
    })
    .to_string())
}

/// Interpolation error vs degree, as JSON:
/// `{operator, field, label, points: [{p, error}]}`.
#[wasm_bindgen]
pub fn convergence_curve(op: &str, field: &str, alpha: f64, p_max: usize) -> String {
    convergence_curve_impl(op, field, alpha, p_max).unwrap_or_else(err_json)
}

fn error_field_impl(p: usize, alpha: f64, n: usize) -> Result<String, String> {
    let p = p.clamp(1, 16);
    let n = n.clamp(16, 200);
    let f = find_field(ElementKind::Triangle, "rho", Some(alpha)).map_err(|e| format!("{e}"))?;
    let g = f.as_scalar().map_err(|e| format!("{e}"))?;
    let quad = QuadConfig::default().with_singularity(Singularity::Vertex(0));
    let ws = Workspace::new(ElementKind::Triangle, p, VectorFamily::NedelecSecond, quad)
        .map_err(|e| format!("{e}"))?;
    let parts = ws.h1_interpolate(g).map_err(|e| format!("{e}"))?;

    // raster over the bounding box, NaN outside the triangle
    let el = RefElement::triangle();
    let (x0, x1, y0, y1) = (-1.0, 1.0, 0.0, pinterp::geometry::SQRT3);
    let mut grid = Vec::with_capacity(n * n);
    let mut pts = Vec::new();
    let mut mask = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let x = [
                x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64,
                y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64,
            ];
            let inside = el.contains(x, 1e-12);
            mask.push(inside);
            if inside {
                pts.push(x);
            }
        }
    }
    let evals = ws.scalar.eval_coeffs(&parts.total, &pts);
    let mut k = 0;
    let mut vmax = 0.0f64;
    for inside in &mask {
        if *inside {
            let err = (g.eval(pts[k]) - evals[k].0).abs();
            vmax = vmax.max(err);
            grid.push(serde_json::json!(err));
            k += 1;
        } else {
            grid.push(serde_json::json!(null));
        }
    }
    Ok(serde_json::json!({
        "p": p,
        "alpha": alpha,
        "n": n,
        "bbox": [x0, y0, x1, y1],
        "max": vmax,
        "values": grid,
    })
    .to_string())
}

/// |g - Π¹_p g| for g = ρ^α on an n×n raster of the triangle's bounding
/// box (null outside), as JSON.
#[wasm_bindgen]
pub fn error_field(p: usize, alpha: f64, n: usize) -> String {
    error_field_impl(p, alpha, n).unwrap_or_else(err_json)
}

fn matched_1d_impl(name: &str, p: usize, samples: usize) -> Result<String, String> {
    use pinterp::approx1d::approx_endpoint_matched;
    let p = p.clamp(1, 40);
    let samples = samples.clamp(16, 2000);
    let f: Box<dyn Fn(f64) -> f64> = match name {
        "exp" => Box::new(|x: f64| x.exp()),
        "abs" => Box::new(|x: f64| x.abs()),
        "kink0.9" => Box::new(|x: f64| (1.0 + x).powf(0.9)),
        "runge" => Box::new(|x: f64| 1.0 / (1.0 + 25.0 * x * x)),
        other => return Err(format!("unknown 1d function `{other}`")),
    };
    let a = approx_endpoint_matched(f.as_ref(), p).map_err(|e| format!("{e}"))?;
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
        rows.push(serde_json::json!({
            "x": x,
            "f": f(x),
            "projection": a.projection.eval(x),
            "matched": a.eval(x),
        }));
    }
    Ok(serde_json::json!({
        "name": name,
        "p": p,
        "endpoint_weights": [a.minus_weight, a.plus_weight],
        "points": rows,
    })
    .to_string())
}

/// A 1D function with its truncated Chebyshev projection and the
/// endpoint-matched approximant, sampled for plotting.
#[wasm_bindgen]
pub fn matched_1d(name: &str, p: usize, samples: usize) -> String {
    matched_1d_impl(name, p, samples).unwrap_or_else(err_json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_curve_produces_monotone_errors() {
        let v: serde_json::Value =
            serde_json::from_str(&convergence_curve("pi1", "rho", 1.5, 6)).unwrap();
        assert_eq!(v["operator"], "pi1");
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 6);
        let errs: Vec<f64> = pts.iter().map(|r| r["error"].as_f64().unwrap()).collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn error_field_masks_the_outside() {
        let v: serde_json::Value = serde_json::from_str(&error_field(3, 1.5, 24)).unwrap();
        let grid = v["values"].as_array().unwrap();
        assert_eq!(grid.len(), 24 * 24);
        assert!(grid.iter().any(|g| g.is_null()));
        assert!(grid.iter().any(|g| g.is_f64()));
        assert!(v["max"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn matched_curve_interpolates_endpoints() {
        let v: serde_json::Value = serde_json::from_str(&matched_1d("kink0.9", 8, 64)).unwrap();
        let pts = v["points"].as_array().unwrap();
        let first = &pts[0];
        let last = &pts[pts.len() - 1];
        assert!((first["f"].as_f64().unwrap() - first["matched"].as_f64().unwrap()).abs() < 1e-10);
        assert!((last["f"].as_f64().unwrap() - last["matched"].as_f64().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn bad_inputs_return_error_objects() {
        let v: serde_json::Value = serde_json::from_str(&convergence_curve("pix", "trig", 0.0, 4)).unwrap();
        assert!(v["error"].is_string());
        let v: serde_json::Value = serde_json::from_str(&matched_1d("nope", 4, 50)).unwrap();
        assert!(v["error"].is_string());
    }
}
