//! Acceptance suite: each test prints one PASS/FAIL line (visible with
//! `cargo test --test acceptance -- --nocapture`) and enforces the
//! stated tolerance and runtime budget.

use std::time::Instant;

use pinterp::harness::{
    check_approx1d, check_boundedness, check_commuting, check_poincare, check_preservation,
    fit_rate, run_convergence, ErrorColumn, Operator, RunConfig,
};
use pinterp::ElementKind;

fn report(name: &str, pass: bool, detail: String) {
    println!("ACCEPTANCE {}  {}  {}", if pass { "PASS" } else { "FAIL" }, name, detail);
    assert!(pass, "{name}: {detail}");
}

#[test]
fn polynomial_preservation() {
    let t0 = Instant::now();
    let rep = check_preservation(ElementKind::Triangle, 8, 20260810).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    report(
        "polynomial_preservation",
        rep.pass && secs < 30.0,
        format!(
            "worst scalar {:.3e}, worst vector {:.3e} (tol 1e-8), {:.1}s (budget 30s)",
            rep.worst_scalar, rep.worst_vector, secs
        ),
    );
}

#[test]
fn commuting_diagrams() {
    let t0 = Instant::now();
    let mut worst_curl: f64 = 0.0;
    let mut worst_grad: f64 = 0.0;
    let mut worst_div: f64 = 0.0;
    let mut worst_rot: f64 = 0.0;
    let mut pass = true;
    for p in 1..=8 {
        let rep = check_commuting(ElementKind::Triangle, p, 10, 4000 + p as u64).unwrap();
        worst_curl = worst_curl.max(rep.curl_residual);
        worst_grad = worst_grad.max(rep.gradient_residual);
        worst_div = worst_div.max(rep.div_residual);
        worst_rot = worst_rot.max(rep.rot_gradient_residual);
        pass &= rep.pass;
    }
    let secs = t0.elapsed().as_secs_f64();
    report(
        "commuting_diagrams",
        pass && secs < 120.0,
        format!(
            "residuals: curl {worst_curl:.3e}, gradient {worst_grad:.3e}, div {worst_div:.3e}, \
             rotated-gradient {worst_rot:.3e} (tol 1e-8), {secs:.1}s (budget 120s)"
        ),
    );
}

#[test]
fn h1_rate_for_vertex_singularities() {
    let t0 = Instant::now();
    let mut detail = String::new();
    let mut pass = true;
    for alpha in [1.5, 2.5] {
        let cfg = RunConfig {
            operator: Operator::Pi1,
            field: "rho".into(),
            alpha: Some(alpha),
            p_min: 3,
            p_max: 16,
            ..RunConfig::default()
        };
        let records = run_convergence(&cfg).unwrap();
        let fit = fit_rate(&records, ErrorColumn::H1Semi, 3).unwrap();
        let need = -(alpha - 0.15);
        pass &= fit.slope <= need;
        detail.push_str(&format!("alpha={alpha}: slope {:.3} (need <= {need:.2}); ", fit.slope));
    }
    let secs = t0.elapsed().as_secs_f64();
    detail.push_str(&format!("{secs:.1}s (budget 300s)"));
    report("h1_rate_vertex_singular", pass && secs < 300.0, detail);
}

#[test]
fn hcurl_rate_and_rotation_path() {
    let t0 = Instant::now();
    let alpha = 1.5;
    let mk = |op| RunConfig {
        operator: op,
        field: "edge_power".into(),
        alpha: Some(alpha),
        p_min: 3,
        p_max: 16,
        ..RunConfig::default()
    };
    let curl_records = run_convergence(&mk(Operator::PiCurl)).unwrap();
    let div_records = run_convergence(&mk(Operator::PiDiv)).unwrap();
    let curl_fit = fit_rate(&curl_records, ErrorColumn::Graph, 3).unwrap();
    let div_fit = fit_rate(&div_records, ErrorColumn::Graph, 3).unwrap();
    let need = -(alpha - 0.15);
    let slope_gap = (curl_fit.slope - div_fit.slope).abs();
    let secs = t0.elapsed().as_secs_f64();
    report(
        "hcurl_rate_and_rotation",
        curl_fit.slope <= need && slope_gap <= 1e-6 && secs < 300.0,
        format!(
            "graph slope {:.3} (need <= {need:.2}), rotation slope gap {slope_gap:.2e} (tol 1e-6), \
             {secs:.1}s (budget 300s)",
            curl_fit.slope
        ),
    );
}

#[test]
fn poincare_identities() {
    let t0 = Instant::now();
    let rep = check_poincare(ElementKind::Triangle).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    report(
        "poincare_identities",
        rep.pass && secs < 60.0,
        format!(
            "curl-inverse {:.3e} (tol 1e-9), grad-inverse {:.3e} (tol 1e-9), reconstruction \
             poly {:.3e} (tol 1e-8) / smooth {:.3e} (tol 1e-6), {:.1}s (budget 60s)",
            rep.curl_inverse_residual,
            rep.grad_inverse_residual,
            rep.poly_reconstruction,
            rep.smooth_reconstruction,
            secs
        ),
    );
}

#[test]
fn one_dimensional_machinery() {
    let t0 = Instant::now();
    let rep = check_approx1d().unwrap();
    let secs = t0.elapsed().as_secs_f64();
    report(
        "one_dimensional_machinery",
        rep.pass && secs < 60.0,
        format!(
            "endpoint mismatch {:.2e}, corrector slopes {:.3}/{:.3}/{:.3} \
             (targets -0.5/0.0/0.5 ± 0.1), singular decay slope {:.3} (need <= -0.75), \
             {:.1}s (budget 60s)",
            rep.endpoint_mismatch,
            rep.corrector_slopes[0],
            rep.corrector_slopes[1],
            rep.corrector_slopes[2],
            rep.singular_error_slope,
            secs
        ),
    );
}

#[test]
fn harmonic_extension_properties() {
    use nalgebra::DVector;
    use pinterp::extension::{discrete_harmonic_extend, BoundaryTrace};
    use pinterp::poly1d::{legendre_all, Poly1};
    use pinterp::spaces::{sample_points, ScalarSpace};

    let t0 = Instant::now();

    // trace fitting helper: exact Legendre expansion of f restricted to
    // each edge
    let fit_trace = |space: &ScalarSpace, f: &dyn Fn([f64; 2]) -> f64, deg: usize| {
        let polys = (0..space.element.num_edges())
            .map(|e| {
                let rule = pinterp::quadrature::interval_rule(deg + 6);
                let mut coeffs = vec![0.0; deg + 1];
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let v = f(space.element.edge_point(e, t));
                    let leg = legendre_all(deg, t);
                    for (k, c) in coeffs.iter_mut().enumerate() {
                        *c += w * v * leg[k] * (2.0 * k as f64 + 1.0) / 2.0;
                    }
                }
                Poly1::new(coeffs)
            })
            .collect();
        BoundaryTrace::new(polys)
    };

    // piecewise-linear traces are reproduced exactly for every p
    let mut linear_residual: f64 = 0.0;
    for p in [1usize, 3, 6] {
        let space = ScalarSpace::new(ElementKind::Triangle, p);
        let f = |x: [f64; 2]| 0.4 - 0.8 * x[0] + 0.3 * x[1];
        let tr = fit_trace(&space, &f, 1);
        let ext = discrete_harmonic_extend(&space, &tr).unwrap();
        for &x in sample_points(&space.element, 15).iter() {
            linear_residual = linear_residual.max((space.eval_coeffs_at(&ext, x).0 - f(x)).abs());
        }
    }

    // Pythagoras identity against random competing extensions
    let space = ScalarSpace::new(ElementKind::Triangle, 6);
    let f = |x: [f64; 2]| x[0] * x[0] * x[1] - 0.2 * x[1] * x[1];
    let tr = fit_trace(&space, &f, 3);
    let ext = discrete_harmonic_extend(&space, &tr).unwrap();
    let mut pythagoras_residual: f64 = 0.0;
    for trial in 0..6 {
        let mut phi = ext.clone();
        for (slot, &i) in space.bubble_indices().iter().enumerate() {
            phi[i] += (((slot * 17 + trial * 5 + 2) % 11) as f64 - 5.0) / 5.0;
        }
        let k = &space.stiffness;
        let diff = &phi - &ext;
        let lhs = phi.dot(&(k * &phi));
        let rhs = diff.dot(&(k * &diff)) + ext.dot(&(k * &ext));
        pythagoras_residual = pythagoras_residual.max((lhs - rhs).abs() / lhs.abs());
    }

    // monotonicity of the seminorm in p for a fixed degree-4 trace
    let g = |x: [f64; 2]| x[0].powi(4) - 0.6 * x[0] * x[1] * x[1] + 0.1;
    let mut monotone = true;
    let mut last = f64::INFINITY;
    let mut seminorms = Vec::new();
    for p in 4..=16 {
        let space = ScalarSpace::new(ElementKind::Triangle, p);
        let tr = fit_trace(&space, &g, 4);
        let ext = discrete_harmonic_extend(&space, &tr).unwrap();
        let h1 = ext.dot(&(&space.stiffness * &ext)).sqrt();
        monotone &= h1 <= last + 1e-10;
        last = h1;
        seminorms.push(h1);
    }
    let _ = DVector::<f64>::zeros(1);

    let secs = t0.elapsed().as_secs_f64();
    report(
        "harmonic_extension",
        linear_residual <= 1e-10 && pythagoras_residual <= 1e-9 && monotone,
        format!(
            "linear-trace residual {linear_residual:.3e} (tol 1e-10), pythagoras residual \
             {pythagoras_residual:.3e} (tol 1e-9), seminorm monotone over p=4..16: {monotone} \
             ({:.4} -> {:.4}), {secs:.1}s",
            seminorms.first().unwrap(),
            seminorms.last().unwrap()
        ),
    );
}

#[test]
fn interpolant_boundedness() {
    let t0 = Instant::now();
    let rep = check_boundedness(ElementKind::Triangle, 16, 99).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    report(
        "interpolant_boundedness",
        rep.pass,
        format!(
            "log-ratio slope {:.4} (tol ±0.15), ratio band {:.3} (< 3), {secs:.1}s",
            rep.slope, rep.band
        ),
    );
}
