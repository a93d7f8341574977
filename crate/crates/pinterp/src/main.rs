//! Command-line driver: convergence sweeps to CSV and identity checks.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pinterp::harness::{
    self, check_approx1d, check_boundedness, check_commuting, check_poincare, check_preservation,
    Operator, RunConfig,
};
use pinterp::ElementKind;

#[derive(Parser)]
#[command(name = "pinterp", version, about = "projection-based p-interpolation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a p-convergence sweep and write a CSV.
    Converge(Box<ConvergeArgs>),
    /// Identity and property checks (exit 1 on failure).
    Check {
        #[command(subcommand)]
        which: CheckCmd,
    },
}

#[derive(Args)]
struct ConvergeArgs {
    /// Operator: pi0 | pi1 | picurl | pidiv.
    #[arg(long)]
    op: Option<String>,
    /// Catalog field name (rho / grad_rho / edge_power accept --alpha).
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    pmax: Option<usize>,
    #[arg(long)]
    pmin: Option<usize>,
    /// triangle | square.
    #[arg(long)]
    element: Option<String>,
    /// Vector family for picurl/pidiv: ned1 | ned2 | rt | bdm.
    #[arg(long)]
    family: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Oracle space degree override.
    #[arg(long)]
    oracle_degree: Option<usize>,
    /// Extra quadrature exactness over 2p.
    #[arg(long)]
    quad_margin: Option<usize>,
    #[arg(long)]
    graded_levels: Option<usize>,
    #[arg(long)]
    graded_ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// key=value configuration file; CLI flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Commuting-diagram identities at one degree.
    Diagram {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "triangle")]
        element: String,
        #[arg(long, default_value_t = 10)]
        probes: usize,
    },
    /// Polynomial preservation up to a degree.
    Preserve {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "triangle")]
        element: String,
    },
    /// Potential-operator identities and the regular decomposition.
    Poincare {
        #[arg(long, default_value = "triangle")]
        element: String,
    },
    /// 1D approximation machinery (correctors, singular decay).
    Approx1d,
    /// Degree-uniform boundedness probe of the H(curl) interpolant.
    Bounded {
        #[arg(long, default_value_t = 16)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "triangle")]
        element: String,
    },
}

fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path:?}: {e}"))?;
    let mut map = HashMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{path:?}:{}: expected key=value", ln + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn run_converge(args: ConvergeArgs) -> ExitCode {
    let file = match args.config.as_ref().map(parse_config_file).transpose() {
        Ok(m) => m.unwrap_or_default(),
        Err(e) => return usage_error(&e),
    };
    let get = |cli: Option<String>, key: &str| cli.or_else(|| file.get(key).cloned());
    macro_rules! parse_opt {
        ($cli:expr, $key:literal, $t:ty) => {
            match get($cli.map(|v| v.to_string()), $key).map(|s| s.parse::<$t>()) {
                None => None,
                Some(Ok(v)) => Some(v),
                Some(Err(e)) => return usage_error(&format!("bad {}: {e}", $key)),
            }
        };
    }

    let op_str = match get(args.op, "operator") {
        Some(s) => s,
        None => return usage_error("missing --op (or `operator` in the config file)"),
    };
    let operator: Operator = match op_str.parse() {
        Ok(o) => o,
        Err(e) => return usage_error(&e.to_string()),
    };
    let field = match get(args.field, "field") {
        Some(f) => f,
        None => return usage_error("missing --field"),
    };
    let p_max = match parse_opt!(args.pmax, "p_max", usize) {
        Some(p) => p,
        None => return usage_error("missing --pmax"),
    };
    let out = match get(args.out.map(|p| p.display().to_string()), "out") {
        Some(o) => PathBuf::from(o),
        None => return usage_error("missing --out"),
    };
    let element: ElementKind =
        match get(args.element, "element").as_deref().unwrap_or("triangle").parse() {
            Ok(e) => e,
            Err(e) => return usage_error(&e.to_string()),
        };
    let family = match get(args.family, "family") {
        None => None,
        Some(f) => match f.parse() {
            Ok(f) => Some(f),
            Err(e) => return usage_error(&format!("{e}")),
        },
    };

    let defaults = RunConfig::default();
    let cfg = RunConfig {
        element,
        operator,
        field,
        alpha: parse_opt!(args.alpha, "alpha", f64),
        family,
        p_min: parse_opt!(args.pmin, "p_min", usize).unwrap_or(1),
        p_max,
        oracle_degree: parse_opt!(args.oracle_degree, "oracle_degree", usize),
        degree_margin: parse_opt!(args.quad_margin, "quad_margin", usize)
            .unwrap_or(defaults.degree_margin),
        graded_levels: parse_opt!(args.graded_levels, "graded_levels", usize)
            .unwrap_or(defaults.graded_levels),
        graded_ratio: parse_opt!(args.graded_ratio, "graded_ratio", f64)
            .unwrap_or(defaults.graded_ratio),
        seed: parse_opt!(args.seed, "seed", u64).unwrap_or(0),
    };

    match harness::run_convergence(&cfg) {
        Ok(records) => {
            if let Err(e) = harness::emit_csv(&records, &out) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            for r in &records {
                println!(
                    "{} {} p={:2}  err_l2={:.6e}  err_h1semi={:.6e}{}  ({:.2}s)",
                    r.operator,
                    r.field,
                    r.p,
                    r.err_l2,
                    r.err_h1semi,
                    r.err_graph.map(|g| format!("  err_graph={g:.6e}")).unwrap_or_default(),
                    r.seconds
                );
            }
            if let Ok(fit) = harness::fit_rate(&records, harness::ErrorColumn::H1Semi, 3) {
                println!(
                    "fitted h1semi slope (p>=3): {:.4} ± {:.4}{}",
                    fit.slope,
                    fit.band95,
                    if fit.monotone { "" } else { "  [non-monotone]" }
                );
            }
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(pinterp::Error::UnknownField(f)) => usage_error(&format!("unknown field `{f}`")),
        Err(pinterp::Error::OperatorFieldMismatch { op, field }) => {
            usage_error(&format!("operator {op} cannot run on field `{field}`"))
        }
        Err(e @ pinterp::Error::UnsupportedFamily { .. }) => usage_error(&e.to_string()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn pass_line(name: &str, pass: bool, detail: &str) -> bool {
    println!("{}  {}  {}", if pass { "PASS" } else { "FAIL" }, name, detail);
    pass
}

fn run_check(which: CheckCmd) -> ExitCode {
    let result: Result<bool, pinterp::Error> = (|| match which {
        CheckCmd::Diagram { p, seed, element, probes } => {
            let element: ElementKind = element.parse()?;
            let rep = check_commuting(element, p, probes, seed)?;
            let mut ok = true;
            ok &= pass_line(
                "diagram.curl",
                rep.curl_residual <= 1e-8,
                &format!("residual {:.3e}", rep.curl_residual),
            );
            ok &= pass_line(
                "diagram.gradient",
                rep.gradient_residual <= 1e-8,
                &format!("residual {:.3e}", rep.gradient_residual),
            );
            ok &= pass_line(
                "diagram.div",
                rep.div_residual <= 1e-8,
                &format!("residual {:.3e}", rep.div_residual),
            );
            ok &= pass_line(
                "diagram.rot_gradient",
                rep.rot_gradient_residual <= 1e-8,
                &format!("residual {:.3e}", rep.rot_gradient_residual),
            );
            Ok(ok)
        }
        CheckCmd::Preserve { p, seed, element } => {
            let element: ElementKind = element.parse()?;
            let rep = check_preservation(element, p, seed)?;
            let mut ok = true;
            ok &= pass_line(
                "preserve.scalar",
                rep.worst_scalar <= 1e-8,
                &format!("worst relative coefficient error {:.3e}", rep.worst_scalar),
            );
            ok &= pass_line(
                "preserve.vector",
                rep.worst_vector <= 1e-8,
                &format!("worst relative coefficient error {:.3e}", rep.worst_vector),
            );
            Ok(ok)
        }
        CheckCmd::Poincare { element } => {
            let element: ElementKind = element.parse()?;
            let rep = check_poincare(element)?;
            let mut ok = true;
            ok &= pass_line(
                "poincare.curl_inverse",
                rep.curl_inverse_residual <= 1e-9,
                &format!("residual {:.3e}", rep.curl_inverse_residual),
            );
            ok &= pass_line(
                "poincare.grad_inverse",
                rep.grad_inverse_residual <= 1e-9,
                &format!("residual {:.3e}", rep.grad_inverse_residual),
            );
            ok &= pass_line(
                "poincare.reconstruction_poly",
                rep.poly_reconstruction <= 1e-8,
                &format!("residual {:.3e}", rep.poly_reconstruction),
            );
            ok &= pass_line(
                "poincare.reconstruction_smooth",
                rep.smooth_reconstruction <= 1e-6,
                &format!("residual {:.3e}", rep.smooth_reconstruction),
            );
            Ok(ok)
        }
        CheckCmd::Approx1d => {
            let rep = check_approx1d()?;
            let mut ok = true;
            ok &= pass_line(
                "approx1d.endpoints",
                rep.endpoint_mismatch <= 1e-12,
                &format!("mismatch {:.3e}", rep.endpoint_mismatch),
            );
            let labels = ["s=0", "s=1/2", "s=1"];
            let targets = [-0.5, 0.0, 0.5];
            for i in 0..3 {
                ok &= pass_line(
                    &format!("approx1d.corrector_{}", labels[i]),
                    (rep.corrector_slopes[i] - targets[i]).abs() <= 0.1,
                    &format!(
                        "slope {:.4} (target {:.1} ± 0.1)",
                        rep.corrector_slopes[i], targets[i]
                    ),
                );
            }
            ok &= pass_line(
                "approx1d.singular_decay",
                rep.singular_error_slope <= -0.75,
                &format!("slope {:.4} (need <= -0.75)", rep.singular_error_slope),
            );
            Ok(ok)
        }
        CheckCmd::Bounded { p, seed, element } => {
            let element: ElementKind = element.parse()?;
            let rep = check_boundedness(element, p, seed)?;
            for (deg, ratio) in &rep.ratios {
                println!("  p={deg:2}  ratio {ratio:.6}");
            }
            Ok(pass_line(
                "bounded.hcurl",
                rep.pass,
                &format!("log-log slope {:.4}, band {:.3}", rep.slope, rep.band),
            ))
        }
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(pinterp::Error::Config(msg)) => usage_error(&msg),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Converge(args) => run_converge(*args),
        Cmd::Check { which } => run_check(which),
    }
}
