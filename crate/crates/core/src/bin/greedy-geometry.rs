use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use greedy_geometry::error::{Error, Result};
use greedy_geometry::experiments::{epsilon_curve, SweepAxis, REFERENCE_TOL};
use greedy_geometry::geometry::{self, EstimateOptions, EstimateReport};
use greedy_geometry::io::{matrix_to_csv, read_vector_csv, vector_to_csv, write_atomic};
use greedy_geometry::problems::{gen_synthetic, load_raw, load_standardize, reference_optimum, GeneratorSpec};
use greedy_geometry::solvers::{run, CoordinateStep, InnerSolver, Method, SolverConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "greedy-geometry", version, about = "Greedy first-order methods and their geometry constants")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Draw a synthetic instance.
    Gen(GenArgs),
    /// Estimate smoothness and strong convexity constants of a design.
    Estimate(EstimateArgs),
    /// Run one solver and write its trace.
    Solve(SolveArgs),
    /// ε-curve over a dimension or λ sweep.
    Epscurve(EpsArgs),
}

#[derive(Args, Debug, serde::Serialize)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    sparsity: usize,
    #[arg(long, default_value_t = 0.5)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug, serde::Serialize)]
struct DataArgs {
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    y: PathBuf,
    /// Center and scale the columns of P to unit variance.
    #[arg(long)]
    standardize: bool,
}

#[derive(Args, Debug, serde::Serialize)]
struct EstimateArgs {
    #[arg(long)]
    p: PathBuf,
    /// Only checked for a matching row count.
    #[arg(long)]
    y: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Solve the SDP relaxations.
    #[arg(long)]
    sdp: bool,
    /// Entry standard deviation for the concentration targets.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, serde::Serialize)]
struct SolveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value = "rmp")]
    method: String,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    alpha0: Option<PathBuf>,
    #[arg(long, default_value = "pdhg")]
    inner: String,
    #[arg(long, default_value_t = 5000)]
    inner_cap: usize,
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use L₁ instead of L₂ in proxcd_gs.
    #[arg(long)]
    prox_l1: bool,
    /// Compute a reference optimum; gaps and stopping are then relative to it.
    #[arg(long)]
    reference: bool,
    /// Write zero wall times, for byte-identical reruns.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args, Debug, serde::Serialize)]
struct EpsArgs {
    #[arg(long, default_value = "synthetic")]
    family: String,
    #[arg(long)]
    sweep: String,
    /// Comma separated sweep values.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    values: Vec<f64>,
    #[arg(long)]
    n: usize,
    /// Dimension for λ sweeps.
    #[arg(long)]
    d: Option<usize>,
    /// Penalty for dimension sweeps.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long)]
    sparsity: usize,
    #[arg(long, default_value_t = 0.5)]
    noise_sigma: f64,
    #[arg(long, default_value = "rmp")]
    method: String,
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn write_meta(path: &Path, cmd: &str, flags: Value, derived: Value) -> Result<()> {
    let meta = json!({
        "version": VERSION,
        "subcommand": cmd,
        "flags": flags,
        "derived": derived,
    });
    write_atomic(path, &(serde_json::to_string_pretty(&meta).expect("json value") + "\n"))
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    println!("seed: {}", a.seed);
    let inst = gen_synthetic(&GeneratorSpec {
        n: a.n,
        d: a.d,
        sparsity: a.sparsity,
        noise_sigma: a.noise_sigma,
        seed: a.seed,
    })?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::Io {
        path: a.out_dir.clone(),
        source: e,
    })?;
    write_atomic(&a.out_dir.join("P.csv"), &matrix_to_csv(&inst.p))?;
    write_atomic(&a.out_dir.join("y.csv"), &vector_to_csv(&inst.y))?;
    let star = inst.alpha_star.as_deref().unwrap_or_default();
    write_atomic(&a.out_dir.join("alpha_star.csv"), &vector_to_csv(star))?;
    write_meta(
        &a.out_dir.join("meta.json"),
        "gen",
        serde_json::to_value(a).expect("flags serialize"),
        json!({ "support": (0..star.len()).filter(|&i| star[i] != 0.0).collect::<Vec<_>>() }),
    )
}

fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    println!("seed: 0");
    let p = greedy_geometry::io::read_matrix_csv(&a.p)?;
    if let Some(y) = &a.y {
        let y = read_vector_csv(y)?;
        if y.len() != p.rows() {
            return Err(Error::Dimension(format!("y has {} rows, P has {}", y.len(), p.rows())));
        }
    }
    let opts = EstimateOptions {
        sdp: a.sdp,
        sigma: a.sigma,
        ..Default::default()
    };
    let g = geometry::estimate(&p, &opts)?;
    let report = EstimateReport::new(p.rows(), p.cols(), a.lambda, &g);
    write_atomic(&a.out, &(report.to_json() + "\n"))?;
    write_meta(
        &meta_path(&a.out),
        "estimate",
        serde_json::to_value(a).expect("flags serialize"),
        json!({ "sdp_converged": g.sdp_converged, "sdp_iterations": g.sdp_iterations }),
    )
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    println!("seed: {}", a.seed);
    let method: Method = a.method.parse()?;
    let inner: InnerSolver = a.inner.parse()?;
    let inst = if a.data.standardize {
        load_standardize(&a.data.p, &a.data.y)?
    } else {
        load_raw(&a.data.p, &a.data.y)?
    }
    .with_lambda(a.lambda)?;
    let alpha0 = match &a.alpha0 {
        Some(path) => read_vector_csv(path)?,
        None => vec![0.0; inst.d()],
    };
    let cfg = SolverConfig {
        method,
        max_iter: a.max_iter,
        tol: a.tol,
        inner,
        inner_cap: a.inner_cap,
        rho: a.rho,
        seed: a.seed,
        prox_l: if a.prox_l1 { CoordinateStep::L1 } else { CoordinateStep::L2 },
        ..SolverConfig::default()
    };
    cfg.validate()?;
    let reference = if a.reference {
        Some(reference_optimum(&inst, REFERENCE_TOL)?.0)
    } else {
        None
    };
    let trace = run(&inst, &cfg, &alpha0, reference)?;
    write_atomic(&a.trace, &trace.to_csv(!a.no_timing))?;
    write_meta(
        &meta_path(&a.trace),
        "solve",
        serde_json::to_value(a).expect("flags serialize"),
        json!({
            "l1_smooth": trace.l1_smooth,
            "l2_smooth": trace.l2_smooth,
            "reference_opt": reference,
            "iterations": trace.records.len() - 1,
            "failure": trace.failure.as_ref().map(|e| e.to_string()),
        }),
    )?;
    match trace.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn cmd_epscurve(a: &EpsArgs) -> Result<()> {
    println!("seed: {}", a.seed);
    if a.family != "synthetic" {
        return Err(Error::InvalidArgument(format!("unknown family `{}`", a.family)));
    }
    let axis: SweepAxis = a.sweep.parse()?;
    let d = match (axis, a.d) {
        (SweepAxis::Lambda, None) => {
            return Err(Error::InvalidArgument("a λ sweep needs --d".into()));
        }
        (_, d) => d.unwrap_or(0),
    };
    let template = GeneratorSpec {
        n: a.n,
        d,
        sparsity: a.sparsity,
        noise_sigma: a.noise_sigma,
        seed: a.seed,
    };
    let solver = SolverConfig::new(a.method.parse()?);
    let curve = epsilon_curve(&template, a.lambda, &solver, axis, &a.values, a.cap)?;
    write_atomic(&a.out, &curve.to_csv())?;
    write_meta(
        &meta_path(&a.out),
        "epscurve",
        serde_json::to_value(a).expect("flags serialize"),
        json!({ "cell_seeds": curve.seeds, "failures": curve.failures }),
    )
}

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        3
    } else if e.is_numerical() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Estimate(a) => cmd_estimate(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Epscurve(a) => cmd_epscurve(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
