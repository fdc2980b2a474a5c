//! ε-curves over dimension and λ sweeps, theoretical bound overlays for
//! traces, and support identification statistics.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, EstimateOptions, GeometryConstants};
use crate::linalg::Matrix;
use crate::problems::{gen_synthetic, reference_optimum, GeneratorSpec, ProblemInstance};
use crate::solvers::{run, Method, SolverConfig, Trace};

pub const DEFAULT_CAP: usize = 10_000;
pub const REFERENCE_TOL: f64 = 1e-12;

/// `10⁰, 10⁻¹, …, 10⁻¹⁰`.
pub fn default_eps_grid() -> Vec<f64> {
    (0..=10).map(|k| 10f64.powi(-k)).collect()
}

/// Seed of sweep cell `index`: the base seed XOR a SplitMix64 hash of the index.
pub fn cell_seed(base: u64, index: usize) -> u64 {
    let mut z = (index as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    base ^ (z ^ (z >> 31))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Dimension,
    Lambda,
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dim" | "dimension" => Ok(SweepAxis::Dimension),
            "lambda" => Ok(SweepAxis::Lambda),
            _ => Err(Error::InvalidArgument(format!("unknown sweep axis `{s}`"))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Dimension => "dim",
            SweepAxis::Lambda => "lambda",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonCurve {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub eps_grid: Vec<f64>,
    /// `k_eps[i][j]`: first iteration at sweep value `i` with gap `≤ eps_grid[j]`,
    /// or −1 when not reached within the cap.
    pub k_eps: Vec<Vec<i64>>,
    pub cap: usize,
    pub seeds: Vec<u64>,
    /// Error message of each failed cell.
    pub failures: Vec<Option<String>>,
}

impl EpsilonCurve {
    /// Rows `sweep,epsilon,k_eps`, sweep-major.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sweep,epsilon,k_eps\n");
        for (v, row) in self.values.iter().zip(&self.k_eps) {
            for (e, k) in self.eps_grid.iter().zip(row) {
                s.push_str(&format!("{v},{e},{k}\n"));
            }
        }
        s
    }

    /// Curve at one ε, as `(sweep value, k)` pairs.
    pub fn at_eps(&self, eps: f64) -> Option<Vec<(f64, i64)>> {
        let j = self.eps_grid.iter().position(|e| *e == eps)?;
        Some(self.values.iter().zip(&self.k_eps).map(|(v, r)| (*v, r[j])).collect())
    }
}

/// Iteration counts from a trace with a reference.
fn first_hits(trace: &Trace, eps_grid: &[f64]) -> Vec<i64> {
    eps_grid
        .iter()
        .map(|e| trace.first_below(*e).map_or(-1, |k| k as i64))
        .collect()
}

/// ε-curve over a sweep.
///
/// A dimension sweep regenerates the instance for every value, with `d` set
/// to the value, sparsity capped at `d` and the seed derived by
/// [`cell_seed`]. A λ sweep draws one instance from `template` and only
/// changes λ. `lambda` is the penalty used by dimension sweeps.
pub fn epsilon_curve(
    template: &GeneratorSpec,
    lambda: f64,
    solver: &SolverConfig,
    axis: SweepAxis,
    values: &[f64],
    cap: usize,
) -> Result<EpsilonCurve> {
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be >= 1".into()));
    }
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("sweep values must be positive".into()));
    }
    if axis == SweepAxis::Dimension && values.iter().any(|v| v.fract() != 0.0) {
        return Err(Error::InvalidArgument("dimension sweep values must be integers".into()));
    }
    if axis == SweepAxis::Lambda {
        template.validate()?;
    }

    let eps_grid = default_eps_grid();
    let tol = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let cfg = SolverConfig {
        max_iter: cap,
        tol,
        ..solver.clone()
    };
    let shared = match axis {
        SweepAxis::Lambda => Some(gen_synthetic(template)?),
        SweepAxis::Dimension => None,
    };

    let mut k_eps = Vec::with_capacity(values.len());
    let mut seeds = Vec::with_capacity(values.len());
    let mut failures = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let (inst, seed) = match &shared {
            Some(base) => (base.with_lambda(v), template.seed),
            None => {
                let d = v as usize;
                let seed = cell_seed(template.seed, i);
                let spec = GeneratorSpec {
                    d,
                    sparsity: template.sparsity.min(d),
                    seed,
                    ..*template
                };
                (gen_synthetic(&spec).and_then(|x| x.with_lambda(lambda)), seed)
            }
        };
        seeds.push(seed);
        let cell = inst.and_then(|inst| {
            let (opt, _) = reference_optimum(&inst, REFERENCE_TOL)?;
            let trace = run(&inst, &cfg, &vec![0.0; inst.d()], Some(opt))?;
            if let Some(e) = trace.failure {
                return Err(e);
            }
            Ok(first_hits(&trace, &eps_grid))
        });
        match cell {
            Ok(row) => {
                k_eps.push(row);
                failures.push(None);
            }
            Err(e) => {
                k_eps.push(vec![-1; eps_grid.len()]);
                failures.push(Some(e.to_string()));
            }
        }
    }
    Ok(EpsilonCurve {
        axis,
        values: values.to_vec(),
        eps_grid,
        k_eps,
        cap,
        seeds,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayMode {
    Global,
    /// Constants recomputed on the columns of the final support.
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundOverlay {
    pub rate: f64,
    pub delta0: f64,
    pub values: Vec<f64>,
}

impl BoundOverlay {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,bound\n");
        for (k, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{k},{v}\n"));
        }
        s
    }
}

/// Linear rate `1 − μ/L` of a method, from certified constants.
pub fn certified_rate(method: Method, c: &GeometryConstants) -> f64 {
    let (mu, l) = match method {
        Method::Gd | Method::Proxgrad => (c.mu2_certified(), c.l2_smooth),
        Method::Gscd | Method::ProxcdGs | Method::Rmp | Method::Ultimate => (c.mu1_certified(), c.l1_smooth),
    };
    if !(l > 0.0) {
        return 0.0;
    }
    let r = 1.0 - mu / l;
    if r.abs() <= 1e-12 {
        0.0
    } else {
        r.clamp(0.0, 1.0)
    }
}

/// The envelope `rate^k · gap₀` over the iterations of `trace`.
///
/// In local mode the constants are re-estimated on the columns of `p` in the
/// support of the final iterate; with a full support the given constants are
/// used as they are.
pub fn bound_overlay(
    trace: &Trace,
    p: &Matrix,
    constants: &GeometryConstants,
    mode: OverlayMode,
    opts: &EstimateOptions,
) -> Result<BoundOverlay> {
    let opt = trace
        .reference
        .ok_or_else(|| Error::InvalidArgument("bound overlay needs a reference optimum".into()))?;
    let delta0 = trace
        .records
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty trace".into()))?
        .obj_g
        - opt;
    let support: Vec<usize> = (0..trace.final_alpha.len())
        .filter(|&i| trace.final_alpha[i] != 0.0)
        .collect();
    let local;
    let c = match mode {
        OverlayMode::Local if !support.is_empty() && support.len() < p.cols() => {
            local = geometry::estimate(&p.select_columns(&support), opts)?;
            &local
        }
        _ => constants,
    };
    let rate = certified_rate(trace.config.method, c);
    let mut values = Vec::with_capacity(trace.records.len());
    let mut v = delta0;
    for _ in 0..trace.records.len() {
        values.push(v);
        v *= rate;
    }
    Ok(BoundOverlay { rate, delta0, values })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportStats {
    /// First iteration from which the support equals the reference support
    /// for the rest of the trace, or −1.
    pub identification_iter: i64,
    pub final_support: Vec<usize>,
}

impl SupportStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

fn support(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] != 0.0).collect()
}

/// Needs a trace run with `keep_iterates`.
pub fn support_stats(trace: &Trace, alpha_ref: &[f64]) -> Result<SupportStats> {
    if trace.iterates.len() != trace.records.len() {
        return Err(Error::InvalidArgument(
            "support statistics need a trace that kept its iterates".into(),
        ));
    }
    let target = support(alpha_ref);
    let mut ident: i64 = -1;
    for (k, a) in trace.iterates.iter().enumerate().rev() {
        if support(a) == target {
            ident = k as i64;
        } else {
            break;
        }
    }
    let last = trace.iterates.last().map(|a| support(a)).unwrap_or_default();
    Ok(SupportStats {
        identification_iter: ident,
        final_support: last,
    })
}

/// Runs `cfg` from zero on `inst` against its reference optimum.
pub fn traced_run(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<(Trace, Vec<f64>)> {
    let (opt, alpha_ref) = reference_optimum(inst, REFERENCE_TOL)?;
    let trace = run(inst, cfg, &vec![0.0; inst.d()], Some(opt))?;
    Ok((trace, alpha_ref))
}
