//! Iterative methods, each one the exact minimizer of a smoothness upper
//! bound in some geometry:
//!
//! | method      | geometry | penalty |
//! |-------------|----------|---------|
//! | `gd`        | ℓ2       | none    |
//! | `gscd`      | ℓ1       | none    |
//! | `proxgrad`  | ℓ2       | ℓ1      |
//! | `proxcd_gs` | coordinate, GS selection | ℓ1 |
//! | `rmp`       | ℓ1       | ℓ1      |
//! | `ultimate`  | gauge of the columns of `P` | gauge |
//!
//! [`run`] iterates any of them from a starting point and records a [`Trace`].

mod gauge;
mod proxcd;
mod rmp;
mod trace;
mod ultimate;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry;
use crate::linalg::{argmax_abs, norm_inf, soft_threshold, Matrix};
use crate::problems::{duality_gap, grad_from_residual, ProblemInstance};

pub use gauge::{gauge_value, support_function};
pub use proxcd::{proxcd_gs_step, proxcd_model_decrease};
pub use rmp::{rmp_dual, rmp_objective, rmp_step_raw, RmpCase, RmpStepOutcome};
pub use trace::{Record, Trace};
pub use ultimate::{
    altmin_inner, arbcd_inner, dual_bound, inner_certificate, pdhg_inner, inner_objective, ultimate_step, InnerConfig,
    InnerProblem, KernelSolver, PdhgState, UltimateState, UltimateStep,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gd,
    Gscd,
    Proxgrad,
    ProxcdGs,
    Rmp,
    Ultimate,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Gd,
        Method::Gscd,
        Method::Proxgrad,
        Method::ProxcdGs,
        Method::Rmp,
        Method::Ultimate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::Gscd => "gscd",
            Method::Proxgrad => "proxgrad",
            Method::ProxcdGs => "proxcd_gs",
            Method::Rmp => "rmp",
            Method::Ultimate => "ultimate",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    Altmin,
    Arbcd,
    Pdhg,
}

impl FromStr for InnerSolver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "altmin" => Ok(InnerSolver::Altmin),
            "arbcd" => Ok(InnerSolver::Arbcd),
            "pdhg" => Ok(InnerSolver::Pdhg),
            _ => Err(Error::InvalidArgument(format!("unknown inner solver `{s}`"))),
        }
    }
}

/// Which smoothness constant the proximal coordinate method uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateStep {
    L2,
    L1,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub method: Method,
    pub max_iter: usize,
    pub tol: f64,
    pub inner: InnerSolver,
    pub inner_cap: usize,
    pub rho: f64,
    pub seed: u64,
    /// Probability of the η block in AR-BCD.
    pub p_eta: f64,
    pub prox_l: CoordinateStep,
    /// Keep every iterate in the trace.
    pub keep_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Rmp,
            max_iter: 10_000,
            tol: 1e-10,
            inner: InnerSolver::Pdhg,
            inner_cap: 5000,
            rho: 0.9,
            seed: 0,
            p_eta: 0.5,
            prox_l: CoordinateStep::L2,
            keep_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        SolverConfig {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be > 0".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument("rho must lie in (0, 1)".into()));
        }
        if !(self.p_eta > 0.0 && self.p_eta <= 1.0) {
            return Err(Error::InvalidArgument("p_eta must lie in (0, 1]".into()));
        }
        if self.inner_cap == 0 {
            return Err(Error::InvalidArgument("inner_cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// A problem together with its smoothness constants, shared by every step.
#[derive(Debug, Clone)]
pub struct StepContext<'a> {
    pub inst: &'a ProblemInstance,
    pub l1: f64,
    pub l2: f64,
}

impl<'a> StepContext<'a> {
    pub fn new(inst: &'a ProblemInstance) -> Result<Self> {
        let cf = geometry::closed_form_constants(&inst.p)?;
        Ok(StepContext {
            inst,
            l1: cf.l1_smooth,
            l2: cf.l2_smooth,
        })
    }

    pub fn grad(&self, alpha: &[f64]) -> Vec<f64> {
        crate::problems::grad_f(self.inst, alpha)
    }
}

/// Linear minimization oracle over the signed columns of `P`: the column with
/// the largest `|⟨P_i, v⟩|` and the sign of that inner product. Lowest index
/// wins ties.
pub fn select_atom(p: &Matrix, grad_f: &[f64]) -> (usize, f64) {
    let c = p.tmatvec(grad_f);
    let i = argmax_abs(&c);
    let sign = if c[i] < 0.0 { -1.0 } else { 1.0 };
    (i, sign)
}

pub fn gd_step(ctx: &StepContext, alpha: &[f64]) -> Vec<f64> {
    if ctx.l2 == 0.0 {
        return alpha.to_vec();
    }
    let g = ctx.grad(alpha);
    alpha.iter().zip(&g).map(|(a, gi)| a - gi / ctx.l2).collect()
}

pub fn gscd_step(ctx: &StepContext, alpha: &[f64]) -> Vec<f64> {
    let g = ctx.grad(alpha);
    let mut out = alpha.to_vec();
    let i = argmax_abs(&g);
    if ctx.l1 > 0.0 && g[i] != 0.0 {
        out[i] -= g[i] / ctx.l1;
    }
    out
}

pub fn prox_grad_step(ctx: &StepContext, alpha: &[f64]) -> Vec<f64> {
    if ctx.l2 == 0.0 {
        return alpha.to_vec();
    }
    let g = ctx.grad(alpha);
    let thr = ctx.inst.lambda / ctx.l2;
    alpha
        .iter()
        .zip(&g)
        .map(|(a, gi)| soft_threshold(a - gi / ctx.l2, thr))
        .collect()
}

pub fn rmp_step(ctx: &StepContext, alpha: &[f64]) -> RmpStepOutcome {
    let g = ctx.grad(alpha);
    rmp_step_raw(alpha, &g, ctx.inst.lambda, ctx.l1)
}

/// Iterates the configured method from `alpha0`.
///
/// With a reference optimal value the run stops once `G − reference ≤ tol`.
/// Without one it stops on `‖∇F‖∞ ≤ tol` for λ = 0 and on the LASSO duality
/// gap otherwise. A step failure ends the run early; the partial trace is kept
/// and the error stored in [`Trace::failure`].
pub fn run(
    inst: &ProblemInstance,
    cfg: &SolverConfig,
    alpha0: &[f64],
    reference: Option<f64>,
) -> Result<Trace> {
    cfg.validate()?;
    if alpha0.len() != inst.d() {
        return Err(Error::Dimension(format!(
            "alpha0 has {} entries, expected {}",
            alpha0.len(),
            inst.d()
        )));
    }
    let ctx = StepContext::new(inst)?;
    let mut trace = Trace::new(cfg.clone(), reference, ctx.l1, ctx.l2);
    let start = Instant::now();
    let mut alpha = alpha0.to_vec();

    let mut ult = if cfg.method == Method::Ultimate {
        Some(ultimate::Runner::new(&ctx, cfg)?)
    } else {
        None
    };

    for iter in 0..=cfg.max_iter {
        let r = inst.residual(&alpha);
        let g = grad_from_residual(inst, &r);
        let n = inst.n() as f64;
        let obj_f = crate::linalg::dot(&r, &r) / (2.0 * n);
        let obj_g = obj_f + inst.lambda * crate::linalg::norm1(&alpha);
        let rec = Record {
            iter,
            obj_f,
            obj_g,
            grad_inf: norm_inf(&g),
            support: alpha.iter().filter(|a| **a != 0.0).count(),
            wall_ns: start.elapsed().as_nanos() as u64,
            eps_hat: ult.as_ref().and_then(|u| u.last_eps_hat),
            inner_iters: ult.as_ref().and_then(|u| u.last_inner_iters),
        };
        let done = match reference {
            Some(opt) => obj_g - opt <= cfg.tol,
            None if inst.lambda == 0.0 => rec.grad_inf <= cfg.tol,
            None => duality_gap(inst, &alpha, &r).0 <= cfg.tol,
        };
        trace.push(rec, &alpha);
        if done || iter == cfg.max_iter {
            break;
        }

        let next = match cfg.method {
            Method::Gd => gd_step(&ctx, &alpha),
            Method::Gscd => gscd_step(&ctx, &alpha),
            Method::Proxgrad => prox_grad_step(&ctx, &alpha),
            Method::ProxcdGs => {
                let l = match cfg.prox_l {
                    CoordinateStep::L2 => ctx.l2,
                    CoordinateStep::L1 => ctx.l1,
                };
                proxcd_gs_step(&alpha, &g, inst.lambda, l)
            }
            Method::Rmp => {
                let out = rmp_step_raw(&alpha, &g, inst.lambda, ctx.l1);
                alpha.iter().zip(&out.beta).map(|(a, b)| a + b).collect()
            }
            Method::Ultimate => {
                let runner = ult.as_mut().expect("runner for ultimate");
                match runner.step(&ctx, &alpha, &g, iter) {
                    Ok(a) => a,
                    Err(e) => {
                        trace.failure = Some(e);
                        break;
                    }
                }
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            trace.failure = Some(Error::NoConvergence {
                what: "iterate became non-finite",
                iterations: iter,
            });
            break;
        }
        alpha = next;
    }
    trace.final_alpha = alpha;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm2};
    use crate::problems::{gen_synthetic, objective, reference_optimum, GeneratorSpec};

    fn inst(n: usize, d: usize, seed: u64, lambda: f64) -> ProblemInstance {
        gen_synthetic(&GeneratorSpec {
            n,
            d,
            sparsity: d.min(8),
            noise_sigma: 0.5,
            seed,
        })
        .unwrap()
        .with_lambda(lambda)
        .unwrap()
    }

    #[test]
    fn select_atom_examples() {
        let p = Matrix::identity(3);
        assert_eq!(select_atom(&p, &[0.0, -3.0, 1.0]), (1, -1.0));
        assert_eq!(select_atom(&p, &[0.0, 0.0, 0.0]), (0, 1.0));
        let p = Matrix::from_rows(&[vec![1.0, 1.0, 0.5]]).unwrap();
        assert_eq!(select_atom(&p, &[2.0]).0, 0);
    }

    #[test]
    fn gd_examples() {
        let n = 4;
        let p = Matrix::from_vec(n, 1, vec![(n as f64).sqrt() / 2.0; n]).unwrap();
        let one = ProblemInstance::new(p, vec![0.0; n], 0.0).unwrap();
        let ctx = StepContext::new(&one).unwrap();
        let next = gd_step(&ctx, &[1.0]);
        assert!(next[0].abs() < 1e-15);

        let i = inst(30, 10, 2, 0.0);
        let ctx = StepContext::new(&i).unwrap();
        let (_, opt) = reference_optimum(&i, 1e-12).unwrap();
        let fixed = gd_step(&ctx, &opt);
        assert!(norm2(&crate::linalg::sub(&fixed, &opt)) < 1e-10);

        let alpha: Vec<f64> = (0..10).map(|k| (k as f64).cos()).collect();
        let g = ctx.grad(&alpha);
        let lhs = objective(&i, &gd_step(&ctx, &alpha)).0;
        let rhs = objective(&i, &alpha).0 - dot(&g, &g) / (2.0 * ctx.l2);
        assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn gscd_examples() {
        let p = Matrix::from_diag(&[1.0, 2.0, 3.0]);
        let sep = ProblemInstance::new(p, vec![1.0, 2.0, 3.0], 0.0).unwrap();
        let ctx = StepContext::new(&sep).unwrap();
        // coordinate 2 has curvature L1 = 3, so one step solves it exactly
        let next = gscd_step(&ctx, &[1.0, 1.0, 0.0]);
        assert!((next[2] - 1.0).abs() < 1e-15);
        assert_eq!(gscd_step(&ctx, &[1.0, 1.0, 1.0]), vec![1.0, 1.0, 1.0]);

        let i = inst(20, 40, 3, 0.0);
        let ctx = StepContext::new(&i).unwrap();
        let alpha = vec![0.1; 40];
        let g = ctx.grad(&alpha);
        let lhs = objective(&i, &gscd_step(&ctx, &alpha)).0;
        let rhs = objective(&i, &alpha).0 - norm_inf(&g).powi(2) / (2.0 * ctx.l1);
        assert!(lhs <= rhs + 1e-12);
        // same index as the LMO over ±P columns
        let r = i.residual(&alpha);
        let (k, _) = select_atom(&i.p, &r);
        let moved: Vec<usize> = (0..40).filter(|&j| gscd_step(&ctx, &alpha)[j] != alpha[j]).collect();
        assert_eq!(moved, vec![k]);
    }

    #[test]
    fn prox_grad_examples() {
        let i = inst(15, 6, 4, 0.0);
        let ctx = StepContext::new(&i).unwrap();
        let alpha = vec![0.3; 6];
        assert_eq!(prox_grad_step(&ctx, &alpha), gd_step(&ctx, &alpha));

        let big = i.with_lambda(i.lambda_max() * 1.001).unwrap();
        let ctx = StepContext::new(&big).unwrap();
        assert!(prox_grad_step(&ctx, &[0.0; 6]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn prox_grad_matches_grid_of_upper_bound() {
        let i = inst(8, 2, 5, 0.1);
        let ctx = StepContext::new(&i).unwrap();
        let alpha = [0.4, -0.2];
        let g = ctx.grad(&alpha);
        let model = |b: &[f64; 2]| {
            let mut v = 0.0;
            for k in 0..2 {
                v += g[k] * (b[k] - alpha[k]) + 0.5 * ctx.l2 * (b[k] - alpha[k]).powi(2);
                v += i.lambda * b[k].abs();
            }
            v
        };
        let h = 1e-3;
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for a in -2000..=2000 {
            for b in -2000..=2000 {
                let pt = [a as f64 * h, b as f64 * h];
                let v = model(&pt);
                if v < best.0 {
                    best = (v, pt);
                }
            }
        }
        let step = prox_grad_step(&ctx, &alpha);
        assert!((step[0] - best.1[0]).abs() <= h && (step[1] - best.1[1]).abs() <= h);
    }

    #[test]
    fn run_zero_iterations() {
        let i = inst(10, 5, 1, 0.0);
        let t = run(&i, &SolverConfig { max_iter: 0, ..SolverConfig::new(Method::Gd) }, &[0.0; 5], None)
            .unwrap();
        assert_eq!(t.records.len(), 1);
        assert!(t.to_csv(false).starts_with("iter,obj,gap,grad_inf,support,wall_ns\n"));
    }

    #[test]
    fn gd_overparametrized_reaches_tolerance() {
        let i = inst(50, 500, 7, 0.0);
        let (opt, _) = reference_optimum(&i, 1e-12).unwrap();
        let t = run(&i, &SolverConfig::new(Method::Gd), &vec![0.0; 500], Some(opt)).unwrap();
        let last = t.records.last().unwrap();
        assert!(last.obj_g - opt <= 1e-10, "gap {}", last.obj_g - opt);
        assert!(t.records.len() < 10_001);
    }

    #[test]
    fn monotone_methods_are_monotone() {
        for &(n, d) in &[(30, 10), (10, 30)] {
            let i = inst(n, d, 11, 0.05);
            for m in [Method::Proxgrad, Method::ProxcdGs, Method::Rmp, Method::Ultimate] {
                let cfg = SolverConfig {
                    max_iter: 60,
                    ..SolverConfig::new(m)
                };
                let t = run(&i, &cfg, &vec![0.0; d], None).unwrap();
                assert!(t.failure.is_none());
                for w in t.records.windows(2) {
                    assert!(w[1].obj_g <= w[0].obj_g + 1e-12, "{m} {n}x{d}");
                }
                for (rec, a) in t.records.iter().zip(t.iterates.iter()) {
                    assert_eq!(rec.support, a.iter().filter(|v| **v != 0.0).count());
                }
            }
            let i0 = i.with_lambda(0.0).unwrap();
            for m in [Method::Gd, Method::Gscd] {
                let cfg = SolverConfig {
                    max_iter: 60,
                    ..SolverConfig::new(m)
                };
                let t = run(&i0, &cfg, &vec![0.0; d], None).unwrap();
                for w in t.records.windows(2) {
                    assert!(w[1].obj_g <= w[0].obj_g + 1e-12);
                }
            }
        }
    }

    #[test]
    fn rmp_from_zero_matches_gscd_first_step() {
        let i = inst(20, 30, 12, 0.0);
        let ctx = StepContext::new(&i).unwrap();
        let zero = vec![0.0; 30];
        let r: Vec<f64> = zero.iter().zip(&rmp_step(&ctx, &zero).beta).map(|(a, b)| a + b).collect();
        assert_eq!(r, gscd_step(&ctx, &zero));
    }
}
