//! The gauge method. Each outer step approximately minimizes, over
//! `η ∈ ℝᵈ` and `k ∈ Ker P`,
//!
//! `J(η, k) = ⟨∇F(α), η − α⟩ + (L/2)‖η + k − α‖₁² + λ‖η‖₁`,
//!
//! and moves to `α' = η`. Since `∇F(α)` is orthogonal to `Ker P` and
//! `J(α, 0) = λ‖α‖₁`, any `J(η, k) ≤ J(α, 0)` decreases `G`.
//!
//! Three inner solvers are available. Alternating minimization and AR-BCD
//! work on the variational form `(L/2)‖w‖₁² = min_{γ ∈ Δ} (L/2)Σ w_i²/γ_i`;
//! the primal-dual solver works on the lifted pair `(η, u = η + k − α)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::rmp::{rmp_dual, rmp_step_raw};
use super::{InnerSolver, SolverConfig, StepContext};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm1, norm_inf, numerical_rank, qr_kernel_basis, soft_threshold, Cholesky, Matrix};

const WEIGHT_FLOOR: f64 = 1e-12;
const UNIFORM_FALLBACK: f64 = 1e-14;
/// Share of the uniform distribution mixed into the warm-start weights.
const WARM_MIX: f64 = 1e-2;
const CERTIFY_EVERY: usize = 10;

/// Weighted projection onto `Ker P`: for weights `γ`, returns the `k ∈ Ker P`
/// minimizing `Σ (k_i − v_i)²/γ_i`.
#[derive(Debug, Clone)]
pub enum KernelSolver {
    /// `P` has full column rank.
    Empty,
    /// `P` has full row rank: `k = v − ΓPᵀ(PΓPᵀ)⁻¹Pv`. Holds the factor of
    /// `PPᵀ` for the unweighted projection.
    RowSpace(Cholesky),
    /// General case through an orthonormal kernel basis `Q`:
    /// `k = Q(QᵀΓ⁻¹Q)⁻¹QᵀΓ⁻¹v`.
    Basis(Matrix),
}

impl KernelSolver {
    pub fn new(p: &Matrix) -> Result<Self> {
        let (n, d) = p.shape();
        let r = numerical_rank(p)?;
        Ok(if r == d {
            KernelSolver::Empty
        } else if r == n {
            KernelSolver::RowSpace(Cholesky::new(&p.outer_gram())?)
        } else {
            KernelSolver::Basis(qr_kernel_basis(p)?)
        })
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, KernelSolver::Empty)
    }

    pub fn project(&self, p: &Matrix, gamma: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        match self {
            KernelSolver::Empty => Ok(vec![0.0; v.len()]),
            KernelSolver::RowSpace(_) => {
                let chol = Cholesky::new(&p.weighted_outer_gram(gamma))
                    .map_err(|_| Error::Singular("kernel projection system P Diag(γ) Pᵀ"))?;
                let mu = chol.solve(&p.matvec(v));
                let pt_mu = p.tmatvec(&mu);
                Ok(v.iter().zip(gamma).zip(&pt_mu).map(|((vi, g), m)| vi - g * m).collect())
            }
            KernelSolver::Basis(q) => {
                let m = q.cols();
                let mut a = Matrix::zeros(m, m);
                let mut rhs = vec![0.0; m];
                for i in 0..q.rows() {
                    let row = q.row(i);
                    let w = 1.0 / gamma[i];
                    for s in 0..m {
                        let ws = w * row[s];
                        rhs[s] += ws * v[i];
                        for t in s..m {
                            a[(s, t)] += ws * row[t];
                        }
                    }
                }
                for s in 0..m {
                    for t in 0..s {
                        a[(s, t)] = a[(t, s)];
                    }
                }
                let chol = Cholesky::new(&a).map_err(|_| Error::Singular("kernel system Qᵀ Diag(γ)⁻¹ Q"))?;
                Ok(q.matvec(&chol.solve(&rhs)))
            }
        }
    }

    /// Orthogonal projection onto `Ker P`.
    pub fn project_orthogonal(&self, p: &Matrix, v: &[f64]) -> Vec<f64> {
        match self {
            KernelSolver::Empty => vec![0.0; v.len()],
            KernelSolver::RowSpace(chol) => {
                let back = p.tmatvec(&chol.solve(&p.matvec(v)));
                v.iter().zip(&back).map(|(a, b)| a - b).collect()
            }
            KernelSolver::Basis(q) => q.matvec(&q.tmatvec(v)),
        }
    }
}

/// Data of one inner problem.
#[derive(Debug, Clone, Copy)]
pub struct InnerProblem<'a> {
    pub p: &'a Matrix,
    pub kernel: &'a KernelSolver,
    pub alpha: &'a [f64],
    pub grad: &'a [f64],
    pub lambda: f64,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UltimateState {
    pub eta: Vec<f64>,
    /// The kernel component `Qz`.
    pub k: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Auxiliary weights for `|η|`, used by AR-BCD only.
    pub theta: Vec<f64>,
}

impl UltimateState {
    /// `η = α`, `k = 0`, uniform weights.
    pub fn at(alpha: &[f64]) -> Self {
        let d = alpha.len();
        UltimateState {
            eta: alpha.to_vec(),
            k: vec![0.0; d],
            gamma: vec![1.0 / d as f64; d],
            theta: alpha.iter().map(|a| a.abs().max(WEIGHT_FLOOR)).collect(),
        }
    }

    fn w(&self, alpha: &[f64]) -> Vec<f64> {
        (0..alpha.len()).map(|i| self.eta[i] + self.k[i] - alpha[i]).collect()
    }
}

pub fn inner_objective(prob: &InnerProblem, eta: &[f64], k: &[f64]) -> f64 {
    let mut lin = 0.0;
    let mut w1 = 0.0;
    for i in 0..eta.len() {
        lin += prob.grad[i] * (eta[i] - prob.alpha[i]);
        w1 += (eta[i] + k[i] - prob.alpha[i]).abs();
    }
    lin + 0.5 * prob.l * w1 * w1 + prob.lambda * norm1(eta)
}

fn update_gamma(state: &mut UltimateState, alpha: &[f64]) {
    let w = state.w(alpha);
    let total = norm1(&w);
    let d = w.len() as f64;
    for (g, wi) in state.gamma.iter_mut().zip(&w) {
        let v = if total < UNIFORM_FALLBACK { 1.0 / d } else { wi.abs() / total };
        *g = v.max(WEIGHT_FLOOR);
    }
}

fn update_k(prob: &InnerProblem, state: &mut UltimateState) -> Result<()> {
    if prob.kernel.is_empty() {
        return Ok(());
    }
    let v: Vec<f64> = prob.alpha.iter().zip(&state.eta).map(|(a, e)| a - e).collect();
    state.k = prob.kernel.project(prob.p, &state.gamma, &v)?;
    Ok(())
}

/// One cycle of alternating minimization: kernel component, then `η` by
/// weighted soft thresholding, then the weights `γ`.
pub fn altmin_inner(prob: &InnerProblem, state: &mut UltimateState) -> Result<()> {
    update_k(prob, state)?;
    for i in 0..state.eta.len() {
        let g = state.gamma[i];
        state.eta[i] = soft_threshold(
            prob.alpha[i] - state.k[i] - g * prob.grad[i] / prob.l,
            prob.lambda * g / prob.l,
        );
    }
    update_gamma(state, prob.alpha);
    Ok(())
}

/// One AR-BCD update: the `η` block with probability `p_eta`, otherwise the
/// kernel block, followed by the exact minimization over `(γ, θ)`.
pub fn arbcd_inner(prob: &InnerProblem, state: &mut UltimateState, p_eta: f64, rng: &mut ChaCha8Rng) -> Result<()> {
    let eta_block = prob.kernel.is_empty() || rng.random::<f64>() < p_eta;
    if eta_block {
        for i in 0..state.eta.len() {
            let (g, t) = (state.gamma[i], state.theta[i]);
            let num = prob.l * (prob.alpha[i] - state.k[i]) / g - prob.grad[i];
            state.eta[i] = num / (prob.l / g + prob.lambda / t);
        }
    } else {
        update_k(prob, state)?;
    }
    update_gamma(state, prob.alpha);
    for (t, e) in state.theta.iter_mut().zip(&state.eta) {
        *t = e.abs().max(WEIGHT_FLOOR);
    }
    Ok(())
}

/// Lower bound on `min J` from the dual
/// `max_c −‖∇F − c‖∞²/(2L) − ⟨c, α⟩` over `c ∈ Range(Pᵀ)`, `‖c‖∞ ≤ λ`,
/// evaluated on the segment from `0` towards the candidate `c` (which must
/// lie in `Range(Pᵀ)`) by a 1-D concave search.
pub fn dual_bound(prob: &InnerProblem, c: &[f64]) -> f64 {
    let d = prob.alpha.len();
    let cinf = norm_inf(c);
    let ca = dot(c, prob.alpha);
    let dual = |s: f64| {
        let mut m: f64 = 0.0;
        for i in 0..d {
            m = m.max((prob.grad[i] - s * c[i]).abs());
        }
        -m * m / (2.0 * prob.l) - s * ca
    };
    let hi = if cinf > 0.0 { prob.lambda / cinf } else { 0.0 };
    let (mut a, mut b) = (0.0, hi);
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if dual(m1) < dual(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    let mut best = dual(0.0).max(dual(hi)).max(dual(0.5 * (a + b)));
    if prob.kernel.is_empty() {
        // the subproblem is then exactly the RMP one, whose scalar dual is tight
        let z = rmp_step_raw(prob.alpha, prob.grad, prob.lambda, prob.l).z_star;
        best = best.max(rmp_dual(prob.alpha, prob.grad, prob.lambda, prob.l, z));
    }
    best
}

/// [`dual_bound`] with the candidate read off the weights: at the optimum
/// `c = ∇F + L·w/γ`, projected onto `Range(Pᵀ)`.
pub fn inner_certificate(prob: &InnerProblem, state: &UltimateState) -> Result<f64> {
    let d = prob.alpha.len();
    let w = state.w(prob.alpha);
    let target: Vec<f64> = (0..d)
        .map(|i| prob.grad[i] + prob.l * w[i] / state.gamma[i])
        .collect();
    let (u, _) = crate::linalg::min_norm_least_squares(&prob.p.transpose(), &target)?;
    Ok(dual_bound(prob, &prob.p.tmatvec(&u)))
}

/// Primal-dual iterate for the lifted problem
/// `min ⟨∇F, η − α⟩ + (L/2)‖u‖₁² + λ‖η‖₁  s.t.  P(u − η + α) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdhgState {
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
    pub nu: Vec<f64>,
}

impl PdhgState {
    /// Feasible pair `(η, k)` with `k` the orthogonal projection of
    /// `u − η + α` onto `Ker P`.
    pub fn recover(&self, prob: &InnerProblem) -> (Vec<f64>, Vec<f64>) {
        let v: Vec<f64> = (0..self.u.len())
            .map(|i| self.u[i] - self.eta[i] + prob.alpha[i])
            .collect();
        (self.eta.clone(), prob.kernel.project_orthogonal(prob.p, &v))
    }

    pub fn certificate(&self, prob: &InnerProblem) -> f64 {
        let pt_nu = prob.p.tmatvec(&self.nu);
        let c: Vec<f64> = prob.grad.iter().zip(&pt_nu).map(|(g, t)| g - t).collect();
        dual_bound(prob, &c)
    }
}

/// `argmin_u (c/2)‖u‖₁² + ½‖u − v‖²`.
fn prox_sq_l1(v: &[f64], c: f64) -> Vec<f64> {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    // u_i = sign(v_i)(|v_i| − c·s)₊ with s = ‖u‖₁
    let mut sum = 0.0;
    let mut s = 0.0;
    for (m, &x) in mags.iter().enumerate() {
        let cand = (sum + x) / (1.0 + c * (m + 1) as f64);
        if x <= c * cand {
            break;
        }
        sum += x;
        s = cand;
    }
    v.iter().map(|x| soft_threshold(*x, c * s)).collect()
}

/// One primal-dual (Chambolle-Pock) iteration with steps `tau`, `sigma`,
/// `tau·sigma·2‖P‖² < 1`. `p_alpha` is `Pα`.
pub fn pdhg_inner(prob: &InnerProblem, st: &mut PdhgState, p_alpha: &[f64], tau: f64, sigma: f64) {
    let d = st.u.len();
    let t = prob.p.tmatvec(&st.nu);
    let v: Vec<f64> = (0..d).map(|i| st.u[i] - tau * t[i]).collect();
    let u_new = prox_sq_l1(&v, tau * prob.l);
    let eta_new: Vec<f64> = (0..d)
        .map(|i| soft_threshold(st.eta[i] + tau * (t[i] - prob.grad[i]), tau * prob.lambda))
        .collect();
    let bar: Vec<f64> = (0..d)
        .map(|i| (2.0 * u_new[i] - st.u[i]) - (2.0 * eta_new[i] - st.eta[i]))
        .collect();
    let pb = prob.p.matvec(&bar);
    for ((n, a), b) in st.nu.iter_mut().zip(&pb).zip(p_alpha) {
        *n += sigma * (a + b);
    }
    st.u = u_new;
    st.eta = eta_new;
}

#[derive(Debug, Clone, PartialEq)]
pub struct UltimateStep {
    pub alpha: Vec<f64>,
    /// Inner objective at the returned point.
    pub objective: f64,
    /// Certified `J − min J` at the returned point.
    pub eps_hat: f64,
    pub inner_iters: usize,
    /// No point better than `(α, 0)` was found.
    pub stalled: bool,
}

/// Settings of one inner solve.
#[derive(Debug, Clone, Copy)]
pub struct InnerConfig {
    pub solver: InnerSolver,
    pub cap: usize,
    /// Target precision `ε_k`.
    pub eps: f64,
    pub p_eta: f64,
}

struct Best {
    val: f64,
    eta: Vec<f64>,
    lower: f64,
}

impl Best {
    fn offer(&mut self, val: f64, eta: &[f64]) {
        if val < self.val {
            self.val = val;
            self.eta = eta.to_vec();
        }
    }

    fn certified(&self, eps: f64) -> bool {
        self.val - self.lower <= eps
    }
}

/// One outer step. Every inner solver starts from the RMP step, so the
/// result is never worse than RMP on the same subproblem.
pub fn ultimate_step(prob: &InnerProblem, cfg: &InnerConfig, rng: &mut ChaCha8Rng) -> Result<UltimateStep> {
    let d = prob.alpha.len();
    let j_alpha = prob.lambda * norm1(prob.alpha);
    let rmp = rmp_step_raw(prob.alpha, prob.grad, prob.lambda, prob.l);
    let eta0: Vec<f64> = (0..d).map(|i| prob.alpha[i] + rmp.beta[i]).collect();
    let mut best = Best {
        val: inner_objective(prob, &eta0, &vec![0.0; d]),
        eta: eta0.clone(),
        lower: f64::NEG_INFINITY,
    };
    if prob.kernel.is_empty() {
        best.lower = dual_bound(prob, &vec![0.0; d]);
    }

    let mut passes = 0;
    if !best.certified(cfg.eps) {
        passes = match cfg.solver {
            InnerSolver::Pdhg => run_pdhg(prob, cfg, &rmp.beta, &mut best)?,
            InnerSolver::Altmin | InnerSolver::Arbcd => run_irls(prob, cfg, &rmp.beta, &mut best, rng)?,
        };
    }

    let stalled = best.val >= j_alpha;
    let (alpha, objective) = if stalled && best.val > j_alpha {
        (prob.alpha.to_vec(), j_alpha)
    } else {
        (best.eta, best.val)
    };
    Ok(UltimateStep {
        alpha,
        objective,
        eps_hat: (objective - best.lower).max(0.0),
        inner_iters: passes,
        stalled,
    })
}

fn run_pdhg(prob: &InnerProblem, cfg: &InnerConfig, beta: &[f64], best: &mut Best) -> Result<usize> {
    let d = prob.alpha.len();
    let norm_k = std::f64::consts::SQRT_2 * crate::linalg::sigma_max(prob.p)?;
    if norm_k == 0.0 {
        return Ok(0);
    }
    let tau = 0.99 / norm_k;
    let sigma = 0.99 / norm_k;
    let p_alpha = prob.p.matvec(prob.alpha);
    let mut st = PdhgState {
        u: beta.to_vec(),
        eta: (0..d).map(|i| prob.alpha[i] + beta[i]).collect(),
        nu: vec![0.0; prob.p.rows()],
    };
    let mut passes = 0;
    while passes < cfg.cap {
        pdhg_inner(prob, &mut st, &p_alpha, tau, sigma);
        passes += 1;
        if passes % CERTIFY_EVERY == 0 || passes == cfg.cap {
            let (eta, k) = st.recover(prob);
            let val = inner_objective(prob, &eta, &k);
            if !val.is_finite() {
                return Err(Error::NoConvergence {
                    what: "inner objective became non-finite",
                    iterations: passes,
                });
            }
            best.offer(val, &eta);
            best.lower = best.lower.max(st.certificate(prob));
            if best.certified(cfg.eps) {
                break;
            }
        }
    }
    Ok(passes)
}

fn run_irls(
    prob: &InnerProblem,
    cfg: &InnerConfig,
    beta: &[f64],
    best: &mut Best,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    let d = prob.alpha.len();
    let mut state = UltimateState::at(prob.alpha);
    let b1 = norm1(beta);
    for i in 0..d {
        state.eta[i] = prob.alpha[i] + beta[i];
        let share = if b1 > 0.0 { beta[i].abs() / b1 } else { 1.0 / d as f64 };
        state.gamma[i] = ((1.0 - WARM_MIX) * share + WARM_MIX / d as f64).max(WEIGHT_FLOOR);
        state.theta[i] = state.eta[i].abs().max(WEIGHT_FLOOR);
    }
    let mut history = vec![best.val];
    let window = match cfg.solver {
        InnerSolver::Arbcd => 2,
        _ => 1,
    };
    let mut passes = 0;
    while passes < cfg.cap {
        match cfg.solver {
            InnerSolver::Arbcd => arbcd_inner(prob, &mut state, cfg.p_eta, rng)?,
            _ => altmin_inner(prob, &mut state)?,
        }
        passes += 1;
        let val = inner_objective(prob, &state.eta, &state.k);
        if !val.is_finite() {
            return Err(Error::NoConvergence {
                what: "inner objective became non-finite",
                iterations: passes,
            });
        }
        best.offer(val, &state.eta);
        history.push(val);
        if passes % CERTIFY_EVERY == 0 || passes == cfg.cap {
            best.lower = best.lower.max(inner_certificate(prob, &state)?);
            if best.certified(cfg.eps) {
                break;
            }
        }
        if passes >= window {
            let drop = history[passes - window] - val;
            if drop >= 0.0 && drop < cfg.eps {
                best.lower = best.lower.max(inner_certificate(prob, &state)?);
                break;
            }
        }
    }
    Ok(passes)
}

/// Per-run state of the gauge method inside [`super::run`].
pub(crate) struct Runner {
    kernel: KernelSolver,
    rng: ChaCha8Rng,
    eps0: Option<f64>,
    cfg: SolverConfig,
    pub(crate) last_eps_hat: Option<f64>,
    pub(crate) last_inner_iters: Option<usize>,
}

impl Runner {
    pub(crate) fn new(ctx: &StepContext, cfg: &SolverConfig) -> Result<Self> {
        use rand::SeedableRng;
        Ok(Runner {
            kernel: KernelSolver::new(&ctx.inst.p)?,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            eps0: None,
            cfg: cfg.clone(),
            last_eps_hat: None,
            last_inner_iters: None,
        })
    }

    pub(crate) fn step(&mut self, ctx: &StepContext, alpha: &[f64], grad: &[f64], k: usize) -> Result<Vec<f64>> {
        let prob = InnerProblem {
            p: &ctx.inst.p,
            kernel: &self.kernel,
            alpha,
            grad,
            lambda: ctx.inst.lambda,
            l: ctx.l1,
        };
        let eps0 = *self.eps0.get_or_insert_with(|| {
            let rmp = rmp_step_raw(alpha, grad, ctx.inst.lambda, ctx.l1);
            let mut eta = alpha.to_vec();
            for (e, b) in eta.iter_mut().zip(&rmp.beta) {
                *e += b;
            }
            inner_objective(&prob, &eta, &vec![0.0; alpha.len()]).abs().max(f64::MIN_POSITIVE)
        });
        let cfg = InnerConfig {
            solver: self.cfg.inner,
            cap: self.cfg.inner_cap,
            eps: eps0 * self.cfg.rho.powi(k as i32),
            p_eta: self.cfg.p_eta,
        };
        let out = ultimate_step(&prob, &cfg, &mut self.rng)?;
        self.last_eps_hat = Some(out.eps_hat);
        self.last_inner_iters = Some(out.inner_iters);
        Ok(out.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_synthetic, GeneratorSpec, ProblemInstance};
    use rand::SeedableRng;

    fn inst(n: usize, d: usize, seed: u64, lambda: f64) -> ProblemInstance {
        gen_synthetic(&GeneratorSpec {
            n,
            d,
            sparsity: d.min(5),
            noise_sigma: 0.3,
            seed,
        })
        .unwrap()
        .with_lambda(lambda)
        .unwrap()
    }

    struct Fixture {
        inst: ProblemInstance,
        kernel: KernelSolver,
        alpha: Vec<f64>,
        grad: Vec<f64>,
        l: f64,
    }

    impl Fixture {
        fn new(n: usize, d: usize, seed: u64, lambda: f64) -> Self {
            let inst = inst(n, d, seed, lambda);
            let kernel = KernelSolver::new(&inst.p).unwrap();
            let alpha: Vec<f64> = (0..d).map(|i| if i % 3 == 0 { 0.2 * (i as f64).sin() } else { 0.0 }).collect();
            let grad = crate::problems::grad_f(&inst, &alpha);
            let l = crate::geometry::l1_smooth(&inst.p);
            Fixture { inst, kernel, alpha, grad, l }
        }

        fn prob(&self) -> InnerProblem<'_> {
            InnerProblem {
                p: &self.inst.p,
                kernel: &self.kernel,
                alpha: &self.alpha,
                grad: &self.grad,
                lambda: self.inst.lambda,
                l: self.l,
            }
        }
    }

    #[test]
    fn kernel_projection_is_weighted_least_squares() {
        for &(n, d) in &[(4, 9), (9, 4)] {
            let f = Fixture::new(n, d, 1, 0.1);
            let gamma: Vec<f64> = (0..d).map(|i| 0.1 + (i as f64 * 0.7).cos().abs()).collect();
            let v: Vec<f64> = (0..d).map(|i| (i as f64).sin()).collect();
            let k = f.kernel.project(&f.inst.p, &gamma, &v).unwrap();
            assert!(norm_inf(&f.inst.p.matvec(&k)) < 1e-10);
            if d > n {
                // the weighted residual is orthogonal to the kernel
                let q = qr_kernel_basis(&f.inst.p).unwrap();
                let r: Vec<f64> = (0..d).map(|i| (k[i] - v[i]) / gamma[i]).collect();
                assert!(norm_inf(&q.tmatvec(&r)) < 1e-9);
                let basis = KernelSolver::Basis(q).project(&f.inst.p, &gamma, &v).unwrap();
                assert!(norm_inf(&crate::linalg::sub(&basis, &k)) < 1e-9);
            } else {
                assert!(k.iter().all(|x| *x == 0.0));
            }
        }
    }

    #[test]
    fn altmin_first_cycle_decreases() {
        let f = Fixture::new(6, 15, 2, 0.05);
        let prob = f.prob();
        let mut s = UltimateState::at(&f.alpha);
        let before = inner_objective(&prob, &s.eta, &s.k);
        altmin_inner(&prob, &mut s).unwrap();
        assert!(inner_objective(&prob, &s.eta, &s.k) < before);
    }

    #[test]
    fn altmin_is_monotone_and_reaches_a_fixed_point() {
        let f = Fixture::new(6, 15, 3, 0.05);
        let prob = f.prob();
        let mut s = UltimateState::at(&f.alpha);
        altmin_inner(&prob, &mut s).unwrap();
        let mut prev = inner_objective(&prob, &s.eta, &s.k);
        for _ in 0..3000 {
            altmin_inner(&prob, &mut s).unwrap();
            let v = inner_objective(&prob, &s.eta, &s.k);
            assert!(v <= prev + 1e-10);
            prev = v;
        }
        let before = s.clone();
        altmin_inner(&prob, &mut s).unwrap();
        assert!(norm_inf(&crate::linalg::sub(&s.eta, &before.eta)) < 1e-9);
        assert!(norm_inf(&crate::linalg::sub(&s.k, &before.k)) < 1e-9);
    }

    #[test]
    fn empty_kernel_skips_the_kernel_update() {
        let f = Fixture::new(15, 5, 4, 0.05);
        let prob = f.prob();
        let mut s = UltimateState::at(&f.alpha);
        for _ in 0..5 {
            altmin_inner(&prob, &mut s).unwrap();
            assert!(s.k.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn arbcd_eta_only_is_monotone_and_deterministic() {
        let f = Fixture::new(6, 15, 5, 0.05);
        let prob = f.prob();
        let run = |p_eta: f64, seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = UltimateState::at(&f.alpha);
            let mut vals = Vec::new();
            for _ in 0..200 {
                arbcd_inner(&prob, &mut s, p_eta, &mut rng).unwrap();
                vals.push(inner_objective(&prob, &s.eta, &s.k));
            }
            vals
        };
        let v = run(1.0, 0);
        for w in v.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
        assert_eq!(run(0.5, 9), run(0.5, 9));
    }

    #[test]
    fn arbcd_decreases_on_average() {
        let f = Fixture::new(10, 20, 6, 0.05);
        let prob = f.prob();
        let runs = 100;
        let steps = 40;
        let mut mean = vec![0.0; steps + 1];
        for seed in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = UltimateState::at(&f.alpha);
            mean[0] += inner_objective(&prob, &s.eta, &s.k);
            for t in 1..=steps {
                arbcd_inner(&prob, &mut s, 0.5, &mut rng).unwrap();
                mean[t] += inner_objective(&prob, &s.eta, &s.k);
            }
        }
        for w in mean.windows(2) {
            assert!(w[1] <= w[0] + 1e-8 * runs as f64);
        }
        assert!(mean[steps] < mean[0]);
    }

    #[test]
    fn certificate_is_a_lower_bound() {
        for &(n, d, lambda) in &[(6, 15, 0.05), (6, 15, 0.0), (15, 5, 0.1)] {
            let f = Fixture::new(n, d, 7, lambda);
            let prob = f.prob();
            let mut s = UltimateState::at(&f.alpha);
            for _ in 0..500 {
                altmin_inner(&prob, &mut s).unwrap();
            }
            let mut lows = vec![inner_certificate(&prob, &s).unwrap()];
            let mut st = PdhgState {
                u: vec![0.0; d],
                eta: f.alpha.clone(),
                nu: vec![0.0; n],
            };
            let pa = f.inst.p.matvec(&f.alpha);
            let norm_k = std::f64::consts::SQRT_2 * crate::linalg::sigma_max(&f.inst.p).unwrap();
            for _ in 0..20000 {
                pdhg_inner(&prob, &mut st, &pa, 0.99 / norm_k, 0.99 / norm_k);
            }
            lows.push(st.certificate(&prob));
            let (eta, k) = st.recover(&prob);
            let val = inner_objective(&prob, &eta, &k);
            // random feasible points never beat either bound
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..200 {
                let eta: Vec<f64> = (0..d).map(|i| eta[i] + 0.05 * (rng.random::<f64>() - 0.5)).collect();
                let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
                let k = f.kernel.project_orthogonal(&f.inst.p, &v);
                let j = inner_objective(&prob, &eta, &k);
                assert!(lows.iter().all(|low| *low <= j + 1e-12));
            }
            assert!(lows.iter().all(|low| *low <= val + 1e-12));
            if lambda > 0.0 {
                assert!(val - lows[1] < 1e-8, "{n}x{d}: gap {}", val - lows[1]);
            }
        }
    }

    #[test]
    fn prox_of_squared_l1_matches_scan() {
        let v = [1.5, -0.4, 0.9, 0.0];
        let c = 0.7;
        let u = prox_sq_l1(&v, c);
        let obj = |u: &[f64]| 0.5 * c * norm1(u).powi(2) + 0.5 * u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let base = obj(&u);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let p: Vec<f64> = u.iter().map(|x| x + 0.1 * (rng.random::<f64>() - 0.5)).collect();
            assert!(obj(&p) >= base - 1e-14);
        }
        assert!(prox_sq_l1(&[0.0; 3], 1.0).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn pdhg_reaches_the_certified_optimum() {
        let f = Fixture::new(8, 40, 10, 0.1);
        let prob = f.prob();
        let cfg = InnerConfig {
            solver: InnerSolver::Pdhg,
            cap: 200_000,
            eps: 1e-9,
            p_eta: 0.5,
        };
        let out = ultimate_step(&prob, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(out.eps_hat <= 1e-9);
        let rmp = rmp_step_raw(&f.alpha, &f.grad, f.inst.lambda, f.l);
        let rmp_val = super::super::rmp_objective(&f.alpha, &f.grad, f.inst.lambda, f.l, &rmp.beta);
        assert!(out.objective <= rmp_val + 1e-12);
        // the alternating solvers never do worse than their RMP warm start
        for solver in [InnerSolver::Altmin, InnerSolver::Arbcd] {
            let cfg = InnerConfig { solver, cap: 300, ..cfg };
            let o = ultimate_step(&prob, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
            assert!(o.objective <= rmp_val + 1e-12);
            assert!(o.objective >= out.objective - out.eps_hat - 1e-12);
        }
    }

    #[test]
    fn empty_kernel_matches_rmp_subproblem() {
        let f = Fixture::new(20, 5, 8, 0.05);
        let prob = f.prob();
        let cfg = InnerConfig {
            solver: InnerSolver::Altmin,
            cap: 500,
            eps: 1e-12,
            p_eta: 0.5,
        };
        let out = ultimate_step(&prob, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let rmp = rmp_step_raw(&f.alpha, &f.grad, f.inst.lambda, f.l);
        let target = super::super::rmp_objective(&f.alpha, &f.grad, f.inst.lambda, f.l, &rmp.beta);
        assert!((out.objective - target).abs() <= 1e-6);
        assert!(out.eps_hat <= 1e-6);
    }

    #[test]
    fn least_squares_solution_is_fixed() {
        let i = inst(6, 6, 9, 0.0);
        let (_, opt) = crate::problems::reference_optimum(&i, 1e-12).unwrap();
        let kernel = KernelSolver::new(&i.p).unwrap();
        let grad = crate::problems::grad_f(&i, &opt);
        let prob = InnerProblem {
            p: &i.p,
            kernel: &kernel,
            alpha: &opt,
            grad: &grad,
            lambda: 0.0,
            l: crate::geometry::l1_smooth(&i.p),
        };
        let cfg = InnerConfig {
            solver: InnerSolver::Altmin,
            cap: 50,
            eps: 1e-12,
            p_eta: 0.5,
        };
        let out = ultimate_step(&prob, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(norm_inf(&crate::linalg::sub(&out.alpha, &opt)) < 1e-8);
    }
}
