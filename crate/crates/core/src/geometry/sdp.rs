//! SDP relaxations of the ℓ1 strong convexity and Łojasiewicz constants.
//!
//! Both solvers return a certified bound on the relaxation value, not just an
//! approximate one, so the reported constants are true lower bounds on μ₁ and
//! μ₁,L whether or not the iteration converged.

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, sym_eig_warm, Matrix, SymEigen};

use super::EIG_FLOOR;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// ADMM penalty.
    pub rho: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tol: 1e-6,
            max_iter: 20_000,
            rho: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal feasible point.
    pub x: Matrix,
    /// Objective value at `x`.
    pub objective: f64,
    /// Certified bound on the optimal value from a dual feasible point: an
    /// upper bound for the maximization, a lower bound for the minimization.
    pub bound: f64,
    pub primal_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Max-Cut relaxation `max Tr(CX)` s.t. `X ⪰ 0`, `diag(X) ≤ 1` with
/// `C = (PᵀP)⁻¹`, solved by ADMM on the scaled problem.
///
/// Returns `μ̃₁ = 1/(n·bound)`, a lower bound on μ₁.
pub fn sdp_mu1(p: &Matrix, opts: &SdpOptions) -> Result<(f64, SdpSolution)> {
    check_options(opts)?;
    let (n, d) = p.shape();
    if n < d {
        return Err(Error::Singular("PᵀP"));
    }
    let gram = sym_eig(&p.gram())?;
    if gram.max() <= 0.0 || gram.min() <= EIG_FLOOR * gram.max() {
        return Err(Error::Singular("PᵀP"));
    }
    let c = gram.reconstruct_with(|l| 1.0 / l);
    let c_scale = 1.0 / gram.min();
    let ch = c.scale(1.0 / c_scale);

    let rho = opts.rho;
    let mut x = Matrix::identity(d);
    let mut y = Matrix::identity(d);
    let mut u = Matrix::zeros(d, d);
    let mut basis = gram.vectors.clone();
    let mut iterations = 0;
    let mut converged = false;
    let mut best_bound = f64::INFINITY;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut v = y.sub(&u).add(&ch.scale(1.0 / rho));
        v.symmetrize();
        let e = sym_eig_warm(&v, &basis)?;
        x = e.reconstruct_with(|l| l.max(0.0));
        basis = e.vectors;

        let y_old = std::mem::replace(&mut y, x.add(&u));
        for i in 0..d {
            y[(i, i)] = y[(i, i)].min(1.0);
        }
        let r = x.sub(&y);
        u = u.add(&r);
        let primal_residual = r.frobenius_norm();
        let dual_residual = rho * y.sub(&y_old).frobenius_norm();

        if primal_residual <= opts.tol && dual_residual <= opts.tol {
            converged = true;
            break;
        }
        if iterations % 50 == 0 {
            best_bound = best_bound.min(maxcut_dual_bound(&ch, &u, rho)?);
            let obj = maxcut_primal(&ch, &x).1;
            if best_bound - obj <= opts.tol * best_bound.abs().max(1.0) {
                converged = true;
                break;
            }
        }
    }
    best_bound = best_bound.min(maxcut_dual_bound(&ch, &u, rho)?);
    let (xf, obj) = maxcut_primal(&ch, &x);
    let residual = xf.diag().iter().fold(0.0_f64, |m, &v| m.max(v - 1.0));
    let bound = best_bound * c_scale;
    let sol = SdpSolution {
        x: xf,
        objective: obj * c_scale,
        bound,
        primal_residual: residual.max(0.0),
        iterations,
        converged,
    };
    Ok((1.0 / (n as f64 * bound), sol))
}

/// Scales `X` onto the constraint set and evaluates `Tr(CX)`.
fn maxcut_primal(c: &Matrix, x: &Matrix) -> (Matrix, f64) {
    let m = x.diag().into_iter().fold(1.0_f64, f64::max);
    let xf = x.scale(1.0 / m);
    let v = c.frob_dot(&xf);
    (xf, v)
}

/// Dual of the Max-Cut SDP: `min Σy` s.t. `Diag(y) ⪰ C`, `y ≥ 0`. The ADMM
/// multiplier gives `y`; a uniform shift by `λmax(C − Diag y)` restores exact
/// feasibility.
fn maxcut_dual_bound(c: &Matrix, u: &Matrix, rho: f64) -> Result<f64> {
    let d = c.rows();
    let mut y: Vec<f64> = (0..d).map(|i| (rho * u[(i, i)]).max(0.0)).collect();
    let mut s = c.clone();
    for i in 0..d {
        s[(i, i)] -= y[i];
    }
    let shift = sym_eig(&s)?.max();
    if shift > 0.0 {
        y.iter_mut().for_each(|v| *v += shift);
    }
    Ok(y.iter().sum())
}

/// Łojasiewicz relaxation.
///
/// With `M = PXPᵀ` the relaxation reduces exactly to
/// `min_{M ⪰ 0, Tr M = 1} max_i p_iᵀ M p_i` over `n × n` matrices, whose dual is
/// `max_{w ∈ Δ} λmin(P Diag(w) Pᵀ)`. The saddle point is solved by mirror-prox
/// with entropic setups on the spectraplex and the simplex. The logits of the
/// matrix iterate are `−S·W(w̄)`, so every eigendecomposition also yields a dual
/// certificate.
///
/// Returns `μ̃₁,L = bound/n`, a lower bound on μ₁,L.
pub fn sdp_mu1l(p: &Matrix, opts: &SdpOptions) -> Result<(f64, SdpSolution)> {
    check_options(opts)?;
    let (n, d) = p.shape();
    if d < n {
        return Err(Error::Singular("PPᵀ"));
    }
    let outer = sym_eig(&p.outer_gram())?;
    if outer.max() <= 0.0 || outer.min() <= EIG_FLOOR * outer.max() {
        return Err(Error::Singular("PPᵀ"));
    }
    let scale = p.column_sq_norms().into_iter().fold(0.0, f64::max);
    let pn = p.scale(1.0 / scale.sqrt());

    // uniform weights and M = I/n are the starting certificates
    let mut lower = outer.min() / scale / d as f64;
    let mut upper = 1.0 / n as f64;
    let mut m_best = Matrix::identity(n).scale(1.0 / n as f64);

    let mut y_logits = Matrix::zeros(n, n);
    let mut m_cur = m_best.clone();
    let mut lse_cur = (n as f64).ln();
    let mut a_logits = vec![0.0; d];
    let mut w_cur = vec![1.0 / d as f64; d];
    let mut basis = Matrix::identity(n);

    let mut m_sum = Matrix::zeros(n, n);
    let mut s_total = 0.0;
    let mut gamma = 1.0;
    let mut iterations = 0;
    let mut converged = upper - lower <= opts.tol * upper;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let wz = pn.weighted_outer_gram(&w_cur);
        let gz = quad_forms(&pn, &m_cur);
        loop {
            let yh = y_logits.sub(&wz.scale(gamma));
            let (mh, lse_h, eh) = matrix_softmax(&yh, &basis)?;
            let ah: Vec<f64> = a_logits.iter().zip(&gz).map(|(a, g)| a + gamma * g).collect();
            let (wh, _) = softmax(&ah);
            let wh_mat = pn.weighted_outer_gram(&wh);
            let gh = quad_forms(&pn, &mh);

            let yn = y_logits.sub(&wh_mat.scale(gamma));
            let (mn, lse_n, en) = matrix_softmax(&yn, &eh.vectors)?;
            let an: Vec<f64> = a_logits.iter().zip(&gh).map(|(a, g)| a + gamma * g).collect();
            let (wn, _) = softmax(&an);

            // accept when γ⟨F(z½) − F(z), z½ − z⁺⟩ ≤ KL(z½‖z) + KL(z⁺‖z½)
            let dw = wh_mat.sub(&wz);
            let lhs = gamma
                * (dw.frob_dot(&mh.sub(&mn))
                    - gh.iter()
                        .zip(&gz)
                        .zip(wh.iter().zip(&wn))
                        .map(|((a, b), (c, e))| (a - b) * (c - e))
                        .sum::<f64>());
            let kl_m = -gamma * mh.frob_dot(&wz) - lse_h + lse_cur
                - gamma * mn.frob_dot(&dw)
                - lse_n
                + lse_h;
            let kl_w = kl_simplex(&wh, &w_cur) + kl_simplex(&wn, &wh);
            if lhs <= kl_m + kl_w + 1e-12 || gamma < 1e-8 {
                m_sum = m_sum.add(&mh.scale(gamma));
                s_total += gamma;
                y_logits = yn;
                m_cur = mn;
                lse_cur = lse_n;
                a_logits = an;
                w_cur = wn;
                basis = en.vectors.clone();
                // Y = −S·W(w̄) and a = S·g(M̄)
                let cand_lower = -en.max() / s_total;
                lower = lower.max(cand_lower);
                let cand_upper = a_logits.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) / s_total;
                if cand_upper < upper {
                    upper = cand_upper;
                    m_best = m_sum.scale(1.0 / s_total);
                }
                gamma *= 1.5;
                break;
            }
            gamma *= 0.5;
        }
        converged = upper - lower <= opts.tol * upper;
    }

    let trace = m_best.trace();
    let sol = SdpSolution {
        objective: upper * scale,
        bound: lower * scale,
        primal_residual: (trace - 1.0).abs(),
        x: m_best,
        iterations,
        converged,
    };
    Ok((lower * scale / n as f64, sol))
}

fn check_options(opts: &SdpOptions) -> Result<()> {
    if !(opts.tol > 0.0) || !(opts.rho > 0.0) {
        return Err(Error::InvalidArgument("sdp tol and rho must be > 0".into()));
    }
    Ok(())
}

/// `(p_iᵀ M p_i)_i` for the columns of `p`.
fn quad_forms(p: &Matrix, m: &Matrix) -> Vec<f64> {
    let mp = m.matmul(p);
    let d = p.cols();
    let mut out = vec![0.0; d];
    for r in 0..p.rows() {
        let pr = p.row(r);
        let mr = mp.row(r);
        for i in 0..d {
            out[i] += pr[i] * mr[i];
        }
    }
    out
}

/// `exp(Y)/Tr exp(Y)`, its log-partition `log Tr exp(Y)` and the
/// eigendecomposition of `Y`.
fn matrix_softmax(y: &Matrix, basis: &Matrix) -> Result<(Matrix, f64, SymEigen)> {
    let e = sym_eig_warm(y, basis)?;
    let top = e.max();
    let z: f64 = e.values.iter().map(|l| (l - top).exp()).sum();
    let m = e.reconstruct_with(|l| (l - top).exp() / z);
    Ok((m, top + z.ln(), e))
}

fn softmax(a: &[f64]) -> (Vec<f64>, f64) {
    let top = a.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let ex: Vec<f64> = a.iter().map(|v| (v - top).exp()).collect();
    let z: f64 = ex.iter().sum();
    (ex.iter().map(|v| v / z).collect(), top + z.ln())
}

fn kl_simplex(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).ln())
        .sum()
}
