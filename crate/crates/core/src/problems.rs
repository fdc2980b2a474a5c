//! Least-squares and LASSO instances, generators and objective evaluation.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::io::{read_matrix_csv, read_vector_csv};
use crate::linalg::{self, min_norm_least_squares, norm1, norm_inf, soft_threshold, Matrix};

/// Iteration cap of the proximal-gradient reference solver.
pub const REFERENCE_MAX_ITER: usize = 1_000_000;

/// `min_α (1/2n)‖Pα − y‖² + λ‖α‖₁`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub p: Matrix,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub alpha_star: Option<Vec<f64>>,
    pub noise_sigma: Option<f64>,
    pub seed: Option<u64>,
}

impl ProblemInstance {
    pub fn new(p: Matrix, y: Vec<f64>, lambda: f64) -> Result<Self> {
        if y.len() != p.rows() {
            return Err(Error::Dimension(format!(
                "{} targets for {} rows",
                y.len(),
                p.rows()
            )));
        }
        if p.rows() == 0 || p.cols() == 0 {
            return Err(Error::Dimension("empty design matrix".into()));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        if !p.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite data".into()));
        }
        Ok(ProblemInstance {
            p,
            y,
            lambda,
            alpha_star: None,
            noise_sigma: None,
            seed: None,
        })
    }

    pub fn n(&self) -> usize {
        self.p.rows()
    }

    pub fn d(&self) -> usize {
        self.p.cols()
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        let mut out = self.clone();
        out.lambda = lambda;
        Ok(out)
    }

    /// Residual `Pα − y`.
    pub fn residual(&self, alpha: &[f64]) -> Vec<f64> {
        let mut r = self.p.matvec(alpha);
        for (ri, yi) in r.iter_mut().zip(&self.y) {
            *ri -= yi;
        }
        r
    }

    /// `‖Pᵀy/n‖∞`, the smallest λ for which `α = 0` is optimal.
    pub fn lambda_max(&self) -> f64 {
        norm_inf(&self.p.tmatvec(&self.y)) / self.n() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub d: usize,
    pub sparsity: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidArgument("n and d must be >= 1".into()));
        }
        if self.sparsity > self.d {
            return Err(Error::InvalidArgument(format!(
                "sparsity {} exceeds d = {}",
                self.sparsity, self.d
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidArgument("noise sigma must be >= 0".into()));
        }
        Ok(())
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_vec(rows, cols, data).expect("sizes agree")
}

/// Gaussian design, sparse ±1 planted signal, Gaussian noise with standard
/// deviation `noise_sigma`. `lambda` is left at 0.
pub fn gen_synthetic(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p = gaussian_matrix(&mut rng, spec.n, spec.d);

    let mut positions = sample(&mut rng, spec.d, spec.sparsity).into_vec();
    positions.sort_unstable();
    let mut alpha_star = vec![0.0; spec.d];
    for &i in &positions {
        alpha_star[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }

    let mut y = p.matvec(&alpha_star);
    for yi in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *yi += spec.noise_sigma * e;
    }

    let mut inst = ProblemInstance::new(p, y, 0.0)?;
    inst.alpha_star = Some(alpha_star);
    inst.noise_sigma = Some(spec.noise_sigma);
    inst.seed = Some(spec.seed);
    Ok(inst)
}

/// ReLU random features: `P[j, i] = max(0, ⟨X[j, :], Θ[:, i]⟩)` with `Θ`
/// an `m × d` standard Gaussian matrix.
pub fn gen_random_features(x: &Matrix, d: usize, seed: u64) -> Result<Matrix> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = gaussian_matrix(&mut rng, x.cols(), d);
    let mut p = x.matmul(&theta);
    for v in p.as_mut_slice() {
        *v = v.max(0.0);
    }
    Ok(p)
}

/// Centers every column and scales it to unit sample variance. Columns with
/// variance below 1e-12 are only centered.
pub fn standardize_columns(p: &mut Matrix) {
    let (n, d) = p.shape();
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    for j in 0..d {
        let mean = (0..n).map(|i| p[(i, j)]).sum::<f64>() / n as f64;
        for i in 0..n {
            p[(i, j)] -= mean;
        }
        let var = (0..n).map(|i| p[(i, j)] * p[(i, j)]).sum::<f64>() / denom;
        if var >= 1e-12 {
            let s = var.sqrt();
            for i in 0..n {
                p[(i, j)] /= s;
            }
        }
    }
}

/// Loads `P` and `y` from CSV and standardizes the columns of `P`.
pub fn load_standardize(path_p: &Path, path_y: &Path) -> Result<ProblemInstance> {
    let mut p = read_matrix_csv(path_p)?;
    let y = read_vector_csv(path_y)?;
    standardize_columns(&mut p);
    ProblemInstance::new(p, y, 0.0)
}

/// Loads `P` and `y` from CSV as they are.
pub fn load_raw(path_p: &Path, path_y: &Path) -> Result<ProblemInstance> {
    let p = read_matrix_csv(path_p)?;
    let y = read_vector_csv(path_y)?;
    ProblemInstance::new(p, y, 0.0)
}

/// Returns `(F, G)` with `F = (1/2n)‖Pα − y‖²` and `G = F + λ‖α‖₁`.
pub fn objective(p: &ProblemInstance, alpha: &[f64]) -> (f64, f64) {
    let r = p.residual(alpha);
    let f = linalg::dot(&r, &r) / (2.0 * p.n() as f64);
    (f, f + p.lambda * norm1(alpha))
}

/// `(1/n)Pᵀ(Pα − y)`.
pub fn grad_f(p: &ProblemInstance, alpha: &[f64]) -> Vec<f64> {
    let r = p.residual(alpha);
    grad_from_residual(p, &r)
}

pub(crate) fn grad_from_residual(p: &ProblemInstance, r: &[f64]) -> Vec<f64> {
    let inv_n = 1.0 / p.n() as f64;
    let mut g = p.p.tmatvec(r);
    g.iter_mut().for_each(|v| *v *= inv_n);
    g
}

/// LASSO duality gap at `α`, given its residual. The dual point is the
/// residual scaled into the feasible set `‖Pᵀθ‖∞ ≤ λ`.
pub fn duality_gap(p: &ProblemInstance, alpha: &[f64], r: &[f64]) -> (f64, f64) {
    let n = p.n() as f64;
    let g = grad_from_residual(p, r);
    let primal = linalg::dot(r, r) / (2.0 * n) + p.lambda * norm1(alpha);
    let ginf = norm_inf(&g);
    let s = if ginf > p.lambda { p.lambda / ginf } else { 1.0 };
    // θ = s·r/n, D(θ) = −(n/2)‖θ‖² − ⟨θ, y⟩
    let rr = linalg::dot(r, r);
    let ry = linalg::dot(r, &p.y);
    let dual = -(s * s) * rr / (2.0 * n) - s * ry / n;
    (primal - dual, primal)
}

/// Reference optimal value and a minimizer.
///
/// For λ = 0 this is an orthogonal projection through QR. For λ > 0 it runs
/// accelerated proximal gradient with restarts and periodic polishing on the
/// current support until the duality gap is at most `tol`.
pub fn reference_optimum(p: &ProblemInstance, tol: f64) -> Result<(f64, Vec<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be > 0".into()));
    }
    if p.lambda == 0.0 {
        let (alpha, rss) = min_norm_least_squares(&p.p, &p.y)?;
        return Ok((rss / (2.0 * p.n() as f64), alpha));
    }
    lasso_reference(p, tol)
}

fn lasso_reference(p: &ProblemInstance, tol: f64) -> Result<(f64, Vec<f64>)> {
    let d = p.d();
    if p.lambda >= p.lambda_max() {
        let zero = vec![0.0; d];
        let (_, g) = objective(p, &zero);
        return Ok((g, zero));
    }
    let l = crate::geometry::l2_smooth(&p.p)?;
    if l == 0.0 {
        let zero = vec![0.0; d];
        return Ok((objective(p, &zero).1, zero));
    }
    let step = 1.0 / l;
    let thr = p.lambda * step;

    let mut x = vec![0.0; d];
    let mut x_prev = x.clone();
    let mut v = x.clone();
    let mut t = 1.0_f64;
    let mut best = (f64::INFINITY, x.clone(), f64::INFINITY);
    let mut last_support: Vec<usize> = Vec::new();
    let mut stable = 0usize;
    let mut prev_obj = f64::INFINITY;

    for it in 0..REFERENCE_MAX_ITER {
        let r = p.residual(&x);
        let (gap, obj) = duality_gap(p, &x, &r);
        if obj < best.0 || (obj == best.0 && gap < best.2) {
            best = (obj, x.clone(), gap);
        }
        if gap <= tol {
            return Ok((obj, x));
        }

        let support: Vec<usize> = (0..d).filter(|&i| x[i] != 0.0).collect();
        if support == last_support {
            stable += 1;
        } else {
            stable = 0;
            last_support = support;
        }
        if stable >= 20 && it % 20 == 0 && !last_support.is_empty() {
            if let Some(polished) = polish(p, &x, &last_support) {
                let rp = p.residual(&polished);
                let (gp, op) = duality_gap(p, &polished, &rp);
                if gp <= tol {
                    return Ok((op, polished));
                }
                if op < best.0 {
                    best = (op, polished, gp);
                }
            }
        }

        // momentum restart on objective increase
        if obj > prev_obj {
            t = 1.0;
            v.copy_from_slice(&x);
        }
        prev_obj = obj;

        let rv = p.residual(&v);
        let gv = grad_from_residual(p, &rv);
        x_prev.copy_from_slice(&x);
        for i in 0..d {
            x[i] = soft_threshold(v[i] - step * gv[i], thr);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for i in 0..d {
            v[i] = x[i] + beta * (x[i] - x_prev[i]);
        }
        t = t_next;
    }
    Err(Error::IterationCap {
        what: "lasso reference solver",
        best_gap: best.2,
    })
}

/// Solves the optimality conditions on a fixed support with fixed signs,
/// `P_Sᵀ(P_S α_S − y)/n + λ s = 0`. Returns `None` if the system is singular
/// or a sign flips.
fn polish(p: &ProblemInstance, x: &[f64], support: &[usize]) -> Option<Vec<f64>> {
    let n = p.n() as f64;
    let ps = p.p.select_columns(support);
    let gram = ps.gram();
    let chol = linalg::Cholesky::new(&gram).ok()?;
    let pty = ps.tmatvec(&p.y);
    let rhs: Vec<f64> = support
        .iter()
        .zip(&pty)
        .map(|(&i, &b)| b - n * p.lambda * x[i].signum())
        .collect();
    let sol = chol.solve(&rhs);
    let mut out = vec![0.0; p.d()];
    for (k, &i) in support.iter().enumerate() {
        if sol[k].signum() != x[i].signum() || !sol[k].is_finite() {
            return None;
        }
        out[i] = sol[k];
    }
    Some(out)
}
