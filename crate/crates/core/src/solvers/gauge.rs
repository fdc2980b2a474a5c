//! The gauge of the signed columns of `P`, `γ_P(x) = min{‖ν‖₁ : Pν = x}`,
//! and its dual, the support function of the same atom set.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm1, norm2, norm_inf, soft_threshold, Cholesky, Matrix};

const GAUGE_MAX_ITER: usize = 200_000;

/// Projection onto the affine set `{ν : Pν = x}`.
struct AffineProjector<'a> {
    p: &'a Matrix,
    chol: Option<Cholesky>,
}

impl<'a> AffineProjector<'a> {
    fn new(p: &'a Matrix) -> Self {
        AffineProjector {
            p,
            chol: Cholesky::new(&p.outer_gram()).ok(),
        }
    }

    /// Least-squares `ζ` with `Pᵀζ ≈ v`.
    fn lift(&self, v: &[f64]) -> Result<Vec<f64>> {
        let pv = self.p.matvec(v);
        match &self.chol {
            Some(c) => Ok(c.solve(&pv)),
            None => Ok(crate::linalg::min_norm_least_squares(&self.p.transpose(), v)?.0),
        }
    }

    fn project(&self, w: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let res: Vec<f64> = self.p.matvec(w).iter().zip(x).map(|(a, b)| a - b).collect();
        let delta = match &self.chol {
            Some(c) => self.p.tmatvec(&c.solve(&res)),
            None => crate::linalg::min_norm_least_squares(self.p, &res)?.0,
        };
        Ok(w.iter().zip(&delta).map(|(a, b)| a - b).collect())
    }
}

/// `γ_P(x)` to absolute accuracy `tol`, by ADMM on basis pursuit. The
/// returned value is `‖ν‖₁` of an exactly feasible `ν`, stopped once a dual
/// point certifies it within `tol`.
pub fn gauge_value(p: &Matrix, x: &[f64], tol: f64) -> Result<f64> {
    if x.len() != p.rows() {
        return Err(Error::Dimension(format!("x has {} entries, P has {} rows", x.len(), p.rows())));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be > 0".into()));
    }
    let (nu0, rss) = crate::linalg::min_norm_least_squares(p, x)?;
    if rss.sqrt() > tol * norm2(x).max(1.0) {
        return Err(Error::Infeasible(format!(
            "x is not in the range of P (residual {:e})",
            rss.sqrt()
        )));
    }
    if norm_inf(x) == 0.0 {
        return Ok(0.0);
    }
    let proj = AffineProjector::new(p);
    let rho = 1.0;
    let d = p.cols();
    let mut z = nu0.clone();
    let mut u = vec![0.0; d];
    let mut best = norm1(&nu0);
    for it in 0..GAUGE_MAX_ITER {
        let w: Vec<f64> = z.iter().zip(&u).map(|(a, b)| a - b).collect();
        let nu = proj.project(&w, x)?;
        for i in 0..d {
            z[i] = soft_threshold(nu[i] + u[i], 1.0 / rho);
            u[i] += nu[i] - z[i];
        }
        best = best.min(norm1(&nu));
        if it % 20 == 19 {
            let y: Vec<f64> = u.iter().map(|v| rho * v).collect();
            let zeta = proj.lift(&y)?;
            let s = norm_inf(&p.tmatvec(&zeta)).max(1.0);
            let lower = dot(&zeta, x) / s;
            if best - lower <= tol {
                return Ok(best);
            }
        }
    }
    Err(Error::IterationCap {
        what: "gauge basis pursuit",
        best_gap: f64::NAN,
    })
}

/// `σ_P(z) = max over atoms ±P_i of ⟨a, z⟩`, by enumerating the atoms.
pub fn support_function(p: &Matrix, z: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..p.cols() {
        let v = dot(&p.col(i), z);
        best = best.max(v).max(-v);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        Matrix::from_vec(n, d, data).unwrap()
    }

    #[test]
    fn identity_is_l1() {
        let x = [1.0, -2.0, 0.5];
        let v = gauge_value(&Matrix::identity(3), &x, 1e-9).unwrap();
        assert!((v - 3.5).abs() < 1e-8);
    }

    #[test]
    fn two_equal_atoms() {
        let p = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let v = gauge_value(&p, &[2.0], 1e-9).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
        // ν = (t, 1 − t) scan
        let scan = (0..=1000)
            .map(|k| {
                let t = -2.0 + 4.0 * k as f64 / 1000.0;
                t.abs() + (1.0 - t).abs()
            })
            .fold(f64::INFINITY, f64::min);
        let half = gauge_value(&p, &[1.0], 1e-9).unwrap();
        assert!((half - scan).abs() < 1e-8);
    }

    #[test]
    fn atom_has_gauge_at_most_one() {
        let p = gaussian(5, 12, 3);
        for i in 0..12 {
            let v = gauge_value(&p, &p.col(i), 1e-8).unwrap();
            assert!(v <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn outside_range_is_infeasible() {
        let p = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(gauge_value(&p, &[1.0, 0.0], 1e-8), Err(Error::Infeasible(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn norm_axioms(xs in prop::collection::vec(-2.0..2.0f64, 10), t in -3.0..3.0f64) {
            let p = gaussian(5, 12, 11);
            let (x, y) = xs.split_at(5);
            let gx = gauge_value(&p, x, 1e-8).unwrap();
            let gy = gauge_value(&p, y, 1e-8).unwrap();
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            prop_assert!((gauge_value(&p, &tx, 1e-8).unwrap() - t.abs() * gx).abs() <= 1e-6);
            prop_assert!(gauge_value(&p, &xy, 1e-8).unwrap() <= gx + gy + 1e-6);
            // ⟨x, z⟩ ≤ γ(x)·σ(z)
            let sz = support_function(&p, y);
            prop_assert!(dot(x, y) <= gx * sz + 1e-6);
            prop_assert!((sz - norm_inf(&p.tmatvec(y))).abs() <= 1e-12);
        }
    }
}
