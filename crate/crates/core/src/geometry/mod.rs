//! Smoothness, strong convexity and Łojasiewicz constants of
//! `F(α) = (1/2n)‖Pα − y‖²` in the ℓ2 and ℓ1 geometries.
//!
//! Closed forms are exact. The ℓ1 constants have no closed form and are
//! bracketed by SDP relaxations, deterministic bounds and the leading terms of
//! their concentration around σ², σ²/d and σ²/n for random designs.

mod sdp;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{sym_eig, Matrix};

pub use sdp::{sdp_mu1, sdp_mu1l, SdpOptions, SdpSolution};

/// Eigenvalues below this fraction of the largest are treated as zero when
/// inverting a Gram matrix.
pub const EIG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub l1_smooth: f64,
    pub l2_smooth: f64,
    pub mu2: f64,
    pub mu2_loja: f64,
}

/// `λ(PᵀP)` extremes computed on whichever Gram matrix is smaller.
/// Returns `(λmin(PᵀP), λmax(PᵀP), λmin(PPᵀ))`.
fn gram_extremes(p: &Matrix) -> Result<(f64, f64, f64)> {
    let (n, d) = p.shape();
    if n >= d {
        let e = sym_eig(&p.gram())?;
        let lo = e.min().max(0.0);
        let loja = if n == d { lo } else { 0.0 };
        Ok((lo, e.max().max(0.0), loja))
    } else {
        let e = sym_eig(&p.outer_gram())?;
        Ok((0.0, e.max().max(0.0), e.min().max(0.0)))
    }
}

pub fn l1_smooth(p: &Matrix) -> f64 {
    let n = p.rows() as f64;
    p.column_sq_norms().into_iter().fold(0.0, f64::max) / n
}

pub fn l2_smooth(p: &Matrix) -> Result<f64> {
    Ok(gram_extremes(p)?.1 / p.rows() as f64)
}

pub fn closed_form_constants(p: &Matrix) -> Result<ClosedForm> {
    let n = p.rows() as f64;
    let (lo, hi, loja) = gram_extremes(p)?;
    Ok(ClosedForm {
        l1_smooth: l1_smooth(p),
        l2_smooth: hi / n,
        mu2: lo / n,
        mu2_loja: loja / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetBounds {
    pub mu1_lo: f64,
    pub mu1_hi: f64,
    pub mu1l_lo: f64,
    pub mu1l_hi: f64,
}

pub fn det_bounds(p: &Matrix) -> Result<DetBounds> {
    let (n, d) = p.shape();
    let (nf, df) = (n as f64, d as f64);
    let (lo, _, loja) = gram_extremes(p)?;
    // 𝟙ᵀPᵀP𝟙 = ‖P𝟙‖²
    let row_sums: Vec<f64> = (0..n).map(|i| p.row(i).iter().sum()).collect();
    let ones_quad: f64 = row_sums.iter().map(|v| v * v).sum();
    Ok(DetBounds {
        mu1_lo: lo / (nf * df),
        mu1_hi: ones_quad / (nf * df * df),
        mu1l_lo: loja / (nf * df),
        mu1l_hi: l1_smooth(p) / nf,
    })
}

/// Absolute constants of the subgaussian tail bounds. They have no known
/// values, so tail intervals are only produced when the caller supplies them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub k: f64,
    /// Deviation parameter `t`.
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIntervals {
    pub l1: (f64, f64),
    pub mu1: (f64, f64),
    pub mu1l: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concentration {
    pub conc_l1: f64,
    pub conc_mu1: f64,
    pub conc_mu1l: f64,
    pub rate_gscd_under: f64,
    pub rate_gscd_over: f64,
    pub rate_gd_under: f64,
    pub rate_gd_over: f64,
    pub tails: Option<TailIntervals>,
}

pub fn concentration_estimates(
    n: usize,
    d: usize,
    sigma: f64,
    tails: Option<TailConstants>,
) -> Concentration {
    let (nf, df) = (n as f64, d as f64);
    let s2 = sigma * sigma;
    let tails = tails.map(|tc| {
        let k2 = tc.k * tc.k;
        let sq = |v: f64| v.max(0.0).powi(2);
        let log_term = 2.0 * k2 * (tc.c1 * df.ln() / nf).sqrt();
        TailIntervals {
            l1: (
                s2 * sq(1.0 + tc.c2 * k2 / nf.sqrt() - tc.t),
                s2 * sq(1.0 + log_term + tc.t),
            ),
            mu1: (
                s2 / df * sq(1.0 - tc.c3 * k2 * ((df / nf).sqrt() + tc.t / nf.sqrt())),
                s2 / df * sq(1.0 + tc.c3 * k2 * ((1.0 / nf).sqrt() + tc.t / (df * nf).sqrt())),
            ),
            mu1l: (
                s2 / nf * sq(1.0 - tc.c4 * k2 * ((nf / df).sqrt() + tc.t / df.sqrt())),
                s2 / nf * sq(1.0 + log_term + tc.t),
            ),
        }
    });
    Concentration {
        conc_l1: s2,
        conc_mu1: s2 / df,
        conc_mu1l: s2 / nf,
        rate_gscd_under: 1.0 - 1.0 / df,
        rate_gscd_over: 1.0 - 1.0 / nf,
        rate_gd_under: (4.0 * (df / nf).sqrt()).min(1.0),
        rate_gd_over: (4.0 * (nf / df).sqrt()).min(1.0),
        tails,
    }
}

/// Almost-sure limits of the extreme eigenvalues of `PᵀP/n` when `d/n → r`.
pub fn mp_limits(r: f64, sigma2: f64) -> (f64, f64) {
    let s = r.sqrt();
    (sigma2 * (1.0 - s).powi(2), sigma2 * (1.0 + s).powi(2))
}

/// Everything the estimator knows about one design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConstants {
    pub l1_smooth: f64,
    pub l2_smooth: f64,
    pub mu2: f64,
    pub mu2_loja: f64,
    pub mu1_sdp: Option<f64>,
    pub mu1_sdp_scaled: Option<f64>,
    pub mu1l_sdp: Option<f64>,
    pub mu1_det_lo: f64,
    pub mu1_det_hi: f64,
    pub mu1l_det_lo: f64,
    pub mu1l_det_hi: f64,
    pub concentration: Option<Concentration>,
    pub mp_lambda_min: f64,
    pub mp_lambda_max: f64,
    pub sdp_converged: Option<bool>,
    pub sdp_iterations: Option<usize>,
}

impl GeometryConstants {
    /// Best certified lower bound on the ℓ1 strong convexity / Łojasiewicz
    /// constant, falling back to the deterministic bounds.
    pub fn mu1_certified(&self) -> f64 {
        let sdp = self.mu1_sdp.unwrap_or(0.0).max(self.mu1l_sdp.unwrap_or(0.0));
        sdp.max(self.mu1_det_lo).max(self.mu1l_det_lo)
    }

    pub fn mu2_certified(&self) -> f64 {
        self.mu2.max(self.mu2_loja)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EstimateOptions {
    /// Solve the SDP relaxations that apply to the instance.
    pub sdp: bool,
    pub sdp_options: SdpOptions,
    /// Entry standard deviation for the concentration targets.
    pub sigma: Option<f64>,
    pub tails: Option<TailConstants>,
}

pub fn estimate(p: &Matrix, opts: &EstimateOptions) -> Result<GeometryConstants> {
    let (n, d) = p.shape();
    let cf = closed_form_constants(p)?;
    let det = det_bounds(p)?;
    let sigma2 = opts.sigma.map_or(1.0, |s| s * s);
    let (mp_lo, mp_hi) = mp_limits(d as f64 / n as f64, sigma2);

    let mut out = GeometryConstants {
        l1_smooth: cf.l1_smooth,
        l2_smooth: cf.l2_smooth,
        mu2: cf.mu2,
        mu2_loja: cf.mu2_loja,
        mu1_sdp: None,
        mu1_sdp_scaled: None,
        mu1l_sdp: None,
        mu1_det_lo: det.mu1_lo,
        mu1_det_hi: det.mu1_hi,
        mu1l_det_lo: det.mu1l_lo,
        mu1l_det_hi: det.mu1l_hi,
        concentration: opts.sigma.map(|s| concentration_estimates(n, d, s, opts.tails)),
        mp_lambda_min: mp_lo,
        mp_lambda_max: mp_hi,
        sdp_converged: None,
        sdp_iterations: None,
    };

    if opts.sdp {
        let mut converged = true;
        let mut iterations = 0;
        if n >= d && cf.mu2 > EIG_FLOOR * cf.l2_smooth {
            let (v, sol) = sdp_mu1(p, &opts.sdp_options)?;
            out.mu1_sdp = Some(v);
            out.mu1_sdp_scaled = Some(v * std::f64::consts::FRAC_PI_2);
            converged &= sol.converged;
            iterations += sol.iterations;
        }
        if d >= n && cf.mu2_loja > EIG_FLOOR * cf.l2_smooth {
            let (v, sol) = sdp_mu1l(p, &opts.sdp_options)?;
            out.mu1l_sdp = Some(v);
            converged &= sol.converged;
            iterations += sol.iterations;
        }
        out.sdp_converged = Some(converged);
        out.sdp_iterations = Some(iterations);
    }
    Ok(out)
}

/// The estimate report, serialized with its keys in the documented order.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub d: usize,
    pub lambda: Option<f64>,
    pub l1_smooth: f64,
    pub l2_smooth: f64,
    pub mu2: f64,
    pub mu2_loja: f64,
    pub mu1_sdp: Option<f64>,
    pub mu1_sdp_scaled: Option<f64>,
    #[serde(rename = "mu1L_sdp")]
    pub mu1l_sdp: Option<f64>,
    pub mu1_det_lo: f64,
    pub mu1_det_hi: f64,
    #[serde(rename = "mu1L_det_lo")]
    pub mu1l_det_lo: f64,
    #[serde(rename = "mu1L_det_hi")]
    pub mu1l_det_hi: f64,
    #[serde(rename = "conc_L1")]
    pub conc_l1: Option<f64>,
    pub conc_mu1: Option<f64>,
    #[serde(rename = "conc_mu1L")]
    pub conc_mu1l: Option<f64>,
    pub rate_gscd_under: Option<f64>,
    pub rate_gscd_over: Option<f64>,
    pub rate_gd_under: Option<f64>,
    pub rate_gd_over: Option<f64>,
    pub sdp_converged: Option<bool>,
    pub sdp_iterations: Option<usize>,
}

impl EstimateReport {
    pub fn new(n: usize, d: usize, lambda: Option<f64>, g: &GeometryConstants) -> Self {
        let c = g.concentration.as_ref();
        EstimateReport {
            n,
            d,
            lambda,
            l1_smooth: g.l1_smooth,
            l2_smooth: g.l2_smooth,
            mu2: g.mu2,
            mu2_loja: g.mu2_loja,
            mu1_sdp: g.mu1_sdp,
            mu1_sdp_scaled: g.mu1_sdp_scaled,
            mu1l_sdp: g.mu1l_sdp,
            mu1_det_lo: g.mu1_det_lo,
            mu1_det_hi: g.mu1_det_hi,
            mu1l_det_lo: g.mu1l_det_lo,
            mu1l_det_hi: g.mu1l_det_hi,
            conc_l1: c.map(|c| c.conc_l1),
            conc_mu1: c.map(|c| c.conc_mu1),
            conc_mu1l: c.map(|c| c.conc_mu1l),
            rate_gscd_under: c.map(|c| c.rate_gscd_under),
            rate_gscd_over: c.map(|c| c.rate_gscd_over),
            rate_gd_under: c.map(|c| c.rate_gd_under),
            rate_gd_over: c.map(|c| c.rate_gd_over),
            sdp_converged: g.sdp_converged,
            sdp_iterations: g.sdp_iterations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig_extremes;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(seed: u64, n: usize, d: usize) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        Matrix::from_vec(n, d, data).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let c = closed_form_constants(&Matrix::identity(4)).unwrap();
        for v in [c.l1_smooth, c.l2_smooth, c.mu2, c.mu2_loja] {
            assert!((v - 0.25).abs() < 1e-15);
        }

        let c = closed_form_constants(&Matrix::from_diag(&[1.0, 2.0])).unwrap();
        assert_eq!(c.l1_smooth, 2.0);
        assert!((c.l2_smooth - 2.0).abs() < 1e-15);
        assert!((c.mu2 - 0.5).abs() < 1e-15);

        let mut p = gaussian(1, 10, 4);
        for i in 0..10 {
            p[(i, 3)] = p[(i, 1)];
        }
        assert!(closed_form_constants(&p).unwrap().mu2 <= 1e-10);
    }

    #[test]
    fn closed_form_matches_full_gram_both_regimes() {
        for (n, d) in [(30, 8), (8, 30)] {
            let p = gaussian(2, n, d);
            let c = closed_form_constants(&p).unwrap();
            let (lo, hi) = sym_eig_extremes(&p.gram()).unwrap();
            let (llo, _) = sym_eig_extremes(&p.outer_gram()).unwrap();
            assert!((c.l2_smooth - hi / n as f64).abs() < 1e-10);
            assert!((c.mu2 - lo.max(0.0) / n as f64).abs() < 1e-10);
            assert!((c.mu2_loja - llo.max(0.0) / n as f64).abs() < 1e-10);
            assert!(c.mu2 <= c.l2_smooth && c.l1_smooth <= c.l2_smooth + 1e-12);
        }
    }

    #[test]
    fn det_bounds_examples() {
        let b = det_bounds(&Matrix::identity(5)).unwrap();
        assert!((b.mu1_lo - 1.0 / 25.0).abs() < 1e-15);
        assert!((b.mu1_hi - 1.0 / 25.0).abs() < 1e-15);

        let (n, d) = (6, 3);
        let col = [1.0, 2.0, -1.0, 0.5, 3.0, 1.0];
        let mut p = Matrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                p[(i, j)] = col[i];
            }
        }
        let colsq: f64 = col.iter().map(|v| v * v).sum();
        let b = det_bounds(&p).unwrap();
        let direct = (d * d) as f64 * colsq / (n as f64 * (d * d) as f64);
        assert!((b.mu1_hi - direct).abs() < 1e-12);
    }

    #[test]
    fn concentration_examples() {
        let c = concentration_estimates(100, 10, 1.0, None);
        assert!((c.conc_mu1 - 0.1).abs() < 1e-15);
        assert!((c.rate_gscd_under - 0.9).abs() < 1e-15);
        let c = concentration_estimates(50, 500, 1.0, None);
        assert!((c.rate_gscd_over - 0.98).abs() < 1e-15);
        let c = concentration_estimates(30, 30, 2.0, None);
        assert_eq!(c.rate_gd_under, 1.0);
        assert_eq!(c.conc_l1, 4.0);
        assert!(c.tails.is_none());
    }

    #[test]
    fn tails_bracket_centres() {
        let tc = TailConstants {
            c1: 1.0,
            c2: 1.0,
            c3: 0.1,
            c4: 0.1,
            k: 1.0,
            t: 0.1,
        };
        let c = concentration_estimates(2000, 500, 1.0, Some(tc));
        let t = c.tails.unwrap();
        assert!(t.mu1.0 <= c.conc_mu1 && c.conc_mu1 <= t.mu1.1);
        assert!(t.mu1l.0 <= c.conc_mu1l && c.conc_mu1l <= t.mu1l.1);
        assert!(t.l1.1 >= c.conc_l1);
    }

    #[test]
    fn mp_examples() {
        assert_eq!(mp_limits(1.0, 2.0), (0.0, 8.0));
        let (lo, hi) = mp_limits(1e-12, 1.0);
        assert!((lo - 1.0).abs() < 1e-5 && (hi - 1.0).abs() < 1e-5);
        assert_eq!(mp_limits(4.0, 1.0), (1.0, 9.0));
    }

    #[test]
    fn report_key_order() {
        let p = gaussian(3, 12, 4);
        let g = estimate(
            &p,
            &EstimateOptions {
                sigma: Some(1.0),
                ..Default::default()
            },
        )
        .unwrap();
        let json = EstimateReport::new(12, 4, None, &g).to_json();
        let keys = [
            "n", "d", "lambda", "l1_smooth", "l2_smooth", "mu2", "mu2_loja", "mu1_sdp",
            "mu1_sdp_scaled", "mu1L_sdp", "mu1_det_lo", "mu1_det_hi", "mu1L_det_lo",
            "mu1L_det_hi", "conc_L1", "conc_mu1", "conc_mu1L", "rate_gscd_under",
            "rate_gscd_over", "rate_gd_under", "rate_gd_over", "sdp_converged",
            "sdp_iterations",
        ];
        let mut pos = 0;
        for k in keys {
            let needle = format!("\"{k}\":");
            let at = json[pos..].find(&needle).unwrap_or_else(|| panic!("{k} missing"));
            pos += at + needle.len();
        }
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v.as_object().unwrap().len(), keys.len());
        assert!(v["mu1_sdp"].is_null());
    }
}
