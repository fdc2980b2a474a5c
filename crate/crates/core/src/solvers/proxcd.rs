//! Proximal coordinate descent with Gauss-Southwell selection by largest
//! model decrease.

use crate::linalg::soft_threshold;

/// Decrease of the one-coordinate model
/// `g_j t + (L/2)t² + λ(|α_j + t| − |α_j|)` at its minimizer, together with
/// the new value of coordinate `j`.
pub fn proxcd_model_decrease(alpha: &[f64], grad: &[f64], lambda: f64, l: f64, j: usize) -> (f64, f64) {
    let a = alpha[j];
    let g = grad[j];
    let t = soft_threshold(a - g / l, lambda / l);
    let step = t - a;
    (g * step + 0.5 * l * step * step + lambda * (t.abs() - a.abs()), t)
}

/// One step: the coordinate with the most negative model decrease moves to
/// its 1-D prox point. Coordinates outside the support are screened through
/// the largest `|∇_jF|`, since for them the decrease is `−(|g_j| − λ)₊²/(2L)`.
pub fn proxcd_gs_step(alpha: &[f64], grad: &[f64], lambda: f64, l: f64) -> Vec<f64> {
    let mut out = alpha.to_vec();
    if !(l > 0.0) {
        return out;
    }
    let mut best: Option<(f64, usize, f64)> = None;
    let mut consider = |j: usize| {
        let (delta, t) = proxcd_model_decrease(alpha, grad, lambda, l, j);
        let better = match best {
            None => true,
            Some((bd, bj, _)) => delta < bd || (delta == bd && j < bj),
        };
        if better {
            best = Some((delta, j, t));
        }
    };

    let mut lmo: Option<usize> = None;
    for j in 0..alpha.len() {
        if alpha[j] != 0.0 {
            consider(j);
        } else if lmo.map_or(true, |k| grad[j].abs() > grad[k].abs()) {
            lmo = Some(j);
        }
    }
    if let Some(j) = lmo {
        consider(j);
    }

    if let Some((delta, j, t)) = best {
        if delta < 0.0 {
            out[j] = t;
        }
    }
    out
}
