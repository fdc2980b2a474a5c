//! Regularized matching pursuit: exact minimization of the ℓ1 smoothness
//! upper bound plus the ℓ1 penalty,
//!
//! `min_β ⟨∇F(α), β⟩ + (L₁/2)‖β‖₁² + λ‖α + β‖₁`,
//!
//! through its scalar dual `max_{z ≥ z_min} h(z)` with
//! `h(z) = −z²/(2L₁) + Σ_{i active} min(λ|α_i|, |α_i|(z − sign(α_i)∇_iF))`.

use serde::Serialize;

use crate::linalg::{argmax_abs, norm_inf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RmpCase {
    /// `z★ = 0`, the step is zero.
    Stationary,
    /// No active breakpoint at or above `z_min`; only the selected atom moves.
    QuadraticOnly,
    /// Breakpoints exist above `z_min` but `h` is already decreasing there.
    ClampAtZmin,
    /// `h'` vanishes strictly between two breakpoints.
    InteriorInterval,
    /// `h'` changes sign at a breakpoint.
    AtBreakpoint,
    /// Kept for completeness; the exact maximization never produces it.
    BeyondLast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmpStepOutcome {
    pub beta: Vec<f64>,
    pub z_star: f64,
    pub z_min: f64,
    pub case: RmpCase,
    /// Active atoms fully cancelled by the step.
    pub zeroed: Vec<usize>,
    /// Atom entering the support, if any.
    pub added: Option<usize>,
}

/// The subproblem objective `⟨g, β⟩ + (L/2)‖β‖₁² + λ‖α + β‖₁`.
pub fn rmp_objective(alpha: &[f64], grad: &[f64], lambda: f64, l1: f64, beta: &[f64]) -> f64 {
    let mut lin = 0.0;
    let mut b1 = 0.0;
    let mut pen = 0.0;
    for i in 0..alpha.len() {
        lin += grad[i] * beta[i];
        b1 += beta[i].abs();
        pen += (alpha[i] + beta[i]).abs();
    }
    lin + 0.5 * l1 * b1 * b1 + lambda * pen
}

/// Dual function `h(z)`.
pub fn rmp_dual(alpha: &[f64], grad: &[f64], lambda: f64, l1: f64, z: f64) -> f64 {
    let mut h = -z * z / (2.0 * l1);
    for (a, g) in alpha.iter().zip(grad) {
        if *a != 0.0 {
            h += (lambda * a.abs()).min(-g * a + z * a.abs());
        }
    }
    h
}

/// One exact RMP step from `alpha` given `grad = ∇F(alpha)`.
pub fn rmp_step_raw(alpha: &[f64], grad: &[f64], lambda: f64, l1: f64) -> RmpStepOutcome {
    let d = alpha.len();
    let i_min = argmax_abs(grad);
    let z_min = (norm_inf(grad) - lambda).max(0.0);

    // breakpoints z_i = λ + sign(α_i)∇_iF with masses |α_i|
    let mut bps: Vec<(f64, f64, usize)> = (0..d)
        .filter(|&i| alpha[i] != 0.0)
        .map(|i| (lambda + alpha[i].signum() * grad[i], alpha[i].abs(), i))
        .collect();
    bps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));

    // root of h'(z) = −z/L + Σ_{z_i > z}|α_i|, scanning intervals left to right
    let total: f64 = bps.iter().map(|b| b.1).sum();
    let root;
    let mut root_at_breakpoint = false;
    {
        let mut above = total;
        let mut k = 0;
        let mut lo = f64::NEG_INFINITY;
        loop {
            let hi = if k < bps.len() { bps[k].0 } else { f64::INFINITY };
            let cand = l1 * above;
            if cand >= lo && cand < hi {
                root = cand;
                break;
            }
            if k == bps.len() {
                // unreachable in exact arithmetic; keep the last candidate
                root = cand.max(lo);
                break;
            }
            // mass leaving at this breakpoint value
            let v = bps[k].0;
            let mut mass = 0.0;
            while k < bps.len() && bps[k].0 == v {
                mass += bps[k].1;
                k += 1;
            }
            let after = above - mass;
            if l1 * after <= v && v <= l1 * above {
                root = v;
                root_at_breakpoint = true;
                break;
            }
            above = after;
            lo = v;
        }
    }

    let z_star = root.max(z_min);
    let mut beta = vec![0.0; d];
    if z_star <= 0.0 {
        return RmpStepOutcome {
            beta,
            z_star: 0.0,
            z_min,
            case: RmpCase::Stationary,
            zeroed: Vec::new(),
            added: None,
        };
    }

    let mut zeroed = Vec::new();
    let mut mass_above = 0.0;
    for &(z, m, i) in &bps {
        if z > z_star {
            beta[i] = -alpha[i];
            mass_above += m;
            zeroed.push(i);
        }
    }
    zeroed.sort_unstable();
    let mut t = (z_star / l1 - mass_above).max(0.0);
    let mut added = None;

    let clamped = z_min > root || (z_min == root && !root_at_breakpoint);
    let case = if clamped {
        // residual mass goes along the flat ray of the selected atom
        beta[i_min] -= grad[i_min].signum() * t;
        if alpha[i_min] == 0.0 && t > 0.0 {
            added = Some(i_min);
        }
        if bps.iter().any(|b| b.0 >= z_min) {
            RmpCase::ClampAtZmin
        } else {
            RmpCase::QuadraticOnly
        }
    } else if root_at_breakpoint {
        for &(z, m, i) in &bps {
            if z == z_star && t > 0.0 {
                let s = t.min(m);
                beta[i] = -alpha[i].signum() * s;
                t -= s;
            }
        }
        RmpCase::AtBreakpoint
    } else {
        RmpCase::InteriorInterval
    };

    RmpStepOutcome {
        beta,
        z_star,
        z_min,
        case,
        zeroed,
        added,
    }
}
