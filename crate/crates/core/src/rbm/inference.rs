use alloc::vec;
use alloc::vec::Vec;

use super::{check_len, RbmParameters};
use crate::numerics::{self, dot, sigmoid, sigmoid_scalar};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Factorial approximation `q(y, h)` of the label/hidden posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct MfResult {
    /// Label marginals, the estimate of `p(y_l = 1 | x)`.
    pub mu: Vec<f64>,
    /// Hidden marginals.
    pub tau: Vec<f64>,
    /// Sweeps performed.
    pub iterations: usize,
    /// Largest absolute change produced by the last sweep.
    pub residual: f64,
    pub converged: bool,
}

/// Mean-field fixed-point iteration for the posterior over `(y, h)` given `x`.
///
/// Starts from `µ = 0.5`, `τ = σ(b + Wx)` and repeats the sweep
///
/// ```text
/// µ_l ← σ(c_l + Σ_j U_jl τ_j)
/// τ_j ← σ(b_j + Σ_l U_jl µ_l + Σ_i W_ji x_i)
/// ```
///
/// When a sweep moves no marginal by more than `tol`, the state that sweep
/// started from is returned, so a converged result is a verified
/// `tol`-fixed point of the sweep.
pub fn mean_field_infer(p: &RbmParameters, x: &[f64], tol: f64, max_iter: usize) -> Result<MfResult> {
    p.check()?;
    check_len("mean-field (x)", p.n_visible(), x)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(alloc::format!("tolerance must be > 0, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
    }
    let visible_drive = numerics::affine(&p.w, x, &p.b)?;
    let mut tau = sigmoid(&visible_drive);
    let mut mu = vec![0.5; p.n_labels()];
    let mut next_mu = vec![0.0; mu.len()];
    let mut next_tau = vec![0.0; tau.len()];

    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        let label_drive = p.u.matvec_transposed(&tau)?;
        for (l, m) in next_mu.iter_mut().enumerate() {
            *m = sigmoid_scalar(p.c[l] + label_drive[l]);
        }
        for (j, t) in next_tau.iter_mut().enumerate() {
            *t = sigmoid_scalar(visible_drive[j] + dot(p.u.row(j), &next_mu));
        }
        residual = mu
            .iter()
            .zip(&next_mu)
            .chain(tau.iter().zip(&next_tau))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !residual.is_finite() || next_mu.iter().chain(&next_tau).any(|v| !v.is_finite()) {
            return Err(Error::DivergentInference);
        }
        if residual <= tol {
            return Ok(MfResult {
                mu,
                tau,
                iterations: iteration,
                residual,
                converged: true,
            });
        }
        core::mem::swap(&mut mu, &mut next_mu);
        core::mem::swap(&mut tau, &mut next_tau);
    }
    Ok(MfResult {
        mu,
        tau,
        iterations: max_iter,
        residual,
        converged: false,
    })
}

/// Thresholds the mean-field label marginals; `µ_l == threshold` is ON.
pub fn predict_labels(p: &RbmParameters, x: &[f64], threshold: f64) -> Result<Vec<bool>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "threshold must be in (0, 1), got {threshold}"
        )));
    }
    let mf = mean_field_infer(p, x, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    Ok(threshold_marginals(&mf.mu, threshold))
}

/// Label states from marginals: ON iff `µ_l >= threshold`.
pub fn threshold_marginals(mu: &[f64], threshold: f64) -> Vec<bool> {
    mu.iter().map(|&m| m >= threshold).collect()
}
