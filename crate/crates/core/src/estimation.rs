//! MMSE estimation of the in-cell channels from reused orthogonal pilots.
//!
//! After correlating with pilot `k`, the reference base station observes
//! `sum_l g_lk + sqrt(eps) nu_k`, so its MMSE estimate of `g_1k` is
//! contaminated by every out-of-cell user sharing that pilot:
//!
//! ```text
//! ghat_1k = (sum_l g_lk + sqrt(eps) nu_k) * phi_1k / beta_1k
//! phi_1k  = beta_1k^2 / (eps + sum_l beta_lk)
//! ```

use std::cmp::Ordering;

use num_complex::Complex;
use rand::Rng;

use crate::channel::{ChannelRealization, ScenarioConfig};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{complex_normal, cplx, Real};

/// Contaminated in-cell channel estimates and their error statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotEstimate<T: Real> {
    /// `Ĝ_1`, n×K.
    pub estimate: CMatrix<T>,
    /// `G̃_1 = G_1 - Ĝ_1`.
    pub error: CMatrix<T>,
    /// Per-antenna estimate power `phi_1k`.
    pub phi: Vec<T>,
    /// Per-antenna error variance `beta_1k - phi_1k`.
    pub err_var: Vec<T>,
}

fn check_gains<T: Real>(betas: &[T], eps: T) -> Result<()> {
    if betas.is_empty() {
        return Err(Error::Domain("no gains given".into()));
    }
    if let Some(b) = betas.iter().find(|b| !b.is_positive_finite()) {
        return Err(Error::Domain(format!(
            "gain {} must be positive",
            b.to_f64_lossy()
        )));
    }
    if !matches!(
        eps.partial_cmp(&T::zero()),
        Some(Ordering::Greater | Ordering::Equal)
    ) {
        return Err(Error::Domain("eps must be non-negative".into()));
    }
    Ok(())
}

/// Ratio `beta_1k / (eps + sum_l beta_lk)`, i.e. `phi_1k / beta_1k`.
fn shrinkage<T: Real>(betas: &[T], eps: T) -> T {
    let total = betas.iter().fold(eps, |acc, &b| acc + b);
    betas[0] / total
}

/// Estimate power `phi_1k` for one pilot; `betas[0]` is the reference cell.
pub fn training_coefficient<T: Real>(betas: &[T], eps: T) -> Result<T> {
    check_gains(betas, eps)?;
    Ok(betas[0] * shrinkage(betas, eps))
}

/// Forms `Ĝ_1` from one channel realization, drawing the training noise `nu`.
///
/// The training noise is always drawn (and scaled by `sqrt(eps)`), so the
/// random stream is consumed identically for every `eps`.
pub fn estimate_channels<T: Real, R: Rng + ?Sized>(
    cfg: &ScenarioConfig<T>,
    ch: &ChannelRealization<T>,
    rng: &mut R,
) -> PilotEstimate<T> {
    let n = cfg.antennas();
    let users = cfg.users();
    let root_eps = cfg.eps().sqrt();
    let mut estimate = CMatrix::zeros(n, users);
    let mut phi = Vec::with_capacity(users);
    let mut err_var = Vec::with_capacity(users);
    for k in 0..users {
        let betas = cfg.gain_column(k);
        let shrink = shrinkage(&betas, cfg.eps());
        let p = betas[0] * shrink;
        phi.push(p);
        err_var.push(betas[0] - p);
        let mut col = estimate.column_mut(k);
        for g in &ch.scaled {
            col += g.column(k);
        }
        for r in 0..n {
            let nu: Complex<T> = complex_normal(rng);
            col[r] = (col[r] + nu * root_eps) * cplx(shrink);
        }
    }
    let error = &ch.scaled[0] - &estimate;
    PilotEstimate {
        estimate,
        error,
        phi,
        err_var,
    }
}
