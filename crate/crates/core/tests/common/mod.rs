#![allow(dead_code)]

use gbsim_core::channel::ScenarioConfig;
use gbsim_core::estimation::PilotEstimate;
use gbsim_core::linalg::{CMatrix, CVector};
use gbsim_core::scalar::complex_normal;
use num_complex::Complex;
use rand::Rng;

pub fn c(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

/// Channels redrawn from their law given the in-cell estimates.
///
/// Samples by Gaussian conditioning on the training observation
/// `s_k = sum_l g_lk + sqrt(eps) nu_k`: a fresh prior draw is shifted by
/// `(beta_lk / var(s_k)) (s_k - s'_k)`. Only the prior model is used, none of
/// the closed-form conditional moments.
pub struct ConditionalDraw {
    /// `G_l` for every cell.
    pub channels: Vec<CMatrix<f64>>,
    /// `G_1 - Ĝ_1`.
    pub error: CMatrix<f64>,
}

pub fn draw_given_estimate<R: Rng>(
    cfg: &ScenarioConfig<f64>,
    est: &PilotEstimate<f64>,
    rng: &mut R,
) -> ConditionalDraw {
    let n = cfg.antennas();
    let users = cfg.users();
    let cells = cfg.cells();
    let mut channels = vec![CMatrix::zeros(n, users); cells];
    for k in 0..users {
        let betas = cfg.gain_column(k);
        let var_s: f64 = betas.iter().sum::<f64>() + cfg.eps();
        // Observed training statistic recovered from the estimate.
        let s_obs = est.estimate.column(k) * c(var_s / betas[0]);
        let prior: Vec<CVector<f64>> = betas
            .iter()
            .map(|b| CVector::from_fn(n, |_, _| complex_normal::<f64, R>(rng) * b.sqrt()))
            .collect();
        let nu = CVector::from_fn(n, |_, _| complex_normal::<f64, R>(rng));
        let mut s_new = nu * c(cfg.eps().sqrt());
        for p in &prior {
            s_new += p;
        }
        let diff = &s_obs - s_new;
        for l in 0..cells {
            let g = &prior[l] + &diff * c(betas[l] / var_s);
            channels[l].set_column(k, &g);
        }
    }
    let error = &channels[0] - &est.estimate;
    ConditionalDraw { channels, error }
}

pub fn rel_frobenius(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Monte Carlo covariance of `Ĝ_1 x + G̃_1 x̃ + sum_{l>1} G_l x_l + n` over
/// symbols, noise and channels drawn given the estimates.
pub fn brute_force_covariance<R: Rng>(
    cfg: &ScenarioConfig<f64>,
    est: &PilotEstimate<f64>,
    draws: usize,
    rng: &mut R,
) -> CMatrix<f64> {
    let n = cfg.antennas();
    let p = cfg.power().sqrt();
    let mut acc = CMatrix::zeros(n, n);
    for _ in 0..draws {
        let d = draw_given_estimate(cfg, est, rng);
        let mut y = CVector::from_fn(n, |_, _| complex_normal::<f64, R>(rng));
        for k in 0..cfg.users() {
            let x: Complex<f64> = complex_normal(rng);
            let xt: Complex<f64> = complex_normal(rng);
            y += est.estimate.column(k) * (x * p);
            y += d.error.column(k) * (xt * p);
            for l in 1..cfg.cells() {
                let xl: Complex<f64> = complex_normal(rng);
                y += d.channels[l].column(k) * (xl * p);
            }
        }
        acc += &y * y.adjoint();
    }
    acc / c(draws as f64)
}

/// Mean powers of the estimation-error, contamination and other-user terms
/// seen by receiver `w` of `user`, over channels drawn given the estimates.
pub fn brute_force_terms<R: Rng>(
    cfg: &ScenarioConfig<f64>,
    est: &PilotEstimate<f64>,
    user: usize,
    w: &CVector<f64>,
    draws: usize,
    rng: &mut R,
) -> [f64; 3] {
    let p = cfg.power();
    let (mut err, mut contam, mut other) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let d = draw_given_estimate(cfg, est, rng);
        err += p * w.dotc(&d.error.column(user)).norm_sqr();
        for (l, g) in d.channels.iter().enumerate() {
            for j in 0..cfg.users() {
                let e = p * w.dotc(&g.column(j)).norm_sqr();
                if j == user && l > 0 {
                    contam += e;
                } else if j != user {
                    other += e;
                }
            }
        }
    }
    let m = draws as f64;
    [err / m, contam / m, other / m]
}
