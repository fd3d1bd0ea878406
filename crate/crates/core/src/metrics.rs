//! SINR and rate evaluation, plus the closed-form large-antenna limits for
//! the two-cell case.
//!
//! For in-cell user `k` and receiver `w`, the SINR is
//!
//! ```text
//!              P |w† ĝ_1k|^2
//! gamma = ---------------------------------------------------------------
//!         w† ( I + P g̃_1k g̃_1k† + P sum_{j≠k} g_1j g_1j†
//!                 + P sum_{l>1} sum_j g_lj g_lj† ) w
//! ```
//!
//! Three evaluations are provided: [`genie_sinr`] keeps every channel fixed
//! and averages over symbols and noise only, [`conditional_sinr`] also
//! averages the channels over their law given `Ĝ_1`, and [`empirical_sinr`]
//! replaces the symbol/noise expectation by an average over frames.

use num_complex::Complex;

use crate::channel::{ChannelRealization, ScenarioConfig, SymbolFrame};
use crate::detect::DetectorBank;
use crate::error::{Error, Result};
use crate::estimation::{training_coefficient, PilotEstimate};
use crate::linalg::CVector;
use crate::scalar::Real;

/// Received power split by origin after linear detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrBreakdown<T: Real> {
    pub signal: T,
    /// Same-pilot out-of-cell users.
    pub contamination: T,
    /// In-cell estimation error of the user itself.
    pub est_error: T,
    /// Every other user, in-cell or out-of-cell.
    pub other_interference: T,
    pub noise: T,
}

impl<T: Real> SinrBreakdown<T> {
    pub fn interference_plus_noise(&self) -> T {
        self.contamination + self.est_error + self.other_interference + self.noise
    }

    pub fn sinr(&self) -> T {
        self.signal / self.interference_plus_noise()
    }
}

fn check_receiver<T: Real>(w: &CVector<T>) -> Result<T> {
    let energy = w.norm_squared();
    if !energy.is_positive_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(energy)
}

fn proj<T: Real>(w: &CVector<T>, v: nalgebra::DVectorView<'_, Complex<T>>) -> Complex<T> {
    w.dotc(&v)
}

/// SINR with every channel fixed; expectation over symbols and noise.
pub fn genie_sinr<T: Real>(
    cfg: &ScenarioConfig<T>,
    ch: &ChannelRealization<T>,
    est: &PilotEstimate<T>,
    user: usize,
    w: &CVector<T>,
) -> Result<SinrBreakdown<T>> {
    let energy = check_receiver(w)?;
    let p = cfg.power();
    let mut out = SinrBreakdown {
        signal: p * proj(w, est.estimate.column(user)).norm_sqr(),
        contamination: T::zero(),
        est_error: p * proj(w, est.error.column(user)).norm_sqr(),
        other_interference: T::zero(),
        noise: energy,
    };
    for (l, g) in ch.scaled.iter().enumerate() {
        for j in 0..cfg.users() {
            if l == 0 && j == user {
                continue;
            }
            let e = p * proj(w, g.column(j)).norm_sqr();
            if j == user {
                out.contamination += e;
            } else {
                out.other_interference += e;
            }
        }
    }
    Ok(out)
}

/// SINR with the channels averaged over their conditional law given `Ĝ_1`.
///
/// Given `ĝ_1j`, the error `g̃_1j` is white with variance `beta_1j - phi_1j`,
/// and `g_lj` (l > 1) has mean `(beta_lj / beta_1j) ĝ_1j` and variance
/// `beta_lj - beta_lj^2 / (eps + sum_m beta_mj)`.
pub fn conditional_sinr<T: Real>(
    cfg: &ScenarioConfig<T>,
    est: &PilotEstimate<T>,
    user: usize,
    w: &CVector<T>,
) -> Result<SinrBreakdown<T>> {
    let energy = check_receiver(w)?;
    let p = cfg.power();
    let mut out = SinrBreakdown {
        signal: p * proj(w, est.estimate.column(user)).norm_sqr(),
        contamination: T::zero(),
        est_error: p * est.err_var[user] * energy,
        other_interference: T::zero(),
        noise: energy,
    };
    for j in 0..cfg.users() {
        let betas = cfg.gain_column(j);
        let total = betas.iter().fold(cfg.eps(), |acc, &b| acc + b);
        let along = proj(w, est.estimate.column(j)).norm_sqr();
        let mut out_of_cell = T::zero();
        for &b in betas.iter().skip(1) {
            let ratio = b / betas[0];
            out_of_cell += ratio * ratio * along + (b - b * b / total) * energy;
        }
        if j == user {
            out.contamination = p * out_of_cell;
        } else {
            out.other_interference += p * (along + est.err_var[j] * energy + out_of_cell);
        }
    }
    Ok(out)
}

/// Frame-averaged power of each additive term of the received signal after
/// detection, attributing the in-cell channel of `user` to its estimate and
/// error parts.
pub fn empirical_sinr<'a, T, I>(
    cfg: &ScenarioConfig<T>,
    ch: &ChannelRealization<T>,
    est: &PilotEstimate<T>,
    frames: I,
    user: usize,
    w: &CVector<T>,
) -> Result<SinrBreakdown<T>>
where
    T: Real,
    I: IntoIterator<Item = &'a SymbolFrame<T>>,
{
    check_receiver(w)?;
    let users = cfg.users();
    let est_proj = proj(w, est.estimate.column(user));
    let err_proj = proj(w, est.error.column(user));
    let chan_proj: Vec<Vec<Complex<T>>> = ch
        .scaled
        .iter()
        .map(|g| (0..users).map(|j| proj(w, g.column(j))).collect())
        .collect();
    let mut acc = SinrBreakdown {
        signal: T::zero(),
        contamination: T::zero(),
        est_error: T::zero(),
        other_interference: T::zero(),
        noise: T::zero(),
    };
    let mut count = 0usize;
    for f in frames {
        count += 1;
        let x = &f.symbols;
        acc.signal += (est_proj * x[(0, user)]).norm_sqr();
        acc.est_error += (err_proj * x[(0, user)]).norm_sqr();
        for (l, row) in chan_proj.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if l == 0 && j == user {
                    continue;
                }
                let e = (c * x[(l, j)]).norm_sqr();
                if j == user {
                    acc.contamination += e;
                } else {
                    acc.other_interference += e;
                }
            }
        }
        acc.noise += w.dotc(&f.noise).norm_sqr();
    }
    if count == 0 {
        return Err(Error::EmptyStream);
    }
    let c = T::from_usize(count).unwrap_or_else(T::one);
    Ok(SinrBreakdown {
        signal: acc.signal / c,
        contamination: acc.contamination / c,
        est_error: acc.est_error / c,
        other_interference: acc.other_interference / c,
        noise: acc.noise / c,
    })
}

/// Monte Carlo estimate of `E[log2(1 + gamma)]` with a normal-approximation
/// 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate<T: Real> {
    pub mean: T,
    pub ci95: T,
    pub samples: usize,
}

pub fn achievable_rate<T: Real>(sinrs: &[T]) -> Result<RateEstimate<T>> {
    if sinrs.is_empty() {
        return Err(Error::Domain("rate needs at least one SINR sample".into()));
    }
    let rates: Vec<T> = sinrs.iter().map(|&g| (T::one() + g).log2()).collect();
    let (mean, ci95) = mean_ci95(&rates);
    Ok(RateEstimate {
        mean,
        ci95,
        samples: rates.len(),
    })
}

/// Sample mean and `1.96 * s / sqrt(m)`, summed in index order.
pub fn mean_ci95<T: Real>(values: &[T]) -> (T, T) {
    let m = T::from_usize(values.len()).unwrap_or_else(T::one);
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / m;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let ss = values
        .iter()
        .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
    let var = ss / (m - T::one());
    (mean, T::lit(1.96) * (var / m).sqrt())
}

/// Large-antenna projections `n^-1 w† y'` of the two-cell analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Coefficients<T: Real> {
    /// Gain on the user's own symbol, `phi`.
    pub a_sig: T,
    /// Gain on the same-pilot out-of-cell symbol.
    pub a_contam: T,
    /// Gain on the independent error symbol.
    pub a_err: T,
    pub lambda: T,
}

impl<T: Real> Lemma1Coefficients<T> {
    pub fn sinr(&self) -> T {
        self.a_sig * self.a_sig / (self.a_contam * self.a_contam + self.a_err * self.a_err)
    }
}

fn check_pair<T: Real>(beta1: T, beta2: T, eps: T) -> Result<()> {
    for b in [beta1, beta2] {
        if !b.is_positive_finite() {
            return Err(Error::Domain("gains must be positive and finite".into()));
        }
    }
    if !eps.is_nonnegative_finite() {
        return Err(Error::Domain("eps must be finite and non-negative".into()));
    }
    Ok(())
}

pub fn lemma1_coefficients<T: Real>(beta1: T, beta2: T, eps: T) -> Result<Lemma1Coefficients<T>> {
    check_pair(beta1, beta2, eps)?;
    let phi = training_coefficient(&[beta1, beta2], eps)?;
    let q = phi / beta1 * beta2;
    // beta1 - phi and q - q^3/lambda rewritten without cancellation.
    let err = beta1 * (beta2 + eps) / (beta1 + beta2 + eps);
    let lambda = err * err + q * q;
    Ok(Lemma1Coefficients {
        a_sig: phi,
        a_contam: q * err * err / lambda,
        a_err: q * q * err / lambda,
        lambda,
    })
}

/// Limit of the group-blind SINR with two cells,
/// `[1 + 1/(1 + eps/beta2)^2] (beta1/beta2)^2`.
pub fn asymptotic_gb_sinr<T: Real>(beta1: T, beta2: T, eps: T) -> Result<T> {
    check_pair(beta1, beta2, eps)?;
    let rho = beta1 / beta2;
    Ok(sinr_gain(beta2, eps)? * rho * rho)
}

/// Limit of the non-group-blind SINR, `beta_1k^2 / sum_{l>1} beta_lk^2`;
/// `betas[0]` is the reference cell.
pub fn asymptotic_ngb_sinr<T: Real>(betas: &[T]) -> Result<T> {
    let Some((&own, others)) = betas.split_first() else {
        return Err(Error::Domain("no gains given".into()));
    };
    if !own.is_positive_finite() {
        return Err(Error::Domain("reference gain must be positive".into()));
    }
    if others.iter().any(|b| !b.is_nonnegative_finite()) {
        return Err(Error::Domain(
            "gains must be non-negative and finite".into(),
        ));
    }
    let interference = others.iter().fold(T::zero(), |a, &b| a + b * b);
    if interference <= T::zero() {
        return Err(Error::NoInterference { user: 0 });
    }
    Ok(own * own / interference)
}

/// Asymptotic SINR gain of group-blind over non-group-blind detection.
pub fn sinr_gain<T: Real>(beta2: T, eps: T) -> Result<T> {
    check_pair(T::one(), beta2, eps)?;
    let d = T::one() + eps / beta2;
    Ok(T::one() + T::one() / (d * d))
}

pub fn delta_rate<T: Real>(gamma_gb: T, gamma_ngb: T) -> T {
    (T::one() + gamma_gb).log2() - (T::one() + gamma_ngb).log2()
}

/// Almost-sure limit of `n^-1 ĝ_1k† g_lj`.
pub fn contamination_limit<T: Real>(phi: T, beta1: T, beta_lj: T, same_pilot: bool) -> T {
    if same_pilot {
        phi / beta1 * beta_lj
    } else {
        T::zero()
    }
}

/// Every closed-form two-cell quantity for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticReport<T: Real> {
    pub phi: T,
    pub rho: T,
    pub gamma_bar: T,
    pub gamma_bar_prime: T,
    pub eta_bar: T,
    pub delta_r: T,
    pub lemma1: Lemma1Coefficients<T>,
}

impl<T: Real> AsymptoticReport<T> {
    pub fn new(beta1: T, beta2: T, eps: T) -> Result<Self> {
        let lemma1 = lemma1_coefficients(beta1, beta2, eps)?;
        let gamma_bar = asymptotic_gb_sinr(beta1, beta2, eps)?;
        let gamma_bar_prime = asymptotic_ngb_sinr(&[beta1, beta2])?;
        Ok(Self {
            phi: lemma1.a_sig,
            rho: beta1 / beta2,
            gamma_bar,
            gamma_bar_prime,
            eta_bar: sinr_gain(beta2, eps)?,
            delta_r: delta_rate(gamma_bar, gamma_bar_prime),
            lemma1,
        })
    }
}

/// Normalized projections `n^-1 s w† v` of the receiver onto the user's
/// estimate, its same-pilot out-of-cell channels and its estimation error.
///
/// `s` rescales the receiver so that its inner (in-cell) part projects onto
/// `ĝ_1k` with the gain `‖ĝ_1k‖^2`, which is the normalization under which
/// the two-cell coefficients of [`lemma1_coefficients`] are stated.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaProjections<T: Real> {
    pub signal: Complex<T>,
    /// One entry per interfering cell `l > 1`.
    pub contamination: Vec<Complex<T>>,
    pub error: Complex<T>,
    pub scale: T,
}

pub fn lemma1_projections<T: Real>(
    ch: &ChannelRealization<T>,
    est: &PilotEstimate<T>,
    bank: &DetectorBank<T>,
    user: usize,
) -> Result<LemmaProjections<T>> {
    let w = bank.column(user);
    check_receiver(&w)?;
    let inner = bank.meta.as_ref().map_or(&bank.weights, |m| &m.inner);
    let gh = est.estimate.column(user);
    let along = inner.column(user).dotc(&gh);
    if along.norm_sqr() <= T::zero() {
        return Err(Error::ZeroVector);
    }
    let n = T::from_usize(gh.nrows()).unwrap_or_else(T::one);
    let scale = Complex::new(gh.norm_squared(), T::zero()) / along;
    let factor = scale.conj() / Complex::new(n, T::zero());
    Ok(LemmaProjections {
        signal: w.dotc(&gh) * factor,
        contamination: ch
            .scaled
            .iter()
            .skip(1)
            .map(|g| w.dotc(&g.column(user)) * factor)
            .collect(),
        error: w.dotc(&est.error.column(user)) * factor,
        scale: scale.norm_sqr().sqrt(),
    })
}
