//! Linear receivers for the in-cell users of the reference base station.
//!
//! Three detector families are provided:
//!
//! * matched filter, `w_k = ĝ_1k`;
//! * in-cell MMSE, `ẇ_k = (Ĝ_1 Ĝ_1† + I/P)^-1 ĝ_1k`, which only knows the
//!   contaminated in-cell estimates (the non-group-blind baseline);
//! * group-blind, `w_k = ẇ_k + w̆_k` with
//!   `w̆_k = -Ŭ (Ŭ† C Ŭ)^-1 Ŭ† C ẇ_k`, where `Ŭ` spans the part of the
//!   signal subspace orthogonal to `range(Ĝ_1)` and `C` is the received
//!   covariance. The outer term uses second-order statistics to cancel the
//!   out-of-cell interference that leaks through the contaminated estimates.

use std::cmp::Ordering;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, ScenarioConfig, SymbolFrame};
use crate::error::{Error, Result};
use crate::estimation::PilotEstimate;
use crate::linalg::{self, CMatrix};
use crate::scalar::{cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    /// Matched filter / maximal-ratio combining.
    Mf,
    /// In-cell MMSE, non-group-blind.
    NgbMmse,
    /// Group-blind.
    Gb,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Mf => "mf",
            DetectorKind::NgbMmse => "ngb_mmse",
            DetectorKind::Gb => "gb",
        }
    }
}

/// Where the covariance used by the outer component comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceMode {
    /// Ensemble covariance of the worst-case received model
    /// `Ĝ_1 x_1 + G̃_1 x̃_1 + sum_{l>1} G_l x_l + n`, given every channel.
    Genie,
    /// Sample covariance of `frames` received vectors, diagonally loaded.
    Sample { frames: usize },
    /// Covariance of the same model conditioned on `Ĝ_1` only.
    Conditional,
}

impl CovarianceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CovarianceMode::Genie => "genie",
            CovarianceMode::Sample { .. } => "sample",
            CovarianceMode::Conditional => "conditional",
        }
    }
}

/// How the KL-dimensional signal subspace is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceMode {
    /// Orthonormalized `[G_1 ... G_L]`.
    #[default]
    Genie,
    /// Dominant KL eigenvectors of the covariance model.
    Eigen,
    /// Orthonormalized `[G_1, Ĝ_1, G_3 ... G_L]`: the interfering direction
    /// for pilot `k` is taken along the estimation error rather than along
    /// `g_2k`. With two cells this places the complement along
    /// `g̃_1k` orthogonalized against `ĝ_1k`.
    TrainingSpan,
}

/// Receive covariance used by the group-blind outer component.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel<T: Real> {
    pub mode: CovarianceMode,
    pub matrix: CMatrix<T>,
}

/// Optional inputs of [`covariance`]; which ones are needed depends on the mode.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceInputs<'a, T: Real> {
    pub channel: Option<&'a ChannelRealization<T>>,
    pub estimate: Option<&'a PilotEstimate<T>>,
    pub frames: Option<&'a [SymbolFrame<T>]>,
}

impl<T: Real> Default for CovarianceInputs<'_, T> {
    fn default() -> Self {
        Self {
            channel: None,
            estimate: None,
            frames: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupBlindMeta<T: Real> {
    /// Orthonormal complement basis `Ŭ`, n×d.
    pub complement: CMatrix<T>,
    pub covariance: CovarianceMode,
    /// Inner MMSE weights `Ẇ` the outer component was built on.
    pub inner: CMatrix<T>,
    /// Complement rank differs from `K(L-1)`.
    pub degenerate: bool,
}

/// Receive weights for every in-cell user; column `k` is `w_1k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorBank<T: Real> {
    pub kind: DetectorKind,
    pub weights: CMatrix<T>,
    pub meta: Option<GroupBlindMeta<T>>,
}

impl<T: Real> DetectorBank<T> {
    pub fn column(&self, k: usize) -> crate::linalg::CVector<T> {
        self.weights.column(k).into_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalBasis<T: Real> {
    pub mode: SubspaceMode,
    /// n×KL with orthonormal columns.
    pub basis: CMatrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplementBasis<T: Real> {
    /// n×d with orthonormal columns, orthogonal to `range(Ĝ_1)`.
    pub basis: CMatrix<T>,
    pub degenerate: bool,
}

impl<T: Real> ComplementBasis<T> {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

pub fn matched_filter<T: Real>(est: &PilotEstimate<T>) -> DetectorBank<T> {
    DetectorBank {
        kind: DetectorKind::Mf,
        weights: est.estimate.clone(),
        meta: None,
    }
}

/// `(Ĝ Ĝ† + I/P)^-1 Ĝ`, evaluated as `Ĝ (Ĝ† Ĝ + I/P)^-1` so that every
/// column lies in `range(Ĝ)` by construction. `P = inf` gives the
/// zero-forcing limit.
pub fn inner_mmse<T: Real>(est: &PilotEstimate<T>, power: T) -> Result<DetectorBank<T>> {
    if power.partial_cmp(&T::zero()) != Some(Ordering::Greater) {
        return Err(Error::Domain("inner MMSE needs positive power".into()));
    }
    let g = &est.estimate;
    let k = g.ncols();
    let mut gram = g.adjoint() * g;
    let loading = if power.is_finite() {
        T::one() / power
    } else {
        T::zero()
    };
    for i in 0..k {
        gram[(i, i)] += cplx(loading);
    }
    let coeffs = linalg::solve_hpd(&gram, &CMatrix::identity(k, k))?;
    Ok(DetectorBank {
        kind: DetectorKind::NgbMmse,
        weights: g * coeffs,
        meta: None,
    })
}

pub fn covariance<T: Real>(
    mode: CovarianceMode,
    cfg: &ScenarioConfig<T>,
    inputs: CovarianceInputs<'_, T>,
) -> Result<CovarianceModel<T>> {
    let n = cfg.antennas();
    let p = cplx(cfg.power());
    let matrix = match mode {
        CovarianceMode::Genie => {
            let ch = inputs.channel.ok_or(Error::MissingInput {
                mode: "genie",
                what: "a channel realization",
            })?;
            let est = inputs.estimate.ok_or(Error::MissingInput {
                mode: "genie",
                what: "a pilot estimate",
            })?;
            let mut cols = Vec::new();
            cols.extend(est.estimate.column_iter().map(|c| c.into_owned()));
            cols.extend(est.error.column_iter().map(|c| c.into_owned()));
            for g in ch.scaled.iter().skip(1) {
                cols.extend(g.column_iter().map(|c| c.into_owned()));
            }
            let a = CMatrix::from_columns(&cols);
            let mut c = (&a * a.adjoint()) * p;
            add_diagonal(&mut c, T::one());
            c
        }
        CovarianceMode::Sample { frames: t } => {
            let frames = inputs.frames.ok_or(Error::MissingInput {
                mode: "sample",
                what: "received frames",
            })?;
            if t < n || frames.len() < t {
                return Err(Error::InsufficientFrames {
                    needed: t.max(n),
                    got: frames.len().min(t),
                });
            }
            if t < 2 * n {
                warn!("sample covariance from {t} frames for {n} antennas is poorly conditioned");
            }
            let mut c = CMatrix::zeros(n, n);
            for f in &frames[..t] {
                c += &f.received * f.received.adjoint();
            }
            c /= cplx(T::from_usize(t).unwrap_or_else(T::one));
            let trace = (0..n).fold(T::zero(), |acc, i| acc + c[(i, i)].re);
            let delta = T::lit(1e-3) * trace / T::from_usize(n).unwrap_or_else(T::one);
            add_diagonal(&mut c, delta);
            c
        }
        CovarianceMode::Conditional => {
            let est = inputs.estimate.ok_or(Error::MissingInput {
                mode: "conditional",
                what: "a pilot estimate",
            })?;
            let mut c = CMatrix::zeros(n, n);
            let mut white = T::one();
            for j in 0..cfg.users() {
                let betas = cfg.gain_column(j);
                let total = betas.iter().fold(cfg.eps(), |acc, &b| acc + b);
                let mut weight = T::one();
                white += cfg.power() * est.err_var[j];
                for &b in betas.iter().skip(1) {
                    let ratio = b / betas[0];
                    weight += ratio * ratio;
                    white += cfg.power() * (b - b * b / total);
                }
                let g = est.estimate.column(j);
                c += (g * g.adjoint()) * cplx(cfg.power() * weight);
            }
            add_diagonal(&mut c, white);
            c
        }
    };
    Ok(CovarianceModel { mode, matrix })
}

fn add_diagonal<T: Real>(c: &mut CMatrix<T>, value: T) {
    for i in 0..c.nrows() {
        c[(i, i)] += cplx(value);
    }
}

pub fn signal_basis<T: Real>(
    mode: SubspaceMode,
    cfg: &ScenarioConfig<T>,
    channel: Option<&ChannelRealization<T>>,
    estimate: Option<&PilotEstimate<T>>,
    cov: Option<&CovarianceModel<T>>,
) -> Result<SignalBasis<T>> {
    let n = cfg.antennas();
    let dim = cfg.signal_dim();
    if n < dim {
        return Err(Error::Dimension(format!(
            "{n} antennas cannot host a {dim}-dimensional signal subspace"
        )));
    }
    let stacked = match mode {
        SubspaceMode::Genie => channel
            .ok_or(Error::MissingInput {
                mode: "genie subspace",
                what: "a channel realization",
            })?
            .stacked(),
        SubspaceMode::TrainingSpan => {
            let ch = channel.ok_or(Error::MissingInput {
                mode: "training-span subspace",
                what: "a channel realization",
            })?;
            let est = estimate.ok_or(Error::MissingInput {
                mode: "training-span subspace",
                what: "a pilot estimate",
            })?;
            let mut cols: Vec<_> = ch.scaled[0].column_iter().map(|c| c.into_owned()).collect();
            if ch.cells() > 1 {
                cols.extend(est.estimate.column_iter().map(|c| c.into_owned()));
            }
            for g in ch.scaled.iter().skip(2) {
                cols.extend(g.column_iter().map(|c| c.into_owned()));
            }
            CMatrix::from_columns(&cols)
        }
        SubspaceMode::Eigen => {
            let cov = cov.ok_or(Error::MissingInput {
                mode: "eigen subspace",
                what: "a covariance model",
            })?;
            let (_, vectors) = linalg::hermitian_eigen(&cov.matrix);
            return Ok(SignalBasis {
                mode,
                basis: vectors.columns(0, dim).into_owned(),
            });
        }
    };
    let (basis, rank) = linalg::column_basis(&stacked);
    if rank < dim {
        return Err(Error::RankDeficient {
            what: "signal subspace",
            rank,
            expected: dim,
        });
    }
    Ok(SignalBasis { mode, basis })
}

/// Orthonormal basis of `span(U_s) ∩ range(Ĝ_1)^⊥`.
pub fn complement_basis<T: Real>(
    signal: &SignalBasis<T>,
    est: &PilotEstimate<T>,
) -> Result<ComplementBasis<T>> {
    let users = est.estimate.ncols();
    let (q, rank) = linalg::column_basis(&est.estimate);
    if rank < users {
        return Err(Error::RankDeficient {
            what: "in-cell estimate",
            rank,
            expected: users,
        });
    }
    let us = &signal.basis;
    let overlap = q.adjoint() * us;
    let null = linalg::null_space(&overlap);
    let basis = if null.ncols() == 0 {
        CMatrix::zeros(us.nrows(), 0)
    } else {
        us * null
    };
    let expected = us.ncols().saturating_sub(users);
    Ok(ComplementBasis {
        degenerate: basis.ncols() != expected,
        basis,
    })
}

/// Outer component `W̆ = -Ŭ (Ŭ† C Ŭ)^-1 Ŭ† C Ẇ`.
pub fn outer_component<T: Real>(
    complement: &ComplementBasis<T>,
    cov: &CovarianceModel<T>,
    inner: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    let u = &complement.basis;
    if u.ncols() == 0 {
        return Ok(CMatrix::zeros(inner.nrows(), inner.ncols()));
    }
    let cu = &cov.matrix * u;
    let mut reduced = u.adjoint() * &cu;
    // Enforce exact Hermitian symmetry before factorizing.
    let herm = (&reduced + reduced.adjoint()) * cplx(T::lit(0.5));
    reduced = herm;
    let cond = linalg::condition_number(&reduced);
    if cond > T::lit(1e12) {
        warn!(
            "complement covariance is ill-conditioned (cond = {:e})",
            cond.to_f64_lossy()
        );
    }
    let rhs = cu.adjoint() * inner;
    let coeffs = linalg::solve_hpd(&reduced, &rhs)?;
    Ok(-(u * coeffs))
}

/// Group-blind detector `w_k = ẇ_k + w̆_k` for every in-cell user.
pub fn group_blind_detector<T: Real>(
    est: &PilotEstimate<T>,
    cov: &CovarianceModel<T>,
    signal: &SignalBasis<T>,
    power: T,
) -> Result<DetectorBank<T>> {
    let inner = inner_mmse(est, power)?.weights;
    let complement = complement_basis(signal, est)?;
    let outer = outer_component(&complement, cov, &inner)?;
    Ok(DetectorBank {
        kind: DetectorKind::Gb,
        weights: &inner + outer,
        meta: Some(GroupBlindMeta {
            degenerate: complement.degenerate,
            complement: complement.basis,
            covariance: cov.mode,
            inner,
        }),
    })
}
