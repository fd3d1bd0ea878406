//! Multi-cell uplink channel model.
//!
//! The reference base station (cell index 0 here) sees, during one symbol
//! period,
//!
//! ```text
//! y = sum_l G_l x_l + n,    G_l = H_l diag(beta_l1, ..., beta_lK)^(1/2)
//! ```
//!
//! with i.i.d. CN(0, 1) small-scale coefficients in `H_l`, per-user symbols of
//! power `P` and unit-variance white noise.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::scalar::{complex_normal, cplx, Real};

/// Full parameterization of the uplink model seen by the reference cell.
///
/// Cell 0 is the reference cell. `gains[(l, k)]` is the large-scale gain
/// between user `k` of cell `l` and the reference base station.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T: Real> {
    cells: usize,
    users: usize,
    antennas: usize,
    power: T,
    eps: T,
    gains: DMatrix<T>,
}

impl<T: Real> ScenarioConfig<T> {
    pub fn new(antennas: usize, power: T, eps: T, gains: DMatrix<T>) -> Result<Self> {
        let cfg = Self {
            cells: gains.nrows(),
            users: gains.ncols(),
            antennas,
            power,
            eps,
            gains,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Gains built from per-cell rows, `rows[l][k]`.
    pub fn from_rows(antennas: usize, power: T, eps: T, rows: &[Vec<T>]) -> Result<Self> {
        let cells = rows.len();
        let users = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != users) {
            return Err(Error::InvalidScenario(
                "gain rows have unequal length".into(),
            ));
        }
        let gains = DMatrix::from_fn(cells, users, |l, k| rows[l][k]);
        Self::new(antennas, power, eps, gains)
    }

    /// Reference-cell gains equal to one and every other cell attenuated by
    /// `ratio` (linear, `beta_1k / beta_lk`).
    pub fn with_ratio(
        cells: usize,
        users: usize,
        antennas: usize,
        power: T,
        eps: T,
        ratio: T,
    ) -> Result<Self> {
        let gains = DMatrix::from_fn(cells, users, |l, _| {
            if l == 0 {
                T::one()
            } else {
                T::one() / ratio
            }
        });
        Self::new(antennas, power, eps, gains)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells == 0 || self.users == 0 {
            return Err(Error::InvalidScenario(
                "need at least one cell and one user".into(),
            ));
        }
        if self.antennas == 0 {
            return Err(Error::InvalidScenario("need at least one antenna".into()));
        }
        if !self.power.is_nonnegative_finite() {
            return Err(Error::InvalidScenario(
                "power must be finite and non-negative".into(),
            ));
        }
        if !self.eps.is_nonnegative_finite() {
            return Err(Error::InvalidScenario(
                "eps must be finite and non-negative".into(),
            ));
        }
        for l in 0..self.cells {
            for k in 0..self.users {
                let b = self.gains[(l, k)];
                if !b.is_positive_finite() {
                    return Err(Error::InvalidScenario(format!(
                        "gain beta[{l}][{k}] must be positive and finite"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn power(&self) -> T {
        self.power
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn gains(&self) -> &DMatrix<T> {
        &self.gains
    }

    pub fn gain(&self, cell: usize, user: usize) -> T {
        self.gains[(cell, user)]
    }

    /// Gains of every cell for pilot/user index `user`.
    pub fn gain_column(&self, user: usize) -> Vec<T> {
        self.gains.column(user).iter().copied().collect()
    }

    /// Dimension of the signal subspace, `K * L`.
    pub fn signal_dim(&self) -> usize {
        self.cells * self.users
    }

    pub fn with_antennas(&self, antennas: usize) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.antennas = antennas;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_power(&self, power: T) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.power = power;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_eps(&self, eps: T) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.eps = eps;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One draw of every small-scale channel seen by the reference base station.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    /// `H_l`, one n×K matrix per cell.
    pub small_scale: Vec<CMatrix<T>>,
    /// `G_l = H_l R_l^(1/2)`.
    pub scaled: Vec<CMatrix<T>>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn cells(&self) -> usize {
        self.scaled.len()
    }

    pub fn antennas(&self) -> usize {
        self.scaled.first().map_or(0, |g| g.nrows())
    }

    /// `[G_1 ... G_L]` side by side, n×KL.
    pub fn stacked(&self) -> CMatrix<T> {
        let cols: Vec<_> = self
            .scaled
            .iter()
            .flat_map(|g| g.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
            .collect();
        CMatrix::from_columns(&cols)
    }
}

/// Symbol alphabet used by [`synthesize_symbol_period`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolAlphabet {
    /// Circularly-symmetric Gaussian codebook.
    #[default]
    Gaussian,
    /// Unit-modulus QPSK scaled to power `P`.
    Qpsk,
}

/// Transmitted symbols, noise, and received vector for one symbol period.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame<T: Real> {
    /// L×K symbols.
    pub symbols: CMatrix<T>,
    pub noise: CVector<T>,
    pub received: CVector<T>,
}

pub fn draw_channel_realization<T: Real, R: Rng + ?Sized>(
    cfg: &ScenarioConfig<T>,
    rng: &mut R,
) -> ChannelRealization<T> {
    let n = cfg.antennas();
    let k = cfg.users();
    let mut small_scale = Vec::with_capacity(cfg.cells());
    let mut scaled = Vec::with_capacity(cfg.cells());
    for l in 0..cfg.cells() {
        // Column-major fill: user by user, antenna by antenna.
        let data: Vec<Complex<T>> = (0..n * k).map(|_| complex_normal(rng)).collect();
        let h = CMatrix::from_vec(n, k, data);
        let mut g = h.clone();
        for (user, mut col) in g.column_iter_mut().enumerate() {
            col *= cplx(cfg.gain(l, user).sqrt());
        }
        small_scale.push(h);
        scaled.push(g);
    }
    ChannelRealization {
        small_scale,
        scaled,
    }
}

/// `sum_l G_l x_l + noise`.
pub fn assemble_received<T: Real>(
    ch: &ChannelRealization<T>,
    symbols: &CMatrix<T>,
    noise: &CVector<T>,
) -> CVector<T> {
    let mut y = noise.clone();
    for (l, g) in ch.scaled.iter().enumerate() {
        let x = symbols.row(l).transpose();
        y += g * x;
    }
    y
}

pub fn synthesize_symbol_period<T: Real, R: Rng + ?Sized>(
    cfg: &ScenarioConfig<T>,
    ch: &ChannelRealization<T>,
    alphabet: SymbolAlphabet,
    rng: &mut R,
) -> SymbolFrame<T> {
    let amp = cfg.power().sqrt();
    let (l, k) = (cfg.cells(), cfg.users());
    let data: Vec<Complex<T>> = (0..l * k)
        .map(|_| match alphabet {
            SymbolAlphabet::Gaussian => complex_normal::<T, R>(rng) * amp,
            SymbolAlphabet::Qpsk => {
                let s = T::lit(std::f64::consts::FRAC_1_SQRT_2) * amp;
                let re = if rng.random::<bool>() { s } else { -s };
                let im = if rng.random::<bool>() { s } else { -s };
                Complex::new(re, im)
            }
        })
        .collect();
    let symbols = CMatrix::from_vec(l, k, data);
    let noise = CVector::from_fn(cfg.antennas(), |_, _| complex_normal(rng));
    let received = assemble_received(ch, &symbols, &noise);
    SymbolFrame {
        symbols,
        noise,
        received,
    }
}
