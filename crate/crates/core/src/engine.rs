//! Deterministic Monte Carlo sweeps over antenna counts and detectors.
//!
//! Every trial owns a random stream derived from `(seed, n, trial)` by
//! [`seed_substream`]. All detectors at the same antenna count therefore see
//! the same channel draws, grid order does not affect any value, and the
//! per-trial results are bitwise identical for any worker count. Means are
//! reduced in trial order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    draw_channel_realization, synthesize_symbol_period, ScenarioConfig, SymbolAlphabet,
};
use crate::detect::{
    covariance, group_blind_detector, inner_mmse, matched_filter, signal_basis, CovarianceInputs,
    CovarianceMode, DetectorBank, DetectorKind, SubspaceMode,
};
use crate::error::{Error, Result};
use crate::estimation::estimate_channels;
use crate::metrics::{
    asymptotic_gb_sinr, asymptotic_ngb_sinr, conditional_sinr, empirical_sinr, genie_sinr,
    mean_ci95,
};
use crate::scalar::Real;

/// Which SINR evaluation the engine averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinrEvaluation {
    /// Channels fixed, expectation over symbols and noise.
    #[default]
    Genie,
    /// Channels averaged given the in-cell estimates.
    Conditional,
    /// Frame average with stored symbols and noise.
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan<T: Real> {
    pub scenario_id: String,
    /// Base scenario; its antenna count is replaced by each entry of `n_list`.
    pub scenario: ScenarioConfig<T>,
    pub n_list: Vec<usize>,
    pub detectors: Vec<DetectorKind>,
    pub covariance: CovarianceMode,
    pub subspace: SubspaceMode,
    pub sinr: SinrEvaluation,
    pub symbols: SymbolAlphabet,
    pub trials: usize,
    /// Frames per trial for empirical SINR evaluation.
    pub frames: usize,
    pub seed: u64,
}

impl<T: Real> ExperimentPlan<T> {
    /// Plan with genie covariance, genie subspace and genie SINR evaluation.
    pub fn new(
        scenario_id: impl Into<String>,
        scenario: ScenarioConfig<T>,
        n_list: Vec<usize>,
        detectors: Vec<DetectorKind>,
        trials: usize,
        seed: u64,
    ) -> Self {
        Self {
            scenario_id: scenario_id.into(),
            scenario,
            n_list,
            detectors,
            covariance: CovarianceMode::Genie,
            subspace: SubspaceMode::Genie,
            sinr: SinrEvaluation::Genie,
            symbols: SymbolAlphabet::Gaussian,
            trials,
            frames: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.n_list.is_empty() {
            return Err(Error::InvalidPlan("antenna list is empty".into()));
        }
        if self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPlan(
                "antenna list must be positive and strictly ascending".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidPlan("trials must be at least 1".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::InvalidPlan("no detectors requested".into()));
        }
        if self.sinr == SinrEvaluation::Empirical && self.frames == 0 {
            return Err(Error::InvalidPlan("empirical SINR needs frames > 0".into()));
        }
        if let CovarianceMode::Sample { frames } = self.covariance {
            if self.detectors.contains(&DetectorKind::Gb) {
                let dim = self.scenario.signal_dim();
                if let Some(&n) = self.n_list.iter().find(|&&n| n >= dim && frames < n) {
                    return Err(Error::InvalidPlan(format!(
                        "sample covariance with {frames} frames cannot serve {n} antennas"
                    )));
                }
            }
        }
        Ok(())
    }

    fn sorted_detectors(&self) -> Vec<DetectorKind> {
        let mut d = self.detectors.clone();
        d.sort();
        d.dedup();
        d
    }

    fn frames_needed(&self) -> usize {
        let mut count = 0;
        if self.sinr == SinrEvaluation::Empirical {
            count = self.frames;
        }
        if let CovarianceMode::Sample { frames } = self.covariance {
            if self.detectors.contains(&DetectorKind::Gb) {
                count = count.max(frames);
            }
        }
        count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// Group-blind detection needs at least `K * L` antennas.
    Infeasible,
}

/// Aggregated result for one (scenario, detector, n, user) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub scenario: String,
    pub detector: DetectorKind,
    pub cov_mode: String,
    #[serde(rename = "L")]
    pub cells: usize,
    #[serde(rename = "K")]
    pub users: usize,
    pub n: usize,
    pub user: usize,
    pub snr_db: f64,
    pub eps: f64,
    /// Trials that entered the means.
    pub trials: usize,
    pub mean_sinr: f64,
    pub mean_rate: f64,
    pub rate_ci95: f64,
    /// Closed-form limit, two-cell scenarios only.
    pub asym_sinr: Option<f64>,
    pub asym_rate: Option<f64>,
    /// Trials whose complement rank was not `K(L-1)` or whose basis
    /// construction failed; failed ones are excluded from the means.
    pub degenerate_trials: usize,
    pub status: PointStatus,
}

/// Independent, reproducible stream for one trial at one antenna count.
pub fn seed_substream(master_seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    key[16..24].copy_from_slice(&trial.to_le_bytes());
    key[24..].copy_from_slice(b"gbsim\0v1");
    ChaCha8Rng::from_seed(key)
}

/// Per-user SINR of one detector in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutcome {
    pub kind: DetectorKind,
    /// `None` when the detector could not be built for this realization.
    pub sinr: Option<Vec<f64>>,
    pub degenerate: bool,
}

/// Runs the full pipeline once for `cfg` (antenna count already set).
pub fn simulate_trial<T: Real>(
    plan: &ExperimentPlan<T>,
    cfg: &ScenarioConfig<T>,
    trial: u64,
) -> Vec<DetectorOutcome> {
    let mut rng = seed_substream(plan.seed, cfg.antennas() as u64, trial);
    let ch = draw_channel_realization(cfg, &mut rng);
    let est = estimate_channels(cfg, &ch, &mut rng);
    let frames: Vec<_> = (0..plan.frames_needed())
        .map(|_| synthesize_symbol_period(cfg, &ch, plan.symbols, &mut rng))
        .collect();
    let gb_feasible = cfg.antennas() >= cfg.signal_dim();

    let build = |kind: DetectorKind| -> Result<DetectorBank<T>> {
        match kind {
            DetectorKind::Mf => Ok(matched_filter(&est)),
            DetectorKind::NgbMmse => inner_mmse(&est, cfg.power()),
            DetectorKind::Gb => {
                let inputs = CovarianceInputs {
                    channel: Some(&ch),
                    estimate: Some(&est),
                    frames: Some(&frames),
                };
                let cov = covariance(plan.covariance, cfg, inputs)?;
                let basis = signal_basis(plan.subspace, cfg, Some(&ch), Some(&est), Some(&cov))?;
                group_blind_detector(&est, &cov, &basis, cfg.power())
            }
        }
    };

    plan.sorted_detectors()
        .into_iter()
        .filter(|&kind| kind != DetectorKind::Gb || gb_feasible)
        .map(|kind| {
            let evaluated = build(kind).and_then(|bank| {
                let degenerate = bank.meta.as_ref().is_some_and(|m| m.degenerate);
                let sinr = (0..cfg.users())
                    .map(|k| {
                        let w = bank.column(k);
                        let b = match plan.sinr {
                            SinrEvaluation::Genie => genie_sinr(cfg, &ch, &est, k, &w)?,
                            SinrEvaluation::Conditional => conditional_sinr(cfg, &est, k, &w)?,
                            SinrEvaluation::Empirical => {
                                empirical_sinr(cfg, &ch, &est, &frames, k, &w)?
                            }
                        };
                        Ok(b.sinr().to_f64_lossy())
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok((sinr, degenerate))
            });
            match evaluated {
                Ok((sinr, degenerate)) => DetectorOutcome {
                    kind,
                    sinr: Some(sinr),
                    degenerate,
                },
                Err(e) => {
                    log::debug!(
                        "trial {trial} at n={}: {kind:?} failed: {e}",
                        cfg.antennas()
                    );
                    DetectorOutcome {
                        kind,
                        sinr: None,
                        degenerate: true,
                    }
                }
            }
        })
        .collect()
}

/// Runs every grid point of `plan` on `threads` workers (`<= 1` runs inline).
/// Records are ordered by detector, antenna count, then user.
pub fn run_plan<T: Real>(plan: &ExperimentPlan<T>, threads: usize) -> Result<Vec<MetricsRecord>> {
    plan.validate()?;
    let configs = plan
        .n_list
        .iter()
        .map(|&n| plan.scenario.with_antennas(n))
        .collect::<Result<Vec<_>>>()?;
    let units: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|p| (0..plan.trials as u64).map(move |t| (p, t)))
        .collect();
    let run_unit = |&(p, t): &(usize, u64)| simulate_trial(plan, &configs[p], t);
    let outcomes: Vec<Vec<DetectorOutcome>> = if threads <= 1 {
        units.iter().map(run_unit).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?;
        pool.install(|| units.par_iter().map(run_unit).collect())
    };

    let detectors = plan.sorted_detectors();
    let cfg = &plan.scenario;
    let mut records = Vec::new();
    for &kind in &detectors {
        for (p, n_cfg) in configs.iter().enumerate() {
            let per_trial = &outcomes[p * plan.trials..(p + 1) * plan.trials];
            for user in 0..cfg.users() {
                records.push(aggregate(plan, n_cfg, kind, user, per_trial));
            }
        }
    }
    Ok(records)
}

fn aggregate<T: Real>(
    plan: &ExperimentPlan<T>,
    cfg: &ScenarioConfig<T>,
    kind: DetectorKind,
    user: usize,
    per_trial: &[Vec<DetectorOutcome>],
) -> MetricsRecord {
    let mut sinrs = Vec::with_capacity(per_trial.len());
    let mut degenerate = 0;
    let mut present = false;
    for trial in per_trial {
        if let Some(o) = trial.iter().find(|o| o.kind == kind) {
            present = true;
            if o.degenerate {
                degenerate += 1;
            }
            if let Some(s) = &o.sinr {
                sinrs.push(s[user]);
            }
        }
    }
    let (asym_sinr, asym_rate) = asymptotic(cfg, kind, user);
    let power = cfg.power().to_f64_lossy();
    let mut record = MetricsRecord {
        scenario: plan.scenario_id.clone(),
        detector: kind,
        cov_mode: plan.covariance.as_str().to_string(),
        cells: cfg.cells(),
        users: cfg.users(),
        n: cfg.antennas(),
        user,
        snr_db: 10.0 * power.log10(),
        eps: cfg.eps().to_f64_lossy(),
        trials: sinrs.len(),
        mean_sinr: f64::NAN,
        mean_rate: f64::NAN,
        rate_ci95: f64::NAN,
        asym_sinr,
        asym_rate,
        degenerate_trials: degenerate,
        status: if present {
            PointStatus::Ok
        } else {
            PointStatus::Infeasible
        },
    };
    if !sinrs.is_empty() {
        let rates: Vec<f64> = sinrs.iter().map(|g| (1.0 + g).log2()).collect();
        let (mean_sinr, _) = mean_ci95(&sinrs);
        let (mean_rate, ci) = mean_ci95(&rates);
        record.mean_sinr = mean_sinr;
        record.mean_rate = mean_rate;
        record.rate_ci95 = ci;
    }
    record
}

fn asymptotic<T: Real>(
    cfg: &ScenarioConfig<T>,
    kind: DetectorKind,
    user: usize,
) -> (Option<f64>, Option<f64>) {
    if cfg.cells() != 2 {
        return (None, None);
    }
    let b1 = cfg.gain(0, user).to_f64_lossy();
    let b2 = cfg.gain(1, user).to_f64_lossy();
    let value = match kind {
        DetectorKind::Gb => asymptotic_gb_sinr(b1, b2, cfg.eps().to_f64_lossy()),
        DetectorKind::Mf | DetectorKind::NgbMmse => asymptotic_ngb_sinr(&[b1, b2]),
    };
    match value {
        Ok(g) => (Some(g), Some((1.0 + g).log2())),
        Err(_) => (None, None),
    }
}
