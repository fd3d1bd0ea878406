mod common;

use common::{brute_force_covariance, brute_force_terms, c, rel_frobenius};
use gbsim_core::channel::{
    draw_channel_realization, synthesize_symbol_period, ScenarioConfig, SymbolAlphabet,
};
use gbsim_core::detect::{
    covariance, group_blind_detector, inner_mmse, signal_basis, CovarianceInputs, CovarianceMode,
    SubspaceMode,
};
use gbsim_core::estimation::estimate_channels;
use gbsim_core::linalg::{column_basis, CMatrix, CVector};
use gbsim_core::metrics::{conditional_sinr, empirical_sinr, genie_sinr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn conditional_oracle_scenario() -> ScenarioConfig<f64> {
    ScenarioConfig::from_rows(
        8,
        10.0,
        0.1,
        &[vec![1.0, 0.8], vec![0.5, 0.3], vec![0.2, 0.4]],
    )
    .unwrap()
}

#[test]
fn conditional_covariance_matches_brute_force() {
    let cfg = conditional_oracle_scenario();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let ch = draw_channel_realization(&cfg, &mut rng);
    let est = estimate_channels(&cfg, &ch, &mut rng);
    let acc = brute_force_covariance(&cfg, &est, 100_000, &mut rng);

    let inputs = CovarianceInputs {
        estimate: Some(&est),
        ..Default::default()
    };
    let model = covariance(CovarianceMode::Conditional, &cfg, inputs).unwrap();
    let err = rel_frobenius(&acc, &model.matrix);
    assert!(err <= 0.02, "relative Frobenius error {err}");
}

#[test]
fn conditional_sinr_terms_match_brute_force() {
    let cfg = conditional_oracle_scenario();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let ch = draw_channel_realization(&cfg, &mut rng);
    let est = estimate_channels(&cfg, &ch, &mut rng);
    let p = cfg.power();
    let user = 1;
    let w = inner_mmse(&est, p).unwrap().column(user);

    let [err, contam, other] = brute_force_terms(&cfg, &est, user, &w, 100_000, &mut rng);
    let b = conditional_sinr(&cfg, &est, user, &w).unwrap();
    for (name, mc, closed) in [
        ("est_error", err, b.est_error),
        ("contamination", contam, b.contamination),
        ("other", other, b.other_interference),
    ] {
        let rel = (mc - closed).abs() / closed;
        assert!(
            rel <= 0.02,
            "{name}: brute force {mc} vs closed form {closed}"
        );
    }
}

#[test]
fn empirical_matches_genie_for_fixed_realization() {
    let cfg = ScenarioConfig::from_rows(32, 10.0, 0.05, &[vec![1.0, 0.6], vec![0.7, 0.2]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let ch = draw_channel_realization(&cfg, &mut rng);
    let est = estimate_channels(&cfg, &ch, &mut rng);
    let frames: Vec<_> = (0..10_000)
        .map(|_| synthesize_symbol_period(&cfg, &ch, SymbolAlphabet::Gaussian, &mut rng))
        .collect();
    let inputs = CovarianceInputs {
        channel: Some(&ch),
        estimate: Some(&est),
        frames: None,
    };
    let cov = covariance(CovarianceMode::Genie, &cfg, inputs).unwrap();
    let basis = signal_basis(SubspaceMode::Genie, &cfg, Some(&ch), Some(&est), None).unwrap();
    let bank = group_blind_detector(&est, &cov, &basis, cfg.power()).unwrap();
    for k in 0..2 {
        let w = bank.column(k);
        let e: f64 = empirical_sinr(&cfg, &ch, &est, &frames, k, &w)
            .unwrap()
            .sinr();
        let g: f64 = genie_sinr(&cfg, &ch, &est, k, &w).unwrap().sinr();
        assert!(
            (e - g).abs() / g <= 0.03,
            "user {k}: empirical {e} vs genie {g}"
        );
    }
}

#[test]
fn sample_covariance_converges_to_received_covariance() {
    let cfg = ScenarioConfig::from_rows(8, 5.0, 0.0, &[vec![1.0], vec![0.8]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let ch = draw_channel_realization(&cfg, &mut rng);
    let est = estimate_channels(&cfg, &ch, &mut rng);
    let frames: Vec<_> = (0..100_000)
        .map(|_| synthesize_symbol_period(&cfg, &ch, SymbolAlphabet::Gaussian, &mut rng))
        .collect();
    let inputs = CovarianceInputs {
        channel: Some(&ch),
        estimate: Some(&est),
        frames: Some(&frames),
    };
    let sample = covariance(CovarianceMode::Sample { frames: 100_000 }, &cfg, inputs).unwrap();
    // Oracle: covariance of y given the channels.
    let mut truth = CMatrix::identity(8, 8);
    for g in &ch.scaled {
        truth += (g * g.adjoint()) * c(cfg.power());
    }
    assert!(rel_frobenius(&sample.matrix, &truth) <= 0.03);

    // Without contamination and training noise the genie model is that same
    // covariance.
    let single = ScenarioConfig::from_rows(8, 5.0, 0.0, &[vec![1.0, 0.5]]).unwrap();
    let ch = draw_channel_realization(&single, &mut rng);
    let est = estimate_channels(&single, &ch, &mut rng);
    let frames: Vec<_> = (0..100_000)
        .map(|_| synthesize_symbol_period(&single, &ch, SymbolAlphabet::Gaussian, &mut rng))
        .collect();
    let inputs = CovarianceInputs {
        channel: Some(&ch),
        estimate: Some(&est),
        frames: Some(&frames),
    };
    let sample = covariance(CovarianceMode::Sample { frames: 100_000 }, &single, inputs).unwrap();
    let genie = covariance(CovarianceMode::Genie, &single, inputs).unwrap();
    assert!(rel_frobenius(&sample.matrix, &genie.matrix) <= 0.03);
}

#[test]
fn complement_matches_gram_schmidt_with_three_cells() {
    // Oracle: Gram-Schmidt of [Ĝ_1, G_1 .. G_L], keeping the directions
    // after the in-cell estimates; valid at eps = 0 where range(Ĝ_1) lies in
    // the signal subspace.
    let cfg = ScenarioConfig::from_rows(
        10,
        10.0,
        0.0,
        &[vec![1.0, 0.5], vec![0.3, 0.6], vec![0.2, 0.1]],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let ch = draw_channel_realization(&cfg, &mut rng);
    let est = estimate_channels(&cfg, &ch, &mut rng);
    let mut basis: Vec<CVector<f64>> = Vec::new();
    let mut candidates: Vec<CVector<f64>> =
        est.estimate.column_iter().map(|c| c.into_owned()).collect();
    for g in &ch.scaled {
        candidates.extend(g.column_iter().map(|c| c.into_owned()));
    }
    for v in candidates {
        let mut r = v.clone();
        for q in &basis {
            r -= q * q.dotc(&r);
        }
        if r.norm() > 1e-8 * v.norm() {
            basis.push(r.normalize());
        }
    }
    assert_eq!(basis.len(), 6);
    let oracle = CMatrix::from_columns(&basis[2..]);
    let us = signal_basis(SubspaceMode::Genie, &cfg, Some(&ch), Some(&est), None).unwrap();
    let comp = gbsim_core::detect::complement_basis(&us, &est).unwrap();
    let p1 = &comp.basis * comp.basis.adjoint();
    let p2 = &oracle * oracle.adjoint();
    assert!((p1 - p2).norm() < 1e-9);
}

#[test]
fn estimate_lies_in_same_pilot_span_without_training_noise() {
    let cfg = ScenarioConfig::from_rows(
        64,
        10.0,
        0.0,
        &[vec![1.0, 2.0], vec![0.3, 0.5], vec![0.7, 0.1]],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let ch = draw_channel_realization(&cfg, &mut rng);
    let est = estimate_channels(&cfg, &ch, &mut rng);
    for k in 0..2 {
        let span = CMatrix::from_columns(
            &ch.scaled
                .iter()
                .map(|g| g.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        let (q, _) = column_basis(&span);
        let gh = est.estimate.column(k);
        let residual = gh - &q * (q.adjoint() * gh);
        assert!(residual.norm() <= 1e-10 * gh.norm());
    }
}

#[test]
fn channels_are_asymptotically_orthogonal() {
    let n = 4096;
    let cfg = ScenarioConfig::from_rows(n, 1.0, 0.0, &[vec![1.0, 0.5], vec![2.0, 0.25]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let ch = draw_channel_realization(&cfg, &mut rng);
    let nf = n as f64;
    let cols: Vec<(f64, CVector<f64>)> = (0..2)
        .flat_map(|l| (0..2).map(move |k| (l, k)))
        .map(|(l, k)| (cfg.gain(l, k), ch.scaled[l].column(k).into_owned()))
        .collect();
    for (i, (bi, gi)) in cols.iter().enumerate() {
        for (j, (bj, gj)) in cols.iter().enumerate() {
            let v = gi.dotc(gj) / c(nf);
            if i == j {
                assert!((v.re - bi).abs() <= 3.0 * bi / nf.sqrt());
            } else {
                assert!(v.norm() <= 3.0 * (bi * bj).sqrt() / nf.sqrt());
            }
        }
    }
}

#[test]
fn estimation_error_statistics() {
    // eps = 0, symmetric gains: per-antenna error variance 0.5, and the
    // estimate is orthogonal to its error.
    let n = 16_384;
    let cfg = ScenarioConfig::from_rows(n, 1.0, 0.0, &[vec![1.0], vec![1.0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let ch = draw_channel_realization(&cfg, &mut rng);
    let est = estimate_channels(&cfg, &ch, &mut rng);
    let nf = n as f64;
    let var = est.error.norm_squared() / nf;
    assert!((var - 0.5).abs() <= 0.05 * 0.5);
    let cross = est.estimate.column(0).dotc(&est.error.column(0)) / c(nf);
    assert!(cross.norm() <= 5.0 / nf.sqrt());
    let own = est.estimate.norm_squared() / nf;
    assert!((own - est.phi[0]).abs() <= 5.0 * est.phi[0] / nf.sqrt());
}

#[test]
fn group_blind_beats_in_cell_mmse_on_most_realizations() {
    let cfg = ScenarioConfig::from_rows(256, 100.0, 1e-3, &[vec![1.0], vec![1.0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let trials = 100;
    let mut wins = 0;
    for _ in 0..trials {
        let ch = draw_channel_realization(&cfg, &mut rng);
        let est = estimate_channels(&cfg, &ch, &mut rng);
        let inputs = CovarianceInputs {
            channel: Some(&ch),
            estimate: Some(&est),
            frames: None,
        };
        let cov = covariance(CovarianceMode::Genie, &cfg, inputs).unwrap();
        let basis = signal_basis(SubspaceMode::Genie, &cfg, Some(&ch), Some(&est), None).unwrap();
        let gb = group_blind_detector(&est, &cov, &basis, cfg.power()).unwrap();
        let ngb = inner_mmse(&est, cfg.power()).unwrap();
        let g = genie_sinr(&cfg, &ch, &est, 0, &gb.column(0))
            .unwrap()
            .sinr();
        let m = genie_sinr(&cfg, &ch, &est, 0, &ngb.column(0))
            .unwrap()
            .sinr();
        if g > m {
            wins += 1;
        }
    }
    assert!(wins * 100 >= 95 * trials, "group-blind won {wins}/{trials}");
}

#[test]
fn single_precision_pipeline_tracks_double() {
    let cfg64 = ScenarioConfig::from_rows(64, 100.0, 1e-3, &[vec![1.0], vec![1.0]]).unwrap();
    let cfg32 = ScenarioConfig::<f32>::from_rows(64, 100.0, 1e-3, &[vec![1.0], vec![1.0]]).unwrap();
    let run32 = {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let ch = draw_channel_realization(&cfg32, &mut rng);
        let est = estimate_channels(&cfg32, &ch, &mut rng);
        let inputs = CovarianceInputs {
            channel: Some(&ch),
            estimate: Some(&est),
            frames: None,
        };
        let cov = covariance(CovarianceMode::Genie, &cfg32, inputs).unwrap();
        let basis = signal_basis(SubspaceMode::Genie, &cfg32, Some(&ch), Some(&est), None).unwrap();
        let gb = group_blind_detector(&est, &cov, &basis, cfg32.power()).unwrap();
        genie_sinr(&cfg32, &ch, &est, 0, &gb.column(0))
            .unwrap()
            .sinr() as f64
    };
    let run64 = {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let ch = draw_channel_realization(&cfg64, &mut rng);
        let est = estimate_channels(&cfg64, &ch, &mut rng);
        let inputs = CovarianceInputs {
            channel: Some(&ch),
            estimate: Some(&est),
            frames: None,
        };
        let cov = covariance(CovarianceMode::Genie, &cfg64, inputs).unwrap();
        let basis = signal_basis(SubspaceMode::Genie, &cfg64, Some(&ch), Some(&est), None).unwrap();
        let gb = group_blind_detector(&est, &cov, &basis, cfg64.power()).unwrap();
        genie_sinr(&cfg64, &ch, &est, 0, &gb.column(0))
            .unwrap()
            .sinr()
    };
    assert!(
        (run32 - run64).abs() / run64 < 1e-3,
        "f32 {run32} vs f64 {run64}"
    );
}
