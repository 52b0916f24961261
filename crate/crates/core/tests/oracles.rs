//! Solver results checked against independent oracles: fine grids, finite
//! differences, closed forms and an external eigen-solver.

use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;

use smgee::beamforming::{link_beamformers, BeamformerMode};
use smgee::channel::generate_channel;
use smgee::gee::{
    corollary1_bracket, gee, optimal_integer_k, optimal_rho, stationary_k, stationary_rho, stationary_rho_in,
    GeeProblem, RhoBracket,
};
use smgee::rate::{sample_gains, GainSampleSet};
use smgee::rng::{derive_stream, Domain};
use smgee::solver::{algorithm1, grid_oracle};
use smgee::{ChannelRealization, SystemConfig};

const E: f64 = std::f64::consts::E;

/// 1/(e − 1): the stationary user count for a = 1, ρ = 1, P_c = 1, from the
/// fine-grid search in `stationary_k_matches_fine_grid`.
const K_S_SINGLE_SAMPLE: f64 = 0.581_976_706_869_326_4;

fn single(a: f64, rho_max: f64, k_min: usize, k_max: usize) -> GeeProblem<f64> {
    GeeProblem::new(GainSampleSet::from_samples(vec![a]).unwrap(), 1.0, rho_max, k_min, k_max, 1.0).unwrap()
}

fn preset_problem(seed: u64, n: usize, rho_max_dbw: f64) -> GeeProblem<f64> {
    let cfg = SystemConfig { seed, n_samples: n, rho_max_dbw, ..SystemConfig::default() };
    smgee::experiments::problem_from_config(&cfg, sample_gains(&cfg).unwrap()).unwrap()
}

#[test]
fn stationary_k_matches_fine_grid() {
    // ψ(K) = (1 + K)[ln(1 + 1/K) − (1/K)/(1 + 1/K)] − K ln(1 + 1/K), scanned
    // on a uniform grid for its sign change.
    let psi = |k: f64| {
        let x = 1.0 / k;
        (1.0 + k) * ((1.0 + x).ln() - x / (1.0 + x)) - k * (1.0 + x).ln()
    };
    let step = 1e-6;
    let mut root = None;
    let mut prev = psi(step);
    for i in 2..5_000_000 {
        let k = i as f64 * step;
        let cur = psi(k);
        if prev > 0.0 && cur <= 0.0 {
            root = Some(k - step / 2.0);
            break;
        }
        prev = cur;
    }
    let grid_root = root.expect("sign change on the grid");
    assert!((grid_root - K_S_SINGLE_SAMPLE).abs() < step);
    assert!((K_S_SINGLE_SAMPLE - 1.0 / (E - 1.0)).abs() < 1e-15);

    let p = single(1.0, 10.0, 1, 4);
    let k_s = stationary_k(&p, 1.0).unwrap();
    assert!((k_s - K_S_SINGLE_SAMPLE).abs() < 1e-9, "{k_s}");
}

#[test]
fn stationary_power_scales_with_users() {
    let p = preset_problem(3, 2000, 10.0);
    let q = stationary_rho(&p, 1.0).unwrap();
    for k in [2.0, 3.5, 17.0] {
        let rho = stationary_rho(&p, k).unwrap();
        assert!((rho - k * q).abs() <= 1e-9 * rho, "k = {k}");
    }
}

#[test]
fn stationary_users_scale_with_power() {
    let p = preset_problem(4, 2000, 10.0);
    let base = stationary_k(&p, 1.0).unwrap();
    for c in [0.1, 2.0, 30.0] {
        let k = stationary_k(&p, c).unwrap();
        assert!((k - c * base).abs() <= 1e-9 * k, "c = {c}");
    }
}

#[test]
fn finite_difference_gradients_vanish() {
    let p = preset_problem(5, 2000, 10.0);
    for k in [1.0, 4.0, 9.0] {
        let rho = stationary_rho(&p, k).unwrap();
        let h = 1e-6 * rho;
        let d = (gee(&p, k, rho + h).unwrap() - gee(&p, k, rho - h).unwrap()) / (2.0 * h);
        assert!(d.abs() < 1e-6, "∂ρ at k = {k}: {d}");
    }
    for rho in [0.3, 1.0, 6.0] {
        let k = stationary_k(&p, rho).unwrap();
        let h = 1e-6 * k;
        let d = (gee(&p, k + h, rho).unwrap() - gee(&p, k - h, rho).unwrap()) / (2.0 * h);
        assert!(d.abs() < 1e-6, "∂K at ρ = {rho}: {d}");
    }
    let one = single(1.0, 10.0, 1, 1);
    let h = 1e-6 * K_S_SINGLE_SAMPLE;
    let d = (gee(&one, K_S_SINGLE_SAMPLE + h, 1.0).unwrap() - gee(&one, K_S_SINGLE_SAMPLE - h, 1.0).unwrap()) / (2.0 * h);
    assert!(d.abs() < 1e-6);
}

#[test]
fn optimal_power_beats_power_grid() {
    for (seed, dbw) in [(6, 0.0), (7, 10.0), (8, 3.0)] {
        let p = preset_problem(seed, 1000, dbw);
        for k in [1.0, 2.0, 5.0, 20.0] {
            let rho = optimal_rho(&p, k).unwrap();
            assert!(rho <= p.rho_max);
            let best = gee(&p, k, rho).unwrap();
            let grid_best = (0..1000)
                .map(|i| gee(&p, k, p.rho_max * i as f64 / 999.0).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(best >= grid_best - 1e-9, "seed {seed} k {k}: {best} < {grid_best}");
        }
    }
}

#[test]
fn unimodal_in_power() {
    let p = preset_problem(9, 1000, 10.0);
    for k in [1.0, 6.0] {
        let rho_s = stationary_rho(&p, k).unwrap();
        let top = 4.0 * rho_s;
        let values: Vec<(f64, f64)> = (0..1000)
            .map(|i| {
                let rho = top * i as f64 / 999.0;
                (rho, gee(&p, k, rho).unwrap())
            })
            .collect();
        for w in values.windows(2) {
            let ((r0, g0), (r1, g1)) = (w[0], w[1]);
            if r1 <= rho_s {
                assert!(g1 >= g0 - 1e-14, "decrease before peak at {r0}");
            } else if r0 >= rho_s {
                assert!(g1 <= g0 + 1e-14, "increase after peak at {r0}");
            }
        }
    }
}

#[test]
fn integer_k_beats_every_feasible_integer() {
    for seed in 10..14 {
        let p = preset_problem(seed, 800, 10.0);
        for rho in [0.05, 0.7, 3.0, 10.0] {
            let k = optimal_integer_k(&p, rho).unwrap();
            let best = gee(&p, k as f64, rho).unwrap();
            for other in p.k_min..=p.k_max {
                let g = gee(&p, other as f64, rho).unwrap();
                assert!(best >= g - 1e-12 * g, "seed {seed} ρ {rho}: K={k} loses to K={other}");
            }
        }
    }
}

#[test]
fn bracket_branch_follows_user_count() {
    let p = preset_problem(15, 1000, 10.0);
    let rho_prev = stationary_rho(&p, 3.0).unwrap();
    let up = corollary1_bracket(&p, 4.0, rho_prev);
    assert_eq!(up, RhoBracket { lo: rho_prev, hi: None });
    let down = corollary1_bracket(&p, 2.0, rho_prev);
    assert_eq!(down, RhoBracket { lo: 0.0, hi: Some(rho_prev) });
    // Same user count: either branch, root at the previous point.
    let same = corollary1_bracket(&p, 3.0, rho_prev);
    let root = stationary_rho_in(&p, 3.0, same).unwrap();
    assert!((root - rho_prev).abs() <= 1e-9 * rho_prev);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracketed_and_free_roots_agree(
        samples in proptest::collection::vec(0.0f64..60.0, 1..40),
        k_prev in 1usize..20,
        k_next in 1usize..20,
        p_c in 0.05f64..5.0,
    ) {
        prop_assume!(samples.iter().any(|&a| a > 1e-3));
        let p = GeeProblem::new(GainSampleSet::from_samples(samples).unwrap(), p_c, 10.0, 1, 20, 1.0).unwrap();
        let rho_prev = stationary_rho(&p, k_prev as f64).unwrap();
        let bracket = corollary1_bracket(&p, k_next as f64, rho_prev);
        let free = stationary_rho(&p, k_next as f64).unwrap();
        let inside = stationary_rho_in(&p, k_next as f64, bracket).unwrap();
        prop_assert!(bracket.contains(free, 1e-9));
        prop_assert!((free - inside).abs() <= 1e-9 * free);
    }

    #[test]
    fn objective_is_homogeneous(k in 0.1f64..50.0, rho in 0.0f64..100.0, c in 0.001f64..1000.0) {
        let p = GeeProblem::new(GainSampleSet::from_samples(vec![0.5, 3.0, 11.0]).unwrap(), 0.7, 10.0, 1, 5, 1.0).unwrap();
        let g = gee(&p, k, rho).unwrap();
        prop_assert!((g - gee(&p, c * k, c * rho).unwrap()).abs() <= 1e-12 * g.max(1.0));
    }
}

#[test]
fn algorithm1_matches_oracle_on_random_seeds() {
    for seed in 0..20 {
        let cfg = SystemConfig { seed: 500 + seed, n_samples: 300, k_max: 6, rho_max_dbw: (seed % 5) as f64 * 4.0 - 6.0, ..SystemConfig::default() };
        let p = smgee::experiments::problem_from_config(&cfg, sample_gains(&cfg).unwrap()).unwrap();
        let a1 = algorithm1(&p).unwrap();
        let oracle = grid_oracle(&p, 20_000).unwrap();
        let rel = (a1.gee - oracle.gee) / oracle.gee;
        assert!(rel.abs() <= 1e-6, "seed {seed}: {rel:e}");
        assert!(rel >= -1e-12, "oracle beats algorithm 1 at seed {seed}");
    }
}

#[test]
fn oracle_converges_to_closed_form() {
    let p = single(1.0, 10.0, 1, 1);
    let mut last_gee = f64::NEG_INFINITY;
    let mut last_err = f64::INFINITY;
    // Nested grids: every point of a coarser grid is on the finer one.
    for n in [11, 101, 1001, 10_001, 100_001] {
        let sol = grid_oracle(&p, n).unwrap();
        let err = (sol.rho_star - (E - 1.0)).abs();
        assert!(sol.gee >= last_gee - 1e-15);
        assert!(err <= last_err + 1e-12);
        assert!(err <= 10.0 / (n - 1) as f64);
        last_gee = sol.gee;
        last_err = err;
    }
}

#[test]
fn dominant_gain_matches_external_eigensolver() {
    let mut checked = 0;
    for (idx, (n_rx, n_tx)) in [(2, 2), (2, 2), (2, 2), (3, 5), (6, 4), (1, 16), (8, 8)].into_iter().enumerate() {
        let cfg = SystemConfig { n_rx, n_tx_per_aa: n_tx, n_paths: 4, ..SystemConfig::default() };
        let h: ChannelRealization = generate_channel(&cfg, &mut derive_stream(31, Domain::Test, idx as u64, 0)).unwrap();
        let bf = link_beamformers(&h, BeamformerMode::Svd).unwrap();
        let gain = bf.effective_channel(&h).norm();

        // Hᴴ H as a real symmetric 2N×2N embedding [[Re, −Im], [Im, Re]];
        // its eigenvalues are those of Hᴴ H, each twice.
        let gram: Vec<Vec<Complex<f64>>> = (0..n_tx)
            .map(|i| {
                (0..n_tx)
                    .map(|j| (0..n_rx).map(|r| h.matrix[(r, i)].conj() * h.matrix[(r, j)]).sum())
                    .collect()
            })
            .collect();
        let emb = DMatrix::from_fn(2 * n_tx, 2 * n_tx, |i, j| {
            let z = gram[i % n_tx][j % n_tx];
            match (i < n_tx, j < n_tx) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let lambda = emb.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((gain - lambda.sqrt()).abs() <= 1e-10 * gain, "{n_rx}x{n_tx}: {gain} vs {}", lambda.sqrt());
        checked += 1;
    }
    assert_eq!(checked, 7);
}

#[test]
fn single_precision_pipeline() {
    let p32 = GeeProblem::<f32>::new(GainSampleSet::from_samples(vec![1.0f32]).unwrap(), 1.0, 10.0, 1, 3, 1.0).unwrap();
    let rho = stationary_rho(&p32, 1.0f32).unwrap();
    assert!((rho - (std::f32::consts::E - 1.0)).abs() < 1e-5);
    // Single precision draws its own variates, so compare the two sample
    // sets in distribution: means within four combined standard errors.
    let cfg = SystemConfig { n_samples: 2000, k_max: 5, ..SystemConfig::default() };
    let g32 = sample_gains::<f32>(&cfg).unwrap();
    let g64 = sample_gains::<f64>(&cfg).unwrap();
    let stats = |xs: Vec<f64>| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v / n)
    };
    let (m32, v32) = stats(g32.samples().iter().map(|&a| a as f64).collect());
    let (m64, v64) = stats(g64.samples().to_vec());
    assert!((m32 - m64).abs() <= 4.0 * (v32 + v64).sqrt(), "{m32} vs {m64}");
    let s32 = algorithm1(&GeeProblem::new(g32, 1.0f32, 10.0, 1, 5, 1.0).unwrap()).unwrap();
    let s64 = algorithm1(&GeeProblem::new(g64, 1.0, 10.0, 1, 5, 1.0).unwrap()).unwrap();
    assert!((s32.gee as f64 - s64.gee).abs() <= 0.05 * s64.gee);
}
