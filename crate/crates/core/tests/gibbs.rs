use mplex::gibbs::{candidate_rows, run_chain, EdgeMask, GibbsState, Phase, SamplerConfig};
use mplex::model::{
    log_joint, pairs, Adjacency, ContinuousParams, LayeredSample, ModelParams, NetworkShape,
};
use mplex::presets::sim_small_truth;
use mplex::simulate::simulate;

fn moderate_truth() -> ModelParams {
    let mut truth = sim_small_truth();
    let shape = truth.shape();
    truth.theta = ContinuousParams::homogeneous(&shape, -1.5, 0.8, 2.0);
    truth.theta.gamma[1].set(0, 2, 1.3);
    truth.theta.c[0] = -0.7;
    let m = truth.theta.nu.len();
    truth.theta.nu = (0..m).map(|c| (c + 1) as f64).collect();
    let total: f64 = truth.theta.nu.iter().sum();
    truth.theta.nu.iter_mut().for_each(|v| *v /= total);
    truth
}

fn state_for(truth: &ModelParams, n: usize, seed: u64) -> GibbsState {
    let data: Vec<Adjacency> = simulate(truth, n, seed)
        .unwrap()
        .into_iter()
        .map(|s| s.observed().clone())
        .collect();
    GibbsState::new(&data, &EdgeMask::empty(), truth.clone(), SamplerConfig::new(seed)).unwrap()
}

fn total_log_joint(samples: &[LayeredSample], params: &ModelParams) -> f64 {
    samples.iter().map(|s| log_joint(s, params).unwrap()).sum()
}

fn assert_differences_match(weights: &[f64], oracle: &[f64]) {
    for c in 1..weights.len() {
        let got = weights[c] - weights[0];
        let want = oracle[c] - oracle[0];
        assert!((got - want).abs() < 1e-8, "entry {c}: {got} vs {want}");
    }
}

#[test]
fn candidate_rows_enumerate_sparse_rows() {
    assert_eq!(candidate_rows(3, 2).unwrap(), vec![1, 2, 3, 4, 5, 6]);
    assert_eq!(candidate_rows(4, 1).unwrap(), vec![1, 2, 4, 8]);
    assert_eq!(candidate_rows(6, 2).unwrap().len(), 21);
    assert!(candidate_rows(40, 6).is_err());
}

#[test]
fn row_weights_match_log_joint_differences() {
    let truth = moderate_truth();
    let mut state = state_for(&truth, 6, 11);
    state.sweep_standard().unwrap();
    for (k, i) in [(1, 4), (2, 9), (2, 0)] {
        let weights = state.row_log_weights(k, i);
        let oracle: Vec<f64> = candidate_rows(state.shape().width(k - 1), 2)
            .unwrap()
            .into_iter()
            .map(|row| {
                let mut p = state.params.clone();
                p.a.layer_mut(k).set_row(i, row);
                total_log_joint(&state.samples, &p)
            })
            .collect();
        assert_differences_match(&weights, &oracle);
    }
}

#[test]
fn top_layer_weights_match_log_joint_differences() {
    let truth = moderate_truth();
    let state = state_for(&truth, 4, 12);
    for n in 0..4 {
        let weights = state.x0_log_weights(n);
        let oracle: Vec<f64> = (0..weights.len())
            .map(|code| {
                let mut s = state.samples[n].clone();
                s.layers[0] = mplex::CanonicalIndex::decode(code, 3);
                log_joint(&s, &state.params).unwrap()
            })
            .collect();
        assert_differences_match(&weights, &oracle);
    }
}

#[test]
fn interior_weights_match_log_joint_differences() {
    let truth = moderate_truth();
    let state = state_for(&truth, 3, 13);
    for n in 0..3 {
        for (i, j) in pairs(6) {
            let w = state.xk_entry_log_weights(n, 1, i, j);
            let oracle: Vec<f64> = (0..2u8)
                .map(|v| {
                    let mut s = state.samples[n].clone();
                    s.layers[1].set(i, j, v);
                    log_joint(&s, &state.params).unwrap()
                })
                .collect();
            assert_differences_match(&w, &oracle);
        }
    }
}

/// The Polya-Gamma-augmented log density of layer `k` plus the prior, evaluated through
/// `psi`, which is quadratic in every intercept and `Gamma` entry.
fn augmented_log_density(state: &GibbsState, k: usize, prior: (f64, f64), value: f64) -> f64 {
    let p = state.shape().width(k);
    let mut total = -(value - prior.0).powi(2) / (2.0 * prior.1);
    for n in 0..state.sample_count() {
        for (pidx, (i, j)) in pairs(p).enumerate() {
            let psi = state.psi(n, k, i, j);
            let x = state.samples[n].layers[k].get(i, j) as f64;
            let w = state.omegas[n][k - 1][pidx];
            total += (x - 0.5) * psi - 0.5 * w * psi * psi;
        }
    }
    total
}

/// Mean and variance of the Gaussian whose log density is `f` (up to a constant).
fn gaussian_from_quadratic(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (fm, f0, fp) = (f(-1.0), f(0.0), f(1.0));
    let curvature = fp - 2.0 * f0 + fm;
    let slope = (fp - fm) / 2.0;
    let var = -1.0 / curvature;
    (slope * var, var)
}

#[test]
fn intercept_conditional_matches_augmented_density() {
    let truth = moderate_truth();
    let mut state = state_for(&truth, 5, 14);
    state.update_omegas();
    let priors = state.config().priors;
    for k in 1..=2 {
        let (mean, var) = state.c_conditional(k);
        let (want_mean, want_var) = gaussian_from_quadratic(|c| {
            let mut s = state.clone();
            s.params.theta.c[k - 1] = c;
            augmented_log_density(&s, k, (priors.mu_c, priors.var_c), c)
        });
        assert!((mean - want_mean).abs() < 1e-8 * want_mean.abs().max(1.0));
        assert!((var - want_var).abs() < 1e-10 * want_var.max(1.0));
    }
}

#[test]
fn gamma_conditional_matches_augmented_density() {
    let truth = moderate_truth();
    let mut state = state_for(&truth, 5, 15);
    state.update_omegas();
    let priors = state.config().priors;
    for (k, s, t) in [(1, 0, 0), (1, 0, 2), (2, 1, 1), (2, 0, 5), (2, 2, 3)] {
        let prior = if s == t {
            (priors.mu_gamma_diag, priors.var_gamma_diag)
        } else {
            (priors.mu_gamma_off, priors.var_gamma_off)
        };
        let (mean, var) = state.gamma_conditional(k, s, t);
        let (want_mean, want_var) = gaussian_from_quadratic(|g| {
            let mut st = state.clone();
            st.params.theta.gamma[k - 1].set(s, t, g);
            augmented_log_density(&st, k, prior, g)
        });
        assert!(
            (mean - want_mean).abs() < 1e-8 * want_mean.abs().max(1.0),
            "({k},{s},{t}): {mean} vs {want_mean}"
        );
        assert!((var - want_var).abs() < 1e-10 * want_var.max(1.0));
    }
}

#[test]
fn nu_posterior_counts_top_layers() {
    let truth = moderate_truth();
    let state = state_for(&truth, 7, 16);
    let alpha = state.nu_posterior();
    assert_eq!(alpha.len(), 8);
    assert!((alpha.iter().sum::<f64>() - (8.0 + 7.0)).abs() < 1e-12);
    for s in &state.samples {
        assert!(alpha[mplex::CanonicalIndex::encode(&s.layers[0])] >= 2.0);
    }
}

fn small_run_config(seed: u64) -> SamplerConfig {
    let mut cfg = SamplerConfig::new(seed);
    cfg.standard_sweeps = 3;
    cfg
}

#[test]
fn full_batch_subsampling_is_bit_identical_to_standard() {
    let truth = moderate_truth();
    let mut cfg = small_run_config(21);
    cfg.batch_size = Some(8);
    let data: Vec<Adjacency> = simulate(&truth, 8, 3)
        .unwrap()
        .into_iter()
        .map(|s| s.observed().clone())
        .collect();
    let mut a = GibbsState::new(&data, &EdgeMask::empty(), truth.clone(), cfg.clone()).unwrap();
    let mut b = a.clone();
    for _ in 0..4 {
        a.sweep_standard().unwrap();
        b.sweep_subsampling().unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.omegas, b.omegas);
    }
}

#[test]
fn masked_entries_do_not_enter_the_likelihood() {
    let truth = moderate_truth();
    let data: Vec<Adjacency> = simulate(&truth, 4, 5)
        .unwrap()
        .into_iter()
        .map(|s| s.observed().clone())
        .collect();
    let mask = EdgeMask::new(16, vec![(0, 0, 1), (0, 3, 9), (2, 4, 15)]).unwrap();
    let mut flipped = data.clone();
    for &(n, i, j) in mask.entries() {
        let v = flipped[n].get(i, j);
        flipped[n].set(i, j, 1 - v);
    }
    let cfg = SamplerConfig::new(4);
    let a = GibbsState::new(&data, &mask, truth.clone(), cfg.clone()).unwrap();
    let b = GibbsState::new(&flipped, &mask, truth.clone(), cfg).unwrap();
    for n in 0..4 {
        assert_eq!(a.observed_loglik(n), b.observed_loglik(n));
    }
    assert_eq!(a.row_log_weights(2, 3), b.row_log_weights(2, 3));
    assert!(a.is_masked(0, 9, 3) && !a.is_masked(1, 3, 9));
    assert_eq!(a.imputed_values().len(), 3);
}

#[test]
fn chains_are_reproducible_across_thread_counts() {
    let truth = moderate_truth();
    let data: Vec<Adjacency> = simulate(&truth, 10, 8)
        .unwrap()
        .into_iter()
        .map(|s| s.observed().clone())
        .collect();
    let mut cfg = small_run_config(99);
    cfg.subsample_sweeps = 3;
    cfg.batch_size = Some(4);
    cfg.record_latents = true;
    let shape = truth.shape();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_chain(&data, &EdgeMask::empty(), &shape, &cfg, Some(truth.a.clone())))
            .unwrap()
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.records, four.records);
    assert_eq!(one.records.len(), 6);
    assert_eq!(one.records[0].phase, Phase::Subsampling);
    assert!(one.records[0].loglik.is_none());
    assert_eq!(one.records[5].loglik.as_ref().unwrap().len(), 10);
}

#[test]
fn burn_in_and_thinning_select_records() {
    let truth = moderate_truth();
    let data: Vec<Adjacency> = simulate(&truth, 5, 9)
        .unwrap()
        .into_iter()
        .map(|s| s.observed().clone())
        .collect();
    let mut cfg = SamplerConfig::new(1);
    cfg.standard_sweeps = 10;
    cfg.burn_in = 3;
    cfg.thin = 3;
    let trace = run_chain(&data, &EdgeMask::empty(), &truth.shape(), &cfg, None).unwrap();
    let sweeps: Vec<usize> = trace.records.iter().map(|r| r.sweep).collect();
    assert_eq!(sweeps, vec![3, 6, 9]);
    assert!(trace.records.iter().all(|r| r.a.respects_sparsity(2)));
}

#[test]
fn rejects_mismatched_inputs() {
    let truth = moderate_truth();
    let shape = NetworkShape::new(vec![3, 6, 16]).unwrap();
    let cfg = SamplerConfig::new(0);
    assert!(run_chain(&[], &EdgeMask::empty(), &shape, &cfg, None).is_err());
    let wrong = vec![Adjacency::identity(5)];
    assert!(run_chain(&wrong, &EdgeMask::empty(), &shape, &cfg, None).is_err());
    let data = vec![Adjacency::identity(16)];
    let mask = EdgeMask::new(16, vec![(3, 0, 1)]).unwrap();
    assert!(GibbsState::new(&data, &mask, truth, cfg).is_err());
}
