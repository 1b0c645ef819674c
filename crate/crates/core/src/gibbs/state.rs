use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::Gamma;
use rayon::prelude::*;

use super::{GibbsError, Result, SamplerConfig, MAX_CANDIDATES};
use crate::model::{
    bernoulli_logpmf, bits, logistic, logit_masks, pair_count, pair_index, pairs,
    Adjacency, CanonicalIndex, ConnectionMatrices, LayeredSample, ModelParams, NetworkShape,
};
use crate::polya_gamma::sample_pg1;
use crate::rng::{mix64, seeded, substream, Rng};
use crate::truncnorm;

const MAIN_TAG: u64 = 0x4d41_494e;
const INIT_TAG: u64 = 0x494e_4954;
const LATENT_TAG: u64 = 0x4c41_5445;
const OMEGA_TAG: u64 = 0x4f4d_4547;

/// Rows with between 1 and `s` ones over `d` columns, in increasing numeric order.
pub fn candidate_rows(d: usize, s: usize) -> Result<Vec<u64>> {
    let mut count = 0u128;
    let mut binom = 1u128;
    for r in 1..=s.min(d) {
        binom = binom * (d + 1 - r) as u128 / r as u128;
        count += binom;
    }
    if count > MAX_CANDIDATES as u128 {
        return Err(GibbsError::TooManyCandidates(
            count.min(usize::MAX as u128) as usize,
        ));
    }
    fn extend(start: usize, d: usize, left: usize, mask: u64, out: &mut Vec<u64>) {
        for b in start..d {
            let m = mask | (1 << b);
            out.push(m);
            if left > 1 {
                extend(b + 1, d, left - 1, m, out);
            }
        }
    }
    let mut out = Vec::with_capacity(count as usize);
    extend(0, d, s.min(d), 0, &mut out);
    out.sort_unstable();
    Ok(out)
}

/// Draws an index from unnormalized log-weights.
fn sample_log_categorical(log_w: &[f64], rng: &mut Rng) -> usize {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (idx, &wi) in w.iter().enumerate() {
        if u < wi {
            return idx;
        }
        u -= wi;
    }
    // rounding left u just above zero; fall back to the last positive weight
    w.iter().rposition(|&wi| wi > 0.0).unwrap_or(0)
}

#[inline]
fn masked_at(mask: &[bool], idx: usize) -> bool {
    !mask.is_empty() && mask[idx]
}

/// Sample indices entering the parameter updates, with the `N / |B|` factor.
struct Batch {
    idx: Vec<usize>,
    scale: f64,
}

/// One MCMC state: parameters, latent layers and Polya-Gamma variables.
#[derive(Clone)]
pub struct GibbsState {
    pub params: ModelParams,
    /// Layers `0..=K` per sample; layer `K` holds the data with imputed masked entries.
    pub samples: Vec<LayeredSample>,
    /// `omegas[n][k - 1][pair]`; entries at masked positions are inert.
    pub omegas: Vec<Vec<Vec<f64>>>,
    masked: Vec<Vec<bool>>,
    mask_entries: Vec<(usize, usize, usize)>,
    candidates: Vec<Vec<u64>>,
    top_configs: Vec<Adjacency>,
    config: SamplerConfig,
    rng: Rng,
    sweeps_done: usize,
}

impl GibbsState {
    /// Starts from `params`, with latent layers drawn top-down from the model.
    pub fn new(
        data: &[Adjacency],
        mask: &super::EdgeMask,
        params: ModelParams,
        config: SamplerConfig,
    ) -> Result<Self> {
        config.validate()?;
        let shape = params.shape();
        params.theta.validate(&shape)?;
        if shape.width(0) > 4 {
            return Err(GibbsError::TopLayerTooWide(shape.width(0)));
        }
        let p_k = shape.observed_width();
        if let Some(x) = data.iter().find(|x| x.size() != p_k) {
            return Err(GibbsError::Data(format!(
                "observed matrix is {0}x{0}, shape needs {1}x{1}",
                x.size(),
                p_k
            )));
        }
        let n = data.len();
        if let Some(&(m, _, _)) = mask.entries().iter().find(|e| e.0 >= n) {
            return Err(GibbsError::Data(format!(
                "mask refers to sample {m} but there are {n} samples"
            )));
        }
        if let Some(&(_, _, j)) = mask.entries().iter().find(|e| e.2 >= p_k) {
            return Err(GibbsError::Data(format!("mask node {j} out of range")));
        }
        let depth = shape.depth();
        let candidates = (1..=depth)
            .map(|k| candidate_rows(shape.width(k - 1), config.sparsity))
            .collect::<Result<Vec<_>>>()?;
        if !params.a.respects_sparsity(config.sparsity) {
            return Err(GibbsError::Init(format!(
                "initial connection matrices break the sparsity bound {}",
                config.sparsity
            )));
        }
        let top_configs = (0..shape.top_configurations())
            .map(|c| CanonicalIndex::decode(c, shape.width(0)))
            .collect();

        let mut masked = vec![Vec::new(); n];
        for &(m, i, j) in mask.entries() {
            if masked[m].is_empty() {
                masked[m] = vec![false; pair_count(p_k)];
            }
            masked[m][pair_index(p_k, i, j)] = true;
        }
        let samples = data
            .iter()
            .enumerate()
            .map(|(idx, x)| {
                let mut rng = substream(config.seed, INIT_TAG, 0, idx as u64);
                let mut layers = Vec::with_capacity(depth + 1);
                let code = sample_log_categorical(
                    &params.theta.nu.iter().map(|v| v.ln()).collect::<Vec<_>>(),
                    &mut rng,
                );
                layers.push(CanonicalIndex::decode(code, shape.width(0)));
                for k in 1..depth {
                    let next = draw_layer(&params, k, &layers[k - 1], &mut rng);
                    layers.push(next);
                }
                let mut obs = x.clone();
                for (pidx, (i, j)) in pairs(p_k).enumerate() {
                    if masked_at(&masked[idx], pidx) {
                        obs.set(i, j, 0);
                    }
                }
                layers.push(obs);
                LayeredSample { layers }
            })
            .collect();
        let omegas = (0..n)
            .map(|_| {
                (1..=depth)
                    .map(|k| vec![0.25; pair_count(shape.width(k))])
                    .collect()
            })
            .collect();
        let rng = seeded(mix64(config.seed ^ MAIN_TAG));
        Ok(Self {
            params,
            samples,
            omegas,
            masked,
            mask_entries: mask.entries().to_vec(),
            candidates,
            top_configs,
            config,
            rng,
            sweeps_done: 0,
        })
    }

    pub fn shape(&self) -> NetworkShape {
        self.params.shape()
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    pub fn connection(&self) -> &ConnectionMatrices {
        &self.params.a
    }

    /// Whether observed position `(n, i, j)` is masked.
    pub fn is_masked(&self, n: usize, i: usize, j: usize) -> bool {
        let (i, j) = (i.min(j), i.max(j));
        masked_at(&self.masked[n], pair_index(self.shape().observed_width(), i, j))
    }

    /// Current values at the masked positions, in mask order.
    pub fn imputed_values(&self) -> Vec<u8> {
        let depth = self.shape().depth();
        self.mask_entries
            .iter()
            .map(|&(n, i, j)| self.samples[n].layers[depth].get(i, j))
            .collect()
    }

    pub fn mask_entries(&self) -> &[(usize, usize, usize)] {
        &self.mask_entries
    }

    /// Logit of pair `(i, j)` at layer `k` for sample `n` under the current state.
    pub fn psi(&self, n: usize, k: usize, i: usize, j: usize) -> f64 {
        psi_at(&self.params, k, &self.samples[n].layers[k - 1], i, j)
    }

    /// `log P(X_K^(n) | A, Theta, X_{K-1}^(n))` over unmasked positions.
    pub fn observed_loglik(&self, n: usize) -> f64 {
        let depth = self.shape().depth();
        let s = &self.samples[n];
        pairs(s.layers[depth].size())
            .enumerate()
            .filter(|&(pidx, _)| !masked_at(&self.masked[n], pidx))
            .map(|(_, (i, j))| {
                bernoulli_logpmf(
                    s.layers[depth].get(i, j),
                    psi_at(&self.params, depth, &s.layers[depth - 1], i, j),
                )
            })
            .sum()
    }

    fn full_batch(&self) -> Batch {
        Batch {
            idx: (0..self.samples.len()).collect(),
            scale: 1.0,
        }
    }

    fn draw_batch(&mut self, size: usize) -> Batch {
        let n = self.samples.len();
        if size >= n {
            return self.full_batch();
        }
        let mut idx = rand::seq::index::sample(&mut self.rng, n, size).into_vec();
        idx.sort_unstable();
        Batch {
            idx,
            scale: n as f64 / size as f64,
        }
    }

    /// One systematic scan using every sample in the parameter updates.
    pub fn sweep_standard(&mut self) -> Result<()> {
        let batch = self.full_batch();
        self.sweep_with(&batch)
    }

    /// One scan whose parameter updates use a fresh random subsample, with data sums
    /// scaled by `N / |B|`. A batch size of `N` reproduces [`Self::sweep_standard`].
    pub fn sweep_subsampling(&mut self) -> Result<()> {
        let size = self.config.batch_size.unwrap_or(self.samples.len());
        let batch = self.draw_batch(size);
        self.sweep_with(&batch)
    }

    /// Scan order: latent layers and masked entries (per sample), connection rows,
    /// Polya-Gamma variables, intercepts, `Gamma` entries, `nu`. The latent and row
    /// updates integrate the Polya-Gamma variables out, so those are refreshed right
    /// before the blocks that condition on them.
    fn sweep_with(&mut self, batch: &Batch) -> Result<()> {
        self.latent_phase();
        if !self.config.fixed.a {
            self.update_all_rows(batch)?;
        }
        let omega_targets: Vec<usize> = if self.config.refresh_all_omegas {
            (0..self.samples.len()).collect()
        } else {
            batch.idx.clone()
        };
        self.omega_phase(&omega_targets);
        let depth = self.shape().depth();
        if !self.config.fixed.c {
            for k in 1..=depth {
                self.update_c_batch(k, batch);
            }
        }
        if !self.config.fixed.gamma {
            for k in 1..=depth {
                let d = self.shape().width(k - 1);
                for s in 0..d {
                    for t in s..d {
                        self.update_gamma_batch(k, s, t, batch);
                    }
                }
            }
        }
        if !self.config.fixed.nu {
            self.update_nu_batch(batch);
        }
        self.sweeps_done += 1;
        self.check_finite()
    }

    fn check_finite(&self) -> Result<()> {
        let sweep = self.sweeps_done;
        let theta = &self.params.theta;
        if let Some(k) = theta.c.iter().position(|c| !c.is_finite()) {
            return Err(GibbsError::NumericalAbort {
                sweep,
                what: format!("C_{}", k + 1),
            });
        }
        if let Some(k) = theta
            .gamma
            .iter()
            .position(|g| g.data().iter().any(|v| !v.is_finite()))
        {
            return Err(GibbsError::NumericalAbort {
                sweep,
                what: format!("Gamma_{}", k + 1),
            });
        }
        if theta.nu.iter().any(|v| !v.is_finite()) {
            return Err(GibbsError::NumericalAbort {
                sweep,
                what: "nu".into(),
            });
        }
        Ok(())
    }

    fn latent_phase(&mut self) {
        let params = &self.params;
        let top = &self.top_configs;
        let seed = self.config.seed;
        let sweep = self.sweeps_done as u64;
        self.samples
            .par_iter_mut()
            .zip(self.masked.par_iter())
            .enumerate()
            .for_each(|(n, (sample, mask))| {
                let mut rng = substream(seed, LATENT_TAG, sweep, n as u64);
                update_latents(params, top, sample, mask, &mut rng);
            });
    }

    fn omega_phase(&mut self, targets: &[usize]) {
        let params = &self.params;
        let seed = self.config.seed;
        let sweep = self.sweeps_done as u64;
        let mut flags = vec![false; self.samples.len()];
        for &n in targets {
            flags[n] = true;
        }
        self.omegas
            .par_iter_mut()
            .zip(self.samples.par_iter())
            .zip(self.masked.par_iter())
            .enumerate()
            .filter(|(n, _)| flags[*n])
            .for_each(|(n, ((om, sample), mask))| {
                let mut rng = substream(seed, OMEGA_TAG, sweep, n as u64);
                refresh_omegas(params, sample, mask, om, &mut rng);
            });
    }

    /// Redraws every Polya-Gamma variable from `PG(1, psi)`.
    pub fn update_omegas(&mut self) {
        let all: Vec<usize> = (0..self.samples.len()).collect();
        self.omega_phase(&all);
    }

    /// Redraws `X_0^(n)` from its categorical full conditional.
    pub fn update_x0(&mut self, n: usize) {
        let depth = self.shape().depth();
        let mask = if depth == 1 { &self.masked[n][..] } else { &[] };
        update_x0(&self.params, &self.top_configs, &mut self.samples[n], mask, &mut self.rng);
    }

    /// Log-weights of every `X_0^(n)` configuration, indexed by canonical code.
    pub fn x0_log_weights(&self, n: usize) -> Vec<f64> {
        let depth = self.shape().depth();
        let mask = if depth == 1 { &self.masked[n][..] } else { &[] };
        x0_log_weights(&self.params, &self.top_configs, &self.samples[n], mask)
    }

    /// Redraws the interior latent entry `X_k[i, j]` of sample `n`, `1 <= k < K`.
    pub fn update_xk_entry(&mut self, n: usize, k: usize, i: usize, j: usize) {
        let depth = self.shape().depth();
        assert!(k >= 1 && k < depth, "interior layers are 1..K-1");
        let mask = if k + 1 == depth { &self.masked[n][..] } else { &[] };
        let lw = interior_log_weights(&self.params, &self.samples[n], mask, k, i, j);
        let v = sample_log_categorical(&lw, &mut self.rng) as u8;
        self.samples[n].layers[k].set(i, j, v);
    }

    /// Log-weights of `X_k[i, j] = 0` and `= 1` for sample `n`.
    pub fn xk_entry_log_weights(&self, n: usize, k: usize, i: usize, j: usize) -> [f64; 2] {
        let depth = self.shape().depth();
        let mask = if k + 1 == depth { &self.masked[n][..] } else { &[] };
        let lw = interior_log_weights(&self.params, &self.samples[n], mask, k, i, j);
        [lw[0], lw[1]]
    }

    /// Log-weights over [`candidate_rows`] for row `i` of `A_k`, using every sample.
    pub fn row_log_weights(&self, k: usize, i: usize) -> Vec<f64> {
        self.row_log_weights_batch(k, i, &self.full_batch())
    }

    fn row_log_weights_batch(&self, k: usize, i: usize, batch: &Batch) -> Vec<f64> {
        let params = &self.params;
        let cands = &self.candidates[k - 1];
        let a = params.a.layer(k);
        let (c, g) = (params.theta.c(k), params.theta.gamma(k));
        let d = a.ncols();
        let p = a.nrows();
        let observed = k == self.shape().depth();
        let mut ll = vec![0.0; cands.len()];
        let mut w = vec![0.0; d];
        for &n in &batch.idx {
            let xk = &self.samples[n].layers[k];
            let xp = &self.samples[n].layers[k - 1];
            let mask = if observed { &self.masked[n][..] } else { &[] };
            for j in (0..p).filter(|&j| j != i) {
                if masked_at(mask, pair_index(p, i.min(j), i.max(j))) {
                    continue;
                }
                w.iter_mut().for_each(|v| *v = 0.0);
                for t in bits(a.row(j)) {
                    for (s, ws) in w.iter_mut().enumerate() {
                        if xp.get(s, t) == 1 {
                            *ws += g.get(s, t);
                        }
                    }
                }
                let x = xk.get(i, j);
                for (l, &cand) in ll.iter_mut().zip(cands) {
                    let psi = c + bits(cand).map(|s| w[s]).sum::<f64>();
                    *l += bernoulli_logpmf(x, psi);
                }
            }
        }
        if batch.scale != 1.0 {
            ll.iter_mut().for_each(|l| *l *= batch.scale);
        }
        ll
    }

    /// Redraws row `i` of `A_k` from its categorical full conditional over the
    /// allowed rows.
    pub fn update_row_a(&mut self, k: usize, i: usize) {
        let batch = self.full_batch();
        self.update_row_batch(k, i, &batch);
    }

    fn update_row_batch(&mut self, k: usize, i: usize, batch: &Batch) {
        let lw = self.row_log_weights_batch(k, i, batch);
        let pick = sample_log_categorical(&lw, &mut self.rng);
        let row = self.candidates[k - 1][pick];
        self.params.a.layer_mut(k).set_row(i, row);
    }

    fn update_all_rows(&mut self, batch: &Batch) -> Result<()> {
        let depth = self.shape().depth();
        for k in 1..=depth {
            for i in 0..self.shape().width(k) {
                self.update_row_batch(k, i, batch);
            }
        }
        Ok(())
    }

    /// Posterior mean and variance of `C_k` given the current Polya-Gamma variables.
    pub fn c_conditional(&self, k: usize) -> (f64, f64) {
        self.c_conditional_batch(k, &self.full_batch())
    }

    fn c_conditional_batch(&self, k: usize, batch: &Batch) -> (f64, f64) {
        let pr = &self.config.priors;
        let c = self.params.theta.c(k);
        let observed = k == self.shape().depth();
        let (mut sum_w, mut sum_r) = (0.0, 0.0);
        for &n in &batch.idx {
            let s = &self.samples[n];
            let om = &self.omegas[n][k - 1];
            let mask = if observed { &self.masked[n][..] } else { &[] };
            for (pidx, (i, j)) in pairs(s.layers[k].size()).enumerate() {
                if masked_at(mask, pidx) {
                    continue;
                }
                let psi = psi_at(&self.params, k, &s.layers[k - 1], i, j);
                let x = s.layers[k].get(i, j) as f64;
                sum_w += om[pidx];
                sum_r += (x - 0.5) - om[pidx] * (psi - c);
            }
        }
        let prec = 1.0 / pr.var_c + batch.scale * sum_w;
        let var = 1.0 / prec;
        (var * (pr.mu_c / pr.var_c + batch.scale * sum_r), var)
    }

    /// Redraws `C_k` from its (possibly truncated) normal full conditional.
    pub fn update_c(&mut self, k: usize) {
        let batch = self.full_batch();
        self.update_c_batch(k, &batch);
    }

    fn update_c_batch(&mut self, k: usize, batch: &Batch) {
        let (mean, var) = self.c_conditional_batch(k, batch);
        let (lo, hi) = self
            .config
            .bounds
            .map(|b| b.c)
            .unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        self.params.theta.c[k - 1] = truncnorm::sample(mean, var.sqrt(), lo, hi, &mut self.rng);
    }

    /// Posterior mean and variance (before truncation) of `Gamma_k[s, t]`.
    pub fn gamma_conditional(&self, k: usize, s: usize, t: usize) -> (f64, f64) {
        self.gamma_conditional_batch(k, s, t, &self.full_batch())
    }

    fn gamma_conditional_batch(&self, k: usize, s: usize, t: usize, batch: &Batch) -> (f64, f64) {
        let pr = &self.config.priors;
        let (mu, var0) = if s == t {
            (pr.mu_gamma_diag, pr.var_gamma_diag)
        } else {
            (pr.mu_gamma_off, pr.var_gamma_off)
        };
        let a = self.params.a.layer(k);
        let current = self.params.theta.gamma(k).get(s, t);
        let p = a.nrows();
        // structural part of the coefficient on Gamma[s, t]
        let structural: Vec<(usize, usize, usize, f64)> = pairs(p)
            .enumerate()
            .filter_map(|(pidx, (i, j))| {
                let kappa = if s == t {
                    a.get(i, s) * a.get(j, s)
                } else {
                    a.get(i, s) * a.get(j, t) + a.get(i, t) * a.get(j, s)
                };
                (kappa > 0).then_some((pidx, i, j, kappa as f64))
            })
            .collect();
        let observed = k == self.shape().depth();
        let (mut sum_wk2, mut sum_r) = (0.0, 0.0);
        for &n in &batch.idx {
            let smp = &self.samples[n];
            if s != t && smp.layers[k - 1].get(s, t) == 0 {
                continue;
            }
            let om = &self.omegas[n][k - 1];
            let mask = if observed { &self.masked[n][..] } else { &[] };
            for &(pidx, i, j, kappa) in &structural {
                if masked_at(mask, pidx) {
                    continue;
                }
                let psi = psi_at(&self.params, k, &smp.layers[k - 1], i, j);
                let x = smp.layers[k].get(i, j) as f64;
                sum_wk2 += om[pidx] * kappa * kappa;
                sum_r += ((x - 0.5) - om[pidx] * (psi - kappa * current)) * kappa;
            }
        }
        let prec = 1.0 / var0 + batch.scale * sum_wk2;
        let var = 1.0 / prec;
        (var * (mu / var0 + batch.scale * sum_r), var)
    }

    /// Redraws `Gamma_k[s, t]` (and its mirror) from its positive truncated normal.
    pub fn update_gamma(&mut self, k: usize, s: usize, t: usize) {
        let batch = self.full_batch();
        self.update_gamma_batch(k, s, t, &batch);
    }

    fn update_gamma_batch(&mut self, k: usize, s: usize, t: usize, batch: &Batch) {
        let (mean, var) = self.gamma_conditional_batch(k, s, t, batch);
        let (lo, hi) = match self.config.bounds {
            Some(b) if s == t => b.gamma_diag,
            Some(b) => b.gamma_off,
            None => (0.0, f64::INFINITY),
        };
        let mut v = truncnorm::sample(mean, var.sqrt(), lo.max(0.0), hi, &mut self.rng);
        if v <= 0.0 {
            v = f64::MIN_POSITIVE;
        }
        self.params.theta.gamma[k - 1].set(s, t, v);
    }

    /// Dirichlet parameters of the `nu` full conditional.
    pub fn nu_posterior(&self) -> Vec<f64> {
        self.nu_posterior_batch(&self.full_batch())
    }

    fn nu_posterior_batch(&self, batch: &Batch) -> Vec<f64> {
        let mut alpha = vec![self.config.priors.alpha; self.top_configs.len()];
        for &n in &batch.idx {
            alpha[CanonicalIndex::encode(&self.samples[n].layers[0])] += batch.scale;
        }
        alpha
    }

    pub fn update_nu(&mut self) {
        let batch = self.full_batch();
        self.update_nu_batch(&batch);
    }

    fn update_nu_batch(&mut self, batch: &Batch) {
        let alpha = self.nu_posterior_batch(batch);
        let mut draws: Vec<f64> = alpha
            .iter()
            .map(|&a| {
                Gamma::new(a, 1.0)
                    .expect("Dirichlet parameters are positive")
                    .sample(&mut self.rng)
                    .max(f64::MIN_POSITIVE)
            })
            .collect();
        let total: f64 = draws.iter().sum();
        draws.iter_mut().for_each(|v| *v /= total);
        self.params.theta.nu = draws;
    }

    /// Redraws every masked observed entry from its Bernoulli conditional.
    pub fn impute_masked(&mut self) {
        for n in 0..self.samples.len() {
            impute(&self.params, &mut self.samples[n], &self.masked[n], &mut self.rng);
        }
    }
}

#[inline]
fn psi_at(params: &ModelParams, k: usize, x_prev: &Adjacency, i: usize, j: usize) -> f64 {
    let a = params.a.layer(k);
    logit_masks(params.theta.c(k), params.theta.gamma(k), a.row(i), a.row(j), x_prev)
}

fn draw_layer(params: &ModelParams, k: usize, x_prev: &Adjacency, rng: &mut Rng) -> Adjacency {
    let p = params.a.layer(k).nrows();
    let mut x = Adjacency::identity(p);
    for (i, j) in pairs(p) {
        if rng.random::<f64>() < logistic(psi_at(params, k, x_prev, i, j)) {
            x.set(i, j, 1);
        }
    }
    x
}

fn x0_log_weights(
    params: &ModelParams,
    top: &[Adjacency],
    sample: &LayeredSample,
    mask: &[bool],
) -> Vec<f64> {
    let x1 = &sample.layers[1];
    top.iter()
        .zip(&params.theta.nu)
        .map(|(x0, &nu)| {
            let lik: f64 = pairs(x1.size())
                .enumerate()
                .filter(|&(pidx, _)| !masked_at(mask, pidx))
                .map(|(_, (i, j))| bernoulli_logpmf(x1.get(i, j), psi_at(params, 1, x0, i, j)))
                .sum();
            nu.ln() + lik
        })
        .collect()
}

fn update_x0(
    params: &ModelParams,
    top: &[Adjacency],
    sample: &mut LayeredSample,
    mask: &[bool],
    rng: &mut Rng,
) {
    let lw = x0_log_weights(params, top, sample, mask);
    let code = sample_log_categorical(&lw, rng);
    sample.layers[0] = top[code].clone();
}

/// Log-weights of `X_k[i, j] in {0, 1}`: the layer-`k` Bernoulli term plus every
/// layer-`k+1` pair whose logit involves `X_k[i, j]`.
fn interior_log_weights(
    params: &ModelParams,
    sample: &LayeredSample,
    next_mask: &[bool],
    k: usize,
    i: usize,
    j: usize,
) -> Vec<f64> {
    let psi_k = psi_at(params, k, &sample.layers[k - 1], i, j);
    let mut lw = vec![bernoulli_logpmf(0, psi_k), bernoulli_logpmf(1, psi_k)];
    let a_next = params.a.layer(k + 1);
    let g = params.theta.gamma(k + 1).get(i, j);
    let current = sample.layers[k].get(i, j);
    let x_next = &sample.layers[k + 1];
    let p = a_next.nrows();
    let touching: Vec<usize> = (0..p)
        .filter(|&u| (a_next.row(u) >> i | a_next.row(u) >> j) & 1 == 1)
        .collect();
    for (ai, &u) in touching.iter().enumerate() {
        for &v in &touching[ai + 1..] {
            let kappa = a_next.get(u, i) * a_next.get(v, j) + a_next.get(u, j) * a_next.get(v, i);
            if kappa == 0 || masked_at(next_mask, pair_index(p, u, v)) {
                continue;
            }
            let psi = psi_at(params, k + 1, &sample.layers[k], u, v);
            let shift = kappa as f64 * g;
            let (psi0, psi1) = if current == 1 {
                (psi - shift, psi)
            } else {
                (psi, psi + shift)
            };
            let x = x_next.get(u, v);
            lw[0] += bernoulli_logpmf(x, psi0);
            lw[1] += bernoulli_logpmf(x, psi1);
        }
    }
    lw
}

fn impute(params: &ModelParams, sample: &mut LayeredSample, mask: &[bool], rng: &mut Rng) {
    if mask.is_empty() {
        return;
    }
    let depth = sample.layers.len() - 1;
    let p = sample.layers[depth].size();
    for (pidx, (i, j)) in pairs(p).enumerate() {
        if mask[pidx] {
            let prob = logistic(psi_at(params, depth, &sample.layers[depth - 1], i, j));
            let v = (rng.random::<f64>() < prob) as u8;
            sample.layers[depth].set(i, j, v);
        }
    }
}

fn update_latents(
    params: &ModelParams,
    top: &[Adjacency],
    sample: &mut LayeredSample,
    mask: &[bool],
    rng: &mut Rng,
) {
    let depth = sample.layers.len() - 1;
    update_x0(params, top, sample, if depth == 1 { mask } else { &[] }, rng);
    for k in 1..depth {
        let next_mask = if k + 1 == depth { mask } else { &[] };
        for (i, j) in pairs(sample.layers[k].size()) {
            let lw = interior_log_weights(params, sample, next_mask, k, i, j);
            let v = sample_log_categorical(&lw, rng) as u8;
            sample.layers[k].set(i, j, v);
        }
    }
    impute(params, sample, mask, rng);
}

fn refresh_omegas(
    params: &ModelParams,
    sample: &LayeredSample,
    mask: &[bool],
    omegas: &mut [Vec<f64>],
    rng: &mut Rng,
) {
    let depth = sample.layers.len() - 1;
    for k in 1..=depth {
        let m = if k == depth { mask } else { &[] };
        for (pidx, (i, j)) in pairs(sample.layers[k].size()).enumerate() {
            if masked_at(m, pidx) {
                continue;
            }
            omegas[k - 1][pidx] = sample_pg1(psi_at(params, k, &sample.layers[k - 1], i, j), rng);
        }
    }
}
