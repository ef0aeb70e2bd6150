//! Conjugate single-site Gibbs sampler on the Gamma-augmented model.
//!
//! One sweep draws every edge latent `Z_ij ~ Gamma(n_ij, λ_{x_i} + λ_{x_j})`,
//! every occupied block strength from its Gamma full conditional, then
//! reallocates each item in index order (new blocks have their strength
//! integrated out), and finally renormalizes the strengths to geometric
//! mean one. Cost per sweep is O(|E| + K(n + 1)).

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AugmentedLatents, BlockStrengths, ComparisonData, Hyperparameters, Partition, SufficientStats,
};
use crate::numerics::{gamma_draw, lgamma, sample_index, RngStream};

/// Where the geometric-mean-one normalization is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RescaleMode {
    /// Normalize the chain state itself after every sweep.
    InChain,
    /// Keep the chain on the unnormalized scale and normalize recorded draws.
    #[default]
    OutputOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub total_iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub hyper: Hyperparameters,
    pub seed: u64,
    pub n_chains: usize,
    pub rescale: RescaleMode,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            total_iters: 30_000,
            burn_in: 10_000,
            thin: 1,
            hyper: Hyperparameters::default(),
            seed: 1,
            n_chains: 1,
            rescale: RescaleMode::default(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        if self.total_iters == 0 {
            return Err(Error::InvalidConfig("total_iters must be positive".into()));
        }
        if self.burn_in >= self.total_iters {
            return Err(Error::InvalidConfig(format!(
                "burn_in {} must be below total_iters {}",
                self.burn_in, self.total_iters
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if self.n_chains == 0 {
            return Err(Error::InvalidConfig("n_chains must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of draws each chain records.
    pub fn draws_per_chain(&self) -> usize {
        (self.total_iters - self.burn_in) / self.thin
    }
}

/// One recorded posterior draw. Strengths have geometric mean one.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw {
    pub chain: usize,
    pub iteration: usize,
    pub partition: Partition,
    pub strengths: BlockStrengths,
}

impl Draw {
    pub fn k(&self) -> usize {
        self.partition.k()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub latents: Duration,
    pub strengths: Duration,
    pub assignments: Duration,
    pub rescale: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.latents + self.strengths + self.assignments + self.rescale
    }

    fn add(&mut self, other: &PhaseTimings) {
        self.latents += other.latents;
        self.strengths += other.strengths;
        self.assignments += other.assignments;
        self.rescale += other.rescale;
    }
}

/// Post-burn-in draws of one or more chains, concatenated in chain order.
#[derive(Clone, Debug)]
pub struct Trace {
    pub draws: Vec<Draw>,
    pub config: SamplerConfig,
    pub timings: PhaseTimings,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn n_items(&self) -> usize {
        self.draws.first().map_or(0, |d| d.partition.n_items())
    }

    pub fn k_values(&self) -> Vec<usize> {
        self.draws.iter().map(Draw::k).collect()
    }
}

/// Draw every `Z_ij` from Gamma(n_ij, λ_{x_i} + λ_{x_j}).
pub fn update_latents(
    data: &ComparisonData,
    partition: &Partition,
    strengths: &BlockStrengths,
    rng: &mut RngStream,
) -> AugmentedLatents {
    let mut z = vec![0.0; data.n_edges()];
    draw_latents(data, partition.labels(), strengths.values(), &mut z, rng);
    AugmentedLatents::from_vec_unchecked(z)
}

fn draw_latents(
    data: &ComparisonData,
    labels: &[usize],
    lambda: &[f64],
    z: &mut [f64],
    rng: &mut RngStream,
) {
    for (e, z) in data.edges().iter().zip(z.iter_mut()) {
        let rate = lambda[labels[e.i]] + lambda[labels[e.j]];
        *z = gamma_draw(f64::from(e.matches()), rate, rng);
    }
}

/// Draw each occupied block's strength from
/// Gamma(a + Σ_{i∈k} w_i, b + Σ_{i∈k} Z_i). No normalization.
pub fn update_strengths(
    stats: &SufficientStats,
    partition: &Partition,
    hyper: &Hyperparameters,
    rng: &mut RngStream,
) -> BlockStrengths {
    let mut lambda = vec![0.0; partition.k()];
    draw_strengths(
        &stats.total_wins,
        &stats.total_z,
        partition.labels(),
        hyper,
        &mut lambda,
        rng,
    );
    BlockStrengths::from_vec_unchecked(lambda)
}

fn draw_strengths(
    wins: &[u64],
    z_item: &[f64],
    labels: &[usize],
    hyper: &Hyperparameters,
    lambda: &mut [f64],
    rng: &mut RngStream,
) {
    let k = lambda.len();
    let mut block_w = vec![0u64; k];
    let mut block_z = vec![0.0; k];
    for ((&l, &w), &z) in labels.iter().zip(wins).zip(z_item) {
        block_w[l] += w;
        block_z[l] += z;
    }
    for ((lam, w), z) in lambda.iter_mut().zip(block_w).zip(block_z) {
        *lam = gamma_draw(hyper.a + w as f64, hyper.b + z, rng);
    }
}

/// Divide by the geometric mean.
pub fn rescale(strengths: &BlockStrengths) -> BlockStrengths {
    let mut v = strengths.values().to_vec();
    rescale_in_place(&mut v);
    BlockStrengths::from_vec_unchecked(v)
}

fn rescale_in_place(lambda: &mut [f64]) {
    if lambda.is_empty() {
        return;
    }
    let log_g = lambda.iter().map(|v| v.ln()).sum::<f64>() / lambda.len() as f64;
    for v in lambda.iter_mut() {
        *v = (v.ln() - log_g).exp();
    }
}

/// Unnormalized log allocation weights for one item over the existing
/// blocks followed by a new block.
///
/// `others` is the number of items other than the one being placed and
/// `sizes` their block sizes, so the urn factor for block k is
/// `(m_k + 1)(others - K + γ)` and for a new block `K² - Kγ`. The likelihood
/// factor is `λ_k^{w} e^{-λ_k z}` for existing blocks and the Gamma-integrated
/// `b^a Γ(a+w) / (Γ(a) (b+z)^{a+w})` for a new one.
pub fn assignment_log_weights(
    others: usize,
    sizes: &[usize],
    strengths: &[f64],
    w_i: u64,
    z_i: f64,
    hyper: &Hyperparameters,
) -> Vec<f64> {
    let ln_lambda: Vec<f64> = strengths.iter().map(|v| v.ln()).collect();
    let new_block = new_block_log_marginal(w_i, z_i, hyper);
    let mut out = Vec::with_capacity(sizes.len() + 1);
    fill_log_weights(
        others, sizes, strengths, &ln_lambda, w_i as f64, z_i, new_block, hyper.gamma, &mut out,
    );
    out
}

fn new_block_log_marginal(w_i: u64, z_i: f64, hyper: &Hyperparameters) -> f64 {
    let (a, b, w) = (hyper.a, hyper.b, w_i as f64);
    (lgamma(a + w) - lgamma(a)) - w * (b + z_i).ln() - a * (z_i / b).ln_1p()
}

#[allow(clippy::too_many_arguments)]
fn fill_log_weights(
    others: usize,
    sizes: &[usize],
    lambda: &[f64],
    ln_lambda: &[f64],
    w: f64,
    z: f64,
    new_block: f64,
    gamma: f64,
    out: &mut Vec<f64>,
) {
    out.clear();
    let k = sizes.len();
    if k > 0 {
        let urn = (others as f64 - k as f64 + gamma).ln();
        for ((&m, &lam), &ln_lam) in sizes.iter().zip(lambda).zip(ln_lambda) {
            out.push(((m + 1) as f64).ln() + urn + w * ln_lam - lam * z);
        }
        let kf = k as f64;
        out.push((kf * kf - kf * gamma).ln() + new_block);
    } else {
        out.push(0.0);
    }
}

/// Mutable chain state: labels, block sizes, strengths and latents.
#[derive(Clone, Debug)]
pub struct SamplerState {
    labels: Vec<usize>,
    sizes: Vec<usize>,
    lambda: Vec<f64>,
    ln_lambda: Vec<f64>,
    z: Vec<f64>,
    z_item: Vec<f64>,
    wins: Vec<u64>,
    update_partition: bool,
    rescale: RescaleMode,
    scratch: Vec<f64>,
}

impl SamplerState {
    pub fn new(
        data: &ComparisonData,
        partition: Partition,
        strengths: BlockStrengths,
        rescale: RescaleMode,
    ) -> Result<Self> {
        if partition.n_items() != data.n_items() {
            return Err(Error::SizeMismatch(partition.n_items(), data.n_items()));
        }
        if strengths.len() != partition.k() {
            return Err(Error::SizeMismatch(strengths.len(), partition.k()));
        }
        let lambda = strengths.into_vec();
        let sizes = partition.sizes().to_vec();
        Ok(Self {
            ln_lambda: lambda.iter().map(|v| v.ln()).collect(),
            lambda,
            sizes,
            labels: partition.labels().to_vec(),
            z: vec![0.0; data.n_edges()],
            z_item: vec![0.0; data.n_items()],
            wins: data.total_wins(),
            update_partition: true,
            rescale,
            scratch: Vec::new(),
        })
    }

    /// Overdispersed start: every item alone, strengths from the prior.
    pub fn overdispersed(
        data: &ComparisonData,
        hyper: &Hyperparameters,
        rescale: RescaleMode,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let n = data.n_items();
        let lambda: Vec<f64> = (0..n).map(|_| gamma_draw(hyper.a, hyper.b, rng)).collect();
        Self::new(
            data,
            Partition::singletons(n),
            BlockStrengths::from_vec_unchecked(lambda),
            rescale,
        )
    }

    /// Keep the partition fixed; only latents and strengths are updated.
    pub fn freeze_partition(mut self) -> Self {
        self.update_partition = false;
        self
    }

    pub fn partition(&self) -> Partition {
        Partition::from_labels(self.labels.clone()).expect("sampler keeps labels contiguous")
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// Strengths on the chain's internal scale.
    pub fn raw_strengths(&self) -> &[f64] {
        &self.lambda
    }

    /// Strengths normalized to geometric mean one.
    pub fn strengths(&self) -> BlockStrengths {
        rescale(&BlockStrengths::from_vec_unchecked(self.lambda.clone()))
    }

    pub fn latents(&self) -> AugmentedLatents {
        AugmentedLatents::from_vec_unchecked(self.z.clone())
    }

    pub fn sufficient_stats(&self) -> SufficientStats {
        SufficientStats {
            total_wins: self.wins.clone(),
            total_z: self.z_item.clone(),
        }
    }

    /// One full sweep against `data`, which must share the item count and
    /// edge set the state was built with (win splits may differ).
    pub fn sweep(
        &mut self,
        data: &ComparisonData,
        hyper: &Hyperparameters,
        rng: &mut RngStream,
        timings: &mut PhaseTimings,
    ) {
        debug_assert_eq!(self.z.len(), data.n_edges());

        let t0 = Instant::now();
        draw_latents(data, &self.labels, &self.lambda, &mut self.z, rng);
        self.z_item.iter_mut().for_each(|v| *v = 0.0);
        self.wins.iter_mut().for_each(|v| *v = 0);
        for (e, &z) in data.edges().iter().zip(&self.z) {
            self.z_item[e.i] += z;
            self.z_item[e.j] += z;
            self.wins[e.i] += u64::from(e.wins_i);
            self.wins[e.j] += u64::from(e.wins_j);
        }
        let t1 = Instant::now();
        timings.latents += t1 - t0;

        draw_strengths(
            &self.wins,
            &self.z_item,
            &self.labels,
            hyper,
            &mut self.lambda,
            rng,
        );
        self.sync_ln_lambda();
        let t2 = Instant::now();
        timings.strengths += t2 - t1;

        if self.update_partition {
            for i in 0..self.labels.len() {
                self.update_assignment(i, hyper, rng);
            }
        }
        let t3 = Instant::now();
        timings.assignments += t3 - t2;

        if self.rescale == RescaleMode::InChain {
            rescale_in_place(&mut self.lambda);
            self.sync_ln_lambda();
        }
        timings.rescale += t3.elapsed();
    }

    fn sync_ln_lambda(&mut self) {
        self.ln_lambda.clear();
        self.ln_lambda.extend(self.lambda.iter().map(|v| v.ln()));
    }

    /// Gibbs update of item `i`'s block given everything else, using the
    /// latents from the current sweep.
    pub fn update_assignment(&mut self, i: usize, hyper: &Hyperparameters, rng: &mut RngStream) {
        let old = self.labels[i];
        self.sizes[old] -= 1;
        if self.sizes[old] == 0 {
            self.sizes.remove(old);
            self.lambda.remove(old);
            self.ln_lambda.remove(old);
            for l in self.labels.iter_mut() {
                if *l > old {
                    *l -= 1;
                }
            }
        }

        let (w, z) = (self.wins[i], self.z_item[i]);
        let new_block = new_block_log_marginal(w, z, hyper);
        let mut weights = std::mem::take(&mut self.scratch);
        fill_log_weights(
            self.labels.len() - 1,
            &self.sizes,
            &self.lambda,
            &self.ln_lambda,
            w as f64,
            z,
            new_block,
            hyper.gamma,
            &mut weights,
        );
        let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in weights.iter_mut() {
            *v = (*v - max).exp();
        }
        let choice = sample_index(&weights, rng);
        self.scratch = weights;

        let k = self.sizes.len();
        if choice == k {
            let lam = gamma_draw(hyper.a + w as f64, hyper.b + z, rng);
            self.sizes.push(1);
            self.lambda.push(lam);
            self.ln_lambda.push(lam.ln());
        } else {
            self.sizes[choice] += 1;
        }
        self.labels[i] = choice;
    }

    fn record(&self, chain: usize, iteration: usize) -> Draw {
        Draw {
            chain,
            iteration,
            partition: self.partition(),
            strengths: self.strengths(),
        }
    }
}

/// Run one chain from the overdispersed start.
pub fn run_chain(data: &ComparisonData, config: &SamplerConfig) -> Result<Trace> {
    run_single(data, config, 0, None)
}

/// Run `config.n_chains` independent chains in parallel, one stream each,
/// and concatenate their draws.
pub fn run_chains(data: &ComparisonData, config: &SamplerConfig) -> Result<Trace> {
    run_many(data, config, None)
}

/// Same as [`run_chains`] with the partition held fixed at `fixed`.
pub fn run_chains_fixed_partition(
    data: &ComparisonData,
    config: &SamplerConfig,
    fixed: &Partition,
) -> Result<Trace> {
    run_many(data, config, Some(fixed))
}

fn run_many(
    data: &ComparisonData,
    config: &SamplerConfig,
    fixed: Option<&Partition>,
) -> Result<Trace> {
    config.validate()?;
    let traces: Vec<Trace> = (0..config.n_chains)
        .into_par_iter()
        .map(|c| run_single(data, config, c, fixed))
        .collect::<Result<_>>()?;
    let mut timings = PhaseTimings::default();
    let mut draws = Vec::with_capacity(config.draws_per_chain() * config.n_chains);
    for t in traces {
        timings.add(&t.timings);
        draws.extend(t.draws);
    }
    Ok(Trace {
        draws,
        config: config.clone(),
        timings,
    })
}

fn run_single(
    data: &ComparisonData,
    config: &SamplerConfig,
    chain: usize,
    fixed: Option<&Partition>,
) -> Result<Trace> {
    config.validate()?;
    if data.n_items() == 0 {
        return Err(Error::InvalidData("no items to cluster".into()));
    }
    let hyper = config.hyper;
    let mut rng = RngStream::new(config.seed, chain as u64);
    let mut state = match fixed {
        None => SamplerState::overdispersed(data, &hyper, config.rescale, &mut rng)?,
        Some(p) => {
            let lambda: Vec<f64> = (0..p.k())
                .map(|_| gamma_draw(hyper.a, hyper.b, &mut rng))
                .collect();
            SamplerState::new(
                data,
                p.clone(),
                BlockStrengths::from_vec_unchecked(lambda),
                config.rescale,
            )?
            .freeze_partition()
        }
    };
    let mut timings = PhaseTimings::default();
    let mut draws = Vec::with_capacity(config.draws_per_chain());
    for t in 1..=config.total_iters {
        state.sweep(data, &hyper, &mut rng, &mut timings);
        if t > config.burn_in && (t - config.burn_in).is_multiple_of(config.thin) {
            draws.push(state.record(chain, t));
        }
    }
    if state.lambda.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Numeric("non-finite block strength".into()));
    }
    Ok(Trace {
        draws,
        config: config.clone(),
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::{pmf_k_table, GnedinParams};
    use proptest::prelude::*;

    fn normalize(log_w: &[f64]) -> Vec<f64> {
        let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = log_w.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    }

    fn quick_config(total: usize, burn: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            total_iters: total,
            burn_in: burn,
            seed,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn latent_means() {
        let data = ComparisonData::from_results(3, [(0, 1, 1), (2, 0, 3), (0, 2, 1)]).unwrap();
        let part = Partition::singletons(3);
        let s = BlockStrengths::new(vec![1.5, 0.5, 0.0001]).unwrap();
        // edge (0,1): n=1, rate 2; edge (0,2): n=4, rate ~1.5
        let mut rng = RngStream::new(5, 0);
        let reps = 200_000;
        let (mut m0, mut m1) = (0.0, 0.0);
        for _ in 0..reps {
            let z = update_latents(&data, &part, &s, &mut rng);
            m0 += z.values()[0];
            m1 += z.values()[1];
        }
        m0 /= reps as f64;
        m1 /= reps as f64;
        assert!((m0 - 0.5).abs() < 4.0 * 0.5 / (reps as f64).sqrt());
        let rate = 1.5001;
        assert!((m1 - 4.0 / rate).abs() < 4.0 * 2.0 / rate / (reps as f64).sqrt());

        let empty = ComparisonData::empty(2);
        let z = update_latents(
            &empty,
            &Partition::one_block(2),
            &BlockStrengths::new(vec![1.0]).unwrap(),
            &mut rng,
        );
        assert!(z.values().is_empty());
    }

    #[test]
    fn strength_conditional_parameters() {
        let hyper = Hyperparameters::new(2.0, 1.526, 0.8).unwrap();
        // block 0 = items {0, 1} with w = 6 + 4, Z = 1.5 + 2.5; block 1 has no data
        let stats = SufficientStats {
            total_wins: vec![6, 4, 0],
            total_z: vec![1.5, 2.5, 0.0],
        };
        let part = Partition::from_labels(vec![0, 0, 1]).unwrap();
        let mut rng = RngStream::new(8, 0);
        let reps = 200_000;
        let (mut s0, mut s1) = (0.0, 0.0);
        for _ in 0..reps {
            let l = update_strengths(&stats, &part, &hyper, &mut rng);
            s0 += l.get(0);
            s1 += l.get(1);
        }
        let (m0, m1) = (s0 / reps as f64, s1 / reps as f64);
        let sd0 = 12f64.sqrt() / 5.526;
        assert!((m0 - 12.0 / 5.526).abs() < 4.0 * sd0 / (reps as f64).sqrt(), "{m0}");
        let sd1 = 2f64.sqrt() / 1.526;
        assert!((m1 - 2.0 / 1.526).abs() < 4.0 * sd1 / (reps as f64).sqrt(), "{m1}");
    }

    #[test]
    fn new_block_factor_is_one_without_data() {
        for a in [0.5, 2.0, 7.0] {
            let hyper = Hyperparameters::new(a, 3.3, 0.8).unwrap();
            assert_eq!(new_block_log_marginal(0, 0.0, &hyper), 0.0);
        }
    }

    #[test]
    fn equal_strengths_reduce_to_prior_urn() {
        let hyper = Hyperparameters::default();
        let sizes = [3, 1, 5];
        let w = assignment_log_weights(9, &sizes, &[1.7, 1.7, 1.7], 0, 0.0, &hyper);
        let p = normalize(&w);
        let urn = crate::prior::predictive_weights(
            &crate::prior::PartitionCounts::new(sizes.to_vec()).unwrap(),
            &GnedinParams::new(0.8, 10).unwrap(),
        );
        let q: Vec<f64> = urn.iter().map(|v| v / urn.iter().sum::<f64>()).collect();
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn assignment_probability_example() {
        let hyper = Hyperparameters::aligned(2.0, 0.8).unwrap();
        // Urn size 10 (as if ten other items) reproduces the printed example.
        let p = normalize(&assignment_log_weights(10, &[5, 4], &[2.0, 1.0], 3, 1.0, &hyper));
        for (got, want) in p.iter().zip([0.766, 0.217, 0.017]) {
            assert!((got - want).abs() < 5e-4, "{p:?}");
        }
        // In the sampler the urn size is the number of other items (here 9).
        let p = normalize(&assignment_log_weights(9, &[5, 4], &[2.0, 1.0], 3, 1.0, &hyper));
        // independent arithmetic: weights (6)(9-2+0.8) 2^3 e^-2, (5)(7.8) e^-1,
        // (4-1.6) b^2 Γ(5)/Γ(2) (b+1)^-5
        let b = hyper.b;
        let raw = [
            6.0 * 7.8 * 8.0 * (-2.0f64).exp(),
            5.0 * 7.8 * (-1.0f64).exp(),
            2.4 * b * b * 24.0 / (b + 1.0).powi(5),
        ];
        let s: f64 = raw.iter().sum();
        for (got, r) in p.iter().zip(raw) {
            assert!((got - r / s).abs() < 1e-12);
        }
    }

    #[test]
    fn rescale_examples() {
        let r = rescale(&BlockStrengths::new(vec![2.0, 8.0]).unwrap());
        assert!((r.get(0) - 0.5).abs() < 1e-15 && (r.get(1) - 2.0).abs() < 1e-15);
        let one = rescale(&BlockStrengths::new(vec![1.0]).unwrap());
        assert_eq!(one.values(), &[1.0]);
    }

    proptest! {
        #[test]
        fn rescale_preserves_order_and_centers(v in prop::collection::vec(1e-3f64..1e3, 1..12)) {
            let s = BlockStrengths::new(v.clone()).unwrap();
            let r = rescale(&s);
            prop_assert!(r.log_mean().abs() < 1e-10);
            for i in 0..v.len() {
                for j in 0..v.len() {
                    prop_assert_eq!(v[i] < v[j], r.get(i) < r.get(j));
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SamplerConfig::default();
        c.burn_in = c.total_iters;
        assert!(c.validate().is_err());
        let mut c = SamplerConfig::default();
        c.thin = 0;
        assert!(c.validate().is_err());
        let mut c = SamplerConfig::default();
        c.hyper.gamma = 4.0;
        assert!(c.validate().is_err());
        assert!(SamplerConfig::default().validate().is_ok());
    }

    #[test]
    fn single_item_chain() {
        let data = ComparisonData::empty(1);
        let t = run_chain(&data, &quick_config(50, 10, 1)).unwrap();
        assert_eq!(t.len(), 40);
        for d in &t.draws {
            assert_eq!(d.k(), 1);
            assert!((d.strengths.get(0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn draws_satisfy_invariants_and_reproduce() {
        let data = ComparisonData::from_results(
            6,
            [(0, 1, 3), (1, 2, 2), (2, 3, 4), (3, 4, 1), (4, 5, 2), (5, 0, 1), (0, 3, 2)],
        )
        .unwrap();
        for mode in [RescaleMode::OutputOnly, RescaleMode::InChain] {
            let mut cfg = quick_config(600, 100, 77);
            cfg.rescale = mode;
            cfg.thin = 5;
            let a = run_chain(&data, &cfg).unwrap();
            let b = run_chain(&data, &cfg).unwrap();
            assert_eq!(a.len(), 100);
            assert_eq!(a.draws, b.draws);
            for d in &a.draws {
                assert_eq!(d.strengths.len(), d.k());
                assert!(d.strengths.log_mean().abs() < 1e-10);
                assert!(Partition::from_labels(d.partition.labels().to_vec()).is_ok());
                assert_eq!(d.iteration % 5, 0);
            }
        }
    }

    #[test]
    fn prior_only_chain_matches_gnedin_pmf() {
        let n = 7;
        let data = ComparisonData::empty(n);
        let t = run_chain(&data, &quick_config(21_000, 1_000, 4)).unwrap();
        let pmf = pmf_k_table(&GnedinParams::new(0.8, n).unwrap());
        let mut freq = vec![0.0; n];
        for d in &t.draws {
            freq[d.k() - 1] += 1.0 / t.len() as f64;
        }
        let tv: f64 = 0.5 * freq.iter().zip(&pmf).map(|(a, b)| (a - b).abs()).sum::<f64>();
        assert!(tv < 0.02, "tv={tv}");
    }

    #[test]
    fn chains_are_concatenated_in_order() {
        let data = ComparisonData::from_results(3, [(0, 1, 2), (1, 2, 1)]).unwrap();
        let mut cfg = quick_config(30, 10, 3);
        cfg.n_chains = 3;
        let t = run_chains(&data, &cfg).unwrap();
        assert_eq!(t.len(), 60);
        let chains: Vec<usize> = t.draws.iter().map(|d| d.chain).collect();
        assert!(chains.windows(2).all(|w| w[0] <= w[1]));
        let single = run_chain(&data, &cfg).unwrap();
        assert_eq!(&t.draws[..20], &single.draws[..]);
    }

    #[test]
    fn frozen_partition_is_kept() {
        let data = ComparisonData::from_results(3, [(0, 1, 2), (1, 2, 1)]).unwrap();
        let fixed = Partition::singletons(3);
        let t = run_chains_fixed_partition(&data, &quick_config(40, 10, 3), &fixed).unwrap();
        assert!(t.draws.iter().all(|d| d.partition == fixed));
    }
}
