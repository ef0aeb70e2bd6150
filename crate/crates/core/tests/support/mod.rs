//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use btsbm::model::{ComparisonData, Hyperparameters, Partition};
use btsbm::prior::{log_prior_partition, GnedinParams};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};

/// Log of the Bradley-Terry likelihood (no binomial constants) for
/// per-block strengths `pi`.
fn bt_log_lik(data: &ComparisonData, labels: &[usize], pi: &[f64]) -> f64 {
    data.edges()
        .iter()
        .map(|e| {
            let (a, b) = (pi[labels[e.i]], pi[labels[e.j]]);
            f64::from(e.wins_i) * (a / (a + b)).ln() + f64::from(e.wins_j) * (b / (a + b)).ln()
        })
        .sum()
}

/// Exact posterior over every set partition of the items: Gnedin prior
/// times the strength-marginal likelihood. The likelihood depends on the
/// strengths only through their ratios, and for iid Gamma(a, b) strengths
/// the normalized vector is Dirichlet(a, ..., a), so the marginal is a
/// Dirichlet expectation, estimated here by Monte Carlo with `n_mc` draws
/// from an independent Gamma generator.
pub fn exact_partition_posterior(
    data: &ComparisonData,
    hyper: &Hyperparameters,
    n_mc: usize,
    seed: u64,
) -> Vec<(Partition, f64)> {
    let n = data.n_items();
    let params = GnedinParams::new(hyper.gamma, n).unwrap();
    let gamma = Gamma::new(hyper.a, 1.0).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut logs = Vec::new();
    let parts = Partition::enumerate_all(n);
    for part in &parts {
        let k = part.k();
        let log_ml = if k == 1 {
            bt_log_lik(data, part.labels(), &[1.0])
        } else {
            let mut vals = Vec::with_capacity(n_mc);
            let mut pi = vec![0.0; k];
            for _ in 0..n_mc {
                for v in pi.iter_mut() {
                    *v = gamma.sample(&mut rng);
                }
                vals.push(bt_log_lik(data, part.labels(), &pi));
            }
            let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            m + (vals.iter().map(|v| (v - m).exp()).sum::<f64>() / n_mc as f64).ln()
        };
        logs.push(log_prior_partition(part, &params).unwrap() + log_ml);
    }
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    parts
        .into_iter()
        .zip(logs)
        .map(|(p, l)| (p, (l - m).exp() / z))
        .collect()
}

/// Total variation distance between the oracle and the empirical
/// frequencies of `visits` (canonical partitions).
pub fn tv_to_oracle(oracle: &[(Partition, f64)], visits: &[Partition]) -> f64 {
    let mut tv = 0.0;
    let total = visits.len() as f64;
    for (p, q) in oracle {
        let canon = p.canonical();
        let freq = visits.iter().filter(|v| **v == canon).count() as f64 / total;
        tv += (freq - q).abs();
    }
    0.5 * tv
}

/// Small fixed instance on four items: two strong, two weak.
pub fn four_item_data() -> ComparisonData {
    ComparisonData::from_results(
        4,
        [
            (0, 1, 1),
            (1, 0, 1),
            (0, 2, 3),
            (1, 3, 3),
            (2, 3, 1),
            (3, 2, 1),
            (0, 3, 2),
            (1, 2, 2),
            (2, 1, 1),
        ],
    )
    .unwrap()
}

/// Batch-means standard error of the mean of an autocorrelated series.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

pub fn mean_and_se_iid(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
