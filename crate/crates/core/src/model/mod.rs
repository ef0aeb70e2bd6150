//! Comparison data, partitions, block strengths and the Bradley-Terry
//! likelihoods, plus the Gamma hyperparameter scale alignment.

mod data;
mod partition;

use serde::{Deserialize, Serialize};

pub use data::{ComparisonData, Edge};
pub use partition::Partition;

use crate::error::{Error, Result};
use crate::numerics::{lgamma, psi, psi1};

/// Positive block strengths λ, indexed by block label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStrengths(Vec<f64>);

impl BlockStrengths {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Domain {
                what: "block strength",
                value: bad,
            });
        }
        Ok(Self(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// Mean of `ln λ_k`.
    pub fn log_mean(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().map(|v| v.ln()).sum::<f64>() / self.0.len() as f64
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Gamma(a, b) strength prior (shape-rate) and Gnedin parameter γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl Hyperparameters {
    pub fn new(a: f64, b: f64, gamma: f64) -> Result<Self> {
        let h = Self { a, b, gamma };
        h.validate()?;
        Ok(h)
    }

    /// Rate chosen by [`aligned_rate`] so that the prior mean of `ln λ` is 0.
    pub fn aligned(a: f64, gamma: f64) -> Result<Self> {
        Self::new(a, aligned_rate(a)?, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidConfig(format!("shape a={} must be > 0", self.a)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidConfig(format!("rate b={} must be > 0", self.b)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma={} must lie in (0, 1)",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Prior SD of `ln λ`.
    pub fn tau(&self) -> f64 {
        psi1(self.a).sqrt()
    }

    /// Offset `ψ(a) - ln b` of the prior mean of `ln λ` from zero.
    pub fn delta(&self) -> f64 {
        psi(self.a) - self.b.ln()
    }
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            a: 2.0,
            b: psi(2.0).exp(),
            gamma: 0.8,
        }
    }
}

/// Per-edge Gamma auxiliary sums `Z_ij`, parallel to [`ComparisonData::edges`].
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedLatents {
    z: Vec<f64>,
}

impl AugmentedLatents {
    pub fn new(data: &ComparisonData, z: Vec<f64>) -> Result<Self> {
        if z.len() != data.n_edges() {
            return Err(Error::SizeMismatch(z.len(), data.n_edges()));
        }
        if let Some(&bad) = z.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Domain {
                what: "augmented latent",
                value: bad,
            });
        }
        Ok(Self { z })
    }

    pub(crate) fn from_vec_unchecked(z: Vec<f64>) -> Self {
        Self { z }
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }
}

/// Per-item totals `w_i = Σ_j w_ij` and `Z_i = Σ_j Z_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct SufficientStats {
    pub total_wins: Vec<u64>,
    pub total_z: Vec<f64>,
}

/// Probability that an item of strength `lambda_i` beats one of strength
/// `lambda_j`.
pub fn bt_win_prob(lambda_i: f64, lambda_j: f64) -> Result<f64> {
    for v in [lambda_i, lambda_j] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain {
                what: "bt_win_prob",
                value: v,
            });
        }
    }
    Ok(lambda_i / (lambda_i + lambda_j))
}

/// `ln C(n, w)`.
pub fn ln_binomial(n: u32, w: u32) -> f64 {
    lgamma(f64::from(n) + 1.0) - lgamma(f64::from(w) + 1.0) - lgamma(f64::from(n - w) + 1.0)
}

/// Binomial log pmf of `w` wins in `n` matches for strengths
/// `(lambda_i, lambda_j)`, computed from log strengths.
pub fn edge_log_pmf(n: u32, w: u32, lambda_i: f64, lambda_j: f64) -> f64 {
    let (li, lj) = (lambda_i.ln(), lambda_j.ln());
    let m = li.max(lj);
    let log_total = m + ((li - m).exp() + (lj - m).exp()).ln();
    ln_binomial(n, w) + f64::from(w) * (li - log_total) + f64::from(n - w) * (lj - log_total)
}

fn check_consistent(
    data: &ComparisonData,
    partition: &Partition,
    strengths: &BlockStrengths,
) -> Result<()> {
    if partition.n_items() != data.n_items() {
        return Err(Error::SizeMismatch(partition.n_items(), data.n_items()));
    }
    if strengths.len() != partition.k() {
        return Err(Error::SizeMismatch(strengths.len(), partition.k()));
    }
    Ok(())
}

/// Block-clustered Bradley-Terry log-likelihood of the win counts, with
/// binomial coefficients so that it is a proper log pmf.
pub fn log_likelihood(
    data: &ComparisonData,
    partition: &Partition,
    strengths: &BlockStrengths,
) -> Result<f64> {
    check_consistent(data, partition, strengths)?;
    let lambda = strengths.values();
    Ok(data
        .edges()
        .iter()
        .map(|e| {
            edge_log_pmf(
                e.matches(),
                e.wins_i,
                lambda[partition.label(e.i)],
                lambda[partition.label(e.j)],
            )
        })
        .sum())
}

/// Complete-data log-likelihood of wins and latent sums.
pub fn log_augmented_likelihood(
    data: &ComparisonData,
    partition: &Partition,
    strengths: &BlockStrengths,
    latents: &AugmentedLatents,
) -> Result<f64> {
    check_consistent(data, partition, strengths)?;
    if latents.values().len() != data.n_edges() {
        return Err(Error::SizeMismatch(latents.values().len(), data.n_edges()));
    }
    let lambda = strengths.values();
    Ok(data
        .edges()
        .iter()
        .zip(latents.values())
        .map(|(e, &z)| {
            let li = lambda[partition.label(e.i)];
            let lj = lambda[partition.label(e.j)];
            let n = f64::from(e.matches());
            f64::from(e.wins_i) * li.ln() + f64::from(e.wins_j) * lj.ln() + (n - 1.0) * z.ln()
                - lgamma(n)
                - (li + lj) * z
        })
        .sum())
}

/// Gamma rate `exp(ψ(a))` giving a prior with `E[ln λ] = 0`.
pub fn aligned_rate(a: f64) -> Result<f64> {
    Ok(crate::numerics::digamma(a)?.exp())
}

/// Prior standard deviation of `ln λ` under Gamma(a, ·): `sqrt(ψ₁(a))`.
pub fn log_sd_tau(a: f64) -> Result<f64> {
    Ok(crate::numerics::trigamma(a)?.sqrt())
}

pub fn compute_sufficient_stats(
    data: &ComparisonData,
    latents: &AugmentedLatents,
) -> SufficientStats {
    let mut total_z = vec![0.0; data.n_items()];
    for (e, &z) in data.edges().iter().zip(latents.values()) {
        total_z[e.i] += z;
        total_z[e.j] += z;
    }
    SufficientStats {
        total_wins: data.total_wins(),
        total_z,
    }
}

/// Change in the new-block log marginal likelihood of an item with `w_i`
/// wins and latent mass `z_i` when the rate moves from `exp(ψ(a))` to
/// `exp(ψ(a) - delta)`.
pub fn new_cluster_bias(a: f64, w_i: u64, z_i: f64, delta: f64) -> Result<f64> {
    let psi_a = crate::numerics::digamma(a)?;
    if !(z_i >= 0.0) {
        return Err(Error::Domain {
            what: "new_cluster_bias Z_i",
            value: z_i,
        });
    }
    let w = w_i as f64;
    let shifted = ((psi_a - delta).exp() + z_i).ln();
    let aligned = (psi_a.exp() + z_i).ln();
    Ok(-a * delta - (a + w) * (shifted - aligned))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_edge_instance() -> (ComparisonData, Partition, BlockStrengths) {
        let data = ComparisonData::from_results(
            4,
            [(0, 1, 2), (1, 0, 1), (2, 0, 3), (3, 2, 1), (2, 3, 2)],
        )
        .unwrap();
        let part = Partition::from_labels(vec![0, 1, 1, 2]).unwrap();
        let strengths = BlockStrengths::new(vec![2.0, 0.7, 1.3]).unwrap();
        (data, part, strengths)
    }

    #[test]
    fn win_prob_cases() {
        assert_eq!(bt_win_prob(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(bt_win_prob(3.0, 1.0).unwrap(), 0.75);
        for c in [0.01, 1.0, 17.0] {
            assert!((bt_win_prob(2.0 * c, 2.0 * c).unwrap() - 0.5).abs() < 1e-15);
        }
        assert!(bt_win_prob(0.0, 1.0).is_err());
        assert!(bt_win_prob(1.0, -2.0).is_err());
    }

    #[test]
    fn log_likelihood_basic_cases() {
        let empty = ComparisonData::empty(3);
        let p = Partition::one_block(3);
        let s = BlockStrengths::new(vec![1.0]).unwrap();
        assert_eq!(log_likelihood(&empty, &p, &s).unwrap(), 0.0);

        let one = ComparisonData::from_results(2, [(0, 1, 1), (1, 0, 1)]).unwrap();
        let ll = log_likelihood(&one, &Partition::one_block(2), &s).unwrap();
        assert!((ll - 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_likelihood_scale_and_label_invariance() {
        let (data, part, s) = three_edge_instance();
        let base = log_likelihood(&data, &part, &s).unwrap();
        let scaled = BlockStrengths::new(s.values().iter().map(|v| v * 7.0).collect()).unwrap();
        assert!((log_likelihood(&data, &part, &scaled).unwrap() - base).abs() < 1e-12);

        // block k -> perm[k]
        let perm = [2, 0, 1];
        let permuted = part.permuted(&perm).unwrap();
        let mut sv = vec![0.0; 3];
        for (k, &v) in s.values().iter().enumerate() {
            sv[perm[k]] = v;
        }
        let ps = BlockStrengths::new(sv).unwrap();
        assert_eq!(log_likelihood(&data, &permuted, &ps).unwrap(), base);
    }

    #[test]
    fn log_likelihood_rejects_inconsistent_state() {
        let (data, part, _) = three_edge_instance();
        let short = BlockStrengths::new(vec![1.0, 1.0]).unwrap();
        assert!(log_likelihood(&data, &part, &short).is_err());
    }

    #[test]
    fn augmented_single_edge() {
        let data = ComparisonData::from_results(2, [(0, 1, 1)]).unwrap();
        let p = Partition::singletons(2);
        let s = BlockStrengths::new(vec![1.0, 1.0]).unwrap();
        let z = AugmentedLatents::new(&data, vec![0.3]).unwrap();
        let v = log_augmented_likelihood(&data, &p, &s, &z).unwrap();
        assert!((v + 0.6).abs() < 1e-14);

        let empty = ComparisonData::empty(2);
        let z0 = AugmentedLatents::new(&empty, vec![]).unwrap();
        assert_eq!(log_augmented_likelihood(&empty, &p, &s, &z0).unwrap(), 0.0);
    }

    // Gauss-Laguerre-free oracle: composite Simpson in u = ln z over a wide
    // window, independent of the closed form.
    fn integrate_edge(n: u32, wi: u32, li: f64, lj: f64) -> f64 {
        let data = ComparisonData::from_results(2, [(0, 1, wi), (1, 0, n - wi)]).unwrap();
        let p = Partition::singletons(2);
        let s = BlockStrengths::new(vec![li, lj]).unwrap();
        let (lo, hi, steps) = (-40.0f64, 6.0f64, 20_000usize);
        let h = (hi - lo) / steps as f64;
        let f = |u: f64| {
            let z = AugmentedLatents::from_vec_unchecked(vec![u.exp()]);
            (log_augmented_likelihood(&data, &p, &s, &z).unwrap() + u).exp()
        };
        let mut acc = f(lo) + f(hi);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + k as f64 * h);
        }
        (acc * h / 3.0).ln()
    }

    #[test]
    fn augmented_marginalizes_to_likelihood() {
        let (data, part, s) = three_edge_instance();
        let mut total = 0.0;
        for e in data.edges() {
            let li = s.get(part.label(e.i));
            let lj = s.get(part.label(e.j));
            total += integrate_edge(e.matches(), e.wins_i, li, lj);
        }
        // The complete-data likelihood carries no binomial coefficients.
        let binom: f64 = data
            .edges()
            .iter()
            .map(|e| ln_binomial(e.matches(), e.wins_i))
            .sum();
        let ll = log_likelihood(&data, &part, &s).unwrap();
        assert!((total - (ll - binom)).abs() < 1e-6, "{total} vs {}", ll - binom);
    }

    #[test]
    fn aligned_rate_values() {
        assert!((aligned_rate(2.0).unwrap() - 1.526).abs() < 5e-4);
        assert!((aligned_rate(1.0).unwrap() - 0.5615).abs() < 5e-5);
        for a in [0.5, 1.0, 2.0, 4.0, 6.0] {
            let r = crate::numerics::digamma(a).unwrap() - aligned_rate(a).unwrap().ln();
            assert!(r.abs() < 1e-12);
        }
        assert!(aligned_rate(0.0).is_err());
    }

    #[test]
    fn tau_table() {
        // (a, tau, SD(lambda) = sqrt(a)/b)
        let table = [
            (6.0, 0.43, 0.44),
            (5.0, 0.47, 0.50),
            (4.0, 0.53, 0.57),
            (3.0, 0.63, 0.69),
            (2.0, 0.80, 0.93),
            (1.0, 1.28, 1.78),
        ];
        for (a, tau, sd) in table {
            let t = log_sd_tau(a).unwrap();
            assert!((t - tau).abs() <= 0.005, "a={a}: tau {t}");
            let s = a.sqrt() / aligned_rate(a).unwrap();
            assert!((s - sd).abs() <= 0.005, "a={a}: sd {s}");
        }
        assert!(log_sd_tau(-1.0).is_err());
    }

    #[test]
    fn sufficient_stats_example() {
        let data = ComparisonData::from_results(3, [(0, 1, 2), (1, 0, 1), (2, 0, 1)]).unwrap();
        let z = AugmentedLatents::new(&data, vec![0.4, 0.1]).unwrap();
        let st = compute_sufficient_stats(&data, &z);
        assert_eq!(st.total_wins, vec![2, 1, 1]);
        let expect = [0.5, 0.4, 0.1];
        for (a, b) in st.total_z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let none = ComparisonData::empty(3);
        let st0 = compute_sufficient_stats(&none, &AugmentedLatents::new(&none, vec![]).unwrap());
        assert_eq!(st0.total_wins, vec![0, 0, 0]);
        assert_eq!(st0.total_z, vec![0.0; 3]);
    }

    #[test]
    fn new_cluster_bias_behaviour() {
        for (a, w, z) in [(2.0, 0, 0.0), (4.0, 10, 3.5), (0.7, 1, 100.0)] {
            assert_eq!(new_cluster_bias(a, w, z, 0.0).unwrap(), 0.0);
        }
        assert!(new_cluster_bias(2.0, 5, 0.01, 1.0).unwrap() > 0.0);
        assert!(new_cluster_bias(2.0, 5, 100.0, 1.0).unwrap() < 0.0);

        let h = 1e-5;
        for a in [1.0, 2.0, 4.0] {
            for w in [0u64, 3, 20] {
                for z in [0.05, 1.0, 30.0] {
                    let mut d = -3.0;
                    while d <= 3.0 {
                        let slope = (new_cluster_bias(a, w, z, d + h).unwrap()
                            - new_cluster_bias(a, w, z, d - h).unwrap())
                            / (2.0 * h);
                        assert!(slope > -a && slope < w as f64 + 1e-9 && (w > 0 || slope < 0.0),
                            "a={a} w={w} z={z} d={d}: {slope}");
                        d += 0.25;
                    }
                }
            }
        }
    }
}
