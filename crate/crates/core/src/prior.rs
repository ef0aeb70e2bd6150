//! The Gnedin partition prior (Gibbs-type with σ = -1): distribution of
//! the number of blocks, the predictive urn, and partition probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Partition;
use crate::numerics::{lgamma, sample_index, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnedinParams {
    gamma: f64,
    n: usize,
}

impl GnedinParams {
    pub fn new(gamma: f64, n: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "Gnedin gamma={gamma} must lie in (0, 1)"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidConfig("Gnedin prior needs n >= 1".into()));
        }
        Ok(Self { gamma, n })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Block sizes of a partition of the items placed so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCounts {
    sizes: Vec<usize>,
    n: usize,
}

impl PartitionCounts {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::InvalidData("block sizes must be positive".into()));
        }
        let n = sizes.iter().sum();
        Ok(Self { sizes, n })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl From<&Partition> for PartitionCounts {
    fn from(p: &Partition) -> Self {
        Self {
            sizes: p.sizes().to_vec(),
            n: p.n_items(),
        }
    }
}

/// `ln (x)_m` (rising factorial).
fn ln_rising(x: f64, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    lgamma(x + m as f64) - lgamma(x)
}

fn ln_choose(n: usize, k: usize) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    lgamma(n as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((n - k) as f64 + 1.0)
}

/// `P(K = k)` for `n` items:
/// `C(n,k) (1-γ)_{k-1} (γ)_{n-k} / (1+γ)_{n-1}`.
pub fn pmf_k(params: &GnedinParams, k: usize) -> Result<f64> {
    let n = params.n;
    if k < 1 || k > n {
        return Err(Error::Range {
            what: "pmf_K k",
            value: k as i64,
            lo: 1,
            hi: n as i64,
        });
    }
    Ok(ln_pmf_k(params, k).exp())
}

fn ln_pmf_k(params: &GnedinParams, k: usize) -> f64 {
    let (n, g) = (params.n, params.gamma);
    ln_choose(n, k) + ln_rising(1.0 - g, k - 1) + ln_rising(g, n - k) - ln_rising(1.0 + g, n - 1)
}

/// The whole pmf of K, entry `k - 1` holding `P(K = k)`.
pub fn pmf_k_table(params: &GnedinParams) -> Vec<f64> {
    (1..=params.n).map(|k| ln_pmf_k(params, k).exp()).collect()
}

/// `E[K] = Γ(n+1) Γ(1+γ) / Γ(n+γ)`.
pub fn mean_k(params: &GnedinParams) -> f64 {
    let (n, g) = (params.n as f64, params.gamma);
    (lgamma(n + 1.0) + lgamma(1.0 + g) - lgamma(n + g)).exp()
}

/// `Var(K) = E[K] (n - γ(n-1)) - E[K]²`.
pub fn var_k(params: &GnedinParams) -> f64 {
    let (n, g) = (params.n as f64, params.gamma);
    let mean = mean_k(params);
    (mean * (n - g * (n - 1.0)) - mean * mean).max(0.0)
}

/// Unnormalized urn weights for the next item given the current partition:
/// `(m_k + 1)(n - K + γ)` for each existing block, then `K² - Kγ` for a new
/// one. An empty partition puts all mass on the new block.
pub fn predictive_weights(counts: &PartitionCounts, params: &GnedinParams) -> Vec<f64> {
    let k = counts.k();
    if k == 0 {
        return vec![1.0];
    }
    let g = params.gamma;
    let existing = counts.n as f64 - k as f64 + g;
    let mut w: Vec<f64> = counts
        .sizes
        .iter()
        .map(|&m| (m as f64 + 1.0) * existing)
        .collect();
    let kf = k as f64;
    w.push(kf * kf - kf * g);
    w
}

/// Draw a partition of `params.n()` items by sequential urn allocation.
/// Labels come out in order of first appearance.
pub fn sample_prior_partition(params: &GnedinParams, rng: &mut RngStream) -> Partition {
    let n = params.n;
    let mut labels = Vec::with_capacity(n);
    let mut counts = PartitionCounts {
        sizes: Vec::new(),
        n: 0,
    };
    for _ in 0..n {
        let w = predictive_weights(&counts, params);
        let k = sample_index(&w, rng);
        if k == counts.sizes.len() {
            counts.sizes.push(0);
        }
        counts.sizes[k] += 1;
        counts.n += 1;
        labels.push(k);
    }
    Partition::from_labels(labels).expect("urn labels are contiguous")
}

/// `ln p(x | γ) = ln ψ_{n,K} + Σ_k ln m_k!`, using the closed form
/// `ψ_{n,K} = (γ)_{n-K} Π_{k<K}(k² - γk) / Π_{i<n}(i² + γi)`.
pub fn log_prior_partition(partition: &Partition, params: &GnedinParams) -> Result<f64> {
    let n = partition.n_items();
    if n != params.n {
        return Err(Error::SizeMismatch(n, params.n));
    }
    let k = partition.k();
    Ok(ln_psi(n, k, params.gamma)
        + partition
            .sizes()
            .iter()
            .filter(|&&m| m > 1)
            .map(|&m| lgamma(m as f64 + 1.0))
            .sum::<f64>())
}

fn ln_psi(n: usize, k: usize, g: f64) -> f64 {
    // Π_{j=1}^{m-1} j(j+c) = (m-1)! (1+c)_{m-1}
    let ln_prod = |m: usize, c: f64| {
        if m <= 1 {
            0.0
        } else {
            lgamma(m as f64) + ln_rising(1.0 + c, m - 1)
        }
    };
    ln_rising(g, n - k) + ln_prod(k, -g) - ln_prod(n, g)
}
