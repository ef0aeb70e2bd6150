//! Synthetic comparison data: the balanced recovery design (round-robin
//! blocks, equally spaced strengths) and the fully generative prior model.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockStrengths, ComparisonData, Hyperparameters, Partition};
use crate::numerics::{gamma_draw, RngStream};
use crate::prior::{sample_prior_partition, GnedinParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_items: usize,
    pub k_true: usize,
    pub edge_prob: f64,
    pub match_rate: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n_items: usize, k_true: usize, seed: u64) -> Self {
        Self {
            n_items,
            k_true,
            edge_prob: 0.5,
            match_rate: 5.0,
            lambda_lo: 0.1,
            lambda_hi: 3.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_true < 2 {
            return Err(Error::InvalidConfig(format!(
                "k_true={} must be at least 2",
                self.k_true
            )));
        }
        if self.k_true > self.n_items {
            return Err(Error::InvalidConfig(format!(
                "k_true={} exceeds n_items={}",
                self.k_true, self.n_items
            )));
        }
        check_edge_params(self.edge_prob, self.match_rate)?;
        if !(self.lambda_lo > 0.0 && self.lambda_lo < self.lambda_hi && self.lambda_hi.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "need 0 < lambda_lo ({}) < lambda_hi ({})",
                self.lambda_lo, self.lambda_hi
            )));
        }
        Ok(())
    }

    /// Equally spaced block strengths from `lambda_lo` to `lambda_hi`.
    pub fn strengths(&self) -> Vec<f64> {
        let step = (self.lambda_hi - self.lambda_lo) / (self.k_true - 1) as f64;
        (0..self.k_true)
            .map(|k| self.lambda_lo + k as f64 * step)
            .collect()
    }

    /// Round-robin labels 0, 1, ..., K-1, 0, 1, ...
    pub fn labels(&self) -> Vec<usize> {
        (0..self.n_items).map(|i| i % self.k_true).collect()
    }
}

fn check_edge_params(edge_prob: f64, match_rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidConfig(format!(
            "edge_prob={edge_prob} must be a probability"
        )));
    }
    if !(match_rate > 0.0 && match_rate.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "match_rate={match_rate} must be positive"
        )));
    }
    Ok(())
}

/// Generated data together with the truth that produced it.
#[derive(Clone, Debug)]
pub struct SynthData {
    pub data: ComparisonData,
    pub partition: Partition,
    pub strengths: BlockStrengths,
}

/// Balanced design: round-robin labels, equally spaced strengths,
/// Bernoulli(edge_prob) edges carrying Poisson(match_rate) matches (a zero
/// draw drops the edge) and binomial outcomes.
pub fn generate_fixed(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let mut rng = RngStream::new(spec.seed, 0);
    let partition = Partition::from_labels(spec.labels())?;
    let strengths = BlockStrengths::new(spec.strengths())?;
    let data = simulate_outcomes(
        &partition,
        &strengths,
        spec.edge_prob,
        spec.match_rate,
        &mut rng,
    )?;
    Ok(SynthData {
        data,
        partition,
        strengths,
    })
}

/// Draw everything from the model: a Gnedin partition, Gamma(a, b)
/// strengths, then edges and outcomes as in [`generate_fixed`].
pub fn generate_from_prior(
    n: usize,
    hyper: &Hyperparameters,
    edge_prob: f64,
    match_rate: f64,
    rng: &mut RngStream,
) -> Result<SynthData> {
    hyper.validate()?;
    check_edge_params(edge_prob, match_rate)?;
    let partition = sample_prior_partition(&GnedinParams::new(hyper.gamma, n)?, rng);
    let strengths = BlockStrengths::new(
        (0..partition.k())
            .map(|_| gamma_draw(hyper.a, hyper.b, rng))
            .collect(),
    )?;
    let data = simulate_outcomes(&partition, &strengths, edge_prob, match_rate, rng)?;
    Ok(SynthData {
        data,
        partition,
        strengths,
    })
}

fn simulate_outcomes(
    partition: &Partition,
    strengths: &BlockStrengths,
    edge_prob: f64,
    match_rate: f64,
    rng: &mut RngStream,
) -> Result<ComparisonData> {
    let n = partition.n_items();
    let poisson =
        Poisson::new(match_rate).map_err(|e| Error::InvalidConfig(format!("poisson: {e}")))?;
    let mut results = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !rng.random_bool(edge_prob) {
                continue;
            }
            let matches = poisson.sample(rng) as u64;
            if matches == 0 {
                continue;
            }
            let li = strengths.get(partition.label(i));
            let lj = strengths.get(partition.label(j));
            let wins_i = Binomial::new(matches, li / (li + lj))
                .map_err(|e| Error::Numeric(format!("binomial: {e}")))?
                .sample(rng);
            let m = u32::try_from(matches).map_err(|_| Error::Numeric("match count".into()))?;
            let wi = wins_i as u32;
            results.push((i, j, wi));
            results.push((j, i, m - wi));
        }
    }
    ComparisonData::from_results(n, results)
}

/// Draw new win splits for every edge of `data` given a partition and
/// strengths, keeping the match counts.
pub fn resample_wins(
    data: &ComparisonData,
    partition: &Partition,
    strengths: &BlockStrengths,
    rng: &mut RngStream,
) -> Result<ComparisonData> {
    let wins: Vec<(u32, u32)> = data
        .edges()
        .iter()
        .map(|e| {
            let li = strengths.get(partition.label(e.i));
            let lj = strengths.get(partition.label(e.j));
            let n = e.matches();
            let wi = Binomial::new(u64::from(n), li / (li + lj))
                .expect("valid binomial")
                .sample(rng) as u32;
            (wi, n - wi)
        })
        .collect();
    data.with_edge_wins(&wins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strength_spacing_and_labels() {
        let spec = SynthSpec::new(6, 3, 1);
        let s = spec.strengths();
        assert!((s[0] - 0.1).abs() < 1e-12 && (s[1] - 1.55).abs() < 1e-12 && (s[2] - 3.0).abs() < 1e-12);
        assert_eq!(spec.labels(), vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn spec_violations() {
        assert!(SynthSpec::new(6, 1, 0).validate().is_err());
        assert!(SynthSpec::new(2, 3, 0).validate().is_err());
        let mut s = SynthSpec::new(10, 3, 0);
        s.lambda_lo = 3.0;
        assert!(s.validate().is_err());
        let mut s = SynthSpec::new(10, 3, 0);
        s.edge_prob = 1.5;
        assert!(generate_fixed(&s).is_err());
    }

    #[test]
    fn accounting_holds() {
        let sd = generate_fixed(&SynthSpec::new(40, 4, 9)).unwrap();
        for e in sd.data.edges() {
            assert!(e.matches() > 0);
            assert_eq!(sd.data.wins(e.i, e.j) + sd.data.wins(e.j, e.i), e.matches());
        }
        assert_eq!(sd.partition.k(), 4);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = generate_fixed(&SynthSpec::new(30, 3, 5)).unwrap();
        let b = generate_fixed(&SynthSpec::new(30, 3, 5)).unwrap();
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn edge_density_matches_design() {
        let mut edges = 0usize;
        let reps = 40;
        let n = 50;
        for r in 0..reps {
            edges += generate_fixed(&SynthSpec::new(n, 3, 100 + r)).unwrap().data.n_edges();
        }
        let pairs = (reps as usize * n * (n - 1) / 2) as f64;
        let q = 0.5 * (1.0 - (-5.0f64).exp());
        let observed = edges as f64 / pairs;
        assert!((observed - q).abs() < 3.0 * (q * (1.0 - q) / pairs).sqrt(), "{observed}");
    }

    #[test]
    fn equal_strengths_split_evenly() {
        let mut spec = SynthSpec::new(60, 2, 3);
        spec.lambda_lo = 1.0;
        spec.lambda_hi = 1.0 + 1e-12;
        spec.edge_prob = 1.0;
        let sd = generate_fixed(&spec).unwrap();
        let wins_low: u64 = sd.data.edges().iter().map(|e| u64::from(e.wins_i)).sum();
        let total = sd.data.total_matches() as f64;
        let frac = wins_low as f64 / total;
        assert!((frac - 0.5).abs() < 4.0 * (0.25 / total).sqrt(), "{frac}");
    }

    #[test]
    fn single_item_from_prior() {
        let mut rng = RngStream::new(1, 0);
        let sd = generate_from_prior(1, &Hyperparameters::default(), 0.5, 5.0, &mut rng).unwrap();
        assert_eq!(sd.data.n_edges(), 0);
        assert_eq!(sd.partition.k(), 1);
    }
}
