//! Standard Bradley-Terry baseline and PSIS-LOO comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{edge_log_pmf, ComparisonData, Partition};
use crate::numerics::{fit_generalized_pareto, gpd_quantile, log_sum_exp};
use crate::sampler::{run_chains_fixed_partition, SamplerConfig, Trace};

/// Pareto shape above which importance weights are unreliable.
pub const PARETO_K_BAD: f64 = 0.7;

/// Player-level Bradley-Terry posterior: the augmented sampler with every
/// item in its own block and no assignment moves.
pub fn fit_standard_bt(data: &ComparisonData, config: &SamplerConfig) -> Result<Trace> {
    run_chains_fixed_partition(data, config, &Partition::singletons(data.n_items()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Bt,
    BtSbm,
}

/// Log pmf of each edge under each draw, stored edge-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseLogLik {
    n_draws: usize,
    edges: Vec<(usize, usize)>,
    values: Vec<f64>,
}

impl PointwiseLogLik {
    /// `columns[e][t]` is the log pmf of edge `e` in draw `t`.
    pub fn from_columns(edges: Vec<(usize, usize)>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if edges.len() != columns.len() {
            return Err(Error::SizeMismatch(edges.len(), columns.len()));
        }
        let n_draws = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != n_draws) {
            return Err(Error::SizeMismatch(c.len(), n_draws));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite pointwise log-likelihood".into()));
        }
        Ok(Self {
            n_draws,
            edges,
            values: columns.concat(),
        })
    }

    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn column(&self, e: usize) -> &[f64] {
        &self.values[e * self.n_draws..(e + 1) * self.n_draws]
    }

    pub fn get(&self, draw: usize, edge: usize) -> f64 {
        self.values[edge * self.n_draws + draw]
    }
}

pub fn pointwise_loglik(trace: &Trace, data: &ComparisonData, model: ModelKind) -> Result<PointwiseLogLik> {
    let n = data.n_items();
    for d in &trace.draws {
        if d.partition.n_items() != n {
            return Err(Error::SizeMismatch(d.partition.n_items(), n));
        }
        if model == ModelKind::Bt && d.k() != n {
            return Err(Error::InvalidData(
                "standard BT draws must keep every player in its own block".into(),
            ));
        }
    }
    let columns: Vec<Vec<f64>> = data
        .edges()
        .par_iter()
        .map(|e| {
            trace
                .draws
                .iter()
                .map(|d| {
                    let li = d.strengths.get(d.partition.label(e.i));
                    let lj = d.strengths.get(d.partition.label(e.j));
                    edge_log_pmf(e.matches(), e.wins_i, li, lj)
                })
                .collect()
        })
        .collect();
    PointwiseLogLik::from_columns(data.edges().iter().map(|e| (e.i, e.j)).collect(), columns)
}

/// Pareto-smoothed importance weights for one edge.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothedWeights {
    /// Normalized log weights (log-sum-exp is zero).
    pub log_weights: Vec<f64>,
    /// `None` when no tail was fitted.
    pub pareto_k: Option<f64>,
}

/// Number of tail draws replaced by GPD order statistics.
pub fn tail_length(s: usize) -> usize {
    let s = s as f64;
    (0.2 * s).min(3.0 * s.sqrt()).ceil() as usize
}

/// Smooth raw log importance weights. Weights are shifted so the largest is
/// zero; the tail is replaced by expected GPD order statistics and capped at
/// the largest raw weight.
pub fn psis_smooth(raw_log_weights: &[f64]) -> Result<SmoothedWeights> {
    let s = raw_log_weights.len();
    if s == 0 {
        return Err(Error::EmptyTrace);
    }
    let max = raw_log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lw: Vec<f64> = raw_log_weights.iter().map(|v| v - max).collect();
    let m = tail_length(s);
    let mut pareto_k = None;
    if m >= 5 && m < s {
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&x, &y| lw[x].total_cmp(&lw[y]));
        let tail = &order[s - m..];
        let cutoff = lw[order[s - m - 1]];
        let exceed: Vec<f64> = tail.iter().map(|&t| lw[t].exp() - cutoff.exp()).collect();
        if let Ok(fit) = fit_generalized_pareto(&exceed) {
            for (j, &t) in tail.iter().enumerate() {
                let p = (j as f64 + 0.5) / m as f64;
                let w = cutoff.exp() + gpd_quantile(p, fit);
                lw[t] = w.ln().min(0.0);
            }
            pareto_k = Some(fit.k);
        }
    }
    let norm = log_sum_exp(&lw);
    lw.iter_mut().for_each(|v| *v -= norm);
    Ok(SmoothedWeights {
        log_weights: lw,
        pareto_k,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElpdReport {
    pub elpd: f64,
    pub se: f64,
    pub per_edge_lpd: Vec<f64>,
    pub pareto_k: Vec<Option<f64>>,
    pub n_bad_k: usize,
    pub edges: Vec<(usize, usize)>,
}

impl ElpdReport {
    /// Indices of edges whose Pareto shape exceeds [`PARETO_K_BAD`].
    pub fn flagged_edges(&self) -> Vec<usize> {
        self.pareto_k
            .iter()
            .enumerate()
            .filter(|(_, k)| k.is_some_and(|k| k > PARETO_K_BAD))
            .map(|(e, _)| e)
            .collect()
    }
}

fn loo_edge(ll: &[f64]) -> Result<(f64, Option<f64>)> {
    let (lo, hi) = ll
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        return Ok((lo, None));
    }
    let raw: Vec<f64> = ll.iter().map(|v| -v).collect();
    let w = psis_smooth(&raw)?;
    let terms: Vec<f64> = w.log_weights.iter().zip(ll).map(|(a, b)| a + b).collect();
    Ok((log_sum_exp(&terms).clamp(lo, hi), w.pareto_k))
}

/// Leave-one-edge-out predictive densities by Pareto-smoothed importance
/// sampling.
pub fn psis_loo(loglik: &PointwiseLogLik) -> Result<ElpdReport> {
    if loglik.n_draws() == 0 || loglik.n_edges() == 0 {
        return Err(Error::EmptyTrace);
    }
    if loglik.n_draws() < 100 {
        log::warn!(
            "PSIS-LOO with only {} draws; estimates may be unstable",
            loglik.n_draws()
        );
    }
    let per: Vec<(f64, Option<f64>)> = (0..loglik.n_edges())
        .into_par_iter()
        .map(|e| loo_edge(loglik.column(e)))
        .collect::<Result<_>>()?;
    let per_edge_lpd: Vec<f64> = per.iter().map(|p| p.0).collect();
    let pareto_k: Vec<Option<f64>> = per.iter().map(|p| p.1).collect();
    let n_bad_k = pareto_k
        .iter()
        .filter(|k| k.is_some_and(|k| k > PARETO_K_BAD))
        .count();
    if n_bad_k > 0 {
        log::warn!("{n_bad_k} edges have Pareto k above {PARETO_K_BAD}");
    }
    Ok(ElpdReport {
        elpd: per_edge_lpd.iter().sum(),
        se: sum_se(&per_edge_lpd),
        per_edge_lpd,
        pareto_k,
        n_bad_k,
        edges: loglik.edges().to_vec(),
    })
}

/// `sqrt(n * var(x))` with the unbiased variance.
fn sum_se(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (n as f64 * var).sqrt()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeDeltaMethod {
    /// `sqrt(se1² + se2²) / 2`
    #[default]
    Halved,
    /// `sqrt(se1² + se2²)`
    Independent,
    /// Standard error of the summed per-edge differences.
    Paired,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaElpd {
    pub delta: f64,
    pub se_delta: f64,
}

/// `elpd(m1) - elpd(m2)` with its standard error.
pub fn delta_elpd(m1: &ElpdReport, m2: &ElpdReport, method: SeDeltaMethod) -> Result<DeltaElpd> {
    if m1.edges != m2.edges || m1.per_edge_lpd.len() != m2.per_edge_lpd.len() {
        return Err(Error::EdgeSetMismatch);
    }
    let se_delta = match method {
        SeDeltaMethod::Halved => m1.se.hypot(m2.se) / 2.0,
        SeDeltaMethod::Independent => m1.se.hypot(m2.se),
        SeDeltaMethod::Paired => {
            let d: Vec<f64> = m1
                .per_edge_lpd
                .iter()
                .zip(&m2.per_edge_lpd)
                .map(|(a, b)| a - b)
                .collect();
            sum_se(&d)
        }
    };
    Ok(DeltaElpd {
        delta: m1.elpd - m2.elpd,
        se_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BlockStrengths;
    use crate::numerics::RngStream;
    use crate::sampler::Draw;
    use proptest::prelude::*;
    use rand::Rng;

    fn report(elpd: f64, se: f64) -> ElpdReport {
        ElpdReport {
            elpd,
            se,
            per_edge_lpd: vec![elpd],
            pareto_k: vec![None],
            n_bad_k: 0,
            edges: vec![(0, 1)],
        }
    }

    fn cfg(total: usize, burn: usize) -> SamplerConfig {
        SamplerConfig {
            total_iters: total,
            burn_in: burn,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn delta_examples() {
        let d = delta_elpd(&report(-100.0, 6.0), &report(-120.0, 8.0), SeDeltaMethod::Halved).unwrap();
        assert_eq!(d.delta, 20.0);
        assert!((d.se_delta - 5.0).abs() < 1e-15);
        let d = delta_elpd(&report(-100.0, 6.0), &report(-120.0, 8.0), SeDeltaMethod::Independent).unwrap();
        assert!((d.se_delta - 10.0).abs() < 1e-15);
        let r = report(-50.0, 3.0);
        let d = delta_elpd(&r, &r, SeDeltaMethod::Halved).unwrap();
        assert_eq!(d.delta, 0.0);
        assert!((d.se_delta - 3.0 * 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(delta_elpd(&r, &r, SeDeltaMethod::Paired).unwrap().se_delta, 0.0);
        let mut other = report(-1.0, 1.0);
        other.edges = vec![(0, 2)];
        assert!(matches!(
            delta_elpd(&r, &other, SeDeltaMethod::Halved),
            Err(Error::EdgeSetMismatch)
        ));
    }

    #[test]
    fn tail_lengths() {
        assert_eq!(tail_length(100), 20);
        assert_eq!(tail_length(10_000), 300);
        assert_eq!(tail_length(20), 4);
    }

    #[test]
    fn constant_column_is_exact() {
        let ll = PointwiseLogLik::from_columns(vec![(0, 1)], vec![vec![-0.7; 300]]).unwrap();
        let r = psis_loo(&ll).unwrap();
        assert_eq!(r.per_edge_lpd, vec![-0.7]);
        assert_eq!(r.pareto_k, vec![None]);
        assert_eq!(r.elpd, -0.7);
        assert_eq!(r.se, 0.0);
    }

    #[test]
    fn empty_input_errors() {
        let ll = PointwiseLogLik::from_columns(vec![], vec![]).unwrap();
        assert!(psis_loo(&ll).is_err());
    }

    #[test]
    fn pointwise_examples() {
        let data = ComparisonData::from_results(3, [(0, 1, 1), (2, 1, 1), (1, 2, 1)]).unwrap();
        let draw = |labels: Vec<usize>, lam: Vec<f64>| Draw {
            chain: 0,
            iteration: 0,
            partition: Partition::from_labels(labels).unwrap(),
            strengths: BlockStrengths::new(lam).unwrap(),
        };
        let trace = Trace {
            draws: vec![
                draw(vec![0, 0, 1], vec![2.0, 0.5]),
                draw(vec![0, 0, 0], vec![1.0]),
            ],
            config: SamplerConfig::default(),
            timings: Default::default(),
        };
        let ll = pointwise_loglik(&trace, &data, ModelKind::BtSbm).unwrap();
        assert!((ll.get(0, 0) - 0.5f64.ln()).abs() < 1e-14);
        assert!((ll.get(1, 0) - 0.5f64.ln()).abs() < 1e-14);
        // edge (1,2) with one win each and p = 0.8
        assert!((ll.get(0, 1) - (2.0 * 0.8 * 0.2f64).ln()).abs() < 1e-14);
        assert!((ll.get(1, 1) - 0.5f64.ln()).abs() < 1e-14);
        assert!(pointwise_loglik(&trace, &data, ModelKind::Bt).is_err());

        let mut scaled = trace.clone();
        for d in &mut scaled.draws {
            d.strengths = BlockStrengths::new(d.strengths.values().iter().map(|v| v * 7.3).collect()).unwrap();
        }
        let ll2 = pointwise_loglik(&scaled, &data, ModelKind::BtSbm).unwrap();
        for t in 0..2 {
            for e in 0..2 {
                assert!((ll.get(t, e) - ll2.get(t, e)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn standard_bt_direction_and_constraint() {
        let data = ComparisonData::from_results(2, [(0, 1, 9), (1, 0, 1)]).unwrap();
        let t = fit_standard_bt(&data, &cfg(3000, 500)).unwrap();
        let ratio: f64 = t
            .draws
            .iter()
            .map(|d| d.strengths.get(0) / d.strengths.get(1))
            .sum::<f64>()
            / t.len() as f64;
        assert!(ratio > 1.0);
        for d in &t.draws {
            assert_eq!(d.k(), 2);
            let prod: f64 = d.strengths.values().iter().product();
            assert!((prod - 1.0).abs() < 1e-10);
        }

        let one = fit_standard_bt(&ComparisonData::empty(1), &cfg(20, 5)).unwrap();
        assert!(one.draws.iter().all(|d| d.strengths.values() == [1.0]));
    }

    #[test]
    fn smoothed_weights_normalized_and_capped() {
        let mut rng = RngStream::new(3, 0);
        let raw: Vec<f64> = (0..1000).map(|_| 2.0 * rng.random::<f64>().ln().abs().sqrt()).collect();
        let w = psis_smooth(&raw).unwrap();
        let total: f64 = w.log_weights.iter().map(|v| v.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let max_raw = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = w.log_weights.iter().zip(&raw).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
        // no smoothed weight exceeds the largest raw weight
        assert!(w.log_weights.iter().all(|v| v + shift <= max_raw + 1e-12));
        assert!(w.pareto_k.is_some());
    }

    #[test]
    fn heavy_tail_is_flagged() {
        // importance ratios with Pareto(k = 1.2) tails
        let mut rng = RngStream::new(11, 0);
        let ll: Vec<f64> = (0..2000)
            .map(|_| {
                let u: f64 = rng.random();
                1.2 * u.ln()
            })
            .collect();
        let p = PointwiseLogLik::from_columns(vec![(0, 1), (1, 2)], vec![ll, vec![-1.0; 2000]]).unwrap();
        let r = psis_loo(&p).unwrap();
        assert_eq!(r.n_bad_k, 1);
        assert_eq!(r.flagged_edges(), vec![0]);
    }

    proptest! {
        #[test]
        fn lpd_within_column_range(col in prop::collection::vec(-20.0f64..0.0, 50..400)) {
            let p = PointwiseLogLik::from_columns(vec![(0, 1)], vec![col.clone()]).unwrap();
            let r = psis_loo(&p).unwrap();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(r.per_edge_lpd[0] >= lo && r.per_edge_lpd[0] <= hi);
            let w = psis_smooth(&col.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
            let s: f64 = w.log_weights.iter().map(|v| v.exp()).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn self_comparison_is_zero() {
        let data = ComparisonData::from_results(4, [(0, 1, 3), (1, 2, 2), (2, 3, 1), (3, 0, 2)]).unwrap();
        let t = crate::sampler::run_chains(&data, &cfg(400, 100)).unwrap();
        let r = psis_loo(&pointwise_loglik(&t, &data, ModelKind::BtSbm).unwrap()).unwrap();
        assert!((r.per_edge_lpd.iter().sum::<f64>() - r.elpd).abs() < 1e-12);
        assert_eq!(delta_elpd(&r, &r, SeDeltaMethod::Halved).unwrap().delta, 0.0);
    }
}
