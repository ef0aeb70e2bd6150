//! Posterior summaries over a [`Trace`].

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BlockStrengths, Partition};
use crate::sampler::{Draw, Trace};

/// Draws with blocks ordered by decreasing strength. Only [`relabel`]
/// builds one.
#[derive(Clone, Debug)]
pub struct RelabeledTrace {
    draws: Vec<Draw>,
}

impl RelabeledTrace {
    pub fn draws(&self) -> &[Draw] {
        &self.draws
    }

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

    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.draws.iter().map(|d| &d.partition)
    }
}

/// Sort each draw's blocks by decreasing strength. Exact ties keep the
/// smaller original label first.
pub fn relabel(trace: &Trace) -> RelabeledTrace {
    RelabeledTrace {
        draws: trace.draws.iter().map(relabel_draw).collect(),
    }
}

pub fn relabel_draw(draw: &Draw) -> Draw {
    let lam = draw.strengths.values();
    let mut order: Vec<usize> = (0..lam.len()).collect();
    order.sort_by(|&x, &y| lam[y].total_cmp(&lam[x]));
    let mut new_label = vec![0; lam.len()];
    for (new, &old) in order.iter().enumerate() {
        new_label[old] = new;
    }
    let labels = draw
        .partition
        .labels()
        .iter()
        .map(|&l| new_label[l])
        .collect();
    Draw {
        chain: draw.chain,
        iteration: draw.iteration,
        partition: Partition::from_labels(labels).expect("block permutation keeps labels contiguous"),
        strengths: BlockStrengths::from_vec_unchecked(order.iter().map(|&k| lam[k]).collect()),
    }
}

/// Variation of information in nats.
pub fn vi_distance(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.n_items() != p2.n_items() {
        return Err(Error::SizeMismatch(p1.n_items(), p2.n_items()));
    }
    // fixed argument order makes the result exactly symmetric
    let (a, b) = if p1.labels() <= p2.labels() { (p1, p2) } else { (p2, p1) };
    Ok(vi_unchecked(a, b))
}

fn vi_unchecked(a: &Partition, b: &Partition) -> f64 {
    let n = a.n_items();
    if n == 0 {
        return 0.0;
    }
    let kb = b.k();
    let mut table = vec![0u32; a.k() * kb];
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        table[la * kb + lb] += 1;
    }
    let (sa, sb) = (a.sizes(), b.sizes());
    let mut acc = 0.0;
    for (cell, &nij) in table.iter().enumerate() {
        if nij == 0 {
            continue;
        }
        let nij = nij as f64;
        let prod = sa[cell / kb] as f64 * sb[cell % kb] as f64;
        // each term is ≥ 0 and vanishes when the cell fills both blocks
        acc += nij * (prod / (nij * nij)).ln();
    }
    acc / n as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsensusSummary {
    pub point_partition: Partition,
    pub expected_vi: f64,
    pub k_point: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsensusOptions {
    /// At most this many distinct sampled partitions (the most frequent)
    /// are scored as candidates.
    pub max_candidates: usize,
    pub greedy_merge: bool,
}

impl Default for ConsensusOptions {
    fn default() -> Self {
        Self {
            max_candidates: 500,
            greedy_merge: true,
        }
    }
}

/// Distinct partitions (canonical labels) with their draw counts, in order
/// of first occurrence.
pub fn distinct_partitions<'a>(
    parts: impl IntoIterator<Item = &'a Partition>,
) -> Vec<(Partition, usize)> {
    let mut index: HashMap<Partition, usize> = HashMap::new();
    let mut out: Vec<(Partition, usize)> = Vec::new();
    for p in parts {
        let c = p.canonical();
        match index.get(&c) {
            Some(&i) => out[i].1 += 1,
            None => {
                index.insert(c.clone(), out.len());
                out.push((c, 1));
            }
        }
    }
    out
}

fn expected_vi(candidate: &Partition, support: &[(Partition, usize)], total: f64) -> f64 {
    support
        .iter()
        .map(|(p, c)| *c as f64 * vi_unchecked(candidate, p))
        .sum::<f64>()
        / total
}

// `a` beats `b` on lower loss, then fewer blocks; otherwise the incumbent stays.
fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    let tol = 1e-12 * (1.0 + b.0.abs());
    if a.0 < b.0 - tol {
        return true;
    }
    a.0 <= b.0 + tol && a.1 < b.1
}

pub fn consensus_partition(trace: &RelabeledTrace) -> Result<ConsensusSummary> {
    consensus_with(trace.partitions(), ConsensusOptions::default())
}

/// Minimize the posterior expected VI over sampled partitions, then merge
/// block pairs of the winner while that lowers the loss.
pub fn consensus_with<'a>(
    parts: impl IntoIterator<Item = &'a Partition>,
    opts: ConsensusOptions,
) -> Result<ConsensusSummary> {
    let support = distinct_partitions(parts);
    if support.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let total: f64 = support.iter().map(|(_, c)| *c as f64).sum();

    let mut cand: Vec<usize> = (0..support.len()).collect();
    if cand.len() > opts.max_candidates.max(1) {
        // stable sort keeps first-occurrence order among equal counts
        cand.sort_by(|&x, &y| support[y].1.cmp(&support[x].1));
        cand.truncate(opts.max_candidates.max(1));
        cand.sort_unstable();
    }
    let losses: Vec<f64> = cand
        .par_iter()
        .map(|&i| expected_vi(&support[i].0, &support, total))
        .collect();
    let mut best = cand[0];
    let mut best_loss = losses[0];
    for (&i, &l) in cand.iter().zip(&losses).skip(1) {
        if better((l, support[i].0.k()), (best_loss, support[best].0.k())) {
            best = i;
            best_loss = l;
        }
    }
    let mut point = support[best].0.clone();

    if opts.greedy_merge {
        loop {
            let k = point.k();
            if k < 2 {
                break;
            }
            let pairs: Vec<(usize, usize)> = (0..k)
                .flat_map(|x| ((x + 1)..k).map(move |y| (x, y)))
                .collect();
            let trials: Vec<(Partition, f64)> = pairs
                .par_iter()
                .map(|&(x, y)| {
                    let merged = merge_blocks(&point, x, y);
                    let l = expected_vi(&merged, &support, total);
                    (merged, l)
                })
                .collect();
            let mut step: Option<(Partition, f64)> = None;
            for (p, l) in trials {
                let beats_best = step.as_ref().is_none_or(|(_, sl)| l < *sl);
                if beats_best {
                    step = Some((p, l));
                }
            }
            match step {
                Some((p, l)) if l < best_loss - 1e-12 * (1.0 + best_loss) => {
                    point = p;
                    best_loss = l;
                }
                _ => break,
            }
        }
    }

    Ok(ConsensusSummary {
        k_point: point.k(),
        point_partition: point,
        expected_vi: best_loss.max(0.0),
    })
}

fn merge_blocks(p: &Partition, x: usize, y: usize) -> Partition {
    let labels: Vec<usize> = p
        .labels()
        .iter()
        .map(|&l| if l == y { x } else { l })
        .collect();
    Partition::canonical_from(&labels)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CredibleBall {
    pub epsilon_star: f64,
    pub coverage: f64,
    pub vertical_upper: Partition,
    pub vertical_lower: Partition,
    pub horizontal: Partition,
    /// (blocks in `vertical_upper`, blocks in `vertical_lower`)
    pub k_bounds: (usize, usize),
}

pub fn credible_ball(trace: &RelabeledTrace, point: &Partition, alpha: f64) -> Result<CredibleBall> {
    let parts: Vec<&Partition> = trace.partitions().collect();
    credible_ball_of(&parts, point, alpha)
}

pub fn credible_ball_of(parts: &[&Partition], point: &Partition, alpha: f64) -> Result<CredibleBall> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
        });
    }
    if parts.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let dist: Vec<f64> = parts
        .par_iter()
        .map(|p| vi_distance(point, p))
        .collect::<Result<_>>()?;
    let t = dist.len();
    let mut sorted = dist.clone();
    sorted.sort_by(f64::total_cmp);
    // smallest sampled threshold whose coverage reaches 1 - alpha
    let need = ((1.0 - alpha) * t as f64 - 1e-9).ceil().max(1.0) as usize;
    let mut eps = sorted[need.min(t) - 1];
    let mut covered = sorted.partition_point(|&d| d <= eps);
    if covered < need {
        eps = sorted[t - 1];
        covered = t;
    }

    let inside: Vec<usize> = (0..t).filter(|&i| dist[i] <= eps).collect();
    let pick = |key: &dyn Fn(usize) -> (i64, f64)| -> usize {
        let mut best = inside[0];
        for &i in &inside[1..] {
            let (ka, da) = key(i);
            let (kb, db) = key(best);
            if ka < kb || (ka == kb && da > db) {
                best = i;
            }
        }
        best
    };
    let upper = pick(&|i| (parts[i].k() as i64, dist[i]));
    let lower = pick(&|i| (-(parts[i].k() as i64), dist[i]));
    let horizontal = pick(&|i| (0, dist[i]));

    Ok(CredibleBall {
        epsilon_star: eps,
        coverage: covered as f64 / t as f64,
        vertical_upper: parts[upper].clone(),
        vertical_lower: parts[lower].clone(),
        horizontal: parts[horizontal].clone(),
        k_bounds: (parts[upper].k(), parts[lower].k()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KPosterior {
    pub mode: usize,
    pub pmf: BTreeMap<usize, f64>,
    pub ci95: (usize, usize),
}

impl KPosterior {
    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(&k).copied().unwrap_or(0.0)
    }
}

pub fn k_posterior(k_values: &[usize]) -> Result<KPosterior> {
    if k_values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &k in k_values {
        *counts.entry(k).or_default() += 1;
    }
    let t = k_values.len();
    // BTreeMap iterates ascending, so strict > keeps the smaller K on ties
    let mut mode = (0, 0);
    for (&k, &c) in &counts {
        if c > mode.1 {
            mode = (k, c);
        }
    }
    let mut sorted = k_values.to_vec();
    sorted.sort_unstable();
    let q = |p: f64| sorted[(((p * t as f64) - 1e-9).ceil().max(1.0) as usize - 1).min(t - 1)];
    Ok(KPosterior {
        mode: mode.0,
        pmf: counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / t as f64))
            .collect(),
        ci95: (q(0.025), q(0.975)),
    })
}

fn filtered(trace: &RelabeledTrace, condition_k: Option<usize>) -> Result<Vec<&Draw>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let kept: Vec<&Draw> = trace
        .draws
        .iter()
        .filter(|d| condition_k.is_none_or(|k| d.k() == k))
        .collect();
    if kept.is_empty() {
        return Err(Error::NoMatchingDraws(condition_k.unwrap_or(0)));
    }
    Ok(kept)
}

/// Row `i` gives the probability that item `i` sits in each relabeled block.
/// Columns run to the conditioning K, or to the largest K seen.
pub fn membership_probs(trace: &RelabeledTrace, condition_k: Option<usize>) -> Result<Vec<Vec<f64>>> {
    let kept = filtered(trace, condition_k)?;
    let cols = condition_k.unwrap_or_else(|| kept.iter().map(|d| d.k()).max().unwrap_or(0));
    let n = trace.n_items();
    let mut m = vec![vec![0.0; cols]; n];
    let w = 1.0 / kept.len() as f64;
    for d in &kept {
        for (i, &l) in d.partition.labels().iter().enumerate() {
            m[i][l] += w;
        }
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlayerStrength {
    pub mean: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
}

/// Each item's block strength per draw, summarized by mean and HPD interval.
pub fn player_strengths(
    trace: &RelabeledTrace,
    condition_k: Option<usize>,
    hpd_mass: f64,
) -> Result<Vec<PlayerStrength>> {
    if !(hpd_mass > 0.0 && hpd_mass <= 1.0) {
        return Err(Error::Domain {
            what: "hpd_mass",
            value: hpd_mass,
        });
    }
    let kept = filtered(trace, condition_k)?;
    (0..trace.n_items())
        .map(|i| {
            let mut xs: Vec<f64> = kept
                .iter()
                .map(|d| d.strengths.get(d.partition.label(i)))
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.sort_by(f64::total_cmp);
            let (lo, hi) = hpd_sorted(&xs, hpd_mass)?;
            Ok(PlayerStrength {
                mean,
                hpd_lo: lo,
                hpd_hi: hi,
            })
        })
        .collect()
}

/// Shortest interval holding `mass` of the sorted sample.
pub fn hpd_sorted(xs: &[f64], mass: f64) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n = xs.len();
    let m = ((mass * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let mut best = 0;
    for s in 1..=(n - m) {
        if xs[s + m - 1] - xs[s] < xs[best + m - 1] - xs[best] {
            best = s;
        }
    }
    Ok((xs[best], xs[best + m - 1]))
}

/// Linear-interpolation sample quantile of a sorted slice.
pub fn quantile_sorted(xs: &[f64], p: f64) -> f64 {
    let h = (xs.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceSeries {
    pub per_draw_entropy: Vec<f64>,
    pub mean: f64,
    pub ci95: (f64, f64),
}

/// Block-size entropy divided by ln K; zero for a single block.
pub fn normalized_entropy(p: &Partition) -> f64 {
    let k = p.k();
    if k < 2 {
        return 0.0;
    }
    let sizes = p.sizes();
    if sizes.iter().all(|&m| m == sizes[0]) {
        return 1.0;
    }
    let n = p.n_items() as f64;
    let h: f64 = sizes
        .iter()
        .map(|&m| {
            let q = m as f64 / n;
            -q * q.ln()
        })
        .sum();
    (h / (k as f64).ln()).clamp(0.0, 1.0)
}

pub fn balance_entropy<'a>(parts: impl IntoIterator<Item = &'a Partition>) -> Result<BalanceSeries> {
    let per: Vec<f64> = parts.into_iter().map(normalized_entropy).collect();
    if per.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    let mut s = per.clone();
    s.sort_by(f64::total_cmp);
    Ok(BalanceSeries {
        ci95: (quantile_sorted(&s, 0.025), quantile_sorted(&s, 0.975)),
        per_draw_entropy: per,
        mean,
    })
}

pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.n_items() != p2.n_items() {
        return Err(Error::SizeMismatch(p1.n_items(), p2.n_items()));
    }
    let c2 = |m: f64| m * (m - 1.0) / 2.0;
    let kb = p2.k();
    let mut table = vec![0u64; p1.k() * kb];
    for (&a, &b) in p1.labels().iter().zip(p2.labels()) {
        table[a * kb + b] += 1;
    }
    let index: f64 = table.iter().map(|&v| c2(v as f64)).sum();
    let sa: f64 = p1.sizes().iter().map(|&v| c2(v as f64)).sum();
    let sb: f64 = p2.sizes().iter().map(|&v| c2(v as f64)).sum();
    let total = c2(p1.n_items() as f64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sa * sb / total;
    let max = 0.5 * (sa + sb);
    if max == expected {
        // both partitions trivial and therefore identical
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
