//! Command workflows: each reads its inputs, runs the analysis and writes a
//! fixed set of CSV/JSON files into an output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::matches::{load_matches, write_matches};
use super::tracefile::save_trace;
use crate::compare::{
    delta_elpd, fit_standard_bt, pointwise_loglik, psis_loo, DeltaElpd, ElpdReport, ModelKind,
    SeDeltaMethod,
};
use crate::error::{Error, Result};
use crate::model::{new_cluster_bias, ComparisonData, Hyperparameters, Partition};
use crate::numerics::digamma;
use crate::postprocess::{
    balance_entropy, consensus_with, credible_ball, k_posterior, membership_probs,
    player_strengths, relabel, ConsensusOptions, KPosterior, PlayerStrength, RelabeledTrace,
};
use crate::prior::{mean_k, pmf_k_table, var_k, GnedinParams};
use crate::sampler::{assignment_log_weights, run_chains, SamplerConfig, Trace};
use crate::synthgen::{generate_fixed, SynthSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryOptions {
    pub alpha: f64,
    pub hpd_mass: f64,
    pub condition_k: Option<usize>,
    pub consensus: ConsensusOptions,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            hpd_mass: 0.95,
            condition_k: None,
            consensus: ConsensusOptions::default(),
        }
    }
}

impl SummaryOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if !(self.hpd_mass > 0.0 && self.hpd_mass <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "hpd mass {} not in (0, 1]",
                self.hpd_mass
            )));
        }
        if self.condition_k == Some(0) {
            return Err(Error::InvalidConfig("conditioning K must be positive".into()));
        }
        Ok(())
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn one_based(p: &Partition) -> Vec<usize> {
    p.labels().iter().map(|l| l + 1).collect()
}

// ---------------------------------------------------------------- fit

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub sampler: SamplerConfig,
    pub summary: SummaryOptions,
    pub write_trace: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsensusReport {
    pub k: usize,
    pub expected_vi: f64,
    /// 1-based, block 1 strongest.
    pub labels: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallReport {
    pub alpha: f64,
    pub epsilon_star: f64,
    pub coverage: f64,
    pub k_upper: usize,
    pub k_lower: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub mean: f64,
    pub ci95: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitSummary {
    pub n_items: usize,
    pub n_edges: usize,
    pub n_draws: usize,
    pub config: SamplerConfig,
    pub k_posterior: KPosterior,
    pub consensus: ConsensusReport,
    pub credible_ball: BallReport,
    pub balance: BalanceReport,
}

/// In-memory results of a fit.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub trace: Trace,
    pub relabeled: RelabeledTrace,
    pub summary: FitSummary,
    pub consensus: Partition,
    pub ball_bounds: [Partition; 3],
    pub membership: Vec<Vec<f64>>,
    pub strengths: Vec<PlayerStrength>,
    pub entropy: Vec<f64>,
}

/// Renumber blocks of `p` by decreasing average member strength.
fn order_by_strength(p: &Partition, strengths: &[PlayerStrength]) -> Partition {
    let mut sum = vec![0.0; p.k()];
    for (i, &l) in p.labels().iter().enumerate() {
        sum[l] += strengths[i].mean;
    }
    let avg: Vec<f64> = sum.iter().zip(p.sizes()).map(|(s, &m)| s / m as f64).collect();
    let mut order: Vec<usize> = (0..p.k()).collect();
    order.sort_by(|&x, &y| avg[y].total_cmp(&avg[x]));
    let mut perm = vec![0; p.k()];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    p.permuted(&perm).expect("permutation of existing blocks")
}

pub fn fit_and_summarize(data: &ComparisonData, sampler: &SamplerConfig, opts: &SummaryOptions) -> Result<FitResult> {
    opts.validate()?;
    data.warn_structure();
    let start = Instant::now();
    let trace = run_chains(data, sampler)?;
    log::info!(
        "sampled {} draws in {:.2?} (latents {:.2?}, strengths {:.2?}, assignments {:.2?}, rescale {:.2?})",
        trace.len(),
        start.elapsed(),
        trace.timings.latents,
        trace.timings.strengths,
        trace.timings.assignments,
        trace.timings.rescale
    );
    summarize(data, trace, sampler, opts)
}

pub fn summarize(data: &ComparisonData, trace: Trace, sampler: &SamplerConfig, opts: &SummaryOptions) -> Result<FitResult> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let relabeled = relabel(&trace);
    let kpost = k_posterior(&relabeled.k_values())?;
    let membership = membership_probs(&relabeled, opts.condition_k)?;
    let strengths = player_strengths(&relabeled, opts.condition_k, opts.hpd_mass)?;
    let cons = consensus_with(relabeled.partitions(), opts.consensus)?;
    let point = order_by_strength(&cons.point_partition, &strengths);
    let ball = credible_ball(&relabeled, &point, opts.alpha)?;
    let balance = balance_entropy(relabeled.partitions())?;

    let summary = FitSummary {
        n_items: data.n_items(),
        n_edges: data.n_edges(),
        n_draws: trace.len(),
        config: sampler.clone(),
        k_posterior: kpost,
        consensus: ConsensusReport {
            k: point.k(),
            expected_vi: cons.expected_vi,
            labels: one_based(&point),
        },
        credible_ball: BallReport {
            alpha: opts.alpha,
            epsilon_star: ball.epsilon_star,
            coverage: ball.coverage,
            k_upper: ball.k_bounds.0,
            k_lower: ball.k_bounds.1,
        },
        balance: BalanceReport {
            mean: balance.mean,
            ci95: balance.ci95,
        },
    };
    Ok(FitResult {
        trace,
        relabeled,
        summary,
        consensus: point,
        ball_bounds: [ball.vertical_upper, ball.vertical_lower, ball.horizontal],
        membership,
        strengths,
        entropy: balance.per_draw_entropy,
    })
}

pub fn write_fit_outputs(data: &ComparisonData, fit: &FitResult, out_dir: &Path, with_trace: bool) -> Result<()> {
    create_dir(out_dir)?;
    write_json(&out_dir.join("summary.json"), &fit.summary)?;

    let mut w = csv_writer(&out_dir.join("k_pmf.csv"))?;
    w.write_record(["k", "prob"])?;
    for (k, p) in &fit.summary.k_posterior.pmf {
        w.write_record([k.to_string(), p.to_string()])?;
    }
    w.flush()?;

    let cols = fit.membership.first().map_or(0, Vec::len);
    let mut w = csv_writer(&out_dir.join("membership.csv"))?;
    let mut header = vec!["id".to_string()];
    header.extend((1..=cols).map(|k| format!("block_{k}")));
    w.write_record(&header)?;
    for (i, row) in fit.membership.iter().enumerate() {
        let mut rec = vec![data.name(i)];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv_writer(&out_dir.join("strengths.csv"))?;
    w.write_record(["id", "mean", "hpd_lo", "hpd_hi"])?;
    for (i, s) in fit.strengths.iter().enumerate() {
        w.write_record([data.name(i), s.mean.to_string(), s.hpd_lo.to_string(), s.hpd_hi.to_string()])?;
    }
    w.flush()?;

    let mut w = csv_writer(&out_dir.join("entropy.csv"))?;
    w.write_record(["draw", "H", "H_norm"])?;
    for (t, (d, h_norm)) in fit.relabeled.draws().iter().zip(&fit.entropy).enumerate() {
        let n = d.partition.n_items() as f64;
        let h: f64 = d
            .partition
            .sizes()
            .iter()
            .map(|&m| {
                let q = m as f64 / n;
                -q * q.ln()
            })
            .sum();
        w.write_record([t.to_string(), h.to_string(), h_norm.to_string()])?;
    }
    w.flush()?;

    let mut w = csv_writer(&out_dir.join("partitions.csv"))?;
    w.write_record(["id", "consensus", "vertical_upper", "vertical_lower", "horizontal"])?;
    let [up, lo, hz] = &fit.ball_bounds;
    for i in 0..data.n_items() {
        w.write_record([
            data.name(i),
            (fit.consensus.label(i) + 1).to_string(),
            (up.label(i) + 1).to_string(),
            (lo.label(i) + 1).to_string(),
            (hz.label(i) + 1).to_string(),
        ])?;
    }
    w.flush()?;

    if with_trace {
        save_trace(&fit.trace, &out_dir.join("trace.bin"))?;
    }
    Ok(())
}

pub fn run_fit(opts: &FitOptions) -> Result<FitSummary> {
    opts.sampler.validate()?;
    opts.summary.validate()?;
    let data = load_matches(&opts.input)?;
    if data.n_items() == 0 {
        return Err(Error::InvalidData(format!("{} has no players", opts.input.display())));
    }
    let fit = fit_and_summarize(&data, &opts.sampler, &opts.summary)?;
    write_fit_outputs(&data, &fit, &opts.out_dir, opts.write_trace)?;
    Ok(fit.summary)
}

// ---------------------------------------------------------------- compare

#[derive(Clone, Debug)]
pub struct CompareOptions {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub sampler: SamplerConfig,
    pub se_method: SeDeltaMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelElpd {
    pub elpd: f64,
    pub se: f64,
    pub n_bad_k: usize,
}

impl From<&ElpdReport> for ModelElpd {
    fn from(r: &ElpdReport) -> Self {
        Self {
            elpd: r.elpd,
            se: r.se,
            n_bad_k: r.n_bad_k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub n_edges: usize,
    pub n_draws: usize,
    pub bt_sbm: ModelElpd,
    pub bt: ModelElpd,
    pub delta_elpd: f64,
    pub se_delta: f64,
    pub se_method: SeDeltaMethod,
    pub config: SamplerConfig,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub bt_sbm: ElpdReport,
    pub bt: ElpdReport,
    pub delta: DeltaElpd,
}

/// Fit both models with the same settings and compare them by PSIS-LOO.
pub fn compare_models(data: &ComparisonData, sampler: &SamplerConfig, method: SeDeltaMethod) -> Result<Comparison> {
    if data.n_edges() == 0 {
        return Err(Error::InvalidData("no edges to cross-validate".into()));
    }
    let sbm = run_chains(data, sampler)?;
    let bt = fit_standard_bt(data, sampler)?;
    let r_sbm = psis_loo(&pointwise_loglik(&sbm, data, ModelKind::BtSbm)?)?;
    let r_bt = psis_loo(&pointwise_loglik(&bt, data, ModelKind::Bt)?)?;
    let delta = delta_elpd(&r_sbm, &r_bt, method)?;
    Ok(Comparison {
        bt_sbm: r_sbm,
        bt: r_bt,
        delta,
    })
}

pub fn run_compare(opts: &CompareOptions) -> Result<CompareReport> {
    opts.sampler.validate()?;
    let data = load_matches(&opts.input)?;
    let c = compare_models(&data, &opts.sampler, opts.se_method)?;
    create_dir(&opts.out_dir)?;
    let report = CompareReport {
        n_edges: data.n_edges(),
        n_draws: opts.sampler.draws_per_chain() * opts.sampler.n_chains,
        bt_sbm: (&c.bt_sbm).into(),
        bt: (&c.bt).into(),
        delta_elpd: c.delta.delta,
        se_delta: c.delta.se_delta,
        se_method: opts.se_method,
        config: opts.sampler.clone(),
    };
    write_json(&opts.out_dir.join("compare.json"), &report)?;
    let mut w = csv_writer(&opts.out_dir.join("lpd.csv"))?;
    w.write_record(["id_i", "id_j", "lpd_bt_sbm", "lpd_bt", "pareto_k_bt_sbm", "pareto_k_bt"])?;
    let k_str = |k: Option<f64>| k.map_or(String::new(), |v| v.to_string());
    for (e, &(i, j)) in c.bt_sbm.edges.iter().enumerate() {
        w.write_record([
            data.name(i),
            data.name(j),
            c.bt_sbm.per_edge_lpd[e].to_string(),
            c.bt.per_edge_lpd[e].to_string(),
            k_str(c.bt_sbm.pareto_k[e]),
            k_str(c.bt.pareto_k[e]),
        ])?;
    }
    w.flush()?;
    Ok(report)
}

// ---------------------------------------------------------------- prior

#[derive(Clone, Debug)]
pub struct PriorOptions {
    pub n_items: usize,
    pub gamma: f64,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriorReport {
    pub n_items: usize,
    pub gamma: f64,
    pub mean_k: f64,
    pub var_k: f64,
    pub pmf: Vec<f64>,
}

pub fn prior_report(n_items: usize, gamma: f64) -> Result<PriorReport> {
    let params = GnedinParams::new(gamma, n_items).map_err(Error::into_config)?;
    Ok(PriorReport {
        n_items,
        gamma,
        mean_k: mean_k(&params),
        var_k: var_k(&params),
        pmf: pmf_k_table(&params),
    })
}

pub fn run_prior(opts: &PriorOptions) -> Result<PriorReport> {
    let r = prior_report(opts.n_items, opts.gamma)?;
    create_dir(&opts.out_dir)?;
    write_json(&opts.out_dir.join("prior.json"), &r)?;
    let mut w = csv_writer(&opts.out_dir.join("prior_pmf.csv"))?;
    w.write_record(["k", "prob"])?;
    for (k, p) in r.pmf.iter().enumerate() {
        w.write_record([(k + 1).to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(r)
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Debug)]
pub struct SimulateOptions {
    pub out_dir: PathBuf,
    pub n_items: usize,
    pub k_values: Vec<usize>,
    pub replicates: usize,
    pub edge_prob: f64,
    pub match_rate: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulatedFile {
    pub k_true: usize,
    pub replicate: usize,
    pub seed: u64,
    pub data_file: String,
    pub truth_file: String,
    pub block_strengths: Vec<f64>,
    pub n_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub n_items: usize,
    pub edge_prob: f64,
    pub match_rate: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub base_seed: u64,
    pub datasets: Vec<SimulatedFile>,
}

/// Names used for simulated items: `P001`, `P002`, ...
pub fn synthetic_names(n: usize) -> Vec<String> {
    let width = n.to_string().len().max(3);
    (1..=n).map(|i| format!("P{i:0width$}")).collect()
}

pub fn run_simulate(opts: &SimulateOptions) -> Result<SimulationRecord> {
    if opts.k_values.is_empty() || opts.replicates == 0 {
        return Err(Error::InvalidConfig("need at least one K and one replicate".into()));
    }
    create_dir(&opts.out_dir)?;
    let names = synthetic_names(opts.n_items);
    let mut datasets = Vec::new();
    let mut index = 0u64;
    for &k in &opts.k_values {
        for r in 0..opts.replicates {
            let seed = opts.seed.wrapping_add(index);
            index += 1;
            let spec = SynthSpec {
                n_items: opts.n_items,
                k_true: k,
                edge_prob: opts.edge_prob,
                match_rate: opts.match_rate,
                lambda_lo: opts.lambda_lo,
                lambda_hi: opts.lambda_hi,
                seed,
            };
            let sim = generate_fixed(&spec).map_err(|e| match e {
                Error::InvalidData(m) => Error::InvalidConfig(m),
                other => other,
            })?;
            let data = sim.data.with_names(names.clone())?;
            let data_file = format!("data_k{k}_r{}.csv", r + 1);
            let truth_file = format!("truth_k{k}_r{}.csv", r + 1);
            write_matches(&data, BufWriter::new(File::create(opts.out_dir.join(&data_file))?))?;
            let mut w = csv_writer(&opts.out_dir.join(&truth_file))?;
            w.write_record(["id", "block", "strength"])?;
            for i in 0..opts.n_items {
                let l = sim.partition.label(i);
                w.write_record([names[i].clone(), (l + 1).to_string(), sim.strengths.get(l).to_string()])?;
            }
            w.flush()?;
            datasets.push(SimulatedFile {
                k_true: k,
                replicate: r + 1,
                seed,
                data_file,
                truth_file,
                block_strengths: sim.strengths.values().to_vec(),
                n_edges: data.n_edges(),
            });
        }
    }
    let rec = SimulationRecord {
        n_items: opts.n_items,
        edge_prob: opts.edge_prob,
        match_rate: opts.match_rate,
        lambda_lo: opts.lambda_lo,
        lambda_hi: opts.lambda_hi,
        base_seed: opts.seed,
        datasets,
    };
    write_json(&opts.out_dir.join("simulation.json"), &rec)?;
    Ok(rec)
}

// ---------------------------------------------------------------- diagnose

#[derive(Clone, Debug)]
pub struct DiagnoseOptions {
    pub out_dir: PathBuf,
    pub a_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub z_values: Vec<f64>,
    pub w_values: Vec<u64>,
    /// Reference configuration for new-block probabilities: this many other
    /// items spread evenly over `k_others` blocks of unit strength.
    pub n_others: usize,
    pub k_others: usize,
    pub gamma: f64,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
            a_values: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            delta_values: (-4..=4).map(|i| i as f64 * 0.25).collect(),
            z_values: vec![0.25, 1.0, 4.0],
            w_values: vec![0, 2, 5],
            n_others: 20,
            k_others: 3,
            gamma: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasRow {
    pub a: f64,
    pub delta: f64,
    pub w: u64,
    pub z: f64,
    pub bias: f64,
    /// Central-difference derivative in `delta`.
    pub slope: f64,
    pub p_new: f64,
}

pub fn diagnose_table(opts: &DiagnoseOptions) -> Result<Vec<BiasRow>> {
    if opts.k_others == 0 || opts.k_others > opts.n_others {
        return Err(Error::InvalidConfig("need 1 <= k_others <= n_others".into()));
    }
    let sizes: Vec<usize> = (0..opts.k_others)
        .map(|k| opts.n_others / opts.k_others + usize::from(k < opts.n_others % opts.k_others))
        .collect();
    let unit = vec![1.0; opts.k_others];
    let h = 1e-5;
    let mut rows = Vec::new();
    for &a in &opts.a_values {
        let psi = digamma(a).map_err(Error::into_config)?;
        for &delta in &opts.delta_values {
            let hyper = Hyperparameters::new(a, (psi - delta).exp(), opts.gamma)
                .map_err(Error::into_config)?;
            for &w in &opts.w_values {
                for &z in &opts.z_values {
                    let bias = new_cluster_bias(a, w, z, delta)?;
                    let slope = (new_cluster_bias(a, w, z, delta + h)? - new_cluster_bias(a, w, z, delta - h)?)
                        / (2.0 * h);
                    let lw = assignment_log_weights(opts.n_others, &sizes, &unit, w, z, &hyper);
                    let m = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let total: f64 = lw.iter().map(|v| (v - m).exp()).sum();
                    let p_new = (lw[lw.len() - 1] - m).exp() / total;
                    rows.push(BiasRow {
                        a,
                        delta,
                        w,
                        z,
                        bias,
                        slope,
                        p_new,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn run_diagnose(opts: &DiagnoseOptions) -> Result<Vec<BiasRow>> {
    let rows = diagnose_table(opts)?;
    create_dir(&opts.out_dir)?;
    let mut w = csv_writer(&opts.out_dir.join("new_cluster_bias.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}
