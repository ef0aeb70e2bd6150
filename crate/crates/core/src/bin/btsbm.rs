use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use btsbm::compare::SeDeltaMethod;
use btsbm::io::{
    run_compare, run_diagnose, run_fit, run_prior, run_simulate, CompareOptions, DiagnoseOptions,
    FitOptions, PriorOptions, SimulateOptions, SummaryOptions,
};
use btsbm::postprocess::ConsensusOptions;
use btsbm::sampler::RescaleMode;
use btsbm::{Error, Hyperparameters, SamplerConfig};

#[derive(Parser)]
#[command(name = "btsbm", version, about = "Clustered Bradley-Terry models for pairwise comparisons")]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the clustered model and write posterior summaries.
    Fit(FitArgs),
    /// Compare the clustered and the standard model by PSIS-LOO.
    Compare(CompareArgs),
    /// Tabulate the prior distribution of the number of blocks.
    Prior(PriorArgs),
    /// Generate synthetic match data with a known block structure.
    Simulate(SimulateArgs),
    /// Tabulate how a misaligned Gamma rate changes new-block probabilities.
    Diagnose(DiagnoseArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RescaleArg {
    OutputOnly,
    InChain,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeArg {
    Halved,
    Independent,
    Paired,
}

#[derive(Args)]
struct SamplerArgs {
    /// Total sweeps per chain, burn-in included.
    #[arg(long, default_value_t = 30_000)]
    iters: usize,
    #[arg(long, default_value_t = 10_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Gamma shape of block strengths.
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    /// Gamma rate; defaults to exp(digamma(a)).
    #[arg(long)]
    b: Option<f64>,
    /// Partition prior parameter in (0, 1).
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = RescaleArg::OutputOnly)]
    rescale: RescaleArg,
}

impl SamplerArgs {
    fn config(&self) -> Result<SamplerConfig, Error> {
        let hyper = match self.b {
            Some(b) => Hyperparameters::new(self.a, b, self.gamma),
            None => Hyperparameters::aligned(self.a, self.gamma),
        }
        .map_err(Error::into_config)?;
        let cfg = SamplerConfig {
            total_iters: self.iters,
            burn_in: self.burn_in,
            thin: self.thin,
            hyper,
            seed: self.seed,
            n_chains: self.chains,
            rescale: match self.rescale {
                RescaleArg::OutputOnly => RescaleMode::OutputOnly,
                RescaleArg::InChain => RescaleMode::InChain,
            },
        };
        cfg.validate().map_err(Error::into_config)?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct FitArgs {
    /// Match file with rows `winner,loser[,count]`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Credible-ball level is 1 - alpha.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.95)]
    hpd_mass: f64,
    /// Restrict membership and strength summaries to draws with this K.
    #[arg(long)]
    condition_k: Option<usize>,
    /// Most frequent sampled partitions scored as consensus candidates.
    #[arg(long, default_value_t = 500)]
    max_candidates: usize,
    /// Skip writing trace.bin.
    #[arg(long)]
    no_trace: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long, value_enum, default_value_t = SeArg::Halved)]
    se_method: SeArg,
}

#[derive(Args)]
struct PriorArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "sim")]
    out: PathBuf,
    #[arg(long, default_value_t = 105)]
    n: usize,
    /// True number of blocks; repeat or comma-separate for a grid.
    #[arg(long = "k", value_delimiter = ',', default_value = "3")]
    k: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    #[arg(long, default_value_t = 5.0)]
    match_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    lambda_lo: f64,
    #[arg(long, default_value_t = 3.0)]
    lambda_hi: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long = "a", value_delimiter = ',')]
    a: Option<Vec<f64>>,
    #[arg(long = "delta", value_delimiter = ',', allow_hyphen_values = true)]
    delta: Option<Vec<f64>>,
    #[arg(long = "z", value_delimiter = ',')]
    z: Option<Vec<f64>>,
    #[arg(long = "w", value_delimiter = ',')]
    w: Option<Vec<u64>>,
    #[arg(long, default_value_t = 20)]
    n_others: usize,
    #[arg(long, default_value_t = 3)]
    k_others: usize,
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Fit(f) => {
            let opts = FitOptions {
                input: f.input,
                out_dir: f.out,
                sampler: f.sampler.config()?,
                summary: SummaryOptions {
                    alpha: f.alpha,
                    hpd_mass: f.hpd_mass,
                    condition_k: f.condition_k,
                    consensus: ConsensusOptions {
                        max_candidates: f.max_candidates,
                        ..ConsensusOptions::default()
                    },
                },
                write_trace: !f.no_trace,
            };
            let s = run_fit(&opts)?;
            println!(
                "K mode {} (95% {}..{}), consensus K {}, expected VI {:.4}",
                s.k_posterior.mode,
                s.k_posterior.ci95.0,
                s.k_posterior.ci95.1,
                s.consensus.k,
                s.consensus.expected_vi
            );
        }
        Command::Compare(c) => {
            let opts = CompareOptions {
                input: c.input,
                out_dir: c.out,
                sampler: c.sampler.config()?,
                se_method: match c.se_method {
                    SeArg::Halved => SeDeltaMethod::Halved,
                    SeArg::Independent => SeDeltaMethod::Independent,
                    SeArg::Paired => SeDeltaMethod::Paired,
                },
            };
            let r = run_compare(&opts)?;
            println!(
                "ELPD clustered {:.2} ± {:.2}, standard {:.2} ± {:.2}, delta {:.2} ± {:.2}, k>0.7: {} / {}",
                r.bt_sbm.elpd, r.bt_sbm.se, r.bt.elpd, r.bt.se, r.delta_elpd, r.se_delta, r.bt_sbm.n_bad_k, r.bt.n_bad_k
            );
        }
        Command::Prior(p) => {
            let r = run_prior(&PriorOptions {
                n_items: p.n,
                gamma: p.gamma,
                out_dir: p.out,
            })?;
            println!("E[K] = {:.4}, Var[K] = {:.4}", r.mean_k, r.var_k);
        }
        Command::Simulate(s) => {
            let r = run_simulate(&SimulateOptions {
                out_dir: s.out,
                n_items: s.n,
                k_values: s.k,
                replicates: s.replicates,
                edge_prob: s.edge_prob,
                match_rate: s.match_rate,
                lambda_lo: s.lambda_lo,
                lambda_hi: s.lambda_hi,
                seed: s.seed,
            })?;
            println!("wrote {} datasets", r.datasets.len());
        }
        Command::Diagnose(d) => {
            let def = DiagnoseOptions::default();
            let rows = run_diagnose(&DiagnoseOptions {
                out_dir: d.out,
                a_values: d.a.unwrap_or(def.a_values),
                delta_values: d.delta.unwrap_or(def.delta_values),
                z_values: d.z.unwrap_or(def.z_values),
                w_values: d.w.unwrap_or(def.w_values),
                n_others: d.n_others,
                k_others: d.k_others,
                gamma: d.gamma,
            })?;
            println!("wrote {} rows", rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
