//! Command-line interface for the block-query clustering pipeline.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use bequec::cli::{
    cmd_cluster, cmd_error_sweep, cmd_gfun, cmd_plan, cmd_synth, emit_results, ConfigPatch,
    ExperimentConfig, Extraction, Mode, PlanSpec,
};
use bequec::data_io::{write_membership_csv, OutputFormat};
use bequec::Result;

/// Comma-separated Dirichlet parameter list as one CLI value.
#[derive(Clone)]
struct NuList(Vec<f64>);

impl std::str::FromStr for NuList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|e| format!("{f:?}: {e}")))
            .collect::<std::result::Result<Vec<f64>, String>>()
            .map(NuList)
    }
}

#[derive(Parser)]
#[command(name = "bequec", version, about = "Mixed-membership clustering from queried edge blocks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Experiment options shared by `synth` and `error-sweep`. Flags override the
/// JSON config file, which overrides the built-in defaults.
#[derive(Args)]
struct SynthArgs {
    /// JSON config file mirroring the experiment fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of nodes
    #[arg(long)]
    n: Option<usize>,
    /// Number of clusters
    #[arg(long)]
    k: Option<usize>,
    /// Number of query groups
    #[arg(long)]
    l: Option<usize>,
    /// Off-diagonal interaction level in [0, 1]
    #[arg(long)]
    eta: Option<f64>,
    /// Dirichlet parameters, comma separated (e.g. 0.2,0.2,0.2,0.2,0.2)
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    /// Number of random trials
    #[arg(long)]
    trials: Option<usize>,
    /// Base RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Observation mode: ideal | binary
    #[arg(long)]
    mode: Option<Mode>,
    /// Query pattern: "diagonal" or a plan JSON path
    #[arg(long)]
    plan: Option<PlanSpec>,
    /// Membership recovery: direct | constrained
    #[arg(long)]
    extraction: Option<Extraction>,
    /// Results file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Results format: csv | json
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

impl SynthArgs {
    fn build(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg = ConfigPatch::load(path)?.apply(cfg);
        }
        let flags = ConfigPatch {
            n: self.n,
            k: self.k,
            l: self.l,
            nu: self.nu.clone(),
            eta: self.eta,
            trials: self.trials,
            seed: self.seed,
            mode: self.mode,
            plan: self.plan.clone(),
            extraction: self.extraction,
        };
        let cfg = flags.apply(cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    fn echo(&self, cfg: &ExperimentConfig) {
        println!(
            "# n={} k={} l={} eta={} nu={:?} trials={} seed={} mode={:?} extraction={:?}",
            cfg.n, cfg.k, cfg.l, cfg.eta, cfg.nu, cfg.trials, cfg.seed, cfg.mode, cfg.extraction
        );
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic benchmark: sample a mixed-membership graph, observe queried
    /// blocks, recover memberships, report metrics
    Synth(SynthArgs),
    /// Annotation-error robustness sweep over flip rates
    ErrorSweep {
        #[command(flatten)]
        synth: SynthArgs,
        /// Flip rates, comma separated (e.g. 0,0.1,0.15,0.2)
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        /// Draw single-membership (hard) ground truth
        #[arg(long)]
        hard: bool,
    },
    /// Run the pipeline on an edge-list file
    Cluster {
        /// Edge-list file ("N <n>" header optional, "i j" pairs)
        graph: PathBuf,
        /// Number of clusters
        #[arg(long)]
        k: usize,
        /// Query pattern: "diagonal" or a plan JSON path
        #[arg(long, default_value = "diagonal")]
        plan: PlanSpec,
        /// Number of groups for the diagonal pattern
        #[arg(long, default_value_t = 10)]
        l: usize,
        /// Membership recovery: direct | constrained
        #[arg(long, default_value = "constrained")]
        extraction: Extraction,
        /// Ground-truth file (soft membership CSV or hard label column)
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Where to write the estimated memberships (CSV, one node per row)
        #[arg(long, default_value = "memberships.csv")]
        out: PathBuf,
    },
    /// Tabulate the separability function G(eps, nu)
    Gfun {
        /// Separability radius
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Dirichlet parameter vector, comma separated; repeatable
        #[arg(long = "nu", required = true, action = clap::ArgAction::Append)]
        nus: Vec<NuList>,
    },
    /// Build, validate and serialize a query plan
    Plan {
        /// Number of nodes
        #[arg(long)]
        n: usize,
        /// Number of groups
        #[arg(long)]
        l: usize,
        /// Pattern name
        #[arg(long, default_value = "diagonal")]
        pattern: String,
        /// Number of clusters to validate against
        #[arg(long)]
        k: usize,
        /// Plan JSON output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let mut clean = true;
    match cli.command {
        Command::Synth(args) => {
            let cfg = args.build()?;
            args.echo(&cfg);
            let outcome = cmd_synth(&cfg)?;
            clean = outcome.failures.is_empty();
            emit_results(&outcome, args.out.as_deref(), args.format)?;
        }
        Command::ErrorSweep { synth, rates, hard } => {
            let cfg = synth.build()?;
            synth.echo(&cfg);
            let sweep = cmd_error_sweep(&cfg, &rates, hard)?;
            let mut all_records = Vec::new();
            for (rate, outcome) in &sweep {
                println!("rate = {rate}");
                for (metric, mean, std) in outcome.aggregate() {
                    println!("  {metric}: mean = {mean:.6}, std = {std:.6}");
                }
                for (trial, err) in &outcome.failures {
                    clean = false;
                    eprintln!("rate {rate} trial {trial} failed: {err}");
                }
                for rec in &outcome.records {
                    let mut rec = rec.clone();
                    rec.metric = format!("{}@{rate}", rec.metric);
                    all_records.push(rec);
                }
            }
            if let Some(path) = &synth.out {
                bequec::data_io::write_results(&all_records, path, synth.format)?;
            }
        }
        Command::Cluster {
            graph,
            k,
            plan,
            l,
            extraction,
            truth,
            out,
        } => {
            let (m_hat, scored) =
                cmd_cluster(&graph, &plan, l, k, extraction, truth.as_deref())?;
            write_membership_csv(&m_hat, &out)?;
            println!("memberships written to {}", out.display());
            for (metric, value) in scored {
                println!("{metric}: {value:.6}");
            }
        }
        Command::Gfun { eps, nus } => {
            let nus: Vec<Vec<f64>> = nus.into_iter().map(|n| n.0).collect();
            for (nu, g) in cmd_gfun(eps, &nus)? {
                println!("nu = {nu:?}: G = {g:.6e}");
            }
        }
        Command::Plan {
            n,
            l,
            pattern,
            k,
            out,
        } => {
            let (plan, report, fraction) = cmd_plan(n, l, &pattern, k)?;
            print!("{report}");
            println!("queried fraction: {fraction:.5}");
            let json = plan.to_json()?;
            match out {
                Some(path) => {
                    std::fs::write(&path, json).map_err(|e| bequec::Error::Io {
                        path: path.display().to_string(),
                        source: e,
                    })?;
                    println!("plan written to {}", path.display());
                }
                None => println!("{json}"),
            }
        }
    }
    Ok(clean)
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
