//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use narrowing::blin::ArmRule;
use narrowing::schedule::ScheduleKind;

use crate::compare::cli_compare;
use crate::config::{parse_budget, parse_budgets, parse_seeds, Algo, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::output;
use crate::runner::{cli_run, cli_sweep};
use crate::verify::{bounds_report, verify_report};

#[derive(Debug, Parser)]
#[command(
    name = "narrowing",
    version,
    about = "Batched zeroth-order Lipschitz optimization experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm for one or more seeds and write its trace.
    Run(RunArgs),
    /// Regress median regret on budget over a grid of budgets.
    Sweep(RunArgs),
    /// BLiN against k-mode BLiN-MOS on g_p for several p.
    Compare(CompareArgs),
    /// Scattering and zooming checks on g_p.
    Verify(VerifyArgs),
    /// Print the theoretical bounds for a configuration.
    Bounds(RunArgs),
}

// Aliases keep clap from treating these as repeated single values.
type SeedList = Vec<u64>;
type BudgetList = Vec<u64>;
type PList = Vec<f64>;

fn seeds_arg(s: &str) -> std::result::Result<Vec<u64>, String> {
    parse_seeds(s).map_err(|e| e.to_string())
}

fn budget_arg(s: &str) -> std::result::Result<u64, String> {
    parse_budget(s).map_err(|e| e.to_string())
}

fn budgets_arg(s: &str) -> std::result::Result<Vec<u64>, String> {
    parse_budgets(s).map_err(|e| e.to_string())
}

fn p_list_arg(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad p `{v}`: {e}"))
        })
        .collect()
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = |s: &str| s.parse::<Algo>().map_err(|e| e.to_string()))]
    pub algo: Option<Algo>,
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Value of the constant objective.
    #[arg(long)]
    pub value: Option<f64>,
    /// Budget `T`, as an integer or `2^k`.
    #[arg(long, value_parser = budget_arg)]
    pub budget: Option<u64>,
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// `a..b` (exclusive) or a comma list.
    #[arg(long, value_parser = seeds_arg)]
    pub seeds: Option<SeedList>,
    /// `2^a..2^b` or a comma list.
    #[arg(long, value_parser = budgets_arg)]
    pub budgets: Option<BudgetList>,
    #[arg(long, value_parser = |s: &str| s.parse::<ScheduleKind>().map_err(|e| e.to_string()))]
    pub schedule: Option<ScheduleKind>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// `none`, `uniform[:h]` or `tgauss:sigma[:lo:hi]`.
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub lipschitz: Option<f64>,
    #[arg(long)]
    pub kappa_p: Option<f64>,
    #[arg(long, value_parser = |s: &str| s.parse::<ArmRule>().map_err(|e| e.to_string()))]
    pub arm_rule: Option<ArmRule>,
    #[arg(long)]
    pub max_batches: Option<usize>,
    #[arg(long)]
    pub forecast_factor: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    /// Config file (if any) overlaid with the flags given.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = ExperimentConfig {
            algo: self.algo,
            objective: self.objective.clone(),
            dim: self.dim,
            p: self.p,
            value: self.value,
            budget: self.budget,
            budgets: self.budgets.clone(),
            seeds: self.seed.map(|s| vec![s]).or_else(|| self.seeds.clone()),
            schedule: self.schedule,
            noise: self.noise.clone(),
            epsilon: self.epsilon,
            k: self.k,
            lipschitz: self.lipschitz,
            kappa_p: self.kappa_p,
            arm_rule: self.arm_rule,
            forecast_factor: self.forecast_factor,
            noisy_constant: None,
            max_batches: self.max_batches,
            out: self.out.clone(),
        };
        Ok(base.overlay(flags))
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, value_parser = budget_arg, default_value = "2^19")]
    pub budget: u64,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    /// Comma-separated exponents of g_p.
    #[arg(long, value_parser = p_list_arg, default_value = "1.5,5")]
    pub p_list: PList,
    #[arg(long, value_parser = seeds_arg, default_value = "0..10")]
    pub seeds: SeedList,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Uniform draws per scattering estimate.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Size the global thread pool from `NARROWING_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("NARROWING_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| HarnessError::Config(format!("NARROWING_THREADS=`{v}` is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.experiment()?.resolve()?;
            let paths = cli_run(&cfg)?;
            println!("wrote {}", paths.csv.display());
        }
        Command::Sweep(args) => {
            let cfg = args.experiment()?.resolve()?;
            let (report, paths) = cli_sweep(&cfg)?;
            println!(
                "slope {:.4} (expected {:.4}), pass {}; wrote {}",
                report.report.slope,
                report.report.expected_slope,
                report.pass,
                paths.csv.display()
            );
        }
        Command::Compare(args) => {
            let (report, paths) =
                cli_compare(args.budget, args.dim, &args.p_list, &args.seeds, &args.out)?;
            for e in &report.entries {
                println!(
                    "p={} d_z={:.3} d_s={:.3} blin={:.3e} blin-mos-k={:.3e} winner={:?}",
                    e.p, e.zooming_dim, e.scattering_dim, e.blin_median, e.mos_median, e.winner
                );
            }
            println!("wrote {}", paths.csv.display());
        }
        Command::Verify(args) => {
            let report = verify_report(args.seed, args.samples)?;
            let path = args.out.join("verify.summary.json");
            output::write_atomic(&path, &output::json_bytes(&report)?)?;
            println!(
                "scatter {:.0}% within band, pass {}; wrote {}",
                100.0 * report.scatter_pass_fraction,
                report.pass,
                path.display()
            );
        }
        Command::Bounds(args) => {
            let cfg = args.experiment()?.resolve()?;
            let report = bounds_report(&cfg)?;
            print!("{}", String::from_utf8_lossy(&output::json_bytes(&report)?));
        }
    }
    Ok(())
}
