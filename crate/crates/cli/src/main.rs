use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pbmdp::bench::{budget_sweep, run_benchmark, BenchConfig, BenchmarkReport, SolverKind};
use pbmdp::envs::EnvKind;
use pbmdp::pft::Budget;
use pbmdp::theory::{rows_to_csv, run_suite, Suite, TheoryOptions};
use pbmdp::Error;

#[derive(Parser)]
#[command(name = "pbmdp", version, about = "Particle belief MDP planning benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark configuration.
    Bench(BenchArgs),
    /// Run a configuration at several planning budgets.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated planning times in seconds.
        #[arg(long, value_delimiter = ',', conflicts_with = "query_grid")]
        times: Vec<f64>,
        /// Comma-separated simulation counts.
        #[arg(long = "queries", value_delimiter = ',')]
        query_grid: Vec<u64>,
    },
    /// Run the empirical checks of the sampling guarantees.
    Theory {
        /// theorem1, theorem2, convergence or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// TOML file with [env], [solver], [filter] and [run] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<EnvKind>,
    #[arg(long)]
    solver: Option<SolverKind>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Planning seconds per step.
    #[arg(long, conflicts_with = "queries")]
    time: Option<f64>,
    /// Simulations per step.
    #[arg(long)]
    queries: Option<u64>,
}

impl CommonArgs {
    fn config(&self) -> Result<BenchConfig, Error> {
        let mut cfg = match (&self.config, self.env, self.solver) {
            (Some(path), _, _) => BenchConfig::load(path)?,
            (None, Some(env), Some(solver)) => BenchConfig::new(env, solver),
            (None, _, _) => {
                return Err(Error::Config("pass --config, or both --env and --solver".into()));
            }
        };
        if let Some(env) = self.env {
            cfg.env.name = env;
        }
        if let Some(solver) = self.solver {
            cfg.solver.name = Some(solver);
        }
        if let Some(n) = self.episodes {
            cfg.run.episodes = n;
        }
        if let Some(s) = self.seed {
            cfg.run.master_seed = s;
        }
        if let Some(out) = &self.out {
            cfg.run.out = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn summary(r: &BenchmarkReport) -> String {
    let budget = r.budget.map(|b| format!(" {}={b}", r.budget_mode)).unwrap_or_default();
    let se = r.std_err.map(|s| format!(" +- {s:.3}")).unwrap_or_default();
    format!("{} {}{budget}: n={} mean={:.3}{se}", r.env, r.solver, r.n, r.mean)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Bench(args) => {
            let mut cfg = args.common.config()?;
            if args.time.is_some() || args.queries.is_some() {
                cfg.run.time = args.time;
                cfg.run.queries = args.queries;
            }
            let report = run_benchmark(&cfg)?;
            println!("{}", summary(&report));
            if let Some(dir) = &cfg.run.out {
                report.write(dir)?;
            }
        }
        Command::Sweep {
            common,
            times,
            query_grid,
        } => {
            let cfg = common.config()?;
            let budgets: Vec<Budget> = if !times.is_empty() {
                times.into_iter().map(Budget::Time).collect()
            } else {
                query_grid.into_iter().map(Budget::Queries).collect()
            };
            let sweep = budget_sweep(&cfg, &budgets)?;
            for r in &sweep.reports {
                println!("{}", summary(r));
            }
            match &cfg.run.out {
                Some(dir) => sweep.write(dir)?,
                None => print!("{}", sweep.summary_csv()),
            }
        }
        Command::Theory {
            suite,
            trials,
            seeds,
            seed,
            out,
        } => {
            let suite: Suite = suite.parse()?;
            let opts = TheoryOptions {
                trials,
                seeds,
                master_seed: seed,
            };
            let rows = run_suite(suite, &opts)?;
            let csv = rows_to_csv(&rows);
            match out {
                Some(path) => std::fs::write(&path, csv).map_err(|e| Error::Io { path, source: e })?,
                None => print!("{csv}"),
            }
            if rows.iter().any(|r| !r.pass) {
                eprintln!("theory checks failed: {}", rows.iter().filter(|r| !r.pass).count());
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
