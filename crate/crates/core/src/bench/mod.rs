//! Benchmark harness: seeded parallel episodes, aggregation, budget sweeps.

pub mod config;
pub mod episode;
pub mod report;

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::baselines::{BeliefPolicy, LightDarkHeuristic, QmdpTable};
use crate::envs::{EnvKind, LaserTag, LightDark, SubHunt, VdpTag};
use crate::error::{Error, Result};
use crate::model::Pomdp;
use crate::pft::Budget;
use crate::rng::episode_seed;

pub use config::{default_hyper, BenchConfig, Hyper, ResolvedSolver, SolverKind};
pub use episode::{run_episode, Agent, EpisodeResult, EpisodeSpec};
pub use report::{episodes_to_csv, mean_and_se, BenchmarkReport, CSV_HEADER};

use episode::{layout_seed, make_planner, make_policy};

fn no_heuristic<M: Pomdp>() -> Option<Box<dyn BeliefPolicy<M>>> {
    None
}

fn build_agent<M: Pomdp>(
    solver: &ResolvedSolver,
    model: &M,
    heuristic: &dyn Fn() -> Option<Box<dyn BeliefPolicy<M>>>,
) -> Result<Agent<M>> {
    let mut qmdp: Option<Arc<QmdpTable>> = None;
    match solver {
        ResolvedSolver::Policy(id) => make_policy(*id, model, &mut qmdp, heuristic).map(Agent::Policy),
        ResolvedSolver::Planner { cfg, rollout } => {
            make_planner(cfg.clone(), *rollout, model, &mut qmdp, heuristic).map(Agent::Planner)
        }
    }
}

/// Run `n` episodes in parallel; results come back in episode order.
fn run_parallel<F>(n: usize, master_seed: u64, run: F) -> Result<Vec<EpisodeResult>>
where
    F: Fn(usize, u64) -> Result<EpisodeResult> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|k| run(k, episode_seed(master_seed, k as u64)))
        .collect()
}

fn run_shared<M: Pomdp>(
    model: &M,
    solver: &ResolvedSolver,
    spec: &EpisodeSpec,
    cfg: &BenchConfig,
    heuristic: &dyn Fn() -> Option<Box<dyn BeliefPolicy<M>>>,
) -> Result<Vec<EpisodeResult>> {
    let agent = build_agent(solver, model, heuristic)?;
    run_parallel(cfg.run.episodes, cfg.run.master_seed, |k, seed| {
        run_episode(model, &agent, spec, k, seed)
    })
}

/// Run every episode of `cfg` and aggregate them.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let constants = cfg.constants()?;
    let solver = cfg.resolve_solver()?;
    let budget = cfg.budget()?;
    let spec = EpisodeSpec {
        env: cfg.env.name.to_string(),
        solver: cfg.solver_kind()?.to_string(),
        budget,
        filter: cfg.filter.clone(),
        max_steps: cfg.env.max_steps,
    };

    let episodes = match cfg.env.name {
        EnvKind::LightDark => {
            let model = LightDark::new(constants.lightdark.clone());
            let heuristic = || Some(Box::new(LightDarkHeuristic) as Box<dyn BeliefPolicy<LightDark>>);
            run_shared(&model, &solver, &spec, cfg, &heuristic)?
        }
        EnvKind::LaserTag => {
            // Each episode draws its own obstacle layout, so models and any
            // QMDP tables are built per episode. Probe once so configuration
            // errors surface before the parallel run.
            let probe = LaserTag::new(constants.lasertag.clone(), 0);
            build_agent(&solver, &probe, &no_heuristic)?;
            run_parallel(cfg.run.episodes, cfg.run.master_seed, |k, seed| {
                let model = LaserTag::new(constants.lasertag.clone(), layout_seed(seed));
                let agent = build_agent(&solver, &model, &no_heuristic)?;
                run_episode(&model, &agent, &spec, k, seed)
            })?
        }
        EnvKind::SubHunt => {
            let model = SubHunt::new(constants.subhunt.clone());
            run_shared(&model, &solver, &spec, cfg, &no_heuristic)?
        }
        EnvKind::VdpTag | EnvKind::VdpTagDiscrete => {
            let model = VdpTag::new(constants.vdptag.clone(), cfg.env.name == EnvKind::VdpTagDiscrete);
            run_shared(&model, &solver, &spec, cfg, &no_heuristic)?
        }
    };

    Ok(BenchmarkReport::new(
        cfg.clone(),
        constants,
        spec.budget_mode(),
        budget.map(|b| b.amount()),
        episodes,
    ))
}

pub const SWEEP_HEADER: &str = "env,solver,budget_mode,budget,episodes,mean,std_err,mean_plan_ms";

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub reports: Vec<BenchmarkReport>,
}

impl SweepResult {
    /// Long-format summary: one row per budget.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in &self.reports {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.env,
                r.solver,
                r.budget_mode,
                r.budget.map(|b| b.to_string()).unwrap_or_default(),
                r.n,
                r.mean,
                r.std_err.map(|s| s.to_string()).unwrap_or_default(),
                r.mean_plan_ms().map(|s| s.to_string()).unwrap_or_default(),
            );
        }
        out
    }

    /// One subdirectory per budget plus `summary.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        for r in &self.reports {
            let name = format!("{}-{}", r.budget_mode, r.budget.map(|b| b.to_string()).unwrap_or_default());
            r.write(&dir.join(name))?;
        }
        report::write_file(&dir.join("summary.csv"), &self.summary_csv())
    }
}

/// Run the same configuration at each budget. Every budget reuses the master
/// seed, so episode `k` sees the same environment stream throughout.
pub fn budget_sweep(cfg: &BenchConfig, budgets: &[Budget]) -> Result<SweepResult> {
    if budgets.is_empty() {
        return Err(Error::config("sweep needs at least one budget"));
    }
    let mut reports = Vec::with_capacity(budgets.len());
    for b in budgets {
        let mut c = cfg.clone();
        match *b {
            Budget::Time(t) if t > 0.0 && t.is_finite() => {
                c.run.time = Some(t);
                c.run.queries = None;
            }
            Budget::Queries(q) if q > 0 => {
                c.run.queries = Some(q);
                c.run.time = None;
            }
            _ => return Err(Error::config("sweep budgets must be positive")),
        }
        reports.push(run_benchmark(&c)?);
    }
    Ok(SweepResult { reports })
}
