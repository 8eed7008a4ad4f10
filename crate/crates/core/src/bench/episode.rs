//! Closed-loop episodes: plan, act, observe, update the filter.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{solve_qmdp, BeliefPolicy, PolicyId, QmdpPolicy, QmdpTable, RandomPolicy, DEFAULT_TOLERANCE};
use crate::belief::{init_belief, ParticleBelief};
use crate::error::{Error, Result};
use crate::filter::{self, FilterConfig};
use crate::model::{step, Action, Pomdp};
use crate::pft::{Budget, PftConfig, SparsePft};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode: usize,
    pub seed: u64,
    pub env: String,
    pub solver: String,
    pub budget_mode: String,
    pub budget: Option<f64>,
    pub disc_return: f64,
    pub undisc_return: f64,
    pub steps: usize,
    /// Mean wall time per planning call; only kept for time budgets so that
    /// query-budget outputs stay byte-deterministic.
    pub mean_plan_ms: Option<f64>,
    pub degenerate_updates: usize,
}

/// Whatever chooses actions during an episode.
pub enum Agent<M: Pomdp> {
    Policy(Box<dyn BeliefPolicy<M>>),
    Planner(SparsePft<M>),
}

impl<M: Pomdp> Agent<M> {
    pub fn uses_belief(&self) -> bool {
        match self {
            Agent::Policy(p) => p.uses_belief(),
            Agent::Planner(_) => true,
        }
    }

    pub fn act(&self, belief: &ParticleBelief<M::State>, model: &M, rng: &mut SeededRng) -> Result<Action> {
        match self {
            Agent::Policy(p) => p.act(belief, model, rng),
            Agent::Planner(p) => p.plan(belief, model, rng).map(|out| out.action),
        }
    }
}

/// QMDP table for a model with an enumerable state space.
pub fn qmdp_table<M: Pomdp>(model: &M) -> Result<Arc<QmdpTable>> {
    let mdp = model
        .finite_mdp()
        .ok_or_else(|| Error::config(format!("QMDP needs a finite state space; {} has none", model.name())))?;
    solve_qmdp(mdp, DEFAULT_TOLERANCE).map(Arc::new)
}

/// Build a baseline policy. `heuristic` supplies the environment-specific
/// heuristic where one exists.
pub fn make_policy<M: Pomdp>(
    id: PolicyId,
    model: &M,
    qmdp: &mut Option<Arc<QmdpTable>>,
    heuristic: &dyn Fn() -> Option<Box<dyn BeliefPolicy<M>>>,
) -> Result<Box<dyn BeliefPolicy<M>>> {
    match id {
        PolicyId::Random => Ok(Box::new(RandomPolicy)),
        PolicyId::Qmdp => {
            if qmdp.is_none() {
                *qmdp = Some(qmdp_table(model)?);
            }
            Ok(Box::new(QmdpPolicy::new(qmdp.clone().expect("just built"))))
        }
        PolicyId::LightDarkHeuristic => heuristic()
            .ok_or_else(|| Error::config(format!("no heuristic policy for {}", model.name()))),
    }
}

pub fn make_planner<M: Pomdp>(
    cfg: PftConfig,
    rollout: PolicyId,
    model: &M,
    qmdp: &mut Option<Arc<QmdpTable>>,
    heuristic: &dyn Fn() -> Option<Box<dyn BeliefPolicy<M>>>,
) -> Result<SparsePft<M>> {
    let planner = SparsePft::new(cfg, make_policy(rollout, model, qmdp, heuristic)?)?;
    planner.check_model(model)?;
    Ok(planner)
}

/// Per-run settings shared by all episodes.
#[derive(Clone, Debug)]
pub struct EpisodeSpec {
    pub env: String,
    pub solver: String,
    pub budget: Option<Budget>,
    pub filter: FilterConfig,
    /// Step cap; the model horizon when unset.
    pub max_steps: Option<usize>,
}

impl EpisodeSpec {
    pub fn budget_mode(&self) -> &'static str {
        self.budget.map_or("none", |b| b.mode())
    }
}

/// Run one episode from `seed`. The environment, planner and filter each draw
/// from their own substream of the seed.
pub fn run_episode<M: Pomdp>(
    model: &M,
    agent: &Agent<M>,
    spec: &EpisodeSpec,
    episode: usize,
    seed: u64,
) -> Result<EpisodeResult> {
    let root = SeededRng::new(seed);
    let mut env_rng = root.substream(0);
    let mut plan_rng = root.substream(1);
    let mut filter_rng = root.substream(2);

    let mut state = model.initial_state(&mut env_rng);
    let tracking = agent.uses_belief();
    let mut belief = if tracking {
        init_belief(model, spec.filter.particles, &mut filter_rng)
    } else {
        // Never read; the policy ignores the belief.
        ParticleBelief::uniform(vec![state.clone()])
    };

    let max_steps = spec.max_steps.unwrap_or_else(|| model.horizon());
    let gamma = model.discount();
    let (mut disc, mut undisc, mut weight) = (0.0, 0.0, 1.0);
    let mut steps = 0;
    let mut degenerate = 0;
    let mut plan_secs = 0.0;

    while steps < max_steps && !model.is_terminal(&state) {
        let start = Instant::now();
        let a = agent.act(&belief, model, &mut plan_rng)?;
        plan_secs += start.elapsed().as_secs_f64();

        let t = step(model, &state, &a, &mut env_rng)?;
        disc += weight * t.reward;
        undisc += t.reward;
        weight *= gamma;
        steps += 1;
        if tracking {
            let upd = filter::update(&belief, &a, &t.observation, model, &spec.filter, &mut filter_rng);
            degenerate += upd.degenerate as usize;
            belief = upd.belief;
        }
        state = t.next_state;
    }

    let mean_plan_ms = match spec.budget {
        Some(Budget::Time(_)) if steps > 0 => Some(1e3 * plan_secs / steps as f64),
        _ => None,
    };
    Ok(EpisodeResult {
        episode,
        seed,
        env: spec.env.clone(),
        solver: spec.solver.clone(),
        budget_mode: spec.budget_mode().to_string(),
        budget: spec.budget.map(|b| b.amount()),
        disc_return: disc,
        undisc_return: undisc,
        steps,
        mean_plan_ms,
        degenerate_updates: degenerate,
    })
}

/// Seed for environment details fixed per episode, such as obstacle layouts.
pub fn layout_seed(seed: u64) -> u64 {
    SeededRng::new(seed).substream(3).random()
}
