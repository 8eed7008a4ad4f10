//! Sparse Sampling-ω: full-width recursive Q estimation over particle beliefs.
//!
//! Every `(belief, action)` pair draws `C` independent GenPF successors and
//! every successor is expanded for every action down to depth `D`, so the
//! tree holds `(|A| C)^D` beliefs. It is only usable on toy problems and
//! exists as the reference solver for the convergence experiments. Runs that
//! would exceed the node cap are refused up front rather than truncated.

use crate::baselines::argmax;
use crate::belief::{all_terminal, gen_pf, ParticleBelief};
use crate::error::{Error, Result};
use crate::model::{Action, ActionSpace, Pomdp};
use crate::rng::SeededRng;

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SswConfig {
    /// Width `C`: particles per belief and GenPF draws per action.
    pub width: usize,
    /// Depth `D`.
    pub depth: usize,
    pub discount: f64,
    pub node_cap: u64,
}

impl SswConfig {
    pub fn for_model<M: Pomdp>(model: &M, width: usize, depth: usize) -> Self {
        SswConfig {
            width,
            depth,
            discount: model.discount(),
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    /// `|A|^D * C^D`, the number of beliefs the full tree expands.
    pub fn node_count(&self, num_actions: usize) -> f64 {
        (num_actions as f64 * self.width as f64).powi(self.depth as i32)
    }

    pub fn check<M: Pomdp>(&self, model: &M) -> Result<usize> {
        if self.width == 0 || self.depth == 0 {
            return Err(Error::config("Sparse Sampling-omega needs C >= 1 and D >= 1"));
        }
        let ActionSpace::Discrete(n) = model.action_space() else {
            return Err(Error::config("Sparse Sampling-omega needs a finite action space"));
        };
        let required = self.node_count(n);
        if required > self.node_cap as f64 {
            return Err(Error::NodeBudget {
                required,
                cap: self.node_cap,
            });
        }
        Ok(n)
    }
}

fn v_rec<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    d: usize,
    n: usize,
    cfg: &SswConfig,
    model: &M,
    rng: &mut SeededRng,
) -> f64 {
    if d >= cfg.depth || all_terminal(belief, model) {
        return 0.0;
    }
    (0..n)
        .map(|a| q_rec(belief, &Action::Discrete(a), d, n, cfg, model, rng))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn q_rec<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    a: &Action,
    d: usize,
    n: usize,
    cfg: &SswConfig,
    model: &M,
    rng: &mut SeededRng,
) -> f64 {
    let c = cfg.width;
    let mut rho = 0.0;
    let mut future = 0.0;
    for _ in 0..c {
        // Each successor owns an independent substream, so the children
        // could be evaluated in any order with identical results.
        let mut child_rng = rng.fork();
        let t = gen_pf(belief, a, model, &mut child_rng);
        rho += t.rho;
        future += v_rec(&t.belief, d + 1, n, cfg, model, &mut child_rng);
    }
    // rho is a deterministic function of (belief, a) when rewards are; the
    // average also covers rewards that depend on the sampled successor.
    rho / c as f64 + cfg.discount * future / c as f64
}

/// `V_d(b) = max_a Q_d(b, a)`, zero at `d >= D`.
pub fn estimate_v<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    d: usize,
    cfg: &SswConfig,
    model: &M,
    rng: &mut SeededRng,
) -> Result<f64> {
    let n = cfg.check(model)?;
    Ok(v_rec(belief, d, n, cfg, model, rng))
}

/// `Q_d(b, a) = rho + (gamma / C) sum_i V_{d+1}(b_i')`.
pub fn estimate_q<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    a: &Action,
    d: usize,
    cfg: &SswConfig,
    model: &M,
    rng: &mut SeededRng,
) -> Result<f64> {
    let n = cfg.check(model)?;
    model.check_action(a)?;
    if d >= cfg.depth {
        return Ok(0.0);
    }
    Ok(q_rec(belief, a, d, n, cfg, model, rng))
}

/// Root Q estimates for every action, in action order.
pub fn root_q_values<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    cfg: &SswConfig,
    model: &M,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let n = cfg.check(model)?;
    Ok((0..n)
        .map(|a| q_rec(belief, &Action::Discrete(a), 0, n, cfg, model, rng))
        .collect())
}

/// Greedy root action of Sparse Sampling-ω.
pub fn ssw_plan<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    cfg: &SswConfig,
    model: &M,
    rng: &mut SeededRng,
) -> Result<Action> {
    let q = root_q_values(belief, cfg, model, rng)?;
    Ok(Action::Discrete(argmax(&q)))
}
