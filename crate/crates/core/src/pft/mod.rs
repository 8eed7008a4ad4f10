//! Sparse-PFT: UCT over the particle belief MDP with at most `C` belief
//! children per action node, optionally with progressive widening of the
//! action set for continuous action spaces.

mod tree;

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::BeliefPolicy;
use crate::belief::{all_terminal, gen_pf, ParticleBelief};
use crate::error::{Error, Result};
use crate::model::{Action, ActionSpace, Pomdp};
use crate::rng::SeededRng;

pub use tree::{ActionNode, BeliefNode, SearchTree};

/// How long a planning call may run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Wall-clock seconds, checked between simulations.
    Time(f64),
    /// Exact number of simulations.
    Queries(u64),
}

impl Budget {
    pub fn mode(&self) -> &'static str {
        match self {
            Budget::Time(_) => "time",
            Budget::Queries(_) => "queries",
        }
    }

    pub fn amount(&self) -> f64 {
        match *self {
            Budget::Time(s) => s,
            Budget::Queries(n) => n as f64,
        }
    }
}

/// Action progressive widening: a node visited `N` times may hold
/// `max(1, floor(k_a N^alpha_a))` sampled actions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Widening {
    pub k_a: f64,
    pub alpha_a: f64,
}

impl Widening {
    pub fn cap(&self, visits: u64) -> usize {
        let raw = self.k_a * (visits as f64).powf(self.alpha_a);
        (raw.floor() as usize).max(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PftConfig {
    /// Belief children per action node, `C` (`k_o` under observation widening).
    pub width: usize,
    /// Observation widening exponent `alpha_o`; 0 keeps the child count at `C`.
    pub alpha_o: f64,
    pub c_ucb: f64,
    /// Search depth `D`.
    pub depth: usize,
    pub budget: Budget,
    /// Particles drawn from the filter belief to form the root; `C` if unset.
    pub particles: Option<usize>,
    pub widening: Option<Widening>,
}

impl PftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::config("Sparse-PFT width C must be at least 1"));
        }
        if !(self.c_ucb >= 0.0 && self.c_ucb.is_finite()) {
            return Err(Error::config("c_ucb must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.alpha_o) {
            return Err(Error::config("alpha_o must lie in [0, 1)"));
        }
        if self.particles == Some(0) {
            return Err(Error::config("root particle count must be at least 1"));
        }
        match self.budget {
            Budget::Time(s) if !(s >= 0.0 && s.is_finite()) => {
                return Err(Error::config("time budget must be finite and non-negative"))
            }
            _ => {}
        }
        if let Some(w) = self.widening {
            if !(w.k_a > 0.0 && w.k_a.is_finite()) {
                return Err(Error::config("k_a must be positive"));
            }
            if !(0.0..1.0).contains(&w.alpha_a) {
                return Err(Error::config("alpha_a must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    /// Children an action node visited `n` times may hold:
    /// `max(1, floor(C n^alpha_o))`, which is exactly `C` when `alpha_o = 0`.
    pub fn child_cap(&self, n: u64) -> usize {
        if self.alpha_o == 0.0 {
            return self.width;
        }
        let raw = self.width as f64 * (n as f64).powf(self.alpha_o);
        (raw.floor() as usize).max(1)
    }

    pub fn root_particles(&self) -> usize {
        self.particles.unwrap_or(self.width)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootActionStats {
    pub action: Action,
    pub visits: u64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutcome {
    pub action: Action,
    pub simulations: u64,
    /// No simulation completed, so the first action was returned unplanned.
    pub fallback: bool,
    pub nodes: usize,
    pub root: Vec<RootActionStats>,
}

/// UCB action choice: unvisited actions first, then
/// `Q + c sqrt(ln N(b) / N(b, a))`; ties go to the lowest index.
pub fn select_action_ucb(actions: &[ActionNode], node_visits: u64, c_ucb: f64) -> usize {
    let ln_n = (node_visits.max(1) as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, a) in actions.iter().enumerate() {
        let score = if a.n == 0 {
            f64::INFINITY
        } else {
            a.q + c_ucb * (ln_n / a.n as f64).sqrt()
        };
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Discounted return of running `policy` on GenPF transitions for up to
/// `depth` steps, stopping early once the belief is entirely terminal.
pub fn rollout<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    depth: usize,
    policy: &dyn BeliefPolicy<M>,
    model: &M,
    rng: &mut SeededRng,
) -> Result<f64> {
    let gamma = model.discount();
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut current = belief.clone();
    for _ in 0..depth {
        if all_terminal(&current, model) {
            break;
        }
        let a = policy.act(&current, model, rng)?;
        let t = gen_pf(&current, &a, model, rng);
        total += weight * t.rho;
        weight *= gamma;
        current = t.belief;
    }
    Ok(total)
}

/// The planner: configuration plus the leaf rollout policy.
pub struct SparsePft<M: Pomdp> {
    pub cfg: PftConfig,
    pub rollout: Box<dyn BeliefPolicy<M>>,
}

impl<M: Pomdp> SparsePft<M> {
    pub fn new(cfg: PftConfig, rollout: Box<dyn BeliefPolicy<M>>) -> Result<Self> {
        cfg.validate()?;
        Ok(SparsePft { cfg, rollout })
    }

    /// Reject model/configuration combinations the planner cannot honour.
    pub fn check_model(&self, model: &M) -> Result<()> {
        if model.action_space() == ActionSpace::Continuous && self.cfg.widening.is_none() {
            return Err(Error::config(format!(
                "{} has continuous actions; enable action widening (k_a, alpha_a)",
                model.name()
            )));
        }
        if let ActionSpace::Discrete(0) = model.action_space() {
            return Err(Error::config("model has no actions"));
        }
        Ok(())
    }

    fn initial_actions(&self, model: &M) -> Vec<ActionNode> {
        match model.action_space() {
            ActionSpace::Discrete(n) => (0..n).map(|i| ActionNode::new(Action::Discrete(i))).collect(),
            ActionSpace::Continuous => Vec::new(),
        }
    }

    /// Add a tree node for `belief`.
    pub fn add_node(&self, tree: &mut SearchTree<M::State>, belief: ParticleBelief<M::State>, model: &M) -> usize {
        let terminal = all_terminal(&belief, model);
        tree.add(belief, self.initial_actions(model), terminal)
    }

    fn widen(&self, node: &mut BeliefNode<M::State>, model: &M, rng: &mut SeededRng) {
        let Some(w) = self.cfg.widening else {
            return;
        };
        if model.action_space() != ActionSpace::Continuous {
            return;
        }
        if node.actions.len() < w.cap(node.n) {
            if let Some(a) = model.sample_action(rng) {
                node.actions.push(ActionNode::new(a));
            }
        }
    }

    /// One simulation from `id` with `remaining` steps of depth left.
    /// Returns the sampled discounted return.
    pub fn simulate(
        &self,
        tree: &mut SearchTree<M::State>,
        id: usize,
        remaining: usize,
        model: &M,
        rng: &mut SeededRng,
    ) -> Result<f64> {
        if remaining == 0 || tree.nodes[id].terminal {
            return Ok(0.0);
        }
        self.widen(&mut tree.nodes[id], model, rng);
        let node = &tree.nodes[id];
        if node.actions.is_empty() {
            return Err(Error::config("no candidate actions at a search node"));
        }
        let ai = select_action_ucb(&node.actions, node.n, self.cfg.c_ucb);
        let first_visit = node.n == 0;
        let action = node.actions[ai].action;

        let cap = self.cfg.child_cap(node.actions[ai].n);
        let (child, rho) = if node.actions[ai].children.len() >= cap {
            let children = &node.actions[ai].children;
            children[rng.random_range(0..children.len())]
        } else {
            let t = gen_pf(&node.belief, &action, model, rng);
            let child = self.add_node(tree, t.belief, model);
            tree.nodes[id].actions[ai].children.push((child, t.rho));
            (child, t.rho)
        };

        let gamma = model.discount();
        let q = if first_visit {
            rho + gamma * rollout(&tree.nodes[child].belief, remaining - 1, self.rollout.as_ref(), model, rng)?
        } else {
            rho + gamma * self.simulate(tree, child, remaining - 1, model, rng)?
        };

        let node = &mut tree.nodes[id];
        node.n += 1;
        node.actions[ai].record(q);
        debug_assert_eq!(node.n, node.actions.iter().map(|a| a.n).sum::<u64>());
        debug_assert!(node.actions[ai].children.len() <= self.cfg.child_cap(node.actions[ai].n - 1));
        Ok(q)
    }

    /// Build a root from the filter belief and search until the budget runs out.
    pub fn plan(&self, belief: &ParticleBelief<M::State>, model: &M, rng: &mut SeededRng) -> Result<PlanOutcome> {
        let root_belief = belief.sample(self.cfg.root_particles(), rng);
        self.plan_from_root(root_belief, model, rng).map(|(outcome, _)| outcome)
    }

    /// Search from an explicit root particle belief; also returns the tree.
    pub fn plan_from_root(
        &self,
        root_belief: ParticleBelief<M::State>,
        model: &M,
        rng: &mut SeededRng,
    ) -> Result<(PlanOutcome, SearchTree<M::State>)> {
        self.check_model(model)?;
        let mut tree = SearchTree::new();
        let root = self.add_node(&mut tree, root_belief, model);
        let start = Instant::now();
        let mut sims = 0u64;
        loop {
            let more = match self.cfg.budget {
                Budget::Queries(n) => sims < n,
                Budget::Time(s) => start.elapsed().as_secs_f64() < s,
            };
            if !more {
                break;
            }
            self.simulate(&mut tree, root, self.cfg.depth, model, rng)?;
            sims += 1;
            // A fully terminal root never changes; stop spinning.
            if tree.nodes[root].terminal {
                break;
            }
        }

        let node = &tree.nodes[root];
        let root_stats: Vec<RootActionStats> = node
            .actions
            .iter()
            .map(|a| RootActionStats {
                action: a.action,
                visits: a.n,
                q: a.q,
            })
            .collect();
        let best = node
            .actions
            .iter()
            .enumerate()
            .filter(|(_, a)| a.n > 0)
            .fold(None::<(usize, f64)>, |best, (i, a)| match best {
                Some((_, q)) if q >= a.q => best,
                _ => Some((i, a.q)),
            });
        let (action, fallback) = match best {
            Some((i, _)) => (node.actions[i].action, false),
            None => (self.first_action(node, model, rng)?, true),
        };
        Ok((
            PlanOutcome {
                action,
                simulations: sims,
                fallback,
                nodes: tree.len(),
                root: root_stats,
            },
            tree,
        ))
    }

    fn first_action(&self, node: &BeliefNode<M::State>, model: &M, rng: &mut SeededRng) -> Result<Action> {
        if let Some(a) = node.actions.first() {
            return Ok(a.action);
        }
        model
            .sample_action(rng)
            .ok_or_else(|| Error::config("model offers no action to fall back on"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::RandomPolicy;
    use crate::belief::init_belief;
    use crate::model::Transition;

    /// Fully observed deterministic-reward toy: action `a` pays `payoff[a]`
    /// every step, state never changes.
    struct Bandit {
        payoff: Vec<f64>,
        gamma: f64,
    }

    impl Pomdp for Bandit {
        type State = u8;
        type Obs = u8;
        fn name(&self) -> &'static str {
            "bandit"
        }
        fn discount(&self) -> f64 {
            self.gamma
        }
        fn horizon(&self) -> usize {
            10
        }
        fn reward_bound(&self) -> f64 {
            self.payoff.iter().fold(0.0, |m, p| m.max(p.abs()))
        }
        fn action_space(&self) -> ActionSpace {
            ActionSpace::Discrete(self.payoff.len())
        }
        fn initial_state(&self, _rng: &mut SeededRng) -> u8 {
            0
        }
        fn is_terminal(&self, _s: &u8) -> bool {
            false
        }
        fn generate(&self, _s: &u8, a: &Action, _rng: &mut SeededRng) -> Transition<u8, u8> {
            Transition {
                next_state: 0,
                observation: 0,
                reward: self.payoff[a.index().unwrap()],
            }
        }
        fn obs_density(&self, _a: &Action, _n: &u8, _o: &u8) -> f64 {
            1.0
        }
    }

    fn planner(budget: Budget, c_ucb: f64, depth: usize) -> SparsePft<Bandit> {
        SparsePft::new(
            PftConfig {
                width: 3,
                alpha_o: 0.0,
                c_ucb,
                depth,
                budget,
                particles: None,
                widening: None,
            },
            Box::new(RandomPolicy),
        )
        .unwrap()
    }

    fn node(q: f64, n: u64) -> ActionNode {
        ActionNode {
            q,
            n,
            ..ActionNode::new(Action::Discrete(0))
        }
    }

    #[test]
    fn ucb_examples() {
        assert_eq!(select_action_ucb(&[node(1.0, 1), node(0.0, 1)], 2, 0.0), 0);
        assert_eq!(select_action_ucb(&[node(5.0, 3), node(0.0, 0)], 3, 1.0), 1);
        assert_eq!(select_action_ucb(&[node(0.0, 9), node(0.0, 1)], 10, 1.0), 1);
        assert_eq!(select_action_ucb(&[node(0.0, 0), node(0.0, 0)], 0, 1.0), 0);
        assert_eq!(select_action_ucb(&[node(2.0, 4), node(2.0, 4)], 8, 1.0), 0);
    }

    #[test]
    fn widening_cap() {
        let w = Widening {
            k_a: 20.0,
            alpha_a: 1.0 / 25.0,
        };
        assert_eq!(w.cap(1), 20);
        assert_eq!(w.cap(0), 1);
        let w = Widening { k_a: 0.5, alpha_a: 0.5 };
        assert_eq!(w.cap(0), 1);
        assert_eq!(w.cap(16), 2);
    }

    #[test]
    fn single_action_model_returns_it() {
        let m = Bandit {
            payoff: vec![0.3],
            gamma: 0.9,
        };
        let p = planner(Budget::Queries(10), 1.0, 3);
        let b = init_belief(&m, 3, &mut SeededRng::new(0));
        assert_eq!(p.plan(&b, &m, &mut SeededRng::new(1)).unwrap().action, Action::Discrete(0));
    }

    #[test]
    fn two_armed_bandit_picks_better_arm() {
        let m = Bandit {
            payoff: vec![0.0, 1.0],
            gamma: 0.9,
        };
        let p = planner(Budget::Queries(100), 1.0, 1);
        let b = init_belief(&m, 3, &mut SeededRng::new(0));
        let out = p.plan(&b, &m, &mut SeededRng::new(1)).unwrap();
        assert_eq!(out.action, Action::Discrete(1));
        assert_eq!(out.simulations, 100);
        assert!(!out.fallback);
    }

    #[test]
    fn depth_zero_returns_zero_without_mutation() {
        let m = Bandit {
            payoff: vec![1.0],
            gamma: 0.5,
        };
        let p = planner(Budget::Queries(1), 1.0, 3);
        let mut tree = SearchTree::new();
        let root = p.add_node(&mut tree, init_belief(&m, 3, &mut SeededRng::new(0)), &m);
        let q = p.simulate(&mut tree, root, 0, &m, &mut SeededRng::new(0)).unwrap();
        assert_eq!(q, 0.0);
        assert_eq!(tree.nodes[root].n, 0);
        assert_eq!(tree.len(), 1);
    }

    #[test]
    fn first_visit_uses_rollout() {
        let m = Bandit {
            payoff: vec![1.0],
            gamma: 0.5,
        };
        let p = planner(Budget::Queries(1), 1.0, 3);
        let mut tree = SearchTree::new();
        let root = p.add_node(&mut tree, init_belief(&m, 3, &mut SeededRng::new(0)), &m);
        let q = p.simulate(&mut tree, root, 3, &m, &mut SeededRng::new(0)).unwrap();
        // One expansion plus a two-step rollout: 1 + 0.5 + 0.25.
        assert_eq!(q, 1.75);
        assert_eq!(tree.len(), 2);
        assert_eq!(tree.nodes[1].n, 0);
    }

    #[test]
    fn chain_value_converges_to_geometric_sum() {
        let m = Bandit {
            payoff: vec![1.0],
            gamma: 0.5,
        };
        let p = planner(Budget::Queries(200), 1.0, 3);
        let b = init_belief(&m, 3, &mut SeededRng::new(0));
        let out = p.plan(&b, &m, &mut SeededRng::new(2)).unwrap();
        assert!((out.root[0].q - 1.75).abs() < 0.05);
    }

    #[test]
    fn rollout_examples() {
        let m = Bandit {
            payoff: vec![1.0],
            gamma: 0.5,
        };
        let b = init_belief(&m, 2, &mut SeededRng::new(0));
        let mut rng = SeededRng::new(0);
        assert_eq!(rollout(&b, 0, &RandomPolicy, &m, &mut rng).unwrap(), 0.0);
        assert_eq!(rollout(&b, 3, &RandomPolicy, &m, &mut rng).unwrap(), 1.75);
        let zero = Bandit {
            payoff: vec![0.0, 0.0],
            gamma: 0.9,
        };
        assert_eq!(rollout(&b, 5, &RandomPolicy, &zero, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn zero_budget_falls_back_to_first_action() {
        let m = Bandit {
            payoff: vec![0.0, 1.0],
            gamma: 0.9,
        };
        let b = init_belief(&m, 3, &mut SeededRng::new(0));
        for budget in [Budget::Queries(0), Budget::Time(0.0)] {
            let out = planner(budget, 1.0, 2).plan(&b, &m, &mut SeededRng::new(0)).unwrap();
            assert!(out.fallback);
            assert_eq!(out.action, Action::Discrete(0));
        }
    }

    #[test]
    fn child_count_is_capped() {
        let m = Bandit {
            payoff: vec![1.0, 0.5],
            gamma: 0.9,
        };
        let p = planner(Budget::Queries(500), 2.0, 4);
        let b = init_belief(&m, 3, &mut SeededRng::new(0));
        let (_, tree) = p.plan_from_root(b, &m, &mut SeededRng::new(5)).unwrap();
        tree.check_invariants(&|_| 3).unwrap();
        assert!(tree.nodes[0].actions.iter().all(|a| a.children.len() == 3));
    }

    #[test]
    fn config_validation() {
        let mut cfg = planner(Budget::Queries(1), 1.0, 1).cfg;
        cfg.width = 0;
        assert!(cfg.validate().is_err());
        cfg.width = 1;
        cfg.widening = Some(Widening { k_a: 1.0, alpha_a: 1.0 });
        assert!(cfg.validate().is_err());
        cfg.widening = None;
        cfg.alpha_o = -0.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn observation_widening_cap() {
        let mut cfg = planner(Budget::Queries(1), 1.0, 1).cfg;
        assert_eq!(cfg.child_cap(0), 3);
        assert_eq!(cfg.child_cap(1000), 3);
        cfg.width = 4;
        cfg.alpha_o = 0.5;
        assert_eq!(cfg.child_cap(0), 1);
        assert_eq!(cfg.child_cap(1), 4);
        assert_eq!(cfg.child_cap(9), 12);
    }
}
