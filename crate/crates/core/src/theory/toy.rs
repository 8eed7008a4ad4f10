//! Tiny tabular POMDPs with exact finite-horizon belief-MDP values.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Action, ActionSpace, Pomdp, Transition};
use crate::rng::SeededRng;

const MAX_SIZE: usize = 4;
const MAX_DEPTH: usize = 3;
const ROW_TOL: f64 = 1e-12;

/// Explicit tables: `trans[s][a][s']`, `obs[a][s'][o]`, `reward[s][a]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TinyPomdp {
    trans: Vec<Vec<Vec<f64>>>,
    obs: Vec<Vec<Vec<f64>>>,
    reward: Vec<Vec<f64>>,
    b0: Vec<f64>,
    gamma: f64,
    depth: usize,
}

fn check_row(row: &[f64], what: &str) -> Result<()> {
    let total: f64 = row.iter().sum();
    if row.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > ROW_TOL {
        return Err(Error::config(format!("{what} is not a probability row")));
    }
    Ok(())
}

fn sample_row(row: &[f64], rng: &mut SeededRng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

impl TinyPomdp {
    pub fn new(
        trans: Vec<Vec<Vec<f64>>>,
        obs: Vec<Vec<Vec<f64>>>,
        reward: Vec<Vec<f64>>,
        b0: Vec<f64>,
        gamma: f64,
        depth: usize,
    ) -> Result<Self> {
        let ns = trans.len();
        let na = trans.first().map_or(0, Vec::len);
        let no = obs.first().and_then(|a| a.first()).map_or(0, Vec::len);
        for (n, what) in [(ns, "states"), (na, "actions"), (no, "observations")] {
            if n == 0 || n > MAX_SIZE {
                return Err(Error::config(format!("tiny POMDP needs 1..={MAX_SIZE} {what}")));
            }
        }
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::config(format!("tiny POMDP depth must be 1..={MAX_DEPTH}")));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::config("tiny POMDP discount must lie in [0, 1)"));
        }
        for (s, rows) in trans.iter().enumerate() {
            if rows.len() != na {
                return Err(Error::config("transition table is ragged"));
            }
            for (a, row) in rows.iter().enumerate() {
                if row.len() != ns {
                    return Err(Error::config("transition table is ragged"));
                }
                check_row(row, &format!("T[{s}][{a}]"))?;
            }
        }
        if obs.len() != na {
            return Err(Error::config("observation table needs one block per action"));
        }
        for (a, rows) in obs.iter().enumerate() {
            if rows.len() != ns || rows.iter().any(|r| r.len() != no) {
                return Err(Error::config("observation table is ragged"));
            }
            for (s, row) in rows.iter().enumerate() {
                check_row(row, &format!("Z[{a}][{s}]"))?;
            }
        }
        if reward.len() != ns || reward.iter().any(|r| r.len() != na || r.iter().any(|x| !x.is_finite())) {
            return Err(Error::config("reward table must be finite with shape states x actions"));
        }
        if b0.len() != ns {
            return Err(Error::config("initial belief has the wrong length"));
        }
        check_row(&b0, "b0")?;
        Ok(TinyPomdp {
            trans,
            obs,
            reward,
            b0,
            gamma,
            depth,
        })
    }

    /// Tiger-style toy: state 0 or 1, action 0 listens (cost 1/8, observation
    /// correct with probability 3/4), action 1 commits (+1 in state 0, -1 in
    /// state 1, uninformative observation). States never change. Depth 2,
    /// discount 1/2, prior (3/4, 1/4).
    pub fn tiger() -> Self {
        TinyPomdp::new(
            vec![
                vec![vec![1.0, 0.0], vec![1.0, 0.0]],
                vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            ],
            vec![
                vec![vec![0.75, 0.25], vec![0.25, 0.75]],
                vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            ],
            vec![vec![-0.125, 1.0], vec![-0.125, -1.0]],
            vec![0.75, 0.25],
            0.5,
            2,
        )
        .expect("valid toy")
    }

    /// Three-state drift toy with stochastic transitions and a partially
    /// informative sensor whose accuracy depends on the action. Depth 2,
    /// discount 1/2. The exact root gap between the actions is 11/64, wide
    /// enough for the greedy action to settle at moderate widths.
    pub fn drift() -> Self {
        TinyPomdp::new(
            vec![
                vec![vec![0.5, 0.5, 0.0], vec![0.75, 0.0, 0.25]],
                vec![vec![0.0, 0.5, 0.5], vec![0.25, 0.75, 0.0]],
                vec![vec![0.25, 0.25, 0.5], vec![0.0, 0.25, 0.75]],
            ],
            vec![
                vec![vec![0.75, 0.25], vec![0.5, 0.5], vec![0.25, 0.75]],
                vec![vec![0.5, 0.5], vec![0.75, 0.25], vec![0.5, 0.5]],
            ],
            vec![vec![1.0, 0.0], vec![0.0, 0.5], vec![-0.5, 0.5]],
            vec![0.5, 0.25, 0.25],
            0.5,
            2,
        )
        .expect("valid toy")
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn num_actions(&self) -> usize {
        self.trans[0].len()
    }

    pub fn num_obs(&self) -> usize {
        self.obs[0][0].len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn initial_belief(&self) -> &[f64] {
        &self.b0
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s][a]
    }

    /// Multiply every reward by `k`.
    pub fn scale_rewards(&mut self, k: f64) {
        for row in &mut self.reward {
            for r in row {
                *r *= k;
            }
        }
    }

    /// Largest importance ratio `Z(o | a, s') / Z(o | a, s'')` over all
    /// state pairs with positive denominator; bounds the particle weights.
    pub fn max_likelihood_ratio(&self) -> f64 {
        let mut worst: f64 = 1.0;
        for rows in &self.obs {
            for o in 0..self.num_obs() {
                let hi = rows.iter().map(|r| r[o]).fold(0.0, f64::max);
                let lo = rows.iter().map(|r| r[o]).filter(|p| *p > 0.0).fold(f64::INFINITY, f64::min);
                if lo.is_finite() {
                    worst = worst.max(hi / lo);
                }
            }
        }
        worst
    }
}

impl Pomdp for TinyPomdp {
    type State = usize;
    type Obs = usize;

    fn name(&self) -> &'static str {
        "tiny"
    }

    fn discount(&self) -> f64 {
        self.gamma
    }

    fn horizon(&self) -> usize {
        self.depth
    }

    fn reward_bound(&self) -> f64 {
        self.reward.iter().flatten().fold(0.0, |m, r| m.max(r.abs()))
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(self.num_actions())
    }

    fn initial_state(&self, rng: &mut SeededRng) -> usize {
        sample_row(&self.b0, rng)
    }

    fn is_terminal(&self, _s: &usize) -> bool {
        false
    }

    fn generate(&self, s: &usize, a: &Action, rng: &mut SeededRng) -> Transition<usize, usize> {
        let a = a.index().expect("discrete action");
        let next = sample_row(&self.trans[*s][a], rng);
        let o = sample_row(&self.obs[a][next], rng);
        Transition {
            next_state: next,
            observation: o,
            reward: self.reward[*s][a],
        }
    }

    fn obs_density(&self, a: &Action, next: &usize, o: &usize) -> f64 {
        self.obs[a.index().expect("discrete action")][*next][*o]
    }

    fn state_index(&self, s: &usize) -> Option<usize> {
        Some(*s)
    }
}

/// Largest observation-action tree the exact backup will enumerate.
const EXACT_CAP: f64 = 1e6;

fn exact_v(toy: &TinyPomdp, b: &[f64], remaining: usize) -> f64 {
    if remaining == 0 {
        return 0.0;
    }
    (0..toy.num_actions())
        .map(|a| exact_q_at(toy, b, a, remaining))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn exact_q_at(toy: &TinyPomdp, b: &[f64], a: usize, remaining: usize) -> f64 {
    let ns = toy.num_states();
    let immediate: f64 = (0..ns).map(|s| b[s] * toy.reward[s][a]).sum();
    if remaining == 1 {
        return immediate;
    }
    // Predicted next-state distribution.
    let mut pred = vec![0.0; ns];
    for s in 0..ns {
        for (n, p) in pred.iter_mut().enumerate() {
            *p += b[s] * toy.trans[s][a][n];
        }
    }
    let mut future = 0.0;
    for o in 0..toy.num_obs() {
        let joint: Vec<f64> = (0..ns).map(|n| pred[n] * toy.obs[a][n][o]).collect();
        let p_o: f64 = joint.iter().sum();
        if p_o > 0.0 {
            let post: Vec<f64> = joint.iter().map(|j| j / p_o).collect();
            future += p_o * exact_v(toy, &post, remaining - 1);
        }
    }
    immediate + toy.gamma * future
}

/// Exact depth-`D` optimal Q values of the belief MDP at `b0`, one per
/// action, by enumerating every action-observation branch with exact Bayes
/// updates.
pub fn exact_pomdp_q(toy: &TinyPomdp) -> Result<Vec<f64>> {
    exact_q_from(toy, toy.initial_belief(), toy.depth())
}

/// Exact optimal Q values at an arbitrary belief with `remaining` steps to go.
pub fn exact_q_from(toy: &TinyPomdp, belief: &[f64], remaining: usize) -> Result<Vec<f64>> {
    let branching = (toy.num_actions() * toy.num_obs()) as f64;
    if branching.powi(remaining as i32) > EXACT_CAP || remaining > MAX_DEPTH {
        return Err(Error::Precondition(format!(
            "exact backup over {remaining} steps exceeds the enumeration cap"
        )));
    }
    if belief.len() != toy.num_states() {
        return Err(Error::Precondition("belief has the wrong length".into()));
    }
    check_row(belief, "belief").map_err(|e| Error::Precondition(e.to_string()))?;
    if remaining == 0 {
        return Ok(vec![0.0; toy.num_actions()]);
    }
    Ok((0..toy.num_actions())
        .map(|a| exact_q_at(toy, belief, a, remaining))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiger_matches_hand_backup() {
        // Commit: 1/2 now; the commit observation is uninformative, so the
        // next step faces the prior again and commits for 1/2 more:
        //   Q(commit) = 1/2 + 1/2 * 1/2 = 3/4.
        // Listen: -1/8 now; "left" arrives w.p. 5/8 with posterior 9/10
        // (commit worth 4/5), "right" w.p. 3/8 with posterior 1/2 (best is
        // commit at 0):
        //   Q(listen) = -1/8 + 1/2 * (5/8 * 4/5) = 1/8.
        let q = exact_pomdp_q(&TinyPomdp::tiger()).unwrap();
        assert!((q[0] - 0.125).abs() < 1e-12);
        assert!((q[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn depth_one_is_expected_reward() {
        let toy = TinyPomdp::drift();
        let b = [0.25, 0.5, 0.25];
        let q = exact_q_from(&toy, &b, 1).unwrap();
        assert!((q[0] - (0.25 * 1.0 + 0.25 * -0.5)).abs() < 1e-15);
        assert!((q[1] - (0.5 * 0.5 + 0.25 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn drift_matches_independent_backup() {
        // Values from a separate enumeration of the depth-2 belief tree.
        let q = exact_pomdp_q(&TinyPomdp::drift()).unwrap();
        assert!((q[0] - 0.578125).abs() < 1e-12);
        assert!((q[1] - 0.40625).abs() < 1e-12);
    }

    #[test]
    fn zero_reward_toy_is_zero() {
        let mut toy = TinyPomdp::drift();
        toy.scale_rewards(0.0);
        assert!(exact_pomdp_q(&toy).unwrap().iter().all(|q| *q == 0.0));
    }

    #[test]
    fn rejects_bad_tables() {
        let bad = TinyPomdp::new(
            vec![vec![vec![0.5, 0.25]]],
            vec![vec![vec![1.0], vec![1.0]]],
            vec![vec![0.0]],
            vec![1.0],
            0.5,
            1,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn likelihood_ratio_of_tiger_sensor() {
        assert_eq!(TinyPomdp::tiger().max_likelihood_ratio(), 3.0);
    }
}
