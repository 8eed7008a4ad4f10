//! QMDP: value iteration on the fully observable MDP, then act greedily on
//! the belief-averaged Q rows.

use std::sync::Arc;

use rayon::prelude::*;

use super::{argmax, BeliefPolicy};
use crate::belief::ParticleBelief;
use crate::error::{Error, Result};
use crate::model::{Action, FiniteMdp, Pomdp};
use crate::rng::SeededRng;

/// Default sup-norm tolerance for value iteration.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

const MAX_SWEEPS: usize = 100_000;

/// `Q(s, a)` for every enumerated state, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct QmdpTable {
    num_states: usize,
    num_actions: usize,
    q: Vec<f64>,
    /// Sup-norm Bellman residual of the stored table.
    pub residual: f64,
    pub sweeps: usize,
}

impl QmdpTable {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn q(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.num_actions + a]
    }

    /// `argmax_a sum_i w_i Q(s_i, a) / sum_i w_i`, ties to the lowest index.
    ///
    /// Terminal particles contribute zero to every action.
    pub fn action<M: Pomdp>(&self, belief: &ParticleBelief<M::State>, model: &M) -> Result<Action> {
        let mut acc = vec![0.0; self.num_actions];
        for (s, w) in belief.iter() {
            if w == 0.0 || model.is_terminal(s) {
                continue;
            }
            let i = model
                .state_index(s)
                .filter(|&i| i < self.num_states)
                .ok_or_else(|| Error::config(format!("state {s:?} is outside the QMDP table")))?;
            for (a, q) in acc.iter_mut().zip(self.row(i)) {
                *a += w * q;
            }
        }
        // Normalising by the total weight cannot change the argmax.
        Ok(Action::Discrete(argmax(&acc)))
    }
}

fn backup(mdp: &dyn FiniteMdp, v: &[f64], s: usize, out: &mut [f64]) {
    let gamma = mdp.discount();
    for (a, q) in out.iter_mut().enumerate() {
        let mut total = 0.0;
        mdp.for_each_outcome(s, a, &mut |next, p, r| {
            total += p * (r + next.map_or(0.0, |n| gamma * v[n]));
        });
        *q = total;
    }
}

/// Jacobi value iteration until the sup-norm Bellman residual drops below `tolerance`.
pub fn solve_qmdp(mdp: &dyn FiniteMdp, tolerance: f64) -> Result<QmdpTable> {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    if ns == 0 || na == 0 {
        return Err(Error::config("QMDP needs a non-empty state and action space"));
    }
    if !(tolerance > 0.0) {
        return Err(Error::config("QMDP tolerance must be positive"));
    }
    let gamma = mdp.discount();
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::config("QMDP value iteration needs a discount in [0, 1)"));
    }
    let mut q = vec![0.0; ns * na];
    let mut v = vec![0.0; ns];
    for sweep in 1..=MAX_SWEEPS {
        q.par_chunks_mut(na)
            .enumerate()
            .for_each(|(s, row)| backup(mdp, &v, s, row));
        let residual = q
            .par_chunks(na)
            .zip(v.par_iter_mut())
            .map(|(row, vs)| {
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let delta = (best - *vs).abs();
                *vs = best;
                delta
            })
            .reduce(|| 0.0, f64::max);
        // `residual` is |T V_k - V_k|; one more backup makes Q consistent
        // with the final V to within gamma * residual.
        if residual < tolerance {
            q.par_chunks_mut(na)
                .enumerate()
                .for_each(|(s, row)| backup(mdp, &v, s, row));
            return Ok(QmdpTable {
                num_states: ns,
                num_actions: na,
                q,
                residual: gamma * residual,
                sweeps: sweep + 1,
            });
        }
    }
    Err(Error::config(format!(
        "value iteration did not converge within {MAX_SWEEPS} sweeps"
    )))
}

/// QMDP as a belief policy. The table is shared between episodes.
#[derive(Clone, Debug)]
pub struct QmdpPolicy {
    pub table: Arc<QmdpTable>,
}

impl QmdpPolicy {
    pub fn new(table: Arc<QmdpTable>) -> Self {
        QmdpPolicy { table }
    }
}

impl<M: Pomdp> BeliefPolicy<M> for QmdpPolicy {
    fn name(&self) -> &'static str {
        "qmdp"
    }

    fn act(&self, belief: &ParticleBelief<M::State>, model: &M, _rng: &mut SeededRng) -> Result<Action> {
        self.table.action(belief, model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Explicit tabular MDP: `trans[s][a] = [(next, prob, reward)]`.
    struct Table {
        trans: Vec<Vec<Vec<(Option<usize>, f64, f64)>>>,
        gamma: f64,
    }

    impl FiniteMdp for Table {
        fn num_states(&self) -> usize {
            self.trans.len()
        }
        fn num_actions(&self) -> usize {
            self.trans[0].len()
        }
        fn discount(&self) -> f64 {
            self.gamma
        }
        fn for_each_outcome(&self, s: usize, a: usize, f: &mut dyn FnMut(Option<usize>, f64, f64)) {
            for &(n, p, r) in &self.trans[s][a] {
                f(n, p, r);
            }
        }
    }

    /// Max Bellman residual of Q against an independent backup.
    fn bellman_residual(mdp: &Table, t: &QmdpTable) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                let target: f64 = mdp.trans[s][a]
                    .iter()
                    .map(|&(n, p, r)| {
                        let v = n.map_or(0.0, |n| {
                            t.row(n).iter().copied().fold(f64::NEG_INFINITY, f64::max)
                        });
                        p * (r + mdp.gamma * v)
                    })
                    .sum();
                worst = worst.max((target - t.q(s, a)).abs());
            }
        }
        worst
    }

    #[test]
    fn absorbing_zero_reward_state() {
        let mdp = Table {
            trans: vec![vec![vec![(Some(0), 1.0, 0.0)]; 3]],
            gamma: 0.9,
        };
        let t = solve_qmdp(&mdp, DEFAULT_TOLERANCE).unwrap();
        assert!(t.row(0).iter().all(|q| *q == 0.0));
    }

    #[test]
    fn two_state_chain_matches_hand_solution() {
        // State 0: a0 stays (r=1), a1 moves to 1 (r=0).
        // State 1: a0 stays (r=2), a1 moves to 0 (r=0).
        // V(1) = 2/(1-g) = 20, V(0) = max(1/(1-g)=10, g*20=18) = 18 at g=0.9.
        let mdp = Table {
            trans: vec![
                vec![vec![(Some(0), 1.0, 1.0)], vec![(Some(1), 1.0, 0.0)]],
                vec![vec![(Some(1), 1.0, 2.0)], vec![(Some(0), 1.0, 0.0)]],
            ],
            gamma: 0.9,
        };
        let t = solve_qmdp(&mdp, DEFAULT_TOLERANCE).unwrap();
        let tol = DEFAULT_TOLERANCE * 10.0 / (1.0 - 0.9);
        assert!((t.q(0, 0) - (1.0 + 0.9 * 18.0)).abs() < tol);
        assert!((t.q(0, 1) - 18.0).abs() < tol);
        assert!((t.q(1, 0) - 20.0).abs() < tol);
        assert!((t.q(1, 1) - 0.9 * 18.0).abs() < tol);
        assert!(t.residual < DEFAULT_TOLERANCE);
        assert!(bellman_residual(&mdp, &t) < DEFAULT_TOLERANCE);
    }

    #[test]
    fn zero_discount_is_immediate_reward() {
        let mdp = Table {
            trans: vec![
                vec![vec![(Some(1), 0.5, 3.0), (None, 0.5, -1.0)], vec![(Some(0), 1.0, 0.25)]],
                vec![vec![(Some(1), 1.0, 7.0)], vec![(None, 1.0, 2.0)]],
            ],
            gamma: 0.0,
        };
        let t = solve_qmdp(&mdp, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(t.row(0), &[1.0, 0.25]);
        assert_eq!(t.row(1), &[7.0, 2.0]);
    }

    #[test]
    fn rejects_bad_discount() {
        let mdp = Table {
            trans: vec![vec![vec![(Some(0), 1.0, 0.0)]]],
            gamma: 1.0,
        };
        assert!(solve_qmdp(&mdp, DEFAULT_TOLERANCE).unwrap_err().is_config());
    }
}
