//! Laser Tag: find and tag an evading opponent on an obstacle grid while
//! localizing from eight noisy range beams.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::constants::LaserTagConstants;
use super::rounded_normal_mass;
use crate::model::{Action, ActionSpace, FiniteMdp, Pomdp, Transition};
use crate::rng::SeededRng;

/// Moves as `(d_row, d_col)`: north, east, south, west. Action 4 is tag.
const MOVES: [(i32, i32); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];
const TAG: usize = 4;

/// Opponent options in tie-break order: stay, then the four moves.
const EVADE: [(i32, i32); 5] = [(0, 0), (-1, 0), (0, 1), (1, 0), (0, -1)];

/// Beam directions N, NE, E, SE, S, SW, W, NW.
pub const BEAMS: [(i32, i32); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

pub type LaserObs = [i32; 8];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LaserTagState {
    pub agent: u8,
    pub opponent: u8,
    pub terminal: bool,
}

#[derive(Clone, Debug)]
pub struct LaserTag {
    c: LaserTagConstants,
    blocked: Vec<bool>,
    free: Vec<u8>,
    /// Free cells from each cell to the nearest wall or obstacle, per beam.
    wall_steps: Vec<[u8; 8]>,
}

impl LaserTag {
    /// Grid with `c.obstacles` obstacle cells drawn from `layout_seed`.
    /// Layouts that would disconnect the free cells are redrawn.
    pub fn new(c: LaserTagConstants, layout_seed: u64) -> Self {
        let n = c.rows * c.cols;
        let mut rng = SeededRng::new(layout_seed);
        loop {
            let cells: Vec<usize> = sample(&mut rng, n, c.obstacles).into_vec();
            let model = LaserTag::with_obstacles(c.clone(), &cells);
            if model.is_connected() {
                return model;
            }
        }
    }

    pub fn with_obstacles(c: LaserTagConstants, obstacles: &[usize]) -> Self {
        let n = c.rows * c.cols;
        let mut blocked = vec![false; n];
        for &o in obstacles {
            blocked[o] = true;
        }
        let free = (0..n).filter(|&i| !blocked[i]).map(|i| i as u8).collect();
        let mut model = LaserTag {
            c,
            blocked,
            free,
            wall_steps: Vec::new(),
        };
        model.wall_steps = (0..n)
            .map(|cell| {
                let mut steps = [0u8; 8];
                for (k, dir) in BEAMS.iter().enumerate() {
                    let mut pos = cell;
                    while let Some(next) = model.offset(pos, *dir) {
                        pos = next;
                        steps[k] += 1;
                    }
                }
                steps
            })
            .collect();
        model
    }

    pub fn constants(&self) -> &LaserTagConstants {
        &self.c
    }

    pub fn num_cells(&self) -> usize {
        self.c.rows * self.c.cols
    }

    pub fn is_blocked(&self, cell: usize) -> bool {
        self.blocked[cell]
    }

    pub fn free_cells(&self) -> &[u8] {
        &self.free
    }

    pub fn coords(&self, cell: usize) -> (i32, i32) {
        ((cell / self.c.cols) as i32, (cell % self.c.cols) as i32)
    }

    /// Neighbouring free cell in direction `d`, if any.
    fn offset(&self, cell: usize, d: (i32, i32)) -> Option<usize> {
        let (r, c) = self.coords(cell);
        let (r, c) = (r + d.0, c + d.1);
        if r < 0 || c < 0 || r >= self.c.rows as i32 || c >= self.c.cols as i32 {
            return None;
        }
        let next = r as usize * self.c.cols + c as usize;
        (!self.blocked[next]).then_some(next)
    }

    fn is_connected(&self) -> bool {
        let Some(&start) = self.free.first() else {
            return false;
        };
        let mut seen = vec![false; self.num_cells()];
        let mut queue = VecDeque::from([start as usize]);
        seen[start as usize] = true;
        let mut count = 1;
        while let Some(cell) = queue.pop_front() {
            for d in MOVES {
                if let Some(n) = self.offset(cell, d) {
                    if !seen[n] {
                        seen[n] = true;
                        count += 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        count == self.free.len()
    }

    fn dist2(&self, a: usize, b: usize) -> i32 {
        let (ar, ac) = self.coords(a);
        let (br, bc) = self.coords(b);
        (ar - br).pow(2) + (ac - bc).pow(2)
    }

    /// Opponent's deterministic evasion step away from `agent`.
    pub fn evade(&self, opponent: usize, agent: usize) -> usize {
        let mut best = opponent;
        let mut best_d = self.dist2(opponent, agent);
        for d in &EVADE[1..] {
            if let Some(n) = self.offset(opponent, *d) {
                let dist = self.dist2(n, agent);
                if dist > best_d {
                    best = n;
                    best_d = dist;
                }
            }
        }
        best
    }

    /// True beam lengths from the agent. The opponent blocks beams like an
    /// obstacle; when it shares the agent's cell every beam reads zero.
    pub fn beam_distances(&self, agent: usize, opponent: usize) -> [f64; 8] {
        let mut out = [0.0; 8];
        if agent == opponent {
            return out;
        }
        let (ar, ac) = self.coords(agent);
        let (or, oc) = self.coords(opponent);
        let (dr, dc) = (or - ar, oc - ac);
        for (k, dir) in BEAMS.iter().enumerate() {
            let mut steps = self.wall_steps[agent][k] as i32;
            // Opponent lies on this ray at `j` steps.
            let j = if dir.0 != 0 { dr / dir.0 } else { dc / dir.1 };
            if j > 0 && dir.0 * j == dr && dir.1 * j == dc && j - 1 < steps {
                steps = j - 1;
            }
            let unit = if dir.0 != 0 && dir.1 != 0 {
                std::f64::consts::SQRT_2
            } else {
                1.0
            };
            out[k] = steps as f64 * unit;
        }
        out
    }

    fn move_agent(&self, agent: usize, a: usize) -> usize {
        self.offset(agent, MOVES[a]).unwrap_or(agent)
    }

    /// Successor cells and reward of a non-terminal step. `None` means the
    /// tag succeeded and the episode ends.
    fn transition(&self, agent: usize, opponent: usize, a: usize) -> (Option<(usize, usize)>, f64) {
        if a == TAG {
            if agent == opponent {
                (None, self.c.tag_reward)
            } else {
                (
                    Some((agent, self.evade(opponent, agent))),
                    self.c.failed_tag_reward,
                )
            }
        } else {
            let agent = self.move_agent(agent, a);
            (Some((agent, self.evade(opponent, agent))), self.c.step_reward)
        }
    }
}

impl Pomdp for LaserTag {
    type State = LaserTagState;
    type Obs = LaserObs;

    fn name(&self) -> &'static str {
        "lasertag"
    }

    fn discount(&self) -> f64 {
        self.c.discount
    }

    fn horizon(&self) -> usize {
        self.c.horizon
    }

    fn reward_bound(&self) -> f64 {
        self.c
            .tag_reward
            .abs()
            .max(self.c.failed_tag_reward.abs())
            .max(self.c.step_reward.abs())
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(5)
    }

    /// Agent and opponent on distinct free cells, uniformly.
    fn initial_state(&self, rng: &mut SeededRng) -> LaserTagState {
        let n = self.free.len();
        let agent = rng.random_range(0..n);
        let mut opponent = rng.random_range(0..n - 1);
        if opponent >= agent {
            opponent += 1;
        }
        LaserTagState {
            agent: self.free[agent],
            opponent: self.free[opponent],
            terminal: false,
        }
    }

    fn is_terminal(&self, s: &LaserTagState) -> bool {
        s.terminal
    }

    fn generate(&self, s: &LaserTagState, a: &Action, rng: &mut SeededRng) -> Transition<LaserTagState, LaserObs> {
        let ai = a.index().expect("discrete action");
        let (next, reward) = if s.terminal {
            (*s, 0.0)
        } else {
            match self.transition(s.agent as usize, s.opponent as usize, ai) {
                (None, r) => (
                    LaserTagState {
                        terminal: true,
                        ..*s
                    },
                    r,
                ),
                (Some((ag, op)), r) => (
                    LaserTagState {
                        agent: ag as u8,
                        opponent: op as u8,
                        terminal: false,
                    },
                    r,
                ),
            }
        };
        let noise = Normal::new(0.0, self.c.sensor_sd).expect("positive sd");
        let d = self.beam_distances(next.agent as usize, next.opponent as usize);
        let mut obs = [0i32; 8];
        for (o, d) in obs.iter_mut().zip(d) {
            *o = (d + noise.sample(rng)).round() as i32;
        }
        Transition {
            next_state: next,
            observation: obs,
            reward,
        }
    }

    fn obs_density(&self, _a: &Action, next: &LaserTagState, o: &LaserObs) -> f64 {
        let d = self.beam_distances(next.agent as usize, next.opponent as usize);
        d.iter()
            .zip(o)
            .map(|(d, k)| rounded_normal_mass(*k, *d, self.c.sensor_sd))
            .product()
    }

    fn state_index(&self, s: &LaserTagState) -> Option<usize> {
        (!s.terminal).then(|| s.agent as usize * self.num_cells() + s.opponent as usize)
    }

    fn finite_mdp(&self) -> Option<&dyn FiniteMdp> {
        Some(self)
    }
}

/// States are `(agent cell, opponent cell)` pairs over the whole grid,
/// including unreachable obstacle cells.
impl FiniteMdp for LaserTag {
    fn num_states(&self) -> usize {
        self.num_cells() * self.num_cells()
    }

    fn num_actions(&self) -> usize {
        5
    }

    fn discount(&self) -> f64 {
        self.c.discount
    }

    fn for_each_outcome(&self, s: usize, a: usize, f: &mut dyn FnMut(Option<usize>, f64, f64)) {
        let n = self.num_cells();
        let (agent, opponent) = (s / n, s % n);
        match self.transition(agent, opponent, a) {
            (None, r) => f(None, 1.0, r),
            (Some((ag, op)), r) => f(Some(ag * n + op), 1.0, r),
        }
    }
}
