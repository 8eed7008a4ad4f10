//! Sub Hunt: locate and attack an enemy submarine crossing the grid toward
//! its goal edge, using passive sonar or a revealing active ping.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::constants::SubHuntConstants;
use super::normal_pdf;
use crate::model::{Action, ActionSpace, FiniteMdp, Pomdp, Transition};
use crate::rng::SeededRng;

/// Unit directions N, E, S, W as `(d_row, d_col)`.
const DIRS: [(i32, i32); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

/// Actions 0-3 move three cells, 4-7 move one cell (both in `DIRS` order).
pub const ATTACK: usize = 8;
pub const PING: usize = 9;
pub const NUM_ACTIONS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubHuntState {
    pub agent: (u8, u8),
    pub enemy: (u8, u8),
    pub aware: bool,
    /// Index into N, E, S, W of the edge the enemy is heading for.
    pub goal: u8,
    pub terminal: bool,
}

pub type SonarObs = Vec<f64>;

#[derive(Clone, Debug)]
pub struct SubHunt {
    c: SubHuntConstants,
}

/// Outcome of one step before observation.
enum Step {
    Continue(SubHuntState),
    Killed,
    Escaped((u8, u8)),
}

impl SubHunt {
    pub fn new(c: SubHuntConstants) -> Self {
        SubHunt { c }
    }

    pub fn constants(&self) -> &SubHuntConstants {
        &self.c
    }

    fn n(&self) -> i32 {
        self.c.size as i32
    }

    fn clamp(&self, x: i32) -> u8 {
        x.clamp(0, self.n() - 1) as u8
    }

    pub fn in_range(&self, agent: (u8, u8), enemy: (u8, u8)) -> bool {
        let dr = (agent.0 as i32 - enemy.0 as i32).abs();
        let dc = (agent.1 as i32 - enemy.1 as i32).abs();
        dr.max(dc) <= self.c.attack_range
    }

    fn move_agent(&self, agent: (u8, u8), a: usize) -> (u8, u8) {
        let (dr, dc) = DIRS[a % 4];
        let k = if a < 4 { 3 } else { 1 };
        (
            self.clamp(agent.0 as i32 + k * dr),
            self.clamp(agent.1 as i32 + k * dc),
        )
    }

    /// Enemy move options: two steps forward, then the two forward diagonals.
    /// Returns the raw target coordinates before clamping.
    fn enemy_options(goal: u8) -> [(i32, i32); 3] {
        let f = DIRS[goal as usize];
        let l = (-f.1, f.0);
        [
            (2 * f.0, 2 * f.1),
            (f.0 + l.0, f.1 + l.1),
            (f.0 - l.0, f.1 - l.1),
        ]
    }

    /// Apply a displacement: lateral overflow is clamped; leaving the grid
    /// in the forward direction is an escape (`None`).
    fn displace(&self, enemy: (u8, u8), goal: u8, d: (i32, i32)) -> Option<(u8, u8)> {
        let (r, c) = (enemy.0 as i32 + d.0, enemy.1 as i32 + d.1);
        let forward_out = match goal {
            0 => r < 0,
            1 => c >= self.n(),
            2 => r >= self.n(),
            _ => c < 0,
        };
        (!forward_out).then(|| (self.clamp(r), self.clamp(c)))
    }

    fn dist2(a: (u8, u8), b: (i32, i32)) -> i32 {
        (a.0 as i32 - b.0).pow(2) + (a.1 as i32 - b.1).pow(2)
    }

    /// Evasive choice of an aware enemy: the option landing farthest from the
    /// agent, ties to the earliest option.
    fn aware_choice(&self, agent: (u8, u8), enemy: (u8, u8), goal: u8) -> usize {
        let opts = Self::enemy_options(goal);
        let mut best = 0;
        let mut best_d = i32::MIN;
        for (i, d) in opts.iter().enumerate() {
            let land = (enemy.0 as i32 + d.0, enemy.1 as i32 + d.1);
            let dist = Self::dist2(agent, land);
            if dist > best_d {
                best = i;
                best_d = dist;
            }
        }
        best
    }

    /// All outcomes of a non-terminal step as `(probability, outcome, reward)`.
    fn outcomes(&self, s: &SubHuntState, a: usize, f: &mut dyn FnMut(f64, Step, f64)) {
        if a == ATTACK && self.in_range(s.agent, s.enemy) {
            f(1.0, Step::Killed, self.c.kill_reward);
            return;
        }
        let agent = if a < ATTACK { self.move_agent(s.agent, a) } else { s.agent };
        let aware = s.aware || a == PING;
        let opts = Self::enemy_options(s.goal);
        let mut emit = |p: f64, d: (i32, i32)| match self.displace(s.enemy, s.goal, d) {
            Some(enemy) => f(
                p,
                Step::Continue(SubHuntState {
                    agent,
                    enemy,
                    aware,
                    ..*s
                }),
                self.c.step_reward,
            ),
            None => f(p, Step::Escaped(s.enemy), self.c.escape_reward),
        };
        if aware {
            emit(1.0, opts[self.aware_choice(agent, s.enemy, s.goal)]);
        } else {
            emit(0.5, opts[0]);
            emit(0.25, opts[1]);
            emit(0.25, opts[2]);
        }
    }

    /// Mean sonar reading: unit energy in the sector holding the enemy's
    /// bearing, nothing elsewhere; all zeros when the cells coincide.
    pub fn sonar_mean(&self, agent: (u8, u8), enemy: (u8, u8)) -> Vec<f64> {
        let k = self.c.sectors;
        let mut m = vec![0.0; k];
        if agent == enemy {
            return m;
        }
        // Bearing measured clockwise from north.
        let dr = enemy.0 as f64 - agent.0 as f64;
        let dc = enemy.1 as f64 - agent.1 as f64;
        let bearing = dc.atan2(-dr).rem_euclid(std::f64::consts::TAU);
        let width = std::f64::consts::TAU / k as f64;
        let sector = ((bearing / width + 0.5).floor() as usize) % k;
        m[sector] = 1.0;
        m
    }

    fn sonar_sd(&self, a: &Action) -> f64 {
        if a.index() == Some(PING) {
            self.c.ping_sd
        } else {
            self.c.passive_sd
        }
    }

    fn cell_index(&self, p: (u8, u8)) -> usize {
        p.0 as usize * self.c.size + p.1 as usize
    }

    fn cell_of(&self, i: usize) -> (u8, u8) {
        ((i / self.c.size) as u8, (i % self.c.size) as u8)
    }

    fn encode(&self, s: &SubHuntState) -> usize {
        let cells = self.c.size * self.c.size;
        ((self.cell_index(s.agent) * cells + self.cell_index(s.enemy)) * 2 + s.aware as usize) * 4
            + s.goal as usize
    }

    fn decode(&self, i: usize) -> SubHuntState {
        let cells = self.c.size * self.c.size;
        let goal = (i % 4) as u8;
        let aware = (i / 4) % 2 == 1;
        let pair = i / 8;
        SubHuntState {
            agent: self.cell_of(pair / cells),
            enemy: self.cell_of(pair % cells),
            aware,
            goal,
            terminal: false,
        }
    }
}

impl Pomdp for SubHunt {
    type State = SubHuntState;
    type Obs = SonarObs;

    fn name(&self) -> &'static str {
        "subhunt"
    }

    fn discount(&self) -> f64 {
        self.c.discount
    }

    fn horizon(&self) -> usize {
        self.c.horizon
    }

    fn reward_bound(&self) -> f64 {
        self.c
            .kill_reward
            .abs()
            .max(self.c.escape_reward.abs())
            .max(self.c.step_reward.abs())
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(NUM_ACTIONS)
    }

    /// Agent anywhere; enemy on the edge opposite its goal, unaware.
    fn initial_state(&self, rng: &mut SeededRng) -> SubHuntState {
        let n = self.c.size as u8;
        let agent = (rng.random_range(0..n), rng.random_range(0..n));
        let goal = rng.random_range(0..4u8);
        let lateral = rng.random_range(0..n);
        let enemy = match goal {
            0 => (n - 1, lateral),
            1 => (lateral, 0),
            2 => (0, lateral),
            _ => (lateral, n - 1),
        };
        SubHuntState {
            agent,
            enemy,
            aware: false,
            goal,
            terminal: false,
        }
    }

    fn is_terminal(&self, s: &SubHuntState) -> bool {
        s.terminal
    }

    fn generate(&self, s: &SubHuntState, a: &Action, rng: &mut SeededRng) -> Transition<SubHuntState, SonarObs> {
        let ai = a.index().expect("discrete action");
        let (next, reward) = if s.terminal {
            (*s, 0.0)
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = None;
            self.outcomes(s, ai, &mut |p, step, r| {
                acc += p;
                if chosen.is_none() && u < acc {
                    chosen = Some((step, r));
                }
            });
            // Probabilities are dyadic and sum to exactly one, so `u < acc`
            // always fires on the last outcome.
            let (step, r) = chosen.expect("outcome probabilities sum to one");
            let next = match step {
                Step::Continue(n) => n,
                Step::Killed => SubHuntState {
                    terminal: true,
                    ..*s
                },
                Step::Escaped(enemy) => SubHuntState {
                    enemy,
                    terminal: true,
                    ..*s
                },
            };
            (next, r)
        };
        let sd = self.sonar_sd(a);
        let noise = Normal::new(0.0, sd).expect("positive sd");
        let obs = self
            .sonar_mean(next.agent, next.enemy)
            .into_iter()
            .map(|m| m + noise.sample(rng))
            .collect();
        Transition {
            next_state: next,
            observation: obs,
            reward,
        }
    }

    fn obs_density(&self, a: &Action, next: &SubHuntState, o: &SonarObs) -> f64 {
        let sd = self.sonar_sd(a);
        self.sonar_mean(next.agent, next.enemy)
            .iter()
            .zip(o)
            .map(|(m, x)| normal_pdf(*x, *m, sd))
            .product()
    }

    fn state_index(&self, s: &SubHuntState) -> Option<usize> {
        (!s.terminal).then(|| self.encode(s))
    }

    fn finite_mdp(&self) -> Option<&dyn FiniteMdp> {
        Some(self)
    }
}

impl FiniteMdp for SubHunt {
    fn num_states(&self) -> usize {
        let cells = self.c.size * self.c.size;
        cells * cells * 2 * 4
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn discount(&self) -> f64 {
        self.c.discount
    }

    fn for_each_outcome(&self, s: usize, a: usize, f: &mut dyn FnMut(Option<usize>, f64, f64)) {
        let state = self.decode(s);
        self.outcomes(&state, a, &mut |p, step, r| match step {
            Step::Continue(n) => f(Some(self.encode(&n)), p, r),
            Step::Killed | Step::Escaped(_) => f(None, p, r),
        });
    }
}
