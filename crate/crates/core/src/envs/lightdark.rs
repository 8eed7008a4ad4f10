//! Light Dark: a 1-D integer localization problem. Observations are accurate
//! only near the light, and the agent must commit at the origin.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::constants::LightDarkConstants;
use super::normal_pdf;
use crate::model::{Action, ActionSpace, FiniteMdp, Pomdp, Transition};
use crate::rng::SeededRng;

/// Displacement of each action; index 2 is the commit action.
pub const LIGHTDARK_STEPS: [i64; 5] = [-10, -1, 0, 1, 10];

const COMMIT: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LightDarkState {
    pub pos: i64,
    pub terminal: bool,
}

impl LightDarkState {
    pub fn at(pos: i64) -> Self {
        LightDarkState {
            pos,
            terminal: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LightDark {
    c: LightDarkConstants,
}

impl LightDark {
    pub fn new(c: LightDarkConstants) -> Self {
        LightDark { c }
    }

    pub fn constants(&self) -> &LightDarkConstants {
        &self.c
    }

    pub fn light(&self) -> f64 {
        self.c.light as f64
    }

    /// Observation noise at position `pos`.
    pub fn obs_sd(&self, pos: i64) -> f64 {
        (pos - self.c.light).abs() as f64 + self.c.epsilon
    }

    pub fn reward(&self, pos: i64, a: usize) -> f64 {
        if a == COMMIT {
            if pos == 0 {
                self.c.goal_reward
            } else {
                self.c.wrong_commit_reward
            }
        } else {
            self.c.step_reward
        }
    }

    fn window(&self) -> i64 {
        self.c.mdp_window
    }
}

impl Pomdp for LightDark {
    type State = LightDarkState;
    type Obs = f64;

    fn name(&self) -> &'static str {
        "lightdark"
    }

    fn discount(&self) -> f64 {
        self.c.discount
    }

    fn horizon(&self) -> usize {
        self.c.horizon
    }

    fn reward_bound(&self) -> f64 {
        self.c
            .goal_reward
            .abs()
            .max(self.c.wrong_commit_reward.abs())
            .max(self.c.step_reward.abs())
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(LIGHTDARK_STEPS.len())
    }

    fn initial_state(&self, rng: &mut SeededRng) -> LightDarkState {
        LightDarkState::at(rng.random_range(self.c.prior_min..=self.c.prior_max))
    }

    fn is_terminal(&self, s: &LightDarkState) -> bool {
        s.terminal
    }

    fn generate(&self, s: &LightDarkState, a: &Action, rng: &mut SeededRng) -> Transition<LightDarkState, f64> {
        let ai = a.index().expect("discrete action");
        let (next, reward) = if s.terminal {
            (*s, 0.0)
        } else {
            let next = LightDarkState {
                pos: s.pos + LIGHTDARK_STEPS[ai],
                terminal: ai == COMMIT,
            };
            (next, self.reward(s.pos, ai))
        };
        let noise = Normal::new(0.0, self.obs_sd(next.pos)).expect("positive sd");
        Transition {
            next_state: next,
            observation: next.pos as f64 + noise.sample(rng),
            reward,
        }
    }

    fn obs_density(&self, _a: &Action, next: &LightDarkState, o: &f64) -> f64 {
        normal_pdf(*o, next.pos as f64, self.obs_sd(next.pos))
    }

    fn state_index(&self, s: &LightDarkState) -> Option<usize> {
        let w = self.window();
        (!s.terminal && s.pos.abs() <= w).then(|| (s.pos + w) as usize)
    }

    fn finite_mdp(&self) -> Option<&dyn FiniteMdp> {
        Some(self)
    }

    fn perturb(&self, s: &LightDarkState, scale: f64, rng: &mut SeededRng) -> LightDarkState {
        if s.terminal || scale <= 0.0 {
            return *s;
        }
        let jitter = Normal::new(0.0, scale).expect("positive scale").sample(rng);
        LightDarkState::at(s.pos + jitter.round() as i64)
    }
}

/// Positions `-W..=W`; moves past the window edge are clamped to it.
impl FiniteMdp for LightDark {
    fn num_states(&self) -> usize {
        (2 * self.window() + 1) as usize
    }

    fn num_actions(&self) -> usize {
        LIGHTDARK_STEPS.len()
    }

    fn discount(&self) -> f64 {
        self.c.discount
    }

    fn for_each_outcome(&self, s: usize, a: usize, f: &mut dyn FnMut(Option<usize>, f64, f64)) {
        let w = self.window();
        let pos = s as i64 - w;
        let r = self.reward(pos, a);
        if a == COMMIT {
            f(None, 1.0, r);
        } else {
            let next = (pos + LIGHTDARK_STEPS[a]).clamp(-w, w);
            f(Some((next + w) as usize), 1.0, r);
        }
    }
}
