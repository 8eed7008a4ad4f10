//! The problem-model abstraction shared by every environment and solver.
//!
//! A POMDP is exposed through a generative sampler `G(s, a) -> (s', o, r)`
//! and a pointwise observation density `Z(o | a, s')`. Explicit transition
//! densities are never required by the planners; discrete environments may
//! additionally expose a [`FiniteMdp`] view for value iteration.

use std::fmt::{self, Debug};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// An action, either an index into a finite list or a raw continuous vector.
///
/// Continuous actions carry up to two components; VDP Tag uses
/// `[heading, look]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous([f64; 2]),
}

impl Action {
    pub fn index(&self) -> Option<usize> {
        match *self {
            Action::Discrete(i) => Some(i),
            Action::Continuous(_) => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Discrete(i) => write!(f, "#{i}"),
            Action::Continuous([x, y]) => write!(f, "({x:.4}, {y:.4})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionSpace {
    /// Actions `0..n`.
    Discrete(usize),
    /// Actions drawn from [`Pomdp::sample_action`].
    Continuous,
}

impl ActionSpace {
    pub fn num_actions(&self) -> Option<usize> {
        match *self {
            ActionSpace::Discrete(n) => Some(n),
            ActionSpace::Continuous => None,
        }
    }
}

/// One draw of the generative model.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition<S, O> {
    pub next_state: S,
    pub observation: O,
    pub reward: f64,
}

/// A POMDP given by a generative model and an observation density.
///
/// Implementations are immutable after construction; all randomness comes
/// from the caller's [`SeededRng`], so identical RNG state and inputs give
/// identical outputs.
pub trait Pomdp: Sync + Send {
    type State: Clone + Debug + Send + Sync;
    type Obs: Clone + Debug + Send + Sync;

    fn name(&self) -> &'static str;

    fn discount(&self) -> f64;

    /// Maximum episode length.
    fn horizon(&self) -> usize;

    /// Upper bound on `|r|` for any sampled transition.
    fn reward_bound(&self) -> f64;

    fn action_space(&self) -> ActionSpace;

    /// Uniform draw from a continuous action space. `None` for discrete models.
    fn sample_action(&self, _rng: &mut SeededRng) -> Option<Action> {
        None
    }

    /// Draw from the initial belief `b0`.
    fn initial_state(&self, rng: &mut SeededRng) -> Self::State;

    /// Terminal states are absorbing with zero reward.
    fn is_terminal(&self, s: &Self::State) -> bool;

    /// Sample `G(s, a)`. The action must already be valid (see [`step`]).
    fn generate(&self, s: &Self::State, a: &Action, rng: &mut SeededRng)
        -> Transition<Self::State, Self::Obs>;

    /// Evaluate `Z(o | a, s')`. Need not be normalised over `o`.
    fn obs_density(&self, a: &Action, next: &Self::State, o: &Self::Obs) -> f64;

    fn check_action(&self, a: &Action) -> Result<()> {
        let bad = |reason: String| Error::InvalidAction {
            model: self.name(),
            action: a.to_string(),
            reason,
        };
        match (self.action_space(), a) {
            (ActionSpace::Discrete(n), Action::Discrete(i)) if *i < n => Ok(()),
            (ActionSpace::Discrete(n), Action::Discrete(_)) => {
                Err(bad(format!("index out of range 0..{n}")))
            }
            (ActionSpace::Continuous, Action::Continuous(v)) if v.iter().all(|x| x.is_finite()) => {
                Ok(())
            }
            (ActionSpace::Continuous, Action::Continuous(_)) => {
                Err(bad("non-finite component".into()))
            }
            (space, _) => Err(bad(format!("wrong action kind for {space:?}"))),
        }
    }

    /// Position of `s` in the model's enumerated state space, if any.
    fn state_index(&self, _s: &Self::State) -> Option<usize> {
        None
    }

    /// Fully observable view for value iteration, if the model is enumerable.
    fn finite_mdp(&self) -> Option<&dyn FiniteMdp> {
        None
    }

    /// Small random perturbation used by the closed-loop filter to rejuvenate
    /// particles after resampling. Identity unless a model opts in.
    fn perturb(&self, s: &Self::State, _scale: f64, _rng: &mut SeededRng) -> Self::State {
        s.clone()
    }
}

/// Validated generative step.
pub fn step<M: Pomdp>(
    model: &M,
    s: &M::State,
    a: &Action,
    rng: &mut SeededRng,
) -> Result<Transition<M::State, M::Obs>> {
    model.check_action(a)?;
    Ok(model.generate(s, a, rng))
}

/// `sum_t gamma^t r_t`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut weight = 1.0;
    for r in rewards {
        total += weight * r;
        weight *= gamma;
    }
    total
}

/// An enumerable, fully observable MDP with explicit transition outcomes.
pub trait FiniteMdp: Sync {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn discount(&self) -> f64;

    /// Calls `f(next, probability, reward)` for every outcome of `(s, a)`.
    /// `next == None` means the episode terminates with that reward.
    fn for_each_outcome(&self, s: usize, a: usize, f: &mut dyn FnMut(Option<usize>, f64, f64));
}
