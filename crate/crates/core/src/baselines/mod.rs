//! Baseline belief policies: QMDP, uniform random, and the Light Dark
//! certainty-equivalent heuristic. They serve both as benchmark rows and as
//! rollout policies inside the tree search.

mod heuristic;
mod qmdp;

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::ParticleBelief;
use crate::error::{Error, Result};
use crate::model::{Action, ActionSpace, Pomdp};
use crate::rng::SeededRng;

pub use heuristic::{lightdark_heuristic_action, LightDarkHeuristic, LOCALIZED_STD};
pub use qmdp::{solve_qmdp, QmdpPolicy, QmdpTable, DEFAULT_TOLERANCE};

/// A policy that maps a particle belief to an action.
pub trait BeliefPolicy<M: Pomdp>: Send + Sync {
    fn name(&self) -> &'static str;

    fn act(&self, belief: &ParticleBelief<M::State>, model: &M, rng: &mut SeededRng) -> Result<Action>;

    /// Whether `act` reads the belief at all. Callers may skip belief
    /// maintenance for policies that do not.
    fn uses_belief(&self) -> bool {
        true
    }
}

/// Registered policy names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyId {
    Qmdp,
    Random,
    #[serde(rename = "lightdark-heuristic")]
    LightDarkHeuristic,
}

impl PolicyId {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyId::Qmdp => "qmdp",
            PolicyId::Random => "random",
            PolicyId::LightDarkHeuristic => "lightdark-heuristic",
        }
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qmdp" => Ok(PolicyId::Qmdp),
            "random" => Ok(PolicyId::Random),
            "lightdark-heuristic" => Ok(PolicyId::LightDarkHeuristic),
            other => Err(Error::config(format!("unknown policy `{other}`"))),
        }
    }
}

/// Uniform draw from the model's action space.
///
/// Discrete spaces draw an index uniformly; continuous spaces defer to the
/// model's own sampler.
pub fn random_action<M: Pomdp>(model: &M, rng: &mut SeededRng) -> Result<Action> {
    match model.action_space() {
        ActionSpace::Discrete(0) => Err(Error::config("model has no actions")),
        ActionSpace::Discrete(n) => Ok(Action::Discrete(rng.random_range(0..n))),
        ActionSpace::Continuous => model
            .sample_action(rng)
            .ok_or_else(|| Error::config(format!("{} has no action sampler", model.name()))),
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RandomPolicy;

impl<M: Pomdp> BeliefPolicy<M> for RandomPolicy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn act(&self, _belief: &ParticleBelief<M::State>, model: &M, rng: &mut SeededRng) -> Result<Action> {
        random_action(model, rng)
    }

    fn uses_belief(&self) -> bool {
        false
    }
}

/// Index of the largest value; ties resolve to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Transition;

    struct Arms(usize);

    impl Pomdp for Arms {
        type State = ();
        type Obs = ();
        fn name(&self) -> &'static str {
            "arms"
        }
        fn discount(&self) -> f64 {
            0.9
        }
        fn horizon(&self) -> usize {
            1
        }
        fn reward_bound(&self) -> f64 {
            0.0
        }
        fn action_space(&self) -> ActionSpace {
            ActionSpace::Discrete(self.0)
        }
        fn initial_state(&self, _rng: &mut SeededRng) {}
        fn is_terminal(&self, _s: &()) -> bool {
            false
        }
        fn generate(&self, _s: &(), _a: &Action, _rng: &mut SeededRng) -> Transition<(), ()> {
            Transition {
                next_state: (),
                observation: (),
                reward: 0.0,
            }
        }
        fn obs_density(&self, _a: &Action, _n: &(), _o: &()) -> f64 {
            1.0
        }
    }

    #[test]
    fn single_action_is_always_chosen() {
        let mut rng = SeededRng::new(0);
        for _ in 0..10 {
            assert_eq!(random_action(&Arms(1), &mut rng).unwrap(), Action::Discrete(0));
        }
    }

    #[test]
    fn random_frequencies_within_three_sigma() {
        let mut rng = SeededRng::new(3);
        let n = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            counts[random_action(&Arms(5), &mut rng).unwrap().index().unwrap()] += 1;
        }
        let sigma = (n as f64 * 0.2 * 0.8).sqrt();
        for c in counts {
            assert!((c as f64 - 0.2 * n as f64).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn policy_ids_round_trip_names() {
        for id in [PolicyId::Qmdp, PolicyId::Random, PolicyId::LightDarkHeuristic] {
            assert_eq!(id.as_str().parse::<PolicyId>().unwrap(), id);
        }
        assert!("greedy".parse::<PolicyId>().unwrap_err().is_config());
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }
}
