//! Certainty-equivalent controller for Light Dark: steer the posterior mean
//! to the light, and once the belief is concentrated walk it down to the
//! origin and commit.

use super::BeliefPolicy;
use crate::belief::ParticleBelief;
use crate::envs::lightdark::{LightDark, LightDarkState, LIGHTDARK_STEPS};
use crate::error::Result;
use crate::model::Action;
use crate::rng::SeededRng;

/// Posterior standard deviation below which the belief counts as localized.
/// Tuned by simulation against the calibrated Light Dark constants.
pub const LOCALIZED_STD: f64 = 0.3;

const COMMIT: usize = 2;

fn closest_move(target: f64) -> usize {
    // Among the non-commit actions, the step that lands closest to `target`;
    // ties go to the lowest index.
    let mut best = usize::MAX;
    let mut best_gap = f64::INFINITY;
    for (i, step) in LIGHTDARK_STEPS.iter().enumerate() {
        if i == COMMIT {
            continue;
        }
        let gap = (target - *step as f64).abs();
        if gap < best_gap {
            best = i;
            best_gap = gap;
        }
    }
    best
}

/// Heuristic action from the posterior mean and standard deviation.
pub fn lightdark_heuristic_action(mean: f64, std: f64, light: f64) -> Action {
    if std < LOCALIZED_STD {
        if mean.round() == 0.0 {
            Action::Discrete(COMMIT)
        } else {
            Action::Discrete(closest_move(-mean))
        }
    } else {
        Action::Discrete(closest_move(light - mean))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LightDarkHeuristic;

impl BeliefPolicy<LightDark> for LightDarkHeuristic {
    fn name(&self) -> &'static str {
        "lightdark-heuristic"
    }

    fn act(
        &self,
        belief: &ParticleBelief<LightDarkState>,
        model: &LightDark,
        _rng: &mut SeededRng,
    ) -> Result<Action> {
        let mean = belief.weighted_estimate(|s| s.pos as f64);
        let var = belief.weighted_estimate(|s| (s.pos as f64 - mean).powi(2));
        Ok(lightdark_heuristic_action(mean, var.sqrt(), model.light()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_of(a: Action) -> i64 {
        LIGHTDARK_STEPS[a.index().unwrap()]
    }

    #[test]
    fn steers_toward_light_before_localizing() {
        // |3 + a - 10| over a in {-10, -1, 1, 10} is {17, 8, 6, 3}.
        assert_eq!(step_of(lightdark_heuristic_action(3.0, 5.0, 10.0)), 10);
        assert_eq!(step_of(lightdark_heuristic_action(9.2, 5.0, 10.0)), 1);
        assert_eq!(step_of(lightdark_heuristic_action(25.0, 5.0, 10.0)), -10);
    }

    #[test]
    fn descends_then_commits_once_localized() {
        assert_eq!(step_of(lightdark_heuristic_action(10.0, 0.2, 10.0)), -10);
        assert_eq!(step_of(lightdark_heuristic_action(10.0, 0.5, 10.0)), -1);
        assert_eq!(step_of(lightdark_heuristic_action(1.0, 0.0, 10.0)), -1);
        assert_eq!(step_of(lightdark_heuristic_action(-3.0, 0.0, 10.0)), 1);
        assert_eq!(step_of(lightdark_heuristic_action(0.0, 0.0, 10.0)), 0);
        assert_eq!(step_of(lightdark_heuristic_action(0.4, 0.25, 10.0)), 0);
    }
}
