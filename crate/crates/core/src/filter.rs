//! Closed-loop bootstrap particle filter, run between planning calls and
//! independent of any planner state.

use serde::{Deserialize, Serialize};

use crate::belief::{propagate_weighted, ParticleBelief};
use crate::error::{Error, Result};
use crate::model::{Action, Pomdp};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    /// Particle count `N_f`.
    pub particles: usize,
    /// Resample when `ESS < resample_threshold * N_f`.
    pub resample_threshold: f64,
    /// Scale passed to [`Pomdp::perturb`] after resampling; 0 disables.
    pub rejuvenation: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            particles: 10_000,
            resample_threshold: 0.5,
            rejuvenation: 0.0,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::config("filter.particles must be at least 1"));
        }
        if !(self.resample_threshold > 0.0 && self.resample_threshold <= 1.0) {
            return Err(Error::config("filter.resample_threshold must lie in (0, 1]"));
        }
        if !(self.rejuvenation >= 0.0 && self.rejuvenation.is_finite()) {
            return Err(Error::config("filter.rejuvenation must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FilterStep<S> {
    pub belief: ParticleBelief<S>,
    /// The observation had zero likelihood under every particle.
    pub degenerate: bool,
    pub resampled: bool,
}

/// Advance, reweight by the received observation, and resample when the
/// effective sample size falls below the configured fraction.
pub fn update<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    a: &Action,
    o: &M::Obs,
    model: &M,
    cfg: &FilterConfig,
    rng: &mut SeededRng,
) -> FilterStep<M::State> {
    let t = propagate_weighted(belief, a, o, model, rng);
    let n = t.belief.len();
    if t.belief.effective_sample_size() < cfg.resample_threshold * n as f64 {
        let mut resampled = t.belief.resample(rng);
        if cfg.rejuvenation > 0.0 {
            let states = resampled
                .states()
                .iter()
                .map(|s| model.perturb(s, cfg.rejuvenation, rng))
                .collect();
            resampled = ParticleBelief::uniform(states);
        }
        FilterStep {
            belief: resampled,
            degenerate: t.degenerate,
            resampled: true,
        }
    } else {
        FilterStep {
            belief: t.belief,
            degenerate: t.degenerate,
            resampled: false,
        }
    }
}
