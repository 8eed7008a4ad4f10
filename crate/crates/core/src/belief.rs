//! Weighted particle beliefs and the GenPF transition kernel.
//!
//! A [`ParticleBelief`] is an ordered list of `(state, weight)` pairs and is
//! the state of the particle belief MDP. Weights are stored unnormalised, as
//! running products of observation densities, and normalised only when read.
//! Particle order is significant: two beliefs holding the same particles in a
//! different order are different PB-MDP states.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Action, Pomdp};
use crate::rng::SeededRng;

/// Densities below this are treated as exactly zero.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// When a propagated weight vector sums below this, it is rescaled by an
/// exact power of two. Ratios, and therefore every normalised quantity,
/// are unchanged bit for bit.
const RESCALE_BELOW: f64 = 1e-150;

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleBelief<S> {
    states: Vec<S>,
    weights: Vec<f64>,
}

impl<S> ParticleBelief<S> {
    pub fn new(states: Vec<S>, weights: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidBelief("no particles".into()));
        }
        if states.len() != weights.len() {
            return Err(Error::InvalidBelief(format!(
                "{} states but {} weights",
                states.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidBelief(format!("weight {w} is not finite and non-negative")));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidBelief("total weight is zero".into()));
        }
        Ok(ParticleBelief { states, weights })
    }

    /// Every particle weighted `1/C`.
    pub fn uniform(states: Vec<S>) -> Self {
        assert!(!states.is_empty(), "a particle belief needs at least one particle");
        let w = 1.0 / states.len() as f64;
        let weights = vec![w; states.len()];
        ParticleBelief { states, weights }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    /// Raw, unnormalised weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, f64)> {
        self.states.iter().zip(self.weights.iter().copied())
    }

    /// Self-normalised estimate `sum w_i f(s_i) / sum w_i`.
    pub fn weighted_estimate(&self, mut f: impl FnMut(&S) -> f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (s, w) in self.iter() {
            if w > 0.0 {
                num += w * f(s);
                den += w;
            }
        }
        num / den
    }

    /// `(sum w)^2 / sum w^2`, always in `[1, C]`.
    pub fn effective_sample_size(&self) -> f64 {
        let (sum, sq) = self
            .weights
            .iter()
            .fold((0.0, 0.0), |(s, q), w| (s + w, q + w * w));
        (sum * sum / sq).clamp(1.0, self.len() as f64)
    }

    /// Index drawn with probability `w_i / sum w` using one uniform against
    /// the cumulative prefix; ties resolve to the lowest index.
    pub fn sample_index(&self, rng: &mut SeededRng) -> usize {
        let u = rng.random::<f64>() * self.total_weight();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w > 0.0 {
                acc += w;
                last_positive = i;
                if u < acc {
                    return i;
                }
            }
        }
        last_positive
    }
}

impl<S: Clone> ParticleBelief<S> {
    /// Systematic (low-variance) resampling to `C` equally weighted particles.
    pub fn resample(&self, rng: &mut SeededRng) -> Self {
        self.resample_to(self.len(), rng)
    }

    /// Systematic resampling to `n` particles.
    pub fn resample_to(&self, n: usize, rng: &mut SeededRng) -> Self {
        let total = self.total_weight();
        let step = total / n as f64;
        let mut pointer = rng.random::<f64>() * step;
        let mut states = Vec::with_capacity(n);
        let mut acc = self.weights[0];
        let mut i = 0;
        for _ in 0..n {
            while pointer >= acc && i + 1 < self.len() {
                i += 1;
                acc += self.weights[i];
            }
            // Skip zero-weight particles that sit exactly on the boundary.
            while self.weights[i] == 0.0 && i + 1 < self.len() {
                i += 1;
                acc += self.weights[i];
            }
            states.push(self.states[i].clone());
            pointer += step;
        }
        ParticleBelief::uniform(states)
    }

    /// `n` i.i.d. weighted draws from this belief, each weighted `1/n`.
    pub fn sample(&self, n: usize, rng: &mut SeededRng) -> Self {
        let states = (0..n)
            .map(|_| self.states[self.sample_index(rng)].clone())
            .collect();
        ParticleBelief::uniform(states)
    }
}

/// `C` i.i.d. draws from the model's initial belief, each weighted `1/C`.
pub fn init_belief<M: Pomdp>(model: &M, c: usize, rng: &mut SeededRng) -> ParticleBelief<M::State> {
    let states = (0..c.max(1)).map(|_| model.initial_state(rng)).collect();
    ParticleBelief::uniform(states)
}

/// Result of one PB-MDP transition.
#[derive(Clone, Debug)]
pub struct BeliefTransition<S> {
    pub belief: ParticleBelief<S>,
    /// Weighted mean reward, computed with the weights before the update.
    pub rho: f64,
    /// All posterior weights were zero and were reset to uniform.
    pub degenerate: bool,
}

impl<S> BeliefTransition<S> {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

fn floor_density(z: f64) -> f64 {
    if z < DENSITY_FLOOR || z.is_nan() {
        0.0
    } else {
        z
    }
}

/// Advance every particle through `G(s_i, a)` and reweight by `Z(o | a, s_i')`.
///
/// This is the shared weight rule of [`gen_pf`] and the closed-loop filter.
/// When every updated weight is zero the weights are reset to uniform and the
/// result is flagged degenerate.
pub fn propagate_weighted<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    a: &Action,
    o: &M::Obs,
    model: &M,
    rng: &mut SeededRng,
) -> BeliefTransition<M::State> {
    let c = belief.len();
    let mut states = Vec::with_capacity(c);
    let mut weights = Vec::with_capacity(c);
    let mut reward_sum = 0.0;
    let mut weight_sum = 0.0;
    for (s, w) in belief.iter() {
        let t = model.generate(s, a, rng);
        reward_sum += w * t.reward;
        weight_sum += w;
        let z = floor_density(model.obs_density(a, &t.next_state, o));
        weights.push(w * z);
        states.push(t.next_state);
    }
    let rho = reward_sum / weight_sum;

    let total: f64 = weights.iter().sum();
    let degenerate = !(total > 0.0);
    if degenerate {
        weights.fill(1.0 / c as f64);
    } else if total < RESCALE_BELOW {
        let k = -total.log2().floor() as i32;
        let scale = 2f64.powi(k);
        for w in &mut weights {
            *w *= scale;
        }
    }
    BeliefTransition {
        belief: ParticleBelief { states, weights },
        rho,
        degenerate,
    }
}

/// GenPF: the generative transition kernel of the particle belief MDP.
///
/// 1. pick one particle `s_o` with probability `w_i / sum w`,
/// 2. draw an observation `o` from `G(s_o, a)`,
/// 3. advance every particle independently through `G(s_i, a)`,
/// 4. set `w_i' = w_i * Z(o | a, s_i')`,
/// 5. report `rho = sum w_i r_i / sum w_i` using the weights before the update.
pub fn gen_pf<M: Pomdp>(
    belief: &ParticleBelief<M::State>,
    a: &Action,
    model: &M,
    rng: &mut SeededRng,
) -> BeliefTransition<M::State> {
    let source = belief.sample_index(rng);
    let o = model.generate(&belief.states[source], a, rng).observation;
    propagate_weighted(belief, a, &o, model, rng)
}

/// True when every positively weighted particle is terminal.
pub fn all_terminal<M: Pomdp>(belief: &ParticleBelief<M::State>, model: &M) -> bool {
    belief
        .iter()
        .all(|(s, w)| w == 0.0 || model.is_terminal(s))
}
