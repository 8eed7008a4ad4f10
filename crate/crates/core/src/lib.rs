//! Online POMDP planning over the particle belief MDP.
//!
//! The crate provides a generative-model trait, weighted particle beliefs
//! with the GenPF transition, a bootstrap filter, two planners (Sparse
//! Sampling-ω and Sparse-PFT), baseline policies, four benchmark domains,
//! empirical checks of the sampling guarantees, and an experiment harness.

pub mod baselines;
pub mod bench;
pub mod belief;
pub mod envs;
pub mod error;
pub mod filter;
pub mod model;
pub mod pft;
pub mod rng;
pub mod ssw;
pub mod theory;

pub use belief::{gen_pf, init_belief, BeliefTransition, ParticleBelief};
pub use error::{Error, Result};
pub use model::{Action, ActionSpace, FiniteMdp, Pomdp, Transition};
pub use rng::{episode_seed, SeededRng};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/beliefs.md")]
    mod beliefs {}
    #[doc = include_str!("../../../book/src/sparse-pft.md")]
    mod sparse_pft {}
    #[doc = include_str!("../../../book/src/sparse-sampling.md")]
    mod sparse_sampling {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/sampling-checks.md")]
    mod sampling_checks {}
}
