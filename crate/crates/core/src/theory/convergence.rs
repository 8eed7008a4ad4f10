//! Convergence of Sparse Sampling-ω root Q estimates to the exact POMDP
//! optimum on tiny toys, as the width `C` grows.

use crate::baselines::argmax;
use crate::belief::init_belief;
use crate::error::Result;
use crate::rng::{episode_seed, SeededRng};
use crate::ssw::{root_q_values, SswConfig};

use super::toy::{exact_pomdp_q, TinyPomdp};

/// Width grid used by the shipped experiments.
pub const DEFAULT_C_GRID: [usize; 4] = [4, 16, 64, 256];

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub c: usize,
    /// `max_a |Q_hat(b0_bar, a) - Q*(b0, a)|`, one entry per seed.
    pub errors: Vec<f64>,
    pub median_error: f64,
    /// Seeds whose greedy root action equals the exact optimal action.
    pub agreements: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub exact_q: Vec<f64>,
    pub optimal_action: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Median error never increases along the width grid.
    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].median_error <= w[0].median_error)
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Root Q estimates of one seeded Sparse Sampling-ω run at width `c`.
pub fn ssw_root_q(toy: &TinyPomdp, c: usize, rng: &mut SeededRng) -> Result<Vec<f64>> {
    let cfg = SswConfig::for_model(toy, c, toy.depth());
    let belief = init_belief(toy, c, rng);
    root_q_values(&belief, &cfg, toy, rng)
}

/// For each width and seed, the worst root-action error against the exact
/// optimum. Seed `k` uses the stream `episode_seed(master_seed, k)`, split
/// per width.
pub fn coupled_convergence_experiment(
    toy: &TinyPomdp,
    c_grid: &[usize],
    seeds: usize,
    master_seed: u64,
) -> Result<ConvergenceReport> {
    let exact_q = exact_pomdp_q(toy)?;
    let optimal_action = argmax(&exact_q);
    let mut rows = Vec::with_capacity(c_grid.len());
    for &c in c_grid {
        let mut errors = Vec::with_capacity(seeds);
        let mut agreements = 0;
        for k in 0..seeds {
            let mut rng = SeededRng::new(episode_seed(master_seed, k as u64)).substream(c as u64);
            let q = ssw_root_q(toy, c, &mut rng)?;
            let err = q
                .iter()
                .zip(&exact_q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            errors.push(err);
            if argmax(&q) == optimal_action {
                agreements += 1;
            }
        }
        rows.push(ConvergenceRow {
            c,
            median_error: median(&errors),
            errors,
            agreements,
        });
    }
    Ok(ConvergenceReport {
        exact_q,
        optimal_action,
        rows,
    })
}

/// Median over seeds of `max_a |Q_hat_1 - Q_hat_2|` for two independent runs
/// at width `c`. Both runs estimate the same particle-belief optimum, so this
/// stays on the scale of their distance to the exact value.
pub fn independent_run_gap(toy: &TinyPomdp, c: usize, seeds: usize, master_seed: u64) -> Result<f64> {
    let mut gaps = Vec::with_capacity(seeds);
    for k in 0..seeds {
        let base = SeededRng::new(episode_seed(master_seed, k as u64));
        let q1 = ssw_root_q(toy, c, &mut base.substream(1 << 32 | c as u64))?;
        let q2 = ssw_root_q(toy, c, &mut base.substream(2 << 32 | c as u64))?;
        gaps.push(q1.iter().zip(&q2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    Ok(median(&gaps))
}
