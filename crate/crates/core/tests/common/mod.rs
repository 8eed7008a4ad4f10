//! Shared oracles for the integration and acceptance targets.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Normal};

use pbmdp::envs::vdptag::rk4_step;
use pbmdp::theory::TinyPomdp;
use pbmdp::{Action, ActionSpace, Pomdp, SeededRng, Transition};

/// Scalar walk `s' = s + a - 1 + N(0, 0.5^2)`, observation `s' + N(0, 1)`,
/// reward `-|s|`.
pub struct Walk;

fn pdf(x: f64, m: f64, sd: f64) -> f64 {
    (-(x - m) * (x - m) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

impl Pomdp for Walk {
    type State = f64;
    type Obs = f64;
    fn name(&self) -> &'static str {
        "walk"
    }
    fn discount(&self) -> f64 {
        0.9
    }
    fn horizon(&self) -> usize {
        10
    }
    fn reward_bound(&self) -> f64 {
        f64::INFINITY
    }
    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(3)
    }
    fn initial_state(&self, rng: &mut SeededRng) -> f64 {
        rng.random_range(-2.0..2.0)
    }
    fn is_terminal(&self, _s: &f64) -> bool {
        false
    }
    fn generate(&self, s: &f64, a: &Action, rng: &mut SeededRng) -> Transition<f64, f64> {
        let next = s + a.index().unwrap() as f64 - 1.0 + Normal::new(0.0, 0.5).unwrap().sample(rng);
        Transition {
            next_state: next,
            observation: next + Normal::new(0.0, 1.0).unwrap().sample(rng),
            reward: -s.abs(),
        }
    }
    fn obs_density(&self, _a: &Action, next: &f64, o: &f64) -> f64 {
        pdf(*o, *next, 1.0)
    }
}

/// Straight transcription of the particle-belief transition, kept apart
/// from the library code on purpose.
pub fn reference_gen_pf<M: Pomdp>(
    states: &[M::State],
    weights: &[f64],
    a: &Action,
    model: &M,
    rng: &mut SeededRng,
) -> (Vec<M::State>, Vec<f64>, f64) {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut cum = 0.0;
    let mut pick = None;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            cum += w;
            last = i;
            if pick.is_none() && u < cum {
                pick = Some(i);
            }
        }
    }
    let o = model.generate(&states[pick.unwrap_or(last)], a, rng).observation;

    let mut next = Vec::new();
    let mut new_w = Vec::new();
    let (mut r_sum, mut w_sum) = (0.0, 0.0);
    for (s, w) in states.iter().zip(weights) {
        let t = model.generate(s, a, rng);
        r_sum += w * t.reward;
        w_sum += w;
        let mut z = model.obs_density(a, &t.next_state, &o);
        if z < 1e-300 || z.is_nan() {
            z = 0.0;
        }
        new_w.push(w * z);
        next.push(t.next_state);
    }
    let t: f64 = new_w.iter().sum();
    if !(t > 0.0) {
        let c = new_w.len() as f64;
        new_w.iter_mut().for_each(|w| *w = 1.0 / c);
    } else if t < 1e-150 {
        let k = -t.log2().floor() as i32;
        new_w.iter_mut().for_each(|w| *w *= 2f64.powi(k));
    }
    (next, new_w, r_sum / w_sum)
}

pub fn random_tiny(seed: u64, ns: usize, na: usize, no: usize) -> TinyPomdp {
    let mut rng = SeededRng::new(seed);
    let mut row = |n: usize| {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let t: f64 = raw.iter().sum();
        raw.iter().map(|x| x / t).collect::<Vec<f64>>()
    };
    let trans = (0..ns).map(|_| (0..na).map(|_| row(ns)).collect()).collect();
    let obs = (0..na).map(|_| (0..ns).map(|_| row(no)).collect()).collect();
    let b0 = row(ns);
    let mut rng = SeededRng::new(seed ^ 0xabcd);
    let reward = (0..ns)
        .map(|_| (0..na).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    TinyPomdp::new(trans, obs, reward, b0, 0.9, 3).unwrap()
}

fn integrate(mut p: [f64; 2], mu: f64, dt: f64, t_end: f64) -> [f64; 2] {
    let n = (t_end / dt).round() as usize;
    for _ in 0..n {
        p = rk4_step(p, mu, dt);
    }
    p
}

/// Global error at `dt = 0.02` over error at `0.01`, against a `1e-4` run,
/// on the Van der Pol field from `(1, 0)` with `mu = 2` up to `t = 1`. A
/// fourth-order method gives about 16.
pub fn rk4_error_ratio() -> f64 {
    let (mu, t) = (2.0, 1.0);
    let reference = integrate([1.0, 0.0], mu, 1e-4, t);
    let err = |dt: f64| {
        let p = integrate([1.0, 0.0], mu, dt, t);
        ((p[0] - reference[0]).powi(2) + (p[1] - reference[1]).powi(2)).sqrt()
    };
    err(0.02) / err(0.01)
}
