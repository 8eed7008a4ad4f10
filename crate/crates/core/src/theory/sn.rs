//! Self-normalized importance sampling on discrete distributions, its
//! concentration experiment, and the sample-size constants of the
//! Sparse Sampling-ω guarantee.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

const SUM_TOL: f64 = 1e-12;

/// Target `p` and proposal `q` on a shared finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistPair {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl DiscreteDistPair {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::Precondition("supports must be non-empty and equal".into()));
        }
        for (name, d) in [("p", &p), ("q", &q)] {
            if d.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Precondition(format!("{name} has a negative or non-finite mass")));
            }
            let total: f64 = d.iter().sum();
            if (total - 1.0).abs() > SUM_TOL {
                return Err(Error::Precondition(format!("{name} sums to {total}, not 1")));
            }
        }
        if p.iter().zip(&q).any(|(p, q)| *q == 0.0 && *p > 0.0) {
            return Err(Error::Precondition(
                "p is not absolutely continuous with respect to q".into(),
            ));
        }
        Ok(DiscreteDistPair { p, q })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Importance weight `p(x) / q(x)`; zero off the proposal's support.
    pub fn weight(&self, x: usize) -> f64 {
        if self.q[x] > 0.0 {
            self.p[x] / self.q[x]
        } else {
            0.0
        }
    }

    /// `E_p[f]`.
    pub fn target_mean(&self, f: &[f64]) -> f64 {
        self.p.iter().zip(f).map(|(p, f)| p * f).sum()
    }

    /// One draw from `q` by inversion.
    pub fn sample_q(&self, rng: &mut SeededRng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, q) in self.q.iter().enumerate() {
            acc += q;
            if u < acc {
                return i;
            }
        }
        // Rounding can leave `acc` a hair below one; fall back to the last
        // point in the support.
        self.q.iter().rposition(|q| *q > 0.0).unwrap_or(0)
    }
}

/// Infinite-order Rényi divergence: the largest importance weight over the
/// proposal's support. Always at least one.
pub fn renyi_inf(pair: &DiscreteDistPair) -> f64 {
    (0..pair.len())
        .filter(|&x| pair.q[x] > 0.0)
        .map(|x| pair.weight(x))
        .fold(0.0, f64::max)
}

/// Self-normalized estimate `sum w_i f(x_i) / sum w_i` from given samples and weights.
pub fn sn_from_weights(weights: &[f64], values: &[f64]) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate);
    }
    // Centred on the first value so constant functions come back exactly.
    let base = values.first().copied().unwrap_or(0.0);
    let shift: f64 = weights.iter().zip(values).map(|(w, v)| w * (v - base)).sum();
    Ok(base + shift / total)
}

/// Self-normalized importance-sampling estimate of `E_p[f]` from `n` i.i.d.
/// draws of `q`.
pub fn sn_estimate(pair: &DiscreteDistPair, f: &[f64], n: usize, rng: &mut SeededRng) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("sample size must be at least 1".into()));
    }
    if f.len() != pair.len() {
        return Err(Error::Precondition("f must be defined on the whole support".into()));
    }
    let mut weights = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let x = pair.sample_q(rng);
        weights.push(pair.weight(x));
        values.push(f[x]);
    }
    sn_from_weights(&weights, &values)
}

/// `t(lambda, N) = lambda / (|f|_inf d_inf) - 1 / sqrt(N)`.
pub fn concentration_t(lambda: f64, f_sup: f64, d_inf: f64, n: usize) -> f64 {
    lambda / (f_sup * d_inf) - 1.0 / (n as f64).sqrt()
}

/// Tail bound `3 exp(-N t^2)`.
pub fn concentration_bound(n: usize, t: f64) -> f64 {
    3.0 * (-(n as f64) * t * t).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Outcome {
    pub violation_rate: f64,
    pub bound: f64,
    pub t: f64,
    pub degenerate_trials: usize,
}

impl Theorem1Outcome {
    pub fn passed(&self) -> bool {
        self.violation_rate <= self.bound
    }
}

/// Fraction of `trials` in which the SN estimate misses `E_p[f]` by more than
/// `lambda`, next to the concentration bound. Degenerate trials count as
/// misses.
pub fn theorem1_experiment(
    pair: &DiscreteDistPair,
    f: &[f64],
    n: usize,
    lambda: f64,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<Theorem1Outcome> {
    if n == 0 || trials == 0 {
        return Err(Error::Precondition("need at least one sample and one trial".into()));
    }
    let f_sup = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let d_inf = renyi_inf(pair);
    if f_sup == 0.0 {
        return Err(Error::Precondition("f is identically zero".into()));
    }
    let floor = f_sup * d_inf / (n as f64).sqrt();
    if !(lambda > floor) {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} must exceed |f| d_inf / sqrt(N) = {floor}"
        )));
    }
    let truth = pair.target_mean(f);
    let mut misses = 0usize;
    let mut degenerate = 0usize;
    for _ in 0..trials {
        match sn_estimate(pair, f, n, rng) {
            Ok(est) if (est - truth).abs() <= lambda => {}
            Ok(_) => misses += 1,
            Err(_) => {
                misses += 1;
                degenerate += 1;
            }
        }
    }
    let t = concentration_t(lambda, f_sup, d_inf, n);
    Ok(Theorem1Outcome {
        violation_rate: misses as f64 / trials as f64,
        bound: concentration_bound(n, t),
        t,
        degenerate_trials: degenerate,
    })
}

/// Width, confidence and accuracy constants of the coupled Sparse Sampling-ω guarantee.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem2Constants {
    pub lambda: f64,
    pub delta: f64,
    pub c: f64,
    pub v_max: f64,
}

/// Evaluate `lambda`, `delta` and the sample width `C` for target accuracy
/// `epsilon`, with `V_max = R_max / (1 - gamma)`.
pub fn theorem2_constants(
    epsilon: f64,
    gamma: f64,
    r_max: f64,
    d_inf_max: f64,
    depth: usize,
    num_actions: usize,
) -> Result<Theorem2Constants> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Precondition("gamma must lie in [0, 1)".into()));
    }
    if depth == 0 || num_actions == 0 || !(r_max > 0.0) {
        return Err(Error::Precondition("need D >= 1, |A| >= 1 and R_max > 0".into()));
    }
    let one_minus = 1.0 - gamma;
    let d = depth as f64;
    let v_max = r_max / one_minus;
    let lambda = epsilon * one_minus * one_minus / 8.0;
    let delta = lambda / (v_max * d * one_minus * one_minus);
    let first = (4.0 * v_max * d_inf_max / lambda).powi(2);
    let a_pow = (num_actions as f64).powf((d + 1.0) / d);
    let log_arg = 24.0 * a_pow * v_max * v_max * d / (lambda * lambda);
    let second = 64.0 * v_max * v_max / (lambda * lambda) * (d * log_arg.ln() + (1.0 / delta).ln());
    Ok(Theorem2Constants {
        lambda,
        delta,
        c: first.max(second),
        v_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: &[f64], q: &[f64]) -> DiscreteDistPair {
        DiscreteDistPair::new(p.to_vec(), q.to_vec()).unwrap()
    }

    #[test]
    fn renyi_examples() {
        assert_eq!(renyi_inf(&pair(&[0.25; 4], &[0.25; 4])), 1.0);
        assert_eq!(renyi_inf(&pair(&[0.5, 0.5], &[0.25, 0.75])), 2.0);
        assert_eq!(renyi_inf(&pair(&[1.0, 0.0], &[0.5, 0.5])), 2.0);
    }

    #[test]
    fn absolute_continuity_is_enforced() {
        assert!(DiscreteDistPair::new(vec![0.5, 0.5], vec![1.0, 0.0]).is_err());
        assert!(DiscreteDistPair::new(vec![0.5, 0.4], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn constant_function_is_exact() {
        let pr = pair(&[0.5, 0.25, 0.25], &[0.125, 0.375, 0.5]);
        let mut rng = SeededRng::new(1);
        for n in [1, 3, 50] {
            assert_eq!(sn_estimate(&pr, &[2.5; 3], n, &mut rng).unwrap(), 2.5);
        }
    }

    #[test]
    fn hand_weighted_sample() {
        // Sample {0, 1, 2} with weights 4, 2/3, 1/2 and f = (1, 2, 3):
        // (4 + 4/3 + 3/2) / (4 + 2/3 + 1/2) = (41/6) / (31/6) = 41/31.
        let pr = pair(&[0.5, 0.25, 0.25], &[0.125, 0.375, 0.5]);
        let w: Vec<f64> = (0..3).map(|x| pr.weight(x)).collect();
        let est = sn_from_weights(&w, &[1.0, 2.0, 3.0]).unwrap();
        assert!((est - 41.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_weights_are_flagged() {
        assert!(matches!(sn_from_weights(&[0.0, 0.0], &[1.0, 2.0]), Err(Error::Degenerate)));
        let pr = pair(&[1.0, 0.0], &[1e-300, 1.0 - 1e-300]);
        let r = sn_estimate(&pr, &[1.0, 1.0], 1, &mut SeededRng::new(0));
        assert!(matches!(r, Err(Error::Degenerate)));
    }

    #[test]
    fn t_and_bound_examples() {
        assert_eq!(concentration_t(1.0, 1.0, 1.0, 4), 0.5);
        assert!((concentration_bound(100, 0.5) - 3.0 * (-25.0f64).exp()).abs() < 1e-25);
    }

    #[test]
    fn theorem1_refuses_small_lambda() {
        let pr = pair(&[0.5, 0.5], &[0.5, 0.5]);
        let r = theorem1_experiment(&pr, &[1.0, -1.0], 4, 0.5, 10, &mut SeededRng::new(0));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn theorem1_identical_pair_passes() {
        let pr = pair(&[0.25; 4], &[0.25; 4]);
        let f = [1.0, -1.0, 0.5, 0.0];
        let out = theorem1_experiment(&pr, &f, 100, 0.5, 10_000, &mut SeededRng::new(3)).unwrap();
        assert!((out.bound - 3.0 * (-16.0f64).exp()).abs() < 1e-20);
        assert_eq!(out.violation_rate, 0.0);
        assert!(out.passed());
    }

    #[test]
    fn theorem2_simple_components() {
        let c = theorem2_constants(8.0, 0.0, 1.0, 1.0, 1, 1).unwrap();
        assert_eq!(c.lambda, 1.0);
        assert_eq!(c.v_max, 1.0);
        assert_eq!(c.delta, 1.0);
    }
}
