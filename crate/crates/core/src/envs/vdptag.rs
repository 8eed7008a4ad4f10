//! VDP Tag: chase a target drifting on a Van der Pol limit cycle, in the
//! plane, around plus-shaped barriers that block the agent but not the target.

use std::f64::consts::{FRAC_PI_4, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::constants::VdpTagConstants;
use super::normal_pdf;
use crate::error::{Error, Result};
use crate::model::{Action, ActionSpace, Pomdp, Transition};
use crate::rng::SeededRng;

pub type Point = [f64; 2];
pub type RangeObs = [f64; 8];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VdpState {
    pub agent: Point,
    pub target: Point,
    pub terminal: bool,
}

/// Van der Pol vector field `(mu (x - x^3/3 - y), x / mu)`.
pub fn vdp_field(p: Point, mu: f64) -> Point {
    let [x, y] = p;
    [mu * (x - x * x * x / 3.0 - y), x / mu]
}

/// One classical fourth-order Runge-Kutta step of the Van der Pol field.
pub fn rk4_step(p: Point, mu: f64, dt: f64) -> Point {
    let add = |a: Point, k: Point, s: f64| [a[0] + s * k[0], a[1] + s * k[1]];
    let k1 = vdp_field(p, mu);
    let k2 = vdp_field(add(p, k1, dt / 2.0), mu);
    let k3 = vdp_field(add(p, k2, dt / 2.0), mu);
    let k4 = vdp_field(add(p, k3, dt), mu);
    [
        p[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

#[derive(Clone, Debug)]
pub struct VdpTag {
    c: VdpTagConstants,
    discrete: bool,
    barriers: [(Point, Point); 4],
}

/// Ray parameter `t >= 0` where `origin + t * dir` crosses segment `ab`.
fn ray_segment(origin: Point, dir: Point, a: Point, b: Point) -> Option<f64> {
    let e = [b[0] - a[0], b[1] - a[1]];
    let denom = dir[0] * e[1] - dir[1] * e[0];
    if denom.abs() < 1e-15 {
        return None;
    }
    let w = [a[0] - origin[0], a[1] - origin[1]];
    let t = (w[0] * e[1] - w[1] * e[0]) / denom;
    let u = (w[0] * dir[1] - w[1] * dir[0]) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
}

impl VdpTag {
    pub fn new(c: VdpTagConstants, discrete: bool) -> Self {
        let (i, o) = (c.barrier_inner, c.barrier_outer);
        let barriers = [
            ([i, 0.0], [o, 0.0]),
            ([-i, 0.0], [-o, 0.0]),
            ([0.0, i], [0.0, o]),
            ([0.0, -i], [0.0, -o]),
        ];
        VdpTag {
            c,
            discrete,
            barriers,
        }
    }

    pub fn constants(&self) -> &VdpTagConstants {
        &self.c
    }

    pub fn is_discrete(&self) -> bool {
        self.discrete
    }

    pub fn barriers(&self) -> &[(Point, Point); 4] {
        &self.barriers
    }

    /// `(heading, look)` of an action.
    pub fn decode_action(&self, a: &Action) -> (f64, bool) {
        match *a {
            Action::Discrete(i) => {
                let n = self.c.discrete_angles;
                ((i % n) as f64 * TAU / n as f64, i >= n)
            }
            Action::Continuous([angle, look]) => (angle, look >= 0.5),
        }
    }

    /// Agent position after moving along `heading`; a move that would cross
    /// a barrier leaves the agent in place.
    pub fn move_agent(&self, p: Point, heading: f64) -> Point {
        let dir = [heading.cos(), heading.sin()];
        let step = self.c.agent_step;
        let blocked = self
            .barriers
            .iter()
            .any(|(a, b)| ray_segment(p, dir, *a, *b).is_some_and(|t| t <= step));
        if blocked {
            p
        } else {
            [p[0] + step * dir[0], p[1] + step * dir[1]]
        }
    }

    /// Distance from `p` to the nearest barrier along `angle`, capped at the beam range.
    pub fn barrier_range(&self, p: Point, angle: f64) -> f64 {
        let dir = [angle.cos(), angle.sin()];
        self.barriers
            .iter()
            .filter_map(|(a, b)| ray_segment(p, dir, *a, *b))
            .fold(self.c.beam_max, f64::min)
    }

    /// Noise-free beam readings: the beam whose sector holds the target
    /// reads the target distance, the others read barrier range.
    pub fn beam_means(&self, agent: Point, target: Point) -> RangeObs {
        let dx = target[0] - agent[0];
        let dy = target[1] - agent[1];
        let bearing = dy.atan2(dx).rem_euclid(TAU);
        let sector = ((bearing / FRAC_PI_4) as usize).min(7);
        let mut m = [0.0; 8];
        for (k, v) in m.iter_mut().enumerate() {
            *v = if k == sector {
                dx.hypot(dy)
            } else {
                self.barrier_range(agent, (k as f64 + 0.5) * FRAC_PI_4)
            };
        }
        m
    }

    fn obs_sd(&self, look: bool) -> f64 {
        if look {
            self.c.look_sd
        } else {
            self.c.normal_sd
        }
    }
}

impl Pomdp for VdpTag {
    type State = VdpState;
    type Obs = RangeObs;

    fn name(&self) -> &'static str {
        if self.discrete {
            "vdptag-discrete"
        } else {
            "vdptag"
        }
    }

    fn discount(&self) -> f64 {
        self.c.discount
    }

    fn horizon(&self) -> usize {
        self.c.horizon
    }

    fn reward_bound(&self) -> f64 {
        let look = self.c.look_cost.abs();
        (self.c.capture_reward.abs() + look).max(self.c.step_reward.abs() + look)
    }

    fn action_space(&self) -> ActionSpace {
        if self.discrete {
            ActionSpace::Discrete(2 * self.c.discrete_angles)
        } else {
            ActionSpace::Continuous
        }
    }

    /// Uniform heading in `[0, 2 pi)` and a fair coin for the look flag.
    fn sample_action(&self, rng: &mut SeededRng) -> Option<Action> {
        if self.discrete {
            return None;
        }
        let angle = rng.random_range(0.0..TAU);
        let look = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        Some(Action::Continuous([angle, look]))
    }

    fn check_action(&self, a: &Action) -> Result<()> {
        let bad = |reason: &str| Error::InvalidAction {
            model: self.name(),
            action: a.to_string(),
            reason: reason.into(),
        };
        match (self.discrete, a) {
            (true, Action::Discrete(i)) if *i < 2 * self.c.discrete_angles => Ok(()),
            (false, Action::Continuous([h, l])) if h.is_finite() && (*l == 0.0 || *l == 1.0) => Ok(()),
            (false, Action::Continuous(_)) => Err(bad("heading must be finite and look must be 0 or 1")),
            _ => Err(bad("action outside this model's action space")),
        }
    }

    /// Agent at the origin, target uniform on the square `[-r, r]^2`.
    fn initial_state(&self, rng: &mut SeededRng) -> VdpState {
        let r = self.c.target_range;
        VdpState {
            agent: [0.0, 0.0],
            target: [rng.random_range(-r..=r), rng.random_range(-r..=r)],
            terminal: false,
        }
    }

    fn is_terminal(&self, s: &VdpState) -> bool {
        s.terminal
    }

    fn generate(&self, s: &VdpState, a: &Action, rng: &mut SeededRng) -> Transition<VdpState, RangeObs> {
        let (heading, look) = self.decode_action(a);
        let (next, reward) = if s.terminal {
            (*s, 0.0)
        } else {
            let agent = self.move_agent(s.agent, heading);
            let mut target = rk4_step(s.target, self.c.mu, self.c.dt);
            if self.c.target_sd > 0.0 {
                let noise = Normal::new(0.0, self.c.target_sd).expect("positive sd");
                target[0] += noise.sample(rng);
                target[1] += noise.sample(rng);
            }
            let d = (agent[0] - target[0]).hypot(agent[1] - target[1]);
            let captured = d < self.c.capture_radius;
            let base = if captured {
                self.c.capture_reward
            } else {
                self.c.step_reward
            };
            let cost = if look { self.c.look_cost } else { 0.0 };
            (
                VdpState {
                    agent,
                    target,
                    terminal: captured,
                },
                base + cost,
            )
        };
        let noise = Normal::new(0.0, self.obs_sd(look)).expect("positive sd");
        let mut obs = self.beam_means(next.agent, next.target);
        for o in &mut obs {
            *o += noise.sample(rng);
        }
        Transition {
            next_state: next,
            observation: obs,
            reward,
        }
    }

    fn obs_density(&self, a: &Action, next: &VdpState, o: &RangeObs) -> f64 {
        let sd = self.obs_sd(self.decode_action(a).1);
        self.beam_means(next.agent, next.target)
            .iter()
            .zip(o)
            .map(|(m, x)| normal_pdf(*x, *m, sd))
            .product()
    }

    fn perturb(&self, s: &VdpState, scale: f64, rng: &mut SeededRng) -> VdpState {
        if s.terminal || scale <= 0.0 {
            return *s;
        }
        let n = Normal::new(0.0, scale).expect("positive scale");
        VdpState {
            target: [s.target[0] + n.sample(rng), s.target[1] + n.sample(rng)],
            ..*s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::constants::EnvConstants;

    fn model(discrete: bool) -> VdpTag {
        VdpTag::new(EnvConstants::default().vdptag, discrete)
    }

    #[test]
    fn field_values() {
        assert_eq!(vdp_field([0.0, 0.0], 2.0), [0.0, 0.0]);
        let f = vdp_field([1.0, 0.0], 2.0);
        assert!((f[0] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(f[1], 0.5);
    }

    #[test]
    fn rk4_fixed_point_stays() {
        assert_eq!(rk4_step([0.0, 0.0], 2.0, 0.1), [0.0, 0.0]);
    }

    #[test]
    fn barrier_blocks_agent_not_free_moves() {
        let m = model(false);
        // Moving east from (1, -0.3) by 0.5 stays below the horizontal arm.
        let p = m.move_agent([1.0, -0.3], 0.0);
        assert!((p[0] - 1.5).abs() < 1e-12);
        // Moving north from (1, -0.3) crosses the arm at y = 0.
        assert_eq!(m.move_agent([1.0, -0.3], std::f64::consts::FRAC_PI_2), [1.0, -0.3]);
        // The gap around the origin is open.
        let p = m.move_agent([0.1, -0.3], std::f64::consts::FRAC_PI_2);
        assert!((p[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn beam_reads_target_in_its_sector() {
        let m = model(false);
        let means = m.beam_means([3.0, 3.0], [4.0, 3.5]);
        assert!((means[0] - 1.25f64.sqrt()).abs() < 1e-12);
        // Sector 5 points back toward the origin from (3, 3), where the beam
        // misses the arms' ends and reads max range.
        assert_eq!(means[5], 10.0);
    }

    #[test]
    fn barrier_range_along_axis() {
        let m = model(false);
        // From (1, -1) looking straight up: the horizontal arm is 1 away.
        assert!((m.barrier_range([1.0, -1.0], std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-12);
        assert_eq!(m.barrier_range([5.0, 5.0], 0.0), 10.0);
    }

    #[test]
    fn discrete_action_decoding() {
        let m = model(true);
        assert_eq!(m.action_space(), ActionSpace::Discrete(40));
        assert_eq!(m.decode_action(&Action::Discrete(0)), (0.0, false));
        let (h, look) = m.decode_action(&Action::Discrete(25));
        assert!((h - 5.0 * TAU / 20.0).abs() < 1e-12);
        assert!(look);
    }

    #[test]
    fn capture_and_look_rewards() {
        let m = model(false);
        let mut rng = SeededRng::new(0);
        let far = VdpState {
            agent: [0.0, 0.0],
            target: [3.0, 3.0],
            terminal: false,
        };
        let t = m.generate(&far, &Action::Continuous([0.0, 1.0]), &mut rng);
        assert_eq!(t.reward, -6.0);
        let t = m.generate(&far, &Action::Continuous([0.0, 0.0]), &mut rng);
        assert_eq!(t.reward, -1.0);
    }

    #[test]
    fn continuous_actions_are_validated() {
        let m = model(false);
        assert!(m.check_action(&Action::Continuous([1.0, 1.0])).is_ok());
        assert!(m.check_action(&Action::Continuous([f64::NAN, 0.0])).is_err());
        assert!(m.check_action(&Action::Discrete(0)).is_err());
        assert!(model(true).check_action(&Action::Discrete(40)).is_err());
    }

    #[test]
    fn sampled_heading_is_uniform() {
        // Chi-square over 20 bins at p = 0.01 has critical value 36.19.
        let m = model(false);
        let mut rng = SeededRng::new(12);
        let n = 20_000;
        let mut bins = [0usize; 20];
        let mut looks = 0;
        for _ in 0..n {
            let Some(Action::Continuous([h, l])) = m.sample_action(&mut rng) else {
                panic!("continuous model samples continuous actions");
            };
            assert!((0.0..TAU).contains(&h));
            bins[(h / TAU * 20.0) as usize] += 1;
            looks += l as usize;
        }
        let e = n as f64 / 20.0;
        let chi2: f64 = bins.iter().map(|b| (*b as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 36.19, "{chi2}");
        assert!((looks as f64 - n as f64 / 2.0).abs() < 4.0 * (n as f64 / 4.0).sqrt());
    }
}
