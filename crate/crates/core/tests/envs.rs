use pbmdp::baselines::random_action;
use pbmdp::envs::{EnvConstants, LaserTag, LightDark, SubHunt, VdpTag};
use pbmdp::{Pomdp, SeededRng};

const STEPS: usize = 100_000;

/// Walk `STEPS` random transitions, restarting at terminal states and at the
/// horizon, and check bounds, reward magnitude, that the generated observation
/// has positive likelihood under its own next state, and that terminal states
/// are absorbing with zero reward.
fn exercise<M: Pomdp>(model: &M, in_bounds: impl Fn(&M::State) -> bool, seed: u64) {
    let mut rng = SeededRng::new(seed);
    let rmax = model.reward_bound();
    let mut s = model.initial_state(&mut rng);
    let mut t_ep = 0;
    assert!(in_bounds(&s), "{}: initial state out of bounds", model.name());
    for k in 0..STEPS {
        if model.is_terminal(&s) {
            let a = random_action(model, &mut rng).unwrap();
            let t = model.generate(&s, &a, &mut rng);
            assert_eq!(t.reward, 0.0, "{}: reward from a terminal state", model.name());
            assert!(model.is_terminal(&t.next_state), "{}: terminal state left", model.name());
        }
        if model.is_terminal(&s) || t_ep == model.horizon() {
            s = model.initial_state(&mut rng);
            t_ep = 0;
        }
        t_ep += 1;
        let a = random_action(model, &mut rng).unwrap();
        let t = model.generate(&s, &a, &mut rng);
        assert!(t.reward.abs() <= rmax + 1e-9, "{}: |r| = {} at step {k}", model.name(), t.reward);
        assert!(in_bounds(&t.next_state), "{}: out of bounds at step {k}", model.name());
        let z = model.obs_density(&a, &t.next_state, &t.observation);
        assert!(z > 0.0 && z.is_finite(), "{}: Z = {z} at step {k}", model.name());
        s = t.next_state;
    }
}

#[test]
fn lightdark_random_transitions() {
    let c = EnvConstants::default().lightdark;
    let window = c.mdp_window;
    exercise(&LightDark::new(c), |s| s.pos.abs() <= window, 1);
}

#[test]
fn lasertag_random_transitions() {
    let m = LaserTag::new(EnvConstants::default().lasertag, 4);
    let free = |c: u8| !m.is_blocked(c as usize) && (c as usize) < m.num_cells();
    exercise(&m, |s| free(s.agent) && free(s.opponent), 2);
}

#[test]
fn subhunt_random_transitions() {
    let c = EnvConstants::default().subhunt;
    let n = c.size as u8;
    exercise(
        &SubHunt::new(c),
        |s| s.agent.0 < n && s.agent.1 < n && s.enemy.0 < n && s.enemy.1 < n,
        3,
    );
}

#[test]
fn vdptag_random_transitions() {
    for discrete in [false, true] {
        let c = EnvConstants::default().vdptag;
        // The plane is open: the agent stays within one step per time step of
        // the origin, and the target stays near its limit cycle.
        let reach = c.agent_step * c.horizon as f64;
        let m = VdpTag::new(c, discrete);
        exercise(
            &m,
            |s| {
                s.agent.iter().all(|x| x.is_finite() && x.abs() <= reach)
                    && s.target.iter().all(|x| x.is_finite() && x.abs() < 10.0)
            },
            4,
        );
    }
}
