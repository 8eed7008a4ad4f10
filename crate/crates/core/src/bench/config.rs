//! Benchmark configuration files and solver hyperparameter resolution.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::PolicyId;
use crate::envs::{EnvConstants, EnvKind};
use crate::error::{Error, Result};
use crate::filter::FilterConfig;
use crate::pft::{Budget, PftConfig, Widening};

/// Registered solver names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    SparsePft,
    PftDpw,
    Qmdp,
    Random,
    #[serde(rename = "lightdark-heuristic")]
    LightDarkHeuristic,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::SparsePft,
        SolverKind::PftDpw,
        SolverKind::Qmdp,
        SolverKind::Random,
        SolverKind::LightDarkHeuristic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::SparsePft => "sparse-pft",
            SolverKind::PftDpw => "pft-dpw",
            SolverKind::Qmdp => "qmdp",
            SolverKind::Random => "random",
            SolverKind::LightDarkHeuristic => "lightdark-heuristic",
        }
    }

    pub fn is_planner(&self) -> bool {
        matches!(self, SolverKind::SparsePft | SolverKind::PftDpw)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown solver `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    pub name: EnvKind,
    /// Alternative constants file; the built-in table is used when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<PathBuf>,
    /// Step cap overriding the environment horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

/// Solver name plus optional hyperparameter overrides. Unset values fall back
/// to the per-environment defaults in [`default_hyper`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub name: Option<SolverKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_o: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_o: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rollout: Option<PolicyId>,
    /// Root particle count; defaults to `k_o`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Planning seconds per step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    /// Simulations per step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queries: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_episodes() -> usize {
    100
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            episodes: default_episodes(),
            master_seed: 0,
            time: None,
            queries: None,
            out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub env: EnvSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub run: RunSection,
}

impl BenchConfig {
    /// Minimal configuration for `env` and `solver` with default settings.
    pub fn new(env: EnvKind, solver: SolverKind) -> Self {
        BenchConfig {
            env: EnvSection {
                name: env,
                constants: None,
                max_steps: None,
            },
            solver: SolverSection {
                name: Some(solver),
                ..SolverSection::default()
            },
            filter: FilterConfig::default(),
            run: RunSection::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn solver_kind(&self) -> Result<SolverKind> {
        self.solver
            .name
            .ok_or_else(|| Error::config("[solver] name is required"))
    }

    /// Budget for planners; `None` for policies that do not search.
    pub fn budget(&self) -> Result<Option<Budget>> {
        let planner = self.solver_kind()?.is_planner();
        match (self.run.time, self.run.queries) {
            (Some(_), Some(_)) => Err(Error::config("set either run.time or run.queries, not both")),
            (Some(t), None) if t >= 0.0 && t.is_finite() => Ok(planner.then_some(Budget::Time(t))),
            (Some(_), None) => Err(Error::config("run.time must be finite and non-negative")),
            (None, Some(q)) => Ok(planner.then_some(Budget::Queries(q))),
            (None, None) if planner => Err(Error::config("planners need run.time or run.queries")),
            (None, None) => Ok(None),
        }
    }

    pub fn constants(&self) -> Result<EnvConstants> {
        match &self.env.constants {
            Some(path) => EnvConstants::load(path),
            None => Ok(EnvConstants::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if self.run.episodes == 0 {
            return Err(Error::config("run.episodes must be at least 1"));
        }
        self.budget()?;
        self.resolve_solver()?;
        Ok(())
    }

    /// Fill unset hyperparameters from the environment defaults.
    pub fn resolve_solver(&self) -> Result<ResolvedSolver> {
        let kind = self.solver_kind()?;
        let env = self.env.name;
        match kind {
            SolverKind::Qmdp => Ok(ResolvedSolver::Policy(PolicyId::Qmdp)),
            SolverKind::Random => Ok(ResolvedSolver::Policy(PolicyId::Random)),
            SolverKind::LightDarkHeuristic if env == EnvKind::LightDark => {
                Ok(ResolvedSolver::Policy(PolicyId::LightDarkHeuristic))
            }
            SolverKind::LightDarkHeuristic => Err(Error::config(format!(
                "lightdark-heuristic only runs on lightdark, not {env}"
            ))),
            SolverKind::SparsePft | SolverKind::PftDpw => {
                let d = default_hyper(env, kind);
                let s = &self.solver;
                let k_a = s.k_a.or(d.k_a);
                let alpha_a = s.alpha_a.or(d.alpha_a);
                let widening = match (k_a, alpha_a) {
                    (Some(k_a), alpha_a) => Some(Widening {
                        k_a,
                        alpha_a: alpha_a.unwrap_or(0.0),
                    }),
                    (None, Some(_)) => return Err(Error::config("alpha_a needs k_a")),
                    (None, None) => None,
                };
                let budget = self.budget()?.expect("planner budget");
                let cfg = PftConfig {
                    width: s.k_o.unwrap_or(d.k_o),
                    alpha_o: s.alpha_o.unwrap_or(d.alpha_o),
                    c_ucb: s.c.unwrap_or(d.c),
                    depth: s.depth.unwrap_or(d.depth),
                    budget,
                    particles: s.particles,
                    widening,
                };
                cfg.validate()?;
                Ok(ResolvedSolver::Planner {
                    cfg,
                    rollout: s.rollout.unwrap_or(d.rollout),
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ResolvedSolver {
    Policy(PolicyId),
    Planner { cfg: PftConfig, rollout: PolicyId },
}

/// Per-environment tuned hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyper {
    pub c: f64,
    pub k_a: Option<f64>,
    pub alpha_a: Option<f64>,
    pub k_o: usize,
    pub alpha_o: f64,
    pub depth: usize,
    pub rollout: PolicyId,
}

/// Tuned hyperparameters for the two tree planners. Other solvers ignore them.
pub fn default_hyper(env: EnvKind, solver: SolverKind) -> Hyper {
    use EnvKind::*;
    let dpw = solver == SolverKind::PftDpw;
    let (rollout, k_a, alpha_a) = match env {
        VdpTag => (PolicyId::Random, Some(20.0), Some(if dpw { 1.0 / 25.0 } else { 0.0 })),
        VdpTagDiscrete => (PolicyId::Random, None, None),
        _ => (PolicyId::Qmdp, None, None),
    };
    let (c, k_o, alpha_o, depth) = match (env, dpw) {
        (LaserTag, false) => (26.0, 4, 0.0, 50),
        (LaserTag, true) => (26.0, 4, 1.0 / 35.0, 50),
        (LightDark, false) => (100.0, 4, 0.0, 20),
        (LightDark, true) => (100.0, 4, 1.0 / 10.0, 20),
        (SubHunt, false) => (100.0, 5, 0.0, 50),
        (SubHunt, true) => (100.0, 2, 1.0 / 10.0, 50),
        (VdpTag, false) => (70.0, 8, 0.0, 10),
        (VdpTag, true) => (70.0, 8, 1.0 / 85.0, 10),
        (VdpTagDiscrete, false) => (61.0, 10, 0.0, 10),
        (VdpTagDiscrete, true) => (47.0, 4, 1.0 / 5.0, 10),
    };
    Hyper {
        c,
        k_a,
        alpha_a,
        k_o,
        alpha_o,
        depth,
        rollout,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = BenchConfig::parse(
            r#"
            [env]
            name = "lightdark"
            [solver]
            name = "sparse-pft"
            c = 50.0
            depth = 10
            [filter]
            particles = 500
            [run]
            episodes = 3
            queries = 100
            "#,
        )
        .unwrap();
        match cfg.resolve_solver().unwrap() {
            ResolvedSolver::Planner { cfg, rollout } => {
                assert_eq!(cfg.c_ucb, 50.0);
                assert_eq!(cfg.depth, 10);
                assert_eq!(cfg.width, 4);
                assert_eq!(cfg.budget, Budget::Queries(100));
                assert_eq!(rollout, PolicyId::Qmdp);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(cfg.filter.particles, 500);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = "[env]\nname = \"lightdark\"\ncolour = 3\n";
        assert!(BenchConfig::parse(bad).unwrap_err().is_config());
        let bad = "[env]\nname = \"lightdark\"\n[solver]\nname = \"random\"\nkappa = 1\n";
        assert!(BenchConfig::parse(bad).is_err());
        assert!(BenchConfig::parse("[env]\nname = \"nowhere\"\n").is_err());
    }

    #[test]
    fn planners_need_a_budget() {
        let cfg = BenchConfig::new(EnvKind::LightDark, SolverKind::SparsePft);
        assert!(cfg.validate().unwrap_err().is_config());
        let mut cfg = cfg;
        cfg.run.time = Some(0.1);
        cfg.validate().unwrap();
        cfg.run.queries = Some(10);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn heuristic_is_lightdark_only() {
        assert!(BenchConfig::new(EnvKind::LaserTag, SolverKind::LightDarkHeuristic)
            .validate()
            .is_err());
        BenchConfig::new(EnvKind::LightDark, SolverKind::LightDarkHeuristic)
            .validate()
            .unwrap();
    }

    #[test]
    fn vdptag_defaults_widen_actions() {
        let mut cfg = BenchConfig::new(EnvKind::VdpTag, SolverKind::SparsePft);
        cfg.run.queries = Some(5);
        let ResolvedSolver::Planner { cfg: pft, rollout } = cfg.resolve_solver().unwrap() else {
            panic!("planner expected");
        };
        assert_eq!(rollout, PolicyId::Random);
        assert_eq!(pft.widening, Some(Widening { k_a: 20.0, alpha_a: 0.0 }));
        assert_eq!(pft.width, 8);
        assert_eq!(pft.c_ucb, 70.0);
    }

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.as_str().parse::<SolverKind>().unwrap(), k);
        }
    }
}
