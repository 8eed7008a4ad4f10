//! Aggregated results and their CSV / JSON forms.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::BenchConfig;
use super::episode::EpisodeResult;
use crate::envs::EnvConstants;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "episode,seed,env,solver,budget_mode,budget,disc_return,undisc_return,steps,mean_plan_ms,degenerate_updates";

/// Mean and standard error (`sample stdev / sqrt(n)`, undefined for `n < 2`),
/// summed in index order.
pub fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn episodes_to_csv(episodes: &[EpisodeResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for e in episodes {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            e.episode,
            e.seed,
            e.env,
            e.solver,
            e.budget_mode,
            opt(e.budget),
            e.disc_return,
            e.undisc_return,
            e.steps,
            opt(e.mean_plan_ms),
            e.degenerate_updates
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchConfig,
    pub constants: EnvConstants,
    pub env: String,
    pub solver: String,
    pub budget_mode: String,
    pub budget: Option<f64>,
    pub n: usize,
    /// Mean discounted return.
    pub mean: f64,
    pub std_err: Option<f64>,
    pub mean_undisc: f64,
    pub episodes: Vec<EpisodeResult>,
}

impl BenchmarkReport {
    pub fn new(
        config: BenchConfig,
        constants: EnvConstants,
        budget_mode: &str,
        budget: Option<f64>,
        episodes: Vec<EpisodeResult>,
    ) -> Self {
        let disc: Vec<f64> = episodes.iter().map(|e| e.disc_return).collect();
        let undisc: Vec<f64> = episodes.iter().map(|e| e.undisc_return).collect();
        let (mean, std_err) = mean_and_se(&disc);
        BenchmarkReport {
            env: config.env.name.to_string(),
            solver: config.solver.name.map(|s| s.to_string()).unwrap_or_default(),
            config,
            constants,
            budget_mode: budget_mode.to_string(),
            budget,
            n: episodes.len(),
            mean,
            std_err,
            mean_undisc: mean_and_se(&undisc).0,
            episodes,
        }
    }

    pub fn csv(&self) -> String {
        episodes_to_csv(&self.episodes)
    }

    /// Mean per-step planning time across episodes, when recorded.
    pub fn mean_plan_ms(&self) -> Option<f64> {
        let v: Vec<f64> = self.episodes.iter().filter_map(|e| e.mean_plan_ms).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }

    /// Write `episodes.csv` and `report.json` into `dir`, creating it.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join("episodes.csv"), &self.csv())?;
        write_file(&dir.join("report.json"), &self.json())
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
