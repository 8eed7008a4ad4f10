//! Versioned environment constants, embedded at build time and optionally
//! overridden from a file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The shipped constants file.
pub const DEFAULT_CONSTANTS: &str = include_str!("constants.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConstants {
    pub version: u32,
    pub lightdark: LightDarkConstants,
    pub lasertag: LaserTagConstants,
    pub subhunt: SubHuntConstants,
    pub vdptag: VdpTagConstants,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightDarkConstants {
    pub epsilon: f64,
    pub light: i64,
    pub discount: f64,
    pub horizon: usize,
    pub prior_min: i64,
    pub prior_max: i64,
    pub goal_reward: f64,
    pub wrong_commit_reward: f64,
    pub step_reward: f64,
    pub mdp_window: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserTagConstants {
    pub rows: usize,
    pub cols: usize,
    pub obstacles: usize,
    pub sensor_sd: f64,
    pub tag_reward: f64,
    pub failed_tag_reward: f64,
    pub step_reward: f64,
    pub discount: f64,
    pub horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubHuntConstants {
    pub size: usize,
    pub sectors: usize,
    pub passive_sd: f64,
    pub ping_sd: f64,
    pub attack_range: i32,
    pub kill_reward: f64,
    pub escape_reward: f64,
    pub step_reward: f64,
    pub discount: f64,
    pub horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdpTagConstants {
    pub mu: f64,
    pub dt: f64,
    pub agent_step: f64,
    pub capture_radius: f64,
    pub target_sd: f64,
    pub look_sd: f64,
    pub normal_sd: f64,
    pub beam_max: f64,
    pub barrier_inner: f64,
    pub barrier_outer: f64,
    pub target_range: f64,
    pub capture_reward: f64,
    pub step_reward: f64,
    pub look_cost: f64,
    pub discrete_angles: usize,
    pub discount: f64,
    pub horizon: usize,
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(format!("invalid environment constant: {what}")))
    }
}

fn discount_ok(g: f64) -> bool {
    (0.0..1.0).contains(&g)
}

impl EnvConstants {
    pub fn parse(text: &str) -> Result<Self> {
        let c: EnvConstants =
            toml::from_str(text).map_err(|e| Error::config(format!("constants: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str::<EnvConstants>(&text)
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
            .and_then(|c| c.validate().map(|_| c))
    }

    pub fn validate(&self) -> Result<()> {
        let ld = &self.lightdark;
        check(ld.epsilon > 0.0, "lightdark.epsilon must be positive")?;
        check(discount_ok(ld.discount), "lightdark.discount")?;
        check(ld.prior_min <= ld.prior_max, "lightdark prior bounds")?;
        check(
            ld.mdp_window > ld.prior_max.abs().max(ld.prior_min.abs()),
            "lightdark.mdp_window must contain the prior",
        )?;

        let lt = &self.lasertag;
        check(lt.rows >= 2 && lt.cols >= 2, "lasertag grid too small")?;
        check(lt.rows * lt.cols <= 256, "lasertag grid must fit u8 cell ids")?;
        check(lt.obstacles + 2 <= lt.rows * lt.cols, "lasertag.obstacles leaves no room")?;
        check(lt.sensor_sd > 0.0, "lasertag.sensor_sd")?;
        check(discount_ok(lt.discount), "lasertag.discount")?;

        let sh = &self.subhunt;
        check(sh.size >= 4 && sh.size <= 255, "subhunt.size")?;
        check(sh.sectors >= 1, "subhunt.sectors")?;
        check(sh.passive_sd > 0.0 && sh.ping_sd > 0.0, "subhunt noise levels")?;
        check(sh.attack_range >= 0, "subhunt.attack_range")?;
        check(discount_ok(sh.discount), "subhunt.discount")?;

        let vt = &self.vdptag;
        check(vt.mu > 0.0 && vt.dt > 0.0, "vdptag.mu and vdptag.dt must be positive")?;
        check(vt.look_sd > 0.0 && vt.normal_sd > 0.0, "vdptag noise levels")?;
        check(vt.target_sd >= 0.0, "vdptag.target_sd")?;
        check(vt.barrier_inner < vt.barrier_outer, "vdptag barrier extent")?;
        check(vt.discrete_angles >= 1, "vdptag.discrete_angles")?;
        check(discount_ok(vt.discount), "vdptag.discount")?;
        Ok(())
    }
}

impl Default for EnvConstants {
    fn default() -> Self {
        EnvConstants::parse(DEFAULT_CONSTANTS).expect("shipped constants are valid")
    }
}
