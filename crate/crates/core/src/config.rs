//! Flat `key=value` run configuration.
//!
//! Lines are `key = value`; blank lines and `#` comments are ignored and
//! unknown keys are errors. The same keys are used by command-line flags and
//! by the header embedded in every output file, so any file can be fed back
//! to regenerate its run.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::metaloop::MetaMode;
use crate::params::{NoiseScale, ParamError, SimParams};
use crate::pso::{SwarmConfig, SwarmConfigError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("line {line}: expected `key=value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown preset `{0}` (expected full or desk)")]
    UnknownPreset(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Swarm(#[from] SwarmConfigError),
    #[error("lookback {0} must be at least 1")]
    Lookback(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub sim: SimParams,
    pub swarm: SwarmConfig,
    pub mode: MetaMode,
    pub n_meta: usize,
    pub seed: u64,
    /// Fixed lookbacks for single simulations.
    pub ta_m: Option<u64>,
    pub ta_r: Option<u64>,
    /// Return window for statistics.
    pub window: u64,
    /// Ticks excluded before the first return; defaults to `t_c`.
    pub burn_in: Option<u64>,
    pub out_dir: PathBuf,
    /// Add a per-tick trade count column to series files.
    pub trade_counts: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sim: SimParams::default(),
            swarm: SwarmConfig::default(),
            mode: MetaMode::MomentumOnly,
            n_meta: 50,
            seed: 1,
            ta_m: None,
            ta_r: None,
            window: 100,
            burn_in: None,
            out_dir: PathBuf::from("out"),
            trade_counts: false,
        }
    }
}

/// Every recognised key, in the order they are written out.
pub const KEYS: &[&str] = &[
    "delta_p",
    "p_f",
    "n",
    "w1_max",
    "w2_max",
    "w3_max",
    "tau_max",
    "sigma_eps",
    "noise_scale",
    "p_d",
    "t_c",
    "s",
    "t_e",
    "n_p",
    "l_p",
    "t_min",
    "t_max",
    "w",
    "c1",
    "c2",
    "mode",
    "n_meta",
    "seed",
    "ta_m",
    "ta_r",
    "window",
    "burn_in",
    "out_dir",
    "trade_counts",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_opt(key: &str, value: &str) -> Result<Option<u64>, ConfigError> {
    if value.is_empty() || value == "none" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn opt_str(v: Option<u64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

impl RunConfig {
    /// Reduced scale for quick experiments and CI.
    pub fn desk() -> Self {
        let mut c = Self::default();
        c.apply_preset("desk").expect("known preset");
        c
    }

    pub fn apply_preset(&mut self, name: &str) -> Result<(), ConfigError> {
        match name {
            "full" => {}
            "desk" => {
                self.sim.t_e = 2_000_000;
                self.swarm.n_particles = 50;
                self.n_meta = 20;
            }
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "delta_p" => self.sim.delta_p = parse(key, v)?,
            "p_f" => self.sim.p_f = parse(key, v)?,
            "n" => self.sim.n = parse(key, v)?,
            "w1_max" => self.sim.w_max[0] = parse(key, v)?,
            "w2_max" => self.sim.w_max[1] = parse(key, v)?,
            "w3_max" => self.sim.w_max[2] = parse(key, v)?,
            "tau_max" => self.sim.tau_max = parse(key, v)?,
            "sigma_eps" => self.sim.sigma_eps = parse(key, v)?,
            "noise_scale" => {
                self.sim.noise_scale = match v {
                    "stddev" => NoiseScale::StdDev,
                    "variance" => NoiseScale::Variance,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: v.into(),
                            reason: "expected stddev or variance".into(),
                        })
                    }
                }
            }
            "p_d" => self.sim.p_d = parse(key, v)?,
            "t_c" => self.sim.t_c = parse(key, v)?,
            "s" => self.sim.s = parse(key, v)?,
            "t_e" => self.sim.t_e = parse(key, v)?,
            "n_p" => self.swarm.n_particles = parse(key, v)?,
            "l_p" => self.swarm.iterations = parse(key, v)?,
            "t_min" => self.swarm.t_min = parse(key, v)?,
            "t_max" => self.swarm.t_max = parse(key, v)?,
            "w" => self.swarm.inertia = parse(key, v)?,
            "c1" => self.swarm.c1 = parse(key, v)?,
            "c2" => self.swarm.c2 = parse(key, v)?,
            "mode" => self.mode = parse(key, v)?,
            "n_meta" => self.n_meta = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "ta_m" => self.ta_m = parse_opt(key, v)?,
            "ta_r" => self.ta_r = parse_opt(key, v)?,
            "window" => self.window = parse(key, v)?,
            "burn_in" => self.burn_in = parse_opt(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "trade_counts" => self.trade_counts = parse(key, v)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "delta_p" => self.sim.delta_p.to_string(),
            "p_f" => self.sim.p_f.to_string(),
            "n" => self.sim.n.to_string(),
            "w1_max" => self.sim.w_max[0].to_string(),
            "w2_max" => self.sim.w_max[1].to_string(),
            "w3_max" => self.sim.w_max[2].to_string(),
            "tau_max" => self.sim.tau_max.to_string(),
            "sigma_eps" => self.sim.sigma_eps.to_string(),
            "noise_scale" => match self.sim.noise_scale {
                NoiseScale::StdDev => "stddev".into(),
                NoiseScale::Variance => "variance".into(),
            },
            "p_d" => self.sim.p_d.to_string(),
            "t_c" => self.sim.t_c.to_string(),
            "s" => self.sim.s.to_string(),
            "t_e" => self.sim.t_e.to_string(),
            "n_p" => self.swarm.n_particles.to_string(),
            "l_p" => self.swarm.iterations.to_string(),
            "t_min" => self.swarm.t_min.to_string(),
            "t_max" => self.swarm.t_max.to_string(),
            "w" => self.swarm.inertia.to_string(),
            "c1" => self.swarm.c1.to_string(),
            "c2" => self.swarm.c2.to_string(),
            "mode" => self.mode.to_string(),
            "n_meta" => self.n_meta.to_string(),
            "seed" => self.seed.to_string(),
            "ta_m" => opt_str(self.ta_m),
            "ta_r" => opt_str(self.ta_r),
            "window" => self.window.to_string(),
            "burn_in" => opt_str(self.burn_in),
            "out_dir" => self.out_dir.display().to_string(),
            "trade_counts" => self.trade_counts.to_string(),
            _ => return None,
        })
    }

    /// All keys with their resolved values.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|&k| (k, self.get(k).expect("every listed key is readable")))
            .collect()
    }

    /// Apply `key=value` lines on top of the current values.
    pub fn merge_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: line.to_string(),
                });
            };
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.merge_str(&text)
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in.unwrap_or(self.sim.t_c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim.validate()?;
        self.swarm.validate()?;
        for lb in [self.ta_m, self.ta_r].into_iter().flatten() {
            if lb == 0 {
                return Err(ConfigError::Lookback(lb));
            }
        }
        Ok(())
    }
}
