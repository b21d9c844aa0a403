//! Experiment configuration: a flat, diff-friendly key = value format with
//! dotted keys.
//!
//! ```text
//! schema_version = 1
//! channel.num_users = 10
//! channel.num_time = 100
//! channel.tap_count_min = 10
//! channel.tap_count_max = 20
//! channel.gain_mean_profile = sin:0.5,0.2,1
//! channel.gain_std_profile = sin:0.5,0.25,2,1.0
//! channel.cross_user_coupling = 0.5
//! modulations = qam16
//! epsilons = 1e-1,1e-2,1e-3,1e-4
//! epsilon_mode = absolute
//! snr_db_grid = 8,10,12,14,16,18,20
//! trials = 200
//! arms = hogmt,zf,thp_zf,ideal
//! master_seed = 1
//! output_dir = out
//! power_mode = unnormalized
//! warmup_skip = auto
//! ```
//!
//! Profiles are length-T sequences written compactly:
//! `const:v`, `sin:base,amp,cycles[,phase]` (base + amp*sin(2*pi*cycles*t/T
//! + phase)), `step:v_first_half,v_second_half`, or `list:v0,v1,...` with
//! exactly T values. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use crate::channel::ChannelConfig;
use crate::decompose::ThresholdMode;
use crate::error::{Error, Result};
use crate::modem::Scheme;

/// Simulation arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Arm {
    Hogmt,
    Zf,
    ThpZf,
    Ideal,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::Hogmt => "hogmt",
            Arm::Zf => "zf",
            Arm::ThpZf => "thp_zf",
            Arm::Ideal => "ideal",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hogmt" => Ok(Arm::Hogmt),
            "zf" => Ok(Arm::Zf),
            "thp_zf" | "thp" => Ok(Arm::ThpZf),
            "ideal" => Ok(Arm::Ideal),
            other => Err(Error::InvalidConfig(format!("unknown arm '{other}'"))),
        }
    }
}

/// Transmit power policy for the precoded arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerMode {
    /// Transmit the precoder output as-is.
    #[default]
    Unnormalized,
    /// Scale the precoded grid to unit mean power; the receiver undoes the
    /// known scalar before demodulation.
    GenieNormalized,
}

/// Warmup exclusion policy for bit counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WarmupSkip {
    /// Skip the first `tap_count_max` instances when the grid is long
    /// enough, nothing otherwise.
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub channel: ChannelConfig,
    pub modulations: Vec<Scheme>,
    pub epsilons: Vec<f64>,
    pub epsilon_mode: ThresholdMode,
    pub snr_db_grid: Vec<f64>,
    pub trials: usize,
    pub arms: BTreeSet<Arm>,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub power_mode: PowerMode,
    pub warmup_skip: WarmupSkip,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.modulations.is_empty() {
            return Err(Error::InvalidConfig("modulations must be non-empty".into()));
        }
        if self.epsilons.is_empty() {
            return Err(Error::InvalidConfig("epsilons must be non-empty".into()));
        }
        for &e in &self.epsilons {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "epsilons must lie in (0, 1); key 'epsilons' has {e}"
                )));
            }
        }
        if self.snr_db_grid.is_empty() {
            return Err(Error::InvalidConfig("snr_db_grid must be non-empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.arms.is_empty() {
            return Err(Error::InvalidConfig("arms must be non-empty".into()));
        }
        Ok(())
    }

    /// Effective warmup skip for this channel geometry.
    pub fn effective_warmup(&self) -> usize {
        match self.warmup_skip {
            WarmupSkip::Fixed(n) => n.min(self.channel.num_time.saturating_sub(1)),
            WarmupSkip::Auto => {
                if self.channel.num_time > self.channel.tap_count_max {
                    self.channel.tap_count_max
                } else {
                    0
                }
            }
        }
    }

    /// The spatio-temporal configuration used by the headline experiments:
    /// 10 users, 100 time instances, 10..20 delay taps, time-varying tap
    /// statistics, absolute thresholds swept over four decades.
    pub fn paper_spatiotemporal(master_seed: u64, output_dir: PathBuf) -> Self {
        let num_time = 100;
        let mean = profile_sin(num_time, 0.5, 0.2, 1.0, 0.0);
        let std = profile_sin(num_time, 0.5, 0.25, 2.0, 1.0);
        Self {
            channel: ChannelConfig {
                num_users: 10,
                num_time,
                tap_count_min: 10,
                tap_count_max: 20,
                gain_mean_profile: mean,
                gain_std_profile: std,
                cross_user_coupling: 0.5,
                seed: 0,
            },
            modulations: vec![Scheme::Qam16],
            epsilons: vec![1e-1, 1e-2, 1e-3, 1e-4],
            epsilon_mode: ThresholdMode::Absolute,
            snr_db_grid: vec![8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0],
            trials: 200,
            arms: [Arm::Hogmt, Arm::Zf, Arm::ThpZf, Arm::Ideal].into(),
            master_seed,
            output_dir,
            power_mode: PowerMode::Unnormalized,
            warmup_skip: WarmupSkip::Auto,
        }
    }

    /// The 30-user purely spatial configuration with relative thresholds.
    pub fn paper_spatial(master_seed: u64, output_dir: PathBuf) -> Self {
        Self {
            channel: ChannelConfig {
                num_users: 30,
                num_time: 1,
                tap_count_min: 1,
                tap_count_max: 1,
                gain_mean_profile: vec![1.3],
                gain_std_profile: vec![0.45],
                cross_user_coupling: 0.2,
                seed: 0,
            },
            modulations: vec![Scheme::Qam16],
            epsilons: vec![1e-1, 1e-2],
            epsilon_mode: ThresholdMode::Relative,
            snr_db_grid: vec![4.0, 6.0, 8.0, 12.0, 14.0, 16.0, 20.0],
            trials: 4000,
            arms: [Arm::Hogmt, Arm::ThpZf, Arm::Ideal].into(),
            master_seed,
            output_dir,
            power_mode: PowerMode::Unnormalized,
            warmup_skip: WarmupSkip::Fixed(0),
        }
    }

    /// Render as the flat key = value format.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        use fmt::Write;
        let _ = writeln!(s, "schema_version = 1");
        let _ = writeln!(s, "channel.num_users = {}", self.channel.num_users);
        let _ = writeln!(s, "channel.num_time = {}", self.channel.num_time);
        let _ = writeln!(s, "channel.tap_count_min = {}", self.channel.tap_count_min);
        let _ = writeln!(s, "channel.tap_count_max = {}", self.channel.tap_count_max);
        let _ = writeln!(
            s,
            "channel.gain_mean_profile = list:{}",
            join_f64(&self.channel.gain_mean_profile)
        );
        let _ = writeln!(
            s,
            "channel.gain_std_profile = list:{}",
            join_f64(&self.channel.gain_std_profile)
        );
        let _ = writeln!(
            s,
            "channel.cross_user_coupling = {}",
            self.channel.cross_user_coupling
        );
        let _ = writeln!(
            s,
            "modulations = {}",
            self.modulations
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "epsilons = {}", join_f64(&self.epsilons));
        let _ = writeln!(
            s,
            "epsilon_mode = {}",
            match self.epsilon_mode {
                ThresholdMode::Relative => "relative",
                ThresholdMode::Absolute => "absolute",
            }
        );
        let _ = writeln!(s, "snr_db_grid = {}", join_f64(&self.snr_db_grid));
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(
            s,
            "arms = {}",
            self.arms.iter().map(|a| a.name()).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(
            s,
            "power_mode = {}",
            match self.power_mode {
                PowerMode::Unnormalized => "unnormalized",
                PowerMode::GenieNormalized => "genie_normalized",
            }
        );
        let _ = writeln!(
            s,
            "warmup_skip = {}",
            match self.warmup_skip {
                WarmupSkip::Auto => "auto".to_string(),
                WarmupSkip::Fixed(n) => n.to_string(),
            }
        );
        s
    }
}

fn join_f64(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// base + amp * sin(2 pi cycles t / T + phase)
pub fn profile_sin(len: usize, base: f64, amp: f64, cycles: f64, phase: f64) -> Vec<f64> {
    (0..len)
        .map(|t| {
            base + amp
                * (2.0 * std::f64::consts::PI * cycles * t as f64 / len as f64 + phase).sin()
        })
        .collect()
}

fn parse_profile(spec: &str, len: usize, key: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::InvalidConfig(format!("key '{key}': {msg}"));
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| bad(format!("profile '{spec}' needs a kind prefix")))?;
    let nums: Vec<f64> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("bad number '{x}': {e}")))
            })
            .collect::<Result<_>>()?
    };
    match kind {
        "const" => {
            if nums.len() != 1 {
                return Err(bad("const profile takes one value".into()));
            }
            Ok(vec![nums[0]; len])
        }
        "sin" => {
            if nums.len() < 3 || nums.len() > 4 {
                return Err(bad("sin profile takes base,amp,cycles[,phase]".into()));
            }
            let phase = nums.get(3).copied().unwrap_or(0.0);
            Ok(profile_sin(len, nums[0], nums[1], nums[2], phase))
        }
        "step" => {
            if nums.len() != 2 {
                return Err(bad("step profile takes two values".into()));
            }
            Ok((0..len)
                .map(|t| if t < len / 2 { nums[0] } else { nums[1] })
                .collect())
        }
        "list" => {
            if nums.len() != len {
                return Err(bad(format!(
                    "list profile has {} values, needs {len}",
                    nums.len()
                )));
            }
            Ok(nums)
        }
        other => Err(bad(format!("unknown profile kind '{other}'"))),
    }
}

/// Parse the flat config format. Unknown keys are rejected so typos fail
/// loudly; every error names the offending key.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut kv = std::collections::BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = k.trim().to_string();
        if kv.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::InvalidConfig(format!("key '{key}' appears twice")));
        }
    }

    let known = [
        "schema_version",
        "channel.num_users",
        "channel.num_time",
        "channel.tap_count_min",
        "channel.tap_count_max",
        "channel.gain_mean_profile",
        "channel.gain_std_profile",
        "channel.cross_user_coupling",
        "modulations",
        "epsilons",
        "epsilon_mode",
        "snr_db_grid",
        "trials",
        "arms",
        "master_seed",
        "output_dir",
        "power_mode",
        "warmup_skip",
    ];
    for key in kv.keys() {
        if !known.contains(&key.as_str()) {
            return Err(Error::InvalidConfig(format!("unknown key '{key}'")));
        }
    }

    let get = |key: &str| -> Result<&String> {
        kv.get(key)
            .ok_or_else(|| Error::InvalidConfig(format!("missing key '{key}'")))
    };
    let parse_num = |key: &str| -> Result<f64> {
        get(key)?
            .parse::<f64>()
            .map_err(|e| Error::InvalidConfig(format!("key '{key}': {e}")))
    };
    let parse_usize = |key: &str| -> Result<usize> {
        get(key)?
            .parse::<usize>()
            .map_err(|e| Error::InvalidConfig(format!("key '{key}': {e}")))
    };
    let parse_f64_list = |key: &str| -> Result<Vec<f64>> {
        get(key)?
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("key '{key}': bad number '{x}': {e}")))
            })
            .collect()
    };

    let schema = parse_usize("schema_version")?;
    if schema != 1 {
        return Err(Error::InvalidConfig(format!(
            "key 'schema_version': unsupported version {schema}"
        )));
    }

    let num_time = parse_usize("channel.num_time")?;
    let channel = ChannelConfig {
        num_users: parse_usize("channel.num_users")?,
        num_time,
        tap_count_min: parse_usize("channel.tap_count_min")?,
        tap_count_max: parse_usize("channel.tap_count_max")?,
        gain_mean_profile: parse_profile(
            get("channel.gain_mean_profile")?,
            num_time,
            "channel.gain_mean_profile",
        )?,
        gain_std_profile: parse_profile(
            get("channel.gain_std_profile")?,
            num_time,
            "channel.gain_std_profile",
        )?,
        cross_user_coupling: parse_num("channel.cross_user_coupling")?,
        seed: 0,
    };

    let modulations = get("modulations")?
        .split(',')
        .map(Scheme::parse)
        .collect::<Result<Vec<_>>>()?;
    let epsilons = parse_f64_list("epsilons")?;
    let epsilon_mode = match get("epsilon_mode")?.as_str() {
        "relative" => ThresholdMode::Relative,
        "absolute" => ThresholdMode::Absolute,
        other => {
            return Err(Error::InvalidConfig(format!(
                "key 'epsilon_mode': expected relative|absolute, got '{other}'"
            )))
        }
    };
    let arms = get("arms")?
        .split(',')
        .map(Arm::parse)
        .collect::<Result<BTreeSet<_>>>()?;
    let power_mode = match get("power_mode")?.as_str() {
        "unnormalized" => PowerMode::Unnormalized,
        "genie_normalized" => PowerMode::GenieNormalized,
        other => {
            return Err(Error::InvalidConfig(format!(
                "key 'power_mode': expected unnormalized|genie_normalized, got '{other}'"
            )))
        }
    };
    let warmup_skip = match get("warmup_skip")?.as_str() {
        "auto" => WarmupSkip::Auto,
        n => WarmupSkip::Fixed(n.parse::<usize>().map_err(|e| {
            Error::InvalidConfig(format!("key 'warmup_skip': {e}"))
        })?),
    };

    let cfg = ExperimentConfig {
        channel,
        modulations,
        epsilons,
        epsilon_mode,
        snr_db_grid: parse_f64_list("snr_db_grid")?,
        trials: parse_usize("trials")?,
        arms,
        master_seed: get("master_seed")?
            .parse::<u64>()
            .map_err(|e| Error::InvalidConfig(format!("key 'master_seed': {e}")))?,
        output_dir: PathBuf::from(get("output_dir")?),
        power_mode,
        warmup_skip,
    };
    cfg.validate()?;
    Ok(cfg)
}
