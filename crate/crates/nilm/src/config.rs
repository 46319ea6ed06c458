//! Run configuration: defaults, TOML file, `NILM_SEED`, then flag overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nilm_core::data::{SynthConfig, DEFAULT_ON_FRACTION};
use nilm_core::TrainConfig;
use serde::{Deserialize, Serialize};

/// Environment variable that replaces the seed from the config file.
pub const SEED_ENV: &str = "NILM_SEED";

/// Hidden sizes tried by `train --sweep`.
pub const SWEEP_HIDDEN: [usize; 4] = [32, 64, 128, 256];

/// Name of the resolved configuration written next to every command's outputs.
pub const RESOLVED_CONFIG_FILE: &str = "run_config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Readings per window: 60 for one-minute windows of 1 Hz data, 3600
    /// for hourly ones.
    pub window: usize,
    pub on_fraction: f64,
    pub hidden: usize,
    pub lr: f64,
    pub cd_k: usize,
    pub epochs: usize,
    pub batch: usize,
    pub threshold: f64,
    /// Choose the hidden size on the validation split.
    pub sweep: bool,
    /// Also score the CO baseline during `eval`.
    pub baseline: bool,
    pub out: PathBuf,
    pub data: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub synth: SynthSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    pub duration_s: u64,
    pub sample_hz: f64,
    pub noise_sd: f64,
    pub state_hold: usize,
    pub start_time: i64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            seed: t.seed,
            window: 60,
            on_fraction: DEFAULT_ON_FRACTION,
            hidden: t.n_hidden,
            lr: t.learning_rate,
            cd_k: t.cd_steps,
            epochs: t.epochs,
            batch: t.batch_size,
            threshold: t.threshold,
            sweep: false,
            baseline: false,
            out: PathBuf::from("out"),
            data: None,
            profiles: None,
            model: None,
            synth: SynthSettings::default(),
        }
    }
}

impl Default for SynthSettings {
    fn default() -> Self {
        let s = SynthConfig::default();
        Self {
            duration_s: s.duration_s,
            sample_hz: s.sample_hz,
            noise_sd: s.noise_sd,
            state_hold: s.state_hold,
            start_time: s.start_time,
        }
    }
}

/// Per-flag overrides; `None` keeps the configured value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub window: Option<usize>,
    pub hidden: Option<usize>,
    pub lr: Option<f64>,
    pub cd_k: Option<usize>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub sweep: bool,
    pub baseline: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Resolves a configuration: defaults, then the file at `path`, then
    /// `env_seed` (the value of `NILM_SEED`), then `overrides`.
    pub fn resolve(path: Option<&Path>, env_seed: Option<&str>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                Self::from_toml(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Self::default(),
        };
        if let Some(s) = env_seed {
            cfg.seed = s
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={s:?} is not an unsigned integer"))?;
        }
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = o.$field.clone() {
                    self.$field = v;
                }
            )*};
        }
        set!(window, hidden, lr, cd_k, epochs, batch, seed, threshold, out);
        for (slot, v) in [
            (&mut self.data, &o.data),
            (&mut self.profiles, &o.profiles),
            (&mut self.model, &o.model),
        ] {
            if v.is_some() {
                *slot = v.clone();
            }
        }
        self.sweep |= o.sweep;
        self.baseline |= o.baseline;
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            bail!("window must be >= 1");
        }
        if !(self.on_fraction > 0.0 && self.on_fraction <= 1.0) {
            bail!("on_fraction must be in (0, 1], got {}", self.on_fraction);
        }
        self.train_config(self.hidden).validate()?;
        Ok(())
    }

    pub fn train_config(&self, n_hidden: usize) -> TrainConfig {
        TrainConfig {
            n_hidden,
            learning_rate: self.lr,
            cd_steps: self.cd_k,
            epochs: self.epochs,
            batch_size: self.batch,
            seed: self.seed,
            threshold: self.threshold,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            duration_s: self.synth.duration_s,
            sample_hz: self.synth.sample_hz,
            noise_sd: self.synth.noise_sd,
            seed: self.seed,
            state_hold: self.synth.state_hold,
            start_time: self.synth.start_time,
        }
    }

    /// Writes the resolved configuration into the output directory.
    pub fn write_resolved(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("creating output directory {}", self.out.display()))?;
        let path = self.out.join(RESOLVED_CONFIG_FILE);
        std::fs::write(&path, self.to_toml()?).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
