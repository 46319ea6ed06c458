//! Power series, window labelling, normalization and dataset splitting.

mod synth;

use alloc::string::String;
use alloc::vec::Vec;

use crate::numerics::Rng;
use crate::{Error, Result};

pub use synth::{synthesize, Household, SynthConfig};

/// Readings counted as ON when a window is labelled by majority.
pub const DEFAULT_ON_FRACTION: f64 = 0.5;
/// Watts above which an appliance reading counts as ON.
pub const DEFAULT_ON_THRESHOLD: f64 = 10.0;
/// Split proportions for train / test / validation.
pub const DEFAULT_SPLIT: (f64, f64, f64) = (0.5, 0.3, 0.2);

/// A uniformly sampled, nonnegative power signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    timestamps: Vec<i64>,
    watts: Vec<f64>,
}

impl PowerSeries {
    /// Checks equal lengths, a strictly increasing uniform time step and
    /// finite nonnegative readings.
    pub fn new(timestamps: Vec<i64>, watts: Vec<f64>) -> Result<Self> {
        if timestamps.len() != watts.len() {
            return Err(Error::DimensionMismatch {
                op: "power series",
                left: (timestamps.len(), 1),
                right: (watts.len(), 1),
            });
        }
        if let Some(&w) = watts.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidConfig(alloc::format!(
                "power reading {w} is not a nonnegative number"
            )));
        }
        if timestamps.len() >= 2 {
            let step = timestamps[1] - timestamps[0];
            for (k, pair) in timestamps.windows(2).enumerate() {
                let d = pair[1] - pair[0];
                if d <= 0 {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "timestamps not strictly increasing at index {}",
                        k + 1
                    )));
                }
                if d != step {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "non-uniform sampling step at index {}: {d} s vs {step} s",
                        k + 1
                    )));
                }
            }
        }
        Ok(Self { timestamps, watts })
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn watts(&self) -> &[f64] {
        &self.watts
    }

    pub fn len(&self) -> usize {
        self.watts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.watts.is_empty()
    }

    /// Seconds between readings, `None` for fewer than two readings.
    pub fn step_seconds(&self) -> Option<i64> {
        (self.timestamps.len() >= 2).then(|| self.timestamps[1] - self.timestamps[0])
    }
}

/// Per-appliance metadata, including the two-state Markov chain used by
/// the synthetic generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceProfile {
    pub name: String,
    pub avg_on_power: f64,
    pub on_threshold: f64,
    pub p_on_to_off: f64,
    pub p_off_to_on: f64,
    pub noise_sd: f64,
}

impl ApplianceProfile {
    pub fn new(name: impl Into<String>, avg_on_power: f64) -> Self {
        Self {
            name: name.into(),
            avg_on_power,
            on_threshold: DEFAULT_ON_THRESHOLD,
            p_on_to_off: 0.0,
            p_off_to_on: 0.0,
            noise_sd: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(alloc::format!("appliance {:?}: {msg}", self.name)));
        if !(self.avg_on_power > 0.0 && self.avg_on_power.is_finite()) {
            return bad(alloc::format!(
                "average ON power must be > 0, got {}",
                self.avg_on_power
            ));
        }
        if !(self.on_threshold >= 0.0 && self.on_threshold.is_finite()) {
            return bad(alloc::format!("ON threshold must be >= 0, got {}", self.on_threshold));
        }
        for p in [self.p_on_to_off, self.p_off_to_on] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability(p));
            }
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(alloc::format!("noise sd must be >= 0, got {}", self.noise_sd));
        }
        Ok(())
    }
}

/// One model input: a normalized window and the appliance states.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<bool>,
    pub window_start: i64,
}

/// Consecutive readings before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawWindow {
    pub start: i64,
    pub watts: Vec<f64>,
}

impl RawWindow {
    pub fn mean(&self) -> f64 {
        self.watts.iter().sum::<f64>() / self.watts.len() as f64
    }
}

/// A raw window with its labels, kept together through the split.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub window: RawWindow,
    pub labels: Vec<bool>,
    /// Mean true power of each appliance over the window, when sub-metered.
    pub appliance_watts: Option<Vec<f64>>,
}

/// Min-max scaling fitted on training windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub min_watts: f64,
    pub max_watts: f64,
}

impl Scaler {
    pub fn fit<'a>(windows: impl IntoIterator<Item = &'a RawWindow>) -> Result<Self> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for w in windows {
            for &v in &w.watts {
                min = min.min(v);
                max = max.max(v);
            }
        }
        if !min.is_finite() {
            return Err(Error::EmptyInput);
        }
        Self::new(min, max)
    }

    pub fn new(min_watts: f64, max_watts: f64) -> Result<Self> {
        if !(max_watts > min_watts) {
            return Err(Error::ConstantSignal);
        }
        Ok(Self { min_watts, max_watts })
    }

    /// Unclamped affine map; [`Scaler::apply`] clamps into `[0, 1]`.
    pub fn scale(&self, watts: f64) -> f64 {
        (watts - self.min_watts) / (self.max_watts - self.min_watts)
    }

    pub fn apply(&self, watts: f64) -> f64 {
        self.scale(watts).clamp(0.0, 1.0)
    }

    pub fn invert(&self, scaled: f64) -> f64 {
        self.min_watts + scaled * (self.max_watts - self.min_watts)
    }
}

/// Ordered samples with the profiles and scaler that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub samples: Vec<Sample>,
    pub profiles: Vec<ApplianceProfile>,
    pub scaler: Scaler,
}

impl LabeledDataset {
    pub fn from_windows(windows: &[LabeledWindow], profiles: Vec<ApplianceProfile>, scaler: Scaler) -> Result<Self> {
        let samples = windows
            .iter()
            .map(|lw| {
                if lw.labels.len() != profiles.len() {
                    return Err(Error::DimensionMismatch {
                        op: "labels vs profiles",
                        left: (lw.labels.len(), 1),
                        right: (profiles.len(), 1),
                    });
                }
                Ok(Sample {
                    x: lw.window.watts.iter().map(|&w| scaler.apply(w)).collect(),
                    y: lw.labels.clone(),
                    window_start: lw.window.start,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            samples,
            profiles,
            scaler,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn split(&self, ratios: (f64, f64, f64), seed: u64) -> Result<(Self, Self, Self)> {
        let (a, b, c) = split(&self.samples, ratios, seed)?;
        let wrap = |samples| Self {
            samples,
            profiles: self.profiles.clone(),
            scaler: self.scaler,
        };
        Ok((wrap(a), wrap(b), wrap(c)))
    }
}

/// Non-overlapping consecutive windows; a trailing partial window is dropped.
pub fn window_aggregate(series: &PowerSeries, window: usize) -> Result<Vec<RawWindow>> {
    if window == 0 {
        return Err(Error::ZeroDimension("window"));
    }
    if series.len() < window {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            window,
        });
    }
    Ok(series
        .watts()
        .chunks_exact(window)
        .zip(series.timestamps().chunks_exact(window))
        .map(|(w, t)| RawWindow {
            start: t[0],
            watts: w.to_vec(),
        })
        .collect())
}

/// Window labels by majority: ON iff the fraction of readings above the
/// profile's threshold is at least `on_fraction`. Trailing partial windows
/// are dropped, matching [`window_aggregate`].
pub fn derive_labels(
    appliance: &PowerSeries,
    profile: &ApplianceProfile,
    window: usize,
    on_fraction: f64,
) -> Result<Vec<bool>> {
    if window == 0 {
        return Err(Error::ZeroDimension("window"));
    }
    if !(on_fraction > 0.0 && on_fraction <= 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "on_fraction must be in (0, 1], got {on_fraction}"
        )));
    }
    Ok(appliance
        .watts()
        .chunks_exact(window)
        .map(|chunk| {
            let on = chunk.iter().filter(|&&w| w > profile.on_threshold).count();
            on as f64 / window as f64 >= on_fraction
        })
        .collect())
}

/// Aggregate windows labelled from sub-metered appliance series, one
/// series per profile, all sampled on the aggregate's timestamps.
pub fn label_windows(
    aggregate: &PowerSeries,
    appliances: &[PowerSeries],
    profiles: &[ApplianceProfile],
    window: usize,
    on_fraction: f64,
) -> Result<Vec<LabeledWindow>> {
    if appliances.len() != profiles.len() {
        return Err(Error::DimensionMismatch {
            op: "appliances vs profiles",
            left: (appliances.len(), 1),
            right: (profiles.len(), 1),
        });
    }
    if let Some(a) = appliances.iter().find(|a| a.timestamps() != aggregate.timestamps()) {
        return Err(Error::DimensionMismatch {
            op: "appliance vs aggregate timestamps",
            left: (a.len(), 1),
            right: (aggregate.len(), 1),
        });
    }
    let windows = window_aggregate(aggregate, window)?;
    let labels = appliances
        .iter()
        .zip(profiles)
        .map(|(a, p)| derive_labels(a, p, window, on_fraction))
        .collect::<Result<Vec<_>>>()?;
    Ok(windows
        .into_iter()
        .enumerate()
        .map(|(k, w)| LabeledWindow {
            window: w,
            labels: labels.iter().map(|l| l[k]).collect(),
            appliance_watts: Some(
                appliances
                    .iter()
                    .map(|a| a.watts()[k * window..(k + 1) * window].iter().sum::<f64>() / window as f64)
                    .collect(),
            ),
        })
        .collect())
}

/// Scales windows into `[0, 1]`, fitting a scaler on these windows when
/// none is given. Values outside a reused scaler's range are clamped.
pub fn normalize(windows: &[RawWindow], scaler: Option<Scaler>) -> Result<(Vec<Vec<f64>>, Scaler)> {
    let scaler = match scaler {
        Some(s) => s,
        None => Scaler::fit(windows)?,
    };
    let xs = windows
        .iter()
        .map(|w| w.watts.iter().map(|&v| scaler.apply(v)).collect())
        .collect();
    Ok((xs, scaler))
}

/// Seeded shuffle, then contiguous cut into `⌊r₀N⌋`, `⌊r₁N⌋` and the
/// remainder.
pub fn split<T: Clone>(items: &[T], ratios: (f64, f64, f64), seed: u64) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let (r0, r1, r2) = ratios;
    if !(r0 > 0.0 && r1 > 0.0 && r2 > 0.0) || ((r0 + r1 + r2) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(alloc::format!(
            "split ratios must be positive and sum to 1, got {r0}:{r1}:{r2}"
        )));
    }
    let n = items.len();
    if n < 3 {
        return Err(Error::TooFewSamples(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    Rng::new(seed).shuffle(&mut order);
    // Small epsilon so that e.g. 0.3 * 10 lands on 3, not 2.9999999999999996.
    let first = libm::floor(r0 * n as f64 + 1e-9) as usize;
    let second = libm::floor(r1 * n as f64 + 1e-9) as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<T>>();
    Ok((
        pick(&order[..first]),
        pick(&order[first..first + second]),
        pick(&order[first + second..]),
    ))
}
