//! Seeded synthetic households built from the additive load model
//! `P_agg(t) = Σ_i s_i(t) P_i(t)` plus meter noise.

use alloc::vec;
use alloc::vec::Vec;

use super::{window_aggregate, ApplianceProfile, LabeledWindow, PowerSeries, DEFAULT_ON_FRACTION};
use crate::numerics::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub duration_s: u64,
    /// Readings per second; `1 / sample_hz` must be a whole number of seconds.
    pub sample_hz: f64,
    /// Standard deviation of the meter noise added to the aggregate.
    pub noise_sd: f64,
    pub seed: u64,
    /// Appliance states may only change every `state_hold` readings. With
    /// `state_hold` equal to the analysis window, state changes fall on
    /// window boundaries.
    pub state_hold: usize,
    /// Unix time of the first reading.
    pub start_time: i64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            duration_s: 3600,
            sample_hz: 1.0,
            noise_sd: 0.0,
            seed: 0,
            state_hold: 1,
            start_time: 0,
        }
    }
}

/// Generator output: the meter signal, sub-metered appliance signals and
/// the true ON/OFF state of every appliance at every reading.
#[derive(Debug, Clone, PartialEq)]
pub struct Household {
    pub profiles: Vec<ApplianceProfile>,
    pub aggregate: PowerSeries,
    pub appliances: Vec<PowerSeries>,
    /// `states[appliance][reading]`.
    pub states: Vec<Vec<bool>>,
}

impl Household {
    /// Window labels from the recorded states by the same majority rule
    /// that [`super::derive_labels`] applies to readings.
    pub fn true_window_labels(&self, window: usize, on_fraction: f64) -> Result<Vec<Vec<bool>>> {
        if window == 0 {
            return Err(Error::ZeroDimension("window"));
        }
        let n_windows = self.aggregate.len() / window;
        Ok((0..n_windows)
            .map(|k| {
                self.states
                    .iter()
                    .map(|s| {
                        let on = s[k * window..(k + 1) * window].iter().filter(|&&b| b).count();
                        on as f64 / window as f64 >= on_fraction
                    })
                    .collect()
            })
            .collect())
    }

    /// Aggregate windows with ground-truth labels and sub-metered means.
    pub fn labeled_windows(&self, window: usize) -> Result<Vec<LabeledWindow>> {
        let windows = window_aggregate(&self.aggregate, window)?;
        let labels = self.true_window_labels(window, DEFAULT_ON_FRACTION)?;
        Ok(windows
            .into_iter()
            .zip(labels)
            .enumerate()
            .map(|(k, (w, labels))| {
                let means = self
                    .appliances
                    .iter()
                    .map(|a| a.watts()[k * window..(k + 1) * window].iter().sum::<f64>() / window as f64)
                    .collect();
                LabeledWindow {
                    window: w,
                    labels,
                    appliance_watts: Some(means),
                }
            })
            .collect())
    }
}

/// Simulates each appliance as a two-state Markov chain.
///
/// Initial states are drawn from each chain's stationary distribution (OFF
/// when both transition probabilities are zero). An ON appliance emits
/// `avg_on_power + N(0, noise_sd)`, an OFF one emits 0; readings are
/// clamped at 0. The aggregate is the sum of appliance readings plus
/// `N(0, cfg.noise_sd)`, clamped at 0.
pub fn synthesize(profiles: &[ApplianceProfile], cfg: &SynthConfig) -> Result<Household> {
    if profiles.is_empty() {
        return Err(Error::EmptyInput);
    }
    for p in profiles {
        p.validate()?;
    }
    if !(cfg.noise_sd >= 0.0 && cfg.noise_sd.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "noise sd must be >= 0, got {}",
            cfg.noise_sd
        )));
    }
    if cfg.state_hold == 0 {
        return Err(Error::ZeroDimension("state_hold"));
    }
    let step = 1.0 / cfg.sample_hz;
    let step_s = libm::round(step) as i64;
    if !(cfg.sample_hz > 0.0) || step_s < 1 || (step - step_s as f64).abs() > 1e-9 {
        return Err(Error::InvalidConfig(alloc::format!(
            "sample rate {} Hz does not give a whole-second step",
            cfg.sample_hz
        )));
    }
    let n = (cfg.duration_s / step_s as u64) as usize;
    if n == 0 {
        return Err(Error::SeriesTooShort { len: 0, window: 1 });
    }

    let mut rng = Rng::new(cfg.seed);
    let mut state: Vec<bool> = profiles
        .iter()
        .map(|p| {
            let total = p.p_on_to_off + p.p_off_to_on;
            let p_on = if total > 0.0 { p.p_off_to_on / total } else { 0.0 };
            rng.bernoulli(p_on)
        })
        .collect();

    let mut states = vec![Vec::with_capacity(n); profiles.len()];
    let mut device_watts = vec![Vec::with_capacity(n); profiles.len()];
    let mut aggregate = Vec::with_capacity(n);
    for t in 0..n {
        if t > 0 && t % cfg.state_hold == 0 {
            for (s, p) in state.iter_mut().zip(profiles) {
                let flip = if *s { p.p_on_to_off } else { p.p_off_to_on };
                if rng.bernoulli(flip) {
                    *s = !*s;
                }
            }
        }
        let mut total = 0.0;
        for (i, p) in profiles.iter().enumerate() {
            let w = if state[i] {
                let noise = if p.noise_sd > 0.0 {
                    p.noise_sd * rng.standard_normal()
                } else {
                    0.0
                };
                (p.avg_on_power + noise).max(0.0)
            } else {
                0.0
            };
            total += w;
            device_watts[i].push(w);
            states[i].push(state[i]);
        }
        if cfg.noise_sd > 0.0 {
            total = (total + cfg.noise_sd * rng.standard_normal()).max(0.0);
        }
        aggregate.push(total);
    }

    let timestamps: Vec<i64> = (0..n as i64).map(|k| cfg.start_time + k * step_s).collect();
    let appliances = device_watts
        .into_iter()
        .map(|w| PowerSeries::new(timestamps.clone(), w))
        .collect::<Result<Vec<_>>>()?;
    Ok(Household {
        profiles: profiles.to_vec(),
        aggregate: PowerSeries::new(timestamps, aggregate)?,
        appliances,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::derive_labels;

    fn profile(name: &str, power: f64, p: f64, noise: f64) -> ApplianceProfile {
        ApplianceProfile {
            p_on_to_off: p,
            p_off_to_on: p,
            noise_sd: noise,
            ..ApplianceProfile::new(name, power)
        }
    }

    #[test]
    fn zero_noise_aggregate_is_exact_sum() {
        let profiles = [profile("a", 100.0, 0.01, 0.0), profile("b", 250.0, 0.02, 0.0)];
        let h = synthesize(
            &profiles,
            &SynthConfig {
                duration_s: 2000,
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(h.aggregate.len(), 2000);
        for t in 0..2000 {
            let sum: f64 = h.appliances.iter().map(|a| a.watts()[t]).sum();
            assert_eq!(h.aggregate.watts()[t], sum);
            for (i, a) in h.appliances.iter().enumerate() {
                let expected = if h.states[i][t] { profiles[i].avg_on_power } else { 0.0 };
                assert_eq!(a.watts()[t], expected);
            }
        }
        assert!(h.states.iter().all(|s| s.iter().any(|&b| b) && s.iter().any(|&b| !b)));
    }

    #[test]
    fn dead_household() {
        let mut p = profile("a", 100.0, 0.0, 5.0);
        p.p_on_to_off = 0.3;
        let h = synthesize(
            &[p],
            &SynthConfig {
                duration_s: 500,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(h.aggregate.watts().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn seeded_and_validated() {
        let profiles = [profile("a", 100.0, 0.05, 3.0)];
        let cfg = SynthConfig {
            duration_s: 300,
            noise_sd: 2.0,
            seed: 11,
            ..Default::default()
        };
        assert_eq!(
            synthesize(&profiles, &cfg).unwrap(),
            synthesize(&profiles, &cfg).unwrap()
        );
        let bad = [profile("a", 100.0, 1.5, 0.0)];
        assert_eq!(synthesize(&bad, &cfg).unwrap_err(), Error::InvalidProbability(1.5));
        assert!(synthesize(&[], &cfg).is_err());
        let slow = SynthConfig {
            sample_hz: 1.0 / 60.0,
            duration_s: 600,
            ..cfg.clone()
        };
        let h = synthesize(&profiles, &slow).unwrap();
        assert_eq!(h.aggregate.len(), 10);
        assert_eq!(h.aggregate.step_seconds(), Some(60));
        assert!(synthesize(&profiles, &SynthConfig { sample_hz: 0.7, ..cfg }).is_err());
    }

    #[test]
    fn derived_labels_reproduce_ground_truth_when_aligned() {
        let profiles = [profile("a", 100.0, 0.2, 20.0), profile("b", 600.0, 0.3, 100.0)];
        let profiles: Vec<_> = profiles
            .into_iter()
            .map(|mut p| {
                p.on_threshold = p.noise_sd * 4.0 + 1.0;
                p
            })
            .collect();
        let cfg = SynthConfig {
            duration_s: 6000,
            seed: 5,
            state_hold: 60,
            ..Default::default()
        };
        let h = synthesize(&profiles, &cfg).unwrap();
        let truth = h.true_window_labels(60, 0.5).unwrap();
        for (i, p) in profiles.iter().enumerate() {
            let derived = derive_labels(&h.appliances[i], p, 60, 0.5).unwrap();
            let expected: Vec<bool> = truth.iter().map(|w| w[i]).collect();
            assert_eq!(derived, expected, "appliance {}", p.name);
        }
    }

    #[test]
    fn labeled_windows_carry_submetered_means() {
        let profiles = [profile("a", 100.0, 0.0, 0.0)];
        let mut p = profiles[0].clone();
        p.p_off_to_on = 1.0;
        let h = synthesize(
            &[p],
            &SynthConfig {
                duration_s: 130,
                ..Default::default()
            },
        )
        .unwrap();
        let lw = h.labeled_windows(60).unwrap();
        assert_eq!(lw.len(), 2);
        assert_eq!(lw[0].labels, vec![true]);
        assert_eq!(lw[0].appliance_watts, Some(vec![100.0]));
    }
}
