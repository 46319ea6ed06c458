//! Combinatorial-optimization disaggregation by exhaustive search.
//!
//! Finds the ON/OFF assignment whose summed appliance powers best explain
//! an aggregate reading. Search is over all `2^N` subsets, so `N` is capped.

use alloc::vec::Vec;

use crate::data::RawWindow;
use crate::{Error, Result};

/// Largest device count searched exhaustively.
pub const MAX_CO_DEVICES: usize = 25;

/// `Σ s_i P_i`.
pub fn aggregate(states: &[bool], powers: &[f64]) -> Result<f64> {
    if states.len() != powers.len() {
        return Err(Error::DimensionMismatch {
            op: "aggregate",
            left: (states.len(), 1),
            right: (powers.len(), 1),
        });
    }
    Ok(states.iter().zip(powers).filter(|(s, _)| **s).map(|(_, p)| p).sum())
}

fn validate_powers(powers: &[f64]) -> Result<()> {
    if powers.len() > MAX_CO_DEVICES {
        return Err(Error::InstanceTooLarge {
            devices: powers.len(),
            limit: MAX_CO_DEVICES,
        });
    }
    if let Some(p) = powers.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidConfig(alloc::format!(
            "device power must be > 0, got {p}"
        )));
    }
    Ok(())
}

/// Bit `i` of the mask is device `i`; comparing state vectors as binary
/// strings `(s_0, s_1, ...)` means device 0 is the most significant digit.
fn lexicographic_key(mask: u32, n: usize) -> u32 {
    (0..n).fold(0, |key, i| (key << 1) | (mask >> i & 1))
}

/// `argmin_s |p_agg − Σ s_i P_i|`.
///
/// Ties go to the vector with fewest ON devices, then to the
/// lexicographically smallest state vector.
pub fn co_disaggregate(p_agg: f64, powers: &[f64]) -> Result<Vec<bool>> {
    validate_powers(powers)?;
    let n = powers.len();
    let mut best: Option<(f64, u32, u32, u32)> = None;
    for mask in 0u32..(1u32 << n) {
        let sum: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| powers[i]).sum();
        let candidate = ((p_agg - sum).abs(), mask.count_ones(), lexicographic_key(mask, n), mask);
        let better = match best {
            None => true,
            Some((r, ones, key, _)) => {
                candidate.0 < r || (candidate.0 == r && (candidate.1, candidate.2) < (ones, key))
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    let (_, _, _, mask) = best.expect("at least the empty subset is searched");
    Ok((0..n).map(|i| mask >> i & 1 == 1).collect())
}

/// Applies [`co_disaggregate`] to the mean power of each window.
pub fn co_predict_series(windows: &[RawWindow], powers: &[f64]) -> Result<Vec<Vec<bool>>> {
    validate_powers(powers)?;
    windows.iter().map(|w| co_disaggregate(w.mean(), powers)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use alloc::vec;

    fn brute_force_residuals(p_agg: f64, powers: &[f64]) -> Vec<f64> {
        let n = powers.len();
        (0..1usize << n)
            .map(|mask| {
                let mut s = 0.0;
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        s += powers[i];
                    }
                }
                (p_agg - s).abs()
            })
            .collect()
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate(&[false, false], &[100.0, 200.0]).unwrap(), 0.0);
        assert_eq!(aggregate(&[true, true], &[100.0, 200.0]).unwrap(), 300.0);
        assert!(aggregate(&[true], &[1.0, 2.0]).is_err());
        let mut rng = Rng::new(4);
        let powers: Vec<f64> = (0..8).map(|_| rng.uniform_in(1.0, 500.0)).collect();
        let states: Vec<bool> = (0..8).map(|_| rng.bernoulli(0.5)).collect();
        let mut expected = 0.0;
        for i in 0..8 {
            if states[i] {
                expected += powers[i];
            }
        }
        assert_eq!(aggregate(&states, &powers).unwrap(), expected);
    }

    #[test]
    fn co_examples() {
        assert_eq!(co_disaggregate(0.0, &[100.0, 200.0, 400.0]).unwrap(), vec![false; 3]);
        assert_eq!(
            co_disaggregate(500.0, &[100.0, 200.0, 400.0]).unwrap(),
            vec![true, false, true]
        );
        // (1,0) and (0,1) both leave 50 W; equal ON counts, (0,1) < (1,0).
        assert_eq!(co_disaggregate(150.0, &[100.0, 200.0]).unwrap(), vec![false, true]);
        // (1,1,0) and (0,0,1) both explain 300 W exactly; fewer ON wins.
        assert_eq!(
            co_disaggregate(300.0, &[100.0, 200.0, 300.0]).unwrap(),
            vec![false, false, true]
        );
    }

    #[test]
    fn limits_and_validation() {
        assert_eq!(
            co_disaggregate(1.0, &[1.0; 26]).unwrap_err(),
            Error::InstanceTooLarge { devices: 26, limit: 25 }
        );
        assert!(co_disaggregate(1.0, &[1.0, 0.0]).is_err());
        assert_eq!(co_predict_series(&[], &[1.0]).unwrap(), Vec::<Vec<bool>>::new());
    }

    #[test]
    fn residual_is_minimal_by_enumeration() {
        let mut rng = Rng::new(21);
        for _ in 0..50 {
            let n = 1 + (rng.uniform() * 10.0) as usize;
            let powers: Vec<f64> = (0..n).map(|_| rng.uniform_in(10.0, 2000.0)).collect();
            let p_agg = rng.uniform_in(0.0, 5000.0);
            let s = co_disaggregate(p_agg, &powers).unwrap();
            let r = (p_agg - aggregate(&s, &powers).unwrap()).abs();
            let min = brute_force_residuals(p_agg, &powers)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            assert_eq!(r, min);
        }
    }

    #[test]
    fn recovers_states_when_subset_sums_distinct() {
        let powers = [100.0, 250.0, 600.0, 1500.0];
        for mask in 0..16usize {
            let s: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
            let total = aggregate(&s, &powers).unwrap();
            let back = co_disaggregate(total, &powers).unwrap();
            assert_eq!(back, s);
        }
    }
}
