//! Multi-label F1 scores and energy-disaggregation errors.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

impl core::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

/// `2TP / (2TP + FN + FP)`, or 0 when nothing was predicted or present.
pub fn f1(c: ConfusionCounts) -> f64 {
    let denom = 2 * c.tp + c.fn_ + c.fp;
    if denom == 0 {
        0.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    }
}

/// Per-class counts for `preds[sample][class]` against `truths`.
pub fn confusion_per_class(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<Vec<ConfusionCounts>> {
    if preds.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            op: "confusion counts (samples)",
            left: (preds.len(), 1),
            right: (truths.len(), 1),
        });
    }
    let classes = truths.first().map_or(0, Vec::len);
    let mut counts = alloc::vec![ConfusionCounts::default(); classes];
    for (p, t) in preds.iter().zip(truths) {
        if p.len() != classes || t.len() != classes {
            return Err(Error::DimensionMismatch {
                op: "confusion counts (classes)",
                left: (p.len(), 1),
                right: (t.len(), classes),
            });
        }
        for (c, (&pv, &tv)) in counts.iter_mut().zip(p.iter().zip(t)) {
            c.record(pv, tv);
        }
    }
    Ok(counts)
}

pub fn per_class_f1(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<Vec<f64>> {
    Ok(confusion_per_class(preds, truths)?.into_iter().map(f1).collect())
}

/// Unweighted mean of per-class F1, zero-support classes included.
pub fn macro_f1(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<f64> {
    let scores = per_class_f1(preds, truths)?;
    if scores.is_empty() {
        return Ok(0.0);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// F1 of the counts pooled over every class.
pub fn micro_f1(preds: &[Vec<bool>], truths: &[Vec<bool>]) -> Result<f64> {
    let pooled = confusion_per_class(preds, truths)?
        .into_iter()
        .fold(ConfusionCounts::default(), |a, b| a + b);
    Ok(f1(pooled))
}

/// Energy per window: `state × avg_power × window_hours` (Wh when power is
/// in watts).
pub fn estimate_energy(states: &[bool], avg_power: f64, window_hours: f64) -> Vec<f64> {
    states
        .iter()
        .map(|&s| if s { avg_power * window_hours } else { 0.0 })
        .collect()
}

fn check_pair(truth: &[f64], est: &[f64]) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(Error::DimensionMismatch {
            op: "energy error",
            left: (truth.len(), 1),
            right: (est.len(), 1),
        });
    }
    let total: f64 = truth.iter().sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedNee);
    }
    Ok(total)
}

/// Normalized energy error `Σ_t |P_t − P̂_t| / Σ_t P_t`.
pub fn nee(truth: &[f64], est: &[f64]) -> Result<f64> {
    let total = check_pair(truth, est)?;
    Ok(truth.iter().zip(est).map(|(t, e)| (t - e).abs()).sum::<f64>() / total)
}

/// `|Σ P̂ − Σ P| / Σ P`: whether the total energy came out right,
/// regardless of when it was attributed.
pub fn total_energy_error(truth: &[f64], est: &[f64]) -> Result<f64> {
    let total = check_pair(truth, est)?;
    Ok((est.iter().sum::<f64>() - total).abs() / total)
}

/// Scores of one method on one evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub classes: Vec<String>,
    pub per_class_f1: Vec<f64>,
    pub macro_f1: f64,
    pub micro_f1: f64,
    /// NaN where the appliance never consumed energy (NEE undefined).
    pub per_appliance_nee: Vec<f64>,
    /// NaN where the appliance never consumed energy.
    pub per_appliance_total_energy_error: Vec<f64>,
}

impl EvalReport {
    /// Scores `preds` against `truths`; `true_energy[a]` and `est_energy[a]`
    /// are per-window energy series of appliance `a`.
    pub fn compute(
        method: impl Into<String>,
        classes: Vec<String>,
        preds: &[Vec<bool>],
        truths: &[Vec<bool>],
        true_energy: &[Vec<f64>],
        est_energy: &[Vec<f64>],
    ) -> Result<Self> {
        if true_energy.len() != classes.len() || est_energy.len() != classes.len() {
            return Err(Error::DimensionMismatch {
                op: "report (appliances)",
                left: (classes.len(), 1),
                right: (true_energy.len(), est_energy.len()),
            });
        }
        let per_class_f1 = per_class_f1(preds, truths)?;
        if !truths.is_empty() && per_class_f1.len() != classes.len() {
            return Err(Error::DimensionMismatch {
                op: "report (classes)",
                left: (classes.len(), 1),
                right: (per_class_f1.len(), 1),
            });
        }
        let undefined_as_nan = |r: Result<f64>| match r {
            Ok(v) => Ok(v),
            Err(Error::UndefinedNee) => Ok(f64::NAN),
            Err(e) => Err(e),
        };
        let mut nees = Vec::with_capacity(classes.len());
        let mut totals = Vec::with_capacity(classes.len());
        for (t, e) in true_energy.iter().zip(est_energy) {
            nees.push(undefined_as_nan(nee(t, e))?);
            totals.push(undefined_as_nan(total_energy_error(t, e))?);
        }
        Ok(Self {
            method: method.into(),
            classes,
            macro_f1: if per_class_f1.is_empty() {
                0.0
            } else {
                per_class_f1.iter().sum::<f64>() / per_class_f1.len() as f64
            },
            micro_f1: micro_f1(preds, truths)?,
            per_class_f1,
            per_appliance_nee: nees,
            per_appliance_total_energy_error: totals,
        })
    }
}
