//! Brute-force enumeration of the joint `p(x, y, h)` for tiny models with
//! binary visibles. Used as a verification oracle, never for training.

use alloc::vec;
use alloc::vec::Vec;

use super::{energy, RbmParameters};
use crate::numerics::{exp, log_sum_exp};
use crate::{Error, Result};

/// Largest `n_visible + n_labels + n_hidden` that will be enumerated.
pub const MAX_ENUMERATION_UNITS: usize = 20;

/// Normalized probabilities of every binary `(x, y, h)` configuration.
///
/// Configuration index bits: `x` in the low `V` bits, then `y`, then `h`.
#[derive(Debug, Clone)]
pub struct JointTable {
    n_visible: usize,
    n_labels: usize,
    n_hidden: usize,
    log_z: f64,
    probs: Vec<f64>,
}

fn bits(index: usize, offset: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| if index >> (offset + k) & 1 == 1 { 1.0 } else { 0.0 })
        .collect()
}

fn pack(values: &[f64], offset: usize) -> usize {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.5)
        .map(|(k, _)| 1usize << (offset + k))
        .sum()
}

impl JointTable {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `(x, y, h)` for a configuration index.
    pub fn config(&self, index: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (v, c, n) = (self.n_visible, self.n_labels, self.n_hidden);
        (bits(index, 0, v), bits(index, v, c), bits(index, v + c, n))
    }

    pub fn index_of(&self, x: &[f64], y: &[f64], h: &[f64]) -> usize {
        pack(x, 0) | pack(y, self.n_visible) | pack(h, self.n_visible + self.n_labels)
    }

    fn x_mask(&self) -> usize {
        (1 << self.n_visible) - 1
    }

    fn y_mask(&self) -> usize {
        ((1 << self.n_labels) - 1) << self.n_visible
    }

    fn h_mask(&self) -> usize {
        ((1 << self.n_hidden) - 1) << (self.n_visible + self.n_labels)
    }

    /// Sum of probabilities over entries whose `mask` bits equal `pattern`,
    /// together with the probability-weighted sum of `stat(index)`.
    fn clamped(&self, mask: usize, pattern: usize, stat: impl Fn(usize) -> f64) -> (f64, f64) {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == pattern)
            .fold((0.0, 0.0), |(mass, acc), (i, &p)| (mass + p, acc + p * stat(i)))
    }

    fn bit_of(&self, offset: usize) -> impl Fn(usize) -> f64 {
        move |i| (i >> offset & 1) as f64
    }

    /// `p(h_j = 1 | x, y)` by summing table entries.
    pub fn p_h_given_xy(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mask = self.x_mask() | self.y_mask();
        let pattern = pack(x, 0) | pack(y, self.n_visible);
        let base = self.n_visible + self.n_labels;
        (0..self.n_hidden)
            .map(|j| {
                let (mass, on) = self.clamped(mask, pattern, self.bit_of(base + j));
                on / mass
            })
            .collect()
    }

    /// `p(x_i = 1 | h)` by summing table entries.
    pub fn p_x_given_h(&self, h: &[f64]) -> Vec<f64> {
        let pattern = pack(h, self.n_visible + self.n_labels);
        (0..self.n_visible)
            .map(|i| {
                let (mass, on) = self.clamped(self.h_mask(), pattern, self.bit_of(i));
                on / mass
            })
            .collect()
    }

    /// `p(y_l = 1 | h)` by summing table entries.
    pub fn p_y_given_h(&self, h: &[f64]) -> Vec<f64> {
        let pattern = pack(h, self.n_visible + self.n_labels);
        (0..self.n_labels)
            .map(|l| {
                let (mass, on) = self.clamped(self.h_mask(), pattern, self.bit_of(self.n_visible + l));
                on / mass
            })
            .collect()
    }

    /// `p(y_l = 1 | x)` by summing table entries.
    pub fn p_y_given_x(&self, x: &[f64]) -> Vec<f64> {
        let pattern = pack(x, 0);
        (0..self.n_labels)
            .map(|l| {
                let (mass, on) = self.clamped(self.x_mask(), pattern, self.bit_of(self.n_visible + l));
                on / mass
            })
            .collect()
    }

    /// Marginal `ln p(x, y)`.
    pub fn log_marginal_xy(&self, x: &[f64], y: &[f64]) -> f64 {
        let mask = self.x_mask() | self.y_mask();
        let pattern = pack(x, 0) | pack(y, self.n_visible);
        let (mass, _) = self.clamped(mask, pattern, |_| 0.0);
        crate::numerics::ln(mass)
    }
}

fn check_size(p: &RbmParameters) -> Result<usize> {
    p.check()?;
    let units = p.n_visible() + p.n_labels() + p.n_hidden();
    if units > MAX_ENUMERATION_UNITS {
        return Err(Error::EnumerationTooLarge {
            units,
            limit: MAX_ENUMERATION_UNITS,
        });
    }
    Ok(units)
}

/// Enumerates every binary `(x, y, h)` and normalizes `exp(-E)` by the full
/// partition function.
pub fn exact_joint_distribution(p: &RbmParameters) -> Result<JointTable> {
    let units = check_size(p)?;
    let mut table = JointTable {
        n_visible: p.n_visible(),
        n_labels: p.n_labels(),
        n_hidden: p.n_hidden(),
        log_z: 0.0,
        probs: Vec::with_capacity(1 << units),
    };
    let mut neg_energy = Vec::with_capacity(1 << units);
    for index in 0..1usize << units {
        let (x, y, h) = table.config(index);
        neg_energy.push(-energy(p, &x, &y, &h)?);
    }
    let log_z = log_sum_exp(&neg_energy);
    if !log_z.is_finite() {
        return Err(Error::DivergentInference);
    }
    table.log_z = log_z;
    table.probs = neg_energy.into_iter().map(|e| exp(e - log_z)).collect();
    Ok(table)
}

/// `∂ ln p(x, y) / ∂Θ` computed exactly: the expectation of each sufficient
/// statistic with `(x, y)` clamped minus its expectation under the model.
///
/// `x` must be binary so that the sample is a configuration of the table.
#[allow(clippy::needless_range_loop)]
pub fn exact_loglik_gradient(p: &RbmParameters, x: &[f64], y: &[f64]) -> Result<RbmParameters> {
    check_size(p)?;
    super::check_len("exact gradient (x)", p.n_visible(), x)?;
    super::check_len("exact gradient (y)", p.n_labels(), y)?;
    if let Some(&bad) = x.iter().chain(y).find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidProbability(bad));
    }
    let table = exact_joint_distribution(p)?;
    let (nv, nh, nl) = (p.n_visible(), p.n_hidden(), p.n_labels());

    // Sufficient statistics of one configuration, accumulated with a weight.
    let accumulate = |acc: &mut RbmParameters, weight: f64, x: &[f64], y: &[f64], h: &[f64]| {
        for j in 0..nh {
            if h[j] == 0.0 {
                continue;
            }
            acc.b[j] += weight;
            for i in 0..nv {
                let v = acc.w.get(j, i) + weight * x[i];
                acc.w.set(j, i, v);
            }
            for l in 0..nl {
                let v = acc.u.get(j, l) + weight * y[l];
                acc.u.set(j, l, v);
            }
        }
        for i in 0..nv {
            acc.a[i] += weight * x[i];
        }
        for l in 0..nl {
            acc.c[l] += weight * y[l];
        }
    };

    let mut model = RbmParameters::zeros(nv, nh, nl);
    for (index, &prob) in table.probabilities().iter().enumerate() {
        let (cx, cy, ch) = table.config(index);
        accumulate(&mut model, prob, &cx, &cy, &ch);
    }

    // Clamp (x, y) and renormalize over h.
    let mut data = RbmParameters::zeros(nv, nh, nl);
    let mut hidden_weights = vec![0.0; 1 << nh];
    for (k, slot) in hidden_weights.iter_mut().enumerate() {
        let h = bits(k, 0, nh);
        *slot = table.probabilities()[table.index_of(x, y, &h)];
    }
    let mass: f64 = hidden_weights.iter().sum();
    for (k, &wgt) in hidden_weights.iter().enumerate() {
        let h = bits(k, 0, nh);
        accumulate(&mut data, wgt / mass, x, y, &h);
    }

    data.add_scaled(-1.0, &model)?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Matrix, Rng};
    use crate::rbm::tests::random_params;
    use crate::rbm::{p_h_given_xy, p_x_given_h, p_y_given_h_multilabel};

    #[test]
    fn zero_model_is_uniform() {
        let t = exact_joint_distribution(&RbmParameters::zeros(3, 2, 2)).unwrap();
        assert_eq!(t.len(), 128);
        for &p in t.probabilities() {
            assert!((p - 1.0 / 128.0).abs() < 1e-15);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = Rng::new(1);
        for _ in 0..10 {
            let p = random_params(3, 3, 2, 2.0, &mut rng);
            let t = exact_joint_distribution(&p).unwrap();
            assert!((t.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn size_limit() {
        let p = RbmParameters::zeros(15, 4, 2);
        assert_eq!(
            exact_joint_distribution(&p).unwrap_err(),
            Error::EnumerationTooLarge { units: 21, limit: 20 }
        );
        assert!(exact_loglik_gradient(&p, &[0.0; 15], &[0.0; 2]).is_err());
    }

    #[test]
    fn table_conditionals_match_closed_forms() {
        let mut rng = Rng::new(99);
        let p = random_params(3, 2, 2, 1.0, &mut rng);
        let t = exact_joint_distribution(&p).unwrap();
        let x = [1.0, 0.0, 1.0];
        let y = [0.0, 1.0];
        let h = [1.0, 0.0];
        for (a, b) in t.p_h_given_xy(&x, &y).iter().zip(p_h_given_xy(&p, &x, &y).unwrap()) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in t.p_x_given_h(&h).iter().zip(p_x_given_h(&p, &h).unwrap()) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in t.p_y_given_h(&h).iter().zip(p_y_given_h_multilabel(&p, &h).unwrap()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn label_bias_gradient_in_decoupled_model() {
        // With W = U = 0 the labels are independent Bernoulli(σ(c_l)).
        let mut rng = Rng::new(4);
        let mut p = random_params(3, 2, 2, 1.0, &mut rng);
        p.w = Matrix::zeros(2, 3);
        p.u = Matrix::zeros(2, 2);
        let y = [1.0, 0.0];
        let g = exact_loglik_gradient(&p, &[0.0, 1.0, 1.0], &y).unwrap();
        for l in 0..2 {
            let model_on = crate::numerics::sigmoid_scalar(p.c[l]);
            assert!((g.c[l] - (y[l] - model_on)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_vanishes_when_expectations_coincide() {
        // Zero model: every unit is an independent fair coin, and a sample's
        // clamped statistics cannot match that exactly, but averaging the
        // gradient over the whole uniform table must give zero.
        let p = RbmParameters::zeros(2, 2, 1);
        let t = exact_joint_distribution(&p).unwrap();
        let mut total = RbmParameters::zeros(2, 2, 1);
        for xi in 0..4 {
            for yi in 0..2 {
                let x = bits(xi, 0, 2);
                let y = bits(yi, 0, 1);
                let g = exact_loglik_gradient(&p, &x, &y).unwrap();
                let weight = (0..4)
                    .map(|hi| t.probabilities()[t.index_of(&x, &y, &bits(hi, 0, 2))])
                    .sum::<f64>();
                total.add_scaled(weight, &g).unwrap();
            }
        }
        assert!(total.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_rejects_non_binary_sample() {
        let p = RbmParameters::zeros(3, 2, 2);
        assert!(exact_loglik_gradient(&p, &[0.5, 0.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
