//! Multi-label classification RBM.
//!
//! Three layers of units share one energy function: real-valued visibles
//! `x ∈ [0,1]^V` (a normalized power window), binary hiddens `h`, and one
//! binary label unit per appliance `y ∈ {0,1}^C`:
//!
//! ```text
//! E(y, x, h) = -hᵀWx - aᵀx - bᵀh - cᵀy - hᵀUy
//! ```
//!
//! `W` is `n_hidden × n_visible` and `U` is `n_hidden × n_labels`. Labels
//! interact with the visibles only through the hidden layer, so given `h`
//! every visible and every label is conditionally independent.

mod exact;
mod inference;
mod train;

use alloc::vec::Vec;

use crate::numerics::{self, dot, sigmoid, softmax, Matrix, Rng};
use crate::{Error, Result};

pub use exact::{exact_joint_distribution, exact_loglik_gradient, JointTable, MAX_ENUMERATION_UNITS};
pub use inference::{mean_field_infer, predict_labels, threshold_marginals, MfResult, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use train::{cd_k_update, reconstruction_error, train, train_with, TrainConfig, TrainingRun};

const INIT_SCALE: f64 = 0.01;

/// Model parameters `Θ = (W, U, a, b, c)`. Also used as the gradient
/// container, since a gradient has exactly the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmParameters {
    /// Hidden × visible.
    pub w: Matrix,
    /// Hidden × label.
    pub u: Matrix,
    /// Visible bias.
    pub a: Vec<f64>,
    /// Hidden bias.
    pub b: Vec<f64>,
    /// Label bias.
    pub c: Vec<f64>,
}

impl RbmParameters {
    pub fn from_parts(w: Matrix, u: Matrix, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let p = Self { w, u, a, b, c };
        p.check()?;
        Ok(p)
    }

    pub fn zeros(n_visible: usize, n_hidden: usize, n_labels: usize) -> Self {
        Self {
            w: Matrix::zeros(n_hidden, n_visible),
            u: Matrix::zeros(n_hidden, n_labels),
            a: alloc::vec![0.0; n_visible],
            b: alloc::vec![0.0; n_hidden],
            c: alloc::vec![0.0; n_labels],
        }
    }

    /// Weights uniform in `[-0.01, 0.01]`, biases zero.
    pub fn init(n_visible: usize, n_hidden: usize, n_labels: usize, seed: u64) -> Result<Self> {
        Self::init_with(n_visible, n_hidden, n_labels, &mut Rng::new(seed))
    }

    pub(crate) fn init_with(n_visible: usize, n_hidden: usize, n_labels: usize, rng: &mut Rng) -> Result<Self> {
        for (n, what) in [(n_visible, "n_visible"), (n_hidden, "n_hidden"), (n_labels, "n_labels")] {
            if n == 0 {
                return Err(Error::ZeroDimension(what));
            }
        }
        let mut p = Self::zeros(n_visible, n_hidden, n_labels);
        for v in p.w.as_mut_slice() {
            *v = rng.uniform_in(-INIT_SCALE, INIT_SCALE);
        }
        for v in p.u.as_mut_slice() {
            *v = rng.uniform_in(-INIT_SCALE, INIT_SCALE);
        }
        Ok(p)
    }

    pub fn n_visible(&self) -> usize {
        self.w.cols()
    }

    pub fn n_hidden(&self) -> usize {
        self.w.rows()
    }

    pub fn n_labels(&self) -> usize {
        self.u.cols()
    }

    /// Verifies the blocks agree on `(n_visible, n_hidden, n_labels)`.
    pub fn check(&self) -> Result<()> {
        let (nh, nv) = self.w.shape();
        let mismatch = |op, left, right| Err(Error::DimensionMismatch { op, left, right });
        if self.u.rows() != nh {
            return mismatch("parameters (W vs U)", self.w.shape(), self.u.shape());
        }
        if self.a.len() != nv {
            return mismatch("parameters (W vs a)", self.w.shape(), (self.a.len(), 1));
        }
        if self.b.len() != nh {
            return mismatch("parameters (W vs b)", self.w.shape(), (self.b.len(), 1));
        }
        if self.c.len() != self.u.cols() {
            return mismatch("parameters (U vs c)", self.u.shape(), (self.c.len(), 1));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.u.is_finite() && self.a.iter().chain(&self.b).chain(&self.c).all(|v| v.is_finite())
    }

    /// Total number of scalar parameters.
    pub fn len(&self) -> usize {
        self.w.as_slice().len() + self.u.as_slice().len() + self.a.len() + self.b.len() + self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All parameters in the fixed order `W, U, a, b, c`.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.w
            .as_slice()
            .iter()
            .chain(self.u.as_slice())
            .chain(&self.a)
            .chain(&self.b)
            .chain(&self.c)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w
            .as_mut_slice()
            .iter_mut()
            .chain(self.u.as_mut_slice())
            .chain(&mut self.a)
            .chain(&mut self.b)
            .chain(&mut self.c)
    }

    /// `self += alpha * other`, blockwise.
    pub fn add_scaled(&mut self, alpha: f64, other: &RbmParameters) -> Result<()> {
        if self.w.shape() != other.w.shape() || self.u.shape() != other.u.shape() {
            return Err(Error::DimensionMismatch {
                op: "parameter update",
                left: self.w.shape(),
                right: other.w.shape(),
            });
        }
        for (s, o) in self.iter_mut().zip(other.iter()) {
            *s += alpha * o;
        }
        Ok(())
    }
}

pub(crate) fn check_len(op: &'static str, expected: usize, got: &[f64]) -> Result<()> {
    if expected != got.len() {
        return Err(Error::DimensionMismatch {
            op,
            left: (expected, 1),
            right: (got.len(), 1),
        });
    }
    Ok(())
}

/// `E(y, x, h)`, the five-term energy.
pub fn energy(p: &RbmParameters, x: &[f64], y: &[f64], h: &[f64]) -> Result<f64> {
    p.check()?;
    check_len("energy (x)", p.n_visible(), x)?;
    check_len("energy (y)", p.n_labels(), y)?;
    check_len("energy (h)", p.n_hidden(), h)?;
    let wx = p.w.matvec(x)?;
    let uy = p.u.matvec(y)?;
    Ok(-dot(h, &wx) - dot(&p.a, x) - dot(&p.b, h) - dot(&p.c, y) - dot(h, &uy))
}

/// Hidden pre-activations `b + Wx + Uy`.
pub(crate) fn hidden_input(p: &RbmParameters, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_len("p(h|x,y) (x)", p.n_visible(), x)?;
    check_len("p(h|x,y) (y)", p.n_labels(), y)?;
    let mut act = numerics::affine(&p.w, x, &p.b)?;
    for (j, a) in act.iter_mut().enumerate() {
        *a += dot(p.u.row(j), y);
    }
    Ok(act)
}

/// `p(h_j = 1 | x, y) = σ(b_j + Σ_l U_jl y_l + Σ_i W_ji x_i)`.
pub fn p_h_given_xy(p: &RbmParameters, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    p.check()?;
    Ok(sigmoid(&hidden_input(p, x, y)?))
}

/// Visible means `σ(a_i + Σ_j W_ji h_j)`.
pub fn p_x_given_h(p: &RbmParameters, h: &[f64]) -> Result<Vec<f64>> {
    p.check()?;
    check_len("p(x|h)", p.n_hidden(), h)?;
    let mut act = p.w.matvec_transposed(h)?;
    for (v, a) in act.iter_mut().zip(&p.a) {
        *v += a;
    }
    Ok(sigmoid(&act))
}

fn label_scores(p: &RbmParameters, h: &[f64]) -> Result<Vec<f64>> {
    p.check()?;
    check_len("p(y|h)", p.n_hidden(), h)?;
    let mut act = p.u.matvec_transposed(h)?;
    for (v, c) in act.iter_mut().zip(&p.c) {
        *v += c;
    }
    Ok(act)
}

/// Single-label head: a softmax over `c_l + Σ_j U_jl h_j`.
///
/// Not used by training; multi-label training uses
/// [`p_y_given_h_multilabel`].
pub fn p_y_given_h_softmax(p: &RbmParameters, h: &[f64]) -> Result<Vec<f64>> {
    softmax(&label_scores(p, h)?)
}

/// Independent per-label `σ(c_l + Σ_j U_jl h_j)`.
pub fn p_y_given_h_multilabel(p: &RbmParameters, h: &[f64]) -> Result<Vec<f64>> {
    Ok(sigmoid(&label_scores(p, h)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Term-by-term energy with explicit index loops.
    fn naive_energy(p: &RbmParameters, x: &[f64], y: &[f64], h: &[f64]) -> f64 {
        let mut e = 0.0;
        for j in 0..h.len() {
            for i in 0..x.len() {
                e -= h[j] * p.w.get(j, i) * x[i];
            }
        }
        for i in 0..x.len() {
            e -= p.a[i] * x[i];
        }
        for j in 0..h.len() {
            e -= p.b[j] * h[j];
        }
        for l in 0..y.len() {
            e -= p.c[l] * y[l];
        }
        for j in 0..h.len() {
            for l in 0..y.len() {
                e -= h[j] * p.u.get(j, l) * y[l];
            }
        }
        e
    }

    pub(crate) fn random_params(nv: usize, nh: usize, nl: usize, scale: f64, rng: &mut Rng) -> RbmParameters {
        let mut p = RbmParameters::zeros(nv, nh, nl);
        for v in p.iter_mut() {
            *v = rng.uniform_in(-scale, scale);
        }
        p
    }

    #[test]
    fn init_is_seeded_small_and_bias_free() {
        let a = RbmParameters::init(3, 2, 2, 7).unwrap();
        assert_eq!(a, RbmParameters::init(3, 2, 2, 7).unwrap());
        assert_ne!(a, RbmParameters::init(3, 2, 2, 8).unwrap());
        assert!(a.w.as_slice().iter().all(|v| v.abs() <= 0.01));
        assert!(a.u.as_slice().iter().all(|v| v.abs() <= 0.01));
        assert!(a.a.iter().chain(&a.b).chain(&a.c).all(|&v| v == 0.0));
        assert_eq!(RbmParameters::init(0, 2, 2, 1), Err(Error::ZeroDimension("n_visible")));
    }

    #[test]
    fn energy_examples() {
        let zero = RbmParameters::zeros(3, 2, 2);
        assert_eq!(energy(&zero, &[0.3, 1.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);

        let mut bias_only = zero.clone();
        bias_only.a = vec![1.0, 0.0, 0.0];
        assert_eq!(
            energy(&bias_only, &[1.0, 1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap(),
            -1.0
        );

        let mut rng = Rng::new(5);
        for _ in 0..20 {
            let p = random_params(3, 2, 2, 2.0, &mut rng);
            let x = [rng.uniform(), rng.uniform(), rng.uniform()];
            let y = [1.0, 0.0];
            let h = [0.0, 1.0];
            let got = energy(&p, &x, &y, &h).unwrap();
            assert!((got - naive_energy(&p, &x, &y, &h)).abs() < 1e-12);
        }
        assert!(energy(&zero, &[0.0; 2], &[0.0; 2], &[0.0; 2]).is_err());
    }

    #[test]
    fn energy_is_additive_over_blocks() {
        let mut rng = Rng::new(17);
        for _ in 0..20 {
            let p = random_params(3, 2, 2, 1.5, &mut rng);
            let x = [rng.uniform(), rng.uniform(), rng.uniform()];
            let y = [1.0, 1.0];
            let h = [1.0, 0.0];
            let full = energy(&p, &x, &y, &h).unwrap();
            let wx: f64 = (0..2).map(|j| h[j] * dot(p.w.row(j), &x)).sum();
            let uy: f64 = (0..2).map(|j| h[j] * dot(p.u.row(j), &y)).sum();
            let terms = [
                ("w", -wx),
                ("u", -uy),
                ("a", -dot(&p.a, &x)),
                ("b", -dot(&p.b, &h)),
                ("c", -dot(&p.c, &y)),
            ];
            for (block, term) in terms {
                let mut q = p.clone();
                match block {
                    "w" => q.w = Matrix::zeros(2, 3),
                    "u" => q.u = Matrix::zeros(2, 2),
                    "a" => q.a = vec![0.0; 3],
                    "b" => q.b = vec![0.0; 2],
                    _ => q.c = vec![0.0; 2],
                }
                let partial = energy(&q, &x, &y, &h).unwrap();
                assert!((partial - (full - term)).abs() < 1e-12, "block {block}");
            }
        }
    }

    #[test]
    fn conditionals_on_zero_model() {
        let p = RbmParameters::zeros(3, 2, 2);
        assert_eq!(p_h_given_xy(&p, &[0.2, 0.9, 1.0], &[1.0, 0.0]).unwrap(), vec![0.5; 2]);
        assert_eq!(p_x_given_h(&p, &[1.0, 0.0]).unwrap(), vec![0.5; 3]);
        assert_eq!(p_y_given_h_multilabel(&p, &[1.0, 1.0]).unwrap(), vec![0.5; 2]);
        assert_eq!(p_y_given_h_softmax(&p, &[1.0, 1.0]).unwrap(), vec![0.5; 2]);
    }

    #[test]
    fn conditionals_reduce_in_special_cases() {
        let mut rng = Rng::new(23);
        let p = random_params(3, 2, 2, 1.0, &mut rng);
        let x = [0.1, 0.5, 0.8];

        let got = p_h_given_xy(&p, &x, &[0.0, 0.0]).unwrap();
        let expected = sigmoid(&numerics::affine(&p.w, &x, &p.b).unwrap());
        assert_eq!(got, expected);

        assert_eq!(p_x_given_h(&p, &[0.0, 0.0]).unwrap(), sigmoid(&p.a));

        let mut decoupled = p.clone();
        decoupled.u = Matrix::zeros(2, 2);
        for h in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]] {
            assert_eq!(p_y_given_h_multilabel(&decoupled, &h).unwrap(), sigmoid(&p.c));
        }
    }

    #[test]
    fn softmax_head() {
        let mut p = RbmParameters::zeros(2, 2, 2);
        p.c = vec![1000.0, 0.0];
        let d = p_y_given_h_softmax(&p, &[1.0, 0.0]).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12 && d[1] < 1e-12);

        let mut rng = Rng::new(2);
        let p = random_params(2, 3, 4, 2.0, &mut rng);
        let h = [1.0, 0.0, 1.0];
        let scores: Vec<f64> = (0..4)
            .map(|l| p.c[l] + (0..3).map(|j| p.u.get(j, l) * h[j]).sum::<f64>())
            .collect();
        let expected = softmax(&scores).unwrap();
        for (g, e) in p_y_given_h_softmax(&p, &h).unwrap().iter().zip(expected) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn conditionals_reject_bad_shapes() {
        let p = RbmParameters::zeros(3, 2, 2);
        assert!(p_h_given_xy(&p, &[0.0; 2], &[0.0; 2]).is_err());
        assert!(p_h_given_xy(&p, &[0.0; 3], &[0.0; 3]).is_err());
        assert!(p_x_given_h(&p, &[0.0; 3]).is_err());
        assert!(p_y_given_h_multilabel(&p, &[0.0]).is_err());
        let mut broken = p.clone();
        broken.b.push(0.0);
        assert!(broken.check().is_err());
    }
}
