use alloc::vec::Vec;

use super::{check_len, hidden_input, p_h_given_xy, p_x_given_h, p_y_given_h_multilabel, RbmParameters};
use crate::data::Sample;
use crate::numerics::{bernoulli_sample, sigmoid, Rng};
use crate::{Error, Result};

/// Hyperparameters for contrastive-divergence training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n_hidden: usize,
    pub learning_rate: f64,
    /// Gibbs steps `k` in CD-k.
    pub cd_steps: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Decision threshold on label marginals.
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_hidden: 128,
            learning_rate: 0.001,
            cd_steps: 2,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            threshold: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if self.n_hidden == 0 {
            return fail("n_hidden must be >= 1".into());
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail(alloc::format!(
                "learning_rate must be finite and >= 0, got {}",
                self.learning_rate
            ));
        }
        if self.cd_steps == 0 {
            return fail("cd_steps must be >= 1".into());
        }
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return fail(alloc::format!("threshold must be in (0, 1), got {}", self.threshold));
        }
        Ok(())
    }
}

fn labels_as_reals(y: &[bool]) -> Vec<f64> {
    y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

/// Adds one sample's CD-k statistics (data minus reconstruction) into `grad`.
fn accumulate_cd(p: &RbmParameters, sample: &Sample, k: usize, rng: &mut Rng, grad: &mut RbmParameters) -> Result<()> {
    check_len("cd update (x)", p.n_visible(), &sample.x)?;
    let y = labels_as_reals(&sample.y);
    check_len("cd update (y)", p.n_labels(), &y)?;

    let h_data = p_h_given_xy(p, &sample.x, &y)?;
    let mut h_prob = h_data.clone();
    let mut x_recon = Vec::new();
    let mut y_recon = Vec::new();
    for _ in 0..k {
        let h = bernoulli_sample(&h_prob, rng)?;
        x_recon = p_x_given_h(p, &h)?;
        y_recon = bernoulli_sample(&p_y_given_h_multilabel(p, &h)?, rng)?;
        h_prob = sigmoid(&hidden_input(p, &x_recon, &y_recon)?);
    }

    grad.w.add_outer(1.0, &h_data, &sample.x)?;
    grad.w.add_outer(-1.0, &h_prob, &x_recon)?;
    grad.u.add_outer(1.0, &h_data, &y)?;
    grad.u.add_outer(-1.0, &h_prob, &y_recon)?;
    for (g, (d, r)) in grad.a.iter_mut().zip(sample.x.iter().zip(&x_recon)) {
        *g += d - r;
    }
    for (g, (d, r)) in grad.b.iter_mut().zip(h_data.iter().zip(&h_prob)) {
        *g += d - r;
    }
    for (g, (d, r)) in grad.c.iter_mut().zip(y.iter().zip(&y_recon)) {
        *g += d - r;
    }
    Ok(())
}

fn cd_step_in_place(p: &mut RbmParameters, batch: &[&Sample], cfg: &TrainConfig, rng: &mut Rng) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut grad = RbmParameters::zeros(p.n_visible(), p.n_hidden(), p.n_labels());
    for sample in batch {
        accumulate_cd(p, sample, cfg.cd_steps, rng, &mut grad)?;
    }
    p.add_scaled(cfg.learning_rate / batch.len() as f64, &grad)
}

/// One CD-k gradient step on a minibatch.
///
/// For each sample the positive phase clamps `(x, y)` and takes
/// `ĥ⁰ = p(h | x, y)`. The negative phase alternates `k` times: sample `h`
/// from the current hidden probabilities, reconstruct `x̃` as visible means
/// (not binarized), sample `ỹ` from the per-label sigmoids, and recompute
/// `ĥ` on `(x̃, ỹ)`. Block updates are `η(ĥ⁰xᵀ − ĥᵏx̃ᵀ)`, `η(ĥ⁰yᵀ − ĥᵏỹᵀ)`,
/// `η(x − x̃)`, `η(ĥ⁰ − ĥᵏ)` and `η(y − ỹ)`, averaged over the batch.
///
/// Random draws are consumed sample by sample, and within a step hiddens
/// before labels.
pub fn cd_k_update(p: &RbmParameters, batch: &[Sample], cfg: &TrainConfig, rng: &mut Rng) -> Result<RbmParameters> {
    p.check()?;
    cfg.validate()?;
    let refs: Vec<&Sample> = batch.iter().collect();
    let mut next = p.clone();
    cd_step_in_place(&mut next, &refs, cfg, rng)?;
    Ok(next)
}

/// Mean squared error between each `x` and its deterministic one-step
/// reconstruction `σ(a + Wᵀ p(h | x, y))`.
pub fn reconstruction_error(p: &RbmParameters, batch: &[Sample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for sample in batch {
        let y = labels_as_reals(&sample.y);
        let h = p_h_given_xy(p, &sample.x, &y)?;
        let recon = p_x_given_h(p, &h)?;
        total += sample.x.iter().zip(&recon).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        count += recon.len();
    }
    Ok(total / count as f64)
}

/// Parameters plus the reconstruction-error curve of a training run.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub params: RbmParameters,
    /// Entry 0 is the error of the initialization; entry `e` is after epoch `e`.
    pub reconstruction_errors: Vec<f64>,
}

/// Trains from a seeded initialization.
///
/// One ChaCha stream seeded with `cfg.seed` drives, in order, the weight
/// initialization and then, per epoch, a shuffle of the training order
/// followed by the CD draws of each minibatch.
pub fn train(samples: &[Sample], n_labels: usize, cfg: &TrainConfig) -> Result<TrainingRun> {
    train_with(samples, n_labels, cfg, |_, _| {})
}

/// [`train`] with a callback receiving `(epoch, reconstruction_error)`.
pub fn train_with(
    samples: &[Sample],
    n_labels: usize,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainingRun> {
    cfg.validate()?;
    let first = samples.first().ok_or(Error::EmptyBatch)?;
    let mut rng = Rng::new(cfg.seed);
    let mut params = RbmParameters::init_with(first.x.len(), cfg.n_hidden, n_labels, &mut rng)?;

    let mut errors = Vec::with_capacity(cfg.epochs + 1);
    let initial = reconstruction_error(&params, samples)?;
    on_epoch(0, initial);
    errors.push(initial);

    let mut order: Vec<usize> = (0..samples.len()).collect();
    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &samples[i]).collect();
            cd_step_in_place(&mut params, &batch, cfg, &mut rng)?;
        }
        if !params.is_finite() {
            return Err(Error::DivergentInference);
        }
        let err = reconstruction_error(&params, samples)?;
        on_epoch(epoch, err);
        errors.push(err);
    }
    Ok(TrainingRun {
        params,
        reconstruction_errors: errors,
    })
}
