//! The `synth`, `train`, `eval`, `predict` and `baseline` commands as
//! library functions. Each writes its outputs and the resolved
//! configuration into `cfg.out`.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use nilm_core::baselines::co_predict_series;
use nilm_core::data::{
    label_windows, split, synthesize, window_aggregate, ApplianceProfile, LabeledDataset, LabeledWindow, RawWindow,
    Sample, Scaler, DEFAULT_SPLIT,
};
use nilm_core::metrics::{estimate_energy, macro_f1, EvalReport};
use nilm_core::rbm::{mean_field_infer, threshold_marginals, train_with, DEFAULT_MAX_ITER, DEFAULT_TOL};
use nilm_core::RbmParameters;

use crate::config::{RunConfig, SWEEP_HIDDEN};
use crate::csv_io::{
    profiles_from_submeters, read_meter_csv, read_profiles, write_labels, write_meter_csv, write_profiles,
    write_series_csv, MeterData,
};
use crate::model_io::{read_model, write_model, SavedModel};
use crate::report_io::write_reports;

pub const HOUSEHOLD_FILE: &str = "household.csv";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const MODEL_FILE: &str = "model.rbm";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const CO_PREDICTIONS_FILE: &str = "co_predictions.csv";

pub const RBM_METHOD: &str = "MLC-RBM";
pub const CO_METHOD: &str = "CO";

fn required<'a>(path: &'a Option<PathBuf>, what: &str, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| anyhow!("no {what} given (use {flag} or set it in the config file)"))
}

/// Windows with labels, ready to split.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub profiles: Vec<ApplianceProfile>,
    pub windows: Vec<LabeledWindow>,
    /// Duration of one window in hours.
    pub window_hours: f64,
}

impl Prepared {
    pub fn names(&self) -> Vec<String> {
        self.profiles.iter().map(|p| p.name.clone()).collect()
    }

    /// Train / test / validation windows for the configured seed.
    pub fn split(&self, seed: u64) -> Result<(Vec<LabeledWindow>, Vec<LabeledWindow>, Vec<LabeledWindow>)> {
        Ok(split(&self.windows, DEFAULT_SPLIT, seed)?)
    }
}

fn window_hours(series_step: Option<i64>, window: usize) -> f64 {
    (window as i64 * series_step.unwrap_or(1)) as f64 / 3600.0
}

/// Loads `cfg.data` and labels its windows from the sub-metered columns,
/// using `cfg.profiles` when given and profiles derived from the data
/// otherwise.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let data = read_meter_csv(required(&cfg.data, "data file", "--data")?)?;
    if data.names.is_empty() {
        bail!("data file has no dev_<name>_w columns; labels cannot be derived");
    }
    let profiles = match &cfg.profiles {
        Some(path) => {
            let all = read_profiles(path)?;
            data.names
                .iter()
                .map(|n| {
                    all.iter()
                        .find(|p| &p.name == n)
                        .cloned()
                        .ok_or_else(|| anyhow!("no profile for appliance {n:?} in {}", path.display()))
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => profiles_from_submeters(&data)?,
    };
    let windows = label_windows(
        &data.aggregate,
        &data.appliances,
        &profiles,
        cfg.window,
        cfg.on_fraction,
    )?;
    Ok(Prepared {
        window_hours: window_hours(data.aggregate.step_seconds(), cfg.window),
        profiles,
        windows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSummary {
    pub readings: usize,
    pub windows: usize,
    /// Windows labelled ON per appliance.
    pub on_windows: Vec<(String, usize)>,
}

/// Simulates a household from `cfg.profiles` and writes the aggregate file
/// (with sub-metered columns), one file per appliance, window labels and a
/// summary.
pub fn cmd_synth(cfg: &RunConfig) -> Result<SynthSummary> {
    let profiles = read_profiles(required(&cfg.profiles, "profiles file", "--profiles")?)?;
    let household = synthesize(&profiles, &cfg.synth_config())?;
    let labels = household.true_window_labels(cfg.window, cfg.on_fraction)?;
    ensure!(
        !labels.is_empty(),
        "{} readings do not fill one window of {}",
        household.aggregate.len(),
        cfg.window
    );
    cfg.write_resolved()?;
    let out = &cfg.out;
    let data = MeterData {
        aggregate: household.aggregate.clone(),
        names: profiles.iter().map(|p| p.name.clone()).collect(),
        appliances: household.appliances.clone(),
    };
    write_meter_csv(&out.join(HOUSEHOLD_FILE), &data)?;
    for (p, series) in profiles.iter().zip(&household.appliances) {
        write_series_csv(&out.join(format!("appliance_{}.csv", p.name)), series)?;
    }
    write_profiles(&out.join(PROFILES_FILE), &profiles)?;
    let starts: Vec<i64> = household
        .aggregate
        .timestamps()
        .iter()
        .step_by(cfg.window)
        .take(labels.len())
        .copied()
        .collect();
    write_labels(&out.join(LABELS_FILE), &data.names, &starts, &labels)?;

    let summary = SynthSummary {
        readings: household.aggregate.len(),
        windows: labels.len(),
        on_windows: data
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), labels.iter().filter(|l| l[i]).count()))
            .collect(),
    };
    let mut text = format!("readings {}\nwindows {}\n", summary.readings, summary.windows);
    for (n, c) in &summary.on_windows {
        text.push_str(&format!("on_windows.{n} {c}\n"));
    }
    std::fs::write(out.join(SUMMARY_FILE), text)?;
    Ok(summary)
}

/// Per-sample label marginals and thresholded states.
pub type Inferred = (Vec<Vec<f64>>, Vec<Vec<bool>>);

/// Mean-field label marginals and thresholded states for each sample.
pub fn infer_all(params: &RbmParameters, samples: &[Sample], threshold: f64) -> Result<Inferred> {
    let mut mus = Vec::with_capacity(samples.len());
    let mut states = Vec::with_capacity(samples.len());
    for s in samples {
        let mf = mean_field_infer(params, &s.x, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        states.push(threshold_marginals(&mf.mu, threshold));
        mus.push(mf.mu);
    }
    Ok((mus, states))
}

fn truths(samples: &[Sample]) -> Vec<Vec<bool>> {
    samples.iter().map(|s| s.y.clone()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub n_hidden: usize,
    pub train_windows: usize,
    pub reconstruction_errors: Vec<f64>,
    /// `(hidden size, validation macro F1)` when sweeping.
    pub sweep: Vec<(usize, f64)>,
}

/// Trains on the 50% split and writes the model and per-epoch log. With
/// `cfg.sweep`, every size in [`SWEEP_HIDDEN`] is trained and the one with
/// the best validation macro F1 is kept (smaller wins ties).
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    let prepared = prepare(cfg)?;
    let (train_w, _test_w, val_w) = prepared.split(cfg.seed)?;
    let scaler = Scaler::fit(train_w.iter().map(|w| &w.window))?;
    let train_set = LabeledDataset::from_windows(&train_w, prepared.profiles.clone(), scaler)?;
    let n_labels = prepared.profiles.len();
    cfg.write_resolved()?;

    let mut sweep = Vec::new();
    let best = if cfg.sweep {
        let val_set = LabeledDataset::from_windows(&val_w, prepared.profiles.clone(), scaler)?;
        ensure!(
            !val_set.is_empty(),
            "validation split is empty; need more windows to sweep"
        );
        let mut best: Option<(f64, nilm_core::rbm::TrainingRun)> = None;
        for hidden in SWEEP_HIDDEN {
            let run = train_with(&train_set.samples, n_labels, &cfg.train_config(hidden), |_, _| {})?;
            let (_, preds) = infer_all(&run.params, &val_set.samples, cfg.threshold)?;
            let score = macro_f1(&preds, &truths(&val_set.samples))?;
            sweep.push((hidden, score));
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, run));
            }
        }
        let mut w = csv::Writer::from_path(cfg.out.join(SWEEP_FILE))?;
        w.write_record(["hidden", "validation_macro_f1"])?;
        for (h, s) in &sweep {
            w.write_record([h.to_string(), s.to_string()])?;
        }
        w.flush()?;
        best.expect("sweep set is non-empty").1
    } else {
        train_with(&train_set.samples, n_labels, &cfg.train_config(cfg.hidden), |_, _| {})?
    };

    let model_path = cfg.out.join(MODEL_FILE);
    write_model(
        &model_path,
        &SavedModel {
            params: best.params.clone(),
            labels: prepared.names(),
            scaler,
        },
    )?;
    let mut log = csv::Writer::from_path(cfg.out.join(TRAIN_LOG_FILE))?;
    log.write_record(["epoch", "reconstruction_error"])?;
    for (e, err) in best.reconstruction_errors.iter().enumerate() {
        log.write_record([e.to_string(), err.to_string()])?;
    }
    log.flush()?;
    Ok(TrainSummary {
        model_path,
        n_hidden: best.params.n_hidden(),
        train_windows: train_set.len(),
        reconstruction_errors: best.reconstruction_errors,
        sweep,
    })
}

fn load_model_for(cfg: &RunConfig, names: Option<&[String]>) -> Result<SavedModel> {
    let model = read_model(required(&cfg.model, "model file", "--model")?)?;
    if let Some(names) = names {
        if model.labels.len() != names.len() {
            bail!(
                "model has {} label units but the data has {} appliances",
                model.labels.len(),
                names.len()
            );
        }
        if model.labels != names {
            bail!(
                "model labels {:?} do not match data appliances {:?}",
                model.labels,
                names
            );
        }
    }
    if model.params.n_visible() != cfg.window {
        bail!(
            "model expects windows of {} readings but the window is {}",
            model.params.n_visible(),
            cfg.window
        );
    }
    Ok(model)
}

/// Scores `states` on `windows` with state-based energy estimates.
fn score(method: &str, prepared: &Prepared, windows: &[LabeledWindow], states: &[Vec<bool>]) -> Result<EvalReport> {
    let truth: Vec<Vec<bool>> = windows.iter().map(|w| w.labels.clone()).collect();
    let mut true_energy = Vec::new();
    let mut est_energy = Vec::new();
    for (a, p) in prepared.profiles.iter().enumerate() {
        true_energy.push(
            windows
                .iter()
                .map(|w| {
                    let watts = w.appliance_watts.as_ref().expect("prepared windows are sub-metered");
                    watts[a] * prepared.window_hours
                })
                .collect::<Vec<_>>(),
        );
        let col: Vec<bool> = states.iter().map(|s| s[a]).collect();
        est_energy.push(estimate_energy(&col, p.avg_on_power, prepared.window_hours));
    }
    Ok(EvalReport::compute(
        method,
        prepared.names(),
        states,
        &truth,
        &true_energy,
        &est_energy,
    )?)
}

fn co_states(prepared: &Prepared, windows: &[LabeledWindow]) -> Result<Vec<Vec<bool>>> {
    let raw: Vec<RawWindow> = windows.iter().map(|w| w.window.clone()).collect();
    let powers: Vec<f64> = prepared.profiles.iter().map(|p| p.avg_on_power).collect();
    Ok(co_predict_series(&raw, &powers)?)
}

/// Evaluates a model on the 30% test split of `cfg.data`, optionally next
/// to the CO baseline, and writes `report.txt` / `report.csv`.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Vec<EvalReport>> {
    let prepared = prepare(cfg)?;
    let model = load_model_for(cfg, Some(&prepared.names()))?;
    let (_, test_w, _) = prepared.split(cfg.seed)?;
    let test_set = LabeledDataset::from_windows(&test_w, prepared.profiles.clone(), model.scaler)?;
    let (_, states) = infer_all(&model.params, &test_set.samples, cfg.threshold)?;
    let mut reports = vec![score(RBM_METHOD, &prepared, &test_w, &states)?];
    if cfg.baseline {
        reports.push(score(CO_METHOD, &prepared, &test_w, &co_states(&prepared, &test_w)?)?);
    }
    cfg.write_resolved()?;
    write_reports(&cfg.out, &reports)?;
    Ok(reports)
}

/// Runs the CO baseline alone on the test split; writes its report and
/// per-window states.
pub fn cmd_baseline(cfg: &RunConfig) -> Result<EvalReport> {
    let prepared = prepare(cfg)?;
    let (_, test_w, _) = prepared.split(cfg.seed)?;
    let states = co_states(&prepared, &test_w)?;
    let report = score(CO_METHOD, &prepared, &test_w, &states)?;
    cfg.write_resolved()?;
    write_reports(&cfg.out, std::slice::from_ref(&report))?;
    let starts: Vec<i64> = test_w.iter().map(|w| w.window.start).collect();
    write_labels(&cfg.out.join(CO_PREDICTIONS_FILE), &prepared.names(), &starts, &states)?;
    Ok(report)
}

/// One row per window of `cfg.data`: `window_start`, `mu_<name>`, `state_<name>`.
/// Sub-metered columns, if present, are ignored.
pub fn cmd_predict(cfg: &RunConfig) -> Result<usize> {
    let model = load_model_for(cfg, None)?;
    let path = required(&cfg.data, "input file", "--data")?;
    let data = read_meter_csv(path)?;
    let windows =
        window_aggregate(&data.aggregate, cfg.window).with_context(|| format!("windowing {}", path.display()))?;
    let samples: Vec<Sample> = windows
        .iter()
        .map(|w| Sample {
            x: w.watts.iter().map(|&v| model.scaler.apply(v)).collect(),
            y: Vec::new(),
            window_start: w.start,
        })
        .collect();
    let (mus, states) = infer_all(&model.params, &samples, cfg.threshold)?;
    cfg.write_resolved()?;
    let mut w = csv::Writer::from_path(cfg.out.join(PREDICTIONS_FILE))?;
    let mut header = vec!["window_start".to_string()];
    header.extend(model.labels.iter().map(|n| format!("mu_{n}")));
    header.extend(model.labels.iter().map(|n| format!("state_{n}")));
    w.write_record(&header)?;
    for ((s, mu), st) in samples.iter().zip(&mus).zip(&states) {
        let mut row = vec![s.window_start.to_string()];
        row.extend(mu.iter().map(|m| m.to_string()));
        row.extend(st.iter().map(|&b| if b { "1" } else { "0" }.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(samples.len())
}
