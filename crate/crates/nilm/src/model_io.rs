//! Versioned plain-text model files.
//!
//! ```text
//! nilm-rbm 1
//! n_visible 60
//! n_hidden 128
//! n_labels 2
//! scaler_min 0
//! scaler_max 2350
//! label fridge
//! label kettle
//! W
//! <n_hidden rows of n_visible values>
//! U
//! <n_hidden rows of n_labels values>
//! a
//! <n_visible values>
//! b
//! <n_hidden values>
//! c
//! <n_labels values>
//! ```
//!
//! Numbers use Rust's shortest round-trip formatting, so finite doubles
//! survive a save/load cycle bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use nilm_core::data::Scaler;
use nilm_core::{Matrix, RbmParameters};

pub const FORMAT_NAME: &str = "nilm-rbm";
pub const FORMAT_VERSION: u32 = 1;

/// Trained parameters with what is needed to apply them to raw watts.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub params: RbmParameters,
    /// Appliance name of each label unit.
    pub labels: Vec<String>,
    pub scaler: Scaler,
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

pub fn format_model(m: &SavedModel) -> Result<String> {
    let p = &m.params;
    ensure!(
        m.labels.len() == p.n_labels(),
        "{} label names for {} label units",
        m.labels.len(),
        p.n_labels()
    );
    ensure!(p.is_finite(), "model parameters are not finite");
    let mut out = String::new();
    writeln!(out, "{FORMAT_NAME} {FORMAT_VERSION}")?;
    writeln!(out, "n_visible {}", p.n_visible())?;
    writeln!(out, "n_hidden {}", p.n_hidden())?;
    writeln!(out, "n_labels {}", p.n_labels())?;
    writeln!(out, "scaler_min {}", m.scaler.min_watts)?;
    writeln!(out, "scaler_max {}", m.scaler.max_watts)?;
    for name in &m.labels {
        ensure!(
            !name.is_empty() && !name.contains(char::is_whitespace),
            "label name {name:?} must be one word"
        );
        writeln!(out, "label {name}")?;
    }
    out.push_str("W\n");
    for j in 0..p.w.rows() {
        push_row(&mut out, p.w.row(j));
    }
    out.push_str("U\n");
    for j in 0..p.u.rows() {
        push_row(&mut out, p.u.row(j));
    }
    for (tag, v) in [("a", &p.a), ("b", &p.b), ("c", &p.c)] {
        out.push_str(tag);
        out.push('\n');
        push_row(&mut out, v);
    }
    Ok(out)
}

pub fn write_model(path: &Path, m: &SavedModel) -> Result<()> {
    std::fs::write(path, format_model(m)?).with_context(|| format!("writing model {}", path.display()))
}

pub fn read_model(path: &Path) -> Result<SavedModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    parse_model(&text).with_context(|| format!("loading model {}", path.display()))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let (i, l) = self
            .inner
            .next()
            .ok_or_else(|| anyhow!("unexpected end of file after line {}", self.line))?;
        self.line = i + 1;
        Ok(l)
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next()?;
        l.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| anyhow!("line {}: expected {key:?}, found {l:?}", self.line))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let v = self.keyed(key)?;
        v.parse()
            .map_err(|_| anyhow!("line {}: {key} {v:?} is not a count", self.line))
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        let v = self.keyed(key)?;
        v.parse()
            .map_err(|_| anyhow!("line {}: {key} {v:?} is not a number", self.line))
    }

    fn tag(&mut self, tag: &str) -> Result<()> {
        let l = self.next()?;
        ensure!(l == tag, "line {}: expected section {tag:?}, found {l:?}", self.line);
        Ok(())
    }

    fn row(&mut self, len: usize) -> Result<Vec<f64>> {
        let l = self.next()?;
        let values = l
            .split_ascii_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| anyhow!("line {}: {t:?} is not a number", self.line))
            })
            .collect::<Result<Vec<_>>>()?;
        ensure!(
            values.len() == len,
            "line {}: expected {len} values, found {}",
            self.line,
            values.len()
        );
        Ok(values)
    }

    fn matrix(&mut self, tag: &str, rows: usize, cols: usize) -> Result<Matrix> {
        self.tag(tag)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.row(cols)?);
        }
        Ok(Matrix::new(rows, cols, data)?)
    }
}

pub fn parse_model(text: &str) -> Result<SavedModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let version = lines
        .keyed(FORMAT_NAME)
        .map_err(|_| anyhow!("not a {FORMAT_NAME} model file"))?;
    if version != FORMAT_VERSION.to_string() {
        bail!("unsupported model format version {version:?} (this build reads {FORMAT_VERSION})");
    }
    let nv = lines.count("n_visible")?;
    let nh = lines.count("n_hidden")?;
    let nl = lines.count("n_labels")?;
    let scaler = Scaler::new(lines.real("scaler_min")?, lines.real("scaler_max")?)?;
    let labels = (0..nl)
        .map(|_| lines.keyed("label").map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    let w = lines.matrix("W", nh, nv)?;
    let u = lines.matrix("U", nh, nl)?;
    lines.tag("a")?;
    let a = lines.row(nv)?;
    lines.tag("b")?;
    let b = lines.row(nh)?;
    lines.tag("c")?;
    let c = lines.row(nl)?;
    if let Some((i, l)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
        bail!("line {}: unexpected trailing content {l:?}", i + 1);
    }
    Ok(SavedModel {
        params: RbmParameters::from_parts(w, u, a, b, c)?,
        labels,
        scaler,
    })
}
