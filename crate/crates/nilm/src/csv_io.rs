//! CSV formats: meter data, appliance profiles and window labels.
//!
//! Meter files have a `timestamp` column (integer seconds), an
//! `aggregate_w` column and optionally one `dev_<name>_w` column per
//! sub-metered appliance.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nilm_core::data::{ApplianceProfile, PowerSeries, DEFAULT_ON_THRESHOLD};
use serde::{Deserialize, Serialize};

pub const TIMESTAMP_COLUMN: &str = "timestamp";
pub const AGGREGATE_COLUMN: &str = "aggregate_w";

pub fn device_column(name: &str) -> String {
    format!("dev_{name}_w")
}

fn device_name(column: &str) -> Option<&str> {
    column
        .strip_prefix("dev_")?
        .strip_suffix("_w")
        .filter(|n| !n.is_empty())
}

/// Aggregate readings with optional sub-metered appliance readings on the
/// same timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterData {
    pub aggregate: PowerSeries,
    pub names: Vec<String>,
    pub appliances: Vec<PowerSeries>,
}

impl MeterData {
    pub fn appliance(&self, name: &str) -> Option<&PowerSeries> {
        self.names.iter().position(|n| n == name).map(|i| &self.appliances[i])
    }
}

pub fn read_meter_csv(path: &Path) -> Result<MeterData> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_meter_csv(file, &path.display().to_string())
}

/// Parses a meter CSV. Errors name `source` and the offending line.
pub fn parse_meter_csv(input: impl Read, source: &str) -> Result<MeterData> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader
        .headers()
        .with_context(|| format!("{source}: reading header"))?
        .clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let ts_col =
        find(TIMESTAMP_COLUMN).ok_or_else(|| anyhow!("{source}: line 1: missing column {TIMESTAMP_COLUMN:?}"))?;
    let agg_col =
        find(AGGREGATE_COLUMN).ok_or_else(|| anyhow!("{source}: line 1: missing column {AGGREGATE_COLUMN:?}"))?;
    let mut names = Vec::new();
    let mut dev_cols = Vec::new();
    for (i, h) in header.iter().enumerate() {
        if i == ts_col || i == agg_col {
            continue;
        }
        match device_name(h) {
            Some(name) if !names.iter().any(|n| n == name) => {
                names.push(name.to_string());
                dev_cols.push(i);
            }
            Some(name) => bail!("{source}: line 1: duplicate appliance {name:?}"),
            None => bail!("{source}: line 1: unexpected column {h:?} (expected dev_<name>_w)"),
        }
    }

    let mut timestamps: Vec<i64> = Vec::new();
    let mut aggregate = Vec::new();
    let mut devices: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.with_context(|| format!("{source}: malformed row"))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |col: usize| record.get(col).unwrap_or("");
        let watts = |col: usize| -> Result<f64> {
            let raw = cell(col);
            let v: f64 = raw.parse().map_err(|_| {
                anyhow!(
                    "{source}: line {line}: column {:?}: {raw:?} is not a number",
                    &header[col]
                )
            })?;
            if !(v.is_finite() && v >= 0.0) {
                bail!(
                    "{source}: line {line}: column {:?}: power must be finite and >= 0, got {raw}",
                    &header[col]
                );
            }
            Ok(v)
        };
        let raw_ts = cell(ts_col);
        let t: i64 = raw_ts
            .parse()
            .map_err(|_| anyhow!("{source}: line {line}: timestamp {raw_ts:?} is not an integer"))?;
        if let Some(&prev) = timestamps.last() {
            if t <= prev {
                bail!("{source}: line {line}: timestamp {t} does not increase (previous {prev})");
            }
            if timestamps.len() >= 2 && t - prev != timestamps[1] - timestamps[0] {
                bail!(
                    "{source}: line {line}: sampling step {} s differs from {} s",
                    t - prev,
                    timestamps[1] - timestamps[0]
                );
            }
        }
        timestamps.push(t);
        aggregate.push(watts(agg_col)?);
        for (series, &col) in devices.iter_mut().zip(&dev_cols) {
            series.push(watts(col)?);
        }
    }
    if timestamps.is_empty() {
        bail!("{source}: no data rows");
    }
    let appliances = devices
        .into_iter()
        .map(|w| PowerSeries::new(timestamps.clone(), w))
        .collect::<nilm_core::Result<Vec<_>>>()?;
    Ok(MeterData {
        aggregate: PowerSeries::new(timestamps, aggregate)?,
        names,
        appliances,
    })
}

pub fn write_meter_csv(path: &Path, data: &MeterData) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    format_meter_csv(std::io::BufWriter::new(file), data)
}

/// Writes values with shortest round-trip formatting, so reading the file
/// back gives identical doubles.
pub fn format_meter_csv(out: impl Write, data: &MeterData) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![TIMESTAMP_COLUMN.to_string(), AGGREGATE_COLUMN.to_string()];
    header.extend(data.names.iter().map(|n| device_column(n)));
    w.write_record(&header)?;
    for (k, t) in data.aggregate.timestamps().iter().enumerate() {
        let mut row = vec![t.to_string(), data.aggregate.watts()[k].to_string()];
        row.extend(data.appliances.iter().map(|a| a.watts()[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Single-column series file: `timestamp,watts_w`.
pub fn write_series_csv(path: &Path, series: &PowerSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record([TIMESTAMP_COLUMN, "watts_w"])?;
    for (t, v) in series.timestamps().iter().zip(series.watts()) {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRow {
    name: String,
    avg_on_power_w: f64,
    on_threshold_w: f64,
    p_on_off: f64,
    p_off_on: f64,
    noise_sd_w: f64,
}

pub fn read_profiles(path: &Path) -> Result<Vec<ApplianceProfile>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_profiles(file, &path.display().to_string())
}

/// Columns: `name,avg_on_power_w,on_threshold_w,p_on_off,p_off_on,noise_sd_w`.
pub fn parse_profiles(input: impl Read, source: &str) -> Result<Vec<ApplianceProfile>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out: Vec<ApplianceProfile> = Vec::new();
    for row in reader.deserialize::<ProfileRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            anyhow!("{source}: line {line}: {e}")
        })?;
        let line = out.len() + 2;
        if row.name.is_empty() || row.name.contains(char::is_whitespace) || row.name.contains(',') {
            bail!(
                "{source}: line {line}: appliance name {:?} must be non-empty without spaces or commas",
                row.name
            );
        }
        if out.iter().any(|p| p.name == row.name) {
            bail!("{source}: line {line}: duplicate appliance {:?}", row.name);
        }
        let p = ApplianceProfile {
            name: row.name,
            avg_on_power: row.avg_on_power_w,
            on_threshold: row.on_threshold_w,
            p_on_to_off: row.p_on_off,
            p_off_to_on: row.p_off_on,
            noise_sd: row.noise_sd_w,
        };
        p.validate().map_err(|e| anyhow!("{source}: line {line}: {e}"))?;
        out.push(p);
    }
    if out.is_empty() {
        bail!("{source}: no appliance profiles");
    }
    Ok(out)
}

pub fn write_profiles(path: &Path, profiles: &[ApplianceProfile]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for p in profiles {
        w.serialize(ProfileRow {
            name: p.name.clone(),
            avg_on_power_w: p.avg_on_power,
            on_threshold_w: p.on_threshold,
            p_on_off: p.p_on_to_off,
            p_off_on: p.p_off_to_on,
            noise_sd_w: p.noise_sd,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Profiles for sub-metered appliances when no profile file is given:
/// default ON threshold, average power over readings above it.
pub fn profiles_from_submeters(data: &MeterData) -> Result<Vec<ApplianceProfile>> {
    if data.names.is_empty() {
        bail!("data has no dev_<name>_w columns to derive labels from");
    }
    data.names
        .iter()
        .zip(&data.appliances)
        .map(|(name, series)| {
            let on: Vec<f64> = series
                .watts()
                .iter()
                .copied()
                .filter(|&w| w > DEFAULT_ON_THRESHOLD)
                .collect();
            if on.is_empty() {
                bail!("appliance {name:?} never exceeds {DEFAULT_ON_THRESHOLD} W; give its profile explicitly");
            }
            Ok(ApplianceProfile::new(
                name.clone(),
                on.iter().sum::<f64>() / on.len() as f64,
            ))
        })
        .collect()
}

/// `window_start` then one 0/1 column per appliance.
pub fn write_labels(path: &Path, names: &[String], starts: &[i64], labels: &[Vec<bool>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["window_start".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (start, row) in starts.iter().zip(labels) {
        let mut rec = vec![start.to_string()];
        rec.extend(row.iter().map(|&b| if b { "1" } else { "0" }.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str =
        "timestamp,aggregate_w,dev_fridge_w,dev_kettle_w\n0,100.5,100.5,0\n1,2100.5,100.5,2000\n2,0,0,0\n";

    #[test]
    fn parses_meter_file() {
        let d = parse_meter_csv(GOOD.as_bytes(), "t").unwrap();
        assert_eq!(d.names, vec!["fridge", "kettle"]);
        assert_eq!(d.aggregate.watts(), &[100.5, 2100.5, 0.0]);
        assert_eq!(d.appliance("kettle").unwrap().watts(), &[0.0, 2000.0, 0.0]);
        let agg_only = parse_meter_csv("aggregate_w,timestamp\n5,10\n6,20\n".as_bytes(), "t").unwrap();
        assert!(agg_only.names.is_empty());
        assert_eq!(agg_only.aggregate.step_seconds(), Some(10));
    }

    fn err(text: &str) -> String {
        parse_meter_csv(text.as_bytes(), "f.csv").unwrap_err().to_string()
    }

    #[test]
    fn line_numbered_errors() {
        assert!(err("timestamp,dev_a_w\n0,1\n").contains("missing column \"aggregate_w\""));
        assert!(err("aggregate_w\n1\n").contains("missing column \"timestamp\""));
        let e = err("timestamp,aggregate_w\n0,1\n1,2\n1,3\n");
        assert!(e.contains("line 4") && e.contains("does not increase"), "{e}");
        let e = err("timestamp,aggregate_w\n0,1\n1,abc\n");
        assert!(e.contains("line 3") && e.contains("\"abc\""), "{e}");
        let e = err("timestamp,aggregate_w\n0,1\n1,-4\n");
        assert!(e.contains("line 3"), "{e}");
        let e = err("timestamp,aggregate_w\n0,1\n1,1\n3,1\n");
        assert!(e.contains("line 4") && e.contains("step"), "{e}");
        assert!(err("timestamp,aggregate_w,extra\n0,1,2\n").contains("unexpected column"));
        assert!(err("timestamp,aggregate_w\n").contains("no data rows"));
    }

    #[test]
    fn meter_round_trip_is_exact() {
        let ts: Vec<i64> = (0..50).map(|k| 1_300_000_000 + 3 * k).collect();
        let agg: Vec<f64> = (0..50).map(|k| (k as f64).sqrt() * 123.456789 + 0.1).collect();
        let dev: Vec<f64> = agg.iter().map(|v| v / 3.0).collect();
        let data = MeterData {
            aggregate: PowerSeries::new(ts.clone(), agg).unwrap(),
            names: vec!["tv".into()],
            appliances: vec![PowerSeries::new(ts, dev).unwrap()],
        };
        let mut buf = Vec::new();
        format_meter_csv(&mut buf, &data).unwrap();
        assert_eq!(parse_meter_csv(buf.as_slice(), "t").unwrap(), data);
    }

    #[test]
    fn profiles_round_trip_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let profiles = vec![
            ApplianceProfile {
                p_on_to_off: 0.1,
                p_off_to_on: 0.05,
                noise_sd: 2.0,
                ..ApplianceProfile::new("fridge", 100.0)
            },
            ApplianceProfile::new("kettle", 2000.0),
        ];
        write_profiles(&path, &profiles).unwrap();
        assert_eq!(read_profiles(&path).unwrap(), profiles);
        let head = "name,avg_on_power_w,on_threshold_w,p_on_off,p_off_on,noise_sd_w\n";
        let bad = format!("{head}a,100,10,0.1,0.1,0\nb,100,10,1.5,0.1,0\n");
        let e = parse_profiles(bad.as_bytes(), "p").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let bad = format!("{head}a,x,10,0.1,0.1,0\n");
        assert!(parse_profiles(bad.as_bytes(), "p")
            .unwrap_err()
            .to_string()
            .contains("line 2"));
    }

    #[test]
    fn derived_profiles() {
        let d = parse_meter_csv(GOOD.as_bytes(), "t").unwrap();
        let p = profiles_from_submeters(&d).unwrap();
        assert_eq!(p[0].avg_on_power, 100.5);
        assert_eq!(p[1].avg_on_power, 2000.0);
    }
}
