//! Evaluation reports: a key-value text summary and a long-format CSV
//! with one row per (method, appliance).

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use nilm_core::metrics::EvalReport;

pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_CSV_FILE: &str = "report.csv";

pub fn format_report_text(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    for r in reports {
        writeln!(out, "method {}", r.method).unwrap();
        writeln!(out, "macro_f1 {}", r.macro_f1).unwrap();
        writeln!(out, "micro_f1 {}", r.micro_f1).unwrap();
        for (i, class) in r.classes.iter().enumerate() {
            writeln!(out, "f1.{class} {}", r.per_class_f1[i]).unwrap();
            writeln!(out, "nee.{class} {}", r.per_appliance_nee[i]).unwrap();
            writeln!(
                out,
                "total_energy_error.{class} {}",
                r.per_appliance_total_energy_error[i]
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn format_report_csv(reports: &[EvalReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "class", "f1", "nee", "total_energy_error"])?;
    for r in reports {
        for (i, class) in r.classes.iter().enumerate() {
            w.write_record([
                r.method.clone(),
                class.clone(),
                r.per_class_f1[i].to_string(),
                r.per_appliance_nee[i].to_string(),
                r.per_appliance_total_energy_error[i].to_string(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes `report.txt` and `report.csv` into `dir`.
pub fn write_reports(dir: &Path, reports: &[EvalReport]) -> Result<()> {
    let text = dir.join(REPORT_TEXT_FILE);
    std::fs::write(&text, format_report_text(reports)).with_context(|| format!("writing {}", text.display()))?;
    let csv = dir.join(REPORT_CSV_FILE);
    std::fs::write(&csv, format_report_csv(reports)?).with_context(|| format!("writing {}", csv.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(method: &str) -> EvalReport {
        EvalReport {
            method: method.into(),
            classes: vec!["fridge".into(), "kettle".into()],
            per_class_f1: vec![0.5, 1.0],
            macro_f1: 0.75,
            micro_f1: 0.8,
            per_appliance_nee: vec![0.25, f64::NAN],
            per_appliance_total_energy_error: vec![0.125, f64::NAN],
        }
    }

    #[test]
    fn csv_has_one_row_per_method_and_appliance() {
        let csv = format_report_csv(&[report("MLC-RBM"), report("CO")]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "method,class,f1,nee,total_energy_error");
        assert_eq!(lines[1], "MLC-RBM,fridge,0.5,0.25,0.125");
        assert_eq!(lines[4], "CO,kettle,1,NaN,NaN");
    }

    #[test]
    fn text_report_keys() {
        let text = format_report_text(&[report("CO")]);
        assert!(text.starts_with("method CO\nmacro_f1 0.75\nmicro_f1 0.8\nf1.fridge 0.5\n"));
        assert!(text.contains("nee.kettle NaN\n"));
    }
}
