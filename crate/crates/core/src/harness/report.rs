//! Tabular study reports with CSV (RFC 4180 via the csv crate) and JSON
//! emission. Error columns are printed with 6 significant digits next to
//! full-precision (shortest round-trip) columns; the config hash is embedded
//! in every row so emitted tables are self-describing. Wall-clock columns
//! are optional so that repeated runs diff cleanly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyRow {
    pub scheme: String,
    pub h: f64,
    pub tau: f64,
    /// Regime parameter value for sweep tables.
    pub param: Option<f64>,
    pub e_phi: f64,
    pub e_phi_rel: f64,
    pub e_rho: f64,
    pub e_rho_rel: f64,
    pub e_j: f64,
    pub e_j_rel: f64,
    /// log2-rate against the previous ladder row; None on the first row.
    pub rate: Option<f64>,
    /// Marks the resolution-law diagonal cell in regime sweeps.
    pub diag: bool,
    pub steps: u64,
    /// Step-loop seconds, excluding propagator-cache construction.
    pub wall_s: f64,
    /// Propagator and grid setup seconds.
    pub setup_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyReport {
    pub title: String,
    pub config_hash: String,
    pub version: String,
    pub timestamp_unix: u64,
    pub reference_loaded: bool,
    pub rows: Vec<StudyRow>,
}

fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

fn opt_rate(r: Option<f64>) -> String {
    match r {
        None => "--".into(),
        Some(v) => format!("{v:.2}"),
    }
}

impl StudyReport {
    pub fn new(title: impl Into<String>, config_hash: String, reference_loaded: bool) -> Self {
        StudyReport {
            title: title.into(),
            config_hash,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            reference_loaded,
            rows: Vec::new(),
        }
    }

    /// Fills the rate column from adjacent rows of one scheme/param group,
    /// r = ln(e_k/e_{k+1}) / ln(x_k/x_{k+1}) on the ladder coordinate
    /// extracted by `coord`.
    pub fn fill_rates(&mut self, coord: impl Fn(&StudyRow) -> f64) {
        let mut prev: Option<(String, Option<f64>, f64, f64)> = None;
        for row in self.rows.iter_mut() {
            let x = coord(row);
            let group = (row.scheme.clone(), row.param);
            match &prev {
                Some((s, p, px, pe)) if *s == group.0 && *p == group.1 => {
                    let ratio = px / x;
                    if ratio > 1.0 && *pe > 0.0 && row.e_phi > 0.0 {
                        row.rate = Some((pe / row.e_phi).ln() / ratio.ln());
                    }
                }
                _ => row.rate = None,
            }
            prev = Some((group.0, group.1, x, row.e_phi));
        }
    }

    /// Deterministic CSV. `include_timings` appends the wall-clock columns;
    /// leave it off when byte-stable output across runs matters.
    pub fn write_csv(&self, w: impl Write, include_timings: bool) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec![
            "scheme",
            "h",
            "tau",
            "param",
            "e_phi",
            "e_phi_rel",
            "e_rho",
            "e_rho_rel",
            "e_j",
            "e_j_rel",
            "rate",
            "diag",
            "e_phi_full",
            "e_phi_rel_full",
            "e_rho_full",
            "e_j_full",
            "steps",
            "config_hash",
        ];
        if include_timings {
            header.push("wall_s");
            header.push("setup_s");
        }
        wtr.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![
                r.scheme.clone(),
                format!("{}", r.h),
                format!("{}", r.tau),
                r.param.map(|p| format!("{p}")).unwrap_or_default(),
                sig6(r.e_phi),
                sig6(r.e_phi_rel),
                sig6(r.e_rho),
                sig6(r.e_rho_rel),
                sig6(r.e_j),
                sig6(r.e_j_rel),
                opt_rate(r.rate),
                if r.diag { "*".into() } else { String::new() },
                format!("{}", r.e_phi),
                format!("{}", r.e_phi_rel),
                format!("{}", r.e_rho),
                format!("{}", r.e_j),
                format!("{}", r.steps),
                self.config_hash.clone(),
            ];
            if include_timings {
                rec.push(format!("{:.3}", r.wall_s));
                rec.push(format!("{:.3}", r.setup_s));
            }
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, include_timings: bool) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, include_timings)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, path: &Path, format: ReportFormat, include_timings: bool) -> Result<()> {
        match format {
            ReportFormat::Csv => {
                let f = std::fs::File::create(path)?;
                self.write_csv(f, include_timings)
            }
            ReportFormat::Json => {
                std::fs::write(path, self.to_json())?;
                Ok(())
            }
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Error time series per scheme from a long-time run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LongTimeReport {
    pub config_hash: String,
    pub times: Vec<f64>,
    /// (scheme name, e_phi at each sampled time)
    pub series: Vec<(String, Vec<f64>)>,
}

impl LongTimeReport {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend(self.series.iter().map(|(s, _)| format!("e_phi_{s}")));
        wtr.write_record(&header).map_err(csv_err)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut rec = vec![format!("{t}")];
            for (_, errs) in &self.series {
                rec.push(sig6(errs[i]));
            }
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scheme: &str, tau: f64, e: f64) -> StudyRow {
        StudyRow {
            scheme: scheme.into(),
            h: 1.0 / 16.0,
            tau,
            param: None,
            e_phi: e,
            e_phi_rel: e / 2.0,
            e_rho: e,
            e_rho_rel: e,
            e_j: e,
            e_j_rel: e,
            rate: None,
            diag: false,
            steps: 10,
            wall_s: 0.1,
            setup_s: 0.01,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let rep = StudyReport::new("t", "abc".into(), false);
        let text = rep.to_csv_string(false).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("scheme,"));
    }

    #[test]
    fn rates_follow_dyadic_halving() {
        let mut rep = StudyReport::new("t", "abc".into(), false);
        rep.rows = vec![
            row("S2", 0.5, 1.0e-1),
            row("S2", 0.25, 2.5e-2),
            row("S2", 0.125, 6.25e-3),
            row("S4c", 0.5, 1.0e-2),
            row("S4c", 0.25, 6.25e-4),
        ];
        rep.fill_rates(|r| r.tau);
        assert!(rep.rows[0].rate.is_none());
        assert!((rep.rows[1].rate.unwrap() - 2.0).abs() < 1e-12);
        assert!((rep.rows[2].rate.unwrap() - 2.0).abs() < 1e-12);
        assert!(rep.rows[3].rate.is_none(), "new scheme group restarts");
        assert!((rep.rows[4].rate.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn csv_is_deterministic_without_timings() {
        let mut rep = StudyReport::new("t", "abc".into(), false);
        rep.rows = vec![row("S1", 0.5, 0.123456789)];
        let a = rep.to_csv_string(false).unwrap();
        rep.timestamp_unix += 100; // timestamp lives only in JSON
        let b = rep.to_csv_string(false).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("1.23457e-1"), "6 significant digits: {a}");
        assert!(a.contains("0.123456789"), "full precision column: {a}");
    }
}
