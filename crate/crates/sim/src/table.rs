//! Aggregated results and their CSV form.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const CSV_HEADER: [&str; 9] = [
    "sweep_param",
    "sweep_value",
    "snr_db",
    "method",
    "se_mean_bps_hz",
    "se_std",
    "realizations",
    "time_ms_mean",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_param: String,
    pub sweep_value: f64,
    pub snr_db: f64,
    pub method: String,
    pub se_mean_bps_hz: f64,
    /// Sample standard deviation; zero for a single realization.
    pub se_std: f64,
    pub realizations: usize,
    /// Mean precoder design time. Empty unless timing was requested.
    pub time_ms_mean: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Formats with at most 12 significant digits, like C's `%.12g` but
/// without trailing zeros or exponent padding.
pub fn fmt_sig12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

impl ResultTable {
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.sweep_param
                .cmp(&b.sweep_param)
                .then(a.sweep_value.total_cmp(&b.sweep_value))
                .then(a.snr_db.total_cmp(&b.snr_db))
                .then(a.method.cmp(&b.method))
        });
    }

    pub fn find(&self, sweep_value: f64, snr_db: f64, method: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.sweep_value == sweep_value && r.snr_db == snr_db && r.method == method)
    }

    pub fn write_to<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut sorted = self.clone();
        sorted.sort();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &sorted.rows {
            w.write_record([
                r.sweep_param.clone(),
                fmt_sig12(r.sweep_value),
                fmt_sig12(r.snr_db),
                r.method.clone(),
                fmt_sig12(r.se_mean_bps_hz),
                fmt_sig12(r.se_std),
                r.realizations.to_string(),
                r.time_ms_mean.map(fmt_sig12).unwrap_or_default(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.into(), source })?;
        }
        let file = std::fs::File::create(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
        self.write_to(std::io::BufWriter::new(file)).map_err(|e| HarnessError::Io {
            path: path.into(),
            source: std::io::Error::other(e.to_string()),
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self, HarnessError> {
        let io = |source| HarnessError::Io { path: path.into(), source };
        let mut reader = csv::Reader::from_path(path).map_err(|e| io(std::io::Error::other(e.to_string())))?;
        let rows = reader
            .deserialize()
            .collect::<Result<Vec<ResultRow>, _>>()
            .map_err(|e| io(std::io::Error::other(e.to_string())))?;
        Ok(Self { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, method: &str) -> ResultRow {
        ResultRow {
            sweep_param: "n_t".into(),
            sweep_value: value,
            snr_db: 20.0,
            method: method.into(),
            se_mean_bps_hz: 1.0 / 3.0,
            se_std: 0.0,
            realizations: 4,
            time_ms_mean: None,
            seed: 7,
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig12(20.0), "20");
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(-2.5e-7), "-0.00000025");
        assert_eq!(fmt_sig12(123456789012345.0), "123456789012000");
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut out = Vec::new();
        ResultTable::default().write_to(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn rows_are_sorted_and_round_trip() {
        let table = ResultTable { rows: vec![row(64.0, "reduced"), row(16.0, "reduced"), row(16.0, "conventional")] };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        table.write_csv(&path).unwrap();
        let first = std::fs::read(&path).unwrap();
        table.write_csv(&path).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        let back = ResultTable::read_csv(&path).unwrap();
        let order: Vec<_> = back.rows.iter().map(|r| (r.sweep_value, r.method.as_str())).collect();
        assert_eq!(order, vec![(16.0, "conventional"), (16.0, "reduced"), (64.0, "reduced")]);
        assert!((back.rows[0].se_mean_bps_hz - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(back.rows[0].time_ms_mean, None);
    }

    #[test]
    fn one_row_gives_two_lines() {
        let mut out = Vec::new();
        ResultTable { rows: vec![row(16.0, "reduced")] }.write_to(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "n_t,16,20,reduced,0.333333333333,0,4,,7");
    }
}
