use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores for one reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub case: String,
    pub cldice: f64,
    pub topo_precision: f64,
    pub topo_sensitivity: f64,
    pub chamfer: f64,
    pub delta_beta0: usize,
    pub delta_beta1: usize,
    pub kappa: Option<f64>,
}

impl MetricsReport {
    pub fn with_case(mut self, case: impl Into<String>) -> Self {
        self.case = case.into();
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn cldice_pct(&self) -> f64 {
        100.0 * self.cldice
    }

    pub fn topology_exact(&self) -> bool {
        self.delta_beta0 == 0 && self.delta_beta1 == 0
    }

    pub fn row(&self) -> ReportRow {
        ReportRow {
            case: self.case.clone(),
            cldice: self.cldice,
            cldice_pct: self.cldice_pct(),
            chamfer: self.chamfer,
            d_beta0: self.delta_beta0,
            d_beta1: self.delta_beta1,
            kappa: self.kappa,
        }
    }
}

/// One CSV line: `case,cldice,cldice_pct,chamfer,d_beta0,d_beta1,kappa`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case: String,
    pub cldice: f64,
    pub cldice_pct: f64,
    pub chamfer: f64,
    pub d_beta0: usize,
    pub d_beta1: usize,
    pub kappa: Option<f64>,
}

pub fn write_reports_csv(reports: &[MetricsReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        w.serialize(r.row())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Appends rows, writing the header only when the file is new or empty.
pub fn append_reports_csv(reports: &[MetricsReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in reports {
        w.serialize(r.row())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_reports_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let a = MetricsReport {
            case: "tree_0".into(),
            cldice: 0.973_214_285_714_285_7,
            topo_precision: 0.95,
            topo_sensitivity: 0.99,
            chamfer: 0.0123,
            delta_beta0: 0,
            delta_beta1: 2,
            kappa: Some(7.03),
        };
        let b = MetricsReport {
            case: "empty".into(),
            chamfer: f64::INFINITY,
            kappa: None,
            ..a.clone()
        };
        write_reports_csv(&[a.clone(), b.clone()], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("case,cldice,cldice_pct,chamfer,d_beta0,d_beta1,kappa\n"));
        assert_eq!(read_reports_csv(&p).unwrap(), vec![a.row(), b.row()]);
    }

    #[test]
    fn append_writes_header_once() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let r = MetricsReport {
            case: "x".into(),
            cldice: 1.0,
            topo_precision: 1.0,
            topo_sensitivity: 1.0,
            chamfer: 0.0,
            delta_beta0: 0,
            delta_beta1: 0,
            kappa: None,
        };
        append_reports_csv(&[r.clone()], &p).unwrap();
        append_reports_csv(&[r.clone()], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.matches("case,").count(), 1);
        assert_eq!(read_reports_csv(&p).unwrap().len(), 2);
    }
}
