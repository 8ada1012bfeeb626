use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// CvM scores on a complete replication × model grid plus run metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    models: Vec<String>,
    /// `rows[b][k]` is the score of model `k` in replication `b + 1`.
    rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

/// Median by averaging the two middle order statistics.
pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Linear-interpolation quantile of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

impl ScoreTable {
    pub fn new(models: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::Input("score table has no models".into()));
        }
        for (b, row) in rows.iter().enumerate() {
            if row.len() != models.len() {
                return Err(Error::Shape(format!(
                    "replication {} has {} scores for {} models",
                    b + 1,
                    row.len(),
                    models.len()
                )));
            }
            if let Some(s) = row.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
                return Err(Error::Numeric(format!("replication {}: invalid score {s}", b + 1)));
            }
        }
        Ok(ScoreTable {
            models,
            rows,
            metadata: Vec::new(),
        })
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn replications(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, b: usize) -> &[f64] {
        &self.rows[b]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn score(&self, b: usize, model: &str) -> Option<f64> {
        let k = self.models.iter().position(|m| m == model)?;
        Some(self.rows[b][k])
    }

    pub fn medians(&self) -> Vec<f64> {
        (0..self.models.len()).map(|k| median(&self.column(k))).collect()
    }

    /// Model labels ordered by median score, best first (ties keep column
    /// order).
    pub fn ranking(&self) -> Vec<String> {
        let med = self.medians();
        let mut idx: Vec<usize> = (0..self.models.len()).collect();
        idx.sort_by(|&a, &b| med[a].total_cmp(&med[b]));
        idx.into_iter().map(|k| self.models[k].clone()).collect()
    }

    pub fn best(&self) -> &str {
        let r = self.ranking();
        let k = self.models.iter().position(|m| *m == r[0]).unwrap();
        &self.models[k]
    }

    pub fn worst(&self) -> &str {
        let r = self.ranking();
        let k = self.models.iter().position(|m| *m == r[r.len() - 1]).unwrap();
        &self.models[k]
    }

    /// Labels ordered by score within replication `b`.
    pub fn replication_ranking(&self, b: usize) -> Vec<String> {
        let row = &self.rows[b];
        let mut idx: Vec<usize> = (0..self.models.len()).collect();
        idx.sort_by(|&x, &y| row[x].total_cmp(&row[y]));
        idx.into_iter().map(|k| self.models[k].clone()).collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let fail = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["replication", "model", "score"]).map_err(fail)?;
        for (b, row) in self.rows.iter().enumerate() {
            for (m, s) in self.models.iter().zip(row) {
                w.write_record([(b + 1).to_string(), m.clone(), s.to_string()])
                    .map_err(fail)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn metadata_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut p = path.as_os_str().to_owned();
        p.push(".meta");
        PathBuf::from(p)
    }

    /// Writes the long-format CSV and its `.meta` sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string()?.as_bytes())?;
        write_atomic(&Self::sidecar_path(path), self.metadata_string().as_bytes())
    }

    /// Parses the long format written by [`write`](Self::write). Models keep
    /// their order of first appearance.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != ["replication", "model", "score"] {
            return Err(Error::Input("score CSV header must be replication,model,score".into()));
        }
        let mut models: Vec<String> = Vec::new();
        let mut cells: Vec<(usize, usize, f64)> = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Input(format!("row {line}: {e}")))?;
            if rec.len() != 3 {
                return Err(Error::Input(format!("row {line} has {} fields, expected 3", rec.len())));
            }
            let b: usize = rec[0]
                .trim()
                .parse()
                .ok()
                .filter(|&b| b >= 1)
                .ok_or_else(|| Error::Input(format!("row {line}: bad replication '{}'", &rec[0])))?;
            let s: f64 = rec[2]
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("row {line}: bad score '{}'", &rec[2])))?;
            let k = match models.iter().position(|m| m == &rec[1]) {
                Some(k) => k,
                None => {
                    models.push(rec[1].to_string());
                    models.len() - 1
                }
            };
            cells.push((b - 1, k, s));
        }
        if cells.is_empty() {
            return Err(Error::Input("score CSV has no rows".into()));
        }
        let nb = cells.iter().map(|c| c.0).max().unwrap() + 1;
        let mut rows = vec![vec![f64::NAN; models.len()]; nb];
        for (b, k, s) in cells {
            if !rows[b][k].is_nan() {
                return Err(Error::Input(format!("duplicate score for replication {}, model {}", b + 1, models[k])));
            }
            rows[b][k] = s;
        }
        for (b, row) in rows.iter().enumerate() {
            if let Some(k) = row.iter().position(|v| v.is_nan()) {
                return Err(Error::Input(format!("missing score for replication {}, model {}", b + 1, models[k])));
            }
        }
        ScoreTable::new(models, rows).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }
}
