//! Right-censored survival data: in-memory layout, CSV I/O, validation.
//!
//! The on-disk schema is a header row containing `time` and `event` columns
//! plus any number of numeric covariate columns, taken in header order.
//! `event` is 1 for an observed event and 0 for a right-censored time.
//! Row numbers in error messages count data rows from 1 (header excluded).

use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A loaded dataset. Covariates are stored column-major: coefficient updates
/// sweep one covariate across all subjects, so each covariate is contiguous.
#[derive(Debug, Clone)]
pub struct Dataset {
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Vec<Vec<f64>>,
    covariate_names: Vec<String>,
}

impl Dataset {
    /// Build a dataset from columns, validating every invariant the sampler
    /// relies on: finite nonnegative times, no events at time zero, finite
    /// covariates, matching lengths, and at least one observed event.
    pub fn from_columns(
        times: Vec<f64>,
        events: Vec<bool>,
        covariates: Vec<Vec<f64>>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::data("dataset has no rows"));
        }
        if events.len() != times.len() {
            return Err(Error::data(format!(
                "event column length {} does not match time column length {}",
                events.len(),
                times.len()
            )));
        }
        if covariates.len() != covariate_names.len() {
            return Err(Error::data(format!(
                "{} covariate columns but {} covariate names",
                covariates.len(),
                covariate_names.len()
            )));
        }
        for (name, col) in covariate_names.iter().zip(&covariates) {
            if col.len() != times.len() {
                return Err(Error::data(format!(
                    "covariate `{name}` has {} values, expected {}",
                    col.len(),
                    times.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::data(format!(
                    "covariate `{name}` is not finite at row {}",
                    i + 1
                )));
            }
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::data(format!(
                "time must be finite and nonnegative at row {} (got {})",
                i + 1,
                times[i]
            )));
        }
        if let Some(i) = (0..times.len()).find(|&i| events[i] && times[i] == 0.0) {
            return Err(Error::data(format!(
                "event at time 0 at row {} (zero-length exposure has no density)",
                i + 1
            )));
        }
        if !events.iter().any(|&e| e) {
            return Err(Error::data("dataset contains no observed events"));
        }
        Ok(Dataset {
            times,
            events,
            covariates,
            covariate_names,
        })
    }

    /// Number of subjects.
    pub fn n(&self) -> usize {
        self.times.len()
    }

    /// Number of covariates.
    pub fn p(&self) -> usize {
        self.covariates.len()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn event(&self, i: usize) -> bool {
        self.events[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    /// One covariate column, length n.
    pub fn covariate(&self, m: usize) -> &[f64] {
        &self.covariates[m]
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Value of covariate m for subject i.
    pub fn x(&self, i: usize, m: usize) -> f64 {
        self.covariates[m][i]
    }

    /// Linear predictor x_i' beta.
    pub fn linear_predictor(&self, i: usize, beta: &[f64]) -> f64 {
        beta.iter()
            .zip(&self.covariates)
            .map(|(b, col)| b * col[i])
            .sum()
    }

    /// Largest observed time; the time partition spans (0, y_max].
    pub fn y_max(&self) -> f64 {
        self.times.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of observed events.
    pub fn event_count(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }

    /// Sorted, deduplicated observed event times.
    pub fn distinct_event_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .times
            .iter()
            .zip(&self.events)
            .filter(|(_, &e)| e)
            .map(|(&t, _)| t)
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Fraction of censored subjects.
    pub fn censoring_rate(&self) -> f64 {
        1.0 - self.event_count() as f64 / self.n() as f64
    }

    /// Restrict to a subset of covariates by name, preserving list order.
    pub fn select_covariates(&self, names: &[String]) -> Result<Dataset> {
        let mut covariates = Vec::with_capacity(names.len());
        for name in names {
            let m = self
                .covariate_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::config(format!("covariate `{name}` not in dataset")))?;
            covariates.push(self.covariates[m].clone());
        }
        Dataset::from_columns(
            self.times.clone(),
            self.events.clone(),
            covariates,
            names.to_vec(),
        )
    }

    /// SHA-256 over the covariate names and the raw IEEE-754 bytes of every
    /// value, in row order. Identifies the exact numeric content of the
    /// dataset independent of text formatting.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for name in &self.covariate_names {
            hasher.update(name.as_bytes());
            hasher.update([0u8]);
        }
        for i in 0..self.n() {
            hasher.update(self.times[i].to_le_bytes());
            hasher.update([self.events[i] as u8]);
            for col in &self.covariates {
                hasher.update(col[i].to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Read a dataset from CSV. The `time` and `event` columns are located by
    /// name; every other column is a covariate in header order.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => {
                    Error::config(format!("cannot open {}: {e}", path.display()))
                }
                _ => Error::data(format!("{}: {e}", path.display())),
            })?;
        let headers = rdr
            .headers()
            .map_err(|e| Error::data(format!("{}: {e}", path.display())))?
            .clone();
        let find = |name: &str| headers.iter().position(|h| h == name);
        let time_col = find("time").ok_or_else(|| {
            Error::data(format!(
                "{}: missing required column `time`",
                path.display()
            ))
        })?;
        let event_col = find("event").ok_or_else(|| {
            Error::data(format!(
                "{}: missing required column `event`",
                path.display()
            ))
        })?;
        let cov_cols: Vec<usize> = (0..headers.len())
            .filter(|&c| c != time_col && c != event_col)
            .collect();
        let covariate_names: Vec<String> =
            cov_cols.iter().map(|&c| headers[c].to_string()).collect();

        let mut times = Vec::new();
        let mut events = Vec::new();
        let mut covariates: Vec<Vec<f64>> = vec![Vec::new(); cov_cols.len()];
        for (idx, record) in rdr.records().enumerate() {
            let row = idx + 1;
            let record =
                record.map_err(|e| Error::data(format!("{}: row {row}: {e}", path.display())))?;
            if record.len() != headers.len() {
                return Err(Error::data(format!(
                    "{}: row {row}: expected {} fields, got {}",
                    path.display(),
                    headers.len(),
                    record.len()
                )));
            }
            let time: f64 = record[time_col].parse().map_err(|_| {
                Error::data(format!(
                    "{}: row {row}: cannot parse time `{}`",
                    path.display(),
                    &record[time_col]
                ))
            })?;
            let event = match &record[event_col] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::data(format!(
                        "{}: row {row}: event must be 0 or 1, got `{other}`",
                        path.display()
                    )))
                }
            };
            for (k, &c) in cov_cols.iter().enumerate() {
                let v: f64 = record[c].parse().map_err(|_| {
                    Error::data(format!(
                        "{}: row {row}: cannot parse `{}` value `{}`",
                        path.display(),
                        covariate_names[k],
                        &record[c]
                    ))
                })?;
                covariates[k].push(v);
            }
            times.push(time);
            events.push(event);
        }
        Dataset::from_columns(times, events, covariates, covariate_names)
            .map_err(|e| Error::data(format!("{}: {e}", path.display())))
    }

    /// Write the dataset as CSV in the schema `read_csv` accepts.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?,
        );
        let io_err = |e| Error::io(path.display().to_string(), e);
        let mut header = String::from("time,event");
        for name in &self.covariate_names {
            header.push(',');
            header.push_str(name);
        }
        writeln!(out, "{header}").map_err(io_err)?;
        for i in 0..self.n() {
            let mut line = format!("{},{}", self.times[i], self.events[i] as u8);
            for col in &self.covariates {
                line.push(',');
                line.push_str(&col[i].to_string());
            }
            writeln!(out, "{line}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)?;
        Ok(())
    }
}
