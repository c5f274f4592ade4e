//! Runtime prediction from complexity metrics: Pearson correlation, a linear
//! epoch-time model fitted by ordinary least squares on activations (and
//! optionally flops), and per-strategy correlation reports.
//!
//! Activations are the runtime proxy: when models scaled with different
//! strategies are pooled, time correlates strongly with activations while
//! flops and parameters correlate only within a single strategy. The
//! correlation report surfaces exactly that comparison.
//!
//! The proxy is per model family. Different families spend different time
//! per activation (operator mix, group conv efficiency), so a model fitted
//! on one family's measurements predicts another family's runtime only
//! approximately; fit each measurement file separately and compare.

use crate::complexity::ComplexityReport;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// One timing observation of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub model: String,
    pub strategy: String,
    pub flops: f64,
    pub params: f64,
    pub acts: f64,
    pub epoch_time_min: f64,
    pub batch_size: u32,
}

/// Measurement CSV header.
pub const MEASUREMENT_CSV_HEADER: &str =
    "model,strategy,flops,params,acts,epoch_time_min,batch_size";

/// Which complexity metrics enter the fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSet {
    ActsOnly,
    ActsPlusFlops,
}

/// A fitted linear epoch-time model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeModel {
    /// Minutes.
    pub intercept: f64,
    /// Minutes per activation.
    pub coef_acts: f64,
    /// Minutes per flop; zero for an acts-only fit.
    pub coef_flops: f64,
    /// Pearson correlation between fitted predictions and observed times.
    pub fit_r: f64,
    pub feature_set: FeatureSet,
}

/// A prediction, clamped at zero when the linear form goes negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub minutes: f64,
    pub clamped: bool,
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("series lengths differ: {0} vs {1}")]
    ShapeMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("measurement row {line}: {message}")]
    Row { line: u64, message: String },
    #[error("measurement csv: {0}")]
    Csv(String),
}

/// Standard product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, RuntimeError> {
    if xs.len() != ys.len() {
        return Err(RuntimeError::ShapeMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(RuntimeError::TooFewObservations {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut cov, mut var_x, mut var_y) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(RuntimeError::DegenerateData(
            "zero variance in a series".to_string(),
        ));
    }
    Ok((cov / (var_x.sqrt() * var_y.sqrt())).clamp(-1.0, 1.0))
}

/// Solves the normal equations of least squares with an intercept via
/// Gaussian elimination with partial pivoting.
fn solve_least_squares(rows: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>, RuntimeError> {
    let k = rows[0].len();
    let mut ata = vec![vec![0.0; k]; k];
    let mut aty = vec![0.0; k];
    for (row, &y) in rows.iter().zip(ys) {
        for i in 0..k {
            for j in 0..k {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * y;
        }
    }
    let scale = ata
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))
            .unwrap();
        if ata[pivot_row][col].abs() <= scale * 1e-12 {
            return Err(RuntimeError::DegenerateData(
                "rank-deficient design matrix".to_string(),
            ));
        }
        ata.swap(col, pivot_row);
        aty.swap(col, pivot_row);
        let pivot = ata[col].clone();
        for row in col + 1..k {
            let factor = ata[row][col] / pivot[col];
            for (a, p) in ata[row][col..].iter_mut().zip(&pivot[col..]) {
                *a -= factor * p;
            }
            aty[row] -= factor * aty[col];
        }
    }
    let mut beta = vec![0.0; k];
    for row in (0..k).rev() {
        let mut acc = aty[row];
        for j in row + 1..k {
            acc -= ata[row][j] * beta[j];
        }
        beta[row] = acc / ata[row][row];
    }
    Ok(beta)
}

/// Least-squares fit of epoch time against the chosen features, with an
/// intercept. Requires at least three measurements and non-degenerate
/// features.
pub fn fit_runtime(
    measurements: &[Measurement],
    feature_set: FeatureSet,
) -> Result<RuntimeModel, RuntimeError> {
    if measurements.len() < 3 {
        return Err(RuntimeError::TooFewObservations {
            needed: 3,
            got: measurements.len(),
        });
    }
    let rows: Vec<Vec<f64>> = measurements
        .iter()
        .map(|m| match feature_set {
            FeatureSet::ActsOnly => vec![1.0, m.acts],
            FeatureSet::ActsPlusFlops => vec![1.0, m.acts, m.flops],
        })
        .collect();
    let times: Vec<f64> = measurements.iter().map(|m| m.epoch_time_min).collect();
    let beta = solve_least_squares(&rows, &times)?;
    let model = RuntimeModel {
        intercept: beta[0],
        coef_acts: beta[1],
        coef_flops: if feature_set == FeatureSet::ActsPlusFlops {
            beta[2]
        } else {
            0.0
        },
        fit_r: 0.0,
        feature_set,
    };
    let predictions: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(&beta).map(|(x, b)| x * b).sum())
        .collect();
    let fit_r = match pearson(&predictions, &times) {
        Ok(r) => r,
        // a constant-time target fits exactly through the intercept
        Err(RuntimeError::DegenerateData(_)) => 1.0,
        Err(e) => return Err(e),
    };
    Ok(RuntimeModel { fit_r, ..model })
}

/// Applies a fitted model to a complexity report. Negative linear values are
/// clamped to zero and flagged.
pub fn predict_runtime(model: &RuntimeModel, report: &ComplexityReport) -> Prediction {
    let raw = model.intercept + model.coef_acts * report.acts + model.coef_flops * report.flops;
    if raw < 0.0 {
        Prediction {
            minutes: 0.0,
            clamped: true,
        }
    } else {
        Prediction {
            minutes: raw,
            clamped: false,
        }
    }
}

/// Correlations of one metric column against epoch time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricCorrelations {
    pub flops: f64,
    pub params: f64,
    pub acts: f64,
}

/// Per-strategy and pooled correlation of each complexity metric with epoch
/// time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub per_strategy: Vec<(String, usize, MetricCorrelations)>,
    pub pooled: MetricCorrelations,
    /// Strategies skipped for having too few points or zero variance.
    pub notices: Vec<String>,
}

impl CorrelationReport {
    /// CSV rows `{strategy, n, r_flops, r_params, r_acts}` including the
    /// pooled row.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows: Vec<String> = self
            .per_strategy
            .iter()
            .map(|(name, n, c)| format!("{},{},{},{},{}", name, n, c.flops, c.params, c.acts))
            .collect();
        rows.push(format!(
            "pooled,{},{},{},{}",
            self.per_strategy.iter().map(|(_, n, _)| n).sum::<usize>(),
            self.pooled.flops,
            self.pooled.params,
            self.pooled.acts
        ));
        rows
    }
}

/// Header matching [`CorrelationReport::csv_rows`].
pub const CORRELATION_CSV_HEADER: &str = "strategy,n,r_flops,r_params,r_acts";

fn metric_correlations(ms: &[&Measurement]) -> Result<MetricCorrelations, RuntimeError> {
    let times: Vec<f64> = ms.iter().map(|m| m.epoch_time_min).collect();
    let col = |f: fn(&Measurement) -> f64| ms.iter().map(|m| f(m)).collect::<Vec<f64>>();
    Ok(MetricCorrelations {
        flops: pearson(&col(|m| m.flops), &times)?,
        params: pearson(&col(|m| m.params), &times)?,
        acts: pearson(&col(|m| m.acts), &times)?,
    })
}

/// Groups measurements by strategy and reports within-strategy and pooled
/// correlations for flops, params, and acts against epoch time. Degenerate
/// groups are skipped with a notice; the pooled row requires at least two
/// measurements overall.
pub fn correlation_report(measurements: &[Measurement]) -> Result<CorrelationReport, RuntimeError> {
    if measurements.len() < 2 {
        return Err(RuntimeError::TooFewObservations {
            needed: 2,
            got: measurements.len(),
        });
    }
    let mut groups: BTreeMap<&str, Vec<&Measurement>> = BTreeMap::new();
    for m in measurements {
        groups.entry(&m.strategy).or_default().push(m);
    }
    let mut per_strategy = Vec::new();
    let mut notices = Vec::new();
    for (name, group) in &groups {
        if group.len() < 2 {
            notices.push(format!(
                "strategy {name:?} skipped: only {} measurement(s)",
                group.len()
            ));
            continue;
        }
        match metric_correlations(group) {
            Ok(c) => per_strategy.push((name.to_string(), group.len(), c)),
            Err(RuntimeError::DegenerateData(why)) => {
                notices.push(format!("strategy {name:?} skipped: {why}"));
            }
            Err(e) => return Err(e),
        }
    }
    let all: Vec<&Measurement> = measurements.iter().collect();
    let pooled = metric_correlations(&all)?;
    Ok(CorrelationReport {
        per_strategy,
        pooled,
        notices,
    })
}

/// Reads measurements from CSV with the header
/// `model,strategy,flops,params,acts,epoch_time_min,batch_size`. Numbers are
/// plain decimal in absolute units. Malformed rows are reported with their
/// line number; every numeric field must be positive.
pub fn read_measurements_csv(text: &str) -> Result<Vec<Measurement>, RuntimeError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| RuntimeError::Csv(e.to_string()))?
        .clone();
    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| RuntimeError::Csv(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let m: Measurement = record
            .deserialize(Some(&headers))
            .map_err(|e| RuntimeError::Row {
                line,
                message: strip_position_prefix(&e),
            })?;
        for (field, value) in [
            ("flops", m.flops),
            ("params", m.params),
            ("acts", m.acts),
            ("epoch_time_min", m.epoch_time_min),
            ("batch_size", f64::from(m.batch_size)),
        ] {
            if value <= 0.0 || value.is_nan() {
                return Err(RuntimeError::Row {
                    line,
                    message: format!("{field} must be positive, got {value}"),
                });
            }
        }
        out.push(m);
    }
    Ok(out)
}

fn strip_position_prefix(e: &csv::Error) -> String {
    // csv's message already embeds the byte/line position; keep it terse
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => e.to_string(),
    }
}
