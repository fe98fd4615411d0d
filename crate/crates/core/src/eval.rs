//! Pixel-wise scoring against ground truth, with the filament class as
//! the positive class.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{ensure_same_dims, BinaryMask, ImageError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Dimensions(#[from] ImageError),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Whether the positive class was empty, so TPR is 1.0 by convention.
    pub fn tpr_by_convention(&self) -> bool {
        self.tp + self.fn_ == 0
    }

    /// Intersection over union of the positive class; 1.0 when both
    /// prediction and truth are empty.
    pub fn iou(&self) -> f64 {
        let denom = self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            self.tp as f64 / denom as f64
        }
    }

    pub fn dice(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self { tp: self.tp + o.tp, fp: self.fp + o.fp, tn: self.tn + o.tn, fn_: self.fn_ + o.fn_ }
    }
}

/// Count agreement between `pred` and `truth` over `roi` (every pixel if
/// `None`).
pub fn confusion(
    pred: &BinaryMask,
    truth: &BinaryMask,
    roi: Option<&BinaryMask>,
) -> Result<ConfusionMatrix, EvalError> {
    ensure_same_dims(pred.dims(), truth.dims())?;
    if let Some(r) = roi {
        ensure_same_dims(pred.dims(), r.dims())?;
    }
    let mut m = ConfusionMatrix::default();
    for (i, (&p, &t)) in pred.data().iter().zip(truth.data()).enumerate() {
        if roi.is_some_and(|r| !r.data()[i]) {
            continue;
        }
        match (p, t) {
            (true, true) => m.tp += 1,
            (true, false) => m.fp += 1,
            (false, true) => m.fn_ += 1,
            (false, false) => m.tn += 1,
        }
    }
    Ok(m)
}

/// Accuracy rate and true positive rate. TPR is 1.0 when the truth has no
/// positives.
pub fn metrics(m: &ConfusionMatrix) -> Result<(f64, f64), EvalError> {
    let total = m.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let ar = (m.tp + m.tn) as f64 / total as f64;
    let tpr = if m.tpr_by_convention() { 1.0 } else { m.tp as f64 / (m.tp + m.fn_) as f64 };
    Ok((ar, tpr))
}

/// One scored run. The flattened counts are over the scoring region; when
/// that region was a sub-area, `full_frame` holds counts over all pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub image_id: String,
    #[serde(flatten)]
    pub matrix: ConfusionMatrix,
    pub ar: f64,
    pub tpr: f64,
    pub wall_time_seconds: f64,
    #[serde(default)]
    pub tpr_by_convention: bool,
    #[serde(default)]
    pub iou: Option<f64>,
    #[serde(default)]
    pub dice: Option<f64>,
    #[serde(default)]
    pub scored_on_roi: bool,
    #[serde(default)]
    pub full_frame: Option<ConfusionMatrix>,
}

impl MetricsReport {
    /// Score `pred` against `truth`. With a `roi`, headline numbers cover the
    /// roi and full-frame counts are attached.
    pub fn score(
        method: impl Into<String>,
        image_id: impl Into<String>,
        pred: &BinaryMask,
        truth: &BinaryMask,
        roi: Option<&BinaryMask>,
        wall_time_seconds: f64,
    ) -> Result<Self, EvalError> {
        let matrix = confusion(pred, truth, roi)?;
        let full_frame = match roi {
            Some(_) => Some(confusion(pred, truth, None)?),
            None => None,
        };
        Self::from_matrix(method, image_id, matrix, wall_time_seconds).map(|mut r| {
            r.scored_on_roi = roi.is_some();
            r.full_frame = full_frame;
            r
        })
    }

    pub fn from_matrix(
        method: impl Into<String>,
        image_id: impl Into<String>,
        matrix: ConfusionMatrix,
        wall_time_seconds: f64,
    ) -> Result<Self, EvalError> {
        let (ar, tpr) = metrics(&matrix)?;
        Ok(Self {
            method: method.into(),
            image_id: image_id.into(),
            matrix,
            ar,
            tpr,
            wall_time_seconds,
            tpr_by_convention: matrix.tpr_by_convention(),
            iou: Some(matrix.iou()),
            dice: Some(matrix.dice()),
            scored_on_roi: false,
            full_frame: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub image_id: String,
    pub ar: f64,
    pub tpr: f64,
    pub wall_time_seconds: f64,
}

/// Reports ordered by AR, then TPR (both descending), then method and image
/// name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

pub fn compare_methods(reports: &[MetricsReport]) -> ComparisonTable {
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| ComparisonRow {
            method: r.method.clone(),
            image_id: r.image_id.clone(),
            ar: r.ar,
            tpr: r.tpr,
            wall_time_seconds: r.wall_time_seconds,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.ar.total_cmp(&a.ar)
            .then_with(|| b.tpr.total_cmp(&a.tpr))
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.image_id.cmp(&b.image_id))
    });
    ComparisonTable { rows }
}

impl ComparisonTable {
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record(["method", "image_id", "ar", "tpr", "wall_time_seconds"])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }

    /// Mean AR, TPR and wall time per method, in table order of first
    /// appearance.
    pub fn per_method_means(&self) -> Vec<ComparisonRow> {
        let mut out: Vec<(ComparisonRow, usize)> = Vec::new();
        for row in &self.rows {
            match out.iter_mut().find(|(r, _)| r.method == row.method) {
                Some((acc, n)) => {
                    acc.ar += row.ar;
                    acc.tpr += row.tpr;
                    acc.wall_time_seconds += row.wall_time_seconds;
                    *n += 1;
                }
                None => out.push((ComparisonRow { image_id: "*".to_owned(), ..row.clone() }, 1)),
            }
        }
        let mut means: Vec<ComparisonRow> = out
            .into_iter()
            .map(|(mut r, n)| {
                r.ar /= n as f64;
                r.tpr /= n as f64;
                r.wall_time_seconds /= n as f64;
                r
            })
            .collect();
        means.sort_by(|a, b| b.ar.total_cmp(&a.ar).then_with(|| a.method.cmp(&b.method)));
        means
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:<24} {:>8} {:>8} {:>10}", "method", "image", "AR", "TPR", "time [s]")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<12} {:<24} {:>8.4} {:>8.4} {:>10.3}",
                r.method, r.image_id, r.ar, r.tpr, r.wall_time_seconds
            )?;
        }
        Ok(())
    }
}
