use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{kmeans_segment, otsu_threshold};
use crate::eval::{compare_methods, ComparisonTable, EvalError, MetricsReport};
use crate::image::BinaryMask;
use crate::io::{load_image, load_mask, save_mask, write_text, IoError};
use crate::postprocess::filter_by_area;

use super::{detect, PipelineConfig, PipelineError};

pub const METHOD_ACWE: &str = "acwe";
pub const METHOD_OTSU: &str = "otsu";
pub const METHOD_KMEANS: &str = "kmeans";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub reports: Vec<MetricsReport>,
    /// File names without a partner in the other directory.
    pub skipped: Vec<String>,
    pub failed: Vec<FailedImage>,
    #[serde(skip)]
    pub table: ComparisonTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedImage {
    pub image_id: String,
    pub error: String,
    /// Prediction and ground truth had different dimensions.
    pub dimension_mismatch: bool,
}

fn is_raster(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "pgm" | "pnm")
    )
}

fn rasters_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>, IoError> {
    let entries = std::fs::read_dir(dir).map_err(|source| IoError::Unreadable { path: dir.to_owned(), source })?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|source| IoError::Unreadable { path: dir.to_owned(), source })?.path();
        if path.is_file() && is_raster(&path) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_owned(), path);
            }
        }
    }
    Ok(out)
}

fn score_image(
    id: &str,
    image_path: &Path,
    truth_path: &Path,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<Vec<MetricsReport>, PipelineError> {
    let img = load_image(image_path)?;
    let truth = load_mask(truth_path)?;

    let start = Instant::now();
    let detection = detect(&img, cfg)?;
    let acwe_time = start.elapsed().as_secs_f64();
    let roi = detection.intermediates.disk.as_ref();

    let start = Instant::now();
    let (_, otsu) =
        otsu_threshold(&img, roi).map_err(|source| PipelineError::Baseline { method: METHOD_OTSU, source })?;
    let otsu = filter_by_area(&otsu, &cfg.post);
    let otsu_time = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let kmeans = kmeans_segment(&img, &cfg.kmeans, roi)
        .map_err(|source| PipelineError::Baseline { method: METHOD_KMEANS, source })?;
    let kmeans = filter_by_area(&kmeans, &cfg.post);
    let kmeans_time = start.elapsed().as_secs_f64();

    let runs: [(&str, &BinaryMask, f64); 3] = [
        (METHOD_ACWE, &detection.mask, acwe_time),
        (METHOD_OTSU, &otsu, otsu_time),
        (METHOD_KMEANS, &kmeans, kmeans_time),
    ];
    let mut reports = Vec::with_capacity(runs.len());
    for (method, mask, seconds) in runs {
        let report = MetricsReport::score(method, id, mask, &truth, roi, seconds)?;
        save_mask(mask, out_dir.join("masks").join(format!("{id}__{method}.pgm")))?;
        let json = serde_json::to_string_pretty(&report)?;
        write_text(out_dir.join("reports").join(format!("{id}__{method}.json")), &json)?;
        reports.push(report);
    }
    Ok(reports)
}

/// Run the detector and both baselines on every image of `image_dir` that
/// has a same-named ground truth in `truth_dir`, writing per-run reports,
/// masks, `comparison.csv` and `run.json` into `out_dir`.
///
/// Baselines see the raw frame, restricted to the disk when the
/// configuration uses one, and are area-filtered like the detector output.
pub fn run_experiment(
    image_dir: &Path,
    truth_dir: &Path,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<ExperimentSummary, PipelineError> {
    let images = rasters_by_stem(image_dir)?;
    let truths = rasters_by_stem(truth_dir)?;
    for sub in ["masks", "reports"] {
        std::fs::create_dir_all(out_dir.join(sub))
            .map_err(|e| IoError::Unwritable { path: out_dir.join(sub), detail: e.to_string() })?;
    }

    let mut skipped = Vec::new();
    let mut pairs = Vec::new();
    for (stem, path) in &images {
        match truths.get(stem) {
            Some(t) => pairs.push((stem.clone(), path.clone(), t.clone())),
            None => {
                log::warn!("no ground truth for {}, skipping", path.display());
                skipped.push(path.display().to_string());
            }
        }
    }
    for (stem, path) in &truths {
        if !images.contains_key(stem) {
            log::warn!("ground truth {} has no image, skipping", path.display());
            skipped.push(path.display().to_string());
        }
    }
    if pairs.is_empty() {
        log::warn!("no image/ground-truth pairs found in {}", image_dir.display());
    }

    let results: Vec<(String, Result<Vec<MetricsReport>, PipelineError>)> =
        pairs.par_iter().map(|(id, img, truth)| (id.clone(), score_image(id, img, truth, cfg, out_dir))).collect();

    let mut summary = ExperimentSummary { skipped, ..Default::default() };
    for (id, res) in results {
        match res {
            Ok(reports) => summary.reports.extend(reports),
            Err(e) => {
                log::warn!("{id}: {e}");
                let dimension_mismatch = matches!(e, PipelineError::Eval(EvalError::Dimensions(_)));
                summary.failed.push(FailedImage { image_id: id, error: e.to_string(), dimension_mismatch });
            }
        }
    }
    summary.table = compare_methods(&summary.reports);
    let csv = summary
        .table
        .to_csv()
        .map_err(|e| IoError::Unwritable { path: out_dir.join("comparison.csv"), detail: e.to_string() })?;
    write_text(out_dir.join("comparison.csv"), &csv)?;

    let manifest = serde_json::json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "image_dir": image_dir,
        "truth_dir": truth_dir,
        "config": cfg,
        "pairs": pairs.iter().map(|(id, _, _)| id).collect::<Vec<_>>(),
        "skipped": summary.skipped,
        "failed": summary.failed,
        "reports": summary.reports.len(),
    });
    write_text(out_dir.join("run.json"), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(summary)
}
