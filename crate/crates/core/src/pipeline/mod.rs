//! End-to-end detection: disk localisation, preprocessing, level-set
//! segmentation and area filtering, with per-stage timing.

mod experiment;
mod run;

pub use experiment::{run_experiment, ExperimentSummary, FailedImage, METHOD_ACWE, METHOD_KMEANS, METHOD_OTSU};
pub use run::{
    run_from_manifest, run_pipeline, AcweSummary, Manifest, PipelineRun, StageTiming, Timing, MANIFEST_FILE, MASK_FILE,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acwe::{self, AcweConfig, AcweError, AcweResult};
use crate::baselines::{BaselineError, KMeansConfig};
use crate::disk::{detect_disk, DiskError, DiskGeometry};
use crate::eval::EvalError;
use crate::image::{BinaryMask, GrayImage};
use crate::io::IoError;
use crate::postprocess::{filter_by_area, PostprocessConfig};
use crate::preprocess::{self, InpaintConfig, LogTransformParams, PreprocessError};

/// Every tunable of a detection run. Any field may be omitted from a JSON
/// configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub inpaint: InpaintConfig,
    pub acwe: AcweConfig,
    pub post: PostprocessConfig,
    /// Restrict patch detection, segmentation and scoring to the solar disk.
    pub use_disk_mask: bool,
    /// Write inpainted, log, sharpened images, raw mask and energy trace.
    pub emit_intermediates: bool,
    /// Disk pixels are those brighter than this fraction of the maximum.
    pub disk_threshold_fraction: f64,
    /// Baseline settings for experiments.
    pub kmeans: KMeansConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inpaint: InpaintConfig::default(),
            acwe: AcweConfig::default(),
            post: PostprocessConfig::default(),
            use_disk_mask: true,
            emit_intermediates: false,
            disk_threshold_fraction: 0.5,
            kmeans: KMeansConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// The eight detection stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    DetectDisk,
    BuildWhitePatchMask,
    Inpaint,
    LogTransform,
    Sharpen,
    Evolve,
    FilamentMask,
    FilterByArea,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::DetectDisk,
        Stage::BuildWhitePatchMask,
        Stage::Inpaint,
        Stage::LogTransform,
        Stage::Sharpen,
        Stage::Evolve,
        Stage::FilamentMask,
        Stage::FilterByArea,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::DetectDisk => "detect_disk",
            Stage::BuildWhitePatchMask => "build_white_patch_mask",
            Stage::Inpaint => "inpaint",
            Stage::LogTransform => "log_transform",
            Stage::Sharpen => "sharpen",
            Stage::Evolve => "evolve",
            Stage::FilamentMask => "filament_mask",
            Stage::FilterByArea => "filter_by_area",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum StageFailure {
    #[error(transparent)]
    Disk(#[from] DiskError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Acwe(#[from] AcweError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: StageFailure,
    },
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed manifest or configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("baseline {method} failed: {source}")]
    Baseline {
        method: &'static str,
        #[source]
        source: BaselineError,
    },
    #[error("scoring failed: {0}")]
    Eval(#[from] EvalError),
}

impl PipelineError {
    fn stage(stage: Stage, source: impl Into<StageFailure>) -> Self {
        Self::Stage { stage, source: source.into() }
    }
}

/// Images and masks produced along the way.
#[derive(Debug, Clone)]
pub struct Intermediates {
    pub disk: Option<BinaryMask>,
    pub omega: BinaryMask,
    pub inpainted: GrayImage,
    pub log: GrayImage,
    pub sharpened: GrayImage,
    pub raw_mask: BinaryMask,
}

#[derive(Debug, Clone)]
pub struct DetectionOutput {
    /// Filament mask after area filtering.
    pub mask: BinaryMask,
    pub disk: Option<DiskGeometry>,
    pub log_params: LogTransformParams,
    pub acwe: AcweResult,
    pub intermediates: Intermediates,
    pub stages: Vec<StageTiming>,
}

/// Observer for stage completions, e.g. to persist intermediates as soon
/// as they exist.
pub trait StageSink {
    fn stage_done(&mut self, _stage: Stage, _partial: &PartialOutputs<'_>) -> Result<(), PipelineError> {
        Ok(())
    }
}

impl StageSink for () {}

/// Outputs available at a stage boundary.
#[derive(Debug, Default)]
pub struct PartialOutputs<'a> {
    pub disk: Option<&'a BinaryMask>,
    pub omega: Option<&'a BinaryMask>,
    pub inpainted: Option<&'a GrayImage>,
    pub log: Option<&'a GrayImage>,
    pub sharpened: Option<&'a GrayImage>,
    pub acwe: Option<&'a AcweResult>,
    pub raw_mask: Option<&'a BinaryMask>,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Run the detector on an in-memory frame.
pub fn detect(img: &GrayImage, cfg: &PipelineConfig) -> Result<DetectionOutput, PipelineError> {
    detect_with_sink(img, cfg, &mut ())
}

pub fn detect_with_sink(
    img: &GrayImage,
    cfg: &PipelineConfig,
    sink: &mut dyn StageSink,
) -> Result<DetectionOutput, PipelineError> {
    cfg.inpaint.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
    cfg.acwe.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut stages = Vec::with_capacity(Stage::ALL.len());
    let mut record = |stage: Stage, seconds: f64, skipped: bool| {
        log::debug!("stage {stage} took {seconds:.3}s");
        stages.push(StageTiming { stage: stage.name().to_owned(), seconds, skipped });
    };

    let (disk, t) = timed(|| -> Result<_, PipelineError> {
        if cfg.use_disk_mask {
            let (geo, mask) = detect_disk(img, cfg.disk_threshold_fraction)
                .map_err(|e| PipelineError::stage(Stage::DetectDisk, e))?;
            Ok(Some((geo, mask)))
        } else {
            Ok(None)
        }
    });
    let disk = disk?;
    record(Stage::DetectDisk, t, disk.is_none());
    let roi = disk.as_ref().map(|(_, m)| m);
    sink.stage_done(Stage::DetectDisk, &PartialOutputs { disk: roi, ..Default::default() })?;

    let (omega, t) = timed(|| preprocess::build_white_patch_mask(img, &cfg.inpaint, roi));
    let omega = omega.map_err(|e| PipelineError::stage(Stage::BuildWhitePatchMask, e))?;
    record(Stage::BuildWhitePatchMask, t, false);
    sink.stage_done(Stage::BuildWhitePatchMask, &PartialOutputs { omega: Some(&omega), ..Default::default() })?;

    let (inpainted, t) = timed(|| preprocess::inpaint(img, &omega, &cfg.inpaint));
    let inpainted = inpainted.map_err(|e| PipelineError::stage(Stage::Inpaint, e))?;
    record(Stage::Inpaint, t, false);
    sink.stage_done(Stage::Inpaint, &PartialOutputs { inpainted: Some(&inpainted), ..Default::default() })?;

    let (logged, t) = timed(|| preprocess::log_transform(&inpainted));
    let (log, log_params) = logged.map_err(|e| PipelineError::stage(Stage::LogTransform, e))?;
    record(Stage::LogTransform, t, false);
    sink.stage_done(Stage::LogTransform, &PartialOutputs { log: Some(&log), ..Default::default() })?;

    let (sharpened, t) = timed(|| preprocess::sharpen(&log));
    record(Stage::Sharpen, t, false);
    sink.stage_done(Stage::Sharpen, &PartialOutputs { sharpened: Some(&sharpened), ..Default::default() })?;

    let (evolved, t) = timed(|| acwe::evolve(&sharpened, &cfg.acwe, roi));
    let acwe = evolved.map_err(|e| PipelineError::stage(Stage::Evolve, e))?;
    record(Stage::Evolve, t, false);
    log::info!(
        "level set: {} iterations, converged = {}, c1 = {:.4}, c2 = {:.4}",
        acwe.iterations_run,
        acwe.converged,
        acwe.c1,
        acwe.c2
    );
    sink.stage_done(Stage::Evolve, &PartialOutputs { acwe: Some(&acwe), ..Default::default() })?;

    let (raw_mask, t) = timed(|| {
        let dark = acwe::filament_mask(&acwe);
        match roi {
            Some(r) => dark.and(r).expect("same dimensions"),
            None => dark,
        }
    });
    record(Stage::FilamentMask, t, false);
    sink.stage_done(Stage::FilamentMask, &PartialOutputs { raw_mask: Some(&raw_mask), ..Default::default() })?;

    let (mask, t) = timed(|| filter_by_area(&raw_mask, &cfg.post));
    record(Stage::FilterByArea, t, false);

    let (disk_geometry, disk_mask) = match disk {
        Some((g, m)) => (Some(g), Some(m)),
        None => (None, None),
    };
    Ok(DetectionOutput {
        mask,
        disk: disk_geometry,
        log_params,
        acwe,
        intermediates: Intermediates { disk: disk_mask, omega, inpainted, log, sharpened, raw_mask },
        stages,
    })
}
