use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::disk::DiskGeometry;
use crate::io::{load_image, save_image, save_mask, write_text, IoError};
use crate::postprocess::label_components;
use crate::preprocess::LogTransformParams;

use super::{detect_with_sink, DetectionOutput, PartialOutputs, PipelineConfig, PipelineError, Stage, StageSink};

pub const MANIFEST_FILE: &str = "run.json";
pub const MASK_FILE: &str = "mask.pgm";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
    /// The stage was disabled by configuration.
    #[serde(default)]
    pub skipped: bool,
}

/// Wall-clock data; everything else in a manifest is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_at_unix: f64,
    pub load_seconds: f64,
    pub stages: Vec<StageTiming>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcweSummary {
    pub iterations_run: usize,
    pub converged: bool,
    pub c1: f64,
    pub c2: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
}

/// Record of a pipeline run, written as `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub input: PathBuf,
    pub config: PipelineConfig,
    pub width: usize,
    pub height: usize,
    pub disk: Option<DiskGeometry>,
    pub log_transform: LogTransformParams,
    pub inpaint_pixels: usize,
    pub acwe: AcweSummary,
    pub raw_mask_pixels: usize,
    pub final_mask_pixels: usize,
    pub components_kept: usize,
    /// Files written to the output directory, manifest excluded.
    pub outputs: Vec<String>,
    pub timing: Timing,
}

impl Manifest {
    /// JSON of the manifest without its timing block.
    pub fn reproducible_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        v.as_object_mut().expect("object").remove("timing");
        v
    }
}

#[derive(Debug)]
pub struct PipelineRun {
    pub manifest: Manifest,
    pub output: DetectionOutput,
}

struct FileSink<'a> {
    dir: &'a Path,
    enabled: bool,
    written: Vec<String>,
}

impl FileSink<'_> {
    fn image(&mut self, name: &str, img: &crate::image::GrayImage) -> Result<(), IoError> {
        save_image(img, self.dir.join(name))?;
        self.written.push(name.to_owned());
        Ok(())
    }

    fn mask(&mut self, name: &str, mask: &crate::image::BinaryMask) -> Result<(), IoError> {
        save_mask(mask, self.dir.join(name))?;
        self.written.push(name.to_owned());
        Ok(())
    }
}

impl StageSink for FileSink<'_> {
    fn stage_done(&mut self, _stage: Stage, p: &PartialOutputs<'_>) -> Result<(), PipelineError> {
        if !self.enabled {
            return Ok(());
        }
        if let Some(m) = p.disk {
            self.mask("disk.pgm", m)?;
        }
        if let Some(m) = p.omega {
            self.mask("inpaint_region.pgm", m)?;
        }
        if let Some(i) = p.inpainted {
            self.image("inpainted.png", i)?;
        }
        if let Some(i) = p.log {
            self.image("log.png", i)?;
        }
        if let Some(i) = p.sharpened {
            self.image("sharpened.png", i)?;
        }
        if let Some(r) = p.acwe {
            write_text(self.dir.join("energy_trace.csv"), &r.trace_csv())?;
            self.written.push("energy_trace.csv".to_owned());
        }
        if let Some(m) = p.raw_mask {
            self.mask("acwe_raw.pgm", m)?;
        }
        Ok(())
    }
}

/// Load `input`, run the detector, and write `mask.pgm`, `run.json` and
/// (when enabled) intermediates into `out_dir`. Intermediates already
/// written are left in place if a later stage fails.
pub fn run_pipeline(input: &Path, config: &PipelineConfig, out_dir: &Path) -> Result<PipelineRun, PipelineError> {
    let started_at_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let start = Instant::now();
    std::fs::create_dir_all(out_dir)
        .map_err(|e| IoError::Unwritable { path: out_dir.to_owned(), detail: e.to_string() })?;

    let img = load_image(input)?;
    let load_seconds = start.elapsed().as_secs_f64();

    let mut sink = FileSink { dir: out_dir, enabled: config.emit_intermediates, written: Vec::new() };
    let output = detect_with_sink(&img, config, &mut sink)?;
    save_mask(&output.mask, out_dir.join(MASK_FILE))?;
    let mut outputs = sink.written;
    outputs.push(MASK_FILE.to_owned());
    outputs.sort();

    let total_seconds = start.elapsed().as_secs_f64();
    let acwe = &output.acwe;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        input: input.to_owned(),
        config: *config,
        width: img.width(),
        height: img.height(),
        disk: output.disk,
        log_transform: output.log_params,
        inpaint_pixels: output.intermediates.omega.count(),
        acwe: AcweSummary {
            iterations_run: acwe.iterations_run,
            converged: acwe.converged,
            c1: acwe.c1,
            c2: acwe.c2,
            initial_energy: acwe.energy_trace[0],
            final_energy: *acwe.energy_trace.last().expect("initial energy present"),
        },
        raw_mask_pixels: output.intermediates.raw_mask.count(),
        final_mask_pixels: output.mask.count(),
        components_kept: label_components(&output.mask).num_components,
        outputs,
        timing: Timing { started_at_unix, load_seconds, stages: output.stages.clone(), total_seconds },
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    write_text(out_dir.join(MANIFEST_FILE), &json)?;
    Ok(PipelineRun { manifest, output })
}

/// Re-execute the run recorded in a manifest into `out_dir`.
pub fn run_from_manifest(manifest: &Path, out_dir: &Path) -> Result<PipelineRun, PipelineError> {
    let text = std::fs::read_to_string(manifest)
        .map_err(|source| IoError::Unreadable { path: manifest.to_owned(), source })?;
    let recorded: Manifest = serde_json::from_str(&text)?;
    run_pipeline(&recorded.input, &recorded.config, out_dir)
}
