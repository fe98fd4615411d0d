use std::io::Write;
use std::path::{Path, PathBuf};

use filament_core::acwe::{evolve, filament_mask};
use filament_core::baselines::{kmeans_segment, otsu_threshold};
use filament_core::disk::detect_disk;
use filament_core::eval::{compare_methods, MetricsReport};
use filament_core::io::{load_image, load_mask, save_image, save_mask, write_text, IoError};
use filament_core::pipeline::{run_experiment, run_from_manifest, run_pipeline, PipelineConfig, MANIFEST_FILE};
use filament_core::postprocess::{filter_by_area, label_components};
use filament_core::preprocess::{build_white_patch_mask, inpaint, log_transform, sharpen};
use filament_core::synth::{generate, write_case};
use filament_core::{BinaryMask, SynthSpec};

use crate::error::CliError;
use crate::{
    BaselineArgs, BaselineMethod, CompareArgs, EvaluateArgs, ExperimentArgs, PipelineArgs, PostprocessArgs,
    PreprocessArgs, SegmentArgs, SynthArgs,
};

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Unreadable { path: path.to_owned(), source }.into())
}

fn json_error(path: &Path, err: serde_json::Error) -> CliError {
    CliError::Usage(format!("{}: {err}", path.display()))
}

pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => PipelineConfig::from_json(&read_text(p)?).map_err(|e| json_error(p, e)),
    }
}

fn load_roi(path: Option<&Path>) -> Result<Option<BinaryMask>, CliError> {
    path.map(load_mask).transpose().map_err(CliError::from)
}

/// Print to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn to_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn preprocess(a: PreprocessArgs, mut cfg: PipelineConfig) -> Result<(), CliError> {
    if let Some(n) = a.iterations {
        cfg.inpaint.iterations = n;
    }
    if let Some(p) = a.percentile {
        cfg.inpaint.white_patch_percentile = p;
    }
    if let Some(r) = a.dilation_radius {
        cfg.inpaint.dilation_radius = r;
    }
    cfg.inpaint.validate()?;

    let img = load_image(&a.input)?;
    let disk = if cfg.use_disk_mask {
        let (geometry, mask) =
            detect_disk(&img, cfg.disk_threshold_fraction).map_err(|e| CliError::stage("detect_disk", e))?;
        log::info!("disk centre ({:.1}, {:.1}), radius {:.1}", geometry.center_x, geometry.center_y, geometry.radius);
        Some(mask)
    } else {
        None
    };
    let omega = build_white_patch_mask(&img, &cfg.inpaint, disk.as_ref())?;
    log::info!("inpainting {} pixels", omega.count());
    let filled = inpaint(&img, &omega, &cfg.inpaint)?;
    let (logged, params) = log_transform(&filled)?;
    log::info!("log transform r = {:.4}", params.r);
    save_image(&sharpen(&logged), &a.out)?;
    if let Some(p) = &a.save_mask {
        save_mask(&omega, p)?;
    }
    if let (Some(p), Some(d)) = (&a.save_disk, &disk) {
        save_mask(d, p)?;
    }
    Ok(())
}

pub fn segment(a: SegmentArgs, mut cfg: PipelineConfig) -> Result<(), CliError> {
    if let Some(n) = a.max_iters {
        cfg.acwe.max_iters = n;
    }
    cfg.acwe.validate()?;
    let img = load_image(&a.input)?;
    let roi = load_roi(a.roi.as_deref())?;
    let result = evolve(&img, &cfg.acwe, roi.as_ref())?;
    log::info!(
        "{} iterations, converged = {}, c1 = {:.4}, c2 = {:.4}",
        result.iterations_run,
        result.converged,
        result.c1,
        result.c2
    );
    let mut mask = filament_mask(&result);
    if let Some(r) = &roi {
        mask = mask.and(r).map_err(|e| CliError::stage("filament_mask", e))?;
    }
    save_mask(&mask, &a.out)?;
    if let Some(p) = &a.trace {
        write_text(p, &result.trace_csv())?;
    }
    Ok(())
}

pub fn baseline(a: BaselineArgs, mut cfg: PipelineConfig) -> Result<(), CliError> {
    let img = load_image(&a.input)?;
    let roi = load_roi(a.roi.as_deref())?;
    let mask = match a.method {
        BaselineMethod::Otsu => {
            if a.k.is_some() {
                return Err(CliError::Usage("--k only applies to k-means".into()));
            }
            let (t, mask) = otsu_threshold(&img, roi.as_ref())?;
            log::info!("Otsu threshold {t}");
            mask
        }
        BaselineMethod::Kmeans => {
            if let Some(k) = a.k {
                cfg.kmeans.k = k;
            }
            kmeans_segment(&img, &cfg.kmeans, roi.as_ref())?
        }
    };
    save_mask(&mask, &a.out)?;
    Ok(())
}

pub fn postprocess(a: PostprocessArgs, mut cfg: PipelineConfig) -> Result<(), CliError> {
    if let Some(m) = a.min_area {
        cfg.post.min_area = m;
    }
    let mask = load_mask(&a.input)?;
    let kept = filter_by_area(&mask, &cfg.post);
    save_mask(&kept, &a.out)?;
    if let Some(p) = &a.report {
        write_text(p, &to_json(&label_components(&kept).stats()))?;
    }
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let pred = load_mask(&a.pred)?;
    let truth = load_mask(&a.truth)?;
    let roi = load_roi(a.roi.as_deref())?;
    let image_id =
        a.image_id.unwrap_or_else(|| a.pred.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let report = MetricsReport::score(a.method, image_id, &pred, &truth, roi.as_ref(), 0.0)?;
    let json = to_json(&report);
    if let Some(p) = &a.out {
        write_text(p, &json)?;
    }
    emit(&format!("{json}\n"));
    Ok(())
}

fn report_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(|source| IoError::Unreadable { path: p.clone(), source })?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

pub fn compare(a: CompareArgs) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for path in report_files(&a.reports)? {
        let report: MetricsReport = serde_json::from_str(&read_text(&path)?).map_err(|e| json_error(&path, e))?;
        reports.push(report);
    }
    if reports.is_empty() {
        log::warn!("no reports found");
    }
    let table = compare_methods(&reports);
    if let Some(p) = &a.out {
        let csv = table.to_csv().map_err(|e| IoError::Unwritable { path: p.clone(), detail: e.to_string() })?;
        write_text(p, &csv)?;
    }
    emit(&table.to_string());
    Ok(())
}

pub fn pipeline(a: PipelineArgs, mut cfg: PipelineConfig) -> Result<(), CliError> {
    let run = match (&a.source.input, &a.source.from_manifest) {
        (Some(input), None) => {
            cfg.emit_intermediates |= a.intermediates;
            run_pipeline(input, &cfg, &a.out_dir)?
        }
        (None, Some(manifest)) => run_from_manifest(manifest, &a.out_dir)?,
        _ => return Err(CliError::Usage("give exactly one of --in and --from-manifest".into())),
    };
    let m = &run.manifest;
    emit(&format!(
        "{} filament pixels in {} components, {:.2}s; manifest {}\n",
        m.final_mask_pixels,
        m.components_kept,
        m.timing.total_seconds,
        a.out_dir.join(MANIFEST_FILE).display()
    ));
    Ok(())
}

pub fn experiment(a: ExperimentArgs, cfg: PipelineConfig) -> Result<(), CliError> {
    let summary = run_experiment(&a.images, &a.truth, &cfg, &a.out_dir)?;
    let mut text = summary.table.to_string();
    for row in summary.table.per_method_means() {
        text.push_str(&format!("mean {:<8} AR {:.4}  TPR {:.4}\n", row.method, row.ar, row.tpr));
    }
    emit(&text);
    if summary.failed.is_empty() {
        return Ok(());
    }
    let ids: Vec<&str> = summary.failed.iter().map(|f| f.image_id.as_str()).collect();
    let message = format!("{} image(s) failed: {}", ids.len(), ids.join(", "));
    if summary.failed.iter().any(|f| f.dimension_mismatch) {
        Err(CliError::Mismatch(message))
    } else {
        Err(CliError::stage("experiment", message))
    }
}

pub fn synth(a: SynthArgs) -> Result<(), CliError> {
    let mut spec = match &a.spec {
        Some(p) => serde_json::from_str::<SynthSpec>(&read_text(p)?).map_err(|e| json_error(p, e))?,
        None => SynthSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let case = generate(&spec)?;
    write_case(&case, &spec, &a.out_dir)?;
    emit(&format!("wrote synthetic case to {}\n", a.out_dir.display()));
    Ok(())
}
