//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use filament_core::acwe::{energy, evolve, filament_mask};
use filament_core::baselines::{kmeans_segment, otsu_threshold};
use filament_core::eval::{confusion, metrics};
use filament_core::io::save_image;
use filament_core::pipeline::{detect, run_experiment, run_pipeline, MASK_FILE, METHOD_ACWE};
use filament_core::postprocess::{filter_by_area, label_components};
use filament_core::preprocess::{inpaint, log_transform, sharpen_unclamped};
use filament_core::synth::generate;
use filament_core::{
    AcweConfig, BinaryMask, ConfusionMatrix, GrayImage, InpaintConfig, LevelSetField, PipelineConfig,
    PostprocessConfig, SynthSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Directory holding `images/` and `truth/` of the BBSO filament set.
const DATASET_ENV: &str = "FILAMENT_BBSO_DIR";
const DATASET_IMAGE_TAG: &str = "20130809";
const REFERENCE_TPR: f64 = 0.9075;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn within(budget: Duration, elapsed: Duration) -> Option<String> {
    (elapsed > budget).then(|| format!("over budget: {:.2} s > {} s", elapsed.as_secs_f64(), budget.as_secs()))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn otsu_oracle_equivalence() -> Outcome {
    let mut r = rng(1);
    let mut agree = 0;
    for i in 0..200 {
        let (w, h) = (r.random_range(8..=64), r.random_range(8..=64));
        let img = if i % 2 == 0 {
            common::random_image(&mut r, w, h, 0.0, 255.0)
        } else {
            // few levels, many ties
            let levels = r.random_range(2..6);
            GrayImage::from_fn(w, h, |_, _| (r.random_range(0..levels) * 40) as f64).unwrap()
        };
        let got = otsu_threshold(&img, None).ok().map(|(t, _)| t);
        if got == common::otsu_oracle(&img, None) {
            agree += 1;
        }
    }
    check(agree == 200, format!("{agree}/200 thresholds equal the exhaustive scan"))
}

fn energy_oracle() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (w, h) = (r.random_range(3..=16), r.random_range(3..=16));
        let img = common::random_image(&mut r, w, h, 0.0, 1.0);
        let phi = LevelSetField::new(w, h, (0..w * h).map(|_| r.random_range(-3.0..3.0)).collect()).unwrap();
        let cfg = AcweConfig {
            mu: r.random_range(0.0..1.0),
            nu: r.random_range(-0.5..0.5),
            lambda1: r.random_range(0.01..2.0),
            lambda2: r.random_range(0.01..2.0),
            epsilon: r.random_range(0.1..3.0),
            ..Default::default()
        };
        let got = energy(&img, &phi, &cfg).unwrap();
        let want = common::energy_oracle(
            img.data(),
            phi.values(),
            w,
            h,
            cfg.mu,
            cfg.nu,
            cfg.lambda1,
            cfg.lambda2,
            cfg.epsilon,
        );
        worst = worst.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
    }
    check(worst <= 1e-9, format!("worst relative error {worst:.2e} over 100 cases"))
}

fn two_region_recovery() -> Outcome {
    let mut r = rng(3);
    let mut worst_frame: f64 = 1.0;
    let mut worst_disk: f64 = 1.0;
    let mut energy_up = 0;
    for _ in 0..20 {
        let sigma = r.random_range(1.0..=5.0);
        let (img, truth) = common::two_region_case(&mut r, 128, sigma);
        let res = evolve(&img, &AcweConfig::default(), None).unwrap();
        let mask = filament_mask(&res);
        let same = |i: usize| mask.data()[i] == truth.data()[i];
        let frame = (0..img.len()).filter(|&i| same(i)).count() as f64 / img.len() as f64;
        let disk = (0..img.len()).filter(|&i| truth.data()[i] && same(i)).count() as f64 / truth.count() as f64;
        worst_frame = worst_frame.min(frame);
        worst_disk = worst_disk.min(disk);
        if res.energy_trace.last().unwrap() > &res.energy_trace[0] {
            energy_up += 1;
        }
    }
    check(
        worst_frame >= 0.99 && worst_disk >= 0.99 && energy_up == 0,
        format!(
            "worst agreement {worst_frame:.4} over the frame, {worst_disk:.4} inside the disk; {energy_up} runs with energy increase"
        ),
    )
}

fn synthetic_pipeline() -> Outcome {
    let cfg = PipelineConfig::default();
    let post = PostprocessConfig { min_area: cfg.post.min_area };
    let mut worst_tpr: f64 = 1.0;
    let mut worst_ar: f64 = 1.0;
    let mut ordered = 0;
    let mut lines = Vec::new();
    for seed in 0..10u64 {
        let spec = SynthSpec {
            size: 512,
            seed,
            n_filaments: 3 + (seed % 4) as usize,
            n_patches: 1 + (seed % 3) as usize,
            limb_darkening: 0.3,
            ..Default::default()
        };
        let case = generate(&spec).unwrap();
        let out = detect(&case.image, &cfg).unwrap();
        let roi = out.intermediates.disk.as_ref();
        let score = |m: &BinaryMask| metrics(&confusion(m, &case.truth, Some(&case.disk)).unwrap()).unwrap();
        let (ar, tpr) = score(&out.mask);
        let otsu = filter_by_area(&otsu_threshold(&case.image, roi).unwrap().1, &post);
        let km = filter_by_area(&kmeans_segment(&case.image, &cfg.kmeans, roi).unwrap(), &post);
        let (otsu_ar, _) = score(&otsu);
        let (km_ar, _) = score(&km);
        worst_tpr = worst_tpr.min(tpr);
        worst_ar = worst_ar.min(ar);
        if otsu_ar < ar && km_ar < ar {
            ordered += 1;
        }
        lines.push(format!("{seed}:{ar:.4}/{otsu_ar:.3}/{km_ar:.3}"));
    }
    check(
        worst_tpr >= 0.85 && worst_ar >= 0.99 && ordered >= 8,
        format!(
            "worst TPR {worst_tpr:.4}, worst AR {worst_ar:.4}, baselines lower on {ordered}/10 (seed:acwe/otsu/kmeans AR {})",
            lines.join(" ")
        ),
    )
}

fn preprocessing_identities() -> Outcome {
    let mut r = rng(5);
    let mut problems = Vec::new();
    let quick = InpaintConfig { iterations: 40, ..Default::default() };
    for _ in 0..20 {
        let (w, h) = (r.random_range(3..24), r.random_range(3..24));
        let flat = GrayImage::filled(w, h, r.random_range(0.0..255.0)).unwrap();
        let omega = common::random_mask(&mut r, w, h, 0.4);
        if inpaint(&flat, &omega, &quick).unwrap() != flat {
            problems.push("inpaint changed a constant image");
        }
        let img = common::random_image(&mut r, w, h, 0.0, 255.0);
        let out = inpaint(&img, &omega, &quick).unwrap();
        let kept =
            (0..img.len()).filter(|&i| !omega.data()[i]).all(|i| img.data()[i].to_bits() == out.data()[i].to_bits());
        if !kept {
            problems.push("inpaint changed a pixel outside the region");
        }
    }
    for _ in 0..1000 {
        let (u, v) = (r.random_range(0.0..500.0), r.random_range(0.0..500.0));
        let top = r.random_range(500.0..4000.0);
        let img = GrayImage::from_fn(3, 3, |x, y| match (x, y) {
            (0, 0) => u,
            (1, 0) => v,
            _ => top,
        })
        .unwrap();
        let (out, _) = log_transform(&img).unwrap();
        if (out.get(2, 2) - 255.0).abs() > 1e-9 {
            problems.push("log transform misses 255 at the maximum");
        }
        if (u <= v) != (out.get(0, 0) <= out.get(1, 0)) {
            problems.push("log transform reorders a pair");
        }
    }
    for _ in 0..100 {
        let (w, h) = (r.random_range(3..32), r.random_range(3..32));
        let img = common::random_image(&mut r, w, h, 0.0, 255.0);
        let want = common::convolve_sharpen(&img);
        if want.iter().zip(sharpen_unclamped(&img).data()).any(|(a, b)| (a - b).abs() > 1e-12) {
            problems.push("sharpen differs from the convolution oracle");
        }
    }
    problems.dedup();
    check(
        problems.is_empty(),
        if problems.is_empty() {
            "inpaint 20+20 cases, log 1000 pairs, sharpen 100 images".to_owned()
        } else {
            problems.join("; ")
        },
    )
}

fn inpainting_quality() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (holed, omega, _) = common::ramp_with_hole(&mut r);
        let reference = common::harmonic_fill(&holed, &omega, 1e-10);
        let filled = inpaint(&holed, &omega, &InpaintConfig::default()).unwrap();
        for (a, b) in filled.data().iter().zip(reference.data()) {
            worst = worst.max((a - b).abs());
        }
    }
    check(worst <= 2.0, format!("max deviation from the harmonic fill {worst:.4} over 10 holes"))
}

fn postprocessing_properties() -> Outcome {
    let mut r = rng(7);
    let mut bad = 0;
    for _ in 0..200 {
        let (w, h) = (r.random_range(1..=32), r.random_range(1..=32));
        let density = r.random_range(0.05..0.7);
        let mask = common::random_mask(&mut r, w, h, density);
        let (a, b) = (r.random_range(0..40), r.random_range(0..40));
        let (lo, hi) = (PostprocessConfig { min_area: a.min(b) }, PostprocessConfig { min_area: a.max(b) });
        let f_lo = filter_by_area(&mask, &lo);
        let f_hi = filter_by_area(&mask, &hi);
        let (labels, n) = common::flood_fill_labels(&mask);
        let got = label_components(&mask);
        let ok = filter_by_area(&f_lo, &lo) == f_lo
            && f_hi.is_subset_of(&f_lo)
            && f_lo.is_subset_of(&mask)
            && f_lo == common::area_filter_oracle(&mask, lo.min_area)
            && got.labels == labels
            && got.num_components == n as usize;
        if !ok {
            bad += 1;
        }
    }
    check(bad == 0, format!("{}/200 masks satisfy idempotence, antitonicity and flood-fill labels", 200 - bad))
}

fn metric_identities() -> Outcome {
    let cm = |tp, fp, tn, fn_| ConfusionMatrix { tp, fp, tn, fn_ };
    let truth = BinaryMask::from_fn(10, 10, |x, _| x < 3).unwrap();
    let mut ok = confusion(&truth, &truth, None).unwrap() == cm(30, 0, 70, 0)
        && confusion(&truth.complement(), &truth, None).unwrap() == cm(0, 70, 0, 30)
        && metrics(&cm(30, 0, 70, 0)).unwrap() == (1.0, 1.0)
        && metrics(&cm(0, 0, 100, 0)).unwrap() == (1.0, 1.0)
        && metrics(&cm(9075, 1775, 988225, 925)).unwrap() == (0.9973, 0.9075)
        && metrics(&ConfusionMatrix::default()).is_err();
    let examples = ok;
    let mut r = rng(8);
    for _ in 0..100 {
        let (w, h) = (r.random_range(1..=24), r.random_range(1..=24));
        let pred = common::random_mask(&mut r, w, h, 0.5);
        let truth = common::random_mask(&mut r, w, h, 0.5);
        let part = common::random_mask(&mut r, w, h, 0.5);
        let a = confusion(&pred, &truth, Some(&part)).unwrap();
        let b = confusion(&pred, &truth, Some(&part.complement())).unwrap();
        let all = confusion(&pred, &truth, None).unwrap();
        ok &= a + b == all && all == common::tally(&pred, &truth, None);
    }
    check(
        ok,
        format!("worked examples {}, roi additivity over 100 partitions", if examples { "exact" } else { "WRONG" }),
    )
}

fn synthetic_input(dir: &Path, size: usize) -> PathBuf {
    let case = generate(&SynthSpec { size, ..Default::default() }).unwrap();
    let path = dir.join(format!("synthetic_{size}.png"));
    save_image(&case.image, &path).unwrap();
    path
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = synthetic_input(dir.path(), 256);
    let cfg = PipelineConfig::default();
    let a = run_pipeline(&input, &cfg, &dir.path().join("a")).unwrap();
    let b = run_pipeline(&input, &cfg, &dir.path().join("b")).unwrap();
    let bytes = |d: &str| std::fs::read(dir.path().join(d).join(MASK_FILE)).unwrap();
    let masks = a.output.mask == b.output.mask && bytes("a") == bytes("b");
    let manifests = a.manifest.reproducible_json() == b.manifest.reproducible_json();
    check(masks && manifests, format!("masks identical: {masks}, manifests identical without timing: {manifests}"))
}

fn runtime_envelope() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = synthetic_input(dir.path(), 1024);
    let start = Instant::now();
    let run = run_pipeline(&input, &PipelineConfig::default(), &dir.path().join("out")).unwrap();
    let secs = start.elapsed().as_secs_f64();
    check(
        secs < 60.0,
        format!("1024x1024 pipeline {secs:.2} s wall ({:.2} s recorded)", run.manifest.timing.total_seconds),
    )
}

fn dataset_reproduction() -> Outcome {
    let Some(root) = std::env::var_os(DATASET_ENV).map(PathBuf::from) else {
        return Outcome::Skip(format!("dataset absent: set {DATASET_ENV} to a directory with images/ and truth/"));
    };
    let (images, truth) = (root.join("images"), root.join("truth"));
    if !images.is_dir() || !truth.is_dir() {
        return Outcome::Skip(format!("dataset absent: {} lacks images/ or truth/", root.display()));
    }
    let out = tempfile::tempdir().unwrap();
    let summary = match run_experiment(&images, &truth, &PipelineConfig::default(), out.path()) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(format!("experiment failed: {e}")),
    };
    let Some(report) =
        summary.reports.iter().find(|r| r.method == METHOD_ACWE && r.image_id.contains(DATASET_IMAGE_TAG))
    else {
        return Outcome::Skip(format!(
            "no image named like {DATASET_IMAGE_TAG} with ground truth in {}",
            root.display()
        ));
    };
    check(
        (report.tpr - REFERENCE_TPR).abs() <= 0.05 && report.ar >= 0.99,
        format!("{}: TPR {:.4}, AR {:.4}", report.image_id, report.tpr, report.ar),
    )
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, Option<u64>, Check); 11] = [
        (1, "Otsu oracle equivalence", Some(5), otsu_oracle_equivalence),
        (2, "energy oracle", Some(2), energy_oracle),
        (3, "two-region recovery", Some(60), two_region_recovery),
        (4, "synthetic end-to-end pipeline", Some(300), synthetic_pipeline),
        (5, "preprocessing identities", None, preprocessing_identities),
        (6, "inpainting quality", None, inpainting_quality),
        (7, "post-processing properties", None, postprocessing_properties),
        (8, "metric identities", None, metric_identities),
        (9, "determinism", None, determinism),
        (10, "runtime envelope", None, runtime_envelope),
        (11, "dataset reproduction", None, dataset_reproduction),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let (Outcome::Pass(detail), Some(late)) =
            (&outcome, budget.and_then(|b| within(Duration::from_secs(b), elapsed)))
        {
            outcome = Outcome::Fail(format!("{detail}; {late}"));
        }
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {id:>2} {name}: {detail} [{:.2} s]", elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
