//! Synthetic full-disk frames with exact filament ground truth.
//!
//! Randomness comes from ChaCha8 seeded with [`SynthSpec::seed`] and
//! Gaussian noise from `rand_distr::Normal`; both crates are pinned in the
//! workspace manifest so fixtures stay stable.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{BinaryMask, GrayImage};
use crate::io::{save_image, save_mask, write_text, IoError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Spec(String),
    #[error("could not place {what} without overlap after {attempts} attempts")]
    Placement { what: &'static str, attempts: usize },
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    /// Side length of the square frame.
    pub size: usize,
    /// Disk radius as a fraction of `size`.
    pub disk_radius_fraction: f64,
    pub background_level: f64,
    pub disk_level: f64,
    pub filament_level: f64,
    pub patch_level: f64,
    pub n_filaments: usize,
    pub n_patches: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Linear limb-darkening coefficient `u` in `1 - u (1 - cos theta)`,
    /// applied to disk and filament levels. Zero gives a flat disk.
    pub limb_darkening: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            size: 512,
            disk_radius_fraction: 0.45,
            background_level: 10.0,
            disk_level: 180.0,
            filament_level: 60.0,
            patch_level: 250.0,
            n_filaments: 4,
            n_patches: 2,
            noise_sigma: 3.0,
            seed: 0,
            limb_darkening: 0.0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Spec(m.to_owned()));
        if self.size < 64 {
            return bad("size must be at least 64");
        }
        if !(self.disk_radius_fraction > 0.0 && self.disk_radius_fraction < 0.5) {
            return bad("disk_radius_fraction must lie in (0, 0.5)");
        }
        if !(self.filament_level < self.disk_level && self.disk_level < self.patch_level) {
            return bad("levels must satisfy filament < disk < patch");
        }
        let levels = [self.background_level, self.disk_level, self.filament_level, self.patch_level];
        if levels.iter().any(|v| !(0.0..=255.0).contains(v)) {
            return bad("levels must lie in [0, 255]");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be >= 0");
        }
        if !(0.0..1.0).contains(&self.limb_darkening) {
            return bad("limb_darkening must lie in [0, 1)");
        }
        Ok(())
    }

    fn center(&self) -> f64 {
        (self.size as f64 - 1.0) / 2.0
    }

    fn radius(&self) -> f64 {
        self.disk_radius_fraction * self.size as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCase {
    pub image: GrayImage,
    /// Filament pixels.
    pub truth: BinaryMask,
    pub disk: BinaryMask,
    pub patches: BinaryMask,
}

/// Inclusive pixel box.
#[derive(Debug, Clone, Copy)]
struct PixelBox {
    x0: isize,
    y0: isize,
    x1: isize,
    y1: isize,
}

impl PixelBox {
    fn grown(self, m: isize) -> Self {
        Self { x0: self.x0 - m, y0: self.y0 - m, x1: self.x1 + m, y1: self.y1 + m }
    }

    fn overlaps(&self, o: &Self) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }
}

/// Gap kept between the bounding boxes of any two drawn shapes.
const SEPARATION: isize = 2;
const MAX_ATTEMPTS: usize = 500;

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    (p.0 - (a.0 + t * dx)).hypot(p.1 - (a.1 + t * dy))
}

/// Pixels within `half_width` of the polyline, with their bounding box.
fn rasterize_stroke(points: &[(f64, f64)], half_width: f64) -> (Vec<(usize, usize)>, PixelBox) {
    let xs = points.iter().map(|p| p.0);
    let ys = points.iter().map(|p| p.1);
    let x0 = (xs.clone().fold(f64::INFINITY, f64::min) - half_width).floor() as isize;
    let x1 = (xs.fold(f64::NEG_INFINITY, f64::max) + half_width).ceil() as isize;
    let y0 = (ys.clone().fold(f64::INFINITY, f64::min) - half_width).floor() as isize;
    let y1 = (ys.fold(f64::NEG_INFINITY, f64::max) + half_width).ceil() as isize;
    let mut pixels = Vec::new();
    let mut bbox = PixelBox { x0: isize::MAX, y0: isize::MAX, x1: isize::MIN, y1: isize::MIN };
    for y in y0.max(0)..=y1 {
        for x in x0.max(0)..=x1 {
            let p = (x as f64, y as f64);
            let inside = points.windows(2).any(|s| point_segment_distance(p, s[0], s[1]) <= half_width);
            if inside {
                pixels.push((x as usize, y as usize));
                bbox = PixelBox { x0: bbox.x0.min(x), y0: bbox.y0.min(y), x1: bbox.x1.max(x), y1: bbox.y1.max(y) };
            }
        }
    }
    (pixels, bbox)
}

fn random_point_in_disk(rng: &mut ChaCha8Rng, c: f64, r: f64) -> (f64, f64) {
    loop {
        let x = rng.random_range(-r..=r);
        let y = rng.random_range(-r..=r);
        if x * x + y * y <= r * r {
            return (c + x, c + y);
        }
    }
}

/// Random-walk polyline of 2-4 px thickness, kept inside `0.85 R`.
fn draw_filament(rng: &mut ChaCha8Rng, spec: &SynthSpec) -> Option<(Vec<(usize, usize)>, PixelBox)> {
    let (c, radius) = (spec.center(), spec.radius());
    let thickness: f64 = rng.random_range(2.0..=4.0);
    let half = thickness / 2.0;
    let steps = rng.random_range(6..=12);
    let step_len = spec.size as f64 * rng.random_range(0.015..0.025);
    let turn = Normal::new(0.0, 0.35).expect("valid sigma");

    let mut p = random_point_in_disk(rng, c, 0.7 * radius);
    let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut points = vec![p];
    for _ in 0..steps {
        heading += turn.sample(rng);
        p = (p.0 + step_len * heading.cos(), p.1 + step_len * heading.sin());
        points.push(p);
    }
    let limit = 0.85 * radius - half;
    if points.iter().any(|q| (q.0 - c).hypot(q.1 - c) > limit) {
        return None;
    }
    Some(rasterize_stroke(&points, half))
}

/// Share of the disk area covered by all patches together, before the
/// per-patch radius jitter. Kept between the 0.5% and 1% upper tails so
/// patches sit above the 0.99 disk quantile and fill the default 0.995 one.
const PATCH_AREA_FRACTION: f64 = 0.0075;

/// Disc of bright pixels centred inside `0.8 R`.
fn draw_patch(rng: &mut ChaCha8Rng, spec: &SynthSpec) -> (Vec<(usize, usize)>, PixelBox) {
    let (c, radius) = (spec.center(), spec.radius());
    let share = PATCH_AREA_FRACTION / spec.n_patches as f64;
    let r = (radius * share.sqrt()).max(1.5) * rng.random_range(0.9..1.1);
    let (px, py) = random_point_in_disk(rng, c, 0.8 * radius);
    let mut pixels = Vec::new();
    let (x0, x1) = ((px - r).floor() as isize, (px + r).ceil() as isize);
    let (y0, y1) = ((py - r).floor() as isize, (py + r).ceil() as isize);
    let mut bbox = PixelBox { x0: isize::MAX, y0: isize::MAX, x1: isize::MIN, y1: isize::MIN };
    for y in y0.max(0)..=y1 {
        for x in x0.max(0)..=x1 {
            if (x as f64 - px).hypot(y as f64 - py) <= r {
                pixels.push((x as usize, y as usize));
                bbox = PixelBox { x0: bbox.x0.min(x), y0: bbox.y0.min(y), x1: bbox.x1.max(x), y1: bbox.y1.max(y) };
            }
        }
    }
    (pixels, bbox)
}

/// Render a frame from `spec`. Masks describe the noiseless geometry.
pub fn generate(spec: &SynthSpec) -> Result<SynthCase, SynthError> {
    spec.validate()?;
    let n = spec.size;
    let (c, radius) = (spec.center(), spec.radius());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut reserved: Vec<PixelBox> = Vec::new();

    let mut truth = BinaryMask::filled(n, n, false).expect("nonzero size");
    for _ in 0..spec.n_filaments {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let Some((pixels, bbox)) = draw_filament(&mut rng, spec) else { continue };
            let guard = bbox.grown(SEPARATION);
            if reserved.iter().any(|b| b.overlaps(&guard)) {
                continue;
            }
            reserved.push(bbox);
            for (x, y) in pixels {
                truth.set(x, y, true);
            }
            placed = true;
            break;
        }
        if !placed {
            return Err(SynthError::Placement { what: "filament", attempts: MAX_ATTEMPTS });
        }
    }

    let mut patches = BinaryMask::filled(n, n, false).expect("nonzero size");
    for _ in 0..spec.n_patches {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let (pixels, bbox) = draw_patch(&mut rng, spec);
            let guard = bbox.grown(SEPARATION);
            if reserved.iter().any(|b| b.overlaps(&guard)) {
                continue;
            }
            reserved.push(bbox);
            for (x, y) in pixels {
                patches.set(x, y, true);
            }
            placed = true;
            break;
        }
        if !placed {
            return Err(SynthError::Placement { what: "patch", attempts: MAX_ATTEMPTS });
        }
    }

    let disk = BinaryMask::from_fn(n, n, |x, y| (x as f64 - c).hypot(y as f64 - c) <= radius).expect("nonzero size");
    let mut data = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            let rho = (x as f64 - c).hypot(y as f64 - c) / radius;
            let v = if patches.get(x, y) {
                spec.patch_level
            } else if rho <= 1.0 {
                let shade = 1.0 - spec.limb_darkening * (1.0 - (1.0 - rho * rho).max(0.0).sqrt());
                let level = if truth.get(x, y) { spec.filament_level } else { spec.disk_level };
                level * shade
            } else {
                spec.background_level
            };
            data.push(v);
        }
    }
    if spec.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
        for v in &mut data {
            *v = (*v + noise.sample(&mut rng)).clamp(0.0, 255.0);
        }
    }
    let image = GrayImage::new(n, n, data).expect("finite levels");
    Ok(SynthCase { image, truth, disk, patches })
}

/// Write `image.png`, `truth.pgm`, `disk.pgm`, `patches.pgm` and
/// `spec.json` into `out_dir`, creating it if needed.
pub fn write_case(case: &SynthCase, spec: &SynthSpec, out_dir: &Path) -> Result<(), SynthError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| IoError::Unwritable { path: out_dir.to_owned(), detail: e.to_string() })?;
    save_image(&case.image, out_dir.join("image.png"))?;
    save_mask(&case.truth, out_dir.join("truth.pgm"))?;
    save_mask(&case.disk, out_dir.join("disk.pgm"))?;
    save_mask(&case.patches, out_dir.join("patches.pgm"))?;
    let json = serde_json::to_string_pretty(spec).expect("plain struct serializes");
    write_text(out_dir.join("spec.json"), &json)?;
    Ok(())
}
