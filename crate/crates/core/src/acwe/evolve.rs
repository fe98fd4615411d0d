use rayon::prelude::*;

use crate::image::{ensure_same_dims, BinaryMask, GrayImage};

use super::energy::{means_of, terms_of};
use super::level_set::dirac;
use super::{init_level_set, AcweConfig, AcweError, AcweResult};

const CURVATURE_GUARD: f64 = 1e-8;
const PHI_LIMIT: f64 = 1e6;

/// State handed to an observer before each update.
#[derive(Debug)]
pub struct IterationSnapshot<'a> {
    /// Zero-based index of the update about to run.
    pub iteration: usize,
    /// Level set the update reads.
    pub phi: &'a [f64],
    /// Image the evolution runs on (normalised if configured).
    pub image: &'a [f64],
    pub c1: f64,
    pub c2: f64,
    pub energy: f64,
}

/// Affine map of intensities onto `[0, 1]`; a constant image maps to zeros.
pub fn normalize_intensities(img: &GrayImage) -> GrayImage {
    let (lo, hi) = (img.min(), img.max());
    let span = hi - lo;
    if span > 0.0 {
        img.map(|v| (v - lo) / span).expect("finite affine map")
    } else {
        img.map(|_| 0.0).expect("finite")
    }
}

/// Mean curvature `div(grad phi / |grad phi|)` with central differences and
/// replicate padding.
#[inline]
fn curvature(phi: &[f64], w: usize, h: usize, x: usize, y: usize) -> f64 {
    let xl = x.saturating_sub(1);
    let xr = (x + 1).min(w - 1);
    let yu = y.saturating_sub(1);
    let yd = (y + 1).min(h - 1);
    let c = phi[y * w + x];
    let l = phi[y * w + xl];
    let r = phi[y * w + xr];
    let u = phi[yu * w + x];
    let d = phi[yd * w + x];
    let px = 0.5 * (r - l);
    let py = 0.5 * (d - u);
    let pxx = r - 2.0 * c + l;
    let pyy = d - 2.0 * c + u;
    let pxy = 0.25 * (phi[yd * w + xr] - phi[yu * w + xr] - phi[yd * w + xl] + phi[yu * w + xl]);
    let g2 = px * px + py * py;
    (pxx * py * py - 2.0 * px * py * pxy + pyy * px * px) / (g2 * g2.sqrt() + CURVATURE_GUARD)
}

/// Segment `img` by level-set evolution. See [`evolve_observed`].
pub fn evolve(img: &GrayImage, cfg: &AcweConfig, roi: Option<&BinaryMask>) -> Result<AcweResult, AcweError> {
    evolve_observed(img, cfg, roi, |_| {})
}

/// Iterate the gradient-descent update
///
/// ```text
/// phi <- phi + dt * dirac(phi) * (mu * kappa - nu - lambda1 (I - c1)^2 + lambda2 (I - c2)^2)
/// ```
///
/// recomputing `c1`, `c2` before every update. Values outside `roi` are held
/// at or below -1. Stops when the mean absolute change falls below `tol` or
/// after `max_iters` updates. `observer` sees the state before each update.
pub fn evolve_observed(
    img: &GrayImage,
    cfg: &AcweConfig,
    roi: Option<&BinaryMask>,
    mut observer: impl FnMut(&IterationSnapshot<'_>),
) -> Result<AcweResult, AcweError> {
    cfg.validate()?;
    if let Some(r) = roi {
        ensure_same_dims(img.dims(), r.dims())?;
    }
    let (w, h) = img.dims();
    let work = if cfg.normalize_input { normalize_intensities(img) } else { img.clone() };
    let data = work.data();

    let mut phi = init_level_set(w, h, cfg.init, roi)?;
    let mut next = vec![0.0; w * h];
    let (mut c1, mut c2) = means_of(data, phi.values(), w);
    let mut current_energy = terms_of(data, phi.values(), w, cfg.epsilon, c1, c2).weighted(cfg);
    let mut energy_trace = vec![current_energy];
    let mut delta_trace = Vec::new();
    let mut converged = false;

    for iteration in 0..cfg.max_iters {
        observer(&IterationSnapshot { iteration, phi: phi.values(), image: data, c1, c2, energy: current_energy });

        let old = phi.values();
        next.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            for (x, out) in row.iter_mut().enumerate() {
                let i = y * w + x;
                let p = old[i];
                let v = data[i];
                let force = cfg.mu * curvature(old, w, h, x, y) - cfg.nu - cfg.lambda1 * (v - c1) * (v - c1)
                    + cfg.lambda2 * (v - c2) * (v - c2);
                let updated = p + cfg.dt * dirac(p, cfg.epsilon) * force;
                *out = if updated.is_nan() { updated } else { updated.clamp(-PHI_LIMIT, PHI_LIMIT) };
            }
        });
        if let Some(r) = roi {
            for (v, &keep) in next.iter_mut().zip(r.data()) {
                if !keep {
                    *v = v.min(-1.0);
                }
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(AcweError::NonFinite { iteration, c1, c2, last_energy: current_energy });
        }

        let delta = mean_abs_diff(phi.values(), &next, w);
        phi.values_mut().swap_with_slice(&mut next);
        (c1, c2) = means_of(data, phi.values(), w);
        current_energy = terms_of(data, phi.values(), w, cfg.epsilon, c1, c2).weighted(cfg);
        if !current_energy.is_finite() {
            return Err(AcweError::NonFinite { iteration, c1, c2, last_energy: current_energy });
        }
        energy_trace.push(current_energy);
        delta_trace.push(delta);
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(AcweResult {
        mask: phi.inside(),
        iterations_run: delta_trace.len(),
        phi,
        c1,
        c2,
        energy_trace,
        delta_trace,
        converged,
    })
}

fn mean_abs_diff(a: &[f64], b: &[f64], width: usize) -> f64 {
    let rows: Vec<f64> = a
        .par_chunks(width)
        .zip(b.par_chunks(width))
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).sum::<f64>())
        .collect();
    rows.iter().sum::<f64>() / a.len() as f64
}

/// Pick the darker of the two regions: the inside mask when `c1 <= c2`,
/// otherwise its complement.
pub fn filament_mask(result: &AcweResult) -> BinaryMask {
    if result.c1 <= result.c2 {
        result.mask.clone()
    } else {
        result.mask.complement()
    }
}
