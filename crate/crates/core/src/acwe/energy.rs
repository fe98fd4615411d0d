use rayon::prelude::*;

use crate::image::{ensure_same_dims, GrayImage};

use super::level_set::heaviside;
use super::{AcweConfig, AcweError, LevelSetField};

/// The four summands of the energy, unweighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub length: f64,
    pub area: f64,
    pub inside_fidelity: f64,
    pub outside_fidelity: f64,
    pub c1: f64,
    pub c2: f64,
}

impl EnergyTerms {
    pub fn weighted(&self, cfg: &AcweConfig) -> f64 {
        cfg.mu * self.length
            + cfg.nu * self.area
            + cfg.lambda1 * self.inside_fidelity
            + cfg.lambda2 * self.outside_fidelity
    }
}

/// Mean of `img` over `{phi > 0}` and over `{phi <= 0}`. An empty region
/// takes the global mean.
pub fn region_means(img: &GrayImage, phi: &LevelSetField) -> Result<(f64, f64), AcweError> {
    ensure_same_dims(img.dims(), phi.dims())?;
    Ok(means_of(img.data(), phi.values(), img.width()))
}

/// Row sums are reduced in a fixed order, so results do not depend on the
/// thread count.
pub(crate) fn means_of(img: &[f64], phi: &[f64], width: usize) -> (f64, f64) {
    let rows: Vec<(f64, usize, f64)> = img
        .par_chunks(width)
        .zip(phi.par_chunks(width))
        .map(|(irow, prow)| {
            let (mut s_in, mut n_in, mut s_out) = (0.0, 0usize, 0.0);
            for (&v, &p) in irow.iter().zip(prow) {
                if p > 0.0 {
                    s_in += v;
                    n_in += 1;
                } else {
                    s_out += v;
                }
            }
            (s_in, n_in, s_out)
        })
        .collect();
    let (mut s_in, mut n_in, mut s_out) = (0.0, 0usize, 0.0);
    for (a, b, c) in rows {
        s_in += a;
        n_in += b;
        s_out += c;
    }
    let n = img.len();
    let n_out = n - n_in;
    let global = (s_in + s_out) / n as f64;
    let c1 = if n_in == 0 { global } else { s_in / n_in as f64 };
    let c2 = if n_out == 0 { global } else { s_out / n_out as f64 };
    (c1, c2)
}

pub(crate) fn terms_of(img: &[f64], phi: &[f64], width: usize, eps: f64, c1: f64, c2: f64) -> EnergyTerms {
    let height = img.len() / width;
    let h: Vec<f64> = phi.par_iter().map(|&p| heaviside(p, eps)).collect();
    let rows: Vec<[f64; 4]> = (0..height)
        .into_par_iter()
        .map(|y| {
            let up = y.saturating_sub(1);
            let down = (y + 1).min(height - 1);
            let mut acc = [0.0; 4];
            for x in 0..width {
                let i = y * width + x;
                let left = x.saturating_sub(1);
                let right = (x + 1).min(width - 1);
                let hx = 0.5 * (h[y * width + right] - h[y * width + left]);
                let hy = 0.5 * (h[down * width + x] - h[up * width + x]);
                acc[0] += hx.hypot(hy);
                acc[1] += h[i];
                if phi[i] > 0.0 {
                    acc[2] += (img[i] - c1) * (img[i] - c1);
                } else {
                    acc[3] += (img[i] - c2) * (img[i] - c2);
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; 4];
    for r in rows {
        for k in 0..4 {
            total[k] += r[k];
        }
    }
    EnergyTerms { length: total[0], area: total[1], inside_fidelity: total[2], outside_fidelity: total[3], c1, c2 }
}

/// Unweighted energy terms at the current region means.
pub fn energy_terms(img: &GrayImage, phi: &LevelSetField, epsilon: f64) -> Result<EnergyTerms, AcweError> {
    let (c1, c2) = region_means(img, phi)?;
    Ok(terms_of(img.data(), phi.values(), img.width(), epsilon, c1, c2))
}

/// Discrete energy of `phi` on `img`: length is the sum of the
/// central-difference gradient magnitude of the regularised Heaviside,
/// area is the sum of the Heaviside, and the fidelity sums use the hard
/// partition `phi > 0` with the current region means. `img` is used as
/// given; normalise it first if the configuration expects that.
pub fn energy(img: &GrayImage, phi: &LevelSetField, cfg: &AcweConfig) -> Result<f64, AcweError> {
    Ok(energy_terms(img, phi, cfg.epsilon)?.weighted(cfg))
}
