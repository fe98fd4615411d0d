//! Solar disk localisation for full-disk frames.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{BinaryMask, GrayImage};
use crate::postprocess::label_components;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiskError {
    #[error("no disk found: no pixel exceeds {fraction} of the maximum intensity")]
    NoDiskFound { fraction: f64 },
    #[error("threshold fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
}

/// Fitted disk. Pixel `(x, y)` has its centre at `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskGeometry {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
}

impl DiskGeometry {
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let dx = x as f64 - self.center_x;
        let dy = y as f64 - self.center_y;
        dx * dx + dy * dy <= self.radius * self.radius
    }

    pub fn rasterize(&self, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_fn(width, height, |x, y| self.contains(x, y)).expect("nonzero dimensions")
    }
}

/// Fit the disk as the centroid and equivalent-area radius of the largest
/// 8-connected component brighter than `threshold_fraction * max`.
///
/// The returned mask is the fitted circle united with that component, so a
/// frame that is bright everywhere yields a full mask.
pub fn detect_disk(img: &GrayImage, threshold_fraction: f64) -> Result<(DiskGeometry, BinaryMask), DiskError> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(DiskError::BadFraction(threshold_fraction));
    }
    let (w, h) = img.dims();
    let threshold = threshold_fraction * img.max();
    let bright =
        BinaryMask::new(w, h, img.data().iter().map(|&v| v > threshold).collect()).expect("dimensions preserved");
    let labels = label_components(&bright);
    let largest = labels.largest().ok_or(DiskError::NoDiskFound { fraction: threshold_fraction })?;

    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for y in 0..h {
        for x in 0..w {
            if labels.label(x, y) == largest {
                sx += x as f64;
                sy += y as f64;
                n += 1;
            }
        }
    }
    let geometry = DiskGeometry {
        center_x: sx / n as f64,
        center_y: sy / n as f64,
        radius: (n as f64 / std::f64::consts::PI).sqrt(),
    };
    let data = (0..w * h).map(|i| labels.labels[i] == largest || geometry.contains(i % w, i / w)).collect();
    let mask = BinaryMask::new(w, h, data).expect("dimensions preserved");
    Ok((geometry, mask))
}
