//! Preprocessing ahead of segmentation: bright-patch inpainting,
//! logarithmic contrast stretch and 5-point sharpening.

mod enhance;
mod inpaint;
mod patches;

pub use enhance::{log_transform, sharpen, sharpen_unclamped, LogTransformParams};
pub use inpaint::{inpaint, inpaint_with_state, InpaintState};
pub use patches::{build_white_patch_mask, quantile};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::ImageError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid inpainting configuration: {0}")]
    Config(String),
    #[error("log transform needs a positive maximum intensity, got {0}")]
    ZeroMaximum(f64),
    #[error("log transform needs non-negative intensities, found {value} at ({x}, {y})")]
    NegativeIntensity { x: usize, y: usize, value: f64 },
}

/// Parameters for bright-patch removal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InpaintConfig {
    /// Time step of the transport update.
    pub dt: f64,
    /// Number of transport updates.
    pub iterations: usize,
    /// Quantile above which a pixel counts as a white patch.
    pub white_patch_percentile: f64,
    /// Square dilation radius applied to the thresholded patch mask.
    pub dilation_radius: usize,
    /// Isotropic diffusion sub-steps run after each transport update.
    pub diffusion_steps: usize,
    /// Time step of each diffusion sub-step; stable for values up to 0.25.
    pub diffusion_dt: f64,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            iterations: 500,
            white_patch_percentile: 0.995,
            dilation_radius: 2,
            diffusion_steps: 2,
            diffusion_dt: 0.2,
        }
    }
}

impl InpaintConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        let bad = |msg: &str| Err(PreprocessError::Config(msg.to_owned()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if !(self.white_patch_percentile > 0.0 && self.white_patch_percentile < 1.0) {
            return bad("white_patch_percentile must lie in (0, 1)");
        }
        if !(self.diffusion_dt > 0.0 && self.diffusion_dt <= 0.25) {
            return bad("diffusion_dt must lie in (0, 0.25]");
        }
        Ok(())
    }
}
