use serde::{Deserialize, Serialize};

use crate::image::GrayImage;

use super::PreprocessError;

/// Scaling of the logarithmic stretch `v -> r * ln(1 + v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogTransformParams {
    /// `255 / ln(1 + i_max)`.
    pub r: f64,
    pub i_max: f64,
}

impl LogTransformParams {
    pub fn from_max(i_max: f64) -> Result<Self, PreprocessError> {
        if i_max.is_nan() || i_max <= 0.0 {
            return Err(PreprocessError::ZeroMaximum(i_max));
        }
        Ok(Self { r: 255.0 / i_max.ln_1p(), i_max })
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        self.r * v.ln_1p()
    }
}

/// Logarithmic contrast stretch; the brightest pixel maps to 255.
pub fn log_transform(img: &GrayImage) -> Result<(GrayImage, LogTransformParams), PreprocessError> {
    if let Some(i) = img.data().iter().position(|&v| v < 0.0) {
        return Err(PreprocessError::NegativeIntensity {
            x: i % img.width(),
            y: i / img.width(),
            value: img.data()[i],
        });
    }
    let params = LogTransformParams::from_max(img.max())?;
    let out = img.map(|v| params.apply(v))?;
    Ok((out, params))
}

/// `5 I(x, y)` minus the four edge neighbours, with replicate padding at the
/// border. Values are not clamped.
pub fn sharpen_unclamped(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dims();
    let data = img.data();
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(h - 1);
        for x in 0..w {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(w - 1);
            let c = data[y * w + x];
            // summing differences keeps flat neighbourhoods exact
            let lift = (c - data[y * w + right])
                + (c - data[y * w + left])
                + (c - data[down * w + x])
                + (c - data[up * w + x]);
            out[y * w + x] = c + lift;
        }
    }
    GrayImage::new(w, h, out).expect("finite stencil of finite values")
}

/// Five-point sharpening clamped to `[0, 255]`. The 3x3 minimum size of
/// [`GrayImage`] guarantees an interior.
pub fn sharpen(img: &GrayImage) -> GrayImage {
    sharpen_unclamped(img).clamped()
}
