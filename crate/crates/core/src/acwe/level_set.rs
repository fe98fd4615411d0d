use std::f64::consts::PI;

use crate::image::{ensure_same_dims, BinaryMask, ImageError, MIN_IMAGE_SIDE};

use super::{AcweError, InitScheme};

/// Regularised Heaviside `1/2 (1 + 2/pi atan(t / eps))`.
#[inline]
pub fn heaviside(t: f64, eps: f64) -> f64 {
    0.5 * (1.0 + (2.0 / PI) * (t / eps).atan())
}

/// Derivative of [`heaviside`]: `eps / (pi (eps^2 + t^2))`.
#[inline]
pub fn dirac(t: f64, eps: f64) -> f64 {
    eps / (PI * (eps * eps + t * t))
}

/// Signed field whose zero level set is the contour; `phi > 0` is inside.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetField {
    width: usize,
    height: usize,
    phi: Vec<f64>,
}

impl LevelSetField {
    pub fn new(width: usize, height: usize, phi: Vec<f64>) -> Result<Self, AcweError> {
        if width < MIN_IMAGE_SIDE || height < MIN_IMAGE_SIDE {
            return Err(ImageError::TooSmall { width, height }.into());
        }
        if phi.len() != width * height {
            return Err(ImageError::BufferLength { width, height, len: phi.len() }.into());
        }
        if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
            return Err(ImageError::NonFinite { x: i % width, y: i / width }.into());
        }
        Ok(Self { width, height, phi })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, AcweError> {
        let phi = (0..width * height).map(|i| f(i % width, i / width)).collect();
        Self::new(width, height, phi)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.phi[y * self.width + x]
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.phi
    }

    /// `{phi > 0}`.
    pub fn inside(&self) -> BinaryMask {
        BinaryMask::new(self.width, self.height, self.phi.iter().map(|&v| v > 0.0).collect())
            .expect("dimensions preserved")
    }
}

/// Initial level set. With a region of interest, `phi` is -1 outside it.
pub fn init_level_set(
    width: usize,
    height: usize,
    scheme: InitScheme,
    roi: Option<&BinaryMask>,
) -> Result<LevelSetField, AcweError> {
    if let Some(r) = roi {
        ensure_same_dims((width, height), r.dims())?;
    }
    let mut field = match scheme {
        InitScheme::Checkerboard => {
            LevelSetField::from_fn(width, height, |x, y| (PI * x as f64 / 5.0).sin() * (PI * y as f64 / 5.0).sin())?
        }
        InitScheme::Circle => {
            let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
            let radius = width.min(height) as f64 / 3.0;
            LevelSetField::from_fn(width, height, |x, y| radius - (x as f64 - cx).hypot(y as f64 - cy))?
        }
    };
    if let Some(r) = roi {
        for (v, &keep) in field.phi.iter_mut().zip(r.data()) {
            if !keep {
                *v = -1.0;
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard_vanishes_at_origin() {
        let phi = init_level_set(12, 12, InitScheme::Checkerboard, None).unwrap();
        assert_eq!(phi.get(0, 0), 0.0);
        let expected = (PI * 2.0 / 5.0).sin() * (PI * 3.0 / 5.0).sin();
        assert!((phi.get(2, 3) - expected).abs() < 1e-15);
    }

    #[test]
    fn circle_is_signed_distance() {
        let phi = init_level_set(100, 100, InitScheme::Circle, None).unwrap();
        assert!((phi.get(50, 50) - 100.0 / 3.0).abs() < 1e-12);
        assert!(phi.get(0, 0) < 0.0);
        assert!(phi.get(99, 99) < 0.0);
    }

    #[test]
    fn empty_roi_leaves_nothing_inside() {
        let roi = BinaryMask::filled(9, 7, false).unwrap();
        for scheme in [InitScheme::Checkerboard, InitScheme::Circle] {
            let phi = init_level_set(9, 7, scheme, Some(&roi)).unwrap();
            assert!(phi.values().iter().all(|&v| v <= -1.0));
            assert!(phi.inside().is_all_false());
        }
    }

    #[test]
    fn degenerate_dims_rejected() {
        assert!(init_level_set(2, 10, InitScheme::Circle, None).is_err());
    }

    #[test]
    fn dirac_is_heaviside_derivative() {
        for &t in &[-3.0, -0.2, 0.0, 0.7, 4.0] {
            let h = 1e-6;
            let fd = (heaviside(t + h, 0.8) - heaviside(t - h, 0.8)) / (2.0 * h);
            assert!((fd - dirac(t, 0.8)).abs() < 1e-8);
        }
    }
}
