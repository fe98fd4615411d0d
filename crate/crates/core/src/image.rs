//! Value types shared by every stage: real-valued grayscale images and
//! boolean masks, both stored row-major.

use thiserror::Error;

/// Smallest side length accepted for a [`GrayImage`]. Stencil operators need
/// at least one interior pixel.
pub const MIN_IMAGE_SIDE: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImageError {
    #[error("buffer length {len} does not match {width}x{height}")]
    BufferLength { width: usize, height: usize, len: usize },
    #[error("image {width}x{height} is smaller than {min}x{min}", min = MIN_IMAGE_SIDE)]
    TooSmall { width: usize, height: usize },
    #[error("mask must have nonzero dimensions, got {width}x{height}")]
    EmptyMask { width: usize, height: usize },
    #[error("non-finite intensity at pixel ({x}, {y})")]
    NonFinite { x: usize, y: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
}

/// Check that two `(width, height)` pairs agree.
pub fn ensure_same_dims(left: (usize, usize), right: (usize, usize)) -> Result<(), ImageError> {
    if left == right {
        Ok(())
    } else {
        Err(ImageError::DimensionMismatch { left, right })
    }
}

/// Grayscale image with finite real intensities, nominally in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        if width < MIN_IMAGE_SIDE || height < MIN_IMAGE_SIDE {
            return Err(ImageError::TooSmall { width, height });
        }
        if data.len() != width * height {
            return Err(ImageError::BufferLength { width, height, len: data.len() });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(ImageError::NonFinite { x: i % width, y: i / width });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
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
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with replicate padding for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Apply `f` to every pixel. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, ImageError> {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Copy with every value clamped to `[0, 255]`.
    pub fn clamped(&self) -> Self {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|v| v.clamp(0.0, 255.0)).collect() }
    }

    /// Values at the pixels selected by `mask` (all pixels if `None`), in
    /// row-major order.
    pub fn masked_values(&self, mask: Option<&BinaryMask>) -> Result<Vec<f64>, ImageError> {
        match mask {
            None => Ok(self.data.clone()),
            Some(m) => {
                ensure_same_dims(self.dims(), m.dims())?;
                Ok(self.data.iter().zip(m.data()).filter_map(|(&v, &keep)| keep.then_some(v)).collect())
            }
        }
    }
}

/// Row-major boolean grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyMask { width, height });
        }
        if data.len() != width * height {
            return Err(ImageError::BufferLength { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self, ImageError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self, ImageError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
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
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_all_false(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|b| !b).collect() }
    }

    pub fn and(&self, other: &Self) -> Result<Self, ImageError> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Self) -> Result<Self, ImageError> {
        self.zip_with(other, |a, b| a || b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Result<Self, ImageError> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.dims() == other.dims() && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// Dilate with a square structuring element of the given radius
    /// (Chebyshev distance, i.e. 8-connected growth).
    pub fn dilate_square(&self, radius: usize) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = self.dims();
        // separable: horizontal pass then vertical pass
        let mut horiz = vec![false; w * h];
        for y in 0..h {
            let row = &self.data[y * w..(y + 1) * w];
            for x in 0..w {
                let lo = x.saturating_sub(radius);
                let hi = (x + radius).min(w - 1);
                horiz[y * w + x] = row[lo..=hi].iter().any(|&b| b);
            }
        }
        let mut out = vec![false; w * h];
        for y in 0..h {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(h - 1);
            for x in 0..w {
                out[y * w + x] = (lo..=hi).any(|yy| horiz[yy * w + x]);
            }
        }
        Self { width: w, height: h, data: out }
    }

    /// Clear the outermost row and column on every side.
    pub fn without_border(&self) -> Self {
        let (w, h) = self.dims();
        let mut out = self.clone();
        for y in 0..h {
            for x in 0..w {
                if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                    out.data[y * w + x] = false;
                }
            }
        }
        out
    }
}
