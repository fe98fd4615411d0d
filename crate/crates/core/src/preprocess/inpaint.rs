//! Isophote-transport inpainting.
//!
//! Each transport update moves the smoothness estimate `L` (the 4-neighbour
//! Laplacian) along the isophote direction `N`:
//!
//! ```text
//! I <- I + dt * (dL . N)        inside the region only
//! ```
//!
//! where `dL` is the forward-difference gradient of `L` and `N` is the unit
//! gradient rotated by 90 degrees (zero where the gradient vanishes). Each
//! update is followed by `diffusion_steps` explicit heat-equation sub-steps
//! restricted to the region, which fill flat interiors that transport alone
//! never reaches. Harmonic fills are fixed points of both parts.

use crate::image::{ensure_same_dims, BinaryMask, GrayImage};

use super::{InpaintConfig, PreprocessError};

const GRADIENT_FLOOR: f64 = 1e-12;

/// Working state of an inpainting run. All grids share the image
/// dimensions; `info_field` and `direction_field` hold the values used by
/// the most recent transport update.
#[derive(Debug, Clone)]
pub struct InpaintState {
    width: usize,
    height: usize,
    pub image: Vec<f64>,
    pub omega: BinaryMask,
    pub info_field: Vec<f64>,
    pub direction_field: Vec<[f64; 2]>,
    region: Vec<usize>,
    info_support: Vec<usize>,
    scratch: Vec<f64>,
}

impl InpaintState {
    /// Region pixels on the image border are dropped from `omega`.
    pub fn new(img: &GrayImage, omega: &BinaryMask) -> Result<Self, PreprocessError> {
        ensure_same_dims(img.dims(), omega.dims())?;
        let (w, h) = img.dims();
        let omega = omega.without_border();
        let region: Vec<usize> = (0..w * h).filter(|&i| omega.data()[i]).collect();

        // L is read at p, p+x and p+y for every region pixel p
        let mut needed = vec![false; w * h];
        for &i in &region {
            needed[i] = true;
            needed[i + 1] = true;
            needed[i + w] = true;
        }
        let info_support = (0..w * h).filter(|&i| needed[i]).collect();

        Ok(Self {
            width: w,
            height: h,
            image: img.data().to_vec(),
            omega,
            info_field: vec![0.0; w * h],
            direction_field: vec![[0.0, 0.0]; w * h],
            region,
            info_support,
            scratch: vec![0.0; w * h],
        })
    }

    #[inline]
    fn at(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.image[cy * self.width + cx]
    }

    #[inline]
    fn laplacian(&self, i: usize) -> f64 {
        let (x, y) = ((i % self.width) as isize, (i / self.width) as isize);
        self.at(x + 1, y) + self.at(x - 1, y) + self.at(x, y + 1) + self.at(x, y - 1) - 4.0 * self.image[i]
    }

    /// One transport update followed by the diffusion sub-steps.
    pub fn step(&mut self, cfg: &InpaintConfig) {
        let w = self.width;
        for k in 0..self.info_support.len() {
            let i = self.info_support[k];
            self.info_field[i] = self.laplacian(i);
        }
        for k in 0..self.region.len() {
            let i = self.region[k];
            // region pixels are interior, so these neighbours exist
            let gx = 0.5 * (self.image[i + 1] - self.image[i - 1]);
            let gy = 0.5 * (self.image[i + w] - self.image[i - w]);
            let mag = gx.hypot(gy);
            let n = if mag < GRADIENT_FLOOR { [0.0, 0.0] } else { [-gy / mag, gx / mag] };
            self.direction_field[i] = n;
            let dl_x = self.info_field[i + 1] - self.info_field[i];
            let dl_y = self.info_field[i + w] - self.info_field[i];
            self.scratch[i] = self.image[i] + cfg.dt * (dl_x * n[0] + dl_y * n[1]);
        }
        self.commit();

        for _ in 0..cfg.diffusion_steps {
            for k in 0..self.region.len() {
                let i = self.region[k];
                self.scratch[i] = self.image[i] + cfg.diffusion_dt * self.laplacian(i);
            }
            self.commit();
        }
    }

    fn commit(&mut self) {
        for &i in &self.region {
            self.image[i] = self.scratch[i].clamp(0.0, 255.0);
        }
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage::new(self.width, self.height, self.image.clone()).expect("finite after clamping")
    }
}

/// Run `cfg.iterations` inpainting updates over `omega`. Pixels outside
/// `omega` (and on the image border) are returned bit-identical.
pub fn inpaint(img: &GrayImage, omega: &BinaryMask, cfg: &InpaintConfig) -> Result<GrayImage, PreprocessError> {
    Ok(inpaint_with_state(img, omega, cfg)?.to_image())
}

pub fn inpaint_with_state(
    img: &GrayImage,
    omega: &BinaryMask,
    cfg: &InpaintConfig,
) -> Result<InpaintState, PreprocessError> {
    cfg.validate()?;
    let mut state = InpaintState::new(img, omega)?;
    if !state.region.is_empty() {
        for _ in 0..cfg.iterations {
            state.step(cfg);
        }
    }
    Ok(state)
}
