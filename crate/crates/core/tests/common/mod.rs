//! Independent reference implementations used by the integration tests.
//! They favour plainness over speed and share no code with the library.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::f64::consts::PI;

use filament_core::eval::ConfusionMatrix;
use filament_core::{BinaryMask, GrayImage};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize, lo: f64, hi: f64) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random_range(lo..=hi)).unwrap()
}

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.random_bool(density)).unwrap()
}

fn level(v: f64) -> u128 {
    v.round().clamp(0.0, 255.0) as u128
}

/// Exhaustive Otsu scan straight from the pixels. Each candidate `t` splits
/// region pixels into `level <= t` and `level > t`; the between-class
/// variance `n0 n1 (m0 - m1)^2 / n^2` is compared as the exact rational
/// `(s0 n1 - s1 n0)^2 / (n0 n1)`. Ties keep the smaller `t`.
pub fn otsu_oracle(img: &GrayImage, roi: Option<&BinaryMask>) -> Option<u8> {
    let pixels: Vec<u128> = (0..img.height())
        .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| roi.is_none_or(|r| r.get(x, y)))
        .map(|(x, y)| level(img.get(x, y)))
        .collect();
    let mut best: Option<(u8, u128, u128)> = None;
    for t in 0..=255u128 {
        let (mut n0, mut s0, mut n1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for &p in &pixels {
            if p <= t {
                n0 += 1;
                s0 += p;
            } else {
                n1 += 1;
                s1 += p;
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (s0 * n1).abs_diff(s1 * n0);
        let (num, den) = (d * d, n0 * n1);
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    best.map(|(t, _, _)| t)
}

fn h_eps(t: f64, eps: f64) -> f64 {
    0.5 + (t / eps).atan() / PI
}

fn at(v: &[f64], w: usize, h: usize, x: isize, y: isize) -> f64 {
    let xc = x.clamp(0, w as isize - 1) as usize;
    let yc = y.clamp(0, h as isize - 1) as usize;
    v[yc * w + xc]
}

/// Region means over `phi > 0` and `phi <= 0`, global mean for an empty side.
pub fn means_oracle(img: &[f64], phi: &[f64]) -> (f64, f64) {
    let inside: Vec<f64> = img.iter().zip(phi).filter(|(_, &p)| p > 0.0).map(|(&v, _)| v).collect();
    let outside: Vec<f64> = img.iter().zip(phi).filter(|(_, &p)| p <= 0.0).map(|(&v, _)| v).collect();
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let all = mean(img);
    (if inside.is_empty() { all } else { mean(&inside) }, if outside.is_empty() { all } else { mean(&outside) })
}

/// Energy summed term by term: weighted length of grad H (central
/// differences, replicate border), area of H, and the two fidelity sums.
#[allow(clippy::too_many_arguments)]
pub fn energy_oracle(
    img: &[f64],
    phi: &[f64],
    w: usize,
    h: usize,
    mu: f64,
    nu: f64,
    lambda1: f64,
    lambda2: f64,
    eps: f64,
) -> f64 {
    let hv: Vec<f64> = phi.iter().map(|&p| h_eps(p, eps)).collect();
    let (c1, c2) = means_oracle(img, phi);
    let mut length = 0.0;
    let mut area = 0.0;
    let mut fid_in = 0.0;
    let mut fid_out = 0.0;
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(&hv, w, h, x + 1, y) - at(&hv, w, h, x - 1, y)) / 2.0;
            let gy = (at(&hv, w, h, x, y + 1) - at(&hv, w, h, x, y - 1)) / 2.0;
            length += (gx * gx + gy * gy).sqrt();
            let i = y as usize * w + x as usize;
            area += hv[i];
            if phi[i] > 0.0 {
                fid_in += (img[i] - c1).powi(2);
            } else {
                fid_out += (img[i] - c2).powi(2);
            }
        }
    }
    mu * length + nu * area + lambda1 * fid_in + lambda2 * fid_out
}

/// Plain 3x3 convolution with `[[0,-1,0],[-1,5,-1],[0,-1,0]]` and
/// replicate padding.
pub fn convolve_sharpen(img: &GrayImage) -> Vec<f64> {
    const KERNEL: [[f64; 3]; 3] = [[0.0, -1.0, 0.0], [-1.0, 5.0, -1.0], [0.0, -1.0, 0.0]];
    let (w, h) = img.dims();
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for (ky, row) in KERNEL.iter().enumerate() {
                for (kx, &k) in row.iter().enumerate() {
                    acc += k * img.get_clamped(x + kx as isize - 1, y + ky as isize - 1);
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    out
}

/// Breadth-first flood fill over 8-neighbours. Labels start at 1 and are
/// handed out in raster order of each component's first pixel.
pub fn flood_fill_labels(mask: &BinaryMask) -> (Vec<u32>, u32) {
    let (w, h) = mask.dims();
    let mut labels = vec![0u32; w * h];
    let mut next = 0;
    for sy in 0..h {
        for sx in 0..w {
            if !mask.get(sx, sy) || labels[sy * w + sx] != 0 {
                continue;
            }
            next += 1;
            labels[sy * w + sx] = next;
            let mut queue = VecDeque::from([(sx, sy)]);
            while let Some((x, y)) = queue.pop_front() {
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if mask.get(nx, ny) && labels[ny * w + nx] == 0 {
                            labels[ny * w + nx] = next;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
        }
    }
    (labels, next)
}

/// Keep flood-fill components with at least `min_area` pixels.
pub fn area_filter_oracle(mask: &BinaryMask, min_area: usize) -> BinaryMask {
    let (labels, n) = flood_fill_labels(mask);
    let mut sizes = vec![0usize; n as usize + 1];
    for &l in &labels {
        sizes[l as usize] += 1;
    }
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        let l = labels[y * w + x];
        l != 0 && sizes[l as usize] >= min_area
    })
    .unwrap()
}

/// Solve Laplace's equation on `omega` with the surrounding pixels as
/// Dirichlet data, by Gauss-Seidel sweeps until the largest update is
/// below `tol`.
pub fn harmonic_fill(img: &GrayImage, omega: &BinaryMask, tol: f64) -> GrayImage {
    let (w, h) = img.dims();
    let mut v = img.data().to_vec();
    loop {
        let mut change: f64 = 0.0;
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                if !omega.get(x, y) {
                    continue;
                }
                let i = y * w + x;
                let new = 0.25 * (v[i - 1] + v[i + 1] + v[i - w] + v[i + w]);
                change = change.max((new - v[i]).abs());
                v[i] = new;
            }
        }
        if change < tol {
            break;
        }
    }
    GrayImage::new(w, h, v).unwrap()
}

/// Pixel-by-pixel confusion count over the region.
pub fn tally(pred: &BinaryMask, truth: &BinaryMask, roi: Option<&BinaryMask>) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    let (w, h) = pred.dims();
    for y in 0..h {
        for x in 0..w {
            if roi.is_some_and(|r| !r.get(x, y)) {
                continue;
            }
            match (pred.get(x, y), truth.get(x, y)) {
                (true, true) => m.tp += 1,
                (true, false) => m.fp += 1,
                (false, false) => m.tn += 1,
                (false, true) => m.fn_ += 1,
            }
        }
    }
    m
}

/// Dark disk at `0.2 * 255` on a `0.8 * 255` background with Gaussian
/// noise; returns the image and the disk mask. The radius is a quarter to
/// ~0.4 of the side, the scale of a solar disk in a full-frame image.
pub fn two_region_case(rng: &mut impl Rng, size: usize, sigma: f64) -> (GrayImage, BinaryMask) {
    let s = size as f64;
    let cx = rng.random_range(0.45 * s..0.55 * s);
    let cy = rng.random_range(0.45 * s..0.55 * s);
    let r = rng.random_range(0.25 * s..0.42 * s);
    let truth = BinaryMask::from_fn(size, size, |x, y| (x as f64 - cx).hypot(y as f64 - cy) <= r).unwrap();
    let noise = Normal::new(0.0, sigma).unwrap();
    let img = GrayImage::from_fn(size, size, |x, y| {
        let base = if truth.get(x, y) { 0.2 * 255.0 } else { 0.8 * 255.0 };
        base + noise.sample(rng)
    })
    .unwrap();
    (img, truth)
}

/// Horizontal ramp with a square hole pre-filled with zeros.
pub fn ramp_with_hole(rng: &mut impl Rng) -> (GrayImage, BinaryMask, GrayImage) {
    let size = rng.random_range(16..28);
    let slope = rng.random_range(2.0..8.0);
    let side = 4;
    let x0 = rng.random_range(3..size - side - 3);
    let y0 = rng.random_range(3..size - side - 3);
    let hole = |x: usize, y: usize| (x0..x0 + side).contains(&x) && (y0..y0 + side).contains(&y);
    let ramp = GrayImage::from_fn(size, size, |x, _| slope * x as f64).unwrap();
    let holed = GrayImage::from_fn(size, size, |x, y| if hole(x, y) { 0.0 } else { slope * x as f64 }).unwrap();
    (holed, BinaryMask::from_fn(size, size, hole).unwrap(), ramp)
}

pub mod strategies {
    use filament_core::{BinaryMask, GrayImage};
    use proptest::collection::vec;
    use proptest::prelude::*;

    pub fn image(min_side: usize, max_side: usize, lo: f64, hi: f64) -> impl Strategy<Value = GrayImage> {
        (min_side..=max_side, min_side..=max_side)
            .prop_flat_map(move |(w, h)| vec(lo..=hi, w * h).prop_map(move |d| GrayImage::new(w, h, d).unwrap()))
    }

    /// Images with whole-number intensities in `0..=255`.
    pub fn integer_image(min_side: usize, max_side: usize) -> impl Strategy<Value = GrayImage> {
        (min_side..=max_side, min_side..=max_side).prop_flat_map(|(w, h)| {
            vec(0u8..=255, w * h)
                .prop_map(move |d| GrayImage::new(w, h, d.into_iter().map(f64::from).collect()).unwrap())
        })
    }

    pub fn mask(min_side: usize, max_side: usize) -> impl Strategy<Value = BinaryMask> {
        (min_side..=max_side, min_side..=max_side, 0.05f64..0.7).prop_flat_map(|(w, h, p)| {
            vec(proptest::bool::weighted(p), w * h).prop_map(move |d| BinaryMask::new(w, h, d).unwrap())
        })
    }

    /// Two masks of one shape.
    pub fn mask_pair(min_side: usize, max_side: usize) -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
        (min_side..=max_side, min_side..=max_side).prop_flat_map(|(w, h)| {
            (vec(any::<bool>(), w * h), vec(any::<bool>(), w * h))
                .prop_map(move |(a, b)| (BinaryMask::new(w, h, a).unwrap(), BinaryMask::new(w, h, b).unwrap()))
        })
    }

    /// Image paired with a mask of the same shape.
    pub fn image_and_mask(min_side: usize, max_side: usize) -> impl Strategy<Value = (GrayImage, BinaryMask)> {
        (min_side..=max_side, min_side..=max_side).prop_flat_map(|(w, h)| {
            (vec(0.0f64..=255.0, w * h), vec(proptest::bool::weighted(0.3), w * h))
                .prop_map(move |(d, m)| (GrayImage::new(w, h, d).unwrap(), BinaryMask::new(w, h, m).unwrap()))
        })
    }
}
