use crate::image::{ensure_same_dims, BinaryMask, GrayImage};

use super::BaselineError;

/// Pixel counts per integer level; real intensities are rounded to the
/// nearest level and clamped into `0..=255`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    pub bins: [u64; 256],
}

impl Histogram256 {
    #[inline]
    pub fn level(v: f64) -> u8 {
        v.round().clamp(0.0, 255.0) as u8
    }

    pub fn from_image(img: &GrayImage, roi: Option<&BinaryMask>) -> Result<Self, BaselineError> {
        let mut bins = [0u64; 256];
        for v in img.masked_values(roi)? {
            bins[Self::level(v) as usize] += 1;
        }
        Ok(Self { bins })
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    pub fn distinct_levels(&self) -> usize {
        self.bins.iter().filter(|&&c| c > 0).count()
    }
}

/// `w0 * w1 * (mu0 - mu1)^2` for the split `{<= t}` / `{> t}`, or `None`
/// when either side is empty.
pub fn between_class_variance(hist: &Histogram256, t: u8) -> Option<f64> {
    let (mut n0, mut s0, mut n, mut s) = (0u64, 0u64, 0u64, 0u64);
    for (level, &c) in hist.bins.iter().enumerate() {
        if level <= t as usize {
            n0 += c;
            s0 += c * level as u64;
        }
        n += c;
        s += c * level as u64;
    }
    variance_from_sums(n0, s0, n, s)
}

#[inline]
fn variance_from_sums(n0: u64, s0: u64, n: u64, s: u64) -> Option<f64> {
    let n1 = n - n0;
    if n0 == 0 || n1 == 0 {
        return None;
    }
    let w0 = n0 as f64 / n as f64;
    let w1 = n1 as f64 / n as f64;
    let mu0 = s0 as f64 / n0 as f64;
    let mu1 = (s - s0) as f64 / n1 as f64;
    Some(w0 * w1 * (mu0 - mu1) * (mu0 - mu1))
}

/// Between-class variance of a split up to the positive factor `n^4`:
/// `num / den` with `num = (s0 n - s n0)^2` and `den = n0 n1`.
struct Split {
    diff: u128,
    den: u128,
}

impl Split {
    fn new(n0: u64, s0: u64, n: u64, s: u64) -> Self {
        let diff = (s0 as i128 * n as i128 - s as i128 * n0 as i128).unsigned_abs();
        Self { diff, den: n0 as u128 * (n - n0) as u128 }
    }

    /// Strictly larger variance, decided in exact integer arithmetic while
    /// the products fit in 128 bits.
    fn beats(&self, other: &Split) -> bool {
        let lhs = self.diff.checked_mul(self.diff).and_then(|q| q.checked_mul(other.den));
        let rhs = other.diff.checked_mul(other.diff).and_then(|q| q.checked_mul(self.den));
        match (lhs, rhs) {
            (Some(l), Some(r)) => l > r,
            _ => {
                let score = |x: &Split| (x.diff as f64).powi(2) / x.den as f64;
                score(self) > score(other)
            }
        }
    }
}

/// Otsu's threshold over the region (whole image when `roi` is `None`).
/// Returns the level `t` maximising between-class variance, ties going to
/// the smaller level, and the mask of region pixels whose level is `<= t`.
pub fn otsu_threshold(img: &GrayImage, roi: Option<&BinaryMask>) -> Result<(u8, BinaryMask), BaselineError> {
    if let Some(r) = roi {
        ensure_same_dims(img.dims(), r.dims())?;
    }
    let hist = Histogram256::from_image(img, roi)?;
    if hist.distinct_levels() < 2 {
        return Err(BaselineError::DegenerateHistogram);
    }
    let n = hist.total();
    let s: u64 = hist.bins.iter().enumerate().map(|(l, &c)| c * l as u64).sum();

    // integer prefix sums keep every candidate's statistics exact
    let (mut n0, mut s0) = (0u64, 0u64);
    let mut best: Option<(u8, Split)> = None;
    for t in 0..=255u8 {
        n0 += hist.bins[t as usize];
        s0 += hist.bins[t as usize] * t as u64;
        if n0 == 0 || n0 == n {
            continue;
        }
        let split = Split::new(n0, s0, n, s);
        if best.as_ref().is_none_or(|(_, b)| split.beats(b)) {
            best = Some((t, split));
        }
    }
    let (t, _) = best.expect("two distinct levels give a valid split");
    let data = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| roi.is_none_or(|r| r.data()[i]) && Histogram256::level(v) <= t)
        .collect();
    Ok((t, BinaryMask::new(img.width(), img.height(), data)?))
}
