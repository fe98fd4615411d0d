use crate::image::{ensure_same_dims, BinaryMask, GrayImage};

use super::{InpaintConfig, PreprocessError};

/// Nearest-rank quantile: the smallest sample `v` such that at least a
/// fraction `p` of the samples are `<= v`. Returns `None` on empty input.
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (p * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Build the region to inpaint: pixels brighter than the configured
/// quantile, dilated by `dilation_radius`.
///
/// The comparison is strict so that a quantile falling on the bulk level
/// does not select the bulk. When the quantile equals the maximum, pixels
/// equal to it are selected; a constant image therefore yields a full mask.
/// With a disk mask, the quantile is computed from on-disk pixels and only
/// on-disk pixels are thresholded.
pub fn build_white_patch_mask(
    img: &GrayImage,
    cfg: &InpaintConfig,
    disk: Option<&BinaryMask>,
) -> Result<BinaryMask, PreprocessError> {
    cfg.validate()?;
    if let Some(d) = disk {
        ensure_same_dims(img.dims(), d.dims())?;
    }
    let (w, h) = img.dims();
    let values = img.masked_values(disk)?;
    let Some(q) = quantile(&values, cfg.white_patch_percentile) else {
        return Ok(BinaryMask::filled(w, h, false)?);
    };
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let selected = |v: f64| if q < top { v > q } else { v >= q };
    let data = img.data().iter().enumerate().map(|(i, &v)| disk.is_none_or(|d| d.data()[i]) && selected(v)).collect();
    let raw = BinaryMask::new(w, h, data)?;
    Ok(raw.dilate_square(cfg.dilation_radius))
}
