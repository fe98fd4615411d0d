//! Classical comparison segmenters. Both label the dark class as the
//! filament candidate.

mod kmeans;
mod otsu;

pub use kmeans::{kmeans_fit, kmeans_segment, KMeansConfig, KMeansFit};
pub use otsu::{between_class_variance, otsu_threshold, Histogram256};

use thiserror::Error;

use crate::image::ImageError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("degenerate histogram: fewer than two distinct intensity levels")]
    DegenerateHistogram,
    #[error("need at least {k} distinct intensities for k-means, found {found}")]
    TooFewDistinct { k: usize, found: usize },
    #[error("invalid k-means configuration: {0}")]
    Config(String),
}
