//! Solar filament detection in H-alpha full-disk images.
//!
//! The detector runs three phases:
//!
//! 1. preprocessing: bright-patch inpainting, logarithmic stretch and
//!    5-point sharpening ([`preprocess`]);
//! 2. two-phase active contours without edges on a level set ([`acwe`]);
//! 3. removal of small connected components ([`postprocess`]).
//!
//! [`baselines`] holds Otsu and k-means comparison segmenters, [`eval`] the
//! confusion-matrix scoring, [`synth`] a generator of frames with known
//! ground truth and [`pipeline`] the end-to-end runner used by the CLI.

pub mod acwe;
pub mod baselines;
pub mod disk;
pub mod eval;
pub mod image;
pub mod io;
pub mod pipeline;
pub mod postprocess;
pub mod preprocess;
pub mod synth;

pub use crate::acwe::{AcweConfig, AcweResult, InitScheme, LevelSetField};
pub use crate::baselines::KMeansConfig;
pub use crate::disk::DiskGeometry;
pub use crate::eval::{ConfusionMatrix, MetricsReport};
pub use crate::image::{BinaryMask, GrayImage};
pub use crate::pipeline::{PipelineConfig, PipelineError};
pub use crate::postprocess::PostprocessConfig;
pub use crate::preprocess::InpaintConfig;
pub use crate::synth::{SynthCase, SynthSpec};
