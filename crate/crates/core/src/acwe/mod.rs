//! Two-phase active contours without edges on a level-set embedding.
//!
//! The contour is the zero level set of `phi`; the inside region is
//! `{phi > 0}`. Evolution is explicit gradient descent on
//!
//! ```text
//! F = mu * Length(C) + nu * Area(inside)
//!   + lambda1 * sum_inside (I - c1)^2 + lambda2 * sum_outside (I - c2)^2
//! ```
//!
//! using the arctan-regularised Heaviside and Dirac functions.

mod energy;
mod evolve;
mod level_set;

pub use energy::{energy, energy_terms, region_means, EnergyTerms};
pub use evolve::{evolve, evolve_observed, filament_mask, normalize_intensities, IterationSnapshot};
pub use level_set::{dirac, heaviside, init_level_set, LevelSetField};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{BinaryMask, ImageError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcweError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid ACWE configuration: {0}")]
    Config(String),
    #[error(
        "level set became non-finite at iteration {iteration} (c1 = {c1}, c2 = {c2}, last energy = {last_energy})"
    )]
    NonFinite { iteration: usize, c1: f64, c2: f64, last_energy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitScheme {
    /// `sin(pi x / 5) * sin(pi y / 5)`: many small seed contours.
    #[default]
    Checkerboard,
    /// Signed distance to a centred circle of radius `min(w, h) / 3`.
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcweConfig {
    /// Length weight.
    pub mu: f64,
    /// Area weight.
    pub nu: f64,
    /// Inside fidelity weight.
    pub lambda1: f64,
    /// Outside fidelity weight.
    pub lambda2: f64,
    pub dt: f64,
    /// Width of the regularised Heaviside.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Stop once the mean absolute change of `phi` drops below this.
    pub tol: f64,
    pub init: InitScheme,
    /// Affinely map intensities onto `[0, 1]` before evolving.
    pub normalize_input: bool,
}

impl Default for AcweConfig {
    fn default() -> Self {
        Self {
            mu: 0.003,
            nu: 0.0,
            lambda1: 1.000001,
            lambda2: 0.1,
            dt: 0.5,
            epsilon: 1.0,
            max_iters: 500,
            tol: 1e-4,
            init: InitScheme::Checkerboard,
            normalize_input: true,
        }
    }
}

impl AcweConfig {
    pub fn validate(&self) -> Result<(), AcweError> {
        let bad = |msg: &str| Err(AcweError::Config(msg.to_owned()));
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return bad("mu must be >= 0");
        }
        if !self.nu.is_finite() {
            return bad("nu must be finite");
        }
        if !(self.lambda1 > 0.0 && self.lambda2 > 0.0) {
            return bad("lambda1 and lambda2 must be > 0");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be > 0");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be > 0");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1");
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return bad("tol must be >= 0");
        }
        Ok(())
    }
}

/// Outcome of [`evolve`]. `c1` and `c2` are the region means at the final
/// state, measured on the image the evolution saw (normalised to `[0, 1]`
/// when `normalize_input` is set).
#[derive(Debug, Clone, PartialEq)]
pub struct AcweResult {
    /// Inside region `{phi > 0}`.
    pub mask: BinaryMask,
    pub phi: LevelSetField,
    pub c1: f64,
    pub c2: f64,
    pub iterations_run: usize,
    /// Energy of the initial state followed by one entry per iteration.
    pub energy_trace: Vec<f64>,
    /// Mean absolute change of `phi`, one entry per iteration.
    pub delta_trace: Vec<f64>,
    pub converged: bool,
}

impl AcweResult {
    /// Per-iteration trace as CSV with columns `iteration,energy,delta`.
    /// Row 0 is the initial state and has no delta.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,energy,delta\n");
        for (k, e) in self.energy_trace.iter().enumerate() {
            match k.checked_sub(1).and_then(|j| self.delta_trace.get(j)) {
                Some(d) => out.push_str(&format!("{k},{e:e},{d:e}\n")),
                None => out.push_str(&format!("{k},{e:e},\n")),
            }
        }
        out
    }
}
