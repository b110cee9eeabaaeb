//! Type-1 (e → o + o) birefringent phase matching in a straight waveguide.
//!
//! The pump travels as extraordinary light at angle θ to the optical axis,
//! signal and idler as ordinary light. Wavelengths are in nm, lengths in mm
//! and wavevector mismatch in rad/mm.

mod shg;
mod solve;

use std::sync::Arc;

use thiserror::Error;

pub use shg::{linear_grid, sinc_squared, ShgSpectrum};
pub use solve::{
    delta_k, solve_pm_angle, solve_pm_wavelength, solve_pm_wavelength_in, tuning_rate, PhaseMatchSolution,
    TuningRate, INDEX_TOLERANCE, SCAN_SAMPLES,
};

use crate::dispersion::{DispersionError, MaterialDispersion, PropagationAngle};
use crate::roots::RootError;

#[derive(Debug, Error)]
pub enum PhaseMatchError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(
        "energy not conserved: 1/{lambda_p_nm} ≠ 1/{lambda_s_nm} + 1/{lambda_i_nm} (relative mismatch {relative_mismatch:.3e})"
    )]
    EnergyConservation {
        lambda_p_nm: f64,
        lambda_s_nm: f64,
        lambda_i_nm: f64,
        relative_mismatch: f64,
    },
    #[error(
        "no phase-matching crossing at θ = {theta_deg}° for λp in [{}, {}] nm: n_e(θ; λp) − n_o(2λp) is {} everywhere ({})",
        search_nm.0,
        search_nm.1,
        if *positive { "positive" } else { "negative" },
        if *positive { "θ too small, rotate away from the optical axis" } else { "θ too large, rotate toward the optical axis" }
    )]
    NoWavelengthCrossing {
        theta_deg: f64,
        search_nm: (f64, f64),
        positive: bool,
    },
    #[error(
        "no angle phase-matches λp = {lambda_p_nm} nm: target n_o(2λp) = {target_index} outside achievable n_e(θ) ∈ [{}, {}]",
        achievable.0,
        achievable.1
    )]
    NoAngleCrossing {
        lambda_p_nm: f64,
        target_index: f64,
        achievable: (f64, f64),
    },
    #[error("{} phase-matching crossings found, in brackets {brackets:?} nm; refusing to pick one", brackets.len())]
    MultipleRoots { brackets: Vec<(f64, f64)> },
    #[error("indices coincide over an interval: every wavelength (or angle) is a root")]
    DegenerateCrossing,
    #[error("root solver failed: {0}")]
    Solver(#[from] RootError),
    #[error("solver stopped with index residual {residual:.3e}, above tolerance")]
    Unconverged { residual: f64 },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

impl PhaseMatchError {
    /// True for outcomes meaning "the device has no (unique) phase-matching point",
    /// as opposed to bad input or numerical failure.
    pub fn is_no_solution(&self) -> bool {
        matches!(
            self,
            Self::NoWavelengthCrossing { .. }
                | Self::NoAngleCrossing { .. }
                | Self::MultipleRoots { .. }
                | Self::DegenerateCrossing
        )
    }
}

/// Ridge geometry. Carried for provenance only; indices come from the material.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeometryMeta {
    pub top_width_um: Option<f64>,
    pub etch_depth_um: Option<f64>,
    pub film_thickness_um: Option<f64>,
    pub sidewall_angle_deg: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct WaveguideConfig {
    pub material: Arc<MaterialDispersion>,
    pub theta: PropagationAngle,
    length_mm: f64,
    temperature_k: f64,
    pub geometry: GeometryMeta,
}

impl WaveguideConfig {
    pub fn new(
        material: Arc<MaterialDispersion>,
        theta: PropagationAngle,
        length_mm: f64,
        temperature_k: f64,
    ) -> Result<Self, PhaseMatchError> {
        if !(length_mm.is_finite() && length_mm > 0.0) {
            return Err(PhaseMatchError::Invalid {
                field: "length_mm",
                message: format!("{length_mm} must be finite and > 0"),
            });
        }
        material.check_temperature(temperature_k)?;
        Ok(Self {
            material,
            theta,
            length_mm,
            temperature_k,
            geometry: GeometryMeta::default(),
        })
    }

    pub fn length_mm(&self) -> f64 {
        self.length_mm
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn with_theta(&self, theta: PropagationAngle) -> Self {
        Self { theta, ..self.clone() }
    }

    pub fn with_temperature(&self, temperature_k: f64) -> Result<Self, PhaseMatchError> {
        self.material.check_temperature(temperature_k)?;
        Ok(Self {
            temperature_k,
            ..self.clone()
        })
    }

    pub fn with_length(&self, length_mm: f64) -> Result<Self, PhaseMatchError> {
        let mut out = Self::new(self.material.clone(), self.theta, length_mm, self.temperature_k)?;
        out.geometry = self.geometry.clone();
        Ok(out)
    }

    /// Degenerate mismatch function `n_e(θ; λp) − n_o(2λp)` in index units.
    pub fn degenerate_index_mismatch(&self, lambda_p_nm: f64) -> Result<f64, DispersionError> {
        let n_p = self
            .material
            .index_extraordinary_at_angle(lambda_p_nm, self.temperature_k, self.theta)?;
        let n_s = self.material.index_ordinary(2.0 * lambda_p_nm, self.temperature_k)?;
        Ok(n_p - n_s)
    }
}
