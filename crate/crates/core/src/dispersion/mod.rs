//! Refractive-index models for uniaxial crystals.
//!
//! A [`MaterialDispersion`] holds an ordinary and an extraordinary
//! [`IndexBranch`], each either a closed-form dispersion law or a table of
//! effective indices (e.g. exported from a mode solver), with a linear
//! thermo-optic term. Evaluation outside the declared wavelength range is an
//! error; nothing is extrapolated.

mod branch;
mod material_file;

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub use branch::{BranchModel, IndexBranch, IndexTable, Interpolation, SellmeierForm};
pub use material_file::{load_material, parse_material};

use crate::kvfile::KvError;

/// Temperatures further than this from the reference are rejected.
pub const THERMAL_BAND_K: f64 = 100.0;

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error("wavelength {wavelength_nm} nm outside valid range [{min_nm}, {max_nm}] nm")]
    OutOfRange {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },
    #[error("temperature {temperature_k} K is more than {band_k} K from reference {t_ref_k} K")]
    TemperatureOutOfBand {
        temperature_k: f64,
        t_ref_k: f64,
        band_k: f64,
    },
    #[error("propagation angle {0}° outside [0°, 90°]")]
    InvalidAngle(f64),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Parse(#[from] KvError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DispersionError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Angle between the propagation direction and the optical (z) axis, degrees.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PropagationAngle(f64);

impl PropagationAngle {
    pub const ALONG_AXIS: Self = Self(0.0);
    pub const PERPENDICULAR: Self = Self(90.0);

    pub fn from_degrees(theta: f64) -> Result<Self, DispersionError> {
        if (0.0..=90.0).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(DispersionError::InvalidAngle(theta))
        }
    }

    pub fn degrees(self) -> f64 {
        self.0
    }
}

impl fmt::Display for PropagationAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Index ellipsoid in the plane containing the optical axis:
/// `1/n² = sin²θ/n_e² + cos²θ/n_o²`.
///
/// The endpoints return the principal indices bit-exactly, and the result is
/// clamped to `[min(n_o, n_e), max(n_o, n_e)]` so rounding never escapes the
/// physical interval.
pub fn index_ellipsoid(n_e_principal: f64, n_o: f64, theta: PropagationAngle) -> f64 {
    let deg = theta.degrees();
    if deg == 90.0 {
        return n_e_principal;
    }
    if deg == 0.0 {
        return n_o;
    }
    let (s, c) = deg.to_radians().sin_cos();
    let n = n_e_principal * n_o / (s * s * n_o * n_o + c * c * n_e_principal * n_e_principal).sqrt();
    n.clamp(n_o.min(n_e_principal), n_o.max(n_e_principal))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDispersion {
    pub name: String,
    pub ordinary: IndexBranch,
    pub extraordinary: IndexBranch,
    lambda_min_nm: f64,
    lambda_max_nm: f64,
    t_ref_k: f64,
}

impl MaterialDispersion {
    /// Validates the range, poles, table coverage and that `n > 1` is finite
    /// across the range and the full thermal band.
    pub fn new(
        name: impl Into<String>,
        ordinary: IndexBranch,
        extraordinary: IndexBranch,
        valid_range_nm: (f64, f64),
        t_ref_k: f64,
    ) -> Result<Self, DispersionError> {
        let (lambda_min_nm, lambda_max_nm) = valid_range_nm;
        if !(lambda_min_nm.is_finite() && lambda_min_nm > 0.0) {
            return Err(DispersionError::invalid("lambda_min_nm", "must be finite and > 0"));
        }
        if !(lambda_max_nm.is_finite() && lambda_max_nm > lambda_min_nm) {
            return Err(DispersionError::invalid(
                "lambda_max_nm",
                format!("must be finite and > lambda_min_nm ({lambda_min_nm})"),
            ));
        }
        if !(t_ref_k.is_finite() && t_ref_k > 0.0) {
            return Err(DispersionError::invalid("t_ref_K", "must be finite and > 0"));
        }
        ordinary.validate_over(lambda_min_nm, lambda_max_nm, "ordinary")?;
        extraordinary.validate_over(lambda_min_nm, lambda_max_nm, "extraordinary")?;
        let material = Self {
            name: name.into(),
            ordinary,
            extraordinary,
            lambda_min_nm,
            lambda_max_nm,
            t_ref_k,
        };
        material.check_physical()?;
        Ok(material)
    }

    fn check_physical(&self) -> Result<(), DispersionError> {
        const SAMPLES: usize = 256;
        for (label, branch) in [("ordinary", &self.ordinary), ("extraordinary", &self.extraordinary)] {
            for i in 0..=SAMPLES {
                let lambda = self.lambda_min_nm
                    + (self.lambda_max_nm - self.lambda_min_nm) * i as f64 / SAMPLES as f64;
                for dt in [-THERMAL_BAND_K, 0.0, THERMAL_BAND_K] {
                    let n = branch.index(lambda, dt);
                    if !(n.is_finite() && n > 1.0) {
                        return Err(DispersionError::invalid(
                            label,
                            format!("index {n} at {lambda} nm, ΔT = {dt} K is not finite and > 1"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn valid_range(&self) -> (f64, f64) {
        (self.lambda_min_nm, self.lambda_max_nm)
    }

    pub fn reference_temperature(&self) -> f64 {
        self.t_ref_k
    }

    /// Rebuilds every tabulated branch with the given interpolation.
    pub fn with_interpolation(&self, interpolation: Interpolation) -> Self {
        let retab = |b: &IndexBranch| IndexBranch {
            model: match &b.model {
                BranchModel::Tabulated(t) => BranchModel::Tabulated(t.with_interpolation(interpolation)),
                closed => closed.clone(),
            },
            dn_dt: b.dn_dt,
        };
        Self {
            ordinary: retab(&self.ordinary),
            extraordinary: retab(&self.extraordinary),
            ..self.clone()
        }
    }

    pub fn check_wavelength(&self, lambda_nm: f64) -> Result<(), DispersionError> {
        if lambda_nm >= self.lambda_min_nm && lambda_nm <= self.lambda_max_nm {
            Ok(())
        } else {
            Err(DispersionError::OutOfRange {
                wavelength_nm: lambda_nm,
                min_nm: self.lambda_min_nm,
                max_nm: self.lambda_max_nm,
            })
        }
    }

    pub fn check_temperature(&self, temperature_k: f64) -> Result<(), DispersionError> {
        if (temperature_k - self.t_ref_k).abs() <= THERMAL_BAND_K {
            Ok(())
        } else {
            Err(DispersionError::TemperatureOutOfBand {
                temperature_k,
                t_ref_k: self.t_ref_k,
                band_k: THERMAL_BAND_K,
            })
        }
    }

    fn eval(&self, branch: &IndexBranch, lambda_nm: f64, temperature_k: f64) -> Result<f64, DispersionError> {
        self.check_wavelength(lambda_nm)?;
        self.check_temperature(temperature_k)?;
        Ok(branch.index(lambda_nm, temperature_k - self.t_ref_k))
    }

    pub fn index_ordinary(&self, lambda_nm: f64, temperature_k: f64) -> Result<f64, DispersionError> {
        self.eval(&self.ordinary, lambda_nm, temperature_k)
    }

    /// Extraordinary index for propagation perpendicular to the optical axis.
    pub fn index_extraordinary_principal(&self, lambda_nm: f64, temperature_k: f64) -> Result<f64, DispersionError> {
        self.eval(&self.extraordinary, lambda_nm, temperature_k)
    }

    pub fn index_extraordinary_at_angle(
        &self,
        lambda_nm: f64,
        temperature_k: f64,
        theta: PropagationAngle,
    ) -> Result<f64, DispersionError> {
        let n_e = self.index_extraordinary_principal(lambda_nm, temperature_k)?;
        let n_o = self.index_ordinary(lambda_nm, temperature_k)?;
        Ok(index_ellipsoid(n_e, n_o, theta))
    }
}
