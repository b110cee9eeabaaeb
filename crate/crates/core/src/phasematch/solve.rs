use std::f64::consts::PI;

use super::{PhaseMatchError, WaveguideConfig};
use crate::dispersion::{index_ellipsoid, DispersionError, PropagationAngle};
use crate::roots::{self, Bracket, Scan};

/// Convergence requirement on the index mismatch at a returned solution.
pub const INDEX_TOLERANCE: f64 = 1e-10;
/// Samples used to isolate sign changes before refining.
pub const SCAN_SAMPLES: usize = 2001;

const ENERGY_TOLERANCE: f64 = 1e-9;
const NM_PER_MM: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatchSolution {
    pub theta_deg: f64,
    pub temperature_k: f64,
    pub lambda_p_nm: f64,
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
    /// rad/mm
    pub residual_delta_k: f64,
    pub matched_index: f64,
}

/// `Δk = k_s + k_i − k_p` in rad/mm for pump (extraordinary, at θ) and
/// ordinary signal/idler.
pub fn delta_k(
    config: &WaveguideConfig,
    lambda_p_nm: f64,
    lambda_s_nm: f64,
    lambda_i_nm: f64,
) -> Result<f64, PhaseMatchError> {
    let inv_p = 1.0 / lambda_p_nm;
    let mismatch = ((inv_p - 1.0 / lambda_s_nm - 1.0 / lambda_i_nm) / inv_p).abs();
    if !(mismatch <= ENERGY_TOLERANCE) {
        return Err(PhaseMatchError::EnergyConservation {
            lambda_p_nm,
            lambda_s_nm,
            lambda_i_nm,
            relative_mismatch: mismatch,
        });
    }
    let t = config.temperature_k();
    let m = &config.material;
    let n_p = m.index_extraordinary_at_angle(lambda_p_nm, t, config.theta)?;
    let n_s = m.index_ordinary(lambda_s_nm, t)?;
    let n_i = m.index_ordinary(lambda_i_nm, t)?;
    Ok(2.0 * PI * NM_PER_MM * (n_s / lambda_s_nm + n_i / lambda_i_nm - n_p / lambda_p_nm))
}

fn degenerate_solution(config: &WaveguideConfig, lambda_p_nm: f64) -> Result<PhaseMatchSolution, PhaseMatchError> {
    let lambda_s = 2.0 * lambda_p_nm;
    let residual_delta_k = delta_k(config, lambda_p_nm, lambda_s, lambda_s)?;
    Ok(PhaseMatchSolution {
        theta_deg: config.theta.degrees(),
        temperature_k: config.temperature_k(),
        lambda_p_nm,
        lambda_s_nm: lambda_s,
        lambda_i_nm: lambda_s,
        residual_delta_k,
        matched_index: config.material.index_ordinary(lambda_s, config.temperature_k())?,
    })
}

/// Degenerate phase-matching pump wavelength at fixed θ and T, searched over
/// `[λ_min, λ_max / 2]` of the material so both pump and signal stay in range.
pub fn solve_pm_wavelength(config: &WaveguideConfig) -> Result<PhaseMatchSolution, PhaseMatchError> {
    let (lo, hi) = config.material.valid_range();
    solve_pm_wavelength_in(config, (lo, hi / 2.0))
}

pub fn solve_pm_wavelength_in(
    config: &WaveguideConfig,
    search_nm: (f64, f64),
) -> Result<PhaseMatchSolution, PhaseMatchError> {
    let (lo, hi) = search_nm;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(PhaseMatchError::Invalid {
            field: "search range",
            message: format!("[{lo}, {hi}] nm is empty; the material must span at least an octave"),
        });
    }
    let f = |lambda: f64| config.degenerate_index_mismatch(lambda);
    let bracket = match roots::scan(f, lo, hi, SCAN_SAMPLES)? {
        Scan::Degenerate => return Err(PhaseMatchError::DegenerateCrossing),
        Scan::NoRoot { positive } => {
            return Err(PhaseMatchError::NoWavelengthCrossing {
                theta_deg: config.theta.degrees(),
                search_nm,
                positive,
            })
        }
        Scan::Roots(brackets) if brackets.len() > 1 => {
            return Err(PhaseMatchError::MultipleRoots {
                brackets: brackets.iter().map(|b| (b.lo, b.hi)).collect(),
            })
        }
        Scan::Roots(brackets) => brackets[0],
    };
    let lambda_p = brent_checked(f, bracket, 0.0)?;
    degenerate_solution(config, lambda_p)
}

/// Propagation angle that phase-matches a given degenerate pump wavelength.
/// The ellipsoid is monotone in θ, so the root on [0°, 90°] is unique.
pub fn solve_pm_angle(config: &WaveguideConfig, lambda_p_nm: f64) -> Result<PhaseMatchSolution, PhaseMatchError> {
    let t = config.temperature_k();
    let m = &config.material;
    let n_e = m.index_extraordinary_principal(lambda_p_nm, t)?;
    let n_o = m.index_ordinary(lambda_p_nm, t)?;
    let target = m.index_ordinary(2.0 * lambda_p_nm, t)?;

    let g = |theta: f64| -> Result<f64, DispersionError> {
        let angle = PropagationAngle::from_degrees(theta.clamp(0.0, 90.0))?;
        Ok(index_ellipsoid(n_e, n_o, angle) - target)
    };
    let at_axis = n_o - target;
    let at_perp = n_e - target;
    let theta = if at_axis == 0.0 && at_perp == 0.0 {
        return Err(PhaseMatchError::DegenerateCrossing);
    } else if at_perp == 0.0 {
        90.0
    } else if at_axis == 0.0 {
        0.0
    } else if (at_axis < 0.0) == (at_perp < 0.0) {
        return Err(PhaseMatchError::NoAngleCrossing {
            lambda_p_nm,
            target_index: target,
            achievable: (n_o.min(n_e), n_o.max(n_e)),
        });
    } else {
        brent_checked(g, Bracket { lo: 0.0, hi: 90.0 }, 0.0)?
    };
    degenerate_solution(&config.with_theta(PropagationAngle::from_degrees(theta)?), lambda_p_nm)
}

fn brent_checked<F>(mut f: F, bracket: Bracket, x_tol: f64) -> Result<f64, PhaseMatchError>
where
    F: FnMut(f64) -> Result<f64, DispersionError>,
{
    let root = roots::brent(&mut f, bracket, x_tol)??;
    let residual = f(root)?;
    if residual.abs() < INDEX_TOLERANCE {
        Ok(root)
    } else {
        Err(PhaseMatchError::Unconverged { residual })
    }
}

/// Thermal shift of the first-harmonic (signal, `2λp`) phase-matching wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningRate {
    /// nm of first-harmonic wavelength per kelvin.
    pub fh_nm_per_k: f64,
    pub step_k: f64,
    /// FH wavelengths at `T − ΔT`, `T`, `T + ΔT`.
    pub lambda_fh_nm: [f64; 3],
    /// `|s₊ − s₋| / |s|` from the one-sided slopes; 0 for a linear response.
    pub nonlinearity: f64,
}

impl TuningRate {
    pub const NONLINEARITY_WARNING: f64 = 0.1;

    pub fn is_nonlinear(&self) -> bool {
        self.nonlinearity > Self::NONLINEARITY_WARNING
    }
}

/// Central finite difference of the phase-matching FH wavelength over ±ΔT.
pub fn tuning_rate(config: &WaveguideConfig, step_k: f64) -> Result<TuningRate, PhaseMatchError> {
    if !(step_k.is_finite() && step_k > 0.0) {
        return Err(PhaseMatchError::Invalid {
            field: "step_k",
            message: format!("{step_k} must be finite and > 0"),
        });
    }
    let t = config.temperature_k();
    let mut fh = [0.0; 3];
    for (slot, temp) in fh.iter_mut().zip([t - step_k, t, t + step_k]) {
        *slot = solve_pm_wavelength(&config.with_temperature(temp)?)?.lambda_s_nm;
    }
    let [cold, mid, warm] = fh;
    let slope = (warm - cold) / (2.0 * step_k);
    let second = (warm - mid) - (mid - cold);
    let nonlinearity = if slope != 0.0 {
        (second / step_k / slope).abs()
    } else if second != 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(TuningRate {
        fh_nm_per_k: slope,
        step_k,
        lambda_fh_nm: fh,
        nonlinearity,
    })
}
