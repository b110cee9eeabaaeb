use super::{delta_k, PhaseMatchError, WaveguideConfig};

/// `sinc²(x)` with `sinc(x) = sin(x)/x` and `sinc(0) = 1`.
pub fn sinc_squared(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let s = x.sin() / x;
        s * s
    }
}

/// Normalized second-harmonic conversion efficiency versus first-harmonic
/// wavelength, for an undepleted pump in a uniform waveguide:
/// `η(λ) ∝ sinc²(Δk(λ/2, λ, λ)·L/2)`, scaled so the grid maximum is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ShgSpectrum {
    /// `(λ_FH nm, normalized efficiency)`
    pub points: Vec<(f64, f64)>,
    pub peak_lambda_nm: f64,
}

impl ShgSpectrum {
    pub fn compute(config: &WaveguideConfig, grid_fh_nm: &[f64]) -> Result<Self, PhaseMatchError> {
        Self::from_phase_mismatch(grid_fh_nm, config.length_mm(), |fh| delta_k(config, fh / 2.0, fh, fh))
    }

    /// Builds a spectrum from any `Δk(λ_FH)` in rad/mm.
    pub fn from_phase_mismatch<F>(grid_fh_nm: &[f64], length_mm: f64, mut delta_k_fn: F) -> Result<Self, PhaseMatchError>
    where
        F: FnMut(f64) -> Result<f64, PhaseMatchError>,
    {
        if grid_fh_nm.is_empty() {
            return Err(PhaseMatchError::Invalid {
                field: "grid",
                message: "wavelength grid is empty".into(),
            });
        }
        if let Some(w) = grid_fh_nm.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(PhaseMatchError::Invalid {
                field: "grid",
                message: format!("grid must be strictly increasing ({} then {})", w[0], w[1]),
            });
        }
        if !(length_mm.is_finite() && length_mm > 0.0) {
            return Err(PhaseMatchError::Invalid {
                field: "length_mm",
                message: format!("{length_mm} must be finite and > 0"),
            });
        }
        let raw = grid_fh_nm
            .iter()
            .map(|&fh| Ok((fh, sinc_squared(delta_k_fn(fh)? * length_mm / 2.0))))
            .collect::<Result<Vec<_>, PhaseMatchError>>()?;
        let (peak_lambda_nm, max) = raw
            .iter()
            .copied()
            .fold((raw[0].0, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best });
        if !(max > 0.0) {
            return Err(PhaseMatchError::Invalid {
                field: "grid",
                message: "efficiency vanishes at every grid point".into(),
            });
        }
        let points = raw.into_iter().map(|(x, y)| (x, y / max)).collect();
        Ok(Self {
            points,
            peak_lambda_nm,
        })
    }

    pub fn max_efficiency(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evenly spaced inclusive grid; the last point is `hi` when `(hi − lo)/step` is integral.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_basics() {
        assert_eq!(sinc_squared(0.0), 1.0);
        assert!(sinc_squared(std::f64::consts::PI).abs() < 1e-30);
        assert!((sinc_squared(1e-8) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_is_exact() {
        let grid = linear_grid(1540.0, 1560.0, 0.01);
        let s = ShgSpectrum::from_phase_mismatch(&grid, 20.0, |l| Ok(0.37 * (l - 1549.993))).unwrap();
        assert_eq!(s.max_efficiency(), 1.0);
        assert!((s.peak_lambda_nm - 1549.99).abs() < 0.006);
    }

    #[test]
    fn rejects_bad_grids() {
        let ok = |_: f64| Ok(0.0);
        assert!(ShgSpectrum::from_phase_mismatch(&[], 1.0, ok).is_err());
        assert!(ShgSpectrum::from_phase_mismatch(&[2.0, 1.0], 1.0, ok).is_err());
        assert!(ShgSpectrum::from_phase_mismatch(&[1.0, 2.0], 0.0, ok).is_err());
    }
}
