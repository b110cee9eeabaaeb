use std::fmt;
use std::str::FromStr;

use super::DispersionError;

/// Closed-form dispersion families understood by material files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SellmeierForm {
    /// `n = c0 + c1/λ² + c2/λ⁴ + …` with λ in nm (Cauchy series).
    PolyInverseLambda2,
    /// `n² = c0 + Σ Bᵢ λ² / (λ² − Cᵢ)` with λ in µm and Cᵢ in µm².
    /// Coefficients are laid out `[c0, B1, C1, B2, C2, …]`.
    SellmeierUm,
}

impl SellmeierForm {
    pub fn identifier(self) -> &'static str {
        match self {
            Self::PolyInverseLambda2 => "poly_inverse_lambda2",
            Self::SellmeierUm => "sellmeier_um",
        }
    }
}

impl fmt::Display for SellmeierForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.identifier())
    }
}

impl FromStr for SellmeierForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "poly_inverse_lambda2" => Ok(Self::PolyInverseLambda2),
            "sellmeier_um" => Ok(Self::SellmeierUm),
            other => Err(format!(
                "unknown form `{other}` (expected poly_inverse_lambda2 or sellmeier_um)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

impl fmt::Display for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Cubic => "cubic",
        })
    }
}

impl FromStr for Interpolation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Self::Linear),
            "cubic" => Ok(Self::Cubic),
            other => Err(format!("unknown interpolation `{other}` (expected linear or cubic)")),
        }
    }
}

/// Tabulated `(λ nm, n)` samples with linear or natural-cubic-spline interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexTable {
    wavelengths: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
    // Spline second derivatives; empty for linear tables.
    curvature: Vec<f64>,
}

impl IndexTable {
    pub const MIN_POINTS: usize = 4;

    pub fn new(points: &[(f64, f64)], interpolation: Interpolation) -> Result<Self, DispersionError> {
        if points.len() < Self::MIN_POINTS {
            return Err(DispersionError::invalid(
                "table",
                format!("need at least {} points, got {}", Self::MIN_POINTS, points.len()),
            ));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() || x <= 0.0 {
                return Err(DispersionError::invalid(
                    "table",
                    format!("point {i} ({x}, {y}) is not a finite positive-wavelength sample"),
                ));
            }
        }
        if let Some(w) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(DispersionError::invalid(
                "table",
                format!(
                    "wavelength grid must be strictly increasing: {} nm follows {} nm",
                    points[w + 1].0,
                    points[w].0
                ),
            ));
        }
        let wavelengths: Vec<f64> = points.iter().map(|p| p.0).collect();
        let values: Vec<f64> = points.iter().map(|p| p.1).collect();
        let curvature = match interpolation {
            Interpolation::Linear => Vec::new(),
            Interpolation::Cubic => natural_spline_curvature(&wavelengths, &values),
        };
        Ok(Self {
            wavelengths,
            values,
            interpolation,
            curvature,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.wavelengths.iter().copied().zip(self.values.iter().copied())
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn span(&self) -> (f64, f64) {
        (self.wavelengths[0], *self.wavelengths.last().unwrap())
    }

    pub fn with_interpolation(&self, interpolation: Interpolation) -> Self {
        let points: Vec<_> = self.points().collect();
        Self::new(&points, interpolation).expect("already validated")
    }

    /// Caller guarantees `lambda` lies inside the table span.
    pub fn eval(&self, lambda: f64) -> f64 {
        let xs = &self.wavelengths;
        // Index of the first node strictly greater than lambda.
        let hi = xs.partition_point(|&x| x <= lambda);
        if hi > 0 && xs[hi - 1] == lambda {
            return self.values[hi - 1];
        }
        let hi = hi.clamp(1, xs.len() - 1);
        let lo = hi - 1;
        let h = xs[hi] - xs[lo];
        let a = (xs[hi] - lambda) / h;
        let b = (lambda - xs[lo]) / h;
        let linear = a * self.values[lo] + b * self.values[hi];
        match self.interpolation {
            Interpolation::Linear => linear,
            Interpolation::Cubic => {
                linear
                    + ((a * a * a - a) * self.curvature[lo] + (b * b * b - b) * self.curvature[hi])
                        * h
                        * h
                        / 6.0
            }
        }
    }
}

// Tridiagonal solve for the natural spline (zero curvature at both ends).
fn natural_spline_curvature(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    let mut u = vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        let p = sig * m[i - 1] + 2.0;
        m[i] = (sig - 1.0) / p;
        let slope_diff = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * slope_diff / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    m[n - 1] = 0.0;
    for k in (0..n - 1).rev() {
        m[k] = m[k] * m[k + 1] + u[k];
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchModel {
    Closed {
        form: SellmeierForm,
        coefficients: Vec<f64>,
    },
    Tabulated(IndexTable),
}

/// One polarization branch: a dispersion model at the reference temperature
/// plus a linear thermo-optic coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexBranch {
    pub model: BranchModel,
    /// dn/dT in 1/K.
    pub dn_dt: f64,
}

impl IndexBranch {
    pub fn closed(form: SellmeierForm, coefficients: Vec<f64>, dn_dt: f64) -> Result<Self, DispersionError> {
        let ok = match form {
            SellmeierForm::PolyInverseLambda2 => !coefficients.is_empty(),
            SellmeierForm::SellmeierUm => coefficients.len() >= 3 && coefficients.len() % 2 == 1,
        };
        if !ok {
            return Err(DispersionError::invalid(
                "coefficients",
                format!("{} coefficients do not fit form {form}", coefficients.len()),
            ));
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(DispersionError::invalid("coefficients", format!("non-finite coefficient {c}")));
        }
        Self::check_dn_dt(dn_dt)?;
        Ok(Self {
            model: BranchModel::Closed { form, coefficients },
            dn_dt,
        })
    }

    pub fn tabulated(points: &[(f64, f64)], interpolation: Interpolation, dn_dt: f64) -> Result<Self, DispersionError> {
        Self::check_dn_dt(dn_dt)?;
        Ok(Self {
            model: BranchModel::Tabulated(IndexTable::new(points, interpolation)?),
            dn_dt,
        })
    }

    /// Temperature-independent, wavelength-independent index.
    pub fn constant(n: f64, lambda_min: f64, lambda_max: f64) -> Result<Self, DispersionError> {
        let step = (lambda_max - lambda_min) / 3.0;
        let pts: Vec<_> = (0..4).map(|i| (lambda_min + step * i as f64, n)).collect();
        Self::tabulated(&pts, Interpolation::Linear, 0.0)
    }

    fn check_dn_dt(dn_dt: f64) -> Result<(), DispersionError> {
        if dn_dt.is_finite() {
            Ok(())
        } else {
            Err(DispersionError::invalid("dn_dT", "must be finite"))
        }
    }

    /// Index at the reference temperature.
    pub fn base_index(&self, lambda_nm: f64) -> f64 {
        match &self.model {
            BranchModel::Tabulated(table) => table.eval(lambda_nm),
            BranchModel::Closed { form, coefficients } => eval_closed(*form, coefficients, lambda_nm),
        }
    }

    pub fn index(&self, lambda_nm: f64, delta_t: f64) -> f64 {
        self.base_index(lambda_nm) + self.dn_dt * delta_t
    }

    pub(super) fn validate_over(&self, lambda_min: f64, lambda_max: f64, label: &str) -> Result<(), DispersionError> {
        match &self.model {
            BranchModel::Tabulated(table) => {
                let (lo, hi) = table.span();
                if lo > lambda_min || hi < lambda_max {
                    return Err(DispersionError::invalid(
                        format!("{label}.table"),
                        format!(
                            "table spans [{lo}, {hi}] nm but must cover valid range [{lambda_min}, {lambda_max}] nm"
                        ),
                    ));
                }
            }
            BranchModel::Closed {
                form: SellmeierForm::SellmeierUm,
                coefficients,
            } => {
                let lo = (lambda_min / 1000.0).powi(2);
                let hi = (lambda_max / 1000.0).powi(2);
                for pole in coefficients[1..].chunks(2).map(|bc| bc[1]) {
                    if pole >= lo && pole <= hi {
                        return Err(DispersionError::invalid(
                            format!("{label}.coefficients"),
                            format!(
                                "Sellmeier pole at {:.3} nm lies inside the valid range",
                                pole.sqrt() * 1000.0
                            ),
                        ));
                    }
                }
            }
            BranchModel::Closed { .. } => {}
        }
        Ok(())
    }
}

fn eval_closed(form: SellmeierForm, c: &[f64], lambda_nm: f64) -> f64 {
    match form {
        SellmeierForm::PolyInverseLambda2 => {
            let inv = 1.0 / (lambda_nm * lambda_nm);
            // Horner in 1/λ².
            c.iter().rev().fold(0.0, |acc, &ck| acc * inv + ck)
        }
        SellmeierForm::SellmeierUm => {
            let l = lambda_nm / 1000.0;
            let l2 = l * l;
            let n2 = c[1..]
                .chunks(2)
                .fold(c[0], |acc, bc| acc + bc[0] * l2 / (l2 - bc[1]));
            n2.sqrt()
        }
    }
}
