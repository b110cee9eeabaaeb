//! Estimators for pair-source figures of merit from count rates, with
//! first-order Poisson (delta-method) uncertainties.
//!
//! Splitter convention for a ratio ρ (fraction of idlers sent to `I1`):
//!
//! * PGR uses the herald coincidences with one splitter output, `C_si1`,
//!   divided by `F = 1/ρ`. At ρ = ½ this is `C_s·C_i / (2·C_si1)`, and on
//!   dark-free rates it returns the pair rate exactly.
//! * `g²_H(0)` divides by `F = 1/(2ρ(1 − ρ))`, i.e. `(1/2)·1/(ρ(1 − ρ))`,
//!   which is 2 at ρ = ½.
//!
//! Heralding efficiencies use the merged coincidences `C_si` with either
//! idler detector.

mod forward;

use thiserror::Error;

pub use forward::{analytic_forward, coincidence_capture, ForwardRates};

use crate::montecarlo::{CoincidenceHistogram, PerChannel, TripleCounts};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("{estimate} is undefined: {reason}")]
    Undefined { estimate: &'static str, reason: String },
    #[error("invalid `{field}`: {message}")]
    Argument { field: &'static str, message: String },
    #[error("inconsistent counts: {0}")]
    Inconsistent(String),
}

fn argument(field: &'static str, message: impl Into<String>) -> StatsError {
    StatsError::Argument {
        field,
        message: message.into(),
    }
}

/// A value and its one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }

    /// `|value − reference| / sigma`; infinite when sigma is zero and the values differ.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.sigma
        }
    }
}

/// Per-arm loss from chip to detector and detector efficiencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBudget {
    /// Shared by both arms: propagation and out-coupling.
    pub on_chip_db: f64,
    pub off_chip_signal_db: f64,
    pub off_chip_idler_db: f64,
    pub detector_efficiency: PerChannel<f64>,
}

impl LossBudget {
    /// Ideal detectors (η_d = 1).
    pub fn new(on_chip_db: f64, off_chip_signal_db: f64, off_chip_idler_db: f64) -> Self {
        Self {
            on_chip_db,
            off_chip_signal_db,
            off_chip_idler_db,
            detector_efficiency: PerChannel::uniform(1.0),
        }
    }

    pub fn lossless() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn with_detector_efficiency(mut self, eta: PerChannel<f64>) -> Self {
        self.detector_efficiency = eta;
        self
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        for (field, db) in [
            ("on_chip_db", self.on_chip_db),
            ("off_chip_signal_db", self.off_chip_signal_db),
            ("off_chip_idler_db", self.off_chip_idler_db),
        ] {
            if !(db.is_finite() && db >= 0.0) {
                return Err(argument(field, format!("{db} dB must be finite and ≥ 0")));
            }
        }
        for (ch, eta) in [("S", self.detector_efficiency.s), ("I1", self.detector_efficiency.i1), ("I2", self.detector_efficiency.i2)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(argument("detector_efficiency", format!("{ch}: {eta} must lie in (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn signal_loss_db(&self) -> f64 {
        self.on_chip_db + self.off_chip_signal_db
    }

    pub fn idler_loss_db(&self) -> f64 {
        self.on_chip_db + self.off_chip_idler_db
    }

    pub fn signal_transmittance(&self) -> f64 {
        db_to_transmittance(self.signal_loss_db())
    }

    pub fn idler_transmittance(&self) -> f64 {
        db_to_transmittance(self.idler_loss_db())
    }

    /// Detection efficiency of the idler arm as a whole behind a splitter of ratio ρ.
    pub fn idler_detector_efficiency(&self, splitter_ratio: f64) -> f64 {
        splitter_ratio * self.detector_efficiency.i1 + (1.0 - splitter_ratio) * self.detector_efficiency.i2
    }
}

fn db_to_transmittance(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Heralding efficiency of an arm from its total loss, `10^(−dB/10)`.
pub fn heralding_efficiency_from_loss(loss_db: f64) -> Result<f64, StatsError> {
    if !(loss_db.is_finite() && loss_db >= 0.0) {
        return Err(argument("loss_db", format!("{loss_db} dB must be finite and ≥ 0")));
    }
    Ok(db_to_transmittance(loss_db))
}

/// Measured rates (Hz) over one acquisition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRates {
    pub c_s: f64,
    /// Idler singles, both splitter outputs together.
    pub c_i: f64,
    /// Herald coincidences with either idler detector.
    pub c_si: f64,
    pub c_si1: f64,
    pub c_si2: f64,
    pub c_si1i2: f64,
    pub duration_s: f64,
    pub window_s: f64,
}

impl CountRates {
    pub fn from_counts(counts: &TripleCounts) -> Self {
        let t = counts.duration_s;
        Self {
            c_s: counts.singles.s as f64 / t,
            c_i: counts.idler_singles() as f64 / t,
            c_si: counts.s_i as f64 / t,
            c_si1: counts.s_i1 as f64 / t,
            c_si2: counts.s_i2 as f64 / t,
            c_si1i2: counts.s_i1_i2 as f64 / t,
            duration_s: t,
            window_s: counts.window_s(),
        }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(argument("duration_s", format!("{} must be > 0", self.duration_s)));
        }
        if !(self.window_s.is_finite() && self.window_s > 0.0) {
            return Err(argument("window_s", format!("{} must be > 0", self.window_s)));
        }
        for (field, v) in [
            ("c_s", self.c_s),
            ("c_i", self.c_i),
            ("c_si", self.c_si),
            ("c_si1", self.c_si1),
            ("c_si2", self.c_si2),
            ("c_si1i2", self.c_si1i2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(argument(field, format!("{v} Hz must be finite and ≥ 0")));
            }
        }
        if self.c_si > self.c_s.min(self.c_i) {
            return Err(StatsError::Inconsistent(format!(
                "C_si = {} exceeds min(C_s, C_i) = {}",
                self.c_si,
                self.c_s.min(self.c_i)
            )));
        }
        Ok(())
    }

    /// Number of events behind a rate over this acquisition.
    pub fn events(&self, rate_hz: f64) -> f64 {
        rate_hz * self.duration_s
    }

    /// Poisson σ of a rate.
    pub fn rate_sigma(&self, rate_hz: f64) -> f64 {
        self.events(rate_hz).sqrt() / self.duration_s
    }

    /// Relative σ of a product or quotient of independent Poisson rates.
    fn relative_sigma(&self, rates: &[f64]) -> f64 {
        rates
            .iter()
            .map(|&r| self.events(r))
            .filter(|&n| n > 0.0)
            .map(|n| 1.0 / n)
            .sum::<f64>()
            .sqrt()
    }
}

fn check_ratio(splitter_ratio: f64) -> Result<(), StatsError> {
    if splitter_ratio > 0.0 && splitter_ratio < 1.0 {
        Ok(())
    } else {
        Err(argument("splitter_ratio", format!("{splitter_ratio} must lie in (0, 1)")))
    }
}

/// PGR denominator factor, `1/ρ` (2 for a balanced splitter).
pub fn pgr_splitter_factor(splitter_ratio: f64) -> f64 {
    1.0 / splitter_ratio
}

/// `g²_H(0)` denominator factor, `1/(2ρ(1 − ρ))` (2 for a balanced splitter).
pub fn g2_splitter_factor(splitter_ratio: f64) -> f64 {
    0.5 / (splitter_ratio * (1.0 - splitter_ratio))
}

/// Pair generation rate `C_s·C_i / (2·C_si1)` for a balanced splitter.
pub fn pgr(c: &CountRates) -> Result<Estimate, StatsError> {
    pgr_with_ratio(c, 0.5)
}

pub fn pgr_with_ratio(c: &CountRates, splitter_ratio: f64) -> Result<Estimate, StatsError> {
    check_ratio(splitter_ratio)?;
    if !(c.c_si1 > 0.0) {
        return Err(StatsError::Undefined {
            estimate: "PGR",
            reason: "no herald coincidences".into(),
        });
    }
    let value = c.c_s * c.c_i / (pgr_splitter_factor(splitter_ratio) * c.c_si1);
    Ok(Estimate::new(value, value * c.relative_sigma(&[c.c_s, c.c_i, c.c_si1])))
}

/// Idler heralding efficiency `C_si / (C_s·η_d,i)`.
pub fn heralding_efficiency_from_counts(c: &CountRates, eta_d: f64) -> Result<Estimate, StatsError> {
    heralding_ratio(c, c.c_si, c.c_s, eta_d, "idler heralding efficiency")
}

/// Signal heralding efficiency `C_si / (C_i·η_d,s)`.
pub fn signal_heralding_efficiency_from_counts(c: &CountRates, eta_d: f64) -> Result<Estimate, StatsError> {
    heralding_ratio(c, c.c_si, c.c_i, eta_d, "signal heralding efficiency")
}

fn heralding_ratio(
    c: &CountRates,
    coincidences: f64,
    heralds: f64,
    eta_d: f64,
    estimate: &'static str,
) -> Result<Estimate, StatsError> {
    if !(eta_d > 0.0 && eta_d <= 1.0) {
        return Err(argument("eta_d", format!("{eta_d} must lie in (0, 1]")));
    }
    if !(heralds > 0.0) {
        return Err(StatsError::Undefined {
            estimate,
            reason: "no herald singles".into(),
        });
    }
    let value = coincidences / (heralds * eta_d);
    if value > 1.0 {
        return Err(StatsError::Inconsistent(format!(
            "{estimate} {value} > 1: coincidences exceed heralds × η_d = {eta_d}"
        )));
    }
    Ok(Estimate::new(value, value * c.relative_sigma(&[coincidences, heralds])))
}

/// Heralded autocorrelation `C_si1i2·C_s / (2·C_si1·C_si2)` for a balanced splitter.
pub fn g2h_zero(c: &CountRates) -> Result<Estimate, StatsError> {
    g2h_zero_with_ratio(c, 0.5)
}

/// With no triple coincidences the value is 0 and σ is that of a single count.
pub fn g2h_zero_with_ratio(c: &CountRates, splitter_ratio: f64) -> Result<Estimate, StatsError> {
    check_ratio(splitter_ratio)?;
    if !(c.c_si1 > 0.0 && c.c_si2 > 0.0) {
        return Err(StatsError::Undefined {
            estimate: "g2_H(0)",
            reason: "a heralded idler detector recorded no coincidences".into(),
        });
    }
    let scale = c.c_s / (g2_splitter_factor(splitter_ratio) * c.c_si1 * c.c_si2);
    let value = c.c_si1i2 * scale;
    let triples = if c.c_si1i2 > 0.0 { c.c_si1i2 } else { 1.0 / c.duration_s };
    let sigma = triples * scale * c.relative_sigma(&[triples, c.c_s, c.c_si1, c.c_si2]);
    Ok(Estimate::new(value, sigma))
}

/// How `C_si(∞)` is taken from the histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselinePolicy {
    /// Bins whose centre lies beyond this many bin widths from zero delay.
    BinWidths(f64),
    /// Bins whose centre lies beyond this absolute delay.
    HalfWidthS(f64),
}

impl Default for BaselinePolicy {
    fn default() -> Self {
        Self::BinWidths(5.0)
    }
}

pub const MIN_BASELINE_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarEstimate {
    pub value: f64,
    pub sigma: f64,
    /// The baseline was empty; `value` assumes one baseline count and is a lower bound.
    pub lower_bound: bool,
    pub peak_counts: u64,
    pub baseline_mean: f64,
    pub baseline_bins: usize,
}

/// `CAR = max_bin / baseline_mean − 1` with
/// `σ = (P/B)·√(1/P + 1/(n·B))` for peak `P` and mean `B` over `n` baseline bins.
pub fn car_from_histogram(hist: &CoincidenceHistogram, policy: BaselinePolicy) -> Result<CarEstimate, StatsError> {
    let cutoff_ps = match policy {
        BaselinePolicy::BinWidths(k) if k.is_finite() && k >= 0.0 => k * hist.bin_width_ps() as f64,
        BaselinePolicy::HalfWidthS(s) if s.is_finite() && s >= 0.0 => s * 1e12,
        other => return Err(argument("baseline", format!("{other:?} must be finite and ≥ 0"))),
    };
    let baseline: Vec<u64> = hist
        .iter()
        .filter(|&(d, _)| (d.unsigned_abs() as f64) > cutoff_ps)
        .map(|(_, c)| c)
        .collect();
    let n = baseline.len();
    if n < MIN_BASELINE_BINS {
        return Err(StatsError::Undefined {
            estimate: "CAR",
            reason: format!("{n} baseline bins beyond {cutoff_ps} ps, need at least {MIN_BASELINE_BINS}"),
        });
    }
    let peak = hist.counts().iter().copied().max().unwrap_or(0);
    if peak == 0 {
        return Err(StatsError::Undefined {
            estimate: "CAR",
            reason: "histogram is empty".into(),
        });
    }
    let total: u64 = baseline.iter().sum();
    let lower_bound = total == 0;
    let b = total.max(1) as f64 / n as f64;
    let p = peak as f64;
    let ratio = p / b;
    Ok(CarEstimate {
        value: ratio - 1.0,
        sigma: ratio * (1.0 / p + 1.0 / (n as f64 * b)).sqrt(),
        lower_bound,
        peak_counts: peak,
        baseline_mean: total as f64 / n as f64,
        baseline_bins: n,
    })
}

/// Least-squares slope of PGR against pump power for a line through the origin.
/// σ comes from the residual scatter and is 0 for two exact points on a line.
pub fn brightness_fit(points: &[(f64, f64)]) -> Result<Estimate, StatsError> {
    if points.len() < 2 {
        return Err(StatsError::Undefined {
            estimate: "brightness",
            reason: format!("{} point(s); a fit needs at least 2", points.len()),
        });
    }
    for (i, &(p, r)) in points.iter().enumerate() {
        if !(p.is_finite() && p > 0.0 && r.is_finite()) {
            return Err(argument("points", format!("point {i}: power {p} mW must be > 0 and rate {r} finite")));
        }
        if points[..i].iter().any(|&(q, _)| q == p) {
            return Err(argument("points", format!("power {p} mW appears twice")));
        }
    }
    let sxx: f64 = points.iter().map(|&(p, _)| p * p).sum();
    let sxy: f64 = points.iter().map(|&(p, r)| p * r).sum();
    let slope = sxy / sxx;
    let rss: f64 = points.iter().map(|&(p, r)| (r - slope * p).powi(2)).sum();
    let dof = (points.len() - 1) as f64;
    Ok(Estimate::new(slope, (rss / dof / sxx).sqrt()))
}

/// All figures of merit of one acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcMetrics {
    pub rates: CountRates,
    pub pgr: Estimate,
    /// Present when the pump power is known.
    pub brightness: Option<Estimate>,
    pub car: CarEstimate,
    pub eta_h_signal: Estimate,
    pub eta_h_idler: Estimate,
    pub g2h_zero: Estimate,
    pub purity: Estimate,
}

impl SpdcMetrics {
    pub fn car_times_pgr(&self) -> Estimate {
        let v = self.car.value * self.pgr.value;
        let rel = ((self.car.sigma / self.car.value).powi(2) + (self.pgr.sigma / self.pgr.value).powi(2)).sqrt();
        Estimate::new(v, v.abs() * rel)
    }
}

/// Photon-number purity `1 − g²_H(0)`, with the same σ.
pub fn purity(g2: Estimate) -> Estimate {
    Estimate::new(1.0 - g2.value, g2.sigma)
}
