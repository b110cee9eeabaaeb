//! Tag stream in, figures of merit out.

use thiserror::Error;

use crate::montecarlo::{
    coincidence_histogram, triple_coincidences, ChannelSel, CoincidenceHistogram, PerChannel, SimError, SourceModel,
    TagStream, TripleCounts, DEFAULT_WINDOW_S,
};
use crate::photonstats::{
    car_from_histogram, g2h_zero_with_ratio, heralding_efficiency_from_counts, pgr_with_ratio, purity,
    signal_heralding_efficiency_from_counts, BaselinePolicy, CountRates, Estimate, SpdcMetrics, StatsError,
};

/// Default histogram half-span in coincidence windows.
pub const DEFAULT_SPAN_WINDOWS: f64 = 200.0;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Coincidence window τ (total width) and histogram bin width.
    pub window_s: f64,
    pub splitter_ratio: f64,
    pub detector_efficiency: PerChannel<f64>,
    pub pump_mw: Option<f64>,
    /// Histogram covers delays within ±span.
    pub histogram_span_s: f64,
    pub baseline: BaselinePolicy,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            window_s: DEFAULT_WINDOW_S,
            splitter_ratio: 0.5,
            detector_efficiency: PerChannel::uniform(1.0),
            pump_mw: None,
            histogram_span_s: DEFAULT_SPAN_WINDOWS * DEFAULT_WINDOW_S,
            baseline: BaselinePolicy::default(),
        }
    }
}

impl AnalysisOptions {
    /// Options matching the detection chain of a simulated source.
    pub fn for_model(model: &SourceModel) -> Self {
        Self {
            window_s: model.coincidence_window_s,
            splitter_ratio: model.splitter_ratio,
            detector_efficiency: model.loss.detector_efficiency,
            pump_mw: model.pump_mw,
            histogram_span_s: DEFAULT_SPAN_WINDOWS * model.coincidence_window_s,
            baseline: BaselinePolicy::default(),
        }
    }
}

/// Each metric is kept with the reason it could not be estimated, so an
/// empty or starved run still reports its raw rates.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub counts: TripleCounts,
    pub rates: CountRates,
    pub histogram: CoincidenceHistogram,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSet {
    pub pgr: Result<Estimate, StatsError>,
    pub brightness: Result<Estimate, StatsError>,
    pub car: Result<crate::photonstats::CarEstimate, StatsError>,
    pub eta_h_signal: Result<Estimate, StatsError>,
    pub eta_h_idler: Result<Estimate, StatsError>,
    pub g2h_zero: Result<Estimate, StatsError>,
    pub purity: Result<Estimate, StatsError>,
}

impl MetricSet {
    /// All metrics, or the first one that is undefined.
    pub fn complete(&self, rates: CountRates) -> Result<SpdcMetrics, StatsError> {
        Ok(SpdcMetrics {
            rates,
            pgr: self.pgr.clone()?,
            brightness: self.brightness.clone().ok(),
            car: self.car.clone()?,
            eta_h_signal: self.eta_h_signal.clone()?,
            eta_h_idler: self.eta_h_idler.clone()?,
            g2h_zero: self.g2h_zero.clone()?,
            purity: self.purity.clone()?,
        })
    }

    pub fn car_times_pgr(&self) -> Result<Estimate, StatsError> {
        let car = self.car.clone()?;
        let pgr = self.pgr.clone()?;
        let v = car.value * pgr.value;
        let rel = ((car.sigma / car.value).powi(2) + (pgr.sigma / pgr.value).powi(2)).sqrt();
        Ok(Estimate::new(v, v.abs() * rel))
    }
}

impl AnalysisReport {
    pub fn spdc_metrics(&self) -> Result<SpdcMetrics, StatsError> {
        self.metrics.complete(self.rates)
    }
}

pub fn analyze(stream: &TagStream, options: &AnalysisOptions) -> Result<AnalysisReport, AnalysisError> {
    let counts = triple_coincidences(stream, options.window_s)?;
    let rates = CountRates::from_counts(&counts);
    rates.validate()?;
    let histogram = coincidence_histogram(
        stream,
        ChannelSel::S,
        ChannelSel::Idler,
        options.window_s,
        options.histogram_span_s,
    )?;

    let rho = options.splitter_ratio;
    let eta = options.detector_efficiency;
    let pgr = pgr_with_ratio(&rates, rho);
    let brightness = match (&pgr, options.pump_mw) {
        (Ok(p), Some(mw)) if mw > 0.0 => Ok(Estimate::new(p.value / mw, p.sigma / mw)),
        (Err(e), _) => Err(e.clone()),
        _ => Err(StatsError::Undefined {
            estimate: "brightness",
            reason: "pump power not given".into(),
        }),
    };
    let g2 = g2h_zero_with_ratio(&rates, rho);
    let metrics = MetricSet {
        pgr,
        brightness,
        car: car_from_histogram(&histogram, options.baseline),
        eta_h_signal: signal_heralding_efficiency_from_counts(&rates, eta.s),
        eta_h_idler: heralding_efficiency_from_counts(&rates, rho * eta.i1 + (1.0 - rho) * eta.i2),
        purity: g2.clone().map(purity),
        g2h_zero: g2,
    };
    Ok(AnalysisReport {
        counts,
        rates,
        histogram,
        metrics,
    })
}
