use std::fmt;
use std::str::FromStr;

use super::SimError;
use crate::photonstats::LossBudget;

/// Detector channels of the heralded-source apparatus: the signal (herald)
/// detector and the two outputs of the idler beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    S,
    I1,
    I2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::S, Channel::I1, Channel::I2];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::S => "S",
            Self::I1 => "I1",
            Self::I2 => "I2",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" => Ok(Self::S),
            "I1" => Ok(Self::I1),
            "I2" => Ok(Self::I2),
            other => Err(format!("unknown channel `{other}` (expected S, I1 or I2)")),
        }
    }
}

/// One value per detector channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PerChannel<T> {
    pub s: T,
    pub i1: T,
    pub i2: T,
}

impl<T: Copy> PerChannel<T> {
    pub fn uniform(v: T) -> Self {
        Self { s: v, i1: v, i2: v }
    }

    pub fn get(&self, ch: Channel) -> T {
        match ch {
            Channel::S => self.s,
            Channel::I1 => self.i1,
            Channel::I2 => self.i2,
        }
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> PerChannel<U> {
        PerChannel {
            s: f(self.s),
            i1: f(self.i1),
            i2: f(self.i2),
        }
    }
}

/// Assumed detector jitter when none is configured (1σ).
pub const DEFAULT_JITTER_S: f64 = 50e-12;
/// Assumed detector dark-count rate when none is configured.
pub const DEFAULT_DARK_RATE_HZ: f64 = 100.0;
pub const DEFAULT_WINDOW_S: f64 = 1e-9;
pub const DEFAULT_MAX_EVENTS: u64 = 100_000_000;

/// Everything needed to simulate a CW-pumped pair source and its detection chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    /// Pairs per second leaving the generation region.
    pub pair_rate_hz: f64,
    /// Only used to report brightness; `pair_rate_hz` drives the simulation.
    pub pump_mw: Option<f64>,
    pub loss: LossBudget,
    /// Probability that an idler is routed to I1.
    pub splitter_ratio: f64,
    pub jitter_sigma_s: PerChannel<f64>,
    pub dark_rate_hz: PerChannel<f64>,
    /// 0 disables dead time.
    pub dead_time_s: PerChannel<f64>,
    pub coincidence_window_s: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub max_events: u64,
}

impl SourceModel {
    pub fn new(pair_rate_hz: f64, loss: LossBudget) -> Self {
        Self {
            pair_rate_hz,
            pump_mw: None,
            loss,
            splitter_ratio: 0.5,
            jitter_sigma_s: PerChannel::uniform(DEFAULT_JITTER_S),
            dark_rate_hz: PerChannel::uniform(DEFAULT_DARK_RATE_HZ),
            dead_time_s: PerChannel::uniform(0.0),
            coincidence_window_s: DEFAULT_WINDOW_S,
            duration_s: 1.0,
            seed: 0,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    /// Pair rate from a calibrated brightness (Hz/mW) and on-chip pump power.
    pub fn from_brightness(brightness_hz_per_mw: f64, pump_mw: f64, loss: LossBudget) -> Self {
        let mut model = Self::new(brightness_hz_per_mw * pump_mw, loss);
        model.pump_mw = Some(pump_mw);
        model
    }

    /// Ideal detectors: no jitter, no darks.
    pub fn noiseless(mut self) -> Self {
        self.jitter_sigma_s = PerChannel::uniform(0.0);
        self.dark_rate_hz = PerChannel::uniform(0.0);
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |field: &'static str, msg: String| Err(SimError::Invalid { field, message: msg });
        if !(self.pair_rate_hz.is_finite() && self.pair_rate_hz >= 0.0) {
            return bad("pair_rate_hz", format!("{} must be finite and ≥ 0", self.pair_rate_hz));
        }
        if let Some(p) = self.pump_mw {
            if !(p.is_finite() && p > 0.0) {
                return bad("pump_mw", format!("{p} must be finite and > 0"));
            }
        }
        if !(self.splitter_ratio > 0.0 && self.splitter_ratio < 1.0) {
            return bad("splitter_ratio", format!("{} must lie in (0, 1)", self.splitter_ratio));
        }
        if !(self.coincidence_window_s.is_finite() && self.coincidence_window_s > 0.0) {
            return bad("coincidence_window_s", format!("{} must be > 0", self.coincidence_window_s));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad("duration_s", format!("{} must be > 0", self.duration_s));
        }
        if self.duration_s * 1e12 > (u64::MAX / 4) as f64 {
            return bad("duration_s", format!("{} s overflows picosecond timestamps", self.duration_s));
        }
        for ch in Channel::ALL {
            let (j, d, dt) = (
                self.jitter_sigma_s.get(ch),
                self.dark_rate_hz.get(ch),
                self.dead_time_s.get(ch),
            );
            if !(j.is_finite() && j >= 0.0) {
                return bad("jitter_sigma_s", format!("{ch}: {j} must be finite and ≥ 0"));
            }
            if !(d.is_finite() && d >= 0.0) {
                return bad("dark_rate_hz", format!("{ch}: {d} must be finite and ≥ 0"));
            }
            if !(dt.is_finite() && dt >= 0.0) {
                return bad("dead_time_s", format!("{ch}: {dt} must be finite and ≥ 0"));
            }
        }
        self.loss.validate().map_err(|e| SimError::Invalid {
            field: "loss",
            message: e.to_string(),
        })
    }

    /// Detection probability of a signal photon.
    pub fn signal_efficiency(&self) -> f64 {
        self.loss.signal_transmittance() * self.loss.detector_efficiency.s
    }

    /// Detection probabilities of an idler photon at I1 and I2.
    pub fn idler_efficiencies(&self) -> (f64, f64) {
        let t = self.loss.idler_transmittance();
        let eta = self.loss.detector_efficiency;
        (
            t * self.splitter_ratio * eta.i1,
            t * (1.0 - self.splitter_ratio) * eta.i2,
        )
    }

    /// Expected number of recorded events before dead time.
    pub fn expected_events(&self) -> f64 {
        let (q1, q2) = self.idler_efficiencies();
        let darks = self.dark_rate_hz.s + self.dark_rate_hz.i1 + self.dark_rate_hz.i2;
        self.duration_s * (self.pair_rate_hz * (self.signal_efficiency() + q1 + q2) + darks)
    }
}
