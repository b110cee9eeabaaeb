use libm::erf;

use super::CountRates;
use crate::montecarlo::{SimError, SourceModel};

/// Probability that a genuine pair, timed by two detectors with Gaussian
/// jitter, lands within the centred window `|Δt| ≤ τ/2`.
pub fn coincidence_capture(jitter_a_s: f64, jitter_b_s: f64, window_s: f64) -> f64 {
    let sigma = jitter_a_s.hypot(jitter_b_s);
    if sigma == 0.0 {
        1.0
    } else {
        erf(0.5 * window_s / (std::f64::consts::SQRT_2 * sigma))
    }
}

/// Expected rates for a [`SourceModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardRates {
    /// What the coincidence counter records, accidentals included.
    pub measured: CountRates,
    /// Coincidences from genuine pairs only; singles as measured.
    pub true_rates: CountRates,
    /// `R_pairs,window / (C_s·C_i·τ)`: the histogram CAR with bins of width τ.
    pub car: f64,
    /// In-window fractions of genuine `S–I1` and `S–I2` pairs.
    pub capture: (f64, f64),
}

/// Closed-form rates for Poissonian pair emission.
///
/// With `q_k` the probability that a herald's partner is recorded by `I_k`
/// inside the window and `a_k = 1 − exp(−C_k·τ)` the probability of any
/// unrelated `I_k` click in the window, a herald is coincident with `I_k` at
/// rate `μη_s·[q_k + (1 − q_k)·a_k] + d_s·a_k`. Dead time is not modelled.
pub fn analytic_forward(model: &SourceModel) -> Result<ForwardRates, SimError> {
    model.validate()?;
    let mu = model.pair_rate_hz;
    let tau = model.coincidence_window_s;
    let d = model.dark_rate_hz;
    let j = model.jitter_sigma_s;

    let eta_s = model.signal_efficiency();
    let (e1, e2) = model.idler_efficiencies();
    let w1 = coincidence_capture(j.s, j.i1, tau);
    let w2 = coincidence_capture(j.s, j.i2, tau);
    let (q1, q2) = (e1 * w1, e2 * w2);

    let c_s = mu * eta_s + d.s;
    let c_1 = mu * e1 + d.i1;
    let c_2 = mu * e2 + d.i2;
    let c_i = c_1 + c_2;
    let accidental = |rate: f64| -(-rate * tau).exp_m1();
    let (a1, a2, a_i) = (accidental(c_1), accidental(c_2), accidental(c_i));

    let heralds = mu * eta_s;
    let measured = CountRates {
        c_s,
        c_i,
        c_si: heralds * (q1 + q2 + (1.0 - q1 - q2) * a_i) + d.s * a_i,
        c_si1: heralds * (q1 + (1.0 - q1) * a1) + d.s * a1,
        c_si2: heralds * (q2 + (1.0 - q2) * a2) + d.s * a2,
        c_si1i2: heralds * (q1 * a2 + q2 * a1 + (1.0 - q1 - q2) * a1 * a2) + d.s * a1 * a2,
        duration_s: model.duration_s,
        window_s: tau,
    };
    let true_rates = CountRates {
        c_si: heralds * (q1 + q2),
        c_si1: heralds * q1,
        c_si2: heralds * q2,
        c_si1i2: 0.0,
        ..measured
    };
    let accidental_rate = c_s * c_i * tau;
    let car = if accidental_rate > 0.0 {
        true_rates.c_si / accidental_rate
    } else {
        0.0
    };
    Ok(ForwardRates {
        measured,
        true_rates,
        car,
        capture: (w1, w2),
    })
}
