use super::tags::{seconds_to_ps, TagStream};
use super::{Channel, PerChannel, SimError};

/// A detector, or the merged idler arm `I1 ∪ I2` (the rate before the splitter).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelSel {
    S,
    I1,
    I2,
    Idler,
}

impl ChannelSel {
    pub fn includes(self, ch: Channel) -> bool {
        match self {
            Self::S => ch == Channel::S,
            Self::I1 => ch == Channel::I1,
            Self::I2 => ch == Channel::I2,
            Self::Idler => ch != Channel::S,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::S => "S",
            Self::I1 => "I1",
            Self::I2 => "I2",
            Self::Idler => "I",
        }
    }

    fn times(self, stream: &TagStream) -> Vec<u64> {
        stream
            .tags()
            .iter()
            .filter(|t| self.includes(t.channel))
            .map(|t| t.time_ps)
            .collect()
    }
}

/// Counts of `(a, b)` event pairs by delay `t_b − t_a`. Bin `k` is centred at
/// `k·w` and covers `[(k − ½)w, (k + ½)w)`, for `k` in `−K..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceHistogram {
    pub a: ChannelSel,
    pub b: ChannelSel,
    bin_width_ps: u64,
    half_bins: u64,
    counts: Vec<u64>,
    pub events_a: u64,
    pub events_b: u64,
}

impl CoincidenceHistogram {
    /// Wraps precomputed counts; `counts.len()` must be odd (bins `−K..=K`).
    pub fn from_counts(a: ChannelSel, b: ChannelSel, bin_width_ps: u64, counts: Vec<u64>) -> Result<Self, SimError> {
        if bin_width_ps == 0 || counts.len() % 2 == 0 {
            return Err(SimError::Invalid {
                field: "histogram",
                message: format!(
                    "need a positive bin width and an odd number of bins, got {bin_width_ps} ps and {}",
                    counts.len()
                ),
            });
        }
        Ok(Self {
            a,
            b,
            bin_width_ps,
            half_bins: (counts.len() / 2) as u64,
            counts,
            events_a: 0,
            events_b: 0,
        })
    }

    pub fn bin_width_ps(&self) -> u64 {
        self.bin_width_ps
    }

    pub fn bin_width_s(&self) -> f64 {
        self.bin_width_ps as f64 * 1e-12
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Bin centres in ps, aligned with [`counts`](Self::counts).
    pub fn delays_ps(&self) -> impl Iterator<Item = i64> + '_ {
        let k = self.half_bins as i64;
        let w = self.bin_width_ps as i64;
        (-k..=k).map(move |i| i * w)
    }

    pub fn count_at_delay(&self, delay_ps: i64) -> Option<u64> {
        let w = self.bin_width_ps as i64;
        let k = (2 * delay_ps + w).div_euclid(2 * w);
        let idx = k + self.half_bins as i64;
        usize::try_from(idx).ok().and_then(|i| self.counts.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.delays_ps().zip(self.counts.iter().copied())
    }
}

/// Histogram of `t_b − t_a` over `±span` with bins of `bin_width_s`, both
/// rounded to whole picoseconds. Single forward sweep, `O(N + matches)`.
pub fn coincidence_histogram(
    stream: &TagStream,
    a: ChannelSel,
    b: ChannelSel,
    bin_width_s: f64,
    span_s: f64,
) -> Result<CoincidenceHistogram, SimError> {
    let (w, span) = histogram_grid(bin_width_s, span_s)?;
    let hist = coincidence_histogram_times(&a.times(stream), &b.times(stream), w, span)?;
    Ok(CoincidenceHistogram { a, b, ..hist })
}

fn histogram_grid(bin_width_s: f64, span_s: f64) -> Result<(u64, u64), SimError> {
    if !(bin_width_s.is_finite() && bin_width_s > 0.0) || seconds_to_ps(bin_width_s) == 0 {
        return Err(SimError::Invalid {
            field: "bin_width_s",
            message: format!("{bin_width_s} must be at least 1 ps"),
        });
    }
    if !(span_s.is_finite() && span_s >= 0.0) {
        return Err(SimError::Invalid {
            field: "span_s",
            message: format!("{span_s} must be finite and ≥ 0"),
        });
    }
    Ok((seconds_to_ps(bin_width_s), seconds_to_ps(span_s)))
}

/// As [`coincidence_histogram`] on raw sorted timestamp lists.
pub fn coincidence_histogram_times(
    a: &[u64],
    b: &[u64],
    bin_width_ps: u64,
    span_ps: u64,
) -> Result<CoincidenceHistogram, SimError> {
    check_sorted(a)?;
    check_sorted(b)?;
    if bin_width_ps == 0 {
        return Err(SimError::Invalid {
            field: "bin_width_ps",
            message: "must be > 0".into(),
        });
    }
    let half_bins = span_ps / bin_width_ps;
    let w = bin_width_ps as i128;
    let k = half_bins as i128;
    // Accepted: (−K − ½)w ≤ Δ < (K + ½)w, compared as 2Δ to stay in integers.
    let lo2 = -(2 * k + 1) * w;
    let hi2 = (2 * k + 1) * w;
    let mut counts = vec![0u64; (2 * half_bins + 1) as usize];
    let mut start = 0usize;
    for &ta in a {
        let ta = ta as i128;
        while start < b.len() && 2 * (b[start] as i128 - ta) < lo2 {
            start += 1;
        }
        for &tb in &b[start..] {
            let d2 = 2 * (tb as i128 - ta);
            if d2 >= hi2 {
                break;
            }
            let bin = (d2 + w).div_euclid(2 * w) + k;
            counts[bin as usize] += 1;
        }
    }
    Ok(CoincidenceHistogram {
        a: ChannelSel::S,
        b: ChannelSel::Idler,
        bin_width_ps,
        half_bins,
        counts,
        events_a: a.len() as u64,
        events_b: b.len() as u64,
    })
}

fn check_sorted(times: &[u64]) -> Result<(), SimError> {
    match times.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(SimError::Unsorted {
            index: i + 1,
            previous_ps: times[i],
            current_ps: times[i + 1],
        }),
        None => Ok(()),
    }
}

/// Herald-conditioned coincidence counts within `|Δt| ≤ τ/2`.
///
/// Each count is a number of `S` events, so every pairwise count is bounded
/// by the herald singles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TripleCounts {
    pub singles: PerChannel<u64>,
    /// `S` with at least one `I1`.
    pub s_i1: u64,
    pub s_i2: u64,
    /// `S` with at least one click on either idler detector.
    pub s_i: u64,
    /// `S` with at least one `I1` and at least one `I2`.
    pub s_i1_i2: u64,
    pub window_ps: u64,
    pub duration_s: f64,
}

impl TripleCounts {
    pub fn window_s(&self) -> f64 {
        self.window_ps as f64 * 1e-12
    }

    pub fn idler_singles(&self) -> u64 {
        self.singles.i1 + self.singles.i2
    }
}

pub fn triple_coincidences(stream: &TagStream, window_s: f64) -> Result<TripleCounts, SimError> {
    let tau = seconds_to_ps(window_s);
    if !(window_s.is_finite() && window_s > 0.0) || tau == 0 {
        return Err(SimError::Invalid {
            field: "window_s",
            message: format!("{window_s} must be at least 1 ps"),
        });
    }
    let s = stream.times(Channel::S);
    let i1 = stream.times(Channel::I1);
    let i2 = stream.times(Channel::I2);
    let (mut p1, mut p2) = (0usize, 0usize);
    let mut out = TripleCounts {
        singles: PerChannel {
            s: s.len() as u64,
            i1: i1.len() as u64,
            i2: i2.len() as u64,
        },
        window_ps: tau,
        duration_s: stream.duration_s(),
        ..TripleCounts::default()
    };
    for &t in &s {
        let h1 = any_within(&i1, &mut p1, t, tau);
        let h2 = any_within(&i2, &mut p2, t, tau);
        out.s_i1 += h1 as u64;
        out.s_i2 += h2 as u64;
        out.s_i += (h1 || h2) as u64;
        out.s_i1_i2 += (h1 && h2) as u64;
    }
    Ok(out)
}

/// Advances `pos` past events more than τ/2 before `t` (never needed again
/// for later heralds) and reports whether the next one is within τ/2 after.
fn any_within(times: &[u64], pos: &mut usize, t: u64, tau: u64) -> bool {
    while *pos < times.len() && times[*pos] < t && 2 * (t - times[*pos]) > tau {
        *pos += 1;
    }
    *pos < times.len() && (times[*pos] <= t || 2 * (times[*pos] - t) <= tau)
}
