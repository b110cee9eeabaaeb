//! Event-level simulation of a CW-pumped pair source feeding a herald
//! detector `S` and a beam-split idler arm (`I1`, `I2`), and the
//! coincidence analysis of the resulting time-tag streams.
//!
//! Timestamps are integer picoseconds. Two events are coincident when
//! `|Δt| ≤ τ/2`, i.e. the window has total width τ centred on zero delay.

mod coincidence;
mod generate;
mod model;
mod tags;

use std::path::PathBuf;

use thiserror::Error;

pub use coincidence::{
    coincidence_histogram, coincidence_histogram_times, triple_coincidences, ChannelSel, CoincidenceHistogram,
    TripleCounts,
};
pub use generate::{generate_tags, generate_tags_with_stats, GenerationStats, CHUNK_PS};
pub use model::{
    Channel, PerChannel, SourceModel, DEFAULT_DARK_RATE_HZ, DEFAULT_JITTER_S, DEFAULT_MAX_EVENTS, DEFAULT_WINDOW_S,
};
pub use tags::{read_tags, read_tags_from, seconds_to_ps, write_tags, write_tags_to, Provenance, Tag, TagStream};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("run would record about {expected:.3e} events, above the cap of {cap}; shorten the duration or raise max_events")]
    ResourceCap { expected: f64, cap: u64 },
    #[error("timestamps not sorted: event {index} at {current_ps} ps follows {previous_ps} ps")]
    Unsorted {
        index: usize,
        previous_ps: u64,
        current_ps: u64,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
