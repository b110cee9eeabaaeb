use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{Channel, SimError};
use crate::report::temporary_sibling;

const HEADER_PREFIX: &str = "# tagstream v1 duration_s=";

/// Nearest integer picosecond.
pub fn seconds_to_ps(seconds: f64) -> u64 {
    (seconds * 1e12).round() as u64
}

/// One detector click. Ordered by time, then channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub time_ps: u64,
    pub channel: Channel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Simulated { seed: u64, pair_rate_hz: f64 },
    File(PathBuf),
    Constructed,
}

/// Time-ordered detection events on `[0, duration]`.
#[derive(Debug, Clone)]
pub struct TagStream {
    tags: Vec<Tag>,
    duration_s: f64,
    provenance: Provenance,
}

/// Streams compare by content; provenance is ignored.
impl PartialEq for TagStream {
    fn eq(&self, other: &Self) -> bool {
        self.duration_s == other.duration_s && self.tags == other.tags
    }
}

impl TagStream {
    pub fn new(tags: Vec<Tag>, duration_s: f64) -> Result<Self, SimError> {
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(SimError::Invalid {
                field: "duration_s",
                message: format!("{duration_s} must be finite and > 0"),
            });
        }
        let end = seconds_to_ps(duration_s);
        for (index, pair) in tags.windows(2).enumerate() {
            if pair[1].time_ps < pair[0].time_ps {
                return Err(SimError::Unsorted {
                    index: index + 1,
                    previous_ps: pair[0].time_ps,
                    current_ps: pair[1].time_ps,
                });
            }
        }
        if let Some(last) = tags.last() {
            if last.time_ps > end {
                return Err(SimError::Invalid {
                    field: "tags",
                    message: format!("timestamp {} ps beyond the {end} ps duration", last.time_ps),
                });
            }
        }
        Ok(Self {
            tags,
            duration_s,
            provenance: Provenance::Constructed,
        })
    }

    pub(crate) fn from_sorted(tags: Vec<Tag>, duration_s: f64, provenance: Provenance) -> Self {
        debug_assert!(tags.windows(2).all(|w| w[0].time_ps <= w[1].time_ps));
        Self {
            tags,
            duration_s,
            provenance,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn count(&self, channel: Channel) -> u64 {
        self.tags.iter().filter(|t| t.channel == channel).count() as u64
    }

    /// Sorted timestamps of one channel.
    pub fn times(&self, channel: Channel) -> Vec<u64> {
        self.tags
            .iter()
            .filter(|t| t.channel == channel)
            .map(|t| t.time_ps)
            .collect()
    }
}

pub fn write_tags_to<W: Write>(stream: &TagStream, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HEADER_PREFIX}{}", stream.duration_s)?;
    for tag in &stream.tags {
        writeln!(out, "{},{}", tag.channel, tag.time_ps)?;
    }
    out.flush()
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_tags(stream: &TagStream, path: impl AsRef<Path>) -> Result<(), SimError> {
    let path = path.as_ref();
    let io = |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    };
    let tmp = temporary_sibling(path);
    let file = File::create(&tmp).map_err(io)?;
    let written = write_tags_to(stream, BufWriter::new(file)).and_then(|_| std::fs::rename(&tmp, path));
    if written.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    written.map_err(io)
}

pub fn read_tags(path: impl AsRef<Path>) -> Result<TagStream, SimError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let stream = read_tags_from(BufReader::new(file)).map_err(|e| match e {
        SimError::Io { source, .. } => SimError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })?;
    Ok(stream.with_provenance(Provenance::File(path.to_path_buf())))
}

/// Parses the tag-file grammar. Blank lines and `#` comment lines after the
/// header are ignored.
pub fn read_tags_from<R: BufRead>(reader: R) -> Result<TagStream, SimError> {
    let parse_err = |line: usize, message: String| SimError::Parse { line, message };
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|source| SimError::Io {
            path: PathBuf::new(),
            source,
        })?,
        None => return Err(parse_err(1, "missing `# tagstream v1` header".into())),
    };
    let duration_s = header
        .trim_end()
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| parse_err(1, format!("expected `{HEADER_PREFIX}<seconds>`, found `{header}`")))?
        .parse::<f64>()
        .map_err(|e| parse_err(1, format!("bad duration: {e}")))?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(parse_err(1, format!("duration {duration_s} must be finite and > 0")));
    }
    let end = seconds_to_ps(duration_s);

    let mut tags = Vec::new();
    let mut previous = 0u64;
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|source| SimError::Io {
            path: PathBuf::new(),
            source,
        })?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let (ch, ts) = text
            .split_once(',')
            .ok_or_else(|| parse_err(line_no, format!("expected `channel,timestamp_ps`, found `{text}`")))?;
        let channel = ch.trim().parse::<Channel>().map_err(|e| parse_err(line_no, e))?;
        let time_ps = ts
            .trim()
            .parse::<u64>()
            .map_err(|e| parse_err(line_no, format!("bad timestamp `{}`: {e}", ts.trim())))?;
        if time_ps < previous {
            return Err(parse_err(
                line_no,
                format!("timestamp {time_ps} ps decreases (previous {previous} ps)"),
            ));
        }
        if time_ps > end {
            return Err(parse_err(line_no, format!("timestamp {time_ps} ps beyond duration ({end} ps)")));
        }
        previous = time_ps;
        tags.push(Tag { time_ps, channel });
    }
    Ok(TagStream::from_sorted(tags, duration_s, Provenance::Constructed))
}
