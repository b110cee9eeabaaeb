//! Run configuration, in the same sectioned key-value grammar as material files.
//!
//! ```text
//! material_path = ../materials/ln_lnoi_effective.mat
//! output_dir = out
//!
//! [waveguide]
//! theta_deg = 53.5
//! length_mm = 20
//! temperature_K = 294.15
//!
//! [source]
//! brightness_Hz_per_mW = 2.2e6
//! pump_mW = 2.17
//! on_chip_loss_dB = 3.76
//! ...
//!
//! [analysis]
//! span_s = 200e-9
//! ```
//!
//! Every section is optional here; commands demand what they need. Unknown
//! keys are rejected so a misspelt unit suffix fails loudly.

use std::path::{Path, PathBuf};

use bpm_spdc_core::dispersion::Interpolation;
use bpm_spdc_core::kvfile::{KvDocument, KvError, Section};
use bpm_spdc_core::montecarlo::{PerChannel, DEFAULT_DARK_RATE_HZ, DEFAULT_JITTER_S, DEFAULT_MAX_EVENTS, DEFAULT_WINDOW_S};
use bpm_spdc_core::phasematch::GeometryMeta;
use bpm_spdc_core::photonstats::{BaselinePolicy, LossBudget};
use bpm_spdc_core::{SimError, SourceModel};
use thiserror::Error;

pub const MATERIAL_DIR_ENV: &str = "BPM_SPDC_MATERIAL_DIR";

const TOP_KEYS: &[&str] = &["material_path", "output_dir"];
const WAVEGUIDE_KEYS: &[&str] = &[
    "theta_deg",
    "length_mm",
    "temperature_K",
    "top_width_um",
    "etch_depth_um",
    "film_thickness_um",
    "sidewall_angle_deg",
    "interpolation",
];
const SOURCE_KEYS: &[&str] = &[
    "pair_rate_Hz",
    "brightness_Hz_per_mW",
    "pump_mW",
    "on_chip_loss_dB",
    "off_chip_signal_loss_dB",
    "off_chip_idler_loss_dB",
    "eta_d",
    "eta_d_S",
    "eta_d_I1",
    "eta_d_I2",
    "splitter_ratio",
    "jitter_s",
    "dark_rate_Hz",
    "dead_time_s",
    "tau_s",
    "duration_s",
    "seed",
    "max_events",
];
const ANALYSIS_KEYS: &[&str] = &["span_s", "baseline_exclusion_windows"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Syntax {
        path: PathBuf,
        #[source]
        source: KvError,
    },
    #[error("{}: unknown section [{name}] on line {line}", path.display())]
    UnknownSection { path: PathBuf, name: String, line: usize },
    #[error("material file `{name}` not found (looked in {})", list(searched))]
    MaterialNotFound { name: String, searched: Vec<PathBuf> },
    #[error("{}: missing `{key}` (required by this command)", path.display())]
    Missing { path: PathBuf, key: String },
}

fn list(paths: &[PathBuf]) -> String {
    let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    names.join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideSection {
    pub theta_deg: Option<f64>,
    pub length_mm: f64,
    pub temperature_k: Option<f64>,
    pub geometry: GeometryMeta,
    pub interpolation: Option<Interpolation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSection {
    pub span_s: Option<f64>,
    pub baseline: BaselinePolicy,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub path: PathBuf,
    /// Exact file bytes; hashed into every CSV header.
    pub raw: Vec<u8>,
    /// Resolved and known to exist.
    pub material_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub waveguide: Option<WaveguideSection>,
    pub source: Option<SourceModel>,
    pub analysis: AnalysisSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let text = String::from_utf8_lossy(&raw).into_owned();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let material_dir = std::env::var_os(MATERIAL_DIR_ENV).map(PathBuf::from);
        let mut cfg = Self::parse(&text, path, &base, material_dir.as_deref())?;
        cfg.raw = raw;
        Ok(cfg)
    }

    /// `base` anchors relative paths; `material_dir` is the fallback search
    /// directory for the material file.
    pub fn parse(text: &str, path: &Path, base: &Path, material_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let at = |source: KvError| ConfigError::Syntax {
            path: path.to_path_buf(),
            source,
        };
        let doc = KvDocument::parse(text).map_err(at)?;
        for section in doc.sections() {
            let allowed = match section.name.as_str() {
                "" => TOP_KEYS,
                "waveguide" => WAVEGUIDE_KEYS,
                "source" => SOURCE_KEYS,
                "analysis" => ANALYSIS_KEYS,
                other => {
                    return Err(ConfigError::UnknownSection {
                        path: path.to_path_buf(),
                        name: other.to_string(),
                        line: section.line,
                    })
                }
            };
            if let Some(key) = section.keys().find(|k| !allowed.contains(k)) {
                return Err(at(section.value_error(key, "unknown key")));
            }
        }

        let top = doc.top();
        let material_path = match top.get("material_path") {
            Some(entry) => Some(resolve_material(&entry.value, base, material_dir)?),
            None => None,
        };
        let output_dir = top.get("output_dir").map(|e| base.join(&e.value));
        let waveguide = doc.section("waveguide").map(parse_waveguide).transpose().map_err(at)?;
        let source = doc.section("source").map(parse_source).transpose().map_err(at)?;
        let analysis = match doc.section("analysis") {
            Some(s) => parse_analysis(s).map_err(at)?,
            None => AnalysisSection {
                span_s: None,
                baseline: BaselinePolicy::default(),
            },
        };
        Ok(Self {
            path: path.to_path_buf(),
            raw: text.as_bytes().to_vec(),
            material_path,
            output_dir,
            waveguide,
            source,
            analysis,
        })
    }

    pub fn require_material(&self) -> Result<&Path, ConfigError> {
        self.material_path.as_deref().ok_or_else(|| self.missing("material_path"))
    }

    pub fn require_waveguide(&self) -> Result<&WaveguideSection, ConfigError> {
        self.waveguide.as_ref().ok_or_else(|| self.missing("[waveguide]"))
    }

    pub fn require_source(&self) -> Result<&SourceModel, ConfigError> {
        self.source.as_ref().ok_or_else(|| self.missing("[source]"))
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::Missing {
            path: self.path.clone(),
            key: key.to_string(),
        }
    }
}

/// Absolute paths are taken as given. Relative paths are tried against the
/// config directory, then against the material search directory (as given,
/// then by bare file name).
pub fn resolve_material(name: &str, base: &Path, material_dir: Option<&Path>) -> Result<PathBuf, ConfigError> {
    let given = Path::new(name);
    let mut candidates = Vec::new();
    if given.is_absolute() {
        candidates.push(given.to_path_buf());
    } else {
        candidates.push(base.join(given));
        if let Some(dir) = material_dir {
            candidates.push(dir.join(given));
            if let Some(file) = given.file_name() {
                let bare = dir.join(file);
                if !candidates.contains(&bare) {
                    candidates.push(bare);
                }
            }
        }
    }
    match candidates.iter().find(|p| p.is_file()) {
        Some(found) => Ok(found.clone()),
        None => Err(ConfigError::MaterialNotFound {
            name: name.to_string(),
            searched: candidates,
        }),
    }
}

fn parse_waveguide(s: &Section) -> Result<WaveguideSection, KvError> {
    Ok(WaveguideSection {
        theta_deg: s.parse_opt("theta_deg")?,
        length_mm: s.parse_or("length_mm", 20.0)?,
        temperature_k: s.parse_opt("temperature_K")?,
        geometry: GeometryMeta {
            top_width_um: s.parse_opt("top_width_um")?,
            etch_depth_um: s.parse_opt("etch_depth_um")?,
            film_thickness_um: s.parse_opt("film_thickness_um")?,
            sidewall_angle_deg: s.parse_opt("sidewall_angle_deg")?,
        },
        interpolation: s.parse_opt("interpolation")?,
    })
}

/// A per-channel value: `key` sets all three, `key_S` / `key_I1` / `key_I2`
/// override individual detectors.
fn per_channel(s: &Section, key: &str, default: f64) -> Result<PerChannel<f64>, KvError> {
    let all = s.parse_or(key, default)?;
    Ok(PerChannel {
        s: s.parse_or(&format!("{key}_S"), all)?,
        i1: s.parse_or(&format!("{key}_I1"), all)?,
        i2: s.parse_or(&format!("{key}_I2"), all)?,
    })
}

fn parse_source(s: &Section) -> Result<SourceModel, KvError> {
    let loss = LossBudget::new(
        s.parse_or("on_chip_loss_dB", 0.0)?,
        s.parse_or("off_chip_signal_loss_dB", 0.0)?,
        s.parse_or("off_chip_idler_loss_dB", 0.0)?,
    )
    .with_detector_efficiency(per_channel(s, "eta_d", 1.0)?);

    let pump: Option<f64> = s.parse_opt("pump_mW")?;
    let mut model = match (s.parse_opt::<f64>("pair_rate_Hz")?, s.parse_opt::<f64>("brightness_Hz_per_mW")?) {
        (Some(_), Some(_)) => {
            return Err(s.value_error("pair_rate_Hz", "give either pair_rate_Hz or brightness_Hz_per_mW, not both"))
        }
        (Some(mu), None) => {
            let mut m = SourceModel::new(mu, loss);
            m.pump_mw = pump;
            m
        }
        (None, Some(b)) => {
            let p = pump.ok_or_else(|| s.value_error("brightness_Hz_per_mW", "needs pump_mW"))?;
            SourceModel::from_brightness(b, p, loss)
        }
        (None, None) => return Err(s.value_error("pair_rate_Hz", "missing pair_rate_Hz or brightness_Hz_per_mW")),
    };
    model.splitter_ratio = s.parse_or("splitter_ratio", 0.5)?;
    model.jitter_sigma_s = PerChannel::uniform(s.parse_or("jitter_s", DEFAULT_JITTER_S)?);
    model.dark_rate_hz = PerChannel::uniform(s.parse_or("dark_rate_Hz", DEFAULT_DARK_RATE_HZ)?);
    model.dead_time_s = PerChannel::uniform(s.parse_or("dead_time_s", 0.0)?);
    model.coincidence_window_s = s.parse_or("tau_s", DEFAULT_WINDOW_S)?;
    model.duration_s = s.parse_or("duration_s", 1.0)?;
    model.seed = s.parse_or("seed", 0)?;
    model.max_events = parse_count(s, "max_events")?.unwrap_or(DEFAULT_MAX_EVENTS);
    model.validate().map_err(|e| {
        let key = match &e {
            SimError::Invalid { field, .. } => config_key(field),
            _ => "pair_rate_Hz",
        };
        s.value_error(key, e.to_string())
    })?;
    Ok(model)
}

fn config_key(field: &str) -> &'static str {
    match field {
        "pump_mw" => "pump_mW",
        "splitter_ratio" => "splitter_ratio",
        "coincidence_window_s" => "tau_s",
        "duration_s" => "duration_s",
        "jitter_sigma_s" => "jitter_s",
        "dark_rate_hz" => "dark_rate_Hz",
        "dead_time_s" => "dead_time_s",
        "loss" => "on_chip_loss_dB",
        _ => "pair_rate_Hz",
    }
}

/// Integer that may be written in exponent form (`1e8`).
fn parse_count(s: &Section, key: &str) -> Result<Option<u64>, KvError> {
    let Some(v) = s.parse_opt::<f64>(key)? else {
        return Ok(None);
    };
    if v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(Some(v as u64))
    } else {
        Err(s.value_error(key, format!("{v} is not a positive integer")))
    }
}

fn parse_analysis(s: &Section) -> Result<AnalysisSection, KvError> {
    let span_s: Option<f64> = s.parse_opt("span_s")?;
    if let Some(v) = span_s {
        if !(v.is_finite() && v > 0.0) {
            return Err(s.value_error("span_s", "must be > 0"));
        }
    }
    let windows: f64 = s.parse_or("baseline_exclusion_windows", 5.0)?;
    if !(windows.is_finite() && windows >= 0.0) {
        return Err(s.value_error("baseline_exclusion_windows", "must be ≥ 0"));
    }
    Ok(AnalysisSection {
        span_s,
        baseline: BaselinePolicy::BinWidths(windows),
    })
}
