//! CSV artifacts. Every file opens with a comment line naming the tool
//! version, a hash of the run configuration and the seed, and is written
//! through a temporary file so readers never observe a partial file.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analysis::AnalysisReport;
use crate::montecarlo::CoincidenceHistogram;
use crate::phasematch::{PhaseMatchSolution, ShgSpectrum};
use crate::photonstats::{Estimate, StatsError};

pub const TOOL_NAME: &str = "bpm-spdc";

/// First 16 hex digits of the SHA-256 of the configuration bytes.
pub fn config_hash(config: &[u8]) -> String {
    Sha256::digest(config)
        .iter()
        .take(8)
        .fold(String::with_capacity(16), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvHeader {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl CsvHeader {
    pub fn new(config: &[u8], seed: u64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(config),
            seed,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "# {TOOL_NAME} {} config_hash={} seed={}\n",
            self.version, self.config_hash, self.seed
        )
    }
}

/// `metric,value,sigma`. Undefined metrics leave both cells empty.
pub fn metrics_csv(header: &CsvHeader, report: &AnalysisReport) -> String {
    let mut out = header.line();
    out.push_str("metric,value,sigma\n");
    let rates = &report.rates;
    for (name, rate) in [
        ("c_s_hz", rates.c_s),
        ("c_i_hz", rates.c_i),
        ("c_si_hz", rates.c_si),
        ("c_si1_hz", rates.c_si1),
        ("c_si2_hz", rates.c_si2),
        ("c_si1i2_hz", rates.c_si1i2),
    ] {
        let _ = writeln!(out, "{name},{rate},{}", rates.rate_sigma(rate));
    }
    let m = &report.metrics;
    let car = m.car.clone().map(|c| Estimate::new(c.value, c.sigma));
    let rows: [(&str, Result<Estimate, StatsError>); 8] = [
        ("pgr_hz", m.pgr.clone()),
        ("brightness_hz_per_mw", m.brightness.clone()),
        ("car", car),
        ("car_x_pgr_hz", m.car_times_pgr()),
        ("eta_h_signal", m.eta_h_signal.clone()),
        ("eta_h_idler", m.eta_h_idler.clone()),
        ("g2h_zero", m.g2h_zero.clone()),
        ("purity", m.purity.clone()),
    ];
    for (name, est) in rows {
        match est {
            Ok(e) => {
                let _ = writeln!(out, "{name},{},{}", e.value, e.sigma);
            }
            Err(_) => {
                let _ = writeln!(out, "{name},,");
            }
        }
    }
    if let Ok(c) = &m.car {
        let _ = writeln!(out, "car_is_lower_bound,{},0", u8::from(c.lower_bound));
    }
    out
}

/// `delay_ps,counts`.
pub fn histogram_csv(header: &CsvHeader, hist: &CoincidenceHistogram) -> String {
    let mut out = header.line();
    out.push_str("delay_ps,counts\n");
    for (d, c) in hist.iter() {
        let _ = writeln!(out, "{d},{c}");
    }
    out
}

/// `lambda_nm,efficiency` on the first-harmonic axis.
pub fn shg_csv(header: &CsvHeader, spectrum: &ShgSpectrum) -> String {
    let mut out = header.line();
    out.push_str("lambda_nm,efficiency\n");
    for &(l, e) in &spectrum.points {
        let _ = writeln!(out, "{l},{e}");
    }
    out
}

/// `theta_deg,lambda_p_nm,lambda_s_nm,residual` with the residual Δk in rad/mm.
pub fn solutions_csv(header: &CsvHeader, solutions: &[PhaseMatchSolution]) -> String {
    let mut out = header.line();
    out.push_str("theta_deg,lambda_p_nm,lambda_s_nm,residual\n");
    for s in solutions {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.theta_deg, s.lambda_p_nm, s.lambda_s_nm, s.residual_delta_k
        );
    }
    out
}

/// Writes `contents` next to `path` under a temporary name, syncs, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let tmp = temporary_sibling(path);
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

pub(crate) fn temporary_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_short() {
        // SHA-256("abc") = ba7816bf8f01cfea...
        assert_eq!(config_hash(b"abc"), "ba7816bf8f01cfea");
        assert_eq!(
            CsvHeader::new(b"abc", 7).line(),
            format!("# bpm-spdc {} config_hash=ba7816bf8f01cfea seed=7\n", env!("CARGO_PKG_VERSION"))
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
