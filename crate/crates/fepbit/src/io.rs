//! Artifact files: deterministic CSV and JSON renderings of results.
//!
//! Every writer goes through [`atomic_write`] (write-temp-then-rename), so
//! a crashed run never leaves a half-written artifact. Numbers are printed
//! in shortest round-trip form, which makes outputs byte-stable across
//! reruns of the same seeded experiment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::device::{IvCurve, IvTrace};
use crate::ilnetwork::SolutionHistogram;
use crate::pbit::PCurve;
use crate::phasefield::{Histogram, Trajectory};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed artifact: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, IoError>;

/// Write `bytes` to `path` atomically: the data lands in a temporary file
/// in the same directory and is renamed into place, so readers only ever
/// see complete files. Parent directories are created as needed.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| IoError::Format(format!("{} has no file name", path.display())))?;
    let mut tmp = path.to_path_buf();
    tmp.set_file_name(format!(
        "{}.tmp-{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e.into())
        }
    }
}

/// Render a polarization trajectory as CSV: `time_s,p_domain_0,...`.
pub fn trajectory_csv(t: &Trajectory) -> String {
    let n_domains = t.p.first().map_or(0, Vec::len);
    let mut out = String::from("time_s");
    for d in 0..n_domains {
        let _ = write!(out, ",p_domain_{d}");
    }
    out.push('\n');
    for (time, row) in t.times.iter().zip(&t.p) {
        let _ = write!(out, "{time}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Render a quasi-static sweep as CSV: `v_gate_V,i_drain_A_per_m`.
pub fn iv_curve_csv(curve: &IvCurve) -> String {
    let mut out = String::from("v_gate_V,i_drain_A_per_m\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{}", p.v_gate, p.i_drain);
    }
    out
}

/// Render held-bias time series as CSV: `time_s,v_gate_V,i_drain_A_per_m`,
/// one block per gate level in the given order.
pub fn iv_traces_csv(traces: &[IvTrace]) -> String {
    let mut out = String::from("time_s,v_gate_V,i_drain_A_per_m\n");
    for tr in traces {
        for (t, i) in tr.times.iter().zip(&tr.current) {
            let _ = writeln!(out, "{t},{},{i}", tr.v_gate);
        }
    }
    out
}

pub fn histogram_json(h: &Histogram) -> Result<String> {
    Ok(serde_json::to_string_pretty(h)? + "\n")
}

pub fn pcurve_json(c: &PCurve) -> Result<String> {
    Ok(serde_json::to_string_pretty(c)? + "\n")
}

pub fn parse_pcurve_json(text: &str) -> Result<PCurve> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct SolutionEntryJson {
    a: u64,
    b: u64,
    count: u64,
    probability: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SolutionHistogramJson {
    total_sweeps: u64,
    correct: Vec<(u64, u64)>,
    entries: Vec<SolutionEntryJson>,
}

/// Render a solution histogram with entries sorted by count (descending,
/// ties by key) so the top-ranked factor pairs lead the file.
pub fn solution_histogram_json(h: &SolutionHistogram) -> Result<String> {
    let entries = h
        .top(usize::MAX)
        .into_iter()
        .map(|((a, b), count)| SolutionEntryJson {
            a,
            b,
            count,
            probability: h.probability(a, b),
        })
        .collect();
    let view = SolutionHistogramJson {
        total_sweeps: h.total_sweeps,
        correct: h.correct.iter().copied().collect(),
        entries,
    };
    Ok(serde_json::to_string_pretty(&view)? + "\n")
}

pub fn parse_solution_histogram_json(text: &str) -> Result<SolutionHistogram> {
    let view: SolutionHistogramJson = serde_json::from_str(text)?;
    let mut h = SolutionHistogram::default();
    for e in view.entries {
        if h.counts.insert((e.a, e.b), e.count).is_some() {
            return Err(IoError::Format(format!(
                "duplicate histogram entry ({}, {})",
                e.a, e.b
            )));
        }
    }
    h.correct = view.correct.into_iter().collect();
    h.total_sweeps = view.total_sweeps;
    let counted: u64 = h.counts.values().sum();
    if counted > h.total_sweeps {
        return Err(IoError::Format(format!(
            "histogram counts {counted} exceed total sweeps {}",
            h.total_sweeps
        )));
    }
    Ok(h)
}

/// Everything needed to reproduce a run and find its outputs.
///
/// The seed, the full config snapshot, and the experiment parameters
/// determine the artifacts bit-for-bit; the timing fields are provenance
/// only and play no part in a replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Experiment kind, e.g. "simulate-fe".
    pub kind: String,
    pub code_version: String,
    /// Unix timestamp of the run, seconds.
    pub created_unix: u64,
    /// Wall-clock duration of the run, seconds.
    pub wall_seconds: f64,
    /// Master seed; all randomness derives from it.
    pub seed: u64,
    /// Full resolved configuration.
    pub config: SimConfig,
    /// Experiment-specific parameters (sweep counts, targets, ...).
    pub params: serde_json::Value,
    /// Artifact file names, relative to the manifest's directory.
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(kind: &str, seed: u64, config: SimConfig, params: serde_json::Value) -> Self {
        RunManifest {
            kind: kind.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_seconds: 0.0,
            seed,
            config,
            params,
            artifacts: Vec::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        atomic_write(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
