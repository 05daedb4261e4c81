//! Experiment bodies shared by the subcommands and `rerun`.
//!
//! Every experiment is a pure function of its resolved configuration, its
//! parameter record, and the output directory. The dispatcher in [`execute`]
//! is what `rerun` replays from a manifest, so nothing here may read the
//! clock, the environment, or any file that is not named in the parameters.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use fepbit::config::SimConfig;
use fepbit::device::{iv_noiseless, iv_stochastic, IvCurve, SweepDirection};
use fepbit::ilnetwork::{
    self, and_gate, copy_gate, full_adder_gate, half_adder_gate, iand_gate, synthesize_gate,
    IlNetworkError, IsingGate, PBitResponse,
};
use fepbit::io::{self, RunManifest};
use fepbit::pbit::{extract_pcurve, PCurve};
use fepbit::phasefield::{
    polarization_histogram, run_trajectory, DomainSelect, DriveSegment, InitCondition,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub const KIND_SIMULATE_FE: &str = "simulate-fe";
pub const KIND_IV: &str = "iv";
pub const KIND_PCURVE: &str = "pcurve";
pub const KIND_FACTORIZE: &str = "factorize";
pub const KIND_GATE_VERIFY: &str = "gate-verify";

/// Gate margin used by `gate-verify` and the factorization network.
const GATE_MARGIN: f64 = 1.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateFeParams {
    /// Integration steps; the trajectory spans `steps * dt` seconds.
    pub steps: u64,
    pub stride: usize,
    /// Applied field held for the whole run, V/m.
    pub field: f64,
    pub bins: usize,
    pub burn_in_fraction: f64,
    pub trajectory_index: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IvParams {
    pub noise: bool,
    pub stride: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcurveParams {
    pub stride: usize,
    pub burn_in_fraction: f64,
}

/// P-bit response requested on the command line. A tabulated curve is
/// inlined rather than referenced by path so a manifest replays without
/// the original file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseSpec {
    Ideal,
    Hard,
    Curve { curve: PCurve, k_ref: f64 },
}

impl ResponseSpec {
    pub fn to_response(&self) -> Result<PBitResponse> {
        match self {
            ResponseSpec::Ideal => Ok(PBitResponse::IdealTanh),
            ResponseSpec::Hard => Ok(PBitResponse::HardThreshold),
            ResponseSpec::Curve { curve, k_ref } => {
                Ok(PBitResponse::from_pcurve(curve, *k_ref)?)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorizeParams {
    pub f: u64,
    pub bits_x: usize,
    pub bits_y: usize,
    pub i0: f64,
    pub sweeps: u64,
    pub burn_in: u64,
    pub response: ResponseSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateVerifyParams {
    pub gate: String,
    /// (label, spin) pairs; spins are +-1.
    pub clamps: Vec<(String, i8)>,
}

/// Runs one experiment, writes its manifest next to the artifacts, and
/// echoes every file written.
pub fn run_and_record(
    kind: &str,
    config: &SimConfig,
    params: serde_json::Value,
    out: &Path,
) -> Result<()> {
    let started = Instant::now();
    let artifacts = execute(kind, config, &params, out)?;
    let mut manifest = RunManifest::new(kind, config.noise.seed, config.clone(), params);
    manifest.wall_seconds = started.elapsed().as_secs_f64();
    manifest.artifacts = artifacts.clone();
    let manifest_path = out.join("manifest.json");
    manifest.save(&manifest_path)?;
    for name in &artifacts {
        println!("wrote {}", out.join(name).display());
    }
    println!("wrote {}", manifest_path.display());
    Ok(())
}

/// Dispatches on the manifest kind. Returns the artifact file names,
/// relative to `out`.
pub fn execute(
    kind: &str,
    config: &SimConfig,
    params: &serde_json::Value,
    out: &Path,
) -> Result<Vec<String>> {
    match kind {
        KIND_SIMULATE_FE => run_simulate_fe(config, &parse_params(params)?, out),
        KIND_IV => run_iv(config, &parse_params(params)?, out),
        KIND_PCURVE => run_pcurve(config, &parse_params(params)?, out),
        KIND_FACTORIZE => run_factorize(config, &parse_params(params)?, out),
        KIND_GATE_VERIFY => run_gate_verify(&parse_params(params)?, out),
        other => bail!("unknown experiment kind '{other}'"),
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(value: &serde_json::Value) -> Result<T> {
    serde_json::from_value(value.clone()).context("experiment parameters do not match the kind")
}

fn run_simulate_fe(config: &SimConfig, params: &SimulateFeParams, out: &Path) -> Result<Vec<String>> {
    if params.steps == 0 {
        bail!("steps must be positive");
    }
    let system = config.fe_system().context("invalid configuration")?;
    let drive = [DriveSegment {
        duration: params.steps as f64 * config.noise.dt,
        gate: params.field,
    }];
    let traj = run_trajectory(
        &system,
        &drive,
        &InitCondition::OppositeSp,
        params.stride,
        params.trajectory_index,
    )?;
    let hist = polarization_histogram(
        &traj,
        DomainSelect::Pooled,
        params.bins,
        params.burn_in_fraction,
        None,
    )?;
    io::atomic_write(&out.join("trajectory.csv"), io::trajectory_csv(&traj).as_bytes())?;
    io::atomic_write(&out.join("histogram.json"), io::histogram_json(&hist)?.as_bytes())?;
    Ok(vec!["trajectory.csv".into(), "histogram.json".into()])
}

fn run_iv(config: &SimConfig, params: &IvParams, out: &Path) -> Result<Vec<String>> {
    let fefet = config.fefet().context("invalid configuration")?;
    let protocol = config.bias_protocol()?;
    if params.noise {
        let traces = iv_stochastic(&fefet, &protocol, params.stride)?;
        io::atomic_write(&out.join("iv_traces.csv"), io::iv_traces_csv(&traces).as_bytes())?;
        Ok(vec!["iv_traces.csv".into()])
    } else {
        // Quasi-static loop: climb the staircase on one branch, then walk it
        // back down on the other, in a single file.
        let forward = iv_noiseless(&fefet, &protocol.gate_levels, SweepDirection::Forward)?;
        let reverse = iv_noiseless(&fefet, &protocol.gate_levels, SweepDirection::Reverse)?;
        let mut loop_curve = IvCurve { points: forward.points };
        loop_curve.points.extend(reverse.points);
        io::atomic_write(&out.join("iv_curve.csv"), io::iv_curve_csv(&loop_curve).as_bytes())?;
        Ok(vec!["iv_curve.csv".into()])
    }
}

fn run_pcurve(config: &SimConfig, params: &PcurveParams, out: &Path) -> Result<Vec<String>> {
    let fefet = config.fefet().context("invalid configuration")?;
    let chain = config.threshold_chain()?;
    let protocol = config.bias_protocol()?;
    let curve = extract_pcurve(&fefet, &chain, &protocol, params.stride, params.burn_in_fraction)?;
    io::atomic_write(&out.join("pcurve.json"), io::pcurve_json(&curve)?.as_bytes())?;
    Ok(vec!["pcurve.json".into()])
}

fn run_factorize(config: &SimConfig, params: &FactorizeParams, out: &Path) -> Result<Vec<String>> {
    let response = params.response.to_response()?;
    let hist = ilnetwork::factorize(
        params.f,
        params.bits_x,
        params.bits_y,
        params.i0,
        &response,
        params.sweeps,
        params.burn_in,
        config.noise.seed,
    )?;
    println!("factor pairs for {} as (a, b): count", params.f);
    for ((a, b), n) in hist.top(5) {
        println!("  ({a}, {b}): {n}");
    }
    println!("accuracy {:.3}", hist.accuracy());
    io::atomic_write(
        &out.join("factor_histogram.json"),
        io::solution_histogram_json(&hist)?.as_bytes(),
    )?;
    Ok(vec!["factor_histogram.json".into()])
}

enum GateOutcome {
    Gate(IsingGate),
    Infeasible(Vec<String>),
}

fn build_gate(name: &str) -> Result<GateOutcome> {
    let gate = match name {
        "copy" => copy_gate(GATE_MARGIN),
        "and" => and_gate(GATE_MARGIN),
        "iand" => iand_gate(GATE_MARGIN),
        "ha" => half_adder_gate(GATE_MARGIN),
        "fa" => full_adder_gate(GATE_MARGIN),
        "xor3" => {
            // Three-spin XOR constraint; not representable with pairwise
            // couplings, so this exercises the infeasibility certificate.
            let mut rows = Vec::new();
            for a in [-1i8, 1] {
                for b in [-1i8, 1] {
                    rows.push(vec![a, b, if a != b { 1 } else { -1 }]);
                }
            }
            return match synthesize_gate(&rows, 3, GATE_MARGIN) {
                Ok(mut gate) => {
                    gate.labels = vec!["a".into(), "b".into(), "xor".into()];
                    Ok(GateOutcome::Gate(gate))
                }
                Err(IlNetworkError::Infeasible { violated }) => {
                    Ok(GateOutcome::Infeasible(violated))
                }
                Err(err) => Err(err.into()),
            };
        }
        other => bail!("unknown gate '{other}' (expected copy, and, iand, ha, fa, or xor3)"),
    };
    Ok(GateOutcome::Gate(gate))
}

fn fmt_state(state: &[i8], labels: &[String]) -> String {
    state
        .iter()
        .zip(labels)
        .map(|(s, l)| format!("{l}={s:+}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn run_gate_verify(params: &GateVerifyParams, out: &Path) -> Result<Vec<String>> {
    let report = match build_gate(&params.gate)? {
        GateOutcome::Infeasible(certificate) => {
            println!("gate {}: no coupling assignment exists", params.gate);
            for line in &certificate {
                println!("  cannot satisfy: {line}");
            }
            json!({
                "gate": params.gate,
                "feasible": false,
                "certificate": certificate,
            })
        }
        GateOutcome::Gate(gate) => {
            if !params.clamps.is_empty() && params.gate == "xor3" {
                bail!("xor3 has no realization to clamp");
            }
            let grounds = gate.ground_states();
            println!(
                "gate {} ({} spins: {})",
                params.gate,
                gate.n,
                gate.labels.join(", ")
            );
            println!(
                "ground energy {:.6}, margin {:.6}",
                gate.ground_energy, gate.margin
            );
            println!("{} ground states", grounds.len());
            for s in &grounds {
                println!("  {}", fmt_state(s, &gate.labels));
            }

            let mut report = json!({
                "gate": params.gate,
                "feasible": true,
                "n": gate.n,
                "labels": gate.labels,
                "j": gate.j,
                "h": gate.h,
                "ground_energy": gate.ground_energy,
                "margin": gate.margin,
                "ground_states": grounds,
            });

            if !params.clamps.is_empty() {
                let clamped = clamped_ground_states(&gate, &params.clamps)?;
                let desc = params
                    .clamps
                    .iter()
                    .map(|(l, s)| format!("{l}={s:+}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                println!("{} ground states under {}", clamped.len(), desc);
                for s in &clamped {
                    println!("  {}", fmt_state(s, &gate.labels));
                }
                let obj = report.as_object_mut().expect("report is an object");
                obj.insert("clamps".into(), json!(params.clamps));
                obj.insert("clamped_ground_states".into(), json!(clamped));
            }
            report
        }
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    io::atomic_write(&out.join("gate_report.json"), text.as_bytes())?;
    Ok(vec!["gate_report.json".into()])
}

/// Minimum-energy states among those consistent with the clamps.
fn clamped_ground_states(gate: &IsingGate, clamps: &[(String, i8)]) -> Result<Vec<Vec<i8>>> {
    let mut pins: Vec<(usize, i8)> = Vec::new();
    for (label, spin) in clamps {
        let idx = gate
            .labels
            .iter()
            .position(|l| l.eq_ignore_ascii_case(label))
            .with_context(|| format!("gate has no spin labelled '{label}'"))?;
        if pins.iter().any(|&(i, _)| i == idx) {
            bail!("spin '{label}' clamped twice");
        }
        pins.push((idx, *spin));
    }
    let mut best = f64::INFINITY;
    let mut states: Vec<Vec<i8>> = Vec::new();
    let tol = 1e-9 * gate.margin.max(1.0);
    for code in 0u64..(1 << gate.n) {
        let state: Vec<i8> = (0..gate.n)
            .map(|k| if code >> k & 1 == 1 { 1 } else { -1 })
            .collect();
        if pins.iter().any(|&(i, s)| state[i] != s) {
            continue;
        }
        let e = gate.energy(&state);
        if e < best - tol {
            best = e;
            states.clear();
        }
        if e <= best + tol {
            states.push(state);
        }
    }
    Ok(states)
}
