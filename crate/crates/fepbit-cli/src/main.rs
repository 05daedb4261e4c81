//! Command-line front end: resolves configurations, runs the named
//! experiment, and records a manifest from which `rerun` reproduces the
//! outputs byte for byte.

mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fepbit::config::{resolve_config, SimConfig};
use fepbit::ilnetwork::DEFAULT_K_REF;
use fepbit::io::{self, RunManifest};
use fepbit::phasefield::LandauSet;

use experiments::{
    run_and_record, FactorizeParams, GateVerifyParams, IvParams, PcurveParams, ResponseSpec,
    SimulateFeParams, KIND_FACTORIZE, KIND_GATE_VERIFY, KIND_IV, KIND_PCURVE, KIND_SIMULATE_FE,
};

#[derive(Parser)]
#[command(name = "fepbit", version, about = "Ferroelectric probabilistic-bit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the stochastic polarization dynamics and histogram the result
    SimulateFe(SimulateFeArgs),
    /// Sweep the gate and record drain current, with or without noise
    Iv(IvArgs),
    /// Measure the above-threshold probability versus gate bias
    Pcurve(PcurveArgs),
    /// Factor an integer on an invertible multiplier network
    Factorize(FactorizeArgs),
    /// Synthesize a logic gate and verify its ground states by enumeration
    GateVerify(GateVerifyArgs),
    /// Re-execute a recorded run from its manifest
    Rerun(RerunArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Named preset: fe1, fe2, multi4, multi8, multi12.
    #[arg(long)]
    preset: Option<String>,
    /// Override one configuration key, e.g. --set noise.temperature=150.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master random seed; overrides noise.seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to $FEPBIT_OUT, then ./fepbit-runs.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let document = match &self.config {
            Some(path) => Some(
                std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?,
            ),
            None => None,
        };
        let mut cfg = resolve_config(document.as_deref(), self.preset.as_deref(), &self.set)?;
        if let Some(seed) = self.seed {
            cfg.noise.seed = seed;
        }
        Ok(cfg)
    }

    fn out_dir(&self) -> PathBuf {
        if let Some(path) = &self.out {
            return path.clone();
        }
        match std::env::var_os("FEPBIT_OUT") {
            Some(root) => PathBuf::from(root),
            None => PathBuf::from("fepbit-runs"),
        }
    }
}

#[derive(Args)]
struct SimulateFeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Integration steps per run.
    #[arg(long, default_value_t = 1_000_000)]
    steps: u64,
    /// Keep every Nth sample.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Applied field levels, V/m; a comma list fans out into one run each.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    field: Vec<String>,
    /// Landau coefficient sets to run: fe1, fe2, or both.
    #[arg(long, value_delimiter = ',')]
    landau: Vec<String>,
    /// Domain-coupling strengths to run, V m^3 C^-1 m^-2.
    #[arg(long, value_delimiter = ',')]
    g0: Vec<String>,
    /// Histogram bin count.
    #[arg(long, default_value_t = 61)]
    bins: usize,
    /// Fraction of each trajectory discarded before histogramming.
    #[arg(long, default_value_t = 0.1)]
    burn_in: f64,
    /// Trajectory index within the seed's ensemble.
    #[arg(long, default_value_t = 0)]
    trajectory_index: u64,
}

#[derive(Args)]
struct IvArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// "on" integrates the stochastic dynamics; "off" traces the
    /// quasi-static hysteresis loop.
    #[arg(long, default_value = "off", value_parser = ["on", "off"])]
    noise: String,
    /// Gate staircase as LO:HI:STEP, V; overrides the config protocol.
    #[arg(long, value_name = "LO:HI:STEP", allow_hyphen_values = true)]
    sweep: Option<String>,
    /// Keep every Nth current sample (stochastic runs).
    #[arg(long, default_value_t = 20)]
    stride: usize,
}

#[derive(Args)]
struct PcurveArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Lowest gate level, V.
    #[arg(long, allow_negative_numbers = true)]
    vmin: Option<f64>,
    /// Highest gate level, V.
    #[arg(long, allow_negative_numbers = true)]
    vmax: Option<f64>,
    /// Gate level spacing, V.
    #[arg(long)]
    step: Option<f64>,
    /// Hold time per level, s.
    #[arg(long)]
    hold: Option<f64>,
    /// Keep every Nth current sample.
    #[arg(long, default_value_t = 20)]
    stride: usize,
    /// Fraction of each hold discarded before thresholding.
    #[arg(long, default_value_t = 0.1)]
    burn_in: f64,
}

#[derive(Args)]
struct FactorizeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Product to factor.
    #[arg(long)]
    f: u64,
    /// Bits in the first factor.
    #[arg(long, default_value_t = 2)]
    bits_x: usize,
    /// Bits in the second factor.
    #[arg(long, default_value_t = 2)]
    bits_y: usize,
    /// Input scale of the sweep dynamics.
    #[arg(long, default_value_t = 1.0)]
    i0: f64,
    /// Monte Carlo sweeps.
    #[arg(long, default_value_t = 200_000)]
    sweeps: u64,
    /// Sweeps discarded before counting solutions; defaults to sweeps/10.
    #[arg(long)]
    burn_in: Option<u64>,
    /// P-bit response: ideal, hard, or a probability-curve JSON file.
    #[arg(long, default_value = "ideal")]
    response: String,
    /// Reference slope a tabulated response is normalized against.
    #[arg(long, default_value_t = DEFAULT_K_REF)]
    k_ref: f64,
}

#[derive(Args)]
struct GateVerifyArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Gate to synthesize: copy, and, iand, ha, fa, xor3.
    #[arg(long)]
    gate: String,
    /// Clamp a labelled spin to a binary level, e.g. --clamp c=0. Repeatable.
    #[arg(long = "clamp", value_name = "LABEL=0|1")]
    clamp: Vec<String>,
}

#[derive(Args)]
struct RerunArgs {
    /// Manifest of the run to reproduce.
    manifest: PathBuf,
    /// Output directory; defaults to $FEPBIT_OUT, then ./fepbit-runs.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Die quietly when stdout is a closed pipe (`fepbit ... | head`), like
    // any other command-line tool; Rust's runtime ignores SIGPIPE and the
    // resulting EPIPE would otherwise surface as a panic mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::SimulateFe(args) => cmd_simulate_fe(args),
        Command::Iv(args) => cmd_iv(args),
        Command::Pcurve(args) => cmd_pcurve(args),
        Command::Factorize(args) => cmd_factorize(args),
        Command::GateVerify(args) => cmd_gate_verify(args),
        Command::Rerun(args) => cmd_rerun(args),
    }
}

fn parse_float(what: &str, token: &str) -> Result<f64> {
    let value: f64 = token
        .parse()
        .with_context(|| format!("{what} '{token}' is not a number"))?;
    if !value.is_finite() {
        bail!("{what} '{token}' is not finite");
    }
    Ok(value)
}

fn cmd_simulate_fe(args: SimulateFeArgs) -> Result<()> {
    let base = args.config.resolve()?;
    let out = args.config.out_dir();

    // Cartesian fan-out over the axes given as comma lists. Each cell keeps
    // the literal command-line tokens in its directory name.
    let landau_axis: Vec<Option<&str>> = if args.landau.is_empty() {
        vec![None]
    } else {
        args.landau.iter().map(|s| Some(s.as_str())).collect()
    };
    let g0_axis: Vec<Option<(&str, f64)>> = if args.g0.is_empty() {
        vec![None]
    } else {
        args.g0
            .iter()
            .map(|s| Ok(Some((s.as_str(), parse_float("g0", s)?))))
            .collect::<Result<_>>()?
    };
    let field_axis: Vec<(Option<&str>, f64)> = if args.field.is_empty() {
        vec![(None, 0.0)]
    } else {
        args.field
            .iter()
            .map(|s| Ok((Some(s.as_str()), parse_float("field", s)?)))
            .collect::<Result<_>>()?
    };

    let cells = landau_axis.len() * g0_axis.len() * field_axis.len();
    for &landau in &landau_axis {
        for &g0 in &g0_axis {
            for &(field_token, field) in &field_axis {
                let mut cfg = base.clone();
                let mut name = Vec::new();
                if let Some(which) = landau {
                    let set = match which {
                        "fe1" => LandauSet::fe1(),
                        "fe2" => LandauSet::fe2(),
                        other => bail!("unknown Landau set '{other}' (expected fe1 or fe2)"),
                    };
                    cfg.landau.alpha0 = set.alpha0;
                    cfg.landau.alpha11 = set.alpha11;
                    cfg.landau.alpha111 = set.alpha111;
                    cfg.landau.t_curie = set.t_curie;
                    if landau_axis.len() > 1 {
                        name.push(which.to_string());
                    }
                }
                if let Some((token, value)) = g0 {
                    cfg.ferroelectric.coupling_g0 = value;
                    if g0_axis.len() > 1 {
                        name.push(format!("g0-{token}"));
                    }
                }
                if let Some(token) = field_token {
                    if field_axis.len() > 1 {
                        name.push(format!("field-{token}"));
                    }
                }
                let cell_out = if cells > 1 { out.join(name.join("_")) } else { out.clone() };
                let params = SimulateFeParams {
                    steps: args.steps,
                    stride: args.stride,
                    field,
                    bins: args.bins,
                    burn_in_fraction: args.burn_in,
                    trajectory_index: args.trajectory_index,
                };
                run_and_record(KIND_SIMULATE_FE, &cfg, serde_json::to_value(&params)?, &cell_out)?;
            }
        }
    }
    Ok(())
}

fn cmd_iv(args: IvArgs) -> Result<()> {
    let mut cfg = args.config.resolve()?;
    if let Some(spec) = &args.sweep {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("sweep must be LO:HI:STEP, got '{spec}'");
        }
        cfg.protocol.v_min = parse_float("sweep low end", parts[0])?;
        cfg.protocol.v_max = parse_float("sweep high end", parts[1])?;
        cfg.protocol.v_step = parse_float("sweep step", parts[2])?;
        cfg.protocol.gate_levels.clear();
    }
    let params = IvParams {
        noise: args.noise == "on",
        stride: args.stride,
    };
    run_and_record(KIND_IV, &cfg, serde_json::to_value(&params)?, &args.config.out_dir())
}

fn cmd_pcurve(args: PcurveArgs) -> Result<()> {
    let mut cfg = args.config.resolve()?;
    if args.vmin.is_some() || args.vmax.is_some() || args.step.is_some() {
        cfg.protocol.gate_levels.clear();
    }
    if let Some(v) = args.vmin {
        cfg.protocol.v_min = v;
    }
    if let Some(v) = args.vmax {
        cfg.protocol.v_max = v;
    }
    if let Some(v) = args.step {
        cfg.protocol.v_step = v;
    }
    if let Some(v) = args.hold {
        cfg.protocol.hold_duration = v;
    }
    let params = PcurveParams {
        stride: args.stride,
        burn_in_fraction: args.burn_in,
    };
    run_and_record(KIND_PCURVE, &cfg, serde_json::to_value(&params)?, &args.config.out_dir())
}

fn cmd_factorize(args: FactorizeArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let response = match args.response.as_str() {
        "ideal" => ResponseSpec::Ideal,
        "hard" => ResponseSpec::Hard,
        path => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading response curve {path}"))?;
            let curve = io::parse_pcurve_json(&text)?;
            ResponseSpec::Curve { curve, k_ref: args.k_ref }
        }
    };
    let params = FactorizeParams {
        f: args.f,
        bits_x: args.bits_x,
        bits_y: args.bits_y,
        i0: args.i0,
        sweeps: args.sweeps,
        burn_in: args.burn_in.unwrap_or(args.sweeps / 10),
        response,
    };
    run_and_record(KIND_FACTORIZE, &cfg, serde_json::to_value(&params)?, &args.config.out_dir())
}

fn cmd_gate_verify(args: GateVerifyArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let mut clamps = Vec::new();
    for spec in &args.clamp {
        let (label, level) = spec
            .split_once('=')
            .with_context(|| format!("clamp must be LABEL=0|1, got '{spec}'"))?;
        let spin = match level {
            "0" => -1i8,
            "1" => 1i8,
            other => bail!("clamp level must be 0 or 1, got '{other}'"),
        };
        clamps.push((label.to_ascii_lowercase(), spin));
    }
    let params = GateVerifyParams { gate: args.gate, clamps };
    run_and_record(KIND_GATE_VERIFY, &cfg, serde_json::to_value(&params)?, &args.config.out_dir())
}

fn cmd_rerun(args: RerunArgs) -> Result<()> {
    let manifest = RunManifest::load(&args.manifest)
        .with_context(|| format!("loading manifest {}", args.manifest.display()))?;
    let out = match args.out {
        Some(path) => path,
        None => match std::env::var_os("FEPBIT_OUT") {
            Some(root) => PathBuf::from(root),
            None => PathBuf::from("fepbit-runs"),
        },
    };
    run_and_record(&manifest.kind, &manifest.config, manifest.params, &out)
}
