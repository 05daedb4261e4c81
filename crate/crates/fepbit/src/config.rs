//! File-based simulation configuration.
//!
//! A run is described by a TOML document with one section per physical
//! subsystem. Every key has a default taken from the corresponding library
//! type, so an empty document is a valid FE-1 single-domain setup; named
//! presets change a handful of keys and user documents or `key=value`
//! overrides are merged on top.

use serde::{Deserialize, Serialize};

use crate::device::{BiasProtocol, FefetConfig, TransportParams};
use crate::pbit::ThresholdChain;
use crate::phasefield::{
    sample_domain_params, uniform_domains, FeSystemConfig, LandauSet, NoiseConfig, StackGeometry,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("config key {path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unknown preset {0:?}; available: fe1, fe2, multi4, multi8, multi12")]
    UnknownPreset(String),
}

impl From<toml::de::Error> for ConfigError {
    fn from(err: toml::de::Error) -> Self {
        // toml renders the offending key path on its own line; fold the
        // report into one line so it reads well in error chains.
        let folded = err
            .to_string()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        ConfigError::Parse(folded)
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

/// `[landau]`: free-energy polynomial of the film.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandauSection {
    pub alpha0: f64,
    pub alpha11: f64,
    pub alpha111: f64,
    pub t_curie: f64,
}

impl Default for LandauSection {
    fn default() -> Self {
        let l = LandauSet::fe1();
        LandauSection {
            alpha0: l.alpha0,
            alpha11: l.alpha11,
            alpha111: l.alpha111,
            t_curie: l.t_curie,
        }
    }
}

impl LandauSection {
    fn to_landau(&self) -> LandauSet {
        LandauSet {
            alpha0: self.alpha0,
            alpha11: self.alpha11,
            alpha111: self.alpha111,
            t_curie: self.t_curie,
        }
    }
}

/// `[ferroelectric]`: domain structure and kinetics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FerroelectricSection {
    /// Viscosity mu, Ohm m.
    pub viscosity: f64,
    pub n_domains: usize,
    /// Fractional spread of per-domain Landau parameters; 0 = identical.
    pub domain_sigma: f64,
    /// Stream index for the per-domain parameter draws.
    pub domain_seed: u64,
    pub coupling_g0: f64,
    pub grid_spacing_dx: f64,
    pub include_depolarization: bool,
}

impl Default for FerroelectricSection {
    fn default() -> Self {
        let base = FeSystemConfig::single(LandauSet::fe1(), 10.0);
        FerroelectricSection {
            viscosity: base.domains[0].mu,
            n_domains: 1,
            domain_sigma: 0.0,
            domain_seed: 7,
            coupling_g0: base.coupling_g0,
            grid_spacing_dx: base.grid_spacing_dx,
            include_depolarization: base.include_depolarization,
        }
    }
}

/// `[stack]`: gate-stack geometry, mirroring the electrostatics solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StackSection {
    pub fe_thickness: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub eps_background: f64,
    pub sio2_thickness: f64,
    pub eps_sio2: f64,
    pub si_thickness: f64,
    pub eps_si: f64,
}

impl Default for StackSection {
    fn default() -> Self {
        let s = StackGeometry::default();
        StackSection {
            fe_thickness: s.fe_thickness,
            lambda1: s.lambda1,
            lambda2: s.lambda2,
            eps_background: s.eps_background,
            sio2_thickness: s.sio2_thickness,
            eps_sio2: s.eps_sio2,
            si_thickness: s.si_thickness,
            eps_si: s.eps_si,
        }
    }
}

impl StackSection {
    fn to_stack(&self) -> StackGeometry {
        StackGeometry {
            fe_thickness: self.fe_thickness,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            eps_background: self.eps_background,
            sio2_thickness: self.sio2_thickness,
            eps_sio2: self.eps_sio2,
            si_thickness: self.si_thickness,
            eps_si: self.eps_si,
        }
    }
}

/// `[noise]`: thermal fluctuations and the master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub enabled: bool,
    pub temperature: f64,
    pub v_char: f64,
    pub dt: f64,
    pub seed: u64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseConfig::default();
        NoiseSection {
            enabled: n.enabled,
            temperature: n.temperature,
            v_char: n.v_char,
            dt: n.dt,
            seed: n.seed,
        }
    }
}

/// `[transport]`: ballistic channel parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportSection {
    pub effective_mass: f64,
    pub band_offset: f64,
    pub fermi_source: f64,
    pub drain_bias: f64,
    pub channel_length: f64,
    pub temperature: f64,
}

impl Default for TransportSection {
    fn default() -> Self {
        let t = TransportParams::default();
        TransportSection {
            effective_mass: t.effective_mass,
            band_offset: t.band_offset,
            fermi_source: t.fermi_source,
            drain_bias: t.drain_bias,
            channel_length: t.channel_length,
            temperature: t.temperature,
        }
    }
}

/// `[device]`: coupling and settlement policy of the full transistor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceSection {
    pub pol_coupling: f64,
    pub settle_tol: f64,
    pub settle_max_steps: usize,
    pub settle_strict: bool,
}

impl Default for DeviceSection {
    fn default() -> Self {
        let d = FefetConfig::default();
        DeviceSection {
            pol_coupling: d.pol_coupling,
            settle_tol: d.settle_tol,
            settle_max_steps: d.settle_max_steps,
            settle_strict: d.settle_strict,
        }
    }
}

/// `[protocol]`: bias waveform for stochastic sweeps.
///
/// Either list `gate_levels` explicitly or give a `v_min`/`v_max`/`v_step`
/// staircase; an explicit list wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    pub v_init: f64,
    pub init_duration: f64,
    pub gate_levels: Vec<f64>,
    pub v_min: f64,
    pub v_max: f64,
    pub v_step: f64,
    pub hold_duration: f64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = BiasProtocol::default();
        ProtocolSection {
            v_init: p.v_init,
            init_duration: p.init_duration,
            gate_levels: Vec::new(),
            v_min: -2.0,
            v_max: 2.0,
            v_step: 0.1,
            hold_duration: 1.0e-5,
        }
    }
}

/// `[chain]`: the load chain thresholding drain current into a bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSection {
    pub r_load: f64,
    pub v_dd: f64,
    pub v_th: f64,
    pub width: f64,
}

impl Default for ChainSection {
    fn default() -> Self {
        let c = ThresholdChain::default();
        ChainSection {
            r_load: c.r_load,
            v_dd: c.v_dd,
            v_th: c.v_th,
            width: c.width,
        }
    }
}

/// A full simulation setup; the deserialized form of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub landau: LandauSection,
    pub ferroelectric: FerroelectricSection,
    pub stack: StackSection,
    pub noise: NoiseSection,
    pub transport: TransportSection,
    pub device: DeviceSection,
    pub protocol: ProtocolSection,
    pub chain: ChainSection,
}

/// Named starting points. `fe1` and `fe2` are the two single-domain
/// parameter sets; `multiN` is FE-1 split into N domains with a 20%
/// parameter spread.
pub fn preset(name: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    match name {
        "fe1" => {}
        "fe2" => {
            let l = LandauSet::fe2();
            cfg.landau = LandauSection {
                alpha0: l.alpha0,
                alpha11: l.alpha11,
                alpha111: l.alpha111,
                t_curie: l.t_curie,
            };
        }
        "multi4" | "multi8" | "multi12" => {
            cfg.ferroelectric.n_domains = name[5..].parse().expect("suffix is a number");
            cfg.ferroelectric.domain_sigma = 0.2;
        }
        other => return Err(ConfigError::UnknownPreset(other.into())),
    }
    Ok(cfg)
}

pub const PRESET_NAMES: [&str; 5] = ["fe1", "fe2", "multi4", "multi8", "multi12"];

fn deep_merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_table() && v.is_table() => deep_merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_set(expr: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, raw) = expr.split_once('=').ok_or_else(|| {
        invalid(expr, "override must look like section.key=value")
    })?;
    let key = key.trim();
    if key.is_empty() {
        return Err(invalid(expr, "override key is empty"));
    }
    let path: Vec<String> = key.split('.').map(|s| s.trim().to_string()).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(invalid(key, "override key has an empty segment"));
    }
    let raw = raw.trim();
    // Parse the value as a TOML literal; fall back to a bare string.
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(t) => t["v"].clone(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((path, value))
}

fn insert_path(root: &mut toml::Value, path: &[String], value: toml::Value) -> Result<()> {
    let mut node = root;
    for seg in &path[..path.len() - 1] {
        let table = node.as_table_mut().ok_or_else(|| {
            invalid(&path.join("."), "override path crosses a non-table value")
        })?;
        node = table
            .entry(seg.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node.as_table_mut().ok_or_else(|| {
        invalid(&path.join("."), "override path crosses a non-table value")
    })?;
    table.insert(path.last().expect("non-empty path").clone(), value);
    Ok(())
}

/// Resolve a run configuration from an optional TOML document, an optional
/// preset name, and `key=value` overrides, in that precedence order
/// (overrides strongest). A `preset` key inside the document or overrides
/// picks the base when the caller passes none.
pub fn resolve_config(
    document: Option<&str>,
    cli_preset: Option<&str>,
    sets: &[String],
) -> Result<SimConfig> {
    let mut user: toml::Value = match document {
        Some(text) => text.parse::<toml::Table>()?.into(),
        None => toml::Value::Table(toml::Table::new()),
    };
    for expr in sets {
        let (path, value) = parse_set(expr)?;
        insert_path(&mut user, &path, value)?;
    }
    // The preset key is routing metadata, not part of the schema.
    let doc_preset = user
        .as_table_mut()
        .and_then(|t| t.remove("preset"))
        .map(|v| match v {
            toml::Value::String(s) => Ok(s),
            other => Err(invalid("preset", format!("expected a string, got {other}"))),
        })
        .transpose()?;
    let base_name = cli_preset
        .map(str::to_string)
        .or(doc_preset)
        .unwrap_or_else(|| "fe1".to_string());
    let base = preset(&base_name)?;

    let mut merged = toml::Value::try_from(&base).expect("config serializes");
    deep_merge(&mut merged, user);
    let cfg: SimConfig = merged.try_into()?;
    cfg.validate()?;
    Ok(cfg)
}

impl SimConfig {
    /// Range checks that do not need the library conversions.
    pub fn validate(&self) -> Result<()> {
        if self.ferroelectric.n_domains == 0 {
            return Err(invalid("ferroelectric.n_domains", "must be at least 1"));
        }
        if !(self.ferroelectric.domain_sigma >= 0.0) {
            return Err(invalid("ferroelectric.domain_sigma", "must be >= 0"));
        }
        if !(self.protocol.v_step > 0.0) {
            return Err(invalid("protocol.v_step", "must be > 0"));
        }
        if self.protocol.gate_levels.is_empty() && self.protocol.v_max < self.protocol.v_min {
            return Err(invalid("protocol.v_max", "staircase range is empty"));
        }
        Ok(())
    }

    fn noise_config(&self) -> NoiseConfig {
        NoiseConfig {
            temperature: self.noise.temperature,
            v_char: self.noise.v_char,
            dt: self.noise.dt,
            seed: self.noise.seed,
            enabled: self.noise.enabled,
        }
    }

    /// Build the ferroelectric system, sampling per-domain parameters when
    /// a spread is requested.
    pub fn fe_system(&self) -> Result<FeSystemConfig> {
        let landau = self.landau.to_landau();
        let f = &self.ferroelectric;
        let domains = if f.domain_sigma == 0.0 {
            uniform_domains(landau, f.viscosity, f.n_domains)
        } else {
            sample_domain_params(&landau, f.viscosity, f.domain_sigma, f.n_domains, f.domain_seed)
                .map_err(|e| invalid("ferroelectric", e.to_string()))?
        };
        let cfg = FeSystemConfig {
            domains,
            coupling_g0: f.coupling_g0,
            grid_spacing_dx: f.grid_spacing_dx,
            stack: self.stack.to_stack(),
            noise: self.noise_config(),
            include_depolarization: f.include_depolarization,
        };
        cfg.validate()
            .map_err(|e| invalid("ferroelectric", e.to_string()))?;
        Ok(cfg)
    }

    pub fn transport_params(&self) -> Result<TransportParams> {
        let t = &self.transport;
        let params = TransportParams {
            effective_mass: t.effective_mass,
            band_offset: t.band_offset,
            fermi_source: t.fermi_source,
            drain_bias: t.drain_bias,
            channel_length: t.channel_length,
            temperature: t.temperature,
        };
        params
            .validate()
            .map_err(|e| invalid("transport", e.to_string()))?;
        Ok(params)
    }

    pub fn fefet(&self) -> Result<FefetConfig> {
        let cfg = FefetConfig {
            fe: self.fe_system()?,
            transport: self.transport_params()?,
            pol_coupling: self.device.pol_coupling,
            settle_tol: self.device.settle_tol,
            settle_max_steps: self.device.settle_max_steps,
            settle_strict: self.device.settle_strict,
        };
        cfg.validate().map_err(|e| invalid("device", e.to_string()))?;
        Ok(cfg)
    }

    /// Bias protocol; explicit `gate_levels` win over the staircase keys.
    pub fn bias_protocol(&self) -> Result<BiasProtocol> {
        let p = &self.protocol;
        let levels = if p.gate_levels.is_empty() {
            let n = ((p.v_max - p.v_min) / p.v_step).round() as usize + 1;
            (0..n).map(|i| p.v_min + i as f64 * p.v_step).collect()
        } else {
            p.gate_levels.clone()
        };
        let protocol = BiasProtocol {
            v_init: p.v_init,
            init_duration: p.init_duration,
            gate_levels: levels,
            hold_duration: p.hold_duration,
        };
        protocol
            .validate(self.noise.dt)
            .map_err(|e| invalid("protocol", e.to_string()))?;
        Ok(protocol)
    }

    pub fn threshold_chain(&self) -> Result<ThresholdChain> {
        let c = ThresholdChain {
            r_load: self.chain.r_load,
            v_dd: self.chain.v_dd,
            v_th: self.chain.v_th,
            width: self.chain.width,
        };
        c.validate().map_err(|e| invalid("chain", e.to_string()))?;
        Ok(c)
    }
}
