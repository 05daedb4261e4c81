//! The assembled FeFET: polarization dynamics coupled quasi-statically to
//! the gate stack, with drain current read out from the surface potential.
//!
//! Each timestep the stack is re-solved for the instantaneous mean
//! polarization; the resulting film field drives the next polarization
//! step and the surface potential sets the current. Because the stack is
//! linear, the per-step solve reduces to two precomputed affine
//! coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stack::solve_stack;
use super::transport::{drain_current, CurrentTable, TransportParams};
use super::{DeviceError, Result};
use crate::phasefield::{
    deterministic_rhs, spontaneous_polarization, FeState, FeSystemConfig, Integrator, LandauSet,
};

/// Film, transport and coupling parameters of one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FefetConfig {
    /// Polarization dynamics of the gate ferroelectric.
    pub fe: FeSystemConfig,
    pub transport: TransportParams,
    /// Fraction of the mean polarization presented to the stack as areal
    /// charge.
    ///
    /// The switchable polarization of the film is far larger than the
    /// charge swing the series capacitors can absorb while keeping the
    /// channel in its useful range, so only this fraction couples into the
    /// electrostatics. The default keeps the subthreshold current swing of
    /// a single-domain device at a few orders of magnitude without
    /// collapsing the film's double well through the feedback field.
    pub pol_coupling: f64,
    /// Quasi-static settlement: per-step polarization change tolerance,
    /// C m^-2.
    pub settle_tol: f64,
    /// Step budget per bias point during settlement.
    pub settle_max_steps: usize,
    /// Whether exceeding the budget is an error (`true`) or just recorded
    /// on the bias point (`false`, a rate-limited sweep).
    pub settle_strict: bool,
}

impl Default for FefetConfig {
    fn default() -> Self {
        FefetConfig {
            fe: FeSystemConfig::single(LandauSet::fe1(), 10.0),
            transport: TransportParams::default(),
            pol_coupling: 1.5e-3,
            settle_tol: 1.0e-6,
            settle_max_steps: 1_000_000,
            settle_strict: true,
        }
    }
}

impl FefetConfig {
    pub fn validate(&self) -> Result<()> {
        self.fe.validate()?;
        self.transport.validate()?;
        if !(self.pol_coupling >= 0.0) || !self.pol_coupling.is_finite() {
            return Err(DeviceError::InvalidConfig(
                "pol_coupling must be finite and >= 0".into(),
            ));
        }
        if !(self.settle_tol > 0.0) || self.settle_max_steps == 0 {
            return Err(DeviceError::InvalidConfig(
                "settle_tol must be > 0 and settle_max_steps >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Config with thermal noise forced off, for noiseless branches.
    fn noiseless(&self) -> FefetConfig {
        let mut cfg = self.clone();
        cfg.fe.noise.enabled = false;
        cfg
    }
}

/// Bias waveform for stochastic runs: a reset pulse, then independent holds.
///
/// Every gate level starts from the same `v_init` reset so bias points are
/// statistically independent and may be evaluated in any order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasProtocol {
    /// Reset gate voltage applied before every hold, V.
    pub v_init: f64,
    /// Reset pulse length, s; whole number of timesteps.
    pub init_duration: f64,
    /// Gate levels to hold and sample, V.
    pub gate_levels: Vec<f64>,
    /// Hold length per level, s; whole number of timesteps.
    pub hold_duration: f64,
}

impl Default for BiasProtocol {
    fn default() -> Self {
        BiasProtocol {
            v_init: -3.0,
            init_duration: 4.0e-8,
            gate_levels: (0..=12).map(|i| -0.3 + 0.05 * i as f64).collect(),
            hold_duration: 2.0e-6,
        }
    }
}

impl BiasProtocol {
    /// `n` levels evenly spaced over `[lo, hi]`, keeping the other fields.
    pub fn with_staircase(mut self, lo: f64, hi: f64, n: usize) -> Self {
        self.gate_levels = if n == 1 {
            vec![lo]
        } else {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        };
        self
    }

    pub fn validate(&self, dt: f64) -> Result<()> {
        if !self.v_init.is_finite() || self.gate_levels.iter().any(|v| !v.is_finite()) {
            return Err(DeviceError::InvalidConfig(
                "bias levels must be finite".into(),
            ));
        }
        if self.gate_levels.is_empty() {
            return Err(DeviceError::InvalidConfig(
                "protocol needs at least one gate level".into(),
            ));
        }
        for (name, d) in [
            ("init_duration", self.init_duration),
            ("hold_duration", self.hold_duration),
        ] {
            if !(d > 0.0) {
                return Err(DeviceError::InvalidConfig(format!("{name} must be > 0")));
            }
            let steps = d / dt;
            if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
                return Err(DeviceError::InvalidConfig(format!(
                    "{name} = {d} s is not a whole number of {dt} s timesteps"
                )));
            }
        }
        Ok(())
    }
}

/// Traversal order of a noiseless sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepDirection {
    /// Biases taken in the order given.
    Forward,
    /// Biases taken back to front.
    Reverse,
}

/// One settled bias point of a noiseless sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvPoint {
    pub v_gate: f64,
    /// Drain current, A m^-1.
    pub i_drain: f64,
    pub p_mean: f64,
    pub v_mos: f64,
    /// Whether the settlement tolerance was reached within budget.
    pub settled: bool,
    pub steps: usize,
}

/// Noiseless sweep result, points in traversal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvCurve {
    pub points: Vec<IvPoint>,
}

/// Sampled time series at one held gate level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvTrace {
    pub v_gate: f64,
    /// Sample times from the start of the hold, s.
    pub times: Vec<f64>,
    /// Drain current samples, A m^-1.
    pub current: Vec<f64>,
    /// Mean polarization at each sample, C m^-2.
    pub p_mean: Vec<f64>,
}

impl IvTrace {
    /// Index of the first sample kept after discarding `fraction` of the
    /// hold as switching transient.
    pub fn burn_in_index(&self, fraction: f64) -> usize {
        ((self.times.len() as f64) * fraction).floor() as usize
    }
}

// The stack is linear, so one solve per unit drive caches everything:
// e_fe = e_v * v_gate + e_q * q and v_mos = m_v * v_gate + m_q * q.
#[derive(Debug, Clone, Copy)]
struct StackAffine {
    e_v: f64,
    e_q: f64,
    m_v: f64,
    m_q: f64,
}

impl StackAffine {
    fn build(cfg: &FefetConfig) -> Result<StackAffine> {
        let unit_v = solve_stack(1.0, 0.0, &cfg.fe.stack)?;
        let unit_q = solve_stack(0.0, 1.0, &cfg.fe.stack)?;
        Ok(StackAffine {
            e_v: unit_v.e_fe,
            e_q: unit_q.e_fe,
            m_v: unit_v.v_mos,
            m_q: unit_q.v_mos,
        })
    }

    fn e_fe(&self, v_gate: f64, q: f64) -> f64 {
        self.e_v * v_gate + self.e_q * q
    }

    fn v_mos(&self, v_gate: f64, q: f64) -> f64 {
        self.m_v * v_gate + self.m_q * q
    }
}

// Steps until the largest per-step polarization change drops below
// settle_tol, or the budget runs out.
fn settle(
    cfg: &FefetConfig,
    integ: &mut Integrator,
    state: &mut FeState,
    aff: &StackAffine,
    v_gate: f64,
) -> Result<(bool, usize)> {
    let dt = cfg.fe.noise.dt;
    for step in 0..cfg.settle_max_steps {
        let e_fe = aff.e_fe(v_gate, cfg.pol_coupling * state.p_mean());
        integ.step(state, e_fe)?;
        if step % 8 == 7 {
            let e_fe = aff.e_fe(v_gate, cfg.pol_coupling * state.p_mean());
            let rhs = deterministic_rhs(&cfg.fe, &state.p, e_fe);
            let worst = rhs.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            if worst * dt < cfg.settle_tol {
                return Ok((true, step + 1));
            }
        }
    }
    Ok((false, cfg.settle_max_steps))
}

// Zero-field stable root of matching sign for every domain.
fn branch_state(fe: &FeSystemConfig, sign: f64) -> Result<FeState> {
    let t = fe.noise.temperature;
    let p = fe
        .domains
        .iter()
        .map(|d| {
            let roots = spontaneous_polarization(&d.landau, t, 0.0)?;
            Ok(if sign < 0.0 {
                roots[0]
            } else {
                *roots.last().unwrap()
            })
        })
        .collect::<crate::phasefield::Result<Vec<f64>>>()?;
    Ok(FeState { p, time: 0.0 })
}

/// Noiseless quasi-static sweep; polarization state carries from one bias
/// to the next, which is what produces the hysteresis loop.
///
/// The film starts on the saturation branch matching the first traversed
/// bias (negative branch for an ascending sweep). With
/// [`FefetConfig::settle_strict`] unset, bias points that exhaust the step
/// budget are recorded with `settled = false` instead of failing, turning
/// the sweep into a rate-limited one.
pub fn iv_noiseless(
    cfg: &FefetConfig,
    sweep: &[f64],
    direction: SweepDirection,
) -> Result<IvCurve> {
    cfg.validate()?;
    if sweep.is_empty() || sweep.iter().any(|v| !v.is_finite()) {
        return Err(DeviceError::InvalidConfig(
            "sweep must be non-empty and finite".into(),
        ));
    }
    let cfg = cfg.noiseless();
    let aff = StackAffine::build(&cfg)?;
    let order: Vec<f64> = match direction {
        SweepDirection::Forward => sweep.to_vec(),
        SweepDirection::Reverse => sweep.iter().rev().copied().collect(),
    };
    let first = order[0];
    let sign = if first != 0.0 {
        first.signum()
    } else if matches!(direction, SweepDirection::Forward) {
        -1.0
    } else {
        1.0
    };
    let mut state = branch_state(&cfg.fe, sign)?;
    let mut integ = Integrator::new(&cfg.fe, 0)?;
    let mut points = Vec::with_capacity(order.len());
    for &v_gate in &order {
        let (settled, steps) = settle(&cfg, &mut integ, &mut state, &aff, v_gate)?;
        if !settled && cfg.settle_strict {
            return Err(DeviceError::InvalidConfig(format!(
                "bias point {v_gate} V did not settle within {} steps",
                cfg.settle_max_steps
            )));
        }
        let p_mean = state.p_mean();
        let v_mos = aff.v_mos(v_gate, cfg.pol_coupling * p_mean);
        points.push(IvPoint {
            v_gate,
            i_drain: drain_current(v_mos, &cfg.transport),
            p_mean,
            v_mos,
            settled,
            steps,
        });
    }
    Ok(IvCurve { points })
}

// Shared worker: reset at v_init, hold one level, sample every stride.
fn trace_level(
    cfg: &FefetConfig,
    aff: &StackAffine,
    table: &CurrentTable,
    protocol: &BiasProtocol,
    v_gate: f64,
    stride: usize,
    trajectory_index: u64,
) -> Result<IvTrace> {
    let dt = cfg.fe.noise.dt;
    let init_steps = (protocol.init_duration / dt).round() as usize;
    let hold_steps = (protocol.hold_duration / dt).round() as usize;
    let mut integ = Integrator::new(&cfg.fe, trajectory_index)?;
    let mut state = branch_state(&cfg.fe, if protocol.v_init >= 0.0 { 1.0 } else { -1.0 })?;
    for _ in 0..init_steps {
        let e_fe = aff.e_fe(protocol.v_init, cfg.pol_coupling * state.p_mean());
        integ.step(&mut state, e_fe)?;
    }
    let n_samples = hold_steps / stride + 1;
    let mut times = Vec::with_capacity(n_samples);
    let mut current = Vec::with_capacity(n_samples);
    let mut p_means = Vec::with_capacity(n_samples);
    let mut record = |t: f64, p_mean: f64| {
        times.push(t);
        p_means.push(p_mean);
        current.push(table.eval(aff.v_mos(v_gate, cfg.pol_coupling * p_mean)));
    };
    record(0.0, state.p_mean());
    for step in 1..=hold_steps {
        let e_fe = aff.e_fe(v_gate, cfg.pol_coupling * state.p_mean());
        integ.step(&mut state, e_fe)?;
        if step % stride == 0 {
            record(step as f64 * dt, state.p_mean());
        }
    }
    Ok(IvTrace {
        v_gate,
        times,
        current,
        p_mean: p_means,
    })
}

// Table over the whole reachable v_mos range of a protocol, with margin.
fn table_for(
    cfg: &FefetConfig,
    aff: &StackAffine,
    levels: &[f64],
) -> Result<CurrentTable> {
    let q_max = cfg.pol_coupling * 0.5;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in levels {
        for q in [-q_max, q_max] {
            let m = aff.v_mos(v, q);
            lo = lo.min(m);
            hi = hi.max(m);
        }
    }
    let pad = 0.02 * (hi - lo).max(0.01);
    CurrentTable::build(&cfg.transport, lo - pad, hi + pad, 1000)
}

/// Stochastic current trace at a single held gate level.
///
/// `trajectory_index` picks the noise streams exactly as in
/// [`crate::phasefield::run_trajectory`]: the same `(seed, index)` pair
/// reproduces the trace sample for sample.
pub fn stochastic_trace(
    cfg: &FefetConfig,
    protocol: &BiasProtocol,
    v_gate: f64,
    stride: usize,
    trajectory_index: u64,
) -> Result<IvTrace> {
    cfg.validate()?;
    protocol.validate(cfg.fe.noise.dt)?;
    if stride == 0 {
        return Err(DeviceError::InvalidConfig("stride must be >= 1".into()));
    }
    let aff = StackAffine::build(cfg)?;
    let table = table_for(cfg, &aff, &[v_gate, protocol.v_init])?;
    trace_level(cfg, &aff, &table, protocol, v_gate, stride, trajectory_index)
}

/// Stochastic traces for every gate level of the protocol.
///
/// Level `k` uses trajectory index `k`, so levels are statistically
/// independent, may run in parallel, and the whole sweep is reproducible
/// from the config seed regardless of scheduling.
pub fn iv_stochastic(
    cfg: &FefetConfig,
    protocol: &BiasProtocol,
    stride: usize,
) -> Result<Vec<IvTrace>> {
    cfg.validate()?;
    protocol.validate(cfg.fe.noise.dt)?;
    if stride == 0 {
        return Err(DeviceError::InvalidConfig("stride must be >= 1".into()));
    }
    let aff = StackAffine::build(cfg)?;
    let table = table_for(cfg, &aff, &protocol.gate_levels)?;
    protocol
        .gate_levels
        .par_iter()
        .enumerate()
        .map(|(k, &v)| trace_level(cfg, &aff, &table, protocol, v, stride, k as u64))
        .collect()
}

/// Barrier offset that puts the settled noiseless current at `v_gate = 0`
/// (negative polarization branch) on `target_current` (A m^-1).
///
/// The polarization settlement does not involve transport, so the state is
/// settled once and the offset found by bisection on the strictly
/// decreasing current-vs-offset map. The bracket `[0.02, 2.0]` eV covers
/// any plausible barrier.
pub fn calibrate_band_offset(cfg: &FefetConfig, target_current: f64) -> Result<f64> {
    cfg.validate()?;
    if !(target_current > 0.0) || !target_current.is_finite() {
        return Err(DeviceError::InvalidConfig(
            "target current must be finite and > 0".into(),
        ));
    }
    let ncfg = cfg.noiseless();
    let aff = StackAffine::build(&ncfg)?;
    let mut state = branch_state(&ncfg.fe, -1.0)?;
    let mut integ = Integrator::new(&ncfg.fe, 0)?;
    let (settled, _) = settle(&ncfg, &mut integ, &mut state, &aff, 0.0)?;
    if !settled {
        return Err(DeviceError::InvalidConfig(
            "polarization did not settle at v_gate = 0 during calibration".into(),
        ));
    }
    let v_mos = aff.v_mos(0.0, ncfg.pol_coupling * state.p_mean());
    let current_at = |offset: f64| {
        let t = TransportParams {
            band_offset: offset,
            ..ncfg.transport
        };
        drain_current(v_mos, &t)
    };
    let (mut lo, mut hi) = (0.02, 2.0);
    if current_at(lo) < target_current || current_at(hi) > target_current {
        return Err(DeviceError::InvalidConfig(format!(
            "target current {target_current} A/m is outside the reachable range"
        )));
    }
    while hi - lo > 1.0e-12 {
        let mid = 0.5 * (lo + hi);
        if current_at(mid) > target_current {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
