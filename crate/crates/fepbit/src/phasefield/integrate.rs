//! Time integration of the coupled Langevin equations.
//!
//! # Algorithm
//! One step of size `dt` is classical RK4 applied to the deterministic
//! drift (Landau force, exchange Laplacian, applied field, optional
//! depolarization), followed by a single additive Gaussian increment
//! `eta_i * dt` per domain, i.e. Euler-Maruyama treatment of the noise on
//! top of a fourth-order drift. Additive noise keeps this scheme's weak
//! error first order in `dt` while the deterministic relaxation retains
//! RK4 accuracy, so stationary statistics are robust across the timestep
//! range used here (0.005 to 0.08 ns).
//!
//! Domains at the chain ends see zero-flux boundaries (the Laplacian uses
//! mirrored ghosts). A trajectory aborts with
//! [`PhaseFieldError::Diverged`] if any `|p_i|` exceeds ten times its
//! zero-field spontaneous polarization scale, which a healthy run never
//! approaches.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    depolarization_field, noise_amplitude, spontaneous_polarization, FeState, FeSystemConfig,
    PhaseFieldError, Result,
};
use crate::constants::BOLTZMANN;
use crate::rngstream::labeled_stream;

/// One flat segment of the drive waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSegment {
    /// Segment length, s; must be a whole number of timesteps.
    pub duration: f64,
    /// Drive value held during the segment. Standalone phase-field runs
    /// interpret it directly as the field E_fe in V m^-1.
    pub gate: f64,
}

/// How a trajectory starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitCondition {
    /// Explicit per-domain polarizations.
    State(Vec<f64>),
    /// Each domain at its zero-field stable root opposite in sign to the
    /// first drive segment (the most negative root when the drive is >= 0).
    OppositeSp,
}

/// Recorded trajectory: uniformly sampled states plus the drive that made
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Sample times, s; uniform spacing `dt * stride` starting at 0.
    pub times: Vec<f64>,
    /// One row per sample time, one column per domain, C m^-2.
    pub p: Vec<Vec<f64>>,
    /// Drive value attached to each sample.
    pub gate: Vec<f64>,
    /// Steps between samples.
    pub stride: usize,
    /// Integration timestep, s.
    pub dt: f64,
}

impl Trajectory {
    pub fn n_domains(&self) -> usize {
        self.p.first().map_or(0, Vec::len)
    }

    /// Mean polarization across domains at every sample.
    pub fn mean_series(&self) -> Vec<f64> {
        self.p
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect()
    }

    /// Column `i` as a series.
    pub fn domain_series(&self, i: usize) -> Vec<f64> {
        self.p.iter().map(|row| row[i]).collect()
    }

    /// Index of the first sample kept after discarding `fraction` of the run.
    pub fn burn_in_index(&self, fraction: f64) -> usize {
        ((self.times.len() as f64) * fraction).floor() as usize
    }
}

/// Stateful stepper; shared by standalone trajectories and the FET loop.
pub struct Integrator {
    cfg: FeSystemConfig,
    alpha1: Vec<f64>,
    inv_mu: Vec<f64>,
    noise_step: Vec<f64>,
    clamp: Vec<f64>,
    rngs: Vec<ChaCha8Rng>,
    noise_on: bool,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    ptmp: Vec<f64>,
}

impl Integrator {
    /// Builds the stepper and its per-domain noise streams.
    ///
    /// Streams are derived from `(cfg.noise.seed, trajectory_index, domain)`,
    /// so trajectories and domains never share randomness.
    pub fn new(cfg: &FeSystemConfig, trajectory_index: u64) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_domains();
        let t = cfg.noise.temperature;
        let alpha1: Vec<f64> = cfg.domains.iter().map(|d| d.landau.alpha1(t)).collect();
        let inv_mu: Vec<f64> = cfg.domains.iter().map(|d| 1.0 / d.mu).collect();
        let noise_step: Vec<f64> = cfg
            .domains
            .iter()
            .map(|d| noise_amplitude(&cfg.noise, d.mu) * cfg.noise.dt)
            .collect();
        let noise_on = noise_step.iter().any(|a| *a > 0.0);
        let clamp = cfg
            .domains
            .iter()
            .map(|d| {
                let sp = spontaneous_polarization(&d.landau, t, 0.0)
                    .map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
                    .unwrap_or(0.0);
                // Thermal wandering scale keeps the clamp meaningful even
                // when the zero-field well sits at p = 0.
                let thermal = (BOLTZMANN * t.max(1.0)
                    / (cfg.noise.v_char * d.landau.alpha111))
                    .powf(1.0 / 6.0);
                10.0 * sp.max(thermal).max(1e-3)
            })
            .collect();
        let rngs = (0..n)
            .map(|i| {
                labeled_stream(
                    cfg.noise.seed,
                    "trajectory",
                    &[trajectory_index, i as u64],
                )
            })
            .collect();
        Ok(Integrator {
            cfg: cfg.clone(),
            alpha1,
            inv_mu,
            noise_step,
            clamp,
            rngs,
            noise_on,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            ptmp: vec![0.0; n],
        })
    }

    pub fn config(&self) -> &FeSystemConfig {
        &self.cfg
    }

    /// Advances `state` by one timestep under drive `e_fe`.
    pub fn step(&mut self, state: &mut FeState, e_fe: f64) -> Result<()> {
        let dt = self.cfg.noise.dt;
        let n = state.p.len();
        rhs_core(&self.cfg, &self.alpha1, &self.inv_mu, &state.p, e_fe, &mut self.k1);
        for i in 0..n {
            self.ptmp[i] = state.p[i] + 0.5 * dt * self.k1[i];
        }
        rhs_core(&self.cfg, &self.alpha1, &self.inv_mu, &self.ptmp, e_fe, &mut self.k2);
        for i in 0..n {
            self.ptmp[i] = state.p[i] + 0.5 * dt * self.k2[i];
        }
        rhs_core(&self.cfg, &self.alpha1, &self.inv_mu, &self.ptmp, e_fe, &mut self.k3);
        for i in 0..n {
            self.ptmp[i] = state.p[i] + dt * self.k3[i];
        }
        rhs_core(&self.cfg, &self.alpha1, &self.inv_mu, &self.ptmp, e_fe, &mut self.k4);
        for i in 0..n {
            state.p[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        if self.noise_on {
            for i in 0..n {
                if self.noise_step[i] > 0.0 {
                    let z: f64 = StandardNormal.sample(&mut self.rngs[i]);
                    state.p[i] += self.noise_step[i] * z;
                }
            }
        }
        state.time += dt;
        for i in 0..n {
            if !state.p[i].is_finite() || state.p[i].abs() > self.clamp[i] {
                return Err(PhaseFieldError::Diverged {
                    domain: i,
                    time: state.time,
                    value: state.p[i],
                    clamp: self.clamp[i],
                });
            }
        }
        Ok(())
    }

    /// Initial state for `init` given the first drive value.
    pub fn initial_state(&self, init: &InitCondition, first_gate: f64) -> Result<FeState> {
        let t = self.cfg.noise.temperature;
        let p = match init {
            InitCondition::State(p) => {
                if p.len() != self.cfg.n_domains() {
                    return Err(PhaseFieldError::InvalidConfig(format!(
                        "initial state has {} domains, config has {}",
                        p.len(),
                        self.cfg.n_domains()
                    )));
                }
                p.clone()
            }
            InitCondition::OppositeSp => self
                .cfg
                .domains
                .iter()
                .map(|d| {
                    let roots = spontaneous_polarization(&d.landau, t, 0.0)?;
                    Ok(if first_gate >= 0.0 {
                        roots[0]
                    } else {
                        *roots.last().unwrap()
                    })
                })
                .collect::<Result<Vec<f64>>>()?,
        };
        Ok(FeState { p, time: 0.0 })
    }
}

/// Deterministic drift per domain, (C m^-2) s^-1.
///
/// `out_i = (1/mu_i) * (-dPsi/dp(p_i) + G0 * lap(p)_i + e_fe - E_dep)`,
/// zero-flux Laplacian, `E_dep` only when the config enables it.
pub fn deterministic_rhs(cfg: &FeSystemConfig, p: &[f64], e_fe: f64) -> Vec<f64> {
    let t = cfg.noise.temperature;
    let alpha1: Vec<f64> = cfg.domains.iter().map(|d| d.landau.alpha1(t)).collect();
    let inv_mu: Vec<f64> = cfg.domains.iter().map(|d| 1.0 / d.mu).collect();
    let mut out = vec![0.0; p.len()];
    rhs_core(cfg, &alpha1, &inv_mu, p, e_fe, &mut out);
    out
}

fn rhs_core(
    cfg: &FeSystemConfig,
    alpha1: &[f64],
    inv_mu: &[f64],
    p: &[f64],
    e_fe: f64,
    out: &mut [f64],
) {
    let n = p.len();
    let g_over_dx2 = cfg.coupling_g0 / (cfg.grid_spacing_dx * cfg.grid_spacing_dx);
    let e_dep = if cfg.include_depolarization {
        let mean = p.iter().sum::<f64>() / n as f64;
        depolarization_field(mean, &cfg.stack)
    } else {
        0.0
    };
    for i in 0..n {
        let d = &cfg.domains[i];
        let u = p[i] * p[i];
        let dpsi =
            (2.0 * alpha1[i] + (4.0 * d.landau.alpha11 + 6.0 * d.landau.alpha111 * u) * u) * p[i];
        let lap = if n == 1 {
            0.0
        } else if i == 0 {
            p[1] - p[0]
        } else if i == n - 1 {
            p[n - 2] - p[n - 1]
        } else {
            p[i + 1] - 2.0 * p[i] + p[i - 1]
        };
        out[i] = inv_mu[i] * (-dpsi + g_over_dx2 * lap + e_fe - e_dep);
    }
}

/// Integrates a drive waveform and records every `stride`-th state.
///
/// `trajectory_index` selects the noise streams, so repeated calls with the
/// same config and index reproduce the trajectory exactly while different
/// indices give statistically independent runs.
pub fn run_trajectory(
    cfg: &FeSystemConfig,
    drive: &[DriveSegment],
    init: &InitCondition,
    stride: usize,
    trajectory_index: u64,
) -> Result<Trajectory> {
    if drive.is_empty() || stride == 0 {
        return Err(PhaseFieldError::BadWaveform);
    }
    let dt = cfg.noise.dt;
    let mut seg_steps = Vec::with_capacity(drive.len());
    for seg in drive {
        if !(seg.duration > 0.0) || !seg.gate.is_finite() {
            return Err(PhaseFieldError::BadWaveform);
        }
        let steps = (seg.duration / dt).round();
        if steps < 1.0 || ((steps * dt - seg.duration) / seg.duration).abs() > 1e-6 {
            return Err(PhaseFieldError::BadWaveform);
        }
        seg_steps.push(steps as u64);
    }

    let mut integ = Integrator::new(cfg, trajectory_index)?;
    let mut state = integ.initial_state(init, drive[0].gate)?;

    let total: u64 = seg_steps.iter().sum();
    let n_samples = (total / stride as u64 + 1) as usize;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_samples),
        p: Vec::with_capacity(n_samples),
        gate: Vec::with_capacity(n_samples),
        stride,
        dt,
    };
    traj.times.push(0.0);
    traj.p.push(state.p.clone());
    traj.gate.push(drive[0].gate);

    let mut step_count: u64 = 0;
    for (seg, steps) in drive.iter().zip(&seg_steps) {
        for _ in 0..*steps {
            integ.step(&mut state, seg.gate)?;
            step_count += 1;
            if step_count % stride as u64 == 0 {
                traj.times.push(step_count as f64 * dt);
                traj.p.push(state.p.clone());
                traj.gate.push(seg.gate);
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasefield::{uniform_domains, DomainParams, LandauSet};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn quiet_single(landau: LandauSet) -> FeSystemConfig {
        let mut cfg = FeSystemConfig::single(landau, 10.0);
        cfg.noise.enabled = false;
        cfg
    }

    #[test]
    fn rhs_zero_at_fixed_point() {
        // Single domain at the stable root for E = 8e8 V/m: drift vanishes.
        let cfg = quiet_single(LandauSet::fe1());
        let e = 8.0e8;
        let roots = spontaneous_polarization(&cfg.domains[0].landau, 300.0, e).unwrap();
        let p = *roots.last().unwrap();
        let rhs = deterministic_rhs(&cfg, &[p], e);
        // Scale against the applied-field drift of the same state.
        let scale = e / cfg.domains[0].mu;
        assert!(rhs[0].abs() < 1e-6 * scale);
    }

    #[test]
    fn uniform_chain_has_no_coupling_force() {
        let mut cfg = quiet_single(LandauSet::fe1());
        cfg.domains = uniform_domains(LandauSet::fe1(), 10.0, 5);
        let p = vec![0.08; 5];
        let with = deterministic_rhs(&cfg, &p, 1e8);
        cfg.coupling_g0 = 0.0;
        let without = deterministic_rhs(&cfg, &p, 1e8);
        for (a, b) in with.iter().zip(&without) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12 * a.abs().max(1.0));
        }
    }

    // Stationary points of the coupled two-domain system by damped Newton
    // iteration on the analytic equations; independent of the integrator.
    fn coupled_fixed_point(cfg: &FeSystemConfig, e: f64, start: [f64; 2]) -> [f64; 2] {
        let t = cfg.noise.temperature;
        let k = cfg.coupling_g0 / (cfg.grid_spacing_dx * cfg.grid_spacing_dx);
        let mut p = start;
        for _ in 0..200 {
            let f0 = -cfg.domains[0].landau.dpsi(p[0], t) + k * (p[1] - p[0]) + e;
            let f1 = -cfg.domains[1].landau.dpsi(p[1], t) + k * (p[0] - p[1]) + e;
            let j00 = -cfg.domains[0].landau.d2psi(p[0], t) - k;
            let j11 = -cfg.domains[1].landau.d2psi(p[1], t) - k;
            let det = j00 * j11 - k * k;
            let dp0 = (f0 * j11 - k * f1) / det;
            let dp1 = (j00 * f1 - f0 * k) / det;
            p[0] -= dp0;
            p[1] -= dp1;
            if dp0.abs() + dp1.abs() < 1e-15 {
                break;
            }
        }
        p
    }

    #[test]
    fn coupling_pulls_stationary_points_together() {
        let mut cfg = quiet_single(LandauSet::fe1());
        cfg.domains = vec![
            DomainParams {
                landau: LandauSet::fe1(),
                mu: 10.0,
            },
            DomainParams {
                landau: LandauSet::fe2(),
                mu: 10.0,
            },
        ];
        let e = 8.0e8;
        cfg.coupling_g0 = 1.0e-9;
        let weak = coupled_fixed_point(&cfg, e, [0.2, 0.25]);
        cfg.coupling_g0 = 1.0e-7;
        let strong = coupled_fixed_point(&cfg, e, [0.2, 0.25]);
        let gap_weak = (weak[1] - weak[0]).abs();
        let gap_strong = (strong[1] - strong[0]).abs();
        assert!(
            gap_strong < gap_weak,
            "coupling should shrink the stationary gap: {gap_weak:.4e} -> {gap_strong:.4e}"
        );
        // And the integrator relaxes onto the same fixed points.
        for (g0, target) in [(1.0e-9, weak), (1.0e-7, strong)] {
            cfg.coupling_g0 = g0;
            let traj = run_trajectory(
                &cfg,
                &[DriveSegment {
                    duration: 4.0e-7,
                    gate: e,
                }],
                &InitCondition::State(vec![0.2, 0.25]),
                100,
                0,
            )
            .unwrap();
            let last = traj.p.last().unwrap();
            assert_relative_eq!(last[0], target[0], max_relative = 1e-4);
            assert_relative_eq!(last[1], target[1], max_relative = 1e-4);
        }
    }

    #[test]
    fn rk4_preserves_stationary_state() {
        let cfg = quiet_single(LandauSet::fe1());
        let e = 2.0e8;
        let p0 = *spontaneous_polarization(&cfg.domains[0].landau, 300.0, e)
            .unwrap()
            .last()
            .unwrap();
        let mut integ = Integrator::new(&cfg, 0).unwrap();
        let mut state = FeState {
            p: vec![p0],
            time: 0.0,
        };
        integ.step(&mut state, e).unwrap();
        assert_relative_eq!(state.p[0], p0, max_relative = 1e-9);
    }

    #[test]
    fn rk4_is_fourth_order_on_the_drift() {
        // Relax from a displaced state with three step sizes and Richardson-
        // compare against a tiny-step reference solution.
        let base = quiet_single(LandauSet::fe1());
        let horizon = 4.0e-9;
        let run = |dt: f64| -> f64 {
            let mut cfg = base.clone();
            cfg.noise.dt = dt;
            let mut integ = Integrator::new(&cfg, 0).unwrap();
            let mut state = FeState {
                p: vec![-0.1],
                time: 0.0,
            };
            let steps = (horizon / dt).round() as u64;
            for _ in 0..steps {
                integ.step(&mut state, 8.0e8).unwrap();
            }
            state.p[0]
        };
        let reference = run(1.0e-12);
        let err_h = (run(2.0e-10) - reference).abs();
        let err_h2 = (run(1.0e-10) - reference).abs();
        let ratio = err_h / err_h2;
        assert!(
            (8.0..64.0).contains(&ratio),
            "halving dt should shrink the error ~16x, got {ratio:.2}"
        );
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let mut cfg = FeSystemConfig::single(LandauSet::fe1(), 10.0);
        cfg.noise.seed = 977;
        let drive = [DriveSegment {
            duration: 2.0e-8,
            gate: 0.0,
        }];
        let a = run_trajectory(&cfg, &drive, &InitCondition::OppositeSp, 10, 4).unwrap();
        let b = run_trajectory(&cfg, &drive, &InitCondition::OppositeSp, 10, 4).unwrap();
        assert_eq!(a, b);
        let c = run_trajectory(&cfg, &drive, &InitCondition::OppositeSp, 10, 5).unwrap();
        assert_ne!(a.p, c.p);
    }

    #[test]
    fn noiseless_settles_to_spontaneous_polarization() {
        for landau in [LandauSet::fe1(), LandauSet::fe2()] {
            let cfg = quiet_single(landau);
            let traj = run_trajectory(
                &cfg,
                &[DriveSegment {
                    duration: 2.0e-7,
                    gate: 0.0,
                }],
                &InitCondition::OppositeSp,
                1000,
                0,
            )
            .unwrap();
            let sp = spontaneous_polarization(&landau, 300.0, 0.0).unwrap()[0];
            let last = traj.p.last().unwrap()[0];
            assert_relative_eq!(last, sp, max_relative = 0.01);
        }
    }

    #[test]
    fn opposite_sp_init_flips_with_drive_sign() {
        let cfg = quiet_single(LandauSet::fe1());
        let integ = Integrator::new(&cfg, 0).unwrap();
        let neg = integ
            .initial_state(&InitCondition::OppositeSp, 1.0e8)
            .unwrap();
        let pos = integ
            .initial_state(&InitCondition::OppositeSp, -1.0e8)
            .unwrap();
        assert!(neg.p[0] < 0.0);
        assert!(pos.p[0] > 0.0);
    }

    #[test]
    fn bad_waveform_is_rejected() {
        let cfg = quiet_single(LandauSet::fe1());
        let err = run_trajectory(&cfg, &[], &InitCondition::OppositeSp, 1, 0);
        assert!(err.is_err());
        let err = run_trajectory(
            &cfg,
            &[DriveSegment {
                duration: 3.3e-11, // not a multiple of dt = 2e-11
                gate: 0.0,
            }],
            &InitCondition::OppositeSp,
            1,
            0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn sample_spacing_is_uniform() {
        let cfg = FeSystemConfig::single(LandauSet::fe1(), 10.0);
        let traj = run_trajectory(
            &cfg,
            &[
                DriveSegment {
                    duration: 1.0e-8,
                    gate: 0.0,
                },
                DriveSegment {
                    duration: 1.0e-8,
                    gate: 5.0e8,
                },
            ],
            &InitCondition::OppositeSp,
            7,
            0,
        )
        .unwrap();
        let dt = traj.times[1] - traj.times[0];
        assert_relative_eq!(dt, 7.0 * cfg.noise.dt, max_relative = 1e-12);
        for w in traj.times.windows(2) {
            assert_relative_eq!(w[1] - w[0], dt, max_relative = 1e-9);
        }
    }
}
