//! Channel transport: ballistic top-of-barrier conduction plus a WKB
//! tunneling floor through the channel barrier.
//!
//! All currents are per unit gate width, A m^-1 (numerically equal to
//! uA um^-1). The channel is treated as a 2D electron gas; the barrier top
//! sits at `band_offset - v_mos` (eV) above the source band edge, so the
//! semiconductor surface potential from the gate stack is the only control
//! knob transport sees.

use super::{DeviceError, Result};
use crate::constants::{BOLTZMANN, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR};

/// Channel and barrier parameters for the transport model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransportParams {
    /// Carrier effective mass as a fraction of the free-electron mass.
    pub effective_mass: f64,
    /// Barrier top above the source band edge at zero surface potential, eV.
    pub band_offset: f64,
    /// Source Fermi level relative to the source band edge, eV.
    pub fermi_source: f64,
    /// Drain bias, V.
    pub drain_bias: f64,
    /// Tunneling path length through the channel barrier, m.
    pub channel_length: f64,
    /// Lattice temperature, K.
    pub temperature: f64,
}

impl Default for TransportParams {
    fn default() -> Self {
        TransportParams {
            effective_mass: 0.19,
            band_offset: 0.383885,
            fermi_source: 0.0,
            drain_bias: 0.05,
            channel_length: 1.0e-8,
            temperature: 300.0,
        }
    }
}

impl TransportParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.effective_mass,
            self.channel_length,
            self.temperature,
        ];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(DeviceError::InvalidConfig(
                "effective mass, channel length and temperature must be > 0".into(),
            ));
        }
        if !self.band_offset.is_finite()
            || !self.fermi_source.is_finite()
            || !self.drain_bias.is_finite()
        {
            return Err(DeviceError::InvalidConfig(
                "band offset, source Fermi level and drain bias must be finite".into(),
            ));
        }
        Ok(())
    }

    fn mass_kg(&self) -> f64 {
        self.effective_mass * ELECTRON_MASS
    }

    /// Thermal energy in eV.
    fn kt_ev(&self) -> f64 {
        BOLTZMANN * self.temperature / ELEMENTARY_CHARGE
    }

    /// Barrier top above the source band edge for a given surface potential, eV.
    pub fn barrier_top(&self, v_mos: f64) -> f64 {
        self.band_offset - v_mos
    }
}

// Composite Simpson rule; n is the (even) interval count.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n >= 2 && n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

const FD_INTERVALS: usize = 400;

/// Complete Fermi-Dirac integral of order 1/2 without normalization:
/// `int_0^inf sqrt(x) / (1 + exp(x - eta)) dx`.
///
/// The substitution `x = t^2` removes the square-root kink at the origin,
/// leaving a smooth integrand that a fixed Simpson rule handles to ~1e-9.
/// Deep in the Boltzmann tail the closed form `(sqrt(pi)/2) exp(eta)` is
/// exact to machine precision and avoids integrating a vanishing function.
pub fn fermi_dirac_half(eta: f64) -> f64 {
    if eta < -30.0 {
        return 0.5 * std::f64::consts::PI.sqrt() * eta.exp();
    }
    let t_max = (eta.max(0.0) + 45.0).sqrt();
    2.0 * simpson(
        |t| {
            let x = t * t;
            t * t / (1.0 + (x - eta).exp())
        },
        0.0,
        t_max,
        FD_INTERVALS,
    )
}

/// Complete Fermi-Dirac integral of order -1/2 without normalization:
/// `int_0^inf x^(-1/2) / (1 + exp(x - eta)) dx`.
pub fn fermi_dirac_minus_half(eta: f64) -> f64 {
    if eta < -30.0 {
        return std::f64::consts::PI.sqrt() * eta.exp();
    }
    let t_max = (eta.max(0.0) + 45.0).sqrt();
    2.0 * simpson(
        |t| 1.0 / (1.0 + (t * t - eta).exp()),
        0.0,
        t_max,
        FD_INTERVALS,
    )
}

/// Ballistic top-of-barrier current per unit width, A m^-1.
///
/// Natori form for a 2D channel: carriers crossing the barrier top carry
/// `I/W = q sqrt(2m) (kT)^(3/2) / (pi^2 hbar^2) * [F_1/2(eta_s) - F_1/2(eta_d)]`
/// with `eta_s = (E_f - E_top)/kT` and the drain side shifted down by the
/// drain bias. Exactly zero at zero drain bias by construction.
pub fn tob_current(v_mos: f64, p: &TransportParams) -> f64 {
    let kt = p.kt_ev();
    let eta_s = (p.fermi_source - p.barrier_top(v_mos)) / kt;
    let eta_d = eta_s - p.drain_bias / kt;
    let kt_j = BOLTZMANN * p.temperature;
    let pref = ELEMENTARY_CHARGE * (2.0 * p.mass_kg()).sqrt() * kt_j.powf(1.5)
        / (std::f64::consts::PI.powi(2) * HBAR * HBAR);
    pref * (fermi_dirac_half(eta_s) - fermi_dirac_half(eta_d))
}

/// Parabolic barrier profile `U(x) = peak * (1 - (2x/L - 1)^2)` sampled at
/// `n + 1` uniform points on `[0, L]`, eV. A non-positive peak yields an
/// all-zero profile (the barrier has collapsed).
pub fn parabolic_barrier(peak_ev: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            let s = 2.0 * i as f64 / n as f64 - 1.0;
            (peak_ev * (1.0 - s * s)).max(0.0)
        })
        .collect()
}

/// WKB transmission through a sampled barrier at longitudinal energy
/// `energy_ev`. `barrier_ev` holds `U(x_i)` on a uniform grid of spacing
/// `dx`; `mass_kg` is the tunneling mass.
///
/// `T = exp(-2 int kappa dx)` with `kappa = sqrt(2 m q (U - E)) / hbar`
/// integrated over the classically forbidden region. Each sample interval
/// is integrated with the closed form for a linear profile,
/// `int sqrt(u) dx = (2/3) dx (b^(3/2) - a^(3/2)) / (b - a)`, written in the
/// cancellation-free form `(2/3) dx (s^2 + s t + t^2) / (s + t)` with
/// `s = sqrt(a)`, `t = sqrt(b)`; turning points inside an interval are
/// located by linear interpolation and the forbidden wedge integrated the
/// same way. Exact for piecewise-linear profiles (a constant barrier in
/// particular) and continuous in both the energy and the profile.
pub fn wkb_transmission(energy_ev: f64, barrier_ev: &[f64], dx: f64, mass_kg: f64) -> f64 {
    // int kappa dx over one interval with endpoint depths a, b >= 0 (eV)
    // and width w, divided by sqrt(2 m q)/hbar.
    let segment = |a: f64, b: f64, w: f64| {
        let s = a.sqrt();
        let t = b.sqrt();
        if s + t == 0.0 {
            0.0
        } else {
            2.0 / 3.0 * w * (s * s + s * t + t * t) / (s + t)
        }
    };
    let mut reduced_action = 0.0;
    for w in barrier_ev.windows(2) {
        let a = w[0] - energy_ev;
        let b = w[1] - energy_ev;
        if a <= 0.0 && b <= 0.0 {
            continue;
        }
        if a > 0.0 && b > 0.0 {
            reduced_action += segment(a, b, dx);
        } else if a > 0.0 {
            reduced_action += segment(a, 0.0, dx * a / (a - b));
        } else {
            reduced_action += segment(0.0, b, dx * b / (b - a));
        }
    }
    let scale = (2.0 * mass_kg * ELEMENTARY_CHARGE).sqrt() / HBAR;
    (-2.0 * scale * reduced_action).exp()
}

const TUNNEL_ENERGY_INTERVALS: usize = 96;
const TUNNEL_BARRIER_SAMPLES: usize = 400;

/// Source-to-drain tunneling current per unit width, A m^-1.
///
/// Landauer sum over transverse modes of a 2D gas:
/// `I/W = q sqrt(2 m kT) / (2 pi^2 hbar^2) *
///  int_0^{E_top} T(E) [F_-1/2(eta_s(E)) - F_-1/2(eta_d(E))] q dE`,
/// with the longitudinal energy integrated below the barrier top (above it
/// the flux is already counted by [`tob_current`]).
pub fn tunnel_current(v_mos: f64, p: &TransportParams) -> f64 {
    let e_top = p.barrier_top(v_mos);
    if e_top <= 0.0 {
        return 0.0;
    }
    let kt = p.kt_ev();
    let kt_j = BOLTZMANN * p.temperature;
    let mass = p.mass_kg();
    let barrier = parabolic_barrier(e_top, TUNNEL_BARRIER_SAMPLES);
    let dx = p.channel_length / TUNNEL_BARRIER_SAMPLES as f64;
    let integrand = |e: f64| {
        let t = wkb_transmission(e, &barrier, dx, mass);
        let eta_s = (p.fermi_source - e) / kt;
        let eta_d = eta_s - p.drain_bias / kt;
        t * (fermi_dirac_minus_half(eta_s) - fermi_dirac_minus_half(eta_d))
    };
    let integral_ev = simpson(integrand, 0.0, e_top, TUNNEL_ENERGY_INTERVALS);
    let pref = ELEMENTARY_CHARGE * (2.0 * mass * kt_j).sqrt()
        / (2.0 * std::f64::consts::PI.powi(2) * HBAR * HBAR);
    pref * integral_ev * ELEMENTARY_CHARGE
}

/// Total drain current per unit width: thermionic plus tunneling, A m^-1.
pub fn drain_current(v_mos: f64, p: &TransportParams) -> f64 {
    tob_current(v_mos, p) + tunnel_current(v_mos, p)
}

/// Precomputed `v_mos -> ln I` lookup with linear interpolation.
///
/// Stochastic traces evaluate the channel current at every recorded sample;
/// the table amortizes the quadratures to one build per bias sweep. Queries
/// outside the build range extrapolate with the edge slope, which stays
/// accurate because `ln I` is close to linear in both tails.
#[derive(Debug, Clone)]
pub struct CurrentTable {
    v_lo: f64,
    step: f64,
    ln_i: Vec<f64>,
}

impl CurrentTable {
    /// Tabulate [`drain_current`] on `n + 1` uniform points over
    /// `[v_lo, v_hi]`. Requires a positive drain bias so the current is
    /// strictly positive and `ln I` is defined everywhere.
    pub fn build(p: &TransportParams, v_lo: f64, v_hi: f64, n: usize) -> Result<CurrentTable> {
        p.validate()?;
        if !(v_hi > v_lo) || n < 2 {
            return Err(DeviceError::InvalidConfig(
                "current table needs v_hi > v_lo and at least 2 intervals".into(),
            ));
        }
        let step = (v_hi - v_lo) / n as f64;
        let mut ln_i = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let current = drain_current(v_lo + i as f64 * step, p);
            if !(current > 0.0) || !current.is_finite() {
                return Err(DeviceError::InvalidConfig(format!(
                    "drain current must be finite and > 0 to tabulate ln I (got {current} \
                     at v_mos = {}); is the drain bias positive?",
                    v_lo + i as f64 * step
                )));
            }
            ln_i.push(current.ln());
        }
        Ok(CurrentTable { v_lo, step, ln_i })
    }

    /// Interpolated drain current at `v_mos`, A m^-1.
    pub fn eval(&self, v_mos: f64) -> f64 {
        let n = self.ln_i.len() - 1;
        let s = (v_mos - self.v_lo) / self.step;
        let i = (s.floor().max(0.0) as usize).min(n - 1);
        // frac leaves [0, 1] outside the grid: edge-segment extrapolation.
        let frac = s - i as f64;
        (self.ln_i[i] + frac * (self.ln_i[i + 1] - self.ln_i[i])).exp()
    }
}
