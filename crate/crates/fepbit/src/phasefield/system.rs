//! System assembly: domains, gate-stack geometry, depolarization.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{LandauSet, NoiseConfig, PhaseFieldError, Result};
use crate::constants::VACUUM_PERMITTIVITY;
use crate::rngstream::labeled_stream;

/// One polarization domain: its Landau set plus kinetic viscosity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub landau: LandauSet,
    /// Viscosity (inverse mobility) mu, Ohm m.
    pub mu: f64,
}

impl DomainParams {
    pub fn validate(&self) -> Result<()> {
        self.landau.validate()?;
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(PhaseFieldError::InvalidConfig("mu must be > 0".into()));
        }
        Ok(())
    }
}

/// Gate-stack geometry and screening parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackGeometry {
    /// Ferroelectric film thickness h, m.
    pub fe_thickness: f64,
    /// Electrode screening lengths (already normalized by eps0), m.
    pub lambda1: f64,
    pub lambda2: f64,
    /// Background (non-switching) relative permittivity of the film.
    pub eps_background: f64,
    /// Interfacial SiO2 thickness, m, and relative permittivity.
    pub sio2_thickness: f64,
    pub eps_sio2: f64,
    /// Effective semiconductor capacitor thickness, m, and permittivity.
    pub si_thickness: f64,
    pub eps_si: f64,
}

impl Default for StackGeometry {
    fn default() -> Self {
        StackGeometry {
            fe_thickness: 6.0e-9,
            lambda1: 0.05e-10,
            lambda2: 2.5e-10,
            eps_background: 30.0,
            sio2_thickness: 2.0e-9,
            eps_sio2: 3.9,
            si_thickness: 1.3e-8,
            eps_si: 11.7,
        }
    }
}

impl StackGeometry {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.fe_thickness,
            self.eps_background,
            self.sio2_thickness,
            self.eps_sio2,
            self.si_thickness,
            self.eps_si,
        ];
        if all.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(PhaseFieldError::InvalidConfig(
                "stack thicknesses and permittivities must be finite and > 0".into(),
            ));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(PhaseFieldError::InvalidConfig(
                "screening lengths must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Depolarization field from incomplete electrode screening, V m^-1.
///
/// `E_dep = (l1 + l2) / (eps0 * (h + (l1 + l2) * eps_b)) * p_mean`; the
/// integrator subtracts it from the drive so it always opposes the mean
/// polarization. Proportional to `p_mean`, vanishing for ideal electrodes
/// (`l1 = l2 = 0`).
#[inline]
pub fn depolarization_field(p_mean: f64, stack: &StackGeometry) -> f64 {
    let lsum = stack.lambda1 + stack.lambda2;
    lsum / (VACUUM_PERMITTIVITY * (stack.fe_thickness + lsum * stack.eps_background)) * p_mean
}

/// Instantaneous state of the domain chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeState {
    /// Per-domain polarization, C m^-2.
    pub p: Vec<f64>,
    /// Elapsed time, s.
    pub time: f64,
}

impl FeState {
    pub fn p_mean(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }
}

/// Full configuration of one domain-chain simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeSystemConfig {
    pub domains: Vec<DomainParams>,
    /// Exchange coupling G0, m^3 F^-1.
    pub coupling_g0: f64,
    /// Grid spacing of the domain chain, m.
    pub grid_spacing_dx: f64,
    pub stack: StackGeometry,
    pub noise: NoiseConfig,
    /// Whether the screening depolarization field enters the dynamics.
    ///
    /// Off by default: with the default screening lengths the term is
    /// strong enough to close the zero-field double well, which is not how
    /// the film is observed to behave; enable it to study that collapse.
    pub include_depolarization: bool,
}

impl FeSystemConfig {
    /// Single-domain system with everything else at defaults.
    pub fn single(landau: LandauSet, mu: f64) -> Self {
        FeSystemConfig {
            domains: vec![DomainParams { landau, mu }],
            coupling_g0: 1.0e-7,
            grid_spacing_dx: 1.0e-8,
            stack: StackGeometry::default(),
            noise: NoiseConfig::default(),
            include_depolarization: false,
        }
    }

    pub fn n_domains(&self) -> usize {
        self.domains.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.domains.is_empty() {
            return Err(PhaseFieldError::InvalidConfig(
                "at least one domain is required".into(),
            ));
        }
        for d in &self.domains {
            d.validate()?;
        }
        if !(self.coupling_g0 >= 0.0) || !self.coupling_g0.is_finite() {
            return Err(PhaseFieldError::InvalidConfig(
                "coupling_g0 must be finite and >= 0".into(),
            ));
        }
        if !(self.grid_spacing_dx > 0.0) {
            return Err(PhaseFieldError::InvalidConfig(
                "grid_spacing_dx must be > 0".into(),
            ));
        }
        self.stack.validate()?;
        self.noise.validate()
    }
}

/// `n` identical domains.
pub fn uniform_domains(landau: LandauSet, mu: f64, n: usize) -> Vec<DomainParams> {
    vec![DomainParams { landau, mu }; n]
}

/// Gaussian-sampled per-domain parameters around a base set.
///
/// Each of `alpha0`, `alpha11`, `alpha111`, `mu` is drawn as
/// `base * (1 + sigma_fraction * z)` with independent standard normals. A
/// draw that flips the sign of its base value is rejected and redrawn, so
/// `alpha111` and `mu` stay positive and the well topology survives.
/// Deterministic for a given `(seed, n, sigma_fraction)`.
pub fn sample_domain_params(
    base: &LandauSet,
    base_mu: f64,
    sigma_fraction: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<DomainParams>> {
    base.validate()?;
    if !(sigma_fraction >= 0.0) || !sigma_fraction.is_finite() {
        return Err(PhaseFieldError::InvalidConfig(
            "sigma_fraction must be finite and >= 0".into(),
        ));
    }
    let mut rng = labeled_stream(seed, "domain-params", &[]);
    let mut draw = |base_val: f64| -> f64 {
        if sigma_fraction == 0.0 {
            return base_val;
        }
        loop {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = base_val * (1.0 + sigma_fraction * z);
            if v * base_val > 0.0 {
                return v;
            }
        }
    };
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(DomainParams {
            landau: LandauSet {
                alpha0: draw(base.alpha0),
                alpha11: draw(base.alpha11),
                alpha111: draw(base.alpha111),
                t_curie: base.t_curie,
            },
            mu: draw(base_mu),
        });
    }
    Ok(out)
}
