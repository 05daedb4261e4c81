//! Stationary statistics of the Langevin integrator against the analytic
//! Boltzmann density. The oracle below evaluates the free energy from raw
//! coefficients on the histogram bins; it shares no code path with the
//! integrator.

use fepbit::constants::BOLTZMANN;
use fepbit::phasefield::{
    polarization_histogram, run_trajectory, DomainSelect, DriveSegment, FeSystemConfig,
    InitCondition, LandauSet,
};

// Independent free-energy evaluation for the oracle.
fn psi_oracle(p: f64, alpha1: f64, alpha11: f64, alpha111: f64, e_field: f64) -> f64 {
    let u = p * p;
    alpha1 * u + alpha11 * u * u + alpha111 * u * u * u - e_field * p
}

/// Compares empirical log-density with -v_char * W(p) / (kB T) + const on
/// every bin holding at least `min_count` samples. The additive constant is
/// fixed by least squares; errors are measured relative to the spread of the
/// analytic log-density over the qualifying bins.
fn max_relative_log_density_error(
    cfg: &FeSystemConfig,
    e_field: f64,
    steps: u64,
    n_bins: usize,
    min_count: u64,
) -> f64 {
    let duration = steps as f64 * cfg.noise.dt;
    let traj = run_trajectory(
        cfg,
        &[DriveSegment {
            duration,
            gate: e_field,
        }],
        &InitCondition::OppositeSp,
        1,
        0,
    )
    .unwrap();
    let hist = polarization_histogram(&traj, DomainSelect::Index(0), n_bins, 0.1, None).unwrap();

    let d = &cfg.domains[0];
    let a1 = d.landau.alpha0 * (d.landau.t_curie - cfg.noise.temperature) / d.landau.t_curie;
    let beta_v = cfg.noise.v_char / (BOLTZMANN * cfg.noise.temperature);

    let mut emp = Vec::new();
    let mut model = Vec::new();
    for i in 0..hist.n_bins() {
        if hist.counts[i] >= min_count {
            emp.push(hist.density[i].ln());
            let p = hist.bin_center(i);
            model.push(
                -beta_v * psi_oracle(p, a1, d.landau.alpha11, d.landau.alpha111, e_field),
            );
        }
    }
    assert!(
        emp.len() >= 5,
        "need several well-populated bins, got {}",
        emp.len()
    );
    let offset = emp
        .iter()
        .zip(&model)
        .map(|(e, m)| e - m)
        .sum::<f64>()
        / emp.len() as f64;
    let spread = model
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        - model.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread > 0.5, "analytic spread too flat: {spread}");
    emp.iter()
        .zip(&model)
        .map(|(e, m)| (e - (m + offset)).abs() / spread)
        .fold(0.0, f64::max)
}

#[test]
fn zero_field_density_is_boltzmann() {
    let mut cfg = FeSystemConfig::single(LandauSet::fe1(), 10.0);
    cfg.noise.seed = 2024;
    let err = max_relative_log_density_error(&cfg, 0.0, 200_000, 50, 1000);
    assert!(
        err < 0.2,
        "log-density deviates from Boltzmann by {err:.3} of the spread"
    );
}

#[test]
fn field_tilts_the_density() {
    let mut cfg = FeSystemConfig::single(LandauSet::fe1(), 10.0);
    cfg.noise.seed = 31;
    let err = max_relative_log_density_error(&cfg, 3.0e8, 200_000, 50, 1000);
    assert!(
        err < 0.2,
        "tilted log-density deviates from Boltzmann by {err:.3} of the spread"
    );

    // The tilted run should put most weight at positive polarization.
    let traj = run_trajectory(
        &cfg,
        &[DriveSegment {
            duration: 200_000.0 * cfg.noise.dt,
            gate: 3.0e8,
        }],
        &InitCondition::OppositeSp,
        1,
        0,
    )
    .unwrap();
    let series = traj.domain_series(0);
    let start = traj.burn_in_index(0.1);
    let frac_pos = series[start..].iter().filter(|p| **p > 0.0).count() as f64
        / (series.len() - start) as f64;
    assert!(frac_pos > 0.6, "field of 3e8 V/m should bias p > 0: {frac_pos}");
}

#[test]
fn stiffer_set_fluctuates_less() {
    let mut cfg1 = FeSystemConfig::single(LandauSet::fe1(), 10.0);
    cfg1.noise.seed = 5;
    let mut cfg2 = FeSystemConfig::single(LandauSet::fe2(), 10.0);
    cfg2.noise.seed = 5;
    let std_of = |cfg: &FeSystemConfig| {
        let traj = run_trajectory(
            cfg,
            &[DriveSegment {
                duration: 100_000.0 * cfg.noise.dt,
                gate: 8.0e8,
            }],
            &InitCondition::OppositeSp,
            1,
            0,
        )
        .unwrap();
        let s = traj.domain_series(0);
        let start = traj.burn_in_index(0.1);
        let kept = &s[start..];
        let mean = kept.iter().sum::<f64>() / kept.len() as f64;
        (kept.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / kept.len() as f64).sqrt()
    };
    let s1 = std_of(&cfg1);
    let s2 = std_of(&cfg2);
    assert!(
        s1 > 1.1 * s2,
        "soft set should fluctuate above the stiff one: {s1:.3e} vs {s2:.3e}"
    );
}
