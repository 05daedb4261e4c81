//! Polarization histograms of recorded trajectories.

use serde::{Deserialize, Serialize};

use super::{PhaseFieldError, Result, Trajectory};

/// Which polarization values feed the histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainSelect {
    /// Pool every domain's samples.
    Pooled,
    /// One domain by index.
    Index(usize),
}

/// Uniform-bin histogram with a probability density normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `n_bins + 1` ascending edges.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// counts / (total * bin_width); integrates to 1.
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    /// Center of the most populated bin.
    pub fn mode_center(&self) -> f64 {
        let (i, _) = self
            .counts
            .iter()
            .enumerate()
            .max_by_key(|(_, c)| **c)
            .unwrap();
        self.bin_center(i)
    }

    /// Overlap integral of two densities on identical edges, in [0, 1].
    pub fn overlap_with(&self, other: &Histogram) -> f64 {
        assert_eq!(self.bin_edges, other.bin_edges, "edges must match");
        let w = self.bin_width();
        self.density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| a.min(*b) * w)
            .sum()
    }
}

/// Histograms the post-burn-in samples of a trajectory.
///
/// `burn_in_fraction` of the leading samples are discarded. With
/// `range = None` the bins span the observed min/max of the kept samples.
pub fn polarization_histogram(
    traj: &Trajectory,
    select: DomainSelect,
    n_bins: usize,
    burn_in_fraction: f64,
    range: Option<(f64, f64)>,
) -> Result<Histogram> {
    if n_bins < 2 || !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(PhaseFieldError::BadHistogram);
    }
    if let DomainSelect::Index(i) = select {
        if i >= traj.n_domains() {
            return Err(PhaseFieldError::BadHistogram);
        }
    }
    let start = traj.burn_in_index(burn_in_fraction);
    let mut samples: Vec<f64> = Vec::new();
    for row in &traj.p[start..] {
        match select {
            DomainSelect::Pooled => samples.extend_from_slice(row),
            DomainSelect::Index(i) => samples.push(row[i]),
        }
    }
    if samples.is_empty() {
        return Err(PhaseFieldError::BadHistogram);
    }

    let (mut lo, mut hi) = match range {
        Some((lo, hi)) => (lo, hi),
        None => {
            let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    if !(hi > lo) {
        // Degenerate (e.g. noiseless settled run): widen around the value.
        let pad = lo.abs().max(1e-6) * 1e-3;
        lo -= pad;
        hi += pad;
    }

    let width = (hi - lo) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; n_bins];
    for &s in &samples {
        if s < lo || s > hi {
            continue;
        }
        let mut idx = ((s - lo) / width) as usize;
        if idx >= n_bins {
            idx = n_bins - 1; // s == hi lands in the last bin
        }
        counts[idx] += 1;
    }
    let total: u64 = counts.iter().sum();
    let density = counts
        .iter()
        .map(|c| *c as f64 / (total as f64 * width))
        .collect();
    Ok(Histogram {
        bin_edges: edges,
        counts,
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasefield::{
        run_trajectory, DriveSegment, FeSystemConfig, InitCondition, LandauSet,
    };
    use approx::assert_relative_eq;

    fn short_noisy_traj() -> Trajectory {
        let mut cfg = FeSystemConfig::single(LandauSet::fe1(), 10.0);
        cfg.noise.seed = 11;
        run_trajectory(
            &cfg,
            &[DriveSegment {
                duration: 4.0e-7,
                gate: 0.0,
            }],
            &InitCondition::OppositeSp,
            1,
            0,
        )
        .unwrap()
    }

    #[test]
    fn density_integrates_to_one() {
        let traj = short_noisy_traj();
        let h = polarization_histogram(&traj, DomainSelect::Pooled, 40, 0.1, None).unwrap();
        let integral: f64 = h.density.iter().map(|d| d * h.bin_width()).sum();
        assert_relative_eq!(integral, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn counts_match_kept_samples() {
        let traj = short_noisy_traj();
        let h = polarization_histogram(&traj, DomainSelect::Pooled, 40, 0.1, None).unwrap();
        let kept = traj.times.len() - traj.burn_in_index(0.1);
        assert_eq!(h.total(), kept as u64);
    }

    #[test]
    fn explicit_range_drops_outliers() {
        let traj = short_noisy_traj();
        let h =
            polarization_histogram(&traj, DomainSelect::Pooled, 10, 0.0, Some((-0.05, 0.05)))
                .unwrap();
        assert!(h.total() < traj.times.len() as u64);
        assert_eq!(h.bin_edges[0], -0.05);
        assert_eq!(*h.bin_edges.last().unwrap(), 0.05);
    }

    #[test]
    fn rejects_bad_arguments() {
        let traj = short_noisy_traj();
        assert!(polarization_histogram(&traj, DomainSelect::Pooled, 1, 0.1, None).is_err());
        assert!(polarization_histogram(&traj, DomainSelect::Index(3), 10, 0.1, None).is_err());
        assert!(polarization_histogram(&traj, DomainSelect::Pooled, 10, 1.0, None).is_err());
    }

    #[test]
    fn degenerate_settled_run_gets_single_spike() {
        let mut cfg = FeSystemConfig::single(LandauSet::fe1(), 10.0);
        cfg.noise.enabled = false;
        let traj = run_trajectory(
            &cfg,
            &[DriveSegment {
                duration: 2.0e-7,
                gate: 0.0,
            }],
            &InitCondition::OppositeSp,
            100,
            0,
        )
        .unwrap();
        let h = polarization_histogram(&traj, DomainSelect::Index(0), 5, 0.5, None).unwrap();
        assert!(h.total() > 0);
    }
}
