//! From fluctuating drain current to probabilistic bits.
//!
//! A load resistor converts the device current to a voltage which an ideal
//! comparator binarizes; the fraction of time the output sits above the
//! threshold is the bit's probability. Sweeping the gate bias and fitting
//! the probabilities with a sigmoid yields the p-curve that characterizes
//! the p-bit.

use serde::{Deserialize, Serialize};

use crate::device::{iv_stochastic, BiasProtocol, DeviceError, FefetConfig};

#[derive(Debug, thiserror::Error)]
pub enum PbitError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no sigmoid fit available: {0}")]
    NoFit(String),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

pub type Result<T> = std::result::Result<T, PbitError>;

/// Load resistor plus comparator that binarizes the drain current.
///
/// The comparator itself is ideal; the only physics kept from the
/// two-inverter readout is the threshold voltage. Currents are per unit
/// width, so the conversion to volts goes through the device width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChain {
    /// Load resistance, Ohm.
    pub r_load: f64,
    /// Supply rail, V.
    pub v_dd: f64,
    /// Comparator threshold, V.
    pub v_th: f64,
    /// Device width multiplying the per-width current, m.
    pub width: f64,
}

impl Default for ThresholdChain {
    fn default() -> Self {
        // v_th = v_dd / 2 and a load that puts the equivalent current
        // threshold at 1e-4 A m^-1 for a 1 um device.
        ThresholdChain {
            r_load: 4.0e9,
            v_dd: 0.8,
            v_th: 0.4,
            width: 1.0e-6,
        }
    }
}

impl ThresholdChain {
    /// Same rails, load picked so the current threshold is `i_th` (A m^-1).
    pub fn for_current_threshold(i_th: f64) -> Result<Self> {
        if !(i_th > 0.0) || !i_th.is_finite() {
            return Err(PbitError::InvalidInput(
                "current threshold must be finite and > 0".into(),
            ));
        }
        let mut chain = ThresholdChain::default();
        chain.r_load = chain.v_th / (i_th * chain.width);
        Ok(chain)
    }

    /// Per-width current at which the comparator flips, A m^-1.
    pub fn current_threshold(&self) -> f64 {
        self.v_th / (self.r_load * self.width)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_load > 0.0) || !(self.width > 0.0) {
            return Err(PbitError::InvalidInput(
                "r_load and width must be > 0".into(),
            ));
        }
        if !(self.v_th > 0.0 && self.v_th < self.v_dd) {
            return Err(PbitError::InvalidInput(
                "need 0 < v_th < v_dd".into(),
            ));
        }
        Ok(())
    }
}

/// Binarize a per-width current series: 1 where `I * width * r_load` clears
/// `v_th`, 0 otherwise. Exact ties resolve to 0.
pub fn threshold_bitstream(current: &[f64], chain: &ThresholdChain) -> Vec<bool> {
    let i_th = chain.current_threshold();
    current.iter().map(|&i| i > i_th).collect()
}

/// Probability estimate with its Wilson 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    /// Plain fraction of ones.
    pub p: f64,
    /// Wilson-score 95% half-width.
    pub ci95: f64,
    pub n: usize,
}

/// Fraction of ones plus a Wilson 95% interval half-width.
///
/// The Wilson score stays positive and inside `[0, 1]` even for all-zero or
/// all-one streams, where the naive normal interval collapses.
pub fn probability(bits: &[bool]) -> ProbEstimate {
    assert!(!bits.is_empty(), "probability of an empty bitstream");
    let n = bits.len();
    let p = bits.iter().filter(|&&b| b).count() as f64 / n as f64;
    let z = 1.959963984540054_f64;
    let z2n = z * z / n as f64;
    let half = z * (p * (1.0 - p) / n as f64 + z2n / (4.0 * n as f64)).sqrt() / (1.0 + z2n);
    ProbEstimate { p, ci95: half, n }
}

/// Fitted sigmoid `p(v) = 1 / (1 + exp(-k (v - v0)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFit {
    /// Half-probability bias, V.
    pub v0: f64,
    /// Slope, V^-1; always > 0.
    pub k: f64,
}

impl SigmoidFit {
    pub fn eval(&self, v: f64) -> f64 {
        1.0 / (1.0 + (-self.k * (v - self.v0)).exp())
    }
}

/// One sampled point of a p-curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PCurvePoint {
    /// Gate bias, V.
    pub v: f64,
    /// Above-threshold probability.
    pub p: f64,
    /// Samples behind the estimate.
    pub n: usize,
}

/// Sampled probabilities versus gate bias, with the sigmoid fit when one
/// exists. A noise-free device produces an exact step, which has no finite
/// slope: `fit` and `r2` stay `None` and the points speak for themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PCurve {
    pub points: Vec<PCurvePoint>,
    pub fit: Option<SigmoidFit>,
    pub r2: Option<f64>,
}

/// Nonlinear least-squares sigmoid fit of `(v, p)` points.
///
/// Initialized by linear regression of the logit of probabilities clipped
/// to `[1/(n+1), 1 - 1/(n+1)]`, then refined by damped Gauss-Newton in
/// `(v0, ln k)`, which keeps the slope positive. Returns `None` when the
/// points carry no slope information: fewer than two distinct biases, no
/// strictly interior probability, or a non-positive initial slope.
pub fn sigmoid_fit(points: &[PCurvePoint]) -> Option<(SigmoidFit, f64)> {
    let interior = points.iter().any(|pt| pt.p > 0.0 && pt.p < 1.0);
    let distinct_v = points
        .windows(2)
        .any(|w| (w[0].v - w[1].v).abs() > 0.0);
    if points.len() < 2 || !interior || !distinct_v {
        return None;
    }
    // Logit-space linear init.
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for pt in points {
        let clip = 1.0 / (pt.n.max(2) as f64 + 1.0);
        let p = pt.p.clamp(clip, 1.0 - clip);
        let y = (p / (1.0 - p)).ln();
        sx += pt.v;
        sy += y;
        sxx += pt.v * pt.v;
        sxy += pt.v * y;
    }
    let m = points.len() as f64;
    let denom = m * sxx - sx * sx;
    if denom <= 0.0 {
        return None;
    }
    let slope = (m * sxy - sx * sy) / denom;
    if !(slope > 0.0) || !slope.is_finite() {
        return None;
    }
    let intercept = (sy - slope * sx) / m;
    let mut v0 = -intercept / slope;
    let mut theta = slope.ln();

    let ssr = |v0: f64, theta: f64| {
        let k = theta.exp();
        points
            .iter()
            .map(|pt| {
                let s = 1.0 / (1.0 + (-k * (pt.v - v0)).exp());
                (pt.p - s) * (pt.p - s)
            })
            .sum::<f64>()
    };
    let mut best = ssr(v0, theta);
    for _ in 0..200 {
        let k = theta.exp();
        // Normal equations of the 2-parameter Gauss-Newton step.
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for pt in points {
            let s = 1.0 / (1.0 + (-k * (pt.v - v0)).exp());
            let w = s * (1.0 - s);
            let j0 = -k * w;
            let j1 = k * (pt.v - v0) * w;
            let r = pt.p - s;
            a11 += j0 * j0;
            a12 += j0 * j1;
            a22 += j1 * j1;
            b1 += j0 * r;
            b2 += j1 * r;
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-30 {
            break;
        }
        let mut dv0 = (a22 * b1 - a12 * b2) / det;
        let mut dth = (a11 * b2 - a12 * b1) / det;
        // Step-halving keeps the iteration from overshooting on steep data.
        let mut improved = false;
        for _ in 0..25 {
            let cand = ssr(v0 + dv0, theta + dth);
            if cand < best {
                v0 += dv0;
                theta += dth;
                best = cand;
                improved = true;
                break;
            }
            dv0 *= 0.5;
            dth *= 0.5;
        }
        if !improved || (dv0.abs() < 1e-14 && dth.abs() < 1e-12) {
            break;
        }
    }

    let p_mean = points.iter().map(|pt| pt.p).sum::<f64>() / m;
    let ss_tot = points
        .iter()
        .map(|pt| (pt.p - p_mean) * (pt.p - p_mean))
        .sum::<f64>();
    let r2 = if ss_tot > 0.0 { 1.0 - best / ss_tot } else { 1.0 };
    Some((
        SigmoidFit {
            v0,
            k: theta.exp(),
        },
        r2,
    ))
}

/// Sample a p-curve from the device.
///
/// Runs one stochastic hold per gate level (each re-initialized at
/// `protocol.v_init`), drops `burn_in_fraction` of every hold as switching
/// transient, binarizes the rest through `chain` and fits the sigmoid.
/// Gate levels must be sorted ascending. A failed fit is not an error; the
/// points are returned with `fit: None`.
pub fn extract_pcurve(
    cfg: &FefetConfig,
    chain: &ThresholdChain,
    protocol: &BiasProtocol,
    stride: usize,
    burn_in_fraction: f64,
) -> Result<PCurve> {
    chain.validate()?;
    if !(0.0..0.95).contains(&burn_in_fraction) {
        return Err(PbitError::InvalidInput(
            "burn_in_fraction must lie in [0, 0.95)".into(),
        ));
    }
    if protocol
        .gate_levels
        .windows(2)
        .any(|w| w[1] <= w[0])
    {
        return Err(PbitError::InvalidInput(
            "gate levels must be sorted strictly ascending".into(),
        ));
    }
    let traces = iv_stochastic(cfg, protocol, stride)?;
    let points: Vec<PCurvePoint> = traces
        .iter()
        .map(|trace| {
            let burn = trace.burn_in_index(burn_in_fraction);
            let bits = threshold_bitstream(&trace.current[burn..], chain);
            let est = probability(&bits);
            PCurvePoint {
                v: trace.v_gate,
                p: est.p,
                n: est.n,
            }
        })
        .collect();
    let fit = sigmoid_fit(&points);
    Ok(PCurve {
        points,
        fit: fit.map(|(f, _)| f),
        r2: fit.map(|(_, r2)| r2),
    })
}

/// Shift a fitted curve so the half-probability point sits at 0 V.
///
/// Both the fit center and every sampled bias move by `-v0`; the slope is
/// untouched. Errors when the curve has no fit to center on.
pub fn center_pcurve(curve: &PCurve) -> Result<PCurve> {
    let fit = curve
        .fit
        .ok_or_else(|| PbitError::NoFit("cannot center a curve without a fit".into()))?;
    let points = curve
        .points
        .iter()
        .map(|pt| PCurvePoint {
            v: pt.v - fit.v0,
            ..*pt
        })
        .collect();
    Ok(PCurve {
        points,
        fit: Some(SigmoidFit { v0: 0.0, k: fit.k }),
        r2: curve.r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::stochastic_trace;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn threshold_chain_defaults_are_consistent() {
        let chain = ThresholdChain::default();
        chain.validate().unwrap();
        assert_relative_eq!(chain.current_threshold(), 1.0e-4, max_relative = 1e-12);
        let custom = ThresholdChain::for_current_threshold(3.0e-5).unwrap();
        assert_relative_eq!(custom.current_threshold(), 3.0e-5, max_relative = 1e-12);
    }

    #[test]
    fn bitstream_thresholds_strictly() {
        let chain = ThresholdChain::default();
        let i_th = chain.current_threshold();
        let bits = threshold_bitstream(&[i_th / 2.0, 2.0 * i_th, i_th, 3.0 * i_th], &chain);
        assert_eq!(bits, vec![false, true, false, true]);
        assert!(threshold_bitstream(&[0.0; 5], &chain).iter().all(|b| !b));
    }

    #[test]
    fn probability_counts_and_wilson_width() {
        let est = probability(&[true, false, true, true]);
        assert_eq!(est.p, 0.75);
        assert_eq!(est.n, 4);
        // Frozen Wilson half-width at p = 0.5, n = 100.
        let bits: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
        let est = probability(&bits);
        assert_eq!(est.p, 0.5);
        assert_relative_eq!(est.ci95, 0.096168, max_relative = 1e-3);
        // Degenerate streams still get a usable interval.
        let zeros = probability(&vec![false; 1000]);
        assert!(zeros.ci95 > 0.0 && zeros.ci95 < 0.01);
    }

    #[test]
    #[should_panic(expected = "empty bitstream")]
    fn probability_rejects_empty_input() {
        probability(&[]);
    }

    #[test]
    fn probability_matches_a_bernoulli_oracle() {
        let mut rng = crate::rngstream::labeled_stream(42, "pbit-bernoulli", &[]);
        let bits: Vec<bool> = (0..100_000).map(|_| rng.gen::<f64>() < 0.3).collect();
        let est = probability(&bits);
        assert!((est.p - 0.3).abs() < 0.01, "p = {}", est.p);
        assert!((est.p - 0.3).abs() < 3.0 * est.ci95);
    }

    #[test]
    fn recount_oracle_on_a_device_trace() {
        let cfg = FefetConfig::default();
        let protocol = BiasProtocol {
            init_duration: 4.0e-9,
            hold_duration: 2.0e-7,
            ..BiasProtocol::default()
        };
        let trace = stochastic_trace(&cfg, &protocol, 0.0, 10, 0).unwrap();
        let chain = ThresholdChain::default();
        let bits = threshold_bitstream(&trace.current, &chain);
        let est = probability(&bits);
        // Independent recount straight off the current samples.
        let i_th = chain.current_threshold();
        let recount = trace.current.iter().filter(|&&i| i > i_th).count();
        assert_eq!(est.p, recount as f64 / trace.current.len() as f64);
    }

    #[test]
    fn sigmoid_fit_recovers_exact_parameters() {
        let truth = SigmoidFit { v0: 0.03, k: 25.0 };
        let points: Vec<PCurvePoint> = (0..21)
            .map(|i| {
                let v = -0.2 + 0.02 * i as f64;
                PCurvePoint {
                    v,
                    p: truth.eval(v),
                    n: 10_000,
                }
            })
            .collect();
        let (fit, r2) = sigmoid_fit(&points).unwrap();
        assert_relative_eq!(fit.v0, truth.v0, max_relative = 1e-6);
        assert_relative_eq!(fit.k, truth.k, max_relative = 1e-6);
        assert!(r2 > 0.999999);
    }

    #[test]
    fn sigmoid_fit_handles_noisy_monotone_points() {
        let truth = SigmoidFit { v0: -0.01, k: 18.0 };
        let points: Vec<PCurvePoint> = (0..25)
            .map(|i| {
                let v = -0.25 + 0.02 * i as f64;
                let wiggle = 0.02 * ((i * 7 % 5) as f64 / 2.0 - 1.0);
                PCurvePoint {
                    v,
                    p: (truth.eval(v) + wiggle).clamp(0.0, 1.0),
                    n: 5000,
                }
            })
            .collect();
        let (fit, r2) = sigmoid_fit(&points).unwrap();
        assert!(r2 >= 0.98, "r2 = {r2}");
        assert_relative_eq!(fit.k, truth.k, max_relative = 0.15);
    }

    #[test]
    fn step_points_fit_to_none() {
        let points: Vec<PCurvePoint> = (0..10)
            .map(|i| PCurvePoint {
                v: i as f64 * 0.1,
                p: if i < 5 { 0.0 } else { 1.0 },
                n: 1000,
            })
            .collect();
        assert!(sigmoid_fit(&points).is_none());
        assert!(sigmoid_fit(&points[..1]).is_none());
    }

    #[test]
    fn centering_moves_the_half_point_to_zero() {
        let fit = SigmoidFit { v0: 0.07, k: 30.0 };
        let curve = PCurve {
            points: vec![
                PCurvePoint { v: 0.0, p: 0.1, n: 100 },
                PCurvePoint { v: 0.14, p: 0.9, n: 100 },
            ],
            fit: Some(fit),
            r2: Some(0.99),
        };
        let centered = center_pcurve(&curve).unwrap();
        let cfit = centered.fit.unwrap();
        assert_eq!(cfit.v0, 0.0);
        assert_eq!(cfit.k, fit.k);
        assert_relative_eq!(cfit.eval(0.0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(centered.points[0].v, -0.07, max_relative = 1e-12);
        // Idempotent.
        let twice = center_pcurve(&centered).unwrap();
        assert_eq!(twice.points, centered.points);
        // No fit, no centering.
        let bare = PCurve {
            points: vec![],
            fit: None,
            r2: None,
        };
        assert!(center_pcurve(&bare).is_err());
    }

    #[test]
    fn noise_free_pcurve_is_an_exact_step() {
        let mut cfg = FefetConfig::default();
        cfg.fe.noise.enabled = false;
        let protocol = BiasProtocol {
            init_duration: 4.0e-9,
            hold_duration: 2.0e-7,
            ..BiasProtocol::default()
        }
        .with_staircase(-0.2, 0.2, 9);
        let curve =
            extract_pcurve(&cfg, &ThresholdChain::default(), &protocol, 20, 0.5).unwrap();
        assert!(curve.fit.is_none());
        assert!(curve.points.iter().all(|pt| pt.p == 0.0 || pt.p == 1.0));
        let jumps = curve
            .points
            .windows(2)
            .filter(|w| w[0].p != w[1].p)
            .count();
        assert_eq!(jumps, 1, "expected a single clean step");
    }

    #[test]
    fn pcurve_rejects_unsorted_levels() {
        let cfg = FefetConfig::default();
        let mut protocol = BiasProtocol::default();
        protocol.gate_levels = vec![0.1, 0.0, 0.2];
        let err =
            extract_pcurve(&cfg, &ThresholdChain::default(), &protocol, 10, 0.1).unwrap_err();
        assert!(err.to_string().contains("ascending"));
    }

    proptest! {
        #[test]
        fn probability_invariant_under_chain_rescale(
            scale in 1.0e-3..1.0e3_f64,
            currents in proptest::collection::vec(0.0..1.0e-2_f64, 1..200),
        ) {
            let base = ThresholdChain::default();
            let scaled = ThresholdChain {
                r_load: base.r_load * scale,
                v_th: base.v_th * scale,
                ..base
            };
            prop_assert_eq!(
                threshold_bitstream(&currents, &base),
                threshold_bitstream(&currents, &scaled)
            );
        }
    }
}
