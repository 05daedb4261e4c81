//! Stochastic relaxation of a spin network driven by p-bit responses.
//!
//! One sweep visits every unclamped bit and redraws it from its response
//! to the local field `i0 * (h_i + sum_j j_ij s_j)`. Sequential sweeps with
//! the ideal tanh response sample the Boltzmann distribution of the circuit
//! energy at inverse temperature `2 * i0`; steeper responses trade mixing
//! speed for sharper localization on the ground states.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::pbit::PCurve;
use crate::rngstream::labeled_stream;

use super::circuit::{compose_multiplier, IsingCircuit, UpdateOrder};
use super::{IlNetworkError, Result};

/// How a p-bit's mean output depends on its input.
#[derive(Debug, Clone, PartialEq)]
pub enum PBitResponse {
    /// The textbook response: mean output `tanh(input)`.
    IdealTanh,
    /// A response taken from a measured probability curve. The centered
    /// sigmoid fit of slope `k` is evaluated against the reference slope
    /// `k_ref` that maps circuit current to drive voltage (`v = 2 I / k_ref`),
    /// so a curve with `k = k_ref` reproduces the ideal response and
    /// steeper curves behave like a raised gain.
    Tabulated { k: f64, k_ref: f64 },
    /// The infinite-slope limit: a deterministic sign, with an unbiased
    /// coin at exactly zero input.
    HardThreshold,
}

/// Reference slope used when a measured curve is mapped onto the ideal
/// response; the tanh mean `2 sigma(2I) - 1` corresponds to a centered
/// sigmoid of slope 2 in the drive voltage.
pub const DEFAULT_K_REF: f64 = 2.0;

impl PBitResponse {
    /// Build a tabulated response from a measured probability curve.
    /// The curve must carry a sigmoid fit and be monotone in the drive.
    pub fn from_pcurve(curve: &PCurve, k_ref: f64) -> Result<Self> {
        if !(k_ref.is_finite() && k_ref > 0.0) {
            return Err(IlNetworkError::InvalidInput(format!(
                "reference slope must be positive, got {k_ref}"
            )));
        }
        let fit = curve.fit.as_ref().ok_or_else(|| {
            IlNetworkError::InvalidInput(
                "probability curve carries no sigmoid fit; cannot tabulate a response".into(),
            )
        })?;
        if !(fit.k.is_finite() && fit.k > 0.0) {
            return Err(IlNetworkError::InvalidInput(format!(
                "fitted slope must be positive, got {}",
                fit.k
            )));
        }
        // Sampling noise aside, the measured points must rise with drive.
        for w in curve.points.windows(2) {
            if w[1].p < w[0].p - 0.05 {
                return Err(IlNetworkError::InvalidInput(format!(
                    "probability curve is not monotone: p drops from {} to {} between v={} and v={}",
                    w[0].p, w[1].p, w[0].v, w[1].v
                )));
            }
        }
        Ok(PBitResponse::Tabulated { k: fit.k, k_ref })
    }

    /// Mean spin output for a given input, in [-1, 1].
    pub fn mean(&self, input: f64) -> f64 {
        match self {
            PBitResponse::IdealTanh => input.tanh(),
            PBitResponse::Tabulated { k, k_ref } => (input * k / k_ref).tanh(),
            PBitResponse::HardThreshold => {
                if input > 0.0 {
                    1.0
                } else if input < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Draw one p-bit output: `sgn(u + mean(input))` with `u` uniform on (-1, 1).
/// The mean fixes the probability of +1 at `(1 + mean) / 2`; for the ideal
/// response this is the logistic `1 / (1 + exp(-2 input))`.
pub fn pbit_update<R: Rng + ?Sized>(input: f64, response: &PBitResponse, rng: &mut R) -> i8 {
    let m = response.mean(input);
    let u: f64 = rng.gen_range(-1.0..1.0);
    if u + m > 0.0 {
        1
    } else {
        -1
    }
}

struct SweepEngine {
    neighbors: Vec<Vec<(usize, f64)>>,
    h: Vec<f64>,
    i0: f64,
    free: Vec<usize>,
    shuffle: bool,
}

impl SweepEngine {
    fn new(c: &IsingCircuit) -> Self {
        let n = c.n_bits();
        let neighbors = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&k| k != i && c.j[i][k] != 0.0)
                    .map(|k| (k, c.j[i][k]))
                    .collect()
            })
            .collect();
        SweepEngine {
            neighbors,
            h: c.h.clone(),
            i0: c.i0,
            free: (0..n).filter(|i| !c.clamps.contains_key(i)).collect(),
            shuffle: c.update_order == UpdateOrder::Shuffled,
        }
    }

    fn sweep(
        &self,
        state: &mut [i8],
        response: &PBitResponse,
        rng: &mut ChaCha8Rng,
        order: &mut Vec<usize>,
    ) {
        order.clear();
        order.extend_from_slice(&self.free);
        if self.shuffle {
            order.shuffle(rng);
        }
        for &i in order.iter() {
            let mut field = self.h[i];
            for &(k, jik) in &self.neighbors[i] {
                field += jik * state[k] as f64;
            }
            state[i] = pbit_update(self.i0 * field, response, rng);
        }
    }
}

/// Redraw every unclamped bit of `state` once, in the circuit's update
/// order. Clamped bits are left untouched.
pub fn sweep(
    circuit: &IsingCircuit,
    state: &mut [i8],
    response: &PBitResponse,
    rng: &mut ChaCha8Rng,
) {
    assert_eq!(state.len(), circuit.n_bits(), "state width mismatch");
    let engine = SweepEngine::new(circuit);
    let mut order = Vec::new();
    engine.sweep(state, response, rng, &mut order);
}

/// Visit counts of decoded `(a, b)` pairs after burn-in.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolutionHistogram {
    pub counts: BTreeMap<(u64, u64), u64>,
    /// Pairs considered correct for accuracy accounting (e.g. the factor
    /// pairs of the clamped product). May be empty.
    pub correct: BTreeSet<(u64, u64)>,
    pub total_sweeps: u64,
}

impl SolutionHistogram {
    pub fn record(&mut self, a: u64, b: u64) {
        *self.counts.entry((a, b)).or_insert(0) += 1;
        self.total_sweeps += 1;
    }

    /// Fraction of recorded sweeps that decoded to a correct pair.
    pub fn accuracy(&self) -> f64 {
        if self.total_sweeps == 0 {
            return 0.0;
        }
        let hits: u64 = self
            .correct
            .iter()
            .filter_map(|key| self.counts.get(key))
            .sum();
        hits as f64 / self.total_sweeps as f64
    }

    /// Entries sorted by count (descending), ties broken by key.
    pub fn top(&self, k: usize) -> Vec<((u64, u64), u64)> {
        let mut all: Vec<((u64, u64), u64)> =
            self.counts.iter().map(|(&key, &c)| (key, c)).collect();
        all.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        all.truncate(k);
        all
    }

    pub fn probability(&self, a: u64, b: u64) -> f64 {
        if self.total_sweeps == 0 {
            return 0.0;
        }
        *self.counts.get(&(a, b)).unwrap_or(&0) as f64 / self.total_sweeps as f64
    }
}

/// Result of relaxing a network: the solution histogram plus the final
/// spin state, which basin diagnostics need.
#[derive(Debug, Clone)]
pub struct NetworkRun {
    pub histogram: SolutionHistogram,
    pub final_state: Vec<i8>,
}

/// Relax the circuit for `n_sweeps` sweeps, tallying decoded `(a, b)` pairs
/// after the first `burn_in` sweeps. Unclamped bits start from fair coins
/// drawn from the seeded stream unless `initial_state` overrides them;
/// clamped bits always hold their clamp value.
pub fn run_network(
    circuit: &IsingCircuit,
    response: &PBitResponse,
    n_sweeps: u64,
    burn_in: u64,
    seed: u64,
    initial_state: Option<&[i8]>,
) -> Result<NetworkRun> {
    let n = circuit.n_bits();
    if n == 0 {
        return Err(IlNetworkError::InvalidInput("circuit has no bits".into()));
    }
    if n_sweeps == 0 || burn_in >= n_sweeps {
        return Err(IlNetworkError::InvalidInput(format!(
            "need burn_in < n_sweeps, got {burn_in} / {n_sweeps}"
        )));
    }
    if !(circuit.i0.is_finite() && circuit.i0 >= 0.0) {
        return Err(IlNetworkError::InvalidInput(format!(
            "input gain i0 must be non-negative, got {}",
            circuit.i0
        )));
    }
    for (&bit, _) in circuit.clamps.iter() {
        if bit >= n {
            return Err(IlNetworkError::InvalidInput(format!(
                "clamp on bit {bit} outside circuit of {n} bits"
            )));
        }
    }

    let mut rng = labeled_stream(seed, "ilnetwork", &[]);
    let mut state = vec![0i8; n];
    match initial_state {
        Some(init) => {
            if init.len() != n || init.iter().any(|&v| v != 1 && v != -1) {
                return Err(IlNetworkError::InvalidInput(
                    "initial state must assign +1 or -1 to every bit".into(),
                ));
            }
            state.copy_from_slice(init);
        }
        None => {
            for s in state.iter_mut() {
                *s = if rng.gen::<bool>() { 1 } else { -1 };
            }
        }
    }
    for (&bit, &v) in circuit.clamps.iter() {
        state[bit] = v;
    }

    let engine = SweepEngine::new(circuit);
    let mut order = Vec::with_capacity(engine.free.len());
    let mut histogram = SolutionHistogram::default();
    for sweep_idx in 0..n_sweeps {
        engine.sweep(&mut state, response, &mut rng, &mut order);
        if sweep_idx >= burn_in {
            let a = circuit.decode(&state, &circuit.decode_a);
            let b = circuit.decode(&state, &circuit.decode_b);
            histogram.record(a, b);
        }
    }
    Ok(NetworkRun {
        histogram,
        final_state: state,
    })
}

/// Factor `f` on a `bits_x` by `bits_y` multiplier: the product bits are
/// clamped to the binary digits of `f` and the network is relaxed. The
/// returned histogram's correct set holds every in-range factor pair.
#[allow(clippy::too_many_arguments)]
pub fn factorize(
    f: u64,
    bits_x: usize,
    bits_y: usize,
    i0: f64,
    response: &PBitResponse,
    n_sweeps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<SolutionHistogram> {
    let mut circuit = compose_multiplier(bits_x, bits_y, 1.0)?;
    let width = circuit.product_bits.len();
    if width < 64 && f >= 1u64 << width {
        return Err(IlNetworkError::InvalidInput(format!(
            "product {f} does not fit in the {width} output bits"
        )));
    }
    let product_bits = circuit.product_bits.clone();
    for (k, &bit) in product_bits.iter().enumerate() {
        circuit.clamp(bit, if (f >> k) & 1 == 1 { 1 } else { -1 })?;
    }
    circuit.i0 = i0;

    let mut run = run_network(&circuit, response, n_sweeps, burn_in, seed, None)?;
    for a in 0..1u64 << bits_x {
        for b in 0..1u64 << bits_y {
            if a * b == f {
                run.histogram.correct.insert((a, b));
            }
        }
    }
    Ok(run.histogram)
}
