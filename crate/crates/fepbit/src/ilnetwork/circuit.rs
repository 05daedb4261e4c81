//! Networks of Ising gates sharing bits.
//!
//! A circuit is one big coupling matrix assembled by summing gate
//! contributions at mapped indices. Shared bits (a gate output feeding the
//! next gate's input) are simply the same index, so their couplings add.

use std::collections::BTreeMap;

use super::gate::{and_gate, full_adder_gate, half_adder_gate, ising_energy, IsingGate};
use super::{IlNetworkError, Result};

/// Order in which bits are visited within one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateOrder {
    /// Ascending bit index every sweep (the default; fully deterministic
    /// given the seed).
    #[default]
    Fixed,
    /// A fresh random permutation each sweep.
    Shuffled,
}

/// A pairwise spin network with optional clamps and decode maps.
#[derive(Debug, Clone)]
pub struct IsingCircuit {
    /// Symmetric coupling matrix, zero diagonal.
    pub j: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    /// Bits pinned to a fixed sign; never updated by the dynamics.
    pub clamps: BTreeMap<usize, i8>,
    /// Bit indices of the first decoded operand, least significant first.
    pub decode_a: Vec<usize>,
    /// Bit indices of the second decoded operand, least significant first.
    pub decode_b: Vec<usize>,
    /// Bit indices of the product, least significant first.
    pub product_bits: Vec<usize>,
    pub labels: Vec<String>,
    /// Input gain applied to the local field seen by each p-bit.
    pub i0: f64,
    pub update_order: UpdateOrder,
}

impl IsingCircuit {
    /// Empty network of `n` unbiased, uncoupled bits.
    pub fn new(n: usize) -> Self {
        IsingCircuit {
            j: vec![vec![0.0; n]; n],
            h: vec![0.0; n],
            clamps: BTreeMap::new(),
            decode_a: Vec::new(),
            decode_b: Vec::new(),
            product_bits: Vec::new(),
            labels: (0..n).map(|i| format!("b{i}")).collect(),
            i0: 1.0,
            update_order: UpdateOrder::Fixed,
        }
    }

    pub fn n_bits(&self) -> usize {
        self.h.len()
    }

    /// Add a fresh bit and return its index.
    pub fn push_bit(&mut self, label: impl Into<String>) -> usize {
        let idx = self.n_bits();
        for row in self.j.iter_mut() {
            row.push(0.0);
        }
        self.j.push(vec![0.0; idx + 1]);
        self.h.push(0.0);
        self.labels.push(label.into());
        idx
    }

    /// Sum a gate's couplings into the circuit at the mapped bit indices.
    pub fn add_gate(&mut self, gate: &IsingGate, map: &[usize]) -> Result<()> {
        if map.len() != gate.n {
            return Err(IlNetworkError::InvalidInput(format!(
                "gate has {} bits but the mapping names {}",
                gate.n,
                map.len()
            )));
        }
        let n = self.n_bits();
        for &m in map {
            if m >= n {
                return Err(IlNetworkError::InvalidInput(format!(
                    "mapped index {m} outside circuit of {n} bits"
                )));
            }
        }
        let mut seen = map.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != map.len() {
            return Err(IlNetworkError::InvalidInput(
                "gate mapping repeats a bit index".into(),
            ));
        }
        for i in 0..gate.n {
            self.h[map[i]] += gate.h[i];
            for k in i + 1..gate.n {
                self.j[map[i]][map[k]] += gate.j[i][k];
                self.j[map[k]][map[i]] += gate.j[i][k];
            }
        }
        Ok(())
    }

    /// Pin a bit to a sign. Clamped bits keep their value through every sweep.
    pub fn clamp(&mut self, bit: usize, value: i8) -> Result<()> {
        if bit >= self.n_bits() {
            return Err(IlNetworkError::InvalidInput(format!(
                "clamp index {bit} outside circuit of {} bits",
                self.n_bits()
            )));
        }
        if value != 1 && value != -1 {
            return Err(IlNetworkError::InvalidInput(format!(
                "clamp value must be +1 or -1, got {value}"
            )));
        }
        self.clamps.insert(bit, value);
        Ok(())
    }

    pub fn energy(&self, state: &[i8]) -> f64 {
        assert_eq!(state.len(), self.n_bits(), "state width mismatch");
        ising_energy(&self.j, &self.h, state)
    }

    /// Decode a bit group (least significant first) into an integer.
    pub fn decode(&self, state: &[i8], bits: &[usize]) -> u64 {
        bits.iter()
            .enumerate()
            .map(|(k, &idx)| if state[idx] > 0 { 1u64 << k } else { 0 })
            .sum()
    }
}

/// Build an unclamped binary multiplier: AND gates form the partial
/// products and half/full adders compress each output column, ripple-carry
/// style. Decode maps expose the two operands and the product.
///
/// Clamping the product bits to a constant turns the network into a
/// factorizer; leaving everything free makes every correct multiplication
/// a ground state.
pub fn compose_multiplier(bits_x: usize, bits_y: usize, margin: f64) -> Result<IsingCircuit> {
    if bits_x == 0 || bits_y == 0 {
        return Err(IlNetworkError::InvalidInput(
            "operand widths must be at least 1 bit".into(),
        ));
    }
    if bits_x + bits_y > 24 {
        return Err(IlNetworkError::InvalidInput(format!(
            "product width {} too large",
            bits_x + bits_y
        )));
    }
    let and = and_gate(margin);
    let ha = half_adder_gate(margin);
    let fa = full_adder_gate(margin);

    let mut c = IsingCircuit::new(0);
    let xs: Vec<usize> = (0..bits_x).map(|i| c.push_bit(format!("x{i}"))).collect();
    let ys: Vec<usize> = (0..bits_y).map(|j| c.push_bit(format!("y{j}"))).collect();

    // Partial products, one AND gate each. One spare column catches a
    // carry out of the top, which a well-formed build never produces.
    let n_out = bits_x + bits_y;
    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); n_out + 1];
    for i in 0..bits_x {
        for jdx in 0..bits_y {
            let pp = c.push_bit(format!("pp{i}_{jdx}"));
            c.add_gate(&and, &[xs[i], ys[jdx], pp])?;
            columns[i + jdx].push(pp);
        }
    }

    // Compress every column to a single bit; carries spill into the next.
    for k in 0..n_out {
        while columns[k].len() > 1 {
            if columns[k].len() >= 3 {
                let a = columns[k].remove(0);
                let b = columns[k].remove(0);
                let cin = columns[k].remove(0);
                let sum = c.push_bit(format!("s{k}_{}", columns[k].len()));
                let cout = c.push_bit(format!("c{k}_{}", columns[k].len()));
                c.add_gate(&fa, &[a, b, cin, sum, cout])?;
                columns[k].push(sum);
                columns[k + 1].push(cout);
            } else {
                let a = columns[k].remove(0);
                let b = columns[k].remove(0);
                let sum = c.push_bit(format!("s{k}_{}", columns[k].len()));
                let cout = c.push_bit(format!("c{k}_{}", columns[k].len()));
                c.add_gate(&ha, &[a, b, sum, cout])?;
                columns[k].push(sum);
                columns[k + 1].push(cout);
            }
        }
    }
    if !columns[n_out].is_empty() {
        return Err(IlNetworkError::Internal(
            "carry escaped past the top product column".into(),
        ));
    }
    // Narrow operands can leave top columns empty (the product never
    // reaches those bits); trim them, but an interior gap is a build bug.
    let mut cols = &columns[..n_out];
    while let Some(last) = cols.last() {
        if last.is_empty() {
            cols = &cols[..cols.len() - 1];
        } else {
            break;
        }
    }
    let product: Option<Vec<usize>> = cols.iter().map(|col| col.first().copied()).collect();
    let product = product.ok_or_else(|| {
        IlNetworkError::Internal("a product column compressed to nothing".into())
    })?;

    c.decode_a = xs;
    c.decode_b = ys;
    c.product_bits = product;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::super::gate::all_states;
    use super::*;
    use approx::assert_relative_eq;

    /// Brute-force the ground states of a circuit with some bits clamped;
    /// also returns the minimum energy found.
    fn clamped_ground_states(c: &IsingCircuit) -> (Vec<Vec<i8>>, f64) {
        let n = c.n_bits();
        let free: Vec<usize> = (0..n).filter(|i| !c.clamps.contains_key(i)).collect();
        let mut best = f64::INFINITY;
        let mut states: Vec<(Vec<i8>, f64)> = Vec::new();
        for assignment in all_states(free.len()) {
            let mut s = vec![0i8; n];
            for (&bit, &v) in c.clamps.iter() {
                s[bit] = v;
            }
            for (k, &bit) in free.iter().enumerate() {
                s[bit] = assignment[k];
            }
            let e = c.energy(&s);
            best = best.min(e);
            states.push((s, e));
        }
        let grounds = states
            .into_iter()
            .filter(|(_, e)| *e < best + 0.5)
            .map(|(s, _)| s)
            .collect();
        (grounds, best)
    }

    #[test]
    fn two_by_two_multiplier_grounds_on_all_products() {
        let c = compose_multiplier(2, 2, 1.0).unwrap();
        assert_eq!(c.n_bits(), 12);
        let (grounds, _) = clamped_ground_states(&c);
        // every (a, b) pair appears exactly once among the ground states
        assert_eq!(grounds.len(), 16);
        let mut seen = Vec::new();
        for s in &grounds {
            let a = c.decode(s, &c.decode_a);
            let b = c.decode(s, &c.decode_b);
            let p = c.decode(s, &c.product_bits);
            assert_eq!(p, a * b, "ground state encodes {a}*{b}={p}");
            seen.push((a, b));
        }
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn clamping_the_product_selects_the_factor_pairs() {
        // energy of an unfrustrated assignment, for reference
        let base = {
            let c = compose_multiplier(2, 2, 1.0).unwrap();
            let (grounds, e) = clamped_ground_states(&c);
            assert!(!grounds.is_empty());
            e
        };
        for target in 0u64..=15 {
            let mut c = compose_multiplier(2, 2, 1.0).unwrap();
            let product_bits = c.product_bits.clone();
            for (k, &bit) in product_bits.iter().enumerate() {
                let v = if (target >> k) & 1 == 1 { 1 } else { -1 };
                c.clamp(bit, v).unwrap();
            }
            let (grounds, e_min) = clamped_ground_states(&c);
            let mut want: Vec<(u64, u64)> = (0..4u64)
                .flat_map(|a| (0..4u64).map(move |b| (a, b)))
                .filter(|&(a, b)| a * b == target)
                .collect();
            want.sort_unstable();
            if want.is_empty() {
                // unreachable product: every assignment violates some gate
                assert!(
                    e_min > base + 0.5,
                    "target {target} should frustrate the network, e_min = {e_min}, base = {base}"
                );
                continue;
            }
            let mut found: Vec<(u64, u64)> = grounds
                .iter()
                .map(|s| (c.decode(s, &c.decode_a), c.decode(s, &c.decode_b)))
                .collect();
            found.sort_unstable();
            found.dedup();
            assert_eq!(found, want, "factor pairs of {target}");
            assert!(
                (e_min - base).abs() < 1e-6,
                "feasible clamps must reach the unfrustrated ground level"
            );
        }
    }

    #[test]
    fn six_by_six_multiplier_has_the_expected_shape() {
        let c = compose_multiplier(6, 6, 1.0).unwrap();
        // 12 operand bits, 36 partial products, and two bits per adder
        assert_eq!(c.decode_a.len(), 6);
        assert_eq!(c.decode_b.len(), 6);
        assert_eq!(c.product_bits.len(), 12);
        assert!(c.n_bits() > 90 && c.n_bits() < 120, "got {}", c.n_bits());
        let n = c.n_bits();
        for i in 0..n {
            assert_eq!(c.j[i][i], 0.0, "diagonal must stay zero");
            for k in 0..n {
                assert_eq!(c.j[i][k], c.j[k][i], "couplings must stay symmetric");
            }
        }
        // product bits are distinct live bits
        let mut p = c.product_bits.clone();
        p.sort_unstable();
        p.dedup();
        assert_eq!(p.len(), 12);
    }

    #[test]
    fn shared_bits_sum_their_couplings() {
        let g = and_gate(1.0);
        let mut c = IsingCircuit::new(3);
        c.add_gate(&g, &[0, 1, 2]).unwrap();
        c.add_gate(&g, &[0, 1, 2]).unwrap();
        for i in 0..3 {
            assert_relative_eq!(c.h[i], 2.0 * g.h[i], epsilon = 1e-12);
            for k in 0..3 {
                assert_relative_eq!(c.j[i][k], 2.0 * g.j[i][k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bad_mappings_and_clamps_are_rejected() {
        let g = and_gate(1.0);
        let mut c = IsingCircuit::new(3);
        assert!(c.add_gate(&g, &[0, 1]).is_err());
        assert!(c.add_gate(&g, &[0, 1, 7]).is_err());
        assert!(c.add_gate(&g, &[0, 1, 1]).is_err());
        assert!(c.clamp(9, 1).is_err());
        assert!(c.clamp(0, 0).is_err());
        assert!(compose_multiplier(0, 3, 1.0).is_err());
    }

    #[test]
    fn decode_reads_bits_least_significant_first() {
        let c = {
            let mut c = IsingCircuit::new(4);
            c.decode_a = vec![0, 1, 2, 3];
            c
        };
        assert_eq!(c.decode(&[1, -1, 1, -1], &c.decode_a), 0b0101);
        assert_eq!(c.decode(&[-1, -1, -1, 1], &c.decode_a), 0b1000);
    }
}
