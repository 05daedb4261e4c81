//! Ising encodings of logic gates.
//!
//! A gate is a set of couplings `j` and biases `h` whose ground states are
//! exactly the valid rows of a truth table, all at the same energy, with
//! every invalid state at least `margin` above. The encoding is found by
//! linear programming and then always re-checked by exhaustive enumeration,
//! so a returned gate is correct by construction.

use super::lp::{solve_lp, Constraint, LpResult, Relation};
use super::{IlNetworkError, Result};

/// Energy of a spin state under pairwise couplings and local biases:
/// `E(s) = -sum_{i<j} j_ij s_i s_j - sum_i h_i s_i`.
pub(crate) fn ising_energy(j: &[Vec<f64>], h: &[f64], state: &[i8]) -> f64 {
    let n = h.len();
    let mut e = 0.0;
    for i in 0..n {
        let si = state[i] as f64;
        e -= h[i] * si;
        for k in i + 1..n {
            e -= j[i][k] * si * state[k] as f64;
        }
    }
    e
}

/// Iterate every state of `n` spins; bit `k` of the counter maps to spin `k`.
pub(crate) fn all_states(n: usize) -> impl Iterator<Item = Vec<i8>> {
    (0u32..1 << n).map(move |m| {
        (0..n)
            .map(|k| if (m >> k) & 1 == 1 { 1i8 } else { -1i8 })
            .collect()
    })
}

/// A logic gate embedded in an Ising energy function.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingGate {
    pub n: usize,
    /// Symmetric coupling matrix with zero diagonal.
    pub j: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    /// Common energy of the valid (ground) states.
    pub ground_energy: f64,
    /// Energy separation enforced between valid and invalid states.
    pub margin: f64,
    pub labels: Vec<String>,
}

impl IsingGate {
    pub fn energy(&self, state: &[i8]) -> f64 {
        assert_eq!(state.len(), self.n, "state width mismatch");
        ising_energy(&self.j, &self.h, state)
    }

    /// All states whose energy sits in the ground level, by enumeration.
    pub fn ground_states(&self) -> Vec<Vec<i8>> {
        let energies: Vec<(Vec<i8>, f64)> = all_states(self.n)
            .map(|s| {
                let e = self.energy(&s);
                (s, e)
            })
            .collect();
        let e_min = energies.iter().map(|(_, e)| *e).fold(f64::INFINITY, f64::min);
        let cut = e_min + 0.5 * self.margin;
        energies
            .into_iter()
            .filter(|(_, e)| *e < cut)
            .map(|(s, _)| s)
            .collect()
    }
}

fn format_state(s: &[i8]) -> String {
    let body: Vec<String> = s.iter().map(|&v| format!("{v:+}")).collect();
    format!("({})", body.join(","))
}

/// Find couplings whose ground states are exactly `valid_states`.
///
/// The LP minimizes the largest coefficient magnitude (couplings and biases
/// alike) so the resistor ratios that realize the gate stay bounded. Valid
/// states are constrained to a common energy `e0`; every other state must
/// sit at `e0 + margin` or higher. The returned gate has been verified by
/// exhaustive enumeration of all `2^n` states.
pub fn synthesize_gate(
    valid_states: &[Vec<i8>],
    n: usize,
    margin: f64,
) -> Result<IsingGate> {
    if n == 0 || n > 20 {
        return Err(IlNetworkError::InvalidInput(format!(
            "gate width {n} out of range 1..=20"
        )));
    }
    if !(margin.is_finite() && margin > 0.0) {
        return Err(IlNetworkError::InvalidInput(format!(
            "margin must be positive, got {margin}"
        )));
    }
    if valid_states.is_empty() {
        return Err(IlNetworkError::InvalidInput(
            "truth table has no valid states".into(),
        ));
    }
    for s in valid_states {
        if s.len() != n || s.iter().any(|&v| v != 1 && v != -1) {
            return Err(IlNetworkError::InvalidInput(format!(
                "state {} is not a width-{n} spin vector",
                format_state(s)
            )));
        }
    }
    let mut sorted = valid_states.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != valid_states.len() {
        return Err(IlNetworkError::InvalidInput(
            "truth table lists a state twice".into(),
        ));
    }

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |k| (i, k)))
        .collect();
    let n_pair = pairs.len();
    let n_coeff = n_pair + n; // couplings then biases
    // Column layout: coefficient plus/minus pairs, e0 pair, then t.
    let n_cols = 2 * n_coeff + 2 + 1;
    let e0_pos = 2 * n_coeff;
    let e0_neg = e0_pos + 1;
    let t_col = e0_neg + 1;

    let is_valid = |s: &[i8]| sorted.binary_search_by(|v| v.as_slice().cmp(s)).is_ok();

    // Coefficient of E(s) on the k-th raw coefficient variable.
    let energy_coeff = |s: &[i8], k: usize| -> f64 {
        if k < n_pair {
            let (i, j) = pairs[k];
            -(s[i] as f64) * (s[j] as f64)
        } else {
            -(s[k - n_pair] as f64)
        }
    };

    let mut constraints = Vec::new();
    let mut row_meaning = Vec::new();
    for s in all_states(n) {
        let mut coeffs = vec![0.0; n_cols];
        for k in 0..n_coeff {
            let c = energy_coeff(&s, k);
            coeffs[2 * k] = c;
            coeffs[2 * k + 1] = -c;
        }
        coeffs[e0_pos] = -1.0;
        coeffs[e0_neg] = 1.0;
        if is_valid(&s) {
            row_meaning.push(format!("valid state {} pinned to e0", format_state(&s)));
            constraints.push(Constraint {
                coeffs,
                rel: Relation::Eq,
                rhs: 0.0,
            });
        } else {
            row_meaning.push(format!(
                "invalid state {} at least margin above e0",
                format_state(&s)
            ));
            constraints.push(Constraint {
                coeffs,
                rel: Relation::Ge,
                rhs: margin,
            });
        }
    }
    // |coefficient| <= t, written as two one-sided rows each.
    for k in 0..n_coeff {
        for sign in [1.0, -1.0] {
            let mut coeffs = vec![0.0; n_cols];
            coeffs[t_col] = 1.0;
            coeffs[2 * k] = sign;
            coeffs[2 * k + 1] = -sign;
            row_meaning.push("coefficient magnitude bound".into());
            constraints.push(Constraint {
                coeffs,
                rel: Relation::Ge,
                rhs: 0.0,
            });
        }
    }

    let mut objective = vec![0.0; n_cols];
    objective[t_col] = 1.0;

    let x = match solve_lp(&objective, &constraints) {
        LpResult::Optimal { x, .. } => x,
        LpResult::Infeasible { violated_rows } => {
            let mut violated: Vec<String> = violated_rows
                .iter()
                .filter(|&&r| r < (1usize << n))
                .map(|&r| row_meaning[r].clone())
                .collect();
            if violated.is_empty() {
                violated.push("truth table admits no pairwise energy function".into());
            }
            return Err(IlNetworkError::Infeasible { violated });
        }
        LpResult::Unbounded => {
            return Err(IlNetworkError::InvalidInput(
                "synthesis program is unbounded; margin or table is degenerate".into(),
            ))
        }
    };

    let coeff = |k: usize| x[2 * k] - x[2 * k + 1];
    let mut j = vec![vec![0.0; n]; n];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        j[a][b] = coeff(k);
        j[b][a] = coeff(k);
    }
    let h: Vec<f64> = (0..n).map(|i| coeff(n_pair + i)).collect();
    let ground_energy = x[e0_pos] - x[e0_neg];

    let gate = IsingGate {
        n,
        j,
        h,
        ground_energy,
        margin,
        labels: (0..n).map(|i| format!("s{i}")).collect(),
    };

    // Independent check: the LP answer must reproduce the table exactly.
    let tol = 1e-6 * margin.max(1.0);
    for s in all_states(n) {
        let e = gate.energy(&s);
        if is_valid(&s) {
            if (e - ground_energy).abs() > tol {
                return Err(IlNetworkError::Internal(format!(
                    "synthesized gate puts valid state {} at {e}, expected {ground_energy}",
                    format_state(&s)
                )));
            }
        } else if e < ground_energy + margin - tol {
            return Err(IlNetworkError::Internal(format!(
                "synthesized gate leaves invalid state {} at {e}, below the margin",
                format_state(&s)
            )));
        }
    }
    Ok(gate)
}

fn named(mut gate: IsingGate, labels: &[&str]) -> IsingGate {
    gate.labels = labels.iter().map(|s| s.to_string()).collect();
    gate
}

/// Two-spin buffer: both bits agree.
pub fn copy_gate(margin: f64) -> IsingGate {
    let table = vec![vec![-1, -1], vec![1, 1]];
    named(
        synthesize_gate(&table, 2, margin).expect("COPY table is representable"),
        &["a", "b"],
    )
}

fn and_table() -> Vec<Vec<i8>> {
    let mut rows = Vec::new();
    for a in [-1i8, 1] {
        for b in [-1i8, 1] {
            let c = if a == 1 && b == 1 { 1 } else { -1 };
            rows.push(vec![a, b, c]);
        }
    }
    rows
}

/// Three-spin AND: c = a AND b on every ground state.
pub fn and_gate(margin: f64) -> IsingGate {
    named(
        synthesize_gate(&and_table(), 3, margin).expect("AND table is representable"),
        &["a", "b", "and"],
    )
}

/// AND gate used in reverse: clamping the output constrains the inputs.
/// Same energy function as [`and_gate`], labelled for inverted operation.
pub fn iand_gate(margin: f64) -> IsingGate {
    named(
        synthesize_gate(&and_table(), 3, margin).expect("AND table is representable"),
        &["a", "b", "c"],
    )
}

/// Four-spin half adder: sum = a XOR b, carry = a AND b.
pub fn half_adder_gate(margin: f64) -> IsingGate {
    let mut rows = Vec::new();
    for a in [-1i8, 1] {
        for b in [-1i8, 1] {
            let sum = if a != b { 1 } else { -1 };
            let carry = if a == 1 && b == 1 { 1 } else { -1 };
            rows.push(vec![a, b, sum, carry]);
        }
    }
    named(
        synthesize_gate(&rows, 4, margin).expect("half-adder table is representable"),
        &["a", "b", "sum", "carry"],
    )
}

/// Five-spin full adder: sum = a XOR b XOR cin, cout = majority(a, b, cin).
pub fn full_adder_gate(margin: f64) -> IsingGate {
    let mut rows = Vec::new();
    for a in [-1i8, 1] {
        for b in [-1i8, 1] {
            for cin in [-1i8, 1] {
                let ones = [a, b, cin].iter().filter(|&&v| v == 1).count();
                let sum = if ones % 2 == 1 { 1 } else { -1 };
                let cout = if ones >= 2 { 1 } else { -1 };
                rows.push(vec![a, b, cin, sum, cout]);
            }
        }
    }
    named(
        synthesize_gate(&rows, 5, margin).expect("full-adder table is representable"),
        &["a", "b", "cin", "sum", "cout"],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn assert_gate_matches_table(gate: &IsingGate, table: &[Vec<i8>]) {
        let mut found = gate.ground_states();
        found.sort();
        let mut want = table.to_vec();
        want.sort();
        assert_eq!(found, want, "ground states differ from the truth table");
        // and the margin really separates the two level sets
        let tol = 1e-6;
        for s in all_states(gate.n) {
            let e = gate.energy(&s);
            if want.binary_search(&s).is_ok() {
                assert_relative_eq!(e, gate.ground_energy, epsilon = tol);
            } else {
                assert!(
                    e >= gate.ground_energy + gate.margin - tol,
                    "invalid state {s:?} at {e} inside the margin"
                );
            }
        }
    }

    #[test]
    fn copy_gate_is_a_pure_positive_coupling() {
        let g = copy_gate(1.0);
        assert!(g.j[0][1] > 0.0, "COPY needs a ferromagnetic bond");
        assert!(g.h[0].abs() < 1e-9 && g.h[1].abs() < 1e-9, "h = 0 by symmetry");
        assert_relative_eq!(g.j[0][1], 0.5, epsilon = 1e-7); // margin/2 is optimal
        assert_gate_matches_table(&g, &[vec![-1, -1], vec![1, 1]]);
    }

    #[test]
    fn and_gate_ground_states_are_the_truth_table() {
        let g = and_gate(1.0);
        assert_gate_matches_table(&g, &and_table());
    }

    #[test]
    fn half_adder_ground_states_are_the_truth_table() {
        let g = half_adder_gate(1.0);
        let mut rows = Vec::new();
        for a in [-1i8, 1] {
            for b in [-1i8, 1] {
                rows.push(vec![
                    a,
                    b,
                    if a != b { 1 } else { -1 },
                    if a == 1 && b == 1 { 1 } else { -1 },
                ]);
            }
        }
        assert_gate_matches_table(&g, &rows);
    }

    #[test]
    fn full_adder_ground_states_are_the_truth_table() {
        let g = full_adder_gate(1.0);
        let mut rows = Vec::new();
        for a in [-1i8, 1] {
            for b in [-1i8, 1] {
                for cin in [-1i8, 1] {
                    let ones = [a, b, cin].iter().filter(|&&v| v == 1).count();
                    rows.push(vec![
                        a,
                        b,
                        cin,
                        if ones % 2 == 1 { 1 } else { -1 },
                        if ones >= 2 { 1 } else { -1 },
                    ]);
                }
            }
        }
        assert_eq!(rows.len(), 8);
        assert_gate_matches_table(&g, &rows);
    }

    #[test]
    fn three_spin_xor_is_infeasible() {
        // s3 = s1 XOR s2 has no pairwise energy function: the parity
        // constraint needs a three-body term or an ancilla.
        let table = vec![
            vec![-1, -1, -1],
            vec![-1, 1, 1],
            vec![1, -1, 1],
            vec![1, 1, -1],
        ];
        match synthesize_gate(&table, 3, 1.0) {
            Err(IlNetworkError::Infeasible { violated }) => {
                assert!(!violated.is_empty());
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_malformed_tables_are_rejected() {
        let dup = vec![vec![1, 1], vec![1, 1]];
        assert!(matches!(
            synthesize_gate(&dup, 2, 1.0),
            Err(IlNetworkError::InvalidInput(_))
        ));
        let wide = vec![vec![1, 1, 1]];
        assert!(matches!(
            synthesize_gate(&wide, 2, 1.0),
            Err(IlNetworkError::InvalidInput(_))
        ));
        let zeros = vec![vec![0, 1]];
        assert!(matches!(
            synthesize_gate(&zeros, 2, 1.0),
            Err(IlNetworkError::InvalidInput(_))
        ));
        assert!(matches!(
            synthesize_gate(&[vec![1, 1]], 2, -1.0),
            Err(IlNetworkError::InvalidInput(_))
        ));
    }

    #[test]
    fn energy_matches_hand_expansion() {
        let g = copy_gate(1.0);
        // E(s) = -j12 s1 s2 with h = 0
        assert_relative_eq!(g.energy(&[1, 1]), -g.j[0][1], epsilon = 1e-12);
        assert_relative_eq!(g.energy(&[1, -1]), g.j[0][1], epsilon = 1e-12);
    }

    proptest! {
        // Scaling j, h, and the margin together rescales energies but the
        // ground-state set is unchanged.
        #[test]
        fn ground_set_is_scale_invariant(c in 0.01f64..100.0) {
            let g = and_gate(1.0);
            let mut scaled = g.clone();
            for row in scaled.j.iter_mut() {
                for v in row.iter_mut() {
                    *v *= c;
                }
            }
            for v in scaled.h.iter_mut() {
                *v *= c;
            }
            scaled.ground_energy *= c;
            scaled.margin *= c;
            prop_assert_eq!(g.ground_states(), scaled.ground_states());
        }

        // Flipping one spin changes the energy by 2 s_i (h_i + sum_j j_ij s_j).
        #[test]
        fn single_flip_energy_identity(
            seed_state in proptest::collection::vec(proptest::bool::ANY, 5),
            i in 0usize..5,
        ) {
            let g = full_adder_gate(1.0);
            let s: Vec<i8> = seed_state.iter().map(|&b| if b { 1 } else { -1 }).collect();
            let mut flipped = s.clone();
            flipped[i] = -flipped[i];
            let field: f64 = g.h[i]
                + (0..5).map(|k| g.j[i][k] * s[k] as f64).sum::<f64>();
            let de = g.energy(&flipped) - g.energy(&s);
            prop_assert!((de - 2.0 * s[i] as f64 * field).abs() < 1e-9);
        }
    }
}
