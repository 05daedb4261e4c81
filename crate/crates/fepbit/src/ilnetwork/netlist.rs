//! SPICE-flavoured netlist emission for a spin circuit.
//!
//! Each p-bit becomes a current-summing input node, a zero-volt sense
//! source feeding a transresistance element that drives the output node,
//! and an inverting buffer that provides the complemented output. A
//! coupling j_ij > 0 is a resistor of value r0/|j_ij| from the input
//! summing node of i to the output of j; negative couplings take the
//! complemented output instead. Biases are resistors to the half-supply
//! rails. Every coupling line carries its dimensionless value as a
//! trailing comment so a re-parse recovers j and h bit-for-bit even when
//! the resistance division rounds.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::circuit::IsingCircuit;
use super::{IlNetworkError, Result};

/// Transresistance of the drive element converting summed input current
/// to the output voltage.
pub const DRIVE_TRANSRESISTANCE_OHM: f64 = 1.0e6;

/// What a netlist parse recovers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedNetlist {
    pub n: usize,
    pub r0: f64,
    pub vdd: f64,
    pub j: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub clamps: BTreeMap<usize, i8>,
}

/// Render `circuit` as a netlist with coupling resistors scaled by `r0`.
pub fn emit_netlist(circuit: &IsingCircuit, r0: f64, vdd: f64) -> Result<String> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(IlNetworkError::InvalidInput(format!(
            "reference resistance must be positive, got {r0}"
        )));
    }
    if !(vdd.is_finite() && vdd > 0.0) {
        return Err(IlNetworkError::InvalidInput(format!(
            "supply voltage must be positive, got {vdd}"
        )));
    }
    let n = circuit.n_bits();
    let mut out = String::new();
    let _ = writeln!(out, "# invertible-logic netlist");
    let _ = writeln!(out, "# pbits = {n}");
    let _ = writeln!(out, "# r0_ohm = {r0}");
    let _ = writeln!(out, "# vdd_volt = {vdd}");
    if n == 0 {
        return Ok(out);
    }
    for (i, label) in circuit.labels.iter().enumerate() {
        let _ = writeln!(out, "# bit {i}: {label}");
    }
    let half = vdd / 2.0;
    let _ = writeln!(out, "V_rail_pos rail_pos 0 {half}");
    let _ = writeln!(out, "V_rail_neg rail_neg 0 {}", -half);
    for i in 0..n {
        match circuit.clamps.get(&i) {
            Some(&v) => {
                let level = if v > 0 { half } else { -half };
                let _ = writeln!(out, "V_clamp_{i} pbit{i}_out 0 {level}");
            }
            None => {
                let _ = writeln!(out, "V_sense_{i} pbit{i}_sum 0 0");
                let _ = writeln!(
                    out,
                    "H_drive_{i} pbit{i}_out 0 V_sense_{i} {DRIVE_TRANSRESISTANCE_OHM}"
                );
            }
        }
        let _ = writeln!(out, "E_invert_{i} pbit{i}_out_bar 0 pbit{i}_out 0 -1");
    }
    for i in 0..n {
        for k in i + 1..n {
            let j = circuit.j[i][k];
            if j == 0.0 {
                continue;
            }
            if !j.is_finite() {
                return Err(IlNetworkError::InvalidInput(format!(
                    "coupling j[{i}][{k}] = {j} is not representable"
                )));
            }
            let res = r0 / j.abs();
            let suffix = if j > 0.0 { "out" } else { "out_bar" };
            let _ = writeln!(
                out,
                "R_j_{i}_{k} pbit{i}_sum pbit{k}_{suffix} {res} # j = {j}"
            );
            let _ = writeln!(
                out,
                "R_j_{k}_{i} pbit{k}_sum pbit{i}_{suffix} {res} # j = {j}"
            );
        }
    }
    for (i, &hv) in circuit.h.iter().enumerate() {
        if hv == 0.0 {
            continue;
        }
        if !hv.is_finite() {
            return Err(IlNetworkError::InvalidInput(format!(
                "bias h[{i}] = {hv} is not representable"
            )));
        }
        let res = r0 / hv.abs();
        let rail = if hv > 0.0 { "rail_pos" } else { "rail_neg" };
        let _ = writeln!(out, "R_h_{i} pbit{i}_sum {rail} {res} # h = {hv}");
    }
    Ok(out)
}

fn header_value(line: &str, key: &str) -> Option<String> {
    let rest = line.strip_prefix('#')?.trim();
    let rest = rest.strip_prefix(key)?.trim();
    let rest = rest.strip_prefix('=')?.trim();
    Some(rest.to_string())
}

fn bad(line: &str, why: &str) -> IlNetworkError {
    IlNetworkError::InvalidInput(format!("netlist line {line:?}: {why}"))
}

/// Recover the coupling structure from an emitted netlist.
///
/// Coupling and bias lines are read from their annotation comments when
/// present (exact) and from the resistance otherwise; when both exist they
/// must agree to within rounding.
pub fn parse_netlist(text: &str) -> Result<ParsedNetlist> {
    let mut n: Option<usize> = None;
    let mut r0: Option<f64> = None;
    let mut vdd: Option<f64> = None;
    for line in text.lines() {
        if let Some(v) = header_value(line, "pbits") {
            n = Some(v.parse().map_err(|_| bad(line, "bad pbit count"))?);
        } else if let Some(v) = header_value(line, "r0_ohm") {
            r0 = Some(v.parse().map_err(|_| bad(line, "bad r0"))?);
        } else if let Some(v) = header_value(line, "vdd_volt") {
            vdd = Some(v.parse().map_err(|_| bad(line, "bad vdd"))?);
        }
    }
    let n = n.ok_or_else(|| IlNetworkError::InvalidInput("netlist lacks a pbits header".into()))?;
    let r0 =
        r0.ok_or_else(|| IlNetworkError::InvalidInput("netlist lacks an r0_ohm header".into()))?;
    let vdd = vdd
        .ok_or_else(|| IlNetworkError::InvalidInput("netlist lacks a vdd_volt header".into()))?;
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(IlNetworkError::InvalidInput(format!("parsed r0 = {r0} invalid")));
    }

    let mut j = vec![vec![0.0; n]; n];
    let mut h = vec![0.0; n];
    let mut clamps = BTreeMap::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (element, comment) = match line.split_once('#') {
            Some((e, c)) => (e.trim(), Some(c.trim())),
            None => (line, None),
        };
        let fields: Vec<&str> = element.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let name = fields[0];
        let annotated: Option<f64> = comment.and_then(|c| {
            let (_, v) = c.split_once('=')?;
            v.trim().parse().ok()
        });
        if let Some(rest) = name.strip_prefix("R_j_") {
            let (a, b) = rest
                .split_once('_')
                .ok_or_else(|| bad(line, "coupling name needs two indices"))?;
            let a: usize = a.parse().map_err(|_| bad(line, "bad index"))?;
            let b: usize = b.parse().map_err(|_| bad(line, "bad index"))?;
            if a >= n || b >= n || a == b {
                return Err(bad(line, "coupling index out of range"));
            }
            if fields.len() < 4 {
                return Err(bad(line, "coupling line needs nodes and a value"));
            }
            let res: f64 = fields[3].parse().map_err(|_| bad(line, "bad resistance"))?;
            if !(res.is_finite() && res > 0.0) {
                return Err(bad(line, "resistance must be positive"));
            }
            let sign = if fields[2].ends_with("_out_bar") { -1.0 } else { 1.0 };
            let from_res = sign * r0 / res;
            let value = match annotated {
                Some(v) => {
                    if (v - from_res).abs() > 1e-9 * v.abs().max(1.0) {
                        return Err(bad(line, "annotation disagrees with the resistance"));
                    }
                    v
                }
                None => from_res,
            };
            if j[a][b] != 0.0 && j[a][b] != value {
                return Err(bad(line, "conflicting duplicate coupling"));
            }
            j[a][b] = value;
            j[b][a] = value;
        } else if let Some(rest) = name.strip_prefix("R_h_") {
            let i: usize = rest.parse().map_err(|_| bad(line, "bad index"))?;
            if i >= n {
                return Err(bad(line, "bias index out of range"));
            }
            if fields.len() < 4 {
                return Err(bad(line, "bias line needs nodes and a value"));
            }
            let res: f64 = fields[3].parse().map_err(|_| bad(line, "bad resistance"))?;
            if !(res.is_finite() && res > 0.0) {
                return Err(bad(line, "resistance must be positive"));
            }
            let sign = if fields[2] == "rail_neg" { -1.0 } else { 1.0 };
            let from_res = sign * r0 / res;
            let value = match annotated {
                Some(v) => {
                    if (v - from_res).abs() > 1e-9 * v.abs().max(1.0) {
                        return Err(bad(line, "annotation disagrees with the resistance"));
                    }
                    v
                }
                None => from_res,
            };
            h[i] = value;
        } else if let Some(rest) = name.strip_prefix("V_clamp_") {
            let i: usize = rest.parse().map_err(|_| bad(line, "bad index"))?;
            if i >= n {
                return Err(bad(line, "clamp index out of range"));
            }
            if fields.len() < 4 {
                return Err(bad(line, "clamp line needs nodes and a level"));
            }
            let level: f64 = fields[3].parse().map_err(|_| bad(line, "bad clamp level"))?;
            clamps.insert(i, if level >= 0.0 { 1 } else { -1 });
        }
    }
    Ok(ParsedNetlist {
        n,
        r0,
        vdd,
        j,
        h,
        clamps,
    })
}

#[cfg(test)]
mod tests {
    use super::super::circuit::IsingCircuit;
    use super::super::gate::full_adder_gate;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_coupling_of_two_becomes_a_quarter_megohm() {
        let mut c = IsingCircuit::new(2);
        c.j[0][1] = 2.0;
        c.j[1][0] = 2.0;
        let text = emit_netlist(&c, 500_000.0, 0.8).unwrap();
        assert!(
            text.contains("R_j_0_1 pbit0_sum pbit1_out 250000 #"),
            "expected a 250 kilo-ohm resistor, got:\n{text}"
        );
    }

    #[test]
    fn negative_couplings_take_the_inverted_output() {
        let mut c = IsingCircuit::new(2);
        c.j[0][1] = -0.5;
        c.j[1][0] = -0.5;
        c.h[1] = -1.0;
        let text = emit_netlist(&c, 500_000.0, 0.8).unwrap();
        assert!(text.contains("pbit1_out_bar"), "{text}");
        assert!(text.contains("R_h_1 pbit1_sum rail_neg 500000 #"), "{text}");
    }

    #[test]
    fn full_adder_round_trips_exactly() {
        let g = full_adder_gate(1.0);
        let mut c = IsingCircuit::new(5);
        c.add_gate(&g, &[0, 1, 2, 3, 4]).unwrap();
        c.clamp(4, -1).unwrap();
        let text = emit_netlist(&c, 500_000.0, 0.8).unwrap();
        let parsed = parse_netlist(&text).unwrap();
        assert_eq!(parsed.n, 5);
        assert_eq!(parsed.r0, 500_000.0);
        assert_eq!(parsed.vdd, 0.8);
        assert_eq!(parsed.j, c.j, "couplings must survive the round trip bit-for-bit");
        assert_eq!(parsed.h, c.h, "biases must survive the round trip bit-for-bit");
        assert_eq!(parsed.clamps, c.clamps);
    }

    #[test]
    fn empty_circuit_yields_a_header_only_netlist() {
        let c = IsingCircuit::new(0);
        let text = emit_netlist(&c, 500_000.0, 0.8).unwrap();
        for line in text.lines() {
            assert!(line.starts_with('#'), "unexpected element line {line:?}");
        }
        let parsed = parse_netlist(&text).unwrap();
        assert_eq!(parsed.n, 0);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let c = IsingCircuit::new(2);
        assert!(emit_netlist(&c, 0.0, 0.8).is_err());
        assert!(emit_netlist(&c, 5e5, -1.0).is_err());
        assert!(parse_netlist("nonsense").is_err());
        assert!(parse_netlist("# pbits = 1\n# r0_ohm = 5e5\n# vdd_volt = 0.8\nR_j_0_3 a b 100\n").is_err());
        assert!(parse_netlist("# pbits = 2\n# r0_ohm = 5e5\n# vdd_volt = 0.8\nR_j_0_1 a b frog\n").is_err());
        // tampered annotation that contradicts the resistance
        let tampered =
            "# pbits = 2\n# r0_ohm = 500000\n# vdd_volt = 0.8\nR_j_0_1 pbit0_sum pbit1_out 250000 # j = 7\n";
        assert!(parse_netlist(tampered).is_err());
    }

    #[test]
    fn resistance_alone_still_recovers_the_coupling() {
        let text = "# pbits = 2\n# r0_ohm = 500000\n# vdd_volt = 0.8\n\
                    R_j_0_1 pbit0_sum pbit1_out 250000\nR_h_0 pbit0_sum rail_pos 1000000\n";
        let parsed = parse_netlist(text).unwrap();
        assert_eq!(parsed.j[0][1], 2.0);
        assert_eq!(parsed.h[0], 0.5);
    }

    proptest! {
        #[test]
        fn random_circuits_round_trip(
            entries in proptest::collection::vec((-64i32..=64, -64i32..=64, -64i32..=64), 3),
        ) {
            // couplings and biases on a dyadic grid, as gate synthesis yields
            let n = 3;
            let mut c = IsingCircuit::new(n);
            for (idx, &(a, b, hv)) in entries.iter().enumerate() {
                let i = idx % n;
                let k = (idx + 1) % n;
                let jv = a as f64 / 16.0;
                let bv = b as f64 / 16.0;
                c.j[i][k] = jv;
                c.j[k][i] = jv;
                c.h[i] = if hv == 0 { bv } else { hv as f64 / 16.0 };
            }
            let text = emit_netlist(&c, 500_000.0, 0.8).unwrap();
            let parsed = parse_netlist(&text).unwrap();
            prop_assert_eq!(parsed.j, c.j);
            prop_assert_eq!(parsed.h, c.h);
        }
    }
}
