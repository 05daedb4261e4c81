//! Quasi-static electrostatics of the gate stack.
//!
//! The stack is gate / ferroelectric (thickness `h`) / SiO2 / semiconductor,
//! with the semiconductor response folded into an effective linear capacitor
//! of thickness `si_thickness` and permittivity `eps_si`. Given the gate
//! voltage and the areal polarization charge presented by the film, the
//! three unknowns (field in the FE, drop across the oxide, drop across the
//! semiconductor) follow from Kirchhoff's voltage law plus displacement
//! continuity at both interfaces.

use super::{DeviceError, Result};
use crate::constants::VACUUM_PERMITTIVITY;
use crate::phasefield::StackGeometry;

/// Solution of the series-capacitor network for one bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackSolution {
    /// Field across the ferroelectric film, V m^-1.
    pub e_fe: f64,
    /// Drop across the interfacial oxide, V.
    pub v_sio2: f64,
    /// Drop across the semiconductor capacitor (surface potential), V.
    pub v_mos: f64,
    /// Areal free charge on the gate, C m^-2.
    pub q_areal: f64,
}

/// Solve the stack for gate voltage `v_gate` and areal polarization charge
/// `p_areal` (C m^-2) presented by the film.
///
/// Unknowns `x = [e_fe, v_sio2, v_mos]`:
/// voltage balance `h*e_fe + v_sio2 + v_mos = v_gate`, and displacement
/// continuity `eps0*e_fe + p_areal = q = eps0*eps_ox*v_sio2/t_ox =
/// eps0*eps_si*v_mos/t_si`. Solved as a dense 3x3 system with partial
/// pivoting rather than by substitution so the equations stay legible.
pub fn solve_stack(v_gate: f64, p_areal: f64, stack: &StackGeometry) -> Result<StackSolution> {
    stack.validate()?;
    if !v_gate.is_finite() || !p_areal.is_finite() {
        return Err(DeviceError::InvalidConfig(
            "gate voltage and polarization charge must be finite".into(),
        ));
    }
    let eps0 = VACUUM_PERMITTIVITY;
    let c_ox = eps0 * stack.eps_sio2 / stack.sio2_thickness;
    let c_si = eps0 * stack.eps_si / stack.si_thickness;
    let mut a = [
        [stack.fe_thickness, 1.0, 1.0],
        [eps0, -c_ox, 0.0],
        [0.0, c_ox, -c_si],
    ];
    let mut b = [v_gate, -p_areal, 0.0];
    solve3(&mut a, &mut b)?;
    let [e_fe, v_sio2, v_mos] = b;
    Ok(StackSolution {
        e_fe,
        v_sio2,
        v_mos,
        q_areal: c_ox * v_sio2,
    })
}

// Gaussian elimination with partial pivoting on a 3x3 system; the matrix is
// tiny but badly scaled (entries span ~20 decades), so pivoting is not
// optional.
fn solve3(a: &mut [[f64; 3]; 3], b: &mut [f64; 3]) -> Result<()> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < f64::MIN_POSITIVE {
            return Err(DeviceError::SingularStack);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..3).rev() {
        b[col] /= a[col][col];
        a[col][col] = 1.0;
        for row in 0..col {
            b[row] -= a[row][col] * b[col];
            a[row][col] = 0.0;
        }
    }
    Ok(())
}
