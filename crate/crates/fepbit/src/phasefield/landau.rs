//! Landau polynomial free energy of a single uniaxial ferroelectric domain.
//!
//! The bulk free-energy density and its polarization derivatives are
//!
//! ```text
//! Psi_pol(p)  = a1 p^2 + a11 p^4 + a111 p^6        (J m^-3)
//! Psi_pol'(p) = 2 a1 p + 4 a11 p^3 + 6 a111 p^5
//! a1(T)       = a0 (Tc - T) / Tc
//! ```
//!
//! with `a1 < 0` below the Curie temperature (double well) and `a111 > 0`
//! so the energy is bounded. Zero-field spontaneous polarization follows in
//! closed form from the quadratic in `u = p^2`:
//! `3 a111 u^2 + 2 a11 u + a1 = 0`.

use serde::{Deserialize, Serialize};

use super::{PhaseFieldError, Result};

/// Bulk Landau coefficients of one material set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauSet {
    /// Leading coefficient scale a0, m F^-1; a1(T) = a0 (Tc - T)/Tc.
    pub alpha0: f64,
    /// Quartic coefficient, C^-4 m^5 J.
    pub alpha11: f64,
    /// Sextic coefficient, C^-6 m^9 J. Must stay positive.
    pub alpha111: f64,
    /// Curie temperature, K.
    pub t_curie: f64,
}

impl LandauSet {
    /// Soft reference set (zero-field wells at +-0.134 C m^-2 at 300 K).
    pub fn fe1() -> Self {
        LandauSet {
            alpha0: -4.0e8,
            alpha11: 3.7e9,
            alpha111: 1.1e9,
            t_curie: 450.0,
        }
    }

    /// Stiffer comparison set (wells at +-0.172 C m^-2 at 300 K, ~10x barrier).
    pub fn fe2() -> Self {
        LandauSet {
            alpha0: -2.4e9,
            alpha11: 1.3e10,
            alpha111: 1.1e10,
            t_curie: 450.0,
        }
    }

    /// Temperature-dependent quadratic coefficient a1(T), m F^-1.
    ///
    /// Negative below `t_curie`, zero at `t_curie`, positive above.
    #[inline]
    pub fn alpha1(&self, temperature: f64) -> f64 {
        self.alpha0 * (self.t_curie - temperature) / self.t_curie
    }

    /// Free-energy density Psi_pol(p) at `temperature`, J m^-3.
    #[inline]
    pub fn psi(&self, p: f64, temperature: f64) -> f64 {
        let u = p * p;
        (self.alpha1(temperature) + (self.alpha11 + self.alpha111 * u) * u) * u
    }

    /// First derivative dPsi_pol/dp, V m^-1 equivalent.
    #[inline]
    pub fn dpsi(&self, p: f64, temperature: f64) -> f64 {
        let u = p * p;
        (2.0 * self.alpha1(temperature) + (4.0 * self.alpha11 + 6.0 * self.alpha111 * u) * u) * p
    }

    /// Second derivative d2Psi_pol/dp2.
    #[inline]
    pub fn d2psi(&self, p: f64, temperature: f64) -> f64 {
        let u = p * p;
        2.0 * self.alpha1(temperature) + (12.0 * self.alpha11 + 30.0 * self.alpha111 * u) * u
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha111 > 0.0) || !self.alpha111.is_finite() {
            return Err(PhaseFieldError::InvalidConfig(
                "alpha111 must be finite and > 0".into(),
            ));
        }
        if !(self.t_curie > 0.0) {
            return Err(PhaseFieldError::InvalidConfig(
                "t_curie must be > 0".into(),
            ));
        }
        if !self.alpha0.is_finite() || !self.alpha11.is_finite() {
            return Err(PhaseFieldError::InvalidConfig(
                "landau coefficients must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// All locally stable polarizations under a constant field `e_field`.
///
/// Returns the real roots of `dPsi_pol/dp - E = 0` that are local minima of
/// `Psi_pol - E p`, sorted ascending. Errors if no stable root exists
/// (cannot happen for a valid set: the sextic term guarantees at least one).
///
/// # Algorithm
/// The quintic `dPsi - E` is bracketed on an interval large enough that the
/// `6 a111 p^5` term dominates at both ends, scanned for sign changes on a
/// fine grid, and each bracket is bisected to ~1e-15 relative accuracy.
/// Minima are the roots with `d2Psi > 0`.
pub fn spontaneous_polarization(
    landau: &LandauSet,
    temperature: f64,
    e_field: f64,
) -> Result<Vec<f64>> {
    landau.validate()?;
    let g = |p: f64| landau.dpsi(p, temperature) - e_field;

    // Expand the bracket until the quintic tails fix the sign at both ends.
    let mut bound = 1.0;
    for _ in 0..80 {
        if g(bound) > 0.0 && g(-bound) < 0.0 {
            break;
        }
        bound *= 2.0;
    }

    let n_scan = 4096;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_p = -bound;
    let mut prev_g = g(prev_p);
    for k in 1..=n_scan {
        let p = -bound + 2.0 * bound * (k as f64) / (n_scan as f64);
        let gp = g(p);
        if prev_g == 0.0 {
            roots.push(prev_p);
        } else if prev_g * gp < 0.0 {
            // Bisection: 200 halvings reach f64 resolution from any bracket.
            let (mut lo, mut hi) = (prev_p, p);
            let mut glo = prev_g;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if glo * gm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_p = p;
        prev_g = gp;
    }

    let mut stable: Vec<f64> = roots
        .into_iter()
        .filter(|&p| landau.d2psi(p, temperature) > 0.0)
        .collect();
    stable.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stable.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * bound.max(1.0));
    if stable.is_empty() {
        return Err(PhaseFieldError::NoStableRoot);
    }
    Ok(stable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn alpha1_reference_values() {
        // a0 (Tc - T)/Tc at 300 K is exactly a0/3 for Tc = 450 K.
        assert_relative_eq!(LandauSet::fe1().alpha1(300.0), -4.0e8 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(LandauSet::fe2().alpha1(300.0), -8.0e8, max_relative = 1e-12);
        assert_abs_diff_eq!(LandauSet::fe1().alpha1(450.0), 0.0);
        assert!(LandauSet::fe1().alpha1(500.0) > 0.0);
    }

    #[test]
    fn psi_zero_at_origin() {
        assert_eq!(LandauSet::fe1().psi(0.0, 300.0), 0.0);
    }

    // Closed-form oracle: u = (-2 a11 + sqrt(4 a11^2 - 12 a111 a1)) / (6 a111),
    // the positive root of 3 a111 u^2 + 2 a11 u + a1 = 0, p = sqrt(u).
    fn closed_form_sp(set: &LandauSet, t: f64) -> f64 {
        let a1 = set.alpha1(t);
        let disc = 4.0 * set.alpha11 * set.alpha11 - 12.0 * set.alpha111 * a1;
        let u = (-2.0 * set.alpha11 + disc.sqrt()) / (6.0 * set.alpha111);
        u.sqrt()
    }

    #[test]
    fn zero_field_roots_match_closed_form() {
        for set in [LandauSet::fe1(), LandauSet::fe2()] {
            let sp = closed_form_sp(&set, 300.0);
            let roots = spontaneous_polarization(&set, 300.0, 0.0).unwrap();
            assert_eq!(roots.len(), 2);
            assert_abs_diff_eq!(roots[0], -sp, epsilon = 1e-9);
            assert_abs_diff_eq!(roots[1], sp, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_field_reference_magnitudes() {
        let r1 = spontaneous_polarization(&LandauSet::fe1(), 300.0, 0.0).unwrap();
        assert_abs_diff_eq!(r1[1], 0.1337, epsilon = 1e-4);
        let r2 = spontaneous_polarization(&LandauSet::fe2(), 300.0, 0.0).unwrap();
        assert_abs_diff_eq!(r2[1], 0.1722, epsilon = 1e-4);
    }

    #[test]
    fn derivative_vanishes_at_sp() {
        let set = LandauSet::fe1();
        let sp = closed_form_sp(&set, 300.0);
        // Scale the zero against the largest monomial at sp.
        let scale = (2.0 * set.alpha1(300.0) * sp).abs();
        assert!(set.dpsi(sp, 300.0).abs() < 1e-6 * scale);
    }

    #[test]
    fn strong_field_leaves_single_root() {
        let roots = spontaneous_polarization(&LandauSet::fe1(), 300.0, 8.0e8).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0] > 0.0);
    }

    #[test]
    fn above_curie_single_well_at_zero() {
        let roots = spontaneous_polarization(&LandauSet::fe1(), 500.0, 0.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert_abs_diff_eq!(roots[0], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_nonpositive_alpha111() {
        let mut set = LandauSet::fe1();
        set.alpha111 = 0.0;
        assert!(spontaneous_polarization(&set, 300.0, 0.0).is_err());
    }
}
