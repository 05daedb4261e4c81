//! Dense two-phase simplex for the small linear programs that gate
//! synthesis produces (tens of rows, tens of columns).
//!
//! Convention: minimize `c . x` subject to the given constraint rows with
//! every variable non-negative. Callers with free variables split them into
//! positive and negative parts before building the problem.

/// Relation between a constraint row and its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

/// One constraint row `coeffs . x REL rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

/// Solver outcome.
#[derive(Debug, Clone)]
pub enum LpResult {
    Optimal {
        x: Vec<f64>,
        objective: f64,
    },
    /// No feasible point. `violated_rows` indexes the constraints whose
    /// artificial variables could not be driven to zero; they form a
    /// certificate of which requirements clash.
    Infeasible {
        violated_rows: Vec<usize>,
    },
    Unbounded,
}

const TOL: f64 = 1e-9;

struct Tableau {
    // rows x (cols + 1); last column is the rhs
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.a[r][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
        self.basis[r] = c;
    }

    /// Minimize `obj . x` over the current basis with Bland's rule.
    /// Returns false if the objective is unbounded below.
    fn iterate(&mut self, obj: &[f64], restrict: usize) -> bool {
        loop {
            // reduced costs priced through the basis
            let mut entering = None;
            for c in 0..restrict {
                if self.basis.contains(&c) {
                    continue;
                }
                let mut red = obj[c];
                for (r, &b) in self.basis.iter().enumerate() {
                    red -= obj[b] * self.a[r][c];
                }
                if red < -TOL {
                    entering = Some(c);
                    break; // Bland: lowest eligible index
                }
            }
            let Some(c) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.a.len() {
                if self.a[r][c] > TOL {
                    let ratio = self.rhs(r) / self.a[r][c];
                    let better = match leaving {
                        None => true,
                        Some((lr, lv)) => {
                            ratio < lv - TOL
                                || (ratio < lv + TOL && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leaving else {
                return false;
            };
            self.pivot(r, c);
        }
    }
}

/// Solve `min c.x  s.t.  rows, x >= 0`.
///
/// All rows are first normalized to non-negative right-hand sides; slack
/// variables turn inequalities into equations and artificial variables seed
/// the phase-one basis.
pub fn solve_lp(objective: &[f64], constraints: &[Constraint]) -> LpResult {
    let n = objective.len();
    let m = constraints.len();
    for c in constraints {
        assert_eq!(c.coeffs.len(), n, "constraint width mismatch");
    }

    // Count slacks: one per inequality row.
    let n_slack = constraints
        .iter()
        .filter(|c| c.rel != Relation::Eq)
        .count();
    let n_art = m; // one artificial per row keeps the bookkeeping simple
    let cols = n + n_slack + n_art;

    let mut a = vec![vec![0.0; cols + 1]; m];
    let mut slack_idx = n;
    let art_base = n + n_slack;
    for (r, con) in constraints.iter().enumerate() {
        let flip = con.rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        for (j, &v) in con.coeffs.iter().enumerate() {
            a[r][j] = sign * v;
        }
        a[r][cols] = sign * con.rhs;
        let rel = match (con.rel, flip) {
            (Relation::Eq, _) => Relation::Eq,
            (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
            (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
        };
        match rel {
            Relation::Ge => {
                a[r][slack_idx] = -1.0;
                slack_idx += 1;
            }
            Relation::Le => {
                a[r][slack_idx] = 1.0;
                slack_idx += 1;
            }
            Relation::Eq => {}
        }
        a[r][art_base + r] = 1.0;
    }

    let mut t = Tableau {
        a,
        basis: (art_base..art_base + m).collect(),
        cols,
    };

    // Phase one: minimize the sum of artificials.
    let mut phase1 = vec![0.0; cols];
    for j in art_base..art_base + m {
        phase1[j] = 1.0;
    }
    if !t.iterate(&phase1, cols) {
        // cannot happen: phase-one objective is bounded below by zero
        unreachable!("phase-one objective unbounded");
    }
    let infeasibility: f64 = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= art_base)
        .map(|(r, _)| t.rhs(r))
        .sum();
    if infeasibility > 1e-7 {
        let violated: Vec<usize> = t
            .basis
            .iter()
            .enumerate()
            .filter(|(r, &b)| b >= art_base && t.rhs(*r) > 1e-7)
            .map(|(_, &b)| b - art_base)
            .collect();
        return LpResult::Infeasible {
            violated_rows: violated,
        };
    }

    // Drive any degenerate artificial out of the basis, or drop its row.
    for r in 0..m {
        if t.basis[r] >= art_base {
            if let Some(c) = (0..art_base).find(|&c| t.a[r][c].abs() > TOL) {
                t.pivot(r, c);
            }
        }
    }

    // Phase two over the original columns only.
    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(objective);
    if !t.iterate(&phase2, art_base) {
        return LpResult::Unbounded;
    }

    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r);
        }
    }
    let objective_value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
    LpResult::Optimal {
        x,
        objective: objective_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn row(coeffs: &[f64], rel: Relation, rhs: f64) -> Constraint {
        Constraint {
            coeffs: coeffs.to_vec(),
            rel,
            rhs,
        }
    }

    #[test]
    fn textbook_maximum_reached_at_vertex() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  (min of negation)
        let res = solve_lp(
            &[-3.0, -5.0],
            &[
                row(&[1.0, 0.0], Relation::Le, 4.0),
                row(&[0.0, 2.0], Relation::Le, 12.0),
                row(&[3.0, 2.0], Relation::Le, 18.0),
            ],
        );
        match res {
            LpResult::Optimal { x, objective } => {
                assert_relative_eq!(x[0], 2.0, epsilon = 1e-7);
                assert_relative_eq!(x[1], 6.0, epsilon = 1e-7);
                assert_relative_eq!(objective, -36.0, epsilon = 1e-7);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn equality_and_ge_rows_are_honoured() {
        // min x + y st x + y = 2, x >= 0.5
        let res = solve_lp(
            &[1.0, 1.0],
            &[
                row(&[1.0, 1.0], Relation::Eq, 2.0),
                row(&[1.0, 0.0], Relation::Ge, 0.5),
            ],
        );
        match res {
            LpResult::Optimal { x, objective } => {
                assert_relative_eq!(objective, 2.0, epsilon = 1e-7);
                assert!(x[0] >= 0.5 - 1e-9);
                assert_relative_eq!(x[0] + x[1], 2.0, epsilon = 1e-7);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // min x st -x <= -3  (i.e. x >= 3)
        let res = solve_lp(&[1.0], &[row(&[-1.0], Relation::Le, -3.0)]);
        match res {
            LpResult::Optimal { x, .. } => assert_relative_eq!(x[0], 3.0, epsilon = 1e-7),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_rows_report_infeasible() {
        let res = solve_lp(
            &[1.0],
            &[
                row(&[1.0], Relation::Le, 1.0),
                row(&[1.0], Relation::Ge, 2.0),
            ],
        );
        match res {
            LpResult::Infeasible { violated_rows } => {
                assert!(!violated_rows.is_empty());
                assert!(violated_rows.iter().all(|&r| r < 2));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_direction_is_detected() {
        // min -x st x >= 1 with no upper bound
        let res = solve_lp(&[-1.0], &[row(&[1.0], Relation::Ge, 1.0)]);
        assert!(matches!(res, LpResult::Unbounded));
    }

    #[test]
    fn degenerate_ties_terminate() {
        // Klee-Minty style degeneracy exercise; Bland's rule must not cycle.
        let res = solve_lp(
            &[-100.0, -10.0, -1.0],
            &[
                row(&[1.0, 0.0, 0.0], Relation::Le, 1.0),
                row(&[20.0, 1.0, 0.0], Relation::Le, 100.0),
                row(&[200.0, 20.0, 1.0], Relation::Le, 10000.0),
            ],
        );
        match res {
            LpResult::Optimal { objective, .. } => {
                assert_relative_eq!(objective, -10000.0, epsilon = 1e-6);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }
}
