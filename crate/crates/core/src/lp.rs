//! Dense two-phase simplex used as the feasibility kernel for every
//! polytope test in the crate.
//!
//! Systems here are small (tens of rows, up to a few thousand columns), so a
//! full-tableau method with Bland's anti-cycling rule is deterministic and
//! fast enough. All variables are nonnegative; callers split free variables.

use crate::error::{Error, Result};

/// Pivot threshold. Feasibility verdicts use the caller's tolerance instead.
const PIVOT_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

/// Result of solving a linear program in `min c.v, A v (rel) b, v >= 0` form.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { solution: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Rel, f64)>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    /// Sets the minimization objective.
    pub fn minimize(&mut self, coeffs: Vec<f64>) -> &mut Self {
        self.objective = coeffs;
        self
    }

    /// Sets a maximization objective by negation.
    pub fn maximize(&mut self, coeffs: Vec<f64>) -> &mut Self {
        self.objective = coeffs.into_iter().map(|c| -c).collect();
        self
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, rel: Rel, rhs: f64) -> &mut Self {
        self.rows.push((coeffs, rel, rhs));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::IllPosed(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for (coeffs, _, rhs) in &self.rows {
            if coeffs.len() != self.num_vars {
                return Err(Error::IllPosed(format!(
                    "row has {} coefficients for {} variables",
                    coeffs.len(),
                    self.num_vars
                )));
            }
            if coeffs.iter().chain(std::iter::once(rhs)).any(|v| !v.is_finite()) {
                return Err(Error::IllPosed("non-finite coefficient".into()));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllPosed("non-finite objective coefficient".into()));
        }
        Ok(())
    }

    /// Solves the program. `Infeasible` is reported when the phase-1 residual
    /// exceeds `feas_tol`.
    pub fn solve_with_tolerance(&self, feas_tol: f64) -> Result<LpOutcome> {
        self.validate()?;
        Tableau::build(self).solve(&self.objective, feas_tol)
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        self.solve_with_tolerance(1e-9)
    }

    /// Feasibility check: `Some(assignment)` with residuals at most `tol`,
    /// or `None` when the system is infeasible.
    pub fn feasible(&self, tol: f64) -> Result<Option<Vec<f64>>> {
        self.validate()?;
        let mut tableau = Tableau::build(self);
        let residual = tableau.run_phase_one();
        if residual > tol {
            return Ok(None);
        }
        Ok(Some(tableau.extract(self.num_vars)))
    }

    /// Minimal attainable L1 violation of the equality and `>=` rows.
    pub fn feasibility_residual(&self) -> Result<f64> {
        self.validate()?;
        Ok(Tableau::build(self).run_phase_one())
    }
}

struct Tableau {
    /// `B^{-1} A`, dense, one Vec per row.
    a: Vec<Vec<f64>>,
    /// `B^{-1} b`, kept nonnegative.
    b: Vec<f64>,
    basis: Vec<usize>,
    num_structural: usize,
    /// Columns at index >= artificial_start are phase-1 artificials.
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        // Count slacks/surpluses first so column indices are stable.
        let mut extra = 0;
        for (_, rel, _) in &lp.rows {
            if *rel != Rel::Eq {
                extra += 1;
            }
        }
        let artificial_start = lp.num_vars + extra;
        let total = artificial_start + m;
        let mut a = vec![vec![0.0; total]; m];
        let mut b = vec![0.0; m];
        let mut basis = vec![0usize; m];
        let mut next_extra = lp.num_vars;
        for (r, (coeffs, rel, rhs)) in lp.rows.iter().enumerate() {
            let flip = *rhs < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            for (j, &c) in coeffs.iter().enumerate() {
                a[r][j] = sign * c;
            }
            b[r] = sign * rhs;
            let rel = match (rel, flip) {
                (Rel::Eq, _) => Rel::Eq,
                (Rel::Le, false) | (Rel::Ge, true) => Rel::Le,
                (Rel::Ge, false) | (Rel::Le, true) => Rel::Ge,
            };
            match rel {
                Rel::Le => {
                    a[r][next_extra] = 1.0;
                    basis[r] = next_extra;
                    next_extra += 1;
                }
                Rel::Ge => {
                    a[r][next_extra] = -1.0;
                    next_extra += 1;
                    a[r][artificial_start + r] = 1.0;
                    basis[r] = artificial_start + r;
                }
                Rel::Eq => {
                    a[r][artificial_start + r] = 1.0;
                    basis[r] = artificial_start + r;
                }
            }
        }
        Tableau {
            a,
            b,
            basis,
            num_structural: lp.num_vars,
            artificial_start,
        }
    }

    /// Runs phase 1 and returns the minimal artificial sum (the residual).
    fn run_phase_one(&mut self) -> f64 {
        let total = self.a.first().map_or(self.artificial_start, Vec::len);
        // Reduced costs of `min sum(artificials)` given the artificial basis.
        let mut cost = vec![0.0; total];
        let mut obj = 0.0;
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv >= self.artificial_start {
                for j in 0..total {
                    cost[j] -= self.a[r][j];
                }
                obj -= self.b[r];
            }
        }
        for j in self.artificial_start..total {
            cost[j] += 1.0;
        }
        self.iterate(&mut cost, &mut obj, usize::MAX);
        let residual = -obj;
        self.evict_artificials();
        residual.max(0.0)
    }

    /// Bland-rule simplex loop. Columns at or above `ban_from` never enter.
    /// Returns `false` when an unbounded ray is detected.
    fn iterate(&mut self, cost: &mut [f64], obj: &mut f64, ban_from: usize) -> bool {
        loop {
            let entering = (0..cost.len().min(ban_from)).find(|&j| cost[j] < -PIVOT_EPS);
            let Some(j) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.a.len() {
                let coef = self.a[r][j];
                if coef > PIVOT_EPS {
                    let ratio = self.b[r] / coef;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_EPS
                                || (ratio < lratio + PIVOT_EPS
                                    && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, j, cost, obj);
        }
    }

    fn pivot(&mut self, r: usize, j: usize, cost: &mut [f64], obj: &mut f64) {
        let scale = self.a[r][j];
        for v in self.a[r].iter_mut() {
            *v /= scale;
        }
        self.b[r] /= scale;
        let pivot_row = self.a[r].clone();
        let pivot_b = self.b[r];
        for rr in 0..self.a.len() {
            if rr == r {
                continue;
            }
            let factor = self.a[rr][j];
            if factor.abs() > 0.0 {
                for (v, p) in self.a[rr].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                self.b[rr] -= factor * pivot_b;
                if self.b[rr] < 0.0 && self.b[rr] > -PIVOT_EPS {
                    self.b[rr] = 0.0;
                }
            }
        }
        let factor = cost[j];
        if factor.abs() > 0.0 {
            for (c, p) in cost.iter_mut().zip(&pivot_row) {
                *c -= factor * p;
            }
            *obj -= factor * pivot_b;
        }
        self.basis[r] = j;
    }

    /// Pivots basic artificials out where possible and drops rows that are
    /// entirely redundant.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.a.len() {
            if self.basis[r] >= self.artificial_start {
                let replacement =
                    (0..self.artificial_start).find(|&j| self.a[r][j].abs() > PIVOT_EPS);
                match replacement {
                    Some(j) => {
                        let mut dummy_cost = vec![0.0; self.a[r].len()];
                        let mut dummy_obj = 0.0;
                        self.pivot(r, j, &mut dummy_cost, &mut dummy_obj);
                    }
                    None => {
                        // Redundant constraint: remove the row.
                        self.a.swap_remove(r);
                        self.b.swap_remove(r);
                        self.basis.swap_remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    fn solve(mut self, objective: &[f64], feas_tol: f64) -> Result<LpOutcome> {
        let residual = self.run_phase_one();
        if residual > feas_tol {
            return Ok(LpOutcome::Infeasible);
        }
        let total = self.a.first().map_or(self.artificial_start, Vec::len);
        let mut cost = vec![0.0; total];
        cost[..objective.len()].copy_from_slice(objective);
        let mut obj = 0.0;
        // Reduce against the current basis.
        for (r, &bv) in self.basis.iter().enumerate() {
            let c = cost[bv];
            if c.abs() > 0.0 {
                let row = self.a[r].clone();
                for (cj, aj) in cost.iter_mut().zip(&row) {
                    *cj -= c * aj;
                }
                obj -= c * self.b[r];
            }
        }
        if !self.iterate(&mut cost, &mut obj, self.artificial_start) {
            return Ok(LpOutcome::Unbounded);
        }
        let solution = self.extract(objective.len());
        let value = objective
            .iter()
            .zip(&solution)
            .map(|(c, v)| c * v)
            .sum::<f64>();
        Ok(LpOutcome::Optimal { solution, value })
    }

    fn extract(&self, num_vars: usize) -> Vec<f64> {
        let mut solution = vec![0.0; num_vars.max(self.num_structural)];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < solution.len() {
                solution[bv] = self.b[r].max(0.0);
            }
        }
        solution.truncate(num_vars);
        solution
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_point_is_feasible() {
        let mut lp = LinearProgram::new(3);
        lp.add_row(vec![1.0, 1.0, 1.0], Rel::Eq, 1.0);
        let sol = lp.feasible(1e-9).unwrap().expect("feasible");
        assert!((sol.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(sol.iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn conflicting_bound_is_infeasible() {
        let mut lp = LinearProgram::new(3);
        lp.add_row(vec![1.0, 1.0, 1.0], Rel::Eq, 1.0);
        lp.add_row(vec![1.0, 0.0, 0.0], Rel::Ge, 2.0);
        assert!(lp.feasible(1e-9).unwrap().is_none());
    }

    #[test]
    fn hull_membership_coefficients() {
        // (1,1,0) as a combination of (2,0,0) and (0,2,0).
        let mut lp = LinearProgram::new(2);
        lp.add_row(vec![2.0, 0.0], Rel::Eq, 1.0);
        lp.add_row(vec![0.0, 2.0], Rel::Eq, 1.0);
        lp.add_row(vec![0.0, 0.0], Rel::Eq, 0.0);
        lp.add_row(vec![1.0, 1.0], Rel::Eq, 1.0);
        let sol = lp.feasible(1e-9).unwrap().expect("feasible");
        assert!((sol[0] - 0.5).abs() < 1e-9);
        assert!((sol[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn optimizes_linear_objective() {
        // max x1 + 2 x2 s.t. x1 + x2 <= 4, x2 <= 3.
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0], Rel::Le, 4.0);
        lp.add_row(vec![0.0, 1.0], Rel::Le, 3.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { solution, value } => {
                assert!((solution[0] - 1.0).abs() < 1e-9);
                assert!((solution[1] - 3.0).abs() < 1e-9);
                assert!((value + 7.0).abs() < 1e-9); // minimized negation
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.maximize(vec![1.0]);
        assert!(matches!(lp.solve().unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn distinguishes_ill_posed() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(vec![1.0], Rel::Eq, 1.0);
        assert!(matches!(lp.solve(), Err(Error::IllPosed(_))));
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![f64::NAN], Rel::Eq, 1.0);
        assert!(matches!(lp.solve(), Err(Error::IllPosed(_))));
    }

    #[test]
    fn negative_rhs_normalization() {
        // x1 - x2 = -1 with x >= 0: e.g. (0, 1).
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, -1.0], Rel::Eq, -1.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { solution, value } => {
                assert!((solution[1] - solution[0] - 1.0).abs() < 1e-9);
                assert!((value - 1.0).abs() < 1e-9);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn residual_measures_violation() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![1.0], Rel::Eq, 1.0);
        lp.add_row(vec![1.0], Rel::Eq, 2.0);
        let r = lp.feasibility_residual().unwrap();
        assert!((r - 1.0).abs() < 1e-9, "residual {r}");
    }

    #[test]
    fn degenerate_cycling_terminates() {
        // Classic Beale-style degenerate instance; Bland's rule must exit.
        let mut lp = LinearProgram::new(4);
        lp.minimize(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_row(vec![0.25, -60.0, -0.04, 9.0], Rel::Le, 0.0);
        lp.add_row(vec![0.5, -90.0, -0.02, 3.0], Rel::Le, 0.0);
        lp.add_row(vec![0.0, 0.0, 1.0, 0.0], Rel::Le, 1.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, .. } => assert!((value + 0.05).abs() < 1e-9),
            other => panic!("expected optimum, got {other:?}"),
        }
    }
}
