//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as `minimize c^T x` subject to rows `a^T x {<=, =, >=} b`
//! with `x >= 0`. Pivoting follows Bland's rule (lowest eligible index for
//! both the entering and the leaving variable), which rules out cycling.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    /// The optimal solution, or an [`Error::LpFailure`] naming the outcome.
    pub fn optimal(self, context: &str) -> Result<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Ok(s),
            LpOutcome::Infeasible => Err(Error::LpFailure(format!("{context}: infeasible"))),
            LpOutcome::Unbounded => Err(Error::LpFailure(format!("{context}: unbounded"))),
        }
    }
}

impl LinearProgram {
    /// A minimization problem over `num_vars` nonnegative variables.
    pub fn minimize(objective: Vec<f64>) -> Self {
        LinearProgram { num_vars: objective.len(), objective, constraints: Vec::new() }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::minimize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn add(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coefficients.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint { coefficients, relation, rhs });
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Solves the program. The reported objective is that of the minimization
    /// form; negate it for programs built with [`LinearProgram::maximize`].
    pub fn solve(&self) -> Result<LpOutcome> {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    /// `rows[r]` holds the constraint coefficients followed by the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_vars: usize,
    /// First artificial column; columns at or beyond it are artificial.
    first_artificial: usize,
    width: usize,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coefficients.iter().map(|v| -v).collect(), flipped, -c.rhs)
                } else {
                    (c.coefficients.clone(), c.relation, c.rhs)
                }
            })
            .collect();
        let num_slack = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let num_artificial = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let first_artificial = n + num_slack;
        let width = first_artificial + num_artificial;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut slack, mut art) = (n, first_artificial);
        for (coef, rel, rhs) in normalized {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(&coef);
            row[width] = rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Tableau { rows, basis, num_vars: n, first_artificial, width, iterations: 0 }
    }

    fn run(mut self, objective: &[f64]) -> Result<LpOutcome> {
        if self.first_artificial < self.width {
            let mut phase_one = vec![0.0; self.width];
            for c in phase_one.iter_mut().skip(self.first_artificial) {
                *c = 1.0;
            }
            let scale = self.rows.iter().map(|r| r[self.width].abs()).fold(1.0, f64::max);
            let value = match self.optimize(&phase_one, self.width)? {
                Some(v) => v,
                None => return Err(Error::Internal("phase one cannot be unbounded".into())),
            };
            if value > 1e-9 * scale {
                return Ok(LpOutcome::Infeasible);
            }
            self.evict_artificials();
        }

        let mut cost = vec![0.0; self.width];
        cost[..self.num_vars].copy_from_slice(objective);
        match self.optimize(&cost, self.first_artificial)? {
            None => Ok(LpOutcome::Unbounded),
            Some(objective) => {
                let mut x = vec![0.0; self.num_vars];
                for (r, &b) in self.basis.iter().enumerate() {
                    if b < self.num_vars {
                        x[b] = self.rows[r][self.width];
                    }
                }
                Ok(LpOutcome::Optimal(LpSolution { x, objective, iterations: self.iterations }))
            }
        }
    }

    /// Pivots degenerate artificial variables out of the basis, dropping
    /// rows that turn out to be redundant.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| self.rows[r][j].abs() > 1e-9) {
                    Some(j) => {
                        self.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    /// Minimizes `cost` over columns `< allowed`. Returns `None` if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<Option<f64>> {
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(Error::LpFailure(format!(
                    "iteration cap {MAX_ITERATIONS} reached"
                )));
            }
            // reduced costs c_j - c_B B^-1 A_j
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced: f64 = cost[j]
                    - self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum::<f64>();
                reduced < -COST_EPS
            });
            let Some(j) = entering else {
                let value = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .map(|(row, &b)| cost[b] * row[self.width])
                    .sum();
                return Ok(Some(value));
            };

            let mut leaving: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[j] > PIVOT_EPS {
                    let ratio = row[self.width] / row[j];
                    leaving = match leaving {
                        None => Some((r, ratio)),
                        Some((best, best_ratio)) => {
                            let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                            if (tie && self.basis[r] < self.basis[best]) || (!tie && ratio < best_ratio) {
                                Some((r, ratio))
                            } else {
                                Some((best, best_ratio))
                            }
                        }
                    };
                }
            }
            match leaving {
                None => return Ok(None),
                Some((r, _)) => self.pivot(r, j),
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        self.iterations += 1;
        let p = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        self.basis[r] = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.add(vec![1.0, 0.0], Relation::Le, 4.0)
            .add(vec![0.0, 2.0], Relation::Le, 12.0)
            .add(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap().optimal("textbook").unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        assert!((-s.objective - 36.0).abs() < 1e-12);
    }

    #[test]
    fn needs_phase_one() {
        // min x + y s.t. x + y >= 2, x - y = 0 -> (1, 1)
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.add(vec![1.0, 1.0], Relation::Ge, 2.0).add(vec![1.0, -1.0], Relation::Eq, 0.0);
        let s = lp.solve().unwrap().optimal("phase one").unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add(vec![1.0], Relation::Le, 1.0).add(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.add(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        // the second equality duplicates the first
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0]);
        lp.add(vec![1.0, 1.0], Relation::Eq, 1.0).add(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = lp.solve().unwrap().optimal("redundant").unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x <= -3  <=>  x >= 3
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add(vec![-1.0], Relation::Le, -3.0);
        let s = lp.solve().unwrap().optimal("neg rhs").unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::minimize(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .add(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .add(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap().optimal("beale").unwrap();
        assert!((s.objective + 0.05).abs() < 1e-12);
    }
}
