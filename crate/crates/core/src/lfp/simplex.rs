//! Dense two-phase simplex method with Bland's anti-cycling rule.
//!
//! Meant for the small programs built by the fractional-program solver (a
//! few dozen rows and columns), so the tableau is kept dense and pivoting is
//! plain Gauss-Jordan elimination.

use crate::error::{Error, Result};

const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `maximize c·x` subject to `A x (<=|>=|=) b`, `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self { objective, constraints: Vec::new() }
    }

    pub fn constraint(mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        self.constraints.push((coefficients, relation, rhs));
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let n = self.num_vars();
        if let Some((k, _)) =
            self.constraints.iter().enumerate().find(|(_, c)| c.0.len() != n)
        {
            return Err(Error::DimensionMismatch(format!(
                "constraint {k} does not have {n} coefficients"
            )));
        }
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    n: usize,
    // columns: originals, then slack/surplus, then artificials; last entry is the rhs
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    first_artificial: usize,
    width: usize,
    eps: f64,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|(a, rel, b)| {
                if *b < 0.0 {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (a.iter().map(|v| -v).collect(), flipped, -b)
                } else {
                    (a.clone(), *rel, *b)
                }
            })
            .collect();
        let n_slack = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let n_art = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let first_artificial = n + n_slack;
        let width = first_artificial + n_art;
        let scale = normalized
            .iter()
            .flat_map(|(a, _, b)| a.iter().chain(std::iter::once(b)))
            .fold(1.0_f64, |m, v| m.max(v.abs()));

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut slack, mut art) = (n, first_artificial);
        for (a, rel, b) in normalized.drain(..) {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(&a);
            row[width] = b;
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
        Self { n, rows, basis, first_artificial, width, eps: 1e-11 * scale }
    }

    fn run(mut self, objective: &[f64]) -> Result<LpOutcome> {
        if self.first_artificial < self.width {
            let phase_one: Vec<f64> = (0..self.width)
                .map(|j| if j >= self.first_artificial { -1.0 } else { 0.0 })
                .collect();
            let value = match self.optimize(&phase_one, self.width)? {
                Some(v) => v,
                None => return Err(Error::Internal("phase-one program is unbounded".into())),
            };
            if value < -self.eps * 10.0 {
                return Ok(LpOutcome::Infeasible);
            }
            self.drive_out_artificials();
        }
        let mut costs = vec![0.0; self.width];
        costs[..self.n].copy_from_slice(objective);
        match self.optimize(&costs, self.first_artificial)? {
            None => Ok(LpOutcome::Unbounded),
            Some(value) => {
                let mut x = vec![0.0; self.n];
                for (row, &var) in self.rows.iter().zip(&self.basis) {
                    if var < self.n {
                        x[var] = row[self.width];
                    }
                }
                Ok(LpOutcome::Optimal { x, value })
            }
        }
    }

    /// Runs Bland-rule pivots for `max costs·x` using only columns `< allowed`.
    /// Returns the optimal value, or `None` when unbounded.
    fn optimize(&mut self, costs: &[f64], allowed: usize) -> Result<Option<f64>> {
        for _ in 0..MAX_PIVOTS {
            let reduced = |j: usize| -> f64 {
                costs[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| costs[b] * row[j])
                        .sum::<f64>()
            };
            let entering = (0..allowed)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| reduced(j) > self.eps);
            let Some(col) = entering else {
                let value = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .map(|(row, &b)| costs[b] * row[self.width])
                    .sum();
                return Ok(Some(value));
            };
            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] <= self.eps {
                    continue;
                }
                let ratio = row[self.width] / row[col];
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best - self.eps
                            || (ratio <= best + self.eps && self.basis[i] < self.basis[k])
                        {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
            match leaving {
                None => return Ok(None),
                Some((r, _)) => self.pivot(r, col),
            }
        }
        Err(Error::Internal(format!("simplex did not terminate in {MAX_PIVOTS} pivots")))
    }

    fn drive_out_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.first_artificial {
                r += 1;
                continue;
            }
            let col = (0..self.first_artificial)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.rows[r][j].abs() > self.eps);
            match col {
                Some(c) => {
                    self.pivot(r, c);
                    r += 1;
                }
                None => {
                    // redundant equality
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }
}
