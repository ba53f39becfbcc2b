//! Max-min linear fractional programs over the probability simplex,
//!
//! ```text
//!   maximize  min_i (Σ_j w_j a_ij + c1) / (Σ_j w_j b_ij + c2)
//!   over      w_j >= 0, Σ_j w_j = 1
//! ```
//!
//! solved by bisection on the objective level `γ`. Each level is a
//! feasibility test: the linear program
//!
//! ```text
//!   t* = max t  s.t.  Σ_j w_j (a_ij - γ b_ij) + c1 - γ c2 >= t  for all i
//! ```
//!
//! over the simplex has `t* >= 0` exactly when some `w` reaches `γ`. The
//! simplex method returns a vertex, and a vertex of this polytope has at most
//! `i_max` nonzero weights.

pub mod simplex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use simplex::{LinearProgram, LpOutcome, Relation};

/// Weights at or below this value (after renormalization) count as zero.
pub const ZERO_WEIGHT: f64 = 1e-7;

/// Largest `j_max` accepted by [`brute_force_lfp`].
pub const BRUTE_FORCE_MAX_VARS: usize = 6;

/// Data `a_ij`, `b_ij`, `c1`, `c2` of a max-min fractional program.
#[derive(Debug, Clone, PartialEq)]
pub struct LfpInstance {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c1: f64,
    c2: f64,
}

impl LfpInstance {
    /// `a` and `b` are `i_max × j_max`. Requires `a >= 0`, `b > 0`, `c1 >= 0`, `c2 > 0`.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, c1: f64, c2: f64) -> Result<Self> {
        let i_max = a.len();
        let j_max = a.first().map_or(0, Vec::len);
        if i_max == 0 || j_max == 0 {
            return Err(Error::DimensionMismatch("LFP needs at least one row and column".into()));
        }
        if b.len() != i_max
            || a.iter().chain(&b).any(|row| row.len() != j_max)
        {
            return Err(Error::DimensionMismatch(format!(
                "a and b must both be {i_max}x{j_max}"
            )));
        }
        for (i, row) in a.iter().enumerate() {
            if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Domain(format!("a[{i}][{j}] = {v} must be finite and >= 0")));
            }
        }
        for (i, row) in b.iter().enumerate() {
            if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::Domain(format!("b[{i}][{j}] = {v} must be finite and > 0")));
            }
        }
        if !(c1.is_finite() && c1 >= 0.0) {
            return Err(Error::Domain(format!("c1 = {c1} must be finite and >= 0")));
        }
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(Error::Domain(format!("c2 = {c2} must be finite and > 0")));
        }
        Ok(Self { a, b, c1, c2 })
    }

    /// Builds an instance from row-major flat arrays.
    pub fn from_flat(
        i_max: usize,
        j_max: usize,
        a: &[f64],
        b: &[f64],
        c1: f64,
        c2: f64,
    ) -> Result<Self> {
        if a.len() != i_max * j_max || b.len() != i_max * j_max || j_max == 0 {
            return Err(Error::DimensionMismatch(format!(
                "a and b need {} entries each, got {} and {}",
                i_max * j_max,
                a.len(),
                b.len()
            )));
        }
        let rows = |v: &[f64]| v.chunks(j_max).map(<[f64]>::to_vec).collect();
        Self::new(rows(a), rows(b), c1, c2)
    }

    pub fn i_max(&self) -> usize {
        self.a.len()
    }

    pub fn j_max(&self) -> usize {
        self.a[0].len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Ratio of row `i` at weights `w`.
    pub fn ratio(&self, i: usize, w: &[f64]) -> f64 {
        let num: f64 = w.iter().zip(&self.a[i]).map(|(w, a)| w * a).sum::<f64>() + self.c1;
        let den: f64 = w.iter().zip(&self.b[i]).map(|(w, b)| w * b).sum::<f64>() + self.c2;
        num / den
    }

    /// `min_i ratio(i, w)`.
    pub fn objective(&self, w: &[f64]) -> f64 {
        (0..self.i_max()).map(|i| self.ratio(i, w)).fold(f64::INFINITY, f64::min)
    }

    /// An upper bound on the optimal objective.
    ///
    /// Every ratio is at most `(max a + c1) / (min b + c2)` on the simplex,
    /// which is never above `(max a + c1) / c2`.
    pub fn gamma_upper_bound(&self) -> f64 {
        let max_a = self.a.iter().flatten().fold(0.0_f64, |m, v| m.max(*v));
        let min_b = self.b.iter().flatten().fold(f64::INFINITY, |m, v| m.min(*v));
        (max_a + self.c1) / (min_b + self.c2)
    }
}

/// Optimal weights of a fractional program.
#[derive(Debug, Clone, PartialEq)]
pub struct LfpSolution {
    pub weights: Vec<f64>,
    /// Objective achieved by `weights`.
    pub gamma: f64,
    /// Number of weights above [`ZERO_WEIGHT`].
    pub support_size: usize,
}

/// Solves the level-`gamma` feasibility program. Returns `t*` and an optimal vertex.
pub fn feasibility_lp(inst: &LfpInstance, gamma: f64) -> Result<(f64, Vec<f64>)> {
    if !gamma.is_finite() {
        return Err(Error::Domain(format!("gamma = {gamma} must be finite")));
    }
    let j_max = inst.j_max();
    // variables: w_1..w_J, t+, t-
    let mut objective = vec![0.0; j_max + 2];
    objective[j_max] = 1.0;
    objective[j_max + 1] = -1.0;
    let mut lp = LinearProgram::maximize(objective);
    for i in 0..inst.i_max() {
        let mut row: Vec<f64> = (0..j_max)
            .map(|j| -(inst.a[i][j] - gamma * inst.b[i][j]))
            .collect();
        row.extend([1.0, -1.0]);
        lp = lp.constraint(row, Relation::Le, inst.c1 - gamma * inst.c2);
    }
    let mut simplex_row = vec![1.0; j_max];
    simplex_row.extend([0.0, 0.0]);
    lp = lp.constraint(simplex_row, Relation::Eq, 1.0);
    match lp.solve()? {
        LpOutcome::Optimal { x, value } => Ok((value, x[..j_max].to_vec())),
        LpOutcome::Infeasible => Err(Error::Internal("simplex feasibility program reported infeasible".into())),
        LpOutcome::Unbounded => Err(Error::Internal("simplex feasibility program reported unbounded".into())),
    }
}

fn clean_weights(w: &[f64]) -> Vec<f64> {
    let clip: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clip.iter().sum();
    let mut out: Vec<f64> = clip
        .iter()
        .map(|v| v / total)
        .map(|v| if v <= ZERO_WEIGHT { 0.0 } else { v })
        .collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    out
}

/// Solves the fractional program to within `tol` of the optimal objective.
pub fn solve_lfp(inst: &LfpInstance, tol: f64) -> Result<LfpSolution> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let (mut lo, mut hi) = (0.0, inst.gamma_upper_bound());
    let (t0, mut witness) = feasibility_lp(inst, lo)?;
    if t0 < 0.0 {
        return Err(Error::Internal(format!("level 0 infeasible (t* = {t0})")));
    }
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (t, w) = feasibility_lp(inst, mid)?;
        if t >= 0.0 {
            lo = mid;
            witness = w;
        } else {
            hi = mid;
        }
    }
    let weights = clean_weights(&witness);
    let support_size = weights.iter().filter(|v| **v > ZERO_WEIGHT).count();
    let gamma = inst.objective(&weights);
    Ok(LfpSolution { weights, gamma, support_size })
}

/// Exhaustive search over the simplex grid with spacing `1 / round(1 / grid_step)`.
///
/// Returns the best objective and the grid point attaining it (first in
/// lexicographic enumeration order on ties).
pub fn brute_force_lfp(inst: &LfpInstance, grid_step: f64) -> Result<(f64, Vec<f64>)> {
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::Domain(format!("grid step {grid_step} must lie in (0, 0.5]")));
    }
    let j_max = inst.j_max();
    if j_max > BRUTE_FORCE_MAX_VARS {
        return Err(Error::TooLarge(format!(
            "brute force enumerates the simplex grid and accepts at most \
             {BRUTE_FORCE_MAX_VARS} variables, got {j_max}"
        )));
    }
    if j_max == 1 {
        return Ok((inst.objective(&[1.0]), vec![1.0]));
    }
    let n = (1.0 / grid_step).round() as usize;
    let i_max = inst.i_max();
    let (best_value, best_counts) = (0..=n)
        .into_par_iter()
        .map(|k0| {
            let mut counts = vec![0usize; j_max];
            counts[0] = k0;
            let num: Vec<f64> =
                (0..i_max).map(|i| inst.c1 + k0 as f64 / n as f64 * inst.a[i][0]).collect();
            let den: Vec<f64> =
                (0..i_max).map(|i| inst.c2 + k0 as f64 / n as f64 * inst.b[i][0]).collect();
            let mut best = (f64::NEG_INFINITY, counts.clone());
            let mut search = GridSearch { inst, n, counts, best: &mut best };
            search.descend(1, n - k0, &num, &den);
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, cand| {
            if cand.0 > acc.0 {
                cand
            } else {
                acc
            }
        });
    let weights = best_counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok((best_value, weights))
}

struct GridSearch<'a> {
    inst: &'a LfpInstance,
    n: usize,
    counts: Vec<usize>,
    best: &'a mut (f64, Vec<usize>),
}

impl GridSearch<'_> {
    fn descend(&mut self, level: usize, remaining: usize, num: &[f64], den: &[f64]) {
        let last = level + 1 == self.counts.len();
        let scale = 1.0 / self.n as f64;
        if last {
            let w = remaining as f64 * scale;
            let value = num
                .iter()
                .zip(den)
                .enumerate()
                .map(|(i, (p, q))| (p + w * self.inst.a[i][level]) / (q + w * self.inst.b[i][level]))
                .fold(f64::INFINITY, f64::min);
            if value > self.best.0 {
                self.counts[level] = remaining;
                self.best.0 = value;
                self.best.1.clone_from(&self.counts);
            }
            return;
        }
        if level + 2 == self.counts.len() {
            self.last_two(level, remaining, num, den);
            return;
        }
        let mut next_num = num.to_vec();
        let mut next_den = den.to_vec();
        for k in 0..=remaining {
            let w = k as f64 * scale;
            for i in 0..num.len() {
                next_num[i] = num[i] + w * self.inst.a[i][level];
                next_den[i] = den[i] + w * self.inst.b[i][level];
            }
            self.counts[level] = k;
            self.descend(level + 1, remaining - k, &next_num, &next_den);
        }
        self.counts[level] = 0;
    }

    // Every split of `remaining` between the final two coordinates, with the
    // ratios updated incrementally along the split.
    fn last_two(&mut self, level: usize, remaining: usize, num: &[f64], den: &[f64]) {
        let scale = 1.0 / self.n as f64;
        let r = remaining as f64 * scale;
        let rows = num.len();
        let mut n0 = Vec::with_capacity(rows);
        let mut d0 = Vec::with_capacity(rows);
        let mut dn = Vec::with_capacity(rows);
        let mut dd = Vec::with_capacity(rows);
        for i in 0..rows {
            let (a, b) = (&self.inst.a[i], &self.inst.b[i]);
            n0.push(num[i] + r * a[level + 1]);
            d0.push(den[i] + r * b[level + 1]);
            dn.push(scale * (a[level] - a[level + 1]));
            dd.push(scale * (b[level] - b[level + 1]));
        }
        let mut best_k = None;
        for k in 0..=remaining {
            let t = k as f64;
            let mut value = f64::INFINITY;
            for i in 0..rows {
                value = value.min((n0[i] + t * dn[i]) / (d0[i] + t * dd[i]));
            }
            if value > self.best.0 {
                self.best.0 = value;
                best_k = Some(k);
            }
        }
        if let Some(k) = best_k {
            self.counts[level] = k;
            self.counts[level + 1] = remaining - k;
            self.best.1.clone_from(&self.counts);
            self.counts[level] = 0;
            self.counts[level + 1] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasibility_at_zero_picks_best_vertex() {
        let inst = LfpInstance::new(vec![vec![2.0, 1.0]], vec![vec![1.0, 1.0]], 0.0, 0.5).unwrap();
        let (t, w) = feasibility_lp(&inst, 0.0).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert_eq!(w, vec![1.0, 0.0]);
    }

    #[test]
    fn feasibility_above_any_ratio_is_negative() {
        let inst = LfpInstance::new(
            vec![vec![2.0, 1.0], vec![0.5, 3.0]],
            vec![vec![1.0, 1.0], vec![2.0, 0.7]],
            0.1,
            0.5,
        )
        .unwrap();
        let max_a = 3.0_f64;
        let gamma = (max_a + 0.1) / 0.5 + 1e-6;
        assert!(feasibility_lp(&inst, gamma).unwrap().0 < 0.0);
    }

    #[test]
    fn boundary_level_has_zero_slack() {
        let a = vec![vec![1.5, 2.5, 0.5], vec![3.0, 1.0, 2.0]];
        let inst = LfpInstance::new(a.clone(), a, 1.0, 1.0).unwrap();
        let (t, _) = feasibility_lp(&inst, 1.0).unwrap();
        assert!(t.abs() < 1e-12, "{t}");
    }

    #[test]
    fn single_ratio_concentrates_on_best_vertex() {
        let inst = LfpInstance::new(vec![vec![3.0, 5.0]], vec![vec![2.0, 2.0]], 0.0, 1.0).unwrap();
        let sol = solve_lfp(&inst, 1e-10).unwrap();
        assert_eq!(sol.weights, vec![0.0, 1.0]);
        assert!((sol.gamma - 5.0 / 3.0).abs() < 1e-10);
        assert_eq!(sol.support_size, 1);
    }

    #[test]
    fn constant_instance_gives_constant_ratio() {
        let inst = LfpInstance::new(vec![vec![2.0; 4]; 3], vec![vec![3.0; 4]; 3], 0.5, 1.0).unwrap();
        let sol = solve_lfp(&inst, 1e-9).unwrap();
        assert!((sol.gamma - 2.5 / 4.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let inst = LfpInstance::new(vec![vec![1.0]], vec![vec![1.0]], 0.0, 1.0).unwrap();
        assert!(matches!(solve_lfp(&inst, 0.0), Err(Error::Domain(_))));
        assert!(matches!(solve_lfp(&inst, -1.0), Err(Error::Domain(_))));
        assert!(matches!(brute_force_lfp(&inst, 0.0), Err(Error::Domain(_))));
        assert!(matches!(brute_force_lfp(&inst, 0.6), Err(Error::Domain(_))));
        assert!(LfpInstance::new(vec![vec![1.0]], vec![vec![0.0]], 0.0, 1.0).is_err());
        assert!(LfpInstance::new(vec![vec![1.0]], vec![vec![1.0]], 0.0, 0.0).is_err());
        assert!(LfpInstance::new(vec![vec![1.0, 2.0]], vec![vec![1.0]], 0.0, 1.0).is_err());
        let wide = LfpInstance::new(vec![vec![1.0; 7]], vec![vec![1.0; 7]], 0.0, 1.0).unwrap();
        assert!(matches!(brute_force_lfp(&wide, 0.1), Err(Error::TooLarge(_))));
    }

    #[test]
    fn brute_force_small_cases() {
        let one = LfpInstance::new(vec![vec![4.0], vec![1.0]], vec![vec![2.0], vec![3.0]], 0.0, 1.0)
            .unwrap();
        assert_eq!(brute_force_lfp(&one, 0.1).unwrap().1, vec![1.0]);
        let inst = LfpInstance::new(vec![vec![3.0, 5.0]], vec![vec![2.0, 2.0]], 0.0, 1.0).unwrap();
        let (g, w) = brute_force_lfp(&inst, 0.01).unwrap();
        assert_eq!(w, vec![0.0, 1.0]);
        assert!((g - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn from_flat_is_row_major() {
        let inst = LfpInstance::from_flat(2, 2, &[1.0, 2.0, 3.0, 4.0], &[1.0; 4], 0.0, 1.0).unwrap();
        assert_eq!(inst.a()[1], vec![3.0, 4.0]);
    }
}
