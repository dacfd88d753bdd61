//! Dense-tableau primal simplex with Bland's rule.
//!
//! Meant for oracle-sized problems (a few hundred columns). The tableau keeps
//! a feasible basis between objectives, so one polytope can be optimized in
//! several directions without repeating phase one.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// Equality-form LP feasible set `{x >= 0 : A x = b}` with a current basis.
#[derive(Debug, Clone)]
pub struct Tableau {
    cols: usize,
    /// One row per non-redundant constraint; the last entry is the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    /// Runs phase one on `A x = b` (dense rows of `a`). Redundant rows are
    /// dropped once all artificial variables have left the basis.
    pub fn feasible(a: &[Vec<f64>], b: &[f64], cols: usize) -> Result<Tableau> {
        let m = a.len();
        let width = cols + m + 1;
        let mut rows = Vec::with_capacity(m);
        for (r, (row, &rhs)) in a.iter().zip(b).enumerate() {
            let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
            let mut t = vec![0.0; width];
            for (j, &x) in row.iter().enumerate() {
                t[j] = sign * x;
            }
            t[cols + r] = 1.0;
            t[width - 1] = sign * rhs;
            rows.push(t);
        }
        let mut tab = Tableau {
            cols: cols + m,
            rows,
            basis: (cols..cols + m).collect(),
            pivots: 0,
        };

        let mut phase_one = vec![0.0; cols + m];
        phase_one[cols..].iter_mut().for_each(|c| *c = 1.0);
        let allowed = vec![true; cols + m];
        let infeasibility = tab.optimize(&phase_one, &allowed)?;
        let scale = 1.0 + b.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if infeasibility > 1e-7 * scale {
            return Err(Error::Numerical(format!(
                "LP infeasible (residual {infeasibility:e})"
            )));
        }

        // Drive zero-level artificials out of the basis or drop their rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= cols {
                let entering = (0..cols).find(|&j| tab.rows[r][j].abs() > PIVOT_EPS);
                match entering {
                    Some(j) => {
                        tab.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        tab.rows.swap_remove(r);
                        tab.basis.swap_remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for row in &mut tab.rows {
            let rhs = row[width - 1];
            row.truncate(cols);
            row.push(rhs);
        }
        tab.cols = cols;
        Ok(tab)
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Total pivots performed so far.
    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.cols]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        self.pivots += 1;
        let p = self.rows[r][j];
        let pivot_row: Vec<f64> = self.rows[r].iter().map(|x| x / p).collect();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let factor = row[j];
            if factor != 0.0 {
                for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                    *x -= factor * pr;
                }
                row[j] = 0.0;
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }

    /// Reduced costs `c_j - c_B^T B^{-1} A_j` for the current basis.
    pub fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let mut d = c[..self.cols].to_vec();
        for (r, &bj) in self.basis.iter().enumerate() {
            let cb = c[bj];
            if cb != 0.0 {
                for (dj, &a) in d.iter_mut().zip(&self.rows[r]) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Minimizes `c^T x` from the current basis. Only columns flagged in
    /// `allowed` may enter. Returns the optimal value.
    pub fn optimize(&mut self, c: &[f64], allowed: &[bool]) -> Result<f64> {
        let scale = 1.0 + c.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        let cost_eps = 1e-11 * scale;
        let mut d = self.reduced_costs(c);
        let mut in_basis = vec![false; self.cols];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numerical("simplex pivot limit reached".into()));
            }
            // Bland: lowest-index improving column.
            let Some(j) = (0..self.cols).find(|&j| allowed[j] && !in_basis[j] && d[j] < -cost_eps)
            else {
                break;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][j];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((best, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br && !tie || tie && self.basis[r] < self.basis[best] {
                                Some((r, ratio))
                            } else {
                                Some((best, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Numerical("LP unbounded".into()));
            };
            in_basis[self.basis[r]] = false;
            in_basis[j] = true;
            let dj = d[j];
            let pr: Vec<f64> = self.rows[r].iter().map(|x| x / self.rows[r][j]).collect();
            for (dk, &a) in d.iter_mut().zip(&pr) {
                *dk -= dj * a;
            }
            self.pivot(r, j);
        }
        Ok(self.objective(c))
    }

    pub fn objective(&self, c: &[f64]) -> f64 {
        self.basis
            .iter()
            .enumerate()
            .map(|(r, &bj)| c[bj] * self.rhs(r))
            .sum()
    }

    /// Current basic solution.
    pub fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for (r, &bj) in self.basis.iter().enumerate() {
            x[bj] = self.rhs(r).max(0.0);
        }
        x
    }
}

/// Minimizes `c^T x` subject to `A x = b`, `x >= 0`.
pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut tab = Tableau::feasible(a, b, c.len())?;
    let value = tab.optimize(c, &vec![true; c.len()])?;
    Ok((value, tab.solution()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + s1 = 2, y + s2 = 3, x + y + s3 = 4
        let a = vec![
            vec![1.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 1.0],
        ];
        let (v, x) = solve(&a, &[2.0, 3.0, 4.0], &[-1.0, -1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((v + 4.0).abs() < 1e-12);
        assert!((x[0] + x[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![1.0, 1.0]];
        let tab = Tableau::feasible(&a, &[1.0, 2.0, 1.0], 2).unwrap();
        assert_eq!(tab.num_rows(), 1);
    }

    #[test]
    fn infeasible_detected() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(Tableau::feasible(&a, &[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        let a = vec![vec![-1.0, -1.0]];
        let (v, _) = solve(&a, &[-3.0], &[1.0, 2.0]).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's classic cycling example in equality form.
        let a = vec![
            vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let c = [-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0];
        let (v, _) = solve(&a, &[0.0, 0.0, 1.0], &c).unwrap();
        assert!((v + 0.05).abs() < 1e-9);
    }
}
