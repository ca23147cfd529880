//! Dense bounded-variable primal simplex, two phases, Bland's rule.
//!
//! Solves `min c·x  s.t.  A x = b,  lo ≤ x ≤ hi`. Every variable needs a
//! finite lower bound; upper bounds may be infinite.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedLp {
    /// Row-major, `m × n`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals π; reduced costs are `c - Aᵀπ`. Empty unless optimal.
    pub duals: Vec<f64>,
    /// Lower bound on the optimum implied by `duals`.
    pub dual_bound: Option<f64>,
    /// Per-row residual left after phase 1; non-zero rows are violated.
    pub residuals: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum At {
    Lower,
    Upper,
    Basic,
}

struct Tableau {
    /// `B⁻¹ [A | I]` for the sign-normalized rows.
    t: Vec<Vec<f64>>,
    /// Basic variable of each row.
    basis: Vec<usize>,
    /// Values of the basic variables.
    xb: Vec<f64>,
    state: Vec<At>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            At::Lower => self.lo[j],
            At::Upper => self.hi[j],
            At::Basic => {
                let r = self.basis.iter().position(|&v| v == j).expect("basic variable has a row");
                self.xb[r]
            }
        }
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        cost[j] - self.basis.iter().zip(&self.t).map(|(&v, row)| cost[v] * row[j]).sum::<f64>()
    }

    /// Runs primal simplex iterations on `cost`. Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[f64], iterations: &mut usize) -> Result<bool> {
        let n = self.state.len();
        loop {
            *iterations += 1;
            if *iterations > MAX_ITERATIONS {
                return Err(Error::Guard("simplex iteration limit reached".into()));
            }
            // Bland: lowest-index improving variable.
            let entering = (0..n).find_map(|j| {
                let movable = self.hi[j] > self.lo[j];
                match self.state[j] {
                    At::Lower if movable => {
                        let d = self.reduced_cost(cost, j);
                        (d < -COST_TOL).then_some((j, 1.0))
                    }
                    At::Upper if movable => {
                        let d = self.reduced_cost(cost, j);
                        (d > COST_TOL).then_some((j, -1.0))
                    }
                    _ => None,
                }
            });
            let Some((j, dir)) = entering else {
                return Ok(true);
            };

            // Ratio test; the entering variable's own range acts as a bound flip.
            let mut step = self.hi[j] - self.lo[j];
            let mut leaving: Option<(usize, At)> = None;
            for (r, row) in self.t.iter().enumerate() {
                let alpha = row[j] * dir;
                let v = self.basis[r];
                let (limit, bound) = if alpha > PIVOT_TOL {
                    ((self.xb[r] - self.lo[v]) / alpha, At::Lower)
                } else if alpha < -PIVOT_TOL && self.hi[v].is_finite() {
                    ((self.hi[v] - self.xb[r]) / -alpha, At::Upper)
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let better = match leaving {
                    _ if limit < step - 1e-12 => true,
                    Some((lr, _)) if (limit - step).abs() <= 1e-12 => v < self.basis[lr],
                    None if limit <= step => true,
                    _ => false,
                };
                if better {
                    step = limit;
                    leaving = Some((r, bound));
                }
            }
            if step.is_infinite() {
                return Ok(false);
            }

            for (r, row) in self.t.iter().enumerate() {
                self.xb[r] -= dir * step * row[j];
            }
            match leaving {
                None => {
                    self.state[j] = if dir > 0.0 { At::Upper } else { At::Lower };
                }
                Some((r, bound)) => {
                    let entering_value = if dir > 0.0 { self.lo[j] + step } else { self.hi[j] - step };
                    let old = self.basis[r];
                    self.state[old] = bound;
                    self.state[j] = At::Basic;
                    self.basis[r] = j;
                    self.xb[r] = entering_value;
                    self.pivot(r, j);
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[r][j];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
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
    }
}

impl BoundedLp {
    fn check(&self) -> Result<(usize, usize)> {
        let m = self.a.len();
        let n = self.c.len();
        if self.b.len() != m || self.lo.len() != n || self.hi.len() != n || self.a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParams("LP dimensions do not agree".into()));
        }
        for j in 0..n {
            if !self.lo[j].is_finite() || self.hi[j] < self.lo[j] || self.hi[j].is_nan() {
                return Err(Error::InvalidParams(format!("variable {j} has invalid bounds")));
            }
        }
        Ok((m, n))
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let (m, n) = self.check()?;
        let total = n + m;

        // Nonbasic structurals start at their lower bound; one artificial per
        // row absorbs the residual, rows flipped so it starts non-negative.
        let residual: Vec<f64> = (0..m)
            .map(|i| self.b[i] - (0..n).map(|j| self.a[i][j] * self.lo[j]).sum::<f64>())
            .collect();
        let sign: Vec<f64> = residual.iter().map(|&r| if r < 0.0 { -1.0 } else { 1.0 }).collect();
        let t: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = self.a[i].iter().map(|v| v * sign[i]).collect();
                row.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        lo.extend(std::iter::repeat_n(0.0, m));
        hi.extend(std::iter::repeat_n(f64::INFINITY, m));
        let mut state = vec![At::Lower; n];
        state.extend(std::iter::repeat_n(At::Basic, m));
        let mut tab = Tableau {
            t,
            basis: (n..total).collect(),
            xb: residual.iter().map(|r| r.abs()).collect(),
            state,
            lo,
            hi,
        };

        let mut iterations = 0;
        let mut phase1 = vec![0.0; total];
        phase1[n..].iter_mut().for_each(|c| *c = 1.0);
        tab.optimize(&phase1, &mut iterations)?;

        let scale = 1.0 + self.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let residuals: Vec<f64> = (0..m).map(|i| tab.value(n + i) * sign[i]).collect();
        let x: Vec<f64> = (0..n).map(|j| tab.value(j)).collect();
        if residuals.iter().any(|r| r.abs() > FEAS_TOL * scale) {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                objective: dot(&self.c, &x),
                x,
                duals: Vec::new(),
                dual_bound: None,
                residuals,
            });
        }

        // Phase 2: artificials pinned at zero.
        for k in n..total {
            tab.hi[k] = 0.0;
            if tab.state[k] == At::Upper {
                tab.state[k] = At::Lower;
            }
        }
        let mut phase2 = self.c.clone();
        phase2.extend(std::iter::repeat_n(0.0, m));
        let bounded = tab.optimize(&phase2, &mut iterations)?;
        let x: Vec<f64> = (0..n).map(|j| tab.value(j)).collect();
        let objective = dot(&self.c, &x);
        if !bounded {
            return Ok(LpOutcome {
                status: LpStatus::Unbounded,
                x,
                objective: f64::NEG_INFINITY,
                duals: Vec::new(),
                dual_bound: None,
                residuals,
            });
        }

        // π' = c_B B⁻¹ for the flipped rows; the artificial columns hold B⁻¹.
        let duals: Vec<f64> = (0..m)
            .map(|i| {
                let col = n + i;
                sign[i] * tab.basis.iter().zip(&tab.t).map(|(&v, row)| phase2[v] * row[col]).sum::<f64>()
            })
            .collect();
        let dual_bound = self.dual_bound(&duals);
        Ok(LpOutcome {
            status: LpStatus::Optimal,
            x,
            objective,
            duals,
            dual_bound,
            residuals,
        })
    }

    /// Lagrangian bound `b·π + Σ_j min_{lo ≤ x ≤ hi} (c_j − A_jᵀπ) x`; valid
    /// for any π, `None` when it is −∞.
    pub fn dual_bound(&self, duals: &[f64]) -> Option<f64> {
        let mut bound = dot(&self.b, duals);
        for j in 0..self.c.len() {
            let d = self.c[j] - (0..self.a.len()).map(|i| self.a[i][j] * duals[i]).sum::<f64>();
            if d >= 0.0 {
                bound += d * self.lo[j];
            } else if self.hi[j].is_finite() {
                bound += d * self.hi[j];
            } else if d < -COST_TOL {
                return None;
            }
        }
        Some(bound)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
