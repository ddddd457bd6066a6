//! Dense two-phase primal simplex.
//!
//! Intended for the small LPs that arise as subproblems and for reference
//! solves in tests. Besides optimal solutions it reports unbounded directions
//! and Farkas certificates of infeasibility.

use thiserror::Error;

use crate::lp::{LinearProgram, RowKind, StandardForm, StdColumn};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

/// Result of a simplex solve.
///
/// * `Optimal`: `point`, `duals` and `objective` are set.
/// * `Unbounded`: `ray` is a direction `d` on the original variables with
///   `A d` homogeneous-feasible for every row kind and `c'd < 0`.
/// * `Infeasible`: `ray` is a certificate `y` with `A'y <= 0` on nonnegative
///   variables, `A'y = 0` on free variables, `y <= 0` on `<=` rows and
///   `b'y > 0`, scaled to unit max-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub status: SimplexStatus,
    pub point: Option<Vec<f64>>,
    pub duals: Option<Vec<f64>>,
    pub ray: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("simplex did not terminate within {iterations} pivots")]
    CycleDetected { iterations: usize },
}

const PIVOT_TOL: f64 = 1e-9;
const BLAND_AFTER: usize = 50;

struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    barred: Vec<bool>,
    pivots: usize,
    max_pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let p = self.t[r * w + e];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        self.t[r * w + e] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + e];
            if f != 0.0 {
                for j in 0..w {
                    self.t[i * w + j] -= f * self.t[r * w + j];
                }
                self.t[i * w + e] = 0.0;
            }
        }
        let f = self.obj[e];
        if f != 0.0 {
            for j in 0..w {
                self.obj[j] -= f * self.t[r * w + j];
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
        self.pivots += 1;
    }

    fn reset_objective(&mut self) {
        let w = self.width;
        self.obj = vec![0.0; w];
        self.obj[..w - 1].copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.obj[j] -= cb * self.t[i * w + j];
                }
            }
        }
        for &b in &self.basis {
            self.obj[b] = 0.0;
        }
    }

    fn run(&mut self, opt_tol: f64) -> Result<Phase, SimplexError> {
        let ncols = self.width - 1;
        let mut degenerate = 0usize;
        loop {
            if self.pivots >= self.max_pivots {
                return Err(SimplexError::CycleDetected {
                    iterations: self.pivots,
                });
            }
            let bland = degenerate >= BLAND_AFTER;
            let mut entering = None;
            let mut best = -opt_tol;
            for j in 0..ncols {
                if self.barred[j] {
                    continue;
                }
                let d = self.obj[j];
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(e) = entering else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, e);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best_ratio)) => {
                            let tie =
                                (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                            if (tie && self.basis[i] < self.basis[r])
                                || (!tie && ratio < best_ratio)
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best_ratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(Phase::Unbounded(e));
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, e);
        }
    }
}

/// Solves `lp` with the two-phase tableau method.
pub fn solve(lp: &LinearProgram) -> Result<SimplexOutcome, SimplexError> {
    let sf = StandardForm::from_lp(lp);
    let m = sf.num_rows;
    let n = sf.num_cols();

    let flip: Vec<f64> = sf
        .rhs
        .iter()
        .map(|&b| if b < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let mut slack_of_row = vec![None; m];
    for (k, o) in sf.origin.iter().enumerate() {
        if let StdColumn::Slack { row } = *o {
            slack_of_row[row] = Some(k);
        }
    }

    // Initial basis: the row's slack when it is a <= row with b >= 0, otherwise an artificial.
    let mut initial = vec![0usize; m];
    let mut num_art = 0;
    for i in 0..m {
        initial[i] = match (lp.row_kinds()[i], slack_of_row[i]) {
            (RowKind::LessEqual, Some(s)) if flip[i] > 0.0 => s,
            _ => {
                num_art += 1;
                n + num_art - 1
            }
        };
    }
    let ncols = n + num_art;
    let width = ncols + 1;
    let mut t = vec![0.0; m * width];
    for (j, col) in sf.columns.iter().enumerate() {
        for &(i, a) in col {
            t[i * width + j] = a * flip[i];
        }
    }
    for i in 0..m {
        if initial[i] >= n {
            t[i * width + initial[i]] = 1.0;
        }
        t[i * width + ncols] = sf.rhs[i] * flip[i];
    }

    let mut phase1_cost = vec![0.0; ncols];
    for c in phase1_cost.iter_mut().skip(n) {
        *c = 1.0;
    }
    let mut tab = Tableau {
        m,
        width,
        t,
        obj: Vec::new(),
        cost: phase1_cost,
        basis: initial.clone(),
        barred: vec![false; ncols],
        pivots: 0,
        max_pivots: 20_000 + 200 * (m + ncols),
    };

    let b_scale = 1.0 + sf.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let dual_of = |tab: &Tableau| -> Vec<f64> {
        (0..m)
            .map(|i| flip[i] * (tab.cost[initial[i]] - tab.obj[initial[i]]))
            .collect()
    };

    if num_art > 0 {
        tab.reset_objective();
        tab.run(1e-11)?;
        let infeasibility = -tab.obj[ncols];
        if infeasibility > 1e-9 * b_scale {
            let mut y = dual_of(&tab);
            let scale = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if scale > 0.0 {
                for v in &mut y {
                    *v /= scale;
                }
            }
            return Ok(SimplexOutcome {
                status: SimplexStatus::Infeasible,
                point: None,
                duals: None,
                ray: Some(y),
                objective: None,
                iterations: tab.pivots,
            });
        }
        for r in 0..m {
            if tab.basis[r] < n {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                let a = tab.at(r, j).abs();
                if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                tab.pivot(r, j);
            }
        }
        for j in n..ncols {
            tab.barred[j] = true;
        }
    }

    let mut cost = sf.cost.clone();
    cost.resize(ncols, 0.0);
    tab.cost = cost;
    tab.reset_objective();
    let c_scale = 1.0 + sf.cost.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    match tab.run(1e-10 * c_scale)? {
        Phase::Unbounded(e) => {
            let mut d = vec![0.0; n];
            d[e] = 1.0;
            for i in 0..m {
                let b = tab.basis[i];
                if b < n {
                    d[b] = -tab.at(i, e);
                }
            }
            let ray = sf.recover(&d, lp.num_vars());
            Ok(SimplexOutcome {
                status: SimplexStatus::Unbounded,
                point: None,
                duals: None,
                ray: Some(ray),
                objective: None,
                iterations: tab.pivots,
            })
        }
        Phase::Optimal => {
            let mut xs = vec![0.0; n];
            for i in 0..m {
                let b = tab.basis[i];
                if b < n {
                    xs[b] = tab.rhs(i).max(0.0);
                }
            }
            let x = sf.recover(&xs, lp.num_vars());
            let duals = dual_of(&tab);
            let objective = lp.objective_value(&x);
            Ok(SimplexOutcome {
                status: SimplexStatus::Optimal,
                point: Some(x),
                duals: Some(duals),
                ray: None,
                objective: Some(objective),
                iterations: tab.pivots,
            })
        }
    }
}
