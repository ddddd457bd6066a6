//! Reference solvers and run monitors shared by the integration tests. The
//! reference solvers are self-contained; only the run helpers call the
//! library's solvers.

#![allow(dead_code)]

pub mod cases;

use pdcgm::ipm::{primal_dual_objectives, PrimalDualPoint};
use pdcgm::lp::{LinearProgram, RowKind, VarKind};
use pdcgm::mcnf::Arc;
use pdcgm::pdcgm::{DriverConfig, DriverEvent, IterationRecord, Mode, STANDARD_EPS};

const SINGULAR_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;

/// Gaussian elimination with partial pivoting. `None` if `a` is singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < SINGULAR_TOL {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enumerated {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Dense `[A | slacks] x = b` of an LP with only nonnegative variables.
fn dense_standard(lp: &LinearProgram) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    assert!(lp.var_kinds().iter().all(|k| *k == VarKind::NonNegative));
    let n = lp.num_vars();
    let slacks: Vec<usize> = (0..lp.num_rows())
        .filter(|&i| lp.row_kinds()[i] == RowKind::LessEqual)
        .collect();
    let width = n + slacks.len();
    let mut a = vec![vec![0.0; width]; lp.num_rows()];
    for (i, row) in lp.rows().iter().enumerate() {
        for &(j, v) in row {
            a[i][j] = v;
        }
    }
    for (s, &i) in slacks.iter().enumerate() {
        a[i][n + s] = 1.0;
    }
    let mut c = lp.objective().to_vec();
    c.resize(width, 0.0);
    (a, lp.rhs().to_vec(), c)
}

/// Keeps a maximal independent subset of rows. `None` if the dropped rows
/// contradict the kept ones.
fn independent_rows(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<usize>> {
    let mut echelon: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    let mut keep = Vec::new();
    for (i, row) in a.iter().enumerate() {
        let mut r = row.clone();
        let mut rb = b[i];
        for (e, eb, p) in &echelon {
            let f = r[*p] / e[*p];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(e) {
                    *x -= f * y;
                }
                rb -= f * eb;
            }
        }
        let (p, big) = r
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.abs()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if big < 1e-9 {
            if rb.abs() > 1e-7 {
                return None;
            }
            continue;
        }
        echelon.push((r, rb, p));
        keep.push(i);
    }
    Some(keep)
}

/// Solves an LP with nonnegative variables by enumerating every basis of
/// its standard form. Unboundedness is detected through the extreme rays
/// `d_N = e_j, d_B = -B^-1 a_j`.
pub fn enumerate_vertices(lp: &LinearProgram) -> Enumerated {
    let (a, b, c) = dense_standard(lp);
    let Some(rows) = independent_rows(&a, &b) else {
        return Enumerated::Infeasible;
    };
    let width = c.len();
    let a: Vec<Vec<f64>> = rows.iter().map(|&i| a[i].clone()).collect();
    let b: Vec<f64> = rows.iter().map(|&i| b[i]).collect();
    let k = rows.len();
    let mut best = f64::INFINITY;
    let mut feasible = false;
    let mut descending_ray = false;
    combinations(width, k, &mut |basis| {
        let bm: Vec<Vec<f64>> = (0..k)
            .map(|i| basis.iter().map(|&j| a[i][j]).collect())
            .collect();
        let Some(xb) = solve_dense(bm.clone(), b.clone()) else {
            return;
        };
        if xb.iter().all(|v| *v >= -FEAS_TOL) {
            feasible = true;
            let z: f64 = basis.iter().zip(&xb).map(|(&j, v)| c[j] * v).sum();
            best = best.min(z);
        }
        for j in (0..width).filter(|j| !basis.contains(j)) {
            let col: Vec<f64> = (0..k).map(|i| a[i][j]).collect();
            let Some(w) = solve_dense(bm.clone(), col) else {
                continue;
            };
            if w.iter().all(|v| *v <= FEAS_TOL) {
                let slope = c[j] - basis.iter().zip(&w).map(|(&i, v)| c[i] * v).sum::<f64>();
                if slope < -1e-9 {
                    descending_ray = true;
                }
            }
        }
    });
    if !feasible {
        Enumerated::Infeasible
    } else if descending_ray {
        Enumerated::Unbounded
    } else {
        Enumerated::Optimal(best)
    }
}

/// Checks a Farkas certificate `y`: `A'y <= 0`, `y <= 0` on `<=` rows and
/// `b'y > 0`.
pub fn is_farkas_certificate(lp: &LinearProgram, y: &[f64]) -> bool {
    let aty = lp.transpose_times(y);
    let by: f64 = lp.rhs().iter().zip(y).map(|(b, v)| b * v).sum();
    let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    scale > 0.0
        && aty.iter().all(|v| *v <= 1e-9 * scale)
        && lp
            .row_kinds()
            .iter()
            .zip(y)
            .all(|(k, v)| *k == RowKind::Equal || *v <= 1e-9 * scale)
        && by > 1e-9 * scale
}

/// Checks an unbounded direction `d >= 0`: `A d = 0` on equality rows,
/// `A d <= 0` on `<=` rows, `c'd < 0`.
pub fn is_descent_ray(lp: &LinearProgram, d: &[f64]) -> bool {
    let scale = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let ad = lp.activities(d);
    scale > 0.0
        && d.iter().all(|v| *v >= -1e-9 * scale)
        && lp.row_kinds().iter().zip(&ad).all(|(k, v)| match k {
            RowKind::Equal => v.abs() <= 1e-9 * scale,
            RowKind::LessEqual => *v <= 1e-9 * scale,
        })
        && lp.objective_value(d) < -1e-9 * scale
}

/// Single-source shortest path lengths by Bellman-Ford.
pub fn bellman_ford(n: usize, arcs: &[Arc], lengths: &[f64], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    for _ in 1..n {
        let mut changed = false;
        for (a, &l) in arcs.iter().zip(lengths) {
            if dist[a.tail] + l < dist[a.head] {
                dist[a.head] = dist[a.tail] + l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Minimizes `sum_k beta_k (a_ik t^2 / 2 - b_ik t)` over a grid of step `h`
/// on `[0, upper]`, one coordinate at a time.
pub fn grid_minimizer(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    beta: &[f64],
    upper: f64,
    h: f64,
) -> Vec<f64> {
    let steps = (upper / h).round() as usize;
    (0..a[0].len())
        .map(|i| {
            let f = |t: f64| -> f64 {
                beta.iter()
                    .enumerate()
                    .map(|(k, w)| w * (0.5 * a[k][i] * t * t - b[k][i] * t))
                    .sum()
            };
            (0..=steps)
                .map(|s| (s as f64 * h).min(upper))
                .min_by(|x, y| f(*x).total_cmp(&f(*y)))
                .expect("nonempty grid")
        })
        .collect()
}

/// Slack in the gap test: the lower side allows `-1e-9 * (1 + |z_ub|)`.
pub const GAP_FLOOR_TOL: f64 = 1e-9;

/// Records every violation of the driver contract seen during a run:
/// the `eps` gap bound and `gamma` centrality at each master solve, and
/// monotone bounds and the `eps` schedule over the trace.
#[derive(Debug, Default)]
pub struct ContractMonitor {
    pub solves: usize,
    pub violations: Vec<String>,
}

impl ContractMonitor {
    pub fn observe(&mut self, ev: DriverEvent<'_>) {
        let DriverEvent::MasterSolved {
            outer_index,
            lp,
            point,
            eps,
            gamma,
        } = ev
        else {
            return;
        };
        self.solves += 1;
        self.check_point(outer_index, lp, point, eps, gamma);
    }

    fn check_point(
        &mut self,
        t: usize,
        lp: &LinearProgram,
        point: &PrimalDualPoint,
        eps: f64,
        gamma: f64,
    ) {
        let (z_ub, z_lb) = match primal_dual_objectives(lp, point) {
            Ok(v) => v,
            Err(e) => {
                self.violations.push(format!("iter {t}: {e}"));
                return;
            }
        };
        let gap = z_ub - z_lb;
        if gap > eps * (1e-10 + z_ub.abs()) || gap < -GAP_FLOOR_TOL * (1.0 + z_ub.abs()) {
            self.violations.push(format!(
                "iter {t}: gap {gap:e} outside [0, {eps:e} * (1e-10 + |{z_ub}|)]"
            ));
        }
        let products = point.complementarity_products();
        if products.is_empty() {
            return;
        }
        let mu = products.iter().sum::<f64>() / products.len() as f64;
        if let Some(p) = products.iter().find(|&&p| p < gamma * mu || p > mu / gamma) {
            self.violations.push(format!(
                "iter {t}: product {p:e} outside [{:e}, {:e}]",
                gamma * mu,
                mu / gamma
            ));
        }
        if !point.centered {
            self.violations
                .push(format!("iter {t}: point not flagged centred"));
        }
    }

    pub fn check_trace(&mut self, trace: &[IterationRecord], cfg: &DriverConfig) {
        for w in trace.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            if cur.ub > prev.ub {
                self.violations.push(format!(
                    "iter {}: ub rose from {} to {}",
                    cur.outer_index, prev.ub, cur.ub
                ));
            }
            if cur.lb < prev.lb {
                self.violations.push(format!(
                    "iter {}: lb fell from {} to {}",
                    cur.outer_index, prev.lb, cur.lb
                ));
            }
        }
        for (i, r) in trace.iter().enumerate() {
            let expected = match (cfg.mode, i) {
                (Mode::Standard, _) => STANDARD_EPS,
                (Mode::Pdcgm, 0) => cfg.eps_max,
                (Mode::Pdcgm, _) => cfg.eps_max.min(trace[i - 1].gap / cfg.degree),
            };
            if r.eps_used != expected {
                self.violations.push(format!(
                    "iter {}: eps {} but schedule gives {}",
                    r.outer_index, r.eps_used, expected
                ));
            }
        }
    }
}

use pdcgm::mcnf::{mcnf_solution, McnfSolution, Network, ShortestPathOracle};
use pdcgm::pdcgm::{run_observed, DriverError};
use pdcgm::tssp::{ScenarioOracle, StochasticInstance};

/// MCNF run through the public driver with every event passed to `mon`.
pub fn run_mcnf_monitored(
    net: &Network,
    cfg: &DriverConfig,
    mon: &mut ContractMonitor,
) -> Result<McnfSolution, DriverError> {
    let mut oracle = ShortestPathOracle::new(net);
    let mut master = oracle.initial_master()?;
    let out = run_observed(&mut master, &mut oracle, cfg, &mut |ev| mon.observe(ev))?;
    mon.check_trace(&out.trace, cfg);
    Ok(mcnf_solution(net, &master, &oracle, out))
}

#[derive(Debug)]
pub struct TsspRun {
    pub objective: f64,
    pub outer_iterations: usize,
    pub trace: Vec<IterationRecord>,
}

/// TSSP run through the public driver with every event passed to `mon`.
pub fn run_tssp_monitored(
    inst: &StochasticInstance,
    cfg: &DriverConfig,
    mon: &mut ContractMonitor,
) -> Result<TsspRun, DriverError> {
    let mut oracle = ScenarioOracle::new(inst);
    let (mut master, _) = oracle.initial_master()?;
    let out = run_observed(&mut master, &mut oracle, cfg, &mut |ev| mon.observe(ev))?;
    mon.check_trace(&out.trace, cfg);
    Ok(TsspRun {
        objective: out.solution.objective(&master),
        outer_iterations: out.solution.outer_iterations,
        trace: out.trace,
    })
}

/// Parses `instances/<name>` from the workspace root.
pub fn workspace_instance(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
