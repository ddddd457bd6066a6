//! Infeasible primal-dual interior point method with early termination.
//!
//! [`solve_to_gap`] runs Mehrotra predictor-corrector iterations on the
//! standard form of a [`LinearProgram`] and stops as soon as the iterate is
//! feasible, its relative duality gap is below the requested `eps`, and every
//! complementarity product lies in the symmetric neighbourhood
//! `[gamma * mu, mu / gamma]`. Stopping early at a well-centred point is what
//! makes the returned duals useful for column generation.
//!
//! Free variables are kept as single columns without a dual slack; only the
//! nonnegative columns enter `mu` and the neighbourhood test.

use thiserror::Error;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::linalg::{dot, norm_inf, Cholesky, SymMatrix};
use crate::lp::{LinearProgram, StandardForm};

pub const MAX_ITERATIONS: usize = 200;
pub const DEFAULT_GAMMA: f64 = 0.1;

const STEP_FRACTION: f64 = 0.99995;
const FEASIBILITY_TOL: f64 = 1e-8;
const STALL_WINDOW: usize = 30;
const STALL_FACTOR: f64 = 0.9;
const MAX_CENTERING_RUN: usize = 25;
/// Share of the allowed gap kept as a floor on the centering target, so that
/// loose solves stop near their gap instead of far below it. The floor is
/// dropped after `FLOOR_WINDOW` iterations without progress.
const TARGET_GAP_SHARE: f64 = 0.5;
const FLOOR_WINDOW: usize = 5;
/// Primal proximal regularization; bounds the normal-equation weights.
const REGULARIZATION: f64 = 1e-8;
/// Iterative refinement passes on `A dx = rp`.
const REFINEMENT_PASSES: usize = 3;
/// Products are kept 1% inside the neighbourhood so that the property still
/// holds after the caller recomputes them.
const CENTRALITY_MARGIN: f64 = 1.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IpmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("interior point method failed: {0}")]
    NumericalFailure(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Raw `(x, y, z)` iterate in standard form.
type Iterate = (Vec<f64>, Vec<f64>, Vec<f64>);

/// An interior iterate together with its quality measures.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    /// Values of the original variables.
    pub primal: Vec<f64>,
    /// One multiplier per row. Duals of `<=` rows are nonpositive.
    pub duals: Vec<f64>,
    /// Dual slacks, one per standard-form column (row slacks first, then
    /// variables). Zero on free columns.
    pub slacks: Vec<f64>,
    /// Primal values of the standard-form columns, aligned with `slacks`.
    pub std_primal: Vec<f64>,
    /// Marks the free standard-form columns.
    pub free: Vec<bool>,
    /// Average complementarity product over the nonnegative columns.
    pub mu: f64,
    /// `(c'x - b'y) / (1e-10 + |c'x|)`.
    pub rel_gap: f64,
    pub centered: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub warm_started: bool,
}

impl PrimalDualPoint {
    /// Complementarity products `x_j z_j` over the nonnegative standard-form
    /// columns.
    pub fn complementarity_products(&self) -> Vec<f64> {
        self.std_primal
            .iter()
            .zip(&self.slacks)
            .zip(&self.free)
            .filter(|(_, f)| !**f)
            .map(|((x, z), _)| x * z)
            .collect()
    }
}

/// Primal and dual objective values `(c'x, b'y)` of a point.
pub fn primal_dual_objectives(
    lp: &LinearProgram,
    point: &PrimalDualPoint,
) -> Result<(f64, f64), IpmError> {
    if point.primal.len() != lp.num_vars() || point.duals.len() != lp.num_rows() {
        return Err(IpmError::DimensionMismatch(format!(
            "point has {} primal and {} dual entries, program has {} variables and {} rows",
            point.primal.len(),
            point.duals.len(),
            lp.num_vars(),
            lp.num_rows()
        )));
    }
    Ok((
        lp.objective_value(&point.primal),
        dot(lp.rhs(), &point.duals),
    ))
}

/// Solves `lp` to relative gap `eps` at a point centred with parameter `gamma`.
///
/// A `warm` point is reused when its dimensions are compatible with `lp`,
/// which is the case when variables were only appended since it was computed.
/// An incompatible warm point silently triggers a cold start.
pub fn solve_to_gap(
    lp: &LinearProgram,
    eps: f64,
    gamma: f64,
    warm: Option<&PrimalDualPoint>,
) -> Result<PrimalDualPoint, IpmError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(IpmError::InvalidParameter(format!(
            "eps = {eps} must lie in (0, 1]"
        )));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(IpmError::InvalidParameter(format!(
            "gamma = {gamma} must lie in (0, 1)"
        )));
    }
    let sf = StandardForm::keeping_free(lp);
    let n = sf.num_cols();
    if n == 0 {
        return if norm_inf(&sf.rhs) == 0.0 {
            Ok(PrimalDualPoint {
                primal: vec![0.0; lp.num_vars()],
                duals: vec![0.0; sf.num_rows],
                slacks: Vec::new(),
                std_primal: Vec::new(),
                free: Vec::new(),
                mu: 0.0,
                rel_gap: 0.0,
                centered: true,
                primal_residual: 0.0,
                dual_residual: 0.0,
                iterations: 0,
                warm_started: false,
            })
        } else {
            Err(IpmError::NumericalFailure(
                "program without columns has nonzero right-hand side".into(),
            ))
        };
    }
    let solver = Solver { sf: &sf, gamma };
    let (x, y, z, warm_started) = match warm.and_then(|w| solver.warm_start(w)) {
        Some((x, y, z)) => (x, y, z, true),
        None => {
            let (x, y, z) = solver.cold_start()?;
            (x, y, z, false)
        }
    };
    let mut point = solver.iterate(x, y, z, eps)?;
    point.free = sf.free.clone();
    point.primal = sf.recover(&point.std_primal, lp.num_vars());
    point.warm_started = warm_started;
    Ok(point)
}

struct Solver<'a> {
    sf: &'a StandardForm,
    gamma: f64,
}

enum NewtonSystem {
    Normal(Cholesky),
    Augmented {
        lu: LU<f64, Dyn, Dyn>,
        free: Vec<usize>,
    },
}

impl NewtonSystem {
    fn free(&self) -> &[usize] {
        match self {
            NewtonSystem::Normal(_) => &[],
            NewtonSystem::Augmented { free, .. } => free,
        }
    }
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
}

/// Largest step keeping the nonnegative entries of `v + alpha dv` nonnegative.
fn max_step(v: &[f64], dv: &[f64], free: &[bool]) -> f64 {
    let mut alpha = f64::INFINITY;
    for ((a, d), f) in v.iter().zip(dv).zip(free) {
        if *d < 0.0 && !*f {
            alpha = alpha.min(-a / d);
        }
    }
    alpha
}

impl<'a> Solver<'a> {
    fn normal_matrix(&self, d: &[f64]) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.sf.num_rows);
        for (col, &w) in self.sf.columns.iter().zip(d) {
            m.add_outer(col, w);
        }
        m
    }

    fn factor(&self, d: &[f64]) -> Result<Cholesky, IpmError> {
        Cholesky::factor(&self.normal_matrix(d))
            .ok_or_else(|| IpmError::NumericalFailure("Cholesky factorization broke down".into()))
    }

    fn cold_start(&self) -> Result<Iterate, IpmError> {
        let sf = self.sf;
        let n = sf.num_cols();
        let ones = vec![1.0; n];
        let chol = self.factor(&ones)?;
        let w = chol.solve(&sf.rhs);
        let mut x = sf.transpose_times(&w);
        let ac = sf.times(&sf.cost);
        let y = chol.solve(&ac);
        let aty = sf.transpose_times(&y);
        let mut z: Vec<f64> = (0..n)
            .map(|j| if sf.free[j] { 0.0 } else { sf.cost[j] - aty[j] })
            .collect();

        let bounded: Vec<usize> = (0..n).filter(|&j| !sf.free[j]).collect();
        let lowest = |v: &[f64]| bounded.iter().map(|&j| v[j]).fold(f64::INFINITY, f64::min);
        let dx = (-1.5 * lowest(&x)).max(0.0);
        let dz = (-1.5 * lowest(&z)).max(0.0);
        for &j in &bounded {
            x[j] += dx;
            z[j] += dz;
        }
        let xz: f64 = bounded.iter().map(|&j| x[j] * z[j]).sum();
        let sx: f64 = bounded.iter().map(|&j| x[j]).sum();
        let sz: f64 = bounded.iter().map(|&j| z[j]).sum();
        let ddx = if sz > 0.0 { 0.5 * xz / sz } else { 0.0 };
        let ddz = if sx > 0.0 { 0.5 * xz / sx } else { 0.0 };
        let floor_x = 1e-2 * (1.0 + norm_inf(&sf.rhs)).sqrt();
        let floor_z = 1e-2 * (1.0 + norm_inf(&sf.cost)).sqrt();
        for &j in &bounded {
            x[j] = (x[j] + ddx).max(floor_x);
            z[j] = (z[j] + ddz).max(floor_z);
        }
        if x.iter().chain(&z).chain(&y).any(|v| !v.is_finite()) {
            return Err(IpmError::NumericalFailure(
                "non-finite starting point".into(),
            ));
        }
        Ok((x, y, z))
    }

    fn warm_start(&self, w: &PrimalDualPoint) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let sf = self.sf;
        let n = sf.num_cols();
        let old = w.std_primal.len();
        if w.duals.len() != sf.num_rows || w.slacks.len() != old || old > n || old == 0 {
            return None;
        }
        if w.free.len() != old || w.free[..] != sf.free[..old] {
            return None;
        }
        let interior = (0..old).all(|j| {
            let (xj, zj) = (w.std_primal[j], w.slacks[j]);
            xj.is_finite() && zj.is_finite() && (sf.free[j] || (xj > 0.0 && zj > 0.0))
        });
        if !interior {
            return None;
        }
        let y = w.duals.clone();
        let mut x = w.std_primal.clone();
        let mut z = w.slacks.clone();
        let bounded_old = (0..old).filter(|&j| !sf.free[j]).count().max(1);
        let mu0 = (self.bounded_dot(&x, &z) / bounded_old as f64).max(1e-12);
        let root = mu0.sqrt();
        for j in old..n {
            if sf.free[j] {
                z.push(0.0);
                x.push(0.0);
                continue;
            }
            let reduced = sf.cost[j] - sf.columns[j].iter().map(|&(i, a)| a * y[i]).sum::<f64>();
            let zj = reduced.max(root);
            z.push(zj);
            x.push(mu0 / zj);
        }
        let mu = self.mu(&x, &z);
        let low = self.gamma * mu * CENTRALITY_MARGIN * CENTRALITY_MARGIN;
        for j in 0..n {
            if !sf.free[j] && x[j] * z[j] < low {
                x[j] = low / z[j];
            }
        }
        Some((x, y, z))
    }

    fn bounded_dot(&self, x: &[f64], z: &[f64]) -> f64 {
        (0..x.len())
            .filter(|&j| !self.sf.free[j])
            .map(|j| x[j] * z[j])
            .sum()
    }

    fn mu(&self, x: &[f64], z: &[f64]) -> f64 {
        let count = self.sf.free.iter().filter(|f| !**f).count();
        if count == 0 {
            0.0
        } else {
            self.bounded_dot(x, z) / count as f64
        }
    }

    /// Factors the reduced Newton system. Without free columns this is the
    /// normal matrix `A D A'`. With free columns it is the saddle-point matrix
    /// `[A_b D A_b', A_f; A_f', -rho I]`, which is factored by pivoted LU since
    /// `A_b D A_b'` alone may be singular.
    fn newton_system(&self, d: &[f64]) -> Result<NewtonSystem, IpmError> {
        let sf = self.sf;
        let rows = sf.num_rows;
        let mut m = SymMatrix::zeros(rows);
        for (j, col) in sf.columns.iter().enumerate() {
            if !sf.free[j] {
                m.add_outer(col, d[j]);
            }
        }
        let free: Vec<usize> = (0..sf.num_cols()).filter(|&j| sf.free[j]).collect();
        if free.is_empty() {
            let chol = Cholesky::factor(&m).ok_or_else(|| {
                IpmError::NumericalFailure("Cholesky factorization broke down".into())
            })?;
            return Ok(NewtonSystem::Normal(chol));
        }
        let size = rows + free.len();
        let mut k = DMatrix::zeros(size, size);
        for i in 0..rows {
            for j in 0..rows {
                k[(i, j)] = m.get(i, j);
            }
        }
        let rho = REGULARIZATION;
        for (p, &j) in free.iter().enumerate() {
            for &(i, a) in &sf.columns[j] {
                k[(i, rows + p)] = a;
                k[(rows + p, i)] = a;
            }
            k[(rows + p, rows + p)] = -rho;
        }
        Ok(NewtonSystem::Augmented { lu: k.lu(), free })
    }

    /// Solves `M dy + A_f dx_f = r` and `A_f' dy = g`, the latter up to the
    /// regularization.
    fn solve_reduced(
        &self,
        sys: &NewtonSystem,
        r: &[f64],
        g: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), IpmError> {
        match sys {
            NewtonSystem::Normal(chol) => Ok((chol.solve(r), Vec::new())),
            NewtonSystem::Augmented { lu, .. } => {
                let rows = r.len();
                let rhs = DVector::from_iterator(rows + g.len(), r.iter().chain(g).copied());
                let sol = lu
                    .solve(&rhs)
                    .ok_or_else(|| IpmError::NumericalFailure("singular Newton system".into()))?;
                if sol.iter().any(|v| !v.is_finite()) {
                    return Err(IpmError::NumericalFailure("singular Newton system".into()));
                }
                Ok((
                    sol.rows(0, rows).iter().copied().collect(),
                    sol.rows(rows, g.len()).iter().copied().collect(),
                ))
            }
        }
    }

    /// Newton direction with weights `d = 1 / (z / x + REGULARIZATION)` on the
    /// nonnegative columns. Free columns have no slack and no
    /// complementarity row. A few refinement passes restore `A dx = rp` and
    /// `a_j' dy = rd_j` on free columns.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        sys: &NewtonSystem,
        d: &[f64],
        x: &[f64],
        z: &[f64],
        rp: &[f64],
        rd: &[f64],
        rc: &[f64],
    ) -> Result<Direction, IpmError> {
        let sf = self.sf;
        let n = sf.num_cols();
        let free = sys.free();
        let scaled: Vec<f64> = (0..n)
            .map(|j| if sf.free[j] { 0.0 } else { rc[j] / x[j] })
            .collect();
        let t: Vec<f64> = (0..n)
            .map(|j| {
                if sf.free[j] {
                    0.0
                } else {
                    d[j] * (rd[j] - scaled[j])
                }
            })
            .collect();
        let at = sf.times(&t);
        let rhs: Vec<f64> = rp.iter().zip(&at).map(|(a, b)| a + b).collect();
        let rd_free: Vec<f64> = free.iter().map(|&j| rd[j]).collect();
        let (mut dy, mut dxf) = self.solve_reduced(sys, &rhs, &rd_free)?;
        let primal_step = |dy: &[f64], dxf: &[f64]| -> Vec<f64> {
            let atdy = sf.transpose_times(dy);
            let mut dx: Vec<f64> = (0..n)
                .map(|j| {
                    if sf.free[j] {
                        0.0
                    } else {
                        d[j] * (atdy[j] - rd[j] + scaled[j])
                    }
                })
                .collect();
            for (&j, v) in free.iter().zip(dxf) {
                dx[j] = *v;
            }
            dx
        };
        let mut dx = primal_step(&dy, &dxf);
        let tol = 1e-14 * (1.0 + norm_inf(rp).max(norm_inf(&rd_free)));
        for _ in 0..REFINEMENT_PASSES {
            let adx = sf.times(&dx);
            let e: Vec<f64> = rp.iter().zip(&adx).map(|(r, a)| r - a).collect();
            let ef: Vec<f64> = free
                .iter()
                .zip(&rd_free)
                .map(|(&j, r)| r - sf.columns[j].iter().map(|&(i, a)| a * dy[i]).sum::<f64>())
                .collect();
            if norm_inf(&e).max(norm_inf(&ef)) <= tol {
                break;
            }
            let (cy, cf) = self.solve_reduced(sys, &e, &ef)?;
            for (v, c) in dy.iter_mut().zip(cy) {
                *v += c;
            }
            for (v, c) in dxf.iter_mut().zip(cf) {
                *v += c;
            }
            dx = primal_step(&dy, &dxf);
        }
        let dz: Vec<f64> = (0..n)
            .map(|j| {
                if sf.free[j] {
                    0.0
                } else {
                    (rc[j] - z[j] * dx[j]) / x[j]
                }
            })
            .collect();
        Ok(Direction { dx, dy, dz })
    }

    fn is_centered(&self, x: &[f64], z: &[f64], mu: f64) -> bool {
        let lo = CENTRALITY_MARGIN * self.gamma * mu;
        let hi = mu / (CENTRALITY_MARGIN * self.gamma);
        (0..x.len()).filter(|&j| !self.sf.free[j]).all(|j| {
            let p = x[j] * z[j];
            p >= lo && p <= hi
        })
    }

    fn iterate(
        &self,
        mut x: Vec<f64>,
        mut y: Vec<f64>,
        mut z: Vec<f64>,
        eps: f64,
    ) -> Result<PrimalDualPoint, IpmError> {
        let sf = self.sf;
        let n = sf.num_cols();
        let nf = sf.free.iter().filter(|f| !**f).count().max(1) as f64;
        let b_scale = 1.0 + norm_inf(&sf.rhs);
        let mut merit_history: Vec<f64> = Vec::new();
        let mut centering_run = 0usize;
        let mut gap_floor = true;

        for iter in 0..=MAX_ITERATIONS {
            let ax = sf.times(&x);
            let rp: Vec<f64> = sf.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let aty = sf.transpose_times(&y);
            let rd: Vec<f64> = (0..n).map(|j| sf.cost[j] - aty[j] - z[j]).collect();
            let mu = self.mu(&x, &z);
            let pobj = dot(&sf.cost, &x);
            let dobj = dot(&sf.rhs, &y);
            if !(mu.is_finite() && pobj.is_finite() && dobj.is_finite()) {
                return Err(IpmError::NumericalFailure(format!(
                    "iterate diverged at iteration {iter}"
                )));
            }
            let rp_norm = norm_inf(&rp);
            let rd_norm = norm_inf(&rd);
            let feasible = rp_norm <= FEASIBILITY_TOL * b_scale
                && rd
                    .iter()
                    .zip(&sf.cost)
                    .all(|(r, c)| r.abs() <= FEASIBILITY_TOL * (1.0 + c.abs()));
            let gap = pobj - dobj;
            let denom = 1e-10 + pobj.abs();
            let gap_ok = gap >= -1e-12 * (1.0 + pobj.abs()) && gap <= eps * denom;
            let centered = self.is_centered(&x, &z, mu);
            if feasible && gap_ok && centered {
                return Ok(PrimalDualPoint {
                    primal: Vec::new(),
                    duals: y,
                    slacks: z,
                    std_primal: x,
                    free: Vec::new(),
                    mu,
                    rel_gap: (gap / denom).max(0.0),
                    centered,
                    primal_residual: rp_norm,
                    dual_residual: rd_norm,
                    iterations: iter,
                    warm_started: false,
                });
            }
            if iter == MAX_ITERATIONS {
                break;
            }
            if x.iter().chain(&z).any(|v| v.abs() > 1e30) || y.iter().any(|v| v.abs() > 1e30) {
                return Err(IpmError::NumericalFailure(format!(
                    "iterate blew up at iteration {iter}"
                )));
            }

            let d: Vec<f64> = (0..n)
                .map(|j| {
                    if sf.free[j] {
                        0.0
                    } else {
                        1.0 / (z[j] / x[j] + REGULARIZATION)
                    }
                })
                .collect();
            let sys = self.newton_system(&d)?;

            let dir = if feasible && gap_ok && centering_run < MAX_CENTERING_RUN {
                centering_run += 1;
                let rc: Vec<f64> = (0..n)
                    .map(|j| if sf.free[j] { 0.0 } else { mu - x[j] * z[j] })
                    .collect();
                self.direction(&sys, &d, &x, &z, &rp, &rd, &rc)?
            } else {
                centering_run = 0;
                let rc_aff: Vec<f64> = (0..n).map(|j| -x[j] * z[j]).collect();
                let aff = self.direction(&sys, &d, &x, &z, &rp, &rd, &rc_aff)?;
                let ap = max_step(&x, &aff.dx, &sf.free).min(1.0);
                let ad = max_step(&z, &aff.dz, &sf.free).min(1.0);
                let mu_aff = (0..n)
                    .filter(|&j| !sf.free[j])
                    .map(|j| (x[j] + ap * aff.dx[j]) * (z[j] + ad * aff.dz[j]))
                    .sum::<f64>()
                    / nf;
                let sigma = if mu > 0.0 {
                    (mu_aff / mu).clamp(0.0, 1.0).powi(3)
                } else {
                    0.0
                };
                let merit = mu.max(rp_norm / b_scale).max(rd_norm);
                merit_history.push(merit);
                let k = merit_history.len();
                let stalled = |window: usize| {
                    k > window && merit > STALL_FACTOR * merit_history[k - 1 - window]
                };
                if gap_floor && stalled(FLOOR_WINDOW) {
                    gap_floor = false;
                    merit_history.clear();
                } else if stalled(STALL_WINDOW) {
                    return Err(IpmError::NumericalFailure(format!(
                        "no progress over {STALL_WINDOW} iterations (mu = {mu:e}, residuals {rp_norm:e}, {rd_norm:e})"
                    )));
                }
                let floor = if gap_floor {
                    TARGET_GAP_SHARE * eps * denom / nf
                } else {
                    0.0
                };
                let target = (sigma * mu).max(floor);
                let rc: Vec<f64> = (0..n)
                    .map(|j| target - x[j] * z[j] - aff.dx[j] * aff.dz[j])
                    .collect();
                self.direction(&sys, &d, &x, &z, &rp, &rd, &rc)?
            };

            let ap = (STEP_FRACTION * max_step(&x, &dir.dx, &sf.free)).min(1.0);
            let ad = (STEP_FRACTION * max_step(&z, &dir.dz, &sf.free)).min(1.0);
            for j in 0..n {
                x[j] += ap * dir.dx[j];
                z[j] += ad * dir.dz[j];
            }
            for (yi, dyi) in y.iter_mut().zip(&dir.dy) {
                *yi += ad * dyi;
            }
        }
        Err(IpmError::NumericalFailure(format!(
            "no convergence within {MAX_ITERATIONS} iterations"
        )))
    }
}
