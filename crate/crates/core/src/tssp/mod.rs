//! Two-stage stochastic linear programs.
//!
//! The deterministic equivalent is
//!
//! ```text
//! min c'x + sum_i p_i q_i'y_i   s.t.  Ax = b,  T_i x + W_i y_i = h_i,  x, y_i >= 0.
//! ```
//!
//! Column generation works on its dual. The aggregated master is a
//! maximization over a free `eta` (one per first-stage row) and convex
//! weights on products of scenario dual vertices, with one `<= c_j` linking
//! row per first-stage variable. The duals of those rows are a first-stage
//! point `x`, and each scenario subproblem is the dual of its recourse LP at
//! that point, solved with the primal simplex on the recourse LP itself.

pub mod format;
pub mod generate;

use thiserror::Error;

use crate::linalg::norm_inf;
use crate::lp::{LinearProgram, RowKind};
use crate::master::{Column, MasterError, RestrictedMaster, Sense};
use crate::oracle::{
    DualPoint, OracleError, OracleResult, PricingOracle, SubproblemResult, SubproblemStatus,
};
use crate::pdcgm::{self, DriverConfig, DriverError, IterationRecord};
use crate::simplex::{self, SimplexStatus};

/// Cost of the artificial column on the convexity row.
pub const ARTIFICIAL_PENALTY: f64 = 1e6;
const PROBABILITY_TOL: f64 = 1e-9;
/// Farkas certificates with `(h - T x)'theta` below this, relative to
/// `1 + |h - T x|`, are treated as numerical noise and the scenario is priced
/// through its elastic recourse instead.
pub const NEAR_FEASIBLE_TOL: f64 = 1e-6;
/// Elastic penalty relative to `1 + max |q|`.
const ELASTIC_PENALTY: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct FirstStage {
    pub c: Vec<f64>,
    /// Row-major, `m x n`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub probability: f64,
    pub q: Vec<f64>,
    /// Row-major, `m~ x n`.
    pub t: Vec<Vec<f64>>,
    /// Row-major, `m~ x n~`.
    pub w: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance has no scenarios")]
    NoScenarios,
    #[error("scenario {scenario} has probability {probability}, expected a positive value")]
    NonPositiveProbability { scenario: usize, probability: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    ProbabilitySum { sum: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

/// A validated two-stage instance. All scenarios share `n~` and `m~`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticInstance {
    first: FirstStage,
    scenarios: Vec<Scenario>,
}

fn check_matrix(
    name: &str,
    mat: &[Vec<f64>],
    rows: usize,
    cols: usize,
) -> Result<(), InstanceError> {
    if mat.len() != rows {
        return Err(InstanceError::Dimension(format!(
            "{name} has {} rows, expected {rows}",
            mat.len()
        )));
    }
    for (i, r) in mat.iter().enumerate() {
        if r.len() != cols {
            return Err(InstanceError::Dimension(format!(
                "{name} row {} has {} entries, expected {cols}",
                i + 1,
                r.len()
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(InstanceError::NonFinite(name.into()));
        }
    }
    Ok(())
}

fn check_vector(name: &str, v: &[f64]) -> Result<(), InstanceError> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(InstanceError::NonFinite(name.into()));
    }
    Ok(())
}

fn mat_vec(mat: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    mat.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn mat_t_vec(mat: &[Vec<f64>], y: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (r, &yi) in mat.iter().zip(y) {
        for (o, a) in out.iter_mut().zip(r) {
            *o += a * yi;
        }
    }
    out
}

impl StochasticInstance {
    pub fn new(first: FirstStage, scenarios: Vec<Scenario>) -> Result<Self, InstanceError> {
        let n = first.c.len();
        let m = first.b.len();
        check_vector("c", &first.c)?;
        check_vector("b", &first.b)?;
        check_matrix("A", &first.a, m, n)?;
        let s0 = scenarios.first().ok_or(InstanceError::NoScenarios)?;
        let (n2, m2) = (s0.q.len(), s0.h.len());
        let mut sum = 0.0;
        for (i, s) in scenarios.iter().enumerate() {
            if !(s.probability > 0.0 && s.probability.is_finite()) {
                return Err(InstanceError::NonPositiveProbability {
                    scenario: i,
                    probability: s.probability,
                });
            }
            sum += s.probability;
            if s.q.len() != n2 || s.h.len() != m2 {
                return Err(InstanceError::Dimension(format!(
                    "scenario {} has |q| = {}, |h| = {}, expected {n2} and {m2}",
                    i + 1,
                    s.q.len(),
                    s.h.len()
                )));
            }
            check_vector("q", &s.q)?;
            check_vector("h", &s.h)?;
            check_matrix(&format!("T of scenario {}", i + 1), &s.t, m2, n)?;
            check_matrix(&format!("W of scenario {}", i + 1), &s.w, m2, n2)?;
        }
        if (sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(InstanceError::ProbabilitySum { sum });
        }
        Ok(Self { first, scenarios })
    }

    pub fn first_stage(&self) -> &FirstStage {
        &self.first
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    /// Number of first-stage variables.
    pub fn n(&self) -> usize {
        self.first.c.len()
    }

    /// Number of first-stage rows.
    pub fn m(&self) -> usize {
        self.first.b.len()
    }

    /// Number of recourse variables per scenario.
    pub fn recourse_vars(&self) -> usize {
        self.scenarios[0].q.len()
    }

    /// Number of recourse rows per scenario.
    pub fn recourse_rows(&self) -> usize {
        self.scenarios[0].h.len()
    }

    /// The deterministic equivalent LP. Variables are `x` followed by each
    /// scenario's `y_i`; rows are `Ax = b` followed by each scenario block.
    pub fn deterministic_equivalent(&self) -> LinearProgram {
        let (n, n2) = (self.n(), self.recourse_vars());
        let mut obj = self.first.c.clone();
        for s in &self.scenarios {
            obj.extend(s.q.iter().map(|q| s.probability * q));
        }
        let mut lp = LinearProgram::nonnegative(obj).expect("finite objective");
        for (row, &rhs) in self.first.a.iter().zip(&self.first.b) {
            lp.add_row(row.iter().copied().enumerate(), RowKind::Equal, rhs)
                .expect("validated dimensions");
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            let off = n + i * n2;
            for ((t, w), &rhs) in s.t.iter().zip(&s.w).zip(&s.h) {
                let entries: Vec<(usize, f64)> = t
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| (j, v))
                    .chain(w.iter().enumerate().map(|(j, &v)| (off + j, v)))
                    .collect();
                lp.add_row(entries, RowKind::Equal, rhs)
                    .expect("validated dimensions");
            }
        }
        lp
    }

    /// The expected-value instance: one scenario whose data are the
    /// probability-weighted averages of all scenarios.
    pub fn expected_value(&self) -> StochasticInstance {
        let (n, n2, m2) = (self.n(), self.recourse_vars(), self.recourse_rows());
        let mut avg = Scenario {
            probability: 1.0,
            q: vec![0.0; n2],
            t: vec![vec![0.0; n]; m2],
            w: vec![vec![0.0; n2]; m2],
            h: vec![0.0; m2],
        };
        for s in &self.scenarios {
            let p = s.probability;
            avg.q.iter_mut().zip(&s.q).for_each(|(a, v)| *a += p * v);
            avg.h.iter_mut().zip(&s.h).for_each(|(a, v)| *a += p * v);
            for (ar, sr) in avg.t.iter_mut().zip(&s.t) {
                ar.iter_mut().zip(sr).for_each(|(a, v)| *a += p * v);
            }
            for (ar, sr) in avg.w.iter_mut().zip(&s.w) {
                ar.iter_mut().zip(sr).for_each(|(a, v)| *a += p * v);
            }
        }
        StochasticInstance {
            first: self.first.clone(),
            scenarios: vec![avg],
        }
    }

    /// First-stage part of an optimal solution of the expected-value
    /// problem, if that problem has one.
    pub fn expected_value_solution(&self) -> Option<Vec<f64>> {
        let out = simplex::solve(&self.expected_value().deterministic_equivalent()).ok()?;
        if out.status != SimplexStatus::Optimal {
            return None;
        }
        let mut x = out.point?;
        x.truncate(self.n());
        Some(x)
    }

    /// `c'x + sum_i p_i Q_i(x)`, or `None` if some recourse LP is infeasible.
    pub fn evaluate(&self, x: &[f64]) -> Option<f64> {
        let mut total: f64 = self.first.c.iter().zip(x).map(|(c, v)| c * v).sum();
        for i in 0..self.scenarios.len() {
            let r = scenario_price(self, i, x).ok()?;
            if r.status != SubproblemStatus::Point {
                return None;
            }
            total += self.scenarios[i].probability * r.value;
        }
        Some(total)
    }
}

/// Dual vertex or ray of one scenario subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDualResult {
    pub status: SubproblemStatus,
    pub theta: Vec<f64>,
    /// `(h - T x)'theta`.
    pub value: f64,
}

/// Duals of `min {q'y + M 1'(s + r) : W y + s - r = rhs, y, s, r >= 0}`. They
/// satisfy `W'theta <= q` and `|theta| <= M`, so they are points of the
/// scenario dual set. `None` if that set is empty.
fn elastic_duals(s: &Scenario, rhs: &[f64]) -> Option<Vec<f64>> {
    let n2 = s.q.len();
    let m2 = rhs.len();
    let penalty = ELASTIC_PENALTY * (1.0 + norm_inf(&s.q));
    let mut cost = s.q.clone();
    cost.extend(std::iter::repeat_n(penalty, 2 * m2));
    let mut lp = LinearProgram::nonnegative(cost).expect("finite costs");
    for (k, (row, &r)) in s.w.iter().zip(rhs).enumerate() {
        let entries = row
            .iter()
            .copied()
            .enumerate()
            .chain([(n2 + k, 1.0), (n2 + m2 + k, -1.0)]);
        lp.add_row(entries, RowKind::Equal, r).ok()?;
    }
    let out = simplex::solve(&lp).ok()?;
    match out.status {
        SimplexStatus::Optimal => out.duals,
        _ => None,
    }
}

/// Solves `max {(h_i - T_i x)'theta : W_i'theta <= q_i}` through the recourse
/// LP `min {q_i'y : W_i y = h_i - T_i x, y >= 0}`. An optimal recourse gives
/// the dual vertex, an infeasible one a Farkas ray. A ray whose violation is
/// below [`NEAR_FEASIBLE_TOL`] is replaced by the elastic duals. `x` should be
/// nonnegative.
pub fn scenario_price(
    inst: &StochasticInstance,
    i: usize,
    x: &[f64],
) -> Result<ScenarioDualResult, OracleError> {
    if x.len() != inst.n() {
        return Err(OracleError::DimensionMismatch {
            expected: inst.n(),
            got: x.len(),
        });
    }
    let s = &inst.scenarios[i];
    let tx = mat_vec(&s.t, x);
    let rhs: Vec<f64> = s.h.iter().zip(&tx).map(|(h, t)| h - t).collect();
    let mut lp = LinearProgram::nonnegative(s.q.clone()).expect("finite costs");
    for (row, &r) in s.w.iter().zip(&rhs) {
        lp.add_dense_row(row, RowKind::Equal, r)
            .map_err(|e| OracleError::Failure(e.to_string()))?;
    }
    let out = simplex::solve(&lp).map_err(|e| OracleError::Failure(e.to_string()))?;
    let (mut status, mut theta) = match out.status {
        SimplexStatus::Optimal => (SubproblemStatus::Point, out.duals.expect("optimal duals")),
        SimplexStatus::Infeasible => (SubproblemStatus::Ray, out.ray.expect("Farkas certificate")),
        SimplexStatus::Unbounded => return Err(OracleError::EmptyDualSet { scenario: i }),
    };
    let dot = |theta: &[f64]| rhs.iter().zip(theta).map(|(r, t)| r * t).sum::<f64>();
    if status == SubproblemStatus::Ray && dot(&theta) <= NEAR_FEASIBLE_TOL * (1.0 + norm_inf(&rhs))
    {
        theta = elastic_duals(s, &rhs).ok_or(OracleError::EmptyDualSet { scenario: i })?;
        status = SubproblemStatus::Point;
    }
    let value = dot(&theta);
    Ok(ScenarioDualResult {
        status,
        theta,
        value,
    })
}

/// Aggregated master column. With only point results the column is a point
/// column weighted by all probabilities; otherwise it is a ray column built
/// from the ray scenarios alone. Costs and entries are in the master's
/// maximization sense.
pub fn aggregate_column(inst: &StochasticInstance, results: &[ScenarioDualResult]) -> Column {
    let any_ray = results.iter().any(|r| r.status == SubproblemStatus::Ray);
    let n = inst.n();
    let mut cost = 0.0;
    let mut entries = vec![0.0; n];
    for (s, r) in inst.scenarios.iter().zip(results) {
        if any_ray && r.status != SubproblemStatus::Ray {
            continue;
        }
        let p = s.probability;
        cost += p * s.h.iter().zip(&r.theta).map(|(h, t)| h * t).sum::<f64>();
        for (e, v) in entries.iter_mut().zip(mat_t_vec(&s.t, &r.theta, n)) {
            *e += p * v;
        }
    }
    let entries = entries
        .into_iter()
        .enumerate()
        .filter(|(_, v)| *v != 0.0)
        .collect();
    if any_ray {
        Column::ray(cost, entries, 0)
    } else {
        Column::point(cost, entries, 0, 0)
    }
}

/// Prices all scenarios at the first-stage point given by the linking duals.
#[derive(Debug, Clone)]
pub struct ScenarioOracle<'a> {
    inst: &'a StochasticInstance,
}

impl<'a> ScenarioOracle<'a> {
    pub fn new(inst: &'a StochasticInstance) -> Self {
        Self { inst }
    }

    /// First-stage point `x = max(-u, 0)` from compiled linking duals `u`.
    pub fn first_stage_point(duals: &DualPoint) -> Vec<f64> {
        duals.linking.iter().map(|u| (-u).max(0.0)).collect()
    }

    pub fn price_all(&self, x: &[f64]) -> Result<Vec<ScenarioDualResult>, OracleError> {
        (0..self.inst.scenarios.len())
            .map(|i| scenario_price(self.inst, i, x))
            .collect()
    }

    /// Builds the master: `<= c_j` rows, the free `eta` block, the artificial
    /// and, when every scenario has an optimal recourse at the
    /// expected-value solution, the aggregated column priced there. Returns
    /// whether that column was seeded.
    pub fn initial_master(&self) -> Result<(RestrictedMaster, bool), OracleError> {
        let inst = self.inst;
        let mut rm = RestrictedMaster::new(Sense::Max, 1);
        for &cj in &inst.first.c {
            rm.add_linking_row(RowKind::LessEqual, cj, true);
        }
        let master_err = |e: MasterError| OracleError::Failure(e.to_string());
        for (row, &br) in inst.first.a.iter().zip(&inst.first.b) {
            let entries = row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect();
            rm.add_free_variable(br, entries).map_err(master_err)?;
        }
        rm.add_artificial(0, ARTIFICIAL_PENALTY)
            .map_err(master_err)?;
        let mut seeded = false;
        if let Some(x) = inst.expected_value_solution() {
            let results = self.price_all(&x)?;
            if results.iter().all(|r| r.status == SubproblemStatus::Point) {
                rm.add_columns([aggregate_column(inst, &results)])
                    .map_err(master_err)?;
                seeded = true;
            }
        }
        Ok((rm, seeded))
    }
}

impl PricingOracle for ScenarioOracle<'_> {
    fn price(&mut self, duals: &DualPoint) -> Result<OracleResult, OracleError> {
        let n = self.inst.n();
        if duals.linking.len() != n {
            return Err(OracleError::DimensionMismatch {
                expected: n,
                got: duals.linking.len(),
            });
        }
        if duals.convexity.len() != 1 {
            return Err(OracleError::DimensionMismatch {
                expected: 1,
                got: duals.convexity.len(),
            });
        }
        let x = Self::first_stage_point(duals);
        let results = self.price_all(&x)?;
        let column = aggregate_column(self.inst, &results);
        let (status, value) = if column.convexity_row.is_none() {
            let v: f64 = self
                .inst
                .scenarios
                .iter()
                .zip(&results)
                .filter(|(_, r)| r.status == SubproblemStatus::Ray)
                .map(|(s, r)| s.probability * r.value)
                .sum();
            (SubproblemStatus::Ray, -v)
        } else {
            let v: f64 = self
                .inst
                .scenarios
                .iter()
                .zip(&results)
                .map(|(s, r)| s.probability * r.value)
                .sum();
            (SubproblemStatus::Point, -v - duals.convexity[0])
        };
        let column = (value < 0.0).then_some(column);
        Ok(OracleResult::new(vec![SubproblemResult {
            subproblem: 0,
            status,
            value,
            column,
        }]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsspSolution {
    /// Optimal value of the deterministic equivalent.
    pub objective: f64,
    /// Upper bound on the deterministic-equivalent optimum from the best
    /// first-stage point.
    pub upper_bound: f64,
    /// First-stage point behind `upper_bound`.
    pub first_stage: Vec<f64>,
    pub outer_iterations: usize,
    pub artificial_mass: f64,
    /// Whether the master was seeded from the expected-value solution.
    pub warm_started: bool,
    pub point_columns: usize,
    pub ray_columns: usize,
    pub trace: Vec<IterationRecord>,
}

/// Solves a two-stage instance by column generation on the aggregated
/// master.
pub fn solve_tssp(
    inst: &StochasticInstance,
    cfg: &DriverConfig,
) -> Result<TsspSolution, DriverError> {
    let mut oracle = ScenarioOracle::new(inst);
    let (mut master, warm_started) = oracle.initial_master()?;
    let out = pdcgm::run(&mut master, &mut oracle, cfg)?;
    let rays = master
        .columns()
        .iter()
        .filter(|c| c.convexity_row.is_none())
        .count();
    Ok(TsspSolution {
        objective: out.solution.objective(&master),
        upper_bound: -out.solution.lb,
        first_stage: ScenarioOracle::first_stage_point(&out.solution.best_duals),
        outer_iterations: out.solution.outer_iterations,
        artificial_mass: out.solution.incumbent.artificial_mass(),
        warm_started,
        point_columns: master.num_columns() - rays,
        ray_columns: rays,
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_instance(q: Vec<f64>, h: Vec<f64>) -> StochasticInstance {
        let k = q.len();
        let eye: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect())
            .collect();
        StochasticInstance::new(
            FirstStage {
                c: vec![1.0],
                a: vec![],
                b: vec![],
            },
            vec![Scenario {
                probability: 1.0,
                q,
                t: vec![vec![1.0]; k],
                w: eye,
                h,
            }],
        )
        .unwrap()
    }

    #[test]
    fn identity_recourse_point() {
        let inst = identity_instance(vec![2.0, 3.0], vec![5.0, 4.0]);
        let r = scenario_price(&inst, 0, &[1.0]).unwrap();
        assert_eq!(r.status, SubproblemStatus::Point);
        assert_eq!(r.theta, vec![2.0, 3.0]);
        assert!((r.value - (2.0 * 4.0 + 3.0 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn identity_recourse_ray() {
        let inst = identity_instance(vec![2.0, 3.0], vec![5.0, 0.5]);
        let r = scenario_price(&inst, 0, &[1.0]).unwrap();
        assert_eq!(r.status, SubproblemStatus::Ray);
        assert!(r.value > 0.0);
        assert!(r.theta[0].abs() < 1e-12 && r.theta[1] < 0.0);
    }

    #[test]
    fn validation() {
        let first = FirstStage {
            c: vec![1.0],
            a: vec![],
            b: vec![],
        };
        let s = |p: f64| Scenario {
            probability: p,
            q: vec![1.0],
            t: vec![vec![1.0]],
            w: vec![vec![1.0]],
            h: vec![1.0],
        };
        assert_eq!(
            StochasticInstance::new(first.clone(), vec![]),
            Err(InstanceError::NoScenarios)
        );
        assert!(matches!(
            StochasticInstance::new(first.clone(), vec![s(0.5), s(0.6)]),
            Err(InstanceError::ProbabilitySum { .. })
        ));
        assert!(matches!(
            StochasticInstance::new(first, vec![s(1.5), s(-0.5)]),
            Err(InstanceError::NonPositiveProbability { scenario: 1, .. })
        ));
    }

    #[test]
    fn ray_column_uses_ray_scenarios_only() {
        let first = FirstStage {
            c: vec![1.0],
            a: vec![],
            b: vec![],
        };
        let sc = |h: f64| Scenario {
            probability: 0.5,
            q: vec![1.0],
            t: vec![vec![2.0]],
            w: vec![vec![1.0]],
            h: vec![h],
        };
        let inst = StochasticInstance::new(first, vec![sc(3.0), sc(-1.0)]).unwrap();
        let results = vec![
            ScenarioDualResult {
                status: SubproblemStatus::Point,
                theta: vec![1.0],
                value: 1.0,
            },
            ScenarioDualResult {
                status: SubproblemStatus::Ray,
                theta: vec![-1.0],
                value: 1.0,
            },
        ];
        let col = aggregate_column(&inst, &results);
        assert_eq!(col.convexity_row, None);
        assert_eq!(col.cost, 0.5);
        assert_eq!(col.entries, vec![(0, -1.0)]);
    }
}
