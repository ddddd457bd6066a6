//! Column generation drivers.
//!
//! [`run`] implements the primal-dual column generation loop: each restricted
//! master is solved by the interior point method only to a relative gap `eps`
//! that shrinks with the overall gap, and the resulting well-centred duals
//! drive the oracle. In [`Mode::Standard`] every master is instead solved to
//! `1e-8`, which gives a baseline with (nearly) optimal duals.
//!
//! All bounds handled here are in the compiled minimization sense of the
//! master. [`RestrictedMaster::sense`] tells how to convert back.

use std::time::Instant;

use thiserror::Error;

use crate::ipm::{self, IpmError, PrimalDualPoint, DEFAULT_GAMMA};
use crate::lp::LinearProgram;
use crate::master::{MasterError, MasterPrimal, RestrictedMaster};
use crate::oracle::{DualPoint, OracleError, OracleResult, PricingOracle};

/// Relative gap used for every master solve in standard mode.
pub const STANDARD_EPS: f64 = 1e-8;
/// Artificial mass above which the final incumbent is declared infeasible.
pub const ARTIFICIAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Pdcgm,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverConfig {
    pub delta: f64,
    pub degree: f64,
    pub eps_max: f64,
    pub gamma: f64,
    pub mode: Mode,
    pub max_outer: usize,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            delta: 1e-5,
            degree: 10.0,
            eps_max: 0.5,
            gamma: DEFAULT_GAMMA,
            mode: Mode::Pdcgm,
            max_outer: 1000,
        }
    }
}

impl DriverConfig {
    pub fn validate(&self) -> Result<(), DriverError> {
        let bad = |msg: String| Err(DriverError::InvalidConfig(msg));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta = {} must be positive", self.delta));
        }
        if !(self.degree > 1.0 && self.degree.is_finite()) {
            return bad(format!("degree = {} must exceed 1", self.degree));
        }
        if !(self.eps_max > 0.0 && self.eps_max <= 0.5) {
            return bad(format!("eps_max = {} must lie in (0, 0.5]", self.eps_max));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma = {} must lie in (0, 1)", self.gamma));
        }
        if self.max_outer == 0 {
            return bad("max_outer must be positive".into());
        }
        Ok(())
    }
}

/// One outer iteration. `ub`, `lb` are the running bounds, `rmp_z_ub`,
/// `rmp_z_lb` the bounds of this iteration's master point alone.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub outer_index: usize,
    pub ub: f64,
    pub lb: f64,
    pub gap: f64,
    pub eps_used: f64,
    pub oracle_value: f64,
    pub columns_added: usize,
    pub rmp_time: f64,
    pub oracle_time: f64,
    pub rmp_z_ub: f64,
    pub rmp_z_lb: f64,
    pub ipm_iterations: usize,
    pub warm_started: bool,
    pub rows_added: usize,
    pub rows_removed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub ub: f64,
    pub lb: f64,
    pub gap: f64,
    /// Master point that produced the final upper bound.
    pub incumbent: MasterPrimal,
    /// Dual point that produced the final lower bound.
    pub best_duals: DualPoint,
    pub outer_iterations: usize,
}

impl Solution {
    /// Objective of the incumbent in the master's own sense.
    pub fn objective(&self, master: &RestrictedMaster) -> f64 {
        master.sense().sign() * self.ub
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub solution: Solution,
    pub trace: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriverError {
    #[error("invalid driver configuration: {0}")]
    InvalidConfig(String),
    #[error("no convergence within {iterations} outer iterations (gap {gap:e})")]
    MaxOuterExceeded { iterations: usize, gap: f64 },
    #[error("master infeasible: artificial mass {artificial_mass:e} at termination")]
    MasterInfeasible { artificial_mass: f64 },
    #[error(transparent)]
    NumericalFailure(#[from] IpmError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Progress notifications passed to an observer.
pub enum DriverEvent<'a> {
    MasterSolved {
        outer_index: usize,
        lp: &'a LinearProgram,
        point: &'a PrimalDualPoint,
        eps: f64,
        gamma: f64,
    },
    Priced {
        outer_index: usize,
        master: &'a RestrictedMaster,
        duals: &'a DualPoint,
        result: &'a OracleResult,
    },
}

/// `max(current_lb, z_lb_rmp + z_sp)`.
pub fn lower_bound_update(current_lb: f64, z_lb_rmp: f64, z_sp: f64) -> f64 {
    current_lb.max(z_lb_rmp + z_sp)
}

/// `(ub - lb) / (1e-10 + |ub|)`, infinite while either bound is missing.
pub fn relative_gap(ub: f64, lb: f64) -> f64 {
    if ub.is_finite() && lb.is_finite() {
        (ub - lb) / (1e-10 + ub.abs())
    } else {
        f64::INFINITY
    }
}

pub fn run(
    master: &mut RestrictedMaster,
    oracle: &mut dyn PricingOracle,
    cfg: &DriverConfig,
) -> Result<RunOutput, DriverError> {
    run_observed(master, oracle, cfg, &mut |_| {})
}

pub fn run_observed(
    master: &mut RestrictedMaster,
    oracle: &mut dyn PricingOracle,
    cfg: &DriverConfig,
    observer: &mut dyn FnMut(DriverEvent<'_>),
) -> Result<RunOutput, DriverError> {
    cfg.validate()?;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut eps = match cfg.mode {
        Mode::Pdcgm => cfg.eps_max,
        Mode::Standard => STANDARD_EPS,
    };
    let mut warm: Option<PrimalDualPoint> = None;
    let mut incumbent: Option<MasterPrimal> = None;
    let mut best_duals = DualPoint::default();
    let mut trace = Vec::new();

    for t in 1..=cfg.max_outer {
        let rmp_start = Instant::now();
        let lp = master.compile()?;
        let point = match warm.as_ref() {
            Some(w) => ipm::solve_to_gap(&lp, eps, cfg.gamma, Some(w))
                .or_else(|_| ipm::solve_to_gap(&lp, eps, cfg.gamma, None))?,
            None => ipm::solve_to_gap(&lp, eps, cfg.gamma, None)?,
        };
        let rmp_time = rmp_start.elapsed().as_secs_f64();
        observer(DriverEvent::MasterSolved {
            outer_index: t,
            lp: &lp,
            point: &point,
            eps,
            gamma: cfg.gamma,
        });

        let (z_ub, z_lb) = ipm::primal_dual_objectives(&lp, &point)?;
        let primal = master.split_primal(&point.primal)?;
        if z_ub < ub && oracle.certifies_upper_bound(master, &primal) {
            ub = z_ub;
            incumbent = Some(primal.clone());
        }
        let duals = master.dual_point(&point)?;

        let oracle_start = Instant::now();
        let result = oracle.price(&duals)?;
        let oracle_time = oracle_start.elapsed().as_secs_f64();
        observer(DriverEvent::Priced {
            outer_index: t,
            master,
            duals: &duals,
            result: &result,
        });

        if !result.has_improving_ray() {
            let new_lb = lower_bound_update(lb, z_lb, result.z_sp);
            if new_lb > lb {
                lb = new_lb;
                best_duals = duals.clone();
            }
        }
        let gap = relative_gap(ub, lb);
        let mut record = IterationRecord {
            outer_index: t,
            ub,
            lb,
            gap,
            eps_used: eps,
            oracle_value: result.z_sp,
            columns_added: 0,
            rmp_time,
            oracle_time,
            rmp_z_ub: z_ub,
            rmp_z_lb: z_lb,
            ipm_iterations: point.iterations,
            warm_started: point.warm_started,
            rows_added: 0,
            rows_removed: 0,
        };

        if gap < cfg.delta {
            trace.push(record);
            let incumbent = incumbent.expect("a finite upper bound implies an incumbent");
            let mass = incumbent.artificial_mass();
            if mass > ARTIFICIAL_TOL {
                return Err(DriverError::MasterInfeasible {
                    artificial_mass: mass,
                });
            }
            return Ok(RunOutput {
                solution: Solution {
                    ub,
                    lb,
                    gap,
                    incumbent,
                    best_duals,
                    outer_iterations: t,
                },
                trace,
            });
        }

        if cfg.mode == Mode::Pdcgm {
            eps = cfg.eps_max.min(gap / cfg.degree);
        }
        let update = oracle.update_rows(master, &primal);
        record.rows_added = update.added.len();
        record.rows_removed = update.removed.len();
        let mut columns: Vec<_> = result.columns().cloned().collect();
        for c in &mut columns {
            c.origin.iteration = t;
        }
        record.columns_added = if result.z_sp < 0.0 {
            master.add_columns(columns)?
        } else {
            0
        };
        warm = if update.is_empty() { Some(point) } else { None };
        trace.push(record);
    }
    let gap = trace.last().map_or(f64::INFINITY, |r| r.gap);
    Err(DriverError::MaxOuterExceeded {
        iterations: cfg.max_outer,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_update_examples() {
        assert_eq!(lower_bound_update(f64::NEG_INFINITY, 10.0, -3.0), 7.0);
        assert_eq!(lower_bound_update(8.0, 10.0, -3.0), 8.0);
    }

    #[test]
    fn gap_is_infinite_without_bounds() {
        assert!(relative_gap(f64::INFINITY, 0.0).is_infinite());
        assert!(relative_gap(1.0, f64::NEG_INFINITY).is_infinite());
        assert_eq!(relative_gap(2.0, 1.0), 1.0 / (1e-10 + 2.0));
    }

    #[test]
    fn config_validation() {
        assert!(DriverConfig::default().validate().is_ok());
        let bad = DriverConfig {
            degree: 1.0,
            ..DriverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = DriverConfig {
            eps_max: 0.7,
            ..DriverConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
