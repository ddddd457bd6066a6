//! Pricing oracles.
//!
//! An oracle receives the duals of the restricted master and returns, for
//! every subproblem, the minimum reduced cost it found together with the
//! column that attains it. All values are in the compiled minimization sense
//! of the master: a column improves the master when its value is negative.

mod quadratic;

pub use quadratic::{QuadraticBowls, QuadraticOracle};

use thiserror::Error;

use crate::master::{Column, MasterPrimal, RestrictedMaster};

/// Master duals dense over the linking-row universe (zero on inactive rows)
/// plus one dual per convexity row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualPoint {
    pub linking: Vec<f64>,
    pub convexity: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubproblemStatus {
    Point,
    Ray,
}

/// Outcome of one subproblem.
///
/// `value` is the subproblem's reduced cost. `column` is present exactly when
/// `value` is negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemResult {
    pub subproblem: usize,
    pub status: SubproblemStatus,
    pub value: f64,
    pub column: Option<Column>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub per_subproblem: Vec<SubproblemResult>,
    /// `sum_k min(0, value_k)`; never positive.
    pub z_sp: f64,
}

impl OracleResult {
    pub fn new(per_subproblem: Vec<SubproblemResult>) -> Self {
        let z_sp = per_subproblem.iter().map(|r| r.value.min(0.0)).sum();
        Self {
            per_subproblem,
            z_sp,
        }
    }

    pub fn columns(&self) -> impl Iterator<Item = &Column> {
        self.per_subproblem.iter().filter_map(|r| r.column.as_ref())
    }

    /// True when some subproblem produced an improving ray. The oracle value
    /// then does not yield a valid lower bound.
    pub fn has_improving_ray(&self) -> bool {
        self.per_subproblem
            .iter()
            .any(|r| r.status == SubproblemStatus::Ray && r.value < 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("bad dual weights: {0}")]
    BadWeights(String),
    #[error("arc {arc} has negative length {length} (dual {dual} exceeds tolerance)")]
    NegativeLength { arc: usize, length: f64, dual: f64 },
    #[error("scenario {scenario} has an empty dual feasible set (unbounded recourse)")]
    EmptyDualSet { scenario: usize },
    #[error("dual point has {got} linking entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("oracle failure: {0}")]
    Failure(String),
}

/// Linking rows switched on or off by an oracle between iterations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RowUpdate {
    pub added: Vec<usize>,
    pub removed: Vec<usize>,
}

impl RowUpdate {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }
}

pub trait PricingOracle {
    /// Prices every subproblem at `duals`.
    fn price(&mut self, duals: &DualPoint) -> Result<OracleResult, OracleError>;

    /// Whether a primal point of the restricted master is feasible for the
    /// full master, so that its objective is a valid upper bound.
    fn certifies_upper_bound(&self, _master: &RestrictedMaster, _primal: &MasterPrimal) -> bool {
        true
    }

    /// Hook for row-generation strategies, called after pricing with the
    /// current master primal point.
    fn update_rows(&mut self, _master: &mut RestrictedMaster, _primal: &MasterPrimal) -> RowUpdate {
        RowUpdate::default()
    }
}
