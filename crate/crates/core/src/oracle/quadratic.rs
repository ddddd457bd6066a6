//! A separable quadratic test oracle for the convex inner-linearization master.
//!
//! Each bowl `k` is `S_k(alpha) = sum_i (a_ik alpha_i^2 / 2 - b_ik alpha_i)`
//! over the box `0 <= alpha_i <= C`. The master is
//!
//! ```text
//! min rho  s.t.  -rho + sum_j lambda_j S_k(alpha_j) <= 0  (k = 1..K)
//!                sum_j lambda_j = 1,  lambda >= 0,  rho free
//! ```
//!
//! whose row duals `u_k <= 0` give weights `beta = -u` on the simplex. Pricing
//! minimizes `sum_k beta_k S_k(alpha)`, which separates per coordinate.

use super::{
    DualPoint, OracleError, OracleResult, PricingOracle, SubproblemResult, SubproblemStatus,
};
use crate::lp::RowKind;
use crate::master::{Column, RestrictedMaster, Sense};

/// Coefficients of `K` bowls over `n` coordinates, stored per bowl.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBowls {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub upper: f64,
}

impl QuadraticBowls {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, upper: f64) -> Result<Self, OracleError> {
        if a.is_empty() || a.len() != b.len() {
            return Err(OracleError::Failure(
                "need the same positive number of a and b rows".into(),
            ));
        }
        let n = a[0].len();
        if a.iter().chain(&b).any(|r| r.len() != n) {
            return Err(OracleError::Failure(
                "bowls must share the coordinate count".into(),
            ));
        }
        if a.iter().flatten().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(OracleError::Failure(
                "curvatures must be finite and positive".into(),
            ));
        }
        if b.iter().flatten().any(|v| !v.is_finite()) || !(upper.is_finite() && upper > 0.0) {
            return Err(OracleError::Failure(
                "linear terms and box bound must be finite".into(),
            ));
        }
        Ok(Self { a, b, upper })
    }

    pub fn num_bowls(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.a[0].len()
    }

    /// `S_k(alpha)`.
    pub fn value(&self, k: usize, alpha: &[f64]) -> f64 {
        alpha
            .iter()
            .enumerate()
            .map(|(i, &x)| 0.5 * self.a[k][i] * x * x - self.b[k][i] * x)
            .sum()
    }

    /// Minimizer of `sum_k beta_k S_k` over the box.
    pub fn minimizer(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let a: f64 = beta.iter().enumerate().map(|(k, w)| w * self.a[k][i]).sum();
                let b: f64 = beta.iter().enumerate().map(|(k, w)| w * self.b[k][i]).sum();
                (b / a).clamp(0.0, self.upper)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticOracle {
    bowls: QuadraticBowls,
    /// Points generated so far, aligned with the columns returned.
    pub history: Vec<Vec<f64>>,
}

const WEIGHT_TOL: f64 = 1e-6;

impl QuadraticOracle {
    pub fn new(bowls: QuadraticBowls) -> Self {
        Self {
            bowls,
            history: Vec::new(),
        }
    }

    pub fn bowls(&self) -> &QuadraticBowls {
        &self.bowls
    }

    fn column_at(&self, alpha: &[f64]) -> Column {
        let entries = (0..self.bowls.num_bowls())
            .map(|k| (k, self.bowls.value(k, alpha)))
            .collect();
        Column::point(0.0, entries, 0, 0)
    }

    /// The master with its free `rho`, one `<=` row per bowl, and a first
    /// column generated at uniform weights.
    pub fn initial_master(&mut self) -> RestrictedMaster {
        let k = self.bowls.num_bowls();
        let mut rm = RestrictedMaster::new(Sense::Min, 1);
        for _ in 0..k {
            rm.add_linking_row(RowKind::LessEqual, 0.0, true);
        }
        rm.add_free_variable(1.0, (0..k).map(|r| (r, -1.0)).collect())
            .expect("rows exist");
        let alpha = self.bowls.minimizer(&vec![1.0 / k as f64; k]);
        let col = self.column_at(&alpha);
        self.history.push(alpha);
        rm.add_columns([col]).expect("column is well formed");
        rm
    }

    /// Validates and normalizes the weights `beta = -u`.
    pub fn weights(&self, duals: &DualPoint) -> Result<Vec<f64>, OracleError> {
        let k = self.bowls.num_bowls();
        if duals.linking.len() != k {
            return Err(OracleError::DimensionMismatch {
                expected: k,
                got: duals.linking.len(),
            });
        }
        let beta: Vec<f64> = duals.linking.iter().map(|u| -u).collect();
        if beta.iter().any(|b| !b.is_finite() || *b < -WEIGHT_TOL) {
            return Err(OracleError::BadWeights(format!(
                "negative weight in {beta:?}"
            )));
        }
        let sum: f64 = beta.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(OracleError::BadWeights(format!("weights sum to {sum}")));
        }
        Ok(beta.into_iter().map(|b| b.max(0.0)).collect())
    }
}

impl PricingOracle for QuadraticOracle {
    fn price(&mut self, duals: &DualPoint) -> Result<OracleResult, OracleError> {
        let beta = self.weights(duals)?;
        let alpha = self.bowls.minimizer(&beta);
        let column = self.column_at(&alpha);
        let mut value = -duals.convexity.first().copied().unwrap_or(0.0);
        for &(k, s) in &column.entries {
            value -= duals.linking[k] * s;
        }
        let column = if value < 0.0 {
            self.history.push(alpha);
            Some(column)
        } else {
            None
        };
        Ok(OracleResult::new(vec![SubproblemResult {
            subproblem: 0,
            status: SubproblemStatus::Point,
            value,
            column,
        }]))
    }
}
