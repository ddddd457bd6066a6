//! The restricted master problem of a column generation scheme.
//!
//! A [`RestrictedMaster`] owns a universe of linking rows (each of which may be
//! active or inactive in the compiled LP), `K` convexity rows, a growing pool
//! of [`Column`]s, an optional block of free structural variables, and
//! penalised artificial columns that keep the LP feasible. [`compile`] turns
//! it into a minimization [`LinearProgram`] with the variable order
//! `[artificials][free variables][pool columns]`, so new columns only append.
//!
//! [`compile`]: RestrictedMaster::compile

use thiserror::Error;

use crate::ipm::PrimalDualPoint;
use crate::lp::{LinearProgram, LpError, RowKind, VarKind};
use crate::oracle::DualPoint;

/// Objective sense of the user-level master.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    /// Factor converting user-sense values to the compiled minimization.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Point,
    Ray,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnOrigin {
    pub oracle: usize,
    pub kind: ColumnKind,
    pub iteration: usize,
}

/// A master column in user sense.
///
/// `entries` index the linking-row universe. Point columns carry exactly one
/// convexity row (coefficient 1); ray columns carry none.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub cost: f64,
    pub entries: Vec<(usize, f64)>,
    pub convexity_row: Option<usize>,
    pub origin: ColumnOrigin,
}

impl Column {
    pub fn point(
        cost: f64,
        entries: Vec<(usize, f64)>,
        convexity_row: usize,
        oracle: usize,
    ) -> Self {
        Self {
            cost,
            entries,
            convexity_row: Some(convexity_row),
            origin: ColumnOrigin {
                oracle,
                kind: ColumnKind::Point,
                iteration: 0,
            },
        }
    }

    pub fn ray(cost: f64, entries: Vec<(usize, f64)>, oracle: usize) -> Self {
        Self {
            cost,
            entries,
            convexity_row: None,
            origin: ColumnOrigin {
                oracle,
                kind: ColumnKind::Ray,
                iteration: 0,
            },
        }
    }

    fn sorted(mut self) -> Self {
        self.entries.retain(|&(_, v)| v != 0.0);
        self.entries.sort_by_key(|&(r, _)| r);
        self
    }

    fn same_as(&self, other: &Column) -> bool {
        const TOL: f64 = 1e-12;
        self.convexity_row == other.convexity_row
            && (self.cost - other.cost).abs() <= TOL
            && self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() <= TOL)
    }
}

/// A free structural variable with its linking-row coefficients (user sense).
#[derive(Debug, Clone, PartialEq)]
pub struct FreeVariable {
    pub cost: f64,
    pub entries: Vec<(usize, f64)>,
}

/// An artificial column: coefficient 1 on one convexity row and a penalty
/// that is always charged in the minimization direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Artificial {
    pub convexity_row: usize,
    pub penalty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkingRow {
    pub kind: RowKind,
    pub rhs: f64,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MasterError {
    #[error("master has no columns and no artificial columns")]
    EmptyMaster,
    #[error("convexity row {0} is covered by neither a column nor an artificial")]
    UncoveredConvexityRow(usize),
    #[error("invalid column: {0}")]
    InvalidColumn(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Compiled-LP primal values split by variable group.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MasterPrimal {
    pub artificial: Vec<f64>,
    pub free: Vec<f64>,
    pub columns: Vec<f64>,
}

impl MasterPrimal {
    pub fn artificial_mass(&self) -> f64 {
        self.artificial.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedMaster {
    sense: Sense,
    rows: Vec<LinkingRow>,
    num_convexity: usize,
    columns: Vec<Column>,
    free_vars: Vec<FreeVariable>,
    artificials: Vec<Artificial>,
    duplicates_skipped: usize,
}

impl RestrictedMaster {
    pub fn new(sense: Sense, num_convexity: usize) -> Self {
        Self {
            sense,
            rows: Vec::new(),
            num_convexity,
            columns: Vec::new(),
            free_vars: Vec::new(),
            artificials: Vec::new(),
            duplicates_skipped: 0,
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Adds a linking row to the universe and returns its id.
    pub fn add_linking_row(&mut self, kind: RowKind, rhs: f64, active: bool) -> usize {
        self.rows.push(LinkingRow { kind, rhs, active });
        self.rows.len() - 1
    }

    pub fn set_active(&mut self, row: usize, active: bool) {
        self.rows[row].active = active;
    }

    pub fn linking_rows(&self) -> &[LinkingRow] {
        &self.rows
    }

    pub fn num_linking_rows(&self) -> usize {
        self.rows.len()
    }

    /// Universe ids of the active linking rows, in compiled row order.
    pub fn active_rows(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&r| self.rows[r].active)
            .collect()
    }

    pub fn num_convexity_rows(&self) -> usize {
        self.num_convexity
    }

    pub fn add_free_variable(
        &mut self,
        cost: f64,
        entries: Vec<(usize, f64)>,
    ) -> Result<usize, MasterError> {
        self.check_entries(&entries)?;
        self.free_vars.push(FreeVariable { cost, entries });
        Ok(self.free_vars.len() - 1)
    }

    pub fn free_variables(&self) -> &[FreeVariable] {
        &self.free_vars
    }

    pub fn add_artificial(
        &mut self,
        convexity_row: usize,
        penalty: f64,
    ) -> Result<(), MasterError> {
        if convexity_row >= self.num_convexity {
            return Err(MasterError::InvalidColumn(format!(
                "artificial references convexity row {convexity_row} of {}",
                self.num_convexity
            )));
        }
        if !(penalty.is_finite() && penalty >= 0.0) {
            return Err(MasterError::InvalidColumn(
                "artificial penalty must be finite and nonnegative".into(),
            ));
        }
        self.artificials.push(Artificial {
            convexity_row,
            penalty,
        });
        Ok(())
    }

    pub fn artificials(&self) -> &[Artificial] {
        &self.artificials
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    /// Number of columns rejected as exact duplicates so far.
    pub fn duplicates_skipped(&self) -> usize {
        self.duplicates_skipped
    }

    fn check_entries(&self, entries: &[(usize, f64)]) -> Result<(), MasterError> {
        for &(r, v) in entries {
            if r >= self.rows.len() {
                return Err(MasterError::InvalidColumn(format!(
                    "entry references linking row {r} of {}",
                    self.rows.len()
                )));
            }
            if !v.is_finite() {
                return Err(MasterError::InvalidColumn("non-finite coefficient".into()));
            }
        }
        let mut seen: Vec<usize> = entries.iter().map(|e| e.0).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(MasterError::InvalidColumn("repeated linking row".into()));
        }
        Ok(())
    }

    fn check_column(&self, col: &Column) -> Result<(), MasterError> {
        self.check_entries(&col.entries)?;
        if !col.cost.is_finite() {
            return Err(MasterError::InvalidColumn("non-finite cost".into()));
        }
        match (col.origin.kind, col.convexity_row) {
            (ColumnKind::Point, Some(k)) if k < self.num_convexity => Ok(()),
            (ColumnKind::Point, Some(k)) => Err(MasterError::InvalidColumn(format!(
                "convexity row {k} out of range ({} rows)",
                self.num_convexity
            ))),
            (ColumnKind::Point, None) => Err(MasterError::InvalidColumn(
                "point column without convexity row".into(),
            )),
            (ColumnKind::Ray, None) => Ok(()),
            (ColumnKind::Ray, Some(_)) => Err(MasterError::InvalidColumn(
                "ray column with a convexity row".into(),
            )),
        }
    }

    /// Adds columns to the pool, skipping exact duplicates. Returns the number
    /// of columns actually added.
    pub fn add_columns(
        &mut self,
        cols: impl IntoIterator<Item = Column>,
    ) -> Result<usize, MasterError> {
        let mut added = 0;
        for col in cols {
            self.check_column(&col)?;
            let col = col.sorted();
            if self.columns.iter().any(|c| c.same_as(&col)) {
                self.duplicates_skipped += 1;
                continue;
            }
            self.columns.push(col);
            added += 1;
        }
        Ok(added)
    }

    /// Compiled index of the first pool column.
    pub fn column_offset(&self) -> usize {
        self.artificials.len() + self.free_vars.len()
    }

    /// Builds the minimization LP: active linking rows, then convexity rows.
    pub fn compile(&self) -> Result<LinearProgram, MasterError> {
        if self.columns.is_empty() && self.artificials.is_empty() && self.free_vars.is_empty() {
            return Err(MasterError::EmptyMaster);
        }
        for k in 0..self.num_convexity {
            let covered = self.artificials.iter().any(|a| a.convexity_row == k)
                || self.columns.iter().any(|c| c.convexity_row == Some(k));
            if !covered {
                return Err(MasterError::UncoveredConvexityRow(k));
            }
        }
        let s = self.sense.sign();
        let mut objective = Vec::new();
        let mut kinds = Vec::new();
        for a in &self.artificials {
            objective.push(a.penalty);
            kinds.push(VarKind::NonNegative);
        }
        for f in &self.free_vars {
            objective.push(s * f.cost);
            kinds.push(VarKind::Free);
        }
        for c in &self.columns {
            objective.push(s * c.cost);
            kinds.push(VarKind::NonNegative);
        }
        let mut lp = LinearProgram::new(objective, kinds)?;

        let mut row_of = vec![usize::MAX; self.rows.len()];
        let active = self.active_rows();
        for (i, &r) in active.iter().enumerate() {
            row_of[r] = i;
        }
        let m = active.len();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m + self.num_convexity];
        for (j, a) in self.artificials.iter().enumerate() {
            rows[m + a.convexity_row].push((j, 1.0));
        }
        let free_off = self.artificials.len();
        for (j, f) in self.free_vars.iter().enumerate() {
            for &(r, v) in &f.entries {
                if row_of[r] != usize::MAX {
                    rows[row_of[r]].push((free_off + j, v));
                }
            }
        }
        let col_off = self.column_offset();
        for (j, c) in self.columns.iter().enumerate() {
            for &(r, v) in &c.entries {
                if row_of[r] != usize::MAX {
                    rows[row_of[r]].push((col_off + j, v));
                }
            }
            if let Some(k) = c.convexity_row {
                rows[m + k].push((col_off + j, 1.0));
            }
        }
        for (i, entries) in rows.into_iter().enumerate() {
            if i < m {
                let r = &self.rows[active[i]];
                lp.add_row(entries, r.kind, r.rhs)?;
            } else {
                lp.add_row(entries, RowKind::Equal, 1.0)?;
            }
        }
        Ok(lp)
    }

    /// Splits a compiled primal vector into its variable groups. Vectors from
    /// an earlier, smaller pool are accepted.
    pub fn split_primal(&self, primal: &[f64]) -> Result<MasterPrimal, MasterError> {
        let na = self.artificials.len();
        let nf = self.free_vars.len();
        if primal.len() < na + nf || primal.len() > na + nf + self.columns.len() {
            return Err(MasterError::DimensionMismatch(format!(
                "primal vector of length {} does not fit a master with {} artificial, {} free and {} pool variables",
                primal.len(),
                na,
                nf,
                self.columns.len()
            )));
        }
        Ok(MasterPrimal {
            artificial: primal[..na].to_vec(),
            free: primal[na..na + nf].to_vec(),
            columns: primal[na + nf..].to_vec(),
        })
    }

    /// Linking-row activities over the whole universe, including inactive rows.
    pub fn column_activity(&self, x: &MasterPrimal) -> Vec<f64> {
        let mut act = vec![0.0; self.rows.len()];
        for (f, &v) in self.free_vars.iter().zip(&x.free) {
            for &(r, a) in &f.entries {
                act[r] += a * v;
            }
        }
        for (c, &v) in self.columns.iter().zip(&x.columns) {
            if v != 0.0 {
                for &(r, a) in &c.entries {
                    act[r] += a * v;
                }
            }
        }
        act
    }

    /// Dual point of a compiled solve, dense over the linking-row universe with
    /// zeros on inactive rows. Values are in compiled (minimization) sense.
    pub fn dual_point(&self, point: &PrimalDualPoint) -> Result<DualPoint, MasterError> {
        let active = self.active_rows();
        if point.duals.len() != active.len() + self.num_convexity {
            return Err(MasterError::DimensionMismatch(format!(
                "{} duals for {} active linking and {} convexity rows",
                point.duals.len(),
                active.len(),
                self.num_convexity
            )));
        }
        let mut linking = vec![0.0; self.rows.len()];
        for (i, &r) in active.iter().enumerate() {
            linking[r] = point.duals[i];
        }
        Ok(DualPoint {
            linking,
            convexity: point.duals[active.len()..].to_vec(),
        })
    }

    /// Compiled-sense reduced cost of a column at a dual point. Inactive rows
    /// carry zero duals, so their entries do not contribute.
    pub fn reduced_cost(&self, col: &Column, duals: &DualPoint) -> f64 {
        let mut rc = self.sense.sign() * col.cost;
        for &(r, a) in &col.entries {
            rc -= duals.linking[r] * a;
        }
        if let Some(k) = col.convexity_row {
            rc -= duals.convexity[k];
        }
        rc
    }

    /// `(z_ub, z_lb)` in compiled minimization sense: the primal objective of
    /// the point, artificial penalties included, and `b'u + sum(v)`.
    pub fn min_sense_bounds(&self, point: &PrimalDualPoint) -> Result<(f64, f64), MasterError> {
        let lp = self.compile()?;
        crate::ipm::primal_dual_objectives(&lp, point)
            .map_err(|e| MasterError::DimensionMismatch(e.to_string()))
    }

    /// The same bounds expressed in the master's own sense. For a maximization
    /// master both values are negated.
    pub fn bounds(&self, point: &PrimalDualPoint) -> Result<(f64, f64), MasterError> {
        let (ub, lb) = self.min_sense_bounds(point)?;
        let s = self.sense.sign();
        Ok((s * ub, s * lb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_column_compiles_to_convexity_lp() {
        let mut rm = RestrictedMaster::new(Sense::Min, 1);
        rm.add_columns([Column::point(3.0, vec![], 0, 0)]).unwrap();
        let lp = rm.compile().unwrap();
        assert_eq!(lp.num_rows(), 1);
        assert_eq!(lp.num_vars(), 1);
        assert_eq!(lp.objective(), &[3.0]);
        assert_eq!(lp.row(0), &[(0, 1.0)]);
        assert_eq!(lp.row_kinds()[0], RowKind::Equal);
    }

    #[test]
    fn duplicates_are_skipped() {
        let mut rm = RestrictedMaster::new(Sense::Min, 1);
        rm.add_linking_row(RowKind::LessEqual, 1.0, true);
        let c = Column::point(1.0, vec![(0, 2.0)], 0, 0);
        assert_eq!(rm.add_columns([c.clone()]).unwrap(), 1);
        assert_eq!(rm.add_columns([c]).unwrap(), 0);
        assert_eq!(rm.num_columns(), 1);
        assert_eq!(rm.duplicates_skipped(), 1);
    }

    #[test]
    fn invalid_columns_are_rejected() {
        let mut rm = RestrictedMaster::new(Sense::Min, 1);
        assert!(rm
            .add_columns([Column::point(1.0, vec![(0, 1.0)], 0, 0)])
            .is_err());
        assert!(rm.add_columns([Column::point(1.0, vec![], 3, 0)]).is_err());
        let mut ray = Column::ray(1.0, vec![], 0);
        ray.convexity_row = Some(0);
        assert!(rm.add_columns([ray]).is_err());
        assert_eq!(rm.compile(), Err(MasterError::EmptyMaster));
    }

    #[test]
    fn inactive_rows_are_left_out() {
        let mut rm = RestrictedMaster::new(Sense::Max, 1);
        let r0 = rm.add_linking_row(RowKind::LessEqual, 4.0, false);
        let r1 = rm.add_linking_row(RowKind::LessEqual, 5.0, true);
        rm.add_columns([Column::point(2.0, vec![(r0, 1.0), (r1, 3.0)], 0, 0)])
            .unwrap();
        let lp = rm.compile().unwrap();
        assert_eq!(lp.num_rows(), 2);
        assert_eq!(lp.rhs(), &[5.0, 1.0]);
        assert_eq!(lp.row(0), &[(0, 3.0)]);
        assert_eq!(lp.objective(), &[-2.0]);
    }
}
