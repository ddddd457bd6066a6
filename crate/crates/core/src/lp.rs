//! Sparse linear programs in the canonical form shared by both internal solvers.
//!
//! A [`LinearProgram`] is always a minimization. Rows are either equalities or
//! `<=` inequalities; variables are either nonnegative or free. Both the
//! interior point solver and the tableau simplex lower a program to the
//! standard form `min c'x, Ax = b, x >= 0` through [`StandardForm`].

use thiserror::Error;

/// Row sense of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    Equal,
    LessEqual,
}

/// Domain of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("row {row} references variable {col}, but only {num_vars} variables exist")]
    ColumnOutOfRange {
        row: usize,
        col: usize,
        num_vars: usize,
    },
    #[error("row {row} contains variable {col} more than once")]
    DuplicateEntry { row: usize, col: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
}

/// A minimization LP with sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    var_kinds: Vec<VarKind>,
    rows: Vec<Vec<(usize, f64)>>,
    row_kinds: Vec<RowKind>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    /// Creates a program with the given objective and no rows.
    pub fn new(objective: Vec<f64>, var_kinds: Vec<VarKind>) -> Result<Self, LpError> {
        if objective.len() != var_kinds.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} objective coefficients but {} variable kinds",
                objective.len(),
                var_kinds.len()
            )));
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        Ok(Self {
            objective,
            var_kinds,
            rows: Vec::new(),
            row_kinds: Vec::new(),
            rhs: Vec::new(),
        })
    }

    /// Convenience constructor for programs whose variables are all nonnegative.
    pub fn nonnegative(objective: Vec<f64>) -> Result<Self, LpError> {
        let kinds = vec![VarKind::NonNegative; objective.len()];
        Self::new(objective, kinds)
    }

    /// Appends a row. Entries are `(variable, coefficient)` pairs; explicit
    /// zeros are dropped.
    pub fn add_row(
        &mut self,
        entries: impl IntoIterator<Item = (usize, f64)>,
        kind: RowKind,
        rhs: f64,
    ) -> Result<usize, LpError> {
        let row = self.rows.len();
        if !rhs.is_finite() {
            return Err(LpError::NonFinite("right-hand side"));
        }
        let mut sparse: Vec<(usize, f64)> = Vec::new();
        for (col, value) in entries {
            if col >= self.objective.len() {
                return Err(LpError::ColumnOutOfRange {
                    row,
                    col,
                    num_vars: self.objective.len(),
                });
            }
            if !value.is_finite() {
                return Err(LpError::NonFinite("constraint matrix"));
            }
            if value != 0.0 {
                sparse.push((col, value));
            }
        }
        sparse.sort_by_key(|&(c, _)| c);
        if let Some(w) = sparse.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(LpError::DuplicateEntry { row, col: w[0].0 });
        }
        self.rows.push(sparse);
        self.row_kinds.push(kind);
        self.rhs.push(rhs);
        Ok(row)
    }

    /// Appends a row given as a dense coefficient slice.
    pub fn add_dense_row(
        &mut self,
        coeffs: &[f64],
        kind: RowKind,
        rhs: f64,
    ) -> Result<usize, LpError> {
        if coeffs.len() != self.objective.len() {
            return Err(LpError::DimensionMismatch(format!(
                "dense row has {} entries for {} variables",
                coeffs.len(),
                self.objective.len()
            )));
        }
        self.add_row(coeffs.iter().copied().enumerate(), kind, rhs)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn var_kinds(&self) -> &[VarKind] {
        &self.var_kinds
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn row_kinds(&self) -> &[RowKind] {
        &self.row_kinds
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Coefficient of variable `col` in row `row` (zero when absent).
    pub fn coefficient(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .binary_search_by_key(&col, |&(c, _)| c)
            .map(|k| self.rows[row][k].1)
            .unwrap_or(0.0)
    }

    /// `c'x` for a vector of original variables.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Row activities `Ax`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    /// `A'y` for a vector of row multipliers.
    pub fn transpose_times(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vars()];
        for (row, &yi) in self.rows.iter().zip(y) {
            for &(j, a) in row {
                out[j] += a * yi;
            }
        }
        out
    }

    /// Largest violation of the constraints and variable bounds by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, act) in self.activities(x).into_iter().enumerate() {
            let v = match self.row_kinds[i] {
                RowKind::Equal => (act - self.rhs[i]).abs(),
                RowKind::LessEqual => (act - self.rhs[i]).max(0.0),
            };
            worst = worst.max(v);
        }
        for (j, &xj) in x.iter().enumerate() {
            if self.var_kinds[j] == VarKind::NonNegative {
                worst = worst.max(-xj);
            }
        }
        worst
    }
}

/// Origin of a standard-form column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StdColumn {
    /// Original variable, possibly one half of a free-variable split
    /// (`sign = -1` for the negative part).
    Variable { var: usize, sign: i8 },
    /// Slack of a `<=` row.
    Slack { row: usize },
}

/// `min c'x, Ax = b, x >= 0` with `A` stored by columns.
///
/// Column layout: one slack per `<=` row (in row order) followed by the
/// original variables in order. [`StandardForm::from_lp`] splits free
/// variables into `(+, -)` pairs; [`StandardForm::keeping_free`] keeps them
/// as single columns flagged in `free`, which are then exempt from `x >= 0`.
/// Appending variables to a program only appends standard columns.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub num_rows: usize,
    pub columns: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
    pub origin: Vec<StdColumn>,
    pub free: Vec<bool>,
}

impl StandardForm {
    pub fn from_lp(lp: &LinearProgram) -> Self {
        Self::build(lp, true)
    }

    pub fn keeping_free(lp: &LinearProgram) -> Self {
        Self::build(lp, false)
    }

    fn build(lp: &LinearProgram, split: bool) -> Self {
        let mut free = Vec::new();
        let mut columns = Vec::new();
        let mut cost = Vec::new();
        let mut origin = Vec::new();
        for (i, kind) in lp.row_kinds().iter().enumerate() {
            if *kind == RowKind::LessEqual {
                columns.push(vec![(i, 1.0)]);
                cost.push(0.0);
                origin.push(StdColumn::Slack { row: i });
                free.push(false);
            }
        }
        let mut by_var: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
        for (i, row) in lp.rows().iter().enumerate() {
            for &(j, a) in row {
                by_var[j].push((i, a));
            }
        }
        for (j, col) in by_var.into_iter().enumerate() {
            let c = lp.objective()[j];
            match lp.var_kinds()[j] {
                VarKind::NonNegative => {
                    columns.push(col);
                    cost.push(c);
                    origin.push(StdColumn::Variable { var: j, sign: 1 });
                    free.push(false);
                }
                VarKind::Free if !split => {
                    columns.push(col);
                    cost.push(c);
                    origin.push(StdColumn::Variable { var: j, sign: 1 });
                    free.push(true);
                }
                VarKind::Free => {
                    let neg: Vec<(usize, f64)> = col.iter().map(|&(i, a)| (i, -a)).collect();
                    columns.push(col);
                    cost.push(c);
                    origin.push(StdColumn::Variable { var: j, sign: 1 });
                    columns.push(neg);
                    cost.push(-c);
                    origin.push(StdColumn::Variable { var: j, sign: -1 });
                    free.extend([false, false]);
                }
            }
        }
        Self {
            num_rows: lp.num_rows(),
            columns,
            cost,
            rhs: lp.rhs().to_vec(),
            origin,
            free,
        }
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    /// Maps standard-form values back to the original variables.
    pub fn recover(&self, std_x: &[f64], num_vars: usize) -> Vec<f64> {
        let mut x = vec![0.0; num_vars];
        for (k, o) in self.origin.iter().enumerate() {
            if let StdColumn::Variable { var, sign } = *o {
                x[var] += f64::from(sign) * std_x[k];
            }
        }
        x
    }

    /// `Ax` over standard columns.
    pub fn times(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_rows];
        for (col, &xj) in self.columns.iter().zip(x) {
            if xj != 0.0 {
                for &(i, a) in col {
                    out[i] += a * xj;
                }
            }
        }
        out
    }

    /// `A'y` over standard columns.
    pub fn transpose_times(&self, y: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(i, a)| a * y[i]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_and_out_of_range_entries() {
        let mut lp = LinearProgram::nonnegative(vec![1.0, 2.0]).unwrap();
        assert_eq!(
            lp.add_row([(0, 1.0), (0, 2.0)], RowKind::Equal, 1.0),
            Err(LpError::DuplicateEntry { row: 0, col: 0 })
        );
        assert!(matches!(
            lp.add_row([(2, 1.0)], RowKind::Equal, 1.0),
            Err(LpError::ColumnOutOfRange { .. })
        ));
        assert!(matches!(
            lp.add_row([(1, f64::NAN)], RowKind::Equal, 1.0),
            Err(LpError::NonFinite(_))
        ));
        assert!(LinearProgram::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn standard_form_layout_puts_slacks_first_and_splits_free_vars() {
        let mut lp =
            LinearProgram::new(vec![1.0, -1.0], vec![VarKind::Free, VarKind::NonNegative]).unwrap();
        lp.add_row([(0, 2.0), (1, 1.0)], RowKind::LessEqual, 4.0)
            .unwrap();
        lp.add_row([(1, 1.0)], RowKind::Equal, 1.0).unwrap();
        let sf = StandardForm::from_lp(&lp);
        assert_eq!(sf.num_cols(), 4);
        assert_eq!(sf.origin[0], StdColumn::Slack { row: 0 });
        assert_eq!(sf.columns[1], vec![(0, 2.0)]);
        assert_eq!(sf.columns[2], vec![(0, -2.0)]);
        assert_eq!(sf.cost, vec![0.0, 1.0, -1.0, -1.0]);
        let x = sf.recover(&[0.5, 3.0, 1.0, 2.0], 2);
        assert_eq!(x, vec![2.0, 2.0]);
    }
}
