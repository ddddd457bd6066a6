//! Small dense linear algebra kernels used by the interior point solver.

/// Dense symmetric matrix stored row-major in a flat buffer.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    /// Adds `w * col col'` where `col` is sparse.
    pub fn add_outer(&mut self, col: &[(usize, f64)], w: f64) {
        for &(i, a) in col {
            let wa = w * a;
            let base = i * self.n;
            for &(j, b) in col {
                self.data[base + j] += wa * b;
            }
        }
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n)
            .map(|i| self.get(i, i).abs())
            .fold(0.0, f64::max)
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L L'`.
///
/// Pivots that are tiny relative to the largest diagonal are replaced by a
/// huge value, which effectively zeroes the corresponding component of the
/// solution. This is the usual treatment for rank-deficient normal equations
/// that arise from redundant rows.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    replaced: usize,
}

const HUGE_PIVOT: f64 = 1e128;

impl Cholesky {
    pub fn factor(m: &SymMatrix) -> Option<Self> {
        let n = m.dim();
        let mut l = m.data.clone();
        let tol = 1e-30_f64.max(m.max_diagonal() * 1e-14);
        let mut replaced = 0;
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                let v = l[j * n + k];
                d -= v * v;
            }
            if !d.is_finite() {
                return None;
            }
            let pivot = if d <= tol {
                replaced += 1;
                HUGE_PIVOT
            } else {
                d.sqrt()
            };
            l[j * n + j] = pivot;
            for i in (j + 1)..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / pivot;
            }
        }
        Some(Self { n, l, replaced })
    }

    /// Number of pivots that were replaced because they were numerically zero.
    pub fn replaced_pivots(&self) -> usize {
        self.replaced
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let mut m = SymMatrix::zeros(3);
        let entries = [[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]];
        for (i, row) in entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.add(i, j, *v);
            }
        }
        let f = Cholesky::factor(&m).unwrap();
        let x = f.solve(&[1.0, 2.0, 3.0]);
        for (i, row) in entries.iter().enumerate() {
            let r: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        assert_eq!(f.replaced_pivots(), 0);
    }

    #[test]
    fn singular_matrix_gets_pivot_replacement() {
        let mut m = SymMatrix::zeros(2);
        m.add_outer(&[(0, 1.0), (1, 1.0)], 1.0);
        let f = Cholesky::factor(&m).unwrap();
        assert_eq!(f.replaced_pivots(), 1);
        let x = f.solve(&[2.0, 2.0]);
        assert!((x[0] + x[1] - 2.0).abs() < 1e-9);
    }
}
