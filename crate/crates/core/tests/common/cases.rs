//! Seeded random cases for the component checks. Each returns `Err` with a
//! description on disagreement.

use pdcgm::ipm::solve_to_gap;
use pdcgm::lp::{LinearProgram, RowKind};
use pdcgm::mcnf::dijkstra::{dijkstra, out_arcs};
use pdcgm::mcnf::Arc;
use pdcgm::oracle::QuadraticBowls;
use pdcgm::simplex::{self, SimplexStatus};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    bellman_ford, enumerate_vertices, grid_minimizer, is_descent_ray, is_farkas_certificate,
    Enumerated,
};

pub const SIMPLEX_TOL: f64 = 1e-8;
pub const IPM_TOL: f64 = 1e-6;
pub const GRID_TOL: f64 = 1e-3;
pub const GRID_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forced {
    None,
    Infeasible,
    Unbounded,
}

impl Forced {
    /// Every tenth case is forced infeasible, another tenth unbounded.
    pub fn for_case(case: usize) -> Self {
        match case % 10 {
            3 => Self::Infeasible,
            7 => Self::Unbounded,
            _ => Self::None,
        }
    }
}

/// Random LP with at most 4 rows and 8 variables and integer data. Unforced
/// programs are feasible by construction (`rhs` from a nonnegative point).
pub fn random_lp(rng: &mut ChaCha8Rng, forced: Forced) -> LinearProgram {
    let n = rng.gen_range(2..=7);
    let m = rng.gen_range(1..=3);
    let x0: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..=3))).collect();
    let bounded = forced != Forced::Unbounded && rng.gen_bool(0.7);
    let total = n + usize::from(forced == Forced::Unbounded);
    let costs: Vec<f64> = (0..total)
        .map(|j| {
            if j == n {
                -1.0
            } else {
                f64::from(rng.gen_range(-5..=5))
            }
        })
        .collect();
    let mut lp = LinearProgram::nonnegative(costs).unwrap();
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-5..=5))).collect();
        let act: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        let le = rng.gen_bool(0.5) || forced == Forced::Unbounded;
        let mut entries: Vec<(usize, f64)> = row.into_iter().enumerate().collect();
        if forced == Forced::Unbounded {
            entries.push((n, -f64::from(rng.gen_range(0..=3))));
        }
        if le {
            lp.add_row(
                entries,
                RowKind::LessEqual,
                act + f64::from(rng.gen_range(0..=3)),
            )
            .unwrap();
        } else {
            lp.add_row(entries, RowKind::Equal, act).unwrap();
        }
    }
    if bounded {
        lp.add_row((0..n).map(|j| (j, 1.0)), RowKind::LessEqual, 20.0)
            .unwrap();
    }
    if forced == Forced::Infeasible {
        let j = rng.gen_range(0..n);
        lp.add_row([(j, 1.0)], RowKind::LessEqual, -1.0).unwrap();
    }
    lp
}

/// Simplex against vertex enumeration, with certificate checks.
pub fn simplex_case(rng: &mut ChaCha8Rng, case: usize) -> Result<Enumerated, String> {
    let forced = Forced::for_case(case);
    let lp = random_lp(rng, forced);
    let reference = enumerate_vertices(&lp);
    let expected_forced = match forced {
        Forced::None => None,
        Forced::Infeasible => Some(Enumerated::Infeasible),
        Forced::Unbounded => Some(Enumerated::Unbounded),
    };
    if expected_forced.is_some_and(|e| e != reference) {
        return Err(format!(
            "case {case}: forced {forced:?} but enumeration says {reference:?}"
        ));
    }
    let out = simplex::solve(&lp).map_err(|e| format!("case {case}: {e}"))?;
    let ok = match reference {
        Enumerated::Optimal(z) => {
            let obj = out.objective.unwrap_or(f64::NAN);
            let x = out.point.clone().unwrap_or_default();
            out.status == SimplexStatus::Optimal
                && (obj - z).abs() <= SIMPLEX_TOL * z.abs().max(1.0)
                && lp.max_violation(&x) <= 1e-9
                && (lp.objective_value(&x) - obj).abs() <= 1e-9 * obj.abs().max(1.0)
        }
        Enumerated::Infeasible => {
            out.status == SimplexStatus::Infeasible
                && out
                    .ray
                    .as_ref()
                    .is_some_and(|y| is_farkas_certificate(&lp, y))
        }
        Enumerated::Unbounded => {
            out.status == SimplexStatus::Unbounded
                && out.ray.as_ref().is_some_and(|d| is_descent_ray(&lp, d))
        }
    };
    if ok {
        Ok(reference)
    } else {
        Err(format!(
            "case {case}: simplex {:?} {:?} vs enumeration {reference:?}",
            out.status, out.objective
        ))
    }
}

/// IPM at `eps = 1e-8` against vertex enumeration on a 3-row, 6-variable
/// LP whose first row has positive entries and every rhs is positive.
pub fn ipm_case(rng: &mut ChaCha8Rng, case: usize) -> Result<(), String> {
    let costs: Vec<f64> = (0..6).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    let mut lp = LinearProgram::nonnegative(costs).unwrap();
    for i in 0..3 {
        let row: Vec<f64> = (0..6)
            .map(|_| {
                if i == 0 {
                    rng.gen_range(1.0..=5.0)
                } else {
                    rng.gen_range(-5.0..=5.0)
                }
            })
            .collect();
        lp.add_dense_row(&row, RowKind::LessEqual, rng.gen_range(1.0..=10.0))
            .unwrap();
    }
    let Enumerated::Optimal(z) = enumerate_vertices(&lp) else {
        return Err(format!(
            "case {case}: padded LP is not feasible and bounded"
        ));
    };
    let point = solve_to_gap(&lp, 1e-8, 0.1, None).map_err(|e| format!("case {case}: {e}"))?;
    let obj = lp.objective_value(&point.primal);
    if (obj - z).abs() <= IPM_TOL {
        Ok(())
    } else {
        Err(format!("case {case}: ipm {obj} vs enumeration {z}"))
    }
}

/// Random strongly connected digraph on at most 12 nodes with integer
/// lengths, so path sums are exact.
pub fn random_digraph(rng: &mut ChaCha8Rng) -> (usize, Vec<Arc>, Vec<f64>) {
    let n = rng.gen_range(2..=12);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let arc = |tail, head| Arc {
        tail,
        head,
        cost: 1.0,
        capacity: 1.0,
    };
    let mut arcs: Vec<Arc> = (0..n).map(|i| arc(order[i], order[(i + 1) % n])).collect();
    for _ in 0..rng.gen_range(0..=3 * n) {
        let t = rng.gen_range(0..n);
        let h = rng.gen_range(0..n);
        if t != h {
            arcs.push(arc(t, h));
        }
    }
    let lengths = (0..arcs.len())
        .map(|_| f64::from(rng.gen_range(0..=20)))
        .collect();
    (n, arcs, lengths)
}

/// Dijkstra distances and paths against Bellman-Ford, exactly.
pub fn dijkstra_case(rng: &mut ChaCha8Rng, case: usize) -> Result<(), String> {
    let (n, arcs, lengths) = random_digraph(rng);
    let source = rng.gen_range(0..n);
    let tree = dijkstra(n, &arcs, &out_arcs(n, &arcs), &lengths, source);
    let reference = bellman_ford(n, &arcs, &lengths, source);
    if tree.dist != reference {
        return Err(format!(
            "case {case}: dijkstra {:?} vs bellman-ford {reference:?}",
            tree.dist
        ));
    }
    for v in 0..n {
        let path = tree
            .path_to(&arcs, v)
            .ok_or_else(|| format!("case {case}: no path to {v}"))?;
        let len: f64 = path.iter().map(|&a| lengths[a]).sum();
        if len != reference[v] {
            return Err(format!("case {case}: path to {v} has length {len}"));
        }
    }
    Ok(())
}

/// Two-bowl minimizer against a grid search of step [`GRID_STEP`]. Case 0
/// uses the weights `(0.3, 0.7)`.
pub fn grid_case(rng: &mut ChaCha8Rng, case: usize) -> Result<(), String> {
    let dim = rng.gen_range(1..=4);
    let upper = 2.0;
    let draw = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> Vec<Vec<f64>> {
        (0..2)
            .map(|_| (0..dim).map(|_| rng.gen_range(lo..hi)).collect())
            .collect()
    };
    let a = draw(rng, 0.5, 3.0);
    let b = draw(rng, -2.0, 5.0);
    let beta = if case == 0 {
        vec![0.3, 0.7]
    } else {
        let w = rng.gen_range(0.0..=1.0);
        vec![w, 1.0 - w]
    };
    let bowls = QuadraticBowls::new(a.clone(), b.clone(), upper).map_err(|e| e.to_string())?;
    let alpha = bowls.minimizer(&beta);
    let grid = grid_minimizer(&a, &b, &beta, upper, GRID_STEP);
    if alpha
        .iter()
        .zip(&grid)
        .all(|(x, g)| (x - g).abs() <= GRID_TOL)
    {
        Ok(())
    } else {
        Err(format!("case {case}: oracle {alpha:?} vs grid {grid:?}"))
    }
}
