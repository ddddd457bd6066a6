//! Seeded random two-stage instances.
//!
//! A first-stage point `x0` and recourse points `y0_i` are drawn first, and
//! the right-hand sides are set to `b = A x0` and `h_i = T_i x0 + W_i y0_i`,
//! so the deterministic equivalent is feasible. Costs are nonnegative, so it
//! is bounded and every scenario dual set contains zero. Recourse is not
//! complete, which makes ray columns appear during column generation.
//!
//! Data are integers divided by ten and right-hand sides are computed in
//! exact integer arithmetic; probabilities are integer weights divided by
//! their sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FirstStage, Scenario, StochasticInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TsspGenConfig {
    /// First-stage variables.
    pub n: usize,
    /// First-stage rows, at most `n`.
    pub m: usize,
    /// Recourse variables per scenario, at least `recourse_rows`.
    pub recourse_vars: usize,
    pub recourse_rows: usize,
    pub scenarios: usize,
    pub seed: u64,
}

fn tenths(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    rng.gen_range(lo..=hi)
}

/// Sparse-ish integer matrix in tenths: about a third of the entries are zero.
fn int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<i64>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if rng.gen_range(0..3) == 0 {
                        0
                    } else {
                        tenths(rng, -20, 20)
                    }
                })
                .collect()
        })
        .collect()
}

fn to_real(v: &[i64], scale: f64) -> Vec<f64> {
    v.iter().map(|&x| x as f64 / scale).collect()
}

fn to_real_matrix(m: &[Vec<i64>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| to_real(r, 10.0)).collect()
}

/// `M v` for tenth-valued `M` and `v`, in hundredths.
fn int_times(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Generates an instance. `m` is capped at `n`, `recourse_vars` raised to
/// `recourse_rows`, and `n`, `scenarios` raised to 1.
pub fn generate_tssp(cfg: &TsspGenConfig) -> StochasticInstance {
    let n = cfg.n.max(1);
    let m = cfg.m.min(n);
    let m2 = cfg.recourse_rows;
    let n2 = cfg.recourse_vars.max(m2);
    let ns = cfg.scenarios.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let x0: Vec<i64> = (0..n).map(|_| tenths(&mut rng, 0, 50)).collect();
    let c: Vec<i64> = (0..n).map(|_| tenths(&mut rng, 0, 50)).collect();
    let a = int_matrix(&mut rng, m, n);
    let b = int_times(&a, &x0);
    let first = FirstStage {
        c: to_real(&c, 10.0),
        a: to_real_matrix(&a),
        b: to_real(&b, 100.0),
    };

    let weights: Vec<u32> = (0..ns).map(|_| rng.gen_range(1..=10)).collect();
    let total: u32 = weights.iter().sum();
    let mut scenarios = Vec::with_capacity(ns);
    for &wt in &weights {
        let q: Vec<i64> = (0..n2).map(|_| tenths(&mut rng, 0, 50)).collect();
        let t = int_matrix(&mut rng, m2, n);
        let w = int_matrix(&mut rng, m2, n2);
        let y0: Vec<i64> = (0..n2).map(|_| tenths(&mut rng, 0, 50)).collect();
        let h: Vec<i64> = int_times(&t, &x0)
            .iter()
            .zip(int_times(&w, &y0))
            .map(|(p, r)| p + r)
            .collect();
        scenarios.push(Scenario {
            probability: f64::from(wt) / f64::from(total),
            q: to_real(&q, 10.0),
            t: to_real_matrix(&t),
            w: to_real_matrix(&w),
            h: to_real(&h, 100.0),
        });
    }
    StochasticInstance::new(first, scenarios).expect("generated instances are valid")
}

/// The `index`-th member of the small random suite: `n <= 6`, `m <= 4`,
/// `m~ <= 5`, `n~ <= 8` and at most 10 scenarios.
pub fn suite_instance(index: u64) -> StochasticInstance {
    let mut rng =
        ChaCha8Rng::seed_from_u64(0x7473_7370 ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=n.min(4));
    let recourse_rows = rng.gen_range(1..=5);
    let recourse_vars = rng.gen_range(recourse_rows..=8);
    let scenarios = rng.gen_range(1..=10);
    generate_tssp(&TsspGenConfig {
        n,
        m,
        recourse_vars,
        recourse_rows,
        scenarios,
        seed: rng.gen(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_feasible() {
        let cfg = TsspGenConfig {
            n: 4,
            m: 2,
            recourse_vars: 5,
            recourse_rows: 3,
            scenarios: 4,
            seed: 7,
        };
        let a = generate_tssp(&cfg);
        assert_eq!(a, generate_tssp(&cfg));
        assert_eq!(
            (a.n(), a.m(), a.recourse_vars(), a.recourse_rows()),
            (4, 2, 5, 3)
        );
        let p: f64 = a.scenarios().iter().map(|s| s.probability).sum();
        assert!((p - 1.0).abs() < 1e-12);
        let out = crate::simplex::solve(&a.deterministic_equivalent()).unwrap();
        assert_eq!(out.status, crate::simplex::SimplexStatus::Optimal);
    }
}
