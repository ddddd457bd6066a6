//! Equivalence suites: column generation against a direct LP solve.
//!
//! Each suite member is solved twice, once by the decomposition and once by
//! the simplex on the compact arc-flow LP (MCNF) or the deterministic
//! equivalent (TSSP). A member passes when both objectives agree within
//! [`SUITE_TOL`] relative.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::lp::LinearProgram;
use crate::mcnf::{self, solve_mcnf};
use crate::pdcgm::DriverConfig;
use crate::simplex::{self, SimplexStatus};
use crate::tssp::{self, solve_tssp};

/// Number of seeded instances per suite.
pub const SUITE_SIZE: u64 = 50;
/// Relative objective tolerance, `|cg - direct| <= tol * max(1, |direct|)`.
pub const SUITE_TOL: f64 = 1e-6;
/// Optimality tolerance used for suite runs.
pub const SUITE_DELTA: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    McnfSmall,
    TsspSmall,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::McnfSmall => "mcnf-small",
            Self::TsspSmall => "tssp-small",
        }
    }

    /// Driver settings for the suite: the per-application degree `D` and
    /// [`SUITE_DELTA`].
    pub fn config(self) -> DriverConfig {
        DriverConfig {
            delta: SUITE_DELTA,
            degree: match self {
                Self::McnfSmall => 10.0,
                Self::TsspSmall => 5.0,
            },
            ..DriverConfig::default()
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mcnf-small" => Ok(Self::McnfSmall),
            "tssp-small" => Ok(Self::TsspSmall),
            _ => Err(format!(
                "unknown suite `{s}` (expected mcnf-small or tssp-small)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub index: u64,
    pub direct: f64,
    /// Column generation objective, or the error it stopped with.
    pub cg: Result<f64, String>,
    pub outer_iterations: usize,
}

impl CaseResult {
    pub fn rel_error(&self) -> f64 {
        match self.cg {
            Ok(v) => (v - self.direct).abs() / self.direct.abs().max(1.0),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn passed(&self) -> bool {
        self.rel_error() <= SUITE_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: Vec<CaseResult>,
    pub elapsed: f64,
}

impl SuiteReport {
    pub fn passes(&self) -> usize {
        self.cases.iter().filter(|c| c.passed()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passes() == self.cases.len()
    }

    pub fn worst_error(&self) -> f64 {
        self.cases
            .iter()
            .map(CaseResult::rel_error)
            .fold(0.0, f64::max)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.cases {
            let cg = match &c.cg {
                Ok(v) => format!("{v:.9e}"),
                Err(e) => format!("error: {e}"),
            };
            s.push_str(&format!(
                "{:>3} {} direct {:.9e} cg {cg} rel {:.2e} outer {}\n",
                c.index,
                if c.passed() { "ok  " } else { "FAIL" },
                c.direct,
                c.rel_error(),
                c.outer_iterations
            ));
        }
        s.push_str(&format!(
            "{}: {}/{} passed, worst rel error {:.2e}, {:.2} s\n",
            self.suite,
            self.passes(),
            self.cases.len(),
            self.worst_error(),
            self.elapsed
        ));
        s
    }
}

fn direct_objective(lp: &LinearProgram) -> f64 {
    match simplex::solve(lp) {
        Ok(out) if out.status == SimplexStatus::Optimal => {
            out.objective.expect("optimal outcome has an objective")
        }
        _ => f64::NAN,
    }
}

/// Runs one suite member.
pub fn run_case(suite: Suite, index: u64, cfg: &DriverConfig) -> CaseResult {
    match suite {
        Suite::McnfSmall => {
            let net = mcnf::generate::suite_instance(index);
            let direct = direct_objective(&net.compact_lp());
            let (cg, outer_iterations) = match solve_mcnf(&net, cfg) {
                Ok(s) => (Ok(s.objective), s.outer_iterations),
                Err(e) => (Err(e.to_string()), 0),
            };
            CaseResult {
                index,
                direct,
                cg,
                outer_iterations,
            }
        }
        Suite::TsspSmall => {
            let inst = tssp::generate::suite_instance(index);
            let direct = direct_objective(&inst.deterministic_equivalent());
            let (cg, outer_iterations) = match solve_tssp(&inst, cfg) {
                Ok(s) => (Ok(s.objective), s.outer_iterations),
                Err(e) => (Err(e.to_string()), 0),
            };
            CaseResult {
                index,
                direct,
                cg,
                outer_iterations,
            }
        }
    }
}

/// Runs all [`SUITE_SIZE`] members of a suite with `cfg`.
pub fn run_suite(suite: Suite, cfg: &DriverConfig) -> SuiteReport {
    let start = Instant::now();
    let cases = (0..SUITE_SIZE).map(|i| run_case(suite, i, cfg)).collect();
    SuiteReport {
        suite,
        cases,
        elapsed: start.elapsed().as_secs_f64(),
    }
}
