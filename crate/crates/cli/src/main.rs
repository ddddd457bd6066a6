//! `pdcgm` command-line front end.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pdcgm::io::{write_trace, ParseError, RunReport};
use pdcgm::mcnf::format::{parse_mcnf, print_mcnf};
use pdcgm::mcnf::generate::{generate_mcnf, McnfGenConfig};
use pdcgm::mcnf::solve_mcnf;
use pdcgm::pdcgm::{DriverConfig, DriverError, IterationRecord, Mode};
use pdcgm::tssp::format::{parse_tssp, print_tssp};
use pdcgm::tssp::generate::{generate_tssp, TsspGenConfig};
use pdcgm::tssp::solve_tssp;
use pdcgm::verify::{run_suite, Suite, SUITE_DELTA};

const EXIT_OPTIMAL: u8 = 0;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

const MCNF_DEGREE: f64 = 10.0;
const TSSP_DEGREE: f64 = 5.0;

#[derive(Debug, Parser)]
#[command(
    name = "pdcgm",
    version,
    about = "Primal-dual column generation solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a multicommodity network flow instance.
    SolveMcnf {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve a two-stage stochastic LP instance.
    SolveTssp {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Write a seeded random multicommodity flow instance.
    GenMcnf {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        nodes: usize,
        #[arg(long, default_value_t = 30)]
        arcs: usize,
        #[arg(long, default_value_t = 5)]
        commodities: usize,
        /// Output file; stdout if omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write a seeded random two-stage stochastic LP instance.
    GenTssp {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        scenarios: usize,
        /// First-stage variables.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// First-stage rows.
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 6)]
        recourse_vars: usize,
        #[arg(long, default_value_t = 3)]
        recourse_rows: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check column generation against a direct LP solve on a random suite.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = SUITE_DELTA)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Pdcgm)]
        mode: ModeArg,
        /// Print one line per instance.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Relative optimality tolerance.
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    /// Degree of optimality `D` (default 10 for MCNF, 5 for TSSP).
    #[arg(long)]
    degree: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    eps_max: f64,
    /// Centrality parameter.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Pdcgm)]
    mode: ModeArg,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    max_outer: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Pdcgm,
    Standard,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pdcgm => Mode::Pdcgm,
            ModeArg::Standard => Mode::Standard,
        }
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

impl SolverArgs {
    fn config(&self, default_degree: f64) -> DriverConfig {
        DriverConfig {
            delta: self.delta,
            degree: self.degree.unwrap_or(default_degree),
            eps_max: self.eps_max,
            gamma: self.gamma,
            mode: self.mode.into(),
            max_outer: self.max_outer,
        }
    }
}

/// A failed command and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<DriverError> for Failure {
    fn from(e: DriverError) -> Self {
        let code = match e {
            DriverError::InvalidConfig(_) => EXIT_USAGE,
            DriverError::MasterInfeasible { .. } => EXIT_INFEASIBLE,
            _ => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read_instance<T>(path: &Path, parse: fn(&str) -> Result<T, ParseError>) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn instance_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn emit_trace(path: Option<&Path>, trace: &[IterationRecord]) -> Result<(), Failure> {
    let Some(path) = path else {
        return Ok(());
    };
    let io_failure = |e: io::Error| Failure {
        code: EXIT_NUMERICAL,
        message: format!("{}: {e}", path.display()),
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_failure)?);
    write_trace(&mut w, trace).map_err(io_failure)?;
    w.flush().map_err(io_failure)
}

fn emit_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let result = match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| Failure {
        code: EXIT_NUMERICAL,
        message: e.to_string(),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::SolveMcnf { file, solver } => {
            let net = read_instance(&file, parse_mcnf)?;
            let cfg = solver.config(MCNF_DEGREE);
            let start = Instant::now();
            let sol = solve_mcnf(&net, &cfg)?;
            let elapsed = start.elapsed().as_secs_f64();
            emit_trace(solver.trace.as_deref(), &sol.trace)?;
            let mut report = RunReport::new(
                instance_name(&file),
                cfg.mode,
                sol.objective,
                &sol.trace,
                elapsed,
            );
            report.active_fraction = Some(sol.active_fraction);
            print!("{}", report.render());
        }
        Command::SolveTssp { file, solver } => {
            let inst = read_instance(&file, parse_tssp)?;
            let cfg = solver.config(TSSP_DEGREE);
            let start = Instant::now();
            let sol = solve_tssp(&inst, &cfg)?;
            let elapsed = start.elapsed().as_secs_f64();
            emit_trace(solver.trace.as_deref(), &sol.trace)?;
            let mut report = RunReport::new(
                instance_name(&file),
                cfg.mode,
                sol.objective,
                &sol.trace,
                elapsed,
            );
            report.artificial_mass = Some(sol.artificial_mass);
            print!("{}", report.render());
        }
        Command::GenMcnf {
            seed,
            nodes,
            arcs,
            commodities,
            output,
        } => {
            let net = generate_mcnf(&McnfGenConfig {
                nodes,
                arcs,
                commodities,
                seed,
            });
            emit_text(output.as_deref(), &print_mcnf(&net))?;
        }
        Command::GenTssp {
            seed,
            scenarios,
            n,
            m,
            recourse_vars,
            recourse_rows,
            output,
        } => {
            let inst = generate_tssp(&TsspGenConfig {
                n,
                m,
                recourse_vars,
                recourse_rows,
                scenarios,
                seed,
            });
            emit_text(output.as_deref(), &print_tssp(&inst))?;
        }
        Command::Verify {
            suite,
            delta,
            mode,
            verbose,
        } => {
            let cfg = DriverConfig {
                delta,
                mode: mode.into(),
                ..suite.config()
            };
            cfg.validate()?;
            let report = run_suite(suite, &cfg);
            let text = report.render();
            if verbose {
                print!("{text}");
            } else {
                print!(
                    "{}",
                    text.lines()
                        .last()
                        .map(|l| format!("{l}\n"))
                        .unwrap_or_default()
                );
            }
            if !report.all_passed() {
                return Err(Failure {
                    code: EXIT_NUMERICAL,
                    message: format!(
                        "{} of {} instances disagree with the direct solve",
                        report.cases.len() - report.passes(),
                        report.cases.len()
                    ),
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OPTIMAL),
        Err(f) => {
            eprintln!("pdcgm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
