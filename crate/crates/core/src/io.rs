//! Shared parsing errors, trace CSV output and run reports.

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use crate::pdcgm::{IterationRecord, Mode};

/// Error from one of the instance-file parsers. Line numbers are 1-based;
/// semantic errors detected after parsing carry no line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

impl ParseError {
    pub fn syntax(line: usize, message: impl Into<String>) -> Self {
        Self::Syntax {
            line,
            message: message.into(),
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            Self::Syntax { line, .. } => Some(*line),
            Self::Invalid(_) => None,
        }
    }
}

pub const TRACE_HEADER: &str = "iter,ub,lb,gap,eps,zsp,cols_added,rmp_s,oracle_s";

/// Formats a real with 12 significant digits, `%g` style.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, e) = exp.split_once('e').expect("exponent present");
    let e: i32 = e.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&e) {
        let m = trim_fraction(mantissa);
        format!("{m}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    } else {
        let decimals = (DIGITS - 1 - e).max(0) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

/// Formats a real as `d.dddddE+XX`.
pub fn format_sci(v: f64) -> String {
    if !v.is_finite() {
        return format_sig(v);
    }
    let s = format!("{v:.5E}");
    let (mantissa, e) = s.split_once('E').expect("exponent present");
    let e: i32 = e.parse().expect("integer exponent");
    format!("{mantissa}E{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the trace as CSV with the fixed header.
pub fn write_trace<W: Write>(mut w: W, trace: &[IterationRecord]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.outer_index,
            format_sig(r.ub),
            format_sig(r.lb),
            format_sig(r.gap),
            format_sig(r.eps_used),
            format_sig(r.oracle_value),
            r.columns_added,
            format_sig(r.rmp_time),
            format_sig(r.oracle_time)
        )?;
    }
    Ok(())
}

/// Summary of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub mode: Mode,
    pub objective: f64,
    pub outer_iterations: usize,
    pub total_time: f64,
    pub rmp_fraction: f64,
    pub oracle_fraction: f64,
    pub active_fraction: Option<f64>,
    pub artificial_mass: Option<f64>,
}

impl RunReport {
    pub fn new(
        instance: impl Into<String>,
        mode: Mode,
        objective: f64,
        trace: &[IterationRecord],
        total_time: f64,
    ) -> Self {
        let rmp: f64 = trace.iter().map(|r| r.rmp_time).sum();
        let oracle: f64 = trace.iter().map(|r| r.oracle_time).sum();
        let frac = |t: f64| {
            if total_time > 0.0 {
                (t / total_time).clamp(0.0, 1.0)
            } else {
                0.0
            }
        };
        let (mut rmp_fraction, mut oracle_fraction) = (frac(rmp), frac(oracle));
        let sum = rmp_fraction + oracle_fraction;
        if sum > 1.0 {
            rmp_fraction /= sum;
            oracle_fraction /= sum;
        }
        Self {
            instance: instance.into(),
            mode,
            objective,
            outer_iterations: trace.len(),
            total_time,
            rmp_fraction,
            oracle_fraction,
            active_fraction: None,
            artificial_mass: None,
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let mode = match self.mode {
            Mode::Pdcgm => "pdcgm",
            Mode::Standard => "standard",
        };
        let _ = writeln!(s, "instance          {}", self.instance);
        let _ = writeln!(s, "mode              {mode}");
        let _ = writeln!(s, "objective         {}", format_sci(self.objective));
        let _ = writeln!(s, "objective (full)  {}", format_sig(self.objective));
        let _ = writeln!(s, "outer iterations  {}", self.outer_iterations);
        let _ = writeln!(s, "time (s)          {:.3}", self.total_time);
        let _ = writeln!(s, "rmp time share    {:.1}%", 100.0 * self.rmp_fraction);
        let _ = writeln!(s, "oracle time share {:.1}%", 100.0 * self.oracle_fraction);
        if let Some(a) = self.active_fraction {
            let _ = writeln!(s, "active rows       {:.1}%", 100.0 * a);
        }
        if let Some(a) = self.artificial_mass {
            let _ = writeln!(s, "artificial mass   {}", format_sig(a));
        }
        s
    }
}

/// Splits a line at `#` and trims it.
pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub(crate) fn parse_real(tok: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    let v: f64 = tok.parse().map_err(|_| {
        ParseError::syntax(line, format!("expected a number for {what}, found `{tok}`"))
    })?;
    if !v.is_finite() {
        return Err(ParseError::syntax(
            line,
            format!("{what} must be finite, found `{tok}`"),
        ));
    }
    Ok(v)
}

pub(crate) fn parse_count(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.parse().map_err(|_| {
        ParseError::syntax(
            line,
            format!("expected a nonnegative integer for {what}, found `{tok}`"),
        )
    })
}
