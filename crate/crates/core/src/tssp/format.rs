//! Structured text format for two-stage instances.
//!
//! ```text
//! first_stage {
//!   c = [10 7 16 6];
//!   A = rows [ [1 1 1 1] ];
//!   b = [12];
//! }
//! scenario {
//!   p = 0.3;
//!   q = [...];
//!   T = rows [ [...] [...] ];
//!   W = rows [ [...] [...] ];
//!   h = [...];
//! }
//! ```
//!
//! There is exactly one `first_stage` block, followed by one or more
//! `scenario` blocks. Fields may appear in any order but each exactly once.
//! Matrices are dense and row-major; `rows [ ]` is an empty matrix. Commas
//! are accepted as separators, `#` starts a comment.

use std::fmt::Write as _;

use super::{FirstStage, Scenario, StochasticInstance};
use crate::io::{parse_real, strip_comment, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Punct(char),
}

struct Lexer<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        let mut toks = Vec::new();
        let mut last_line = 1;
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            last_line = ln;
            let line = strip_comment(line);
            let mut start = None;
            for (j, ch) in line.char_indices() {
                let punct = matches!(ch, '{' | '}' | '[' | ']' | '=' | ';');
                if punct || ch.is_whitespace() || ch == ',' {
                    if let Some(s) = start.take() {
                        toks.push((ln, Tok::Word(&line[s..j])));
                    }
                    if punct {
                        toks.push((ln, Tok::Punct(ch)));
                    }
                } else if start.is_none() {
                    start = Some(j);
                }
            }
            if let Some(s) = start {
                toks.push((ln, Tok::Word(&line[s..])));
            }
        }
        Self {
            toks,
            pos: 0,
            last_line,
        }
    }

    fn peek(&self) -> Option<&(usize, Tok<'a>)> {
        self.toks.get(self.pos)
    }

    fn line(&self) -> usize {
        self.peek().map_or(self.last_line, |t| t.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, Tok<'a>), ParseError> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| {
            ParseError::syntax(
                self.last_line,
                format!("unexpected end of input, expected {what}"),
            )
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn punct(&mut self, ch: char) -> Result<usize, ParseError> {
        match self.next(&format!("`{ch}`"))? {
            (ln, Tok::Punct(c)) if c == ch => Ok(ln),
            (ln, t) => Err(ParseError::syntax(
                ln,
                format!("expected `{ch}`, found {}", show(&t)),
            )),
        }
    }

    fn word(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.next(what)? {
            (ln, Tok::Word(w)) => Ok((ln, w)),
            (ln, t) => Err(ParseError::syntax(
                ln,
                format!("expected {what}, found {}", show(&t)),
            )),
        }
    }

    fn at_punct(&self, ch: char) -> bool {
        matches!(self.peek(), Some((_, Tok::Punct(c))) if *c == ch)
    }

    fn vector(&mut self, what: &str) -> Result<Vec<f64>, ParseError> {
        self.punct('[')?;
        let mut v = Vec::new();
        while !self.at_punct(']') {
            let (ln, w) = self.word(&format!("a number or `]` in {what}"))?;
            v.push(parse_real(w, ln, what)?);
        }
        self.punct(']')?;
        Ok(v)
    }

    fn matrix(&mut self, what: &str) -> Result<Vec<Vec<f64>>, ParseError> {
        let (ln, w) = self.word("`rows`")?;
        if w != "rows" {
            return Err(ParseError::syntax(
                ln,
                format!("expected `rows` for matrix {what}, found `{w}`"),
            ));
        }
        self.punct('[')?;
        let mut rows = Vec::new();
        while !self.at_punct(']') {
            let ln = self.line();
            let row = self.vector(what)?;
            if let Some(first) = rows.first().map(Vec::len) {
                if row.len() != first {
                    return Err(ParseError::syntax(
                        ln,
                        format!(
                            "row of {what} has {} entries, previous rows have {first}",
                            row.len()
                        ),
                    ));
                }
            }
            rows.push(row);
        }
        self.punct(']')?;
        Ok(rows)
    }
}

fn show(t: &Tok<'_>) -> String {
    match t {
        Tok::Word(w) => format!("`{w}`"),
        Tok::Punct(c) => format!("`{c}`"),
    }
}

#[derive(Default)]
struct Fields {
    vectors: Vec<(&'static str, Vec<f64>)>,
    matrices: Vec<(&'static str, Vec<Vec<f64>>)>,
    scalars: Vec<(&'static str, f64)>,
}

#[derive(Clone, Copy)]
enum Kind {
    Scalar,
    Vector,
    Matrix,
}

fn block(
    lx: &mut Lexer<'_>,
    block_name: &str,
    spec: &[(&'static str, Kind)],
    start: usize,
) -> Result<Fields, ParseError> {
    lx.punct('{')?;
    let mut f = Fields::default();
    let mut seen = vec![false; spec.len()];
    while !lx.at_punct('}') {
        let (ln, name) = lx.word("a field name or `}`")?;
        let idx = spec.iter().position(|(n, _)| *n == name).ok_or_else(|| {
            ParseError::syntax(ln, format!("unknown field `{name}` in {block_name}"))
        })?;
        if seen[idx] {
            return Err(ParseError::syntax(
                ln,
                format!("field `{name}` given twice in {block_name}"),
            ));
        }
        seen[idx] = true;
        lx.punct('=')?;
        let (key, kind) = spec[idx];
        match kind {
            Kind::Scalar => {
                let (vl, w) = lx.word(&format!("a number for `{key}`"))?;
                f.scalars.push((key, parse_real(w, vl, key)?));
            }
            Kind::Vector => f.vectors.push((key, lx.vector(key)?)),
            Kind::Matrix => f.matrices.push((key, lx.matrix(key)?)),
        }
        lx.punct(';')?;
    }
    let end = lx.punct('}')?;
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(ParseError::syntax(
            end.max(start),
            format!("{block_name} is missing field `{}`", spec[i].0),
        ));
    }
    Ok(f)
}

impl Fields {
    fn vector(&mut self, key: &str) -> Vec<f64> {
        let i = self
            .vectors
            .iter()
            .position(|(k, _)| *k == key)
            .expect("field checked");
        self.vectors.swap_remove(i).1
    }

    fn matrix(&mut self, key: &str) -> Vec<Vec<f64>> {
        let i = self
            .matrices
            .iter()
            .position(|(k, _)| *k == key)
            .expect("field checked");
        self.matrices.swap_remove(i).1
    }

    fn scalar(&self, key: &str) -> f64 {
        self.scalars
            .iter()
            .find(|(k, _)| *k == key)
            .expect("field checked")
            .1
    }
}

/// Parses an instance. Structural problems report the offending line;
/// dimension and probability problems are reported as
/// [`ParseError::Invalid`].
pub fn parse_tssp(text: &str) -> Result<StochasticInstance, ParseError> {
    let mut lx = Lexer::new(text);
    let (ln, w) = lx.word("`first_stage`")?;
    if w != "first_stage" {
        return Err(ParseError::syntax(
            ln,
            format!("expected `first_stage`, found `{w}`"),
        ));
    }
    let mut f = block(
        &mut lx,
        "first_stage",
        &[
            ("c", Kind::Vector),
            ("A", Kind::Matrix),
            ("b", Kind::Vector),
        ],
        ln,
    )?;
    let first = FirstStage {
        c: f.vector("c"),
        a: f.matrix("A"),
        b: f.vector("b"),
    };

    let mut scenarios = Vec::new();
    while lx.peek().is_some() {
        let (ln, w) = lx.word("`scenario`")?;
        if w != "scenario" {
            return Err(ParseError::syntax(
                ln,
                format!("expected `scenario`, found `{w}`"),
            ));
        }
        let mut f = block(
            &mut lx,
            "scenario",
            &[
                ("p", Kind::Scalar),
                ("q", Kind::Vector),
                ("T", Kind::Matrix),
                ("W", Kind::Matrix),
                ("h", Kind::Vector),
            ],
            ln,
        )?;
        scenarios.push(Scenario {
            probability: f.scalar("p"),
            q: f.vector("q"),
            t: f.matrix("T"),
            w: f.matrix("W"),
            h: f.vector("h"),
        });
    }
    if scenarios.is_empty() {
        return Err(ParseError::syntax(
            lx.last_line + 1,
            "expected at least one `scenario` block",
        ));
    }
    StochasticInstance::new(first, scenarios).map_err(|e| ParseError::Invalid(e.to_string()))
}

fn write_vector(s: &mut String, v: &[f64]) {
    s.push('[');
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x}");
    }
    s.push(']');
}

fn write_field(s: &mut String, key: &str, v: &[f64]) {
    let _ = write!(s, "  {key} = ");
    write_vector(s, v);
    s.push_str(";\n");
}

fn write_matrix(s: &mut String, key: &str, mat: &[Vec<f64>]) {
    let _ = write!(s, "  {key} = rows [");
    if mat.is_empty() {
        s.push_str(" ];\n");
        return;
    }
    s.push('\n');
    for r in mat {
        s.push_str("    ");
        write_vector(s, r);
        s.push('\n');
    }
    s.push_str("  ];\n");
}

/// Prints an instance in the format accepted by [`parse_tssp`].
pub fn print_tssp(inst: &StochasticInstance) -> String {
    let mut s = String::from("first_stage {\n");
    let f = inst.first_stage();
    write_field(&mut s, "c", &f.c);
    write_matrix(&mut s, "A", &f.a);
    write_field(&mut s, "b", &f.b);
    s.push_str("}\n");
    for sc in inst.scenarios() {
        let _ = writeln!(s, "scenario {{\n  p = {};", sc.probability);
        write_field(&mut s, "q", &sc.q);
        write_matrix(&mut s, "T", &sc.t);
        write_matrix(&mut s, "W", &sc.w);
        write_field(&mut s, "h", &sc.h);
        s.push_str("}\n");
    }
    s
}
