//! Text format for multicommodity flow instances.
//!
//! ```text
//! mcnf <n> <m> <K>
//! arc <tail> <head> <cost> <capacity>          (m lines)
//! commodity <source> <sink> <demand>           (K lines)
//! ```
//!
//! Node ids are 1-based. Tokens are separated by whitespace, `#` starts a
//! comment, and blank lines are ignored.

use std::fmt::Write as _;

use super::{Arc, Commodity, Network};
use crate::io::{parse_count, parse_real, strip_comment, ParseError};

fn node(tok: &str, line: usize, n: usize, what: &str) -> Result<usize, ParseError> {
    let id = parse_count(tok, line, what)?;
    if id == 0 || id > n {
        return Err(ParseError::syntax(
            line,
            format!("{what} {id} outside 1..={n}"),
        ));
    }
    Ok(id - 1)
}

fn expect_fields(
    toks: &[&str],
    keyword: &str,
    count: usize,
    line: usize,
) -> Result<(), ParseError> {
    if toks[0] != keyword {
        return Err(ParseError::syntax(
            line,
            format!("expected `{keyword}`, found `{}`", toks[0]),
        ));
    }
    if toks.len() != count + 1 {
        return Err(ParseError::syntax(
            line,
            format!("`{keyword}` takes {count} fields, found {}", toks.len() - 1),
        ));
    }
    Ok(())
}

/// Parses an instance. Structural problems report the offending line.
pub fn parse_mcnf(text: &str) -> Result<Network, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty());

    let (hl, header) = lines
        .next()
        .ok_or_else(|| ParseError::syntax(1, "missing `mcnf` header"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    expect_fields(&toks, "mcnf", 3, hl)?;
    let n = parse_count(toks[1], hl, "node count")?;
    let m = parse_count(toks[2], hl, "arc count")?;
    let k = parse_count(toks[3], hl, "commodity count")?;
    if n == 0 {
        return Err(ParseError::syntax(hl, "node count must be positive"));
    }

    let mut arcs = Vec::with_capacity(m.min(1 << 16));
    let mut commodities = Vec::with_capacity(k.min(1 << 16));
    let mut last = hl;
    for (ln, l) in lines {
        last = ln;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if arcs.len() < m {
            expect_fields(&toks, "arc", 4, ln)?;
            let tail = node(toks[1], ln, n, "tail")?;
            let head = node(toks[2], ln, n, "head")?;
            if tail == head {
                return Err(ParseError::syntax(ln, "self-loop arcs are not allowed"));
            }
            let cost = parse_real(toks[3], ln, "cost")?;
            let capacity = parse_real(toks[4], ln, "capacity")?;
            if cost < 0.0 {
                return Err(ParseError::syntax(ln, "arc cost must be nonnegative"));
            }
            if capacity <= 0.0 {
                return Err(ParseError::syntax(ln, "arc capacity must be positive"));
            }
            arcs.push(Arc {
                tail,
                head,
                cost,
                capacity,
            });
        } else if commodities.len() < k {
            expect_fields(&toks, "commodity", 3, ln)?;
            let source = node(toks[1], ln, n, "source")?;
            let sink = node(toks[2], ln, n, "sink")?;
            let demand = parse_real(toks[3], ln, "demand")?;
            if demand <= 0.0 {
                return Err(ParseError::syntax(ln, "demand must be positive"));
            }
            commodities.push(Commodity {
                source,
                sink,
                demand,
            });
        } else {
            return Err(ParseError::syntax(
                ln,
                "unexpected content after the last commodity",
            ));
        }
    }
    if arcs.len() < m || commodities.len() < k {
        return Err(ParseError::syntax(
            last + 1,
            format!(
                "expected {m} arcs and {k} commodities, found {} and {}",
                arcs.len(),
                commodities.len()
            ),
        ));
    }
    Network::new(n, arcs, commodities).map_err(|e| ParseError::Invalid(e.to_string()))
}

/// Prints an instance in the format accepted by [`parse_mcnf`]. Reals use
/// the shortest representation that parses back to the same value.
pub fn print_mcnf(net: &Network) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "mcnf {} {} {}",
        net.num_nodes(),
        net.arcs().len(),
        net.commodities().len()
    );
    for a in net.arcs() {
        let _ = writeln!(
            s,
            "arc {} {} {} {}",
            a.tail + 1,
            a.head + 1,
            a.cost,
            a.capacity
        );
    }
    for c in net.commodities() {
        let _ = writeln!(s, "commodity {} {} {}", c.source + 1, c.sink + 1, c.demand);
    }
    s
}
