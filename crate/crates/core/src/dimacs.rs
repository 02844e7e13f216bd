//! DIMACS CNF text: `p cnf <n> <m>` then one `0`-terminated clause per line.

use std::fmt::Write as _;
use std::path::Path;

use crate::clause::{Formula, Literal};
use crate::error::{Error, Result};

pub fn to_dimacs(formula: &Formula) -> String {
    let mut out = String::with_capacity(16 + formula.len() * (formula.arity() * 6 + 2));
    writeln!(out, "p cnf {} {}", formula.n(), formula.len()).expect("string write");
    for c in formula.clauses() {
        for l in c {
            write!(out, "{} ", l.to_dimacs()).expect("string write");
        }
        out.push_str("0\n");
    }
    out
}

pub fn write_dimacs(formula: &Formula, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_dimacs(formula))?;
    Ok(())
}

/// Parses a fixed-arity CNF. `c` lines are skipped; clauses may span lines.
/// An instance without clauses parses to arity 0.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let err = |line: usize, msg: &str| Error::Dimacs {
        line,
        msg: msg.to_string(),
    };
    let mut header: Option<(usize, usize)> = None;
    let mut formula: Option<Formula> = None;
    let mut current: Vec<Literal> = Vec::new();
    let mut seen = 0usize;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(line_no, "duplicate header"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let n = parts[2]
                .parse()
                .map_err(|_| err(line_no, "bad variable count"))?;
            let m = parts[3]
                .parse()
                .map_err(|_| err(line_no, "bad clause count"))?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or_else(|| err(line_no, "clause before header"))?;
        for tok in line.split_whitespace() {
            let id: i64 = tok.parse().map_err(|_| err(line_no, "bad literal"))?;
            if id == 0 {
                if current.is_empty() {
                    return Err(err(line_no, "empty clause"));
                }
                let f = formula.get_or_insert_with(|| Formula::new(n, current.len()));
                f.push(&current).map_err(|e| err(line_no, &e.to_string()))?;
                current.clear();
                seen += 1;
            } else {
                let lit = Literal::from_dimacs(id).ok_or_else(|| err(line_no, "bad literal"))?;
                if lit.var() >= n {
                    return Err(err(line_no, "variable exceeds header count"));
                }
                current.push(lit);
            }
        }
    }
    let (n, m) = header.ok_or_else(|| err(last_line.max(1), "missing header"))?;
    if !current.is_empty() {
        return Err(err(last_line, "last clause not terminated by 0"));
    }
    if seen != m {
        return Err(err(
            last_line,
            &format!("header declares {m} clauses, found {seen}"),
        ));
    }
    Ok(formula.unwrap_or_else(|| Formula::new(n, 0)))
}

pub fn read_dimacs(path: impl AsRef<Path>) -> Result<Formula> {
    parse_dimacs(&std::fs::read_to_string(path)?)
}
