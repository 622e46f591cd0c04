//! DIMACS CNF import and export.
//!
//! Export writes the standard `p cnf` header preceded by comment lines
//! that record the named bit groups, so a dump stays debuggable.
//! Import accepts the common dialect: comment lines, a single problem
//! line, whitespace-separated literals terminated by `0` (clauses may
//! span lines).

use std::fmt::Write as _;

use thiserror::Error;

use super::{Lit, SatProblem};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: missing `p cnf` header before clauses")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed problem line `{text}`")]
    BadHeader { line: usize, text: String },
    #[error("line {line}: `{token}` is not a literal")]
    BadLiteral { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds declared variable count {vars}")]
    LiteralOutOfRange { line: usize, lit: i64, vars: u32 },
    #[error("unterminated clause at end of input")]
    UnterminatedClause,
    #[error("declared {declared} clauses but found {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
}

pub fn to_dimacs(problem: &SatProblem) -> String {
    let mut out = String::new();
    for (name, bits) in problem.names() {
        let mut line = format!("c group {name} =");
        for b in bits {
            write!(line, " {}", b.to_dimacs()).unwrap();
        }
        out.push_str(&line);
        out.push('\n');
    }
    writeln!(out, "p cnf {} {}", problem.num_vars(), problem.num_clauses()).unwrap();
    for clause in problem.clauses() {
        let mut line = String::new();
        for l in clause {
            write!(line, "{} ", l.to_dimacs()).unwrap();
        }
        line.push('0');
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn from_dimacs(text: &str) -> Result<SatProblem, DimacsError> {
    let mut problem = SatProblem::new();
    let mut declared: Option<(u32, usize)> = None;
    let mut clause: Vec<Lit> = Vec::new();
    let mut found = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", vars, clauses] => {
                    vars.parse::<u32>().ok().zip(clauses.parse::<usize>().ok())
                }
                _ => None,
            };
            match parsed {
                Some((vars, clauses)) => {
                    declared = Some((vars, clauses));
                    for _ in 0..vars {
                        problem.fresh_lit();
                    }
                }
                None => {
                    return Err(DimacsError::BadHeader { line: line_no, text: line.to_string() })
                }
            }
            continue;
        }
        let (vars, _) = declared.ok_or(DimacsError::MissingHeader { line: line_no })?;
        for token in line.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| DimacsError::BadLiteral { line: line_no, token: token.to_string() })?;
            if value == 0 {
                problem.add_clause(&clause);
                clause.clear();
                found += 1;
                continue;
            }
            let var = value.unsigned_abs() - 1;
            if var >= vars as u64 {
                return Err(DimacsError::LiteralOutOfRange { line: line_no, lit: value, vars });
            }
            clause.push(Lit::new(var as u32, value > 0));
        }
    }

    if !clause.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    if let Some((_, clauses)) = declared {
        if clauses != found {
            return Err(DimacsError::ClauseCountMismatch { declared: clauses, found });
        }
    }
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_clauses() {
        let mut p = SatProblem::new();
        let a = p.fresh_lit();
        let b = p.fresh_lit();
        let c = p.fresh_lit();
        p.add_clause(&[a, !b]);
        p.add_clause(&[b, c]);
        p.add_clause(&[!a, !c]);
        p.name_bits("x", vec![a, b]);
        let text = to_dimacs(&p);
        let back = from_dimacs(&text).unwrap();
        assert_eq!(back.num_vars(), p.num_vars());
        assert_eq!(back.clauses(), p.clauses());
    }

    #[test]
    fn accepts_multi_line_clauses_and_comments() {
        let text = "c a comment\np cnf 3 2\n1 -2\n0\n2 3 0\n";
        let p = from_dimacs(text).unwrap();
        assert_eq!(p.num_vars(), 3);
        assert_eq!(p.num_clauses(), 2);
    }

    #[test]
    fn rejects_literal_out_of_range() {
        let err = from_dimacs("p cnf 2 1\n3 0\n").unwrap_err();
        assert_eq!(err, DimacsError::LiteralOutOfRange { line: 2, lit: 3, vars: 2 });
    }

    #[test]
    fn rejects_clauses_before_header() {
        let err = from_dimacs("1 2 0\n").unwrap_err();
        assert_eq!(err, DimacsError::MissingHeader { line: 1 });
    }

    #[test]
    fn rejects_count_mismatch() {
        let err = from_dimacs("p cnf 2 2\n1 0\n").unwrap_err();
        assert_eq!(err, DimacsError::ClauseCountMismatch { declared: 2, found: 1 });
    }
}
