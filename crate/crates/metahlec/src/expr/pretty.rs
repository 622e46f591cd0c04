//! Canonical text form of expressions.
//!
//! Prints the same grammar `parse_expr` reads, with the minimal
//! parenthesization that preserves structure: `parse(pretty(e)) == e`
//! for every expression, which the property tests enforce.

use super::parse::precedence;
use super::{Expr, ExtendKind, Signedness, UnaryOp};
use std::fmt::Write;

/// Precedence rank of a whole expression node, aligned with the parser's
/// binary operator table. Larger binds tighter.
fn node_prec(e: &Expr) -> u8 {
    match e {
        Expr::Ite(..) => 0,
        Expr::Binary(op, ..) => precedence(*op),
        Expr::Unary(..) => 11,
        Expr::Slice(..) => 12,
        Expr::Literal { .. } | Expr::Var(_) | Expr::Concat(_) | Expr::Extend(..)
        | Expr::Cast(..) => 13,
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Literal { value, width: Some(w) } => {
            let _ = write!(out, "{w}'d{value}");
        }
        Expr::Literal { value, width: None } => {
            let _ = write!(out, "{value}");
        }
        Expr::Var(name) => out.push_str(name),
        Expr::Unary(op, a) => {
            let sym = match op {
                UnaryOp::Neg => "-",
                UnaryOp::BitNot => "~",
                UnaryOp::LogNot => "!",
                UnaryOp::RedOr => "orr",
                UnaryOp::RedAnd => "andr",
                UnaryOp::RedXor => "xorr",
            };
            if matches!(op, UnaryOp::RedOr | UnaryOp::RedAnd | UnaryOp::RedXor) {
                out.push_str(sym);
                out.push('(');
                write_expr(out, a);
                out.push(')');
            } else {
                out.push_str(sym);
                // parenthesize weaker-binding operands, and nested unary
                // chains for readability ("-(-x)" rather than "--x")
                write_child(out, a, matches!(**a, Expr::Unary(..)) || node_prec(a) < 11);
            }
        }
        Expr::Binary(op, a, b) => {
            let p = precedence(*op);
            // left-associative: the right child needs parens at equal
            // precedence, the left does not
            write_child(out, a, node_prec(a) < p);
            let _ = write!(out, " {} ", op.symbol());
            write_child(out, b, node_prec(b) <= p);
        }
        Expr::Ite(c, t, f) => {
            write_child(out, c, node_prec(c) == 0);
            out.push_str(" ? ");
            write_expr(out, t);
            out.push_str(" : ");
            write_expr(out, f);
        }
        Expr::Slice(a, hi, lo) => {
            write_child(out, a, node_prec(a) < 12);
            if hi == lo {
                let _ = write!(out, "[{hi}]");
            } else {
                let _ = write!(out, "[{hi}:{lo}]");
            }
        }
        Expr::Concat(parts) => {
            out.push('{');
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, p);
            }
            out.push('}');
        }
        Expr::Extend(kind, a, w) => {
            let name = match kind {
                ExtendKind::Zero => "zext",
                ExtendKind::Sign => "sext",
            };
            let _ = write!(out, "{name}(");
            write_expr(out, a);
            let _ = write!(out, ", {w})");
        }
        Expr::Cast(sign, a) => {
            let name = match sign {
                Signedness::Unsigned => "unsigned",
                Signedness::Signed => "signed",
            };
            let _ = write!(out, "{name}(");
            write_expr(out, a);
            out.push(')');
        }
    }
}

fn write_child(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}
