//! Concrete evaluation of typed expressions.
//!
//! All arithmetic wraps modulo 2^width. Division is total: `a / 0` is the
//! all-ones pattern of the result width and `a % 0` is `a`, for both
//! signed and unsigned operands. Signed division truncates toward zero
//! (C semantics); the lone overflow case `MIN / -1` wraps back to `MIN`.

use super::{BinaryOp, BitVec, ExtendKind, Signedness, TypedExpr, TypedExprKind, UnaryOp};
use indexmap::IndexMap;
use thiserror::Error;

/// Concrete variable assignment, in insertion order for stable reporting.
pub type Bindings = IndexMap<String, BitVec>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no binding for variable '{0}'")]
    MissingVar(String),
    #[error("binding for '{name}' has width {got}, expected {want}")]
    WidthMismatch { name: String, got: u32, want: u32 },
}

pub fn eval_expr(e: &TypedExpr, bindings: &Bindings) -> Result<BitVec, EvalError> {
    let w = e.ty.width;
    match &e.kind {
        TypedExprKind::Literal(b) => Ok(*b),
        TypedExprKind::Var(name) => {
            let v = bindings.get(name).ok_or_else(|| EvalError::MissingVar(name.clone()))?;
            if v.width() != w {
                return Err(EvalError::WidthMismatch {
                    name: name.clone(),
                    got: v.width(),
                    want: w,
                });
            }
            Ok(*v)
        }
        TypedExprKind::Unary(op, a) => {
            let va = eval_expr(a, bindings)?;
            Ok(match op {
                UnaryOp::Neg => BitVec::new(w, va.value().wrapping_neg()),
                UnaryOp::BitNot => BitVec::new(w, !va.value()),
                UnaryOp::LogNot => BitVec::from_bool(va.is_zero()),
                UnaryOp::RedOr => BitVec::from_bool(!va.is_zero()),
                UnaryOp::RedAnd => BitVec::from_bool(va.is_all_ones()),
                UnaryOp::RedXor => BitVec::from_bool(va.value().count_ones() % 2 == 1),
            })
        }
        TypedExprKind::Binary(op, a, b) => {
            let va = eval_expr(a, bindings)?;
            let vb = eval_expr(b, bindings)?;
            Ok(eval_binary(*op, w, va, vb, a.ty.sign, b.ty.sign))
        }
        TypedExprKind::Ite(c, t, f) => {
            let vc = eval_expr(c, bindings)?;
            if vc.is_zero() {
                eval_expr(f, bindings)
            } else {
                eval_expr(t, bindings)
            }
        }
        TypedExprKind::Slice(a, hi, lo) => {
            let va = eval_expr(a, bindings)?;
            Ok(BitVec::new(hi - lo + 1, va.value() >> lo))
        }
        TypedExprKind::Concat(parts) => {
            let mut acc: u128 = 0;
            for p in parts {
                let v = eval_expr(p, bindings)?;
                acc = (acc << v.width()) | v.value();
            }
            Ok(BitVec::new(w, acc))
        }
        TypedExprKind::Extend(kind, a) => {
            let va = eval_expr(a, bindings)?;
            Ok(match kind {
                ExtendKind::Zero => BitVec::new(w, va.value()),
                ExtendKind::Sign => BitVec::from_i128(w, va.to_i128()),
            })
        }
        // Sign reinterpretation leaves the bits alone; only the static
        // type of the node differs.
        TypedExprKind::Cast(a) => eval_expr(a, bindings),
    }
}

fn eval_binary(
    op: BinaryOp,
    w: u32,
    a: BitVec,
    b: BitVec,
    sa: Signedness,
    sb: Signedness,
) -> BitVec {
    use BinaryOp::*;
    let signed = sa == Signedness::Signed && sb == Signedness::Signed;
    match op {
        Add => BitVec::new(w, a.value().wrapping_add(b.value())),
        Sub => BitVec::new(w, a.value().wrapping_sub(b.value())),
        Mul => BitVec::new(w, a.value().wrapping_mul(b.value())),
        Div => {
            if b.is_zero() {
                BitVec::ones(w)
            } else if signed {
                BitVec::from_i128(w, a.to_i128().wrapping_div(b.to_i128()))
            } else {
                BitVec::new(w, a.value() / b.value())
            }
        }
        Rem => {
            if b.is_zero() {
                BitVec::new(w, a.value())
            } else if signed {
                BitVec::from_i128(w, a.to_i128().wrapping_rem(b.to_i128()))
            } else {
                BitVec::new(w, a.value() % b.value())
            }
        }
        And => BitVec::new(w, a.value() & b.value()),
        Or => BitVec::new(w, a.value() | b.value()),
        Xor => BitVec::new(w, a.value() ^ b.value()),
        Shl => {
            let amt = b.value();
            if amt >= u128::from(w) {
                BitVec::zero(w)
            } else {
                BitVec::new(w, a.value() << amt)
            }
        }
        Shr => {
            let arith = sa == Signedness::Signed;
            let amt = b.value();
            if amt >= u128::from(w) {
                if arith && a.sign_bit() {
                    BitVec::ones(w)
                } else {
                    BitVec::zero(w)
                }
            } else if arith {
                BitVec::from_i128(w, a.to_i128() >> amt)
            } else {
                BitVec::new(w, a.value() >> amt)
            }
        }
        Eq => BitVec::from_bool(a.value() == b.value()),
        Ne => BitVec::from_bool(a.value() != b.value()),
        Lt | Le | Gt | Ge => {
            let ord = if signed {
                a.to_i128().cmp(&b.to_i128())
            } else {
                a.value().cmp(&b.value())
            };
            BitVec::from_bool(match op {
                Lt => ord.is_lt(),
                Le => ord.is_le(),
                Gt => ord.is_gt(),
                _ => ord.is_ge(),
            })
        }
        LogAnd => BitVec::from_bool(!a.is_zero() && !b.is_zero()),
        LogOr => BitVec::from_bool(!a.is_zero() || !b.is_zero()),
    }
}

/// Enumerates every assignment to `vars` (cartesian product of value
/// ranges) and calls `f` until it returns `false`. Used by the
/// exhaustive oracles; the caller is responsible for keeping the total
/// width small enough to enumerate.
pub(crate) fn for_each_assignment<F>(vars: &[(String, u32)], mut f: F)
where
    F: FnMut(&Bindings) -> bool,
{
    let total: u32 = vars.iter().map(|(_, w)| *w).sum();
    assert!(total <= 40, "exhaustive enumeration over {total} bits refused");
    let mut bindings: Bindings = vars.iter().map(|(n, w)| (n.clone(), BitVec::zero(*w))).collect();
    let count: u128 = 1u128 << total;
    let mut i: u128 = 0;
    while i < count {
        let mut rest = i;
        for (name, w) in vars {
            let v = rest & ((1u128 << w) - 1);
            rest >>= w;
            bindings.insert(name.clone(), BitVec::new(*w, v));
        }
        if !f(&bindings) {
            return;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expr, typecheck_expr, Ty, TypeEnv};
    use super::*;

    fn run(src: &str, vars: &[(&str, u32, u128)]) -> BitVec {
        let env: TypeEnv =
            vars.iter().map(|(n, w, _)| (n.to_string(), Ty::unsigned(*w))).collect();
        let t = typecheck_expr(&parse_expr(src).unwrap(), &env).unwrap();
        let b: Bindings =
            vars.iter().map(|(n, w, v)| (n.to_string(), BitVec::new(*w, *v))).collect();
        eval_expr(&t, &b).unwrap()
    }

    fn run_signed(src: &str, vars: &[(&str, u32, i128)]) -> BitVec {
        let env: TypeEnv = vars.iter().map(|(n, w, _)| (n.to_string(), Ty::signed(*w))).collect();
        let t = typecheck_expr(&parse_expr(src).unwrap(), &env).unwrap();
        let b: Bindings =
            vars.iter().map(|(n, w, v)| (n.to_string(), BitVec::from_i128(*w, *v))).collect();
        eval_expr(&t, &b).unwrap()
    }

    #[test]
    fn wrapping_arithmetic() {
        assert_eq!(run("a + b", &[("a", 8, 200), ("b", 8, 100)]).value(), 44);
        assert_eq!(run("a - b", &[("a", 8, 0), ("b", 8, 1)]).value(), 255);
        assert_eq!(run("a * b", &[("a", 8, 16), ("b", 8, 17)]).value(), 16);
    }

    #[test]
    fn division_by_zero_convention() {
        // quotient all-ones, remainder passes the dividend through
        assert_eq!(run("a / b", &[("a", 8, 57), ("b", 8, 0)]).value(), 255);
        assert_eq!(run("a % b", &[("a", 8, 57), ("b", 8, 0)]).value(), 57);
        assert_eq!(run_signed("a / b", &[("a", 8, -5), ("b", 8, 0)]).value(), 255);
        assert_eq!(run_signed("a % b", &[("a", 8, -5), ("b", 8, 0)]).to_i128(), -5);
    }

    #[test]
    fn signed_division_truncates_toward_zero() {
        assert_eq!(run_signed("a / b", &[("a", 8, -7), ("b", 8, 2)]).to_i128(), -3);
        assert_eq!(run_signed("a % b", &[("a", 8, -7), ("b", 8, 2)]).to_i128(), -1);
        assert_eq!(run_signed("a / b", &[("a", 8, 7), ("b", 8, -2)]).to_i128(), -3);
        assert_eq!(run_signed("a % b", &[("a", 8, 7), ("b", 8, -2)]).to_i128(), 1);
        // MIN / -1 wraps
        assert_eq!(run_signed("a / b", &[("a", 8, -128), ("b", 8, -1)]).to_i128(), -128);
    }

    #[test]
    fn shifts_saturate_at_width() {
        assert_eq!(run("a << b", &[("a", 8, 0xff), ("b", 8, 8)]).value(), 0);
        assert_eq!(run("a >> b", &[("a", 8, 0xff), ("b", 8, 9)]).value(), 0);
        assert_eq!(run_signed("a >> b", &[("a", 8, -2), ("b", 8, 100)]).to_i128(), -1);
        assert_eq!(run_signed("a >> b", &[("a", 8, -8), ("b", 8, 2)]).to_i128(), -2);
    }

    #[test]
    fn comparisons_respect_signedness() {
        assert_eq!(run("a < b", &[("a", 8, 0x80), ("b", 8, 1)]).value(), 0);
        assert_eq!(run_signed("a < b", &[("a", 8, -128), ("b", 8, 1)]).value(), 1);
    }

    #[test]
    fn slices_concat_extend() {
        assert_eq!(run("x[7:4]", &[("x", 8, 0xa5)]).value(), 0xa);
        assert_eq!(run("{x[3:0], x[7:4]}", &[("x", 8, 0xa5)]).value(), 0x5a);
        assert_eq!(run_signed("zext(x, 8)", &[("x", 4, -1)]).value(), 0x0f);
        assert_eq!(run_signed("sext(x, 8)", &[("x", 4, -1)]).value(), 0xff);
    }

    #[test]
    fn reductions() {
        assert_eq!(run("orr(x)", &[("x", 8, 0)]).value(), 0);
        assert_eq!(run("orr(x)", &[("x", 8, 4)]).value(), 1);
        assert_eq!(run("andr(x)", &[("x", 8, 0xff)]).value(), 1);
        assert_eq!(run("andr(x)", &[("x", 8, 0xfe)]).value(), 0);
        assert_eq!(run("xorr(x)", &[("x", 8, 0b1011)]).value(), 1);
        assert_eq!(run("xorr(x)", &[("x", 8, 0b1010)]).value(), 0);
    }

    #[test]
    fn truth_testing_of_wide_values() {
        // 2 && 4 is true in C; the typechecker's orr insertion keeps that
        assert_eq!(run("a && b", &[("a", 8, 2), ("b", 8, 4)]).value(), 1);
        assert_eq!(run("!a", &[("a", 8, 2)]).value(), 0);
        assert_eq!(run("a ? 8'd1 : 8'd2", &[("a", 8, 200)]).value(), 1);
    }

    #[test]
    fn casts_reinterpret_without_touching_bits() {
        // unsigned x: plain shift is logical, a signed() cast makes it
        // arithmetic; the bits going in are identical
        assert_eq!(run("x >> 2", &[("x", 8, 0xf0)]).value(), 0x3c);
        assert_eq!(run("signed(x) >> 2", &[("x", 8, 0xf0)]).value(), 0xfc);
        // an unsigned() cast takes a signed comparison back to unsigned
        assert_eq!(run_signed("a < b", &[("a", 8, -1), ("b", 8, 1)]).value(), 1);
        assert_eq!(run_signed("unsigned(a) < unsigned(b)", &[("a", 8, -1), ("b", 8, 1)]).value(), 0);
        // the cast itself is the identity on the value
        assert_eq!(run("signed(x)", &[("x", 8, 0x80)]).value(), 0x80);
    }

    #[test]
    fn divider_requirement_semantics() {
        // the guarded division requirement evaluates as expected on both
        // sides of the guard
        let vars = [("a_i", 16, 0xffff_u128), ("b_i", 16, 0)];
        assert_eq!(run("b_i == 0", &vars).value(), 1);
        let q = run("b_i == 0 ? 16'hffff : a_i / b_i", &vars);
        assert!(q.is_all_ones());
        let vars = [("a_i", 16, 1000_u128), ("b_i", 16, 3)];
        assert_eq!(run("b_i == 0 ? 16'hffff : a_i / b_i", &vars).value(), 333);
    }
}
