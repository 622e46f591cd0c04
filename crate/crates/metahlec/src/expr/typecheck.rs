//! Width and signedness resolution.
//!
//! The rules are the C-style ones restricted to bit-vectors:
//!
//! * operands of arithmetic, bitwise and comparison operators are brought
//!   to the wider operand's width, each extended according to its own
//!   signedness (zero for unsigned, sign for signed);
//! * arithmetic and bitwise results keep the common operand width
//!   (wrap-around), comparisons and logical operators produce width 1;
//! * shifts keep the left operand's type; the amount is typed on its own;
//! * a result is signed only if both operands are signed;
//! * unsized literals adopt the width of their context (the sibling
//!   operand, or an enclosing node that has a determined width).
//!
//! Operands of `&&`, `||`, `!` and conditional tests wider than one bit
//! are reduced with an implicit `orr(...)`, i.e. compared against zero,
//! exactly as C truth-tests them.

use super::{
    BitVec, Expr, ExtendKind, Signedness, Ty, TypedExpr, TypedExprKind, UnaryOp, MAX_WIDTH,
};
use indexmap::IndexMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown variable '{0}'")]
    UnknownVar(String),
    #[error("unsized literal {0} has no context width; give it one like 8'd{0}")]
    UnsizedLiteral(u128),
    #[error("literal value {value} does not fit in {width} bits")]
    LiteralOverflow { value: u128, width: u32 },
    #[error("width {0} outside 1..={MAX_WIDTH}")]
    WidthRange(u32),
    #[error("slice [{hi}:{lo}] out of range for width {width}")]
    SliceBounds { hi: u32, lo: u32, width: u32 },
    #[error("extension to {to} bits narrows operand of {from} bits")]
    ExtendNarrows { from: u32, to: u32 },
    #[error("concatenation wider than {MAX_WIDTH} bits")]
    ConcatTooWide,
}

/// Variable typing context. Keeps declaration order so listings and
/// enumerations are stable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv {
    vars: IndexMap<String, Ty>,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, ty: Ty) {
        self.vars.insert(name.into(), ty);
    }

    pub fn get(&self, name: &str) -> Option<Ty> {
        self.vars.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Ty)> {
        self.vars.iter().map(|(n, t)| (n.as_str(), *t))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, Ty)> for TypeEnv {
    fn from_iter<I: IntoIterator<Item = (S, Ty)>>(iter: I) -> Self {
        let mut env = TypeEnv::new();
        for (n, t) in iter {
            env.insert(n, t);
        }
        env
    }
}

/// Resolves widths and signedness, inserting explicit extends for all
/// implicit widenings.
pub fn typecheck_expr(e: &Expr, env: &TypeEnv) -> Result<TypedExpr, TypeError> {
    check(e, env, None)
}

/// Width of a subtree if it can be determined without any context, used
/// to give unsized literals a width from their sibling.
fn natural_width(e: &Expr, env: &TypeEnv) -> Option<u32> {
    match e {
        Expr::Literal { width, .. } => *width,
        Expr::Var(name) => env.get(name).map(|t| t.width),
        Expr::Unary(op, a) => match op {
            UnaryOp::Neg | UnaryOp::BitNot => natural_width(a, env),
            UnaryOp::LogNot | UnaryOp::RedOr | UnaryOp::RedAnd | UnaryOp::RedXor => Some(1),
        },
        Expr::Binary(op, a, b) => {
            if op.is_compare() || op.is_logical() {
                Some(1)
            } else if op.is_shift() {
                natural_width(a, env)
            } else {
                match (natural_width(a, env), natural_width(b, env)) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (w, None) | (None, w) => w,
                }
            }
        }
        Expr::Ite(_, t, f) => match (natural_width(t, env), natural_width(f, env)) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (w, None) | (None, w) => w,
        },
        Expr::Slice(_, hi, lo) => Some(hi - lo + 1),
        Expr::Concat(parts) => parts
            .iter()
            .map(|p| natural_width(p, env))
            .try_fold(0u32, |acc, w| w.map(|w| acc + w)),
        Expr::Extend(_, _, w) => Some(*w),
        Expr::Cast(_, a) => natural_width(a, env),
    }
}

fn literal(value: u128, width: u32) -> Result<TypedExpr, TypeError> {
    if !(1..=MAX_WIDTH).contains(&width) {
        return Err(TypeError::WidthRange(width));
    }
    if width < MAX_WIDTH && value >> width != 0 {
        return Err(TypeError::LiteralOverflow { value, width });
    }
    Ok(TypedExpr {
        ty: Ty::unsigned(width),
        kind: TypedExprKind::Literal(BitVec::new(width, value)),
    })
}

/// Minimum width that can hold `value`, at least 1.
fn bits_needed(value: u128) -> u32 {
    (128 - value.leading_zeros()).max(1)
}

/// Extends `e` to `width` per its own signedness. No-op if already there.
fn widen(e: TypedExpr, width: u32) -> TypedExpr {
    debug_assert!(e.ty.width <= width);
    if e.ty.width == width {
        return e;
    }
    let kind = match e.ty.sign {
        Signedness::Unsigned => ExtendKind::Zero,
        Signedness::Signed => ExtendKind::Sign,
    };
    let sign = match kind {
        ExtendKind::Zero => Signedness::Unsigned,
        ExtendKind::Sign => Signedness::Signed,
    };
    TypedExpr { ty: Ty { width, sign }, kind: TypedExprKind::Extend(kind, Box::new(e)) }
}

/// Reduces anything wider than one bit to a zero-test, the implicit
/// truth-value conversion of logical contexts.
fn truthy(e: TypedExpr) -> TypedExpr {
    if e.ty.width == 1 {
        return e;
    }
    TypedExpr { ty: Ty::unsigned(1), kind: TypedExprKind::Unary(UnaryOp::RedOr, Box::new(e)) }
}

fn common_sign(a: &TypedExpr, b: &TypedExpr) -> Signedness {
    if a.ty.is_signed() && b.ty.is_signed() {
        Signedness::Signed
    } else {
        Signedness::Unsigned
    }
}

fn check(e: &Expr, env: &TypeEnv, ctx: Option<u32>) -> Result<TypedExpr, TypeError> {
    match e {
        Expr::Literal { value, width: Some(w) } => literal(*value, *w),
        Expr::Literal { value, width: None } => {
            let w = ctx.ok_or(TypeError::UnsizedLiteral(*value))?;
            literal(*value, w)
        }
        Expr::Var(name) => {
            let ty = env.get(name).ok_or_else(|| TypeError::UnknownVar(name.clone()))?;
            Ok(TypedExpr { ty, kind: TypedExprKind::Var(name.clone()) })
        }
        Expr::Unary(op @ (UnaryOp::Neg | UnaryOp::BitNot), a) => {
            let ta = check(a, env, ctx)?;
            Ok(TypedExpr { ty: ta.ty, kind: TypedExprKind::Unary(*op, Box::new(ta)) })
        }
        Expr::Unary(UnaryOp::LogNot, a) => {
            let ta = truthy(check(a, env, Some(1))?);
            Ok(TypedExpr {
                ty: Ty::unsigned(1),
                kind: TypedExprKind::Unary(UnaryOp::LogNot, Box::new(ta)),
            })
        }
        Expr::Unary(op, a) => {
            // Reductions accept any operand width and yield one bit.
            let ta = check(a, env, None)?;
            Ok(TypedExpr { ty: Ty::unsigned(1), kind: TypedExprKind::Unary(*op, Box::new(ta)) })
        }
        Expr::Binary(op, a, b) if op.is_logical() => {
            let ta = truthy(check(a, env, Some(1))?);
            let tb = truthy(check(b, env, Some(1))?);
            Ok(TypedExpr {
                ty: Ty::unsigned(1),
                kind: TypedExprKind::Binary(*op, Box::new(ta), Box::new(tb)),
            })
        }
        Expr::Binary(op, a, b) if op.is_shift() => {
            let ta = check(a, env, ctx)?;
            // A bare literal amount sizes itself; nothing else gives it
            // context and tying it to the value operand would be wrong.
            let tb = match &**b {
                Expr::Literal { value, width: None } => check(b, env, Some(bits_needed(*value)))?,
                _ => check(b, env, None)?,
            };
            Ok(TypedExpr { ty: ta.ty, kind: TypedExprKind::Binary(*op, Box::new(ta), Box::new(tb)) })
        }
        Expr::Binary(op, a, b) => {
            // Arithmetic, bitwise and comparison forms share the widening
            // rule; they differ only in the result type.
            let target = match (natural_width(a, env), natural_width(b, env)) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (Some(x), None) => Some(x),
                (None, Some(y)) => Some(y),
                (None, None) => ctx,
            };
            let ta = check(a, env, target)?;
            let tb = check(b, env, target)?;
            let w = ta.ty.width.max(tb.ty.width);
            let sign = common_sign(&ta, &tb);
            let ta = widen(ta, w);
            let tb = widen(tb, w);
            let ty = if op.is_compare() { Ty::unsigned(1) } else { Ty { width: w, sign } };
            Ok(TypedExpr { ty, kind: TypedExprKind::Binary(*op, Box::new(ta), Box::new(tb)) })
        }
        Expr::Ite(c, t, f) => {
            let tc = truthy(check(c, env, Some(1))?);
            let target = match (natural_width(t, env), natural_width(f, env)) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (Some(x), None) => Some(x),
                (None, Some(y)) => Some(y),
                (None, None) => ctx,
            };
            let tt = check(t, env, target)?;
            let tf = check(f, env, target)?;
            let w = tt.ty.width.max(tf.ty.width);
            let sign = common_sign(&tt, &tf);
            let tt = widen(tt, w);
            let tf = widen(tf, w);
            Ok(TypedExpr {
                ty: Ty { width: w, sign },
                kind: TypedExprKind::Ite(Box::new(tc), Box::new(tt), Box::new(tf)),
            })
        }
        Expr::Slice(a, hi, lo) => {
            let ta = check(a, env, None)?;
            if lo > hi || *hi >= ta.ty.width {
                return Err(TypeError::SliceBounds { hi: *hi, lo: *lo, width: ta.ty.width });
            }
            Ok(TypedExpr {
                ty: Ty::unsigned(hi - lo + 1),
                kind: TypedExprKind::Slice(Box::new(ta), *hi, *lo),
            })
        }
        Expr::Concat(parts) => {
            let typed: Vec<TypedExpr> =
                parts.iter().map(|p| check(p, env, None)).collect::<Result<_, _>>()?;
            if typed.is_empty() {
                return Err(TypeError::WidthRange(0));
            }
            let width = typed.iter().try_fold(0u32, |acc, t| {
                let w = acc + t.ty.width;
                if w > MAX_WIDTH {
                    Err(TypeError::ConcatTooWide)
                } else {
                    Ok(w)
                }
            })?;
            Ok(TypedExpr { ty: Ty::unsigned(width), kind: TypedExprKind::Concat(typed) })
        }
        Expr::Extend(kind, a, w) => {
            if !(1..=MAX_WIDTH).contains(w) {
                return Err(TypeError::WidthRange(*w));
            }
            let ta = check(a, env, None)?;
            if ta.ty.width > *w {
                return Err(TypeError::ExtendNarrows { from: ta.ty.width, to: *w });
            }
            if ta.ty.width == *w {
                return Ok(ta);
            }
            let sign = match kind {
                ExtendKind::Zero => Signedness::Unsigned,
                ExtendKind::Sign => Signedness::Signed,
            };
            Ok(TypedExpr {
                ty: Ty { width: *w, sign },
                kind: TypedExprKind::Extend(*kind, Box::new(ta)),
            })
        }
        Expr::Cast(sign, a) => {
            let ta = check(a, env, ctx)?;
            if ta.ty.sign == *sign {
                return Ok(ta);
            }
            Ok(TypedExpr {
                ty: Ty { width: ta.ty.width, sign: *sign },
                kind: TypedExprKind::Cast(Box::new(ta)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expr, BinaryOp};
    use super::*;

    fn env(vars: &[(&str, u32)]) -> TypeEnv {
        vars.iter().map(|(n, w)| (n.to_string(), Ty::unsigned(*w))).collect()
    }

    fn tc(src: &str, env: &TypeEnv) -> TypedExpr {
        typecheck_expr(&parse_expr(src).unwrap(), env).unwrap()
    }

    #[test]
    fn mixed_width_add_widens_narrow_side() {
        let env = env(&[("a", 4), ("b", 8)]);
        let t = tc("a + b", &env);
        assert_eq!(t.ty, Ty::unsigned(8));
        let TypedExprKind::Binary(BinaryOp::Add, lhs, _) = &t.kind else {
            panic!("expected add")
        };
        assert!(matches!(lhs.kind, TypedExprKind::Extend(ExtendKind::Zero, _)));
        assert_eq!(lhs.ty.width, 8);
    }

    #[test]
    fn signed_operand_gets_sign_extended() {
        let mut e = TypeEnv::new();
        e.insert("s", Ty::signed(4));
        e.insert("t", Ty::signed(8));
        let t = tc("s + t", &e);
        assert_eq!(t.ty, Ty::signed(8));
        let TypedExprKind::Binary(_, lhs, _) = &t.kind else { panic!() };
        assert!(matches!(lhs.kind, TypedExprKind::Extend(ExtendKind::Sign, _)));
    }

    #[test]
    fn unsized_literal_adopts_sibling_width() {
        let env = env(&[("b_i", 16)]);
        let t = tc("b_i == 0", &env);
        let TypedExprKind::Binary(BinaryOp::Eq, _, rhs) = &t.kind else { panic!() };
        assert_eq!(rhs.ty.width, 16);
        assert_eq!(t.ty, Ty::unsigned(1));
    }

    #[test]
    fn unsized_literal_adopts_outer_context() {
        let env = env(&[("x", 8)]);
        // both literal operands take their width from x through the outer add
        let t = tc("x + (1 + 2)", &env);
        assert_eq!(t.ty.width, 8);
    }

    #[test]
    fn unsized_literal_without_context_fails() {
        let err = typecheck_expr(&parse_expr("1 + 2").unwrap(), &TypeEnv::new()).unwrap_err();
        assert!(matches!(err, TypeError::UnsizedLiteral(_)));
    }

    #[test]
    fn comparison_and_logical_are_one_bit() {
        let env = env(&[("a", 8), ("b", 8)]);
        assert_eq!(tc("a < b", &env).ty, Ty::unsigned(1));
        let t = tc("a && b", &env);
        assert_eq!(t.ty, Ty::unsigned(1));
        // operands were truth-tested, not truncated
        let TypedExprKind::Binary(BinaryOp::LogAnd, lhs, _) = &t.kind else { panic!() };
        assert!(matches!(lhs.kind, TypedExprKind::Unary(UnaryOp::RedOr, _)));
    }

    #[test]
    fn shift_keeps_left_type_and_sizes_bare_amount() {
        let env = env(&[("a", 8)]);
        let t = tc("a << 2", &env);
        assert_eq!(t.ty, Ty::unsigned(8));
        let TypedExprKind::Binary(BinaryOp::Shl, _, amt) = &t.kind else { panic!() };
        assert_eq!(amt.ty.width, 2);
    }

    #[test]
    fn slice_out_of_range() {
        let env = env(&[("x", 8)]);
        let err = typecheck_expr(&parse_expr("x[8:1]").unwrap(), &env).unwrap_err();
        assert_eq!(err, TypeError::SliceBounds { hi: 8, lo: 1, width: 8 });
    }

    #[test]
    fn extend_cannot_narrow() {
        let env = env(&[("x", 8)]);
        let err = typecheck_expr(&parse_expr("zext(x, 4)").unwrap(), &env).unwrap_err();
        assert_eq!(err, TypeError::ExtendNarrows { from: 8, to: 4 });
    }

    #[test]
    fn unknown_variable() {
        let err = typecheck_expr(&parse_expr("nope").unwrap(), &TypeEnv::new()).unwrap_err();
        assert_eq!(err, TypeError::UnknownVar("nope".into()));
    }

    #[test]
    fn sized_literal_overflow_programmatic() {
        // the parser already rejects this form; the check still guards
        // trees built in code
        let e = Expr::sized_lit(4, 16);
        let err = typecheck_expr(&e, &TypeEnv::new()).unwrap_err();
        assert_eq!(err, TypeError::LiteralOverflow { value: 16, width: 4 });
    }

    #[test]
    fn ite_branches_unify() {
        let env = env(&[("c", 1), ("a", 4), ("b", 8)]);
        let t = tc("c ? a : b", &env);
        assert_eq!(t.ty, Ty::unsigned(8));
    }

    #[test]
    fn cast_flips_sign_and_keeps_width() {
        let env = env(&[("x", 8)]);
        let t = tc("signed(x)", &env);
        assert_eq!(t.ty, Ty::signed(8));
        assert!(matches!(t.kind, TypedExprKind::Cast(_)));
        // a redundant cast disappears
        let t = tc("unsigned(x)", &env);
        assert_eq!(t.ty, Ty::unsigned(8));
        assert!(matches!(t.kind, TypedExprKind::Var(_)));
    }

    #[test]
    fn cast_changes_comparison_semantics_type() {
        let env = env(&[("x", 8), ("y", 8)]);
        // Both operands signed makes the comparison signed; the result
        // stays one bit either way. The tree shape is what we pin here,
        // the value behaviour is covered by the evaluator tests.
        let t = tc("signed(x) < signed(y)", &env);
        assert_eq!(t.ty, Ty::unsigned(1));
        let TypedExprKind::Binary(BinaryOp::Lt, lhs, rhs) = &t.kind else { panic!() };
        assert!(lhs.ty.is_signed());
        assert!(rhs.ty.is_signed());
    }

    #[test]
    fn figure_divider_action_types() {
        let env = env(&[("a_i", 16), ("b_i", 16), ("quotient_o", 16), ("divide_by_0_o", 1)]);
        let t = tc("(divide_by_0_o == 0) && (quotient_o == a_i / b_i)", &env);
        assert_eq!(t.ty, Ty::unsigned(1));
    }
}
