//! Constant folding over typed expressions.
//!
//! Folding is purely semantic: `eval(fold(e)) == eval(e)` for every
//! binding, which the property tests pin down. All-literal subtrees
//! collapse to their value; on top of that a few algebraic identities
//! fire when they preserve the node's exact type (width and signedness),
//! since replacing a node with a differently-typed child would change
//! widening behaviour further up.

use super::{BinaryOp, BitVec, TypedExpr, TypedExprKind, UnaryOp};

pub fn fold_expr(e: &TypedExpr) -> TypedExpr {
    let ty = e.ty;
    let kind = match &e.kind {
        TypedExprKind::Literal(_) | TypedExprKind::Var(_) => e.kind.clone(),
        TypedExprKind::Unary(op, a) => TypedExprKind::Unary(*op, Box::new(fold_expr(a))),
        TypedExprKind::Binary(op, a, b) => {
            TypedExprKind::Binary(*op, Box::new(fold_expr(a)), Box::new(fold_expr(b)))
        }
        TypedExprKind::Ite(c, t, f) => TypedExprKind::Ite(
            Box::new(fold_expr(c)),
            Box::new(fold_expr(t)),
            Box::new(fold_expr(f)),
        ),
        TypedExprKind::Slice(a, hi, lo) => TypedExprKind::Slice(Box::new(fold_expr(a)), *hi, *lo),
        TypedExprKind::Concat(parts) => {
            TypedExprKind::Concat(parts.iter().map(fold_expr).collect())
        }
        TypedExprKind::Extend(k, a) => TypedExprKind::Extend(*k, Box::new(fold_expr(a))),
        TypedExprKind::Cast(a) => TypedExprKind::Cast(Box::new(fold_expr(a))),
    };
    let folded = TypedExpr { ty, kind };

    // Entirely constant nodes evaluate away. Evaluation of a var-free
    // tree cannot fail.
    if all_children_literal(&folded.kind) {
        let v = super::eval_expr(&folded, &super::Bindings::new())
            .expect("literal subtree evaluates");
        return TypedExpr { ty, kind: TypedExprKind::Literal(v) };
    }

    if let Some(simpler) = identity(&folded) {
        return simpler;
    }
    folded
}

fn all_children_literal(kind: &TypedExprKind) -> bool {
    let lit = |e: &TypedExpr| matches!(e.kind, TypedExprKind::Literal(_));
    match kind {
        TypedExprKind::Literal(_) => true,
        TypedExprKind::Var(_) => false,
        TypedExprKind::Unary(_, a)
        | TypedExprKind::Slice(a, _, _)
        | TypedExprKind::Extend(_, a)
        | TypedExprKind::Cast(a) => lit(a),
        TypedExprKind::Binary(_, a, b) => lit(a) && lit(b),
        TypedExprKind::Ite(c, t, f) => lit(c) && lit(t) && lit(f),
        TypedExprKind::Concat(parts) => parts.iter().all(lit),
    }
}

fn as_literal(e: &TypedExpr) -> Option<BitVec> {
    match e.kind {
        TypedExprKind::Literal(b) => Some(b),
        _ => None,
    }
}

fn literal_node(e: &TypedExpr, value: BitVec) -> TypedExpr {
    TypedExpr { ty: e.ty, kind: TypedExprKind::Literal(value) }
}

/// Algebraic rewrites. Each arm either produces a literal of the node's
/// own type or returns a child whose type equals the node's type.
fn identity(e: &TypedExpr) -> Option<TypedExpr> {
    use BinaryOp::*;
    let w = e.ty.width;
    match &e.kind {
        TypedExprKind::Binary(op, a, b) => {
            let la = as_literal(a);
            let lb = as_literal(b);
            let type_of = |c: &TypedExpr| c.ty == e.ty;
            match op {
                And => {
                    if lb.is_some_and(|v| v.is_zero()) || la.is_some_and(|v| v.is_zero()) {
                        return Some(literal_node(e, BitVec::zero(w)));
                    }
                    if lb.is_some_and(|v| v.is_all_ones()) && type_of(a) {
                        return Some((**a).clone());
                    }
                    if la.is_some_and(|v| v.is_all_ones()) && type_of(b) {
                        return Some((**b).clone());
                    }
                }
                Or => {
                    if lb.is_some_and(|v| v.is_all_ones()) || la.is_some_and(|v| v.is_all_ones()) {
                        return Some(literal_node(e, BitVec::ones(w)));
                    }
                    if lb.is_some_and(|v| v.is_zero()) && type_of(a) {
                        return Some((**a).clone());
                    }
                    if la.is_some_and(|v| v.is_zero()) && type_of(b) {
                        return Some((**b).clone());
                    }
                }
                Xor | Add => {
                    if lb.is_some_and(|v| v.is_zero()) && type_of(a) {
                        return Some((**a).clone());
                    }
                    if la.is_some_and(|v| v.is_zero()) && type_of(b) {
                        return Some((**b).clone());
                    }
                }
                Sub => {
                    if lb.is_some_and(|v| v.is_zero()) && type_of(a) {
                        return Some((**a).clone());
                    }
                }
                Mul => {
                    if lb.is_some_and(|v| v.is_zero()) || la.is_some_and(|v| v.is_zero()) {
                        return Some(literal_node(e, BitVec::zero(w)));
                    }
                    if lb.is_some_and(|v| v.value() == 1) && type_of(a) {
                        return Some((**a).clone());
                    }
                    if la.is_some_and(|v| v.value() == 1) && type_of(b) {
                        return Some((**b).clone());
                    }
                }
                Shl | Shr => {
                    if lb.is_some_and(|v| v.is_zero()) && type_of(a) {
                        return Some((**a).clone());
                    }
                }
                LogAnd => {
                    if la.is_some_and(|v| v.is_zero()) || lb.is_some_and(|v| v.is_zero()) {
                        return Some(literal_node(e, BitVec::from_bool(false)));
                    }
                    if la.is_some_and(|v| !v.is_zero()) && type_of(b) {
                        return Some((**b).clone());
                    }
                    if lb.is_some_and(|v| !v.is_zero()) && type_of(a) {
                        return Some((**a).clone());
                    }
                }
                LogOr => {
                    if la.is_some_and(|v| !v.is_zero()) || lb.is_some_and(|v| !v.is_zero()) {
                        return Some(literal_node(e, BitVec::from_bool(true)));
                    }
                    if la.is_some_and(|v| v.is_zero()) && type_of(b) {
                        return Some((**b).clone());
                    }
                    if lb.is_some_and(|v| v.is_zero()) && type_of(a) {
                        return Some((**a).clone());
                    }
                }
                _ => {}
            }
            None
        }
        TypedExprKind::Unary(UnaryOp::LogNot, a) => {
            // double negation of a one-bit value
            if let TypedExprKind::Unary(UnaryOp::LogNot, inner) = &a.kind {
                if inner.ty == e.ty {
                    return Some((**inner).clone());
                }
            }
            None
        }
        TypedExprKind::Ite(c, t, f) => {
            if let Some(vc) = as_literal(c) {
                let taken = if vc.is_zero() { f } else { t };
                if taken.ty == e.ty {
                    return Some((**taken).clone());
                }
            }
            if t == f && t.ty == e.ty {
                return Some((**t).clone());
            }
            None
        }
        _ => None,
    }
}
