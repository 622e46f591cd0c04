//! Typed bit-vector expression language.
//!
//! This is the shared term language for everything else in the crate:
//! requirement guards and actions, algorithm bodies, register next-state
//! functions and mapping conditions are all expressions over named
//! bit-vector variables.
//!
//! The surface syntax is C-like (see `docs/expression-grammar.md` for the
//! grammar and the exact typing rules). `parse_expr` produces an untyped
//! [`Expr`]; [`typecheck_expr`] resolves widths against a [`TypeEnv`] and
//! yields a [`TypedExpr`] in which every node carries its width and
//! signedness and all implicit widenings have become explicit extend nodes.
//!
//! Semantics are wrap-around (mod 2^width). Division follows the
//! hardware-friendly total convention: for any w-bit `a`, `a / 0` is the
//! all-ones pattern and `a % 0` is `a`.

mod eval;
mod fold;
mod parse;
mod pretty;
mod typecheck;

pub use eval::{eval_expr, Bindings, EvalError};
pub(crate) use eval::for_each_assignment;
pub use fold::fold_expr;
pub use parse::{parse_expr, ParseError};
pub use pretty::pretty_expr;
pub use typecheck::{typecheck_expr, TypeEnv, TypeError};

use std::fmt;

/// Interpretation of a bit pattern when an operation is order- or
/// sign-dependent. `Signed` means two's complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signedness {
    Unsigned,
    Signed,
}

impl fmt::Display for Signedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signedness::Unsigned => write!(f, "unsigned"),
            Signedness::Signed => write!(f, "signed"),
        }
    }
}

/// Width plus signedness; the full static type of an expression node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ty {
    pub width: u32,
    pub sign: Signedness,
}

impl Ty {
    pub const fn unsigned(width: u32) -> Self {
        Ty { width, sign: Signedness::Unsigned }
    }

    pub const fn signed(width: u32) -> Self {
        Ty { width, sign: Signedness::Signed }
    }

    pub fn is_signed(&self) -> bool {
        self.sign == Signedness::Signed
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.sign, self.width)
    }
}

/// Largest supported bit-vector width. Wide enough for every bundled
/// design (the widest intermediate is a 2W product plus accumulator
/// headroom) while keeping values in a single `u128`.
pub const MAX_WIDTH: u32 = 128;

fn width_mask(width: u32) -> u128 {
    debug_assert!((1..=MAX_WIDTH).contains(&width));
    if width == MAX_WIDTH {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

/// A sized bit-vector value. The invariant `value < 2^width` always holds;
/// constructors mask excess high bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVec {
    width: u32,
    value: u128,
}

impl BitVec {
    /// Builds a value of the given width, truncating high bits.
    ///
    /// Panics if `width` is outside `1..=MAX_WIDTH`; widths are checked at
    /// parse/typecheck time, so violating this is a programming error.
    pub fn new(width: u32, value: u128) -> Self {
        assert!(
            (1..=MAX_WIDTH).contains(&width),
            "bit-vector width {width} outside 1..={MAX_WIDTH}"
        );
        BitVec { width, value: value & width_mask(width) }
    }

    pub fn zero(width: u32) -> Self {
        BitVec::new(width, 0)
    }

    pub fn ones(width: u32) -> Self {
        BitVec::new(width, u128::MAX)
    }

    pub fn from_bool(b: bool) -> Self {
        BitVec::new(1, b as u128)
    }

    /// Wraps a signed quantity into `width` bits (two's complement).
    pub fn from_i128(width: u32, value: i128) -> Self {
        BitVec::new(width, value as u128)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn mask(&self) -> u128 {
        width_mask(self.width)
    }

    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i < self.width);
        (self.value >> i) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_all_ones(&self) -> bool {
        self.value == self.mask()
    }

    pub fn sign_bit(&self) -> bool {
        self.bit(self.width - 1)
    }

    /// Two's complement reading of the pattern.
    pub fn to_i128(&self) -> i128 {
        if self.width < MAX_WIDTH && self.sign_bit() {
            (self.value | !self.mask()) as i128
        } else {
            self.value as i128
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'d{}", self.width, self.value)
    }
}

impl fmt::Display for BitVec {
    /// Hex form used everywhere values are reported (counterexample
    /// bindings, traces).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:x}", self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    /// Arithmetic negation (two's complement).
    Neg,
    /// Bitwise complement.
    BitNot,
    /// Logical not; one-bit result.
    LogNot,
    /// Reduction OR over all bits.
    RedOr,
    /// Reduction AND over all bits.
    RedAnd,
    /// Reduction XOR (parity) over all bits.
    RedXor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogAnd,
    LogOr,
}

impl BinaryOp {
    pub fn is_arith(&self) -> bool {
        use BinaryOp::*;
        matches!(self, Add | Sub | Mul | Div | Rem)
    }

    pub fn is_bitwise(&self) -> bool {
        use BinaryOp::*;
        matches!(self, And | Or | Xor)
    }

    pub fn is_shift(&self) -> bool {
        matches!(self, BinaryOp::Shl | BinaryOp::Shr)
    }

    pub fn is_compare(&self) -> bool {
        use BinaryOp::*;
        matches!(self, Eq | Ne | Lt | Le | Gt | Ge)
    }

    pub fn is_logical(&self) -> bool {
        matches!(self, BinaryOp::LogAnd | BinaryOp::LogOr)
    }

    /// Token used by both the parser and the pretty-printer.
    pub fn symbol(&self) -> &'static str {
        use BinaryOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
            And => "&",
            Or => "|",
            Xor => "^",
            Shl => "<<",
            Shr => ">>",
            Eq => "==",
            Ne => "!=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            LogAnd => "&&",
            LogOr => "||",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtendKind {
    Zero,
    Sign,
}

/// Untyped expression as produced by the parser or built programmatically.
///
/// Literals may be unsized (bare `42`); they adopt a width during
/// typechecking from the surrounding context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Literal { value: u128, width: Option<u32> },
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `cond ? then : other`
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `operand[hi:lo]`, bit `lo` becomes bit 0 of the result.
    Slice(Box<Expr>, u32, u32),
    /// `{a, b, ...}` with the first part most significant.
    Concat(Vec<Expr>),
    /// `zext(operand, width)` / `sext(operand, width)`.
    Extend(ExtendKind, Box<Expr>, u32),
    /// `signed(operand)` / `unsigned(operand)`: same bits, same width,
    /// reinterpreted signedness.
    Cast(Signedness, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn lit(value: u128) -> Expr {
        Expr::Literal { value, width: None }
    }

    pub fn sized_lit(width: u32, value: u128) -> Expr {
        Expr::Literal { value, width: Some(width) }
    }
}

/// Splits a top-level `&&` chain into its conjuncts, left to right.
/// Anything that is not a logical-and is a single conjunct.
pub fn conjuncts(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Binary(BinaryOp::LogAnd, a, b) => {
            let mut v = conjuncts(a);
            v.extend(conjuncts(b));
            v
        }
        _ => vec![e],
    }
}

/// Expression after typechecking: every node knows its width and
/// signedness, and implicit widenings are explicit [`TypedExprKind::Extend`]
/// nodes, so evaluation and bit-blasting never have to reason about
/// context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedExpr {
    pub ty: Ty,
    pub kind: TypedExprKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypedExprKind {
    Literal(BitVec),
    Var(String),
    Unary(UnaryOp, Box<TypedExpr>),
    Binary(BinaryOp, Box<TypedExpr>, Box<TypedExpr>),
    Ite(Box<TypedExpr>, Box<TypedExpr>, Box<TypedExpr>),
    Slice(Box<TypedExpr>, u32, u32),
    Concat(Vec<TypedExpr>),
    Extend(ExtendKind, Box<TypedExpr>),
    /// Signedness reinterpretation; the target sign is this node's `ty.sign`.
    Cast(Box<TypedExpr>),
}

impl TypedExpr {
    pub fn width(&self) -> u32 {
        self.ty.width
    }

    /// Strips type information back to the untyped surface form, e.g. for
    /// printing. Widenings inserted by the typechecker show up as explicit
    /// `zext`/`sext` calls.
    pub fn to_expr(&self) -> Expr {
        match &self.kind {
            TypedExprKind::Literal(b) => {
                Expr::Literal { value: b.value(), width: Some(b.width()) }
            }
            TypedExprKind::Var(name) => Expr::Var(name.clone()),
            TypedExprKind::Unary(op, a) => Expr::Unary(*op, Box::new(a.to_expr())),
            TypedExprKind::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.to_expr()), Box::new(b.to_expr()))
            }
            TypedExprKind::Ite(c, t, e) => Expr::Ite(
                Box::new(c.to_expr()),
                Box::new(t.to_expr()),
                Box::new(e.to_expr()),
            ),
            TypedExprKind::Slice(a, hi, lo) => Expr::Slice(Box::new(a.to_expr()), *hi, *lo),
            TypedExprKind::Concat(parts) => {
                Expr::Concat(parts.iter().map(|p| p.to_expr()).collect())
            }
            TypedExprKind::Extend(kind, a) => {
                Expr::Extend(*kind, Box::new(a.to_expr()), self.ty.width)
            }
            TypedExprKind::Cast(a) => Expr::Cast(self.ty.sign, Box::new(a.to_expr())),
        }
    }

    /// Collects free variable names in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        fn walk(e: &TypedExpr, seen: &mut Vec<String>) {
            match &e.kind {
                TypedExprKind::Literal(_) => {}
                TypedExprKind::Var(name) => {
                    if !seen.iter().any(|n| n == name) {
                        seen.push(name.clone());
                    }
                }
                TypedExprKind::Unary(_, a) | TypedExprKind::Slice(a, _, _) => walk(a, seen),
                TypedExprKind::Extend(_, a) | TypedExprKind::Cast(a) => walk(a, seen),
                TypedExprKind::Binary(_, a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                TypedExprKind::Ite(c, t, e2) => {
                    walk(c, seen);
                    walk(t, seen);
                    walk(e2, seen);
                }
                TypedExprKind::Concat(parts) => {
                    for p in parts {
                        walk(p, seen);
                    }
                }
            }
        }
        let mut seen = Vec::new();
        walk(self, &mut seen);
        seen
    }
}
