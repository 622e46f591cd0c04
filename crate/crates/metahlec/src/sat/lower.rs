//! Bit-blasting typed expressions to CNF.
//!
//! Words are little-endian vectors of [`Bit`]s. Every gate constructor
//! constant-folds first and then consults a structural-hashing cache,
//! so equal subcircuits collapse to the same literal no matter where
//! they appear. Division is encoded relationally (fresh quotient and
//! remainder constrained by `q*b + r == a` at double width) and cached
//! per operand pattern, which lets an algorithm-side `a / b` and a
//! requirement-side `a / b` share one set of constraints.
//!
//! The encodings mirror [`eval_expr`](crate::expr::eval_expr) bit for
//! bit, including the total-division convention and shift saturation;
//! the oracle tests enumerate both sides to hold that line.

use std::collections::HashMap;
use std::ops::Not;

use indexmap::IndexMap;

use super::{Lit, Model, SatProblem};
use crate::expr::{BinaryOp, BitVec, ExtendKind, TypedExpr, TypedExprKind, UnaryOp};

/// One boolean signal: a constant or a CNF literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bit {
    Const(bool),
    Lit(Lit),
}

impl Bit {
    pub const T: Bit = Bit::Const(true);
    pub const F: Bit = Bit::Const(false);

    pub fn from_bool(b: bool) -> Bit {
        Bit::Const(b)
    }
}

impl Not for Bit {
    type Output = Bit;

    fn not(self) -> Bit {
        match self {
            Bit::Const(b) => Bit::Const(!b),
            Bit::Lit(l) => Bit::Lit(!l),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum GateKey {
    And(Lit, Lit),
    Xor(Lit, Lit),
    Mux(Lit, Lit, Lit),
    Maj(Lit, Lit, Lit),
}

/// Lowering context: the CNF being built, the gate cache, the division
/// cache and the named variable environment.
#[derive(Default)]
pub struct Lowering {
    problem: SatProblem,
    gates: HashMap<GateKey, Lit>,
    divs: HashMap<(Vec<Bit>, Vec<Bit>), (Vec<Bit>, Vec<Bit>)>,
    vars: IndexMap<String, Vec<Bit>>,
}

impl Lowering {
    pub fn new() -> Self {
        Lowering::default()
    }

    pub fn problem(&self) -> &SatProblem {
        &self.problem
    }

    pub fn into_problem(self) -> SatProblem {
        self.problem
    }

    /// Allocates fresh literals for a named variable. The name is
    /// recorded in the problem so models can be read back.
    pub fn declare_var(&mut self, name: &str, width: u32) -> Vec<Bit> {
        assert!(
            !self.vars.contains_key(name),
            "variable `{name}` declared twice during lowering"
        );
        let bits: Vec<Bit> = (0..width).map(|_| Bit::Lit(self.problem.fresh_lit())).collect();
        let lits: Vec<Lit> = bits
            .iter()
            .map(|b| match b {
                Bit::Lit(l) => *l,
                Bit::Const(_) => unreachable!(),
            })
            .collect();
        self.problem.name_bits(name, lits);
        self.vars.insert(name.to_string(), bits.clone());
        bits
    }

    /// Binds a name to existing bits (used when a signal is computed
    /// rather than free, e.g. a register value after one step).
    pub fn bind_var(&mut self, name: &str, bits: Vec<Bit>) {
        assert!(
            !self.vars.contains_key(name),
            "variable `{name}` bound twice during lowering"
        );
        self.vars.insert(name.to_string(), bits);
    }

    /// Binds a name to new bits, replacing any existing binding. Cycle
    /// unrollers give the same port name a new meaning at every step.
    pub fn rebind_var(&mut self, name: &str, bits: Vec<Bit>) {
        self.vars.insert(name.to_string(), bits);
    }

    pub fn var_bits(&self, name: &str) -> Option<&Vec<Bit>> {
        self.vars.get(name)
    }

    /// Reads a word back out of a model.
    pub fn value_of(bits: &[Bit], model: &Model) -> BitVec {
        let mut v: u128 = 0;
        for (i, b) in bits.iter().enumerate() {
            let set = match b {
                Bit::Const(c) => *c,
                Bit::Lit(l) => model.value(*l),
            };
            if set {
                v |= 1 << i;
            }
        }
        BitVec::new(bits.len() as u32, v)
    }

    /// Constant word.
    pub fn const_bits(value: BitVec) -> Vec<Bit> {
        (0..value.width()).map(|i| Bit::Const(value.bit(i))).collect()
    }

    /// Requires `b` to hold in every model.
    pub fn assert_bit(&mut self, b: Bit) {
        match b {
            Bit::Const(true) => {}
            Bit::Const(false) => self.problem.add_clause(&[]),
            Bit::Lit(l) => self.problem.add_clause(&[l]),
        }
    }

    /// Requires at least one of `bits` to hold (a clause over signals).
    pub fn assert_any(&mut self, bits: &[Bit]) {
        let mut clause = Vec::with_capacity(bits.len());
        for b in bits {
            match b {
                Bit::Const(true) => return,
                Bit::Const(false) => {}
                Bit::Lit(l) => clause.push(*l),
            }
        }
        self.problem.add_clause(&clause);
    }

    fn define_gate(&mut self, key: GateKey, clauses: impl FnOnce(Lit) -> Vec<Vec<Lit>>) -> Lit {
        if let Some(&g) = self.gates.get(&key) {
            return g;
        }
        let g = self.problem.fresh_lit();
        for c in clauses(g) {
            self.problem.add_clause(&c);
        }
        self.gates.insert(key, g);
        g
    }

    pub fn and(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(false), _) | (_, Bit::Const(false)) => Bit::F,
            (Bit::Const(true), x) | (x, Bit::Const(true)) => x,
            (Bit::Lit(x), Bit::Lit(y)) => {
                if x == y {
                    return Bit::Lit(x);
                }
                if x == !y {
                    return Bit::F;
                }
                let (x, y) = if x <= y { (x, y) } else { (y, x) };
                let g = self.define_gate(GateKey::And(x, y), |g| {
                    vec![vec![!g, x], vec![!g, y], vec![g, !x, !y]]
                });
                Bit::Lit(g)
            }
        }
    }

    pub fn or(&mut self, a: Bit, b: Bit) -> Bit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Bit, b: Bit) -> Bit {
        match (a, b) {
            (Bit::Const(x), Bit::Const(y)) => Bit::Const(x ^ y),
            (Bit::Const(c), Bit::Lit(l)) | (Bit::Lit(l), Bit::Const(c)) => {
                if c {
                    Bit::Lit(!l)
                } else {
                    Bit::Lit(l)
                }
            }
            (Bit::Lit(x), Bit::Lit(y)) => {
                if x == y {
                    return Bit::F;
                }
                if x == !y {
                    return Bit::T;
                }
                let negate = !x.is_positive() ^ !y.is_positive();
                let px = Lit::positive(x.var());
                let py = Lit::positive(y.var());
                let (px, py) = if px <= py { (px, py) } else { (py, px) };
                let g = self.define_gate(GateKey::Xor(px, py), |g| {
                    vec![
                        vec![!g, px, py],
                        vec![!g, !px, !py],
                        vec![g, !px, py],
                        vec![g, px, !py],
                    ]
                });
                if negate {
                    Bit::Lit(!g)
                } else {
                    Bit::Lit(g)
                }
            }
        }
    }

    pub fn xor3(&mut self, a: Bit, b: Bit, c: Bit) -> Bit {
        let ab = self.xor(a, b);
        self.xor(ab, c)
    }

    /// `c ? t : e`.
    pub fn mux(&mut self, c: Bit, t: Bit, e: Bit) -> Bit {
        let (c, t, e) = match c {
            Bit::Const(true) => return t,
            Bit::Const(false) => return e,
            Bit::Lit(cl) if cl.is_positive() => (cl, t, e),
            Bit::Lit(cl) => (!cl, e, t),
        };
        if t == e {
            return t;
        }
        let cb = Bit::Lit(c);
        match (t, e) {
            (Bit::Const(true), Bit::Const(false)) => cb,
            (Bit::Const(false), Bit::Const(true)) => !cb,
            (Bit::Const(true), e) => self.or(cb, e),
            (Bit::Const(false), e) => self.and(!cb, e),
            (t, Bit::Const(true)) => self.or(!cb, t),
            (t, Bit::Const(false)) => self.and(cb, t),
            (Bit::Lit(tl), Bit::Lit(el)) => {
                if el == !tl {
                    let x = self.xor(cb, t);
                    return !x;
                }
                if tl == c {
                    return self.or(t, e);
                }
                if tl == !c {
                    return self.and(!cb, e);
                }
                if el == c {
                    return self.and(cb, t);
                }
                if el == !c {
                    return self.or(!cb, t);
                }
                let g = self.define_gate(GateKey::Mux(c, tl, el), |g| {
                    vec![
                        vec![!c, !tl, g],
                        vec![!c, tl, !g],
                        vec![c, !el, g],
                        vec![c, el, !g],
                        vec![!tl, !el, g],
                        vec![tl, el, !g],
                    ]
                });
                Bit::Lit(g)
            }
        }
    }

    /// Majority of three: the full-adder carry.
    pub fn maj(&mut self, a: Bit, b: Bit, c: Bit) -> Bit {
        let mut consts = Vec::new();
        let mut lits = Vec::new();
        for x in [a, b, c] {
            match x {
                Bit::Const(v) => consts.push(v),
                Bit::Lit(l) => lits.push(l),
            }
        }
        match consts.len() {
            3 => return Bit::Const(consts.iter().filter(|&&v| v).count() >= 2),
            2 => {
                return if consts[0] == consts[1] {
                    Bit::Const(consts[0])
                } else {
                    Bit::Lit(lits[0])
                };
            }
            1 => {
                let (x, y) = (Bit::Lit(lits[0]), Bit::Lit(lits[1]));
                return if consts[0] { self.or(x, y) } else { self.and(x, y) };
            }
            _ => {}
        }
        let (x, y, z) = (lits[0], lits[1], lits[2]);
        if x == y || x == z {
            return Bit::Lit(x);
        }
        if y == z {
            return Bit::Lit(y);
        }
        if x == !y {
            return Bit::Lit(z);
        }
        if x == !z {
            return Bit::Lit(y);
        }
        if y == !z {
            return Bit::Lit(x);
        }
        let mut s = [x, y, z];
        s.sort();
        let [x, y, z] = s;
        let g = self.define_gate(GateKey::Maj(x, y, z), |g| {
            vec![
                vec![!x, !y, g],
                vec![!x, !z, g],
                vec![!y, !z, g],
                vec![x, y, !g],
                vec![x, z, !g],
                vec![y, z, !g],
            ]
        });
        Bit::Lit(g)
    }

    fn add_carry(&mut self, a: &[Bit], b: &[Bit], mut carry: Bit) -> Vec<Bit> {
        debug_assert_eq!(a.len(), b.len());
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let s = self.xor3(a[i], b[i], carry);
            carry = self.maj(a[i], b[i], carry);
            out.push(s);
        }
        out
    }

    pub fn add(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        self.add_carry(a, b, Bit::F)
    }

    pub fn sub(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let nb: Vec<Bit> = b.iter().map(|&x| !x).collect();
        self.add_carry(a, &nb, Bit::T)
    }

    pub fn neg(&mut self, a: &[Bit]) -> Vec<Bit> {
        let zero = vec![Bit::F; a.len()];
        self.sub(&zero, a)
    }

    pub fn mul(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        debug_assert_eq!(a.len(), b.len());
        let w = a.len();
        let mut acc = vec![Bit::F; w];
        for i in 0..w {
            if a[i] == Bit::F {
                continue;
            }
            let mut row = vec![Bit::F; w];
            for j in i..w {
                row[j] = self.and(a[i], b[j - i]);
            }
            acc = self.add(&acc, &row);
        }
        acc
    }

    pub fn eq(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = Bit::T;
        for i in 0..a.len() {
            let d = self.xor(a[i], b[i]);
            acc = self.and(acc, !d);
        }
        acc
    }

    /// Unsigned `a < b`: the borrow out of `a - b`.
    pub fn ult(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        debug_assert_eq!(a.len(), b.len());
        let mut borrow = Bit::F;
        for i in 0..a.len() {
            borrow = self.maj(!a[i], b[i], borrow);
        }
        borrow
    }

    pub fn ule(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        !self.ult(b, a)
    }

    /// Signed `a < b` via the sign-bit bias trick.
    pub fn slt(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let mut fa = a.to_vec();
        let mut fb = b.to_vec();
        if let Some(m) = fa.last_mut() {
            *m = !*m;
        }
        if let Some(m) = fb.last_mut() {
            *m = !*m;
        }
        self.ult(&fa, &fb)
    }

    pub fn sle(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        !self.slt(b, a)
    }

    pub fn ite(&mut self, c: Bit, t: &[Bit], e: &[Bit]) -> Vec<Bit> {
        debug_assert_eq!(t.len(), e.len());
        (0..t.len()).map(|i| self.mux(c, t[i], e[i])).collect()
    }

    pub fn or_reduce(&mut self, a: &[Bit]) -> Bit {
        let mut acc = Bit::F;
        for &x in a {
            acc = self.or(acc, x);
        }
        acc
    }

    pub fn and_reduce(&mut self, a: &[Bit]) -> Bit {
        let mut acc = Bit::T;
        for &x in a {
            acc = self.and(acc, x);
        }
        acc
    }

    pub fn xor_reduce(&mut self, a: &[Bit]) -> Bit {
        let mut acc = Bit::F;
        for &x in a {
            acc = self.xor(acc, x);
        }
        acc
    }

    /// Barrel shifter stage amounts come from the bits of `amt`, which
    /// is always read as unsigned. Shifting by the width or more gives
    /// the fill bit everywhere.
    fn barrel(&mut self, a: &[Bit], amt: &[Bit], left: bool, fill: Bit) -> Vec<Bit> {
        let w = a.len();
        let mut cur = a.to_vec();
        for (k, &s) in amt.iter().enumerate() {
            let step = 1usize.checked_shl(k as u32).filter(|&v| v < w);
            let shifted: Vec<Bit> = match step {
                None => vec![fill; w],
                Some(step) => (0..w)
                    .map(|i| {
                        if left {
                            if i >= step {
                                cur[i - step]
                            } else {
                                fill
                            }
                        } else if i + step < w {
                            cur[i + step]
                        } else {
                            fill
                        }
                    })
                    .collect(),
            };
            cur = self.ite(s, &shifted, &cur);
        }
        cur
    }

    pub fn shl(&mut self, a: &[Bit], amt: &[Bit]) -> Vec<Bit> {
        self.barrel(a, amt, true, Bit::F)
    }

    pub fn lshr(&mut self, a: &[Bit], amt: &[Bit]) -> Vec<Bit> {
        self.barrel(a, amt, false, Bit::F)
    }

    pub fn ashr(&mut self, a: &[Bit], amt: &[Bit]) -> Vec<Bit> {
        let fill = *a.last().expect("ashr of empty word");
        self.barrel(a, amt, false, fill)
    }

    /// Unsigned division with remainder, total per the evaluator's
    /// convention (`a / 0` all ones, `a % 0 == a`). Quotient and
    /// remainder are fresh words constrained by `q*b + r == a` at
    /// double width plus a `r < b` side condition; the pair is cached
    /// on the operand bit patterns so repeated `a / b` and `a % b`
    /// share one encoding.
    pub fn udiv_urem(&mut self, a: &[Bit], b: &[Bit]) -> (Vec<Bit>, Vec<Bit>) {
        debug_assert_eq!(a.len(), b.len());
        let key = (a.to_vec(), b.to_vec());
        if let Some(cached) = self.divs.get(&key) {
            return cached.clone();
        }
        let w = a.len();
        let q: Vec<Bit> = (0..w).map(|_| Bit::Lit(self.problem.fresh_lit())).collect();
        let r: Vec<Bit> = (0..w).map(|_| Bit::Lit(self.problem.fresh_lit())).collect();

        let widen = |x: &[Bit]| {
            let mut v = x.to_vec();
            v.resize(2 * w, Bit::F);
            v
        };
        let (a2, b2, q2, r2) = (widen(a), widen(b), widen(&q), widen(&r));
        let prod = self.mul(&q2, &b2);
        let sum = self.add(&prod, &r2);
        let exact = self.eq(&sum, &a2);
        self.assert_bit(exact);

        let bnz = self.or_reduce(b);
        let rem_small = self.ult(&r, b);
        self.assert_any(&[!bnz, rem_small]);
        let ones = vec![Bit::T; w];
        let q_ones = self.eq(&q, &ones);
        let r_id = self.eq(&r, a);
        self.assert_any(&[bnz, q_ones]);
        self.assert_any(&[bnz, r_id]);

        self.divs.insert(key, (q.clone(), r.clone()));
        (q, r)
    }

    /// Signed division truncating toward zero, remainder taking the
    /// dividend's sign. Built on the unsigned core over magnitudes, so
    /// the cache still shares work between `/` and `%`.
    pub fn sdiv_srem(&mut self, a: &[Bit], b: &[Bit]) -> (Vec<Bit>, Vec<Bit>) {
        let sa = *a.last().expect("sdiv of empty word");
        let sb = *b.last().expect("sdiv of empty word");
        let na = self.neg(a);
        let abs_a = self.ite(sa, &na, a);
        let nb = self.neg(b);
        let abs_b = self.ite(sb, &nb, b);
        let (uq, ur) = self.udiv_urem(&abs_a, &abs_b);
        let qneg = self.xor(sa, sb);
        let nq = self.neg(&uq);
        let q_signed = self.ite(qneg, &nq, &uq);
        let nr = self.neg(&ur);
        let r_signed = self.ite(sa, &nr, &ur);
        let bnz = self.or_reduce(b);
        let ones = vec![Bit::T; a.len()];
        let q = self.ite(bnz, &q_signed, &ones);
        let r = self.ite(bnz, &r_signed, a);
        (q, r)
    }

    /// Lowers a typed expression to its little-endian bits. Every free
    /// variable must have been declared or bound beforehand; hitting an
    /// unknown name is an internal error.
    pub fn lower(&mut self, e: &TypedExpr) -> Vec<Bit> {
        let w = e.ty.width;
        let bits = match &e.kind {
            TypedExprKind::Literal(b) => Self::const_bits(*b),
            TypedExprKind::Var(name) => self
                .vars
                .get(name)
                .unwrap_or_else(|| panic!("variable `{name}` not declared before lowering"))
                .clone(),
            TypedExprKind::Unary(op, a) => {
                let x = self.lower(a);
                match op {
                    UnaryOp::Neg => self.neg(&x),
                    UnaryOp::BitNot => x.into_iter().map(|b| !b).collect(),
                    UnaryOp::LogNot => {
                        let any = self.or_reduce(&x);
                        vec![!any]
                    }
                    UnaryOp::RedOr => vec![self.or_reduce(&x)],
                    UnaryOp::RedAnd => vec![self.and_reduce(&x)],
                    UnaryOp::RedXor => vec![self.xor_reduce(&x)],
                }
            }
            TypedExprKind::Binary(op, a, b) => {
                let signed = a.ty.is_signed() && b.ty.is_signed();
                let xa = self.lower(a);
                let xb = self.lower(b);
                match op {
                    BinaryOp::Add => self.add(&xa, &xb),
                    BinaryOp::Sub => self.sub(&xa, &xb),
                    BinaryOp::Mul => self.mul(&xa, &xb),
                    BinaryOp::Div => {
                        let (q, _) = if signed {
                            self.sdiv_srem(&xa, &xb)
                        } else {
                            self.udiv_urem(&xa, &xb)
                        };
                        q
                    }
                    BinaryOp::Rem => {
                        let (_, r) = if signed {
                            self.sdiv_srem(&xa, &xb)
                        } else {
                            self.udiv_urem(&xa, &xb)
                        };
                        r
                    }
                    BinaryOp::And => {
                        (0..xa.len()).map(|i| self.and(xa[i], xb[i])).collect()
                    }
                    BinaryOp::Or => (0..xa.len()).map(|i| self.or(xa[i], xb[i])).collect(),
                    BinaryOp::Xor => {
                        (0..xa.len()).map(|i| self.xor(xa[i], xb[i])).collect()
                    }
                    BinaryOp::Shl => self.shl(&xa, &xb),
                    BinaryOp::Shr => {
                        if a.ty.is_signed() {
                            self.ashr(&xa, &xb)
                        } else {
                            self.lshr(&xa, &xb)
                        }
                    }
                    BinaryOp::Eq => vec![self.eq(&xa, &xb)],
                    BinaryOp::Ne => {
                        let e = self.eq(&xa, &xb);
                        vec![!e]
                    }
                    BinaryOp::Lt => {
                        vec![if signed { self.slt(&xa, &xb) } else { self.ult(&xa, &xb) }]
                    }
                    BinaryOp::Le => {
                        vec![if signed { self.sle(&xa, &xb) } else { self.ule(&xa, &xb) }]
                    }
                    BinaryOp::Gt => {
                        vec![if signed { self.slt(&xb, &xa) } else { self.ult(&xb, &xa) }]
                    }
                    BinaryOp::Ge => {
                        vec![if signed { self.sle(&xb, &xa) } else { self.ule(&xb, &xa) }]
                    }
                    BinaryOp::LogAnd => {
                        let la = self.or_reduce(&xa);
                        let lb = self.or_reduce(&xb);
                        vec![self.and(la, lb)]
                    }
                    BinaryOp::LogOr => {
                        let la = self.or_reduce(&xa);
                        let lb = self.or_reduce(&xb);
                        vec![self.or(la, lb)]
                    }
                }
            }
            TypedExprKind::Ite(c, t, f) => {
                let xc = self.lower(c);
                let cond = self.or_reduce(&xc);
                let xt = self.lower(t);
                let xf = self.lower(f);
                self.ite(cond, &xt, &xf)
            }
            TypedExprKind::Slice(a, hi, lo) => {
                let x = self.lower(a);
                x[*lo as usize..=*hi as usize].to_vec()
            }
            TypedExprKind::Concat(parts) => {
                let mut bits = Vec::with_capacity(w as usize);
                for p in parts.iter().rev() {
                    bits.extend(self.lower(p));
                }
                bits
            }
            TypedExprKind::Extend(kind, a) => {
                let x = self.lower(a);
                let fill = match kind {
                    ExtendKind::Zero => Bit::F,
                    ExtendKind::Sign => *x.last().expect("sext of empty word"),
                };
                let mut bits = x;
                bits.resize(w as usize, fill);
                bits
            }
            // Sign reinterpretation: the bits are unchanged, signedness
            // was already consumed by the typechecker when it picked the
            // operators above this node.
            TypedExprKind::Cast(a) => self.lower(a),
        };
        debug_assert_eq!(bits.len(), w as usize, "lowering width mismatch");
        bits
    }
}

/// Lowers `e` in a fresh context that declares each free variable at
/// its environment width. Returns the context and the result bits.
pub fn lower_expr(e: &TypedExpr, widths: &[(String, u32)]) -> (Lowering, Vec<Bit>) {
    let mut ctx = Lowering::new();
    for (name, w) in widths {
        ctx.declare_var(name, *w);
    }
    let bits = ctx.lower(e);
    (ctx, bits)
}
