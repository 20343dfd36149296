//! Invertibility conditions and unconditional inverses.
//!
//! For a literal `l[x]` of shape `(x op s) rel t`, `(s op x) rel t`, or a
//! unary shape over `x`, the catalog returns a quantifier-free condition over
//! `s` and `t` that holds exactly when some value of `x` satisfies `l[x]`.
//! Families over shift amounts `i = 0..=w` are expanded into explicit
//! disjunctions when the condition is built.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bv::{BitVec, BvBinOp, BvUnOp, Relation, Width};
use crate::term::{Kind, TermId, TermManager, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IcOp {
    Mul,
    Urem,
    Udiv,
    And,
    Or,
    Lshr,
    Ashr,
    Shl,
    Concat,
    /// The base case `x rel t`.
    Var,
    Not,
    Neg,
    Add,
    Extract,
}

impl IcOp {
    pub const ALL: [IcOp; 14] = [
        IcOp::Mul,
        IcOp::Urem,
        IcOp::Udiv,
        IcOp::And,
        IcOp::Or,
        IcOp::Lshr,
        IcOp::Ashr,
        IcOp::Shl,
        IcOp::Concat,
        IcOp::Var,
        IcOp::Not,
        IcOp::Neg,
        IcOp::Add,
        IcOp::Extract,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IcOp::Mul => "mul",
            IcOp::Urem => "urem",
            IcOp::Udiv => "udiv",
            IcOp::And => "and",
            IcOp::Or => "or",
            IcOp::Lshr => "lshr",
            IcOp::Ashr => "ashr",
            IcOp::Shl => "shl",
            IcOp::Concat => "concat",
            IcOp::Var => "var",
            IcOp::Not => "not",
            IcOp::Neg => "neg",
            IcOp::Add => "add",
            IcOp::Extract => "extract",
        }
    }

    /// Sides present in the catalog. Commutative operators only have `Left`.
    pub fn sides(self) -> &'static [Side] {
        match self {
            IcOp::Mul | IcOp::And | IcOp::Or | IcOp::Add => &[Side::Left],
            IcOp::Urem | IcOp::Udiv | IcOp::Lshr | IcOp::Ashr | IcOp::Shl | IcOp::Concat => &[Side::Left, Side::Right],
            IcOp::Var | IcOp::Not | IcOp::Neg | IcOp::Extract => &[Side::Unary],
        }
    }

    pub fn bin_op(self) -> Option<BvBinOp> {
        Some(match self {
            IcOp::Mul => BvBinOp::Mul,
            IcOp::Urem => BvBinOp::Urem,
            IcOp::Udiv => BvBinOp::Udiv,
            IcOp::And => BvBinOp::And,
            IcOp::Or => BvBinOp::Or,
            IcOp::Lshr => BvBinOp::Lshr,
            IcOp::Ashr => BvBinOp::Ashr,
            IcOp::Shl => BvBinOp::Shl,
            IcOp::Add => BvBinOp::Add,
            _ => return None,
        })
    }

    pub fn from_bin_op(op: BvBinOp) -> IcOp {
        match op {
            BvBinOp::Mul => IcOp::Mul,
            BvBinOp::Urem => IcOp::Urem,
            BvBinOp::Udiv => IcOp::Udiv,
            BvBinOp::And => IcOp::And,
            BvBinOp::Or => IcOp::Or,
            BvBinOp::Lshr => IcOp::Lshr,
            BvBinOp::Ashr => IcOp::Ashr,
            BvBinOp::Shl => IcOp::Shl,
            BvBinOp::Add => IcOp::Add,
        }
    }
}

/// Position of `x`: `Left` is `x op s`, `Right` is `s op x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Unary,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Unary => "unary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IcKey {
    pub op: IcOp,
    pub side: Side,
    pub rel: Relation,
}

impl IcKey {
    pub fn new(op: IcOp, side: Side, rel: Relation) -> Self {
        IcKey { op, side, rel }
    }
}

impl fmt::Display for IcKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.op.name(), self.side.name(), self.rel.mnemonic())
    }
}

impl FromStr for IcKey {
    type Err = CatalogError;

    /// Parses `OP:SIDE:REL`, e.g. `udiv:right:ne`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CatalogError::BadKey(s.to_string());
        let mut parts = s.split(':');
        let (op, side, rel) = (parts.next(), parts.next(), parts.next());
        if parts.next().is_some() {
            return Err(bad());
        }
        let op = IcOp::ALL.into_iter().find(|o| Some(o.name()) == op).ok_or_else(bad)?;
        let side =
            [Side::Left, Side::Right, Side::Unary].into_iter().find(|d| Some(d.name()) == side).ok_or_else(bad)?;
        let rel = rel.and_then(Relation::from_mnemonic).ok_or_else(bad)?;
        let key = IcKey { op, side, rel };
        if !op.sides().contains(&side) {
            return Err(CatalogError::Unsupported(key));
        }
        Ok(key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("no catalog row for {0}")]
    Unsupported(IcKey),
    #[error("literal does not have a catalog shape over the solved variable")]
    Shape,
    #[error("bad catalog key `{0}` (expected OP:SIDE:REL)")]
    BadKey(String),
    #[error("inconsistent widths for {0}")]
    Widths(IcKey),
}

/// Shape of a literal `lhs rel rhs` relative to a variable `x`, with `x`
/// moved to the left-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiteralShape {
    pub key: IcKey,
    pub s: Option<TermId>,
    pub t: TermId,
}

/// Classifies `lhs rel rhs` as a catalog shape over `x`. The occurrence of
/// `x` must be a direct child of the top operator.
pub fn classify(
    tm: &TermManager,
    x: VarId,
    lhs: TermId,
    rel: Relation,
    rhs: TermId,
) -> Result<LiteralShape, CatalogError> {
    let (d, rel, t) = if tm.has_free_var(lhs, x) { (lhs, rel, rhs) } else { (rhs, rel.flip(), lhs) };
    if tm.has_free_var(t, x) {
        return Err(CatalogError::Shape);
    }
    let is_x = |c: TermId| tm.as_var(c) == Some(x);
    let shape = |op, side, s| LiteralShape { key: IcKey { op, side, rel }, s, t };
    Ok(match tm.kind(d) {
        Kind::Var(v) if *v == x => shape(IcOp::Var, Side::Unary, None),
        Kind::BvUn(op, a) if is_x(*a) => {
            let op = if *op == BvUnOp::Not { IcOp::Not } else { IcOp::Neg };
            shape(op, Side::Unary, None)
        }
        Kind::Extract { arg, .. } if is_x(*arg) => shape(IcOp::Extract, Side::Unary, None),
        Kind::BvBin(op, a, b) => {
            let op_ = IcOp::from_bin_op(*op);
            if is_x(*a) && !tm.has_free_var(*b, x) {
                shape(op_, Side::Left, Some(*b))
            } else if is_x(*b) && !tm.has_free_var(*a, x) {
                let side = if op.is_commutative() { Side::Left } else { Side::Right };
                shape(op_, side, Some(*a))
            } else {
                return Err(CatalogError::Shape);
            }
        }
        Kind::Concat(a, b) => {
            if is_x(*a) && !tm.has_free_var(*b, x) {
                shape(IcOp::Concat, Side::Left, Some(*b))
            } else if is_x(*b) && !tm.has_free_var(*a, x) {
                shape(IcOp::Concat, Side::Right, Some(*a))
            } else {
                return Err(CatalogError::Shape);
            }
        }
        _ => return Err(CatalogError::Shape),
    })
}

/// The condition table, optionally without its width-1 case splits (used to
/// demonstrate that the splits are needed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Catalog {
    pub width_special_cases: bool,
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog { width_special_cases: true }
    }
}

/// Every key in the catalog.
pub fn catalog_entries() -> Vec<IcKey> {
    let mut out = Vec::new();
    for op in IcOp::ALL {
        for &side in op.sides() {
            for rel in Relation::ALL {
                out.push(IcKey { op, side, rel });
            }
        }
    }
    out
}

/// Condition builder over a fixed width.
struct Cb<'a> {
    tm: &'a mut TermManager,
    w: Width,
}

impl<'a> Cb<'a> {
    fn c(&mut self, v: u64) -> TermId {
        self.tm.bv_u64(self.w, v)
    }
    fn zero(&mut self) -> TermId {
        self.tm.zero(self.w)
    }
    fn one(&mut self) -> TermId {
        self.tm.one(self.w)
    }
    fn ones(&mut self) -> TermId {
        self.tm.ones(self.w)
    }
    fn mins(&mut self) -> TermId {
        self.tm.min_signed(self.w)
    }
    fn maxs(&mut self) -> TermId {
        self.tm.max_signed(self.w)
    }
    fn kappa(&mut self) -> TermId {
        let w = self.w.bits() as u64;
        self.c(w)
    }
    fn r(&mut self, rel: Relation, a: TermId, b: TermId) -> TermId {
        self.tm.rel(rel, a, b)
    }
    fn eq(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Eq, a, b)
    }
    fn ne(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Ne, a, b)
    }
    fn ult(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Ult, a, b)
    }
    fn ule(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Ule, a, b)
    }
    fn ugt(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Ugt, a, b)
    }
    fn uge(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Uge, a, b)
    }
    fn slt(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Slt, a, b)
    }
    fn sle(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Sle, a, b)
    }
    fn sgt(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Sgt, a, b)
    }
    fn sge(&mut self, a: TermId, b: TermId) -> TermId {
        self.r(Relation::Sge, a, b)
    }
    fn or(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.or2(a, b)
    }
    fn and(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.and2(a, b)
    }
    fn imp(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.implies(a, b)
    }
    fn not(&mut self, a: TermId) -> TermId {
        self.tm.not(a)
    }
    fn tru(&mut self) -> TermId {
        self.tm.tru()
    }
    fn bnot(&mut self, a: TermId) -> TermId {
        self.tm.bvnot(a)
    }
    fn neg(&mut self, a: TermId) -> TermId {
        self.tm.neg(a)
    }
    fn add(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.add(a, b)
    }
    fn sub(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.sub(a, b)
    }
    fn mul(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.mul(a, b)
    }
    fn udiv(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.udiv(a, b)
    }
    fn band(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.bvand(a, b)
    }
    fn bor(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.bvor(a, b)
    }
    fn shl(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.shl(a, b)
    }
    fn lshr(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.lshr(a, b)
    }
    fn ashr(&mut self, a: TermId, b: TermId) -> TermId {
        self.tm.ashr(a, b)
    }

    /// `or_{i=0}^{w} f(i)` with `i` a constant of width `w`.
    fn big_or(&mut self, mut f: impl FnMut(&mut Self, TermId) -> TermId) -> TermId {
        let mut ds = Vec::new();
        for i in 0..=self.w.bits() as u64 {
            let ic = self.c(i);
            ds.push(f(self, ic));
        }
        self.tm.or(ds)
    }

    /// Bounds check shared by `x rel t`, `-x rel t`, `~x rel t`, `x + s rel t`
    /// and extraction.
    fn base(&mut self, rel: Relation, t: TermId) -> TermId {
        match rel {
            Relation::Ult => {
                let z = self.zero();
                self.ne(t, z)
            }
            Relation::Ugt => {
                let o = self.ones();
                self.ne(t, o)
            }
            Relation::Slt => {
                let m = self.mins();
                self.ne(t, m)
            }
            Relation::Sgt => {
                let m = self.maxs();
                self.ne(t, m)
            }
            _ => self.tru(),
        }
    }
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Condition for the row `key` instantiated with `s` (absent for unary
    /// rows) and `t`.
    pub fn condition(
        &self,
        tm: &mut TermManager,
        key: IcKey,
        s: Option<TermId>,
        t: TermId,
    ) -> Result<TermId, CatalogError> {
        if !key.op.sides().contains(&key.side) {
            return Err(CatalogError::Unsupported(key));
        }
        let wt = tm.width(t);
        match key.op {
            IcOp::Var | IcOp::Not | IcOp::Neg | IcOp::Extract => {
                let mut b = Cb { tm, w: wt };
                return Ok(b.base(key.rel, t));
            }
            IcOp::Add => {
                let s = s.ok_or(CatalogError::Widths(key))?;
                if tm.width(s) != wt {
                    return Err(CatalogError::Widths(key));
                }
                let mut b = Cb { tm, w: wt };
                return Ok(b.base(key.rel, t));
            }
            IcOp::Concat => {
                let s = s.ok_or(CatalogError::Widths(key))?;
                return concat_condition(tm, key, s, t);
            }
            _ => {}
        }
        let s = s.ok_or(CatalogError::Widths(key))?;
        if tm.width(s) != wt {
            return Err(CatalogError::Widths(key));
        }
        let mut b = Cb { tm, w: wt };
        let special = self.width_special_cases && wt.bits() == 1;
        Ok(binary_condition(&mut b, key, s, t, special))
    }

    /// Condition for the literal `lhs rel rhs` over `x`.
    pub fn get_ic(
        &self,
        tm: &mut TermManager,
        x: VarId,
        lhs: TermId,
        rel: Relation,
        rhs: TermId,
    ) -> Result<TermId, CatalogError> {
        let shape = classify(tm, x, lhs, rel, rhs)?;
        self.condition(tm, shape.key, shape.s, shape.t)
    }
}

/// Condition for the literal `lhs rel rhs` over `x`, using the default
/// catalog.
pub fn get_ic(tm: &mut TermManager, x: VarId, lhs: TermId, rel: Relation, rhs: TermId) -> Result<TermId, CatalogError> {
    Catalog::default().get_ic(tm, x, lhs, rel, rhs)
}

/// Bounds check for `x rel t`.
pub fn base_case_ic(tm: &mut TermManager, rel: Relation, t: TermId) -> TermId {
    let w = tm.width(t);
    Cb { tm, w }.base(rel, t)
}

/// Unconditional inverse for `lhs = rhs` over `x`, when one exists: `-x`,
/// `~x`, `x + s`, and `x * c` with `c` an odd constant.
pub fn get_inverse(tm: &mut TermManager, x: VarId, lhs: TermId, rel: Relation, rhs: TermId) -> Option<TermId> {
    if rel != Relation::Eq {
        return None;
    }
    let shape = classify(tm, x, lhs, rel, rhs).ok()?;
    let t = shape.t;
    match shape.key.op {
        IcOp::Var => Some(t),
        IcOp::Neg => Some(tm.neg(t)),
        IcOp::Not => Some(tm.bvnot(t)),
        IcOp::Add => Some(tm.sub(t, shape.s?)),
        IcOp::Mul => {
            let c: BitVec = tm.as_bv_const(shape.s?)?;
            let inv = c.mul_inverse_odd().ok()?;
            let it = tm.bv_const(inv);
            Some(tm.mul(t, it))
        }
        _ => None,
    }
}

fn concat_condition(tm: &mut TermManager, key: IcKey, s: TermId, t: TermId) -> Result<TermId, CatalogError> {
    let wt = tm.width(t).bits();
    let ws = tm.width(s).bits();
    if wt <= ws {
        return Err(CatalogError::Widths(key));
    }
    let wx = wt - ws;
    let (tx, ts) = match key.side {
        Side::Left => (tm.extract(wt - 1, wt - wx, t), tm.extract(ws - 1, 0, t)),
        _ => (tm.extract(wx - 1, 0, t), tm.extract(wt - 1, wt - ws, t)),
    };
    // constants in the x part have width wx
    let mut bx = Cb { tm, w: Width::new(wx).expect("positive width") };
    let (zx, onesx, minx, maxx) = (bx.zero(), bx.ones(), bx.mins(), bx.maxs());
    let b = &mut bx;
    use Relation::*;
    let cond = match (key.side, key.rel) {
        (Side::Left, Eq) => b.eq(s, ts),
        (Side::Left, Ne) | (Side::Right, Ne) => b.tru(),
        (Side::Left, Ult) => {
            let p = b.eq(tx, zx);
            let q = b.ult(s, ts);
            b.imp(p, q)
        }
        (Side::Left, Ugt) => {
            let p = b.eq(tx, onesx);
            let q = b.ugt(s, ts);
            b.imp(p, q)
        }
        (Side::Left, Ule) => {
            let p = b.eq(tx, zx);
            let q = b.ule(s, ts);
            b.imp(p, q)
        }
        (Side::Left, Uge) => {
            let p = b.eq(tx, onesx);
            let q = b.uge(s, ts);
            b.imp(p, q)
        }
        (Side::Left, Slt) => {
            let p = b.eq(tx, minx);
            let q = b.ult(s, ts);
            b.imp(p, q)
        }
        (Side::Left, Sgt) => {
            let p = b.eq(tx, maxx);
            let q = b.ugt(s, ts);
            b.imp(p, q)
        }
        (Side::Left, Sle) => {
            let p = b.eq(tx, minx);
            let q = b.ule(s, ts);
            b.imp(p, q)
        }
        (Side::Left, Sge) => {
            let p = b.eq(tx, maxx);
            let q = b.uge(s, ts);
            b.imp(p, q)
        }
        (Side::Right, Eq) => b.eq(s, ts),
        (Side::Right, Ult) => {
            let p = b.ule(s, ts);
            let e = b.eq(s, ts);
            let n = b.ne(tx, zx);
            let q = b.imp(e, n);
            b.and(p, q)
        }
        (Side::Right, Ugt) => {
            let p = b.uge(s, ts);
            let e = b.eq(s, ts);
            let n = b.ne(tx, onesx);
            let q = b.imp(e, n);
            b.and(p, q)
        }
        (Side::Right, Ule) => b.ule(s, ts),
        (Side::Right, Uge) => b.uge(s, ts),
        (Side::Right, Slt) => {
            let p = b.sle(s, ts);
            let e = b.eq(s, ts);
            let n = b.ne(tx, zx);
            let q = b.imp(e, n);
            b.and(p, q)
        }
        (Side::Right, Sgt) => {
            let p = b.sge(s, ts);
            let e = b.eq(s, ts);
            let n = b.ne(tx, onesx);
            let q = b.imp(e, n);
            b.and(p, q)
        }
        (Side::Right, Sle) => b.sle(s, ts),
        (Side::Right, Sge) => b.sge(s, ts),
        (Side::Unary, _) => return Err(CatalogError::Unsupported(key)),
    };
    Ok(cond)
}

fn binary_condition(b: &mut Cb<'_>, key: IcKey, s: TermId, t: TermId, width1: bool) -> TermId {
    use IcOp::*;
    use Relation::*;
    use Side::{Left as L, Right as R};
    match (key.op, key.side, key.rel) {
        // x * s
        (Mul, L, Eq) => {
            let ns = b.neg(s);
            let m = b.bor(ns, s);
            let a = b.band(m, t);
            b.eq(a, t)
        }
        (Mul, L, Ne) => {
            let z = b.zero();
            let p = b.ne(s, z);
            let q = b.ne(t, z);
            b.or(p, q)
        }
        (Mul, L, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (Mul, L, Ugt) => {
            let ns = b.neg(s);
            let m = b.bor(ns, s);
            b.ult(t, m)
        }
        (Mul, L, Ule) => b.tru(),
        (Mul, L, Uge) => {
            let ns = b.neg(s);
            let m = b.bor(ns, s);
            b.uge(m, t)
        }
        (Mul, L, Slt) => {
            let nt = b.neg(t);
            let a = b.bnot(nt);
            let ns = b.neg(s);
            let m = b.bor(ns, s);
            let l = b.band(a, m);
            b.slt(l, t)
        }
        (Mul, L, Sgt) => {
            let st = b.bor(s, t);
            let ns = b.neg(s);
            let m = b.bor(st, ns);
            let d = b.sub(t, m);
            b.slt(t, d)
        }
        (Mul, L, Sle) => {
            let z = b.zero();
            let p = b.eq(s, z);
            let q = b.slt(t, s);
            let a = b.and(p, q);
            b.not(a)
        }
        (Mul, L, Sge) => {
            let ns = b.neg(s);
            let m = b.bor(ns, s);
            let mx = b.maxs();
            let a = b.band(m, mx);
            b.sge(a, t)
        }

        // x mod s
        (Urem, L, Eq) => {
            let ns = b.neg(s);
            let n = b.bnot(ns);
            b.uge(n, t)
        }
        (Urem, L, Ne) => {
            let one = b.one();
            let z = b.zero();
            let p = b.ne(s, one);
            let q = b.ne(t, z);
            b.or(p, q)
        }
        (Urem, L, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (Urem, L, Ugt) => {
            let ns = b.neg(s);
            let n = b.bnot(ns);
            b.ult(t, n)
        }
        (Urem, L, Ule) => b.tru(),
        (Urem, L, Uge) => {
            let ns = b.neg(s);
            let n = b.bnot(ns);
            b.uge(n, t)
        }
        (Urem, L, Slt) => {
            let nt = b.bnot(t);
            let ns = b.neg(s);
            let ntt = b.neg(t);
            let o = b.bor(ns, ntt);
            b.slt(nt, o)
        }
        (Urem, L, Sgt) => {
            let z = b.zero();
            let one = b.one();
            let mx = b.maxs();
            let p1 = b.sgt(s, z);
            let ns = b.neg(s);
            let n = b.bnot(ns);
            let q1 = b.slt(t, n);
            let c1 = b.imp(p1, q1);
            let p2 = b.sle(s, z);
            let q2 = b.ne(t, mx);
            let c2 = b.imp(p2, q2);
            let d1 = b.ne(t, z);
            let d2 = b.ne(s, one);
            let c3 = b.or(d1, d2);
            b.tm.and(vec![c1, c2, c3])
        }
        (Urem, L, Sle) => {
            let o = b.ones();
            let ns = b.neg(s);
            let a = b.band(ns, t);
            b.slt(o, a)
        }
        (Urem, L, Sge) => {
            let z = b.zero();
            let p = b.slt(t, s);
            let q = b.sge(z, s);
            b.or(p, q)
        }

        // s mod x
        (Urem, R, Eq) => {
            let tt = b.add(t, t);
            let d = b.sub(tt, s);
            let a = b.band(d, s);
            b.uge(a, t)
        }
        (Urem, R, Ne) => {
            let z = b.zero();
            let p = b.ne(s, z);
            let q = b.ne(t, z);
            b.or(p, q)
        }
        (Urem, R, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (Urem, R, Ugt) => b.ult(t, s),
        (Urem, R, Ule) => b.tru(),
        (Urem, R, Uge) => {
            let tt = b.add(t, t);
            let d = b.sub(tt, s);
            let a = b.band(d, s);
            let p = b.uge(a, t);
            let q = b.ult(t, s);
            b.or(p, q)
        }
        (Urem, R, Slt) => {
            let z = b.zero();
            let p = b.slt(s, t);
            let q = b.slt(z, t);
            b.or(p, q)
        }
        (Urem, R, Sgt) => {
            let z = b.zero();
            let one = b.one();
            let p1 = b.sge(s, z);
            let q1 = b.sgt(s, t);
            let c1 = b.imp(p1, q1);
            let p2 = b.slt(s, z);
            let sm = b.sub(s, one);
            let sh = b.lshr(sm, one);
            let q2 = b.sgt(sh, t);
            let c2 = b.imp(p2, q2);
            b.and(c1, c2)
        }
        (Urem, R, Sle) => {
            let mn = b.mins();
            let p = b.ult(t, mn);
            let q = b.sge(t, s);
            b.or(p, q)
        }
        (Urem, R, Sge) => {
            let z = b.zero();
            let p1 = b.sge(s, z);
            let q1 = b.sge(s, t);
            let c1 = b.imp(p1, q1);
            let a = b.slt(s, z);
            let c = b.sge(t, z);
            let p2 = b.and(a, c);
            let d = b.sub(s, t);
            let q2 = b.ugt(d, t);
            let c2 = b.imp(p2, q2);
            b.and(c1, c2)
        }

        // x / s
        (Udiv, L, Eq) => {
            let m = b.mul(s, t);
            let d = b.udiv(m, s);
            b.eq(d, t)
        }
        (Udiv, L, Ne) => {
            let z = b.zero();
            let o = b.ones();
            let p = b.ne(s, z);
            let q = b.ne(t, o);
            b.or(p, q)
        }
        (Udiv, L, Ult) => {
            let z = b.zero();
            let p = b.ult(z, s);
            let q = b.ult(z, t);
            b.and(p, q)
        }
        (Udiv, L, Ugt) => {
            let o = b.ones();
            let d = b.udiv(o, s);
            b.ugt(d, t)
        }
        (Udiv, L, Ule) => {
            let st = b.bor(s, t);
            let ns = b.neg(s);
            let n = b.bnot(ns);
            b.uge(st, n)
        }
        (Udiv, L, Uge) => {
            let m = b.mul(s, t);
            let d = b.udiv(m, t);
            let a = b.band(d, s);
            b.eq(a, s)
        }
        (Udiv, L, Slt) => {
            let z = b.zero();
            let mn = b.mins();
            let p = b.sle(t, z);
            let d = b.udiv(mn, s);
            let q = b.slt(d, t);
            b.imp(p, q)
        }
        (Udiv, L, Sgt) => {
            let o = b.ones();
            let mx = b.maxs();
            let d1 = b.udiv(o, s);
            let p = b.sgt(d1, t);
            let d2 = b.udiv(mx, s);
            let q = b.sgt(d2, t);
            b.or(p, q)
        }
        (Udiv, L, Sle) => {
            let m = b.mul(s, t);
            let d = b.udiv(m, s);
            let e = b.eq(d, t);
            let z = b.zero();
            let mn = b.mins();
            let p = b.sle(t, z);
            let d2 = b.udiv(mn, s);
            let q = b.slt(d2, t);
            let i = b.imp(p, q);
            b.or(e, i)
        }
        (Udiv, L, Sge) => {
            let o = b.ones();
            let mx = b.maxs();
            let d1 = b.udiv(o, s);
            let p = b.sge(d1, t);
            let d2 = b.udiv(mx, s);
            let q = b.sge(d2, t);
            b.or(p, q)
        }

        // s / x
        (Udiv, R, Eq) => {
            let d = b.udiv(s, t);
            let d2 = b.udiv(s, d);
            b.eq(d2, t)
        }
        (Udiv, R, Ne) => {
            if width1 {
                let a = b.band(s, t);
                let z = b.zero();
                b.eq(a, z)
            } else {
                b.tru()
            }
        }
        (Udiv, R, Ult) => {
            let z = b.zero();
            let nt = b.neg(t);
            let a = b.band(nt, s);
            let n = b.bnot(a);
            let p = b.ult(z, n);
            let q = b.ult(z, t);
            b.and(p, q)
        }
        (Udiv, R, Ugt) => {
            let o = b.ones();
            b.ult(t, o)
        }
        (Udiv, R, Ule) => {
            let z = b.zero();
            let ns = b.bnot(s);
            let o = b.bor(ns, t);
            b.ult(z, o)
        }
        (Udiv, R, Uge) => b.tru(),
        (Udiv, R, Slt) => {
            let z = b.zero();
            let p = b.slt(s, t);
            let q = b.sge(t, z);
            b.or(p, q)
        }
        (Udiv, R, Sgt) => {
            if width1 {
                b.sgt(s, t)
            } else {
                let z = b.zero();
                let one = b.one();
                let p1 = b.sge(s, z);
                let q1 = b.sgt(s, t);
                let c1 = b.imp(p1, q1);
                let p2 = b.slt(s, z);
                let sh = b.lshr(s, one);
                let q2 = b.sgt(sh, t);
                let c2 = b.imp(p2, q2);
                b.and(c1, c2)
            }
        }
        (Udiv, R, Sle) => {
            let o = b.ones();
            let p = b.sge(t, o);
            let q = b.sge(t, s);
            b.or(p, q)
        }
        (Udiv, R, Sge) => {
            if width1 {
                // the general form below admits s = 1, t = 0 at width 1
                let z = b.zero();
                let o = b.ones();
                let p = b.eq(s, z);
                let q = b.eq(t, o);
                b.or(p, q)
            } else {
                let z = b.zero();
                let one = b.one();
                let p1 = b.sge(s, z);
                let q1 = b.sge(s, t);
                let c1 = b.imp(p1, q1);
                let p2 = b.slt(s, z);
                let sh = b.lshr(s, one);
                let q2 = b.sge(sh, t);
                let c2 = b.imp(p2, q2);
                b.and(c1, c2)
            }
        }

        // x & s
        (And, L, Eq) => {
            let a = b.band(t, s);
            b.eq(a, t)
        }
        (And, L, Ne) => {
            let z = b.zero();
            let p = b.ne(s, z);
            let q = b.ne(t, z);
            b.or(p, q)
        }
        (And, L, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (And, L, Ugt) => b.ult(t, s),
        (And, L, Ule) => b.tru(),
        (And, L, Uge) => b.uge(s, t),
        (And, L, Slt) => {
            let nt = b.neg(t);
            let n = b.bnot(nt);
            let a = b.band(n, s);
            b.slt(a, t)
        }
        (And, L, Sgt) => {
            let mx = b.maxs();
            let a = b.band(s, mx);
            b.slt(t, a)
        }
        (And, L, Sle) => {
            let mn = b.mins();
            let a = b.band(t, mn);
            b.uge(s, a)
        }
        (And, L, Sge) => {
            let st = b.band(s, t);
            let p = b.eq(st, t);
            let d = b.sub(t, s);
            let a = b.band(d, s);
            let q = b.slt(t, a);
            b.or(p, q)
        }

        // x | s
        (Or, L, Eq) => {
            let o = b.bor(t, s);
            b.eq(o, t)
        }
        (Or, L, Ne) => {
            let o = b.ones();
            let p = b.ne(s, o);
            let q = b.ne(t, o);
            b.or(p, q)
        }
        (Or, L, Ult) => b.ult(s, t),
        (Or, L, Ugt) => {
            let o = b.ones();
            b.ult(t, o)
        }
        (Or, L, Ule) => b.uge(t, s),
        (Or, L, Uge) => b.tru(),
        (Or, L, Slt) => {
            let d = b.sub(s, t);
            let n = b.bnot(d);
            let o = b.bor(n, s);
            b.slt(o, t)
        }
        (Or, L, Sgt) => {
            let mx = b.maxs();
            let o = b.bor(s, mx);
            b.slt(t, o)
        }
        (Or, L, Sle) => {
            let mn = b.mins();
            let o = b.bor(s, mn);
            b.sge(t, o)
        }
        (Or, L, Sge) => {
            let mx = b.maxs();
            let o = b.bor(s, mx);
            b.sge(o, t)
        }

        // x >> s
        (Lshr, L, Eq) => {
            let sh = b.shl(t, s);
            let r = b.lshr(sh, s);
            b.eq(r, t)
        }
        (Lshr, L, Ne) | (Shl, L, Ne) => {
            let z = b.zero();
            let k = b.kappa();
            let p = b.ne(t, z);
            let q = b.ult(s, k);
            b.or(p, q)
        }
        (Lshr, L, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (Lshr, L, Ugt) => {
            let ns = b.bnot(s);
            let r = b.lshr(ns, s);
            b.ult(t, r)
        }
        (Lshr, L, Ule) => b.tru(),
        (Lshr, L, Uge) => {
            let sh = b.shl(t, s);
            let r = b.lshr(sh, s);
            b.eq(r, t)
        }
        (Lshr, L, Slt) => {
            let nt = b.neg(t);
            let n = b.bnot(nt);
            let r = b.lshr(n, s);
            b.slt(r, t)
        }
        (Lshr, L, Sgt) => {
            let mx = b.maxs();
            let sh = b.shl(mx, s);
            let r = b.lshr(sh, s);
            b.slt(t, r)
        }
        (Lshr, L, Sle) => {
            let r = b.lshr(t, s);
            b.sge(t, r)
        }
        (Lshr, L, Sge) => {
            let z = b.zero();
            let o = b.ones();
            let p = b.ne(s, z);
            let r = b.lshr(o, s);
            let q = b.sge(r, t);
            b.imp(p, q)
        }

        // s >> x
        (Lshr, R, Eq) => b.big_or(|b, i| {
            let r = b.lshr(s, i);
            b.eq(r, t)
        }),
        (Lshr, R, Ne) | (Shl, R, Ne) => {
            let z = b.zero();
            let p = b.ne(s, z);
            let q = b.ne(t, z);
            b.or(p, q)
        }
        (Lshr, R, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (Lshr, R, Ugt) => b.ult(t, s),
        (Lshr, R, Ule) => b.tru(),
        (Lshr, R, Uge) => b.uge(s, t),
        (Lshr, R, Slt) => {
            let z = b.zero();
            let p = b.slt(s, t);
            let q = b.slt(z, t);
            b.or(p, q)
        }
        (Lshr, R, Sgt) => {
            let z = b.zero();
            let one = b.one();
            let p1 = b.slt(s, z);
            let sh = b.lshr(s, one);
            let q1 = b.sgt(sh, t);
            let c1 = b.imp(p1, q1);
            let p2 = b.sge(s, z);
            let q2 = b.sgt(s, t);
            let c2 = b.imp(p2, q2);
            b.and(c1, c2)
        }
        (Lshr, R, Sle) => {
            let mn = b.mins();
            let p = b.ult(t, mn);
            let q = b.sge(t, s);
            b.or(p, q)
        }
        (Lshr, R, Sge) => {
            let z = b.zero();
            let one = b.one();
            let p1 = b.slt(s, z);
            let sh = b.lshr(s, one);
            let q1 = b.sge(sh, t);
            let c1 = b.imp(p1, q1);
            let p2 = b.sge(s, z);
            let q2 = b.sge(s, t);
            let c2 = b.imp(p2, q2);
            b.and(c1, c2)
        }

        // x >>a s
        (Ashr, L, Eq) => {
            let k = b.kappa();
            let p1 = b.ult(s, k);
            let sh = b.shl(t, s);
            let r = b.ashr(sh, s);
            let q1 = b.eq(r, t);
            let c1 = b.imp(p1, q1);
            let p2 = b.uge(s, k);
            let o = b.ones();
            let z = b.zero();
            let e1 = b.eq(t, o);
            let e2 = b.eq(t, z);
            let q2 = b.or(e1, e2);
            let c2 = b.imp(p2, q2);
            b.and(c1, c2)
        }
        (Ashr, L, Ne) => b.tru(),
        (Ashr, L, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (Ashr, L, Ugt) => {
            let o = b.ones();
            b.ult(t, o)
        }
        (Ashr, L, Ule) | (Ashr, L, Uge) => b.tru(),
        (Ashr, L, Slt) => {
            let mn = b.mins();
            let r = b.ashr(mn, s);
            b.slt(r, t)
        }
        (Ashr, L, Sgt) => {
            let mx = b.maxs();
            let r = b.lshr(mx, s);
            b.slt(t, r)
        }
        (Ashr, L, Sle) => {
            let mx = b.maxs();
            let r = b.lshr(mx, s);
            let n = b.bnot(r);
            b.sge(t, n)
        }
        (Ashr, L, Sge) => {
            let mx = b.maxs();
            let r = b.lshr(mx, s);
            b.sge(r, t)
        }

        // s >>a x
        (Ashr, R, Eq) => b.big_or(|b, i| {
            let r = b.ashr(s, i);
            b.eq(r, t)
        }),
        (Ashr, R, Ne) => {
            let z = b.zero();
            let o = b.ones();
            let a1 = b.ne(t, z);
            let a2 = b.ne(s, z);
            let c1 = b.or(a1, a2);
            let b1 = b.ne(t, o);
            let b2 = b.ne(s, o);
            let c2 = b.or(b1, b2);
            b.and(c1, c2)
        }
        (Ashr, R, Ult) => {
            let z = b.zero();
            let p = b.ult(s, t);
            let q = b.sge(s, z);
            let o = b.or(p, q);
            let n = b.ne(t, z);
            b.and(o, n)
        }
        (Ashr, R, Ugt) => {
            let nt = b.bnot(t);
            let r = b.lshr(s, nt);
            let p = b.slt(s, r);
            let q = b.ult(t, s);
            b.or(p, q)
        }
        (Ashr, R, Ule) => {
            let mn = b.mins();
            let p = b.ult(s, mn);
            let q = b.uge(t, s);
            b.or(p, q)
        }
        (Ashr, R, Uge) => {
            let ns = b.bnot(s);
            let p = b.uge(s, ns);
            let q = b.uge(s, t);
            b.or(p, q)
        }
        (Ashr, R, Slt) => {
            let z = b.zero();
            let p = b.slt(s, t);
            let q = b.slt(z, t);
            b.or(p, q)
        }
        (Ashr, R, Sgt) => {
            let mx = b.maxs();
            let a = b.band(s, mx);
            let p = b.slt(t, a);
            let o = b.bor(s, mx);
            let q = b.slt(t, o);
            b.and(p, q)
        }
        (Ashr, R, Sle) => {
            let z = b.zero();
            let p = b.sge(t, z);
            let q = b.sge(t, s);
            b.or(p, q)
        }
        (Ashr, R, Sge) => {
            let nt = b.bnot(t);
            let p = b.uge(t, nt);
            let q = b.sge(s, t);
            b.or(p, q)
        }

        // x << s
        (Shl, L, Eq) => {
            let r = b.lshr(t, s);
            let l = b.shl(r, s);
            b.eq(l, t)
        }
        (Shl, L, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (Shl, L, Ugt) => {
            let o = b.ones();
            let l = b.shl(o, s);
            b.ult(t, l)
        }
        (Shl, L, Ule) => b.tru(),
        (Shl, L, Uge) => {
            let o = b.ones();
            let l = b.shl(o, s);
            b.uge(l, t)
        }
        (Shl, L, Slt) => {
            let mn = b.mins();
            let r = b.lshr(mn, s);
            let l = b.shl(r, s);
            b.slt(l, t)
        }
        (Shl, L, Sgt) => {
            let mx = b.maxs();
            let l = b.shl(mx, s);
            let a = b.band(l, mx);
            b.slt(t, a)
        }
        (Shl, L, Sle) => {
            let mn = b.mins();
            let r = b.lshr(t, s);
            let r2 = b.lshr(t, r);
            b.ult(r2, mn)
        }
        (Shl, L, Sge) => {
            let mx = b.maxs();
            let l = b.shl(mx, s);
            let a = b.band(l, mx);
            b.sge(a, t)
        }

        // s << x
        (Shl, R, Eq) => b.big_or(|b, i| {
            let l = b.shl(s, i);
            b.eq(l, t)
        }),
        (Shl, R, Ult) => {
            let z = b.zero();
            b.ne(t, z)
        }
        (Shl, R, Ugt) => b.big_or(|b, i| {
            let l = b.shl(s, i);
            b.ugt(l, t)
        }),
        (Shl, R, Ule) => b.tru(),
        (Shl, R, Uge) => b.big_or(|b, i| {
            let l = b.shl(s, i);
            b.uge(l, t)
        }),
        (Shl, R, Slt) => {
            let mn = b.mins();
            let l = b.shl(mn, s);
            let a = b.add(t, mn);
            b.ult(l, a)
        }
        (Shl, R, Sgt) => b.big_or(|b, i| {
            let l = b.shl(s, i);
            b.sgt(l, t)
        }),
        (Shl, R, Sle) => {
            let mn = b.mins();
            let r = b.lshr(t, s);
            b.ult(r, mn)
        }
        (Shl, R, Sge) => b.big_or(|b, i| {
            let l = b.shl(s, i);
            b.sge(l, t)
        }),

        _ => unreachable!("binary_condition called with {}", key),
    }
}
