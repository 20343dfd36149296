//! Hash-consed term DAG for bit-vector formulas with quantifiers and
//! Hilbert choice.
//!
//! All terms live in a [`TermManager`] arena and are referred to by
//! [`TermId`] handles. Structurally equal constructions return the same
//! handle. Construction through [`TermManager::mk`] sort-checks its input and
//! folds nodes whose children are all literal constants; nothing else is
//! rewritten.

mod eval;
mod print;

use std::fmt;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::bv::{BitVec, BvBinOp, BvError, BvUnOp, Relation, Width};

pub use eval::{CompiledTerm, EvalError, Evaluator, Interpretation, Value, DEFAULT_EVAL_CAP};
pub use print::{symbol, SmtPrinter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    Bv(Width),
}

impl Sort {
    pub fn bv(bits: u32) -> Sort {
        Sort::Bv(Width::new(bits).expect("valid width"))
    }

    pub fn width(self) -> Option<Width> {
        match self {
            Sort::Bv(w) => Some(w),
            Sort::Bool => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Bv(w) => write!(f, "(_ BitVec {})", w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Kind {
    BvConst(BitVec),
    BoolConst(bool),
    Var(VarId),
    BvUn(BvUnOp, TermId),
    BvBin(BvBinOp, TermId, TermId),
    Concat(TermId, TermId),
    Extract { hi: u32, lo: u32, arg: TermId },
    Rel(Relation, TermId, TermId),
    Not(TermId),
    And(Vec<TermId>),
    Or(Vec<TermId>),
    Implies(TermId, TermId),
    Iff(TermId, TermId),
    Ite(TermId, TermId, TermId),
    Choice(VarId, TermId),
    Forall(Vec<VarId>, TermId),
    Exists(Vec<VarId>, TermId),
}

impl Kind {
    pub fn children(&self) -> Vec<TermId> {
        match self {
            Kind::BvConst(_) | Kind::BoolConst(_) | Kind::Var(_) => vec![],
            Kind::BvUn(_, a) | Kind::Not(a) | Kind::Extract { arg: a, .. } => vec![*a],
            Kind::BvBin(_, a, b) | Kind::Concat(a, b) | Kind::Rel(_, a, b) | Kind::Implies(a, b) | Kind::Iff(a, b) => {
                vec![*a, *b]
            }
            Kind::And(xs) | Kind::Or(xs) => xs.clone(),
            Kind::Ite(c, a, b) => vec![*c, *a, *b],
            Kind::Choice(_, b) | Kind::Forall(_, b) | Kind::Exists(_, b) => vec![*b],
        }
    }

    /// Same node shape with new children, in the order of [`Kind::children`].
    pub fn with_children(&self, ch: &[TermId]) -> Kind {
        match self {
            Kind::BvConst(_) | Kind::BoolConst(_) | Kind::Var(_) => self.clone(),
            Kind::BvUn(op, _) => Kind::BvUn(*op, ch[0]),
            Kind::Not(_) => Kind::Not(ch[0]),
            Kind::Extract { hi, lo, .. } => Kind::Extract { hi: *hi, lo: *lo, arg: ch[0] },
            Kind::BvBin(op, _, _) => Kind::BvBin(*op, ch[0], ch[1]),
            Kind::Concat(_, _) => Kind::Concat(ch[0], ch[1]),
            Kind::Rel(r, _, _) => Kind::Rel(*r, ch[0], ch[1]),
            Kind::Implies(_, _) => Kind::Implies(ch[0], ch[1]),
            Kind::Iff(_, _) => Kind::Iff(ch[0], ch[1]),
            Kind::And(_) => Kind::And(ch.to_vec()),
            Kind::Or(_) => Kind::Or(ch.to_vec()),
            Kind::Ite(_, _, _) => Kind::Ite(ch[0], ch[1], ch[2]),
            Kind::Choice(v, _) => Kind::Choice(*v, ch[0]),
            Kind::Forall(vs, _) => Kind::Forall(vs.clone(), ch[0]),
            Kind::Exists(vs, _) => Kind::Exists(vs.clone(), ch[0]),
        }
    }

    pub fn is_binder(&self) -> bool {
        matches!(self, Kind::Choice(..) | Kind::Forall(..) | Kind::Exists(..))
    }

    pub fn bound_vars(&self) -> &[VarId] {
        match self {
            Kind::Choice(v, _) => std::slice::from_ref(v),
            Kind::Forall(vs, _) | Kind::Exists(vs, _) => vs,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("sort mismatch in {op}: {detail}")]
    Sort { op: &'static str, detail: String },
    #[error(transparent)]
    Bv(#[from] BvError),
    #[error("binder without variables")]
    EmptyBinder,
}

fn sort_err(op: &'static str, detail: impl Into<String>) -> TermError {
    TermError::Sort { op, detail: detail.into() }
}

#[derive(Debug, Clone)]
struct Node {
    kind: Kind,
    sort: Sort,
    free: Arc<[VarId]>,
    size: u32,
}

#[derive(Debug, Clone)]
struct VarInfo {
    name: String,
    sort: Sort,
}

/// A literal: an atom (a relation between two bit-vector terms) with a
/// polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub atom: TermId,
}

/// Arena owning every term and variable of one problem.
#[derive(Debug, Clone, Default)]
pub struct TermManager {
    nodes: Vec<Node>,
    index: FxHashMap<Kind, TermId>,
    vars: Vec<VarInfo>,
    fresh_counter: u32,
    names: FxHashSet<String>,
    holes: FxHashMap<Sort, VarId>,
    choices: FxHashMap<(VarId, TermId), TermId>,
}

fn union_sorted(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl TermManager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_terms(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Declares a new variable. Every call yields a distinct identifier,
    /// even for repeated names.
    pub fn new_var(&mut self, name: impl Into<String>, sort: Sort) -> VarId {
        let id = VarId(self.vars.len() as u32);
        let name = name.into();
        self.names.insert(name.clone());
        self.vars.push(VarInfo { name, sort });
        id
    }

    /// Declares a variable named `prefix!N` with a manager-unique suffix.
    pub fn fresh_var(&mut self, prefix: &str, sort: Sort) -> VarId {
        loop {
            let name = format!("{}!{}", prefix, self.fresh_counter);
            self.fresh_counter += 1;
            if !self.names.contains(&name) {
                return self.new_var(name, sort);
            }
        }
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.index()].name
    }

    pub fn var_sort(&self, v: VarId) -> Sort {
        self.vars[v.index()].sort
    }

    pub fn var_width(&self, v: VarId) -> Width {
        self.var_sort(v).width().expect("bit-vector variable")
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len() as u32).map(VarId)
    }

    pub fn kind(&self, t: TermId) -> &Kind {
        &self.nodes[t.index()].kind
    }

    pub fn sort(&self, t: TermId) -> Sort {
        self.nodes[t.index()].sort
    }

    /// Width of a bit-vector term. Panics on Boolean terms.
    pub fn width(&self, t: TermId) -> Width {
        match self.sort(t) {
            Sort::Bv(w) => w,
            Sort::Bool => panic!("width of Boolean term"),
        }
    }

    /// Free variables in ascending identifier order.
    pub fn free_vars(&self, t: TermId) -> &[VarId] {
        &self.nodes[t.index()].free
    }

    pub fn has_free_var(&self, t: TermId, v: VarId) -> bool {
        self.free_vars(t).binary_search(&v).is_ok()
    }

    /// Number of DAG nodes reachable from `t` counted as a tree, saturating.
    pub fn tree_size(&self, t: TermId) -> u32 {
        self.nodes[t.index()].size
    }

    /// Number of distinct nodes reachable from `t`.
    pub fn dag_size(&self, t: TermId) -> usize {
        let mut seen = FxHashSet::default();
        let mut stack = vec![t];
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(self.kind(n).children());
            }
        }
        seen.len()
    }

    pub fn as_bv_const(&self, t: TermId) -> Option<BitVec> {
        match self.kind(t) {
            Kind::BvConst(c) => Some(*c),
            _ => None,
        }
    }

    pub fn as_bool_const(&self, t: TermId) -> Option<bool> {
        match self.kind(t) {
            Kind::BoolConst(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_var(&self, t: TermId) -> Option<VarId> {
        match self.kind(t) {
            Kind::Var(v) => Some(*v),
            _ => None,
        }
    }

    fn bv_sort(&self, op: &'static str, t: TermId) -> Result<Width, TermError> {
        self.sort(t).width().ok_or_else(|| sort_err(op, "expected a bit-vector argument, found Bool"))
    }

    fn bool_sort(&self, op: &'static str, t: TermId) -> Result<(), TermError> {
        match self.sort(t) {
            Sort::Bool => Ok(()),
            s => Err(sort_err(op, format!("expected Bool, found {}", s))),
        }
    }

    fn same_width(&self, op: &'static str, a: TermId, b: TermId) -> Result<Width, TermError> {
        let wa = self.bv_sort(op, a)?;
        let wb = self.bv_sort(op, b)?;
        if wa != wb {
            return Err(sort_err(op, format!("widths {} and {}", wa, wb)));
        }
        Ok(wa)
    }

    fn check(&self, kind: &Kind) -> Result<Sort, TermError> {
        Ok(match kind {
            Kind::BvConst(c) => Sort::Bv(c.width()),
            Kind::BoolConst(_) => Sort::Bool,
            Kind::Var(v) => self.var_sort(*v),
            Kind::BvUn(_, a) => Sort::Bv(self.bv_sort("bvun", *a)?),
            Kind::BvBin(op, a, b) => Sort::Bv(self.same_width(op.smtlib_name(), *a, *b)?),
            Kind::Concat(a, b) => {
                let wa = self.bv_sort("concat", *a)?;
                let wb = self.bv_sort("concat", *b)?;
                Sort::Bv(Width::new(wa.bits() + wb.bits())?)
            }
            Kind::Extract { hi, lo, arg } => {
                let w = self.bv_sort("extract", *arg)?;
                if lo > hi || *hi >= w.bits() {
                    return Err(BvError::ExtractRange { hi: *hi, lo: *lo, width: w.bits() }.into());
                }
                Sort::Bv(Width::new(hi - lo + 1)?)
            }
            Kind::Rel(r, a, b) => {
                self.same_width(r.smtlib_name(), *a, *b)?;
                Sort::Bool
            }
            Kind::Not(a) => {
                self.bool_sort("not", *a)?;
                Sort::Bool
            }
            Kind::And(xs) | Kind::Or(xs) => {
                for x in xs {
                    self.bool_sort("and/or", *x)?;
                }
                Sort::Bool
            }
            Kind::Implies(a, b) | Kind::Iff(a, b) => {
                self.bool_sort("=>", *a)?;
                self.bool_sort("=>", *b)?;
                Sort::Bool
            }
            Kind::Ite(c, a, b) => {
                self.bool_sort("ite", *c)?;
                let (sa, sb) = (self.sort(*a), self.sort(*b));
                if sa != sb {
                    return Err(sort_err("ite", format!("branches {} and {}", sa, sb)));
                }
                sa
            }
            Kind::Choice(v, body) => {
                self.bool_sort("choice", *body)?;
                self.var_sort(*v)
            }
            Kind::Forall(vs, body) | Kind::Exists(vs, body) => {
                if vs.is_empty() {
                    return Err(TermError::EmptyBinder);
                }
                self.bool_sort("quantifier", *body)?;
                Sort::Bool
            }
        })
    }

    fn fold(&self, kind: &Kind) -> Option<Kind> {
        let c = |t: &TermId| self.as_bv_const(*t);
        let b = |t: &TermId| self.as_bool_const(*t);
        match kind {
            Kind::BvUn(op, a) => Some(Kind::BvConst(BitVec::unop(*op, c(a)?))),
            Kind::BvBin(op, x, y) => Some(Kind::BvConst(BitVec::binop(*op, c(x)?, c(y)?).ok()?)),
            Kind::Concat(x, y) => Some(Kind::BvConst(BitVec::concat(c(x)?, c(y)?).ok()?)),
            Kind::Extract { hi, lo, arg } => Some(Kind::BvConst(BitVec::extract(c(arg)?, *hi, *lo).ok()?)),
            Kind::Rel(r, x, y) => Some(Kind::BoolConst(BitVec::compare(*r, c(x)?, c(y)?).ok()?)),
            Kind::Not(a) => Some(Kind::BoolConst(!b(a)?)),
            Kind::And(xs) => {
                let mut acc = true;
                for x in xs {
                    acc &= b(x)?;
                }
                Some(Kind::BoolConst(acc))
            }
            Kind::Or(xs) => {
                let mut acc = false;
                for x in xs {
                    acc |= b(x)?;
                }
                Some(Kind::BoolConst(acc))
            }
            Kind::Implies(x, y) => Some(Kind::BoolConst(!b(x)? || b(y)?)),
            Kind::Iff(x, y) => Some(Kind::BoolConst(b(x)? == b(y)?)),
            Kind::Ite(cnd, x, y) => {
                let cv = b(cnd)?;
                // only when the selected branch is itself a constant literal
                let chosen = if cv { *x } else { *y };
                if self.as_bv_const(chosen).is_some() || self.as_bool_const(chosen).is_some() {
                    let other = if cv { *y } else { *x };
                    if self.as_bv_const(other).is_some() || self.as_bool_const(other).is_some() {
                        return Some(self.kind(chosen).clone());
                    }
                }
                None
            }
            _ => None,
        }
    }

    /// Builds (or retrieves) the node for `kind`.
    pub fn mk(&mut self, kind: Kind) -> Result<TermId, TermError> {
        let kind = match kind {
            Kind::And(xs) if xs.len() == 1 => return Ok(xs[0]),
            Kind::Or(xs) if xs.len() == 1 => return Ok(xs[0]),
            k => k,
        };
        let sort = self.check(&kind)?;
        let kind = self.fold(&kind).unwrap_or(kind);
        if let Some(&id) = self.index.get(&kind) {
            return Ok(id);
        }
        let free: Vec<VarId> = match &kind {
            Kind::Var(v) => vec![*v],
            k if k.is_binder() => {
                let bound = k.bound_vars();
                let body = k.children()[0];
                self.free_vars(body).iter().copied().filter(|v| !bound.contains(v)).collect()
            }
            k => {
                let mut acc: Vec<VarId> = Vec::new();
                for ch in k.children() {
                    let f = self.free_vars(ch);
                    if !f.is_empty() {
                        acc = union_sorted(&acc, f);
                    }
                }
                acc
            }
        };
        let size = kind.children().iter().fold(1u32, |acc, c| acc.saturating_add(self.tree_size(*c)));
        let id = TermId(self.nodes.len() as u32);
        self.nodes.push(Node { kind: kind.clone(), sort, free: free.into(), size });
        self.index.insert(kind, id);
        Ok(id)
    }

    fn build(&mut self, kind: Kind) -> TermId {
        match self.mk(kind) {
            Ok(t) => t,
            Err(e) => panic!("ill-sorted internal construction: {e}"),
        }
    }

    // Convenience constructors. These panic on sort errors and are meant for
    // construction whose sorts are known to be consistent.

    pub fn bv_const(&mut self, c: BitVec) -> TermId {
        self.build(Kind::BvConst(c))
    }

    pub fn bv_u64(&mut self, w: Width, v: u64) -> TermId {
        self.bv_const(BitVec::truncating(w, v))
    }

    pub fn zero(&mut self, w: Width) -> TermId {
        self.bv_const(BitVec::zero(w))
    }

    pub fn one(&mut self, w: Width) -> TermId {
        self.bv_const(BitVec::one(w))
    }

    pub fn ones(&mut self, w: Width) -> TermId {
        self.bv_const(BitVec::ones(w))
    }

    pub fn min_signed(&mut self, w: Width) -> TermId {
        self.bv_const(BitVec::min_signed(w))
    }

    pub fn max_signed(&mut self, w: Width) -> TermId {
        self.bv_const(BitVec::max_signed(w))
    }

    pub fn bool_const(&mut self, b: bool) -> TermId {
        self.build(Kind::BoolConst(b))
    }

    pub fn tru(&mut self) -> TermId {
        self.bool_const(true)
    }

    pub fn fals(&mut self) -> TermId {
        self.bool_const(false)
    }

    pub fn var(&mut self, v: VarId) -> TermId {
        self.build(Kind::Var(v))
    }

    pub fn un(&mut self, op: BvUnOp, a: TermId) -> TermId {
        self.build(Kind::BvUn(op, a))
    }

    pub fn bvnot(&mut self, a: TermId) -> TermId {
        self.un(BvUnOp::Not, a)
    }

    pub fn neg(&mut self, a: TermId) -> TermId {
        self.un(BvUnOp::Neg, a)
    }

    pub fn bin(&mut self, op: BvBinOp, a: TermId, b: TermId) -> TermId {
        self.build(Kind::BvBin(op, a, b))
    }

    pub fn add(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::Add, a, b)
    }

    /// `a - b`, represented as `a + (-b)`.
    pub fn sub(&mut self, a: TermId, b: TermId) -> TermId {
        let nb = self.neg(b);
        self.add(a, nb)
    }

    pub fn mul(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::Mul, a, b)
    }

    pub fn bvand(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::And, a, b)
    }

    pub fn bvor(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::Or, a, b)
    }

    pub fn shl(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::Shl, a, b)
    }

    pub fn lshr(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::Lshr, a, b)
    }

    pub fn ashr(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::Ashr, a, b)
    }

    pub fn udiv(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::Udiv, a, b)
    }

    pub fn urem(&mut self, a: TermId, b: TermId) -> TermId {
        self.bin(BvBinOp::Urem, a, b)
    }

    pub fn concat(&mut self, a: TermId, b: TermId) -> TermId {
        self.build(Kind::Concat(a, b))
    }

    pub fn extract(&mut self, hi: u32, lo: u32, arg: TermId) -> TermId {
        self.build(Kind::Extract { hi, lo, arg })
    }

    pub fn rel(&mut self, r: Relation, a: TermId, b: TermId) -> TermId {
        self.build(Kind::Rel(r, a, b))
    }

    pub fn eq(&mut self, a: TermId, b: TermId) -> TermId {
        self.rel(Relation::Eq, a, b)
    }

    pub fn ne(&mut self, a: TermId, b: TermId) -> TermId {
        self.rel(Relation::Ne, a, b)
    }

    pub fn not(&mut self, a: TermId) -> TermId {
        self.build(Kind::Not(a))
    }

    pub fn and(&mut self, xs: Vec<TermId>) -> TermId {
        if xs.is_empty() {
            return self.tru();
        }
        self.build(Kind::And(xs))
    }

    pub fn or(&mut self, xs: Vec<TermId>) -> TermId {
        if xs.is_empty() {
            return self.fals();
        }
        self.build(Kind::Or(xs))
    }

    pub fn and2(&mut self, a: TermId, b: TermId) -> TermId {
        self.and(vec![a, b])
    }

    pub fn or2(&mut self, a: TermId, b: TermId) -> TermId {
        self.or(vec![a, b])
    }

    pub fn implies(&mut self, a: TermId, b: TermId) -> TermId {
        self.build(Kind::Implies(a, b))
    }

    pub fn iff(&mut self, a: TermId, b: TermId) -> TermId {
        self.build(Kind::Iff(a, b))
    }

    pub fn ite(&mut self, c: TermId, a: TermId, b: TermId) -> TermId {
        self.build(Kind::Ite(c, a, b))
    }

    pub fn choice(&mut self, v: VarId, body: TermId) -> TermId {
        self.build(Kind::Choice(v, body))
    }

    /// Reserved placeholder variable of the given sort, used to describe
    /// choice bodies before a bound variable is picked.
    pub fn hole_var(&mut self, sort: Sort) -> VarId {
        if let Some(v) = self.holes.get(&sort) {
            return *v;
        }
        let name = match sort {
            Sort::Bool => "hole!b".to_string(),
            Sort::Bv(w) => format!("hole!{}", w),
        };
        let v = self.new_var(name, sort);
        self.holes.insert(sort, v);
        v
    }

    /// `choice y. body[y/hole]` for a fresh `y`. Equal `(hole, body)` pairs
    /// yield the same term, so repeated constructions stay identical.
    pub fn canonical_choice(&mut self, hole: VarId, body: TermId) -> TermId {
        if let Some(c) = self.choices.get(&(hole, body)) {
            return *c;
        }
        let y = self.fresh_var("eps", self.var_sort(hole));
        let yt = self.var(y);
        let b = self.substitute1(body, hole, yt).expect("same sort");
        let c = self.choice(y, b);
        self.choices.insert((hole, body), c);
        c
    }

    pub fn forall(&mut self, vs: Vec<VarId>, body: TermId) -> TermId {
        self.build(Kind::Forall(vs, body))
    }

    pub fn exists(&mut self, vs: Vec<VarId>, body: TermId) -> TermId {
        self.build(Kind::Exists(vs, body))
    }

    /// Simultaneous substitution of free occurrences.
    pub fn substitute(&mut self, t: TermId, map: &FxHashMap<VarId, TermId>) -> Result<TermId, TermError> {
        for (v, r) in map {
            if self.var_sort(*v) != self.sort(*r) {
                return Err(sort_err(
                    "substitute",
                    format!("{} : {} replaced by {}", self.var_name(*v), self.var_sort(*v), self.sort(*r)),
                ));
            }
        }
        let mut memo = FxHashMap::default();
        self.subst_rec(t, map, &mut memo)
    }

    /// Substitution of a single variable.
    pub fn substitute1(&mut self, t: TermId, v: VarId, r: TermId) -> Result<TermId, TermError> {
        let mut map = FxHashMap::default();
        map.insert(v, r);
        self.substitute(t, &map)
    }

    fn subst_rec(
        &mut self,
        t: TermId,
        map: &FxHashMap<VarId, TermId>,
        memo: &mut FxHashMap<TermId, TermId>,
    ) -> Result<TermId, TermError> {
        if let Some(&r) = memo.get(&t) {
            return Ok(r);
        }
        if !self.free_vars(t).iter().any(|v| map.contains_key(v)) {
            return Ok(t);
        }
        let kind = self.kind(t).clone();
        let result = match &kind {
            Kind::Var(v) => map[v],
            k if k.is_binder() => {
                let mut bound = k.bound_vars().to_vec();
                let mut body = k.children()[0];
                // rename bound variables that a replacement would capture
                let captured: Vec<VarId> = bound
                    .iter()
                    .copied()
                    .filter(|b| {
                        map.iter().any(|(v, r)| {
                            !bound.contains(v) && self.has_free_var(body, *v) && self.has_free_var(*r, *b)
                        })
                    })
                    .collect();
                if !captured.is_empty() {
                    let mut renaming = FxHashMap::default();
                    for b in captured {
                        let name = self.var_name(b).to_string();
                        let nb = self.fresh_var(&name, self.var_sort(b));
                        renaming.insert(b, self.var(nb));
                        for slot in bound.iter_mut().filter(|s| **s == b) {
                            *slot = nb;
                        }
                    }
                    body = self.subst_rec(body, &renaming, &mut FxHashMap::default())?;
                }
                let k = &match k {
                    Kind::Forall(..) => Kind::Forall(bound.clone(), body),
                    Kind::Exists(..) => Kind::Exists(bound.clone(), body),
                    Kind::Choice(..) => Kind::Choice(bound[0], body),
                    _ => unreachable!("binder kinds"),
                };
                let bound = &bound;
                if bound.iter().any(|b| map.contains_key(b)) {
                    let inner: FxHashMap<VarId, TermId> =
                        map.iter().filter(|(v, _)| !bound.contains(v)).map(|(v, r)| (*v, *r)).collect();
                    let mut inner_memo = FxHashMap::default();
                    let nb = self.subst_rec(body, &inner, &mut inner_memo)?;
                    self.mk(k.with_children(&[nb]))?
                } else {
                    let nb = self.subst_rec(body, map, memo)?;
                    self.mk(k.with_children(&[nb]))?
                }
            }
            k => {
                let ch = k.children();
                let mut nch = Vec::with_capacity(ch.len());
                for c in ch {
                    nch.push(self.subst_rec(c, map, memo)?);
                }
                self.mk(k.with_children(&nch))?
            }
        };
        memo.insert(t, result);
        Ok(result)
    }

    /// Number of free occurrences of `x` in `t`, counting shared subterms
    /// once per path.
    pub fn occurrences(&self, x: VarId, t: TermId) -> u64 {
        let mut memo = FxHashMap::default();
        self.occ_rec(x, t, &mut memo)
    }

    fn occ_rec(&self, x: VarId, t: TermId, memo: &mut FxHashMap<TermId, u64>) -> u64 {
        if !self.has_free_var(t, x) {
            return 0;
        }
        if let Some(&n) = memo.get(&t) {
            return n;
        }
        let n = match self.kind(t) {
            Kind::Var(_) => 1,
            k => k.children().into_iter().fold(0u64, |acc, c| acc.saturating_add(self.occ_rec(x, c, memo))),
        };
        memo.insert(t, n);
        n
    }

    pub fn is_linear_in(&self, x: VarId, t: TermId) -> bool {
        self.occurrences(x, t) == 1
    }

    pub fn is_quantifier_free(&self, t: TermId) -> bool {
        self.all_nodes(t, |k| !matches!(k, Kind::Forall(..) | Kind::Exists(..)))
    }

    pub fn is_choice_free(&self, t: TermId) -> bool {
        self.all_nodes(t, |k| !matches!(k, Kind::Choice(..)))
    }

    fn all_nodes(&self, t: TermId, pred: impl Fn(&Kind) -> bool) -> bool {
        let mut seen = FxHashSet::default();
        let mut stack = vec![t];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            let k = self.kind(n);
            if !pred(k) {
                return false;
            }
            stack.extend(k.children());
        }
        true
    }

    /// Subterms reachable from `t` in post-order (children before parents),
    /// each listed once.
    pub fn post_order(&self, t: TermId) -> Vec<TermId> {
        let mut out = Vec::new();
        let mut seen = FxHashSet::default();
        let mut stack = vec![(t, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                out.push(n);
                continue;
            }
            if !seen.insert(n) {
                continue;
            }
            stack.push((n, true));
            for c in self.kind(n).children().into_iter().rev() {
                if !seen.contains(&c) {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Relation atoms of `phi` with the polarity of each occurrence. Atoms
    /// under `iff`, or in the condition of an `ite`, occur with both
    /// polarities. Each (polarity, atom) pair is reported once, in order of
    /// first occurrence.
    pub fn literals(&self, phi: TermId) -> Vec<Literal> {
        let mut out = Vec::new();
        let mut seen = FxHashSet::default();
        let mut visited = FxHashSet::default();
        self.lits_rec(phi, Some(true), &mut out, &mut seen, &mut visited);
        out
    }

    // polarity None means both
    fn lits_rec(
        &self,
        t: TermId,
        pol: Option<bool>,
        out: &mut Vec<Literal>,
        seen: &mut FxHashSet<Literal>,
        visited: &mut FxHashSet<(TermId, Option<bool>)>,
    ) {
        if !visited.insert((t, pol)) {
            return;
        }
        let mut push = |positive: bool, out: &mut Vec<Literal>| {
            let l = Literal { positive, atom: t };
            if seen.insert(l) {
                out.push(l);
            }
        };
        match self.kind(t) {
            Kind::Rel(_, a, b) => {
                match pol {
                    Some(p) => push(p, out),
                    None => {
                        push(true, out);
                        push(false, out);
                    }
                }
                // relation atoms hidden in bit-vector ite conditions
                for c in [*a, *b] {
                    self.bv_ite_lits(c, out, seen, visited);
                }
            }
            Kind::Not(a) => self.lits_rec(*a, pol.map(|p| !p), out, seen, visited),
            Kind::And(xs) | Kind::Or(xs) => {
                for x in xs.clone() {
                    self.lits_rec(x, pol, out, seen, visited);
                }
            }
            Kind::Implies(a, b) => {
                self.lits_rec(*a, pol.map(|p| !p), out, seen, visited);
                self.lits_rec(*b, pol, out, seen, visited);
            }
            Kind::Iff(a, b) => {
                self.lits_rec(*a, None, out, seen, visited);
                self.lits_rec(*b, None, out, seen, visited);
            }
            Kind::Ite(c, a, b) => {
                self.lits_rec(*c, None, out, seen, visited);
                self.lits_rec(*a, pol, out, seen, visited);
                self.lits_rec(*b, pol, out, seen, visited);
            }
            _ => {}
        }
    }

    fn bv_ite_lits(
        &self,
        t: TermId,
        out: &mut Vec<Literal>,
        seen: &mut FxHashSet<Literal>,
        visited: &mut FxHashSet<(TermId, Option<bool>)>,
    ) {
        for n in self.post_order(t) {
            if let Kind::Ite(c, _, _) = self.kind(n) {
                if self.sort(n) != Sort::Bool {
                    self.lits_rec(*c, None, out, seen, visited);
                }
            }
        }
    }

    /// SMT-LIB rendering of `t`.
    pub fn display(&self, t: TermId) -> String {
        SmtPrinter::new(self).term(t)
    }
}

impl Literal {
    pub fn new(positive: bool, atom: TermId) -> Self {
        Literal { positive, atom }
    }

    /// `(lhs, rel, rhs)` such that the literal holds iff `lhs rel rhs`.
    pub fn oriented(&self, tm: &TermManager) -> Option<(TermId, Relation, TermId)> {
        match tm.kind(self.atom) {
            Kind::Rel(r, a, b) => {
                let r = if self.positive { *r } else { r.negate() };
                Some((*a, r, *b))
            }
            _ => None,
        }
    }

    /// The literal as a formula.
    pub fn to_term(&self, tm: &mut TermManager) -> TermId {
        if self.positive {
            self.atom
        } else {
            tm.not(self.atom)
        }
    }
}
