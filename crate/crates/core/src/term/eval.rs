use rustc_hash::FxHashMap;
use thiserror::Error;

use super::{Kind, Sort, TermId, TermManager, VarId};
use crate::bv::{BitVec, BvBinOp, BvUnOp, Relation, Width};

/// Default cap on the width of quantified and choice-bound variables for
/// exhaustive evaluation.
pub const DEFAULT_EVAL_CAP: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Bv(BitVec),
    Bool(bool),
}

impl Value {
    pub fn as_bv(self) -> Option<BitVec> {
        match self {
            Value::Bv(b) => Some(b),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Bv(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value assigned to variable {0}")]
    Unassigned(String),
    #[error("cannot enumerate a bound variable of width {width} (cap {cap})")]
    Cap { width: u32, cap: u32 },
    #[error("term is not quantifier- and choice-free")]
    NotGround,
}

/// Assignment of values to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interpretation {
    values: Vec<Option<Value>>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: VarId, val: Value) {
        let i = v.index();
        if self.values.len() <= i {
            self.values.resize(i + 1, None);
        }
        self.values[i] = Some(val);
    }

    pub fn set_bv(&mut self, v: VarId, val: BitVec) {
        self.set(v, Value::Bv(val));
    }

    pub fn unset(&mut self, v: VarId) {
        if let Some(slot) = self.values.get_mut(v.index()) {
            *slot = None;
        }
    }

    pub fn get(&self, v: VarId) -> Option<Value> {
        self.values.get(v.index()).copied().flatten()
    }

    pub fn get_bv(&self, v: VarId) -> Option<BitVec> {
        self.get(v).and_then(Value::as_bv)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, Value)> + '_ {
        self.values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (VarId(i as u32), v)))
    }

    /// Copy restricted to the given variables.
    pub fn restrict(&self, vars: &[VarId]) -> Interpretation {
        let mut out = Interpretation::new();
        for &v in vars {
            if let Some(val) = self.get(v) {
                out.set(v, val);
            }
        }
        out
    }
}

/// Recursive evaluator with exhaustive semantics for quantifiers and choice.
///
/// Choice terms evaluate to the smallest satisfying value, or zero when the
/// body is unsatisfiable.
pub struct Evaluator<'a> {
    tm: &'a TermManager,
    cap: u32,
    // memo tables indexed by binder depth
    memos: Vec<FxHashMap<TermId, Value>>,
    var_level: FxHashMap<VarId, usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(tm: &'a TermManager) -> Self {
        Self::with_cap(tm, DEFAULT_EVAL_CAP)
    }

    pub fn with_cap(tm: &'a TermManager, cap: u32) -> Self {
        Evaluator { tm, cap, memos: vec![FxHashMap::default()], var_level: FxHashMap::default() }
    }

    pub fn eval(&mut self, t: TermId, env: &Interpretation) -> Result<Value, EvalError> {
        self.memos.truncate(1);
        self.memos[0].clear();
        self.var_level.clear();
        let mut env = env.clone();
        self.rec(t, &mut env)
    }

    pub fn eval_bool(&mut self, t: TermId, env: &Interpretation) -> Result<bool, EvalError> {
        Ok(self.eval(t, env)?.as_bool().expect("Boolean term"))
    }

    pub fn eval_bv(&mut self, t: TermId, env: &Interpretation) -> Result<BitVec, EvalError> {
        Ok(self.eval(t, env)?.as_bv().expect("bit-vector term"))
    }

    fn level(&self, t: TermId) -> usize {
        self.tm.free_vars(t).iter().map(|v| self.var_level.get(v).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    fn rec(&mut self, t: TermId, env: &mut Interpretation) -> Result<Value, EvalError> {
        let lvl = self.level(t);
        if let Some(v) = self.memos[lvl].get(&t) {
            return Ok(*v);
        }
        let tm = self.tm;
        let v = match tm.kind(t) {
            Kind::BvConst(c) => Value::Bv(*c),
            Kind::BoolConst(b) => Value::Bool(*b),
            Kind::Var(x) => env.get(*x).ok_or_else(|| EvalError::Unassigned(tm.var_name(*x).to_string()))?,
            Kind::BvUn(op, a) => {
                let a = self.bv(*a, env)?;
                Value::Bv(BitVec::unop(*op, a))
            }
            Kind::BvBin(op, a, b) => {
                let a = self.bv(*a, env)?;
                let b = self.bv(*b, env)?;
                Value::Bv(BitVec::binop(*op, a, b).expect("sort-checked"))
            }
            Kind::Concat(a, b) => {
                let a = self.bv(*a, env)?;
                let b = self.bv(*b, env)?;
                Value::Bv(BitVec::concat(a, b).expect("sort-checked"))
            }
            Kind::Extract { hi, lo, arg } => {
                let a = self.bv(*arg, env)?;
                Value::Bv(BitVec::extract(a, *hi, *lo).expect("sort-checked"))
            }
            Kind::Rel(r, a, b) => {
                let a = self.bv(*a, env)?;
                let b = self.bv(*b, env)?;
                Value::Bool(BitVec::compare(*r, a, b).expect("sort-checked"))
            }
            Kind::Not(a) => Value::Bool(!self.b(*a, env)?),
            Kind::And(xs) => {
                let mut acc = true;
                for x in xs {
                    if !self.b(*x, env)? {
                        acc = false;
                        break;
                    }
                }
                Value::Bool(acc)
            }
            Kind::Or(xs) => {
                let mut acc = false;
                for x in xs {
                    if self.b(*x, env)? {
                        acc = true;
                        break;
                    }
                }
                Value::Bool(acc)
            }
            Kind::Implies(a, b) => Value::Bool(!self.b(*a, env)? || self.b(*b, env)?),
            Kind::Iff(a, b) => Value::Bool(self.b(*a, env)? == self.b(*b, env)?),
            Kind::Ite(c, a, b) => {
                if self.b(*c, env)? {
                    self.rec(*a, env)?
                } else {
                    self.rec(*b, env)?
                }
            }
            Kind::Choice(y, body) => {
                let w = tm.var_width(*y);
                let mut found = BitVec::zero(w);
                let mut hit = false;
                self.enumerate(&[*y], env, &mut |ev, env| {
                    if ev.b(*body, env)? {
                        found = env.get_bv(*y).expect("bound");
                        hit = true;
                        return Ok(true);
                    }
                    Ok(false)
                })?;
                let _ = hit;
                Value::Bv(found)
            }
            Kind::Forall(vs, body) => {
                let mut all = true;
                self.enumerate(vs, env, &mut |ev, env| {
                    if !ev.b(*body, env)? {
                        all = false;
                        return Ok(true);
                    }
                    Ok(false)
                })?;
                Value::Bool(all)
            }
            Kind::Exists(vs, body) => {
                let mut any = false;
                self.enumerate(vs, env, &mut |ev, env| {
                    if ev.b(*body, env)? {
                        any = true;
                        return Ok(true);
                    }
                    Ok(false)
                })?;
                Value::Bool(any)
            }
        };
        self.memos[lvl].insert(t, v);
        Ok(v)
    }

    /// Runs `f` for every assignment to `vs` in ascending lexicographic order
    /// (first variable most significant) until it returns `true`.
    fn enumerate(
        &mut self,
        vs: &[VarId],
        env: &mut Interpretation,
        f: &mut dyn FnMut(&mut Self, &mut Interpretation) -> Result<bool, EvalError>,
    ) -> Result<(), EvalError> {
        let mut widths = Vec::with_capacity(vs.len());
        for v in vs {
            match self.tm.var_sort(*v) {
                Sort::Bv(w) if w.bits() <= self.cap => widths.push(w),
                Sort::Bv(w) => return Err(EvalError::Cap { width: w.bits(), cap: self.cap }),
                Sort::Bool => widths.push(Width::new(1).expect("width 1")),
            }
        }
        let depth = self.memos.len();
        self.memos.push(FxHashMap::default());
        let saved: Vec<Option<Value>> = vs.iter().map(|v| env.get(*v)).collect();
        let saved_levels: Vec<Option<usize>> = vs.iter().map(|v| self.var_level.insert(*v, depth)).collect();

        let mut digits = vec![0u64; vs.len()];
        let result = loop {
            for (i, v) in vs.iter().enumerate() {
                let val = match self.tm.var_sort(*v) {
                    Sort::Bool => Value::Bool(digits[i] == 1),
                    Sort::Bv(w) => Value::Bv(BitVec::truncating(w, digits[i])),
                };
                env.set(*v, val);
            }
            self.memos[depth].clear();
            match f(self, env) {
                Ok(true) => break Ok(()),
                Ok(false) => {}
                Err(e) => break Err(e),
            }
            // increment, last variable least significant
            let mut i = vs.len();
            let done = loop {
                if i == 0 {
                    break true;
                }
                i -= 1;
                if digits[i] < widths[i].mask() {
                    digits[i] += 1;
                    for d in digits.iter_mut().skip(i + 1) {
                        *d = 0;
                    }
                    break false;
                }
            };
            if done {
                break Ok(());
            }
        };

        self.memos.truncate(depth);
        for (v, old) in vs.iter().zip(saved) {
            match old {
                Some(val) => env.set(*v, val),
                None => env.unset(*v),
            }
        }
        for (v, old) in vs.iter().zip(saved_levels) {
            match old {
                Some(l) => {
                    self.var_level.insert(*v, l);
                }
                None => {
                    self.var_level.remove(v);
                }
            }
        }
        result
    }

    fn bv(&mut self, t: TermId, env: &mut Interpretation) -> Result<BitVec, EvalError> {
        Ok(self.rec(t, env)?.as_bv().expect("sort-checked"))
    }

    fn b(&mut self, t: TermId, env: &mut Interpretation) -> Result<bool, EvalError> {
        Ok(self.rec(t, env)?.as_bool().expect("sort-checked"))
    }
}

impl TermManager {
    /// Evaluates `t` with the default quantifier cap.
    pub fn evaluate(&self, t: TermId, env: &Interpretation) -> Result<Value, EvalError> {
        Evaluator::new(self).eval(t, env)
    }
}

#[derive(Debug, Clone)]
enum Instr {
    Const(u64),
    Input(usize),
    Not(usize),
    Neg(usize),
    Bin(BvBinOp, usize, usize),
    Concat(usize, usize, u32),
    Extract(usize, u32),
    Rel(Relation, usize, usize),
    BoolNot(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
    Implies(usize, usize),
    Iff(usize, usize),
    Ite(usize, usize, usize),
}

/// A quantifier- and choice-free term flattened into straight-line code for
/// fast repeated evaluation. Booleans are represented as 0/1.
#[derive(Debug, Clone)]
pub struct CompiledTerm {
    code: Vec<(Instr, Width)>,
    inputs: Vec<VarId>,
}

impl CompiledTerm {
    pub fn new(tm: &TermManager, root: TermId) -> Result<Self, EvalError> {
        let order = tm.post_order(root);
        let mut slot: FxHashMap<TermId, usize> = FxHashMap::default();
        let mut code = Vec::with_capacity(order.len());
        let inputs: Vec<VarId> = tm.free_vars(root).to_vec();
        let one = Width::new(1).expect("width 1");
        for n in order {
            let s = |c: &TermId| slot[c];
            let w = tm.sort(n).width().unwrap_or(one);
            let ins = match tm.kind(n) {
                Kind::BvConst(c) => Instr::Const(c.value()),
                Kind::BoolConst(b) => Instr::Const(*b as u64),
                Kind::Var(v) => Instr::Input(inputs.binary_search(v).expect("free var")),
                Kind::BvUn(BvUnOp::Not, a) => Instr::Not(s(a)),
                Kind::BvUn(BvUnOp::Neg, a) => Instr::Neg(s(a)),
                Kind::BvBin(op, a, b) => Instr::Bin(*op, s(a), s(b)),
                Kind::Concat(a, b) => Instr::Concat(s(a), s(b), tm.width(*b).bits()),
                Kind::Extract { lo, arg, .. } => Instr::Extract(s(arg), *lo),
                Kind::Rel(r, a, b) => Instr::Rel(*r, s(a), s(b)),
                Kind::Not(a) => Instr::BoolNot(s(a)),
                Kind::And(xs) => Instr::And(xs.iter().map(s).collect()),
                Kind::Or(xs) => Instr::Or(xs.iter().map(s).collect()),
                Kind::Implies(a, b) => Instr::Implies(s(a), s(b)),
                Kind::Iff(a, b) => Instr::Iff(s(a), s(b)),
                Kind::Ite(c, a, b) => Instr::Ite(s(c), s(a), s(b)),
                Kind::Choice(..) | Kind::Forall(..) | Kind::Exists(..) => return Err(EvalError::NotGround),
            };
            slot.insert(n, code.len());
            code.push((ins, w));
        }
        Ok(CompiledTerm { code, inputs })
    }

    /// Free variables in the order expected by [`CompiledTerm::eval`].
    pub fn inputs(&self) -> &[VarId] {
        &self.inputs
    }

    /// Evaluates with `inputs[i]` bound to `vals[i]`, using `scratch` as the
    /// register file. Returns the raw (masked) root value.
    pub fn eval_with(&self, vals: &[u64], scratch: &mut Vec<u64>) -> u64 {
        scratch.clear();
        scratch.reserve(self.code.len());
        for (ins, w) in &self.code {
            let m = w.mask();
            let r = |i: &usize| scratch[*i];
            let v = match ins {
                Instr::Const(c) => *c,
                Instr::Input(i) => vals[*i],
                Instr::Not(a) => !r(a) & m,
                Instr::Neg(a) => r(a).wrapping_neg() & m,
                Instr::Bin(op, a, b) => {
                    let (x, y) = (r(a), r(b));
                    match op {
                        BvBinOp::Add => x.wrapping_add(y) & m,
                        BvBinOp::Mul => x.wrapping_mul(y) & m,
                        BvBinOp::And => x & y,
                        BvBinOp::Or => x | y,
                        _ => BitVec::binop(*op, BitVec::truncating(*w, x), BitVec::truncating(*w, y))
                            .expect("same width")
                            .value(),
                    }
                }
                Instr::Concat(a, b, wb) => (r(a) << wb) | r(b),
                Instr::Extract(a, lo) => (r(a) >> lo) & m,
                Instr::Rel(rel, a, b) => {
                    // operand width is recovered from the operand instruction
                    let ow = self.code[*a].1;
                    BitVec::compare(*rel, BitVec::truncating(ow, r(a)), BitVec::truncating(ow, r(b)))
                        .expect("same width") as u64
                }
                Instr::BoolNot(a) => 1 - r(a),
                Instr::And(xs) => xs.iter().all(|x| scratch[*x] == 1) as u64,
                Instr::Or(xs) => xs.iter().any(|x| scratch[*x] == 1) as u64,
                Instr::Implies(a, b) => (r(a) == 0 || r(b) == 1) as u64,
                Instr::Iff(a, b) => (r(a) == r(b)) as u64,
                Instr::Ite(c, a, b) => {
                    if r(c) == 1 {
                        r(a)
                    } else {
                        r(b)
                    }
                }
            };
            scratch.push(v);
        }
        *scratch.last().expect("non-empty code")
    }

    pub fn eval(&self, vals: &[u64]) -> u64 {
        let mut scratch = Vec::new();
        self.eval_with(vals, &mut scratch)
    }
}
