//! Shared generators and a plain-integer reference semantics used as the
//! oracle by the integration tests.

#![allow(dead_code)]

pub mod linear;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config as PtConfig, RngAlgorithm, TestRng, TestRunner};

use invbv::bv::{BvBinOp, BvUnOp, Relation, Width};
use invbv::term::{Sort, TermId, TermManager, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum E {
    Var(usize),
    Const(u64),
    Un(BvUnOp, Box<E>),
    Bin(BvBinOp, Box<E>, Box<E>),
    Sub(Box<E>, Box<E>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum F {
    Rel(Relation, E, E),
    Not(Box<F>),
    And(Box<F>, Box<F>),
    Or(Box<F>, Box<F>),
    Implies(Box<F>, Box<F>),
}

pub const UNOPS: [BvUnOp; 2] = [BvUnOp::Not, BvUnOp::Neg];

pub fn mask(w: u32) -> u64 {
    if w == 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

fn sext(v: u64, w: u32) -> i64 {
    ((v << (64 - w)) as i64) >> (64 - w)
}

/// Reference semantics on raw integers.
pub fn ref_unop(op: BvUnOp, a: u64, w: u32) -> u64 {
    let m = mask(w);
    match op {
        BvUnOp::Not => !a & m,
        BvUnOp::Neg => a.wrapping_neg() & m,
    }
}

pub fn ref_binop(op: BvBinOp, a: u64, b: u64, w: u32) -> u64 {
    let m = mask(w);
    let r = match op {
        BvBinOp::Add => (a as u128 + b as u128) as u64,
        BvBinOp::Mul => (a as u128 * b as u128) as u64,
        BvBinOp::And => a & b,
        BvBinOp::Or => a | b,
        BvBinOp::Shl => {
            if b >= w as u64 {
                0
            } else {
                a << b
            }
        }
        BvBinOp::Lshr => {
            if b >= w as u64 {
                0
            } else {
                a >> b
            }
        }
        BvBinOp::Ashr => {
            let s = sext(a, w);
            (if b >= w as u64 { s >> 63 } else { s >> b }) as u64
        }
        BvBinOp::Udiv => a.checked_div(b).unwrap_or(m),
        BvBinOp::Urem => {
            if b == 0 {
                a
            } else {
                a % b
            }
        }
    };
    r & m
}

pub fn ref_rel(rel: Relation, a: u64, b: u64, w: u32) -> bool {
    let (sa, sb) = (sext(a, w), sext(b, w));
    match rel {
        Relation::Eq => a == b,
        Relation::Ne => a != b,
        Relation::Ult => a < b,
        Relation::Ugt => a > b,
        Relation::Ule => a <= b,
        Relation::Uge => a >= b,
        Relation::Slt => sa < sb,
        Relation::Sgt => sa > sb,
        Relation::Sle => sa <= sb,
        Relation::Sge => sa >= sb,
    }
}

pub fn eval_e(e: &E, vals: &[u64], w: u32) -> u64 {
    match e {
        E::Var(i) => vals[*i],
        E::Const(c) => c & mask(w),
        E::Un(op, a) => ref_unop(*op, eval_e(a, vals, w), w),
        E::Bin(op, a, b) => ref_binop(*op, eval_e(a, vals, w), eval_e(b, vals, w), w),
        E::Sub(a, b) => eval_e(a, vals, w).wrapping_sub(eval_e(b, vals, w)) & mask(w),
    }
}

pub fn eval_f(f: &F, vals: &[u64], w: u32) -> bool {
    match f {
        F::Rel(r, a, b) => ref_rel(*r, eval_e(a, vals, w), eval_e(b, vals, w), w),
        F::Not(a) => !eval_f(a, vals, w),
        F::And(a, b) => eval_f(a, vals, w) && eval_f(b, vals, w),
        F::Or(a, b) => eval_f(a, vals, w) || eval_f(b, vals, w),
        F::Implies(a, b) => !eval_f(a, vals, w) || eval_f(b, vals, w),
    }
}

pub fn e_ops(e: &E) -> usize {
    match e {
        E::Var(_) | E::Const(_) => 0,
        E::Un(_, a) => 1 + e_ops(a),
        E::Bin(_, a, b) | E::Sub(a, b) => 1 + e_ops(a) + e_ops(b),
    }
}

/// Operator count: bit-vector operators, relations and connectives.
pub fn f_ops(f: &F) -> usize {
    match f {
        F::Rel(_, a, b) => 1 + e_ops(a) + e_ops(b),
        F::Not(a) => 1 + f_ops(a),
        F::And(a, b) | F::Or(a, b) | F::Implies(a, b) => 1 + f_ops(a) + f_ops(b),
    }
}

pub fn e_uses(e: &E, i: usize) -> usize {
    match e {
        E::Var(j) => (*j == i) as usize,
        E::Const(_) => 0,
        E::Un(_, a) => e_uses(a, i),
        E::Bin(_, a, b) | E::Sub(a, b) => e_uses(a, i) + e_uses(b, i),
    }
}

pub fn build_e(tm: &mut TermManager, e: &E, vars: &[VarId], w: Width) -> TermId {
    match e {
        E::Var(i) => tm.var(vars[*i]),
        E::Const(c) => tm.bv_u64(w, c & w.mask()),
        E::Un(op, a) => {
            let a = build_e(tm, a, vars, w);
            tm.un(*op, a)
        }
        E::Bin(op, a, b) => {
            let a = build_e(tm, a, vars, w);
            let b = build_e(tm, b, vars, w);
            tm.bin(*op, a, b)
        }
        E::Sub(a, b) => {
            let a = build_e(tm, a, vars, w);
            let b = build_e(tm, b, vars, w);
            tm.sub(a, b)
        }
    }
}

pub fn build_f(tm: &mut TermManager, f: &F, vars: &[VarId], w: Width) -> TermId {
    match f {
        F::Rel(r, a, b) => {
            let a = build_e(tm, a, vars, w);
            let b = build_e(tm, b, vars, w);
            tm.rel(*r, a, b)
        }
        F::Not(a) => {
            let a = build_f(tm, a, vars, w);
            tm.not(a)
        }
        F::And(a, b) => {
            let (a, b) = (build_f(tm, a, vars, w), build_f(tm, b, vars, w));
            tm.and2(a, b)
        }
        F::Or(a, b) => {
            let (a, b) = (build_f(tm, a, vars, w), build_f(tm, b, vars, w));
            tm.or2(a, b)
        }
        F::Implies(a, b) => {
            let (a, b) = (build_f(tm, a, vars, w), build_f(tm, b, vars, w));
            tm.implies(a, b)
        }
    }
}

/// Declares `n` variables of width `w` named with `prefix`.
pub fn declare(tm: &mut TermManager, prefix: &str, n: usize, w: Width) -> Vec<VarId> {
    (0..n).map(|i| tm.new_var(format!("{prefix}{i}"), Sort::Bv(w))).collect()
}

pub fn arb_unop() -> impl Strategy<Value = BvUnOp> {
    prop::sample::select(UNOPS.to_vec())
}

pub fn arb_binop() -> impl Strategy<Value = BvBinOp> {
    prop::sample::select(BvBinOp::ALL.to_vec())
}

pub fn arb_rel() -> impl Strategy<Value = Relation> {
    prop::sample::select(Relation::ALL.to_vec())
}

/// Expressions over variables `0..nvars` with small constants favoured.
pub fn arb_expr(nvars: usize, depth: u32) -> BoxedStrategy<E> {
    let leaf = prop_oneof![
        3 => (0..nvars).prop_map(E::Var),
        1 => prop_oneof![Just(0u64), Just(1), Just(u64::MAX), any::<u64>()].prop_map(E::Const),
    ];
    leaf.prop_recursive(depth, 12, 2, |inner| {
        prop_oneof![
            1 => (arb_unop(), inner.clone()).prop_map(|(o, a)| E::Un(o, Box::new(a))),
            4 => (arb_binop(), inner.clone(), inner.clone())
                .prop_map(|(o, a, b)| E::Bin(o, Box::new(a), Box::new(b))),
            1 => (inner.clone(), inner).prop_map(|(a, b)| E::Sub(Box::new(a), Box::new(b))),
        ]
    })
    .boxed()
}

pub fn arb_formula(nvars: usize, max_ops: usize) -> BoxedStrategy<F> {
    let atom = (arb_rel(), arb_expr(nvars, 2), arb_expr(nvars, 2)).prop_map(|(r, a, b)| F::Rel(r, a, b));
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| F::Not(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| F::Implies(Box::new(a), Box::new(b))),
        ]
    })
    .prop_filter("operator budget", move |f| f_ops(f) <= max_ops)
    .boxed()
}

/// A quantified problem `forall x0..x(nu-1). matrix` with free variables
/// `nu..nu+nf`.
#[derive(Debug, Clone)]
pub struct QProblem {
    pub width: u32,
    pub nu: usize,
    pub nf: usize,
    pub matrix: F,
}

pub fn arb_qproblem(max_width: u32, max_ops: usize) -> impl Strategy<Value = QProblem> {
    (1..=max_width, 1..=2usize, 0..=2usize).prop_flat_map(move |(width, nu, nf)| {
        arb_formula(nu + nf, max_ops).prop_map(move |matrix| QProblem { width, nu, nf, matrix })
    })
}

fn assignments(n: usize, w: u32) -> impl Iterator<Item = Vec<u64>> {
    let card = 1u64 << w;
    let total = card.pow(n as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0u64; n];
        for slot in v.iter_mut() {
            *slot = k % card;
            k /= card;
        }
        v
    })
}

/// Whether `forall x. matrix` holds when the free variables take `frees`.
pub fn forall_holds(p: &QProblem, frees: &[u64]) -> bool {
    assignments(p.nu, p.width).all(|xs| {
        let mut vals = xs;
        vals.extend_from_slice(frees);
        eval_f(&p.matrix, &vals, p.width)
    })
}

/// Exhaustive truth of `exists y. forall x. matrix`.
pub fn qproblem_oracle(p: &QProblem) -> bool {
    assignments(p.nf, p.width).any(|ys| forall_holds(p, &ys))
}

/// Exhaustive satisfiability of a quantifier-free formula over `n`
/// variables.
pub fn qf_oracle(f: &F, n: usize, w: u32) -> bool {
    assignments(n, w).any(|v| eval_f(f, &v, w))
}

/// Deterministic sampling from a strategy, for tests that need a fixed
/// corpus rather than shrinking.
pub struct Sampler {
    runner: TestRunner,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&seed.to_le_bytes());
        let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &bytes);
        Sampler { runner: TestRunner::new_with_rng(PtConfig::default(), rng) }
    }

    pub fn sample<S: Strategy>(&mut self, s: &S) -> S::Value {
        s.new_tree(&mut self.runner).expect("strategy generates values").current()
    }
}
