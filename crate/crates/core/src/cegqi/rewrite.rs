//! Equivalence-preserving word-level rewrites.
//!
//! The rule set is closed and deliberately small:
//! - sums are flattened and like terms collected: `x + x -> 2*x`,
//!   `x + -x -> 0`, `c1*x + c2*x -> (c1+c2)*x`, constants summed;
//! - `~~a -> a`, `--a -> a`;
//! - `a & a -> a`, `a | a -> a` over flattened chains;
//! - `extract` over `concat`, nested `extract`, and full-width `extract`
//!   are simplified;
//! - relations with syntactically equal sides fold to a constant.
//!
//! Sums are only rebuilt when collection changes something, so terms that
//! are already linear keep their shape.

use rustc_hash::FxHashMap;

use crate::bv::{BitVec, BvBinOp, BvUnOp, Relation, Width};
use crate::term::{Kind, TermId, TermManager};

pub fn rewrite(tm: &mut TermManager, t: TermId) -> TermId {
    let mut memo = FxHashMap::default();
    rw(tm, t, &mut memo)
}

fn rw(tm: &mut TermManager, t: TermId, memo: &mut FxHashMap<TermId, TermId>) -> TermId {
    if let Some(r) = memo.get(&t) {
        return *r;
    }
    let kind = tm.kind(t).clone();
    // binders are left alone: their bodies are produced by the solver
    let r = if kind.is_binder() || kind.children().is_empty() {
        t
    } else {
        let ch: Vec<TermId> = kind.children().iter().map(|c| rw(tm, *c, memo)).collect();
        let rebuilt = tm.mk(kind.with_children(&ch)).expect("rewriting preserves sorts");
        simplify(tm, rebuilt)
    };
    memo.insert(t, r);
    r
}

fn simplify(tm: &mut TermManager, t: TermId) -> TermId {
    match tm.kind(t).clone() {
        Kind::BvUn(op, a) => match tm.kind(a) {
            Kind::BvUn(op2, inner) if *op2 == op => *inner,
            _ => t,
        },
        Kind::BvBin(BvBinOp::Add, ..) => collect_sum(tm, t),
        Kind::BvBin(op @ (BvBinOp::And | BvBinOp::Or), ..) => {
            let mut xs = Vec::new();
            flatten(tm, t, op, &mut xs);
            let mut uniq: Vec<TermId> = Vec::new();
            for x in &xs {
                if !uniq.contains(x) {
                    uniq.push(*x);
                }
            }
            if uniq.len() == xs.len() {
                return t;
            }
            let mut acc = uniq[0];
            for &x in &uniq[1..] {
                acc = tm.bin(op, acc, x);
            }
            acc
        }
        Kind::Extract { hi, lo, arg } => simplify_extract(tm, hi, lo, arg),
        Kind::Rel(rel, a, b) if a == b => {
            let refl = matches!(rel, Relation::Eq | Relation::Ule | Relation::Uge | Relation::Sle | Relation::Sge);
            tm.bool_const(refl)
        }
        _ => t,
    }
}

fn flatten(tm: &TermManager, t: TermId, op: BvBinOp, out: &mut Vec<TermId>) {
    match tm.kind(t) {
        Kind::BvBin(o, a, b) if *o == op => {
            let (a, b) = (*a, *b);
            flatten(tm, a, op, out);
            flatten(tm, b, op, out);
        }
        _ => out.push(t),
    }
}

fn split_coefficient(tm: &TermManager, t: TermId, w: Width) -> (BitVec, TermId) {
    match tm.kind(t) {
        Kind::BvUn(BvUnOp::Neg, a) => (BitVec::ones(w), *a),
        Kind::BvBin(BvBinOp::Mul, a, b) => {
            if let Some(c) = tm.as_bv_const(*a) {
                (c, *b)
            } else if let Some(c) = tm.as_bv_const(*b) {
                (c, *a)
            } else {
                (BitVec::one(w), t)
            }
        }
        _ => (BitVec::one(w), t),
    }
}

fn collect_sum(tm: &mut TermManager, t: TermId) -> TermId {
    let w = tm.width(t);
    let mut xs = Vec::new();
    flatten(tm, t, BvBinOp::Add, &mut xs);
    let mut constant = BitVec::zero(w);
    let mut n_consts = 0;
    let mut groups: Vec<(TermId, BitVec)> = Vec::new();
    let mut merged = false;
    for &x in &xs {
        if let Some(c) = tm.as_bv_const(x) {
            constant = constant.bvadd(c).expect("same width");
            n_consts += 1;
            continue;
        }
        let (c, base) = split_coefficient(tm, x, w);
        match groups.iter_mut().find(|(b, _)| *b == base) {
            Some((_, acc)) => {
                *acc = acc.bvadd(c).expect("same width");
                merged = true;
            }
            None => groups.push((base, c)),
        }
    }
    if !merged && n_consts <= 1 {
        return t;
    }
    let mut terms = Vec::new();
    for (base, c) in groups {
        if c.value() == 0 {
            continue;
        }
        let term = if c.value() == 1 {
            base
        } else if c == BitVec::ones(w) {
            tm.neg(base)
        } else {
            let ct = tm.bv_const(c);
            tm.mul(ct, base)
        };
        terms.push(term);
    }
    if constant.value() != 0 || terms.is_empty() {
        terms.push(tm.bv_const(constant));
    }
    let mut acc = terms[0];
    for &x in &terms[1..] {
        acc = tm.add(acc, x);
    }
    acc
}

fn simplify_extract(tm: &mut TermManager, hi: u32, lo: u32, arg: TermId) -> TermId {
    let w = tm.width(arg).bits();
    if lo == 0 && hi + 1 == w {
        return arg;
    }
    match tm.kind(arg).clone() {
        Kind::Extract { lo: lo2, arg: inner, .. } => simplify_extract(tm, hi + lo2, lo + lo2, inner),
        Kind::Concat(a, b) => {
            let wb = tm.width(b).bits();
            if hi < wb {
                simplify_extract(tm, hi, lo, b)
            } else if lo >= wb {
                simplify_extract(tm, hi - wb, lo - wb, a)
            } else {
                let h = simplify_extract(tm, hi - wb, 0, a);
                let l = simplify_extract(tm, wb - 1, lo, b);
                tm.concat(h, l)
            }
        }
        _ => tm.extract(hi, lo, arg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Sort;

    #[test]
    fn doubled_variable() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let a = tm.new_var("a", Sort::bv(4));
        let (xt, at) = (tm.var(x), tm.var(a));
        let s = tm.add(xt, xt);
        let e = tm.eq(s, at);
        let r = rewrite(&mut tm, e);
        assert_eq!(tm.display(r), "(= (bvmul #b0010 x) a)");
        assert_eq!(tm.occurrences(x, r), 1);
    }

    #[test]
    fn cancellation_and_idempotence() {
        let mut tm = TermManager::new();
        let s = tm.new_var("s", Sort::bv(8));
        let t = tm.new_var("t", Sort::bv(8));
        let (st, tt) = (tm.var(s), tm.var(t));
        let d = tm.sub(tt, st);
        let back = tm.add(d, st);
        let e = tm.ne(back, tt);
        let r = rewrite(&mut tm, e);
        assert_eq!(tm.as_bool_const(r), Some(false));

        let a = tm.bvand(st, tt);
        let aa = tm.bvand(a, st);
        assert_eq!(rewrite(&mut tm, aa), a);
        let n = tm.bvnot(st);
        let nn = tm.bvnot(n);
        assert_eq!(rewrite(&mut tm, nn), st);
        let m = tm.neg(st);
        let mm = tm.neg(m);
        assert_eq!(rewrite(&mut tm, mm), st);
    }

    #[test]
    fn linear_terms_keep_shape() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let s = tm.new_var("s", Sort::bv(4));
        let (xt, st) = (tm.var(x), tm.var(s));
        let e = tm.add(xt, st);
        assert_eq!(rewrite(&mut tm, e), e);
    }

    #[test]
    fn extract_over_concat() {
        let mut tm = TermManager::new();
        let y = tm.new_var("y", Sort::bv(16));
        let z = tm.new_var("z", Sort::bv(16));
        let (yt, zt) = (tm.var(y), tm.var(z));
        let c = tm.concat(yt, zt);
        let hi = tm.extract(31, 16, c);
        let lo = tm.extract(15, 0, c);
        assert_eq!(rewrite(&mut tm, hi), yt);
        assert_eq!(rewrite(&mut tm, lo), zt);
        let mid = tm.extract(17, 14, c);
        let r = rewrite(&mut tm, mid);
        assert_eq!(tm.display(r), "(concat ((_ extract 1 0) y) ((_ extract 15 14) z))");
    }

    #[test]
    fn sums_preserve_values() {
        use crate::term::Interpretation;
        let mut tm = TermManager::new();
        let w = Width::new(4).unwrap();
        let x = tm.new_var("x", Sort::bv(4));
        let y = tm.new_var("y", Sort::bv(4));
        let (xt, yt) = (tm.var(x), tm.var(y));
        let three = tm.bv_u64(w, 3);
        let m = tm.mul(three, xt);
        let nx = tm.neg(xt);
        let s1 = tm.add(m, yt);
        let s2 = tm.add(s1, nx);
        let s3 = tm.add(s2, three);
        let s4 = tm.add(s3, xt);
        let r = rewrite(&mut tm, s4);
        assert_eq!(tm.occurrences(x, r), 1);
        for xv in 0..16 {
            for yv in 0..16 {
                let mut env = Interpretation::new();
                env.set_bv(x, BitVec::new(w, xv).unwrap());
                env.set_bv(y, BitVec::new(w, yv).unwrap());
                assert_eq!(tm.evaluate(r, &env), tm.evaluate(s4, &env));
            }
        }
    }
}
