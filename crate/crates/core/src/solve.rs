//! Symbolic solving of a literal linear in a variable.
//!
//! The solver walks from the root of the literal down to the single
//! occurrence of `x`. Invertible operators (`~`, `-`, `+`, and
//! multiplication by an odd constant) over equality or disequality are
//! peeled with their inverse. Every other operator is replaced by a choice
//! term `choice y. (cond => d[y] rel t)`, after which the solver continues on
//! `e = choice ...` for the operand `e` containing `x`.

use thiserror::Error;

use crate::bv::Relation;
use crate::catalog::{self, base_case_ic, CatalogError};
use crate::term::{Kind, Literal, TermId, TermManager, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("literal has {0} occurrences of the variable (expected 1)")]
    Nonlinear(u64),
    #[error("atom is not a bit-vector relation")]
    NotARelation,
    #[error("unsupported operator on the path to the variable: {0}")]
    Unsupported(#[from] CatalogError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolvedForm {
    pub term: TermId,
    pub used_choice: bool,
}

/// `choice y. (cond => d[y] rel t)`, where `d` is a term over the hole
/// variable `hole`.
pub fn mk_conditional_choice(
    tm: &mut TermManager,
    cond: TermId,
    hole: VarId,
    d: TermId,
    rel: Relation,
    t: TermId,
) -> TermId {
    let lit = tm.rel(rel, d, t);
    let body = tm.implies(cond, lit);
    tm.canonical_choice(hole, body)
}

/// Returns a term `r` free of `x` such that `l[r]` holds whenever
/// `exists x. l[x]` does.
pub fn solve(tm: &mut TermManager, x: VarId, lit: Literal) -> Result<SolvedForm, SolveError> {
    let (lhs, rel, rhs) = lit.oriented(tm).ok_or(SolveError::NotARelation)?;
    let n = tm.occurrences(x, lhs) + tm.occurrences(x, rhs);
    if n != 1 {
        return Err(SolveError::Nonlinear(n));
    }
    let (d, rel, t) = if tm.has_free_var(lhs, x) { (lhs, rel, rhs) } else { (rhs, rel.flip(), lhs) };
    let mut used_choice = false;
    let term = solve_rec(tm, x, d, rel, t, &mut used_choice)?;
    Ok(SolvedForm { term, used_choice })
}

fn solve_rec(
    tm: &mut TermManager,
    x: VarId,
    d: TermId,
    rel: Relation,
    t: TermId,
    used_choice: &mut bool,
) -> Result<TermId, SolveError> {
    if tm.as_var(d) == Some(x) {
        if rel == Relation::Eq {
            return Ok(t);
        }
        let hole = tm.hole_var(tm.sort(d));
        let ht = tm.var(hole);
        let cond = base_case_ic(tm, rel, t);
        *used_choice = true;
        return Ok(mk_conditional_choice(tm, cond, hole, ht, rel, t));
    }

    let kind = tm.kind(d).clone();
    let children = kind.children();
    let pos = children.iter().position(|c| tm.has_free_var(*c, x)).expect("linear literal has a path to the variable");
    let e = children[pos];
    if !matches!(kind, Kind::BvUn(..) | Kind::BvBin(..) | Kind::Concat(..) | Kind::Extract { .. }) {
        let key = catalog::IcKey::new(catalog::IcOp::Var, catalog::Side::Unary, rel);
        return Err(SolveError::Unsupported(CatalogError::Unsupported(key)));
    }

    // d with the operand containing x replaced by a placeholder
    let hole = tm.hole_var(tm.sort(e));
    let ht = tm.var(hole);
    let mut ch = children.clone();
    ch[pos] = ht;
    let d_hole = tm.mk(kind.with_children(&ch)).expect("same sorts");

    if matches!(rel, Relation::Eq | Relation::Ne) {
        if let Some(t2) = catalog::get_inverse(tm, hole, d_hole, Relation::Eq, t) {
            return solve_rec(tm, x, e, rel, t2, used_choice);
        }
    }

    let cond = catalog::get_ic(tm, hole, d_hole, rel, t)?;
    let choice = mk_conditional_choice(tm, cond, hole, d_hole, rel, t);
    *used_choice = true;
    solve_rec(tm, x, e, Relation::Eq, choice, used_choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv::{BitVec, Width};
    use crate::term::{Interpretation, Sort, Value};

    fn w(n: u32) -> Width {
        Width::new(n).unwrap()
    }

    #[test]
    fn additive_inverse() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let s = tm.new_var("s", Sort::bv(4));
        let t = tm.new_var("t", Sort::bv(4));
        let (xt, st, tt) = (tm.var(x), tm.var(s), tm.var(t));
        let sum = tm.add(xt, st);
        let lit = tm.eq(sum, tt);
        let r = solve(&mut tm, x, Literal::new(true, lit)).unwrap();
        assert_eq!(r.term, tm.sub(tt, st));
        assert!(!r.used_choice);

        // disequality propagates through the inverse
        let r = solve(&mut tm, x, Literal::new(false, lit)).unwrap();
        assert!(r.used_choice);
        assert!(!tm.has_free_var(r.term, x));
    }

    #[test]
    fn base_case() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let t = tm.new_var("t", Sort::bv(4));
        let (xt, tt) = (tm.var(x), tm.var(t));
        let lit = tm.eq(xt, tt);
        assert_eq!(solve(&mut tm, x, Literal::new(true, lit)).unwrap().term, tt);
        // t on the left
        let lit = tm.eq(tt, xt);
        assert_eq!(solve(&mut tm, x, Literal::new(true, lit)).unwrap().term, tt);
    }

    #[test]
    fn nested_example() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let s1 = tm.new_var("s1", Sort::bv(4));
        let s2 = tm.new_var("s2", Sort::bv(4));
        let t = tm.new_var("t", Sort::bv(4));
        let (xt, s1t, s2t, tt) = (tm.var(x), tm.var(s1), tm.var(s2), tm.var(t));
        let inner = tm.add(s2t, xt);
        let prod = tm.mul(s1t, inner);
        let lit = tm.eq(prod, tt);
        let r = solve(&mut tm, x, Literal::new(true, lit)).unwrap();
        assert!(r.used_choice);
        let shown = tm.display(r.term);
        assert!(
            shown.starts_with("(bvadd (choice ((eps!")
                && shown.contains("(=> (= (bvand (bvor (bvneg s1) s1) t) t) (= (bvmul s1 eps!")
                && shown.ends_with("(bvneg s2))"),
            "{shown}"
        );
    }

    #[test]
    fn mul_choice_witness() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let s = tm.new_var("s", Sort::bv(4));
        let t = tm.new_var("t", Sort::bv(4));
        let (xt, st, tt) = (tm.var(x), tm.var(s), tm.var(t));
        let prod = tm.mul(xt, st);
        let lit = tm.eq(prod, tt);
        let r = solve(&mut tm, x, Literal::new(true, lit)).unwrap();
        let mut env = Interpretation::new();
        env.set_bv(s, BitVec::new(w(4), 2).unwrap());
        env.set_bv(t, BitVec::new(w(4), 6).unwrap());
        // smallest y with 2y = 6 (mod 16)
        assert_eq!(tm.evaluate(r.term, &env).unwrap(), Value::Bv(BitVec::new(w(4), 3).unwrap()));
    }

    #[test]
    fn choice_construction_is_canonical() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let t = tm.new_var("t", Sort::bv(4));
        let (xt, tt) = (tm.var(x), tm.var(t));
        let lit = tm.ne(xt, tt);
        let a = solve(&mut tm, x, Literal::new(true, lit)).unwrap();
        let b = solve(&mut tm, x, Literal::new(true, lit)).unwrap();
        assert_eq!(a.term, b.term);
        let shown = tm.display(a.term);
        assert!(shown.contains("(=> true (distinct eps!"), "{shown}");
    }

    #[test]
    fn odd_constant_inverse() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let t = tm.new_var("t", Sort::bv(4));
        let (xt, tt) = (tm.var(x), tm.var(t));
        let c = tm.bv_u64(w(4), 3);
        let prod = tm.mul(c, xt);
        let lit = tm.eq(prod, tt);
        let r = solve(&mut tm, x, Literal::new(true, lit)).unwrap();
        let eleven = tm.bv_u64(w(4), 11);
        assert_eq!(r.term, tm.mul(tt, eleven));
    }

    #[test]
    fn errors() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let a = tm.new_var("a", Sort::bv(4));
        let b = tm.new_var("b", Sort::bv(4));
        let (xt, at, bt) = (tm.var(x), tm.var(a), tm.var(b));
        let xa = tm.add(xt, at);
        let prod = tm.mul(xt, xa);
        let lit = tm.eq(prod, bt);
        assert_eq!(solve(&mut tm, x, Literal::new(true, lit)), Err(SolveError::Nonlinear(2)));
        let cond = tm.rel(Relation::Ult, at, bt);
        let ite = tm.ite(cond, xt, at);
        let lit = tm.eq(ite, bt);
        assert!(matches!(solve(&mut tm, x, Literal::new(true, lit)), Err(SolveError::Unsupported(_))));
    }
}
