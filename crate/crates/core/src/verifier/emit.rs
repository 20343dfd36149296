//! Script emitters for external verification and synthesis.

use std::fmt::Write;

use thiserror::Error;

use crate::bv::{Relation, Width};
use crate::catalog::{Catalog, CatalogError, IcKey, IcOp, Side};
use crate::term::{SmtPrinter, Sort, TermId, TermManager, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("{key} at width {width} needs a {needed}-bit term")]
    TooWide { key: IcKey, width: u32, needed: u32 },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Variables and literal `l[x]` for a catalog row at width `w`.
///
/// Concat rows use operands of width `w` each; extract rows use the range
/// `[w-1 : w/2]`.
pub struct VerificationLiteral {
    pub x: VarId,
    pub s: Option<VarId>,
    pub t: VarId,
    pub literal: TermId,
}

pub fn verification_literal(tm: &mut TermManager, key: IcKey, w: Width) -> Result<VerificationLiteral, EmitError> {
    let n = w.bits();
    let too_wide = |needed| EmitError::TooWide { key, width: n, needed };
    let x = tm.new_var("x", Sort::Bv(w));
    let xt = tm.var(x);
    let (s, lhs, tw) = match key.op {
        IcOp::Var => (None, xt, w),
        IcOp::Not => (None, tm.bvnot(xt), w),
        IcOp::Neg => (None, tm.neg(xt), w),
        IcOp::Extract => {
            let lo = n / 2;
            let e = tm.extract(n - 1, lo, xt);
            (None, e, tm.width(e))
        }
        IcOp::Concat => {
            let tw = Width::new(2 * n).map_err(|_| too_wide(2 * n))?;
            let s = tm.new_var("s", Sort::Bv(w));
            let st = tm.var(s);
            let e = if key.side == Side::Right { tm.concat(st, xt) } else { tm.concat(xt, st) };
            (Some(s), e, tw)
        }
        op => {
            let bop = op.bin_op().expect("binary operator");
            let s = tm.new_var("s", Sort::Bv(w));
            let st = tm.var(s);
            let e = if key.side == Side::Right { tm.bin(bop, st, xt) } else { tm.bin(bop, xt, st) };
            (Some(s), e, w)
        }
    };
    let t = tm.new_var("t", Sort::Bv(tw));
    let tt = tm.var(t);
    let literal = tm.rel(key.rel, lhs, tt);
    Ok(VerificationLiteral { x, s, t, literal })
}

/// SMT-LIB script asserting that the condition for `key` differs from
/// `exists x. l[x]` for some `s`, `t`. The expected answer is `unsat`.
pub fn emit_verification_smt2(key: IcKey, w: Width) -> Result<String, EmitError> {
    let mut tm = TermManager::new();
    let vl = verification_literal(&mut tm, key, w)?;
    let st = vl.s.map(|s| tm.var(s));
    let tt = tm.var(vl.t);
    let cond = Catalog::default().condition(&mut tm, key, st, tt)?;
    let ex = tm.exists(vec![vl.x], vl.literal);
    let eqv = tm.iff(cond, ex);
    let goal = tm.not(eqv);

    let p = SmtPrinter::new(&tm);
    let mut out = String::new();
    writeln!(out, "(set-info :status unsat)").unwrap();
    writeln!(out, "(set-logic BV)").unwrap();
    for v in vl.s.into_iter().chain(std::iter::once(vl.t)) {
        writeln!(out, "(declare-const {} {})", p.var(v), tm.var_sort(v)).unwrap();
    }
    writeln!(out, "(assert {})", p.term(goal)).unwrap();
    writeln!(out, "(check-sat)").unwrap();
    writeln!(out, "(exit)").unwrap();
    Ok(out)
}

/// Operator sets for the synthesis grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grammar {
    /// Restricted: not, and, =, bvult, bvslt, constants 0 / min / max, s, t,
    /// bvnot, bvneg, bvand, bvor.
    R,
    /// General: adds or, bvuge, bvsge, bvadd, bvshl, bvlshr.
    G,
}

/// The (operator, side, relation) grid of synthesis problems: eight binary
/// operators, with both operand positions for the non-commutative ones and
/// for multiplication, over all ten relations.
pub fn sygus_keys() -> Vec<IcKey> {
    let shapes = [
        (IcOp::Mul, Side::Left),
        (IcOp::Mul, Side::Right),
        (IcOp::Urem, Side::Left),
        (IcOp::Urem, Side::Right),
        (IcOp::Udiv, Side::Left),
        (IcOp::Udiv, Side::Right),
        (IcOp::And, Side::Left),
        (IcOp::Or, Side::Left),
        (IcOp::Lshr, Side::Left),
        (IcOp::Lshr, Side::Right),
        (IcOp::Ashr, Side::Left),
        (IcOp::Ashr, Side::Right),
        (IcOp::Shl, Side::Left),
        (IcOp::Shl, Side::Right),
    ];
    let mut out = Vec::new();
    for (op, side) in shapes {
        for rel in Relation::ALL {
            out.push(IcKey { op, side, rel });
        }
    }
    out
}

/// SyGuS problem asking for `C(s, t)` equivalent to the disjunction of
/// `l[i]` over every constant `i` of width `w`.
pub fn emit_sygus(key: IcKey, grammar: Grammar, w: Width) -> String {
    let mut tm = TermManager::new();
    let s = tm.new_var("s", Sort::Bv(w));
    let t = tm.new_var("t", Sort::Bv(w));
    let (st, tt) = (tm.var(s), tm.var(t));
    let bop = key.op.bin_op().expect("binary operator");
    let mut ds = Vec::new();
    for i in 0..=w.mask() {
        let ic = tm.bv_u64(w, i);
        let lhs = if key.side == Side::Right { tm.bin(bop, st, ic) } else { tm.bin(bop, ic, st) };
        ds.push(tm.rel(key.rel, lhs, tt));
    }
    let disj = tm.or(ds);
    let zero = tm.zero(w);
    let min = tm.min_signed(w);
    let max = tm.max_signed(w);
    let p = SmtPrinter::new(&tm);
    let sort = Sort::Bv(w).to_string();

    let (bool_rules, bv_rules) = match grammar {
        Grammar::R => (
            "(not B) (and B B) (= V V) (bvult V V) (bvslt V V)".to_string(),
            format!("s t {} {} {} (bvnot V) (bvneg V) (bvand V V) (bvor V V)", p.term(zero), p.term(min), p.term(max)),
        ),
        Grammar::G => (
            "(not B) (and B B) (or B B) (= V V) (bvult V V) (bvslt V V) (bvuge V V) (bvsge V V)".to_string(),
            format!(
                "s t {} {} {} (bvnot V) (bvadd V V) (bvneg V) (bvand V V) (bvor V V) (bvlshr V V) (bvshl V V)",
                p.term(zero),
                p.term(min),
                p.term(max)
            ),
        ),
    };

    let mut out = String::new();
    writeln!(out, "; invertibility condition for {}", key).unwrap();
    writeln!(out, "(set-logic BV)").unwrap();
    writeln!(out, "(synth-fun C ((s {sort}) (t {sort})) Bool").unwrap();
    writeln!(out, "  ((B Bool) (V {sort}))").unwrap();
    writeln!(out, "  ((B Bool ({bool_rules}))").unwrap();
    writeln!(out, "   (V {sort} ({bv_rules}))))").unwrap();
    writeln!(out, "(declare-var s {sort})").unwrap();
    writeln!(out, "(declare-var t {sort})").unwrap();
    writeln!(out, "(constraint (= {} (C s t)))", p.term(disj)).unwrap();
    writeln!(out, "(check-synth)").unwrap();
    out
}
