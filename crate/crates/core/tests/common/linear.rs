//! Literals with a single occurrence of `x` (var 0) over `s` (var 1) and
//! `t` (var 2), and an exhaustive check of their solved forms.

use proptest::prelude::*;

use invbv::bv::{BitVec, Width};
use invbv::solve::solve;
use invbv::term::{Interpretation, Literal, TermManager, Value};

use super::*;

/// One step on the path from `x` to the root of the x-side.
#[derive(Debug, Clone)]
pub enum Step {
    Un(invbv::bv::BvUnOp),
    /// `x_side op other` when `left`, else `other op x_side`.
    Bin(BvBinOp, bool, E),
}

/// Expressions over `s` (var 1) and `t` (var 2) only.
pub fn arb_other() -> BoxedStrategy<E> {
    arb_expr(2, 1).prop_map(|e| shift_vars(&e)).boxed()
}

pub fn shift_vars(e: &E) -> E {
    match e {
        E::Var(i) => E::Var(i + 1),
        E::Const(c) => E::Const(*c),
        E::Un(o, a) => E::Un(*o, Box::new(shift_vars(a))),
        E::Bin(o, a, b) => E::Bin(*o, Box::new(shift_vars(a)), Box::new(shift_vars(b))),
        E::Sub(a, b) => E::Sub(Box::new(shift_vars(a)), Box::new(shift_vars(b))),
    }
}

pub fn arb_step() -> impl Strategy<Value = Step> {
    prop_oneof![
        1 => arb_unop().prop_map(Step::Un),
        4 => (arb_binop(), any::<bool>(), arb_other()).prop_map(|(o, l, e)| Step::Bin(o, l, e)),
    ]
}

/// A literal with exactly one occurrence of `x` (var 0).
pub fn arb_linear_literal() -> impl Strategy<Value = (F, bool)> {
    (prop::collection::vec(arb_step(), 0..=3), arb_rel(), arb_other(), any::<bool>()).prop_map(
        |(steps, rel, other, x_left)| {
            let mut e = E::Var(0);
            for st in steps {
                e = match st {
                    Step::Un(o) => E::Un(o, Box::new(e)),
                    Step::Bin(o, true, r) => E::Bin(o, Box::new(e), Box::new(r)),
                    Step::Bin(o, false, l) => E::Bin(o, Box::new(l), Box::new(e)),
                };
            }
            let f = if x_left { F::Rel(rel, e, other) } else { F::Rel(rel, other, e) };
            (f, x_left)
        },
    )
}

pub const W: u32 = 4;

pub fn arb_single_step_literal() -> impl Strategy<Value = (F, bool)> {
    (prop::option::of(arb_step()), arb_rel(), arb_other(), any::<bool>()).prop_map(|(step, rel, other, x_left)| {
        let e = match step {
            None => E::Var(0),
            Some(Step::Un(o)) => E::Un(o, Box::new(E::Var(0))),
            Some(Step::Bin(o, true, r)) => E::Bin(o, Box::new(E::Var(0)), Box::new(r)),
            Some(Step::Bin(o, false, l)) => E::Bin(o, Box::new(l), Box::new(E::Var(0))),
        };
        let f = if x_left { F::Rel(rel, e, other) } else { F::Rel(rel, other, e) };
        (f, x_left)
    })
}

pub struct Check {
    /// (s, t) where the solved form fails although a solution exists.
    pub missed: Vec<(u64, u64)>,
    /// (s, t) where the solved form satisfies the literal without any
    /// solution existing; impossible for a correct substitution.
    pub unsound: Vec<(u64, u64)>,
    pub shown: String,
}

pub fn check_literal(f: &F, positive: bool) -> Option<Check> {
    let wd = Width::new(W).unwrap();
    let mut tm = TermManager::new();
    let vars = declare(&mut tm, "v", 3, wd);
    let atom = build_f(&mut tm, f, &vars, wd);
    if tm.occurrences(vars[0], atom) != 1 {
        return None; // the literal folded or x cancelled out
    }
    let lit = Literal::new(positive, atom);
    let solved = solve(&mut tm, vars[0], lit).expect("linear literal over catalog operators");
    assert!(!tm.has_free_var(solved.term, vars[0]));
    let lt = lit.to_term(&mut tm);
    let inst = tm.substitute1(lt, vars[0], solved.term).unwrap();
    let mut out = Check { missed: vec![], unsound: vec![], shown: tm.display(solved.term) };
    for s in 0..16u64 {
        for t in 0..16u64 {
            let exists = (0..16u64).any(|x| eval_f(f, &[x, s, t], W) == positive);
            let mut m = Interpretation::new();
            m.set_bv(vars[1], BitVec::truncating(wd, s));
            m.set_bv(vars[2], BitVec::truncating(wd, t));
            let got = tm.evaluate(inst, &m).unwrap() == Value::Bool(true);
            if got && !exists {
                out.unsound.push((s, t));
            }
            if exists && !got {
                out.missed.push((s, t));
            }
        }
    }
    Some(out)
}
