//! Selection of instantiation terms from a counter-model.

use rustc_hash::FxHashMap;

use super::rewrite::rewrite;
use super::Config;
use crate::bv::{BitVec, Relation};
use crate::solve::solve;
use crate::term::{Interpretation, Literal, TermId, TermManager, VarId};

/// Literals with more occurrences than this are not linearised; the
/// variable falls back to its model value.
pub const MAX_LINEARIZE_OCCURRENCES: u64 = 64;

fn holds(tm: &TermManager, model: &Interpretation, t: TermId) -> bool {
    tm.evaluate(t, model).ok().and_then(|v| v.as_bool()).unwrap_or(false)
}

fn value_of(tm: &TermManager, model: &Interpretation, t: TermId) -> BitVec {
    tm.evaluate(t, model).ok().and_then(|v| v.as_bv()).unwrap_or_else(|| BitVec::zero(tm.width(t)))
}

/// Projects a literal `s rel t` satisfied by `model` according to `config`.
/// Returns `None` when the literal is dropped.
pub fn project(tm: &mut TermManager, config: Config, model: &Interpretation, lit: Literal) -> Option<Literal> {
    let (s, rel, t) = lit.oriented(tm)?;
    match config {
        Config::M => None,
        Config::K => Some(lit),
        Config::S => {
            let sv = value_of(tm, model, s);
            let tv = value_of(tm, model, t);
            let slack = sv.bvsub(tv).expect("same width");
            let rhs = if slack.value() == 0 {
                t
            } else {
                let c = tm.bv_const(slack);
                tm.add(t, c)
            };
            Some(Literal::new(true, tm.eq(s, rhs)))
        }
        Config::B => {
            let sv = value_of(tm, model, s);
            let tv = value_of(tm, model, t);
            let gt = if rel.is_signed() { Relation::Sgt } else { Relation::Ugt };
            let rhs = if sv == tv {
                t
            } else if BitVec::compare(gt, sv, tv).expect("same width") {
                let one = tm.one(sv.width());
                tm.add(t, one)
            } else {
                let one = tm.one(sv.width());
                tm.sub(t, one)
            };
            Some(Literal::new(true, tm.eq(s, rhs)))
        }
    }
}

/// Rebuilds `t` keeping only the `keep`-th occurrence of `x` (in tree
/// order) and replacing the others with `val`.
fn keep_one(tm: &mut TermManager, t: TermId, x: VarId, val: TermId, keep: u64, counter: &mut u64) -> TermId {
    if !tm.has_free_var(t, x) {
        return t;
    }
    if tm.as_var(t) == Some(x) {
        let idx = *counter;
        *counter += 1;
        return if idx == keep { t } else { val };
    }
    let kind = tm.kind(t).clone();
    let ch: Vec<TermId> = kind.children().iter().map(|c| keep_one(tm, *c, x, val, keep, counter)).collect();
    tm.mk(kind.with_children(&ch)).expect("same sorts")
}

/// One literal per occurrence of `x` in `lit`, with every other occurrence
/// replaced by the value of `x` in `model`. The linearising rewrites run
/// first.
pub fn linearize(tm: &mut TermManager, x: VarId, model: &Interpretation, lit: Literal) -> Vec<Literal> {
    let atom = rewrite(tm, lit.atom);
    let n = tm.occurrences(x, atom);
    if n == 0 || n > MAX_LINEARIZE_OCCURRENCES {
        return Vec::new();
    }
    if n == 1 {
        return vec![Literal::new(lit.positive, atom)];
    }
    let xv = model.get_bv(x).unwrap_or_else(|| BitVec::zero(tm.var_width(x)));
    let val = tm.bv_const(xv);
    let mut out: Vec<Literal> = Vec::new();
    for k in 0..n {
        let mut counter = 0;
        let a = keep_one(tm, atom, x, val, k, &mut counter);
        let l = Literal::new(lit.positive, a);
        if tm.occurrences(x, a) == 1 && !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

/// Result of one selection: a term per universal variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub terms: Vec<TermId>,
    /// Which variables received a solved form rather than a model value.
    pub solved: Vec<bool>,
}

/// Selection function for configuration `config`.
///
/// `neg_matrix` is the negated matrix; `model` satisfies it. Literals are
/// chosen smallest first, ties by order of appearance; when the chosen
/// literal cannot be solved the next one is tried before falling back to the
/// model value.
pub fn select(
    tm: &mut TermManager,
    config: Config,
    xs: &[VarId],
    neg_matrix: TermId,
    model: &Interpretation,
) -> Selection {
    let mut n: Vec<Literal> = Vec::new();
    if config != Config::M {
        for lit in tm.literals(neg_matrix) {
            if !xs.iter().any(|x| tm.has_free_var(lit.atom, *x)) {
                continue; // cannot yield a literal for any x_i
            }
            let lt = lit.to_term(tm);
            if !holds(tm, model, lt) {
                continue;
            }
            if let Some(p) = project(tm, config, model, lit) {
                if !n.contains(&p) {
                    n.push(p);
                }
            }
        }
    }

    let mut terms: Vec<TermId> = Vec::with_capacity(xs.len());
    let mut solved = Vec::with_capacity(xs.len());
    for (i, &xi) in xs.iter().enumerate() {
        let subst: FxHashMap<VarId, TermId> = xs[..i].iter().copied().zip(terms.iter().copied()).collect();
        let mut ni: Vec<Literal> = Vec::new();
        for &l in &n {
            let atom = if subst.is_empty() { l.atom } else { tm.substitute(l.atom, &subst).expect("same sorts") };
            for m in linearize(tm, xi, model, Literal::new(l.positive, atom)) {
                if !ni.contains(&m) {
                    ni.push(m);
                }
            }
        }
        // choose: smallest first, stable on ties
        ni.sort_by_key(|l| tm.tree_size(l.atom));
        let mut ti = None;
        for l in ni {
            if let Ok(r) = solve(tm, xi, l) {
                ti = Some(r.term);
                break;
            }
        }
        solved.push(ti.is_some());
        let ti = ti.unwrap_or_else(|| {
            let v = model.get_bv(xi).unwrap_or_else(|| BitVec::zero(tm.var_width(xi)));
            tm.bv_const(v)
        });
        for tj in terms.iter_mut() {
            *tj = tm.substitute1(*tj, xi, ti).expect("same sort");
        }
        terms.push(ti);
    }
    Selection { terms, solved }
}
