//! Turns asserted formulas into an `exists y. forall x. psi` problem.

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::rewrite::rewrite;
use crate::solve::solve;
use crate::term::{Kind, Literal, Sort, TermId, TermManager, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreprocessError {
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

/// `exists y. forall x. matrix`, with `y` the free variables of `matrix`
/// other than `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub matrix: TermId,
    pub exists: Vec<VarId>,
    pub forall: Vec<VarId>,
    /// The problem is the negation of the input, so verdicts flip.
    pub negated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessOptions {
    pub der: bool,
    pub split_extracts: bool,
    pub negate_closed_exists: bool,
    pub rewrite: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions { der: true, split_extracts: true, negate_closed_exists: true, rewrite: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Q {
    Exists,
    Forall,
}

type Prefix = Vec<(Q, Vec<VarId>)>;

fn push_block(p: &mut Prefix, q: Q, vs: Vec<VarId>) {
    if vs.is_empty() {
        return;
    }
    match p.last_mut() {
        Some((lq, lvs)) if *lq == q => lvs.extend(vs),
        _ => p.push((q, vs)),
    }
}

/// Interleaves two prefixes over disjoint variables, preferring
/// existential blocks first to keep the alternation count low.
fn merge(a: Prefix, b: Prefix) -> Prefix {
    let mut out = Prefix::new();
    let (mut a, mut b) = (a.into_iter().peekable(), b.into_iter().peekable());
    loop {
        match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(_), None) => {
                let (q, vs) = a.next().unwrap();
                push_block(&mut out, q, vs);
            }
            (None, Some(_)) => {
                let (q, vs) = b.next().unwrap();
                push_block(&mut out, q, vs);
            }
            (Some((qa, _)), Some((qb, _))) => {
                if qa == qb {
                    let (q, mut vs) = a.next().unwrap();
                    vs.extend(b.next().unwrap().1);
                    push_block(&mut out, q, vs);
                } else if *qa == Q::Exists {
                    let (q, vs) = a.next().unwrap();
                    push_block(&mut out, q, vs);
                } else {
                    let (q, vs) = b.next().unwrap();
                    push_block(&mut out, q, vs);
                }
            }
        }
    }
    out
}

struct Prenexer<'a> {
    tm: &'a mut TermManager,
}

impl Prenexer<'_> {
    /// Negation normal form of `t` (negated when `!pos`) with quantifiers
    /// pulled to the front. Quantifier-free subformulas are kept intact.
    fn run(&mut self, t: TermId, pos: bool) -> Result<(Prefix, TermId), PreprocessError> {
        let tm = &mut *self.tm;
        if tm.is_quantifier_free(t) {
            if !tm.is_choice_free(t) {
                return Err(PreprocessError::Unsupported("choice terms in input".into()));
            }
            let r = if pos { t } else { tm.not(t) };
            return Ok((Prefix::new(), r));
        }
        match tm.kind(t).clone() {
            Kind::Not(a) => self.run(a, !pos),
            Kind::And(xs) | Kind::Or(xs) => {
                let conj = matches!(self.tm.kind(t), Kind::And(_)) == pos;
                let mut prefix = Prefix::new();
                let mut parts = Vec::new();
                for x in xs {
                    let (p, m) = self.run(x, pos)?;
                    prefix = merge(prefix, p);
                    parts.push(m);
                }
                let m = if conj { self.tm.and(parts) } else { self.tm.or(parts) };
                Ok((prefix, m))
            }
            Kind::Implies(a, b) => {
                let na = self.tm.not(a);
                let d = self.tm.or2(na, b);
                self.run(d, pos)
            }
            Kind::Iff(a, b) => {
                // (a & b) | (~a & ~b)
                let (na, nb) = (self.tm.not(a), self.tm.not(b));
                let both = self.tm.and2(a, b);
                let neither = self.tm.and2(na, nb);
                let d = self.tm.or2(both, neither);
                self.run(d, pos)
            }
            Kind::Ite(c, a, b) if self.tm.sort(t) == Sort::Bool => {
                // (~c | a) & (c | b)
                let nc = self.tm.not(c);
                let l = self.tm.or2(nc, a);
                let r = self.tm.or2(c, b);
                let d = self.tm.and2(l, r);
                self.run(d, pos)
            }
            Kind::Forall(vs, body) | Kind::Exists(vs, body) => {
                let is_forall = matches!(self.tm.kind(t), Kind::Forall(..));
                let q = if is_forall == pos { Q::Forall } else { Q::Exists };
                // fresh copies keep distinct occurrences of a shared node apart
                let mut map = FxHashMap::default();
                let mut fresh = Vec::new();
                for v in vs {
                    let name = self.tm.var_name(v).to_string();
                    let nv = self.tm.fresh_var(&name, self.tm.var_sort(v));
                    let nt = self.tm.var(nv);
                    map.insert(v, nt);
                    fresh.push(nv);
                }
                let body = self.tm.substitute(body, &map).expect("same sorts");
                let (inner, m) = self.run(body, pos)?;
                let mut prefix = Prefix::new();
                push_block(&mut prefix, q, fresh);
                for (q, vs) in inner {
                    push_block(&mut prefix, q, vs);
                }
                Ok((prefix, m))
            }
            _ => Err(PreprocessError::Unsupported("quantifier below a non-Boolean operator".into())),
        }
    }
}

/// Top-level disjuncts, reading `a => b` as `~a | b`.
fn disjuncts(tm: &mut TermManager, t: TermId, out: &mut Vec<TermId>) {
    match tm.kind(t).clone() {
        Kind::Or(xs) => {
            for x in xs {
                disjuncts(tm, x, out);
            }
        }
        Kind::Implies(a, b) => {
            let na = tm.not(a);
            out.push(na);
            disjuncts(tm, b, out);
        }
        _ => out.push(t),
    }
}

fn as_literal(tm: &TermManager, t: TermId) -> Option<Literal> {
    match tm.kind(t) {
        Kind::Rel(..) => Some(Literal::new(true, t)),
        Kind::Not(a) if matches!(tm.kind(*a), Kind::Rel(..)) => Some(Literal::new(false, *a)),
        _ => None,
    }
}

/// Destructive equality resolution: `forall x. (l => phi)` with a solved
/// form for `x` in `l` that needs no choice becomes `phi[x := solved]`.
/// Only applies when the matrix is a disjunction with at least two
/// disjuncts, one of which is the negated guard.
fn der(tm: &mut TermManager, matrix: &mut TermId, forall: &mut Vec<VarId>) {
    'outer: loop {
        let mut ds = Vec::new();
        disjuncts(tm, *matrix, &mut ds);
        if ds.len() < 2 {
            return;
        }
        for xi in 0..forall.len() {
            let x = forall[xi];
            for (i, &d) in ds.iter().enumerate() {
                let Some(lit) = as_literal(tm, d) else { continue };
                let guard = Literal::new(!lit.positive, lit.atom);
                if tm.occurrences(x, guard.atom) != 1 {
                    continue;
                }
                let Ok(r) = solve(tm, x, guard) else { continue };
                if r.used_choice {
                    continue;
                }
                let rest: Vec<TermId> = ds.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| *t).collect();
                let rest = tm.or(rest);
                *matrix = tm.substitute1(rest, x, r.term).expect("same sort");
                forall.remove(xi);
                continue 'outer;
            }
        }
        return;
    }
}

fn collect_extracts(tm: &TermManager, t: TermId, x: VarId, out: &mut Vec<(u32, u32)>) {
    for n in tm.post_order(t) {
        if let Kind::Extract { hi, lo, arg } = tm.kind(n) {
            if tm.as_var(*arg) == Some(x) && !out.contains(&(*hi, *lo)) {
                out.push((*hi, *lo));
            }
        }
    }
}

/// Replaces each universal variable that occurs under `extract` by a
/// concatenation of fresh region variables cut at every extract boundary.
fn split_extracts(tm: &mut TermManager, matrix: &mut TermId, forall: &mut Vec<VarId>) {
    let mut out_vars = Vec::new();
    let mut map = FxHashMap::default();
    for &x in forall.iter() {
        let mut ranges = Vec::new();
        collect_extracts(tm, *matrix, x, &mut ranges);
        let w = tm.var_width(x).bits();
        let mut cuts: Vec<u32> = vec![0, w];
        for (hi, lo) in ranges {
            cuts.push(lo);
            cuts.push(hi + 1);
        }
        cuts.sort_unstable();
        cuts.dedup();
        if cuts.len() <= 2 {
            out_vars.push(x);
            continue;
        }
        let name = tm.var_name(x).to_string();
        let mut regions = Vec::new();
        for win in cuts.windows(2) {
            let v = tm.fresh_var(&format!("{name}_{}_{}", win[1] - 1, win[0]), Sort::bv(win[1] - win[0]));
            regions.push(v);
        }
        // most significant region first
        let mut acc = tm.var(*regions.last().unwrap());
        for &r in regions.iter().rev().skip(1) {
            let rt = tm.var(r);
            acc = tm.concat(acc, rt);
        }
        map.insert(x, acc);
        out_vars.extend(regions.into_iter().rev());
    }
    if !map.is_empty() {
        let m = tm.substitute(*matrix, &map).expect("same sorts");
        *matrix = rewrite(tm, m);
    }
    *forall = out_vars;
}

/// Conjoins `assertions` and produces a one-alternation problem.
pub fn preprocess(
    tm: &mut TermManager,
    assertions: &[TermId],
    opts: PreprocessOptions,
) -> Result<Problem, PreprocessError> {
    let phi = tm.and(assertions.to_vec());
    let closed = tm.free_vars(phi).is_empty();
    let (prefix, mut matrix) = Prenexer { tm }.run(phi, true)?;

    let shape: Vec<Q> = prefix.iter().map(|(q, _)| *q).collect();
    let mut negated = false;
    let (mut exists_b, mut forall) = match shape.as_slice() {
        [] => (vec![], vec![]),
        [Q::Exists] if closed && opts.negate_closed_exists => {
            negated = true;
            (vec![], prefix[0].1.clone())
        }
        [Q::Exists] => (prefix[0].1.clone(), vec![]),
        [Q::Forall] => (vec![], prefix[0].1.clone()),
        [Q::Exists, Q::Forall] => (prefix[0].1.clone(), prefix[1].1.clone()),
        [Q::Forall, Q::Exists] if closed => {
            negated = true;
            (prefix[0].1.clone(), prefix[1].1.clone())
        }
        _ => {
            return Err(PreprocessError::Unsupported(format!(
                "more than one quantifier alternation ({} blocks)",
                shape.len()
            )))
        }
    };
    if negated {
        matrix = tm.not(matrix);
    }
    exists_b.sort();

    if opts.der {
        der(tm, &mut matrix, &mut forall);
    }
    if opts.split_extracts {
        split_extracts(tm, &mut matrix, &mut forall);
    }
    if opts.rewrite {
        matrix = rewrite(tm, matrix);
    }
    forall.retain(|x| tm.has_free_var(matrix, *x));
    let exists: Vec<VarId> = tm.free_vars(matrix).iter().copied().filter(|v| !forall.contains(v)).collect();
    Ok(Problem { matrix, exists, forall, negated })
}
