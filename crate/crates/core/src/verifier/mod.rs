//! Exhaustive equivalence checking of catalog conditions.
//!
//! For a row and a width, every value of `s` and `t` is enumerated; the
//! condition is evaluated with the term evaluator and compared against a
//! direct enumeration of `x` over the operator semantics of [`crate::bv`].

mod emit;

use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bv::{BitVec, BvUnOp, Relation, Width};
use crate::catalog::{catalog_entries, Catalog, CatalogError, IcKey, IcOp, Side};
use crate::term::{CompiledTerm, Sort, TermId, TermManager};

pub use emit::{emit_sygus, emit_verification_smt2, sygus_keys, verification_literal, Grammar};

/// Default cap on the width of an exhaustive sweep.
pub const DEFAULT_VERIFY_CAP: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Verified,
    Refuted(Counterexample),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub s: Option<BitVec>,
    pub t: BitVec,
    pub condition: bool,
    pub exists: bool,
    /// Operand split or extraction range for concat/extract rows.
    pub shape: Option<String>,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub key: IcKey,
    pub width: Width,
    pub status: Status,
    pub pairs: u64,
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn is_verified(&self) -> bool {
        self.status == Status::Verified
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self.status, Status::Refuted(_))
    }
}

/// Builds a condition from `s` (absent for unary rows) and `t`.
pub type ConditionBuilder<'a> =
    dyn Fn(&mut TermManager, Option<TermId>, TermId) -> Result<TermId, CatalogError> + Sync + 'a;

/// Checks the shipped condition for `key` at width `w`.
pub fn verify_ic(key: IcKey, w: Width) -> VerificationReport {
    verify_ic_with(key, w, DEFAULT_VERIFY_CAP, &|tm, s, t| Catalog::default().condition(tm, key, s, t))
}

/// Checks the condition produced by `build` for `key` at width `w`.
pub fn verify_ic_with(key: IcKey, w: Width, cap: u32, build: &ConditionBuilder<'_>) -> VerificationReport {
    let start = Instant::now();
    let (status, pairs) = if w.bits() > cap {
        (Status::Skipped(format!("width {} above exhaustive cap {}", w, cap)), 0)
    } else {
        match sweep(key, w, build) {
            Ok(r) => r,
            Err(e) => (Status::Skipped(e.to_string()), 0),
        }
    };
    VerificationReport { key, width: w, status, pairs, elapsed: start.elapsed() }
}

/// Values reachable by the x-side of a literal for one fixed `s`.
struct Reach {
    width: Width,
    bits: Vec<u64>,
    count: u64,
    umin: u64,
    umax: u64,
    smin: i64,
    smax: i64,
}

impl Reach {
    fn new(width: Width) -> Self {
        let n = width.mask() as usize + 1;
        Reach {
            width,
            bits: vec![0; n.div_ceil(64)],
            count: 0,
            umin: u64::MAX,
            umax: 0,
            smin: i64::MAX,
            smax: i64::MIN,
        }
    }

    fn insert(&mut self, v: u64) {
        let (i, b) = ((v / 64) as usize, v % 64);
        if self.bits[i] >> b & 1 == 0 {
            self.bits[i] |= 1 << b;
            self.count += 1;
            self.umin = self.umin.min(v);
            self.umax = self.umax.max(v);
            let sv = BitVec::truncating(self.width, v).signed_value();
            self.smin = self.smin.min(sv);
            self.smax = self.smax.max(sv);
        }
    }

    fn contains(&self, v: u64) -> bool {
        let (i, b) = ((v / 64) as usize, v % 64);
        self.bits[i] >> b & 1 == 1
    }

    /// Whether some reachable value `v` satisfies `v rel t`.
    fn exists(&self, rel: Relation, t: u64) -> bool {
        let ts = BitVec::truncating(self.width, t).signed_value();
        match rel {
            Relation::Eq => self.contains(t),
            Relation::Ne => self.count > 1 || (self.count == 1 && !self.contains(t)),
            Relation::Ult => self.umin < t,
            Relation::Ule => self.umin <= t,
            Relation::Ugt => self.umax > t,
            Relation::Uge => self.umax >= t,
            Relation::Slt => self.smin < ts,
            Relation::Sle => self.smin <= ts,
            Relation::Sgt => self.smax > ts,
            Relation::Sge => self.smax >= ts,
        }
    }
}

fn all_values(w: Width) -> impl Iterator<Item = u64> {
    0..=w.mask()
}

fn bv(w: Width, v: u64) -> BitVec {
    BitVec::truncating(w, v)
}

/// Runs the sweep for one row, returning the status and number of (s, t)
/// pairs checked.
fn sweep(key: IcKey, w: Width, build: &ConditionBuilder<'_>) -> Result<(Status, u64), CatalogError> {
    match key.op {
        IcOp::Var | IcOp::Not | IcOp::Neg => {
            let f = |x: u64| match key.op {
                IcOp::Not => BitVec::unop(BvUnOp::Not, bv(w, x)).value(),
                IcOp::Neg => BitVec::unop(BvUnOp::Neg, bv(w, x)).value(),
                _ => x,
            };
            let mut reach = Reach::new(w);
            for x in all_values(w) {
                reach.insert(f(x));
            }
            sweep_unary(key, w, build, &reach, None)
        }
        IcOp::Extract => {
            let mut pairs = 0;
            for lo in 0..w.bits() {
                for hi in lo..w.bits() {
                    let tw = Width::new(hi - lo + 1).expect("positive width");
                    let mut reach = Reach::new(tw);
                    for x in all_values(w) {
                        reach.insert(BitVec::extract(bv(w, x), hi, lo).expect("in range").value());
                    }
                    let shape = format!("[{}:{}]", hi, lo);
                    let (st, n) = sweep_unary(key, tw, build, &reach, Some(shape))?;
                    pairs += n;
                    if st != Status::Verified {
                        return Ok((st, pairs));
                    }
                }
            }
            Ok((Status::Verified, pairs))
        }
        IcOp::Concat => {
            let mut splits = vec![(w.bits(), w.bits())];
            if w.bits() >= 2 {
                splits.push((w.bits(), 1));
                splits.push((1, w.bits()));
            }
            let mut pairs = 0;
            for (wx, ws) in splits {
                let (st, n) = sweep_concat(key, wx, ws, build)?;
                pairs += n;
                if st != Status::Verified {
                    return Ok((st, pairs));
                }
            }
            Ok((Status::Verified, pairs))
        }
        _ => {
            let op = key.op.bin_op().expect("binary operator");
            sweep_binary(
                key,
                w,
                w,
                w,
                build,
                |x, s| {
                    let r = match key.side {
                        Side::Right => BitVec::binop(op, bv(w, s), bv(w, x)),
                        _ => BitVec::binop(op, bv(w, x), bv(w, s)),
                    };
                    r.expect("same width").value()
                },
                None,
            )
        }
    }
}

fn sweep_unary(
    key: IcKey,
    tw: Width,
    build: &ConditionBuilder<'_>,
    reach: &Reach,
    shape: Option<String>,
) -> Result<(Status, u64), CatalogError> {
    let mut tm = TermManager::new();
    let t = tm.new_var("t", Sort::Bv(tw));
    let tt = tm.var(t);
    let cond = build(&mut tm, None, tt)?;
    let code = CompiledTerm::new(&tm, cond).expect("ground condition");
    let uses_t = !code.inputs().is_empty();
    let mut scratch = Vec::new();
    let mut pairs = 0;
    for tv in all_values(tw) {
        pairs += 1;
        let c = if uses_t { code.eval_with(&[tv], &mut scratch) } else { code.eval_with(&[], &mut scratch) } == 1;
        let e = reach.exists(key.rel, tv);
        if c != e {
            let cx = Counterexample { s: None, t: bv(tw, tv), condition: c, exists: e, shape };
            return Ok((Status::Refuted(cx), pairs));
        }
    }
    Ok((Status::Verified, pairs))
}

fn sweep_binary(
    key: IcKey,
    wx: Width,
    ws: Width,
    wt: Width,
    build: &ConditionBuilder<'_>,
    f: impl Fn(u64, u64) -> u64,
    shape: Option<String>,
) -> Result<(Status, u64), CatalogError> {
    let mut tm = TermManager::new();
    let s = tm.new_var("s", Sort::Bv(ws));
    let t = tm.new_var("t", Sort::Bv(wt));
    let (st, tt) = (tm.var(s), tm.var(t));
    let cond = build(&mut tm, Some(st), tt)?;
    let code = CompiledTerm::new(&tm, cond).expect("ground condition");
    // inputs are sorted by variable id; s was declared before t
    let slots: Vec<bool> = code.inputs().iter().map(|v| *v == s).collect();
    let mut vals = vec![0u64; slots.len()];
    let mut scratch = Vec::new();
    let mut pairs = 0;
    for sv in all_values(ws) {
        let mut reach = Reach::new(wt);
        for x in all_values(wx) {
            reach.insert(f(x, sv));
        }
        for tv in all_values(wt) {
            pairs += 1;
            for (slot, is_s) in vals.iter_mut().zip(&slots) {
                *slot = if *is_s { sv } else { tv };
            }
            let c = code.eval_with(&vals, &mut scratch) == 1;
            let e = reach.exists(key.rel, tv);
            if c != e {
                let cx = Counterexample { s: Some(bv(ws, sv)), t: bv(wt, tv), condition: c, exists: e, shape };
                return Ok((Status::Refuted(cx), pairs));
            }
        }
    }
    Ok((Status::Verified, pairs))
}

fn sweep_concat(key: IcKey, wx: u32, ws: u32, build: &ConditionBuilder<'_>) -> Result<(Status, u64), CatalogError> {
    let wxw = Width::new(wx).expect("width");
    let wsw = Width::new(ws).expect("width");
    let wt = Width::new(wx + ws).expect("width");
    let shape = Some(format!("x:{} s:{}", wx, ws));
    let right = key.side == Side::Right;
    sweep_binary(
        key,
        wxw,
        wsw,
        wt,
        build,
        |x, s| {
            if right {
                (s << wx) | x
            } else {
                (x << ws) | s
            }
        },
        shape,
    )
}

/// Outcome of a catalog-wide sweep.
#[derive(Debug, Clone, Default)]
pub struct VerificationSummary {
    pub reports: Vec<VerificationReport>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WidthTally {
    pub verified: usize,
    pub refuted: usize,
    pub skipped: usize,
}

impl VerificationSummary {
    pub fn verified(&self) -> usize {
        self.reports.iter().filter(|r| r.is_verified()).count()
    }

    pub fn refuted(&self) -> usize {
        self.reports.iter().filter(|r| r.is_refuted()).count()
    }

    pub fn skipped(&self) -> usize {
        self.reports.len() - self.verified() - self.refuted()
    }

    pub fn all_verified(&self) -> bool {
        self.reports.iter().all(|r| r.is_verified())
    }

    /// Counts per width, in ascending width order.
    pub fn per_width(&self) -> Vec<(Width, WidthTally)> {
        let mut out: Vec<(Width, WidthTally)> = Vec::new();
        for r in &self.reports {
            let idx = match out.iter().position(|(w, _)| *w == r.width) {
                Some(i) => i,
                None => {
                    out.push((r.width, WidthTally::default()));
                    out.len() - 1
                }
            };
            let tally = &mut out[idx].1;
            match r.status {
                Status::Verified => tally.verified += 1,
                Status::Refuted(_) => tally.refuted += 1,
                Status::Skipped(_) => tally.skipped += 1,
            }
        }
        out.sort_by_key(|(w, _)| *w);
        out
    }
}

/// Verifies the given rows at every width in `widths`, using `jobs` worker
/// threads. Reports are ordered by row, then width.
pub fn verify_keys(keys: &[IcKey], widths: RangeInclusive<u32>, jobs: usize) -> VerificationSummary {
    let tasks: Vec<(IcKey, Width)> =
        keys.iter().flat_map(|k| widths.clone().filter_map(move |w| Width::new(w).ok().map(|w| (*k, w)))).collect();
    let run = || tasks.par_iter().map(|(k, w)| verify_ic(*k, *w)).collect::<Vec<_>>();
    let reports = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => tasks.iter().map(|(k, w)| verify_ic(*k, *w)).collect(),
    };
    VerificationSummary { reports }
}

/// Verifies the full catalog at every width in `widths`.
pub fn verify_all(widths: RangeInclusive<u32>, jobs: usize) -> VerificationSummary {
    verify_keys(&catalog_entries(), widths, jobs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: u32) -> Width {
        Width::new(n).unwrap()
    }

    #[test]
    fn mul_eq_width4() {
        let r = verify_ic(IcKey::new(IcOp::Mul, Side::Left, Relation::Eq), w(4));
        assert_eq!(r.status, Status::Verified);
        assert_eq!(r.pairs, 256);
    }

    #[test]
    fn udiv_right_ne_width1_needs_split() {
        let key = IcKey::new(IcOp::Udiv, Side::Right, Relation::Ne);
        assert!(verify_ic(key, w(1)).is_verified());
        let plain = Catalog { width_special_cases: false };
        let r = verify_ic_with(key, w(1), 8, &|tm, s, t| plain.condition(tm, key, s, t));
        assert!(r.is_refuted());
    }

    #[test]
    fn concat_left_ne_width3() {
        let r = verify_ic(IcKey::new(IcOp::Concat, Side::Left, Relation::Ne), w(3));
        assert!(r.is_verified());
    }

    #[test]
    fn above_cap_is_skipped() {
        let r = verify_ic(IcKey::new(IcOp::Mul, Side::Left, Relation::Eq), w(9));
        assert!(matches!(r.status, Status::Skipped(_)));
    }

    #[test]
    fn empty_range() {
        #[allow(clippy::reversed_empty_ranges)]
        let s = verify_all(3..=2, 1);
        assert!(s.reports.is_empty());
        assert!(s.per_width().is_empty());
    }

    #[test]
    fn wrong_condition_is_refuted() {
        let key = IcKey::new(IcOp::And, Side::Left, Relation::Ult);
        let r = verify_ic_with(key, w(3), 8, &|tm, _s, _t| Ok(tm.tru()));
        match r.status {
            Status::Refuted(cx) => {
                // x & s < 0 is never satisfiable
                assert_eq!(cx.t.value(), 0);
                assert!(cx.condition && !cx.exists);
            }
            s => panic!("expected refutation, got {s:?}"),
        }
    }
}
