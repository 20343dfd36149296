//! A small CDCL SAT solver.
//!
//! Two-watched-literal propagation, first-UIP learning with local clause
//! minimisation, VSIDS branching with phase saving, Luby restarts and
//! LBD-driven deletion of learnt clauses. Runs are deterministic for a given
//! seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// DIMACS-style literal: a non-zero signed variable index.
pub type CnfLit = i32;

/// Clause set over variables `1..=num_vars`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<CnfLit>>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> CnfLit {
        self.num_vars += 1;
        self.num_vars as CnfLit
    }

    pub fn add_clause(&mut self, lits: impl Into<Vec<CnfLit>>) {
        let lits = lits.into();
        debug_assert!(lits.iter().all(|l| *l != 0 && l.unsigned_abs() <= self.num_vars));
        self.clauses.push(lits);
    }

    /// Truth value of `lit` under a 1-indexed assignment (index 0 unused).
    pub fn lit_value(assignment: &[bool], lit: CnfLit) -> bool {
        assignment[lit.unsigned_abs() as usize] == (lit > 0)
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| Self::lit_value(assignment, *l)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Assignment indexed by variable; slot 0 is unused.
    Sat(Vec<bool>),
    Unsat,
    ResourceOut,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SatConfig {
    /// Conflict budget; `None` means unlimited.
    pub max_conflicts: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SatStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learnt: u64,
    pub deleted: u64,
}

pub fn sat_solve(cnf: &Cnf, config: SatConfig) -> SatResult {
    Solver::new(cnf, config).solve().0
}

// Internal literal: 2 * var + sign, variables 0-based.
type Lit = u32;

fn mk_lit(l: CnfLit) -> Lit {
    let v = l.unsigned_abs() - 1;
    2 * v + (l < 0) as u32
}

fn var(l: Lit) -> usize {
    (l >> 1) as usize
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;
const NO_REASON: u32 = u32::MAX;
const RANDOM_FREQ: f64 = 0.01;
const RESTART_UNIT: u64 = 64;

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: Lit,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Clause>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    rng: ChaCha8Rng,
    config: SatConfig,
    max_learnts: f64,
    empty: bool,
    pub stats: SatStats,
}

impl Solver {
    pub fn new(cnf: &Cnf, config: SatConfig) -> Self {
        let n = cnf.num_vars as usize;
        let mut s = Solver {
            num_vars: n,
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::new(n),
            phase: vec![false; n],
            seen: vec![false; n],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            max_learnts: 0.0,
            empty: false,
            stats: SatStats::default(),
        };
        if config.seed != 0 {
            // perturb the initial order so different seeds explore differently
            for v in 0..n {
                s.activity[v] = s.rng.gen::<f64>() * 1e-5;
            }
        }
        for v in 0..n {
            s.heap.insert(v, &s.activity);
        }
        for c in &cnf.clauses {
            if !s.add_input_clause(c) {
                s.empty = true;
                break;
            }
        }
        s.max_learnts = (s.clauses.len() as f64 / 3.0).max(2000.0);
        s
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assigns[var(l)];
        if l & 1 == 1 {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn add_input_clause(&mut self, c: &[CnfLit]) -> bool {
        let mut lits: Vec<Lit> = c.iter().map(|l| mk_lit(*l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == neg(w[1])) {
            return true; // tautology
        }
        lits.retain(|l| self.value(*l) != FALSE);
        if lits.iter().any(|l| self.value(*l) == TRUE) {
            return true;
        }
        match lits.len() {
            0 => false,
            1 => {
                self.enqueue(lits[0], NO_REASON);
                self.propagate() == NO_REASON
            }
            _ => {
                self.attach(lits, false, 0);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(Watch { cref, blocker: lits[1] });
        self.watches[lits[1] as usize].push(Watch { cref, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, lbd, activity: 0.0 });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = var(l);
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l & 1 == 1 { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns the conflicting clause, or `NO_REASON`.
    fn propagate(&mut self) -> u32 {
        let mut conflict = NO_REASON;
        while self.qhead < self.trail.len() && conflict == NO_REASON {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = neg(p);
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == TRUE {
                    ws[j] = Watch { cref: w.cref, blocker: first };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != FALSE {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l as usize].push(Watch { cref: w.cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = w;
                j += 1;
                if self.value(first) == FALSE {
                    conflict = w.cref;
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut cref: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let cur = self.decision_level();
        loop {
            if self.clauses[cref as usize].learnt {
                self.bump_clause(cref as usize);
            }
            let start = if p.is_some() { 1 } else { 0 };
            let n = self.clauses[cref as usize].lits.len();
            for k in start..n {
                let q = self.clauses[cref as usize].lits[k];
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= cur {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            cref = self.reason[var(lit)];
            self.seen[var(lit)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = neg(p.expect("conflict at level > 0"));

        // drop literals implied by the rest of the clause
        let mut keep = vec![learnt[0]];
        for &q in &learnt[1..] {
            let r = self.reason[var(q)];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..].iter().all(|l| self.seen[var(*l)] || self.level[var(*l)] == 0);
            if !redundant {
                keep.push(q);
            }
        }
        for &q in &learnt[1..] {
            self.seen[var(q)] = false;
        }
        let mut learnt = keep;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[var(learnt[k])] > self.level[var(learnt[max_i])] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            self.level[var(learnt[1])]
        };
        (learnt, bt)
    }

    fn lbd(&mut self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[var(*l)]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = var(l);
            self.phase[v] = l & 1 == 0;
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        if self.num_vars > 0 && self.rng.gen_bool(RANDOM_FREQ) {
            let v = self.rng.gen_range(0..self.num_vars);
            if self.assigns[v] == UNDEF {
                return Some(2 * v as u32 + (!self.phase[v]) as u32);
            }
        }
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(2 * v as u32 + (!self.phase[v]) as u32);
            }
        }
        None
    }

    fn locked(&self, cref: u32) -> bool {
        let l = self.clauses[cref as usize].lits[0];
        self.value(l) == TRUE && self.reason[var(l)] == cref
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<u32> = self.learnts.iter().copied().filter(|c| !self.clauses[*c as usize].deleted).collect();
        cands.sort_by(|a, b| {
            let (ca, cb) = (&self.clauses[*a as usize], &self.clauses[*b as usize]);
            cb.lbd.cmp(&ca.lbd).then(ca.activity.partial_cmp(&cb.activity).unwrap_or(std::cmp::Ordering::Equal))
        });
        let target = cands.len() / 2;
        let mut removed = 0;
        for &c in &cands {
            if removed >= target {
                break;
            }
            let cl = &self.clauses[c as usize];
            if cl.lbd <= 2 || cl.lits.len() <= 2 || self.locked(c) {
                continue;
            }
            let cl = &mut self.clauses[c as usize];
            cl.deleted = true;
            cl.lits = Vec::new();
            removed += 1;
        }
        self.stats.deleted += removed as u64;
        self.learnts.retain(|c| !self.clauses[*c as usize].deleted);
        // purge stale watches
        for ws in self.watches.iter_mut() {
            ws.retain(|w| !self.clauses[w.cref as usize].deleted);
        }
    }

    pub fn solve(mut self) -> (SatResult, SatStats) {
        if self.empty || self.propagate() != NO_REASON {
            return (SatResult::Unsat, self.stats);
        }
        let mut luby_idx = 0u64;
        loop {
            let limit = luby(luby_idx) * RESTART_UNIT;
            luby_idx += 1;
            match self.search(limit) {
                Some(r) => return (r, self.stats),
                None => {
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                }
            }
        }
    }

    fn search(&mut self, conflict_limit: u64) -> Option<SatResult> {
        let mut conflicts = 0u64;
        loop {
            let confl = self.propagate();
            if confl != NO_REASON {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    return Some(SatResult::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let lbd = self.lbd(&learnt);
                    let first = learnt[0];
                    let cref = self.attach(learnt, true, lbd);
                    self.bump_clause(cref as usize);
                    self.enqueue(first, cref);
                }
                self.stats.learnt += 1;
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if let Some(max) = self.config.max_conflicts {
                    if self.stats.conflicts >= max {
                        return Some(SatResult::ResourceOut);
                    }
                }
            } else {
                if conflicts >= conflict_limit {
                    return None;
                }
                if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                match self.pick_branch() {
                    None => {
                        let mut model = vec![false; self.num_vars + 1];
                        for v in 0..self.num_vars {
                            model[v + 1] = self.assigns[v] == TRUE;
                        }
                        return Some(SatResult::Sat(model));
                    }
                    Some(l) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }
}

/// The Luby sequence 1 1 2 1 1 2 4 1 1 2 ...
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}

/// Binary max-heap of variables keyed by activity.
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(n), pos: vec![NOT_IN_HEAP; n] }
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.pos[v] != NOT_IN_HEAP {
            return;
        }
        self.pos[v] = self.heap.len();
        self.heap.push(v);
        self.up(self.pos[v], act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.pos[v] != NOT_IN_HEAP {
            self.up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p]] >= act[v] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i]] = i;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r]] > act[self.heap[l]] { r } else { l };
            if act[self.heap[c]] <= act[v] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = i;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(n: u32, cls: &[&[i32]]) -> Cnf {
        Cnf { num_vars: n, clauses: cls.iter().map(|c| c.to_vec()).collect() }
    }

    fn brute(c: &Cnf) -> bool {
        let n = c.num_vars as usize;
        (0u64..1 << n).any(|m| {
            let a: Vec<bool> = std::iter::once(false).chain((0..n).map(|i| m >> i & 1 == 1)).collect();
            c.is_satisfied_by(&a)
        })
    }

    /// Pigeons `p` into holes `h`; variable for pigeon i in hole j.
    fn php(p: u32, h: u32) -> Cnf {
        let v = |i: u32, j: u32| (i * h + j + 1) as i32;
        let mut c = Cnf { num_vars: p * h, clauses: vec![] };
        for i in 0..p {
            c.clauses.push((0..h).map(|j| v(i, j)).collect());
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    c.clauses.push(vec![-v(a, j), -v(b, j)]);
                }
            }
        }
        c
    }

    #[test]
    fn trivial() {
        assert!(matches!(sat_solve(&cnf(0, &[]), SatConfig::default()), SatResult::Sat(_)));
        assert_eq!(sat_solve(&cnf(1, &[&[1], &[-1]]), SatConfig::default()), SatResult::Unsat);
        assert_eq!(sat_solve(&cnf(1, &[&[]]), SatConfig::default()), SatResult::Unsat);
    }

    #[test]
    fn pigeonhole() {
        let c = php(4, 3);
        assert!(!brute(&c));
        assert_eq!(sat_solve(&c, SatConfig::default()), SatResult::Unsat);
        let c = php(7, 6);
        assert_eq!(sat_solve(&c, SatConfig::default()), SatResult::Unsat);
        let c = php(5, 5);
        match sat_solve(&c, SatConfig::default()) {
            SatResult::Sat(m) => assert!(c.is_satisfied_by(&m)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn budget() {
        let c = php(9, 8);
        let r = sat_solve(&c, SatConfig { max_conflicts: Some(10), seed: 0 });
        assert_eq!(r, SatResult::ResourceOut);
    }

    #[test]
    fn luby_prefix() {
        let s: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(s, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn random_3sat_against_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..300 {
            let n = rng.gen_range(1..=12u32);
            let m = rng.gen_range(0..=(5 * n as usize));
            let mut c = Cnf { num_vars: n, clauses: vec![] };
            for _ in 0..m {
                let k = rng.gen_range(1..=3);
                let cl: Vec<i32> = (0..k)
                    .map(|_| {
                        let v = rng.gen_range(1..=n) as i32;
                        if rng.gen_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect();
                c.clauses.push(cl);
            }
            let expect = brute(&c);
            let seed = round as u64;
            match sat_solve(&c, SatConfig { max_conflicts: None, seed }) {
                SatResult::Sat(a) => {
                    assert!(expect, "round {round}");
                    assert!(c.is_satisfied_by(&a));
                }
                SatResult::Unsat => assert!(!expect, "round {round}"),
                SatResult::ResourceOut => panic!("no budget set"),
            }
        }
    }

    #[test]
    fn deterministic() {
        let c = php(6, 6);
        let cfg = SatConfig { max_conflicts: None, seed: 42 };
        assert_eq!(sat_solve(&c, cfg), sat_solve(&c, cfg));
    }
}
