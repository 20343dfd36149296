//! Ground (quantifier-free) satisfiability backends.

pub mod bitblast;
pub mod external;
pub mod sat;

use std::fmt;

use crate::bv::BitVec;
use crate::term::{CompiledTerm, Interpretation, Sort, TermId, TermManager, Value};

pub use bitblast::{bitblast, BitBlaster, BlastError};
pub use external::{external_check, external_query, parse_response};
pub use sat::{sat_solve, Cnf, CnfLit, SatConfig, SatResult, SatStats};

/// Default cap on the total number of free bits enumerated.
pub const DEFAULT_ENUM_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundVerdict {
    Sat(Interpretation),
    Unsat,
    ResourceOut(String),
}

impl GroundVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, GroundVerdict::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, GroundVerdict::Unsat)
    }
}

/// Bit-blasts `phi`, runs the SAT solver, and lifts the model back.
pub fn check(tm: &TermManager, phi: TermId, config: SatConfig) -> GroundVerdict {
    check_with_stats(tm, phi, config).0
}

pub fn check_with_stats(tm: &TermManager, phi: TermId, config: SatConfig) -> (GroundVerdict, SatStats) {
    let (cnf, bits) = match bitblast(tm, phi) {
        Ok(r) => r,
        Err(e) => return (GroundVerdict::ResourceOut(e.to_string()), SatStats::default()),
    };
    let (res, stats) = sat::Solver::new(&cnf, config).solve();
    let verdict = match res {
        SatResult::Unsat => GroundVerdict::Unsat,
        SatResult::ResourceOut => GroundVerdict::ResourceOut("conflict budget exhausted".into()),
        SatResult::Sat(assign) => {
            let mut model = Interpretation::new();
            for &v in tm.free_vars(phi) {
                let b = bits.get(&v).map(|b| b.as_slice()).unwrap_or(&[]);
                let val = |i: usize| b.get(i).is_some_and(|l| Cnf::lit_value(&assign, *l));
                match tm.var_sort(v) {
                    Sort::Bool => model.set(v, Value::Bool(val(0))),
                    Sort::Bv(w) => {
                        let mut x = 0u64;
                        for i in 0..w.bits() as usize {
                            x |= (val(i) as u64) << i;
                        }
                        model.set_bv(v, BitVec::truncating(w, x));
                    }
                }
            }
            assert_eq!(
                tm.evaluate(phi, &model).ok().and_then(|v| v.as_bool()),
                Some(true),
                "bit-blasted model does not satisfy the formula"
            );
            GroundVerdict::Sat(model)
        }
    };
    (verdict, stats)
}

/// Exhaustive reference oracle. Returns the lexicographically first model
/// (first free variable most significant).
pub fn enumerate_check(tm: &TermManager, phi: TermId, max_bits: u32) -> GroundVerdict {
    let compiled = match CompiledTerm::new(tm, phi) {
        Ok(c) => c,
        Err(e) => return GroundVerdict::ResourceOut(e.to_string()),
    };
    let inputs = compiled.inputs().to_vec();
    let widths: Vec<u32> = inputs
        .iter()
        .map(|v| match tm.var_sort(*v) {
            Sort::Bool => 1,
            Sort::Bv(w) => w.bits(),
        })
        .collect();
    let total: u32 = widths.iter().sum();
    if total > max_bits {
        return GroundVerdict::ResourceOut(format!("{total} free bits exceed the enumeration cap of {max_bits}"));
    }
    let mut vals = vec![0u64; inputs.len()];
    let mut scratch = Vec::new();
    loop {
        if compiled.eval_with(&vals, &mut scratch) == 1 {
            let mut model = Interpretation::new();
            for (i, v) in inputs.iter().enumerate() {
                match tm.var_sort(*v) {
                    Sort::Bool => model.set(*v, Value::Bool(vals[i] == 1)),
                    Sort::Bv(w) => model.set_bv(*v, BitVec::truncating(w, vals[i])),
                }
            }
            return GroundVerdict::Sat(model);
        }
        // odometer, last input least significant
        let mut i = inputs.len();
        loop {
            if i == 0 {
                return GroundVerdict::Unsat;
            }
            i -= 1;
            let max = if widths[i] == 64 { u64::MAX } else { (1u64 << widths[i]) - 1 };
            if vals[i] < max {
                vals[i] += 1;
                break;
            }
            vals[i] = 0;
        }
    }
}

/// Choice of ground decision procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundSolver {
    Bitblast(SatConfig),
    Enumerate { max_bits: u32 },
    External { command: Vec<String> },
}

impl Default for GroundSolver {
    fn default() -> Self {
        GroundSolver::Bitblast(SatConfig::default())
    }
}

impl GroundSolver {
    pub fn check(&self, tm: &TermManager, phi: TermId) -> GroundVerdict {
        match self {
            GroundSolver::Bitblast(cfg) => check(tm, phi, *cfg),
            GroundSolver::Enumerate { max_bits } => enumerate_check(tm, phi, *max_bits),
            GroundSolver::External { command } => external_check(tm, phi, command),
        }
    }
}

impl fmt::Display for GroundSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundSolver::Bitblast(_) => write!(f, "bitblast"),
            GroundSolver::Enumerate { .. } => write!(f, "enum"),
            GroundSolver::External { command } => write!(f, "external:{}", command.join(" ")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv::{Relation, Width};

    fn w(n: u32) -> Width {
        Width::new(n).unwrap()
    }

    #[test]
    fn spec_examples() {
        let mut tm = TermManager::new();
        let s = tm.new_var("s", Sort::bv(8));
        let t = tm.new_var("t", Sort::bv(8));
        let (st, tt) = (tm.var(s), tm.var(t));
        let one = tm.one(w(8));
        let s1 = tm.add(st, one);
        let f = tm.eq(st, s1);
        assert_eq!(check(&tm, f, SatConfig::default()), GroundVerdict::Unsat);

        let d = tm.sub(tt, st);
        let back = tm.add(d, st);
        let f = tm.ne(back, tt);
        assert_eq!(check(&tm, f, SatConfig::default()), GroundVerdict::Unsat);

        let a = tm.new_var("a", Sort::bv(4));
        let b = tm.new_var("b", Sort::bv(4));
        let (at, bt) = (tm.var(a), tm.var(b));
        let f = tm.ne(at, bt);
        match check(&tm, f, SatConfig::default()) {
            GroundVerdict::Sat(m) => assert_ne!(m.get_bv(a), m.get_bv(b)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn enumeration() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(4));
        let xt = tm.var(x);
        let two = tm.bv_u64(w(4), 2);
        let three = tm.bv_u64(w(4), 3);
        let p = tm.mul(xt, two);
        let f = tm.eq(p, three);
        assert_eq!(enumerate_check(&tm, f, 24), GroundVerdict::Unsat);
        let tru = tm.tru();
        assert!(enumerate_check(&tm, tru, 24).is_sat());

        let x2 = tm.new_var("x2", Sort::bv(2));
        let y2 = tm.new_var("y2", Sort::bv(2));
        let (xt, yt) = (tm.var(x2), tm.var(y2));
        let a = tm.bvand(xt, yt);
        let c = tm.bv_u64(w(2), 3);
        let f = tm.eq(a, c);
        match enumerate_check(&tm, f, 24) {
            GroundVerdict::Sat(m) => {
                assert_eq!(m.get_bv(x2).unwrap().value(), 3);
                assert_eq!(m.get_bv(y2).unwrap().value(), 3);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn enumeration_cap() {
        let mut tm = TermManager::new();
        let x = tm.new_var("x", Sort::bv(32));
        let xt = tm.var(x);
        let z = tm.zero(w(32));
        let f = tm.rel(Relation::Ugt, xt, z);
        assert!(matches!(enumerate_check(&tm, f, 24), GroundVerdict::ResourceOut(_)));
        assert!(check(&tm, f, SatConfig::default()).is_sat());
    }

    #[test]
    fn division_semantics_match() {
        let mut tm = TermManager::new();
        let a = tm.new_var("a", Sort::bv(3));
        let b = tm.new_var("b", Sort::bv(3));
        let q = tm.new_var("q", Sort::bv(3));
        let r = tm.new_var("r", Sort::bv(3));
        let (at, bt, qt, rt) = (tm.var(a), tm.var(b), tm.var(q), tm.var(r));
        let d = tm.udiv(at, bt);
        let m = tm.urem(at, bt);
        let e1 = tm.eq(d, qt);
        let e2 = tm.eq(m, rt);
        let f = tm.and2(e1, e2);
        // every (a, b) has exactly one (q, r)
        for av in 0..8 {
            for bv in 0..8 {
                let ac = tm.bv_u64(w(3), av);
                let bc = tm.bv_u64(w(3), bv);
                let ea = tm.eq(at, ac);
                let eb = tm.eq(bt, bc);
                let g = tm.and(vec![f, ea, eb]);
                let m = match check(&tm, g, SatConfig::default()) {
                    GroundVerdict::Sat(m) => m,
                    v => panic!("{v:?}"),
                };
                let (x, y) = (BitVec::truncating(w(3), av), BitVec::truncating(w(3), bv));
                use crate::bv::BvBinOp;
                assert_eq!(m.get_bv(q), Some(BitVec::binop(BvBinOp::Udiv, x, y).unwrap()));
                assert_eq!(m.get_bv(r), Some(BitVec::binop(BvBinOp::Urem, x, y).unwrap()));
            }
        }
    }
}
