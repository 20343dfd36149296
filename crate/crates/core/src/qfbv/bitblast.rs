//! Tseitin-style reduction of quantifier-free bit-vector terms to CNF.
//!
//! Gates are hashed and constant-folded. Variable 1 of the CNF is pinned to
//! true so constants are ordinary literals.

use rustc_hash::FxHashMap;
use thiserror::Error;

use super::sat::{Cnf, CnfLit};
use crate::bv::{BvBinOp, BvUnOp, Relation};
use crate::term::{Kind, Sort, TermId, TermManager, VarId};

pub const TRUE_LIT: CnfLit = 1;
pub const FALSE_LIT: CnfLit = -1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlastError {
    #[error("cannot bit-blast a quantifier or choice term")]
    NotGround,
}

#[derive(Default)]
pub struct BitBlaster {
    pub cnf: Cnf,
    bool_cache: FxHashMap<TermId, CnfLit>,
    bv_cache: FxHashMap<TermId, Vec<CnfLit>>,
    vars: FxHashMap<VarId, Vec<CnfLit>>,
    and_gates: FxHashMap<(CnfLit, CnfLit), CnfLit>,
    xor_gates: FxHashMap<(CnfLit, CnfLit), CnfLit>,
    ite_gates: FxHashMap<(CnfLit, CnfLit, CnfLit), CnfLit>,
    divisions: FxHashMap<(TermId, TermId), (Vec<CnfLit>, Vec<CnfLit>)>,
}

/// Bit-blasts `phi` and asserts it. Returns the CNF and, for each free
/// variable, its bits (least significant first; Booleans have one bit).
pub fn bitblast(tm: &TermManager, phi: TermId) -> Result<(Cnf, FxHashMap<VarId, Vec<CnfLit>>), BlastError> {
    let mut bb = BitBlaster::new();
    bb.assert(tm, phi)?;
    Ok(bb.finish())
}

impl BitBlaster {
    pub fn new() -> Self {
        let mut bb = BitBlaster::default();
        let t = bb.cnf.new_var();
        bb.cnf.add_clause([t]);
        bb
    }

    pub fn finish(self) -> (Cnf, FxHashMap<VarId, Vec<CnfLit>>) {
        (self.cnf, self.vars)
    }

    pub fn var_bits(&self, v: VarId) -> Option<&[CnfLit]> {
        self.vars.get(&v).map(|b| b.as_slice())
    }

    pub fn assert(&mut self, tm: &TermManager, phi: TermId) -> Result<(), BlastError> {
        // split top-level conjunctions to avoid a gate per conjunct
        if let Kind::And(xs) = tm.kind(phi) {
            for x in xs.clone() {
                self.assert(tm, x)?;
            }
            return Ok(());
        }
        let l = self.blast_bool(tm, phi)?;
        self.cnf.add_clause([l]);
        Ok(())
    }

    fn fresh(&mut self) -> CnfLit {
        self.cnf.new_var()
    }

    fn and(&mut self, a: CnfLit, b: CnfLit) -> CnfLit {
        if a == FALSE_LIT || b == FALSE_LIT || a == -b {
            return FALSE_LIT;
        }
        if a == TRUE_LIT || a == b {
            return b;
        }
        if b == TRUE_LIT {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(g) = self.and_gates.get(&key) {
            return *g;
        }
        let g = self.fresh();
        self.cnf.add_clause([-g, a]);
        self.cnf.add_clause([-g, b]);
        self.cnf.add_clause([g, -a, -b]);
        self.and_gates.insert(key, g);
        g
    }

    fn or(&mut self, a: CnfLit, b: CnfLit) -> CnfLit {
        -self.and(-a, -b)
    }

    fn xor(&mut self, a: CnfLit, b: CnfLit) -> CnfLit {
        match (a, b) {
            (FALSE_LIT, x) | (x, FALSE_LIT) => return x,
            (TRUE_LIT, x) | (x, TRUE_LIT) => return -x,
            _ => {}
        }
        if a == b {
            return FALSE_LIT;
        }
        if a == -b {
            return TRUE_LIT;
        }
        // normalise signs: xor(-a, b) = -xor(a, b)
        let flip = (a < 0) != (b < 0);
        let (a, b) = (a.abs(), b.abs());
        let key = if a < b { (a, b) } else { (b, a) };
        let g = match self.xor_gates.get(&key) {
            Some(g) => *g,
            None => {
                let g = self.fresh();
                self.cnf.add_clause([-g, a, b]);
                self.cnf.add_clause([-g, -a, -b]);
                self.cnf.add_clause([g, -a, b]);
                self.cnf.add_clause([g, a, -b]);
                self.xor_gates.insert(key, g);
                g
            }
        };
        if flip {
            -g
        } else {
            g
        }
    }

    fn ite(&mut self, c: CnfLit, a: CnfLit, b: CnfLit) -> CnfLit {
        if c == TRUE_LIT || a == b {
            return a;
        }
        if c == FALSE_LIT {
            return b;
        }
        if a == TRUE_LIT {
            return self.or(c, b);
        }
        if a == FALSE_LIT {
            return self.and(-c, b);
        }
        if b == TRUE_LIT {
            return self.or(-c, a);
        }
        if b == FALSE_LIT {
            return self.and(c, a);
        }
        if a == -b {
            return -self.xor(c, a);
        }
        let (c, a, b) = if c < 0 { (-c, b, a) } else { (c, a, b) };
        if let Some(g) = self.ite_gates.get(&(c, a, b)) {
            return *g;
        }
        let g = self.fresh();
        self.cnf.add_clause([-g, -c, a]);
        self.cnf.add_clause([-g, c, b]);
        self.cnf.add_clause([g, -c, -a]);
        self.cnf.add_clause([g, c, -b]);
        // redundant but helps propagation
        self.cnf.add_clause([g, -a, -b]);
        self.cnf.add_clause([-g, a, b]);
        self.ite_gates.insert((c, a, b), g);
        g
    }

    fn and_n(&mut self, xs: &[CnfLit]) -> CnfLit {
        let mut lits: Vec<CnfLit> = Vec::with_capacity(xs.len());
        for &x in xs {
            if x == FALSE_LIT || lits.contains(&-x) {
                return FALSE_LIT;
            }
            if x != TRUE_LIT && !lits.contains(&x) {
                lits.push(x);
            }
        }
        match lits.len() {
            0 => TRUE_LIT,
            1 => lits[0],
            2 => self.and(lits[0], lits[1]),
            _ => {
                let g = self.fresh();
                let mut big = vec![g];
                for &l in &lits {
                    self.cnf.add_clause([-g, l]);
                    big.push(-l);
                }
                self.cnf.add_clause(big);
                g
            }
        }
    }

    fn full_add(&mut self, a: CnfLit, b: CnfLit, c: CnfLit) -> (CnfLit, CnfLit) {
        let ab = self.xor(a, b);
        let sum = self.xor(ab, c);
        let g1 = self.and(a, b);
        let g2 = self.and(ab, c);
        let carry = self.or(g1, g2);
        (sum, carry)
    }

    fn adder(&mut self, a: &[CnfLit], b: &[CnfLit], mut carry: CnfLit) -> Vec<CnfLit> {
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let (s, c) = self.full_add(a[i], b[i], carry);
            out.push(s);
            carry = c;
        }
        out
    }

    fn multiplier(&mut self, a: &[CnfLit], b: &[CnfLit]) -> Vec<CnfLit> {
        let n = a.len();
        let mut acc = vec![FALSE_LIT; n];
        for i in 0..n {
            if b[i] == FALSE_LIT {
                continue;
            }
            let mut partial = vec![FALSE_LIT; n];
            for j in i..n {
                partial[j] = self.and(a[j - i], b[i]);
            }
            acc = self.adder(&acc, &partial, FALSE_LIT);
        }
        acc
    }

    fn equal(&mut self, a: &[CnfLit], b: &[CnfLit]) -> CnfLit {
        let bits: Vec<CnfLit> = a.iter().zip(b).map(|(x, y)| -self.xor(*x, *y)).collect();
        self.and_n(&bits)
    }

    fn ult(&mut self, a: &[CnfLit], b: &[CnfLit]) -> CnfLit {
        let mut lt = FALSE_LIT;
        for i in 0..a.len() {
            let strict = self.and(-a[i], b[i]);
            let same = -self.xor(a[i], b[i]);
            let keep = self.and(same, lt);
            lt = self.or(strict, keep);
        }
        lt
    }

    fn slt(&mut self, a: &[CnfLit], b: &[CnfLit]) -> CnfLit {
        let n = a.len();
        let mut a2 = a.to_vec();
        let mut b2 = b.to_vec();
        a2[n - 1] = -a[n - 1];
        b2[n - 1] = -b[n - 1];
        self.ult(&a2, &b2)
    }

    fn shift(&mut self, op: BvBinOp, a: &[CnfLit], b: &[CnfLit]) -> Vec<CnfLit> {
        let n = a.len();
        let fill = if op == BvBinOp::Ashr { a[n - 1] } else { FALSE_LIT };
        let mut cur = a.to_vec();
        let mut overflow = FALSE_LIT;
        for (k, &bit) in b.iter().enumerate() {
            let amount = if k < 64 { 1u128 << k } else { u128::MAX };
            if amount >= n as u128 {
                overflow = self.or(overflow, bit);
                continue;
            }
            let s = amount as usize;
            let shifted: Vec<CnfLit> = (0..n)
                .map(|i| match op {
                    BvBinOp::Shl => {
                        if i >= s {
                            cur[i - s]
                        } else {
                            FALSE_LIT
                        }
                    }
                    _ => {
                        if i + s < n {
                            cur[i + s]
                        } else {
                            fill
                        }
                    }
                })
                .collect();
            cur = (0..n).map(|i| self.ite(bit, shifted[i], cur[i])).collect();
        }
        cur.iter().map(|l| self.ite(overflow, fill, *l)).collect()
    }

    /// Quotient and remainder bits for `a / b`, shared between udiv and urem.
    fn division(&mut self, tm: &TermManager, ta: TermId, tb: TermId) -> Result<(Vec<CnfLit>, Vec<CnfLit>), BlastError> {
        if let Some(r) = self.divisions.get(&(ta, tb)) {
            return Ok(r.clone());
        }
        let a = self.blast_bv(tm, ta)?;
        let b = self.blast_bv(tm, tb)?;
        let n = a.len();
        let q: Vec<CnfLit> = (0..n).map(|_| self.fresh()).collect();
        let r: Vec<CnfLit> = (0..n).map(|_| self.fresh()).collect();
        let zeros = vec![FALSE_LIT; n];
        let b_zero = self.equal(&b, &zeros);

        // b = 0: q = ~0, r = a
        for i in 0..n {
            self.cnf.add_clause([-b_zero, q[i]]);
            let e = -self.xor(r[i], a[i]);
            self.cnf.add_clause([-b_zero, e]);
        }
        // b != 0: q * b + r = a at double width (cannot wrap there), r < b
        let ext = |v: &[CnfLit]| {
            let mut w = v.to_vec();
            w.resize(2 * n, FALSE_LIT);
            w
        };
        let prod = self.multiplier(&ext(&q), &ext(&b));
        let sum = self.adder(&prod, &ext(&r), FALSE_LIT);
        let sum_ok = self.equal(&sum, &ext(&a));
        let rem_ok = self.ult(&r, &b);
        self.cnf.add_clause([b_zero, sum_ok]);
        self.cnf.add_clause([b_zero, rem_ok]);
        self.divisions.insert((ta, tb), (q.clone(), r.clone()));
        Ok((q, r))
    }

    fn var_bits_or_new(&mut self, v: VarId, n: usize) -> Vec<CnfLit> {
        if let Some(b) = self.vars.get(&v) {
            return b.clone();
        }
        let bits: Vec<CnfLit> = (0..n).map(|_| self.fresh()).collect();
        self.vars.insert(v, bits.clone());
        bits
    }

    pub fn blast_bool(&mut self, tm: &TermManager, t: TermId) -> Result<CnfLit, BlastError> {
        if let Some(l) = self.bool_cache.get(&t) {
            return Ok(*l);
        }
        let l = match tm.kind(t).clone() {
            Kind::BoolConst(b) => {
                if b {
                    TRUE_LIT
                } else {
                    FALSE_LIT
                }
            }
            Kind::Var(v) => self.var_bits_or_new(v, 1)[0],
            Kind::Not(a) => -self.blast_bool(tm, a)?,
            Kind::And(xs) => {
                let ls = xs.iter().map(|x| self.blast_bool(tm, *x)).collect::<Result<Vec<_>, _>>()?;
                self.and_n(&ls)
            }
            Kind::Or(xs) => {
                let ls = xs.iter().map(|x| self.blast_bool(tm, *x).map(|l| -l)).collect::<Result<Vec<_>, _>>()?;
                -self.and_n(&ls)
            }
            Kind::Implies(a, b) => {
                let (a, b) = (self.blast_bool(tm, a)?, self.blast_bool(tm, b)?);
                self.or(-a, b)
            }
            Kind::Iff(a, b) => {
                let (a, b) = (self.blast_bool(tm, a)?, self.blast_bool(tm, b)?);
                -self.xor(a, b)
            }
            Kind::Ite(c, a, b) => {
                let c = self.blast_bool(tm, c)?;
                let a = self.blast_bool(tm, a)?;
                let b = self.blast_bool(tm, b)?;
                self.ite(c, a, b)
            }
            Kind::Rel(rel, a, b) => {
                let x = self.blast_bv(tm, a)?;
                let y = self.blast_bv(tm, b)?;
                match rel {
                    Relation::Eq => self.equal(&x, &y),
                    Relation::Ne => -self.equal(&x, &y),
                    Relation::Ult => self.ult(&x, &y),
                    Relation::Ugt => self.ult(&y, &x),
                    Relation::Ule => -self.ult(&y, &x),
                    Relation::Uge => -self.ult(&x, &y),
                    Relation::Slt => self.slt(&x, &y),
                    Relation::Sgt => self.slt(&y, &x),
                    Relation::Sle => -self.slt(&y, &x),
                    Relation::Sge => -self.slt(&x, &y),
                }
            }
            Kind::Choice(..) | Kind::Forall(..) | Kind::Exists(..) => return Err(BlastError::NotGround),
            k => unreachable!("bit-vector term in Boolean position: {k:?}"),
        };
        self.bool_cache.insert(t, l);
        Ok(l)
    }

    pub fn blast_bv(&mut self, tm: &TermManager, t: TermId) -> Result<Vec<CnfLit>, BlastError> {
        if let Some(b) = self.bv_cache.get(&t) {
            return Ok(b.clone());
        }
        let bits = match tm.kind(t).clone() {
            Kind::BvConst(c) => (0..c.width().bits()).map(|i| if c.bit(i) { TRUE_LIT } else { FALSE_LIT }).collect(),
            Kind::Var(v) => {
                let n = match tm.var_sort(v) {
                    Sort::Bv(w) => w.bits() as usize,
                    Sort::Bool => unreachable!("Boolean variable in bit-vector position"),
                };
                self.var_bits_or_new(v, n)
            }
            Kind::BvUn(op, a) => {
                let a = self.blast_bv(tm, a)?;
                let inv: Vec<CnfLit> = a.iter().map(|l| -l).collect();
                match op {
                    BvUnOp::Not => inv,
                    BvUnOp::Neg => {
                        let zeros = vec![FALSE_LIT; a.len()];
                        self.adder(&inv, &zeros, TRUE_LIT)
                    }
                }
            }
            Kind::BvBin(op, ta, tb) => match op {
                BvBinOp::Udiv => self.division(tm, ta, tb)?.0,
                BvBinOp::Urem => self.division(tm, ta, tb)?.1,
                _ => {
                    let a = self.blast_bv(tm, ta)?;
                    let b = self.blast_bv(tm, tb)?;
                    match op {
                        BvBinOp::Add => self.adder(&a, &b, FALSE_LIT),
                        BvBinOp::Mul => self.multiplier(&a, &b),
                        BvBinOp::And => a.iter().zip(&b).map(|(x, y)| self.and(*x, *y)).collect(),
                        BvBinOp::Or => a.iter().zip(&b).map(|(x, y)| self.or(*x, *y)).collect(),
                        BvBinOp::Shl | BvBinOp::Lshr | BvBinOp::Ashr => self.shift(op, &a, &b),
                        BvBinOp::Udiv | BvBinOp::Urem => unreachable!(),
                    }
                }
            },
            Kind::Concat(a, b) => {
                let hi = self.blast_bv(tm, a)?;
                let mut lo = self.blast_bv(tm, b)?;
                lo.extend(hi);
                lo
            }
            Kind::Extract { hi, lo, arg } => {
                let a = self.blast_bv(tm, arg)?;
                a[lo as usize..=hi as usize].to_vec()
            }
            Kind::Ite(c, a, b) => {
                let c = self.blast_bool(tm, c)?;
                let a = self.blast_bv(tm, a)?;
                let b = self.blast_bv(tm, b)?;
                a.iter().zip(&b).map(|(x, y)| self.ite(c, *x, *y)).collect()
            }
            Kind::Choice(..) => return Err(BlastError::NotGround),
            k => unreachable!("Boolean term in bit-vector position: {k:?}"),
        };
        self.bv_cache.insert(t, bits.clone());
        Ok(bits)
    }
}
