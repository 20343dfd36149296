//! Fixed-width bit-vector values with SMT-LIB 2 operator semantics.
//!
//! Values are stored as masked `u64`s, so widths range over `1..=64`.
//! Division is total: `bvudiv(a, 0)` is all-ones and `bvurem(a, 0)` is `a`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BvError {
    #[error("bit-width {0} is outside the supported range 1..=64")]
    BadWidth(u32),
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(u32, u32),
    #[error("extract [{hi}:{lo}] out of range for width {width}")]
    ExtractRange { hi: u32, lo: u32, width: u32 },
    #[error("value {value:#x} does not fit in {width} bits")]
    ValueRange { value: u64, width: u32 },
    #[error("multiplicative inverse requested for even value {0}")]
    EvenInverse(u64),
}

/// Number of bits of a bit-vector sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Width(u32);

impl Width {
    pub fn new(bits: u32) -> Result<Self, BvError> {
        if (1..=MAX_WIDTH).contains(&bits) {
            Ok(Width(bits))
        } else {
            Err(BvError::BadWidth(bits))
        }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn mask(self) -> u64 {
        if self.0 == 64 {
            u64::MAX
        } else {
            (1u64 << self.0) - 1
        }
    }

    /// Number of distinct values, saturating at `u64::MAX` for width 64.
    pub fn cardinality(self) -> u64 {
        if self.0 == 64 {
            u64::MAX
        } else {
            1u64 << self.0
        }
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BvUnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BvBinOp {
    Add,
    Mul,
    And,
    Or,
    Shl,
    Lshr,
    Ashr,
    Udiv,
    Urem,
}

impl BvBinOp {
    pub const ALL: [BvBinOp; 9] = [
        BvBinOp::Add,
        BvBinOp::Mul,
        BvBinOp::And,
        BvBinOp::Or,
        BvBinOp::Shl,
        BvBinOp::Lshr,
        BvBinOp::Ashr,
        BvBinOp::Udiv,
        BvBinOp::Urem,
    ];

    pub fn is_commutative(self) -> bool {
        matches!(self, BvBinOp::Add | BvBinOp::Mul | BvBinOp::And | BvBinOp::Or)
    }

    pub fn smtlib_name(self) -> &'static str {
        match self {
            BvBinOp::Add => "bvadd",
            BvBinOp::Mul => "bvmul",
            BvBinOp::And => "bvand",
            BvBinOp::Or => "bvor",
            BvBinOp::Shl => "bvshl",
            BvBinOp::Lshr => "bvlshr",
            BvBinOp::Ashr => "bvashr",
            BvBinOp::Udiv => "bvudiv",
            BvBinOp::Urem => "bvurem",
        }
    }
}

impl BvUnOp {
    pub fn smtlib_name(self) -> &'static str {
        match self {
            BvUnOp::Not => "bvnot",
            BvUnOp::Neg => "bvneg",
        }
    }
}

/// Binary predicates over bit-vectors of equal width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Ne,
    Ult,
    Ugt,
    Ule,
    Uge,
    Slt,
    Sgt,
    Sle,
    Sge,
}

impl Relation {
    pub const ALL: [Relation; 10] = [
        Relation::Eq,
        Relation::Ne,
        Relation::Ult,
        Relation::Ugt,
        Relation::Ule,
        Relation::Uge,
        Relation::Slt,
        Relation::Sgt,
        Relation::Sle,
        Relation::Sge,
    ];

    /// The relation holding exactly when `self` does not.
    pub fn negate(self) -> Relation {
        use Relation::*;
        match self {
            Eq => Ne,
            Ne => Eq,
            Ult => Uge,
            Uge => Ult,
            Ugt => Ule,
            Ule => Ugt,
            Slt => Sge,
            Sge => Slt,
            Sgt => Sle,
            Sle => Sgt,
        }
    }

    /// The relation with its arguments swapped: `a R b` iff `b R.flip() a`.
    pub fn flip(self) -> Relation {
        use Relation::*;
        match self {
            Eq => Eq,
            Ne => Ne,
            Ult => Ugt,
            Ugt => Ult,
            Ule => Uge,
            Uge => Ule,
            Slt => Sgt,
            Sgt => Slt,
            Sle => Sge,
            Sge => Sle,
        }
    }

    pub fn is_signed(self) -> bool {
        matches!(self, Relation::Slt | Relation::Sgt | Relation::Sle | Relation::Sge)
    }

    pub fn smtlib_name(self) -> &'static str {
        use Relation::*;
        match self {
            Eq => "=",
            Ne => "distinct",
            Ult => "bvult",
            Ugt => "bvugt",
            Ule => "bvule",
            Uge => "bvuge",
            Slt => "bvslt",
            Sgt => "bvsgt",
            Sle => "bvsle",
            Sge => "bvsge",
        }
    }

    /// Short mnemonic used in catalog keys and reports.
    pub fn mnemonic(self) -> &'static str {
        use Relation::*;
        match self {
            Eq => "eq",
            Ne => "ne",
            Ult => "ult",
            Ugt => "ugt",
            Ule => "ule",
            Uge => "uge",
            Slt => "slt",
            Sgt => "sgt",
            Sle => "sle",
            Sge => "sge",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Relation> {
        Relation::ALL.into_iter().find(|r| r.mnemonic() == s)
    }
}

/// A bit-vector value. The invariant `value <= width.mask()` holds for every
/// value produced by this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitVec {
    width: Width,
    value: u64,
}

impl BitVec {
    pub fn new(width: Width, value: u64) -> Result<Self, BvError> {
        if value & !width.mask() != 0 {
            return Err(BvError::ValueRange { value, width: width.bits() });
        }
        Ok(BitVec { width, value })
    }

    /// Builds a value, discarding bits above `width`.
    pub fn truncating(width: Width, value: u64) -> Self {
        BitVec { width, value: value & width.mask() }
    }

    pub fn zero(width: Width) -> Self {
        BitVec { width, value: 0 }
    }

    pub fn one(width: Width) -> Self {
        BitVec { width, value: 1 }
    }

    pub fn ones(width: Width) -> Self {
        BitVec { width, value: width.mask() }
    }

    pub fn min_signed(width: Width) -> Self {
        BitVec { width, value: 1u64 << (width.bits() - 1) }
    }

    pub fn max_signed(width: Width) -> Self {
        BitVec { width, value: width.mask() >> 1 }
    }

    #[inline]
    pub fn width(&self) -> Width {
        self.width
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Two's-complement interpretation.
    pub fn signed_value(&self) -> i64 {
        let w = self.width.bits();
        if w == 64 {
            self.value as i64
        } else {
            let shift = 64 - w;
            ((self.value << shift) as i64) >> shift
        }
    }

    pub fn bit(&self, i: u32) -> bool {
        (self.value >> i) & 1 == 1
    }

    pub fn is_odd(&self) -> bool {
        self.value & 1 == 1
    }

    pub fn msb(&self) -> bool {
        self.bit(self.width.bits() - 1)
    }

    fn same_width(&self, other: &BitVec) -> Result<(), BvError> {
        if self.width != other.width {
            Err(BvError::WidthMismatch(self.width.bits(), other.width.bits()))
        } else {
            Ok(())
        }
    }

    pub fn unop(op: BvUnOp, a: BitVec) -> BitVec {
        let v = match op {
            BvUnOp::Not => !a.value,
            BvUnOp::Neg => a.value.wrapping_neg(),
        };
        BitVec::truncating(a.width, v)
    }

    pub fn binop(op: BvBinOp, a: BitVec, b: BitVec) -> Result<BitVec, BvError> {
        a.same_width(&b)?;
        let w = a.width;
        let bits = w.bits() as u64;
        let v = match op {
            BvBinOp::Add => a.value.wrapping_add(b.value),
            BvBinOp::Mul => a.value.wrapping_mul(b.value),
            BvBinOp::And => a.value & b.value,
            BvBinOp::Or => a.value | b.value,
            BvBinOp::Shl => {
                if b.value >= bits {
                    0
                } else {
                    a.value << b.value
                }
            }
            BvBinOp::Lshr => {
                if b.value >= bits {
                    0
                } else {
                    a.value >> b.value
                }
            }
            BvBinOp::Ashr => {
                let amount = b.value.min(bits - 1) as u32;
                let shifted = a.signed_value() >> amount;
                if b.value >= bits {
                    if a.msb() {
                        u64::MAX
                    } else {
                        0
                    }
                } else {
                    shifted as u64
                }
            }
            BvBinOp::Udiv => a.value.checked_div(b.value).unwrap_or(u64::MAX),
            BvBinOp::Urem => {
                if b.value == 0 {
                    a.value
                } else {
                    a.value % b.value
                }
            }
        };
        Ok(BitVec::truncating(w, v))
    }

    pub fn compare(rel: Relation, a: BitVec, b: BitVec) -> Result<bool, BvError> {
        a.same_width(&b)?;
        let (ua, ub) = (a.value, b.value);
        let (sa, sb) = (a.signed_value(), b.signed_value());
        Ok(match rel {
            Relation::Eq => ua == ub,
            Relation::Ne => ua != ub,
            Relation::Ult => ua < ub,
            Relation::Ugt => ua > ub,
            Relation::Ule => ua <= ub,
            Relation::Uge => ua >= ub,
            Relation::Slt => sa < sb,
            Relation::Sgt => sa > sb,
            Relation::Sle => sa <= sb,
            Relation::Sge => sa >= sb,
        })
    }

    /// `a` occupies the high bits of the result.
    pub fn concat(a: BitVec, b: BitVec) -> Result<BitVec, BvError> {
        let total = a.width.bits() + b.width.bits();
        let w = Width::new(total)?;
        Ok(BitVec { width: w, value: (a.value << b.width.bits()) | b.value })
    }

    pub fn extract(a: BitVec, hi: u32, lo: u32) -> Result<BitVec, BvError> {
        if lo > hi || hi >= a.width.bits() {
            return Err(BvError::ExtractRange { hi, lo, width: a.width.bits() });
        }
        let w = Width::new(hi - lo + 1)?;
        Ok(BitVec::truncating(w, a.value >> lo))
    }

    pub fn bvadd(self, b: BitVec) -> Result<BitVec, BvError> {
        BitVec::binop(BvBinOp::Add, self, b)
    }

    pub fn bvmul(self, b: BitVec) -> Result<BitVec, BvError> {
        BitVec::binop(BvBinOp::Mul, self, b)
    }

    pub fn bvsub(self, b: BitVec) -> Result<BitVec, BvError> {
        BitVec::binop(BvBinOp::Add, self, BitVec::unop(BvUnOp::Neg, b))
    }

    /// Inverse of an odd value modulo `2^width`, via Newton iteration
    /// (`y <- y * (2 - c*y)` doubles the number of correct low bits).
    pub fn mul_inverse_odd(self) -> Result<BitVec, BvError> {
        if !self.is_odd() {
            return Err(BvError::EvenInverse(self.value));
        }
        let c = self.value;
        let mut y: u64 = c; // correct to 3 bits for odd c
        for _ in 0..6 {
            y = y.wrapping_mul(2u64.wrapping_sub(c.wrapping_mul(y)));
        }
        Ok(BitVec::truncating(self.width, y))
    }

    /// Iterates every value of the given width in ascending order.
    pub fn all(width: Width) -> impl Iterator<Item = BitVec> {
        let mask = width.mask();
        (0..=mask).map(move |v| BitVec { width, value: v })
    }
}

impl fmt::Display for BitVec {
    /// Binary SMT-LIB literal, e.g. `#b0101`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#b")?;
        for i in (0..self.width.bits()).rev() {
            write!(f, "{}", if self.bit(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}
