//! Prime fields `F_p` with canonical residues.
//!
//! Bulk data (matrices, queries, stored columns) is kept as raw `u32`
//! residues next to the [`PrimeField`] that owns them; [`FieldElement`]
//! is the self-describing scalar used at API boundaries.

use std::fmt;

use crate::error::{Error, Result};

const MAX_MODULUS: u64 = (1 << 31) - 1;

/// The field of residues modulo a prime `p <= 2^31 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    /// Builds `F_p`, rejecting composite moduli with their smallest factor.
    pub fn new(p: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&p) {
            return Err(Error::ModulusOutOfRange(p));
        }
        if let Some(factor) = smallest_factor(p) {
            return Err(Error::NotPrime { modulus: p, factor });
        }
        Ok(Self { p: p as u32 })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    /// Number of field elements as a wide integer, for state-count arithmetic.
    pub fn order(&self) -> u128 {
        self.p as u128
    }

    pub fn elem(&self, value: u64) -> FieldElement {
        FieldElement {
            value: self.reduce(value),
            modulus: self.p,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    #[inline]
    pub fn reduce(&self, v: u64) -> u32 {
        (v % self.p as u64) as u32
    }

    #[inline]
    pub fn reduce_signed(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        if s >= self.p as u64 {
            (s - self.p as u64) as u32
        } else {
            s as u32
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.p as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a.is_multiple_of(self.p) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.p as u64 - 2))
    }

    /// Inner product of two residue vectors.
    pub fn dot(&self, a: &[u32], b: &[u32]) -> u32 {
        let p = self.p as u64;
        a.iter()
            .zip(b)
            .fold(0u64, |acc, (&x, &y)| (acc + x as u64 * y as u64) % p) as u32
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

fn smallest_factor(p: u64) -> Option<u64> {
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return Some(d);
        }
        d += 1;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
}

/// A residue tagged with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    modulus: u32,
}

impl FieldElement {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.modulus }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn apply(self, other: FieldElement, op: Op) -> Result<FieldElement> {
        if self.modulus != other.modulus {
            return Err(Error::FieldMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        let f = self.field();
        let value = match op {
            Op::Add => f.add(self.value, other.value),
            Op::Sub => f.sub(self.value, other.value),
            Op::Mul => f.mul(self.value, other.value),
        };
        Ok(FieldElement { value, ..self })
    }

    pub fn try_add(self, other: FieldElement) -> Result<FieldElement> {
        self.apply(other, Op::Add)
    }

    pub fn try_sub(self, other: FieldElement) -> Result<FieldElement> {
        self.apply(other, Op::Sub)
    }

    pub fn try_mul(self, other: FieldElement) -> Result<FieldElement> {
        self.apply(other, Op::Mul)
    }

    pub fn inv(self) -> Result<FieldElement> {
        let value = self.field().inv(self.value)?;
        Ok(FieldElement { value, ..self })
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement {
            value: self.field().neg(self.value),
            ..self
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
