//! Exact coefficient fields: `Q` and quadratic extensions `Q(√m)`.
//!
//! A field element is stored as `a + b√m` with exact rationals `a`, `b`
//! (`b = 0` over the plain rationals). Quadratic extensions carry exactly one
//! nontrivial automorphism, the conjugation `√m -> -√m`. Real extensions
//! (`m > 0`) are ordered by embedding `√m` as the positive real root.

use std::fmt;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{sqrt_exact, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rationals,
    /// `Q(√m)` for a squarefree integer `m ∉ {0, 1}`.
    Quadratic(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldDescriptor {
    kind: FieldKind,
}

fn is_squarefree(m: i64) -> bool {
    let mut n = m.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        while n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

impl FieldDescriptor {
    pub fn rationals() -> Self {
        FieldDescriptor {
            kind: FieldKind::Rationals,
        }
    }

    pub fn quadratic(m: i64) -> Result<Self> {
        if m == 0 || m == 1 {
            return Err(Error::InvalidInput(format!("radicand {m} must not be 0 or 1")));
        }
        if !is_squarefree(m) {
            return Err(Error::InvalidInput(format!("radicand {m} must be squarefree")));
        }
        Ok(FieldDescriptor {
            kind: FieldKind::Quadratic(m),
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn radicand(&self) -> Option<i64> {
        match self.kind {
            FieldKind::Rationals => None,
            FieldKind::Quadratic(m) => Some(m),
        }
    }

    /// `Q` and real quadratic extensions are ordered fields.
    pub fn is_ordered(&self) -> bool {
        match self.kind {
            FieldKind::Rationals => true,
            FieldKind::Quadratic(m) => m > 0,
        }
    }

    /// Build an element, rejecting a radical part over the plain rationals.
    pub fn element(&self, rational: Rat, radical: Rat) -> Result<FieldElement> {
        if self.kind == FieldKind::Rationals && !radical.is_zero() {
            return Err(Error::InvalidInput(
                "rational field has no radical part".into(),
            ));
        }
        Ok(FieldElement { rational, radical })
    }

    pub fn from_rat(&self, q: Rat) -> FieldElement {
        FieldElement {
            rational: q,
            radical: Rat::zero(),
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.from_rat(Rat::zero())
    }

    pub fn one(&self) -> FieldElement {
        self.from_rat(Rat::one())
    }

    /// The element `√m`; errors over `Q`.
    pub fn radical_unit(&self) -> Result<FieldElement> {
        match self.kind {
            FieldKind::Rationals => Err(Error::InvalidInput(
                "rational field has no radical generator".into(),
            )),
            FieldKind::Quadratic(_) => Ok(FieldElement {
                rational: Rat::zero(),
                radical: Rat::one(),
            }),
        }
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        FieldElement {
            rational: &x.rational + &y.rational,
            radical: &x.radical + &y.radical,
        }
    }

    pub fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        FieldElement {
            rational: &x.rational - &y.rational,
            radical: &x.radical - &y.radical,
        }
    }

    pub fn neg(&self, x: &FieldElement) -> FieldElement {
        FieldElement {
            rational: -&x.rational,
            radical: -&x.radical,
        }
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        match self.kind {
            FieldKind::Rationals => self.from_rat(&x.rational * &y.rational),
            FieldKind::Quadratic(m) => {
                let m = Rat::from_integer(m.into());
                FieldElement {
                    rational: &x.rational * &y.rational + (&x.radical * &y.radical) * &m,
                    radical: &x.rational * &y.radical + &x.radical * &y.rational,
                }
            }
        }
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self.kind {
            FieldKind::Rationals => Ok(self.from_rat(x.rational.recip())),
            FieldKind::Quadratic(m) => {
                // (a + b√m)^{-1} = (a - b√m) / (a² - m b²); the norm is nonzero
                // because √m is irrational.
                let m = Rat::from_integer(m.into());
                let norm = &x.rational * &x.rational - (&x.radical * &x.radical) * &m;
                debug_assert!(!norm.is_zero());
                Ok(FieldElement {
                    rational: &x.rational / &norm,
                    radical: -&x.radical / &norm,
                })
            }
        }
    }

    pub fn div(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    pub fn pow(&self, x: &FieldElement, n: i64) -> Result<FieldElement> {
        let mut base = if n < 0 { self.inv(x)? } else { x.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        Ok(acc)
    }

    /// Exact sign: `a + b√m > 0` iff `(a>0 ∧ a²>mb²) ∨ (b>0 ∧ mb²>a²) ∨ (a>0 ∧ b>0)`.
    pub fn is_positive(&self, x: &FieldElement) -> Result<bool> {
        if !self.is_ordered() {
            return Err(Error::UnorderedField);
        }
        match self.kind {
            FieldKind::Rationals => Ok(x.rational.is_positive()),
            FieldKind::Quadratic(m) => {
                let m = Rat::from_integer(m.into());
                let a2 = &x.rational * &x.rational;
                let mb2 = (&x.radical * &x.radical) * &m;
                Ok((x.rational.is_positive() && a2 > mb2)
                    || (x.radical.is_positive() && mb2 > a2)
                    || (x.rational.is_positive() && x.radical.is_positive()))
            }
        }
    }

    /// Exact square root when the argument is a recognizable square;
    /// otherwise `RootUnavailable`. This is the partial root provider the
    /// ordered-field interface exposes.
    pub fn sqrt(&self, x: &FieldElement) -> Result<FieldElement> {
        let unavailable = || Error::RootUnavailable(x.to_string());
        match self.kind {
            FieldKind::Rationals => {
                let r = sqrt_exact(&x.rational).ok_or_else(unavailable)?;
                Ok(self.from_rat(r))
            }
            FieldKind::Quadratic(m) => {
                let mq = Rat::from_integer(m.into());
                if x.is_zero() {
                    return Ok(self.zero());
                }
                // Solve (p + q√m)² = a + b√m: p² + m q² = a, 2pq = b. Then
                // p² = (a ± s)/2 where s² = a² − m b² is the norm.
                let norm = &x.rational * &x.rational - (&x.radical * &x.radical) * &mq;
                let s = sqrt_exact(&norm).ok_or_else(unavailable)?;
                for sign in [Rat::one(), -Rat::one()] {
                    let p2 = (&x.rational + &s * &sign) / crate::rational::rint(2);
                    if let Some(p) = sqrt_exact(&p2) {
                        if p.is_zero() {
                            // Pure radical candidate: q² m = a needs x = m q².
                            let q2 = &x.rational / &mq;
                            if let Some(q) = sqrt_exact(&q2) {
                                let cand = FieldElement {
                                    rational: Rat::zero(),
                                    radical: q,
                                };
                                if self.mul(&cand, &cand) == *x {
                                    return Ok(cand);
                                }
                            }
                            continue;
                        }
                        let q = &x.radical / (&p * crate::rational::rint(2));
                        let cand = FieldElement {
                            rational: p,
                            radical: q,
                        };
                        if self.mul(&cand, &cand) == *x {
                            return Ok(cand);
                        }
                    }
                }
                Err(unavailable())
            }
        }
    }

    /// Apply a field automorphism.
    pub fn aut_apply(&self, aut: FieldAut, x: &FieldElement) -> Result<FieldElement> {
        match aut {
            FieldAut::Identity => Ok(x.clone()),
            FieldAut::Conjugation => {
                if self.kind == FieldKind::Rationals {
                    return Err(Error::ConjugationOnRationals);
                }
                Ok(FieldElement {
                    rational: x.rational.clone(),
                    radical: -&x.radical,
                })
            }
        }
    }

    /// All automorphisms of the field: `Q` is rigid, `Q(√m)` has conjugation.
    pub fn automorphisms(&self) -> Vec<FieldAut> {
        match self.kind {
            FieldKind::Rationals => vec![FieldAut::Identity],
            FieldKind::Quadratic(_) => vec![FieldAut::Identity, FieldAut::Conjugation],
        }
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Rationals => write!(f, "q"),
            FieldKind::Quadratic(m) => write!(f, "qsqrt:{m}"),
        }
    }
}

/// An element `rational + radical·√m` of the coefficient field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    rational: Rat,
    radical: Rat,
}

impl FieldElement {
    pub fn rational_part(&self) -> &Rat {
        &self.rational
    }

    pub fn radical_part(&self) -> &Rat {
        &self.radical
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.radical.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.rational.is_one() && self.radical.is_zero()
    }

    /// Plain rational value, if the radical part vanishes.
    pub fn as_rational(&self) -> Option<&Rat> {
        if self.radical.is_zero() {
            Some(&self.rational)
        } else {
            None
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rat_str(q: &Rat) -> String {
            if q.denom().is_one() {
                q.numer().to_string()
            } else {
                format!("{}/{}", q.numer(), q.denom())
            }
        }
        if self.radical.is_zero() {
            write!(f, "{}", rat_str(&self.rational))
        } else {
            let sign = if self.radical.is_negative() { "-" } else { "+" };
            write!(
                f,
                "({}{}{}r)",
                rat_str(&self.rational),
                sign,
                rat_str(&self.radical.abs())
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldAut {
    Identity,
    Conjugation,
}

impl FieldAut {
    pub fn is_identity(&self) -> bool {
        matches!(self, FieldAut::Identity)
    }

    /// Field automorphisms of order <= 2 are their own inverses.
    pub fn inverse(&self) -> FieldAut {
        *self
    }

    pub fn compose(&self, other: &FieldAut) -> FieldAut {
        match (self, other) {
            (FieldAut::Identity, o) => *o,
            (o, FieldAut::Identity) => *o,
            (FieldAut::Conjugation, FieldAut::Conjugation) => FieldAut::Identity,
        }
    }
}

impl fmt::Display for FieldAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldAut::Identity => write!(f, "id"),
            FieldAut::Conjugation => write!(f, "conj"),
        }
    }
}
