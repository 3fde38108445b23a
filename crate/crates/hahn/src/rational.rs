//! Exact rational scalars used throughout the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

pub type Rat = BigRational;

/// Shorthand for an exact rational `n/d`. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an exact integer rational.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn is_integer(q: &Rat) -> bool {
    q.denom().is_one()
}

/// Whether `q * level` is an integer, i.e. `q` lies on the `1/level` lattice.
pub fn on_level(q: &Rat, level: u64) -> bool {
    (q * Rat::from_integer(BigInt::from(level))).denom().is_one()
}

/// The smallest positive integer `l` with `q * l` integral.
pub fn least_level(q: &Rat) -> u64 {
    let d = q.denom().abs();
    d.try_into().expect("lattice denominator exceeds u64")
}

/// Smallest lattice point of `(1/level)Z` that is `>= q`.
pub fn ceil_to_level(q: &Rat, level: u64) -> Rat {
    let scaled = q * Rat::from_integer(BigInt::from(level));
    Rat::new(scaled.ceil().to_integer(), BigInt::from(level))
}

/// Exact square root of a non-negative rational, when one exists.
pub fn sqrt_exact(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some(Rat::zero());
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// Integer power with exact arithmetic; negative exponents invert.
pub fn pow_rat(base: &Rat, exp: i64) -> Rat {
    if exp == 0 {
        return Rat::one();
    }
    let mut b = if exp < 0 { base.recip() } else { base.clone() };
    let mut e = exp.unsigned_abs();
    let mut acc = Rat::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}
