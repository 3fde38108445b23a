//! Exponent lattices `(1/L)Z^d` under the lexicographic order, together with
//! their order-preserving automorphism groups as triangular matrices.
//!
//! Two lattice kinds are supported: the integer lattice `Z^n` (level fixed
//! at 1) and the rational lattice `(1/L)Q^d`-style level-`L` refinements of
//! `Q^d`. Order automorphisms are upper uni-triangular integer matrices in
//! the integer case and upper triangular rational matrices with positive
//! diagonal in the rational case. A matrix acts on exponents as a row vector
//! action `g -> g·M`; this is the orientation under which upper triangular
//! matrices preserve the lexicographic order with the first coordinate most
//! significant.

use std::cmp::Ordering;
use std::fmt;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{is_integer, least_level, on_level, rint, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    IntLattice,
    RationalLattice,
}

/// Describes an exponent group: lattice kind, dimension and level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupDescriptor {
    kind: GroupKind,
    dimension: usize,
    level: u64,
}

impl GroupDescriptor {
    /// The lattice `Z^n` with lexicographic order.
    pub fn int_lattice(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        Ok(GroupDescriptor {
            kind: GroupKind::IntLattice,
            dimension,
            level: 1,
        })
    }

    /// The lattice `(1/level)Z^d` inside `Q^d` with lexicographic order.
    pub fn rational_lattice(dimension: usize, level: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if level == 0 {
            return Err(Error::InvalidInput("level must be >= 1".into()));
        }
        Ok(GroupDescriptor {
            kind: GroupKind::RationalLattice,
            dimension,
            level,
        })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn zero(&self) -> Exponent {
        Exponent::new(vec![Rat::zero(); self.dimension])
    }

    /// The lattice generator `(1/L)e_i`.
    pub fn generator(&self, i: usize) -> Exponent {
        assert!(i < self.dimension, "generator index out of range");
        let mut coords = vec![Rat::zero(); self.dimension];
        coords[i] = Rat::new(1.into(), self.level.into());
        Exponent::new(coords)
    }

    /// Whether `g` lies on this lattice (dimension and level both match).
    pub fn contains(&self, g: &Exponent) -> bool {
        g.dimension() == self.dimension && g.coords().iter().all(|c| on_level(c, self.level))
    }

    /// The same group refined to a level divisible by both levels.
    pub fn refined(&self, level: u64) -> Self {
        let level = num::integer::lcm(self.level, level);
        GroupDescriptor {
            kind: GroupKind::RationalLattice,
            dimension: self.dimension,
            level,
        }
    }

    /// Common refinement for binary operations; integer lattices never refine.
    pub fn unify(&self, other: &Self) -> Result<Self> {
        if self.kind != other.kind || self.dimension != other.dimension {
            return Err(Error::MixedDescriptors(format!(
                "{self} vs {other}"
            )));
        }
        if self.level == other.level {
            return Ok(self.clone());
        }
        match self.kind {
            GroupKind::IntLattice => unreachable!("integer lattices are always level 1"),
            GroupKind::RationalLattice => Ok(self.refined(other.level)),
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::IntLattice => write!(f, "z:{}", self.dimension),
            GroupKind::RationalLattice => write!(f, "q:{}:{}", self.dimension, self.level),
        }
    }
}

/// A point of an exponent lattice: a vector of exact rationals.
///
/// The derived ordering on the coordinate vector is exactly the lexicographic
/// group order (first coordinate most significant).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(Vec<Rat>);

impl Exponent {
    pub fn new(coords: Vec<Rat>) -> Self {
        assert!(!coords.is_empty(), "exponent needs at least one coordinate");
        Exponent(coords)
    }

    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Lex positivity: the first nonzero coordinate is positive.
    pub fn is_positive(&self) -> bool {
        for c in &self.0 {
            if !c.is_zero() {
                return c.is_positive();
            }
        }
        false
    }

    /// Index of the first nonzero coordinate, if any.
    pub fn leading_index(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    /// Smallest `L` such that this exponent lies on the `1/L` lattice.
    pub fn least_level(&self) -> u64 {
        self.0
            .iter()
            .fold(1u64, |acc, c| num::integer::lcm(acc, least_level(c)))
    }

    pub(crate) fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.dimension(), other.dimension());
        Exponent(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub(crate) fn sub(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.dimension(), other.dimension());
        Exponent(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub(crate) fn neg(&self) -> Exponent {
        Exponent(self.0.iter().map(|a| -a).collect())
    }

    pub(crate) fn scale(&self, q: &Rat) -> Exponent {
        Exponent(self.0.iter().map(|a| a * q).collect())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coord = |c: &Rat, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if is_integer(c) {
                write!(f, "{}", c.numer())
            } else {
                write!(f, "{}/{}", c.numer(), c.denom())
            }
        };
        if self.0.len() == 1 {
            return coord(&self.0[0], f);
        }
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            coord(c, f)?;
        }
        write!(f, "]")
    }
}

/// Total lexicographic comparison; errors on dimension mismatch.
pub fn exp_compare(a: &Exponent, b: &Exponent) -> Result<Ordering> {
    check_dim(a, b)?;
    Ok(a.cmp(b))
}

/// Componentwise sum; errors on dimension mismatch.
pub fn exp_add(a: &Exponent, b: &Exponent) -> Result<Exponent> {
    check_dim(a, b)?;
    Ok(a.add(b))
}

pub fn exp_neg(a: &Exponent) -> Exponent {
    a.neg()
}

/// Scale by a rational inside a fixed-level context. The result must stay on
/// the `1/level` lattice.
pub fn exp_scale(q: &Rat, a: &Exponent, level: u64) -> Result<Exponent> {
    let scaled = a.scale(q);
    for c in scaled.coords() {
        if !on_level(c, level) {
            return Err(Error::LevelExceeded {
                what: format!("{scaled}"),
                level,
            });
        }
    }
    Ok(scaled)
}

fn check_dim(a: &Exponent, b: &Exponent) -> Result<()> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    Ok(())
}

/// A validated order-preserving automorphism of the exponent group.
///
/// Stored as an upper triangular matrix `M`; the action on an exponent is the
/// row-vector product `g·M`, under which upper triangularity with positive
/// (resp. unit) diagonal is exactly order preservation for the lexicographic
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderAutMatrix {
    kind: GroupKind,
    entries: Vec<Vec<Rat>>,
}

/// Validate a square rational matrix as a member of `UUT_n(Z)` (integer
/// lattice) or `UPT_d(Q)` (rational lattice).
pub fn oaut_check(kind: GroupKind, entries: Vec<Vec<Rat>>) -> Result<OrderAutMatrix> {
    let d = entries.len();
    if d == 0 || entries.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidInput("matrix must be square and non-empty".into()));
    }
    for (i, row) in entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if j < i && !e.is_zero() {
                return Err(Error::NotUpperTriangular { row: i, col: j });
            }
            if kind == GroupKind::IntLattice && !is_integer(e) {
                return Err(Error::NotIntegral { row: i, col: j });
            }
        }
        let diag = &row[i];
        match kind {
            GroupKind::IntLattice => {
                if !diag.is_one() {
                    return Err(Error::BadDiagonal {
                        index: i,
                        value: diag.to_string(),
                    });
                }
            }
            GroupKind::RationalLattice => {
                if !diag.is_positive() {
                    return Err(Error::BadDiagonal {
                        index: i,
                        value: diag.to_string(),
                    });
                }
            }
        }
    }
    Ok(OrderAutMatrix { kind, entries })
}

impl OrderAutMatrix {
    pub fn identity(kind: GroupKind, dimension: usize) -> Self {
        let entries = (0..dimension)
            .map(|i| {
                (0..dimension)
                    .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        OrderAutMatrix { kind, entries }
    }

    /// One-dimensional rational scaling `e -> q·e` (`o-Aut Q = Q^{>0}`).
    pub fn scaling(q: Rat) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::NonPositiveScale(q.to_string()));
        }
        Ok(OrderAutMatrix {
            kind: GroupKind::RationalLattice,
            entries: vec![vec![q]],
        })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Rat>] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, e)| if i == j { e.is_one() } else { e.is_zero() })
        })
    }

    /// Apply to an exponent: the row-vector action `g·M`.
    pub fn apply(&self, g: &Exponent) -> Result<Exponent> {
        let d = self.dimension();
        if g.dimension() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: g.dimension(),
            });
        }
        let coords = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| g.coords()[i].clone() * &self.entries[i][j])
                    .fold(Rat::zero(), |a, b| a + b)
            })
            .collect();
        Ok(Exponent::new(coords))
    }

    /// The matrix of the composite automorphism `self ∘ other`
    /// (apply `other` first, then `self`).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.kind != other.kind || self.dimension() != other.dimension() {
            return Err(Error::MixedDescriptors("order automorphism kinds differ".into()));
        }
        let d = self.dimension();
        // Row action: g·(other · self) = (g·other)·self.
        let mut entries = vec![vec![Rat::zero(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = Rat::zero();
                for k in 0..d {
                    acc += other.entries[i][k].clone() * &self.entries[k][j];
                }
                entries[i][j] = acc;
            }
        }
        oaut_check(self.kind, entries)
    }

    /// Exact inverse by back substitution; re-validated.
    pub fn invert(&self) -> Result<Self> {
        let d = self.dimension();
        let mut inv = vec![vec![Rat::zero(); d]; d];
        // Upper triangular inverse, column by column.
        for j in (0..d).rev() {
            for i in (0..=j).rev() {
                if i == j {
                    inv[i][j] = self.entries[i][i].recip();
                } else {
                    let mut acc = Rat::zero();
                    for k in (i + 1)..=j {
                        acc += self.entries[i][k].clone() * &inv[k][j];
                    }
                    inv[i][j] = -acc / &self.entries[i][i];
                }
            }
        }
        oaut_check(self.kind, inv)
    }
}

impl fmt::Display for OrderAutMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                if is_integer(e) {
                    write!(f, "{}", e.numer())?;
                } else {
                    write!(f, "{}/{}", e.numer(), e.denom())?;
                }
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Convenience constructor for integer matrices in tests and examples.
pub fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
    rows.iter()
        .map(|r| r.iter().map(|&e| rint(e)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn e(coords: &[(i64, i64)]) -> Exponent {
        Exponent::new(coords.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn lex_compare() {
        let z = e(&[(0, 1), (0, 1)]);
        assert_eq!(exp_compare(&z, &z).unwrap(), Ordering::Equal);
        assert_eq!(
            exp_compare(&e(&[(0, 1), (5, 1)]), &e(&[(1, 1), (-100, 1)])).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            exp_compare(&e(&[(1, 2), (0, 1)]), &e(&[(1, 3), (7, 1)])).unwrap(),
            Ordering::Greater
        );
        assert!(matches!(
            exp_compare(&e(&[(1, 1)]), &z),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn group_ops() {
        assert_eq!(
            exp_add(&e(&[(1, 1), (2, 1)]), &e(&[(3, 1), (-2, 1)])).unwrap(),
            e(&[(4, 1), (0, 1)])
        );
        assert_eq!(exp_neg(&e(&[(1, 2), (0, 1)])), e(&[(-1, 2), (0, 1)]));
        let a = e(&[(1, 1), (0, 1)]);
        assert_eq!(exp_add(&a, &exp_neg(&a)).unwrap(), e(&[(0, 1), (0, 1)]));
    }

    #[test]
    fn scaling_respects_level() {
        let a = e(&[(1, 1), (0, 1)]);
        assert_eq!(
            exp_scale(&rat(1, 2), &a, 2).unwrap(),
            e(&[(1, 2), (0, 1)])
        );
        assert!(matches!(
            exp_scale(&rat(1, 2), &a, 1),
            Err(Error::LevelExceeded { .. })
        ));
    }

    #[test]
    fn check_membership() {
        assert!(oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 0], &[0, 1]])).is_ok());
        assert!(oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 1], &[0, 1]])).is_ok());
        assert!(matches!(
            oaut_check(GroupKind::IntLattice, int_matrix(&[&[2, 0], &[0, 1]])),
            Err(Error::BadDiagonal { .. })
        ));
        assert!(matches!(
            oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 0], &[1, 1]])),
            Err(Error::NotUpperTriangular { .. })
        ));
        assert!(matches!(
            oaut_check(
                GroupKind::IntLattice,
                vec![vec![rat(1, 1), rat(1, 2)], vec![rat(0, 1), rat(1, 1)]]
            ),
            Err(Error::NotIntegral { .. })
        ));
        // UPT accepts positive rational diagonals, rejects non-positive ones.
        assert!(oaut_check(
            GroupKind::RationalLattice,
            vec![vec![rat(1, 2), rat(3, 1)], vec![rat(0, 1), rat(5, 1)]]
        )
        .is_ok());
        assert!(matches!(
            oaut_check(
                GroupKind::RationalLattice,
                vec![vec![rat(-1, 2), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]]
            ),
            Err(Error::BadDiagonal { .. })
        ));
    }

    #[test]
    fn action_preserves_order() {
        let m = oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 1], &[0, 1]])).unwrap();
        // Row action: e_1 picks out row 1, e_2 row 2.
        assert_eq!(
            m.apply(&e(&[(1, 1)])).unwrap_err(),
            Error::DimensionMismatch { left: 2, right: 1 }
        );
        assert_eq!(m.apply(&e(&[(1, 1), (0, 1)])).unwrap(), e(&[(1, 1), (1, 1)]));
        assert_eq!(m.apply(&e(&[(0, 1), (1, 1)])).unwrap(), e(&[(0, 1), (1, 1)]));
        // The probe that breaks the column-action convention.
        let g = e(&[(1, 1), (-1, 1)]);
        assert!(g.is_positive());
        assert!(m.apply(&g).unwrap().is_positive());

        let id = OrderAutMatrix::identity(GroupKind::IntLattice, 2);
        let g = e(&[(3, 1), (-1, 1)]);
        assert_eq!(id.apply(&g).unwrap(), g);

        let half = OrderAutMatrix::scaling(rat(1, 2)).unwrap();
        let img = half.apply(&e(&[(1, 1)])).unwrap();
        assert_eq!(img, e(&[(1, 2)]));
        assert_eq!(img.least_level(), 2);
    }

    #[test]
    fn compose_and_invert() {
        let m1 = oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 1], &[0, 1]])).unwrap();
        let m2 = oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 2], &[0, 1]])).unwrap();
        let c = m1.compose(&m2).unwrap();
        assert_eq!(
            c,
            oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 3], &[0, 1]])).unwrap()
        );
        assert_eq!(
            m1.invert().unwrap(),
            oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, -1], &[0, 1]])).unwrap()
        );
        let id = OrderAutMatrix::identity(GroupKind::IntLattice, 2);
        assert_eq!(id.invert().unwrap(), id);

        // apply(compose(m1, m2), g) == apply(m1, apply(m2, g))
        let g = e(&[(2, 1), (-3, 1)]);
        assert_eq!(
            c.apply(&g).unwrap(),
            m1.apply(&m2.apply(&g).unwrap()).unwrap()
        );
        // Round trip through the inverse.
        let upt = oaut_check(
            GroupKind::RationalLattice,
            vec![vec![rat(2, 3), rat(-1, 2)], vec![rat(0, 1), rat(5, 1)]],
        )
        .unwrap();
        let h = e(&[(1, 2), (7, 3)]);
        assert_eq!(
            upt.invert().unwrap().apply(&upt.apply(&h).unwrap()).unwrap(),
            h
        );
    }
}
