//! Truncated Hahn series arithmetic.
//!
//! A [`Series`] is a finite sorted map from exponents to nonzero field
//! elements together with a cutoff exponent: every coefficient at an exponent
//! strictly below the cutoff is exact, terms at or beyond the cutoff are
//! dropped. Binary operations produce the least cutoff the inputs guarantee:
//! addition keeps the minimum of the two cutoffs, multiplication keeps
//! `min(v(a) + cutoff(b), v(b) + cutoff(a))`.
//!
//! Inversion of units and n-th roots of 1-units run geometric/Newton
//! iterations that terminate because only finitely many candidate exponents
//! exist below the cutoff. That finiteness can fail for lexicographic
//! lattices of dimension >= 2 (a tail like `1 + t^(0,1)` has infinitely many
//! powers below the cutoff `(1,0)`); such calls fail fast with
//! `CutoffUnreachable` instead of diverging.

use std::collections::BTreeMap;
use std::fmt;

use num::One;

use crate::coeffs::{FieldDescriptor, FieldElement};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, GroupDescriptor};
use crate::rational::rint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    group: GroupDescriptor,
    field: FieldDescriptor,
    terms: BTreeMap<Exponent, FieldElement>,
    cutoff: Exponent,
}

impl Series {
    pub fn zero(group: GroupDescriptor, field: FieldDescriptor, cutoff: Exponent) -> Self {
        Series {
            group,
            field,
            terms: BTreeMap::new(),
            cutoff,
        }
    }

    pub fn one(group: GroupDescriptor, field: FieldDescriptor, cutoff: Exponent) -> Self {
        let one = field.one();
        Series::monomial(group, field, one, None, cutoff)
    }

    pub fn constant(
        group: GroupDescriptor,
        field: FieldDescriptor,
        value: FieldElement,
        cutoff: Exponent,
    ) -> Self {
        Series::monomial(group, field, value, None, cutoff)
    }

    /// A single term `value * t^exponent`; `None` means exponent zero.
    pub fn monomial(
        group: GroupDescriptor,
        field: FieldDescriptor,
        value: FieldElement,
        exponent: Option<Exponent>,
        cutoff: Exponent,
    ) -> Self {
        let exponent = exponent.unwrap_or_else(|| group.zero());
        let mut terms = BTreeMap::new();
        terms.insert(exponent, value);
        let mut s = Series {
            group,
            field,
            terms,
            cutoff,
        };
        s.normalize();
        s
    }

    /// Build from a term list; duplicate exponents are summed.
    pub fn from_terms(
        group: GroupDescriptor,
        field: FieldDescriptor,
        terms: Vec<(Exponent, FieldElement)>,
        cutoff: Exponent,
    ) -> Result<Self> {
        let mut map: BTreeMap<Exponent, FieldElement> = BTreeMap::new();
        for (g, c) in terms {
            if g.dimension() != group.dimension() {
                return Err(Error::DimensionMismatch {
                    left: group.dimension(),
                    right: g.dimension(),
                });
            }
            match map.remove(&g) {
                Some(prev) => {
                    map.insert(g, field.add(&prev, &c));
                }
                None => {
                    map.insert(g, c);
                }
            }
        }
        let mut s = Series {
            group,
            field,
            terms: map,
            cutoff,
        };
        s.normalize();
        Ok(s)
    }

    fn normalize(&mut self) {
        let cutoff = self.cutoff.clone();
        self.terms.retain(|g, c| *g < cutoff && !c.is_zero());
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn cutoff(&self) -> &Exponent {
        &self.cutoff
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &FieldElement)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Exponent> {
        self.terms.keys()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(g, c)| g.is_zero() && c.is_one())
                .unwrap_or(false)
    }

    /// `v(a) = min supp(a)`; `None` encodes the infinite valuation of zero.
    pub fn valuation(&self) -> Option<&Exponent> {
        self.terms.keys().next()
    }

    /// Valuation with the zero series collapsed to its cutoff; this is the
    /// tightest lower bound on where unknown terms may start.
    fn effective_valuation(&self) -> Exponent {
        self.valuation().unwrap_or(&self.cutoff).clone()
    }

    /// First coefficient `a_{v(a)}`; errors on the zero series.
    pub fn leading(&self) -> Result<&FieldElement> {
        self.terms.values().next().ok_or(Error::ZeroSeries)
    }

    /// Coefficient at exponent zero (zero if absent).
    pub fn constant_term(&self) -> FieldElement {
        self.coeff(&self.group.zero())
    }

    pub fn coeff(&self, g: &Exponent) -> FieldElement {
        self.terms.get(g).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Unit of the valuation ring: `v(a) = 0`.
    pub fn is_unit(&self) -> bool {
        self.valuation().map(|v| v.is_zero()).unwrap_or(false)
    }

    /// 1-unit: `v(a) = 0` with constant term 1.
    pub fn is_one_unit(&self) -> bool {
        self.is_unit() && self.constant_term().is_one()
    }

    /// Membership in the valuation ring `v(a) >= 0`.
    pub fn in_valuation_ring(&self) -> bool {
        self.valuation().map(|v| !v.neg().is_positive()).unwrap_or(true)
    }

    /// Membership in the valuation ideal `v(a) > 0`.
    pub fn in_valuation_ideal(&self) -> bool {
        self.valuation().map(|v| v.is_positive()).unwrap_or(true)
    }

    /// Retag with a refined lattice level (exponent data is unchanged).
    pub fn with_level(&self, level: u64) -> Series {
        let mut s = self.clone();
        s.group = s.group.refined(level);
        s
    }

    /// Weaken the accuracy guarantee to `min(cutoff, new_cutoff)`.
    pub fn truncated(&self, new_cutoff: &Exponent) -> Series {
        let mut s = self.clone();
        if *new_cutoff < s.cutoff {
            s.cutoff = new_cutoff.clone();
            s.normalize();
        }
        s
    }

    /// Translate every exponent (and the cutoff) by `delta`, i.e. multiply by
    /// the exact monomial `t^delta`.
    pub fn shifted(&self, delta: &Exponent) -> Series {
        let terms = self
            .terms
            .iter()
            .map(|(g, c)| (g.add(delta), c.clone()))
            .collect();
        let mut group = self.group.clone();
        let level = delta.least_level();
        if !group.contains(delta) {
            group = group.refined(level);
        }
        Series {
            group,
            field: self.field,
            terms,
            cutoff: self.cutoff.add(delta),
        }
    }

    /// Multiply every coefficient by an exact field scalar.
    pub fn scaled(&self, c: &FieldElement) -> Series {
        if c.is_zero() {
            return Series::zero(self.group.clone(), self.field, self.cutoff.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|(g, v)| (g.clone(), self.field.mul(v, c)))
            .collect();
        Series {
            group: self.group.clone(),
            field: self.field,
            terms,
            cutoff: self.cutoff.clone(),
        }
    }

    fn unify(&self, other: &Series) -> Result<GroupDescriptor> {
        if self.field != other.field {
            return Err(Error::MixedDescriptors(format!(
                "fields {} vs {}",
                self.field, other.field
            )));
        }
        self.group.unify(&other.group)
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        let group = self.unify(other)?;
        let cutoff = self.cutoff.clone().min(other.cutoff.clone());
        let mut terms = self.terms.clone();
        for (g, c) in &other.terms {
            match terms.remove(g) {
                Some(prev) => {
                    terms.insert(g.clone(), self.field.add(&prev, c));
                }
                None => {
                    terms.insert(g.clone(), c.clone());
                }
            }
        }
        let mut s = Series {
            group,
            field: self.field,
            terms,
            cutoff,
        };
        s.normalize();
        Ok(s)
    }

    pub fn neg(&self) -> Series {
        let terms = self
            .terms
            .iter()
            .map(|(g, c)| (g.clone(), self.field.neg(c)))
            .collect();
        Series {
            group: self.group.clone(),
            field: self.field,
            terms,
            cutoff: self.cutoff.clone(),
        }
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        let group = self.unify(other)?;
        let cutoff = (self.effective_valuation().add(&other.cutoff))
            .min(other.effective_valuation().add(&self.cutoff));
        let mut terms: BTreeMap<Exponent, FieldElement> = BTreeMap::new();
        for (ga, ca) in &self.terms {
            for (gb, cb) in &other.terms {
                let g = ga.add(gb);
                if g >= cutoff {
                    continue;
                }
                let prod = self.field.mul(ca, cb);
                match terms.remove(&g) {
                    Some(prev) => {
                        terms.insert(g, self.field.add(&prev, &prod));
                    }
                    None => {
                        terms.insert(g, prod);
                    }
                }
            }
        }
        let mut s = Series {
            group,
            field: self.field,
            terms,
            cutoff,
        };
        s.normalize();
        Ok(s)
    }

    /// Every iterative expansion below `cutoff` stays finite only when each
    /// tail exponent can accumulate past the cutoff; reject the
    /// lexicographically incomparable case up front.
    pub(crate) fn ensure_cutoff_reachable(tail: &Series, cutoff: &Exponent) -> Result<()> {
        let Some(cut_li) = cutoff.leading_index() else {
            return Ok(());
        };
        for g in tail.support() {
            match g.leading_index() {
                Some(li) if li <= cut_li => {}
                _ => {
                    return Err(Error::CutoffUnreachable(format!(
                        "tail exponent {g} never accumulates past cutoff {cutoff}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Invert a unit of the valuation ring via the geometric series
    /// `a^{-1} = a_0^{-1} Σ (-ε/a_0)^j` for `a = a_0 + ε`.
    pub fn invert_unit(&self) -> Result<Series> {
        if !self.is_unit() {
            return Err(Error::NotAUnit);
        }
        let a0 = self.constant_term();
        let a0_inv = self.field.inv(&a0)?;
        let eps = self.sub(&Series::constant(
            self.group.clone(),
            self.field,
            a0,
            self.cutoff.clone(),
        ))?;
        if eps.is_zero() {
            return Ok(Series::constant(
                self.group.clone(),
                self.field,
                a0_inv,
                self.cutoff.clone(),
            ));
        }
        Series::ensure_cutoff_reachable(&eps, &self.cutoff)?;
        let factor = eps.scaled(&self.field.neg(&a0_inv));
        let mut acc = Series::one(self.group.clone(), self.field, self.cutoff.clone());
        let mut term = acc.clone();
        loop {
            term = term.mul(&factor)?.truncated(&self.cutoff);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc.scaled(&a0_inv).truncated(&self.cutoff))
    }

    /// Integer power by repeated squaring; negative powers invert the unit
    /// part and shift by `n·v(a)`.
    pub fn pow_int(&self, n: i64) -> Result<Series> {
        if n == 0 {
            return Ok(Series::one(
                self.group.clone(),
                self.field,
                self.cutoff.clone(),
            ));
        }
        if n > 0 {
            return self.pow_unsigned(n as u64);
        }
        let v = match self.valuation() {
            Some(v) => v.clone(),
            None => return Err(Error::ZeroToNegativePower),
        };
        let unit = self.shifted(&v.neg());
        let inv = unit.invert_unit()?;
        let powered = inv.pow_unsigned(n.unsigned_abs())?;
        Ok(powered.shifted(&v.scale(&rint(n))))
    }

    fn pow_unsigned(&self, n: u64) -> Result<Series> {
        let mut acc = Series::one(self.group.clone(), self.field, self.cutoff.clone());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// The unique 1-unit `b` with `b^n = a`, by Newton iteration
    /// `b <- b - (b^n - a)/(n·b^{n-1})` from `b = 1`. Characteristic zero
    /// makes the residue root simple, so the iteration converges and the
    /// root is unique among 1-units.
    pub fn nth_root_one_unit(&self, n: u32) -> Result<Series> {
        if n == 0 {
            return Err(Error::InvalidInput("root order must be positive".into()));
        }
        if !self.is_one_unit() {
            return Err(Error::NotOneUnit);
        }
        if n == 1 || self.is_one() {
            return Ok(self.clone());
        }
        let one = Series::one(self.group.clone(), self.field, self.cutoff.clone());
        let eps = self.sub(&one)?;
        Series::ensure_cutoff_reachable(&eps, &self.cutoff)?;
        let n_scalar = self.field.from_rat(rint(n as i64));
        let mut b = one;
        // Each step doubles the proven-correct prefix. Coefficients beyond
        // it are Newton junk whose exact-rational size grows doubly
        // exponentially, so they are dropped rather than carried along.
        let w0 = eps.valuation().expect("eps is nonzero here").clone();
        let mut proven = w0.add(&w0);
        let mut prev_val: Option<Exponent> = None;
        loop {
            let residual = b.pow_unsigned(n as u64)?.sub(self)?.truncated(&self.cutoff);
            if residual.is_zero() {
                return Ok(b);
            }
            let val = residual.valuation().cloned();
            if prev_val.is_some() && val <= prev_val {
                return Err(Error::CutoffUnreachable(
                    "newton iteration stalled below the cutoff".into(),
                ));
            }
            prev_val = val;
            let deriv = b.pow_unsigned(n as u64 - 1)?.scaled(&n_scalar);
            let delta = residual.mul(&deriv.invert_unit()?)?;
            let keep = proven.clone().min(self.cutoff.clone());
            let mut next = b.sub(&delta)?;
            next.terms.retain(|g, _| *g < keep);
            next.cutoff = self.cutoff.clone();
            b = next;
            proven = proven.add(&proven);
        }
    }

    /// Coefficientwise equality strictly below the smaller cutoff.
    pub fn equal_to_cutoff(&self, other: &Series) -> Result<bool> {
        self.unify(other)?;
        let bound = self.cutoff.clone().min(other.cutoff.clone());
        let left = self.terms.iter().filter(|(g, _)| **g < bound);
        let right = other.terms.iter().filter(|(g, _)| **g < bound);
        Ok(left.eq(right))
    }
}

/// Solve `x^n = 1` among 1-units. The root map on 1-units is injective in
/// characteristic zero, so the result is exactly 1; exposed as an operation
/// to witness that kernel triviality computationally.
pub fn root_of_unity_solve(
    group: GroupDescriptor,
    field: FieldDescriptor,
    n: u32,
    cutoff: Exponent,
) -> Result<Series> {
    Series::one(group, field, cutoff).nth_root_one_unit(n)
}

/// A finite family of series sharing descriptors, closed for summation.
///
/// At finite truncation the union of supports is automatically finite and
/// every exponent meets only finitely many members, so both summability
/// conditions hold by construction; the constructor checks descriptor
/// compatibility only.
#[derive(Debug, Clone)]
pub struct SummableFamily {
    members: Vec<Series>,
}

impl SummableFamily {
    pub fn new(members: Vec<Series>) -> Result<Self> {
        let mut iter = members.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidInput("family must be non-empty".into()))?;
        for m in iter {
            first.unify(m)?;
        }
        Ok(SummableFamily { members })
    }

    pub fn members(&self) -> &[Series] {
        &self.members
    }

    /// The least member valuation `ν` (None when all members vanish).
    pub fn min_valuation(&self) -> Option<Exponent> {
        self.members.iter().filter_map(|m| m.valuation()).min().cloned()
    }

    /// How many members attain the valuation `g`.
    pub fn attaining(&self, g: &Exponent) -> usize {
        self.members
            .iter()
            .filter(|m| m.valuation() == Some(g))
            .count()
    }

    /// Pointwise coefficient sums below the least member cutoff.
    pub fn sum(&self) -> Result<Series> {
        let mut group = self.members[0].group.clone();
        for m in &self.members[1..] {
            group = group.unify(&m.group)?;
        }
        let field = self.members[0].field;
        let cutoff = self
            .members
            .iter()
            .map(|m| m.cutoff.clone())
            .min()
            .expect("family is non-empty");
        let mut terms: BTreeMap<Exponent, FieldElement> = BTreeMap::new();
        for m in &self.members {
            for (g, c) in &m.terms {
                if *g >= cutoff {
                    continue;
                }
                match terms.remove(g) {
                    Some(prev) => {
                        terms.insert(g.clone(), field.add(&prev, c));
                    }
                    None => {
                        terms.insert(g.clone(), c.clone());
                    }
                }
            }
        }
        let mut s = Series {
            group,
            field,
            terms,
            cutoff,
        };
        s.normalize();
        Ok(s)
    }
}

/// Fold a non-empty family of compatible series.
pub fn sum_family(members: Vec<Series>) -> Result<Series> {
    SummableFamily::new(members)?.sum()
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_exponent(f: &mut fmt::Formatter<'_>, g: &Exponent) -> fmt::Result {
            if g.dimension() == 1 {
                let c = &g.coords()[0];
                if c.denom().is_one() && !num::Signed::is_negative(c) {
                    write!(f, "t^{}", c.numer())
                } else {
                    write!(f, "t^({g})")
                }
            } else {
                write!(f, "t^{g}")
            }
        }

        let mut first = true;
        for (g, c) in &self.terms {
            let (sign, mag) = match c.as_rational() {
                Some(q) if num::Signed::is_negative(q) => ("-", self.field.neg(c)),
                _ => ("+", c.clone()),
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            if g.is_zero() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write_exponent(f, g)?;
            } else {
                write!(f, "{mag}*")?;
                write_exponent(f, g)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(")?;
        write_exponent(f, &self.cutoff)?;
        write!(f, ")")
    }
}
