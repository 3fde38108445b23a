//! The Laurent specialization (`G = Z`): substitution automorphisms
//! `t ↦ u·t`, the crossed product `×_s` on units of the valuation ring, the
//! order-preservation criterion, and the Moebius correspondence for the
//! rational function field.
//!
//! Over `Z` every valuation-preserving `k`-automorphism is a substitution by
//! a unit, and transporting composition along `σ_u ↦ u` gives the group
//! `(U, ×_s)` with `u1 ×_s u2 = σ_{u1}(u2) · u1`.

use std::fmt;

use crate::autalg::{apply_aut, solve_preimage, AutNormalForm, OneUnitHom, UnitHom};
use crate::coeffs::{FieldAut, FieldDescriptor, FieldElement};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, GroupDescriptor, OrderAutMatrix};
use crate::rational::rint;
use crate::series::Series;

fn laurent_group() -> GroupDescriptor {
    GroupDescriptor::int_lattice(1).expect("Z is a valid lattice")
}

/// A unit of the Laurent valuation ring: a series over `Z` with `v = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentUnit {
    series: Series,
}

impl LaurentUnit {
    pub fn new(series: Series) -> Result<Self> {
        if series.group() != &laurent_group() {
            return Err(Error::MixedDescriptors(format!(
                "Laurent units live over z:1, got {}",
                series.group()
            )));
        }
        if !series.is_unit() {
            return Err(Error::NotAUnit);
        }
        Ok(LaurentUnit { series })
    }

    pub fn one(field: FieldDescriptor, cutoff: i64) -> Self {
        LaurentUnit {
            series: Series::one(laurent_group(), field, Exponent::new(vec![rint(cutoff)])),
        }
    }

    pub fn constant(field: FieldDescriptor, value: FieldElement, cutoff: i64) -> Result<Self> {
        LaurentUnit::new(Series::constant(
            laurent_group(),
            field,
            value,
            Exponent::new(vec![rint(cutoff)]),
        ))
    }

    pub fn series(&self) -> &Series {
        &self.series
    }

    pub fn constant_term(&self) -> FieldElement {
        self.series.constant_term()
    }

    pub fn is_one_unit(&self) -> bool {
        self.series.is_one_unit()
    }

    /// The substitution automorphism `t ↦ u·t` in normal form: the constant
    /// term becomes the coefficient twist, the 1-unit part the unit twist.
    pub fn to_normal_form(&self) -> Result<AutNormalForm> {
        let field = *self.series.field();
        let u0 = self.constant_term();
        let x = UnitHom::new(laurent_group(), field, vec![u0.clone()])?;
        let one_unit = self.series.scaled(&field.inv(&u0)?);
        let u = OneUnitHom::new(laurent_group(), field, vec![one_unit])?;
        AutNormalForm::new(
            laurent_group(),
            field,
            FieldAut::Identity,
            OrderAutMatrix::identity(laurent_group().kind(), 1),
            x,
            u,
            self.series.cutoff().clone(),
        )
    }

    pub fn equal_to_cutoff(&self, other: &LaurentUnit) -> Result<bool> {
        self.series.equal_to_cutoff(&other.series)
    }
}

impl fmt::Display for LaurentUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.series.fmt(f)
    }
}

/// The crossed product `u1 ×_s u2 = σ_{u1}(u2) · u1` on units.
pub fn schilling_xs(u1: &LaurentUnit, u2: &LaurentUnit) -> Result<LaurentUnit> {
    let nf = u1.to_normal_form()?;
    let image = apply_aut(&nf, &u2.series)?;
    LaurentUnit::new(image.mul(&u1.series)?)
}

/// The `×_s`-inverse: the unit `w` with `u ×_s w = 1`, obtained from the
/// triangular solve `σ_u(w) = u^{-1}`.
pub fn schilling_inverse(u: &LaurentUnit) -> Result<LaurentUnit> {
    let nf = u.to_normal_form()?;
    let target = u.series.invert_unit()?;
    LaurentUnit::new(solve_preimage(&nf, &target)?)
}

/// Direct substitution form `Σ ρ(a_i)(u·t)^i` of the automorphism determined
/// by a unit and a residue automorphism.
pub fn sigma_u_apply(u: &LaurentUnit, rho: FieldAut, a: &Series) -> Result<Series> {
    if a.group() != &laurent_group() {
        return Err(Error::MixedDescriptors(format!(
            "expected a Laurent series over z:1, got {}",
            a.group()
        )));
    }
    let field = *a.field();
    let ut = u.series.shifted(&Exponent::new(vec![rint(1)]));
    let mut terms: Vec<Series> = Vec::with_capacity(a.term_count());
    let image_cutoff = a.cutoff().clone();
    for (g, c) in a.terms() {
        let coeff = field.aut_apply(rho, c)?;
        let n = g.coords()[0]
            .numer()
            .try_into()
            .map_err(|_| Error::InvalidInput("exponent exceeds i64".into()))?;
        let powered = ut.pow_int(n)?;
        terms.push(powered.scaled(&coeff));
    }
    if terms.is_empty() {
        return Ok(Series::zero(laurent_group(), field, image_cutoff));
    }
    Ok(crate::series::sum_family(terms)?.truncated(&image_cutoff))
}

/// Order preservation for the substitution by `u`: exactly the units with
/// positive constant term.
pub fn is_order_preserving(u: &LaurentUnit) -> Result<bool> {
    u.series.field().is_positive(&u.constant_term())
}

/// How a Moebius substitution `σ(t) = (at+b)/(ct+d)` sits relative to the
/// valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoebiusClass {
    /// `b = 0`, `ad ≠ 0`: valuation preserving `k`-automorphism.
    ValuationPreservingKAut,
    /// Additionally `a = d`: a 1-automorphism.
    OneAut,
    /// `b ≠ 0`: expandable but not valuation preserving.
    Other,
}

impl fmt::Display for MoebiusClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoebiusClass::ValuationPreservingKAut => write!(f, "valuation-preserving-k-aut"),
            MoebiusClass::OneAut => write!(f, "one-aut"),
            MoebiusClass::Other => write!(f, "other"),
        }
    }
}

/// A projective 2x2 matrix `(a, b; c, d)` with `ad - bc ≠ 0`, representing
/// `σ(t) = (at+b)/(ct+d)`. Normalized so the first nonzero entry of
/// `(a, b, c, d)` is 1, which makes equality decidable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoebiusMap {
    field: FieldDescriptor,
    a: FieldElement,
    b: FieldElement,
    c: FieldElement,
    d: FieldElement,
}

impl MoebiusMap {
    pub fn new(
        field: FieldDescriptor,
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
        d: FieldElement,
    ) -> Result<Self> {
        let det = field.sub(&field.mul(&a, &d), &field.mul(&b, &c));
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let mut m = MoebiusMap { field, a, b, c, d };
        m.normalize()?;
        Ok(m)
    }

    pub fn identity(field: FieldDescriptor) -> Self {
        MoebiusMap {
            field,
            a: field.one(),
            b: field.zero(),
            c: field.zero(),
            d: field.one(),
        }
    }

    fn normalize(&mut self) -> Result<()> {
        let first = [&self.a, &self.b, &self.c, &self.d]
            .into_iter()
            .find(|e| !e.is_zero())
            .cloned()
            .ok_or(Error::SingularMatrix)?;
        let inv = self.field.inv(&first)?;
        self.a = self.field.mul(&self.a, &inv);
        self.b = self.field.mul(&self.b, &inv);
        self.c = self.field.mul(&self.c, &inv);
        self.d = self.field.mul(&self.d, &inv);
        Ok(())
    }

    pub fn entries(&self) -> (&FieldElement, &FieldElement, &FieldElement, &FieldElement) {
        (&self.a, &self.b, &self.c, &self.d)
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    /// Matrix product, so that expansion satisfies
    /// `expand(m1 ∘ m2) = m1 expanded at expand(m2)`.
    pub fn compose(&self, other: &MoebiusMap) -> Result<MoebiusMap> {
        if self.field != other.field {
            return Err(Error::MixedDescriptors("moebius fields differ".into()));
        }
        let f = &self.field;
        MoebiusMap::new(
            self.field,
            f.add(&f.mul(&self.a, &other.a), &f.mul(&self.b, &other.c)),
            f.add(&f.mul(&self.a, &other.b), &f.mul(&self.b, &other.d)),
            f.add(&f.mul(&self.c, &other.a), &f.mul(&self.d, &other.c)),
            f.add(&f.mul(&self.c, &other.b), &f.mul(&self.d, &other.d)),
        )
    }

    pub fn inverse(&self) -> Result<MoebiusMap> {
        MoebiusMap::new(
            self.field,
            self.d.clone(),
            self.field.neg(&self.b),
            self.field.neg(&self.c),
            self.a.clone(),
        )
    }

    /// Expand `(at+b)/(ct+d)` as a truncated Laurent series at the origin.
    pub fn expand(&self, cutoff: i64) -> Result<Series> {
        self.expand_at(&Exponent::new(vec![rint(cutoff)]))
    }

    /// As [`MoebiusMap::expand`], with an explicit cutoff exponent.
    pub fn expand_at(&self, cutoff: &Exponent) -> Result<Series> {
        if self.c.is_zero() && self.d.is_zero() {
            return Err(Error::NotExpandable);
        }
        let group = laurent_group();
        // Working margin: the denominator shift costs up to two lattice steps.
        let margin = cutoff.add(&Exponent::new(vec![rint(2)]));
        let one = Exponent::new(vec![rint(1)]);
        let numer = Series::from_terms(
            group.clone(),
            self.field,
            vec![(group.zero(), self.b.clone()), (one.clone(), self.a.clone())],
            margin.clone(),
        )?;
        let denom = Series::from_terms(
            group.clone(),
            self.field,
            vec![(group.zero(), self.d.clone()), (one, self.c.clone())],
            margin,
        )?;
        Ok(numer.mul(&denom.pow_int(-1)?)?.truncated(cutoff))
    }

    /// Substitute the expansion of this map into a Laurent series:
    /// the action `a(t) ↦ a(σ(t))` computed termwise at the given accuracy.
    pub fn substitute(&self, a: &Series, cutoff: i64) -> Result<Series> {
        let image_t = self.expand(cutoff + 2)?;
        let field = *a.field();
        let mut terms = Vec::with_capacity(a.term_count());
        for (g, c) in a.terms() {
            let n = g.coords()[0]
                .numer()
                .try_into()
                .map_err(|_| Error::InvalidInput("exponent exceeds i64".into()))?;
            terms.push(image_t.pow_int(n)?.scaled(c));
        }
        let bound = Exponent::new(vec![rint(cutoff)]);
        if terms.is_empty() {
            return Ok(Series::zero(laurent_group(), field, bound));
        }
        Ok(crate::series::sum_family(terms)?.truncated(&bound))
    }

    /// Classify against the valuation: `b = 0` (with `ad ≠ 0`) is valuation
    /// preserving, additionally `a = d` is a 1-automorphism.
    pub fn classify(&self) -> MoebiusClass {
        if !self.b.is_zero() {
            return MoebiusClass::Other;
        }
        if self.a == self.d {
            MoebiusClass::OneAut
        } else {
            MoebiusClass::ValuationPreservingKAut
        }
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autalg::{decompose, BlackBoxAut};
    use crate::rational::rat;

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn e1(n: i64) -> Exponent {
        Exponent::new(vec![rint(n)])
    }

    fn s(terms: &[(i64, (i64, i64))], cutoff: i64) -> Series {
        Series::from_terms(
            laurent_group(),
            q(),
            terms
                .iter()
                .map(|&(g, (n, d))| (e1(g), q().from_rat(rat(n, d))))
                .collect(),
            e1(cutoff),
        )
        .unwrap()
    }

    fn unit(terms: &[(i64, (i64, i64))], cutoff: i64) -> LaurentUnit {
        LaurentUnit::new(s(terms, cutoff)).unwrap()
    }

    #[test]
    fn xs_identity_and_constants() {
        let one = LaurentUnit::one(q(), 8);
        let u = unit(&[(0, (1, 1)), (1, (1, 1)), (3, (-2, 1))], 8);
        assert!(schilling_xs(&one, &u).unwrap().equal_to_cutoff(&u).unwrap());
        assert!(schilling_xs(&u, &one).unwrap().equal_to_cutoff(&u).unwrap());

        let two = LaurentUnit::constant(q(), q().from_rat(rint(2)), 8).unwrap();
        let three = LaurentUnit::constant(q(), q().from_rat(rint(3)), 8).unwrap();
        let six = schilling_xs(&two, &three).unwrap();
        assert_eq!(six.constant_term(), q().from_rat(rint(6)));
    }

    #[test]
    fn xs_oracle() {
        // (1+t) ×_s (1+t) = σ_{1+t}(1+t)·(1+t) = 1 + 2t + 2t² + t³.
        let u = unit(&[(0, (1, 1)), (1, (1, 1))], 4);
        let prod = schilling_xs(&u, &u).unwrap();
        let expected = unit(&[(0, (1, 1)), (1, (2, 1)), (2, (2, 1)), (3, (1, 1))], 4);
        assert!(prod.equal_to_cutoff(&expected).unwrap());
    }

    #[test]
    fn xs_inverse() {
        let one = LaurentUnit::one(q(), 5);
        assert!(schilling_inverse(&one)
            .unwrap()
            .equal_to_cutoff(&one)
            .unwrap());

        let c = LaurentUnit::constant(q(), q().from_rat(rat(5, 3)), 5).unwrap();
        let cinv = schilling_inverse(&c).unwrap();
        assert_eq!(cinv.constant_term(), q().from_rat(rat(3, 5)));

        // 1 - t + 2t² - 5t³ + 14t⁴: the compositional inverse coefficients.
        let u = unit(&[(0, (1, 1)), (1, (1, 1))], 5);
        let w = schilling_inverse(&u).unwrap();
        let expected = unit(
            &[
                (0, (1, 1)),
                (1, (-1, 1)),
                (2, (2, 1)),
                (3, (-5, 1)),
                (4, (14, 1)),
            ],
            5,
        );
        assert!(w.equal_to_cutoff(&expected).unwrap());
        let product = schilling_xs(&u, &w).unwrap();
        assert!(product.series().is_one());
    }

    #[test]
    fn substitution_form() {
        let one = LaurentUnit::one(q(), 8);
        let a = s(&[(-2, (1, 1)), (0, (1, 2)), (3, (4, 1))], 8);
        assert!(sigma_u_apply(&one, FieldAut::Identity, &a)
            .unwrap()
            .equal_to_cutoff(&a)
            .unwrap());

        // u = 1 + t on t^{-1}: oracle from the negative power.
        let u = unit(&[(0, (1, 1)), (1, (1, 1))], 4);
        let tinv = s(&[(-1, (1, 1))], 2);
        let img = sigma_u_apply(&u, FieldAut::Identity, &tinv).unwrap();
        assert!(img
            .equal_to_cutoff(&s(&[(-1, (1, 1)), (0, (-1, 1)), (1, (1, 1))], 2))
            .unwrap());

        // Conjugation acts on coefficients only.
        let k = FieldDescriptor::quadratic(2).unwrap();
        let g = laurent_group();
        let a = Series::from_terms(
            g.clone(),
            k,
            vec![
                (e1(0), k.element(rint(1), rint(1)).unwrap()),
                (e1(1), k.one()),
            ],
            e1(8),
        )
        .unwrap();
        let img = sigma_u_apply(&LaurentUnit::one(k, 8), FieldAut::Conjugation, &a).unwrap();
        assert_eq!(img.coeff(&e1(0)), k.element(rint(1), rint(-1)).unwrap());
        assert_eq!(img.coeff(&e1(1)), k.one());
    }

    #[test]
    fn substitution_matches_normal_form() {
        let u = unit(&[(0, (2, 1)), (1, (1, 2)), (2, (-1, 3))], 8);
        let nf = u.to_normal_form().unwrap();
        let a = s(&[(-1, (1, 1)), (0, (3, 1)), (2, (1, 4))], 8);
        let direct = sigma_u_apply(&u, FieldAut::Identity, &a).unwrap();
        let via_nf = apply_aut(&nf, &a).unwrap();
        assert!(direct.equal_to_cutoff(&via_nf).unwrap());
    }

    #[test]
    fn order_criterion() {
        assert!(is_order_preserving(&unit(&[(0, (1, 1)), (1, (1, 1))], 8)).unwrap());
        assert!(!is_order_preserving(&unit(&[(0, (-1, 1)), (1, (1, 1))], 8)).unwrap());
        assert!(is_order_preserving(&unit(&[(0, (2, 1))], 8)).unwrap());
        let gauss = FieldDescriptor::quadratic(-1).unwrap();
        let u = LaurentUnit::one(gauss, 8);
        assert_eq!(is_order_preserving(&u), Err(Error::UnorderedField));
    }

    #[test]
    fn moebius_basics() {
        let f = q();
        let m = MoebiusMap::new(
            f,
            f.from_rat(rint(1)),
            f.zero(),
            f.from_rat(rint(1)),
            f.from_rat(rint(1)),
        )
        .unwrap();
        // t/(1+t) = t - t² + t³ - ...
        let series = m.expand(4).unwrap();
        assert!(series
            .equal_to_cutoff(&s(&[(1, (1, 1)), (2, (-1, 1)), (3, (1, 1))], 4))
            .unwrap());
        assert_eq!(m.classify(), MoebiusClass::OneAut);

        let id = MoebiusMap::identity(f);
        assert!(id
            .expand(4)
            .unwrap()
            .equal_to_cutoff(&s(&[(1, (1, 1))], 4))
            .unwrap());

        let inv = m.inverse().unwrap();
        assert_eq!(m.compose(&inv).unwrap(), MoebiusMap::identity(f));

        assert_eq!(
            MoebiusMap::new(f, f.one(), f.zero(), f.zero(), f.zero()),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn moebius_classification() {
        let f = q();
        let mk = |a: i64, b: i64, c: i64, d: i64| {
            MoebiusMap::new(
                f,
                f.from_rat(rint(a)),
                f.from_rat(rint(b)),
                f.from_rat(rint(c)),
                f.from_rat(rint(d)),
            )
            .unwrap()
        };
        assert_eq!(mk(1, 0, 1, 1).classify(), MoebiusClass::OneAut);
        assert_eq!(
            mk(2, 0, 0, 1).classify(),
            MoebiusClass::ValuationPreservingKAut
        );
        assert_eq!(mk(1, 1, 0, 1).classify(), MoebiusClass::Other);
        // d = 0 with b ≠ 0: the expansion has negative valuation.
        let neg = mk(1, 1, 1, 0).expand(4).unwrap();
        assert_eq!(neg.valuation(), Some(&e1(-1)));
    }

    #[test]
    fn moebius_compose_matches_substitution() {
        let f = q();
        let mk = |a: i64, b: i64, c: i64, d: i64| {
            MoebiusMap::new(
                f,
                f.from_rat(rint(a)),
                f.from_rat(rint(b)),
                f.from_rat(rint(c)),
                f.from_rat(rint(d)),
            )
            .unwrap()
        };
        let m1 = mk(2, 0, 1, 1);
        let m2 = mk(1, 0, 3, 2);
        // The action of m2 substitutes its own image of t into the argument,
        // so expand(m1 ∘ m2) = σ_{m2}(expand(m1)).
        let composed = m1.compose(&m2).unwrap().expand(6).unwrap();
        let substituted = m2.substitute(&m1.expand(8).unwrap(), 6).unwrap();
        assert!(composed.equal_to_cutoff(&substituted).unwrap());
    }

    #[test]
    fn moebius_decompose_consistency() {
        // σ(t) = at/(ct+d) decomposes with x = a/d.
        let f = q();
        let m = MoebiusMap::new(
            f,
            f.from_rat(rint(3)),
            f.zero(),
            f.from_rat(rint(2)),
            f.from_rat(rint(1)),
        )
        .unwrap();
        assert_eq!(m.classify(), MoebiusClass::ValuationPreservingKAut);
        let u = LaurentUnit::new(m.expand(9).unwrap().shifted(&e1(-1))).unwrap();
        let nf = u.to_normal_form().unwrap();
        let bb = BlackBoxAut::from_normal_form(&nf);
        let recovered = decompose(&bb, &e1(8)).unwrap();
        assert_eq!(recovered.x().values()[0], f.from_rat(rint(3)));
        // The rebuilt normal form reproduces the expansion of σ(t).
        let t = s(&[(1, (1, 1))], 8);
        let image = apply_aut(&recovered, &t).unwrap();
        assert!(image.equal_to_cutoff(&m.expand(8).unwrap()).unwrap());
    }
}
