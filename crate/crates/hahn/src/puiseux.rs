//! The Puiseux specialization (`G = Q`): ramified representation with a
//! common exponent denominator, conversions to and from rational-lattice
//! series, scaling automorphisms of `Q`, and rational powers of 1-units via
//! unique divisibility.
//!
//! A Puiseux series `Σ a_n t^{n/n_a}` is stored as its ramification index
//! `n_a` together with the body `Σ a_n s^n` in `s = t^{1/n_a}`, kept minimal
//! (the body support and the ramification share no common factor).

use std::fmt;

use num::{Signed, ToPrimitive};

use crate::autalg::AutNormalForm;
use crate::coeffs::FieldDescriptor;
use crate::error::{Error, Result};
use crate::exponents::{Exponent, GroupDescriptor, GroupKind};
use crate::rational::{rint, Rat};
use crate::series::{sum_family, Series};

fn body_group() -> GroupDescriptor {
    GroupDescriptor::int_lattice(1).expect("Z is a valid lattice")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuiseuxSeries {
    ramification: u64,
    body: Series,
}

fn exp_value(g: &Exponent) -> &Rat {
    &g.coords()[0]
}

fn to_i64(q: &Rat) -> Result<i64> {
    if !q.denom().to_u64().is_some_and(|d| d == 1) {
        return Err(Error::InvalidInput(format!("expected an integer, got {q}")));
    }
    q.numer()
        .to_i64()
        .ok_or_else(|| Error::InvalidInput(format!("integer {q} exceeds i64")))
}

impl PuiseuxSeries {
    /// Wrap a body series in `s = t^{1/ramification}` and re-minimize.
    pub fn new(ramification: u64, body: Series) -> Result<Self> {
        if ramification == 0 {
            return Err(Error::InvalidInput("ramification must be positive".into()));
        }
        if body.group() != &body_group() {
            return Err(Error::MixedDescriptors(format!(
                "Puiseux bodies live over z:1, got {}",
                body.group()
            )));
        }
        let mut p = PuiseuxSeries { ramification, body };
        p.minimize()?;
        Ok(p)
    }

    pub fn zero(field: FieldDescriptor, cutoff: i64) -> Self {
        PuiseuxSeries {
            ramification: 1,
            body: Series::zero(body_group(), field, Exponent::new(vec![rint(cutoff)])),
        }
    }

    /// Minimal ramification: divide out `gcd(support, ramification)`. The
    /// body cutoff stays an exact rational so that accuracy never gets
    /// overstated by rounding to the coarser lattice (a later rescaling
    /// would amplify any such rounding).
    fn minimize(&mut self) -> Result<()> {
        let mut g: u64 = self.ramification;
        for e in self.body.support() {
            let k = to_i64(exp_value(e))?.unsigned_abs();
            g = num::integer::gcd(g, k);
            if g == 1 {
                return Ok(());
            }
        }
        if g <= 1 {
            return Ok(());
        }
        self.rescale_body(&Rat::new(1.into(), g.into()))?;
        self.ramification /= g;
        Ok(())
    }

    /// Multiply every body exponent (and the cutoff) by `factor`. Support
    /// exponents stay integers whenever the caller scales by an integer or
    /// divides out a common factor; the cutoff is carried exactly.
    fn rescale_body(&mut self, factor: &Rat) -> Result<()> {
        let field = *self.body.field();
        let terms = self
            .body
            .terms()
            .map(|(e, c)| {
                let scaled = exp_value(e) * factor;
                Ok((Exponent::new(vec![scaled]), c.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let cutoff = exp_value(self.body.cutoff()) * factor;
        self.body = Series::from_terms(body_group(), field, terms, Exponent::new(vec![cutoff]))?;
        Ok(())
    }

    pub fn ramification(&self) -> u64 {
        self.ramification
    }

    pub fn body(&self) -> &Series {
        &self.body
    }

    pub fn field(&self) -> &FieldDescriptor {
        self.body.field()
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    /// Valuation as a rational (the least exponent of `t`).
    pub fn valuation(&self) -> Option<Rat> {
        self.body
            .valuation()
            .map(|v| exp_value(v) / rint(self.ramification as i64))
    }

    /// The same series re-expressed in `s = t^{1/n}` for a multiple `n` of
    /// the current ramification.
    fn with_ramification(&self, n: u64) -> Result<PuiseuxSeries> {
        if n % self.ramification != 0 {
            return Err(Error::InvalidInput(format!(
                "{n} is not a multiple of ramification {}",
                self.ramification
            )));
        }
        let mut clone = self.clone();
        clone.rescale_body(&rint((n / self.ramification) as i64))?;
        clone.ramification = n;
        Ok(clone)
    }

    fn binary<F>(&self, other: &PuiseuxSeries, f: F) -> Result<PuiseuxSeries>
    where
        F: FnOnce(&Series, &Series) -> Result<Series>,
    {
        let n = num::integer::lcm(self.ramification, other.ramification);
        let a = self.with_ramification(n)?;
        let b = other.with_ramification(n)?;
        PuiseuxSeries::new(n, f(&a.body, &b.body)?)
    }

    pub fn add(&self, other: &PuiseuxSeries) -> Result<PuiseuxSeries> {
        self.binary(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &PuiseuxSeries) -> Result<PuiseuxSeries> {
        self.binary(other, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &PuiseuxSeries) -> Result<PuiseuxSeries> {
        self.binary(other, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> PuiseuxSeries {
        PuiseuxSeries {
            ramification: self.ramification,
            body: self.body.neg(),
        }
    }

    pub fn invert_unit(&self) -> Result<PuiseuxSeries> {
        PuiseuxSeries::new(self.ramification, self.body.invert_unit()?)
    }

    pub fn pow_int(&self, n: i64) -> Result<PuiseuxSeries> {
        PuiseuxSeries::new(self.ramification, self.body.pow_int(n)?)
    }

    pub fn equal_to_cutoff(&self, other: &PuiseuxSeries) -> Result<bool> {
        let n = num::integer::lcm(self.ramification, other.ramification);
        self.with_ramification(n)?
            .body
            .equal_to_cutoff(&other.with_ramification(n)?.body)
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match puiseux_to_lattice(self) {
            Ok(s) => s.fmt(f),
            Err(_) => write!(f, "<invalid puiseux series>"),
        }
    }
}

/// Re-express a Puiseux series over the rational lattice `(1/n_a)Z`.
pub fn puiseux_to_lattice(p: &PuiseuxSeries) -> Result<Series> {
    let group = GroupDescriptor::rational_lattice(1, p.ramification)?;
    let n = rint(p.ramification as i64);
    let terms = p
        .body
        .terms()
        .map(|(e, c)| (Exponent::new(vec![exp_value(e) / &n]), c.clone()))
        .collect();
    Series::from_terms(
        group,
        *p.body.field(),
        terms,
        Exponent::new(vec![exp_value(p.body.cutoff()) / &n]),
    )
}

/// Read a dimension-1 lattice series as a Puiseux series with the minimal
/// ramification (the lcm of the support denominators).
pub fn lattice_to_puiseux(a: &Series) -> Result<PuiseuxSeries> {
    if a.group().dimension() != 1 {
        return Err(Error::MixedDescriptors(format!(
            "Puiseux series need a one-dimensional exponent group, got {}",
            a.group()
        )));
    }
    let mut n: u64 = 1;
    for e in a.support() {
        n = num::integer::lcm(n, e.least_level());
    }
    let factor = rint(n as i64);
    let terms = a
        .terms()
        .map(|(e, c)| (Exponent::new(vec![exp_value(e) * &factor]), c.clone()))
        .collect();
    let cutoff = exp_value(a.cutoff()) * &factor;
    let body = Series::from_terms(body_group(), *a.field(), terms, Exponent::new(vec![cutoff]))?;
    PuiseuxSeries::new(n, body)
}

/// The order automorphism of `Q` given by a positive rational scale,
/// `e ↦ q·e`.
pub fn puiseux_oaut_apply(scale: &Rat, p: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    if !scale.is_positive() {
        return Err(Error::NonPositiveScale(scale.to_string()));
    }
    let m = scale
        .numer()
        .to_i64()
        .ok_or_else(|| Error::InvalidInput("scale numerator exceeds i64".into()))?;
    let n = scale
        .denom()
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("scale denominator exceeds u64".into()))?;
    let mut out = p.clone();
    out.rescale_body(&rint(m))?;
    out.ramification = p
        .ramification
        .checked_mul(n)
        .ok_or_else(|| Error::InvalidInput("ramification overflow".into()))?;
    out.minimize()?;
    Ok(out)
}

/// Rational power of a 1-unit via unique divisibility: `u^{m/n}` is the
/// `n`-th Newton root raised to the `m`. Independent of the chosen
/// representation of the exponent.
pub fn puiseux_unit_pow_q(u: &Series, q: &Rat) -> Result<Series> {
    if !u.is_one_unit() {
        return Err(Error::NotOneUnit);
    }
    let n: u32 = u32::try_from(q.denom().to_u64().unwrap_or(u64::MAX))
        .map_err(|_| Error::InvalidInput("power denominator exceeds u32".into()))?;
    let m = q
        .numer()
        .to_i64()
        .ok_or_else(|| Error::InvalidInput("power numerator exceeds i64".into()))?;
    u.nth_root_one_unit(n)?.pow_int(m)
}

/// Apply a normal-form automorphism over the `Q` lattice to a Puiseux
/// series. Off-lattice values of the 1-unit twist are synthesized through
/// unique divisibility (`u(g) = u(1/L)^{gL}` for any rational `g`); the
/// coefficient twist has no such extension, so a nontrivial `x` demands
/// on-lattice images and fails with `LevelExceeded` otherwise.
pub fn puiseux_apply_aut(nf: &AutNormalForm, p: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    if nf.group().kind() != GroupKind::RationalLattice || nf.group().dimension() != 1 {
        return Err(Error::MixedDescriptors(format!(
            "Puiseux automorphisms act over q:1:L, got {}",
            nf.group()
        )));
    }
    if nf.field() != p.field() {
        return Err(Error::MixedDescriptors(format!(
            "fields differ: {} vs {}",
            nf.field(),
            p.field()
        )));
    }
    let scale = nf.tau().entries()[0][0].clone();
    let level = rint(nf.group().level() as i64);
    let field = *p.field();
    let lattice = puiseux_to_lattice(p)?;

    let image_cutoff = Exponent::new(vec![exp_value(lattice.cutoff()) * &scale]);
    let u_cutoff = nf.u().cutoff();
    if lattice.is_zero() {
        let out = Series::zero(
            GroupDescriptor::rational_lattice(1, 1)?.refined(image_cutoff.least_level()),
            field,
            image_cutoff,
        );
        return lattice_to_puiseux(&out);
    }

    let u_generator = (!nf.u().is_trivial()).then(|| nf.u().values()[0].clone());
    let mut terms = Vec::with_capacity(lattice.term_count());
    for (g, c) in lattice.terms() {
        let gt = Exponent::new(vec![exp_value(g) * &scale]);
        let mut coeff = field.aut_apply(nf.rho(), c)?;
        if !nf.x().is_trivial() {
            coeff = field.mul(&coeff, &nf.x().eval(&gt)?);
        }
        let term_cutoff = match &u_cutoff {
            Some(cu) => image_cutoff.clone().min(gt.add(cu)),
            None => image_cutoff.clone(),
        };
        let term = match &u_generator {
            None => Series::monomial(
                nf.group().refined(gt.least_level()),
                field,
                coeff,
                Some(gt),
                term_cutoff,
            ),
            Some(u1) => {
                let power = exp_value(&gt) * &level;
                let unit = puiseux_unit_pow_q(u1, &power)?;
                unit.scaled(&coeff).shifted(&gt).truncated(&term_cutoff)
            }
        };
        terms.push(term);
    }
    let mut level_out = image_cutoff.least_level();
    for t in &terms {
        level_out = num::integer::lcm(level_out, t.group().level());
    }
    let terms = terms
        .into_iter()
        .map(|t| t.with_level(level_out))
        .collect::<Vec<_>>();
    let folded = sum_family(terms)?.truncated(&image_cutoff);
    lattice_to_puiseux(&folded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autalg::{apply_aut, OneUnitHom, UnitHom};
    use crate::coeffs::FieldAut;
    use crate::exponents::OrderAutMatrix;
    use crate::rational::rat;

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn e1(n: i64) -> Exponent {
        Exponent::new(vec![rint(n)])
    }

    fn body(terms: &[(i64, (i64, i64))], cutoff: i64) -> Series {
        Series::from_terms(
            body_group(),
            q(),
            terms
                .iter()
                .map(|&(g, (n, d))| (e1(g), q().from_rat(rat(n, d))))
                .collect(),
            e1(cutoff),
        )
        .unwrap()
    }

    fn lattice(terms: &[((i64, i64), (i64, i64))], level: u64, cutoff: (i64, i64)) -> Series {
        let g = GroupDescriptor::rational_lattice(1, level).unwrap();
        Series::from_terms(
            g,
            q(),
            terms
                .iter()
                .map(|&((en, ed), (cn, cd))| {
                    (Exponent::new(vec![rat(en, ed)]), q().from_rat(rat(cn, cd)))
                })
                .collect(),
            Exponent::new(vec![rat(cutoff.0, cutoff.1)]),
        )
        .unwrap()
    }

    #[test]
    fn lattice_round_trip() {
        // n = 2, body 1 + s + s³ is 1 + t^(1/2) + t^(3/2).
        let p = PuiseuxSeries::new(2, body(&[(0, (1, 1)), (1, (1, 1)), (3, (1, 1))], 8)).unwrap();
        let l = puiseux_to_lattice(&p).unwrap();
        let expected = lattice(
            &[((0, 1), (1, 1)), ((1, 2), (1, 1)), ((3, 2), (1, 1))],
            2,
            (4, 1),
        );
        assert_eq!(l, expected);
        assert_eq!(lattice_to_puiseux(&l).unwrap(), p);

        // 1 + t^(1/2) + t recovers ramification 2; 1 + t is already integral.
        let a = lattice(
            &[((0, 1), (1, 1)), ((1, 2), (1, 1)), ((1, 1), (1, 1))],
            2,
            (4, 1),
        );
        assert_eq!(lattice_to_puiseux(&a).unwrap().ramification(), 2);
        let b = lattice(&[((0, 1), (1, 1)), ((1, 1), (1, 1))], 2, (4, 1));
        assert_eq!(lattice_to_puiseux(&b).unwrap().ramification(), 1);
    }

    #[test]
    fn minimality() {
        // Body 1 + s² at ramification 2 collapses to 1 + s.
        let p = PuiseuxSeries::new(2, body(&[(0, (1, 1)), (2, (1, 1))], 7)).unwrap();
        assert_eq!(p.ramification(), 1);
        assert_eq!(p.body().cutoff(), &Exponent::new(vec![rat(7, 2)]));
        assert!(p
            .body()
            .equal_to_cutoff(&body(&[(0, (1, 1)), (1, (1, 1))], 3))
            .unwrap());
    }

    #[test]
    fn arithmetic_with_mixed_ramification() {
        // t^(1/2) · t^(1/3) = t^(5/6) at ramification 6.
        let a = PuiseuxSeries::new(2, body(&[(1, (1, 1))], 8)).unwrap();
        let b = PuiseuxSeries::new(3, body(&[(1, (1, 1))], 8)).unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.ramification(), 6);
        assert_eq!(prod.valuation(), Some(rat(5, 6)));

        // (1 + t^(1/2))(1 - t^(1/2)) = 1 - t, which is unramified.
        let c = PuiseuxSeries::new(2, body(&[(0, (1, 1)), (1, (1, 1))], 8)).unwrap();
        let d = PuiseuxSeries::new(2, body(&[(0, (1, 1)), (1, (-1, 1))], 8)).unwrap();
        let prod = c.mul(&d).unwrap();
        assert_eq!(prod.ramification(), 1);
        assert_eq!(prod.body(), &body(&[(0, (1, 1)), (1, (-1, 1))], 4));

        // Geometric inverse in s: (1 - t^(1/2))^{-1} below t².
        let inv = d.invert_unit().unwrap();
        let expected = PuiseuxSeries::new(
            2,
            body(&[(0, (1, 1)), (1, (1, 1)), (2, (1, 1)), (3, (1, 1))], 4),
        )
        .unwrap();
        assert!(inv.equal_to_cutoff(&expected).unwrap());
    }

    #[test]
    fn scaling_action() {
        let p = PuiseuxSeries::new(2, body(&[(0, (1, 1)), (1, (1, 1))], 8)).unwrap();
        assert_eq!(puiseux_oaut_apply(&rint(1), &p).unwrap(), p);

        // q = 2 on 1 + t^(1/2) gives 1 + t.
        let doubled = puiseux_oaut_apply(&rint(2), &p).unwrap();
        assert_eq!(doubled.ramification(), 1);
        assert_eq!(doubled.body(), &body(&[(0, (1, 1)), (1, (1, 1))], 8));

        // q = 1/3 on t gives t^(1/3) at ramification 3.
        let t = PuiseuxSeries::new(1, body(&[(1, (1, 1))], 8)).unwrap();
        let third = puiseux_oaut_apply(&rat(1, 3), &t).unwrap();
        assert_eq!(third.ramification(), 3);
        assert_eq!(third.valuation(), Some(rat(1, 3)));

        assert!(matches!(
            puiseux_oaut_apply(&rat(-1, 2), &p),
            Err(Error::NonPositiveScale(_))
        ));

        // Scale composition.
        let via_two =
            puiseux_oaut_apply(&rat(3, 2), &puiseux_oaut_apply(&rat(4, 3), &p).unwrap()).unwrap();
        let direct = puiseux_oaut_apply(&rint(2), &p).unwrap();
        assert_eq!(via_two, direct);
    }

    #[test]
    fn rational_powers_of_one_units() {
        let u = body(&[(0, (1, 1)), (1, (1, 1))], 3);
        assert_eq!(puiseux_unit_pow_q(&u, &rint(1)).unwrap(), u);
        // Binomial oracle: (1+t)^{1/2} = 1 + t/2 - t²/8 below t³.
        let half = puiseux_unit_pow_q(&u, &rat(1, 2)).unwrap();
        assert_eq!(half, body(&[(0, (1, 1)), (1, (1, 2)), (2, (-1, 8))], 3));
        // Representation independence: 2/4 agrees with 1/2.
        let half2 = puiseux_unit_pow_q(&u, &rat(2, 4)).unwrap();
        assert!(half.equal_to_cutoff(&half2).unwrap());

        assert!(matches!(
            puiseux_unit_pow_q(&body(&[(0, (2, 1))], 3), &rat(1, 2)),
            Err(Error::NotOneUnit)
        ));
    }

    #[test]
    fn normal_form_action() {
        let group = GroupDescriptor::rational_lattice(1, 1).unwrap();
        let field = q();
        let cutoff = Exponent::new(vec![rint(8)]);
        let id = AutNormalForm::identity(group.clone(), field, cutoff.clone());
        let p = PuiseuxSeries::new(2, body(&[(0, (1, 1)), (1, (1, 1))], 8)).unwrap();
        assert_eq!(puiseux_apply_aut(&id, &p).unwrap(), p);

        // Pure scaling by 2 through the normal form.
        let tau = OrderAutMatrix::scaling(rint(2)).unwrap();
        let lift = crate::autalg::canonical_lift(
            FieldAut::Identity,
            tau,
            group.clone(),
            field,
            cutoff.clone(),
        )
        .unwrap();
        // p has body cutoff 8 at ramification 2, i.e. t-cutoff 4; doubling
        // gives t-cutoff 8 on an unramified body.
        let doubled = puiseux_apply_aut(&lift, &p).unwrap();
        assert_eq!(doubled.ramification(), 1);
        assert_eq!(doubled.body(), &body(&[(0, (1, 1)), (1, (1, 1))], 8));

        // u(1) = 1 + t on t^(1/2): oracle t^(1/2)·(1+t)^(1/2).
        let u_val = Series::from_terms(
            group.clone(),
            field,
            vec![
                (Exponent::new(vec![rint(0)]), field.one()),
                (Exponent::new(vec![rint(1)]), field.one()),
            ],
            Exponent::new(vec![rint(8)]),
        )
        .unwrap();
        let u = OneUnitHom::new(group.clone(), field, vec![u_val.clone()]).unwrap();
        let nf = AutNormalForm::from_u(u, cutoff.clone());
        let half_t = PuiseuxSeries::new(2, body(&[(1, (1, 1))], 4)).unwrap();
        let image = puiseux_apply_aut(&nf, &half_t).unwrap();
        // Explicit leading terms: t^(1/2) + t^(3/2)/2.
        let explicit = PuiseuxSeries::new(2, body(&[(1, (1, 1)), (3, (1, 2))], 4)).unwrap();
        assert!(image.equal_to_cutoff(&explicit).unwrap());

        // A nontrivial x cannot be evaluated off the lattice.
        let x = UnitHom::new(group.clone(), field, vec![field.from_rat(rint(2))]).unwrap();
        let gx = AutNormalForm::from_x(x, cutoff.clone());
        assert!(matches!(
            puiseux_apply_aut(&gx, &half_t),
            Err(Error::LevelExceeded { .. })
        ));

        // On-lattice application agrees with the generic lattice action.
        let full = PuiseuxSeries::new(1, body(&[(1, (3, 1)), (2, (1, 2))], 8)).unwrap();
        let via_puiseux = puiseux_apply_aut(&gx, &full).unwrap();
        let embedded = puiseux_to_lattice(&full).unwrap().with_level(1);
        let via_lattice = lattice_to_puiseux(&apply_aut(&gx, &embedded).unwrap()).unwrap();
        assert!(via_puiseux.equal_to_cutoff(&via_lattice).unwrap());
    }
}
