//! The automorphism algebra of a truncated Hahn field.
//!
//! A valuation-preserving, strongly additive automorphism is represented by
//! its normal form `σ = σ_u ∘ ρ_x ∘ Ψ(ρ, τ)`:
//!
//! * `(ρ, τ)` — a residue-field automorphism and an order automorphism of
//!   the exponent group, lifted canonically by `Σ a_g t^g ↦ Σ ρ(a_g) t^{τ(g)}`;
//! * `x: G → k^×` — the coefficient twist `Σ a_g t^g ↦ Σ a_g x^g t^g`;
//! * `u: G → 1+I` — the 1-unit twist `t^g ↦ u(g) t^g`, applied term by term
//!   (strong additivity makes this well defined).
//!
//! Both homomorphisms are stored by their values on the lattice generators
//! `(1/L)e_i`; evaluation anywhere else on the lattice follows from the hom
//! law. The extraction maps recover the four components from an opaque
//! series action by probing monomials, and `decompose` verifies the
//! reconstruction against the probes before returning it.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num::ToPrimitive;

use crate::coeffs::{FieldAut, FieldDescriptor, FieldElement};
use crate::error::{Error, Result};
use crate::exponents::{Exponent, GroupDescriptor, GroupKind, OrderAutMatrix};
use crate::series::{sum_family, Series};

/// A homomorphism `G → k^×` fixed by its values on the lattice generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitHom {
    group: GroupDescriptor,
    field: FieldDescriptor,
    values: Vec<FieldElement>,
}

impl UnitHom {
    pub fn new(
        group: GroupDescriptor,
        field: FieldDescriptor,
        values: Vec<FieldElement>,
    ) -> Result<Self> {
        if values.len() != group.dimension() {
            return Err(Error::DimensionMismatch {
                left: group.dimension(),
                right: values.len(),
            });
        }
        if values.iter().any(FieldElement::is_zero) {
            return Err(Error::InvalidInput("unit hom values must be nonzero".into()));
        }
        Ok(UnitHom {
            group,
            field,
            values,
        })
    }

    pub fn trivial(group: GroupDescriptor, field: FieldDescriptor) -> Self {
        let values = vec![field.one(); group.dimension()];
        UnitHom {
            group,
            field,
            values,
        }
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(FieldElement::is_one)
    }

    /// Evaluate at a lattice point via the hom law `x^{Σ m_i g_i} = Π x_i^{m_i}`.
    pub fn eval(&self, g: &Exponent) -> Result<FieldElement> {
        let coords = lattice_coords(g, &self.group)?;
        let mut acc = self.field.one();
        for (value, m) in self.values.iter().zip(coords) {
            if m != 0 {
                acc = self.field.mul(&acc, &self.field.pow(value, m)?);
            }
        }
        Ok(acc)
    }

    /// Pointwise product of homomorphisms.
    pub fn pointwise_mul(&self, other: &UnitHom) -> Result<UnitHom> {
        if self.group != other.group || self.field != other.field {
            return Err(Error::MixedDescriptors("unit hom descriptors differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| self.field.mul(a, b))
            .collect();
        UnitHom::new(self.group.clone(), self.field, values)
    }

    /// Pointwise inverse `g ↦ x^{-g}`.
    pub fn pointwise_inv(&self) -> Result<UnitHom> {
        let values = self
            .values
            .iter()
            .map(|v| self.field.inv(v))
            .collect::<Result<Vec<_>>>()?;
        UnitHom::new(self.group.clone(), self.field, values)
    }
}

/// A homomorphism `G → 1+I` fixed by its 1-unit values on the generators.
///
/// Evaluation needs integer powers of the generator values; those are
/// memoized, since extraction and composition probe the same powers over
/// and over.
#[derive(Debug)]
pub struct OneUnitHom {
    group: GroupDescriptor,
    field: FieldDescriptor,
    values: Vec<Series>,
    power_cache: Mutex<HashMap<(usize, i64), Series>>,
}

impl Clone for OneUnitHom {
    fn clone(&self) -> Self {
        OneUnitHom {
            group: self.group.clone(),
            field: self.field,
            values: self.values.clone(),
            power_cache: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for OneUnitHom {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.field == other.field && self.values == other.values
    }
}

impl Eq for OneUnitHom {}

impl OneUnitHom {
    pub fn new(
        group: GroupDescriptor,
        field: FieldDescriptor,
        values: Vec<Series>,
    ) -> Result<Self> {
        if values.len() != group.dimension() {
            return Err(Error::DimensionMismatch {
                left: group.dimension(),
                right: values.len(),
            });
        }
        for v in &values {
            if !v.is_one_unit() {
                return Err(Error::NotOneUnit);
            }
            if v.field() != &field {
                return Err(Error::MixedDescriptors("one-unit hom field differs".into()));
            }
            v.group().unify(&group)?;
        }
        Ok(OneUnitHom {
            group,
            field,
            values,
            power_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn trivial(group: GroupDescriptor, field: FieldDescriptor, cutoff: &Exponent) -> Self {
        let values = (0..group.dimension())
            .map(|_| Series::one(group.clone(), field, cutoff.clone()))
            .collect();
        OneUnitHom {
            group,
            field,
            values,
            power_cache: Mutex::new(HashMap::new()),
        }
    }

    /// `values[i]^m`, memoized; powers are built incrementally so every
    /// intermediate power lands in the cache too.
    fn powered(&self, i: usize, m: i64) -> Result<Series> {
        if m == 1 {
            return Ok(self.values[i].clone());
        }
        if let Some(hit) = self.power_cache.lock().unwrap().get(&(i, m)) {
            return Ok(hit.clone());
        }
        let result = if m == 0 {
            self.values[i].pow_int(0)?
        } else if m > 0 {
            let prev = self.powered(i, m - 1)?;
            prev.mul(&self.values[i])?
        } else if m == -1 {
            self.values[i].invert_unit()?
        } else {
            let prev = self.powered(i, m + 1)?;
            let inv = self.powered(i, -1)?;
            prev.mul(&inv)?
        };
        self.power_cache
            .lock()
            .unwrap()
            .insert((i, m), result.clone());
        Ok(result)
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn values(&self) -> &[Series] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(Series::is_one)
    }

    /// Least cutoff among the non-trivial values; `None` for the trivial hom
    /// (whose evaluation is exact).
    pub fn cutoff(&self) -> Option<Exponent> {
        self.values
            .iter()
            .filter(|v| !v.is_one())
            .map(|v| v.cutoff().clone())
            .min()
    }

    /// Evaluate at a lattice point. `exact_cutoff` is used when every factor
    /// is trivial and the result is the exact series 1.
    pub fn eval(&self, g: &Exponent, exact_cutoff: &Exponent) -> Result<Series> {
        let coords = lattice_coords(g, &self.group)?;
        let mut acc: Option<Series> = None;
        for (i, m) in coords.into_iter().enumerate() {
            if m == 0 || self.values[i].is_one() {
                continue;
            }
            let p = self.powered(i, m)?;
            acc = Some(match acc {
                None => p,
                Some(a) => a.mul(&p)?,
            });
        }
        Ok(acc.unwrap_or_else(|| {
            Series::one(self.group.clone(), self.field, exact_cutoff.clone())
        }))
    }

    pub fn equal_at_cutoff(&self, other: &OneUnitHom) -> Result<bool> {
        if self.group != other.group || self.field != other.field {
            return Err(Error::MixedDescriptors("one-unit hom descriptors differ".into()));
        }
        for (a, b) in self.values.iter().zip(&other.values) {
            if !a.equal_to_cutoff(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn lattice_coords(g: &Exponent, group: &GroupDescriptor) -> Result<Vec<i64>> {
    if g.dimension() != group.dimension() {
        return Err(Error::DimensionMismatch {
            left: group.dimension(),
            right: g.dimension(),
        });
    }
    let level = crate::rational::rint(group.level() as i64);
    g.coords()
        .iter()
        .map(|c| {
            let scaled = c * &level;
            if !scaled.denom().eq(&1.into()) {
                return Err(Error::LevelExceeded {
                    what: g.to_string(),
                    level: group.level(),
                });
            }
            scaled.numer().to_i64().ok_or_else(|| {
                Error::InvalidInput(format!("lattice coordinate {scaled} exceeds i64"))
            })
        })
        .collect()
}

/// Normal form `σ = σ_u ∘ ρ_x ∘ Ψ(ρ, τ)` of a valuation-preserving strongly
/// additive automorphism, together with the cutoff to which its 1-unit data
/// is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutNormalForm {
    group: GroupDescriptor,
    field: FieldDescriptor,
    rho: FieldAut,
    tau: OrderAutMatrix,
    x: UnitHom,
    u: OneUnitHom,
    cutoff: Exponent,
}

impl AutNormalForm {
    pub fn new(
        group: GroupDescriptor,
        field: FieldDescriptor,
        rho: FieldAut,
        tau: OrderAutMatrix,
        x: UnitHom,
        u: OneUnitHom,
        cutoff: Exponent,
    ) -> Result<Self> {
        if tau.dimension() != group.dimension() || tau.kind() != group.kind() {
            return Err(Error::MixedDescriptors(
                "order automorphism does not act on the exponent group".into(),
            ));
        }
        if x.group() != &group || u.group() != &group {
            return Err(Error::MixedDescriptors(
                "homomorphism lattice differs from the exponent group".into(),
            ));
        }
        if rho == FieldAut::Conjugation && field.radicand().is_none() {
            return Err(Error::ConjugationOnRationals);
        }
        let cutoff = match u.cutoff() {
            Some(cu) => cutoff.min(cu),
            None => cutoff,
        };
        Ok(AutNormalForm {
            group,
            field,
            rho,
            tau,
            x,
            u,
            cutoff,
        })
    }

    pub fn identity(group: GroupDescriptor, field: FieldDescriptor, cutoff: Exponent) -> Self {
        AutNormalForm {
            rho: FieldAut::Identity,
            tau: OrderAutMatrix::identity(group.kind(), group.dimension()),
            x: UnitHom::trivial(group.clone(), field),
            u: OneUnitHom::trivial(group.clone(), field, &cutoff),
            group,
            field,
            cutoff,
        }
    }

    /// The G-exponentiation `ρ_x`.
    pub fn from_x(x: UnitHom, cutoff: Exponent) -> Self {
        let group = x.group().clone();
        let field = *x.field();
        AutNormalForm {
            rho: FieldAut::Identity,
            tau: OrderAutMatrix::identity(group.kind(), group.dimension()),
            u: OneUnitHom::trivial(group.clone(), field, &cutoff),
            group,
            field,
            x,
            cutoff,
        }
    }

    /// The 1-automorphism `σ_u`.
    pub fn from_u(u: OneUnitHom, cutoff: Exponent) -> Self {
        let group = u.group().clone();
        let field = *u.field();
        let cutoff = match u.cutoff() {
            Some(cu) => cutoff.min(cu),
            None => cutoff,
        };
        AutNormalForm {
            rho: FieldAut::Identity,
            tau: OrderAutMatrix::identity(group.kind(), group.dimension()),
            x: UnitHom::trivial(group.clone(), field),
            group,
            field,
            u,
            cutoff,
        }
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn rho(&self) -> FieldAut {
        self.rho
    }

    pub fn tau(&self) -> &OrderAutMatrix {
        &self.tau
    }

    pub fn x(&self) -> &UnitHom {
        &self.x
    }

    pub fn u(&self) -> &OneUnitHom {
        &self.u
    }

    pub fn cutoff(&self) -> &Exponent {
        &self.cutoff
    }

    /// Internal: induces the identity on both residue field and value group.
    pub fn is_internal(&self) -> bool {
        self.rho.is_identity() && self.tau.is_identity()
    }

    /// 1-automorphism: internal with trivial coefficient twist.
    pub fn is_one_aut(&self) -> bool {
        self.is_internal() && self.x.is_trivial()
    }

    pub fn is_identity(&self) -> bool {
        self.is_one_aut() && self.u.is_trivial()
    }

    /// Componentwise equality, comparing 1-unit data below the common cutoff.
    pub fn equal_at_cutoff(&self, other: &AutNormalForm) -> Result<bool> {
        Ok(self.rho == other.rho
            && self.tau == other.tau
            && self.x == other.x
            && self.u.equal_at_cutoff(&other.u)?)
    }
}

impl fmt::Display for AutNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rho = {}", self.rho)?;
        writeln!(f, "tau = {}", self.tau)?;
        let xs: Vec<String> = self.x.values().iter().map(|v| v.to_string()).collect();
        writeln!(f, "x = [{}]", xs.join(", "))?;
        let us: Vec<String> = self.u.values().iter().map(|v| v.to_string()).collect();
        write!(f, "u = [{}]", us.join(", "))
    }
}

/// The canonical lift `Σ a_g t^g ↦ Σ ρ(a_g) t^{τ(g)}` as a normal form with
/// trivial twists.
pub fn canonical_lift(
    rho: FieldAut,
    tau: OrderAutMatrix,
    group: GroupDescriptor,
    field: FieldDescriptor,
    cutoff: Exponent,
) -> Result<AutNormalForm> {
    AutNormalForm::new(
        group.clone(),
        field,
        rho,
        tau,
        UnitHom::trivial(group.clone(), field),
        OneUnitHom::trivial(group, field, &cutoff),
        cutoff,
    )
}

/// The coefficient twist `Σ a_g t^g ↦ Σ a_g x^g t^g` applied directly.
/// The support is unchanged.
pub fn g_exponentiation(x: &UnitHom, a: &Series) -> Result<Series> {
    let terms = a
        .terms()
        .map(|(g, c)| Ok((g.clone(), x.field().mul(c, &x.eval(g)?))))
        .collect::<Result<Vec<_>>>()?;
    Series::from_terms(a.group().clone(), *a.field(), terms, a.cutoff().clone())
}

/// Apply a normal form to a series:
/// `σ(a) = Σ_g ρ(a_g) · x^{τ(g)} · u(τ(g)) · t^{τ(g)}`, folded as a summable
/// family. The result is guaranteed below
/// `min(τ(cutoff(a)), τ(v(a)) + cutoff(u))`.
pub fn apply_aut(nf: &AutNormalForm, a: &Series) -> Result<Series> {
    if a.field() != &nf.field {
        return Err(Error::MixedDescriptors(format!(
            "series field {} vs automorphism field {}",
            a.field(),
            nf.field
        )));
    }
    if a.group().kind() != nf.group.kind() || a.group().dimension() != nf.group.dimension() {
        return Err(Error::MixedDescriptors(format!(
            "series group {} vs automorphism group {}",
            a.group(),
            nf.group
        )));
    }
    if nf.is_identity() {
        return Ok(a.clone());
    }
    let image_cutoff = nf.tau.apply(a.cutoff())?;
    let u_cutoff = nf.u.cutoff();
    let mut group = a.group().unify(&nf.group)?;
    if group.kind() == GroupKind::RationalLattice {
        group = group.refined(image_cutoff.least_level());
    }
    if a.is_zero() {
        return Ok(Series::zero(group, nf.field, image_cutoff));
    }

    let mut terms = Vec::with_capacity(a.term_count());
    for (g, c) in a.terms() {
        let gt = nf.tau.apply(g)?;
        let mut coeff = nf.field.aut_apply(nf.rho, c)?;
        if !nf.x.is_trivial() {
            coeff = nf.field.mul(&coeff, &nf.x.eval(&gt)?);
        }
        // This term is the exact monomial times a truncated 1-unit value.
        let term_cutoff = match &u_cutoff {
            Some(cu) => image_cutoff.clone().min(gt.add(cu)),
            None => image_cutoff.clone(),
        };
        let mut term = if nf.u.is_trivial() {
            Series::monomial(group.clone(), nf.field, coeff, Some(gt), term_cutoff)
        } else {
            let hint = term_cutoff.sub(&gt);
            let unit = nf.u.eval(&gt, &hint)?;
            unit.scaled(&coeff).shifted(&gt).truncated(&term_cutoff)
        };
        if term.group() != &group {
            term = term.with_level(group.level());
        }
        terms.push(term);
    }
    Ok(sum_family(terms)?.truncated(&image_cutoff))
}

/// An opaque series action that can only be probed.
pub struct BlackBoxAut<'a> {
    group: GroupDescriptor,
    field: FieldDescriptor,
    action: Box<dyn Fn(&Series) -> Result<Series> + 'a>,
}

impl<'a> BlackBoxAut<'a> {
    pub fn new(
        group: GroupDescriptor,
        field: FieldDescriptor,
        action: impl Fn(&Series) -> Result<Series> + 'a,
    ) -> Self {
        BlackBoxAut {
            group,
            field,
            action: Box::new(action),
        }
    }

    pub fn from_normal_form(nf: &'a AutNormalForm) -> Self {
        BlackBoxAut {
            group: nf.group.clone(),
            field: nf.field,
            action: Box::new(move |s| apply_aut(nf, s)),
        }
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn apply(&self, a: &Series) -> Result<Series> {
        (self.action)(a)
    }

    fn probe_monomial(&self, g: &Exponent, cutoff: &Exponent) -> Result<Series> {
        let probe = Series::monomial(
            self.group.clone(),
            self.field,
            self.field.one(),
            Some(g.clone()),
            g.add(cutoff),
        );
        self.apply(&probe)
    }
}

/// Recover the residue and value-group components `(ρ, τ)`.
///
/// `τ` is read off row by row from the valuations of the generator images
/// (`τ(g) = v(σ(t^g))`, scaled back up by the lattice level); `ρ` from the
/// constant term of the image of √m, matching `σ_k(a_0) = σ(a_0)_0`.
pub fn extract_phi(bb: &BlackBoxAut, cutoff: &Exponent) -> Result<(FieldAut, OrderAutMatrix)> {
    let d = bb.group.dimension();
    let level = crate::rational::rint(bb.group.level() as i64);
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        let g = bb.group.generator(i);
        let image = bb.probe_monomial(&g, cutoff)?;
        let v = image.valuation().ok_or_else(|| {
            Error::NotValuationPreserving(format!("image of t^{g} vanishes below its cutoff"))
        })?;
        rows.push(v.scale(&level).coords().to_vec());
    }
    let tau = crate::exponents::oaut_check(bb.group.kind(), rows)
        .map_err(|e| Error::NotValuationPreserving(e.to_string()))?;

    // Consistency samples: τ must act additively on valuations.
    let g0 = bb.group.generator(0);
    let mut samples: Vec<Exponent> = vec![g0.add(&g0)];
    if d >= 2 {
        samples.push(g0.add(&bb.group.generator(d - 1)));
    }
    for g in samples {
        let image = bb.probe_monomial(&g, cutoff)?;
        let expect = tau.apply(&g)?;
        match image.valuation() {
            Some(v) if *v == expect => {}
            got => {
                return Err(Error::NotValuationPreserving(format!(
                    "v(σ(t^{g})) = {:?}, expected {expect}",
                    got.map(|v| v.to_string())
                )));
            }
        }
    }

    let rho = match bb.field.radicand() {
        None => FieldAut::Identity,
        Some(_) => {
            let sqrt = bb.field.radical_unit()?;
            let probe = Series::constant(bb.group.clone(), bb.field, sqrt.clone(), cutoff.clone());
            let image = bb.apply(&probe)?;
            let c0 = image.constant_term();
            if c0 == sqrt {
                FieldAut::Identity
            } else if c0 == bb.field.neg(&sqrt) {
                FieldAut::Conjugation
            } else {
                return Err(Error::UnrecognizedFieldAut);
            }
        }
    };
    Ok((rho, tau))
}

/// Recover the coefficient twist of an internal automorphism:
/// `x_i = σ(t^{g_i})_{g_i}`.
pub fn extract_x(bb: &BlackBoxAut, cutoff: &Exponent) -> Result<UnitHom> {
    let (rho, tau) = extract_phi(bb, cutoff)?;
    if !rho.is_identity() || !tau.is_identity() {
        return Err(Error::NotInternal(format!(
            "residue/value components are ({rho}, {tau})"
        )));
    }
    let d = bb.group.dimension();
    let mut values = Vec::with_capacity(d);
    for i in 0..d {
        let g = bb.group.generator(i);
        let image = bb.probe_monomial(&g, cutoff)?;
        values.push(image.coeff(&g));
    }
    UnitHom::new(bb.group.clone(), bb.field, values)
}

/// Recover the 1-unit twist of an internal automorphism once `x` is known:
/// `u_i = t^{-g_i} σ(t^{g_i}) x_i^{-1}`.
pub fn extract_u(bb: &BlackBoxAut, x: &UnitHom, cutoff: &Exponent) -> Result<OneUnitHom> {
    let d = bb.group.dimension();
    let mut values = Vec::with_capacity(d);
    for i in 0..d {
        let g = bb.group.generator(i);
        let image = bb.probe_monomial(&g, cutoff)?;
        let unit = image
            .shifted(&g.neg())
            .scaled(&bb.field.inv(&x.values()[i])?)
            .truncated(cutoff);
        if !unit.is_one_unit() {
            return Err(Error::NotInternal(format!(
                "normalized image of t^{g} is not a 1-unit"
            )));
        }
        values.push(unit);
    }
    OneUnitHom::new(bb.group.clone(), bb.field, values)
}

/// Full decomposition: extract `(ρ, τ)`, strip the canonical lift, extract
/// `(x, u)`, then verify the rebuilt normal form against the probes.
///
/// Stripping never needs a second probing pass: the canonical lift maps
/// monomials to monomials, so the internal part's generator images are the
/// raw images of `t^{τ^{-1}(g_i)}`. All probe images are cached and shared
/// between extraction and verification.
pub fn decompose(bb: &BlackBoxAut, cutoff: &Exponent) -> Result<AutNormalForm> {
    let mut cache: HashMap<Exponent, Series> = HashMap::new();
    let mut image = |g: &Exponent| -> Result<Series> {
        if let Some(hit) = cache.get(g) {
            return Ok(hit.clone());
        }
        let img = bb.probe_monomial(g, cutoff)?;
        cache.insert(g.clone(), img.clone());
        Ok(img)
    };

    let d = bb.group.dimension();
    let level = crate::rational::rint(bb.group.level() as i64);
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        let g = bb.group.generator(i);
        let img = image(&g)?;
        let v = img.valuation().ok_or_else(|| {
            Error::NotValuationPreserving(format!("image of t^{g} vanishes below its cutoff"))
        })?;
        rows.push(v.scale(&level).coords().to_vec());
    }
    let tau = crate::exponents::oaut_check(bb.group.kind(), rows)
        .map_err(|e| Error::NotValuationPreserving(e.to_string()))?;

    let g0 = bb.group.generator(0);
    let mut samples: Vec<Exponent> = vec![g0.add(&g0)];
    if d >= 2 {
        samples.push(g0.add(&bb.group.generator(d - 1)));
    }
    for g in samples {
        let img = image(&g)?;
        let expect = tau.apply(&g)?;
        match img.valuation() {
            Some(v) if *v == expect => {}
            got => {
                return Err(Error::NotValuationPreserving(format!(
                    "v(σ(t^{g})) = {:?}, expected {expect}",
                    got.map(|v| v.to_string())
                )));
            }
        }
    }

    let rho = match bb.field.radicand() {
        None => FieldAut::Identity,
        Some(_) => {
            let sqrt = bb.field.radical_unit()?;
            let probe = Series::constant(bb.group.clone(), bb.field, sqrt.clone(), cutoff.clone());
            let c0 = bb.apply(&probe)?.constant_term();
            if c0 == sqrt {
                FieldAut::Identity
            } else if c0 == bb.field.neg(&sqrt) {
                FieldAut::Conjugation
            } else {
                return Err(Error::UnrecognizedFieldAut);
            }
        }
    };

    // Internal part σ ∘ Ψ(ρ, τ)^{-1} on the generator t^{g_i}: the unlift
    // turns it into the monomial t^{τ^{-1}(g_i)}, whose raw image is then
    // normalized by t^{-g_i} and the leading coefficient.
    let tau_inv = tau.invert()?;
    let mut x_values = Vec::with_capacity(d);
    let mut u_values = Vec::with_capacity(d);
    for i in 0..d {
        let g = bb.group.generator(i);
        let img = image(&tau_inv.apply(&g)?)?;
        let lead = img.coeff(&g);
        if lead.is_zero() {
            return Err(Error::NotValuationPreserving(format!(
                "image of t^{g} has no coefficient at its own exponent"
            )));
        }
        let unit = img
            .shifted(&g.neg())
            .scaled(&bb.field.inv(&lead)?)
            .truncated(cutoff);
        if !unit.is_one_unit() {
            return Err(Error::NotInternal(format!(
                "normalized image of t^{g} is not a 1-unit"
            )));
        }
        x_values.push(lead);
        u_values.push(unit);
    }
    let x = UnitHom::new(bb.group.clone(), bb.field, x_values)?;
    let u = OneUnitHom::new(bb.group.clone(), bb.field, u_values)?;
    let nf = AutNormalForm::new(bb.group.clone(), bb.field, rho, tau, x, u, cutoff.clone())?;

    // Verification probes: generators (cached), their negatives, constants.
    let mut probe_exponents: Vec<Exponent> = Vec::new();
    for i in 0..d {
        let g = bb.group.generator(i);
        probe_exponents.push(g.neg());
        probe_exponents.push(g);
    }
    for g in probe_exponents {
        let probe = Series::monomial(
            bb.group.clone(),
            bb.field,
            bb.field.one(),
            Some(g.clone()),
            g.add(cutoff),
        );
        let expected = match image(&g) {
            Ok(s) => s,
            Err(Error::CutoffUnreachable(_)) => continue,
            Err(e) => return Err(e),
        };
        let got = match apply_aut(&nf, &probe) {
            Ok(s) => s,
            Err(Error::CutoffUnreachable(_)) => continue,
            Err(e) => return Err(e),
        };
        if !expected.equal_to_cutoff(&got)? {
            return Err(Error::RoundTripMismatch(probe.to_string()));
        }
    }
    let mut constants = vec![Series::one(bb.group.clone(), bb.field, cutoff.clone())];
    if bb.field.radicand().is_some() {
        constants.push(Series::constant(
            bb.group.clone(),
            bb.field,
            bb.field.radical_unit()?,
            cutoff.clone(),
        ));
    }
    for probe in constants {
        if !bb.apply(&probe)?.equal_to_cutoff(&apply_aut(&nf, &probe)?)? {
            return Err(Error::RoundTripMismatch(probe.to_string()));
        }
    }
    Ok(nf)
}

/// The twisted product `(u_T × u_S)(g) = T(u_S(g)) · u_T(g)` of 1-unit homs,
/// with the left factor carried by its full internal automorphism `T`.
pub fn twisted_product(carrier: &AutNormalForm, u_sigma: &OneUnitHom) -> Result<OneUnitHom> {
    if !carrier.is_internal() {
        return Err(Error::NotInternal(
            "twisted product carrier must be internal".into(),
        ));
    }
    if carrier.group() != u_sigma.group() || carrier.field() != u_sigma.field() {
        return Err(Error::MixedDescriptors(
            "twisted product descriptors differ".into(),
        ));
    }
    let values = carrier
        .u
        .values()
        .iter()
        .zip(u_sigma.values())
        .map(|(ut, us)| apply_aut(carrier, us)?.mul(ut))
        .collect::<Result<Vec<_>>>()?;
    OneUnitHom::new(carrier.group.clone(), carrier.field, values)
}

/// Composition in normal form: probe `σ1 ∘ σ2` as a black box and decompose.
pub fn compose_nf(first: &AutNormalForm, second: &AutNormalForm) -> Result<AutNormalForm> {
    if first.group != second.group || first.field != second.field {
        return Err(Error::MixedDescriptors(
            "normal forms live on different descriptors (levels must agree)".into(),
        ));
    }
    let bb = BlackBoxAut::new(first.group.clone(), first.field, |s| {
        apply_aut(first, &apply_aut(second, s)?)
    });
    let cutoff = first.cutoff.clone().min(second.cutoff.clone());
    decompose(&bb, &cutoff)
}

/// Inverse in normal form: probe the triangular solver as a black box and
/// decompose it.
pub fn invert_nf(nf: &AutNormalForm) -> Result<AutNormalForm> {
    let bb = BlackBoxAut::new(nf.group.clone(), nf.field, |s| solve_preimage(nf, s));
    decompose(&bb, &nf.cutoff)
}

/// Solve `σ(s) = b` below `cutoff(b)` by leading-term elimination: the
/// minimal residual term `r_m t^m` is cancelled exactly by the preimage term
/// `ρ^{-1}(r_m x^{-m}) t^{τ^{-1}(m)}`, strictly raising the residual
/// valuation.
pub fn solve_preimage(nf: &AutNormalForm, b: &Series) -> Result<Series> {
    for value in nf.u.values() {
        if value.is_one() {
            continue;
        }
        let one = Series::one(value.group().clone(), nf.field, value.cutoff().clone());
        Series::ensure_cutoff_reachable(&value.sub(&one)?, b.cutoff())?;
    }
    let tau_inv = nf.tau.invert()?;
    let rho_inv = nf.rho.inverse();
    let target_cutoff = tau_inv.apply(b.cutoff())?;
    let mut group = b.group().unify(&nf.group)?;
    if group.kind() == GroupKind::RationalLattice {
        group = group.refined(target_cutoff.least_level());
    }
    let mut solution = Series::zero(group.clone(), nf.field, target_cutoff.clone());
    // The residual is maintained incrementally: each round subtracts the
    // image of the single new preimage term.
    let mut residual = b.clone();
    let mut prev: Option<Exponent> = None;
    loop {
        residual = residual.truncated(b.cutoff());
        let Some(m) = residual.valuation().cloned() else {
            return Ok(solution);
        };
        if prev.as_ref().is_some_and(|p| m <= *p) {
            return Err(Error::CutoffUnreachable(
                "preimage solver stalled below the cutoff".into(),
            ));
        }
        let mut coeff = residual.coeff(&m);
        if !nf.x.is_trivial() {
            coeff = nf.field.div(&coeff, &nf.x.eval(&m)?)?;
        }
        let coeff = nf.field.aut_apply(rho_inv, &coeff)?;
        let h = tau_inv.apply(&m)?;
        let term = Series::monomial(group.clone(), nf.field, coeff, Some(h), target_cutoff.clone());
        residual = residual.sub(&apply_aut(nf, &term)?)?;
        solution = solution.add(&term)?;
        prev = Some(m);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::FieldDescriptor;
    use crate::exponents::{int_matrix, oaut_check, GroupDescriptor};
    use crate::rational::{rat, rint};

    fn z() -> GroupDescriptor {
        GroupDescriptor::int_lattice(1).unwrap()
    }

    fn z2() -> GroupDescriptor {
        GroupDescriptor::int_lattice(2).unwrap()
    }

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn e1(n: i64) -> Exponent {
        Exponent::new(vec![rint(n)])
    }

    fn e2(a: i64, b: i64) -> Exponent {
        Exponent::new(vec![rint(a), rint(b)])
    }

    fn s(terms: &[(i64, (i64, i64))], cutoff: i64) -> Series {
        Series::from_terms(
            z(),
            q(),
            terms
                .iter()
                .map(|&(g, (n, d))| (e1(g), q().from_rat(rat(n, d))))
                .collect(),
            e1(cutoff),
        )
        .unwrap()
    }

    fn one_unit_hom_z(terms: &[(i64, (i64, i64))], cutoff: i64) -> OneUnitHom {
        OneUnitHom::new(z(), q(), vec![s(terms, cutoff)]).unwrap()
    }

    #[test]
    fn hom_eval_law() {
        let x = UnitHom::new(z(), q(), vec![q().from_rat(rint(2))]).unwrap();
        assert_eq!(x.eval(&e1(3)).unwrap(), q().from_rat(rint(8)));
        assert_eq!(x.eval(&e1(-2)).unwrap(), q().from_rat(rat(1, 4)));

        let g = GroupDescriptor::rational_lattice(1, 2).unwrap();
        let u = OneUnitHom::new(
            g.clone(),
            q(),
            vec![Series::from_terms(
                g.clone(),
                q(),
                vec![(e1(0), q().one()), (e1(1), q().one())],
                e1(4),
            )
            .unwrap()],
        )
        .unwrap();
        // u(1) = u(1/2)² = 1 + 2t + t².
        let val = u.eval(&e1(1), &e1(4)).unwrap();
        assert!(val
            .equal_to_cutoff(
                &Series::from_terms(
                    g,
                    q(),
                    vec![
                        (e1(0), q().one()),
                        (e1(1), q().from_rat(rint(2))),
                        (e1(2), q().one()),
                    ],
                    e1(4),
                )
                .unwrap()
            )
            .unwrap());
        assert!(matches!(
            u.eval(&Exponent::new(vec![rat(1, 3)]), &e1(4)),
            Err(Error::LevelExceeded { .. })
        ));
    }

    #[test]
    fn g_exponentiation_twist() {
        let x = UnitHom::new(z(), q(), vec![q().from_rat(rint(2))]).unwrap();
        let a = s(&[(0, (1, 1)), (1, (1, 1)), (2, (1, 1))], 8);
        assert_eq!(
            g_exponentiation(&x, &a).unwrap(),
            s(&[(0, (1, 1)), (1, (2, 1)), (2, (4, 1))], 8)
        );
        let trivial = UnitHom::trivial(z(), q());
        assert_eq!(g_exponentiation(&trivial, &a).unwrap(), a);
        let neg = UnitHom::new(z(), q(), vec![q().from_rat(rint(-1))]).unwrap();
        let b = s(&[(1, (1, 1)), (3, (-1, 1))], 8);
        assert_eq!(
            g_exponentiation(&neg, &b).unwrap(),
            s(&[(1, (-1, 1)), (3, (1, 1))], 8)
        );
    }

    #[test]
    fn canonical_lift_action() {
        let k = FieldDescriptor::quadratic(2).unwrap();
        let lift = canonical_lift(
            FieldAut::Conjugation,
            OrderAutMatrix::identity(GroupKind::IntLattice, 1),
            z(),
            k,
            e1(8),
        )
        .unwrap();
        let a = Series::monomial(
            z(),
            k,
            k.element(rint(1), rint(1)).unwrap(),
            Some(e1(1)),
            e1(8),
        );
        let img = apply_aut(&lift, &a).unwrap();
        assert_eq!(img.coeff(&e1(1)), k.element(rint(1), rint(-1)).unwrap());

        // Exponent relabeling under the shear: row action sends e_1 to (1,1).
        let shear = oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 1], &[0, 1]])).unwrap();
        let lift2 = canonical_lift(FieldAut::Identity, shear, z2(), q(), e2(8, 0)).unwrap();
        let m = Series::monomial(z2(), q(), q().one(), Some(e2(1, 0)), e2(8, 0));
        let img2 = apply_aut(&lift2, &m).unwrap();
        assert_eq!(img2.valuation(), Some(&e2(1, 1)));

        let id = AutNormalForm::identity(z(), q(), e1(8));
        let b = s(&[(-2, (3, 1)), (0, (1, 2)), (1, (7, 1))], 8);
        assert_eq!(apply_aut(&id, &b).unwrap(), b);
    }

    #[test]
    fn one_unit_twist_action() {
        // u(1) = 1 + t sends t to t + t².
        let nf = AutNormalForm::from_u(one_unit_hom_z(&[(0, (1, 1)), (1, (1, 1))], 8), e1(8));
        let t = s(&[(1, (1, 1))], 8);
        assert!(apply_aut(&nf, &t)
            .unwrap()
            .equal_to_cutoff(&s(&[(1, (1, 1)), (2, (1, 1))], 8))
            .unwrap());
        // On t^{-1}: oracle ((1+t)t)^{-1} = t^{-1} - 1 + t - ...
        let tinv = s(&[(-1, (1, 1))], 2);
        let img = apply_aut(&nf, &tinv).unwrap();
        let oracle = s(&[(1, (1, 1)), (2, (1, 1))], 8).pow_int(-1).unwrap();
        assert!(img.equal_to_cutoff(&oracle).unwrap());
        assert!(img
            .equal_to_cutoff(&s(&[(-1, (1, 1)), (0, (-1, 1)), (1, (1, 1))], 2))
            .unwrap());
    }

    #[test]
    fn extraction_of_phi() {
        let k = FieldDescriptor::quadratic(2).unwrap();
        let shear = oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 2], &[0, 1]])).unwrap();
        let lift =
            canonical_lift(FieldAut::Conjugation, shear.clone(), z2(), k, e2(8, 0)).unwrap();
        let bb = BlackBoxAut::from_normal_form(&lift);
        let (rho, tau) = extract_phi(&bb, &e2(8, 0)).unwrap();
        assert_eq!(rho, FieldAut::Conjugation);
        assert_eq!(tau, shear);

        let id = AutNormalForm::identity(z(), q(), e1(8));
        let bb = BlackBoxAut::from_normal_form(&id);
        let (rho, tau) = extract_phi(&bb, &e1(8)).unwrap();
        assert!(rho.is_identity() && tau.is_identity());

        // A G-exponentiation is internal.
        let x = UnitHom::new(z(), q(), vec![q().from_rat(rint(5))]).unwrap();
        let nf = AutNormalForm::from_x(x, e1(8));
        let bb = BlackBoxAut::from_normal_form(&nf);
        let (rho, tau) = extract_phi(&bb, &e1(8)).unwrap();
        assert!(rho.is_identity() && tau.is_identity());

        // A probe that kills valuations is rejected.
        let broken = BlackBoxAut::new(z(), q(), |probe| {
            Ok(Series::zero(z(), q(), probe.cutoff().clone()))
        });
        assert!(matches!(
            extract_phi(&broken, &e1(8)),
            Err(Error::NotValuationPreserving(_))
        ));
    }

    #[test]
    fn extraction_of_x_and_u() {
        let x = UnitHom::new(z(), q(), vec![q().from_rat(rint(2))]).unwrap();
        let nf = AutNormalForm::from_x(x.clone(), e1(8));
        let bb = BlackBoxAut::from_normal_form(&nf);
        assert_eq!(extract_x(&bb, &e1(8)).unwrap(), x);
        let u = extract_u(&bb, &x, &e1(8)).unwrap();
        assert!(u.is_trivial());

        // σ(t) = t + t² is a 1-automorphism: x = 1, u(1) = 1 + t.
        let nf = AutNormalForm::from_u(one_unit_hom_z(&[(0, (1, 1)), (1, (1, 1))], 8), e1(8));
        let bb = BlackBoxAut::from_normal_form(&nf);
        let got_x = extract_x(&bb, &e1(8)).unwrap();
        assert!(got_x.is_trivial());
        let got_u = extract_u(&bb, &got_x, &e1(8)).unwrap();
        assert!(got_u.equal_at_cutoff(nf.u()).unwrap());

        // σ(t) = 2t + 2t² splits as x(1) = 2, u(1) = 1 + t.
        let x2 = UnitHom::new(z(), q(), vec![q().from_rat(rint(2))]).unwrap();
        let combined = AutNormalForm::new(
            z(),
            q(),
            FieldAut::Identity,
            OrderAutMatrix::identity(GroupKind::IntLattice, 1),
            x2.clone(),
            one_unit_hom_z(&[(0, (1, 1)), (1, (1, 1))], 8),
            e1(8),
        )
        .unwrap();
        let bb = BlackBoxAut::from_normal_form(&combined);
        let got_x = extract_x(&bb, &e1(8)).unwrap();
        assert_eq!(got_x, x2);
        let got_u = extract_u(&bb, &got_x, &e1(8)).unwrap();
        assert!(got_u.equal_at_cutoff(combined.u()).unwrap());

        // extract_x refuses external automorphisms.
        let k = FieldDescriptor::quadratic(2).unwrap();
        let lift = canonical_lift(
            FieldAut::Conjugation,
            OrderAutMatrix::identity(GroupKind::IntLattice, 1),
            z(),
            k,
            e1(8),
        )
        .unwrap();
        let bb = BlackBoxAut::from_normal_form(&lift);
        assert!(matches!(extract_x(&bb, &e1(8)), Err(Error::NotInternal(_))));
    }

    #[test]
    fn decompose_round_trip() {
        let k = FieldDescriptor::quadratic(2).unwrap();
        let shear = oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 1], &[0, 1]])).unwrap();
        let x = UnitHom::new(
            z2(),
            k,
            vec![
                k.element(rint(2), rint(0)).unwrap(),
                k.element(rint(1), rint(1)).unwrap(),
            ],
        )
        .unwrap();
        let u_val = Series::from_terms(
            z2(),
            k,
            vec![
                (e2(0, 0), k.one()),
                (e2(1, 1), k.element(rint(1), rint(-1)).unwrap()),
            ],
            e2(8, 0),
        )
        .unwrap();
        let u = OneUnitHom::new(z2(), k, vec![u_val, Series::one(z2(), k, e2(8, 0))]).unwrap();
        let nf = AutNormalForm::new(z2(), k, FieldAut::Conjugation, shear, x, u, e2(8, 0)).unwrap();
        let bb = BlackBoxAut::from_normal_form(&nf);
        let recovered = decompose(&bb, &e2(8, 0)).unwrap();
        assert!(recovered.equal_at_cutoff(&nf).unwrap());

        let id = AutNormalForm::identity(z(), q(), e1(8));
        let bb = BlackBoxAut::from_normal_form(&id);
        assert!(decompose(&bb, &e1(8)).unwrap().is_identity());
    }

    #[test]
    fn twisted_product_matches_composition() {
        // u1 = u2 = 1 + t: (u1 × u2)(1) = σ_{u1}(1+t)·(1+t) = 1+2t+2t²+t³.
        let u1 = one_unit_hom_z(&[(0, (1, 1)), (1, (1, 1))], 8);
        let t_nf = AutNormalForm::from_u(u1.clone(), e1(8));
        let prod = twisted_product(&t_nf, &u1).unwrap();
        let expected = s(&[(0, (1, 1)), (1, (2, 1)), (2, (2, 1)), (3, (1, 1))], 4);
        assert!(prod.values()[0].equal_to_cutoff(&expected).unwrap());

        // Identity laws.
        let id = AutNormalForm::identity(z(), q(), e1(8));
        assert!(twisted_product(&id, &u1)
            .unwrap()
            .equal_at_cutoff(&u1)
            .unwrap());
        let trivial = OneUnitHom::trivial(z(), q(), &e1(8));
        assert!(twisted_product(&t_nf, &trivial)
            .unwrap()
            .equal_at_cutoff(&u1)
            .unwrap());

        // Against the operational composite.
        let composite = compose_nf(&t_nf, &t_nf).unwrap();
        assert!(composite.u().equal_at_cutoff(&prod).unwrap());
    }

    #[test]
    fn composition_laws() {
        let x1 = UnitHom::new(z(), q(), vec![q().from_rat(rint(2))]).unwrap();
        let x2 = UnitHom::new(z(), q(), vec![q().from_rat(rat(3, 5))]).unwrap();
        let nf1 = AutNormalForm::from_x(x1.clone(), e1(8));
        let nf2 = AutNormalForm::from_x(x2.clone(), e1(8));
        let id = AutNormalForm::identity(z(), q(), e1(8));

        assert!(compose_nf(&nf1, &id).unwrap().equal_at_cutoff(&nf1).unwrap());
        let both = compose_nf(&nf1, &nf2).unwrap();
        assert_eq!(both.x(), &x1.pointwise_mul(&x2).unwrap());
        assert!(both.is_internal());

        // Composite of canonical lifts is the canonical lift of the product.
        let k = FieldDescriptor::quadratic(2).unwrap();
        let m1 = oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, 1], &[0, 1]])).unwrap();
        let m2 = oaut_check(GroupKind::IntLattice, int_matrix(&[&[1, -2], &[0, 1]])).unwrap();
        let l1 = canonical_lift(FieldAut::Conjugation, m1.clone(), z2(), k, e2(8, 0)).unwrap();
        let l2 = canonical_lift(FieldAut::Conjugation, m2.clone(), z2(), k, e2(8, 0)).unwrap();
        let both = compose_nf(&l1, &l2).unwrap();
        assert_eq!(both.rho(), FieldAut::Identity);
        assert_eq!(both.tau(), &m1.compose(&m2).unwrap());
        assert!(both.x().is_trivial() && both.u().is_trivial());
    }

    #[test]
    fn inversion() {
        let id = AutNormalForm::identity(z(), q(), e1(8));
        assert!(invert_nf(&id).unwrap().is_identity());

        let x = UnitHom::new(z(), q(), vec![q().from_rat(rint(2))]).unwrap();
        let nf = AutNormalForm::from_x(x, e1(8));
        let inv = invert_nf(&nf).unwrap();
        assert_eq!(inv.x().values()[0], q().from_rat(rat(1, 2)));

        // u = 1 + t: the inverse 1-unit hom starts 1 - t + 2t² - 5t³.
        let nf = AutNormalForm::from_u(one_unit_hom_z(&[(0, (1, 1)), (1, (1, 1))], 8), e1(8));
        let inv = invert_nf(&nf).unwrap();
        let expected = s(&[(0, (1, 1)), (1, (-1, 1)), (2, (2, 1)), (3, (-5, 1))], 4);
        assert!(inv.u().values()[0].equal_to_cutoff(&expected).unwrap());

        let product = compose_nf(&nf, &inv).unwrap();
        assert!(product.is_internal());
        assert!(product.x().is_trivial());
        let t = s(&[(1, (1, 1))], 8);
        assert!(apply_aut(&product, &t)
            .unwrap()
            .equal_to_cutoff(&t)
            .unwrap());
    }

    #[test]
    fn solver_matches_forward_action() {
        let nf = AutNormalForm::from_u(one_unit_hom_z(&[(0, (1, 1)), (2, (1, 2))], 8), e1(8));
        let b = s(&[(1, (3, 1)), (2, (-1, 1)), (4, (1, 3))], 8);
        let sol = solve_preimage(&nf, &b).unwrap();
        let image = apply_aut(&nf, &sol).unwrap();
        assert!(image.equal_to_cutoff(&b).unwrap());
    }
}
