//! Seeded property suites.
//!
//! Each suite draws a deterministic pseudorandom sample from a seed, runs
//! one family of algebraic laws, and reports per-case pass/fail with a
//! witness on failure. The same suites back the `verify` subcommand and the
//! acceptance tests, so a report is reproducible byte for byte from its
//! seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autalg::{
    apply_aut, canonical_lift, compose_nf, decompose, extract_phi, extract_x, g_exponentiation,
    invert_nf, twisted_product, AutNormalForm, BlackBoxAut, OneUnitHom, UnitHom,
};
use crate::coeffs::{FieldAut, FieldDescriptor, FieldElement};
use crate::error::{Error, Result};
use crate::exponents::{exp_add, exp_compare, oaut_check, Exponent, GroupDescriptor, GroupKind};
use crate::laurent::{
    is_order_preserving, schilling_inverse, schilling_xs, sigma_u_apply, LaurentUnit, MoebiusClass,
    MoebiusMap,
};
use crate::parse::parse_series;
use crate::puiseux::{
    lattice_to_puiseux, puiseux_apply_aut, puiseux_oaut_apply, puiseux_to_lattice,
    puiseux_unit_pow_q, PuiseuxSeries,
};
use crate::rational::{rat, rint, Rat};
use crate::rayner::{
    family_check_axioms, family_check_oaut_stability, CardinalityBound, FamilyPolicy,
    SupportDescriptor,
};
use crate::series::{root_of_unity_solve, sum_family, Series, SummableFamily};

/// Outcome of one suite run.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "suite {}: {} of {} cases passed (seed {})\n",
            self.suite,
            self.cases - self.failures.len(),
            self.cases,
            self.seed
        );
        for f in &self.failures {
            out.push_str(&format!("  FAIL {f}\n"));
        }
        out
    }

    /// Line-oriented key-value rendering with a stable field order.
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("suite = {}\n", self.suite));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("cases = {}\n", self.cases));
        out.push_str(&format!("failed = {}\n", self.failures.len()));
        out.push_str(&format!(
            "status = {}\n",
            if self.passed() { "pass" } else { "fail" }
        ));
        for (i, f) in self.failures.iter().enumerate() {
            out.push_str(&format!("failure.{i} = {f}\n"));
        }
        out
    }
}

struct Recorder {
    suite: &'static str,
    seed: u64,
    cases: usize,
    failures: Vec<String>,
}

impl Recorder {
    fn new(suite: &'static str, seed: u64) -> Self {
        Recorder {
            suite,
            seed,
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn case(&mut self, label: &str, outcome: Result<bool>) {
        self.cases += 1;
        match outcome {
            Ok(true) => {}
            Ok(false) => self.failures.push(format!("case {}: {label}", self.cases)),
            Err(e) => self
                .failures
                .push(format!("case {}: {label}: error {e}", self.cases)),
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite.to_string(),
            seed: self.seed,
            cases: self.cases,
            failures: self.failures,
        }
    }
}

/// Deterministic sample generator for suite inputs.
pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn i64_in(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi)
    }

    pub fn rat_small(&mut self) -> Rat {
        rat(self.i64_in(-5, 5), self.i64_in(1, 4))
    }

    pub fn rat_nonzero(&mut self) -> Rat {
        loop {
            let q = self.rat_small();
            if !num::Zero::is_zero(&q) {
                return q;
            }
        }
    }

    pub fn rat_positive(&mut self) -> Rat {
        rat(self.i64_in(1, 6), self.i64_in(1, 4))
    }

    pub fn field_elem(&mut self, field: &FieldDescriptor) -> FieldElement {
        match field.radicand() {
            None => field.from_rat(self.rat_small()),
            Some(_) => field.element(self.rat_small(), self.rat_small()).unwrap(),
        }
    }

    pub fn field_nonzero(&mut self, field: &FieldDescriptor) -> FieldElement {
        loop {
            let v = self.field_elem(field);
            if !v.is_zero() {
                return v;
            }
        }
    }

    /// A lattice point with coordinates `k/L`, `k` in the given range.
    pub fn exponent(&mut self, group: &GroupDescriptor, lo: i64, hi: i64) -> Exponent {
        let coords = (0..group.dimension())
            .map(|_| Rat::new(self.i64_in(lo, hi).into(), group.level().into()))
            .collect();
        Exponent::new(coords)
    }

    pub fn exponent_positive(&mut self, group: &GroupDescriptor, hi: i64) -> Exponent {
        loop {
            let e = self.exponent(group, -hi, hi);
            if e.is_positive() {
                return e;
            }
        }
    }

    /// Upper uni-triangular integer matrix.
    pub fn uut(&mut self, d: usize) -> crate::exponents::OrderAutMatrix {
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            rint(1)
                        } else if j > i {
                            rint(self.i64_in(-2, 2))
                        } else {
                            rint(0)
                        }
                    })
                    .collect()
            })
            .collect();
        oaut_check(GroupKind::IntLattice, entries).expect("generated UUT is valid")
    }

    /// Upper triangular rational matrix with positive diagonal.
    pub fn upt(&mut self, d: usize) -> crate::exponents::OrderAutMatrix {
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            self.rat_positive()
                        } else if j > i {
                            self.rat_small()
                        } else {
                            rint(0)
                        }
                    })
                    .collect()
            })
            .collect();
        oaut_check(GroupKind::RationalLattice, entries).expect("generated UPT is valid")
    }

    /// A series with a few random terms strictly below the cutoff.
    pub fn series(
        &mut self,
        group: &GroupDescriptor,
        field: &FieldDescriptor,
        cutoff: &Exponent,
        max_terms: usize,
        lo: i64,
        hi: i64,
    ) -> Series {
        let n = self.i64_in(0, max_terms as i64) as usize;
        let terms = (0..n)
            .map(|_| (self.exponent(group, lo, hi), self.field_elem(field)))
            .collect();
        Series::from_terms(group.clone(), *field, terms, cutoff.clone())
            .expect("generated series is valid")
    }

    pub fn series_nonzero(
        &mut self,
        group: &GroupDescriptor,
        field: &FieldDescriptor,
        cutoff: &Exponent,
        max_terms: usize,
        lo: i64,
        hi: i64,
    ) -> Series {
        loop {
            let s = self.series(group, field, cutoff, max_terms, lo, hi);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// A 1-unit whose tail exponents have a positive first coordinate, so
    /// truncated inverses and roots below a first-coordinate cutoff exist.
    pub fn one_unit(
        &mut self,
        group: &GroupDescriptor,
        field: &FieldDescriptor,
        cutoff: &Exponent,
    ) -> Series {
        let mut terms = vec![(group.zero(), field.one())];
        for _ in 0..self.i64_in(1, 2) {
            let mut coords = vec![Rat::new(
                self.i64_in(1, 2).into(),
                group.level().into(),
            )];
            for _ in 1..group.dimension() {
                coords.push(Rat::new(self.i64_in(-1, 1).into(), group.level().into()));
            }
            terms.push((Exponent::new(coords), self.field_elem(field)));
        }
        Series::from_terms(group.clone(), *field, terms, cutoff.clone())
            .expect("generated 1-unit is valid")
    }

    pub fn unit_hom(&mut self, group: &GroupDescriptor, field: &FieldDescriptor) -> UnitHom {
        let values = (0..group.dimension())
            .map(|_| self.field_nonzero(field))
            .collect();
        UnitHom::new(group.clone(), *field, values).expect("generated unit hom is valid")
    }

    pub fn one_unit_hom(
        &mut self,
        group: &GroupDescriptor,
        field: &FieldDescriptor,
        cutoff: &Exponent,
    ) -> OneUnitHom {
        let values = (0..group.dimension())
            .map(|_| self.one_unit(group, field, cutoff))
            .collect();
        OneUnitHom::new(group.clone(), *field, values).expect("generated one-unit hom is valid")
    }

    /// A full normal form over the integer lattice.
    pub fn normal_form(
        &mut self,
        group: &GroupDescriptor,
        field: &FieldDescriptor,
        cutoff: &Exponent,
        internal: bool,
    ) -> AutNormalForm {
        let rho = if internal || field.radicand().is_none() || self.i64_in(0, 1) == 0 {
            FieldAut::Identity
        } else {
            FieldAut::Conjugation
        };
        let tau = if internal {
            crate::exponents::OrderAutMatrix::identity(group.kind(), group.dimension())
        } else {
            self.uut(group.dimension())
        };
        AutNormalForm::new(
            group.clone(),
            *field,
            rho,
            tau,
            self.unit_hom(group, field),
            self.one_unit_hom(group, field, cutoff),
            cutoff.clone(),
        )
        .expect("generated normal form is valid")
    }
}

fn z1() -> GroupDescriptor {
    GroupDescriptor::int_lattice(1).unwrap()
}

fn z2() -> GroupDescriptor {
    GroupDescriptor::int_lattice(2).unwrap()
}

fn qq() -> FieldDescriptor {
    FieldDescriptor::rationals()
}

fn qsqrt2() -> FieldDescriptor {
    FieldDescriptor::quadratic(2).unwrap()
}

fn e1(n: i64) -> Exponent {
    Exponent::new(vec![rint(n)])
}

fn e2(a: i64, b: i64) -> Exponent {
    Exponent::new(vec![rint(a), rint(b)])
}

/// Order preservation and group laws of the matrix representation.
pub fn suite_exponents(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("exponents", seed);
    let int2 = z2();
    let rat2 = GroupDescriptor::rational_lattice(2, 2).unwrap();

    for _ in 0..100 {
        let m = g.uut(2);
        let v = g.exponent_positive(&int2, 6);
        rec.case(
            &format!("uut order preservation on {v}"),
            m.apply(&v).map(|img| img.is_positive()),
        );
    }
    for _ in 0..100 {
        let m = g.upt(2);
        let v = g.exponent_positive(&rat2, 6);
        rec.case(
            &format!("upt order preservation on {v}"),
            m.apply(&v).map(|img| img.is_positive()),
        );
    }
    for _ in 0..50 {
        let (m1, m2) = (g.uut(2), g.uut(2));
        let v = g.exponent(&int2, -4, 4);
        rec.case(
            "compose action law",
            (|| {
                let lhs = m1.compose(&m2)?.apply(&v)?;
                let rhs = m1.apply(&m2.apply(&v)?)?;
                Ok(lhs == rhs)
            })(),
        );
        let m = g.upt(2);
        let w = g.exponent(&rat2, -4, 4);
        rec.case(
            "inverse round trip",
            (|| Ok(m.invert()?.apply(&m.apply(&w)?)? == w))(),
        );
    }
    for _ in 0..200 {
        let a = g.exponent(&int2, -5, 5);
        let b = g.exponent(&int2, -5, 5);
        let c = g.exponent(&int2, -5, 5);
        rec.case(
            "order compatible with addition",
            (|| {
                let ord = exp_compare(&a, &b)?;
                let shifted = exp_compare(&exp_add(&a, &c)?, &exp_add(&b, &c)?)?;
                Ok(ord == shifted)
            })(),
        );
    }
    rec.finish()
}

/// Field automorphisms are ring maps; the order is total and compatible.
pub fn suite_coeffs(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("coeffs", seed);
    let k = qsqrt2();

    for _ in 0..200 {
        let x = g.field_elem(&k);
        let y = g.field_elem(&k);
        rec.case(
            "conjugation is additive and multiplicative",
            (|| {
                let cx = k.aut_apply(FieldAut::Conjugation, &x)?;
                let cy = k.aut_apply(FieldAut::Conjugation, &y)?;
                let add_ok = k.aut_apply(FieldAut::Conjugation, &k.add(&x, &y))? == k.add(&cx, &cy);
                let mul_ok = k.aut_apply(FieldAut::Conjugation, &k.mul(&x, &y))? == k.mul(&cx, &cy);
                let inv_ok = k.aut_apply(FieldAut::Conjugation, &cx)? == x;
                Ok(add_ok && mul_ok && inv_ok)
            })(),
        );
    }
    for _ in 0..200 {
        let x = g.field_elem(&k);
        let y = g.field_elem(&k);
        rec.case(
            "order total and compatible",
            (|| {
                let diff = k.sub(&x, &y);
                let trichotomy = if diff.is_zero() {
                    true
                } else {
                    k.is_positive(&diff)? != k.is_positive(&k.neg(&diff))?
                };
                // a > b implies a + c > b + c; positive times positive is positive.
                let c = k.mul(&x, &x);
                let prod_ok = diff.is_zero()
                    || c.is_zero()
                    || !k.is_positive(&diff)?
                    || k.is_positive(&k.mul(&diff, &c))?;
                Ok(trichotomy && prod_ok)
            })(),
        );
    }
    rec.finish()
}

/// Ring laws at cutoff, the valuation axioms, and summable-family bounds.
pub fn suite_series(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("series", seed);
    let group = z1();
    let field = qsqrt2();
    let cutoff = e1(8);

    for _ in 0..200 {
        let a = g.series(&group, &field, &cutoff, 3, -2, 6);
        let b = g.series(&group, &field, &cutoff, 3, -2, 6);
        let c = g.series(&group, &field, &cutoff, 3, -2, 6);
        rec.case(
            "associativity and distributivity",
            (|| {
                let assoc = a.mul(&b)?.mul(&c)?.equal_to_cutoff(&a.mul(&b.mul(&c)?)?)?;
                let distr = a
                    .mul(&b.add(&c)?)?
                    .equal_to_cutoff(&a.mul(&b)?.add(&a.mul(&c)?)?)?;
                Ok(assoc && distr)
            })(),
        );
    }
    for _ in 0..200 {
        let a = g.series_nonzero(&group, &field, &cutoff, 3, -2, 6);
        let b = g.series_nonzero(&group, &field, &cutoff, 3, -2, 6);
        rec.case(
            "valuation axioms",
            (|| {
                let prod = a.mul(&b)?;
                let mul_ok = match prod.valuation() {
                    Some(v) => *v == exp_add(a.valuation().unwrap(), b.valuation().unwrap())?,
                    None => false,
                };
                let lead_ok = *prod.leading()?
                    == field.mul(a.leading()?, b.leading()?);
                let sum = a.add(&b)?;
                let min = a.valuation().unwrap().min(b.valuation().unwrap());
                let ultra_ok = match sum.valuation() {
                    Some(v) => {
                        v >= min
                            && (a.valuation() == b.valuation() || v == min)
                    }
                    None => a.valuation() == b.valuation(),
                };
                Ok(mul_ok && lead_ok && ultra_ok)
            })(),
        );
    }
    for _ in 0..100 {
        let u = g.one_unit(&group, &field, &cutoff);
        let c = g.field_nonzero(&field);
        let unit = u.scaled(&c);
        rec.case(
            "unit inverse",
            (|| Ok(unit.mul(&unit.invert_unit()?)?.is_one()))(),
        );
    }
    for _ in 0..100 {
        let members: Vec<Series> = (0..g.i64_in(1, 4))
            .map(|_| g.series(&group, &field, &cutoff, 3, -2, 6))
            .collect();
        rec.case(
            "summable family valuation bound",
            (|| {
                let fam = SummableFamily::new(members.clone())?;
                let total = fam.sum()?;
                match fam.min_valuation() {
                    None => Ok(total.is_zero()),
                    Some(nu) => {
                        let bound_ok = total.valuation().map(|v| *v >= nu).unwrap_or(true);
                        let unique = fam.attaining(&nu) == 1;
                        let sharp_ok = !unique
                            || total.valuation() == Some(&nu);
                        Ok(bound_ok && sharp_ok)
                    }
                }
            })(),
        );
    }
    rec.finish()
}

/// Newton roots of 1-units and triviality of 1-unit roots of unity.
pub fn suite_roots(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("roots", seed);
    let group = z1();
    let field = qq();
    let cutoff = e1(12);

    for _ in 0..50 {
        let u = g.one_unit(&group, &field, &cutoff);
        for n in [2u32, 3, 5] {
            rec.case(
                &format!("{n}-th root of a 1-unit"),
                (|| {
                    let r = u.nth_root_one_unit(n)?;
                    Ok(r.is_one_unit() && r.pow_int(n as i64)?.equal_to_cutoff(&u)?)
                })(),
            );
        }
    }
    for n in 1..=7u32 {
        rec.case(
            &format!("1-unit root of unity of order {n} is 1"),
            root_of_unity_solve(group.clone(), field, n, cutoff.clone()).map(|r| r.is_one()),
        );
    }
    // No nontrivial 1-unit can have finite multiplicative order.
    for _ in 0..25 {
        let u = g.one_unit(&group, &field, &cutoff);
        if u.is_one() {
            continue;
        }
        rec.case(
            "nontrivial 1-units have infinite order",
            (|| {
                for n in 2..=5i64 {
                    if u.pow_int(n)?.is_one() {
                        return Ok(false);
                    }
                }
                Ok(true)
            })(),
        );
    }
    rec.finish()
}

/// The canonical lift section and the coefficient-twist section.
pub fn suite_section_laws(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("section-laws", seed);
    let group = z2();
    let field = qsqrt2();
    let cutoff = e2(8, 0);

    for rho in [FieldAut::Identity, FieldAut::Conjugation] {
        for _ in 0..20 {
            let tau = g.uut(2);
            rec.case(
                &format!("residue/value extraction inverts the canonical lift ({rho}, {tau})"),
                (|| {
                    let lift = canonical_lift(rho, tau.clone(), group.clone(), field, cutoff.clone())?;
                    let bb = BlackBoxAut::from_normal_form(&lift);
                    let (r, t) = extract_phi(&bb, &cutoff)?;
                    Ok(r == rho && t == tau)
                })(),
            );
        }
    }
    for _ in 0..100 {
        let x = g.unit_hom(&group, &field);
        rec.case(
            "coefficient twist extraction inverts the twist section",
            (|| {
                let nf = AutNormalForm::from_x(x.clone(), cutoff.clone());
                let bb = BlackBoxAut::from_normal_form(&nf);
                Ok(extract_x(&bb, &cutoff)? == x)
            })(),
        );
    }
    rec.finish()
}

/// Internal automorphisms fix valuations and constant terms; 1-automorphisms
/// fix every leading coefficient.
pub fn suite_internal_laws(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("internal-laws", seed);
    let group = z1();
    let field = qsqrt2();
    let cutoff = e1(8);

    for _ in 0..100 {
        let nf = g.normal_form(&group, &field, &cutoff, true);
        let a = g.series(&group, &field, &cutoff, 3, 0, 6);
        rec.case(
            "internal key property",
            (|| {
                let img = apply_aut(&nf, &a)?;
                Ok(img.valuation() == a.valuation() && img.constant_term() == a.constant_term())
            })(),
        );
    }
    for _ in 0..100 {
        let u = g.one_unit_hom(&group, &field, &cutoff);
        let nf = AutNormalForm::from_u(u, cutoff.clone());
        let a = g.series_nonzero(&group, &field, &cutoff, 3, -2, 6);
        rec.case(
            "1-automorphisms fix leading coefficients",
            (|| {
                let img = apply_aut(&nf, &a)?;
                Ok(img.valuation() == a.valuation() && img.leading()? == a.leading()?)
            })(),
        );
    }
    rec.finish()
}

/// Composition: the residue/value projection is a homomorphism, round trips
/// decompose exactly, the group laws hold operationally, and the internal
/// subgroups are normal where they should be.
pub fn suite_compose_laws(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("compose-laws", seed);
    let group = z2();
    let field = qsqrt2();
    let cutoff = e2(8, 0);

    for _ in 0..100 {
        let a = g.normal_form(&group, &field, &cutoff, false);
        let b = g.normal_form(&group, &field, &cutoff, false);
        rec.case(
            "residue/value projection is a homomorphism",
            (|| {
                let bb = BlackBoxAut::new(group.clone(), field, |s| {
                    apply_aut(&a, &apply_aut(&b, s)?)
                });
                let (rho, tau) = extract_phi(&bb, &cutoff)?;
                Ok(rho == a.rho().compose(&b.rho()) && tau == a.tau().compose(b.tau())?)
            })(),
        );
    }
    for _ in 0..100 {
        let nf = g.normal_form(&group, &field, &cutoff, false);
        rec.case(
            "decompose inverts rebuild",
            (|| {
                let bb = BlackBoxAut::from_normal_form(&nf);
                let recovered = decompose(&bb, &cutoff)?;
                recovered.equal_at_cutoff(&nf)
            })(),
        );
    }
    // Group laws and normality, over Z where composition towers stay cheap.
    let line = z1();
    let lcut = e1(8);
    for _ in 0..50 {
        let a = g.normal_form(&line, &field, &lcut, false);
        let b = g.normal_form(&line, &field, &lcut, false);
        let c = g.normal_form(&line, &field, &lcut, false);
        rec.case(
            "associativity",
            (|| {
                compose_nf(&compose_nf(&a, &b)?, &c)?
                    .equal_at_cutoff(&compose_nf(&a, &compose_nf(&b, &c)?)?)
            })(),
        );
    }
    for _ in 0..10 {
        let a = g.normal_form(&line, &field, &lcut, false);
        rec.case(
            "inverse composes to the identity on probes",
            (|| {
                let inv = invert_nf(&a)?;
                let product = compose_nf(&a, &inv)?;
                let probe = Series::monomial(
                    line.clone(),
                    field,
                    field.one(),
                    Some(e1(1)),
                    lcut.clone(),
                );
                Ok(product.is_internal()
                    && product.x().is_trivial()
                    && apply_aut(&product, &probe)?.equal_to_cutoff(&probe)?)
            })(),
        );
    }
    for _ in 0..10 {
        let sigma = g.normal_form(&line, &field, &lcut, true);
        let gamma = g.normal_form(&line, &field, &lcut, false);
        rec.case(
            "internal automorphisms form a normal subgroup",
            (|| {
                let gamma_inv = invert_nf(&gamma)?;
                let bb = BlackBoxAut::new(line.clone(), field, |s| {
                    apply_aut(&gamma, &apply_aut(&sigma, &apply_aut(&gamma_inv, s)?)?)
                });
                let conj = decompose(&bb, &lcut)?;
                Ok(conj.is_internal())
            })(),
        );
    }
    for _ in 0..10 {
        let u = g.one_unit_hom(&line, &field, &lcut);
        let sigma = AutNormalForm::from_u(u, lcut.clone());
        let gamma = g.normal_form(&line, &field, &lcut, true);
        rec.case(
            "1-automorphisms are normal among internals",
            (|| {
                let gamma_inv = invert_nf(&gamma)?;
                let bb = BlackBoxAut::new(line.clone(), field, |s| {
                    apply_aut(&gamma, &apply_aut(&sigma, &apply_aut(&gamma_inv, s)?)?)
                });
                let conj = decompose(&bb, &lcut)?;
                Ok(conj.is_one_aut())
            })(),
        );
    }
    rec.finish()
}

/// The twisted product computes the unit hom of a composite of internal
/// automorphisms, over both `Z` and `Z²`.
pub fn suite_twisted_product(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("twisted-product", seed);
    for (group, cutoff) in [(z1(), e1(8)), (z2(), e2(8, 0))] {
        let field = qsqrt2();
        for _ in 0..50 {
            let a = g.normal_form(&group, &field, &cutoff, true);
            let b = g.normal_form(&group, &field, &cutoff, true);
            rec.case(
                "composite unit hom equals the twisted product",
                (|| {
                    let composite = compose_nf(&a, &b)?;
                    let twisted = twisted_product(&a, b.u())?;
                    Ok(composite.u().equal_at_cutoff(&twisted)?
                        && composite.x() == &a.x().pointwise_mul(b.x())?)
                })(),
            );
        }
    }
    rec.finish()
}

/// The crossed product on Laurent units: group laws, the substitution
/// oracle, and the constant-part projection.
pub fn suite_schilling(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("schilling", seed);
    let field = qq();
    let cutoff = e1(8);
    let gen_unit = |g: &mut Gen| {
        let one_unit = g.one_unit(&z1(), &field, &cutoff);
        LaurentUnit::new(one_unit.scaled(&g.field_nonzero(&field))).unwrap()
    };

    let one = LaurentUnit::one(field, 8);
    for _ in 0..50 {
        let a = gen_unit(&mut g);
        let b = gen_unit(&mut g);
        let c = gen_unit(&mut g);
        rec.case(
            "associativity and identity",
            (|| {
                let ab_c = schilling_xs(&schilling_xs(&a, &b)?, &c)?;
                let a_bc = schilling_xs(&a, &schilling_xs(&b, &c)?)?;
                let id_ok = schilling_xs(&one, &a)?.equal_to_cutoff(&a)?
                    && schilling_xs(&a, &one)?.equal_to_cutoff(&a)?;
                Ok(ab_c.equal_to_cutoff(&a_bc)? && id_ok)
            })(),
        );
        rec.case(
            "two-sided inverse",
            (|| {
                let w = schilling_inverse(&a)?;
                Ok(schilling_xs(&a, &w)?.series().is_one()
                    && schilling_xs(&w, &a)?.series().is_one())
            })(),
        );
        rec.case(
            "constants multiply",
            (|| {
                let prod = schilling_xs(&a, &b)?;
                Ok(prod.constant_term() == field.mul(&a.constant_term(), &b.constant_term()))
            })(),
        );
    }
    for _ in 0..50 {
        let u = gen_unit(&mut g);
        let a = g.series(&z1(), &field, &cutoff, 3, -2, 6);
        rec.case(
            "substitution agrees with the normal-form action",
            (|| {
                let direct = sigma_u_apply(&u, FieldAut::Identity, &a)?;
                let via_nf = apply_aut(&u.to_normal_form()?, &a)?;
                direct.equal_to_cutoff(&via_nf)
            })(),
        );
    }
    rec.finish()
}

/// Sign of the leading coefficient under a substitution: positive constants
/// preserve the order, negative ones flip odd-valuation leads.
pub fn suite_order_criterion(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("order-criterion", seed);
    let field = qq();
    let cutoff = e1(8);

    for _ in 0..100 {
        let one_unit = g.one_unit(&z1(), &field, &cutoff);
        let u = LaurentUnit::new(one_unit.scaled(&g.field_nonzero(&field))).unwrap();
        let a = g.series_nonzero(&z1(), &field, &cutoff, 3, -3, 6);
        rec.case(
            "leading coefficient sign rule",
            (|| {
                let image = sigma_u_apply(&u, FieldAut::Identity, &a)?;
                let m: i64 = a.valuation().unwrap().coords()[0]
                    .numer()
                    .try_into()
                    .map_err(|_| Error::InvalidInput("exponent too large".into()))?;
                let expected = field.mul(&field.pow(&u.constant_term(), m)?, a.leading()?);
                if image.leading()? != &expected {
                    return Ok(false);
                }
                // For positive arguments the image is positive exactly when
                // the unit is order preserving or the valuation is even.
                if field.is_positive(a.leading()?)? {
                    let img_positive = field.is_positive(image.leading()?)?;
                    let rule = is_order_preserving(&u)? || m % 2 == 0;
                    return Ok(img_positive == rule);
                }
                Ok(true)
            })(),
        );
    }
    rec.finish()
}

/// Moebius maps: classification matches decomposability, and matrix
/// composition matches substitution of expansions.
pub fn suite_moebius(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("moebius", seed);
    let field = qq();
    let cutoff = e1(8);
    let mut random_map = |g: &mut Gen, val_preserving: bool| loop {
        let b = if val_preserving {
            field.zero()
        } else {
            g.field_elem(&field)
        };
        let m = MoebiusMap::new(
            field,
            g.field_elem(&field),
            b,
            g.field_elem(&field),
            g.field_nonzero(&field),
        );
        if let Ok(m) = m {
            return m;
        }
    };

    for i in 0..50 {
        let m = random_map(&mut g, i % 2 == 0);
        rec.case(
            "classification agrees with decomposability",
            (|| {
                let class = m.classify();
                let bb = BlackBoxAut::new(z1(), field, |s: &Series| {
                    let depth: i64 = s.cutoff().coords()[0]
                        .numer()
                        .try_into()
                        .map_err(|_| Error::InvalidInput("cutoff too large".into()))?;
                    m.substitute(s, depth)
                });
                match decompose(&bb, &cutoff) {
                    Ok(nf) => {
                        let (a, _, _, d) = m.entries();
                        let expected_x = field.div(a, d)?;
                        let x_ok = nf.x().values()[0] == expected_x;
                        match class {
                            MoebiusClass::OneAut => Ok(x_ok && nf.is_one_aut()),
                            MoebiusClass::ValuationPreservingKAut => Ok(x_ok && nf.is_internal()),
                            MoebiusClass::Other => Ok(false),
                        }
                    }
                    Err(Error::NotValuationPreserving(_)) => Ok(class == MoebiusClass::Other),
                    Err(e) => Err(e),
                }
            })(),
        );
    }
    for _ in 0..50 {
        let m1 = random_map(&mut g, true);
        let m2 = random_map(&mut g, true);
        rec.case(
            "matrix composition matches substitution",
            (|| {
                let composed = m1.compose(&m2)?.expand(8)?;
                let substituted = m2.substitute(&m1.expand(10)?, 8)?;
                composed.equal_to_cutoff(&substituted)
            })(),
        );
    }
    rec.finish()
}

/// Puiseux: lattice round trips, the rational power law on 1-units,
/// scaling laws, and agreement with the generic lattice action.
pub fn suite_puiseux(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("puiseux", seed);
    let field = qq();

    for _ in 0..100 {
        let ram = g.i64_in(1, 4) as u64;
        let body = g.series(&z1(), &field, &e1(8), 3, -3, 7);
        rec.case(
            "lattice round trip",
            (|| {
                let p = PuiseuxSeries::new(ram, body.clone())?;
                let back = lattice_to_puiseux(&puiseux_to_lattice(&p)?)?;
                Ok(back == p)
            })(),
        );
    }
    for _ in 0..50 {
        let u = g.one_unit(&z1(), &field, &e1(8));
        let q1 = rat(g.i64_in(-3, 3), g.i64_in(1, 3));
        let q2 = rat(g.i64_in(-3, 3), g.i64_in(1, 3));
        rec.case(
            "rational power law on 1-units",
            (|| {
                let lhs = puiseux_unit_pow_q(&u, &(&q1 + &q2))?;
                let rhs = puiseux_unit_pow_q(&u, &q1)?.mul(&puiseux_unit_pow_q(&u, &q2)?)?;
                lhs.equal_to_cutoff(&rhs)
            })(),
        );
    }
    for _ in 0..50 {
        let ram = g.i64_in(1, 3) as u64;
        let body = g.series(&z1(), &field, &e1(8), 3, 0, 7);
        let s1 = g.rat_positive();
        let s2 = g.rat_positive();
        rec.case(
            "scaling respects multiplication and positivity",
            (|| {
                let p = PuiseuxSeries::new(ram, body.clone())?;
                let two_step = puiseux_oaut_apply(&s1, &puiseux_oaut_apply(&s2, &p)?)?;
                let direct = puiseux_oaut_apply(&(&s1 * &s2), &p)?;
                let pos_ok = p
                    .valuation()
                    .map(|v| {
                        !num::Signed::is_positive(&v)
                            || num::Signed::is_positive(&direct.valuation().unwrap())
                    })
                    .unwrap_or(true);
                Ok(two_step == direct && pos_ok)
            })(),
        );
    }
    let lattice_group = GroupDescriptor::rational_lattice(1, 2).unwrap();
    for _ in 0..50 {
        let nf = {
            let x = g.unit_hom(&lattice_group, &field);
            let u = g.one_unit_hom(&lattice_group, &field, &e1(8));
            AutNormalForm::new(
                lattice_group.clone(),
                field,
                FieldAut::Identity,
                crate::exponents::OrderAutMatrix::identity(GroupKind::RationalLattice, 1),
                x,
                u,
                e1(8),
            )
            .unwrap()
        };
        let a = g.series(&lattice_group, &field, &e1(8), 3, 0, 15);
        rec.case(
            "ramified action agrees with the lattice action",
            (|| {
                let p = lattice_to_puiseux(&a)?;
                let via_puiseux = puiseux_apply_aut(&nf, &p)?;
                let via_lattice = lattice_to_puiseux(&apply_aut(&nf, &a)?)?;
                via_puiseux.equal_to_cutoff(&via_lattice)
            })(),
        );
    }
    rec.finish()
}

/// The Puiseux support family: sampled axioms and scaling stability.
pub fn suite_rayner_puiseux(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("rayner-puiseux", seed);
    let policy = FamilyPolicy::PuiseuxCommonDenominator;

    let mut descriptor = |g: &mut Gen| {
        let level = g.i64_in(1, 4) as u64;
        let points: Vec<Rat> = (0..g.i64_in(1, 4))
            .map(|_| Rat::new(g.i64_in(0, 8).into(), level.into()))
            .collect();
        let tail = (g.i64_in(0, 1) == 1).then(|| Rat::new(g.i64_in(8, 12).into(), level.into()));
        SupportDescriptor::new(level, points, tail).unwrap()
    };

    for _ in 0..20 {
        let samples: Vec<SupportDescriptor> = (0..3).map(|_| descriptor(&mut g)).collect();
        rec.case(
            "sampled closure axioms pass",
            family_check_axioms(&policy, &samples, &rint(6)).map(|r| r.sampled_pass()),
        );
    }
    let samples: Vec<SupportDescriptor> = (0..5).map(|_| descriptor(&mut g)).collect();
    for _ in 0..50 {
        let scale = g.rat_positive();
        rec.case(
            &format!("stable under scaling by {scale}"),
            family_check_oaut_stability(&policy, std::slice::from_ref(&scale), &samples)
                .map(|r| r.all_pass()),
        );
    }
    rec.finish()
}

/// Negative fixture: a finite cardinality bound is not a field family; the
/// checker must produce a union-axiom counterexample.
pub fn suite_rayner_kappa_finite(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("rayner-kappa-finite", seed);
    let policy = FamilyPolicy::CardinalityBounded(CardinalityBound::Finite(3));

    for _ in 0..20 {
        let a = g.i64_in(0, 4);
        let b = g.i64_in(5, 9);
        let samples = vec![
            SupportDescriptor::finite(1, vec![rint(a), rint(a + 1)]).unwrap(),
            SupportDescriptor::finite(1, vec![rint(b), rint(b + 1)]).unwrap(),
        ];
        rec.case(
            "union axiom fails with a witness",
            family_check_axioms(&policy, &samples, &rint(6)).map(|report| {
                report
                    .checks
                    .iter()
                    .any(|c| c.axiom == "R3-union" && c.status.is_fail())
            }),
        );
    }
    rec.finish()
}

/// Canonical printing followed by parsing is the identity.
pub fn suite_parse_roundtrip(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("parse-roundtrip", seed);
    let configs: Vec<(GroupDescriptor, FieldDescriptor, Exponent)> = vec![
        (z1(), qq(), e1(8)),
        (z1(), qsqrt2(), e1(8)),
        (z2(), qsqrt2(), e2(8, 0)),
        (GroupDescriptor::rational_lattice(1, 4).unwrap(), qq(), e1(4)),
    ];
    for i in 0..200 {
        let (group, field, cutoff) = &configs[i % configs.len()];
        let s = g.series(group, field, cutoff, 4, -4, 7);
        rec.case(
            "print then parse is the identity",
            (|| {
                let printed = s.to_string();
                let reparsed = parse_series(&printed, group, field, cutoff)?;
                Ok(reparsed == s)
            })(),
        );
    }
    rec.finish()
}

/// Strong additivity surrogate: applying a normal form to a series equals
/// summing its action on the individual terms.
pub fn suite_strong_additivity(seed: u64) -> SuiteReport {
    let mut g = Gen::new(seed);
    let mut rec = Recorder::new("strong-additivity", seed);
    let group = z1();
    let field = qsqrt2();
    let cutoff = e1(8);

    for _ in 0..100 {
        let nf = g.normal_form(&group, &field, &cutoff, false);
        let a = g.series(&group, &field, &cutoff, 4, 0, 6);
        rec.case(
            "termwise images sum to the image",
            (|| {
                let whole = apply_aut(&nf, &a)?;
                let mut parts = Vec::new();
                for (e, c) in a.terms() {
                    let term = Series::monomial(
                        group.clone(),
                        field,
                        c.clone(),
                        Some(e.clone()),
                        a.cutoff().clone(),
                    );
                    parts.push(apply_aut(&nf, &term)?);
                }
                if parts.is_empty() {
                    return Ok(whole.is_zero());
                }
                sum_family(parts)?.equal_to_cutoff(&whole)
            })(),
        );
    }
    // The coefficient twist leaves supports untouched.
    for _ in 0..50 {
        let x = g.unit_hom(&group, &field);
        let a = g.series(&group, &field, &cutoff, 4, -4, 6);
        rec.case(
            "coefficient twists preserve supports",
            (|| {
                let img = g_exponentiation(&x, &a)?;
                Ok(img.support().eq(a.support()))
            })(),
        );
    }
    rec.finish()
}

type SuiteFn = fn(u64) -> SuiteReport;

/// Registry of named suites, in the order `verify all` runs them.
pub const SUITES: &[(&str, SuiteFn)] = &[
    ("exponents", suite_exponents),
    ("coeffs", suite_coeffs),
    ("series", suite_series),
    ("roots", suite_roots),
    ("section-laws", suite_section_laws),
    ("internal-laws", suite_internal_laws),
    ("compose-laws", suite_compose_laws),
    ("twisted-product", suite_twisted_product),
    ("strong-additivity", suite_strong_additivity),
    ("schilling", suite_schilling),
    ("order-criterion", suite_order_criterion),
    ("moebius", suite_moebius),
    ("puiseux", suite_puiseux),
    ("rayner-puiseux", suite_rayner_puiseux),
    ("rayner-kappa-finite", suite_rayner_kappa_finite),
    ("parse-roundtrip", suite_parse_roundtrip),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| f(seed))
        .ok_or_else(|| Error::UnknownSuite(name.to_string()))
}

pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    SUITES.iter().map(|(_, f)| f(seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_on_reference_seed() {
        for (name, f) in SUITES {
            let report = f(7);
            assert!(
                report.passed(),
                "suite {name} failed:\n{}",
                report.render_text()
            );
        }
    }

    #[test]
    fn reports_are_deterministic() {
        for (name, f) in SUITES {
            assert_eq!(
                f(31).render_kv(),
                f(31).render_kv(),
                "suite {name} is not deterministic"
            );
        }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(
            run_suite("no-such-suite", 1),
            Err(Error::UnknownSuite(_))
        ));
    }
}

#[cfg(test)]
mod timing {
    use super::*;

    #[test]
    #[ignore]
    fn time_each_suite() {
        for (name, f) in SUITES {
            let start = std::time::Instant::now();
            let report = f(7);
            println!(
                "{name}: {:?} ({} cases, passed={})",
                start.elapsed(),
                report.cases,
                report.passed()
            );
        }
    }
}



#[cfg(test)]
mod timing4 {
    use super::*;

    #[test]
    #[ignore]
    fn single_compose_phases() {
        let mut g = Gen::new(11);
        let group = z2();
        let field = qsqrt2();
        let cutoff = e2(8, 0);
        let a = g.normal_form(&group, &field, &cutoff, false);
        let b = g.normal_form(&group, &field, &cutoff, false);

        let probe = Series::monomial(group.clone(), field, field.one(), Some(e2(0, 1)), e2(8, 1));
        let t0 = std::time::Instant::now();
        let inner = apply_aut(&b, &probe).unwrap();
        eprintln!("inner apply: {:?} ({} terms)", t0.elapsed(), inner.term_count());
        let t1 = std::time::Instant::now();
        let outer = apply_aut(&a, &inner).unwrap();
        eprintln!("outer apply: {:?} ({} terms)", t1.elapsed(), outer.term_count());

        let neg = Series::monomial(group.clone(), field, field.one(), Some(e2(0, -1)), e2(8, -1));
        let t2 = std::time::Instant::now();
        let inner2 = apply_aut(&b, &neg).unwrap();
        eprintln!("inner apply neg: {:?} ({} terms)", t2.elapsed(), inner2.term_count());
        let t3 = std::time::Instant::now();
        let outer2 = apply_aut(&a, &inner2).unwrap();
        eprintln!("outer apply neg: {:?} ({} terms)", t3.elapsed(), outer2.term_count());

        let t4 = std::time::Instant::now();
        let _ = compose_nf(&a, &b).unwrap();
        eprintln!("full compose: {:?}", t4.elapsed());
    }
}

#[cfg(test)]
mod timing5 {
    use super::*;

    #[test]
    #[ignore]
    fn puiseux_failure_detail() {
        let report = suite_puiseux(7);
        for f in &report.failures {
            eprintln!("{f}");
        }
    }
}
