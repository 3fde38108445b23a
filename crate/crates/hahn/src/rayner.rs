//! Support-set policies for Hahn subfields: membership in a family of
//! admissible supports, sampled checking of the closure axioms a field
//! family must satisfy, and stability of a family under order
//! automorphisms of the exponent group.
//!
//! A support descriptor models a well-ordered subset of the dimension-1
//! lattice `(1/d)Z`: finitely many points plus an optional cofinite lattice
//! tail. Scaling and unions can strictly shrink a tail's lattice; the
//! descriptor then encloses the true image in the full tail, which leaves
//! every implemented membership verdict unchanged because all implemented
//! policies are subset-closed in the relevant direction.

use std::collections::BTreeSet;
use std::fmt;

use num::Signed;

use crate::error::{Error, Result};
use crate::rational::{on_level, rint, Rat};

/// A well-ordered support inside `(1/level)Z`: sorted points, plus an
/// optional tail start `m` meaning "every lattice point `>= m`".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportDescriptor {
    level: u64,
    points: Vec<Rat>,
    tail: Option<Rat>,
}

impl SupportDescriptor {
    pub fn new(level: u64, mut points: Vec<Rat>, tail: Option<Rat>) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidInput("level must be positive".into()));
        }
        for p in &points {
            if !on_level(p, level) {
                return Err(Error::LevelExceeded {
                    what: p.to_string(),
                    level,
                });
            }
        }
        if let Some(m) = &tail {
            if !on_level(m, level) {
                return Err(Error::LevelExceeded {
                    what: m.to_string(),
                    level,
                });
            }
        }
        points.sort();
        points.dedup();
        // Canonical form: points at or past the tail start are absorbed.
        if let Some(m) = &tail {
            points.retain(|p| p < m);
        }
        Ok(SupportDescriptor {
            level,
            points,
            tail,
        })
    }

    pub fn finite(level: u64, points: Vec<Rat>) -> Result<Self> {
        SupportDescriptor::new(level, points, None)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn points(&self) -> &[Rat] {
        &self.points
    }

    pub fn tail(&self) -> Option<&Rat> {
        self.tail.as_ref()
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    pub fn cardinality_if_finite(&self) -> Option<usize> {
        self.is_finite().then_some(self.points.len())
    }

    /// Whether every element is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.points.iter().all(|p| !p.is_negative())
            && self.tail.as_ref().map(|m| !m.is_negative()).unwrap_or(true)
    }

    /// Union at the common refinement level.
    pub fn union(&self, other: &SupportDescriptor) -> Result<SupportDescriptor> {
        let level = num::integer::lcm(self.level, other.level);
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        let tail = match (&self.tail, &other.tail) {
            (Some(a), Some(b)) => Some(a.clone().min(b.clone())),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        };
        SupportDescriptor::new(level, points, tail)
    }

    /// Translate every element by a lattice-compatible shift.
    pub fn translate(&self, g: &Rat) -> Result<SupportDescriptor> {
        let level = num::integer::lcm(self.level, crate::rational::least_level(g));
        SupportDescriptor::new(
            level,
            self.points.iter().map(|p| p + g).collect(),
            self.tail.as_ref().map(|m| m + g),
        )
    }

    /// Scale every element by a positive rational.
    pub fn scale(&self, q: &Rat) -> Result<SupportDescriptor> {
        if !q.is_positive() {
            return Err(Error::NonPositiveScale(q.to_string()));
        }
        let den: u64 = q
            .denom()
            .try_into()
            .map_err(|_| Error::InvalidInput("scale denominator exceeds u64".into()))?;
        let level = self
            .level
            .checked_mul(den)
            .ok_or_else(|| Error::InvalidInput("level overflow".into()))?;
        SupportDescriptor::new(
            level,
            self.points.iter().map(|p| p * q).collect(),
            self.tail.as_ref().map(|m| m * q),
        )
    }

    /// A few canonical proper subsets, used to sample the subset axiom.
    pub fn sample_subsets(&self) -> Vec<SupportDescriptor> {
        let mut subs = Vec::new();
        if !self.points.is_empty() {
            subs.push(SupportDescriptor {
                level: self.level,
                points: self.points[1..].to_vec(),
                tail: self.tail.clone(),
            });
        }
        if self.tail.is_some() {
            subs.push(SupportDescriptor {
                level: self.level,
                points: self.points.clone(),
                tail: None,
            });
            let step = Rat::new(1.into(), self.level.into());
            subs.push(SupportDescriptor {
                level: self.level,
                points: self.points.clone(),
                tail: self.tail.as_ref().map(|m| m + step),
            });
        }
        subs
    }

    /// All finite sums of one or more elements, truncated below a ceiling.
    /// Defined for nonnegative descriptors.
    pub fn sums_below(&self, ceiling: &Rat) -> Result<SupportDescriptor> {
        if !self.is_nonnegative() {
            return Err(Error::InvalidInput(
                "finite-sum closure needs a nonnegative support".into(),
            ));
        }
        let mut generators: Vec<Rat> = self.points.iter().filter(|p| *p < ceiling).cloned().collect();
        if let Some(m) = &self.tail {
            let step = Rat::new(1.into(), self.level.into());
            let mut x = m.clone();
            while &x < ceiling {
                generators.push(x.clone());
                x += &step;
            }
        }
        let mut sums: BTreeSet<Rat> = generators.iter().cloned().collect();
        loop {
            let mut fresh: Vec<Rat> = Vec::new();
            for s in &sums {
                for g in &generators {
                    let t = s + g;
                    if &t < ceiling && !sums.contains(&t) {
                        fresh.push(t);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            sums.extend(fresh);
        }
        SupportDescriptor::new(self.level, sums.into_iter().collect(), None)
    }
}

impl fmt::Display for SupportDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        if let Some(m) = &self.tail {
            if !self.points.is_empty() {
                write!(f, ", ")?;
            }
            write!(f, "tail>={m}")?;
        }
        write!(f, "}}@1/{}", self.level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CardinalityBound {
    Finite(usize),
    Countable,
}

/// Which supports a Hahn subfield admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyPolicy {
    /// Supports of the form `(1/d)A` for a well-ordered `A ⊆ Z`.
    PuiseuxCommonDenominator,
    /// Supports of cardinality below a bound. Finite bounds are a negative
    /// fixture: they fail the union axiom and do not cut out a field.
    CardinalityBounded(CardinalityBound),
    /// Supports contained in a finitely generated subgroup.
    LatticeContained,
}

impl fmt::Display for FamilyPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyPolicy::PuiseuxCommonDenominator => write!(f, "puiseux"),
            FamilyPolicy::CardinalityBounded(CardinalityBound::Finite(n)) => {
                write!(f, "kappa-finite:{n}")
            }
            FamilyPolicy::CardinalityBounded(CardinalityBound::Countable) => {
                write!(f, "kappa-countable")
            }
            FamilyPolicy::LatticeContained => write!(f, "lattice-contained"),
        }
    }
}

/// Membership of a descriptor in the family cut out by a policy.
pub fn family_member(policy: &FamilyPolicy, descriptor: &SupportDescriptor) -> bool {
    match policy {
        // Every descriptor is (1/d) times a well-ordered subset of Z.
        FamilyPolicy::PuiseuxCommonDenominator => true,
        FamilyPolicy::CardinalityBounded(CardinalityBound::Finite(n)) => descriptor
            .cardinality_if_finite()
            .map(|c| c < *n)
            .unwrap_or(false),
        FamilyPolicy::CardinalityBounded(CardinalityBound::Countable) => true,
        FamilyPolicy::LatticeContained => true,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail { witness: String },
    NotSampled { note: String },
}

impl CheckStatus {
    pub fn is_fail(&self) -> bool {
        matches!(self, CheckStatus::Fail { .. })
    }
}

#[derive(Debug, Clone)]
pub struct AxiomCheck {
    pub axiom: String,
    pub status: CheckStatus,
}

#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub policy: String,
    pub checks: Vec<AxiomCheck>,
}

impl FamilyReport {
    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| c.status.is_fail())
    }

    pub fn sampled_pass(&self) -> bool {
        self.failures().next().is_none()
    }
}

/// Sampled verification of the closure axioms of a field family.
///
/// The well-ordering axiom holds structurally for descriptors; the
/// generation axiom quantifies over the entire family and is recorded as
/// analytic rather than sampled. Unions, subsets and translates are checked
/// on the given samples, finite-sum closure below the given ceiling.
pub fn family_check_axioms(
    policy: &FamilyPolicy,
    samples: &[SupportDescriptor],
    ceiling: &Rat,
) -> Result<FamilyReport> {
    let mut checks = Vec::new();
    checks.push(AxiomCheck {
        axiom: "R1-well-ordered".into(),
        status: CheckStatus::Pass,
    });
    checks.push(AxiomCheck {
        axiom: "R2-generates".into(),
        status: CheckStatus::NotSampled {
            note: "quantifies over the whole family; analytic".into(),
        },
    });

    let mut r3 = CheckStatus::Pass;
    'r3: for a in samples {
        for b in samples {
            let u = a.union(b)?;
            if !family_member(policy, &u) {
                r3 = CheckStatus::Fail {
                    witness: format!("{a} ∪ {b} = {u}"),
                };
                break 'r3;
            }
        }
    }
    checks.push(AxiomCheck {
        axiom: "R3-union".into(),
        status: r3,
    });

    let mut r4 = CheckStatus::Pass;
    'r4: for a in samples {
        for sub in a.sample_subsets() {
            if !family_member(policy, &sub) {
                r4 = CheckStatus::Fail {
                    witness: format!("{sub} ⊂ {a}"),
                };
                break 'r4;
            }
        }
    }
    checks.push(AxiomCheck {
        axiom: "R4-subset".into(),
        status: r4,
    });

    let mut r5 = CheckStatus::Pass;
    'r5: for a in samples {
        for shift in [rint(1), rint(-2), Rat::new(1.into(), a.level().into())] {
            let translated = a.translate(&shift)?;
            if !family_member(policy, &translated) {
                r5 = CheckStatus::Fail {
                    witness: format!("{a} + {shift} = {translated}"),
                };
                break 'r5;
            }
        }
    }
    checks.push(AxiomCheck {
        axiom: "R5-translate".into(),
        status: r5,
    });

    let mut r6 = CheckStatus::NotSampled {
        note: "no nonnegative sample".into(),
    };
    for a in samples.iter().filter(|a| a.is_nonnegative()) {
        let sums = a.sums_below(ceiling)?;
        if !family_member(policy, &sums) {
            r6 = CheckStatus::Fail {
                witness: format!("sums({a}) below {ceiling} = {sums}"),
            };
            break;
        }
        r6 = CheckStatus::Pass;
    }
    checks.push(AxiomCheck {
        axiom: "R6-finite-sums".into(),
        status: r6,
    });

    Ok(FamilyReport {
        policy: policy.to_string(),
        checks,
    })
}

#[derive(Debug, Clone)]
pub struct StabilityCheck {
    pub scale: Rat,
    pub descriptor: SupportDescriptor,
    pub image: SupportDescriptor,
    pub member: bool,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub policy: String,
    pub checks: Vec<StabilityCheck>,
}

impl StabilityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.member)
    }
}

/// Stability of the family under the order automorphisms of `Q`: each
/// positive scale must map members to members. This is the criterion for a
/// Rayner field to admit every canonical lift.
pub fn family_check_oaut_stability(
    policy: &FamilyPolicy,
    scales: &[Rat],
    samples: &[SupportDescriptor],
) -> Result<StabilityReport> {
    let mut checks = Vec::new();
    for q in scales {
        for a in samples {
            let image = a.scale(q)?;
            let member = family_member(policy, &image);
            checks.push(StabilityCheck {
                scale: q.clone(),
                descriptor: a.clone(),
                image,
                member,
            });
        }
    }
    Ok(StabilityReport {
        policy: policy.to_string(),
        checks,
    })
}
