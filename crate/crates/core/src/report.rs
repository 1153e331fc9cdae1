//! Validation reports shared by every law checker.
//!
//! Checkers never stop at the first failure. They push every violation they
//! find, and [`ValidationReport::finish`] sorts the entries so that the output
//! does not depend on the order in which a (possibly parallel) sweep visited
//! the witnesses.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Names of the laws and theorems the workbench checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(into = "&'static str")]
pub enum Law {
    // lattices
    LeqNotReflexive,
    LeqNotAntisymmetric,
    LeqNotTransitive,
    MeetNotGlb,
    TopNotMaximum,
    JoinNotLub,
    BottomNotMinimum,
    ImplNotResiduation,
    NotDistributive,
    TableDisagreement,
    NotInflationary,
    NotIdempotent,
    NotMeetPreserving,
    // categories
    LeftUnit,
    RightUnit,
    Associativity,
    CompositionNotTotal,
    TerminalNotUniversal,
    ProductNotUniversal,
    PullbackNotUniversal,
    // doctrines
    ReindexIdentity,
    ReindexComposition,
    ReindexTop,
    ReindexMeet,
    ExistsNotAdjoint,
    ExistsTableDisagreement,
    BeckChevalley,
    Frobenius,
    EqualityNotReflexive,
    Substitutivity,
    ExistsDecomposition,
    ImplicationResiduation,
    ForallAdjunction,
    ComprehensionNotUniversal,
    // power objects and singletons
    PowerNoSolution,
    PowerMultipleSolutions,
    PowerRoundTrip,
    ProbeTooLarge,
    MissingPowerObject,
    MissingImage,
    SingletonNotInjective,
    SingletonsFunctionality,
    EtaFactorization,
    // functional relations, completeness, sheaves
    NotSingleValued,
    NotTotal,
    NotLeftAdjoint,
    NotComplete,
    GraphNotUnique,
    SheafNoExtension,
    SheafNonUniqueExtension,
    GraphNotFunctorial,
    MapIdentity,
    MapAssociativity,
    // sheafification
    EtaNotBijective,
    MembershipIdentity,
    TabulationFailure,
    TabulationNotUnique,
    ExtensionFailure,
    ExtensionNotUnique,
    UnitNaturality,
    ReflectionUniversal,
    TriangleLaw,
    SheafNotComplete,
    CompleteNotSheaf,
    GraphOfUnitNotIso,
    // closure operators and PER completion
    ClosureNotNatural,
    FiberNotClosed,
    RepresentativeDependence,
    NotPer,
}

impl Law {
    pub fn as_str(self) -> &'static str {
        use Law::*;
        match self {
            LeqNotReflexive => "leq not reflexive",
            LeqNotAntisymmetric => "leq not antisymmetric",
            LeqNotTransitive => "leq not transitive",
            MeetNotGlb => "meet not greatest lower bound",
            TopNotMaximum => "top not maximum",
            JoinNotLub => "join not least upper bound",
            BottomNotMinimum => "bottom not minimum",
            ImplNotResiduation => "impl not residuation",
            NotDistributive => "not distributive",
            TableDisagreement => "declared table disagrees with derived table",
            NotInflationary => "not inflationary",
            NotIdempotent => "not idempotent",
            NotMeetPreserving => "not meet-preserving",
            LeftUnit => "left unit law",
            RightUnit => "right unit law",
            Associativity => "associativity",
            CompositionNotTotal => "composition not total",
            TerminalNotUniversal => "terminal not universal",
            ProductNotUniversal => "product not universal",
            PullbackNotUniversal => "pullback not universal",
            ReindexIdentity => "reindexing along identity is not identity",
            ReindexComposition => "reindexing not functorial",
            ReindexTop => "reindexing does not preserve top",
            ReindexMeet => "reindexing does not preserve meet",
            ExistsNotAdjoint => "exists not left adjoint to reindexing",
            ExistsTableDisagreement => "declared exists table disagrees with adjoint",
            BeckChevalley => "Beck-Chevalley",
            Frobenius => "Frobenius reciprocity",
            EqualityNotReflexive => "equality predicate not reflexive",
            Substitutivity => "equality not substitutive",
            ExistsDecomposition => "exists not decomposed by equality",
            ImplicationResiduation => "implication not residuation",
            ForallAdjunction => "forall not right adjoint to reindexing",
            ComprehensionNotUniversal => "comprehension not universal",
            PowerNoSolution => "power object: no transpose",
            PowerMultipleSolutions => "power object: multiple transposes",
            PowerRoundTrip => "power object: transpose of membership pullback is not the morphism",
            ProbeTooLarge => "probe too large",
            MissingPowerObject => "missing power object",
            MissingImage => "missing image",
            SingletonNotInjective => "singleton map not internally injective",
            SingletonsFunctionality => "functional iff in sigma fails",
            EtaFactorization => "singleton map does not factor through image",
            NotSingleValued => "single-valuedness",
            NotTotal => "totality",
            NotLeftAdjoint => "not a left adjoint",
            NotComplete => "functional relation is not a graph",
            GraphNotUnique => "functional relation is the graph of several morphisms",
            SheafNoExtension => "span has no extension",
            SheafNonUniqueExtension => "span has several extensions",
            GraphNotFunctorial => "graph not functorial",
            MapIdentity => "map category identity law",
            MapAssociativity => "map category associativity",
            EtaNotBijective => "unit not internally bijective",
            MembershipIdentity => "membership identity for the unit",
            TabulationFailure => "tabulation failed",
            TabulationNotUnique => "tabulation not unique",
            ExtensionFailure => "extension along bijective morphism failed",
            ExtensionNotUnique => "extension not unique",
            UnitNaturality => "unit naturality",
            ReflectionUniversal => "reflection universal property",
            TriangleLaw => "triangle law",
            SheafNotComplete => "sheaf not complete",
            CompleteNotSheaf => "complete object not a sheaf",
            GraphOfUnitNotIso => "graph of unit not an isomorphism of relations",
            ClosureNotNatural => "closure not natural",
            FiberNotClosed => "fiber not closed",
            RepresentativeDependence => "reindexing depends on class representative",
            NotPer => "not a partial equivalence relation",
        }
    }
}

impl From<Law> for &'static str {
    fn from(law: Law) -> Self {
        law.as_str()
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a failure breaks a fixture law or a property the construction
/// guarantees for every validated input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    LawFailure,
    TheoremViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Violation {
    pub law: Law,
    pub severity: Severity,
    /// Rendered witnesses, in the order the law names them.
    pub at: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.severity == Severity::TheoremViolation {
            f.write_str("THEOREM VIOLATION: ")?;
        }
        write!(f, "{} at ({})", self.law, self.at.join(", "))
    }
}

/// How much of the quantified domain a check covered.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Coverage {
    #[default]
    Exhaustive,
    /// Some quantifier ranges exceeded the budget and were skipped.
    UpToScope { skipped: Vec<String> },
    /// Some ranges were sampled with a seeded generator.
    Sampled { seed: u64, samples: usize },
}

impl Coverage {
    pub fn merge(&mut self, other: Coverage) {
        *self = match (std::mem::take(self), other) {
            (Coverage::Exhaustive, o) | (o, Coverage::Exhaustive) => o,
            (Coverage::UpToScope { mut skipped }, Coverage::UpToScope { skipped: s2 }) => {
                skipped.extend(s2);
                Coverage::UpToScope { skipped }
            }
            (Coverage::UpToScope { skipped }, Coverage::Sampled { .. })
            | (Coverage::Sampled { .. }, Coverage::UpToScope { skipped }) => Coverage::UpToScope { skipped },
            (Coverage::Sampled { seed, samples }, Coverage::Sampled { samples: s2, .. }) => {
                Coverage::Sampled { seed, samples: samples + s2 }
            }
        };
    }

    pub fn skip(&mut self, what: impl Into<String>) {
        self.merge(Coverage::UpToScope { skipped: vec![what.into()] });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub subject: String,
    pub violations: Vec<Violation>,
    /// Number of individual instances checked.
    pub checked: u64,
    pub coverage: Coverage,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self { subject: subject.into(), ..Self::default() }
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_theorem_violation(&self) -> bool {
        self.violations.iter().any(|v| v.severity == Severity::TheoremViolation)
    }

    pub fn fail(&mut self, law: Law, at: Vec<String>) {
        self.violations.push(Violation { law, severity: Severity::LawFailure, at });
    }

    pub fn incident(&mut self, law: Law, at: Vec<String>) {
        self.violations.push(Violation { law, severity: Severity::TheoremViolation, at });
    }

    /// Records the outcome of one instance.
    pub fn check(&mut self, ok: bool, law: Law, at: impl FnOnce() -> Vec<String>) {
        self.checked += 1;
        if !ok {
            self.fail(law, at());
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn absorb(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.checked += other.checked;
        self.coverage.merge(other.coverage);
        self.notes.extend(other.notes);
    }

    /// Upgrades every failure to a theorem violation.
    pub fn as_incidents(mut self) -> Self {
        for v in &mut self.violations {
            v.severity = Severity::TheoremViolation;
        }
        self
    }

    /// Runs `f` on every item in parallel and merges the partial reports.
    pub fn sweep<T: Sync>(&mut self, items: &[T], f: impl Fn(&T, &mut ValidationReport) + Sync) {
        let part = items
            .par_iter()
            .fold(ValidationReport::default, |mut r, t| {
                f(t, &mut r);
                r
            })
            .reduce(ValidationReport::default, |mut a, b| {
                a.absorb(b);
                a
            });
        self.absorb(part);
    }

    pub fn violations_of(&self, law: Law) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.law == law)
    }

    pub fn finish(mut self) -> Self {
        self.violations.sort();
        self.violations.dedup();
        if let Coverage::UpToScope { skipped } = &mut self.coverage {
            skipped.sort();
            skipped.dedup();
        }
        self
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.is_ok() { "pass" } else { "FAIL" };
        writeln!(f, "{}: {} ({} instances)", self.subject, verdict, self.checked)?;
        match &self.coverage {
            Coverage::Exhaustive => {}
            Coverage::UpToScope { skipped } => writeln!(f, "  verified up to scope; skipped: {}", skipped.join("; "))?,
            Coverage::Sampled { seed, samples } => writeln!(f, "  sampled: {samples} samples, seed {seed}")?,
        }
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Enumeration limits and the seed for sampled checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Largest hom-set or fiber that is enumerated exhaustively.
    pub max_enum: u128,
    pub seed: u64,
    pub samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_enum: 1 << 20, seed: 0, samples: 256 }
    }
}

impl Budget {
    pub fn with_max(max_enum: u128) -> Self {
        Self { max_enum, ..Self::default() }
    }

    pub fn allows(&self, size: u128) -> bool {
        size <= self.max_enum
    }

    /// A generator for the sampling stream named `label`, independent of the
    /// order in which streams are requested.
    pub fn rng(&self, label: &str) -> ChaCha8Rng {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }
}
