//! Sheafification through singletons: `S_A`, the unit `η_A`, tabulation of
//! functional relations, extension along internally bijective morphisms and
//! the reflector onto `P`-sheaves.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::doctrine::{equality_predicate, fiber_within, Doctrine, DoctrineError};
use crate::fincat::{homs_within, morphisms_within, Category, CategoryExt, FincatError};
use crate::maps::{
    bijective_morphisms, check_functional, compose_relations, graph, internal_bijectivity, is_complete,
    is_relation_iso, is_sheaf_against, opposite, MapError,
};
use crate::powerobj::{
    check_singletons, factor_through, lambda, pull_membership, Singletons, SingletonsOf, SingletonsReport,
    SingletonsReportOf,
};
use crate::report::{Budget, Coverage, Law, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SheafError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("sheafification unsupported for {0}: singletons fail")]
    Unsupported(String),
    #[error("tabulation of {relation} failed: {reason}")]
    Tabulation { relation: String, reason: String },
    #[error("extension of {q} along {d} failed: {reason}")]
    Extension { d: String, q: String, reason: String },
}

impl From<FincatError> for SheafError {
    fn from(e: FincatError) -> Self {
        SheafError::Map(e.into())
    }
}

impl From<DoctrineError> for SheafError {
    fn from(e: DoctrineError) -> Self {
        SheafError::Map(e.into())
    }
}

/// `S_A` with its unit, and the verdicts for bijectivity of `η_A` and the
/// membership identity.
#[derive(Debug, Clone)]
pub struct SheafificationResult<O, M, E> {
    pub singletons: SingletonsReport<O, M, E>,
    pub eta_bijective: bool,
    pub membership_identity: bool,
    pub report: ValidationReport,
}

pub type SheafificationOf<D> = SheafificationResult<<D as Category>::Obj, <D as Category>::Mor, <D as Doctrine>::Elem>;

impl<O, M, E> SheafificationResult<O, M, E> {
    pub fn data(&self) -> Option<&Singletons<O, M, E>> {
        self.singletons.data.as_ref()
    }

    pub fn passed(&self) -> bool {
        self.report.is_ok()
    }
}

/// Runs the singleton checks on `A`, then checks that `η_A` is internally
/// bijective and that `δ_{S_A}(η_A(a), s) = a ∈_A ⌊σ_A⌋(s)` exactly.
pub fn sheafify_object<D: Doctrine>(d: &D, a: &D::Obj, probes: &[D::Obj], budget: &Budget) -> SheafificationOf<D> {
    let singletons = check_singletons(d, a, probes, budget);
    sheafify_with(d, singletons)
}

/// [`sheafify_object`] from an existing singletons report.
pub fn sheafify_with<D: Doctrine>(d: &D, singletons: SingletonsReportOf<D>) -> SheafificationOf<D> {
    let mut r = ValidationReport::new("sheafification");
    r.absorb(singletons.report.clone());
    let mut out = SheafificationResult {
        singletons,
        eta_bijective: false,
        membership_identity: false,
        report: ValidationReport::default(),
    };
    let Some(s) = out.singletons.data.clone() else {
        r.subject = "sheafification unsupported".into();
        out.report = r.finish();
        return out;
    };
    r.subject = format!("sheafification of {}", d.render_obj(&s.a));
    let mut lemmas = ValidationReport::default();
    match internal_bijectivity(d, &s.eta) {
        Ok(v) => {
            out.eta_bijective = v.bijective();
            lemmas.check(v.bijective(), Law::EtaNotBijective, || {
                vec![
                    d.render_mor(&s.eta),
                    format!("injective: {}", v.injective),
                    format!("surjective: {}", v.surjective),
                ]
            });
        }
        Err(e) => lemmas.fail(Law::EtaNotBijective, vec![d.render_mor(&s.eta), e.to_string()]),
    }
    match membership_identity(d, &s) {
        Ok((lhs, rhs)) => {
            out.membership_identity = lhs == rhs;
            lemmas.check(lhs == rhs, Law::MembershipIdentity, || {
                let at = d.product(&s.a, &s.s).expect("computed").object;
                vec![d.render_obj(&s.a), d.render_elem(&at, &lhs), d.render_elem(&at, &rhs)]
            });
        }
        Err(e) => lemmas.fail(Law::MembershipIdentity, vec![d.render_obj(&s.a), e.to_string()]),
    }
    r.absorb(lemmas.as_incidents());
    out.report = r.finish();
    out
}

/// Both sides of `δ_{S_A}(η_A(a), s) = a ∈_A ⌊σ_A⌋(s)` over `A x S_A`.
pub fn membership_identity<D: Doctrine>(d: &D, s: &SingletonsOf<D>) -> Result<(D::Elem, D::Elem), FincatError> {
    let lhs = d.reindex(&d.product_map(&s.eta, &d.identity(&s.s))?, &equality_predicate(d, &s.s)?);
    let rhs = pull_membership(d, &s.power(), &s.incl)?;
    Ok((lhs, rhs))
}

/// `(h x η_A)*δ_{S_A}` over `Y x A`.
pub fn tabulated_relation<D: Doctrine>(d: &D, s: &SingletonsOf<D>, h: &D::Mor) -> Result<D::Elem, FincatError> {
    let m = d.product_map(h, &s.eta)?;
    Ok(d.reindex(&m, &equality_predicate(d, &s.s)?))
}

/// The unique `h: Y -> S_A` with `F(y,a) = δ_{S_A}(h(y), η_A(a))`, obtained by
/// factoring `{F^op}` through `⌊σ_A⌋`. Uniqueness is checked by scanning
/// `hom(Y, S_A)`.
pub fn tabulate_functional<D: Doctrine>(
    d: &D,
    s: &SingletonsOf<D>,
    y: &D::Obj,
    f: &D::Elem,
) -> Result<D::Mor, SheafError> {
    let ya = d.product_or_err(y, &s.a)?.object;
    let fail = |reason: String| SheafError::Tabulation { relation: d.render_elem(&ya, f), reason };
    if !check_functional(d, y, &s.a, f)?.holds() {
        return Err(fail("not functional".into()));
    }
    let f_op = opposite(d, y, &s.a, f)?;
    let point = lambda(d, &s.power(), y, &f_op).map_err(|e| fail(e.to_string()))?;
    let lifts = factor_through(d, &s.incl, &point);
    let [h] = lifts.as_slice() else {
        return Err(fail(format!("{} factorizations through the image", lifts.len())));
    };
    if tabulated_relation(d, s, h)? != *f {
        return Err(fail(format!("{} does not tabulate the relation", d.render_mor(h))));
    }
    let others =
        d.hom(y, &s.s).into_iter().filter(|k| k != h && tabulated_relation(d, s, k).is_ok_and(|t| t == *f)).count();
    if others > 0 {
        return Err(fail(format!("{} further tabulations", others)));
    }
    Ok(h.clone())
}

/// The unique `h: Y -> S_A` with `h . dm = q`, for `dm` internally bijective,
/// through the functional relation `ξ(y,a) = ∃x. δ_Y(y,d(x)) ∧ δ_{S_A}(q(x),η_A(a))`.
pub fn extend_along_bijective<D: Doctrine>(
    d: &D,
    s: &SingletonsOf<D>,
    dm: &D::Mor,
    q: &D::Mor,
) -> Result<D::Mor, SheafError> {
    let (x, y) = (d.dom(dm), d.cod(dm));
    let fail = |reason: String| SheafError::Extension { d: d.render_mor(dm), q: d.render_mor(q), reason };
    if !internal_bijectivity(d, dm)?.bijective() {
        return Err(MapError::NotBijective(d.render_mor(dm)).into());
    }
    let d_op = opposite(d, &x, &y, &graph(d, dm)?)?;
    let xi = compose_relations(d, &y, &x, &s.a, &d_op, &tabulated_relation(d, s, q)?)?;
    let v = check_functional(d, &y, &s.a, &xi)?;
    if !v.holds() {
        let failed: Vec<&str> = v.failed().into_iter().map(Law::as_str).collect();
        return Err(fail(format!("ξ fails {}", failed.join(", "))));
    }
    let h = tabulate_functional(d, s, &y, &xi)?;
    if d.compose(&h, dm) != *q {
        return Err(fail(format!("{} does not restrict to q", d.render_mor(&h))));
    }
    let n = count_extensions(d, dm, q, &s.s);
    if n != 1 {
        return Err(fail(format!("{n} extensions")));
    }
    Ok(h)
}

/// The number of `h: cod(dm) -> target` with `h . dm = q`, capped at 2.
fn count_extensions<C: Category + ?Sized>(c: &C, dm: &C::Mor, q: &C::Mor, target: &C::Obj) -> usize {
    c.hom(&c.cod(dm), target).iter().filter(|h| c.compose(h, dm) == *q).take(2).count()
}

/// The reflector on a list of objects: units, reflected morphisms `S_f`, and
/// the report for naturality, the universal property, the triangle law and
/// idempotence.
#[derive(Debug, Clone)]
pub struct ReflectionData<O: Ord, M: Ord, E> {
    pub units: BTreeMap<O, SheafificationResult<O, M, E>>,
    /// `S_f: S_A -> S_B` for every `f: A -> B` between the objects.
    pub morphisms: BTreeMap<M, M>,
    /// Probe objects that passed the sheaf condition.
    pub sheaves: Vec<O>,
    pub report: ValidationReport,
}

pub type ReflectionOf<D> = ReflectionData<<D as Category>::Obj, <D as Category>::Mor, <D as Doctrine>::Elem>;

impl<O: Ord, M: Ord, E> ReflectionData<O, M, E> {
    pub fn singletons(&self, a: &O) -> Option<&Singletons<O, M, E>> {
        self.units.get(a).and_then(|u| u.data())
    }
}

/// Builds units for `objects` and checks the reflection against `probes`:
/// sheaves among the probes (and the `S_A`) are found by orthogonality
/// against the internally bijective morphisms between probes.
pub fn reflector<D: Doctrine>(d: &D, objects: &[D::Obj], probes: &[D::Obj], budget: &Budget) -> ReflectionOf<D> {
    let mut r = ValidationReport::new("reflector");
    let mut units = BTreeMap::new();
    for a in objects {
        let u = sheafify_object(d, a, probes, budget);
        r.absorb(u.report.clone());
        units.insert(a.clone(), u);
    }
    let mut cov = Coverage::Exhaustive;
    let mut morphisms = BTreeMap::new();
    let data: BTreeMap<&D::Obj, &SingletonsOf<D>> =
        units.iter().filter_map(|(a, u)| u.data().map(|s| (a, s))).collect();
    let mut th = ValidationReport::default();

    for f in morphisms_within(d, objects, budget, &mut cov) {
        let (Some(sa), Some(sb)) = (data.get(&d.dom(&f)), data.get(&d.cod(&f))) else { continue };
        let q = d.compose(&sb.eta, &f);
        match extend_along_bijective(d, sb, &sa.eta, &q) {
            Ok(sf) => {
                th.check(d.compose(&sf, &sa.eta) == q, Law::UnitNaturality, || vec![d.render_mor(&f)]);
                morphisms.insert(f, sf);
            }
            Err(e) => th.fail(Law::ExtensionFailure, vec![d.render_mor(&f), e.to_string()]),
        }
    }
    for (f, sf) in &morphisms {
        if d.is_identity(f) {
            th.check(d.is_identity(sf), Law::UnitNaturality, || vec!["S(id)".into(), d.render_mor(sf)]);
        }
    }

    let bijective = bijective_morphisms(d, probes, budget, &mut cov);
    let sheaves: Vec<D::Obj> =
        probes.iter().filter(|z| is_sheaf_against(d, z, &bijective, budget).is_sheaf()).cloned().collect();
    for (a, s) in &data {
        let v = is_sheaf_against(d, &s.s, &bijective, budget);
        th.check(v.is_sheaf(), Law::SheafNoExtension, || {
            vec![format!("S of {}", d.render_obj(a)), format!("{} failing spans", v.report.violations.len())]
        });
        for z in &sheaves {
            let through = homs_within(d, &s.s, z, budget, &mut cov);
            for q in homs_within(d, a, z, budget, &mut cov) {
                let n = through.iter().filter(|h| d.compose(h, &s.eta) == q).take(2).count();
                th.check(n == 1, Law::ReflectionUniversal, || {
                    vec![d.render_obj(a), d.render_obj(z), d.render_mor(&q), format!("{n} factorizations")]
                });
            }
        }
        let again;
        let st = match data.get(&s.s) {
            Some(st) => *st,
            None => {
                let local: Vec<D::Obj> = d.terminal().into_iter().collect();
                again = sheafify_object(d, &s.s, &local, budget);
                match again.data() {
                    Some(st) => st,
                    None => {
                        match extend_along_bijective(d, s, &s.eta, &s.eta) {
                            Ok(se) => th.check(d.is_identity(&se), Law::TriangleLaw, || {
                                vec![format!("S(η) for {}", d.render_obj(a)), d.render_mor(&se)]
                            }),
                            Err(e) => th.fail(Law::TriangleLaw, vec![d.render_obj(a), e.to_string()]),
                        }
                        r.note(format!(
                            "no singletons for S of {}; triangle law checked with the identity reflection",
                            d.render_obj(a)
                        ));
                        continue;
                    }
                }
            }
        };
        th.check(crate::fincat::inverse(d, &st.eta).is_some(), Law::TriangleLaw, || {
            vec![format!("η of S of {}", d.render_obj(a))]
        });
        let target = d.compose(&st.eta, &s.eta);
        match extend_along_bijective(d, st, &s.eta, &target) {
            Ok(se) => th.check(se == st.eta, Law::TriangleLaw, || vec![format!("S(η) vs η_S for {}", d.render_obj(a))]),
            Err(e) => th.fail(Law::TriangleLaw, vec![d.render_obj(a), e.to_string()]),
        }
    }
    r.absorb(th.as_incidents());
    r.coverage.merge(cov);
    ReflectionData { units, morphisms, sheaves, report: r.finish() }
}

/// Checks that every sheaf among `probes` is complete, that completeness and
/// the sheaf condition agree, and that `Γη_A` is an isomorphism of `Map` for
/// every probe `A` with sheafification data in `refl`.
pub fn check_equivalences<D: Doctrine>(
    d: &D,
    refl: &ReflectionOf<D>,
    probes: &[D::Obj],
    budget: &Budget,
) -> ValidationReport {
    let mut r = ValidationReport::new("sheaves, complete objects and maps");
    let mut th = ValidationReport::default();
    for a in probes {
        let complete = is_complete(d, a, probes, budget);
        let sheaf = refl.sheaves.contains(a);
        th.check(!sheaf || complete.is_complete(), Law::SheafNotComplete, || vec![d.render_obj(a)]);
        th.check(sheaf || !complete.is_complete(), Law::CompleteNotSheaf, || vec![d.render_obj(a)]);
        r.coverage.merge(complete.report.coverage.clone());
        let Some(s) = refl.singletons(a) else { continue };
        if sheaf {
            if let Some(inv) = crate::fincat::inverse(d, &s.eta) {
                for y in probes {
                    let Some(ya) = d.product(y, a) else { continue };
                    for f in fiber_within(d, &ya.object, budget, &mut r.coverage) {
                        if !check_functional(d, y, a, &f).is_ok_and(|v| v.holds()) {
                            continue;
                        }
                        let ok = tabulate_functional(d, s, y, &f)
                            .is_ok_and(|h| graph(d, &d.compose(&inv, &h)).is_ok_and(|g| g == f));
                        th.check(ok, Law::SheafNotComplete, || vec![d.render_obj(a), d.render_obj(y)]);
                    }
                }
            } else {
                th.fail(Law::SheafNotComplete, vec![d.render_obj(a), "η not invertible".into()]);
            }
        }
        let iso = graph(d, &s.eta).and_then(|g| is_relation_iso(d, a, &s.s, &g));
        th.check(iso.is_ok_and(|b| b), Law::GraphOfUnitNotIso, || vec![d.render_obj(a)]);
    }
    r.absorb(th.as_incidents());
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::Func;
    use crate::fixtures::LocalicDoctrine;

    fn sets() -> LocalicDoctrine {
        LocalicDoctrine::finset_sub(vec![0, 1, 2, 3])
    }

    #[test]
    fn sets_sheafify_to_themselves() {
        let d = sets();
        let u = sheafify_object(&d, &2, &[1, 2], &Budget::default());
        assert!(u.passed(), "{}", u.report);
        let s = u.data().unwrap();
        assert_eq!(s.s, 2);
        assert!(crate::fincat::inverse(&d, &s.eta).is_some());
    }

    #[test]
    fn graphs_tabulate_through_the_unit() {
        let d = sets();
        let u = sheafify_object(&d, &2, &[1, 2], &Budget::default());
        let s = u.data().unwrap();
        for f in d.hom(&3, &2) {
            let h = tabulate_functional(&d, s, &3, &graph(&d, &f).unwrap()).unwrap();
            assert_eq!(h, d.compose(&s.eta, &f));
        }
        let delta = equality_predicate(&d, &2).unwrap();
        assert_eq!(tabulate_functional(&d, s, &2, &delta).unwrap(), s.eta);
    }

    #[test]
    fn extension_along_identity_is_the_map() {
        let d = sets();
        let u = sheafify_object(&d, &2, &[1, 2], &Budget::default());
        let s = u.data().unwrap();
        let q = Func::new(3, 2, vec![1, 1, 0]);
        let id = d.identity(&3);
        assert_eq!(extend_along_bijective(&d, s, &id, &q).unwrap(), q);
    }

    #[test]
    fn reflector_on_sets() {
        let d = sets();
        let refl = reflector(&d, &[1, 2], &[0, 1, 2], &Budget::default());
        assert!(refl.report.is_ok(), "{}", refl.report);
        assert_eq!(refl.sheaves, vec![0, 1, 2]);
        let eq = check_equivalences(&d, &refl, &[1, 2], &Budget::default());
        assert!(eq.is_ok(), "{eq}");
        let empty = check_equivalences(&d, &refl, &[], &Budget::default());
        assert!(empty.is_ok());
    }
}
