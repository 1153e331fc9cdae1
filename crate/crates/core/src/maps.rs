//! Functional relations, internal graphs, complete objects and `P`-sheaves.
//!
//! A relation from `Y` to `A` is an element of `P(Y x A)`. Relational
//! composition, opposites and graphs are computed by reindexing, meets and
//! `∃` along the projections of chosen products, so everything here works for
//! any [`Doctrine`] with enough products.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

use crate::doctrine::{equality_predicate, fiber_within, Doctrine, DoctrineError};
use crate::fincat::{homs_within, morphisms_within, CategoryExt, Context, FincatError};
use crate::report::{Budget, Coverage, Law, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error(transparent)]
    Doctrine(#[from] DoctrineError),
    #[error("not a functional relation ({failed}): {relation}")]
    NotFunctional { relation: String, failed: String },
    #[error("{0} is not a graph of a unique morphism")]
    NotComplete(String),
    #[error("{0} is not internally bijective")]
    NotBijective(String),
    #[error("{0}")]
    Postcondition(String),
}

impl From<FincatError> for MapError {
    fn from(e: FincatError) -> Self {
        MapError::Doctrine(e.into())
    }
}

/// A relation from `source` to `target` certified single-valued and total.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionalRelation<O, E> {
    pub source: O,
    pub target: O,
    pub formula: E,
}

pub type FunctionalOf<D> = FunctionalRelation<<D as crate::fincat::Category>::Obj, <D as Doctrine>::Elem>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Functionality {
    pub single_valued: bool,
    pub total: bool,
}

impl Functionality {
    pub fn holds(&self) -> bool {
        self.single_valued && self.total
    }

    pub fn failed(&self) -> Vec<Law> {
        let mut out = Vec::new();
        if !self.single_valued {
            out.push(Law::NotSingleValued);
        }
        if !self.total {
            out.push(Law::NotTotal);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BijectivityVerdict {
    pub injective: bool,
    pub surjective: bool,
}

impl BijectivityVerdict {
    pub fn bijective(&self) -> bool {
        self.injective && self.surjective
    }
}

/// The chosen contexts `Y x A` and `(Y x A) x A` with their projections and
/// `δ_A`, for repeated functionality tests between the same objects.
pub struct Relations<D: Doctrine> {
    pub source: D::Obj,
    pub target: D::Obj,
    pub ya: Context<D::Obj, D::Mor>,
    yaa: D::Obj,
    p12: D::Mor,
    p13: D::Mor,
    p23: D::Mor,
    to_source: D::Mor,
    delta: D::Elem,
}

impl<D: Doctrine> Relations<D> {
    pub fn new(d: &D, y: &D::Obj, a: &D::Obj) -> Result<Self, FincatError> {
        let ya = Context::new(d, &[y.clone(), a.clone()])?;
        let aa = Context::new(d, &[a.clone(), a.clone()])?;
        let yaa = Context::new(d, &[y.clone(), a.clone(), a.clone()])?;
        Ok(Self {
            source: y.clone(),
            target: a.clone(),
            p12: yaa.select(d, &ya, &[0, 1])?,
            p13: yaa.select(d, &ya, &[0, 2])?,
            p23: yaa.select(d, &aa, &[1, 2])?,
            to_source: ya.projections[0].clone(),
            delta: equality_predicate(d, a)?,
            yaa: yaa.object,
            ya,
        })
    }

    pub fn object(&self) -> &D::Obj {
        &self.ya.object
    }

    /// `F(y,a) ∧ F(y,a') ≤ δ_A(a,a')` and `⊤_Y = ∃a. F(y,a)`.
    pub fn functionality(&self, d: &D, f: &D::Elem) -> Functionality {
        let both = d.meet(&self.yaa, &d.reindex(&self.p12, f), &d.reindex(&self.p13, f));
        let single_valued = d.leq(&self.yaa, &both, &d.reindex(&self.p23, &self.delta));
        let total = d.leq(&self.source, &d.top(&self.source), &d.exists(&self.to_source, f));
        Functionality { single_valued, total }
    }
}

pub fn check_functional<D: Doctrine>(d: &D, y: &D::Obj, a: &D::Obj, f: &D::Elem) -> Result<Functionality, FincatError> {
    Ok(Relations::new(d, y, a)?.functionality(d, f))
}

/// Certifies `f` over `Y x A` as a functional relation from `Y` to `A`.
pub fn is_functional<D: Doctrine>(d: &D, y: &D::Obj, a: &D::Obj, f: &D::Elem) -> Result<FunctionalOf<D>, MapError> {
    let rel = Relations::new(d, y, a)?;
    let v = rel.functionality(d, f);
    if !v.holds() {
        let failed: Vec<&str> = v.failed().into_iter().map(Law::as_str).collect();
        return Err(MapError::NotFunctional { relation: d.render_elem(rel.object(), f), failed: failed.join(", ") });
    }
    Ok(FunctionalRelation { source: y.clone(), target: a.clone(), formula: f.clone() })
}

/// `∃b. F(y,b) ∧ G(b,c)` for `F` over `Y x B` and `G` over `B x C`.
pub fn compose_relations<D: Doctrine>(
    d: &D,
    y: &D::Obj,
    b: &D::Obj,
    c: &D::Obj,
    f: &D::Elem,
    g: &D::Elem,
) -> Result<D::Elem, FincatError> {
    let ybc = Context::new(d, &[y.clone(), b.clone(), c.clone()])?;
    let yb = Context::new(d, &[y.clone(), b.clone()])?;
    let bc = Context::new(d, &[b.clone(), c.clone()])?;
    let yc = Context::new(d, &[y.clone(), c.clone()])?;
    let p12 = ybc.select(d, &yb, &[0, 1])?;
    let p23 = ybc.select(d, &bc, &[1, 2])?;
    let p13 = ybc.select(d, &yc, &[0, 2])?;
    let body = d.meet(&ybc.object, &d.reindex(&p12, f), &d.reindex(&p23, g));
    Ok(d.exists(&p13, &body))
}

/// `F^op = <π2, π1>*F` over `A x Y`, for `F` over `Y x A`.
pub fn opposite<D: Doctrine>(d: &D, y: &D::Obj, a: &D::Obj, f: &D::Elem) -> Result<D::Elem, FincatError> {
    Ok(d.reindex(&d.swap(a, y)?, f))
}

/// The internal graph `Γf = (f x id_B)*δ_B` over `A x B`.
pub fn graph<D: Doctrine>(d: &D, f: &D::Mor) -> Result<D::Elem, FincatError> {
    let b = d.cod(f);
    let m = d.product_map(f, &d.identity(&b))?;
    Ok(d.reindex(&m, &equality_predicate(d, &b)?))
}

/// `Γf`, with its functionality recomputed.
pub fn graph_of<D: Doctrine>(d: &D, f: &D::Mor) -> Result<FunctionalOf<D>, MapError> {
    is_functional(d, &d.dom(f), &d.cod(f), &graph(d, f)?)
}

/// Whether `L` over `Y x A` is left adjoint to `R` over `A x Y` as relations:
/// `δ_Y ≤ R . L` and `L . R ≤ δ_A`.
pub fn left_adjoint_check<D: Doctrine>(
    d: &D,
    y: &D::Obj,
    a: &D::Obj,
    l: &D::Elem,
    r: &D::Elem,
) -> Result<bool, FincatError> {
    let yy = d.product_or_err(y, y)?.object;
    let aa = d.product_or_err(a, a)?.object;
    let unit = compose_relations(d, y, a, y, l, r)?;
    let counit = compose_relations(d, a, y, a, r, l)?;
    Ok(d.leq(&yy, &equality_predicate(d, y)?, &unit) && d.leq(&aa, &counit, &equality_predicate(d, a)?))
}

/// `δ_A = (f x f)*δ_B` and `⊤_B = ∃_f ⊤_A`, decided exactly.
pub fn internal_bijectivity<D: Doctrine>(d: &D, f: &D::Mor) -> Result<BijectivityVerdict, FincatError> {
    let a = d.dom(f);
    let b = d.cod(f);
    let ff = d.product_map(f, f)?;
    let injective = equality_predicate(d, &a)? == d.reindex(&ff, &equality_predicate(d, &b)?);
    let surjective = d.exists(f, &d.top(&a)) == d.top(&b);
    Ok(BijectivityVerdict { injective, surjective })
}

/// The internally bijective morphisms between `objects`.
pub fn bijective_morphisms<D: Doctrine>(d: &D, objects: &[D::Obj], budget: &Budget, cov: &mut Coverage) -> Vec<D::Mor> {
    morphisms_within(d, objects, budget, cov)
        .into_iter()
        .filter(|f| internal_bijectivity(d, f).is_ok_and(|v| v.bijective()))
        .collect()
}

/// Whether the relation `f` from `Y` to `A` is an isomorphism of `Map`. The
/// only candidate inverse is `F^op`.
pub fn is_relation_iso<D: Doctrine>(d: &D, y: &D::Obj, a: &D::Obj, f: &D::Elem) -> Result<bool, FincatError> {
    let op = opposite(d, y, a, f)?;
    if !check_functional(d, a, y, &op)?.holds() || !check_functional(d, y, a, f)?.holds() {
        return Ok(false);
    }
    let there = compose_relations(d, y, a, y, f, &op)?;
    let back = compose_relations(d, a, y, a, &op, f)?;
    Ok(there == equality_predicate(d, y)? && back == equality_predicate(d, a)?)
}

/// Outcome of a completeness scan: the report and the functional relations
/// that are not the graph of exactly one morphism.
#[derive(Debug, Clone)]
pub struct CompletenessVerdict<O, E> {
    pub report: ValidationReport,
    pub counterexamples: Vec<(O, E)>,
}

impl<O, E> CompletenessVerdict<O, E> {
    pub fn is_complete(&self) -> bool {
        self.report.is_ok()
    }
}

/// Every functional relation from an object of `scope` into `a` must be the
/// graph of exactly one morphism.
pub fn is_complete<D: Doctrine>(
    d: &D,
    a: &D::Obj,
    scope: &[D::Obj],
    budget: &Budget,
) -> CompletenessVerdict<D::Obj, D::Elem> {
    let mut r = ValidationReport::new(format!("completeness of {}", d.render_obj(a)));
    let mut cov = Coverage::Exhaustive;
    let mut counterexamples = Vec::new();
    for y in scope {
        let Ok(rel) = Relations::new(d, y, a) else {
            r.note(format!("no product {} x {}", d.render_obj(y), d.render_obj(a)));
            continue;
        };
        let ya = rel.object().clone();
        let mut graphs: HashMap<D::Elem, usize> = HashMap::new();
        for f in homs_within(d, y, a, budget, &mut cov) {
            let g = graph(d, &f).expect("products exist");
            *graphs.entry(g).or_default() += 1;
        }
        let fiber = fiber_within(d, &ya, budget, &mut cov);
        let verdicts: Vec<(&D::Elem, usize)> = fiber
            .par_iter()
            .filter(|f| rel.functionality(d, f).holds())
            .map(|f| (f, graphs.get(f).copied().unwrap_or(0)))
            .collect();
        for (f, n) in verdicts {
            let law = if n == 0 { Law::NotComplete } else { Law::GraphNotUnique };
            r.check(n == 1, law, || vec![d.render_obj(y), d.render_elem(&ya, f)]);
            if n != 1 {
                counterexamples.push((y.clone(), f.clone()));
            }
        }
    }
    r.coverage.merge(cov);
    CompletenessVerdict { report: r.finish(), counterexamples }
}

/// Outcome of an orthogonality scan: spans `(d, q)` without a unique
/// extension, split by kind.
#[derive(Debug, Clone)]
pub struct SheafVerdict<M> {
    pub report: ValidationReport,
    pub no_extension: Vec<(M, M)>,
    pub several_extensions: Vec<(M, M)>,
}

impl<M> SheafVerdict<M> {
    pub fn is_sheaf(&self) -> bool {
        self.report.is_ok()
    }

    pub fn has_extensions(&self) -> bool {
        self.no_extension.is_empty()
    }
}

/// For every internally bijective `d: X -> Y` between objects of `scope` and
/// every `q: X -> A`, exactly one `h: Y -> A` with `h . d = q`.
pub fn is_sheaf<D: Doctrine>(d: &D, a: &D::Obj, scope: &[D::Obj], budget: &Budget) -> SheafVerdict<D::Mor> {
    let mut cov = Coverage::Exhaustive;
    let spans = bijective_morphisms(d, scope, budget, &mut cov);
    let mut v = is_sheaf_against(d, a, &spans, budget);
    v.report.coverage.merge(cov);
    v
}

/// [`is_sheaf`] against an explicit list of internally bijective morphisms.
pub fn is_sheaf_against<D: Doctrine>(d: &D, a: &D::Obj, bijective: &[D::Mor], budget: &Budget) -> SheafVerdict<D::Mor> {
    let mut r = ValidationReport::new(format!("sheaf condition for {}", d.render_obj(a)));
    let mut cov = Coverage::Exhaustive;
    let mut spans = Vec::new();
    for dm in bijective {
        for q in homs_within(d, &d.dom(dm), a, budget, &mut cov) {
            spans.push((dm.clone(), q));
        }
    }
    let mut homs: BTreeMap<D::Obj, Vec<D::Mor>> = BTreeMap::new();
    for dm in bijective {
        let y = d.cod(dm);
        if let std::collections::btree_map::Entry::Vacant(e) = homs.entry(y.clone()) {
            e.insert(homs_within(d, &y, a, budget, &mut cov));
        }
    }
    let counts: Vec<usize> = spans
        .par_iter()
        .map(|(dm, q)| homs[&d.cod(dm)].iter().filter(|h| d.compose(h, dm) == *q).take(2).count())
        .collect();
    let mut no_extension = Vec::new();
    let mut several_extensions = Vec::new();
    for ((dm, q), n) in spans.into_iter().zip(counts) {
        let at = || vec![d.render_mor(&dm), d.render_mor(&q)];
        match n {
            0 => {
                r.check(false, Law::SheafNoExtension, at);
                no_extension.push((dm, q));
            }
            1 => r.check(true, Law::SheafNoExtension, at),
            _ => {
                r.check(false, Law::SheafNonUniqueExtension, at);
                several_extensions.push((dm, q));
            }
        }
    }
    r.coverage = cov;
    SheafVerdict { report: r.finish(), no_extension, several_extensions }
}

/// The extension of `q` along an internally bijective `dm` into a complete
/// `a`, through the functional relation `∃x. δ_A(q(x),a) ∧ δ_Y(d(x),y)`.
pub fn complete_extension<D: Doctrine>(d: &D, a: &D::Obj, dm: &D::Mor, q: &D::Mor) -> Result<D::Mor, MapError> {
    let (x, y) = (d.dom(dm), d.cod(dm));
    if !internal_bijectivity(d, dm)?.bijective() {
        return Err(MapError::NotBijective(d.render_mor(dm)));
    }
    let gd = opposite(d, &x, &y, &graph(d, dm)?)?;
    let f = compose_relations(d, &y, &x, a, &gd, &graph(d, q)?)?;
    is_functional(d, &y, a, &f)?;
    let hs: Vec<D::Mor> = d.hom(&y, a).into_iter().filter(|h| graph(d, h).is_ok_and(|g| g == f)).take(2).collect();
    let [h] = hs.as_slice() else {
        let ya = d.product_or_err(&y, a)?.object;
        return Err(MapError::NotComplete(d.render_elem(&ya, &f)));
    };
    if d.compose(h, dm) != *q {
        return Err(MapError::Postcondition(format!(
            "extension {} does not restrict to {}",
            d.render_mor(h),
            d.render_mor(q)
        )));
    }
    Ok(h.clone())
}

/// The category of functional relations between a chosen set of objects,
/// with the graph functor recorded on the base morphisms between them.
#[derive(Debug, Clone)]
pub struct MapCategory<O: Ord, M: Ord, E> {
    pub objects: Vec<O>,
    /// Functional relations from `.0` to `.1`, in fiber order.
    pub homs: BTreeMap<(O, O), Vec<E>>,
    /// `Γf` for every base morphism between the objects.
    pub graphs: BTreeMap<M, E>,
    pub report: ValidationReport,
}

pub type MapCategoryOf<D> =
    MapCategory<<D as crate::fincat::Category>::Obj, <D as crate::fincat::Category>::Mor, <D as Doctrine>::Elem>;

impl<O: Ord + Clone, M: Ord, E: PartialEq> MapCategory<O, M, E> {
    pub fn contains(&self, y: &O, a: &O, f: &E) -> bool {
        self.homs.get(&(y.clone(), a.clone())).is_some_and(|fs| fs.contains(f))
    }

    pub fn morphism_count(&self) -> usize {
        self.homs.values().map(Vec::len).sum()
    }
}

const ASSOCIATIVITY_SAMPLES: usize = 100;

/// Enumerates `Map` on `objects`, checks identity and closure under
/// composition on every pair, associativity on every triple or on seeded
/// samples when there are too many, and functoriality of `Γ`.
pub fn build_map_category<D: Doctrine>(d: &D, objects: &[D::Obj], budget: &Budget) -> MapCategoryOf<D> {
    let mut r = ValidationReport::new("map category");
    let mut cov = Coverage::Exhaustive;
    let mut homs = BTreeMap::new();
    for y in objects {
        for a in objects {
            let Ok(rel) = Relations::new(d, y, a) else {
                r.note(format!("no product {} x {}", d.render_obj(y), d.render_obj(a)));
                continue;
            };
            let fs: Vec<D::Elem> = fiber_within(d, rel.object(), budget, &mut cov)
                .into_iter()
                .filter(|f| rel.functionality(d, f).holds())
                .collect();
            homs.insert((y.clone(), a.clone()), fs);
        }
    }
    let mut graphs = BTreeMap::new();
    for f in morphisms_within(d, objects, budget, &mut cov) {
        if let Ok(g) = graph(d, &f) {
            graphs.insert(f, g);
        }
    }

    let pairs: Vec<(&(D::Obj, D::Obj), &D::Elem)> =
        homs.iter().flat_map(|(k, fs)| fs.iter().map(move |f| (k, f))).collect();
    r.sweep(&pairs, |((y, a), f), r| {
        let ya = d.product(y, a).expect("enumerated").object;
        let (Ok(dy), Ok(da)) = (equality_predicate(d, y), equality_predicate(d, a)) else { return };
        let left = compose_relations(d, y, a, a, f, &da);
        let right = compose_relations(d, y, y, a, &dy, f);
        r.check(left.as_ref() == Ok(*f) && right.as_ref() == Ok(*f), Law::MapIdentity, || {
            vec![d.render_obj(y), d.render_obj(a), d.render_elem(&ya, f)]
        });
        for c in objects {
            let Some(gs) = homs.get(&(a.clone(), c.clone())) else { continue };
            for g in gs {
                let Ok(gf) = compose_relations(d, y, a, c, f, g) else { continue };
                r.check(homs.get(&(y.clone(), c.clone())).is_some_and(|h| h.contains(&gf)), Law::MapIdentity, || {
                    vec!["composite not functional".into(), d.render_elem(&ya, f)]
                });
            }
        }
    });

    let mut triples = Vec::new();
    for y in objects {
        for a in objects {
            for b in objects {
                for c in objects {
                    let n: usize = [(y, a), (a, b), (b, c)]
                        .iter()
                        .map(|(u, v)| homs.get(&((*u).clone(), (*v).clone())).map_or(0, Vec::len))
                        .product();
                    if n > 0 {
                        triples.push((y, a, b, c, n));
                    }
                }
            }
        }
    }
    let total: usize = triples.iter().map(|t| t.4).sum();
    let mut instances = Vec::new();
    for &(y, a, b, c, _) in &triples {
        for f in &homs[&(y.clone(), a.clone())] {
            for g in &homs[&(a.clone(), b.clone())] {
                for h in &homs[&(b.clone(), c.clone())] {
                    instances.push((y, a, b, c, f, g, h));
                }
            }
        }
        if instances.len() > 64 * ASSOCIATIVITY_SAMPLES && total as u128 > budget.max_enum {
            break;
        }
    }
    if total as u128 > budget.max_enum {
        let mut rng = budget.rng("map associativity");
        instances.shuffle(&mut rng);
        instances.truncate(ASSOCIATIVITY_SAMPLES);
        cov.merge(Coverage::Sampled { seed: budget.seed, samples: instances.len() });
    }
    r.sweep(&instances, |(y, a, b, c, f, g, h), r| {
        let gf = compose_relations(d, y, a, b, f, g);
        let hg = compose_relations(d, a, b, c, g, h);
        let (Ok(gf), Ok(hg)) = (gf, hg) else { return };
        let lhs = compose_relations(d, y, b, c, &gf, h);
        let rhs = compose_relations(d, y, a, c, f, &hg);
        r.check(lhs == rhs, Law::MapAssociativity, || {
            vec![d.render_obj(y), d.render_obj(a), d.render_obj(b), d.render_obj(c)]
        });
    });

    let morphisms: Vec<&D::Mor> = graphs.keys().collect();
    r.sweep(&morphisms, |f, r| {
        let (a, b) = (d.dom(f), d.cod(f));
        let gf = &graphs[*f];
        r.check(homs.get(&(a.clone(), b.clone())).is_some_and(|h| h.contains(gf)), Law::GraphNotFunctorial, || {
            vec![d.render_mor(f), "graph not functional".into()]
        });
        if d.is_identity(f) {
            r.check(equality_predicate(d, &a).as_ref() == Ok(gf), Law::GraphNotFunctorial, || vec![d.render_mor(f)]);
        }
        for g in morphisms.iter().filter(|g| d.dom(g) == b) {
            let c = d.cod(g);
            let composite = compose_relations(d, &a, &b, &c, gf, &graphs[*g]);
            let direct = graphs.get(&d.compose(g, f)).cloned();
            r.check(composite.ok() == direct, Law::GraphNotFunctorial, || vec![d.render_mor(f), d.render_mor(g)]);
        }
    });
    r.coverage.merge(cov);
    MapCategory { objects: objects.to_vec(), homs, graphs, report: r.finish() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{Category, Func};
    use crate::fixtures::LocalicDoctrine;

    fn sets() -> LocalicDoctrine {
        LocalicDoctrine::finset_sub(vec![0, 1, 2, 3])
    }

    #[test]
    fn equality_is_functional() {
        let d = sets();
        let delta = equality_predicate(&d, &2).unwrap();
        assert!(is_functional(&d, &2, &2, &delta).is_ok());
    }

    #[test]
    fn two_outputs_are_not_single_valued() {
        let d = sets();
        // (0,0) and (0,1) over 2 x 2
        let f = vec![1, 1, 0, 0];
        let v = check_functional(&d, &2, &2, &f).unwrap();
        assert!(!v.single_valued);
        let err = is_functional(&d, &2, &2, &f).unwrap_err();
        assert!(err.to_string().contains("single-valuedness"));
    }

    #[test]
    fn graph_of_swap() {
        let d = sets();
        let swap = Func::new(2, 2, vec![1, 0]);
        assert_eq!(graph(&d, &swap).unwrap(), vec![0, 1, 1, 0]);
        let id = d.identity(&2);
        assert_eq!(graph(&d, &id).unwrap(), equality_predicate(&d, &2).unwrap());
    }

    #[test]
    fn graphs_compose_like_functions() {
        let d = sets();
        for f in d.hom(&2, &3) {
            for g in d.hom(&3, &2) {
                let composite = compose_relations(&d, &2, &3, &2, &graph(&d, &f).unwrap(), &graph(&d, &g).unwrap());
                assert_eq!(composite.unwrap(), graph(&d, &d.compose(&g, &f)).unwrap());
            }
        }
    }

    #[test]
    fn adjoint_relations() {
        let d = sets();
        let delta = equality_predicate(&d, &2).unwrap();
        assert!(left_adjoint_check(&d, &2, &2, &delta, &delta).unwrap());
        let top = vec![1; 4];
        assert!(!left_adjoint_check(&d, &2, &2, &top, &top).unwrap());
        for f in d.hom(&3, &2) {
            let g = graph(&d, &f).unwrap();
            let op = opposite(&d, &3, &2, &g).unwrap();
            assert!(left_adjoint_check(&d, &3, &2, &g, &op).unwrap());
        }
    }

    #[test]
    fn bijectivity_in_sets() {
        let d = sets();
        let id = d.identity(&3);
        assert!(internal_bijectivity(&d, &id).unwrap().bijective());
        let fold = Func::new(2, 1, vec![0, 0]);
        let v = internal_bijectivity(&d, &fold).unwrap();
        assert!(!v.injective && v.surjective);
    }

    #[test]
    fn sets_are_complete_sheaves() {
        let d = sets();
        let scope = [0, 1, 2, 3];
        let budget = Budget::default();
        for a in scope {
            assert!(is_complete(&d, &a, &scope, &budget).is_complete());
            assert!(is_sheaf(&d, &a, &scope, &budget).is_sheaf());
        }
    }

    #[test]
    fn extension_along_iso_is_inverse() {
        let d = sets();
        let swap = Func::new(2, 2, vec![1, 0]);
        let q = Func::new(2, 3, vec![2, 0]);
        let h = complete_extension(&d, &3, &swap, &q).unwrap();
        assert_eq!(h.map, vec![0, 2]);
        let id = d.identity(&2);
        assert_eq!(complete_extension(&d, &3, &id, &q).unwrap(), q);
    }

    #[test]
    fn map_category_of_sets_is_the_base() {
        let d = sets();
        let m = build_map_category(&d, &[1, 2], &Budget::default());
        assert!(m.report.is_ok(), "{}", m.report);
        let base: usize = [1u32, 2].iter().flat_map(|a| [1u32, 2].map(|b| d.hom(a, &b).len())).sum();
        assert_eq!(m.morphism_count(), base);
    }
}
