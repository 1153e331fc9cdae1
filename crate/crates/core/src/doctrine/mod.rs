//! Doctrines `P: C^op -> ISL` over a finite base, and the generic checkers
//! for their laws.
//!
//! A [`Doctrine`] is a [`Category`] together with fibers and reindexing. Fibers
//! are given intensionally: a doctrine knows how to compute top, meet, order
//! and reindexing on its elements, and how to enumerate a fiber when asked.
//! [`TableDoctrine`] stores everything as explicit tables and computes `∃` by
//! scanning for the least `β` with `α ≤ f*β`; the fixtures in
//! [`crate::fixtures`] and [`crate::percompletion`] compute the same data by
//! closed formulas. The checkers below do not care which.

mod table;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::fincat::{homs_within, morphisms_within, Category, CategoryExt, Context, FincatError};
use crate::report::{Budget, Coverage, Law, ValidationReport};

pub use table::{Fiber, TableDoctrine, TableError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DoctrineError {
    #[error(transparent)]
    Fincat(#[from] FincatError),
    #[error("no power object for {0}")]
    MissingPowerObject(String),
    #[error("no image of {0}")]
    MissingImage(String),
    #[error("no comprehension of {0}")]
    MissingComprehension(String),
    #[error("no transpose of {0}")]
    NoSolution(String),
    #[error("several transposes of {0}")]
    MultipleSolutions(String),
    #[error("{0}")]
    Precondition(String),
}

/// A power object `PX` with membership `mem` over `X x PX`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PowerObject<O, E> {
    pub x: O,
    pub px: O,
    pub mem: E,
}

pub type PowerOf<D> = PowerObject<<D as Category>::Obj, <D as Doctrine>::Elem>;

pub trait Doctrine: Category {
    type Elem: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn top(&self, a: &Self::Obj) -> Self::Elem;
    fn meet(&self, a: &Self::Obj, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn leq(&self, a: &Self::Obj, x: &Self::Elem, y: &Self::Elem) -> bool;
    /// `f*: P(cod f) -> P(dom f)`.
    fn reindex(&self, f: &Self::Mor, x: &Self::Elem) -> Self::Elem;
    /// `∃_f: P(dom f) -> P(cod f)`. The default is the least-β scan.
    fn exists(&self, f: &Self::Mor, x: &Self::Elem) -> Self::Elem {
        exists_by_scan(self, f, x).0
    }

    fn fiber_size(&self, a: &Self::Obj) -> u128;
    /// All elements of `P(a)`, in ascending order.
    fn fiber(&self, a: &Self::Obj) -> Vec<Self::Elem>;
    /// [`Doctrine::fiber`] as a stream, in the same order.
    fn fiber_iter<'a>(&'a self, a: &Self::Obj) -> Box<dyn Iterator<Item = Self::Elem> + 'a> {
        Box::new(self.fiber(a).into_iter())
    }
    fn sample_fiber(&self, _a: &Self::Obj, _rng: &mut ChaCha8Rng, _n: usize) -> Option<Vec<Self::Elem>> {
        None
    }
    fn render_elem(&self, _a: &Self::Obj, x: &Self::Elem) -> String {
        format!("{x:?}")
    }

    /// Fiberwise implication, when the doctrine carries first-order structure.
    fn implies(&self, _a: &Self::Obj, _x: &Self::Elem, _y: &Self::Elem) -> Option<Self::Elem> {
        None
    }
    /// `∀_f: P(dom f) -> P(cod f)`, when available.
    fn forall(&self, _f: &Self::Mor, _x: &Self::Elem) -> Option<Self::Elem> {
        None
    }

    /// The chosen comprehension of `x` over `a`. The default searches.
    fn comprehension(&self, a: &Self::Obj, x: &Self::Elem) -> Option<Self::Mor> {
        find_comprehension(self, a, x)
    }

    fn power_object(&self, _x: &Self::Obj) -> Option<PowerOf<Self>> {
        None
    }
    /// `{γ}: y -> PX` for `γ` over `X x y`. The default scans `hom(y, PX)`.
    fn transpose(&self, w: &PowerOf<Self>, y: &Self::Obj, gamma: &Self::Elem) -> Result<Self::Mor, DoctrineError> {
        transpose_by_scan(self, w, y, gamma)
    }
}

/// `P(a)` if it fits the budget, otherwise a seeded sample if the doctrine
/// can produce one.
pub fn fiber_within<D: Doctrine + ?Sized>(d: &D, a: &D::Obj, budget: &Budget, cov: &mut Coverage) -> Vec<D::Elem> {
    if budget.allows(d.fiber_size(a)) {
        return d.fiber(a);
    }
    let mut rng = budget.rng(&format!("fiber {}", d.render_obj(a)));
    match d.sample_fiber(a, &mut rng, budget.samples) {
        Some(mut v) => {
            v.sort();
            v.dedup();
            cov.merge(Coverage::Sampled { seed: budget.seed, samples: v.len() });
            v
        }
        None => {
            cov.skip(format!("P({})", d.render_obj(a)));
            vec![]
        }
    }
}

/// Runs `f` over `P(a)` in chunks when the fiber fits the budget, so large
/// fibers are never held whole; otherwise once over [`fiber_within`].
pub fn sweep_fiber<D: Doctrine + ?Sized>(
    d: &D,
    a: &D::Obj,
    budget: &Budget,
    cov: &mut Coverage,
    mut f: impl FnMut(&[D::Elem]),
) {
    const CHUNK: usize = 1 << 16;
    if !budget.allows(d.fiber_size(a)) {
        f(&fiber_within(d, a, budget, cov));
        return;
    }
    let mut it = d.fiber_iter(a);
    loop {
        let chunk: Vec<D::Elem> = it.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        f(&chunk);
    }
}

pub fn meet_all<D: Doctrine + ?Sized>(d: &D, a: &D::Obj, xs: impl IntoIterator<Item = D::Elem>) -> D::Elem {
    xs.into_iter().fold(d.top(a), |acc, x| d.meet(a, &acc, &x))
}

/// The meet of all `β` with `x ≤ f*β`, and whether it is itself such a `β`
/// (that is, whether the least one exists).
pub fn exists_by_scan<D: Doctrine + ?Sized>(d: &D, f: &D::Mor, x: &D::Elem) -> (D::Elem, bool) {
    let a = d.dom(f);
    let b = d.cod(f);
    let above: Vec<D::Elem> = d.fiber(&b).into_iter().filter(|beta| d.leq(&a, x, &d.reindex(f, beta))).collect();
    let m = meet_all(d, &b, above);
    let ok = d.leq(&a, x, &d.reindex(f, &m));
    (m, ok)
}

pub fn exists_along<D: Doctrine + ?Sized>(d: &D, f: &D::Mor, x: &D::Elem) -> D::Elem {
    d.exists(f, x)
}

fn fibers_of<D: Doctrine>(
    d: &D,
    objects: &[D::Obj],
    budget: &Budget,
    cov: &mut Coverage,
) -> BTreeMap<D::Obj, Vec<D::Elem>> {
    objects.iter().map(|a| (a.clone(), fiber_within(d, a, budget, cov))).collect()
}

/// Fiber semilattice laws, functoriality of reindexing and preservation of
/// top and meets, over every morphism and composable pair between `objects`.
pub fn validate_doctrine<D: Doctrine>(d: &D, objects: &[D::Obj], budget: &Budget) -> ValidationReport {
    let mut r = ValidationReport::new("doctrine");
    let mut cov = Coverage::Exhaustive;
    let fibers = fibers_of(d, objects, budget, &mut cov);
    let morphisms = morphisms_within(d, objects, budget, &mut cov);
    r.coverage = cov;

    r.sweep(objects, |a, r| {
        let xs = &fibers[a];
        let top = d.top(a);
        for x in xs {
            r.check(d.leq(a, x, &top), Law::TopNotMaximum, || vec![d.render_obj(a), d.render_elem(a, x)]);
            for y in xs {
                let m = d.meet(a, x, y);
                let lower = d.leq(a, &m, x) && d.leq(a, &m, y);
                let greatest = xs.iter().filter(|z| d.leq(a, z, x) && d.leq(a, z, y)).all(|z| d.leq(a, z, &m));
                r.check(lower && greatest, Law::MeetNotGlb, || {
                    vec![d.render_obj(a), d.render_elem(a, x), d.render_elem(a, y)]
                });
            }
            let id = d.identity(a);
            r.check(d.reindex(&id, x) == *x, Law::ReindexIdentity, || vec![d.render_obj(a), d.render_elem(a, x)]);
        }
    });

    r.sweep(&morphisms, |f, r| {
        let a = d.dom(f);
        let b = d.cod(f);
        let Some(ys) = fibers.get(&b) else { return };
        r.check(d.reindex(f, &d.top(&b)) == d.top(&a), Law::ReindexTop, || vec![d.render_mor(f)]);
        for x in ys {
            let fx = d.reindex(f, x);
            for y in ys {
                let lhs = d.reindex(f, &d.meet(&b, x, y));
                let rhs = d.meet(&a, &fx, &d.reindex(f, y));
                r.check(lhs == rhs, Law::ReindexMeet, || {
                    vec![d.render_mor(f), d.render_elem(&b, x), d.render_elem(&b, y)]
                });
            }
        }
    });

    let by_dom: BTreeMap<D::Obj, Vec<&D::Mor>> = morphisms.iter().fold(BTreeMap::new(), |mut m, g| {
        m.entry(d.dom(g)).or_insert_with(Vec::new).push(g);
        m
    });
    r.sweep(&morphisms, |f, r| {
        let Some(gs) = by_dom.get(&d.cod(f)) else { return };
        for g in gs {
            let c = d.cod(g);
            let gf = d.compose(g, f);
            for x in &fibers[&c] {
                let lhs = d.reindex(&gf, x);
                let rhs = d.reindex(f, &d.reindex(g, x));
                r.check(lhs == rhs, Law::ReindexComposition, || {
                    vec![d.render_mor(f), d.render_mor(g), d.render_elem(&c, x)]
                });
            }
        }
    });
    r.finish()
}

/// `∃_f ⊣ f*` for every morphism between `objects`.
pub fn check_adjunction<D: Doctrine>(d: &D, objects: &[D::Obj], budget: &Budget) -> ValidationReport {
    let mut r = ValidationReport::new("exists adjunction");
    let mut cov = Coverage::Exhaustive;
    let fibers = fibers_of(d, objects, budget, &mut cov);
    let morphisms = morphisms_within(d, objects, budget, &mut cov);
    r.coverage = cov;
    r.sweep(&morphisms, |f, r| {
        let a = d.dom(f);
        let b = d.cod(f);
        let pulled: Vec<D::Elem> = fibers[&b].iter().map(|y| d.reindex(f, y)).collect();
        for x in &fibers[&a] {
            let ex = d.exists(f, x);
            for (y, fy) in fibers[&b].iter().zip(&pulled) {
                r.check(d.leq(&b, &ex, y) == d.leq(&a, x, fy), Law::ExistsNotAdjoint, || {
                    vec![d.render_mor(f), d.render_elem(&a, x), d.render_elem(&b, y)]
                });
            }
        }
    });
    r.finish()
}

/// Frobenius reciprocity for every morphism between `objects`.
pub fn check_frobenius<D: Doctrine>(d: &D, objects: &[D::Obj], budget: &Budget) -> ValidationReport {
    let mut r = ValidationReport::new("Frobenius reciprocity");
    let mut cov = Coverage::Exhaustive;
    let fibers = fibers_of(d, objects, budget, &mut cov);
    let morphisms = morphisms_within(d, objects, budget, &mut cov);
    r.coverage = cov;
    r.sweep(&morphisms, |f, r| {
        let a = d.dom(f);
        let b = d.cod(f);
        for x in &fibers[&a] {
            let ex = d.exists(f, x);
            for y in &fibers[&b] {
                let lhs = d.exists(f, &d.meet(&a, x, &d.reindex(f, y)));
                let rhs = d.meet(&b, &ex, y);
                r.check(lhs == rhs, Law::Frobenius, || {
                    vec![d.render_mor(f), d.render_elem(&a, x), d.render_elem(&b, y)]
                });
            }
        }
    });
    r.finish()
}

/// Beck-Chevalley `∃_top . left* = f* . ∃_k` over the chosen pullback of
/// every cospan `(f, k)` between `objects`. Cospans without a pullback are
/// counted in a note.
pub fn check_beck_chevalley<D: Doctrine>(d: &D, objects: &[D::Obj], budget: &Budget) -> ValidationReport {
    let mut r = ValidationReport::new("Beck-Chevalley");
    let mut cov = Coverage::Exhaustive;
    let fibers = fibers_of(d, objects, budget, &mut cov);
    let morphisms = morphisms_within(d, objects, budget, &mut cov);
    r.coverage = cov;
    let mut by_cod: BTreeMap<D::Obj, Vec<&D::Mor>> = BTreeMap::new();
    for f in &morphisms {
        by_cod.entry(d.cod(f)).or_default().push(f);
    }
    let cospans: Vec<(&D::Mor, &D::Mor)> =
        by_cod.values().flat_map(|fs| fs.iter().flat_map(move |f| fs.iter().map(move |k| (*f, *k)))).collect();
    let missing = std::sync::atomic::AtomicUsize::new(0);
    r.sweep(&cospans, |(f, k), r| {
        let Some(w) = d.pullback(f, k) else {
            missing.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            return;
        };
        let z = d.dom(k);
        let x = d.dom(f);
        for alpha in &fibers[&z] {
            let lhs = d.exists(&w.top, &d.reindex(&w.left, alpha));
            let rhs = d.reindex(f, &d.exists(k, alpha));
            r.check(lhs == rhs, Law::BeckChevalley, || {
                vec![d.render_mor(f), d.render_mor(k), d.render_elem(&z, alpha), d.render_elem(&x, &lhs)]
            });
        }
    });
    let missing = missing.into_inner();
    if missing > 0 {
        r.note(format!("{missing} of {} cospans have no pullback in the base", cospans.len()));
    }
    r.finish()
}

/// Adjunction, Frobenius and Beck-Chevalley together.
pub fn check_existential_laws<D: Doctrine>(d: &D, objects: &[D::Obj], budget: &Budget) -> ValidationReport {
    let mut r = ValidationReport::new("existential laws");
    r.absorb(check_adjunction(d, objects, budget));
    r.absorb(check_frobenius(d, objects, budget));
    r.absorb(check_beck_chevalley(d, objects, budget));
    r.finish()
}

/// `δ_A = ∃_Δ ⊤_A` over the chosen `A x A`.
pub fn equality_predicate<D: Doctrine + ?Sized>(d: &D, a: &D::Obj) -> Result<D::Elem, FincatError> {
    let diag = d.diagonal(a)?;
    Ok(d.exists(&diag, &d.top(a)))
}

/// Reflexivity and substitutivity of `δ_A` against parameter objects `xs`,
/// and the decomposition `∃_f α = ∃_{π1}((id_B x f)*δ_B ∧ π2*α)` for every
/// `f: A -> B` with `B` in `bs`. Parameter objects whose products are missing
/// are listed in a note.
pub fn check_equality_laws<D: Doctrine>(
    d: &D,
    a: &D::Obj,
    xs: &[D::Obj],
    bs: &[D::Obj],
    budget: &Budget,
) -> ValidationReport {
    let mut r = ValidationReport::new(format!("equality laws for {}", d.render_obj(a)));
    let mut cov = Coverage::Exhaustive;
    let Ok(delta) = equality_predicate(d, a) else {
        r.note(format!("no product {} x {}", d.render_obj(a), d.render_obj(a)));
        return r;
    };
    let diag = d.diagonal(a).expect("diagonal exists when delta does");
    r.check(d.leq(a, &d.top(a), &d.reindex(&diag, &delta)), Law::EqualityNotReflexive, || vec![d.render_obj(a)]);

    let mut missing = Vec::new();
    for x in xs {
        let (Ok(xaa), Ok(xa), Ok(aa)) = (
            Context::new(d, &[x.clone(), a.clone(), a.clone()]),
            Context::new(d, &[x.clone(), a.clone()]),
            Context::new(d, &[a.clone(), a.clone()]),
        ) else {
            missing.push(format!("{} x {} x {}", d.render_obj(x), d.render_obj(a), d.render_obj(a)));
            continue;
        };
        let p12 = xaa.select(d, &xa, &[0, 1]).expect("context maps exist");
        let p23 = xaa.select(d, &aa, &[1, 2]).expect("context maps exist");
        let p13 = xaa.select(d, &xa, &[0, 2]).expect("context maps exist");
        let moved = d.reindex(&p23, &delta);
        sweep_fiber(d, &xa.object, budget, &mut cov, |phis| {
            r.sweep(phis, |phi, r| {
                let lhs = d.meet(&xaa.object, &d.reindex(&p12, phi), &moved);
                let rhs = d.reindex(&p13, phi);
                r.check(d.leq(&xaa.object, &lhs, &rhs), Law::Substitutivity, || {
                    vec![d.render_obj(x), d.render_elem(&xa.object, phi)]
                });
            })
        });
    }

    let alphas = fiber_within(d, a, budget, &mut cov);
    for b in bs {
        let (Ok(ba), Ok(delta_b)) = (Context::new(d, &[b.clone(), a.clone()]), equality_predicate(d, b)) else {
            missing.push(format!("{} x {}", d.render_obj(b), d.render_obj(a)));
            continue;
        };
        let (pi1, pi2) = (&ba.projections[0], &ba.projections[1]);
        for f in homs_within(d, a, b, budget, &mut cov) {
            let Ok(id_f) = d.product_map(&d.identity(b), &f) else {
                missing.push(format!("{} x {}", d.render_obj(b), d.render_obj(b)));
                continue;
            };
            let graph = d.reindex(&id_f, &delta_b);
            r.sweep(&alphas, |alpha, r| {
                let lhs = d.exists(&f, alpha);
                let rhs = d.exists(pi1, &d.meet(&ba.object, &graph, &d.reindex(pi2, alpha)));
                r.check(lhs == rhs, Law::ExistsDecomposition, || vec![d.render_mor(&f), d.render_elem(a, alpha)]);
            });
        }
    }
    missing.sort();
    missing.dedup();
    if !missing.is_empty() {
        r.note(format!("products not in the base, skipped: {}", missing.join("; ")));
    }
    r.note("decomposition identity checked with the free formula read as the argument α");
    r.coverage.merge(cov);
    r.finish()
}

/// Whether `⊤ ≤ f*α`.
pub fn satisfies<D: Doctrine + ?Sized>(d: &D, f: &D::Mor, alpha: &D::Elem) -> bool {
    let y = d.dom(f);
    d.leq(&y, &d.top(&y), &d.reindex(f, alpha))
}

fn factorizations<D: Doctrine + ?Sized>(d: &D, m: &D::Mor, f: &D::Mor) -> usize {
    d.hom(&d.dom(f), &d.dom(m)).iter().filter(|h| d.compose(m, h) == *f).count()
}

/// Exhaustive search over the universe: the lowest `m: X -> A` with
/// `⊤ ≤ m*α` through which every such morphism factors uniquely.
pub fn find_comprehension<D: Doctrine + ?Sized>(d: &D, a: &D::Obj, alpha: &D::Elem) -> Option<D::Mor> {
    let candidates: Vec<D::Mor> =
        d.universe().iter().flat_map(|x| d.hom(x, a)).filter(|m| satisfies(d, m, alpha)).collect();
    candidates.iter().find(|m| candidates.iter().all(|f| factorizations(d, m, f) == 1)).cloned()
}

/// Checks that `m` is a comprehension of `α` against morphisms from
/// `objects`, and that it is mono.
pub fn verify_comprehension<D: Doctrine>(
    d: &D,
    alpha: &D::Elem,
    m: &D::Mor,
    objects: &[D::Obj],
    budget: &Budget,
) -> ValidationReport {
    let a = d.cod(m);
    let mut r = ValidationReport::new(format!("comprehension of {}", d.render_elem(&a, alpha)));
    let at = || vec![d.render_elem(&a, alpha), d.render_mor(m)];
    r.check(satisfies(d, m, alpha), Law::ComprehensionNotUniversal, at);
    let mut cov = Coverage::Exhaustive;
    for y in objects {
        for f in homs_within(d, y, &a, budget, &mut cov) {
            if !satisfies(d, &f, alpha) {
                continue;
            }
            let x = d.dom(m);
            if !budget.allows(d.hom_cost(y, &x)) {
                cov.skip(format!("hom({}, {})", d.render_obj(y), d.render_obj(&x)));
                continue;
            }
            r.check(factorizations(d, m, &f) == 1, Law::ComprehensionNotUniversal, || {
                vec![d.render_elem(&a, alpha), d.render_mor(m), d.render_mor(&f)]
            });
        }
    }
    let x = d.dom(m);
    let mono = objects.iter().all(|y| {
        if !budget.allows(d.hom_cost(y, &x)) {
            return true;
        }
        let homs = d.hom(y, &x);
        let images: std::collections::HashSet<D::Mor> = homs.iter().map(|g| d.compose(m, g)).collect();
        images.len() == homs.len()
    });
    if !mono {
        r.incident(Law::ComprehensionNotUniversal, vec![d.render_mor(m), "not mono".into()]);
    }
    r.coverage = cov;
    r.finish()
}

/// The image of `f`: a comprehension of `∃_f ⊤`.
pub fn image<D: Doctrine + ?Sized>(d: &D, f: &D::Mor) -> Option<D::Mor> {
    let b = d.cod(f);
    let e = d.exists(f, &d.top(&d.dom(f)));
    d.comprehension(&b, &e)
}

/// Residuation of fiber implication and `f* ⊣ ∀_f`, for every object and
/// morphism in scope.
pub fn check_first_order<D: Doctrine>(d: &D, objects: &[D::Obj], budget: &Budget) -> ValidationReport {
    let mut r = ValidationReport::new("first-order structure");
    let mut cov = Coverage::Exhaustive;
    let fibers = fibers_of(d, objects, budget, &mut cov);
    let morphisms = morphisms_within(d, objects, budget, &mut cov);
    r.coverage = cov;
    r.sweep(objects, |a, r| {
        let xs = &fibers[a];
        for x in xs {
            for y in xs {
                let Some(imp) = d.implies(a, x, y) else {
                    r.fail(Law::ImplicationResiduation, vec![d.render_obj(a), "missing".into()]);
                    return;
                };
                for z in xs {
                    let ok = d.leq(a, z, &imp) == d.leq(a, &d.meet(a, z, x), y);
                    r.check(ok, Law::ImplicationResiduation, || {
                        vec![d.render_obj(a), d.render_elem(a, x), d.render_elem(a, y), d.render_elem(a, z)]
                    });
                }
            }
        }
    });
    r.sweep(&morphisms, |f, r| {
        let a = d.dom(f);
        let b = d.cod(f);
        for x in &fibers[&a] {
            let Some(all) = d.forall(f, x) else {
                r.fail(Law::ForallAdjunction, vec![d.render_mor(f), "missing".into()]);
                return;
            };
            for y in &fibers[&b] {
                let ok = d.leq(&a, &d.reindex(f, y), x) == d.leq(&b, y, &all);
                r.check(ok, Law::ForallAdjunction, || {
                    vec![d.render_mor(f), d.render_elem(&a, x), d.render_elem(&b, y)]
                });
            }
        }
    });
    r.finish()
}

/// Scans `hom(y, PX)` for the morphisms `g` with `(id_X x g)*mem = γ`.
pub fn transpose_by_scan<D: Doctrine + ?Sized>(
    d: &D,
    w: &PowerOf<D>,
    y: &D::Obj,
    gamma: &D::Elem,
) -> Result<D::Mor, DoctrineError> {
    let id = d.identity(&w.x);
    let mut found = Vec::new();
    for g in d.hom(y, &w.px) {
        let m = d.product_map(&id, &g)?;
        if d.reindex(&m, &w.mem) == *gamma {
            found.push(g);
            if found.len() > 1 {
                break;
            }
        }
    }
    let ctx = d.product_or_err(&w.x, y)?.object;
    match found.len() {
        0 => Err(DoctrineError::NoSolution(d.render_elem(&ctx, gamma))),
        1 => Ok(found.pop().expect("one solution")),
        _ => Err(DoctrineError::MultipleSolutions(d.render_elem(&ctx, gamma))),
    }
}

/// Implements [`Category`] for a wrapper by delegating to a field.
#[macro_export]
macro_rules! delegate_category {
    ($ty:ty, $field:ident, $inner:ty, [$($gen:tt)*]) => {
        impl<$($gen)*> $crate::fincat::Category for $ty {
            type Obj = <$inner as $crate::fincat::Category>::Obj;
            type Mor = <$inner as $crate::fincat::Category>::Mor;
            fn dom(&self, f: &Self::Mor) -> Self::Obj { self.$field.dom(f) }
            fn cod(&self, f: &Self::Mor) -> Self::Obj { self.$field.cod(f) }
            fn identity(&self, a: &Self::Obj) -> Self::Mor { self.$field.identity(a) }
            fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Self::Mor { self.$field.compose(g, f) }
            fn universe(&self) -> Vec<Self::Obj> { self.$field.universe() }
            fn hom_cost(&self, a: &Self::Obj, b: &Self::Obj) -> u128 { self.$field.hom_cost(a, b) }
            fn hom(&self, a: &Self::Obj, b: &Self::Obj) -> Vec<Self::Mor> { self.$field.hom(a, b) }
            fn sample_hom(
                &self,
                a: &Self::Obj,
                b: &Self::Obj,
                rng: &mut rand_chacha::ChaCha8Rng,
                n: usize,
            ) -> Option<Vec<Self::Mor>> {
                self.$field.sample_hom(a, b, rng, n)
            }
            fn terminal(&self) -> Option<Self::Obj> { self.$field.terminal() }
            fn to_terminal(&self, a: &Self::Obj) -> Option<Self::Mor> { self.$field.to_terminal(a) }
            fn product(&self, a: &Self::Obj, b: &Self::Obj) -> Option<$crate::fincat::Product<Self>> {
                self.$field.product(a, b)
            }
            fn pair(
                &self,
                w: &$crate::fincat::Product<Self>,
                f: &Self::Mor,
                g: &Self::Mor,
            ) -> Result<Self::Mor, $crate::fincat::FincatError> {
                self.$field.pair(w, f, g)
            }
            fn pullback(&self, f: &Self::Mor, k: &Self::Mor) -> Option<$crate::fincat::Pullback<Self>> {
                self.$field.pullback(f, k)
            }
            fn lifts(&self, m: &Self::Mor, f: &Self::Mor) -> Vec<Self::Mor> { self.$field.lifts(m, f) }
            fn render_obj(&self, a: &Self::Obj) -> String { self.$field.render_obj(a) }
            fn render_mor(&self, f: &Self::Mor) -> String { self.$field.render_mor(f) }
        }
    };
}
