//! Finite categories with chosen terminal object, binary products and
//! pullbacks.
//!
//! [`Category`] is the interface every base category implements. Table-backed
//! categories ([`FiniteCategory`]) come from doctrine files; concrete ones
//! ([`FinSet`], and the categories built in [`crate::fixtures`] and
//! [`crate::percompletion`]) compute composition and limits directly. The
//! free functions here search for limits and check universal properties by
//! scanning hom-sets, and work for either kind.

mod context;
mod finset;
mod table;

use std::collections::{HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub use context::Context;
pub(crate) use finset::pow_saturating;
pub use finset::{enumerate_tuples, FinSet, Func};
pub use table::{FiniteCategory, MorphismInfo};

use crate::report::{Budget, Coverage, Law, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FincatError {
    #[error("malformed category: {0}")]
    Malformed(String),
    #[error("composition not total at ({g}, {f})")]
    CompositionNotTotal { g: String, f: String },
    #[error("morphisms {g} and {f} are not composable")]
    NotComposable { g: String, f: String },
    #[error("no mediating morphism for ({f}, {g}): invalid product witness")]
    NoMediator { f: String, g: String },
    #[error("several mediating morphisms for ({f}, {g}): invalid product witness")]
    NonUniqueMediator { f: String, g: String },
    #[error("no chosen product of {0} and {1}")]
    MissingProduct(String, String),
    #[error("no terminal object")]
    MissingTerminal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ProductWitness<O, M> {
    pub left: O,
    pub right: O,
    pub object: O,
    pub p1: M,
    pub p2: M,
}

/// A commuting square `f . top = k . left` over the cospan `(f, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PullbackWitness<O, M> {
    pub f: M,
    pub k: M,
    pub apex: O,
    pub top: M,
    pub left: M,
}

pub type Product<C> = ProductWitness<<C as Category>::Obj, <C as Category>::Mor>;
pub type Pullback<C> = PullbackWitness<<C as Category>::Obj, <C as Category>::Mor>;

pub trait Category: Sync {
    type Obj: Clone + Eq + Ord + Hash + Debug + Send + Sync;
    type Mor: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn dom(&self, f: &Self::Mor) -> Self::Obj;
    fn cod(&self, f: &Self::Mor) -> Self::Obj;
    fn identity(&self, a: &Self::Obj) -> Self::Mor;
    /// `g . f`. Callers guarantee `cod f = dom g`.
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Self::Mor;

    /// The objects that enumeration-based checks range over.
    fn universe(&self) -> Vec<Self::Obj>;
    /// Upper bound on the work needed to enumerate `hom(a, b)`.
    fn hom_cost(&self, a: &Self::Obj, b: &Self::Obj) -> u128;
    /// All morphisms `a -> b`, in ascending key order.
    fn hom(&self, a: &Self::Obj, b: &Self::Obj) -> Vec<Self::Mor>;
    /// Random morphisms `a -> b`, for categories that can sample hom-sets
    /// too large to enumerate.
    fn sample_hom(&self, _a: &Self::Obj, _b: &Self::Obj, _rng: &mut ChaCha8Rng, _n: usize) -> Option<Vec<Self::Mor>> {
        None
    }

    fn terminal(&self) -> Option<Self::Obj>;
    fn to_terminal(&self, a: &Self::Obj) -> Option<Self::Mor>;
    /// The chosen product of `a` and `b`.
    fn product(&self, a: &Self::Obj, b: &Self::Obj) -> Option<Product<Self>>;
    /// The unique `h` with `p1 . h = f` and `p2 . h = g`.
    fn pair(&self, w: &Product<Self>, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor, FincatError> {
        pair_by_search(self, w, f, g)
    }
    /// The chosen pullback of the cospan `(f, k)`.
    fn pullback(&self, f: &Self::Mor, k: &Self::Mor) -> Option<Pullback<Self>> {
        search_pullback(self, f, k)
    }

    /// Every `h` with `m . h = f`. The default scans `hom(dom f, dom m)`.
    fn lifts(&self, m: &Self::Mor, f: &Self::Mor) -> Vec<Self::Mor> {
        self.hom(&self.dom(f), &self.dom(m)).into_iter().filter(|h| self.compose(m, h) == *f).collect()
    }

    fn render_obj(&self, a: &Self::Obj) -> String {
        format!("{a:?}")
    }
    fn render_mor(&self, f: &Self::Mor) -> String {
        format!("{f:?}")
    }
}

/// Convenience operations derived from the chosen structure.
pub trait CategoryExt: Category {
    fn product_or_err(&self, a: &Self::Obj, b: &Self::Obj) -> Result<Product<Self>, FincatError> {
        self.product(a, b).ok_or_else(|| FincatError::MissingProduct(self.render_obj(a), self.render_obj(b)))
    }

    /// The diagonal `<id, id>`.
    fn diagonal(&self, a: &Self::Obj) -> Result<Self::Mor, FincatError> {
        let w = self.product_or_err(a, a)?;
        let id = self.identity(a);
        self.pair(&w, &id, &id)
    }

    /// `f x g = <f . p1, g . p2>` between chosen products.
    fn product_map(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor, FincatError> {
        let src = self.product_or_err(&self.dom(f), &self.dom(g))?;
        let dst = self.product_or_err(&self.cod(f), &self.cod(g))?;
        let l = self.compose(f, &src.p1);
        let r = self.compose(g, &src.p2);
        self.pair(&dst, &l, &r)
    }

    /// The symmetry `<p2, p1>: a x b -> b x a`.
    fn swap(&self, a: &Self::Obj, b: &Self::Obj) -> Result<Self::Mor, FincatError> {
        let src = self.product_or_err(a, b)?;
        let dst = self.product_or_err(b, a)?;
        self.pair(&dst, &src.p2, &src.p1)
    }

    fn compose_checked(&self, g: &Self::Mor, f: &Self::Mor) -> Result<Self::Mor, FincatError> {
        if self.cod(f) != self.dom(g) {
            return Err(FincatError::NotComposable { g: self.render_mor(g), f: self.render_mor(f) });
        }
        Ok(self.compose(g, f))
    }

    fn is_identity(&self, f: &Self::Mor) -> bool {
        self.dom(f) == self.cod(f) && *f == self.identity(&self.dom(f))
    }
}

impl<C: Category + ?Sized> CategoryExt for C {}

pub(crate) fn pair_by_search<C: Category + ?Sized>(
    c: &C,
    w: &Product<C>,
    f: &C::Mor,
    g: &C::Mor,
) -> Result<C::Mor, FincatError> {
    let x = c.dom(f);
    let mut found = c.hom(&x, &w.object).into_iter().filter(|h| c.compose(&w.p1, h) == *f && c.compose(&w.p2, h) == *g);
    let h = found.next().ok_or_else(|| FincatError::NoMediator { f: c.render_mor(f), g: c.render_mor(g) })?;
    if found.next().is_some() {
        return Err(FincatError::NonUniqueMediator { f: c.render_mor(f), g: c.render_mor(g) });
    }
    Ok(h)
}

/// `hom(a, b)` if it fits the budget, otherwise a seeded sample when the
/// category can produce one; the coverage records which happened.
pub fn homs_within<C: Category + ?Sized>(
    c: &C,
    a: &C::Obj,
    b: &C::Obj,
    budget: &Budget,
    cov: &mut Coverage,
) -> Vec<C::Mor> {
    if budget.allows(c.hom_cost(a, b)) {
        return c.hom(a, b);
    }
    let label = format!("hom {} {}", c.render_obj(a), c.render_obj(b));
    let mut rng = budget.rng(&label);
    match c.sample_hom(a, b, &mut rng, budget.samples) {
        Some(mut v) => {
            v.sort();
            v.dedup();
            cov.merge(Coverage::Sampled { seed: budget.seed, samples: v.len() });
            v
        }
        None => {
            cov.skip(format!("hom({}, {})", c.render_obj(a), c.render_obj(b)));
            vec![]
        }
    }
}

/// Every morphism between the listed objects, subject to the budget.
pub fn morphisms_within<C: Category + ?Sized>(
    c: &C,
    objects: &[C::Obj],
    budget: &Budget,
    cov: &mut Coverage,
) -> Vec<C::Mor> {
    let mut out = Vec::new();
    for a in objects {
        for b in objects {
            out.extend(homs_within(c, a, b, budget, cov));
        }
    }
    out
}

/// Exhaustive unit and associativity check over the universe.
pub fn validate_category<C: Category>(c: &C) -> ValidationReport {
    let mut r = ValidationReport::new("category");
    let objs = c.universe();
    let homs: HashMap<(C::Obj, C::Obj), Vec<C::Mor>> = objs
        .iter()
        .flat_map(|a| objs.iter().map(move |b| (a.clone(), b.clone())))
        .map(|(a, b)| {
            let h = c.hom(&a, &b);
            ((a, b), h)
        })
        .collect();
    for a in &objs {
        for b in &objs {
            for f in &homs[&(a.clone(), b.clone())] {
                r.check(c.compose(&c.identity(b), f) == *f, Law::LeftUnit, || vec![c.render_mor(f)]);
                r.check(c.compose(f, &c.identity(a)) == *f, Law::RightUnit, || vec![c.render_mor(f)]);
            }
        }
    }
    for a in &objs {
        for b in &objs {
            for e in &homs[&(a.clone(), b.clone())] {
                for cc in &objs {
                    for f in &homs[&(b.clone(), cc.clone())] {
                        let fe = c.compose(f, e);
                        for d in &objs {
                            for g in &homs[&(cc.clone(), d.clone())] {
                                let lhs = c.compose(g, &fe);
                                let rhs = c.compose(&c.compose(g, f), e);
                                r.check(lhs == rhs, Law::Associativity, || {
                                    vec![c.render_mor(e), c.render_mor(f), c.render_mor(g)]
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    r.finish()
}

/// Checks that `(object, p1, p2)` is a product against every object of the
/// universe: `h |-> (p1 h, p2 h)` must be a bijection onto `hom(x,l) x hom(x,r)`.
pub fn is_product<C: Category>(c: &C, w: &Product<C>) -> bool {
    if c.dom(&w.p1) != w.object || c.dom(&w.p2) != w.object || c.cod(&w.p1) != w.left || c.cod(&w.p2) != w.right {
        return false;
    }
    c.universe().iter().all(|x| {
        let expected = c.hom(x, &w.left).len() * c.hom(x, &w.right).len();
        let homs = c.hom(x, &w.object);
        if homs.len() != expected {
            return false;
        }
        let images: HashSet<(C::Mor, C::Mor)> =
            homs.iter().map(|h| (c.compose(&w.p1, h), c.compose(&w.p2, h))).collect();
        images.len() == expected
    })
}

/// Searches the universe for a product of `a` and `b`, lowest object first and
/// then lowest projection pair.
pub fn search_product<C: Category>(c: &C, a: &C::Obj, b: &C::Obj) -> Option<Product<C>> {
    let objs = c.universe();
    let counts: Vec<usize> = objs.iter().map(|x| c.hom(x, a).len() * c.hom(x, b).len()).collect();
    for p in &objs {
        // cardinality filter: |hom(x, p)| must equal the number of cones
        if objs.iter().zip(&counts).any(|(x, n)| c.hom(x, p).len() != *n) {
            continue;
        }
        for p1 in c.hom(p, a) {
            for p2 in c.hom(p, b) {
                let w = ProductWitness { left: a.clone(), right: b.clone(), object: p.clone(), p1: p1.clone(), p2 };
                if is_product(c, &w) {
                    return Some(w);
                }
            }
        }
    }
    None
}

pub fn is_pullback<C: Category>(c: &C, w: &Pullback<C>) -> bool {
    if c.compose(&w.f, &w.top) != c.compose(&w.k, &w.left) {
        return false;
    }
    c.universe().iter().all(|t| {
        let cones = cone_count(c, t, &w.f, &w.k);
        let homs = c.hom(t, &w.apex);
        if homs.len() != cones {
            return false;
        }
        let images: HashSet<(C::Mor, C::Mor)> =
            homs.iter().map(|h| (c.compose(&w.top, h), c.compose(&w.left, h))).collect();
        images.len() == cones
    })
}

/// Searches for a pullback of the cospan `(f, k)`: lowest apex object first,
/// then lowest `(top, left)` pair.
pub fn search_pullback<C: Category + ?Sized>(c: &C, f: &C::Mor, k: &C::Mor) -> Option<Pullback<C>> {
    if c.cod(f) != c.cod(k) {
        return None;
    }
    let x = c.dom(f);
    let z = c.dom(k);
    let objs = c.universe();
    let cones: Vec<usize> = objs.iter().map(|t| cone_count(c, t, f, k)).collect();
    for p in &objs {
        if objs.iter().zip(&cones).any(|(t, n)| c.hom(t, p).len() != *n) {
            continue;
        }
        let mut lefts: HashMap<C::Mor, Vec<C::Mor>> = HashMap::new();
        for l in c.hom(p, &z) {
            lefts.entry(c.compose(k, &l)).or_default().push(l);
        }
        for top in c.hom(p, &x) {
            let Some(ls) = lefts.get(&c.compose(f, &top)) else { continue };
            for left in ls {
                let w = PullbackWitness {
                    f: f.clone(),
                    k: k.clone(),
                    apex: p.clone(),
                    top: top.clone(),
                    left: left.clone(),
                };
                if objs.iter().zip(&cones).all(|(t, n)| jointly_bijective(c, t, &w, *n)) {
                    return Some(w);
                }
            }
        }
    }
    None
}

/// Number of commuting cones over `(f, k)` with vertex `t`.
fn cone_count<C: Category + ?Sized>(c: &C, t: &C::Obj, f: &C::Mor, k: &C::Mor) -> usize {
    let mut via_f: HashMap<C::Mor, usize> = HashMap::new();
    for a in c.hom(t, &c.dom(f)) {
        *via_f.entry(c.compose(f, &a)).or_default() += 1;
    }
    c.hom(t, &c.dom(k)).into_iter().map(|b| via_f.get(&c.compose(k, &b)).copied().unwrap_or(0)).sum()
}

fn jointly_bijective<C: Category + ?Sized>(c: &C, t: &C::Obj, w: &Pullback<C>, cones: usize) -> bool {
    let homs = c.hom(t, &w.apex);
    let images: HashSet<(C::Mor, C::Mor)> =
        homs.iter().map(|h| (c.compose(&w.top, h), c.compose(&w.left, h))).collect();
    images.len() == cones
}

/// Left-cancellable against every parallel pair from the universe.
pub fn is_mono<C: Category>(c: &C, f: &C::Mor) -> bool {
    let a = c.dom(f);
    c.universe().iter().all(|x| {
        let homs = c.hom(x, &a);
        let images: HashSet<C::Mor> = homs.iter().map(|g| c.compose(f, g)).collect();
        images.len() == homs.len()
    })
}

/// Right-cancellable against every parallel pair into the universe.
pub fn is_epi<C: Category>(c: &C, f: &C::Mor) -> bool {
    let b = c.cod(f);
    c.universe().iter().all(|x| {
        let homs = c.hom(&b, x);
        let images: HashSet<C::Mor> = homs.iter().map(|g| c.compose(g, f)).collect();
        images.len() == homs.len()
    })
}

/// A two-sided inverse, if one exists.
pub fn inverse<C: Category + ?Sized>(c: &C, f: &C::Mor) -> Option<C::Mor> {
    let a = c.dom(f);
    let b = c.cod(f);
    let id_a = c.identity(&a);
    let id_b = c.identity(&b);
    c.hom(&b, &a).into_iter().find(|g| c.compose(g, f) == id_a && c.compose(f, g) == id_b)
}

/// Checks the chosen terminal object against the universe.
pub fn validate_terminal<C: Category>(c: &C) -> ValidationReport {
    let mut r = ValidationReport::new("terminal object");
    let Some(t) = c.terminal() else {
        r.fail(Law::TerminalNotUniversal, vec!["<none>".into()]);
        return r;
    };
    for a in c.universe() {
        let homs = c.hom(&a, &t);
        let chosen_ok = c.to_terminal(&a).is_some_and(|m| homs.contains(&m));
        r.check(homs.len() == 1 && chosen_ok, Law::TerminalNotUniversal, || vec![c.render_obj(&a)]);
    }
    r.finish()
}

/// Checks every chosen product among universe objects.
pub fn validate_products<C: Category>(c: &C) -> ValidationReport {
    let mut r = ValidationReport::new("chosen products");
    let objs = c.universe();
    for a in &objs {
        for b in &objs {
            if let Some(w) = c.product(a, b) {
                if !objs.contains(&w.object) {
                    continue;
                }
                r.check(is_product(c, &w), Law::ProductNotUniversal, || vec![c.render_obj(a), c.render_obj(b)]);
            }
        }
    }
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skeleton() -> FinSet {
        FinSet::new(vec![0, 1, 2, 4])
    }

    #[test]
    fn skeleton_is_a_category() {
        assert!(validate_category(&FinSet::new(vec![0, 1, 2])).is_ok());
    }

    #[test]
    fn product_of_two_and_two_is_four_with_coordinates() {
        let c = skeleton();
        let w = search_product(&c, &2, &2).unwrap();
        assert_eq!(w.object, 4);
        assert_eq!(w.p1.map, vec![0, 0, 1, 1]);
        assert_eq!(w.p2.map, vec![0, 1, 0, 1]);
        assert_eq!(Some(w), c.product(&2, &2));
    }

    #[test]
    fn product_with_terminal() {
        let c = skeleton();
        let w = search_product(&c, &2, &1).unwrap();
        assert_eq!(w.object, 2);
        assert!(c.is_identity(&w.p1));
    }

    #[test]
    fn pairing_examples() {
        let c = skeleton();
        let w = c.product(&2, &2).unwrap();
        let id = c.identity(&2);
        assert_eq!(c.pair(&w, &id, &id).unwrap(), c.diagonal(&2).unwrap());
        assert_eq!(c.diagonal(&2).unwrap().map, vec![0, 3]);
        assert!(c.is_identity(&c.pair(&w, &w.p1, &w.p2).unwrap()));
        let zero = Func::new(1, 2, vec![0]);
        let one = Func::new(1, 2, vec![1]);
        assert_eq!(c.pair(&w, &zero, &one).unwrap().map, vec![1]);
        // generic search agrees with the closed form
        assert_eq!(pair_by_search(&c, &w, &zero, &one).unwrap().map, vec![1]);
    }

    #[test]
    fn pullback_examples() {
        let c = skeleton();
        let f = Func::new(2, 4, vec![1, 2]);
        let id = c.identity(&4);
        let w = search_pullback(&c, &f, &id).unwrap();
        assert_eq!(w.apex, 2);
        // 2 -> 1 <- 2: the product 4 with its projections
        let bang = Func::new(2, 1, vec![0, 0]);
        let w = search_pullback(&c, &bang, &bang).unwrap();
        assert_eq!(w.apex, 4);
        assert!(is_pullback(&c, &w));
        // distinct points 1 -> 2 <- 1: empty
        let w = search_pullback(&c, &Func::new(1, 2, vec![0]), &Func::new(1, 2, vec![1])).unwrap();
        assert_eq!(w.apex, 0);
        let concrete = c.pullback(&bang, &bang).unwrap();
        assert!(is_pullback(&c, &concrete));
    }

    #[test]
    fn pullback_of_mono_is_mono() {
        let c = FinSet::new(vec![0, 1, 2]);
        for f in c.hom(&1, &2).into_iter().chain(c.hom(&2, &2)) {
            if !is_mono(&c, &f) {
                continue;
            }
            for x in c.universe() {
                for k in c.hom(&x, &c.cod(&f)) {
                    if let Some(w) = search_pullback(&c, &f, &k) {
                        assert!(is_mono(&c, &w.left));
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_is_natural() {
        let c = FinSet::new(vec![1, 2, 4]);
        let w = c.product(&2, &2).unwrap();
        for x in [1u32, 2] {
            for f in c.hom(&x, &2) {
                for g in c.hom(&x, &2) {
                    let fg = c.pair(&w, &f, &g).unwrap();
                    for y in [1u32, 2] {
                        for h in c.hom(&y, &x) {
                            let lhs = c.compose(&fg, &h);
                            let rhs = c.pair(&w, &c.compose(&f, &h), &c.compose(&g, &h)).unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn products_are_unique_up_to_unique_iso() {
        let c = skeleton();
        let chosen = c.product(&2, &2).unwrap();
        // another witness: swap the projections
        let other = ProductWitness { p1: chosen.p2.clone(), p2: chosen.p1.clone(), ..chosen.clone() };
        assert!(is_product(&c, &other));
        let u = c.pair(&chosen, &other.p1, &other.p2).unwrap();
        let v = c.pair(&other, &chosen.p1, &chosen.p2).unwrap();
        assert!(c.is_identity(&c.compose(&u, &v)));
        assert!(c.is_identity(&c.compose(&v, &u)));
    }

    #[test]
    fn missing_product_is_absent() {
        // two objects with only identities: no products at all
        let c = FiniteCategory::discrete(&["a", "b"]);
        assert!(search_product(&c, &0, &1).is_none());
        assert!(validate_category(&c).is_ok());
    }
}
