//! Closure operators on the fibers of a doctrine and the doctrine of closed
//! predicates they cut out.

use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::delegate_category;
use crate::doctrine::{equality_predicate, fiber_within, Doctrine, DoctrineError, PowerObject, PowerOf};
use crate::fincat::{homs_within, morphisms_within, Category, CategoryExt};
use crate::report::{Budget, Coverage, Law, ValidationReport};

type Nucleus<D> = Arc<dyn Fn(&D, &<D as Category>::Obj, &<D as Doctrine>::Elem) -> <D as Doctrine>::Elem + Send + Sync>;

/// A family of closure maps, one per fiber. `None` is the identity.
pub struct ClosureOperator<D: Doctrine> {
    name: String,
    close: Option<Nucleus<D>>,
}

impl<D: Doctrine> Clone for ClosureOperator<D> {
    fn clone(&self) -> Self {
        Self { name: self.name.clone(), close: self.close.clone() }
    }
}

impl<D: Doctrine> fmt::Debug for ClosureOperator<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClosureOperator({})", self.name)
    }
}

impl<D: Doctrine> ClosureOperator<D> {
    pub fn identity() -> Self {
        Self { name: "identity".into(), close: None }
    }

    pub fn new(
        name: impl Into<String>,
        close: impl Fn(&D, &D::Obj, &D::Elem) -> D::Elem + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), close: Some(Arc::new(close)) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_identity(&self) -> bool {
        self.close.is_none()
    }

    pub fn apply(&self, d: &D, a: &D::Obj, x: &D::Elem) -> D::Elem {
        match &self.close {
            Some(c) => c(d, a, x),
            None => x.clone(),
        }
    }
}

/// Checks that every component is inflationary, idempotent, monotone and
/// preserves binary meets.
pub fn check_nucleus<D: Doctrine>(
    d: &D,
    cl: &ClosureOperator<D>,
    objects: &[D::Obj],
    budget: &Budget,
) -> ValidationReport {
    let mut r = ValidationReport::new(format!("nucleus {}", cl.name()));
    r.sweep(objects, |a, r| {
        let xs = fiber_within(d, a, budget, &mut r.coverage);
        for x in &xs {
            let c = cl.apply(d, a, x);
            r.check(d.leq(a, x, &c), Law::NotInflationary, || vec![d.render_obj(a), d.render_elem(a, x)]);
            r.check(cl.apply(d, a, &c) == c, Law::NotIdempotent, || vec![d.render_obj(a), d.render_elem(a, x)]);
            for y in &xs {
                let lhs = cl.apply(d, a, &d.meet(a, x, y));
                let rhs = d.meet(a, &c, &cl.apply(d, a, y));
                r.check(lhs == rhs, Law::NotMeetPreserving, || {
                    vec![d.render_obj(a), d.render_elem(a, x), d.render_elem(a, y)]
                });
            }
        }
    });
    r.finish()
}

/// Checks `cl ∘ f* = f* ∘ cl` on every morphism between `objects`.
pub fn check_naturality<D: Doctrine>(
    d: &D,
    cl: &ClosureOperator<D>,
    objects: &[D::Obj],
    budget: &Budget,
) -> ValidationReport {
    let mut r = ValidationReport::new(format!("naturality of {}", cl.name()));
    let morphisms = morphisms_within(d, objects, budget, &mut r.coverage);
    r.sweep(&morphisms, |f, r| {
        let (a, b) = (d.dom(f), d.cod(f));
        for y in fiber_within(d, &b, budget, &mut r.coverage) {
            let lhs = cl.apply(d, &a, &d.reindex(f, &y));
            let rhs = d.reindex(f, &cl.apply(d, &b, &y));
            r.check(lhs == rhs, Law::ClosureNotNatural, || vec![d.render_mor(f), d.render_elem(&b, &y)]);
        }
    });
    r.finish()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosureError {
    #[error("{0}")]
    NotNatural(String),
}

/// The closed predicates of `base`: fibers are the fixed points of the
/// closure, `∃` is closed after the fact and the rest is inherited.
#[derive(Debug, Clone)]
pub struct ClosedDoctrine<D: Doctrine> {
    base: D,
    cl: ClosureOperator<D>,
}

delegate_category!(ClosedDoctrine<D>, base, D, [D: Doctrine]);

/// Wraps `d` once `cl` is natural on the objects of `d`.
pub fn closed_subobject_doctrine<D: Doctrine>(
    d: D,
    cl: ClosureOperator<D>,
    budget: &Budget,
) -> Result<ClosedDoctrine<D>, ClosureError> {
    if !cl.is_identity() {
        let r = check_naturality(&d, &cl, &d.universe(), budget);
        if !r.is_ok() {
            return Err(ClosureError::NotNatural(r.to_string()));
        }
    }
    Ok(ClosedDoctrine { base: d, cl })
}

impl<D: Doctrine> ClosedDoctrine<D> {
    /// Skips the naturality check.
    pub fn new_unchecked(base: D, cl: ClosureOperator<D>) -> Self {
        Self { base, cl }
    }

    pub fn base(&self) -> &D {
        &self.base
    }

    pub fn closure(&self) -> &ClosureOperator<D> {
        &self.cl
    }

    pub fn close(&self, a: &D::Obj, x: &D::Elem) -> D::Elem {
        self.cl.apply(&self.base, a, x)
    }

    fn is_closed(&self, a: &D::Obj, x: &D::Elem) -> bool {
        self.close(a, x) == *x
    }

    /// The base power object, the comprehension `incl: P_j X -> PX` of the
    /// closed members, and membership pulled back to `X x P_j X`.
    fn closed_power(&self, a: &D::Obj) -> Option<(PowerOf<D>, D::Mor, PowerOf<D>)> {
        let d = &self.base;
        let w = d.power_object(a)?;
        let xp = d.product(a, &w.px)?;
        let closed = d.implies(&xp.object, &self.close(&xp.object, &w.mem), &w.mem)?;
        let chi = d.forall(&xp.p2, &closed)?;
        let incl = d.comprehension(&w.px, &chi)?;
        let pj = d.dom(&incl);
        let m = d.product_map(&d.identity(a), &incl).ok()?;
        let mem = d.reindex(&m, &w.mem);
        let wj = PowerObject { x: a.clone(), px: pj, mem };
        Some((w, incl, wj))
    }
}

impl<D: Doctrine> Doctrine for ClosedDoctrine<D> {
    type Elem = D::Elem;

    fn top(&self, a: &D::Obj) -> D::Elem {
        self.base.top(a)
    }

    fn meet(&self, a: &D::Obj, x: &D::Elem, y: &D::Elem) -> D::Elem {
        self.base.meet(a, x, y)
    }

    fn leq(&self, a: &D::Obj, x: &D::Elem, y: &D::Elem) -> bool {
        self.base.leq(a, x, y)
    }

    fn reindex(&self, f: &D::Mor, x: &D::Elem) -> D::Elem {
        self.base.reindex(f, x)
    }

    fn exists(&self, f: &D::Mor, x: &D::Elem) -> D::Elem {
        let b = self.base.cod(f);
        self.close(&b, &self.base.exists(f, x))
    }

    /// The base value when it is closed; absent otherwise, which only
    /// happens when the closure is not a nucleus.
    fn forall(&self, f: &D::Mor, x: &D::Elem) -> Option<D::Elem> {
        let b = self.base.cod(f);
        self.base.forall(f, x).filter(|y| self.is_closed(&b, y))
    }

    fn implies(&self, a: &D::Obj, x: &D::Elem, y: &D::Elem) -> Option<D::Elem> {
        self.base.implies(a, x, y).filter(|z| self.is_closed(a, z))
    }

    fn fiber_size(&self, a: &D::Obj) -> u128 {
        self.base.fiber_size(a)
    }

    fn fiber(&self, a: &D::Obj) -> Vec<D::Elem> {
        let mut xs = self.base.fiber(a);
        if !self.cl.is_identity() {
            xs.retain(|x| self.is_closed(a, x));
        }
        xs
    }

    fn sample_fiber(&self, a: &D::Obj, rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<D::Elem>> {
        let xs = self.base.sample_fiber(a, rng, n)?;
        Some(xs.iter().map(|x| self.close(a, x)).collect())
    }

    fn render_elem(&self, a: &D::Obj, x: &D::Elem) -> String {
        self.base.render_elem(a, x)
    }

    fn comprehension(&self, a: &D::Obj, x: &D::Elem) -> Option<D::Mor> {
        self.base.comprehension(a, x)
    }

    fn power_object(&self, a: &D::Obj) -> Option<PowerOf<Self>> {
        if self.cl.is_identity() {
            return self.base.power_object(a);
        }
        self.closed_power(a).map(|(_, _, wj)| wj)
    }

    fn transpose(&self, w: &PowerOf<Self>, y: &D::Obj, gamma: &D::Elem) -> Result<D::Mor, DoctrineError> {
        if self.cl.is_identity() {
            return self.base.transpose(w, y, gamma);
        }
        let (wb, incl, _) =
            self.closed_power(&w.x).ok_or_else(|| DoctrineError::MissingPowerObject(self.render_obj(&w.x)))?;
        let xy = self.product_or_err(&w.x, y)?.object;
        if !self.is_closed(&xy, gamma) {
            return Err(DoctrineError::NoSolution(self.render_elem(&xy, gamma)));
        }
        let g = self.base.transpose(&wb, y, gamma)?;
        let mut lifts = self.base.lifts(&incl, &g);
        match lifts.len() {
            1 => Ok(lifts.pop().unwrap()),
            0 => Err(DoctrineError::NoSolution(self.render_elem(&xy, gamma))),
            _ => Err(DoctrineError::MultipleSolutions(self.render_elem(&xy, gamma))),
        }
    }
}

/// Objects `X` of `scope` orthogonal to every dense mono between objects of
/// `scope`: for each `m: S -> Z` whose image closes to `⊤`, every
/// `g: S -> X` extends along `m` in exactly one way. Monos are the
/// comprehensions of dense predicates; everything else is a hom-set scan in
/// the base.
pub fn dense_orthogonal_objects<D: Doctrine>(
    d: &ClosedDoctrine<D>,
    scope: &[D::Obj],
    budget: &Budget,
) -> (Vec<D::Obj>, Coverage) {
    let base = d.base();
    let mut cov = Coverage::Exhaustive;
    let mut dense = Vec::new();
    for z in scope {
        let top = base.top(z);
        for x in fiber_within(base, z, budget, &mut cov) {
            if d.close(z, &x) == top {
                if let Some(m) = base.comprehension(z, &x) {
                    dense.push(m);
                }
            }
        }
    }
    let mut out = Vec::new();
    for x in scope {
        let orthogonal = dense.iter().all(|m| {
            let (s, z) = (base.dom(m), base.cod(m));
            let extensions = homs_within(base, &z, x, budget, &mut cov);
            homs_within(base, &s, x, budget, &mut cov)
                .iter()
                .all(|g| extensions.iter().filter(|h| base.compose(h, m) == *g).take(2).count() == 1)
        });
        if orthogonal {
            out.push(x.clone());
        }
    }
    (out, cov)
}

/// Morphisms `f` between `objects` with dense image and dense diagonal in
/// the base kernel pair.
pub fn bidense_morphisms<D: Doctrine>(d: &ClosedDoctrine<D>, objects: &[D::Obj], budget: &Budget) -> Vec<D::Mor> {
    let base = d.base();
    let mut cov = Coverage::Exhaustive;
    morphisms_within(base, objects, budget, &mut cov)
        .into_iter()
        .filter(|f| {
            let (a, b) = (base.dom(f), base.cod(f));
            let image = base.exists(f, &base.top(&a));
            if d.close(&b, &image) != base.top(&b) {
                return false;
            }
            let Some(kp) = base.pullback(f, f) else { return false };
            let Ok(diagonal) = base.pair(&base.product_or_err(&a, &a).unwrap(), &kp.top, &kp.left) else {
                return false;
            };
            let Ok(delta) = equality_predicate(base, &a) else { return false };
            let on_kernel = base.reindex(&diagonal, &delta);
            d.close(&kp.apex, &on_kernel) == base.top(&kp.apex)
        })
        .collect()
}
