//! Power objects, the transpose `{γ}`, and the singleton conditions.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::doctrine::{equality_predicate, fiber_within, Doctrine, DoctrineError, PowerOf};
use crate::fincat::{homs_within, Category, CategoryExt, FincatError};
use crate::maps::{internal_bijectivity, opposite, Relations};
use crate::report::{Budget, Coverage, Law, ValidationReport};

/// `{γ}: Y -> PX`, the unique `g` with `γ = (id_X x g)*mem`.
pub fn lambda<D: Doctrine>(d: &D, w: &PowerOf<D>, y: &D::Obj, gamma: &D::Elem) -> Result<D::Mor, DoctrineError> {
    d.transpose(w, y, gamma)
}

/// `(id_X x g)*mem` over `X x Y`.
pub fn pull_membership<D: Doctrine + ?Sized>(d: &D, w: &PowerOf<D>, g: &D::Mor) -> Result<D::Elem, FincatError> {
    let m = d.product_map(&d.identity(&w.x), g)?;
    Ok(d.reindex(&m, &w.mem))
}

/// Every `h` with `m . h = f`.
pub fn factor_through<D: Category + ?Sized>(d: &D, m: &D::Mor, f: &D::Mor) -> Vec<D::Mor> {
    d.lifts(m, f)
}

/// Checks that `g |-> (id_X x g)*mem` is a bijection `hom(Y, PX) -> P(X x Y)`
/// for every probe `Y`, and that `λ` inverts it.
pub fn verify_power_object<D: Doctrine>(d: &D, w: &PowerOf<D>, probes: &[D::Obj], budget: &Budget) -> ValidationReport {
    let mut r = ValidationReport::new(format!("power object of {}", d.render_obj(&w.x)));
    for y in probes {
        let Ok(xy) = d.product_or_err(&w.x, y).map(|p| p.object) else {
            r.note(format!("no product {} x {}", d.render_obj(&w.x), d.render_obj(y)));
            continue;
        };
        let mut cov = Coverage::Exhaustive;
        let homs = homs_within(d, y, &w.px, budget, &mut cov);
        let hom_exhaustive = cov == Coverage::Exhaustive;
        let images: Vec<D::Elem> =
            homs.par_iter().map(|g| pull_membership(d, w, g).expect("product checked")).collect();
        let mut preimages: HashMap<&D::Elem, usize> = HashMap::new();
        for gamma in &images {
            *preimages.entry(gamma).or_default() += 1;
        }
        for (gamma, &n) in &preimages {
            r.check(n == 1, Law::PowerMultipleSolutions, || {
                vec![d.render_obj(y), d.render_elem(&xy, gamma), format!("{n} morphisms")]
            });
        }
        let pairs: Vec<(&D::Mor, &D::Elem)> = homs.iter().zip(&images).collect();
        r.sweep(&pairs, |(g, gamma), r| {
            let back = lambda(d, w, y, gamma);
            r.check(back.as_ref() == Ok(*g), Law::PowerRoundTrip, || vec![d.render_obj(y), d.render_mor(g)]);
        });

        let fiber_exhaustive = budget.allows(d.fiber_size(&xy));
        if hom_exhaustive && fiber_exhaustive {
            let fiber = d.fiber(&xy);
            if preimages.len() < fiber.len() {
                for gamma in fiber.iter().filter(|g| !preimages.contains_key(g)) {
                    r.fail(Law::PowerNoSolution, vec![d.render_obj(y), d.render_elem(&xy, gamma)]);
                }
            } else {
                r.checked += fiber.len() as u64;
            }
        } else {
            let gammas = fiber_within(d, &xy, budget, &mut cov);
            r.sweep(&gammas, |gamma, r| match lambda(d, w, y, gamma) {
                Ok(g) => {
                    let ok = pull_membership(d, w, &g).as_ref() == Ok(gamma);
                    r.check(ok, Law::PowerNoSolution, || vec![d.render_obj(y), d.render_elem(&xy, gamma)]);
                }
                Err(DoctrineError::MultipleSolutions(_)) => {
                    r.fail(Law::PowerMultipleSolutions, vec![d.render_obj(y), d.render_elem(&xy, gamma)])
                }
                Err(_) => r.fail(Law::PowerNoSolution, vec![d.render_obj(y), d.render_elem(&xy, gamma)]),
            });
            if gammas.is_empty() {
                r.note(format!("{}: P({}) exceeds the budget", Law::ProbeTooLarge, d.render_obj(&xy)));
            }
        }
        r.coverage.merge(cov);
    }
    r.finish()
}

/// The data computed for the singleton conditions on `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Singletons<O, M, E> {
    pub a: O,
    pub px: O,
    pub mem: E,
    /// `δ_A` over `A x A`.
    pub delta: E,
    /// `{δ_A}: A -> PA`.
    pub singleton: M,
    /// `σ_A = ∃_{δ_A} ⊤_A` over `PA`.
    pub sigma: E,
    /// `S_A`, the domain of `incl`.
    pub s: O,
    /// `⌊σ_A⌋: S_A -> PA`.
    pub incl: M,
    /// `η_A: A -> S_A` with `incl . η_A = {δ_A}`.
    pub eta: M,
}

pub type SingletonsOf<D> = Singletons<<D as Category>::Obj, <D as Category>::Mor, <D as Doctrine>::Elem>;

impl<O: Clone, M, E: Clone> Singletons<O, M, E> {
    pub fn power(&self) -> crate::doctrine::PowerObject<O, E> {
        crate::doctrine::PowerObject { x: self.a.clone(), px: self.px.clone(), mem: self.mem.clone() }
    }
}

/// Outcome of [`check_singletons`]: the constructed data when it exists,
/// one verdict per condition and the combined report.
#[derive(Debug, Clone)]
pub struct SingletonsReport<O, M, E> {
    pub data: Option<Singletons<O, M, E>>,
    pub power_objects: bool,
    pub images_injective: bool,
    pub functional_iff_sigma: bool,
    pub report: ValidationReport,
}

pub type SingletonsReportOf<D> = SingletonsReport<<D as Category>::Obj, <D as Category>::Mor, <D as Doctrine>::Elem>;

impl<O, M, E> SingletonsReport<O, M, E> {
    pub fn passed(&self) -> bool {
        self.report.is_ok()
    }
}

/// Computes `{δ_A}`, `σ_A`, `S_A`, `⌊σ_A⌋` and `η_A`, then checks the
/// power object on `probes`, internal injectivity of `{δ_A}`, and that
/// `(id_A x g)*mem` is functional from `Y` to `A` exactly when `g*σ_A = ⊤_Y`,
/// for every `g: Y -> PA` with `Y` a probe.
pub fn check_singletons<D: Doctrine>(d: &D, a: &D::Obj, probes: &[D::Obj], budget: &Budget) -> SingletonsReportOf<D> {
    let mut r = ValidationReport::new(format!("singletons for {}", d.render_obj(a)));
    let mut out = SingletonsReport {
        data: None,
        power_objects: false,
        images_injective: false,
        functional_iff_sigma: false,
        report: ValidationReport::default(),
    };
    let Some(w) = d.power_object(a) else {
        r.fail(Law::MissingPowerObject, vec![d.render_obj(a)]);
        out.report = r.finish();
        return out;
    };
    let data = match construct(d, a, &w, &mut r) {
        Ok(data) => data,
        Err(e) => {
            r.note(e.to_string());
            out.report = r.finish();
            return out;
        }
    };

    let pr = verify_power_object(d, &w, probes, budget);
    out.power_objects = pr.is_ok();
    r.absorb(pr);

    match internal_bijectivity(d, &data.singleton) {
        Ok(v) => {
            out.images_injective = v.injective;
            r.check(v.injective, Law::SingletonNotInjective, || vec![d.render_obj(a), d.render_mor(&data.singleton)]);
        }
        Err(e) => r.fail(Law::SingletonNotInjective, vec![d.render_obj(a), e.to_string()]),
    }

    let before = r.violations.len();
    for y in probes {
        let Ok(rel) = Relations::new(d, y, a) else {
            r.note(format!("no product {} x {}", d.render_obj(y), d.render_obj(a)));
            continue;
        };
        let Ok(swap) = d.swap(y, a) else { continue };
        let mut cov = Coverage::Exhaustive;
        let gs = homs_within(d, y, &w.px, budget, &mut cov);
        let top = d.top(y);
        r.sweep(&gs, |g, r| {
            let Ok(f_op) = pull_membership(d, &w, g) else { return };
            let f = d.reindex(&swap, &f_op);
            let functional = rel.functionality(d, &f).holds();
            let in_sigma = d.leq(y, &top, &d.reindex(g, &data.sigma));
            r.check(functional == in_sigma, Law::SingletonsFunctionality, || {
                vec![d.render_mor(g), format!("functional: {functional}"), format!("in sigma: {in_sigma}")]
            });
        });
        r.coverage.merge(cov);
    }
    out.functional_iff_sigma = r.violations.len() == before;
    out.data = Some(data);
    out.report = r.finish();
    out
}

fn construct<D: Doctrine>(
    d: &D,
    a: &D::Obj,
    w: &PowerOf<D>,
    r: &mut ValidationReport,
) -> Result<SingletonsOf<D>, DoctrineError> {
    let delta = equality_predicate(d, a)?;
    let singleton = match lambda(d, w, a, &delta) {
        Ok(s) => s,
        Err(e) => {
            let law = match e {
                DoctrineError::MultipleSolutions(_) => Law::PowerMultipleSolutions,
                _ => Law::PowerNoSolution,
            };
            r.fail(law, vec![d.render_obj(a), "δ".into()]);
            return Err(e);
        }
    };
    let sigma = d.exists(&singleton, &d.top(a));
    r.check(d.reindex(&singleton, &sigma) == d.top(a), Law::EtaFactorization, || {
        vec![d.render_obj(a), "{δ}*σ is not ⊤".into()]
    });
    let Some(incl) = d.comprehension(&w.px, &sigma) else {
        r.fail(Law::MissingImage, vec![d.render_mor(&singleton)]);
        return Err(DoctrineError::MissingImage(d.render_mor(&singleton)));
    };
    let lifts = factor_through(d, &incl, &singleton);
    let [eta] = lifts.as_slice() else {
        r.fail(Law::EtaFactorization, vec![d.render_obj(a), format!("{} factorizations", lifts.len())]);
        return Err(DoctrineError::Precondition(format!(
            "{{δ}} does not factor uniquely through {}",
            d.render_mor(&incl)
        )));
    };
    Ok(Singletons {
        a: a.clone(),
        px: w.px.clone(),
        mem: w.mem.clone(),
        delta,
        singleton: singleton.clone(),
        sigma,
        s: d.dom(&incl),
        eta: eta.clone(),
        incl,
    })
}

/// `F^op` as a point of `PA`: `{F^op}: Y -> PA` for `F` over `Y x A`.
pub fn transpose_relation<D: Doctrine>(
    d: &D,
    w: &PowerOf<D>,
    y: &D::Obj,
    f: &D::Elem,
) -> Result<D::Mor, DoctrineError> {
    let f_op = opposite(d, y, &w.x, f)?;
    lambda(d, w, y, &f_op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::Func;
    use crate::fixtures::LocalicDoctrine;
    use crate::lattice::FiniteHeytingAlgebra;

    #[test]
    fn transpose_of_membership_is_identity() {
        let d = LocalicDoctrine::finset_sub(vec![1, 2, 4]);
        let w = d.power_object(&2).unwrap();
        let g = lambda(&d, &w, &4, &w.mem).unwrap();
        assert!(d.is_identity(&g));
    }

    #[test]
    fn subsets_classify() {
        let d = LocalicDoctrine::finset_sub(vec![1, 2, 4]);
        let w = d.power_object(&2).unwrap();
        let r = verify_power_object(&d, &w, &[1, 2], &Budget::default());
        assert!(r.is_ok(), "{r}");
        assert_eq!(r.coverage, Coverage::Exhaustive);
    }

    #[test]
    fn localic_powers_classify() {
        let d = LocalicDoctrine::new(FiniteHeytingAlgebra::chain3(), "chain3", vec![1, 2, 3]);
        let w = d.power_object(&1).unwrap();
        let r = verify_power_object(&d, &w, &[1, 2], &Budget::default());
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn top_membership_has_many_transposes() {
        let d = LocalicDoctrine::finset_sub(vec![1, 2, 4]);
        let mut w = d.power_object(&1).unwrap();
        w.mem = d.top(&2);
        let r = verify_power_object(&d, &w, &[1, 2], &Budget::default());
        assert!(r.violations_of(Law::PowerMultipleSolutions).next().is_some());
    }

    #[test]
    fn singletons_of_two() {
        let d = LocalicDoctrine::finset_sub(vec![0, 1, 2, 4]);
        let s = check_singletons(&d, &2, &[0, 1, 2], &Budget::default());
        assert!(s.passed(), "{}", s.report);
        let data = s.data.unwrap();
        assert_eq!(data.singleton, Func::new(2, 4, vec![2, 1]));
        // subsets 00, 01, 10, 11: only the singletons are in σ
        assert_eq!(data.sigma, vec![0, 1, 1, 0]);
        assert_eq!(data.s, 2);
        assert_eq!(d.compose(&data.incl, &data.eta), data.singleton);
    }

    #[test]
    fn singletons_of_terminal() {
        let d = LocalicDoctrine::finset_sub(vec![0, 1, 2]);
        let s = check_singletons(&d, &1, &[0, 1, 2], &Budget::default());
        assert!(s.passed(), "{}", s.report);
        assert_eq!(s.data.unwrap().s, 1);
    }
}
