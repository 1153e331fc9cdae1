//! Named fixture generators and the defects that can be planted in them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    closed_subobject_doctrine, materialize, ArrowObj, ArrowPresheaf, ClosedDoctrine, ClosureError, ClosureOperator,
    LocalicDoctrine, MaterializeOptions,
};
use crate::doctrine::{Doctrine, TableDoctrine, TableError};
use crate::fincat::{Category, CategoryExt};
use crate::format::DoctrineFile;
use crate::lattice::{FiniteHeytingAlgebra, Nucleus};
use crate::percompletion::{build_per_completion, PerDoctrine, PerError};
use crate::report::Budget;

pub const FIXTURES: [&str; 4] = ["finset-sub", "localic", "arrow-presheaf", "per"];
pub const ALGEBRAS: [&str; 4] = ["bool2", "chain3", "boolpq", "abc"];
pub const CLOSURES: [&str; 2] = ["double-negation", "moore"];
pub const DEFECTS: [&str; 5] = ["associativity", "reindex", "forall", "membership", "nucleus"];

/// A fixture name and its parameters. Written into generated files as the
/// `generator` record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub fixture: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_extent: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<String>,
}

impl FixtureSpec {
    pub fn new(fixture: &str) -> Self {
        Self { fixture: fixture.into(), algebra: None, sizes: vec![], max_extent: None, closure: None, defect: None }
    }

    pub fn sizes(mut self, sizes: &[u32]) -> Self {
        self.sizes = sizes.to_vec();
        self
    }

    pub fn algebra(mut self, name: &str) -> Self {
        self.algebra = Some(name.into());
        self
    }

    pub fn closure(mut self, name: &str) -> Self {
        self.closure = Some(name.into());
        self
    }

    pub fn defect(mut self, name: &str) -> Self {
        self.defect = Some(name.into());
        self
    }

    pub fn max_extent(mut self, n: u32) -> Self {
        self.max_extent = Some(n);
        self
    }

    fn sizes_or(&self, default: &[u32]) -> Vec<u32> {
        if self.sizes.is_empty() {
            default.to_vec()
        } else {
            self.sizes.clone()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("unknown fixture {0:?}; known: finset-sub, localic, arrow-presheaf, per")]
    Unknown(String),
    #[error("unknown algebra {0:?}; known: bool2, chain3, boolpq, abc")]
    UnknownAlgebra(String),
    #[error("unknown closure {0:?}; known: double-negation, moore")]
    UnknownClosure(String),
    #[error("unknown defect {0:?}")]
    UnknownDefect(String),
    #[error("size bound exceeded: {0}")]
    Bounds(String),
    #[error("{0}")]
    Inapplicable(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Per(#[from] PerError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
}

pub fn algebra_named(name: &str) -> Result<FiniteHeytingAlgebra, FixtureError> {
    match name {
        "bool2" => Ok(FiniteHeytingAlgebra::bool2()),
        "chain3" => Ok(FiniteHeytingAlgebra::chain3()),
        "boolpq" => Ok(FiniteHeytingAlgebra::boolpq()),
        "abc" => Ok(FiniteHeytingAlgebra::powerset(&["a", "b", "c"])),
        other => Err(FixtureError::UnknownAlgebra(other.into())),
    }
}

/// A generated doctrine, kept intensional.
#[derive(Debug, Clone)]
pub enum Generated {
    Localic(LocalicDoctrine),
    ClosedLocalic(ClosedDoctrine<LocalicDoctrine>),
    Arrow(ArrowPresheaf),
    ClosedArrow(ClosedDoctrine<ArrowPresheaf>),
    Per(PerDoctrine),
}

/// Runs `$body` with `$d` bound to the doctrine inside a [`Generated`].
#[macro_export]
macro_rules! with_generated {
    ($g:expr, $d:ident => $body:expr) => {
        match $g {
            $crate::fixtures::Generated::Localic($d) => $body,
            $crate::fixtures::Generated::ClosedLocalic($d) => $body,
            $crate::fixtures::Generated::Arrow($d) => $body,
            $crate::fixtures::Generated::ClosedArrow($d) => $body,
            $crate::fixtures::Generated::Per($d) => $body,
        }
    };
}

fn check_bound(what: &str, sizes: &[u32], max: u32) -> Result<(), FixtureError> {
    match sizes.iter().find(|&&n| n > max) {
        Some(n) => Err(FixtureError::Bounds(format!("{what} size {n} exceeds {max}"))),
        None => Ok(()),
    }
}

fn localic_closure(h: &FiniteHeytingAlgebra, name: &str) -> Result<ClosureOperator<LocalicDoctrine>, FixtureError> {
    let table: Vec<u8> = match name {
        "double-negation" => Nucleus::double_negation(h).map.iter().map(|&v| v as u8).collect(),
        // the least element of {0, b, c, a+b, 1} above each element
        "moore" if h.size() == 8 => {
            let family = [0u32, 2, 4, 3, 7];
            h.elements()
                .map(|v| family.iter().copied().filter(|&f| h.leq(v, f)).reduce(|u, w| h.meet(u, w)).unwrap() as u8)
                .collect()
        }
        "moore" => return Err(FixtureError::Inapplicable("the moore closure needs the algebra abc".into())),
        other => return Err(FixtureError::UnknownClosure(other.into())),
    };
    Ok(ClosureOperator::new(name, move |_: &LocalicDoctrine, _: &u32, x: &Vec<u8>| {
        x.iter().map(|&v| table[v as usize]).collect()
    }))
}

/// Builds the intensional doctrine named by `spec`. Defects are not applied
/// here; see [`gen_fixture`].
pub fn generate(spec: &FixtureSpec) -> Result<Generated, FixtureError> {
    let budget = Budget::default();
    match spec.fixture.as_str() {
        "finset-sub" => {
            let sizes = spec.sizes_or(&[0, 1, 2, 4]);
            check_bound("finset-sub", &sizes, 5)?;
            if spec.closure.is_some() {
                return Err(FixtureError::Inapplicable("finset-sub takes no closure".into()));
            }
            Ok(Generated::Localic(LocalicDoctrine::finset_sub(sizes)))
        }
        "localic" => {
            let sizes = spec.sizes_or(&[1, 2, 4]);
            check_bound("localic", &sizes, 4)?;
            let name = spec.algebra.as_deref().unwrap_or("chain3");
            let h = algebra_named(name)?;
            let d = LocalicDoctrine::new(h.clone(), name, sizes);
            match &spec.closure {
                None => Ok(Generated::Localic(d)),
                Some(c) => {
                    let cl = localic_closure(&h, c)?;
                    Ok(Generated::ClosedLocalic(closed_subobject_doctrine(d, cl, &budget)?))
                }
            }
        }
        "arrow-presheaf" => {
            let sizes = spec.sizes_or(&[2]);
            check_bound("arrow-presheaf component", &sizes, 2)?;
            let d = ArrowPresheaf::truncated(sizes.iter().copied().max().unwrap_or(0));
            match spec.closure.as_deref() {
                None => Ok(Generated::Arrow(d)),
                Some("double-negation") => {
                    let cl = ClosureOperator::new("double-negation", |d: &ArrowPresheaf, a: &ArrowObj, s: &Vec<u8>| {
                        d.double_negation(a, s)
                    });
                    Ok(Generated::ClosedArrow(closed_subobject_doctrine(d, cl, &budget)?))
                }
                Some(other) => Err(FixtureError::UnknownClosure(other.into())),
            }
        }
        "per" => {
            let sizes = spec.sizes_or(&[1, 2]);
            check_bound("per base", &sizes, 3)?;
            let name = spec.algebra.as_deref().unwrap_or("chain3");
            let base = LocalicDoctrine::new(algebra_named(name)?, name, sizes.clone());
            Ok(Generated::Per(build_per_completion(&base, &sizes, spec.max_extent)?))
        }
        other => Err(FixtureError::Unknown(other.into())),
    }
}

impl Generated {
    /// Every object of the generated universe, with its rendered name.
    pub fn object_names(&self) -> Vec<String> {
        with_generated!(self, d => d.universe().iter().map(|a| d.render_obj(a)).collect())
    }

    pub fn materialize(&self) -> Result<TableDoctrine, TableError> {
        with_generated!(self, d => materialize(d, &d.universe(), MaterializeOptions::default()))
    }
}

/// A validated doctrine file for `spec`, with its defect planted if one is
/// named.
pub fn gen_fixture(spec: &FixtureSpec) -> Result<DoctrineFile, FixtureError> {
    let g = generate(spec)?;
    let mut t = g.materialize()?;
    if let Some(defect) = &spec.defect {
        t = plant(t, defect)?;
    }
    Ok(DoctrineFile::from_doctrine(&t, Some(spec.clone())))
}

fn non_identities(t: &TableDoctrine) -> Vec<u32> {
    let c = t.category();
    (0..c.morphisms().len() as u32).filter(|f| !c.is_identity(f)).collect()
}

/// Plants one defect into explicit tables.
pub fn plant(mut t: TableDoctrine, defect: &str) -> Result<TableDoctrine, FixtureError> {
    let inapplicable = |why: &str| FixtureError::Inapplicable(format!("cannot plant {defect}: {why}"));
    match defect {
        "associativity" => {
            let c = t.category().clone();
            // the first composite g . f whose hom-set has another member
            for (g, f, h) in c.composition_triples() {
                if c.is_identity(&g) || c.is_identity(&f) {
                    continue;
                }
                if let Some(other) = c.hom(&c.dom(&h), &c.cod(&h)).into_iter().find(|&k| k != h) {
                    let mut cat = c.clone();
                    cat.set_composite(g, f, other);
                    return Ok(t.with_category(cat));
                }
            }
            Err(inapplicable("no composite can be changed"))
        }
        "reindex" => {
            for f in non_identities(&t) {
                let (a, b) = (t.dom(&f), t.cod(&f));
                let (na, nb) = (t.lattice(a).size() as u32, t.lattice(b).size() as u32);
                if na < 2 || nb < 2 {
                    continue;
                }
                let top = t.lattice(b).top();
                let old = t.reindex_table(f)[top as usize];
                t.set_reindex_entry(f, top, (old + 1) % na);
                return Ok(t);
            }
            Err(inapplicable("no morphism between nontrivial fibers"))
        }
        "forall" => {
            let fs: Vec<u32> = t.forall_tables().keys().copied().collect();
            if fs.is_empty() {
                return Err(inapplicable("no forall tables"));
            }
            for f in fs {
                let table = t.exists_table(f).to_vec();
                t = t.with_forall(f, table);
            }
            Ok(t)
        }
        "membership" => {
            let ws: Vec<_> = t.power_objects().cloned().collect();
            for w in &ws {
                let Some(prod) = t.product(&w.x, &w.px) else { continue };
                let top = t.top(&prod.object);
                if w.mem != top {
                    t.set_power_membership(w.x, top);
                    return Ok(t);
                }
            }
            Err(inapplicable("no power object with membership below top"))
        }
        "nucleus" => {
            // j(1/2) = 0 on the first 3-chain fiber
            let found = t.lattices().find(|(_, f)| {
                f.heyting().is_some_and(|h| h.size() == 3 && (0..3).all(|i| (0..3).all(|j| h.leq(i, j) || h.leq(j, i))))
            });
            let Some((name, fiber)) = found else { return Err(inapplicable("no 3-chain fiber")) };
            let h = fiber.heyting().expect("found a Heyting fiber").clone();
            let mid = h.elements().find(|&x| x != h.top() && x != h.bottom()).expect("3 elements");
            let map = h.elements().map(|x| if x == mid { h.bottom() } else { x }).collect();
            let name = name.to_string();
            Ok(t.with_nucleus(name, "j", Nucleus::new(&h, map).expect("values in range")))
        }
        other => Err(FixtureError::UnknownDefect(other.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_generates() {
        for name in FIXTURES {
            let spec = FixtureSpec::new(name).sizes(&[1, 2]);
            let file = gen_fixture(&spec).unwrap();
            assert_eq!(file.generator.as_ref(), Some(&spec));
            assert_eq!(DoctrineFile::parse(&file.to_json()).unwrap(), file);
        }
    }

    #[test]
    fn bounds_and_names() {
        assert!(matches!(generate(&FixtureSpec::new("nope")), Err(FixtureError::Unknown(_))));
        assert!(matches!(generate(&FixtureSpec::new("finset-sub").sizes(&[9])), Err(FixtureError::Bounds(_))));
        assert!(matches!(
            generate(&FixtureSpec::new("localic").algebra("klein")),
            Err(FixtureError::UnknownAlgebra(_))
        ));
    }

    #[test]
    fn per_counts() {
        let g = generate(&FixtureSpec::new("per").algebra("chain3").sizes(&[1])).unwrap();
        assert_eq!(g.object_names().len(), 3);
    }
}
