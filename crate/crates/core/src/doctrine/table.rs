use std::collections::BTreeMap;

use thiserror::Error;

use super::{exists_by_scan, Doctrine, PowerObject, PowerOf};
use crate::fincat::{Category, FincatError, FiniteCategory};
use crate::lattice::{FiniteHeytingAlgebra, FiniteMeetSemilattice, LatticeError, Nucleus};
use crate::report::{Law, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error(transparent)]
    Fincat(#[from] FincatError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("missing fiber for object {0}")]
    MissingFiber(String),
    #[error("missing reindexing map for morphism {0}")]
    MissingReindex(String),
    #[error("malformed doctrine: {0}")]
    Malformed(String),
}

/// A fiber lattice, with Heyting structure when the file provides it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fiber {
    Meet(FiniteMeetSemilattice),
    Heyting(FiniteHeytingAlgebra),
}

impl Fiber {
    pub fn semilattice(&self) -> &FiniteMeetSemilattice {
        match self {
            Fiber::Meet(l) => l,
            Fiber::Heyting(h) => h.base(),
        }
    }

    pub fn heyting(&self) -> Option<&FiniteHeytingAlgebra> {
        match self {
            Fiber::Meet(_) => None,
            Fiber::Heyting(h) => Some(h),
        }
    }
}

/// A doctrine given by explicit tables: one named lattice per object and one
/// reindexing map per morphism. `∃` is computed by the least-β scan when the
/// doctrine is built; declared tables are only compared against it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableDoctrine {
    cat: FiniteCategory,
    lattice_names: Vec<String>,
    lattices: Vec<Fiber>,
    fiber_of: Vec<usize>,
    reindex: Vec<Vec<u32>>,
    exists: Vec<Vec<u32>>,
    declared_exists: BTreeMap<u32, Vec<u32>>,
    forall: BTreeMap<u32, Vec<u32>>,
    comprehensions: BTreeMap<(u32, u32), u32>,
    power_objects: BTreeMap<u32, PowerObject<u32, u32>>,
    nuclei: BTreeMap<String, Vec<(String, Nucleus)>>,
}

impl TableDoctrine {
    pub fn new(
        cat: FiniteCategory,
        lattices: Vec<(String, Fiber)>,
        fiber_of: Vec<usize>,
        reindex: Vec<Vec<u32>>,
    ) -> Result<Self, TableError> {
        if fiber_of.len() != cat.objects().len() {
            let missing = cat.objects().get(fiber_of.len()).cloned().unwrap_or_default();
            return Err(TableError::MissingFiber(missing));
        }
        if let Some(bad) = fiber_of.iter().position(|&l| l >= lattices.len()) {
            return Err(TableError::MissingFiber(cat.objects()[bad].clone()));
        }
        if reindex.len() != cat.morphisms().len() {
            let missing = cat.morphisms().get(reindex.len()).map(|m| m.name.clone()).unwrap_or_default();
            return Err(TableError::MissingReindex(missing));
        }
        let (lattice_names, lattices): (Vec<_>, Vec<_>) = lattices.into_iter().unzip();
        let mut d = Self {
            cat,
            lattice_names,
            lattices,
            fiber_of,
            reindex,
            exists: vec![],
            declared_exists: BTreeMap::new(),
            forall: BTreeMap::new(),
            comprehensions: BTreeMap::new(),
            power_objects: BTreeMap::new(),
            nuclei: BTreeMap::new(),
        };
        for (i, m) in d.cat.morphisms().iter().enumerate() {
            let src = d.lattice(m.dom).size();
            let tgt = d.lattice(m.cod).size();
            let row = &d.reindex[i];
            if row.len() != tgt || row.iter().any(|&x| x as usize >= src) {
                return Err(TableError::Malformed(format!(
                    "reindexing map of {} must send each of the {tgt} elements of P({}) into P({})",
                    m.name,
                    d.cat.obj_name(m.cod),
                    d.cat.obj_name(m.dom)
                )));
            }
        }
        d.recompute_exists();
        Ok(d)
    }

    fn recompute_exists(&mut self) {
        let n = self.cat.morphisms().len() as u32;
        self.exists = (0..n)
            .map(|f| {
                let a = self.cat.morphisms()[f as usize].dom;
                self.lattice(a).elements().map(|x| exists_by_scan(self, &f, &x).0).collect()
            })
            .collect();
    }

    pub fn category(&self) -> &FiniteCategory {
        &self.cat
    }

    pub fn lattice(&self, a: u32) -> &FiniteMeetSemilattice {
        self.lattices[self.fiber_of[a as usize]].semilattice()
    }

    pub fn fiber_lattice(&self, a: u32) -> &Fiber {
        &self.lattices[self.fiber_of[a as usize]]
    }

    pub fn lattices(&self) -> impl Iterator<Item = (&str, &Fiber)> {
        self.lattice_names.iter().map(|s| s.as_str()).zip(&self.lattices)
    }

    pub fn fiber_assignment(&self) -> &[usize] {
        &self.fiber_of
    }

    pub fn reindex_table(&self, f: u32) -> &[u32] {
        &self.reindex[f as usize]
    }

    pub fn exists_table(&self, f: u32) -> &[u32] {
        &self.exists[f as usize]
    }

    pub fn declared_exists(&self) -> &BTreeMap<u32, Vec<u32>> {
        &self.declared_exists
    }

    pub fn forall_tables(&self) -> &BTreeMap<u32, Vec<u32>> {
        &self.forall
    }

    pub fn declared_comprehensions(&self) -> &BTreeMap<(u32, u32), u32> {
        &self.comprehensions
    }

    pub fn power_objects(&self) -> impl Iterator<Item = &PowerObject<u32, u32>> {
        self.power_objects.values()
    }

    /// Nuclei declared on the named lattice.
    pub fn nuclei(&self) -> &BTreeMap<String, Vec<(String, Nucleus)>> {
        &self.nuclei
    }

    pub fn with_nucleus(mut self, lattice: impl Into<String>, name: impl Into<String>, j: Nucleus) -> Self {
        self.nuclei.entry(lattice.into()).or_default().push((name.into(), j));
        self
    }

    pub fn with_declared_exists(mut self, f: u32, table: Vec<u32>) -> Self {
        self.declared_exists.insert(f, table);
        self
    }

    pub fn with_forall(mut self, f: u32, table: Vec<u32>) -> Self {
        self.forall.insert(f, table);
        self
    }

    pub fn with_comprehension(mut self, object: u32, elem: u32, m: u32) -> Self {
        self.comprehensions.insert((object, elem), m);
        self
    }

    pub fn with_power_object(mut self, w: PowerObject<u32, u32>) -> Self {
        self.power_objects.insert(w.x, w);
        self
    }

    /// Swaps in a category with the same objects and morphisms; used to plant
    /// defects.
    pub fn with_category(mut self, cat: FiniteCategory) -> Self {
        assert_eq!(cat.morphisms(), self.cat.morphisms());
        self.cat = cat;
        self.recompute_exists();
        self
    }

    /// Overwrites one reindexing entry; used to plant defects.
    pub fn set_reindex_entry(&mut self, f: u32, x: u32, y: u32) {
        self.reindex[f as usize][x as usize] = y;
        self.recompute_exists();
    }

    pub fn set_power_membership(&mut self, x: u32, mem: u32) {
        if let Some(w) = self.power_objects.get_mut(&x) {
            w.mem = mem;
        }
    }

    /// Compares every declared `∃` table with the computed adjoint.
    pub fn check_declared_exists(&self) -> ValidationReport {
        let mut r = ValidationReport::new("declared exists tables");
        for (&f, table) in &self.declared_exists {
            let a = self.cat.dom(&f);
            for (x, &y) in table.iter().enumerate() {
                let computed = self.exists[f as usize][x];
                r.check(y == computed, Law::ExistsTableDisagreement, || {
                    vec![self.cat.mor_name(f).to_string(), self.render_elem(&a, &(x as u32))]
                });
            }
        }
        r.finish()
    }
}

impl Category for TableDoctrine {
    type Obj = u32;
    type Mor = u32;

    fn dom(&self, f: &u32) -> u32 {
        self.cat.dom(f)
    }
    fn cod(&self, f: &u32) -> u32 {
        self.cat.cod(f)
    }
    fn identity(&self, a: &u32) -> u32 {
        self.cat.identity(a)
    }
    fn compose(&self, g: &u32, f: &u32) -> u32 {
        self.cat.compose(g, f)
    }
    fn universe(&self) -> Vec<u32> {
        self.cat.universe()
    }
    fn hom_cost(&self, a: &u32, b: &u32) -> u128 {
        self.cat.hom_cost(a, b)
    }
    fn hom(&self, a: &u32, b: &u32) -> Vec<u32> {
        self.cat.hom(a, b)
    }
    fn terminal(&self) -> Option<u32> {
        self.cat.terminal()
    }
    fn to_terminal(&self, a: &u32) -> Option<u32> {
        self.cat.to_terminal(a)
    }
    fn product(&self, a: &u32, b: &u32) -> Option<crate::fincat::Product<Self>> {
        self.cat.product(a, b)
    }
    fn pullback(&self, f: &u32, k: &u32) -> Option<crate::fincat::Pullback<Self>> {
        self.cat.pullback(f, k)
    }
    fn render_obj(&self, a: &u32) -> String {
        self.cat.render_obj(a)
    }
    fn render_mor(&self, f: &u32) -> String {
        self.cat.render_mor(f)
    }
}

impl Doctrine for TableDoctrine {
    type Elem = u32;

    fn top(&self, a: &u32) -> u32 {
        self.lattice(*a).top()
    }
    fn meet(&self, a: &u32, x: &u32, y: &u32) -> u32 {
        self.lattice(*a).meet(*x, *y)
    }
    fn leq(&self, a: &u32, x: &u32, y: &u32) -> bool {
        self.lattice(*a).leq(*x, *y)
    }
    fn reindex(&self, f: &u32, x: &u32) -> u32 {
        self.reindex[*f as usize][*x as usize]
    }
    fn exists(&self, f: &u32, x: &u32) -> u32 {
        match self.exists.get(*f as usize) {
            Some(t) => t[*x as usize],
            None => exists_by_scan(self, f, x).0,
        }
    }
    fn fiber_size(&self, a: &u32) -> u128 {
        self.lattice(*a).size() as u128
    }
    fn fiber(&self, a: &u32) -> Vec<u32> {
        self.lattice(*a).elements().collect()
    }
    fn render_elem(&self, a: &u32, x: &u32) -> String {
        self.lattice(*a).name(*x).to_string()
    }
    fn implies(&self, a: &u32, x: &u32, y: &u32) -> Option<u32> {
        self.fiber_lattice(*a).heyting().map(|h| h.imp(*x, *y))
    }
    fn forall(&self, f: &u32, x: &u32) -> Option<u32> {
        self.forall.get(f).map(|t| t[*x as usize])
    }
    fn comprehension(&self, a: &u32, x: &u32) -> Option<u32> {
        match self.comprehensions.get(&(*a, *x)) {
            Some(m) => Some(*m),
            None => super::find_comprehension(self, a, x),
        }
    }
    fn power_object(&self, x: &u32) -> Option<PowerOf<Self>> {
        self.power_objects.get(x).cloned()
    }
}
