//! The `doctrina/1` file format: a UTF-8 JSON document holding a finite
//! doctrine as explicit tables. Every id is a string and every table is an
//! array of records, so files diff cleanly.
//!
//! ```json
//! {
//!   "schema": "doctrina/1",
//!   "lattices": [{ "name": "P(1)", "elements": ["{}", "{0}"], "leq": [["{}", "{}"], ...], ... }],
//!   "category": { "objects": ["1"], "morphisms": [{ "name": "[0]", "dom": "1", "cod": "1" }], ... },
//!   "fibers": [{ "object": "1", "lattice": "P(1)" }],
//!   "reindex": [{ "morphism": "[0]", "map": ["{}", "{0}"] }]
//! }
//! ```
//!
//! A reindexing record lists `f*y` for each element `y` of the codomain
//! lattice, in the order of its `elements`. Declared `exists` and `forall`
//! records list the image of each element of the domain lattice.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doctrine::{Fiber, PowerObject, TableDoctrine, TableError};
use crate::fincat::{Category, FincatError, FiniteCategory, MorphismInfo, ProductWitness, PullbackWitness};
use crate::fixtures::FixtureSpec;
use crate::lattice::{FiniteHeytingAlgebra, FiniteMeetSemilattice, LatticeError, Nucleus};

pub const SCHEMA: &str = "doctrina/1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unsupported schema {0:?}, expected {SCHEMA:?}")]
    Schema(String),
    #[error("unknown {kind} {name:?}")]
    UnknownReference { kind: &'static str, name: String },
    #[error("duplicate {kind} {name:?}")]
    Duplicate { kind: &'static str, name: String },
    #[error("malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Fincat(#[from] FincatError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeytingRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join: Option<Vec<[String; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<String>,
    #[serde(rename = "impl", default, skip_serializing_if = "Option::is_none")]
    pub imp: Option<Vec<[String; 3]>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleusRecord {
    pub name: String,
    pub map: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeRecord {
    pub name: String,
    pub elements: Vec<String>,
    pub leq: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meet: Option<Vec<[String; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heyting: Option<HeytingRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nuclei: Vec<NucleusRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismRecord {
    pub name: String,
    pub dom: String,
    pub cod: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityRecord {
    pub object: String,
    pub morphism: String,
}

/// `h = g . f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeRecord {
    pub g: String,
    pub f: String,
    pub h: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalRecord {
    pub object: String,
    /// `object -> terminal` for each object, in object order.
    pub maps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductRecord {
    pub left: String,
    pub right: String,
    pub object: String,
    pub p1: String,
    pub p2: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PullbackRecord {
    pub f: String,
    pub k: String,
    pub apex: String,
    pub top: String,
    pub left: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryRecord {
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismRecord>,
    pub identities: Vec<IdentityRecord>,
    pub composition: Vec<CompositeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<TerminalRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub products: Vec<ProductRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pullbacks: Vec<PullbackRecord>,
    /// When set, cospans without a listed pullback have none.
    #[serde(default)]
    pub pullbacks_exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberRecord {
    pub object: String,
    pub lattice: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapRecord {
    pub morphism: String,
    pub map: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComprehensionRecord {
    pub object: String,
    pub predicate: String,
    pub morphism: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerRecord {
    pub object: String,
    pub power: String,
    /// An element of the fiber over the chosen product `object x power`.
    pub membership: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoctrineFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<FixtureSpec>,
    pub lattices: Vec<LatticeRecord>,
    pub category: CategoryRecord,
    pub fibers: Vec<FiberRecord>,
    pub reindex: Vec<MapRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exists: Vec<MapRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forall: Vec<MapRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comprehensions: Vec<ComprehensionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub power_objects: Vec<PowerRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<serde_json::Value>,
}

struct Names<'a> {
    kind: &'static str,
    ids: HashMap<&'a str, u32>,
}

impl<'a> Names<'a> {
    fn new(kind: &'static str, names: impl IntoIterator<Item = &'a str>) -> Result<Self, FormatError> {
        let mut ids = HashMap::new();
        for (i, n) in names.into_iter().enumerate() {
            if ids.insert(n, i as u32).is_some() {
                return Err(FormatError::Duplicate { kind, name: n.to_string() });
            }
        }
        Ok(Self { kind, ids })
    }

    fn get(&self, name: &str) -> Result<u32, FormatError> {
        self.ids.get(name).copied().ok_or_else(|| FormatError::UnknownReference { kind: self.kind, name: name.into() })
    }

    fn all(&self, names: &[String]) -> Result<Vec<u32>, FormatError> {
        names.iter().map(|n| self.get(n)).collect()
    }
}

fn triples(n: usize, names: &Names, rows: &[[String; 3]], what: &str) -> Result<Vec<u32>, FormatError> {
    let mut table = vec![u32::MAX; n * n];
    for [a, b, c] in rows {
        table[names.get(a)? as usize * n + names.get(b)? as usize] = names.get(c)?;
    }
    if table.contains(&u32::MAX) {
        return Err(FormatError::Malformed(format!("{what} table is not total")));
    }
    Ok(table)
}

fn lattice_from_record(rec: &LatticeRecord) -> Result<Fiber, FormatError> {
    let names = Names::new("element", rec.elements.iter().map(String::as_str))?;
    let n = rec.elements.len();
    let mut leq = vec![false; n * n];
    for [a, b] in &rec.leq {
        leq[names.get(a)? as usize * n + names.get(b)? as usize] = true;
    }
    let base = match (&rec.meet, &rec.top) {
        (Some(meet), Some(top)) => {
            let meet = triples(n, &names, meet, &format!("meet of {}", rec.name))?;
            FiniteMeetSemilattice::from_tables(n, leq, meet, names.get(top)?)?
        }
        (None, _) => {
            let l = FiniteMeetSemilattice::from_order(n, leq)?;
            if let Some(top) = &rec.top {
                if names.get(top)? != l.top() {
                    return Err(FormatError::Malformed(format!("declared top of {} is not the maximum", rec.name)));
                }
            }
            l
        }
        (Some(_), None) => return Err(FormatError::Malformed(format!("meet of {} given without top", rec.name))),
    }
    .with_names(rec.elements.clone());
    let Some(h) = &rec.heyting else { return Ok(Fiber::Meet(base)) };
    let derived = FiniteHeytingAlgebra::complete(base.clone())?;
    let join = match &h.join {
        Some(rows) => triples(n, &names, rows, &format!("join of {}", rec.name))?,
        None => derived.join_table().to_vec(),
    };
    let bottom = match &h.bottom {
        Some(b) => names.get(b)?,
        None => derived.bottom(),
    };
    let imp = match &h.imp {
        Some(rows) => triples(n, &names, rows, &format!("impl of {}", rec.name))?,
        None => derived.impl_table().to_vec(),
    };
    Ok(Fiber::Heyting(FiniteHeytingAlgebra::from_tables(base, join, bottom, imp)?))
}

fn lattice_to_record(name: &str, fiber: &Fiber) -> LatticeRecord {
    let l = fiber.semilattice();
    let el = |a: u32| l.name(a).to_string();
    let n = l.size() as u32;
    let pairs = (0..n).flat_map(|a| (0..n).map(move |b| (a, b)));
    let leq = pairs.clone().filter(|&(a, b)| l.leq(a, b)).map(|(a, b)| [el(a), el(b)]).collect();
    let table = |t: &[u32]| -> Vec<[String; 3]> {
        pairs.clone().map(|(a, b)| [el(a), el(b), el(t[(a * n + b) as usize])]).collect()
    };
    let heyting = fiber.heyting().map(|h| HeytingRecord {
        join: Some(table(h.join_table())),
        bottom: Some(el(h.bottom())),
        imp: Some(table(h.impl_table())),
    });
    LatticeRecord {
        name: name.to_string(),
        elements: (0..n).map(el).collect(),
        leq,
        meet: Some(table(l.meet_table())),
        top: Some(el(l.top())),
        heyting,
        nuclei: vec![],
    }
}

impl DoctrineFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let file: Self = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
        if file.schema != SCHEMA {
            return Err(FormatError::Schema(file.schema));
        }
        Ok(file)
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("doctrine files serialize");
        s.push('\n');
        s
    }

    /// Checks referential integrity and builds the table doctrine.
    pub fn to_doctrine(&self) -> Result<TableDoctrine, FormatError> {
        let c = &self.category;
        let objects = Names::new("object", c.objects.iter().map(String::as_str))?;
        let morphisms = Names::new("morphism", c.morphisms.iter().map(|m| m.name.as_str()))?;
        let infos = c
            .morphisms
            .iter()
            .map(|m| Ok(MorphismInfo { name: m.name.clone(), dom: objects.get(&m.dom)?, cod: objects.get(&m.cod)? }))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let mut identities = vec![None; c.objects.len()];
        for r in &c.identities {
            identities[objects.get(&r.object)? as usize] = Some(morphisms.get(&r.morphism)?);
        }
        let identities = identities
            .into_iter()
            .enumerate()
            .map(|(a, i)| i.ok_or_else(|| FormatError::Malformed(format!("no identity for {}", c.objects[a]))))
            .collect::<Result<Vec<_>, _>>()?;
        let composition = c
            .composition
            .iter()
            .map(|r| Ok((morphisms.get(&r.g)?, morphisms.get(&r.f)?, morphisms.get(&r.h)?)))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let mut cat = FiniteCategory::new(c.objects.clone(), infos, identities, &composition)?;
        if let Some(t) = &c.terminal {
            cat.set_terminal(objects.get(&t.object)?, morphisms.all(&t.maps)?)?;
        }
        for p in &c.products {
            cat.add_product(ProductWitness {
                left: objects.get(&p.left)?,
                right: objects.get(&p.right)?,
                object: objects.get(&p.object)?,
                p1: morphisms.get(&p.p1)?,
                p2: morphisms.get(&p.p2)?,
            })?;
        }
        for p in &c.pullbacks {
            cat.add_pullback(PullbackWitness {
                f: morphisms.get(&p.f)?,
                k: morphisms.get(&p.k)?,
                apex: objects.get(&p.apex)?,
                top: morphisms.get(&p.top)?,
                left: morphisms.get(&p.left)?,
            })?;
        }
        if c.pullbacks_exhaustive {
            cat.mark_uncached_pullbacks_absent();
        }

        let lattice_names = Names::new("lattice", self.lattices.iter().map(|l| l.name.as_str()))?;
        let lattices = self
            .lattices
            .iter()
            .map(|r| Ok((r.name.clone(), lattice_from_record(r)?)))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let elements: Vec<Names> = self
            .lattices
            .iter()
            .map(|l| Names::new("element", l.elements.iter().map(String::as_str)))
            .collect::<Result<_, _>>()?;
        let mut fiber_of = vec![None; c.objects.len()];
        for f in &self.fibers {
            fiber_of[objects.get(&f.object)? as usize] = Some(lattice_names.get(&f.lattice)? as usize);
        }
        let fiber_of = fiber_of
            .into_iter()
            .enumerate()
            .map(|(a, l)| l.ok_or_else(|| TableError::MissingFiber(c.objects[a].clone()).into()))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let over = |a: u32| &elements[fiber_of[a as usize]];

        let mut reindex = vec![None; c.morphisms.len()];
        for r in &self.reindex {
            let f = morphisms.get(&r.morphism)?;
            reindex[f as usize] = Some(over(cat.dom(&f)).all(&r.map)?);
        }
        let reindex = reindex
            .into_iter()
            .enumerate()
            .map(|(f, t)| t.ok_or_else(|| TableError::MissingReindex(c.morphisms[f].name.clone()).into()))
            .collect::<Result<Vec<_>, FormatError>>()?;
        let mut d = TableDoctrine::new(cat, lattices, fiber_of.clone(), reindex)?;
        let cat = d.category().clone();
        for r in &self.exists {
            let f = morphisms.get(&r.morphism)?;
            d = d.with_declared_exists(f, over(cat.cod(&f)).all(&r.map)?);
        }
        for r in &self.forall {
            let f = morphisms.get(&r.morphism)?;
            d = d.with_forall(f, over(cat.cod(&f)).all(&r.map)?);
        }
        for r in &self.comprehensions {
            let a = objects.get(&r.object)?;
            d = d.with_comprehension(a, over(a).get(&r.predicate)?, morphisms.get(&r.morphism)?);
        }
        for r in &self.power_objects {
            let (x, px) = (objects.get(&r.object)?, objects.get(&r.power)?);
            let prod = cat.product(&x, &px).ok_or_else(|| {
                FormatError::Malformed(format!(
                    "power object of {} needs the product {} x {}",
                    r.object, r.object, r.power
                ))
            })?;
            let mem = over(prod.object).get(&r.membership)?;
            d = d.with_power_object(PowerObject { x, px, mem });
        }
        for (li, l) in self.lattices.iter().enumerate() {
            for n in &l.nuclei {
                let map = elements[li].all(&n.map)?;
                let size = l.elements.len();
                let h = match d.lattices().nth(li).map(|(_, f)| f) {
                    Some(Fiber::Heyting(h)) => h.clone(),
                    _ => {
                        return Err(FormatError::Malformed(format!(
                            "nucleus {} on non-Heyting lattice {}",
                            n.name, l.name
                        )))
                    }
                };
                debug_assert_eq!(h.size(), size);
                d = d.with_nucleus(&l.name, &n.name, Nucleus::new(&h, map)?);
            }
        }
        Ok(d)
    }

    /// Writes `d` back out. Ids are the rendered names of `d`.
    pub fn from_doctrine(d: &TableDoctrine, generator: Option<FixtureSpec>) -> Self {
        let cat = d.category();
        let obj = |a: u32| cat.obj_name(a).to_string();
        let mor = |f: u32| cat.mor_name(f).to_string();
        let m = cat.morphisms().len() as u32;
        let lattice_names: Vec<String> = d.lattices().map(|(n, _)| n.to_string()).collect();
        let mut lattices: Vec<LatticeRecord> = d.lattices().map(|(n, f)| lattice_to_record(n, f)).collect();
        for (ln, ns) in d.nuclei() {
            let li = lattice_names.iter().position(|n| n == ln).expect("nuclei name known lattices");
            let names = lattices[li].elements.clone();
            for (name, j) in ns {
                let map = j.map.iter().map(|&v| names[v as usize].clone()).collect();
                lattices[li].nuclei.push(NucleusRecord { name: name.clone(), map });
            }
        }
        let el = |a: u32, x: u32| d.lattice(a).name(x).to_string();
        let map_record = |f: u32, table: &[u32], target: u32| MapRecord {
            morphism: mor(f),
            map: table.iter().map(|&x| el(target, x)).collect(),
        };
        let category = CategoryRecord {
            objects: cat.objects().to_vec(),
            morphisms: cat
                .morphisms()
                .iter()
                .map(|i| MorphismRecord { name: i.name.clone(), dom: obj(i.dom), cod: obj(i.cod) })
                .collect(),
            identities: cat
                .identities()
                .iter()
                .enumerate()
                .map(|(a, &i)| IdentityRecord { object: obj(a as u32), morphism: mor(i) })
                .collect(),
            composition: cat
                .composition_triples()
                .into_iter()
                .map(|(g, f, h)| CompositeRecord { g: mor(g), f: mor(f), h: mor(h) })
                .collect(),
            terminal: cat
                .terminal_witness()
                .map(|(t, maps)| TerminalRecord { object: obj(t), maps: maps.iter().map(|&f| mor(f)).collect() }),
            products: cat
                .products()
                .map(|w| ProductRecord {
                    left: obj(w.left),
                    right: obj(w.right),
                    object: obj(w.object),
                    p1: mor(w.p1),
                    p2: mor(w.p2),
                })
                .collect(),
            pullbacks: cat
                .cached_pullbacks()
                .map(|w| PullbackRecord {
                    f: mor(w.f),
                    k: mor(w.k),
                    apex: obj(w.apex),
                    top: mor(w.top),
                    left: mor(w.left),
                })
                .collect(),
            pullbacks_exhaustive: cat.pullbacks_exhaustive(),
        };
        let fibers = (0..cat.objects().len())
            .map(|a| FiberRecord { object: obj(a as u32), lattice: lattice_names[d.fiber_assignment()[a]].clone() })
            .collect();
        let reindex = (0..m).map(|f| map_record(f, d.reindex_table(f), cat.dom(&f))).collect();
        let exists = d.declared_exists().iter().map(|(&f, t)| map_record(f, t, cat.cod(&f))).collect();
        let forall = d.forall_tables().iter().map(|(&f, t)| map_record(f, t, cat.cod(&f))).collect();
        let comprehensions = d
            .declared_comprehensions()
            .iter()
            .map(|(&(a, x), &f)| ComprehensionRecord { object: obj(a), predicate: el(a, x), morphism: mor(f) })
            .collect();
        let power_objects = d
            .power_objects()
            .filter_map(|w| {
                let prod = cat.product(&w.x, &w.px)?;
                Some(PowerRecord { object: obj(w.x), power: obj(w.px), membership: el(prod.object, w.mem) })
            })
            .collect();
        Self {
            schema: SCHEMA.to_string(),
            generator,
            lattices,
            category,
            fibers,
            reindex,
            exists,
            forall,
            comprehensions,
            power_objects,
            certificates: vec![],
        }
    }
}

/// Lattice records keyed by name, for callers that only need the lattices.
pub fn lattices_of(file: &DoctrineFile) -> Result<BTreeMap<String, Fiber>, FormatError> {
    file.lattices.iter().map(|r| Ok((r.name.clone(), lattice_from_record(r)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{materialize, LocalicDoctrine, MaterializeOptions};

    fn small() -> TableDoctrine {
        let d = LocalicDoctrine::finset_sub(vec![0, 1, 2]);
        materialize(&d, &[0, 1, 2], MaterializeOptions::default()).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let t = small();
        let file = DoctrineFile::from_doctrine(&t, None);
        let text = file.to_json();
        let back = DoctrineFile::parse(&text).unwrap();
        assert_eq!(back, file);
        let t2 = back.to_doctrine().unwrap();
        assert_eq!(t2, t);
        assert_eq!(DoctrineFile::from_doctrine(&t2, None).to_json(), text);
    }

    #[test]
    fn unknown_reference_is_reported() {
        let mut file = DoctrineFile::from_doctrine(&small(), None);
        file.fibers[0].lattice = "nowhere".into();
        let err = file.to_doctrine().unwrap_err();
        assert_eq!(err, FormatError::UnknownReference { kind: "lattice", name: "nowhere".into() });
    }

    #[test]
    fn missing_composite_is_not_total() {
        let mut file = DoctrineFile::from_doctrine(&small(), None);
        let gone = file.category.composition.pop().unwrap();
        let err = file.to_doctrine().unwrap_err().to_string();
        assert_eq!(err, format!("composition not total at ({}, {})", gone.g, gone.f));
    }

    #[test]
    fn derived_tables_may_be_omitted() {
        let mut file = DoctrineFile::from_doctrine(&small(), None);
        for l in &mut file.lattices {
            l.meet = None;
            if let Some(h) = &mut l.heyting {
                h.join = None;
                h.imp = None;
            }
        }
        assert_eq!(file.to_doctrine().unwrap(), small());
    }

    #[test]
    fn wrong_schema() {
        let text = DoctrineFile::from_doctrine(&small(), None).to_json().replace(SCHEMA, "doctrina/0");
        assert!(matches!(DoctrineFile::parse(&text), Err(FormatError::Schema(_))));
    }
}
