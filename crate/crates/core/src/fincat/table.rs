use std::collections::{BTreeMap, HashMap};

use super::{search_pullback, Category, FincatError, Product, ProductWitness, Pullback, PullbackWitness};

const UNDEFINED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MorphismInfo {
    pub name: String,
    pub dom: u32,
    pub cod: u32,
}

/// A category given by explicit tables. Objects and morphisms are dense ids;
/// composition is a partial table defined exactly on composable pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    morphisms: Vec<MorphismInfo>,
    identities: Vec<u32>,
    compose: Vec<u32>,
    homs: HashMap<(u32, u32), Vec<u32>>,
    terminal: Option<(u32, Vec<u32>)>,
    products: BTreeMap<(u32, u32), ProductWitness<u32, u32>>,
    pullbacks: BTreeMap<(u32, u32), Option<PullbackWitness<u32, u32>>>,
}

impl FiniteCategory {
    /// Builds the category and checks referential integrity and totality of
    /// composition on composable pairs. The category laws themselves are
    /// checked by [`super::validate_category`].
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<MorphismInfo>,
        identities: Vec<u32>,
        composition: &[(u32, u32, u32)],
    ) -> Result<Self, FincatError> {
        let n = objects.len() as u32;
        let m = morphisms.len();
        for f in &morphisms {
            if f.dom >= n || f.cod >= n {
                return Err(FincatError::Malformed(format!("morphism {} has unknown endpoint", f.name)));
            }
        }
        if identities.len() != objects.len() {
            return Err(FincatError::Malformed("one identity per object required".into()));
        }
        for (a, &i) in identities.iter().enumerate() {
            let ok = morphisms.get(i as usize).is_some_and(|f| f.dom == a as u32 && f.cod == a as u32);
            if !ok {
                return Err(FincatError::Malformed(format!("bad identity for object {}", objects[a])));
            }
        }
        let mut compose = vec![UNDEFINED; m * m];
        for &(g, f, h) in composition {
            let (Some(gi), Some(fi), Some(hi)) =
                (morphisms.get(g as usize), morphisms.get(f as usize), morphisms.get(h as usize))
            else {
                return Err(FincatError::Malformed(format!("composition entry ({g}, {f}, {h}) out of range")));
            };
            if fi.cod != gi.dom {
                return Err(FincatError::Malformed(format!(
                    "composition entry for non-composable ({}, {})",
                    gi.name, fi.name
                )));
            }
            if hi.dom != fi.dom || hi.cod != gi.cod {
                return Err(FincatError::Malformed(format!(
                    "composite {} of ({}, {}) has the wrong type",
                    hi.name, gi.name, fi.name
                )));
            }
            compose[g as usize * m + f as usize] = h;
        }
        for (gi, g) in morphisms.iter().enumerate() {
            for (fi, f) in morphisms.iter().enumerate() {
                if f.cod == g.dom && compose[gi * m + fi] == UNDEFINED {
                    return Err(FincatError::CompositionNotTotal { g: g.name.clone(), f: f.name.clone() });
                }
            }
        }
        let mut homs: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        for a in 0..n {
            for b in 0..n {
                homs.insert((a, b), vec![]);
            }
        }
        for (i, f) in morphisms.iter().enumerate() {
            homs.get_mut(&(f.dom, f.cod)).expect("all pairs present").push(i as u32);
        }
        Ok(Self {
            objects,
            morphisms,
            identities,
            compose,
            homs,
            terminal: None,
            products: BTreeMap::new(),
            pullbacks: BTreeMap::new(),
        })
    }

    /// The discrete category on the given object names.
    pub fn discrete(names: &[&str]) -> Self {
        let objects: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let morphisms = names
            .iter()
            .enumerate()
            .map(|(i, s)| MorphismInfo { name: format!("id_{s}"), dom: i as u32, cod: i as u32 })
            .collect();
        let ids: Vec<u32> = (0..names.len() as u32).collect();
        let comp: Vec<(u32, u32, u32)> = ids.iter().map(|&i| (i, i, i)).collect();
        Self::new(objects, morphisms, ids, &comp).expect("discrete category is well-formed")
    }

    pub fn set_terminal(&mut self, object: u32, to_terminal: Vec<u32>) -> Result<(), FincatError> {
        if to_terminal.len() != self.objects.len() {
            return Err(FincatError::Malformed("to_terminal must cover every object".into()));
        }
        for (a, &t) in to_terminal.iter().enumerate() {
            let ok = self.morphisms.get(t as usize).is_some_and(|f| f.dom == a as u32 && f.cod == object);
            if !ok {
                return Err(FincatError::Malformed(format!(
                    "to_terminal entry for {} has the wrong type",
                    self.objects[a]
                )));
            }
        }
        self.terminal = Some((object, to_terminal));
        Ok(())
    }

    pub fn add_product(&mut self, w: ProductWitness<u32, u32>) -> Result<(), FincatError> {
        let ok = |m: u32, d: u32, c: u32| self.morphisms.get(m as usize).is_some_and(|f| f.dom == d && f.cod == c);
        if !ok(w.p1, w.object, w.left) || !ok(w.p2, w.object, w.right) {
            return Err(FincatError::Malformed(format!(
                "product witness for ({}, {}) has mistyped projections",
                self.obj_name(w.left),
                self.obj_name(w.right)
            )));
        }
        self.products.insert((w.left, w.right), w);
        Ok(())
    }

    pub fn add_pullback(&mut self, w: PullbackWitness<u32, u32>) -> Result<(), FincatError> {
        let info = |m: u32| self.morphisms.get(m as usize);
        let typed = match (info(w.f), info(w.k), info(w.top), info(w.left)) {
            (Some(f), Some(k), Some(t), Some(l)) => {
                f.cod == k.cod && t.dom == w.apex && l.dom == w.apex && t.cod == f.dom && l.cod == k.dom
            }
            _ => false,
        };
        if !typed {
            return Err(FincatError::Malformed("mistyped pullback witness".into()));
        }
        self.pullbacks.insert((w.f, w.k), Some(w));
        Ok(())
    }

    /// Records that the cospan `(f, k)` has no pullback.
    pub fn set_pullback_absent(&mut self, f: u32, k: u32) {
        self.pullbacks.insert((f, k), None);
    }

    /// Whether the pullback of `(f, k)` is cached, present or absent.
    pub fn pullback_cached(&self, f: u32, k: u32) -> bool {
        self.pullbacks.contains_key(&(f, k))
    }

    /// Searches and caches the pullback of every cospan.
    pub fn precompute_pullbacks(&mut self) {
        let m = self.morphisms.len() as u32;
        let mut found = BTreeMap::new();
        for f in 0..m {
            for k in 0..m {
                if self.morphisms[f as usize].cod != self.morphisms[k as usize].cod {
                    continue;
                }
                let w = match self.pullbacks.get(&(f, k)) {
                    Some(w) => w.clone(),
                    None => search_pullback(self, &f, &k),
                };
                found.insert((f, k), w);
            }
        }
        self.pullbacks = found;
    }

    /// Whether every cospan has a cached verdict.
    pub fn pullbacks_exhaustive(&self) -> bool {
        let m = self.morphisms.len() as u32;
        (0..m).all(|f| {
            (0..m).all(|k| {
                self.morphisms[f as usize].cod != self.morphisms[k as usize].cod || self.pullbacks.contains_key(&(f, k))
            })
        })
    }

    /// Records every uncached cospan as having no pullback.
    pub fn mark_uncached_pullbacks_absent(&mut self) {
        let m = self.morphisms.len() as u32;
        for f in 0..m {
            for k in 0..m {
                if self.morphisms[f as usize].cod == self.morphisms[k as usize].cod {
                    self.pullbacks.entry((f, k)).or_insert(None);
                }
            }
        }
    }

    /// Cached pullbacks that exist.
    pub fn cached_pullbacks(&self) -> impl Iterator<Item = &PullbackWitness<u32, u32>> {
        self.pullbacks.values().flatten()
    }

    pub fn products(&self) -> impl Iterator<Item = &ProductWitness<u32, u32>> {
        self.products.values()
    }

    pub fn terminal_witness(&self) -> Option<(u32, &[u32])> {
        self.terminal.as_ref().map(|(t, v)| (*t, v.as_slice()))
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphisms(&self) -> &[MorphismInfo] {
        &self.morphisms
    }

    pub fn identities(&self) -> &[u32] {
        &self.identities
    }

    pub fn obj_name(&self, a: u32) -> &str {
        &self.objects[a as usize]
    }

    pub fn mor_name(&self, f: u32) -> &str {
        &self.morphisms[f as usize].name
    }

    pub fn object_id(&self, name: &str) -> Option<u32> {
        self.objects.iter().position(|o| o == name).map(|i| i as u32)
    }

    pub fn morphism_id(&self, name: &str) -> Option<u32> {
        self.morphisms.iter().position(|f| f.name == name).map(|i| i as u32)
    }

    /// All defined composites as `(g, f, g . f)`.
    pub fn composition_triples(&self) -> Vec<(u32, u32, u32)> {
        let m = self.morphisms.len();
        let mut out = Vec::new();
        for g in 0..m {
            for f in 0..m {
                let h = self.compose[g * m + f];
                if h != UNDEFINED {
                    out.push((g as u32, f as u32, h));
                }
            }
        }
        out
    }

    /// Overwrites one composite; used to plant defects.
    pub fn set_composite(&mut self, g: u32, f: u32, h: u32) {
        let m = self.morphisms.len();
        self.compose[g as usize * m + f as usize] = h;
    }
}

impl Category for FiniteCategory {
    type Obj = u32;
    type Mor = u32;

    fn dom(&self, f: &u32) -> u32 {
        self.morphisms[*f as usize].dom
    }

    fn cod(&self, f: &u32) -> u32 {
        self.morphisms[*f as usize].cod
    }

    fn identity(&self, a: &u32) -> u32 {
        self.identities[*a as usize]
    }

    fn compose(&self, g: &u32, f: &u32) -> u32 {
        let h = self.compose[*g as usize * self.morphisms.len() + *f as usize];
        assert!(h != UNDEFINED, "composing non-composable morphisms {g} and {f}");
        h
    }

    fn universe(&self) -> Vec<u32> {
        (0..self.objects.len() as u32).collect()
    }

    fn hom_cost(&self, a: &u32, b: &u32) -> u128 {
        self.homs.get(&(*a, *b)).map_or(0, |h| h.len() as u128)
    }

    fn hom(&self, a: &u32, b: &u32) -> Vec<u32> {
        self.homs.get(&(*a, *b)).cloned().unwrap_or_default()
    }

    fn terminal(&self) -> Option<u32> {
        self.terminal.as_ref().map(|t| t.0)
    }

    fn to_terminal(&self, a: &u32) -> Option<u32> {
        self.terminal.as_ref().map(|t| t.1[*a as usize])
    }

    fn product(&self, a: &u32, b: &u32) -> Option<Product<Self>> {
        self.products.get(&(*a, *b)).cloned()
    }

    fn pullback(&self, f: &u32, k: &u32) -> Option<Pullback<Self>> {
        match self.pullbacks.get(&(*f, *k)) {
            Some(w) => w.clone(),
            None => search_pullback(self, f, k),
        }
    }

    fn render_obj(&self, a: &u32) -> String {
        self.objects[*a as usize].clone()
    }

    fn render_mor(&self, f: &u32) -> String {
        self.morphisms[*f as usize].name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::validate_category;
    use crate::report::Law;

    fn two_arrows() -> FiniteCategory {
        // a --e--> b --f--> c --g--> d with all composites
        let objects = ["a", "b", "c", "d"].map(String::from).to_vec();
        let mut morphisms: Vec<MorphismInfo> =
            (0..4).map(|i| MorphismInfo { name: format!("id{i}"), dom: i, cod: i }).collect();
        for (name, d, c) in [("e", 0, 1), ("f", 1, 2), ("g", 2, 3), ("fe", 0, 2), ("gf", 1, 3), ("gfe", 0, 3)] {
            morphisms.push(MorphismInfo { name: name.into(), dom: d, cod: c });
        }
        let mut comp = vec![];
        for (i, m) in morphisms.iter().enumerate() {
            comp.push((m.cod, i as u32, i as u32));
            comp.push((i as u32, m.dom, i as u32));
        }
        comp.dedup();
        comp.extend([(5, 4, 7), (6, 5, 8), (6, 7, 9), (8, 4, 9)]);
        comp.sort();
        comp.dedup();
        FiniteCategory::new(objects, morphisms, vec![0, 1, 2, 3], &comp).unwrap()
    }

    #[test]
    fn single_object_category_is_valid() {
        assert!(validate_category(&FiniteCategory::discrete(&["*"])).is_ok());
    }

    #[test]
    fn chain_category_is_valid() {
        assert!(validate_category(&two_arrows()).is_ok());
    }

    #[test]
    fn planted_associativity_defect_is_found() {
        let c = two_arrows();
        let mut morphisms = c.morphisms().to_vec();
        morphisms.push(MorphismInfo { name: "gfe2".into(), dom: 0, cod: 3 });
        let mut comp = c.composition_triples();
        for t in &mut comp {
            if (t.0, t.1) == (8, 4) {
                t.2 = 10;
            }
        }
        comp.extend([(3, 10, 10), (10, 0, 10)]);
        let c = FiniteCategory::new(c.objects().to_vec(), morphisms, vec![0, 1, 2, 3], &comp).unwrap();
        let r = validate_category(&c);
        let v: Vec<_> = r.violations_of(Law::Associativity).collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].at, vec!["e".to_string(), "f".to_string(), "g".to_string()]);
    }

    #[test]
    fn missing_composite_is_malformed() {
        let c = two_arrows();
        let comp: Vec<_> = c.composition_triples().into_iter().filter(|t| (t.0, t.1) != (5, 4)).collect();
        let err = FiniteCategory::new(c.objects().to_vec(), c.morphisms().to_vec(), vec![0, 1, 2, 3], &comp);
        assert_eq!(err, Err(FincatError::CompositionNotTotal { g: "f".into(), f: "e".into() }));
    }
}
