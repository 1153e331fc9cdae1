use std::collections::{HashMap, HashSet};

use crate::doctrine::{Doctrine, Fiber, PowerObject, TableDoctrine, TableError};
use crate::fincat::{FiniteCategory, MorphismInfo, ProductWitness, PullbackWitness};
use crate::lattice::{FiniteHeytingAlgebra, FiniteMeetSemilattice};

/// Which declared witness blocks to write alongside the tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaterializeOptions {
    pub exists: bool,
    pub comprehensions: bool,
    pub first_order: bool,
    pub power_objects: bool,
    pub pullbacks: bool,
}

impl Default for MaterializeOptions {
    fn default() -> Self {
        Self { exists: true, comprehensions: true, first_order: true, power_objects: true, pullbacks: true }
    }
}

/// Writes the full subcategory on `objects` and the restriction of `d` to it
/// as explicit tables. Products, pullbacks, comprehensions and power objects
/// are kept when they land inside the chosen objects.
pub fn materialize<D: Doctrine>(
    d: &D,
    objects: &[D::Obj],
    opts: MaterializeOptions,
) -> Result<TableDoctrine, TableError> {
    let obj_id: HashMap<D::Obj, u32> = objects.iter().enumerate().map(|(i, a)| (a.clone(), i as u32)).collect();
    let mut morphisms: Vec<D::Mor> = Vec::new();
    for a in objects {
        for b in objects {
            morphisms.extend(d.hom(a, b));
        }
    }
    let mor_id: HashMap<D::Mor, u32> = morphisms.iter().enumerate().map(|(i, f)| (f.clone(), i as u32)).collect();
    let rendered: Vec<String> = morphisms.iter().map(|f| d.render_mor(f)).collect();
    let distinct = rendered.iter().collect::<HashSet<_>>().len() == rendered.len();
    let infos: Vec<MorphismInfo> = morphisms
        .iter()
        .zip(rendered)
        .map(|(f, r)| {
            let (a, b) = (d.dom(f), d.cod(f));
            let name = if distinct { r } else { format!("{r}:{}->{}", d.render_obj(&a), d.render_obj(&b)) };
            MorphismInfo { name, dom: obj_id[&a], cod: obj_id[&b] }
        })
        .collect();
    let identities: Vec<u32> = objects.iter().map(|a| mor_id[&d.identity(a)]).collect();

    let mut by_dom: HashMap<u32, Vec<u32>> = HashMap::new();
    for (i, m) in infos.iter().enumerate() {
        by_dom.entry(m.dom).or_default().push(i as u32);
    }
    let mut composition = Vec::new();
    for (fi, f) in morphisms.iter().enumerate() {
        for &gi in by_dom.get(&infos[fi].cod).into_iter().flatten() {
            let h = d.compose(&morphisms[gi as usize], f);
            composition.push((gi, fi as u32, mor_id[&h]));
        }
    }
    let names: Vec<String> = objects.iter().map(|a| d.render_obj(a)).collect();
    let mut cat = FiniteCategory::new(names, infos, identities, &composition)?;

    if let Some(t) = d.terminal().and_then(|t| obj_id.get(&t).copied()) {
        let to: Vec<u32> = objects.iter().map(|a| mor_id[&d.to_terminal(a).expect("terminal exists")]).collect();
        cat.set_terminal(t, to)?;
    }
    for a in objects {
        for b in objects {
            let Some(w) = d.product(a, b) else { continue };
            let Some(&o) = obj_id.get(&w.object) else { continue };
            cat.add_product(ProductWitness {
                left: obj_id[a],
                right: obj_id[b],
                object: o,
                p1: mor_id[&w.p1],
                p2: mor_id[&w.p2],
            })?;
        }
    }
    if opts.pullbacks {
        let mut by_cod: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, f) in morphisms.iter().enumerate() {
            by_cod.entry(obj_id[&d.cod(f)]).or_default().push(i);
        }
        let mut cospans: Vec<(usize, usize)> =
            by_cod.values().flat_map(|fs| fs.iter().flat_map(move |&f| fs.iter().map(move |&k| (f, k)))).collect();
        cospans.sort_unstable();
        for (f, k) in cospans {
            let w = d.pullback(&morphisms[f], &morphisms[k]);
            match w.filter(|w| obj_id.contains_key(&w.apex)) {
                Some(w) => cat.add_pullback(PullbackWitness {
                    f: f as u32,
                    k: k as u32,
                    apex: obj_id[&w.apex],
                    top: mor_id[&w.top],
                    left: mor_id[&w.left],
                })?,
                None => cat.set_pullback_absent(f as u32, k as u32),
            }
        }
    }

    let fibers: Vec<Vec<D::Elem>> = objects.iter().map(|a| d.fiber(a)).collect();
    let index: Vec<HashMap<&D::Elem, u32>> =
        fibers.iter().map(|xs| xs.iter().enumerate().map(|(i, x)| (x, i as u32)).collect()).collect();
    let mut lattices = Vec::new();
    for (ai, a) in objects.iter().enumerate() {
        let xs = &fibers[ai];
        let n = xs.len();
        let idx = &index[ai];
        let leq = (0..n * n).map(|i| d.leq(a, &xs[i / n], &xs[i % n])).collect();
        let meet = (0..n * n).map(|i| idx[&d.meet(a, &xs[i / n], &xs[i % n])]).collect();
        let top = idx[&d.top(a)];
        let names = xs.iter().map(|x| d.render_elem(a, x)).collect();
        let base = FiniteMeetSemilattice::from_tables(n, leq, meet, top)?.with_names(names);
        let fiber = match heyting_tables(d, a, xs, idx, &base) {
            Some((join, bottom, imp)) if opts.first_order => {
                Fiber::Heyting(FiniteHeytingAlgebra::from_tables(base, join, bottom, imp)?)
            }
            _ => Fiber::Meet(base),
        };
        lattices.push((format!("P({})", d.render_obj(a)), fiber));
    }
    let reindex: Vec<Vec<u32>> = morphisms
        .iter()
        .map(|f| {
            let (a, b) = (obj_id[&d.dom(f)] as usize, obj_id[&d.cod(f)] as usize);
            fibers[b].iter().map(|y| index[a][&d.reindex(f, y)]).collect()
        })
        .collect();
    let fiber_of = (0..objects.len()).collect();
    let mut t = TableDoctrine::new(cat, lattices, fiber_of, reindex)?;

    for (fi, f) in morphisms.iter().enumerate() {
        let (a, b) = (obj_id[&d.dom(f)] as usize, obj_id[&d.cod(f)] as usize);
        if opts.exists {
            let table = fibers[a].iter().map(|x| index[b][&d.exists(f, x)]).collect();
            t = t.with_declared_exists(fi as u32, table);
        }
        if opts.first_order {
            let table: Option<Vec<u32>> =
                fibers[a].iter().map(|x| d.forall(f, x).and_then(|y| index[b].get(&y).copied())).collect();
            if let Some(table) = table {
                t = t.with_forall(fi as u32, table);
            }
        }
    }
    if opts.comprehensions {
        for (ai, a) in objects.iter().enumerate() {
            for (xi, x) in fibers[ai].iter().enumerate() {
                let m = d.comprehension(a, x).and_then(|m| mor_id.get(&m).copied());
                if let Some(m) = m {
                    t = t.with_comprehension(ai as u32, xi as u32, m);
                }
            }
        }
    }
    if opts.power_objects {
        for (ai, a) in objects.iter().enumerate() {
            let Some(w) = d.power_object(a) else { continue };
            let Some(&px) = obj_id.get(&w.px) else { continue };
            let Some(prod) = d.product(a, &w.px) else { continue };
            let Some(&pi) = obj_id.get(&prod.object) else { continue };
            let mem = index[pi as usize][&w.mem];
            t = t.with_power_object(PowerObject { x: ai as u32, px, mem });
        }
    }
    Ok(t)
}

type HeytingTables = (Vec<u32>, u32, Vec<u32>);

fn heyting_tables<D: Doctrine>(
    d: &D,
    a: &D::Obj,
    xs: &[D::Elem],
    idx: &HashMap<&D::Elem, u32>,
    base: &FiniteMeetSemilattice,
) -> Option<HeytingTables> {
    let n = xs.len();
    let mut imp = Vec::with_capacity(n * n);
    for x in xs {
        for y in xs {
            imp.push(*idx.get(&d.implies(a, x, y)?)?);
        }
    }
    let bottom = base.meet_all(base.elements());
    let mut join = Vec::with_capacity(n * n);
    for x in base.elements() {
        for y in base.elements() {
            join.push(base.meet_all(base.elements().filter(|&z| base.leq(x, z) && base.leq(y, z))));
        }
    }
    Some((join, bottom, imp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::validate_category;
    use crate::fixtures::LocalicDoctrine;

    #[test]
    fn finset_skeleton_has_305_morphisms() {
        let d = LocalicDoctrine::finset_sub(vec![0, 1, 2, 4]);
        let t = materialize(&d, &[0, 1, 2, 4], MaterializeOptions::default()).unwrap();
        assert_eq!(t.category().morphisms().len(), 305);
        assert!(validate_category(t.category()).is_ok());
        assert_eq!(t.check_declared_exists().violations.len(), 0);
    }
}
