//! Presheaves on the walking arrow: objects are functions `x: X0 -> X1`,
//! morphisms are commuting squares, and predicates are subobjects
//! `(S0, S1)` with `x(S0) ⊆ S1`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::doctrine::{Doctrine, DoctrineError, PowerObject, PowerOf};
use crate::fincat::{
    enumerate_tuples, pow_saturating, Category, FincatError, Product, ProductWitness, Pullback, PullbackWitness,
};

/// Largest stage-1 carrier for which power objects are synthesized.
const MAX_POWER_STAGE: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowObj {
    pub n0: u32,
    pub n1: u32,
    pub x: Vec<u32>,
}

impl ArrowObj {
    pub fn new(n1: u32, x: Vec<u32>) -> Self {
        assert!(x.iter().all(|&b| b < n1));
        Self { n0: x.len() as u32, n1, x }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowMor {
    pub dom: ArrowObj,
    pub cod: ArrowObj,
    pub f0: Vec<u32>,
    pub f1: Vec<u32>,
}

/// The subobject doctrine of the arrow category on the given objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowPresheaf {
    objects: Vec<ArrowObj>,
}

impl ArrowPresheaf {
    pub fn new(mut objects: Vec<ArrowObj>) -> Self {
        objects.sort();
        objects.dedup();
        Self { objects }
    }

    /// Every `x: n0 -> n1` with both components at most `max`.
    pub fn truncated(max: u32) -> Self {
        let mut objects = Vec::new();
        for n1 in 0..=max {
            for n0 in 0..=max {
                objects.extend(enumerate_tuples(n0 as usize, n1).map(|x| ArrowObj::new(n1, x)));
            }
        }
        Self::new(objects)
    }

    pub fn with_universe(&self, objects: Vec<ArrowObj>) -> Self {
        Self::new(objects)
    }

    fn split<'a>(&self, a: &ArrowObj, s: &'a [u8]) -> (&'a [u8], &'a [u8]) {
        s.split_at(a.n0 as usize)
    }

    fn is_sub(&self, a: &ArrowObj, s: &[u8]) -> bool {
        let (s0, s1) = self.split(a, s);
        s.len() == (a.n0 + a.n1) as usize && s0.iter().zip(&a.x).all(|(&u, &b)| u <= s1[b as usize])
    }

    /// `¬¬(S0, S1) = (x⁻¹(S1), S1)`.
    pub fn double_negation(&self, a: &ArrowObj, s: &[u8]) -> Vec<u8> {
        let (_, s1) = self.split(a, s);
        a.x.iter().map(|&b| s1[b as usize]).chain(s1.iter().copied()).collect()
    }

    fn subsets_of(n: u32) -> impl Iterator<Item = Vec<u8>> {
        enumerate_tuples(n as usize, 2).map(|t| t.into_iter().map(|v| v as u8).collect())
    }

    fn mask(bits: &[u8]) -> u32 {
        bits.iter().enumerate().map(|(i, &b)| (b as u32) << i).sum()
    }

    fn pairs(&self, f: &[u32], k: &[u32], nk: u32) -> Vec<(u32, u32)> {
        (0..f.len() as u32)
            .flat_map(|a| (0..nk).map(move |z| (a, z)))
            .filter(|&(a, z)| f[a as usize] == k[z as usize])
            .collect()
    }

    /// Per-point candidates at both stages, then the squares that commute.
    fn squares(&self, a: &ArrowObj, b: &ArrowObj, c0: &[Vec<u32>], c1: &[Vec<u32>]) -> Vec<ArrowMor> {
        let mut out = Vec::new();
        for f1 in product_of(c1) {
            let per0: Vec<Vec<u32>> = c0
                .iter()
                .enumerate()
                .map(|(p, c)| c.iter().copied().filter(|&q| b.x[q as usize] == f1[a.x[p] as usize]).collect())
                .collect();
            for f0 in product_of(&per0) {
                out.push(ArrowMor { dom: a.clone(), cod: b.clone(), f0, f1: f1.clone() });
            }
        }
        out
    }
}

fn product_of(choices: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|m: Vec<u32>| {
                c.iter().map(move |&v| {
                    let mut m = m.clone();
                    m.push(v);
                    m
                })
            })
            .collect();
    }
    out
}

impl Category for ArrowPresheaf {
    type Obj = ArrowObj;
    type Mor = ArrowMor;

    fn dom(&self, f: &ArrowMor) -> ArrowObj {
        f.dom.clone()
    }

    fn cod(&self, f: &ArrowMor) -> ArrowObj {
        f.cod.clone()
    }

    fn identity(&self, a: &ArrowObj) -> ArrowMor {
        ArrowMor { dom: a.clone(), cod: a.clone(), f0: (0..a.n0).collect(), f1: (0..a.n1).collect() }
    }

    fn compose(&self, g: &ArrowMor, f: &ArrowMor) -> ArrowMor {
        ArrowMor {
            dom: f.dom.clone(),
            cod: g.cod.clone(),
            f0: f.f0.iter().map(|&i| g.f0[i as usize]).collect(),
            f1: f.f1.iter().map(|&i| g.f1[i as usize]).collect(),
        }
    }

    fn universe(&self) -> Vec<ArrowObj> {
        self.objects.clone()
    }

    fn hom_cost(&self, a: &ArrowObj, b: &ArrowObj) -> u128 {
        pow_saturating(b.n0 as u128, a.n0).saturating_mul(pow_saturating(b.n1 as u128, a.n1))
    }

    fn hom(&self, a: &ArrowObj, b: &ArrowObj) -> Vec<ArrowMor> {
        let c0 = vec![(0..b.n0).collect::<Vec<_>>(); a.n0 as usize];
        let c1 = vec![(0..b.n1).collect::<Vec<_>>(); a.n1 as usize];
        self.squares(a, b, &c0, &c1)
    }

    fn sample_hom(&self, a: &ArrowObj, b: &ArrowObj, rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<ArrowMor>> {
        if (a.n1 > 0 && b.n1 == 0) || (a.n0 > 0 && b.n0 == 0) {
            return Some(vec![]);
        }
        let mut out = Vec::new();
        for _ in 0..n * 20 {
            if out.len() == n {
                break;
            }
            let f1: Vec<u32> = (0..a.n1).map(|_| rng.gen_range(0..b.n1)).collect();
            let f0: Option<Vec<u32>> =
                a.x.iter()
                    .map(|&p| {
                        let c: Vec<u32> = (0..b.n0).filter(|&q| b.x[q as usize] == f1[p as usize]).collect();
                        (!c.is_empty()).then(|| c[rng.gen_range(0..c.len())])
                    })
                    .collect();
            if let Some(f0) = f0 {
                out.push(ArrowMor { dom: a.clone(), cod: b.clone(), f0, f1 });
            }
        }
        Some(out)
    }

    fn terminal(&self) -> Option<ArrowObj> {
        Some(ArrowObj::new(1, vec![0]))
    }

    fn to_terminal(&self, a: &ArrowObj) -> Option<ArrowMor> {
        Some(ArrowMor { dom: a.clone(), cod: self.terminal()?, f0: vec![0; a.n0 as usize], f1: vec![0; a.n1 as usize] })
    }

    fn product(&self, a: &ArrowObj, b: &ArrowObj) -> Option<Product<Self>> {
        let x = (0..a.n0 * b.n0).map(|i| a.x[(i / b.n0) as usize] * b.n1 + b.x[(i % b.n0) as usize]).collect();
        let object = ArrowObj::new(a.n1 * b.n1, x);
        let p1 = ArrowMor {
            dom: object.clone(),
            cod: a.clone(),
            f0: (0..object.n0).map(|i| i / b.n0).collect(),
            f1: (0..object.n1).map(|i| i / b.n1).collect(),
        };
        let p2 = ArrowMor {
            dom: object.clone(),
            cod: b.clone(),
            f0: (0..object.n0).map(|i| i % b.n0).collect(),
            f1: (0..object.n1).map(|i| i % b.n1).collect(),
        };
        Some(ProductWitness { left: a.clone(), right: b.clone(), object, p1, p2 })
    }

    fn pair(&self, w: &Product<Self>, f: &ArrowMor, g: &ArrowMor) -> Result<ArrowMor, FincatError> {
        let (m0, m1) = (w.right.n0, w.right.n1);
        Ok(ArrowMor {
            dom: f.dom.clone(),
            cod: w.object.clone(),
            f0: f.f0.iter().zip(&g.f0).map(|(&u, &v)| u * m0 + v).collect(),
            f1: f.f1.iter().zip(&g.f1).map(|(&u, &v)| u * m1 + v).collect(),
        })
    }

    fn pullback(&self, f: &ArrowMor, k: &ArrowMor) -> Option<Pullback<Self>> {
        let (a, z) = (&f.dom, &k.dom);
        let p0 = self.pairs(&f.f0, &k.f0, z.n0);
        let p1 = self.pairs(&f.f1, &k.f1, z.n1);
        let x = p0
            .iter()
            .map(|&(u, v)| {
                let image = (a.x[u as usize], z.x[v as usize]);
                p1.iter().position(|&q| q == image).unwrap() as u32
            })
            .collect();
        let apex = ArrowObj::new(p1.len() as u32, x);
        let top = ArrowMor {
            dom: apex.clone(),
            cod: a.clone(),
            f0: p0.iter().map(|p| p.0).collect(),
            f1: p1.iter().map(|p| p.0).collect(),
        };
        let left = ArrowMor {
            dom: apex.clone(),
            cod: z.clone(),
            f0: p0.iter().map(|p| p.1).collect(),
            f1: p1.iter().map(|p| p.1).collect(),
        };
        Some(PullbackWitness { f: f.clone(), k: k.clone(), apex, top, left })
    }

    fn lifts(&self, m: &ArrowMor, f: &ArrowMor) -> Vec<ArrowMor> {
        let (y, x) = (&f.dom, &m.dom);
        let c0: Vec<Vec<u32>> = f.f0.iter().map(|&t| (0..x.n0).filter(|&q| m.f0[q as usize] == t).collect()).collect();
        let c1: Vec<Vec<u32>> = f.f1.iter().map(|&t| (0..x.n1).filter(|&q| m.f1[q as usize] == t).collect()).collect();
        self.squares(y, x, &c0, &c1)
    }

    fn render_obj(&self, a: &ArrowObj) -> String {
        let xs: Vec<String> = a.x.iter().map(u32::to_string).collect();
        format!("{}->{}[{}]", a.n0, a.n1, xs.join(","))
    }

    fn render_mor(&self, f: &ArrowMor) -> String {
        let show = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        format!("([{}],[{}])", show(&f.f0), show(&f.f1))
    }
}

impl Doctrine for ArrowPresheaf {
    type Elem = Vec<u8>;

    fn top(&self, a: &ArrowObj) -> Vec<u8> {
        vec![1; (a.n0 + a.n1) as usize]
    }

    fn meet(&self, _a: &ArrowObj, x: &Vec<u8>, y: &Vec<u8>) -> Vec<u8> {
        x.iter().zip(y).map(|(&u, &v)| u & v).collect()
    }

    fn leq(&self, _a: &ArrowObj, x: &Vec<u8>, y: &Vec<u8>) -> bool {
        x.iter().zip(y).all(|(&u, &v)| u <= v)
    }

    fn reindex(&self, f: &ArrowMor, s: &Vec<u8>) -> Vec<u8> {
        let (s0, s1) = self.split(&f.cod, s);
        f.f0.iter().map(|&i| s0[i as usize]).chain(f.f1.iter().map(|&i| s1[i as usize])).collect()
    }

    fn exists(&self, f: &ArrowMor, s: &Vec<u8>) -> Vec<u8> {
        let b = &f.cod;
        let mut out = vec![0u8; (b.n0 + b.n1) as usize];
        let (s0, s1) = self.split(&f.dom, s);
        for (i, &v) in s0.iter().enumerate() {
            out[f.f0[i] as usize] |= v;
        }
        for (i, &v) in s1.iter().enumerate() {
            out[(b.n0 + f.f1[i]) as usize] |= v;
        }
        out
    }

    /// Stage 1 is the pointwise `∀`; stage 0 also asks that the image under
    /// `y` is in stage 1.
    fn forall(&self, f: &ArrowMor, s: &Vec<u8>) -> Option<Vec<u8>> {
        let b = &f.cod;
        let (s0, s1) = self.split(&f.dom, s);
        let mut t1 = vec![1u8; b.n1 as usize];
        for (i, &v) in s1.iter().enumerate() {
            t1[f.f1[i] as usize] &= v;
        }
        let mut t0: Vec<u8> = b.x.iter().map(|&q| t1[q as usize]).collect();
        for (i, &v) in s0.iter().enumerate() {
            t0[f.f0[i] as usize] &= v;
        }
        Some(t0.into_iter().chain(t1).collect())
    }

    fn implies(&self, a: &ArrowObj, s: &Vec<u8>, t: &Vec<u8>) -> Option<Vec<u8>> {
        let (s0, s1) = self.split(a, s);
        let (t0, t1) = self.split(a, t);
        let i1: Vec<u8> = s1.iter().zip(t1).map(|(&u, &v)| (u <= v) as u8).collect();
        let i0 = (0..a.n0 as usize).map(|p| (s0[p] <= t0[p]) as u8 & i1[a.x[p] as usize]);
        Some(i0.chain(i1.iter().copied()).collect())
    }

    fn fiber_size(&self, a: &ArrowObj) -> u128 {
        pow_saturating(2, a.n0 + a.n1)
    }

    /// Ordered by `S1` first, then `S0`, both lexicographically.
    fn fiber(&self, a: &ArrowObj) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        for s1 in Self::subsets_of(a.n1) {
            for s0 in Self::subsets_of(a.n0) {
                let s: Vec<u8> = s0.iter().chain(&s1).copied().collect();
                if self.is_sub(a, &s) {
                    out.push(s);
                }
            }
        }
        out
    }

    fn sample_fiber(&self, a: &ArrowObj, rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<Vec<u8>>> {
        Some(
            (0..n)
                .map(|_| {
                    let s1: Vec<u8> = (0..a.n1).map(|_| rng.gen_range(0..2)).collect();
                    let s0 = a.x.iter().map(|&b| rng.gen_range(0..2u8) & s1[b as usize]);
                    s0.chain(s1.iter().copied()).collect()
                })
                .collect(),
        )
    }

    fn render_elem(&self, a: &ArrowObj, s: &Vec<u8>) -> String {
        let (s0, s1) = self.split(a, s);
        let members = |bits: &[u8]| {
            let m: Vec<String> = bits.iter().enumerate().filter(|(_, &v)| v == 1).map(|(i, _)| i.to_string()).collect();
            format!("{{{}}}", m.join(","))
        };
        format!("({}, {})", members(s0), members(s1))
    }

    fn comprehension(&self, a: &ArrowObj, s: &Vec<u8>) -> Option<ArrowMor> {
        if !self.is_sub(a, s) {
            return None;
        }
        let (s0, s1) = self.split(a, s);
        let keep = |bits: &[u8]| -> Vec<u32> { (0..bits.len() as u32).filter(|&i| bits[i as usize] == 1).collect() };
        let (f0, f1) = (keep(s0), keep(s1));
        let x = f0.iter().map(|&p| f1.iter().position(|&q| q == a.x[p as usize]).unwrap() as u32).collect();
        let dom = ArrowObj::new(f1.len() as u32, x);
        Some(ArrowMor { dom, cod: a.clone(), f0, f1 })
    }

    /// Stage 0 carries the subobjects of `X`, stage 1 the subsets of `X1`,
    /// and the arrow forgets `S0`.
    fn power_object(&self, a: &ArrowObj) -> Option<PowerOf<Self>> {
        if a.n1 > MAX_POWER_STAGE {
            return None;
        }
        let subs = self.fiber(a);
        let k1 = 1u32 << a.n1;
        let px = ArrowObj::new(k1, subs.iter().map(|s| Self::mask(&s[a.n0 as usize..])).collect());
        let k0 = px.n0 as usize;
        let mut mem = Vec::with_capacity(a.n0 as usize * k0 + (a.n1 * k1) as usize);
        for p in 0..a.n0 as usize {
            mem.extend(subs.iter().map(|s| s[p]));
        }
        for b in 0..a.n1 {
            mem.extend((0..k1).map(|t| ((t >> b) & 1) as u8));
        }
        Some(PowerObject { x: a.clone(), px, mem })
    }

    fn transpose(&self, w: &PowerOf<Self>, y: &ArrowObj, gamma: &Vec<u8>) -> Result<ArrowMor, DoctrineError> {
        let a = &w.x;
        let xy = self.product(a, y).expect("products exist").object;
        if gamma.len() != (xy.n0 + xy.n1) as usize || !self.is_sub(&xy, gamma) {
            return Err(DoctrineError::NoSolution(self.render_elem(&xy, gamma)));
        }
        let (g0, g1) = self.split(&xy, gamma);
        let column1 = |d: u32| -> Vec<u8> { (0..a.n1).map(|b| g1[(b * y.n1 + d) as usize]).collect() };
        let f1 = (0..y.n1).map(|d| Self::mask(&column1(d))).collect();
        let subs = self.fiber(a);
        let f0 = (0..y.n0)
            .map(|c| {
                let s: Vec<u8> =
                    (0..a.n0).map(|p| g0[(p * y.n0 + c) as usize]).chain(column1(y.x[c as usize])).collect();
                subs.iter().position(|t| *t == s).map(|i| i as u32)
            })
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| DoctrineError::NoSolution(self.render_elem(&xy, gamma)))?;
        Ok(ArrowMor { dom: y.clone(), cod: w.px.clone(), f0, f1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctrine::{check_existential_laws, check_first_order, transpose_by_scan, validate_doctrine};
    use crate::fincat::validate_category;
    use crate::report::Budget;

    #[test]
    fn truncated_arrow_category() {
        let d = ArrowPresheaf::truncated(2);
        assert_eq!(d.universe().len(), 11);
        assert!(validate_category(&d).is_ok());
    }

    #[test]
    fn fibers_are_closed_pairs() {
        let d = ArrowPresheaf::truncated(2);
        let a = ArrowObj::new(1, vec![0, 0]);
        // S1 empty forces S0 empty; S1 full allows any S0
        assert_eq!(d.fiber(&a).len(), 1 + 4);
        assert_eq!(d.double_negation(&a, &[1, 0, 1]), vec![1, 1, 1]);
    }

    #[test]
    fn laws_on_small_objects() {
        let d = ArrowPresheaf::truncated(1);
        let objects = d.universe();
        let budget = Budget::default();
        assert!(validate_doctrine(&d, &objects, &budget).is_ok());
        assert!(check_existential_laws(&d, &objects, &budget).is_ok());
        let fo = check_first_order(&d, &objects, &budget);
        assert!(fo.is_ok(), "{fo}");
    }

    #[test]
    fn transpose_agrees_with_scan() {
        let d = ArrowPresheaf::truncated(1);
        let a = ArrowObj::new(1, vec![0]);
        let w = d.power_object(&a).unwrap();
        assert_eq!((w.px.n0, w.px.n1), (3, 2));
        for y in d.universe() {
            let xy = d.product(&a, &y).unwrap().object;
            for gamma in d.fiber(&xy) {
                assert_eq!(d.transpose(&w, &y, &gamma).unwrap(), transpose_by_scan(&d, &w, &y, &gamma).unwrap());
            }
        }
    }
}
