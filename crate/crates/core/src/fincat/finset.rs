use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Category, FincatError, Product, ProductWitness, Pullback, PullbackWitness};

/// A function between finite cardinals `dom -> cod`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Func {
    pub dom: u32,
    pub cod: u32,
    pub map: Vec<u32>,
}

impl Func {
    pub fn new(dom: u32, cod: u32, map: Vec<u32>) -> Self {
        assert_eq!(map.len(), dom as usize, "function table length must equal domain size");
        assert!(map.iter().all(|&v| v < cod), "function value out of range");
        Self { dom, cod, map }
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.map[x as usize]
    }

    pub fn constant(dom: u32, cod: u32, v: u32) -> Self {
        Self::new(dom, cod, vec![v; dom as usize])
    }
}

/// All tuples in `0..base` of the given length, in lexicographic order.
pub fn enumerate_tuples(len: usize, base: u32) -> impl Iterator<Item = Vec<u32>> {
    let total: Option<u64> = (base as u64).checked_pow(len as u32);
    let total = if base == 0 && len == 0 { Some(1) } else { total };
    (0..total.expect("tuple enumeration overflows u64")).map(move |mut i| {
        let mut t = vec![0u32; len];
        for slot in t.iter_mut().rev() {
            *slot = (i % base as u64) as u32;
            i /= base as u64;
        }
        t
    })
}

pub(crate) fn pow_saturating(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// The category of finite cardinals and all functions between them. The
/// chosen product of `n` and `m` is `n*m` with `i |-> (i / m, i % m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinSet {
    universe: Vec<u32>,
}

impl FinSet {
    pub fn new(mut universe: Vec<u32>) -> Self {
        universe.sort_unstable();
        universe.dedup();
        Self { universe }
    }

    pub fn pairing(&self, cod_right: u32, f: &Func, g: &Func) -> Func {
        Func {
            dom: f.dom,
            cod: f.cod * cod_right,
            map: f.map.iter().zip(&g.map).map(|(a, b)| a * cod_right + b).collect(),
        }
    }
}

impl Category for FinSet {
    type Obj = u32;
    type Mor = Func;

    fn dom(&self, f: &Func) -> u32 {
        f.dom
    }

    fn cod(&self, f: &Func) -> u32 {
        f.cod
    }

    fn identity(&self, a: &u32) -> Func {
        Func { dom: *a, cod: *a, map: (0..*a).collect() }
    }

    fn compose(&self, g: &Func, f: &Func) -> Func {
        debug_assert_eq!(f.cod, g.dom);
        Func { dom: f.dom, cod: g.cod, map: f.map.iter().map(|&x| g.map[x as usize]).collect() }
    }

    fn universe(&self) -> Vec<u32> {
        self.universe.clone()
    }

    fn hom_cost(&self, a: &u32, b: &u32) -> u128 {
        pow_saturating(*b as u128, *a)
    }

    fn hom(&self, a: &u32, b: &u32) -> Vec<Func> {
        enumerate_tuples(*a as usize, *b).map(|map| Func { dom: *a, cod: *b, map }).collect()
    }

    fn sample_hom(&self, a: &u32, b: &u32, rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<Func>> {
        if *b == 0 && *a > 0 {
            return Some(vec![]);
        }
        Some((0..n).map(|_| Func { dom: *a, cod: *b, map: (0..*a).map(|_| rng.gen_range(0..*b)).collect() }).collect())
    }

    fn terminal(&self) -> Option<u32> {
        Some(1)
    }

    fn to_terminal(&self, a: &u32) -> Option<Func> {
        Some(Func::constant(*a, 1, 0))
    }

    fn product(&self, a: &u32, b: &u32) -> Option<Product<Self>> {
        let n = a * b;
        Some(ProductWitness {
            left: *a,
            right: *b,
            object: n,
            p1: Func { dom: n, cod: *a, map: (0..n).map(|i| i / b).collect() },
            p2: Func { dom: n, cod: *b, map: (0..n).map(|i| i % b).collect() },
        })
    }

    fn pair(&self, w: &Product<Self>, f: &Func, g: &Func) -> Result<Func, FincatError> {
        if f.dom != g.dom || f.cod != w.left || g.cod != w.right {
            return Err(FincatError::NoMediator { f: self.render_mor(f), g: self.render_mor(g) });
        }
        if self.product(&w.left, &w.right).as_ref() != Some(w) {
            return super::pair_by_search(self, w, f, g);
        }
        Ok(self.pairing(w.right, f, g))
    }

    /// The set-theoretic fiber product, enumerated lexicographically.
    fn pullback(&self, f: &Func, k: &Func) -> Option<Pullback<Self>> {
        if f.cod != k.cod {
            return None;
        }
        let pairs: Vec<(u32, u32)> = (0..f.dom)
            .flat_map(|x| (0..k.dom).map(move |z| (x, z)))
            .filter(|&(x, z)| f.apply(x) == k.apply(z))
            .collect();
        let n = pairs.len() as u32;
        Some(PullbackWitness {
            f: f.clone(),
            k: k.clone(),
            apex: n,
            top: Func { dom: n, cod: f.dom, map: pairs.iter().map(|p| p.0).collect() },
            left: Func { dom: n, cod: k.dom, map: pairs.iter().map(|p| p.1).collect() },
        })
    }

    fn render_obj(&self, a: &u32) -> String {
        a.to_string()
    }

    fn render_mor(&self, f: &Func) -> String {
        render_func(f)
    }
}

pub(crate) fn render_func(f: &Func) -> String {
    let body: Vec<String> = f.map.iter().map(|v| v.to_string()).collect();
    format!("{}->{}[{}]", f.dom, f.cod, body.join(""))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples_are_lexicographic() {
        let t: Vec<_> = enumerate_tuples(2, 2).collect();
        assert_eq!(t, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(enumerate_tuples(0, 0).count(), 1);
        assert_eq!(enumerate_tuples(2, 0).count(), 0);
    }

    #[test]
    fn hom_counts() {
        let c = FinSet::new(vec![0, 1, 2, 4]);
        assert_eq!(c.hom(&0, &0).len(), 1);
        assert_eq!(c.hom(&2, &0).len(), 0);
        assert_eq!(c.hom(&4, &4).len(), 256);
        assert_eq!(c.hom_cost(&4, &4), 256);
    }
}
