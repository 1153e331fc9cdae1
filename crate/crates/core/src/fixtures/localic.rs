use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::delegate_category;
use crate::doctrine::{Doctrine, DoctrineError, PowerObject, PowerOf};
use crate::fincat::{enumerate_tuples, pow_saturating, FinSet, Func};
use crate::lattice::FiniteHeytingAlgebra;

/// Largest carrier for which power objects are synthesized.
const MAX_POWER: u128 = 1 << 24;

/// The localic doctrine `P(n) = H^n` over the skeleton of finite sets, with
/// reindexing by precomposition and `∃`, `∀` as joins and meets over fibers.
/// With `H = 2` this is the subobject doctrine of finite sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalicDoctrine {
    base: FinSet,
    h: FiniteHeytingAlgebra,
    algebra: String,
}

delegate_category!(LocalicDoctrine, base, FinSet, []);

impl LocalicDoctrine {
    pub fn new(h: FiniteHeytingAlgebra, algebra: impl Into<String>, sizes: Vec<u32>) -> Self {
        assert!(h.size() <= 256, "algebra elements are stored as bytes");
        Self { base: FinSet::new(sizes), h, algebra: algebra.into() }
    }

    /// The subobject doctrine of finite sets.
    pub fn finset_sub(sizes: Vec<u32>) -> Self {
        Self::new(FiniteHeytingAlgebra::bool2(), "bool2", sizes)
    }

    pub fn algebra(&self) -> &FiniteHeytingAlgebra {
        &self.h
    }

    pub fn algebra_name(&self) -> &str {
        &self.algebra
    }

    pub fn base(&self) -> &FinSet {
        &self.base
    }

    pub fn with_universe(&self, sizes: Vec<u32>) -> Self {
        Self { base: FinSet::new(sizes), ..self.clone() }
    }

    fn is_subsets(&self) -> bool {
        self.h.size() == 2
    }

    /// `|H|^n`, the carrier of the power object of `n`.
    pub fn power_size(&self, n: u32) -> Option<u32> {
        let s = pow_saturating(self.h.size() as u128, n);
        (s <= MAX_POWER).then_some(s as u32)
    }

    /// The tuple with lexicographic index `p` in `H^n`.
    pub fn decode(&self, n: u32, mut p: u32) -> Vec<u8> {
        let k = self.h.size() as u32;
        let mut t = vec![0u8; n as usize];
        for slot in t.iter_mut().rev() {
            *slot = (p % k) as u8;
            p /= k;
        }
        t
    }

    pub fn encode(&self, t: &[u8]) -> u32 {
        let k = self.h.size() as u32;
        t.iter().fold(0, |acc, &v| acc * k + v as u32)
    }

    pub fn constant(&self, n: u32, v: u32) -> Vec<u8> {
        vec![v as u8; n as usize]
    }

    pub fn is_crisp(&self, x: &[u8]) -> bool {
        x.iter().all(|&v| v as u32 == self.h.top() || v as u32 == self.h.bottom())
    }
}

impl Doctrine for LocalicDoctrine {
    type Elem = Vec<u8>;

    fn top(&self, a: &u32) -> Vec<u8> {
        self.constant(*a, self.h.top())
    }

    fn meet(&self, _a: &u32, x: &Vec<u8>, y: &Vec<u8>) -> Vec<u8> {
        x.iter().zip(y).map(|(&u, &v)| self.h.meet(u as u32, v as u32) as u8).collect()
    }

    fn leq(&self, _a: &u32, x: &Vec<u8>, y: &Vec<u8>) -> bool {
        x.iter().zip(y).all(|(&u, &v)| self.h.leq(u as u32, v as u32))
    }

    fn reindex(&self, f: &Func, x: &Vec<u8>) -> Vec<u8> {
        f.map.iter().map(|&i| x[i as usize]).collect()
    }

    fn exists(&self, f: &Func, x: &Vec<u8>) -> Vec<u8> {
        let mut out = vec![self.h.bottom() as u8; f.cod as usize];
        for (i, &v) in x.iter().enumerate() {
            let b = f.map[i] as usize;
            out[b] = self.h.join(out[b] as u32, v as u32) as u8;
        }
        out
    }

    fn forall(&self, f: &Func, x: &Vec<u8>) -> Option<Vec<u8>> {
        let mut out = vec![self.h.top() as u8; f.cod as usize];
        for (i, &v) in x.iter().enumerate() {
            let b = f.map[i] as usize;
            out[b] = self.h.meet(out[b] as u32, v as u32) as u8;
        }
        Some(out)
    }

    fn implies(&self, _a: &u32, x: &Vec<u8>, y: &Vec<u8>) -> Option<Vec<u8>> {
        Some(x.iter().zip(y).map(|(&u, &v)| self.h.imp(u as u32, v as u32) as u8).collect())
    }

    fn fiber_size(&self, a: &u32) -> u128 {
        pow_saturating(self.h.size() as u128, *a)
    }

    fn fiber(&self, a: &u32) -> Vec<Vec<u8>> {
        enumerate_tuples(*a as usize, self.h.size() as u32).map(|t| t.into_iter().map(|v| v as u8).collect()).collect()
    }

    fn fiber_iter<'a>(&'a self, a: &u32) -> Box<dyn Iterator<Item = Vec<u8>> + 'a> {
        Box::new(enumerate_tuples(*a as usize, self.h.size() as u32).map(|t| t.into_iter().map(|v| v as u8).collect()))
    }

    fn sample_fiber(&self, a: &u32, rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<Vec<u8>>> {
        let k = self.h.size() as u8;
        Some((0..n).map(|_| (0..*a).map(|_| rng.gen_range(0..k)).collect()).collect())
    }

    fn render_elem(&self, _a: &u32, x: &Vec<u8>) -> String {
        if self.is_subsets() {
            let members: Vec<String> =
                x.iter().enumerate().filter(|(_, &v)| v as u32 == self.h.top()).map(|(i, _)| i.to_string()).collect();
            format!("{{{}}}", members.join(","))
        } else {
            let parts: Vec<&str> = x.iter().map(|&v| self.h.name(v as u32)).collect();
            format!("({})", parts.join(", "))
        }
    }

    /// The inclusion of `{i : α(i) = ⊤}`.
    fn comprehension(&self, a: &u32, x: &Vec<u8>) -> Option<Func> {
        let members: Vec<u32> = (0..*a).filter(|&i| x[i as usize] as u32 == self.h.top()).collect();
        Some(Func::new(members.len() as u32, *a, members))
    }

    /// `P(n) = |H|^n` with `mem(i, p) = p_i`.
    fn power_object(&self, x: &u32) -> Option<PowerOf<Self>> {
        let px = self.power_size(*x)?;
        let mut mem = Vec::with_capacity((*x * px) as usize);
        let tuples: Vec<Vec<u8>> = (0..px).map(|p| self.decode(*x, p)).collect();
        for i in 0..*x {
            for t in &tuples {
                mem.push(t[i as usize]);
            }
        }
        Some(PowerObject { x: *x, px, mem })
    }

    /// `{γ}(y) = γ(-, y)`.
    fn transpose(&self, w: &PowerOf<Self>, y: &u32, gamma: &Vec<u8>) -> Result<Func, DoctrineError> {
        let map = (0..*y)
            .map(|j| {
                let column: Vec<u8> = (0..w.x).map(|i| gamma[(i * *y + j) as usize]).collect();
                self.encode(&column)
            })
            .collect();
        Ok(Func::new(*y, w.px, map))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctrine::{equality_predicate, exists_along, transpose_by_scan};
    use crate::fincat::{Category, CategoryExt};

    fn chain() -> LocalicDoctrine {
        LocalicDoctrine::new(FiniteHeytingAlgebra::chain3(), "chain3", vec![1, 2, 4])
    }

    #[test]
    fn exists_examples() {
        let d = chain();
        let f = Func::new(2, 1, vec![0, 0]);
        assert_eq!(exists_along(&d, &f, &vec![1, 0]), vec![1]);
        let id = d.identity(&2);
        assert_eq!(exists_along(&d, &id, &vec![1, 2]), vec![1, 2]);
        let s = LocalicDoctrine::finset_sub(vec![0, 1, 2, 4]);
        assert_eq!(exists_along(&s, &f, &vec![1, 0]), vec![1]);
        assert_eq!(s.render_elem(&2, &vec![1, 0]), "{0}");
        assert_eq!(d.render_elem(&2, &vec![1, 0]), "(1/2, 0)");
    }

    #[test]
    fn exists_agrees_with_scan() {
        let d = chain();
        for f in d.hom(&2, &2).into_iter().chain(d.hom(&4, &2)) {
            for x in d.fiber(&d.dom(&f)) {
                assert_eq!(d.exists(&f, &x), crate::doctrine::exists_by_scan(&d, &f, &x).0);
            }
        }
    }

    #[test]
    fn equality_is_crisp_diagonal() {
        let d = chain();
        assert_eq!(equality_predicate(&d, &2).unwrap(), vec![2, 0, 0, 2]);
        assert_eq!(equality_predicate(&d, &1).unwrap(), vec![2]);
        let s = LocalicDoctrine::finset_sub(vec![0, 1, 2, 4]);
        assert_eq!(equality_predicate(&s, &2).unwrap(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn transpose_matches_scan() {
        let d = chain().with_universe(vec![1, 2, 3]);
        let w = d.power_object(&1).unwrap();
        assert_eq!(w.px, 3);
        for gamma in d.fiber(&2) {
            let g = d.transpose(&w, &2, &gamma).unwrap();
            assert_eq!(transpose_by_scan(&d, &w, &2, &gamma).unwrap(), g);
        }
        // the transpose of membership is the identity
        let g = d.transpose(&w, &3, &w.mem).unwrap();
        assert!(d.is_identity(&g));
    }

    #[test]
    fn singleton_transpose_of_equality() {
        let s = LocalicDoctrine::finset_sub(vec![1, 2, 4]);
        let w = s.power_object(&2).unwrap();
        let g = s.transpose(&w, &2, &equality_predicate(&s, &2).unwrap()).unwrap();
        // {0} is the tuple (1, 0) with index 2, {1} is (0, 1) with index 1
        assert_eq!(g.map, vec![2, 1]);
    }
}
