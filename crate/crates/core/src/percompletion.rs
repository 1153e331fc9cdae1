//! The completion of a localic doctrine `H^(-)` by partial equivalence
//! relations.
//!
//! Objects are pairs `(n, ρ)` with `ρ` a symmetric, transitive `H`-valued
//! matrix on the finite set `n`. Morphisms `(n, ρ) -> (m, σ)` are functions
//! `f` with `ρ(x,x') ≤ σ(fx, fx')`, identified when `ρ(x,x) ≤ σ(fx, gx)` for
//! every `x`; each class is stored through its canonical member, which sends
//! `x` to the least `y` with `ρ(x,x) ≤ σ(fx, y)`. The fiber over `(n, ρ)`
//! holds the strict extensional predicates: `φ(x) ≤ ρ(x,x)` and
//! `φ(x) ∧ ρ(x,y) ≤ φ(y)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::doctrine::{check_first_order, Doctrine, DoctrineError, PowerObject, PowerOf};
use crate::fincat::{
    enumerate_tuples, pow_saturating, Category, FincatError, Product, ProductWitness, Pullback, PullbackWitness,
};
use crate::fixtures::LocalicDoctrine;
use crate::lattice::FiniteHeytingAlgebra;
use crate::report::{Budget, Law, ValidationReport};
use crate::sheafify::{check_equivalences, reflector};

/// Largest power-object carrier that is synthesized.
const MAX_POWER_CARRIER: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerError {
    #[error("not a partial equivalence relation: {0}")]
    NotPer(String),
    #[error("base doctrine lacks first-order structure: {0}")]
    FirstOrderMissing(String),
    #[error("{0}")]
    TooLarge(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PerObject {
    pub n: u32,
    /// Row-major `n x n` matrix of algebra elements.
    pub rho: Vec<u8>,
}

impl PerObject {
    pub fn rel(&self, x: u32, y: u32) -> u8 {
        self.rho[(x * self.n + y) as usize]
    }

    pub fn extent(&self, x: u32) -> u8 {
        self.rel(x, x)
    }
}

pub type Per = Arc<PerObject>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PerMor {
    pub dom: Per,
    pub cod: Per,
    /// The canonical representative.
    pub map: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerDoctrine {
    h: FiniteHeytingAlgebra,
    algebra: String,
    universe: Vec<Per>,
}

impl PerDoctrine {
    pub fn new(h: FiniteHeytingAlgebra, algebra: impl Into<String>, universe: Vec<Per>) -> Self {
        assert!(h.size() <= 256, "algebra elements are stored as bytes");
        let mut universe = universe;
        universe.sort();
        universe.dedup();
        Self { h, algebra: algebra.into(), universe }
    }

    pub fn algebra(&self) -> &FiniteHeytingAlgebra {
        &self.h
    }

    pub fn algebra_name(&self) -> &str {
        &self.algebra
    }

    pub fn with_universe(&self, universe: Vec<Per>) -> Self {
        Self::new(self.h.clone(), self.algebra.clone(), universe)
    }

    fn m(&self, x: u8, y: u8) -> u8 {
        self.h.meet(x as u32, y as u32) as u8
    }

    fn j(&self, x: u8, y: u8) -> u8 {
        self.h.join(x as u32, y as u32) as u8
    }

    fn le(&self, x: u8, y: u8) -> bool {
        self.h.leq(x as u32, y as u32)
    }

    fn imp(&self, x: u8, y: u8) -> u8 {
        self.h.imp(x as u32, y as u32) as u8
    }

    fn iff(&self, x: u8, y: u8) -> u8 {
        self.m(self.imp(x, y), self.imp(y, x))
    }

    fn top_u8(&self) -> u8 {
        self.h.top() as u8
    }

    fn bottom_u8(&self) -> u8 {
        self.h.bottom() as u8
    }

    pub fn is_per(&self, n: u32, rho: &[u8]) -> bool {
        let at = |x: u32, y: u32| rho[(x * n + y) as usize];
        (0..n).all(|x| {
            (0..n).all(|y| at(x, y) == at(y, x) && (0..n).all(|z| self.le(self.m(at(x, y), at(y, z)), at(x, z))))
        })
    }

    pub fn per(&self, n: u32, rho: Vec<u8>) -> Result<Per, PerError> {
        if rho.len() != (n * n) as usize || rho.iter().any(|&v| v as usize >= self.h.size()) {
            return Err(PerError::NotPer(format!("malformed {n}x{n} matrix")));
        }
        if !self.is_per(n, &rho) {
            return Err(PerError::NotPer(self.render_rho(n, &rho)));
        }
        Ok(Arc::new(PerObject { n, rho }))
    }

    /// Every partial equivalence relation on `n`, in ascending order.
    pub fn enumerate_pers(&self, n: u32) -> Vec<Per> {
        let pairs: Vec<(u32, u32)> = (0..n).flat_map(|x| (x..n).map(move |y| (x, y))).collect();
        let mut out: Vec<Per> = enumerate_tuples(pairs.len(), self.h.size() as u32)
            .filter_map(|t| {
                let mut rho = vec![0u8; (n * n) as usize];
                for (&(x, y), &v) in pairs.iter().zip(&t) {
                    rho[(x * n + y) as usize] = v as u8;
                    rho[(y * n + x) as usize] = v as u8;
                }
                self.is_per(n, &rho).then(|| Arc::new(PerObject { n, rho }))
            })
            .collect();
        out.sort();
        out
    }

    /// The discrete object `(n, δ)` with crisp equality.
    pub fn discrete(&self, n: u32) -> Per {
        let rho = (0..n * n).map(|i| if i / n == i % n { self.top_u8() } else { self.bottom_u8() }).collect();
        Arc::new(PerObject { n, rho })
    }

    /// The least `y'` with `e ≤ σ(y, y')`.
    fn canon(&self, b: &PerObject, e: u8, y: u32) -> u32 {
        (0..b.n).find(|&z| self.le(e, b.rel(y, z))).unwrap_or(y)
    }

    fn canonical(&self, a: &Per, b: &Per, map: Vec<u32>) -> PerMor {
        let map = map.iter().enumerate().map(|(x, &y)| self.canon(b, a.extent(x as u32), y)).collect();
        PerMor { dom: a.clone(), cod: b.clone(), map }
    }

    fn is_morphism(&self, a: &PerObject, b: &PerObject, map: &[u32]) -> bool {
        (0..a.n).all(|x| (0..a.n).all(|z| self.le(a.rel(x, z), b.rel(map[x as usize], map[z as usize]))))
    }

    /// The class of the function `map`, if it is a morphism.
    pub fn morphism(&self, a: &Per, b: &Per, map: Vec<u32>) -> Option<PerMor> {
        (map.len() == a.n as usize && map.iter().all(|&y| y < b.n) && self.is_morphism(a, b, &map))
            .then(|| self.canonical(a, b, map))
    }

    /// Canonical values allowed at each point of `a` for maps into `b`.
    fn candidates(&self, a: &PerObject, b: &PerObject) -> Vec<Vec<u32>> {
        (0..a.n)
            .map(|x| {
                let e = a.extent(x);
                (0..b.n).filter(|&y| self.le(e, b.extent(y)) && self.canon(b, e, y) == y).collect()
            })
            .collect()
    }

    /// Depth-first search for the maps with values in `cand` that are
    /// morphisms `a -> b`.
    fn search(&self, a: &PerObject, b: &PerObject, cand: &[Vec<u32>]) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut map = Vec::with_capacity(a.n as usize);
        self.extend(a, b, cand, &mut map, &mut out);
        out
    }

    fn extend(&self, a: &PerObject, b: &PerObject, cand: &[Vec<u32>], map: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let x = map.len() as u32;
        if x == a.n {
            out.push(map.clone());
            return;
        }
        for &y in &cand[x as usize] {
            if (0..x).all(|z| self.le(a.rel(z, x), b.rel(map[z as usize], y))) {
                map.push(y);
                self.extend(a, b, cand, map, out);
                map.pop();
            }
        }
    }

    /// Every function `a -> b` in the class of `f`.
    pub fn class_members(&self, f: &PerMor) -> Vec<Vec<u32>> {
        let (a, b) = (&f.dom, &f.cod);
        let per_point: Vec<Vec<u32>> = (0..a.n)
            .map(|x| (0..b.n).filter(|&y| self.le(a.extent(x), b.rel(f.map[x as usize], y))).collect())
            .collect();
        let mut out = vec![vec![]];
        for vals in per_point {
            out = out
                .into_iter()
                .flat_map(|m: Vec<u32>| {
                    vals.iter().map(move |&y| {
                        let mut m = m.clone();
                        m.push(y);
                        m
                    })
                })
                .collect();
        }
        out
    }

    fn product_object(&self, a: &PerObject, b: &PerObject) -> Per {
        let (n, m) = (a.n, b.n);
        let nm = n * m;
        let rho = (0..nm * nm)
            .map(|k| {
                let (u, v) = (k / nm, k % nm);
                self.m(a.rel(u / m, v / m), b.rel(u % m, v % m))
            })
            .collect();
        Arc::new(PerObject { n: nm, rho })
    }

    fn projections(&self, a: &Per, b: &Per, p: &Per) -> (PerMor, PerMor) {
        let m = b.n;
        let p1 = self.canonical(p, a, (0..p.n).map(|k| k / m).collect());
        let p2 = self.canonical(p, b, (0..p.n).map(|k| k % m).collect());
        (p1, p2)
    }

    fn fiber_filter(&self, a: &PerObject, phi: &[u8]) -> bool {
        (0..a.n).all(|x| {
            let v = phi[x as usize];
            self.le(v, a.extent(x)) && (0..a.n).all(|y| self.le(self.m(v, a.rel(x, y)), phi[y as usize]))
        })
    }

    /// The least strict extensional predicate above `phi ∧ extent`.
    fn close(&self, a: &PerObject, phi: &[u8]) -> Vec<u8> {
        (0..a.n)
            .map(|y| {
                let v = (0..a.n).fold(self.bottom_u8(), |acc, x| self.j(acc, self.m(phi[x as usize], a.rel(x, y))));
                self.m(v, a.extent(y))
            })
            .collect()
    }

    /// `≈(φ, ψ) = ⋀_x (φ(x) ⇔ ψ(x))` on the strict predicates of `a`.
    fn power_carrier(&self, a: &Per) -> Option<(Per, Vec<Vec<u8>>)> {
        if !self.h.size().checked_pow(a.n).is_some_and(|s| s <= 1 << 20) {
            return None;
        }
        let fiber = self.fiber(a);
        if fiber.len() > MAX_POWER_CARRIER {
            return None;
        }
        let k = fiber.len() as u32;
        let rho = (0..k * k)
            .map(|i| {
                let (p, q) = (&fiber[(i / k) as usize], &fiber[(i % k) as usize]);
                p.iter().zip(q).fold(self.top_u8(), |acc, (&u, &v)| self.m(acc, self.iff(u, v)))
            })
            .collect();
        Some((Arc::new(PerObject { n: k, rho }), fiber))
    }

    pub fn render_rho(&self, n: u32, rho: &[u8]) -> String {
        let rows: Vec<String> = (0..n)
            .map(|x| {
                let row: Vec<&str> = (0..n).map(|y| self.h.name(rho[(x * n + y) as usize] as u32)).collect();
                format!("[{}]", row.join(", "))
            })
            .collect();
        format!("({}, [{}])", n, rows.join(", "))
    }
}

impl Category for PerDoctrine {
    type Obj = Per;
    type Mor = PerMor;

    fn dom(&self, f: &PerMor) -> Per {
        f.dom.clone()
    }

    fn cod(&self, f: &PerMor) -> Per {
        f.cod.clone()
    }

    fn identity(&self, a: &Per) -> PerMor {
        self.canonical(a, a, (0..a.n).collect())
    }

    fn compose(&self, g: &PerMor, f: &PerMor) -> PerMor {
        let map = f.map.iter().map(|&y| g.map[y as usize]).collect();
        self.canonical(&f.dom, &g.cod, map)
    }

    fn universe(&self) -> Vec<Per> {
        self.universe.clone()
    }

    fn hom_cost(&self, a: &Per, b: &Per) -> u128 {
        self.candidates(a, b).iter().fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
    }

    fn hom(&self, a: &Per, b: &Per) -> Vec<PerMor> {
        let cand = self.candidates(a, b);
        self.search(a, b, &cand).into_iter().map(|map| PerMor { dom: a.clone(), cod: b.clone(), map }).collect()
    }

    fn sample_hom(&self, a: &Per, b: &Per, rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<PerMor>> {
        let cand = self.candidates(a, b);
        if cand.iter().any(Vec::is_empty) {
            return Some(vec![]);
        }
        let mut out = Vec::new();
        for _ in 0..n * 20 {
            if out.len() == n {
                break;
            }
            let map: Vec<u32> = cand.iter().map(|c| c[rng.gen_range(0..c.len())]).collect();
            if self.is_morphism(a, b, &map) {
                out.push(PerMor { dom: a.clone(), cod: b.clone(), map });
            }
        }
        Some(out)
    }

    fn terminal(&self) -> Option<Per> {
        Some(Arc::new(PerObject { n: 1, rho: vec![self.top_u8()] }))
    }

    fn to_terminal(&self, a: &Per) -> Option<PerMor> {
        let t = self.terminal()?;
        Some(PerMor { dom: a.clone(), cod: t, map: vec![0; a.n as usize] })
    }

    /// `(n·m, ρ ⊠ σ)` with `(ρ ⊠ σ)((i,j),(i',j')) = ρ(i,i') ∧ σ(j,j')`.
    fn product(&self, a: &Per, b: &Per) -> Option<Product<Self>> {
        let object = self.product_object(a, b);
        let (p1, p2) = self.projections(a, b, &object);
        Some(ProductWitness { left: a.clone(), right: b.clone(), object, p1, p2 })
    }

    fn pair(&self, w: &Product<Self>, f: &PerMor, g: &PerMor) -> Result<PerMor, FincatError> {
        let m = w.right.n;
        let map = f.map.iter().zip(&g.map).map(|(&u, &v)| u * m + v).collect();
        Ok(self.canonical(&f.dom, &w.object, map))
    }

    /// The apex `(A x Z, ρ ⊠ ζ ∧ e ⊠ e)` with `e(a, z) = σ(fa, kz)`.
    fn pullback(&self, f: &PerMor, k: &PerMor) -> Option<Pullback<Self>> {
        let (a, z, b) = (&f.dom, &k.dom, &f.cod);
        let base = self.product_object(a, z);
        let m = z.n;
        let e = |u: u32| b.rel(f.map[(u / m) as usize], k.map[(u % m) as usize]);
        let rho = (0..base.n * base.n)
            .map(|i| {
                let (u, v) = (i / base.n, i % base.n);
                self.m(base.rho[i as usize], self.m(e(u), e(v)))
            })
            .collect();
        let apex = Arc::new(PerObject { n: base.n, rho });
        let (top, left) = self.projections(a, z, &apex);
        Some(PullbackWitness { f: f.clone(), k: k.clone(), apex, top, left })
    }

    /// Candidates per point are the canonical `x` with `m(x)` related to `f(y)`.
    fn lifts(&self, m: &PerMor, f: &PerMor) -> Vec<PerMor> {
        let (y, x, b) = (&f.dom, &m.dom, &m.cod);
        let cand: Vec<Vec<u32>> = (0..y.n)
            .map(|p| {
                let e = y.extent(p);
                (0..x.n)
                    .filter(|&q| {
                        self.le(e, x.extent(q))
                            && self.canon(x, e, q) == q
                            && self.le(e, b.rel(m.map[q as usize], f.map[p as usize]))
                    })
                    .collect()
            })
            .collect();
        self.search(y, x, &cand)
            .into_iter()
            .map(|map| PerMor { dom: y.clone(), cod: x.clone(), map })
            .filter(|h| self.compose(m, h) == *f)
            .collect()
    }

    fn render_obj(&self, a: &Per) -> String {
        self.render_rho(a.n, &a.rho)
    }

    fn render_mor(&self, f: &PerMor) -> String {
        let digits: Vec<String> = f.map.iter().map(u32::to_string).collect();
        format!("[{}]", digits.join(","))
    }
}

impl Doctrine for PerDoctrine {
    type Elem = Vec<u8>;

    fn top(&self, a: &Per) -> Vec<u8> {
        (0..a.n).map(|x| a.extent(x)).collect()
    }

    fn meet(&self, _a: &Per, x: &Vec<u8>, y: &Vec<u8>) -> Vec<u8> {
        x.iter().zip(y).map(|(&u, &v)| self.m(u, v)).collect()
    }

    fn leq(&self, _a: &Per, x: &Vec<u8>, y: &Vec<u8>) -> bool {
        x.iter().zip(y).all(|(&u, &v)| self.le(u, v))
    }

    /// `f*φ ∧ Δ*ρ`.
    fn reindex(&self, f: &PerMor, phi: &Vec<u8>) -> Vec<u8> {
        f.map.iter().enumerate().map(|(x, &y)| self.m(phi[y as usize], f.dom.extent(x as u32))).collect()
    }

    /// `∃_f φ (y) = ⋁_x φ(x) ∧ σ(fx, y)`.
    fn exists(&self, f: &PerMor, phi: &Vec<u8>) -> Vec<u8> {
        let b = &f.cod;
        (0..b.n)
            .map(|y| {
                f.map
                    .iter()
                    .enumerate()
                    .fold(self.bottom_u8(), |acc, (x, &fx)| self.j(acc, self.m(phi[x], b.rel(fx, y))))
            })
            .collect()
    }

    /// `∀_f φ (y) = σ(y,y) ∧ ⋀_x ((ρ(x,x) ∧ σ(fx, y)) ⇒ φ(x))`.
    fn forall(&self, f: &PerMor, phi: &Vec<u8>) -> Option<Vec<u8>> {
        let b = &f.cod;
        Some(
            (0..b.n)
                .map(|y| {
                    f.map.iter().enumerate().fold(b.extent(y), |acc, (x, &fx)| {
                        let e = self.m(f.dom.extent(x as u32), b.rel(fx, y));
                        self.m(acc, self.imp(e, phi[x]))
                    })
                })
                .collect(),
        )
    }

    /// `(φ ⇒ ψ)(x) = ρ(x,x) ∧ ⋀_y ((ρ(x,y) ∧ φ(y)) ⇒ ψ(y))`.
    fn implies(&self, a: &Per, phi: &Vec<u8>, psi: &Vec<u8>) -> Option<Vec<u8>> {
        Some(
            (0..a.n)
                .map(|x| {
                    (0..a.n).fold(a.extent(x), |acc, y| {
                        let u = self.m(a.rel(x, y), phi[y as usize]);
                        self.m(acc, self.imp(u, psi[y as usize]))
                    })
                })
                .collect(),
        )
    }

    fn fiber_size(&self, a: &Per) -> u128 {
        pow_saturating(self.h.size() as u128, a.n)
    }

    fn fiber(&self, a: &Per) -> Vec<Vec<u8>> {
        enumerate_tuples(a.n as usize, self.h.size() as u32)
            .map(|t| t.into_iter().map(|v| v as u8).collect::<Vec<u8>>())
            .filter(|phi| self.fiber_filter(a, phi))
            .collect()
    }

    fn sample_fiber(&self, a: &Per, rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<Vec<u8>>> {
        let k = self.h.size() as u8;
        Some(
            (0..n)
                .map(|_| {
                    let raw: Vec<u8> = (0..a.n).map(|_| rng.gen_range(0..k)).collect();
                    self.close(a, &raw)
                })
                .collect(),
        )
    }

    fn render_elem(&self, _a: &Per, x: &Vec<u8>) -> String {
        let parts: Vec<&str> = x.iter().map(|&v| self.h.name(v as u32)).collect();
        format!("({})", parts.join(", "))
    }

    /// `(n, ρ ∧ φ ⊠ φ)` with the class of the identity function.
    fn comprehension(&self, a: &Per, phi: &Vec<u8>) -> Option<PerMor> {
        if !self.fiber_filter(a, phi) {
            return None;
        }
        let n = a.n;
        let rho = (0..n * n)
            .map(|i| {
                let (x, y) = (i / n, i % n);
                self.m(a.rho[i as usize], self.m(phi[x as usize], phi[y as usize]))
            })
            .collect();
        let s = Arc::new(PerObject { n, rho });
        Some(self.canonical(&s, a, (0..n).collect()))
    }

    /// Carried by the strict predicates of `a` under `≈`, with
    /// `mem(x, φ) = φ(x)`.
    fn power_object(&self, a: &Per) -> Option<PowerOf<Self>> {
        let (px, fiber) = self.power_carrier(a)?;
        let k = px.n as usize;
        let mut mem = Vec::with_capacity(a.n as usize * k);
        for x in 0..a.n as usize {
            for phi in &fiber {
                mem.push(phi[x]);
            }
        }
        Some(PowerObject { x: a.clone(), px, mem })
    }

    /// `{γ}(y)` is the predicate `γ(-, y)`.
    fn transpose(&self, w: &PowerOf<Self>, y: &Per, gamma: &Vec<u8>) -> Result<PerMor, DoctrineError> {
        let (a, px) = (&w.x, &w.px);
        let k = px.n as usize;
        let ny = y.n as usize;
        let render = || {
            let xy = self.product_object(a, y);
            self.render_elem(&xy, gamma)
        };
        let xy = self.product_object(a, y);
        if gamma.len() != xy.n as usize || !self.fiber_filter(&xy, gamma) {
            return Err(DoctrineError::NoSolution(render()));
        }
        let mut map = Vec::with_capacity(ny);
        for j in 0..ny {
            let column: Vec<u8> = (0..a.n as usize).map(|i| gamma[i * ny + j]).collect();
            let found = (0..k).find(|&p| (0..a.n as usize).all(|i| w.mem[i * k + p] == column[i]));
            match found {
                Some(p) => map.push(p as u32),
                None => return Err(DoctrineError::NoSolution(render())),
            }
        }
        self.morphism(y, px, map).ok_or_else(|| DoctrineError::NoSolution(render()))
    }
}

/// The per-completion of `base` on the objects over the given base sizes
/// whose number of inhabited points (nonzero extent) is at most
/// `max_extent`.
pub fn build_per_completion(
    base: &LocalicDoctrine,
    sizes: &[u32],
    max_extent: Option<u32>,
) -> Result<PerDoctrine, PerError> {
    let budget = Budget::default();
    let fo = check_first_order(&base.with_universe(sizes.to_vec()), sizes, &budget);
    if !fo.is_ok() {
        return Err(PerError::FirstOrderMissing(fo.to_string()));
    }
    let d = PerDoctrine::new(base.algebra().clone(), base.algebra_name(), vec![]);
    let mut universe = Vec::new();
    for &n in sizes {
        let cells = n * (n + 1) / 2;
        if pow_saturating(d.h.size() as u128, cells) > budget.max_enum {
            return Err(PerError::TooLarge(format!("relations on a set of size {n}")));
        }
        universe.extend(d.enumerate_pers(n).into_iter().filter(|p| {
            let inhabited = (0..p.n).filter(|&x| p.extent(x) != d.bottom_u8()).count() as u32;
            max_extent.is_none_or(|m| inhabited <= m)
        }));
    }
    Ok(d.with_universe(universe))
}

/// Checks that reindexing along every member of every morphism class
/// between `objects` agrees with reindexing along the representative.
pub fn check_representative_independence(d: &PerDoctrine, objects: &[Per]) -> ValidationReport {
    let mut r = ValidationReport::new("class representatives");
    let mut morphisms = Vec::new();
    for a in objects {
        for b in objects {
            morphisms.extend(d.hom(a, b));
        }
    }
    let fibers: BTreeMap<&Per, Vec<Vec<u8>>> = objects.iter().map(|a| (a, d.fiber(a))).collect();
    r.sweep(&morphisms, |f, r| {
        for member in d.class_members(f) {
            for phi in &fibers[&f.cod] {
                let direct: Vec<u8> =
                    member.iter().enumerate().map(|(x, &y)| d.m(phi[y as usize], f.dom.extent(x as u32))).collect();
                r.check(direct == d.reindex(f, phi), Law::RepresentativeDependence, || {
                    vec![d.render_mor(f), format!("{member:?}"), d.render_elem(&f.cod, phi)]
                });
            }
        }
    });
    r.finish()
}

/// Checks that the fibers over `objects` are closed under meets and have
/// top `ρ(x,x)`.
pub fn check_fibers(d: &PerDoctrine, objects: &[Per]) -> ValidationReport {
    let mut r = ValidationReport::new("strict predicates");
    r.sweep(objects, |a, r| {
        let xs = d.fiber(a);
        let top = d.top(a);
        r.check(xs.contains(&top), Law::FiberNotClosed, || vec![d.render_obj(a), "top".into()]);
        for x in &xs {
            for y in &xs {
                r.check(xs.contains(&d.meet(a, x, y)), Law::FiberNotClosed, || {
                    vec![d.render_obj(a), d.render_elem(a, x), d.render_elem(a, y)]
                });
            }
        }
        r.check(d.is_per(a.n, &a.rho), Law::NotPer, || vec![d.render_obj(a)]);
    });
    r.finish()
}

/// Singletons, the reflector and the equivalences between sheaves, complete
/// objects and maps, on `probes`. Every failure is a theorem violation; the
/// report notes which probes are sheaves.
pub fn check_topos_correspondence(d: &PerDoctrine, probes: &[Per], budget: &Budget) -> ValidationReport {
    let mut r = ValidationReport::new("tripos-to-topos correspondence");
    let refl = reflector(d, probes, probes, budget);
    let eq = check_equivalences(d, &refl, probes, budget);
    let sheaves: Vec<String> = refl.sheaves.iter().map(|a| d.render_obj(a)).collect();
    r.absorb(refl.report.as_incidents());
    r.absorb(eq.as_incidents());
    r.note(format!("{} of {} probes are sheaves: {}", sheaves.len(), probes.len(), sheaves.join("; ")));
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doctrine::equality_predicate;

    fn chain() -> PerDoctrine {
        build_per_completion(&LocalicDoctrine::new(FiniteHeytingAlgebra::chain3(), "chain3", vec![1, 2]), &[1, 2], None)
            .unwrap()
    }

    fn pq() -> PerDoctrine {
        build_per_completion(&LocalicDoctrine::new(FiniteHeytingAlgebra::boolpq(), "boolpq", vec![1, 2]), &[1, 2], None)
            .unwrap()
    }

    #[test]
    fn three_pers_on_a_point() {
        let d = chain();
        assert_eq!(d.enumerate_pers(1).len(), 3);
        assert_eq!(d.universe().len(), 17);
        assert_eq!(pq().universe().len(), 29);
    }

    #[test]
    fn equality_predicate_is_rho() {
        let d = chain();
        for a in d.universe() {
            assert_eq!(equality_predicate(&d, &a).unwrap(), a.rho);
        }
    }

    #[test]
    fn constants_into_a_fuzzy_pair() {
        let d = chain();
        let one = d.terminal().unwrap();
        let a = d.per(2, vec![2, 1, 1, 2]).unwrap();
        assert_eq!(d.hom(&one, &a).len(), 2);
        let b = d.per(2, vec![2, 2, 2, 2]).unwrap();
        assert_eq!(d.hom(&one, &b).len(), 1);
    }

    #[test]
    fn sigma_of_the_split_pair() {
        let d = pq();
        let a = d.per(2, vec![1, 0, 0, 2]).unwrap();
        let w = d.power_object(&a).unwrap();
        assert_eq!(w.px.n, 4);
        let s = crate::powerobj::check_singletons(&d, &a, &[d.terminal().unwrap()], &Budget::default());
        assert!(s.passed(), "{}", s.report);
        let data = s.data.unwrap();
        // strict predicates (0,0), (0,q), (p,0), (p,q)
        assert_eq!(data.sigma, vec![0, 2, 1, 3]);
    }

    #[test]
    fn laws_hold_on_small_objects() {
        let d = pq();
        let objects: Vec<Per> = d.universe().into_iter().filter(|a| a.n == 1).collect();
        let budget = Budget::default();
        assert!(crate::doctrine::validate_doctrine(&d, &objects, &budget).is_ok());
        assert!(crate::doctrine::check_existential_laws(&d, &objects, &budget).is_ok());
        let fo = check_first_order(&d, &objects, &budget);
        assert!(fo.is_ok(), "{fo}");
        assert!(check_fibers(&d, &d.universe()).is_ok());
        let two: Vec<Per> = d.universe().into_iter().take(8).collect();
        assert!(check_representative_independence(&d, &two).is_ok());
    }

    #[test]
    fn split_pair_has_a_bijective_non_iso_unit() {
        let d = pq();
        let a = d.per(2, vec![1, 0, 0, 2]).unwrap();
        let one = d.terminal().unwrap();
        let u = crate::sheafify::sheafify_object(&d, &a, std::slice::from_ref(&one), &Budget::default());
        assert!(u.passed(), "{}", u.report);
        assert!(u.eta_bijective);
        let s = u.data().unwrap();
        assert_eq!(s.s.n, 4);
        assert!(crate::fincat::inverse(&d, &s.eta).is_none());
        // ({p}, {q}) from the point is functional but is no graph
        let f = vec![1, 2];
        assert!(crate::maps::check_functional(&d, &one, &a, &f).unwrap().holds());
        let graphs: Vec<Vec<u8>> = d.hom(&one, &a).iter().map(|g| crate::maps::graph(&d, g).unwrap()).collect();
        assert!(!graphs.contains(&f));
        let h = crate::sheafify::tabulate_functional(&d, s, &one, &f).unwrap();
        assert_eq!(h.cod, s.s);
    }

    #[test]
    fn correspondence_on_points() {
        let d = pq();
        let mut probes: Vec<Per> = d.universe().into_iter().filter(|a| a.n == 1).collect();
        probes.push(d.per(2, vec![1, 0, 0, 2]).unwrap());
        let t = std::time::Instant::now();
        let r = check_topos_correspondence(&d, &probes, &Budget::default());
        assert!(r.is_ok(), "{r}");
        eprintln!("{r}\n{:?}", t.elapsed());
    }
}
