//! Finite ordered structures used as fibers: meet-semilattices, Heyting
//! algebras and nuclei on them.
//!
//! Elements are dense ids `0..size`. Every table is an explicit array, so the
//! law sweeps below are plain loops over all pairs or triples.

use thiserror::Error;

use crate::report::{Law, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("malformed table `{table}`: {detail}")]
    MalformedTable { table: &'static str, detail: String },
    #[error("elements {0} and {1} have no greatest lower bound")]
    NoMeet(u32, u32),
    #[error("elements {0} and {1} have no least upper bound")]
    NoJoin(u32, u32),
    #[error("no greatest element")]
    NoTop,
    #[error("no least element")]
    NoBottom,
    #[error("no greatest c with c /\\ {0} <= {1}")]
    NoImplication(u32, u32),
    #[error("element {0} out of range")]
    OutOfRange(u32),
}

fn malformed(table: &'static str, detail: impl Into<String>) -> LatticeError {
    LatticeError::MalformedTable { table, detail: detail.into() }
}

fn check_binary(table: &'static str, size: usize, t: &[u32]) -> Result<(), LatticeError> {
    if t.len() != size * size {
        return Err(malformed(table, format!("expected {} entries, found {}", size * size, t.len())));
    }
    if let Some((i, v)) = t.iter().enumerate().find(|(_, v)| **v as usize >= size) {
        return Err(malformed(table, format!("entry ({}, {}) = {v} out of range", i / size, i % size)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteMeetSemilattice {
    size: usize,
    leq: Vec<bool>,
    meet: Vec<u32>,
    top: u32,
    names: Vec<String>,
}

impl FiniteMeetSemilattice {
    /// Builds from explicit tables. Only shape and range are checked here;
    /// the laws are checked by [`validate_semilattice`].
    pub fn from_tables(size: usize, leq: Vec<bool>, meet: Vec<u32>, top: u32) -> Result<Self, LatticeError> {
        if leq.len() != size * size {
            return Err(malformed("leq", format!("expected {} entries", size * size)));
        }
        check_binary("meet", size, &meet)?;
        if top as usize >= size {
            return Err(malformed("top", format!("{top} out of range")));
        }
        Ok(Self { size, leq, meet, top, names: default_names(size) })
    }

    /// Derives meet and top from the order by scanning.
    pub fn from_order(size: usize, leq: Vec<bool>) -> Result<Self, LatticeError> {
        if leq.len() != size * size {
            return Err(malformed("leq", format!("expected {} entries", size * size)));
        }
        let le = |a: usize, b: usize| leq[a * size + b];
        let top = (0..size).find(|&t| (0..size).all(|a| le(a, t))).ok_or(LatticeError::NoTop)?;
        let mut meet = vec![0; size * size];
        for a in 0..size {
            for b in 0..size {
                let lower: Vec<usize> = (0..size).filter(|&c| le(c, a) && le(c, b)).collect();
                let glb = lower
                    .iter()
                    .copied()
                    .find(|&c| lower.iter().all(|&d| le(d, c)))
                    .ok_or(LatticeError::NoMeet(a as u32, b as u32))?;
                meet[a * size + b] = glb as u32;
            }
        }
        Ok(Self { size, leq, meet, top: top as u32, names: default_names(size) })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.size, "one name per element");
        self.names = names;
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.size as u32
    }

    pub fn leq(&self, a: u32, b: u32) -> bool {
        self.leq[a as usize * self.size + b as usize]
    }

    pub fn meet(&self, a: u32, b: u32) -> u32 {
        self.meet[a as usize * self.size + b as usize]
    }

    pub fn top(&self) -> u32 {
        self.top
    }

    pub fn name(&self, a: u32) -> &str {
        &self.names[a as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn meet_table(&self) -> &[u32] {
        &self.meet
    }

    pub fn leq_table(&self) -> &[bool] {
        &self.leq
    }

    /// Meet of a family; the top for the empty family.
    pub fn meet_all(&self, it: impl IntoIterator<Item = u32>) -> u32 {
        it.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    pub fn set_meet_entry(&mut self, a: u32, b: u32, c: u32) {
        self.meet[a as usize * self.size + b as usize] = c;
    }
}

fn default_names(size: usize) -> Vec<String> {
    (0..size).map(|i| i.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteHeytingAlgebra {
    base: FiniteMeetSemilattice,
    join: Vec<u32>,
    bottom: u32,
    imp: Vec<u32>,
}

impl FiniteHeytingAlgebra {
    pub fn from_tables(
        base: FiniteMeetSemilattice,
        join: Vec<u32>,
        bottom: u32,
        imp: Vec<u32>,
    ) -> Result<Self, LatticeError> {
        let n = base.size();
        check_binary("join", n, &join)?;
        check_binary("impl", n, &imp)?;
        if bottom as usize >= n {
            return Err(malformed("bottom", format!("{bottom} out of range")));
        }
        Ok(Self { base, join, bottom, imp })
    }

    /// Derives join, bottom and implication from the order.
    pub fn from_order(size: usize, leq: Vec<bool>) -> Result<Self, LatticeError> {
        let base = FiniteMeetSemilattice::from_order(size, leq)?;
        Self::complete(base)
    }

    /// Extends a meet-semilattice with scanned join, bottom and implication.
    pub fn complete(base: FiniteMeetSemilattice) -> Result<Self, LatticeError> {
        let n = base.size();
        let bottom = (0..n as u32).find(|&b| base.elements().all(|a| base.leq(b, a))).ok_or(LatticeError::NoBottom)?;
        let mut join = vec![0; n * n];
        let mut imp = vec![0; n * n];
        for a in base.elements() {
            for b in base.elements() {
                let upper: Vec<u32> = base.elements().filter(|&c| base.leq(a, c) && base.leq(b, c)).collect();
                join[a as usize * n + b as usize] = upper
                    .iter()
                    .copied()
                    .find(|&c| upper.iter().all(|&d| base.leq(c, d)))
                    .ok_or(LatticeError::NoJoin(a, b))?;
                imp[a as usize * n + b as usize] =
                    scan_implication(&base, a, b).ok_or(LatticeError::NoImplication(a, b))?;
            }
        }
        Ok(Self { base, join, bottom, imp })
    }

    pub fn base(&self) -> &FiniteMeetSemilattice {
        &self.base
    }

    pub fn size(&self) -> usize {
        self.base.size()
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        self.base.elements()
    }

    pub fn leq(&self, a: u32, b: u32) -> bool {
        self.base.leq(a, b)
    }

    pub fn meet(&self, a: u32, b: u32) -> u32 {
        self.base.meet(a, b)
    }

    pub fn join(&self, a: u32, b: u32) -> u32 {
        self.join[a as usize * self.size() + b as usize]
    }

    pub fn top(&self) -> u32 {
        self.base.top()
    }

    pub fn bottom(&self) -> u32 {
        self.bottom
    }

    /// Implication read from the table.
    pub fn imp(&self, a: u32, b: u32) -> u32 {
        self.imp[a as usize * self.size() + b as usize]
    }

    pub fn iff(&self, a: u32, b: u32) -> u32 {
        self.meet(self.imp(a, b), self.imp(b, a))
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.imp(a, self.bottom)
    }

    pub fn join_all(&self, it: impl IntoIterator<Item = u32>) -> u32 {
        it.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    pub fn meet_all(&self, it: impl IntoIterator<Item = u32>) -> u32 {
        self.base.meet_all(it)
    }

    pub fn name(&self, a: u32) -> &str {
        self.base.name(a)
    }

    pub fn join_table(&self) -> &[u32] {
        &self.join
    }

    pub fn impl_table(&self) -> &[u32] {
        &self.imp
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        self.base = self.base.with_names(names);
        self
    }

    /// Overwrites one implication entry; used to plant defects.
    pub fn with_impl_entry(mut self, a: u32, b: u32, c: u32) -> Self {
        let n = self.size();
        self.imp[a as usize * n + b as usize] = c;
        self
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let leq = (0..n * n).map(|i| i / n <= i % n).collect();
        Self::from_order(n, leq).expect("finite chains are Heyting algebras")
    }

    /// The 3-chain `0 < 1/2 < 1`.
    pub fn chain3() -> Self {
        Self::chain(3).with_names(vec!["0".into(), "1/2".into(), "1".into()])
    }

    pub fn bool2() -> Self {
        Self::chain(2)
    }

    /// The powerset of `atoms`, elements encoded as bitmasks over the atoms.
    pub fn powerset(atoms: &[&str]) -> Self {
        let k = atoms.len();
        let n = 1usize << k;
        let leq = (0..n * n).map(|i| (i / n) & !(i % n) == 0).collect();
        let names = (0..n)
            .map(|m| {
                if m == 0 {
                    "0".to_string()
                } else if m == n - 1 {
                    "1".to_string()
                } else {
                    let parts: Vec<&str> = (0..k).filter(|b| m & (1 << b) != 0).map(|b| atoms[b]).collect();
                    parts.join("+")
                }
            })
            .collect();
        Self::from_order(n, leq).expect("powersets are Boolean algebras").with_names(names)
    }

    /// The Boolean algebra on two atoms `p`, `q`: ids 0 = bottom, 1 = p,
    /// 2 = q, 3 = top.
    pub fn boolpq() -> Self {
        Self::powerset(&["p", "q"])
    }
}

fn scan_implication(base: &FiniteMeetSemilattice, a: u32, b: u32) -> Option<u32> {
    let below: Vec<u32> = base.elements().filter(|&c| base.leq(base.meet(c, a), b)).collect();
    below.iter().copied().find(|&c| below.iter().all(|&d| base.leq(d, c)))
}

/// The greatest `c` with `c /\ a <= b`, found by scanning every element.
pub fn implication(h: &FiniteHeytingAlgebra, a: u32, b: u32) -> Result<u32, LatticeError> {
    for x in [a, b] {
        if x as usize >= h.size() {
            return Err(LatticeError::OutOfRange(x));
        }
    }
    scan_implication(h.base(), a, b).ok_or(LatticeError::NoImplication(a, b))
}

fn fmt_elems(l: &FiniteMeetSemilattice, xs: &[u32]) -> Vec<String> {
    xs.iter().map(|&x| l.name(x).to_string()).collect()
}

pub fn validate_semilattice(l: &FiniteMeetSemilattice) -> ValidationReport {
    let mut r = ValidationReport::new("meet-semilattice");
    semilattice_laws(l, &mut r);
    r.finish()
}

fn semilattice_laws(l: &FiniteMeetSemilattice, r: &mut ValidationReport) {
    let els: Vec<u32> = l.elements().collect();
    for &a in &els {
        r.check(l.leq(a, a), Law::LeqNotReflexive, || fmt_elems(l, &[a]));
        r.check(l.leq(a, l.top()), Law::TopNotMaximum, || fmt_elems(l, &[a]));
        for &b in &els {
            if a < b {
                r.check(!(l.leq(a, b) && l.leq(b, a)), Law::LeqNotAntisymmetric, || fmt_elems(l, &[a, b]));
            }
            let m = l.meet(a, b);
            let glb = l.leq(m, a) && l.leq(m, b) && els.iter().all(|&c| !(l.leq(c, a) && l.leq(c, b)) || l.leq(c, m));
            r.check(glb, Law::MeetNotGlb, || fmt_elems(l, &[a, b]));
            for &c in &els {
                if l.leq(a, b) && l.leq(b, c) {
                    r.check(l.leq(a, c), Law::LeqNotTransitive, || fmt_elems(l, &[a, b, c]));
                }
            }
        }
    }
}

/// Checks every Heyting-algebra law and lists each violation with its
/// witnessing elements.
pub fn validate_heyting(h: &FiniteHeytingAlgebra) -> ValidationReport {
    let mut r = ValidationReport::new("heyting algebra");
    let l = h.base();
    semilattice_laws(l, &mut r);
    let els: Vec<u32> = h.elements().collect();
    for &a in &els {
        r.check(h.leq(h.bottom(), a), Law::BottomNotMinimum, || fmt_elems(l, &[a]));
        for &b in &els {
            let j = h.join(a, b);
            let lub = h.leq(a, j) && h.leq(b, j) && els.iter().all(|&c| !(h.leq(a, c) && h.leq(b, c)) || h.leq(j, c));
            r.check(lub, Law::JoinNotLub, || fmt_elems(l, &[a, b]));
            let i = h.imp(a, b);
            let residuated = els.iter().all(|&c| h.leq(c, i) == h.leq(h.meet(c, a), b));
            r.check(residuated, Law::ImplNotResiduation, || fmt_elems(l, &[a, b]));
            for &c in &els {
                let lhs = h.meet(a, h.join(b, c));
                let rhs = h.join(h.meet(a, b), h.meet(a, c));
                r.check(lhs == rhs, Law::NotDistributive, || fmt_elems(l, &[a, b, c]));
            }
        }
    }
    r.finish()
}

/// A unary map on a Heyting algebra, expected to be a nucleus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Nucleus {
    pub map: Vec<u32>,
}

impl Nucleus {
    pub fn new(h: &FiniteHeytingAlgebra, map: Vec<u32>) -> Result<Self, LatticeError> {
        if map.len() != h.size() {
            return Err(malformed("nucleus", format!("expected {} entries", h.size())));
        }
        if let Some(v) = map.iter().find(|v| **v as usize >= h.size()) {
            return Err(malformed("nucleus", format!("value {v} out of range")));
        }
        Ok(Self { map })
    }

    pub fn identity(h: &FiniteHeytingAlgebra) -> Self {
        Self { map: h.elements().collect() }
    }

    pub fn double_negation(h: &FiniteHeytingAlgebra) -> Self {
        Self { map: h.elements().map(|a| h.neg(h.neg(a))).collect() }
    }

    pub fn apply(&self, a: u32) -> u32 {
        self.map[a as usize]
    }

    pub fn fixed_points(&self) -> Vec<u32> {
        (0..self.map.len() as u32).filter(|&a| self.apply(a) == a).collect()
    }
}

pub fn validate_nucleus(h: &FiniteHeytingAlgebra, j: &Nucleus) -> ValidationReport {
    let mut r = ValidationReport::new("nucleus");
    let l = h.base();
    for a in h.elements() {
        r.check(h.leq(a, j.apply(a)), Law::NotInflationary, || fmt_elems(l, &[a]));
        r.check(j.apply(j.apply(a)) == j.apply(a), Law::NotIdempotent, || fmt_elems(l, &[a]));
        for b in h.elements() {
            let ok = j.apply(h.meet(a, b)) == h.meet(j.apply(a), j.apply(b));
            r.check(ok, Law::NotMeetPreserving, || fmt_elems(l, &[a, b]));
        }
    }
    r.finish()
}

/// The algebra of fixed points of a nucleus: inherited order and meet, join
/// `j(a \/ b)`, bottom `j(0)`. Implication is rescanned in the subposet.
pub fn fixed_point_algebra(h: &FiniteHeytingAlgebra, j: &Nucleus) -> Result<FiniteHeytingAlgebra, LatticeError> {
    let fixed = j.fixed_points();
    let n = fixed.len();
    let leq = (0..n * n).map(|i| h.leq(fixed[i / n], fixed[i % n])).collect();
    let pos = |x: u32| fixed.iter().position(|&f| f == x).map(|p| p as u32);
    let meet = (0..n * n)
        .map(|i| pos(h.meet(fixed[i / n], fixed[i % n])).ok_or(LatticeError::NoMeet(0, 0)))
        .collect::<Result<Vec<_>, _>>()?;
    let top = pos(h.top()).ok_or(LatticeError::NoTop)?;
    let names = fixed.iter().map(|&x| h.name(x).to_string()).collect();
    let base = FiniteMeetSemilattice::from_tables(n, leq, meet, top)?.with_names(names);
    let join = (0..n * n)
        .map(|i| {
            pos(j.apply(h.join(fixed[i / n], fixed[i % n])))
                .ok_or(LatticeError::NoJoin(i as u32 / n as u32, i as u32 % n as u32))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bottom = pos(j.apply(h.bottom())).ok_or(LatticeError::NoBottom)?;
    let mut imp = vec![0; n * n];
    for a in 0..n as u32 {
        for b in 0..n as u32 {
            imp[(a * n as u32 + b) as usize] =
                scan_implication(&base, a, b).ok_or(LatticeError::NoImplication(a, b))?;
        }
    }
    FiniteHeytingAlgebra::from_tables(base, join, bottom, imp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_chain_is_heyting() {
        let h = FiniteHeytingAlgebra::chain3();
        assert_eq!(h.imp(1, 0), 0);
        assert!(validate_heyting(&h).is_ok());
    }

    #[test]
    fn bool2_is_heyting() {
        assert!(validate_heyting(&FiniteHeytingAlgebra::bool2()).is_ok());
    }

    #[test]
    fn planted_implication_defect_is_named() {
        let h = FiniteHeytingAlgebra::chain3().with_impl_entry(1, 0, 1);
        let r = validate_heyting(&h);
        let v: Vec<_> = r.violations_of(Law::ImplNotResiduation).collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].at, vec!["1/2".to_string(), "0".to_string()]);
    }

    #[test]
    fn implication_examples() {
        let h = FiniteHeytingAlgebra::chain3();
        for a in 0..3 {
            assert_eq!(implication(&h, a, a).unwrap(), h.top());
        }
        assert_eq!(implication(&h, 1, 0).unwrap(), 0);
        let b = FiniteHeytingAlgebra::powerset(&["p", "q"]);
        // {p} => {q} = {q}
        assert_eq!(implication(&b, 0b01, 0b10).unwrap(), 0b10);
        assert_eq!(implication(&h, 5, 0), Err(LatticeError::OutOfRange(5)));
    }

    #[test]
    fn malformed_tables_are_errors_not_violations() {
        let err = FiniteMeetSemilattice::from_tables(2, vec![true; 4], vec![0, 0, 0], 1);
        assert!(matches!(err, Err(LatticeError::MalformedTable { table: "meet", .. })));
        let err = FiniteMeetSemilattice::from_tables(2, vec![true; 4], vec![0, 0, 0, 7], 1);
        assert!(matches!(err, Err(LatticeError::MalformedTable { .. })));
    }

    #[test]
    fn nucleus_examples() {
        let h = FiniteHeytingAlgebra::chain3();
        assert!(validate_nucleus(&h, &Nucleus::identity(&h)).is_ok());
        let nn = Nucleus::double_negation(&h);
        assert_eq!(nn.map, vec![0, 2, 2]);
        assert!(validate_nucleus(&h, &nn).is_ok());
        let bad = Nucleus::new(&h, vec![0, 0, 2]).unwrap();
        let r = validate_nucleus(&h, &bad);
        let v: Vec<_> = r.violations_of(Law::NotInflationary).collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].at, vec!["1/2".to_string()]);
    }

    #[test]
    fn fixed_points_of_double_negation_form_heyting_algebra() {
        let h = FiniteHeytingAlgebra::chain3();
        let fixed = fixed_point_algebra(&h, &Nucleus::double_negation(&h)).unwrap();
        assert_eq!(fixed.size(), 2);
        assert!(validate_heyting(&fixed).is_ok());
    }

    #[test]
    fn non_lattice_order_is_rejected() {
        // two incomparable elements and nothing else: no top
        let leq = vec![true, false, false, true];
        assert_eq!(FiniteMeetSemilattice::from_order(2, leq), Err(LatticeError::NoTop));
    }
}
