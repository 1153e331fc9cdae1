use super::{Category, CategoryExt, FincatError};

/// A list of sorts realized as the left-associated product
/// `((A1 x A2) x A3) x ...`, with the terminal object for the empty list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context<O, M> {
    pub sorts: Vec<O>,
    pub object: O,
    pub projections: Vec<M>,
}

impl<O: Clone, M: Clone> Context<O, M> {
    pub fn new<C>(c: &C, sorts: &[O]) -> Result<Self, FincatError>
    where
        C: Category<Obj = O, Mor = M> + ?Sized,
    {
        let Some((first, rest)) = sorts.split_first() else {
            let t = c.terminal().ok_or(FincatError::MissingTerminal)?;
            return Ok(Self { sorts: vec![], object: t, projections: vec![] });
        };
        let mut object = first.clone();
        let mut projections = vec![c.identity(first)];
        for s in rest {
            let w = c.product_or_err(&object, s)?;
            for p in projections.iter_mut() {
                *p = c.compose(p, &w.p1);
            }
            projections.push(w.p2);
            object = w.object;
        }
        Ok(Self { sorts: sorts.to_vec(), object, projections })
    }

    pub fn len(&self) -> usize {
        self.sorts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorts.is_empty()
    }

    /// The morphism `y -> object` with the given components.
    pub fn tuple<C>(&self, c: &C, y: &O, maps: &[M]) -> Result<M, FincatError>
    where
        C: Category<Obj = O, Mor = M> + ?Sized,
    {
        assert_eq!(maps.len(), self.sorts.len(), "one component per sort");
        let Some((first, rest)) = maps.split_first() else {
            return c.to_terminal(y).ok_or(FincatError::MissingTerminal);
        };
        let mut acc = first.clone();
        let mut left = self.sorts[0].clone();
        for (s, m) in self.sorts[1..].iter().zip(rest) {
            let w = c.product_or_err(&left, s)?;
            acc = c.pair(&w, &acc, m)?;
            left = w.object;
        }
        Ok(acc)
    }

    /// The morphism from this context to `target` picking the listed
    /// positions, e.g. `[0, 2]` is the projection `(x, y, z) |-> (x, z)`.
    pub fn select<C>(&self, c: &C, target: &Self, positions: &[usize]) -> Result<M, FincatError>
    where
        C: Category<Obj = O, Mor = M> + ?Sized,
    {
        let maps: Vec<M> = positions.iter().map(|&i| self.projections[i].clone()).collect();
        target.tuple(c, &self.object, &maps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::FinSet;

    #[test]
    fn contexts_are_left_associated() {
        let c = FinSet::new(vec![1, 2, 4]);
        let k = Context::new(&c, &[2, 2, 1]).unwrap();
        assert_eq!(k.object, 4);
        assert_eq!(k.projections[0].map, vec![0, 0, 1, 1]);
        assert_eq!(k.projections[1].map, vec![0, 1, 0, 1]);
        let empty = Context::new(&c, &[]).unwrap();
        assert_eq!(empty.object, 1);
        let one = Context::new(&c, &[2]).unwrap();
        assert!(c.is_identity(&one.projections[0]));
    }

    #[test]
    fn selecting_reorders_components() {
        let c = FinSet::new(vec![1, 2, 4, 8]);
        let xyz = Context::new(&c, &[2, 2, 2]).unwrap();
        let xz = Context::new(&c, &[2, 2]).unwrap();
        let m = xyz.select(&c, &xz, &[0, 2]).unwrap();
        // index of (x, y, z) is 4x + 2y + z; (x, z) has index 2x + z
        let expected: Vec<u32> = (0..8).map(|i| 2 * (i / 4) + i % 2).collect();
        assert_eq!(m.map, expected);
        let swap = xz.select(&c, &xz, &[1, 0]).unwrap();
        assert_eq!(swap.map, vec![0, 2, 1, 3]);
    }
}
