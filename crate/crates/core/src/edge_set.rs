use crate::lattice::{EdgeIdx, Lattice};

/// Subset of a lattice's edge slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    bits: Vec<bool>,
}

impl EdgeSet {
    pub fn empty(lattice: &Lattice) -> Self {
        Self {
            bits: vec![false; lattice.num_slots()],
        }
    }

    pub fn full(lattice: &Lattice) -> Self {
        let mut set = Self::empty(lattice);
        for e in lattice.edges() {
            set.bits[e] = true;
        }
        set
    }

    pub fn from_fn(lattice: &Lattice, mut f: impl FnMut(EdgeIdx) -> bool) -> Self {
        let mut set = Self::empty(lattice);
        for e in lattice.edges() {
            set.bits[e] = f(e);
        }
        set
    }

    pub fn num_slots(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn contains(&self, e: EdgeIdx) -> bool {
        self.bits.get(e).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, e: EdgeIdx) {
        self.bits[e] = true;
    }

    pub fn remove(&mut self, e: EdgeIdx) {
        self.bits[e] = false;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeIdx> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &EdgeSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !(a && b))
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| a || b).collect(),
        }
    }

    /// Edges of `lattice` not in this set.
    pub fn complement(&self, lattice: &Lattice) -> EdgeSet {
        EdgeSet::from_fn(lattice, |e| !self.contains(e))
    }
}
