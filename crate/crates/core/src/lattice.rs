//! Finite square-lattice geometry with periodic or open boundaries.
//!
//! Vertices are indexed row-major (`y * width + x`). Every vertex owns two
//! edge *slots*: its East edge at `2 * v` and its North edge at `2 * v + 1`.
//! On a torus every slot is an edge; on an open lattice the East slots of
//! the last column and the North slots of the last row are absent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub width: usize,
    pub height: usize,
    pub boundary: Boundary,
    /// Number of incident edges each vertex reinforces per round.
    pub k: usize,
}

impl LatticeConfig {
    pub fn torus(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            boundary: Boundary::Periodic,
            k: 2,
        }
    }

    pub fn open(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            boundary: Boundary::Open,
            k: 2,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidLattice(format!(
                "dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if self.boundary == Boundary::Periodic && (self.width < 3 || self.height < 3) {
            return Err(Error::InvalidLattice(format!(
                "periodic lattice needs width and height >= 3 (got {}x{}); smaller tori have multi-edges",
                self.width, self.height
            )));
        }
        if !(1..=4).contains(&self.k) {
            return Err(Error::InvalidLattice(format!("k must lie in 1..=4, got {}", self.k)));
        }
        if self.width.checked_mul(self.height).is_none_or(|n| n > (u32::MAX / 2) as usize) {
            return Err(Error::InvalidLattice("lattice too large".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub x: usize,
    pub y: usize,
}

impl VertexId {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    East,
    North,
}

/// Canonical name of an undirected edge: the edge from `base` towards `dir`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub base: VertexId,
    pub dir: Dir,
}

/// Index of an edge slot (`2 * vertex + dir`).
pub type EdgeIdx = usize;

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    config: LatticeConfig,
    /// Incident edge slots of each vertex in (E, N, W, S) order; `NONE` where absent.
    incidence: Vec<[u32; 4]>,
    num_edges: usize,
}

impl Lattice {
    pub fn new(config: LatticeConfig) -> Result<Self> {
        config.validate()?;
        let LatticeConfig { width, height, .. } = config;
        let mut lattice = Self {
            config,
            incidence: Vec::with_capacity(width * height),
            num_edges: 0,
        };
        for y in 0..height {
            for x in 0..width {
                let v = VertexId { x, y };
                let east = lattice.edge_index(EdgeId { base: v, dir: Dir::East });
                let north = lattice.edge_index(EdgeId { base: v, dir: Dir::North });
                let west = lattice
                    .offset(v, -1, 0)
                    .and_then(|w| lattice.edge_index(EdgeId { base: w, dir: Dir::East }));
                let south = lattice
                    .offset(v, 0, -1)
                    .and_then(|s| lattice.edge_index(EdgeId { base: s, dir: Dir::North }));
                let slot = |e: Option<EdgeIdx>| e.map_or(NONE, |e| e as u32);
                lattice
                    .incidence
                    .push([slot(east), slot(north), slot(west), slot(south)]);
            }
        }
        lattice.num_edges = match config.boundary {
            Boundary::Periodic => 2 * width * height,
            Boundary::Open => width * (height - 1) + height * (width - 1),
        };
        Ok(lattice)
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn height(&self) -> usize {
        self.config.height
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn is_periodic(&self) -> bool {
        self.config.boundary == Boundary::Periodic
    }

    pub fn num_vertices(&self) -> usize {
        self.config.width * self.config.height
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Size of the edge slot space; per-edge arrays are indexed by slot.
    pub fn num_slots(&self) -> usize {
        2 * self.num_vertices()
    }

    pub fn vertex_index(&self, v: VertexId) -> usize {
        v.y * self.config.width + v.x
    }

    pub fn vertex(&self, index: usize) -> VertexId {
        VertexId {
            x: index % self.config.width,
            y: index / self.config.width,
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.num_vertices()).map(move |i| self.vertex(i))
    }

    /// Maps arbitrary integer coordinates to a vertex: wrapped on the torus,
    /// `None` outside an open lattice.
    pub fn wrap(&self, x: i64, y: i64) -> Option<VertexId> {
        let (w, h) = (self.config.width as i64, self.config.height as i64);
        match self.config.boundary {
            Boundary::Periodic => Some(VertexId {
                x: x.rem_euclid(w) as usize,
                y: y.rem_euclid(h) as usize,
            }),
            Boundary::Open => {
                if (0..w).contains(&x) && (0..h).contains(&y) {
                    Some(VertexId {
                        x: x as usize,
                        y: y as usize,
                    })
                } else {
                    None
                }
            }
        }
    }

    pub fn offset(&self, v: VertexId, dx: i64, dy: i64) -> Option<VertexId> {
        self.wrap(v.x as i64 + dx, v.y as i64 + dy)
    }

    /// Slot index of a canonical edge, or `None` if the edge does not exist.
    pub fn edge_index(&self, e: EdgeId) -> Option<EdgeIdx> {
        let LatticeConfig { width, height, boundary, .. } = self.config;
        if e.base.x >= width || e.base.y >= height {
            return None;
        }
        if boundary == Boundary::Open {
            match e.dir {
                Dir::East if e.base.x + 1 >= width => return None,
                Dir::North if e.base.y + 1 >= height => return None,
                _ => {}
            }
        }
        let dir = match e.dir {
            Dir::East => 0,
            Dir::North => 1,
        };
        Some(2 * self.vertex_index(e.base) + dir)
    }

    pub fn edge(&self, slot: EdgeIdx) -> EdgeId {
        EdgeId {
            base: self.vertex(slot / 2),
            dir: if slot.is_multiple_of(2) { Dir::East } else { Dir::North },
        }
    }

    pub fn contains_edge(&self, slot: EdgeIdx) -> bool {
        slot < self.num_slots() && self.edge_index(self.edge(slot)).is_some()
    }

    /// All edge slots that carry an edge, in increasing slot order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeIdx> + '_ {
        (0..self.num_slots()).filter(move |&s| self.is_periodic() || self.contains_edge(s))
    }

    /// Endpoints as vertex indices, base first.
    pub fn endpoints(&self, slot: EdgeIdx) -> (usize, usize) {
        let e = self.edge(slot);
        let (dx, dy) = match e.dir {
            Dir::East => (1, 0),
            Dir::North => (0, 1),
        };
        let head = self
            .offset(e.base, dx, dy)
            .expect("edge slot outside lattice");
        (slot / 2, self.vertex_index(head))
    }

    /// Incident edges of `v` in the fixed order East, North, West, South
    /// (absent directions skipped on open lattices).
    pub fn incident_edges(&self, v: VertexId) -> Vec<EdgeIdx> {
        self.incident_slots(self.vertex_index(v))
            .iter()
            .filter(|&&s| s != NONE)
            .map(|&s| s as EdgeIdx)
            .collect()
    }

    /// Raw incidence row of vertex index `v` (`u32::MAX` marks an absent edge).
    #[inline]
    pub fn incident_slots(&self, v: usize) -> &[u32; 4] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].iter().filter(|&&s| s != NONE).count()
    }

    /// Unit squares (faces) with `slot` on their boundary, named by their
    /// lower-left corner vertex index.
    pub fn faces_of(&self, slot: EdgeIdx) -> Vec<usize> {
        let e = self.edge(slot);
        let candidates = match e.dir {
            Dir::East => [(0, 0), (0, -1)],
            Dir::North => [(0, 0), (-1, 0)],
        };
        let mut faces = Vec::with_capacity(2);
        for (dx, dy) in candidates {
            if let Some(corner) = self.offset(e.base, dx, dy) {
                if self.face_exists(corner) {
                    let f = self.vertex_index(corner);
                    if !faces.contains(&f) {
                        faces.push(f);
                    }
                }
            }
        }
        faces
    }

    fn face_exists(&self, corner: VertexId) -> bool {
        self.is_periodic()
            || (corner.x + 1 < self.config.width && corner.y + 1 < self.config.height)
    }

    /// The four boundary edges of the face with lower-left corner `corner`:
    /// bottom, top, left, right.
    pub fn face_edges(&self, corner: usize) -> [EdgeIdx; 4] {
        let c = self.vertex(corner);
        let up = self.offset(c, 0, 1).expect("face outside lattice");
        let right = self.offset(c, 1, 0).expect("face outside lattice");
        [
            2 * corner,
            2 * self.vertex_index(up),
            2 * corner + 1,
            2 * self.vertex_index(right) + 1,
        ]
    }

    /// Whether two distinct edges lie on the boundary of a common unit square.
    pub fn dual_adjacent(&self, e: EdgeIdx, f: EdgeIdx) -> Result<bool> {
        if e == f {
            return Err(Error::InvalidArgument(
                "dual adjacency is defined between distinct edges".into(),
            ));
        }
        Ok(self
            .faces_of(e)
            .into_iter()
            .any(|face| self.face_edges(face).contains(&f)))
    }

    /// All edges dually adjacent to `e`, deduplicated.
    pub fn dual_neighbors(&self, e: EdgeIdx) -> Vec<EdgeIdx> {
        let mut out = Vec::with_capacity(6);
        for face in self.faces_of(e) {
            for f in self.face_edges(face) {
                if f != e && !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        out
    }
}

/// Axis-aligned block of vertices `[x0, x0 + width) x [y0, y0 + height)`.
/// Coordinates may be negative; they wrap on a torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, width: usize, height: usize) -> Self {
        Self { x0, y0, width, height }
    }

    /// Shrinks the rectangle by `margin` on every side.
    pub fn inset(&self, margin: usize) -> Option<Rect> {
        if self.width <= 2 * margin || self.height <= 2 * margin {
            return None;
        }
        Some(Rect {
            x0: self.x0 + margin as i64,
            y0: self.y0 + margin as i64,
            width: self.width - 2 * margin,
            height: self.height - 2 * margin,
        })
    }

    /// Checks the rectangle fits the lattice without overlapping itself.
    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle {}x{}",
                self.width, self.height
            )));
        }
        let fits = if lattice.is_periodic() {
            self.width <= lattice.width() && self.height <= lattice.height()
        } else {
            self.x0 >= 0
                && self.y0 >= 0
                && self.x0 as usize + self.width <= lattice.width()
                && self.y0 as usize + self.height <= lattice.height()
        };
        if !fits {
            return Err(Error::InvalidArgument(format!(
                "rectangle {:?} does not fit a {}x{} lattice",
                self,
                lattice.width(),
                lattice.height()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn edge_counts() {
        let t = Lattice::new(LatticeConfig::torus(80, 40)).unwrap();
        assert_eq!(t.num_vertices(), 3200);
        assert_eq!(t.num_edges(), 6400);
        assert_eq!(t.edges().count(), 6400);

        let o = Lattice::new(LatticeConfig::open(3, 3)).unwrap();
        assert_eq!(o.num_vertices(), 9);
        assert_eq!(o.num_edges(), 12);
        assert_eq!(o.edges().count(), 12);
    }

    #[test]
    fn small_torus_rejected() {
        assert!(Lattice::new(LatticeConfig::torus(2, 2)).is_err());
        assert!(Lattice::new(LatticeConfig::torus(3, 2)).is_err());
        assert!(Lattice::new(LatticeConfig::torus(3, 3).with_k(5)).is_err());
        assert!(Lattice::new(LatticeConfig::open(2, 2)).is_ok());
    }

    #[test]
    fn incidence() {
        let t = Lattice::new(LatticeConfig::torus(3, 3)).unwrap();
        for v in t.vertices() {
            assert_eq!(t.incident_edges(v).len(), 4);
        }
        let inc = t.incident_edges(VertexId::new(0, 0));
        let wrap_east = t
            .edge_index(EdgeId { base: VertexId::new(2, 0), dir: Dir::East })
            .unwrap();
        assert_eq!(inc[2], wrap_east);

        let o = Lattice::new(LatticeConfig::open(3, 3)).unwrap();
        assert_eq!(o.incident_edges(VertexId::new(0, 0)).len(), 2);
        assert_eq!(o.incident_edges(VertexId::new(1, 0)).len(), 3);
        assert_eq!(o.incident_edges(VertexId::new(1, 1)).len(), 4);
    }

    #[test]
    fn canonical_bijection() {
        for cfg in [LatticeConfig::torus(5, 4), LatticeConfig::open(4, 5)] {
            let l = Lattice::new(cfg).unwrap();
            let mut pairs = HashSet::new();
            for e in l.edges() {
                let (a, b) = l.endpoints(e);
                assert_ne!(a, b);
                assert!(pairs.insert((a.min(b), a.max(b))));
                assert_eq!(l.edge_index(l.edge(e)), Some(e));
            }
            assert_eq!(pairs.len(), l.num_edges());
        }
    }

    #[test]
    fn dual_adjacency_examples() {
        let t = Lattice::new(LatticeConfig::torus(5, 5)).unwrap();
        let v = VertexId::new(1, 1);
        let bottom = t.edge_index(EdgeId { base: v, dir: Dir::East }).unwrap();
        let right = t
            .edge_index(EdgeId { base: VertexId::new(2, 1), dir: Dir::North })
            .unwrap();
        assert!(t.dual_adjacent(bottom, right).unwrap());
        let two_up = t
            .edge_index(EdgeId { base: VertexId::new(1, 3), dir: Dir::East })
            .unwrap();
        assert!(!t.dual_adjacent(bottom, two_up).unwrap());
        assert!(t.dual_adjacent(bottom, bottom).is_err());
    }

    #[test]
    fn six_dual_neighbors_on_torus() {
        let t = Lattice::new(LatticeConfig::torus(5, 5)).unwrap();
        for e in t.edges() {
            // two incident squares, three other boundary edges each
            let brute: Vec<_> = t
                .edges()
                .filter(|&f| f != e && t.dual_adjacent(e, f).unwrap())
                .collect();
            assert_eq!(brute.len(), 6);
            assert_eq!(t.dual_neighbors(e).len(), 6);
        }
    }

    #[test]
    fn shared_endpoint_vs_dual_adjacency() {
        // Perpendicular edges sharing an endpoint lie on a common square;
        // collinear ones never do.
        let t = Lattice::new(LatticeConfig::torus(5, 5)).unwrap();
        for e in t.edges() {
            for f in t.edges() {
                if e == f {
                    continue;
                }
                let (a, b) = t.endpoints(e);
                let (c, d) = t.endpoints(f);
                let shared = a == c || a == d || b == c || b == d;
                if !shared {
                    continue;
                }
                let perpendicular = t.edge(e).dir != t.edge(f).dir;
                assert_eq!(t.dual_adjacent(e, f).unwrap(), perpendicular);
            }
        }
    }

    #[test]
    fn translation_invariance() {
        let t = Lattice::new(LatticeConfig::torus(5, 4)).unwrap();
        let translate = |slot: EdgeIdx, dx: i64, dy: i64| {
            let e = t.edge(slot);
            let base = t.offset(e.base, dx, dy).unwrap();
            t.edge_index(EdgeId { base, dir: e.dir }).unwrap()
        };
        for v in t.vertices() {
            for dx in 0..5 {
                for dy in 0..4 {
                    let moved = t.offset(v, dx, dy).unwrap();
                    let expected: Vec<_> = t
                        .incident_edges(v)
                        .into_iter()
                        .map(|e| translate(e, dx, dy))
                        .collect();
                    assert_eq!(t.incident_edges(moved), expected);
                }
            }
        }
    }

    #[test]
    fn rect_validation() {
        let t = Lattice::new(LatticeConfig::torus(8, 8)).unwrap();
        assert!(Rect::new(-3, -3, 8, 8).validate(&t).is_ok());
        assert!(Rect::new(0, 0, 9, 8).validate(&t).is_err());
        assert!(Rect::new(0, 0, 0, 3).validate(&t).is_err());
        let o = Lattice::new(LatticeConfig::open(8, 8)).unwrap();
        assert!(Rect::new(-1, 0, 4, 4).validate(&o).is_err());
        assert_eq!(Rect::new(0, 0, 80, 40).inset(4), Some(Rect::new(4, 4, 72, 32)));
    }
}
