//! Cluster labeling, rectangle crossings and the coarse-grained `n`-open
//! predicate.

use serde::{Deserialize, Serialize};

use crate::classify::StatusField;
use crate::edge_set::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::{Dir, Lattice, LatticeConfig, Rect};
use crate::rng::{Domain, RngStream};

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdjacencyMode {
    /// Edges are adjacent when they share an endpoint; labels live on vertices.
    Primal,
    /// Edges are adjacent when they bound a common unit square; labels live on
    /// edge slots.
    DualEdgeAdjacency,
}

const UNLABELED: u32 = u32::MAX;

/// Component labels, dense in `0..num_labels`. Primal mode labels every
/// vertex (isolated vertices get their own label); dual mode labels included
/// edges only.
#[derive(Clone, Debug)]
pub struct ClusterLabels {
    pub mode: AdjacencyMode,
    labels: Vec<u32>,
    edge_counts: Vec<usize>,
}

impl ClusterLabels {
    pub fn label(&self, index: usize) -> Option<u32> {
        match self.labels.get(index) {
            Some(&l) if l != UNLABELED => Some(l),
            _ => None,
        }
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        matches!((self.label(a), self.label(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn num_labels(&self) -> usize {
        self.edge_counts.len()
    }

    /// Number of edges in each component, indexed by label.
    pub fn edge_counts(&self) -> &[usize] {
        &self.edge_counts
    }

    /// Components containing at least one edge.
    pub fn nontrivial_components(&self) -> usize {
        self.edge_counts.iter().filter(|&&c| c > 0).count()
    }
}

fn dense_labels(ds: &mut DisjointSet, members: impl Iterator<Item = (usize, bool)>, len: usize) -> (Vec<u32>, Vec<usize>) {
    let mut labels = vec![UNLABELED; len];
    let mut root_label = vec![UNLABELED; len];
    let mut next = 0u32;
    for (i, included) in members {
        if !included {
            continue;
        }
        let r = ds.find(i);
        if root_label[r] == UNLABELED {
            root_label[r] = next;
            next += 1;
        }
        labels[i] = root_label[r];
    }
    (labels, vec![0; next as usize])
}

pub fn cluster_labels(edges: &EdgeSet, lattice: &Lattice, mode: AdjacencyMode) -> ClusterLabels {
    match mode {
        AdjacencyMode::Primal => {
            let n = lattice.num_vertices();
            let mut ds = DisjointSet::new(n);
            for e in edges.iter().filter(|&e| lattice.contains_edge(e)) {
                let (a, b) = lattice.endpoints(e);
                ds.union(a, b);
            }
            let (labels, mut edge_counts) = dense_labels(&mut ds, (0..n).map(|v| (v, true)), n);
            for e in edges.iter().filter(|&e| lattice.contains_edge(e)) {
                edge_counts[labels[e / 2] as usize] += 1;
            }
            ClusterLabels {
                mode,
                labels,
                edge_counts,
            }
        }
        AdjacencyMode::DualEdgeAdjacency => {
            let m = lattice.num_slots();
            let included = |e: usize| edges.contains(e) && lattice.contains_edge(e);
            let mut ds = DisjointSet::new(m);
            for e in (0..m).filter(|&e| included(e)) {
                for f in lattice.dual_neighbors(e) {
                    if included(f) {
                        ds.union(e, f);
                    }
                }
            }
            let (labels, mut edge_counts) = dense_labels(&mut ds, (0..m).map(|e| (e, included(e))), m);
            for &l in labels.iter().filter(|&&l| l != UNLABELED) {
                edge_counts[l as usize] += 1;
            }
            ClusterLabels {
                mode,
                labels,
                edge_counts,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Whether included edges with both endpoints in `rect` connect the rect's
/// min side to its max side along `axis` (left to right for `Horizontal`).
pub fn has_crossing(edges: &EdgeSet, lattice: &Lattice, rect: Rect, axis: Axis) -> Result<bool> {
    has_crossing_within(edges, lattice, rect, rect, axis)
}

/// Whether included edges with both endpoints in `region` connect the min side
/// of `target` to its max side along `axis`. `target` must lie inside `region`.
pub fn has_crossing_within(edges: &EdgeSet, lattice: &Lattice, region: Rect, target: Rect, axis: Axis) -> Result<bool> {
    region.validate(lattice)?;
    target.validate(lattice)?;
    let inside = target.x0 >= region.x0
        && target.y0 >= region.y0
        && target.x0 + target.width as i64 <= region.x0 + region.width as i64
        && target.y0 + target.height as i64 <= region.y0 + region.height as i64;
    if !inside {
        return Err(Error::InvalidArgument(format!("{target:?} is not inside {region:?}")));
    }
    let span = match axis {
        Axis::Horizontal => target.width,
        Axis::Vertical => target.height,
    };
    if span == 1 {
        return Ok(true);
    }
    let (w, h) = (region.width, region.height);
    let local = |i: usize, j: usize| j * w + i;
    let source = w * h;
    let sink = source + 1;
    let mut ds = DisjointSet::new(w * h + 2);
    for j in 0..h {
        for i in 0..w {
            let v = lattice
                .wrap(region.x0 + i as i64, region.y0 + j as i64)
                .map(|v| lattice.vertex_index(v))
                .ok_or_else(|| Error::InvalidArgument("rectangle leaves the lattice".into()))?;
            if i + 1 < w && edges.contains(2 * v) {
                ds.union(local(i, j), local(i + 1, j));
            }
            if j + 1 < h && edges.contains(2 * v + 1) {
                ds.union(local(i, j), local(i, j + 1));
            }
        }
    }
    let ox = (target.x0 - region.x0) as usize;
    let oy = (target.y0 - region.y0) as usize;
    match axis {
        Axis::Horizontal => {
            for j in oy..oy + target.height {
                ds.union(source, local(ox, j));
                ds.union(sink, local(ox + target.width - 1, j));
            }
        }
        Axis::Vertical => {
            for i in ox..ox + target.width {
                ds.union(source, local(i, oy));
                ds.union(sink, local(i, oy + target.height - 1));
            }
        }
    }
    Ok(ds.same(source, sink))
}

/// An edge of the coarse-grained lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoarseEdge {
    pub x: i64,
    pub y: i64,
    pub dir: Dir,
}

impl CoarseEdge {
    pub fn east(x: i64, y: i64) -> Self {
        Self { x, y, dir: Dir::East }
    }

    pub fn north(x: i64, y: i64) -> Self {
        Self { x, y, dir: Dir::North }
    }
}

/// Geometry of the coarse-graining: cells are `2 * scale` by `scale`
/// (80 x 40 at the default scale), shrunk by the margin `n` on every side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingSpec {
    pub scale: usize,
    pub n: usize,
    pub square_paths: SquarePaths,
}

/// Where the paths crossing an end square may run. The long crossing always
/// stays inside the central rectangle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SquarePaths {
    /// Anywhere in the central rectangle, joining the square's two sides.
    #[default]
    Central,
    /// Inside the square itself.
    Square,
}

/// The three crossing subregions of one cell, in cell orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellGeometry {
    pub cell: Rect,
    pub central: Rect,
    /// First square along the long direction (left, or bottom for North cells).
    pub first_square: Rect,
    pub second_square: Rect,
    pub long_axis: Axis,
}

impl CrossingSpec {
    pub const DEFAULT_SCALE: usize = 40;

    pub fn new(n: usize) -> Result<Self> {
        Self::with_scale(Self::DEFAULT_SCALE, n)
    }

    pub fn with_scale(scale: usize, n: usize) -> Result<Self> {
        if scale < 2 || !scale.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("scale must be even and >= 2, got {scale}")));
        }
        if 2 * n >= scale {
            return Err(Error::InvalidArgument(format!(
                "margin n = {n} leaves no square inside a {}x{scale} cell",
                2 * scale
            )));
        }
        Ok(Self {
            scale,
            n,
            square_paths: SquarePaths::default(),
        })
    }

    pub fn with_square_paths(mut self, square_paths: SquarePaths) -> Self {
        self.square_paths = square_paths;
        self
    }

    pub fn geometry(&self, coarse: CoarseEdge) -> CellGeometry {
        let s = self.scale as i64;
        let n = self.n;
        let side = self.scale - 2 * n;
        let long = 2 * self.scale - 2 * n;
        match coarse.dir {
            Dir::East => {
                let cell = Rect::new(s * coarse.x - s, s * coarse.y - s / 2, 2 * self.scale, self.scale);
                let central = cell.inset(n).expect("margin checked at construction");
                CellGeometry {
                    cell,
                    central,
                    first_square: Rect::new(central.x0, central.y0, side, side),
                    second_square: Rect::new(central.x0 + (long - side) as i64, central.y0, side, side),
                    long_axis: Axis::Horizontal,
                }
            }
            Dir::North => {
                let cell = Rect::new(s * coarse.x - s / 2, s * coarse.y - s, self.scale, 2 * self.scale);
                let central = cell.inset(n).expect("margin checked at construction");
                CellGeometry {
                    cell,
                    central,
                    first_square: Rect::new(central.x0, central.y0, side, side),
                    second_square: Rect::new(central.x0, central.y0 + (long - side) as i64, side, side),
                    long_axis: Axis::Vertical,
                }
            }
        }
    }
}

/// Which of the three required crossings exist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCrossings {
    pub long: bool,
    pub first_square: bool,
    pub second_square: bool,
}

impl CellCrossings {
    pub fn all(&self) -> bool {
        self.long && self.first_square && self.second_square
    }
}

pub fn cell_crossings(edges: &EdgeSet, lattice: &Lattice, spec: &CrossingSpec, coarse: CoarseEdge) -> Result<CellCrossings> {
    let g = spec.geometry(coarse);
    g.cell.validate(lattice)?;
    let short_axis = match g.long_axis {
        Axis::Horizontal => Axis::Vertical,
        Axis::Vertical => Axis::Horizontal,
    };
    let square = |target: Rect| match spec.square_paths {
        SquarePaths::Central => has_crossing_within(edges, lattice, g.central, target, short_axis),
        SquarePaths::Square => has_crossing(edges, lattice, target, short_axis),
    };
    Ok(CellCrossings {
        long: has_crossing(edges, lattice, g.central, g.long_axis)?,
        first_square: square(g.first_square)?,
        second_square: square(g.second_square)?,
    })
}

/// A coarse edge is `n`-open when certainly occupied edges cross its central
/// rectangle lengthwise and cross both end squares crosswise.
pub fn is_n_open(status: &StatusField, lattice: &Lattice, spec: &CrossingSpec, coarse: CoarseEdge) -> Result<bool> {
    let occupied = status.occupied(lattice);
    Ok(cell_crossings(&occupied, lattice, spec, coarse)?.all())
}

/// Union with an independent Bernoulli(`eps`) bond field. The field is built
/// from one uniform per edge, so sprinklings at increasing `eps` on the same
/// stream are nested.
pub fn sprinkle(edges: &EdgeSet, lattice: &Lattice, eps: f64, rng: &RngStream) -> Result<EdgeSet> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside [0, 1]")));
    }
    let mut cursor = rng.cursor(Domain::Sprinkle, 0, 0);
    let mut out = edges.clone();
    for e in 0..lattice.num_slots() {
        let u = cursor.slot().uniform();
        if u < eps && lattice.contains_edge(e) {
            out.insert(e);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub primal_crossing: bool,
    pub dual_crossing: bool,
    pub largest_component_diameter: usize,
}

/// Left-to-right crossings of the `width x height` box in both adjacency
/// modes, plus the largest l-infinity diameter of a primal cluster. Edges
/// that wrap around a torus are ignored.
pub fn percolation_probe(edges: &EdgeSet, lattice: &Lattice) -> Result<ProbeResult> {
    let open = Lattice::new(LatticeConfig::open(lattice.width(), lattice.height()))?;
    let inside = EdgeSet::from_fn(&open, |e| edges.contains(e));
    let w = open.width();
    let h = open.height();

    let primal_crossing = has_crossing(&inside, &open, Rect::new(0, 0, w, h), Axis::Horizontal)?;

    let dual = cluster_labels(&inside, &open, AdjacencyMode::DualEdgeAdjacency);
    let mut touches_left = vec![false; dual.num_labels()];
    let mut touches_right = vec![false; dual.num_labels()];
    for e in inside.iter() {
        let label = dual.label(e).expect("included edge is labeled") as usize;
        let (a, b) = open.endpoints(e);
        for v in [a, b] {
            let x = open.vertex(v).x;
            touches_left[label] |= x == 0;
            touches_right[label] |= x + 1 == w;
        }
    }
    let dual_crossing = !inside.is_empty()
        && (0..dual.num_labels()).any(|l| touches_left[l] && touches_right[l]);

    let primal = cluster_labels(&inside, &open, AdjacencyMode::Primal);
    let mut extent = vec![(usize::MAX, 0usize, usize::MAX, 0usize); primal.num_labels()];
    for e in inside.iter() {
        let (a, b) = open.endpoints(e);
        for v in [a, b] {
            let p = open.vertex(v);
            let ext = &mut extent[primal.label(v).expect("vertex labeled") as usize];
            ext.0 = ext.0.min(p.x);
            ext.1 = ext.1.max(p.x);
            ext.2 = ext.2.min(p.y);
            ext.3 = ext.3.max(p.y);
        }
    }
    let largest_component_diameter = extent
        .iter()
        .filter(|e| e.0 != usize::MAX)
        .map(|e| (e.1 - e.0).max(e.3 - e.2))
        .max()
        .unwrap_or(0);
    Ok(ProbeResult {
        primal_crossing,
        dual_crossing,
        largest_component_diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::EdgeStatus;
    use crate::lattice::{EdgeId, VertexId};
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn torus(w: usize, h: usize) -> Lattice {
        Lattice::new(LatticeConfig::torus(w, h)).unwrap()
    }

    fn random_set(lattice: &Lattice, seed: u64, p: f64) -> EdgeSet {
        let empty = EdgeSet::empty(lattice);
        sprinkle(&empty, lattice, p, &RngStream::new(seed, 0)).unwrap()
    }

    /// Breadth-first search over vertices through included edges.
    fn bfs_components(edges: &EdgeSet, lattice: &Lattice) -> Vec<usize> {
        let n = lattice.num_vertices();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for e in lattice.incident_edges(lattice.vertex(v)) {
                    if !edges.contains(e) {
                        continue;
                    }
                    let (a, b) = lattice.endpoints(e);
                    let u = if a == v { b } else { a };
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        queue.push_back(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    #[test]
    fn union_find_agrees_with_bfs() {
        for cfg in [LatticeConfig::torus(12, 12), LatticeConfig::open(12, 12)] {
            let lattice = Lattice::new(cfg).unwrap();
            for seed in 0..40 {
                let p = 0.3 + 0.01 * seed as f64;
                let set = random_set(&lattice, seed, p);
                let labels = cluster_labels(&set, &lattice, AdjacencyMode::Primal);
                let bfs = bfs_components(&set, &lattice);
                for a in 0..lattice.num_vertices() {
                    for b in 0..lattice.num_vertices() {
                        assert_eq!(labels.same(a, b), bfs[a] == bfs[b]);
                    }
                }
            }
        }
    }

    #[test]
    fn labels_on_trivial_sets() {
        let lattice = torus(6, 6);
        let empty = EdgeSet::empty(&lattice);
        for mode in [AdjacencyMode::Primal, AdjacencyMode::DualEdgeAdjacency] {
            assert_eq!(cluster_labels(&empty, &lattice, mode).nontrivial_components(), 0);
            let full = cluster_labels(&EdgeSet::full(&lattice), &lattice, mode);
            assert_eq!(full.nontrivial_components(), 1);
        }
    }

    #[test]
    fn opposite_sides_of_a_square() {
        let lattice = torus(6, 6);
        let bottom = lattice.edge_index(EdgeId { base: VertexId::new(2, 2), dir: Dir::East }).unwrap();
        let top = lattice.edge_index(EdgeId { base: VertexId::new(2, 3), dir: Dir::East }).unwrap();
        let mut set = EdgeSet::empty(&lattice);
        set.insert(bottom);
        set.insert(top);
        let dual = cluster_labels(&set, &lattice, AdjacencyMode::DualEdgeAdjacency);
        assert!(dual.same(bottom, top));
        let primal = cluster_labels(&set, &lattice, AdjacencyMode::Primal);
        assert!(!primal.same(bottom / 2, top / 2));
    }

    #[test]
    fn crossing_examples() {
        let lattice = torus(10, 10);
        let rect = Rect::new(-2, 3, 7, 5);
        let full = EdgeSet::full(&lattice);
        let empty = EdgeSet::empty(&lattice);
        for axis in [Axis::Horizontal, Axis::Vertical] {
            assert!(has_crossing(&full, &lattice, rect, axis).unwrap());
            assert!(!has_crossing(&empty, &lattice, rect, axis).unwrap());
        }
        // straight row y = 5 from x = -2 to x = 4 (wrapping)
        let mut row = EdgeSet::empty(&lattice);
        for x in -2..4 {
            let v = lattice.wrap(x, 5).unwrap();
            row.insert(2 * lattice.vertex_index(v));
        }
        assert!(has_crossing(&row, &lattice, rect, Axis::Horizontal).unwrap());
        assert!(!has_crossing(&row, &lattice, rect, Axis::Vertical).unwrap());
        // the same row misses a rectangle one column wider
        assert!(!has_crossing(&row, &lattice, Rect::new(-2, 3, 8, 5), Axis::Horizontal).unwrap());
        assert!(has_crossing(&row, &lattice, Rect::new(-2, 3, 0, 5), Axis::Horizontal).is_err());
    }

    #[test]
    fn crossing_confined_to_rect() {
        // path leaves the rectangle through row 2 and returns
        let lattice = Lattice::new(LatticeConfig::open(6, 6)).unwrap();
        let mut set = EdgeSet::empty(&lattice);
        let e = |x, y, dir| lattice.edge_index(EdgeId { base: VertexId::new(x, y), dir }).unwrap();
        set.insert(e(0, 3, Dir::East));
        set.insert(e(1, 2, Dir::North));
        set.insert(e(1, 2, Dir::East));
        set.insert(e(2, 2, Dir::North));
        set.insert(e(2, 3, Dir::East));
        set.insert(e(3, 3, Dir::East));
        let rect = Rect::new(0, 3, 5, 2);
        assert!(!has_crossing(&set, &lattice, rect, Axis::Horizontal).unwrap());
        assert!(has_crossing(&set, &lattice, Rect::new(0, 2, 5, 3), Axis::Horizontal).unwrap());
    }

    #[test]
    fn crossing_within_larger_region() {
        let lattice = Lattice::new(LatticeConfig::open(6, 6)).unwrap();
        let mut set = EdgeSet::empty(&lattice);
        let e = |x, y, dir| lattice.edge_index(EdgeId { base: VertexId::new(x, y), dir }).unwrap();
        // leaves the target column range [1, 3) through column 3
        set.insert(e(1, 1, Dir::North));
        set.insert(e(1, 2, Dir::East));
        set.insert(e(2, 2, Dir::East));
        set.insert(e(3, 2, Dir::North));
        set.insert(e(3, 3, Dir::North));
        set.insert(e(2, 4, Dir::East));
        let target = Rect::new(1, 1, 2, 4);
        assert!(!has_crossing(&set, &lattice, target, Axis::Vertical).unwrap());
        let region = Rect::new(0, 1, 5, 4);
        assert!(has_crossing_within(&set, &lattice, region, target, Axis::Vertical).unwrap());
        assert!(has_crossing_within(&set, &lattice, target, region, Axis::Vertical).is_err());
    }

    #[test]
    fn square_path_modes_are_nested() {
        let lattice = torus(80, 40);
        for seed in 0..20 {
            let set = random_set(&lattice, seed, 0.55);
            let loose = CrossingSpec::new(4).unwrap();
            let strict = loose.with_square_paths(SquarePaths::Square);
            let a = cell_crossings(&set, &lattice, &strict, CoarseEdge::east(0, 0)).unwrap();
            let b = cell_crossings(&set, &lattice, &loose, CoarseEdge::east(0, 0)).unwrap();
            assert_eq!(a.long, b.long);
            assert!(!a.first_square || b.first_square);
            assert!(!a.second_square || b.second_square);
        }
    }

    #[test]
    fn cell_geometry() {
        let spec = CrossingSpec::new(4).unwrap();
        let g = spec.geometry(CoarseEdge::east(0, 0));
        assert_eq!(g.cell, Rect::new(-40, -20, 80, 40));
        assert_eq!(g.central, Rect::new(-36, -16, 72, 32));
        assert_eq!(g.first_square, Rect::new(-36, -16, 32, 32));
        assert_eq!(g.second_square, Rect::new(4, -16, 32, 32));
        let g = spec.geometry(CoarseEdge::north(1, 2));
        assert_eq!(g.cell, Rect::new(20, 40, 40, 80));
        assert_eq!(g.central, Rect::new(24, 44, 32, 72));
        assert_eq!(g.second_square, Rect::new(24, 84, 32, 32));
        assert!(CrossingSpec::new(20).is_err());
        assert!(CrossingSpec::new(19).is_ok());
    }

    #[test]
    fn n_open_extremes() {
        let lattice = torus(80, 40);
        let spec = CrossingSpec::new(4).unwrap();
        let all = StatusField::uniform(&lattice, 4, EdgeStatus::CertainlyOccupied);
        assert!(is_n_open(&all, &lattice, &spec, CoarseEdge::east(0, 0)).unwrap());
        let none = StatusField::uniform(&lattice, 4, EdgeStatus::PotentiallyOccupied);
        assert!(!is_n_open(&none, &lattice, &spec, CoarseEdge::east(0, 0)).unwrap());
        // a 40-high torus cannot host an 80-high North cell
        assert!(is_n_open(&all, &lattice, &spec, CoarseEdge::north(0, 0)).is_err());
        let tall = torus(40, 80);
        let all = StatusField::uniform(&tall, 4, EdgeStatus::CertainlyOccupied);
        assert!(is_n_open(&all, &tall, &spec, CoarseEdge::north(0, 0)).unwrap());
    }

    #[test]
    fn n_open_is_local() {
        let lattice = torus(100, 40);
        let spec = CrossingSpec::with_scale(20, 2).unwrap();
        let coarse = CoarseEdge::east(1, 1);
        let g = spec.geometry(coarse);
        for seed in 0..20 {
            let set = random_set(&lattice, seed, 0.7);
            let mut status = StatusField::uniform(&lattice, 2, EdgeStatus::CertainlyVacant);
            for e in set.iter() {
                status.set(e, EdgeStatus::CertainlyOccupied);
            }
            let before = is_n_open(&status, &lattice, &spec, coarse).unwrap();
            let in_cell = |v: VertexId| {
                let dx = (v.x as i64 - g.cell.x0).rem_euclid(100);
                let dy = (v.y as i64 - g.cell.y0).rem_euclid(40);
                dx < g.cell.width as i64 && dy < g.cell.height as i64
            };
            for e in lattice.edges() {
                let (a, b) = lattice.endpoints(e);
                if !(in_cell(lattice.vertex(a)) && in_cell(lattice.vertex(b))) {
                    status.set(e, EdgeStatus::CertainlyOccupied);
                }
            }
            assert_eq!(is_n_open(&status, &lattice, &spec, coarse).unwrap(), before);
        }
    }

    #[test]
    fn sprinkle_extremes_and_density() {
        let lattice = torus(40, 40);
        let base = random_set(&lattice, 77, 0.4);
        let rng = RngStream::new(3, 3);
        assert_eq!(sprinkle(&base, &lattice, 0.0, &rng).unwrap(), base);
        assert_eq!(sprinkle(&base, &lattice, 1.0, &rng).unwrap().len(), lattice.num_edges());
        assert!(sprinkle(&base, &lattice, 1.5, &rng).is_err());

        let eps = 0.2;
        let mut d0 = 0.0;
        let mut d = 0.0;
        let trials = 50;
        for t in 0..trials {
            let b = random_set(&lattice, 1000 + t, 0.4);
            d0 += b.len() as f64;
            d += sprinkle(&b, &lattice, eps, &RngStream::new(5, t)).unwrap().len() as f64;
        }
        let m = (trials as usize * lattice.num_edges()) as f64;
        let (d0, d) = (d0 / m, d / m);
        let expected = d0 + (1.0 - d0) * eps;
        // binomial sd with 160000 edges ~ 0.0012
        assert!((d - expected).abs() < 0.006, "{d} vs {expected}");
    }

    #[test]
    fn probe_extremes() {
        let lattice = torus(8, 8);
        let full = percolation_probe(&EdgeSet::full(&lattice), &lattice).unwrap();
        assert!(full.primal_crossing && full.dual_crossing);
        assert_eq!(full.largest_component_diameter, 7);
        let empty = percolation_probe(&EdgeSet::empty(&lattice), &lattice).unwrap();
        assert_eq!(empty, ProbeResult::default());
    }

    #[test]
    fn straight_line_is_not_a_dual_path() {
        // collinear neighbours share no unit square
        let lattice = Lattice::new(LatticeConfig::open(8, 8)).unwrap();
        let mut row = EdgeSet::empty(&lattice);
        for x in 0..7 {
            row.insert(lattice.edge_index(EdgeId { base: VertexId::new(x, 3), dir: Dir::East }).unwrap());
        }
        let p = percolation_probe(&row, &lattice).unwrap();
        assert!(p.primal_crossing);
        assert!(!p.dual_crossing);
        assert_eq!(p.largest_component_diameter, 7);
    }

    proptest! {
        #[test]
        fn crossings_are_monotone(seed in any::<u64>(), p in 0.2f64..0.8, extra in 0.0f64..0.5) {
            let lattice = torus(12, 12);
            let small = random_set(&lattice, seed, p);
            let big = sprinkle(&small, &lattice, extra, &RngStream::new(seed ^ 1, 1)).unwrap();
            prop_assert!(small.is_subset(&big));
            for axis in [Axis::Horizontal, Axis::Vertical] {
                let rect = Rect::new(-3, 2, 10, 9);
                if has_crossing(&small, &lattice, rect, axis).unwrap() {
                    prop_assert!(has_crossing(&big, &lattice, rect, axis).unwrap());
                }
            }
            let (a, b) = (percolation_probe(&small, &lattice).unwrap(), percolation_probe(&big, &lattice).unwrap());
            prop_assert!(!a.primal_crossing || b.primal_crossing);
            prop_assert!(!a.dual_crossing || b.dual_crossing);
            prop_assert!(a.largest_component_diameter <= b.largest_component_diameter);
        }

        #[test]
        fn sprinkling_is_nested_in_eps(seed in any::<u64>(), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
            let lattice = torus(9, 9);
            let base = EdgeSet::empty(&lattice);
            let rng = RngStream::new(seed, 0);
            let (lo, hi) = (e1.min(e2), e1.max(e2));
            let a = sprinkle(&base, &lattice, lo, &rng).unwrap();
            let b = sprinkle(&base, &lattice, hi, &rng).unwrap();
            prop_assert!(a.is_subset(&b));
        }
    }
}
