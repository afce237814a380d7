//! Edge classification after `n` rounds.
//!
//! With `alpha = inf` an edge reinforced at most `n - 1` times is certainly
//! vacant, exactly `n` times potentially occupied, at least `n + 1` times
//! certainly occupied; a vertex with two certainly vacant edges additionally
//! promotes its remaining edges to certainly occupied. With finite `alpha`
//! vertices next to a low-weight edge are corrupted at random with
//! probability `p_star`, and occupancy is certified only through the vertex
//! rule.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Alpha, WeightState};
use crate::edge_set::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rng::{Domain, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeStatus {
    CertainlyVacant,
    PotentiallyOccupied,
    CertainlyOccupied,
    Undetermined,
}

impl EdgeStatus {
    /// One-letter code used in snapshot documents.
    pub fn code(self) -> char {
        match self {
            EdgeStatus::CertainlyVacant => 'V',
            EdgeStatus::PotentiallyOccupied => 'P',
            EdgeStatus::CertainlyOccupied => 'O',
            EdgeStatus::Undetermined => 'U',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        Some(match c {
            'V' => EdgeStatus::CertainlyVacant,
            'P' => EdgeStatus::PotentiallyOccupied,
            'O' => EdgeStatus::CertainlyOccupied,
            'U' => EdgeStatus::Undetermined,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub vacant: usize,
    pub potential: usize,
    pub occupied: usize,
    pub undetermined: usize,
}

/// Per-edge statuses at round `n`, indexed by edge slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatusField {
    n: u32,
    status: Vec<EdgeStatus>,
}

impl StatusField {
    pub fn uniform(lattice: &Lattice, n: u32, status: EdgeStatus) -> Self {
        Self {
            n,
            status: vec![status; lattice.num_slots()],
        }
    }

    pub fn round(&self) -> u32 {
        self.n
    }

    pub fn get(&self, e: usize) -> EdgeStatus {
        self.status[e]
    }

    pub fn set(&mut self, e: usize, status: EdgeStatus) {
        self.status[e] = status;
    }

    pub fn counts(&self, lattice: &Lattice) -> StatusCounts {
        let mut c = StatusCounts::default();
        for e in lattice.edges() {
            match self.status[e] {
                EdgeStatus::CertainlyVacant => c.vacant += 1,
                EdgeStatus::PotentiallyOccupied => c.potential += 1,
                EdgeStatus::CertainlyOccupied => c.occupied += 1,
                EdgeStatus::Undetermined => c.undetermined += 1,
            }
        }
        c
    }

    pub fn edges_with(&self, lattice: &Lattice, status: EdgeStatus) -> EdgeSet {
        EdgeSet::from_fn(lattice, |e| self.status[e] == status)
    }

    pub fn occupied(&self, lattice: &Lattice) -> EdgeSet {
        self.edges_with(lattice, EdgeStatus::CertainlyOccupied)
    }

    /// Status codes of all slots in order, one letter each.
    pub fn to_codes(&self) -> String {
        self.status.iter().map(|s| s.code()).collect()
    }

    pub fn from_codes(lattice: &Lattice, n: u32, codes: &str) -> Result<Self> {
        let status = codes
            .chars()
            .map(|c| {
                EdgeStatus::from_code(c)
                    .ok_or_else(|| Error::Format(format!("unknown status code {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if status.len() != lattice.num_slots() {
            return Err(Error::Format(format!(
                "expected {} status codes, got {}",
                lattice.num_slots(),
                status.len()
            )));
        }
        Ok(Self { n, status })
    }
}

/// `1 ∧ ((n-1)^alpha * sum_{j>=n} j^-alpha)`.
///
/// Terms are summed directly until the integral tail bound drops below
/// `1e-15` of the running sum; for slowly decaying series the remainder after
/// a fixed number of terms is taken from the Euler-Maclaurin expansion.
pub fn p_star(alpha: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("p_star needs n >= 1".into()));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if n == 1 {
        return Ok(0.0);
    }
    if alpha <= 1.0 {
        return Ok(1.0);
    }
    const DIRECT_TERMS: u32 = 1000;
    let base = (n - 1) as f64;
    // ((n-1)/x)^alpha
    let g = |x: f64| (base / x).powf(alpha);
    let mut sum = 0.0;
    for j in n..n + DIRECT_TERMS {
        let x = j as f64;
        sum += g(x);
        // sum over i > j of g(i) <= integral from j of g = x g(x) / (alpha - 1)
        let tail = x * g(x) / (alpha - 1.0);
        if tail < 1e-15 * sum {
            return Ok(sum.min(1.0));
        }
        if sum > 1.0 {
            return Ok(1.0);
        }
    }
    let x = (n + DIRECT_TERMS) as f64;
    let gx = g(x);
    let a = alpha;
    let tail = x * gx / (a - 1.0) + gx / 2.0 + a * gx / (12.0 * x)
        - a * (a + 1.0) * (a + 2.0) * gx / (720.0 * x.powi(3))
        + a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) * gx / (30240.0 * x.powi(5));
    Ok((sum + tail).min(1.0))
}

/// Vertices declared corrupted after round `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorruptionField {
    corrupted: Vec<bool>,
    pub p_star: f64,
    pub n: u32,
}

impl CorruptionField {
    pub fn none(lattice: &Lattice, n: u32) -> Self {
        Self {
            corrupted: vec![false; lattice.num_vertices()],
            p_star: 0.0,
            n,
        }
    }

    pub fn from_vertices(lattice: &Lattice, n: u32, p_star: f64, vertices: &[usize]) -> Result<Self> {
        let mut field = Self::none(lattice, n);
        field.p_star = p_star;
        for &v in vertices {
            if v >= lattice.num_vertices() {
                return Err(Error::Format(format!("corrupted vertex {v} out of range")));
            }
            field.corrupted[v] = true;
        }
        Ok(field)
    }

    pub fn is_corrupted(&self, v: usize) -> bool {
        self.corrupted[v]
    }

    pub fn vertices(&self) -> Vec<usize> {
        (0..self.corrupted.len()).filter(|&v| self.corrupted[v]).collect()
    }

    pub fn len(&self) -> usize {
        self.corrupted.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_round(state: &WeightState, n: u32) -> Result<()> {
    if state.round() != n {
        return Err(Error::RoundMismatch {
            expected: n,
            actual: state.round(),
        });
    }
    Ok(())
}

/// Vertices incident to an edge of weight at most `n` (reinforced at most
/// `n - 1` times).
pub fn eligible_for_corruption(state: &WeightState, n: u32) -> Vec<bool> {
    let lattice = state.lattice();
    let counts = state.reinforce_counts();
    (0..lattice.num_vertices())
        .map(|v| {
            lattice
                .incident_slots(v)
                .iter()
                .any(|&e| counts[e as usize] < n)
        })
        .collect()
}

pub fn assign_corruption(
    state: &WeightState,
    n: u32,
    p_star: f64,
    rng: &RngStream,
) -> Result<CorruptionField> {
    check_round(state, n)?;
    if !(0.0..=1.0).contains(&p_star) {
        return Err(Error::InvalidArgument(format!("p_star {p_star} outside [0, 1]")));
    }
    let eligible = eligible_for_corruption(state, n);
    let mut cursor = rng.cursor(Domain::Corruption, n, 0);
    let corrupted = eligible
        .into_iter()
        .map(|ok| {
            let u = cursor.slot().uniform();
            ok && u < p_star
        })
        .collect();
    Ok(CorruptionField {
        corrupted,
        p_star,
        n,
    })
}

/// Count-only classification for `alpha = inf`, before the vertex rule.
pub fn count_based_statuses(state: &WeightState, n: u32) -> Result<StatusField> {
    check_round(state, n)?;
    let lattice = state.lattice();
    let counts = state.reinforce_counts();
    let mut field = StatusField::uniform(lattice, n, EdgeStatus::PotentiallyOccupied);
    for e in lattice.edges() {
        let c = counts[e];
        let status = if c < n {
            EdgeStatus::CertainlyVacant
        } else if c == n {
            EdgeStatus::PotentiallyOccupied
        } else {
            EdgeStatus::CertainlyOccupied
        };
        field.set(e, status);
    }
    Ok(field)
}

/// At every vertex with at least two certainly vacant edges, marks the other
/// incident edges certainly occupied. Vacancy is never changed, so the pass
/// is idempotent.
pub fn promote_by_vertex_rule(lattice: &Lattice, field: &mut StatusField) {
    for v in 0..lattice.num_vertices() {
        let row = lattice.incident_slots(v);
        let vacant = row
            .iter()
            .filter(|&&e| field.get(e as usize) == EdgeStatus::CertainlyVacant)
            .count();
        if vacant >= 2 {
            for &e in row {
                if field.get(e as usize) != EdgeStatus::CertainlyVacant {
                    field.set(e as usize, EdgeStatus::CertainlyOccupied);
                }
            }
        }
    }
}

pub fn classify_edges(
    state: &WeightState,
    n: u32,
    alpha: Alpha,
    corruption: Option<&CorruptionField>,
) -> Result<StatusField> {
    check_round(state, n)?;
    let lattice = state.lattice();
    match (alpha, corruption) {
        (Alpha::Infinite, None) => {
            let mut field = count_based_statuses(state, n)?;
            promote_by_vertex_rule(lattice, &mut field);
            Ok(field)
        }
        (Alpha::Finite(_), Some(corruption)) => {
            if corruption.corrupted.len() != lattice.num_vertices() {
                return Err(Error::InvalidArgument(
                    "corruption field belongs to a different lattice".into(),
                ));
            }
            let counts = state.reinforce_counts();
            let mut field = StatusField::uniform(lattice, n, EdgeStatus::Undetermined);
            let clean = |e: usize| {
                let (a, b) = lattice.endpoints(e);
                !corruption.is_corrupted(a) && !corruption.is_corrupted(b)
            };
            for e in lattice.edges() {
                if clean(e) && counts[e] < n {
                    field.set(e, EdgeStatus::CertainlyVacant);
                }
            }
            for v in 0..lattice.num_vertices() {
                if corruption.is_corrupted(v) {
                    continue;
                }
                let row = lattice.incident_slots(v);
                let vacant = row
                    .iter()
                    .filter(|&&e| field.get(e as usize) == EdgeStatus::CertainlyVacant)
                    .count();
                if vacant < 2 {
                    continue;
                }
                for &e in row {
                    let e = e as usize;
                    if clean(e) && field.get(e) != EdgeStatus::CertainlyVacant {
                        field.set(e, EdgeStatus::CertainlyOccupied);
                    }
                }
            }
            Ok(field)
        }
        _ => Err(Error::CorruptionMismatch),
    }
}

/// Finite-horizon bracket `lower ⊆ E_inf ⊆ upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct EinftyBounds {
    pub lower: EdgeSet,
    pub upper: EdgeSet,
}

/// `alpha = inf`: lower = edges reinforced at least `T + 1` times, upper =
/// edges reinforced at least `T` times. Finite `alpha`: lower = certified
/// occupied edges, upper = all edges.
pub fn einfty_bounds(
    state: &WeightState,
    alpha: Alpha,
    corruption: Option<&CorruptionField>,
) -> Result<EinftyBounds> {
    let lattice = state.lattice();
    let t = state.round();
    match alpha {
        Alpha::Infinite => {
            let counts = state.reinforce_counts();
            Ok(EinftyBounds {
                lower: EdgeSet::from_fn(lattice, |e| counts[e] > t),
                upper: EdgeSet::from_fn(lattice, |e| counts[e] >= t),
            })
        }
        Alpha::Finite(_) => {
            let field = classify_edges(state, t, alpha, corruption)?;
            Ok(EinftyBounds {
                lower: field.occupied(lattice),
                upper: EdgeSet::full(lattice),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ColoredState;
    use crate::lattice::LatticeConfig;
    use std::sync::Arc;

    fn torus(w: usize, h: usize) -> Arc<Lattice> {
        Arc::new(Lattice::new(LatticeConfig::torus(w, h)).unwrap())
    }

    // 3^15 * zeta(15, 4) etc., evaluated with mpmath at 40 digits.
    const P_STAR_ORACLE: [(f64, u32, f64); 6] = [
        (15.0, 4, 0.013_867_682_601_134_068),
        (15.0, 2, 3.058_823_630_702_049e-5),
        (10.0, 5, 0.129_882_593_164_054_16),
        (30.0, 4, 1.788_041_047_184_484_6e-4),
        (2.0, 2, 0.644_934_066_848_226_4),
        (1.8, 2, 0.882_229_618_102_822),
    ];

    #[test]
    fn p_star_matches_high_precision_sums() {
        for (alpha, n, expected) in P_STAR_ORACLE {
            let got = p_star(alpha, n).unwrap();
            assert!(
                ((got - expected) / expected).abs() < 1e-12,
                "alpha={alpha} n={n}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn p_star_edge_cases() {
        for alpha in [0.5, 2.0, 15.0] {
            assert_eq!(p_star(alpha, 1).unwrap(), 0.0);
        }
        assert_eq!(p_star(0.5, 4).unwrap(), 1.0);
        assert_eq!(p_star(1.0, 4).unwrap(), 1.0);
        // 2^2 * zeta(2, 3) ~ 1.58, capped
        assert_eq!(p_star(2.0, 3).unwrap(), 1.0);
        assert!(p_star(15.0, 0).is_err());
        assert!(p_star(-1.0, 3).is_err());
    }

    #[test]
    fn corruption_extremes() {
        let lattice = torus(10, 10);
        let mut s = WeightState::init(lattice.clone()).unwrap();
        let rng = RngStream::new(4, 1);
        s.run(4, Alpha::Finite(15.0), &rng);
        let eligible = eligible_for_corruption(&s, 4);
        let none = assign_corruption(&s, 4, 0.0, &rng).unwrap();
        assert!(none.is_empty());
        let all = assign_corruption(&s, 4, 1.0, &rng).unwrap();
        for (v, &ok) in eligible.iter().enumerate() {
            assert_eq!(all.is_corrupted(v), ok);
        }
        assert!(assign_corruption(&s, 3, 0.5, &rng).is_err());
    }

    #[test]
    fn heavy_vertex_never_corrupted() {
        let lattice = torus(5, 5);
        let mut s = WeightState::init(lattice.clone()).unwrap();
        let rng = RngStream::new(0, 0);
        s.run(2, Alpha::Finite(1.0), &rng);
        let mut weights = s.weights().to_vec();
        for &e in lattice.incident_slots(12) {
            weights[e as usize] = 10;
        }
        let s = WeightState::from_weights(lattice, 2, weights, s.last_increments().to_vec()).unwrap();
        for seed in 0..20 {
            let field = assign_corruption(&s, 2, 1.0, &RngStream::new(seed, 0)).unwrap();
            assert!(!field.is_corrupted(12));
        }
    }

    fn state_with_counts(lattice: &Arc<Lattice>, n: u32, counts: &[(usize, u32)], default: u32) -> WeightState {
        let mut w = vec![default + 1; lattice.num_slots()];
        for &(e, c) in counts {
            w[e] = c + 1;
        }
        WeightState::from_weights(lattice.clone(), n, w, vec![0; lattice.num_slots()]).unwrap()
    }

    #[test]
    fn count_rule() {
        let lattice = torus(6, 6);
        let s = state_with_counts(&lattice, 4, &[(0, 6), (1, 3)], 4);
        let f = classify_edges(&s, 4, Alpha::Infinite, None).unwrap();
        assert_eq!(f.get(0), EdgeStatus::CertainlyOccupied);
        assert_eq!(f.get(1), EdgeStatus::CertainlyVacant);
        assert_eq!(f.get(20), EdgeStatus::PotentiallyOccupied);
        assert!(classify_edges(&s, 3, Alpha::Infinite, None).is_err());
        let corr = CorruptionField::none(&lattice, 4);
        assert!(classify_edges(&s, 4, Alpha::Infinite, Some(&corr)).is_err());
        assert!(classify_edges(&s, 4, Alpha::Finite(15.0), None).is_err());
    }

    #[test]
    fn vertex_rule_promotes_remaining_edges() {
        let lattice = torus(6, 6);
        let v = 14;
        let row = *lattice.incident_slots(v);
        let s = state_with_counts(&lattice, 4, &[(row[0] as usize, 1), (row[1] as usize, 2)], 4);
        let counted = count_based_statuses(&s, 4).unwrap();
        assert_eq!(counted.get(row[2] as usize), EdgeStatus::PotentiallyOccupied);
        let f = classify_edges(&s, 4, Alpha::Infinite, None).unwrap();
        assert_eq!(f.get(row[2] as usize), EdgeStatus::CertainlyOccupied);
        assert_eq!(f.get(row[3] as usize), EdgeStatus::CertainlyOccupied);
        assert_eq!(f.get(row[0] as usize), EdgeStatus::CertainlyVacant);

        let mut twice = f.clone();
        promote_by_vertex_rule(&lattice, &mut twice);
        assert_eq!(twice, f);
    }

    #[test]
    fn finite_alpha_needs_vertex_certificate() {
        let lattice = torus(6, 6);
        let s = state_with_counts(&lattice, 4, &[(0, 7)], 4);
        let corr = CorruptionField::none(&lattice, 4);
        let f = classify_edges(&s, 4, Alpha::Finite(15.0), Some(&corr)).unwrap();
        assert_eq!(f.get(0), EdgeStatus::Undetermined);
        assert_eq!(f.counts(&lattice).undetermined, lattice.num_edges());
    }

    #[test]
    fn finite_alpha_certificates_and_corruption() {
        let lattice = torus(6, 6);
        let v = 14;
        let row = *lattice.incident_slots(v);
        let s = state_with_counts(&lattice, 4, &[(row[0] as usize, 0), (row[1] as usize, 3)], 4);
        let clean = CorruptionField::none(&lattice, 4);
        let f = classify_edges(&s, 4, Alpha::Finite(15.0), Some(&clean)).unwrap();
        assert_eq!(f.get(row[2] as usize), EdgeStatus::CertainlyOccupied);
        assert_eq!(f.get(row[3] as usize), EdgeStatus::CertainlyOccupied);
        assert_eq!(f.get(row[0] as usize), EdgeStatus::CertainlyVacant);

        // corrupting the far endpoint of a vacant certificate voids it
        let (a, b) = lattice.endpoints(row[0] as usize);
        let far = if a == v { b } else { a };
        let corr = CorruptionField::from_vertices(&lattice, 4, 1.0, &[far]).unwrap();
        let f = classify_edges(&s, 4, Alpha::Finite(15.0), Some(&corr)).unwrap();
        assert_eq!(f.get(row[0] as usize), EdgeStatus::Undetermined);
        assert_eq!(f.get(row[2] as usize), EdgeStatus::Undetermined);

        let corr = CorruptionField::from_vertices(&lattice, 4, 1.0, &[v]).unwrap();
        let f = classify_edges(&s, 4, Alpha::Finite(15.0), Some(&corr)).unwrap();
        for e in row {
            assert_eq!(f.get(e as usize), EdgeStatus::Undetermined);
        }
    }

    #[test]
    fn round_zero_is_all_potential() {
        let lattice = torus(8, 8);
        let s = WeightState::init(lattice.clone()).unwrap();
        let f = classify_edges(&s, 0, Alpha::Infinite, None).unwrap();
        let c = f.counts(&lattice);
        assert_eq!(c.potential, lattice.num_edges());
        assert_eq!(c.occupied, 0);
    }

    #[test]
    fn bounds_match_colored_sets() {
        let lattice = torus(9, 7);
        let rng = RngStream::new(21, 3);
        let mut w = WeightState::init(lattice.clone()).unwrap();
        let mut c = ColoredState::init(lattice.clone()).unwrap();
        let b0 = einfty_bounds(&w, Alpha::Infinite, None).unwrap();
        assert!(b0.lower.is_empty());
        assert_eq!(b0.upper.len(), lattice.num_edges());
        let mut prev = b0;
        for _ in 0..30 {
            w.step(Alpha::Infinite, &rng);
            c.step(&rng);
            let b = einfty_bounds(&w, Alpha::Infinite, None).unwrap();
            let sets = c.sets();
            assert_eq!(b.lower, sets.blue);
            assert_eq!(b.upper, sets.blue.union(&sets.undecided));
            assert!(b.lower.is_subset(&b.upper));
            assert!(prev.lower.is_subset(&b.lower));
            assert!(b.upper.is_subset(&prev.upper));
            prev = b;
        }
    }

    #[test]
    fn status_codes_roundtrip() {
        let lattice = torus(5, 5);
        let mut s = WeightState::init(lattice.clone()).unwrap();
        s.run(3, Alpha::Infinite, &RngStream::new(1, 1));
        let f = classify_edges(&s, 3, Alpha::Infinite, None).unwrap();
        let back = StatusField::from_codes(&lattice, 3, &f.to_codes()).unwrap();
        assert_eq!(back, f);
        assert!(StatusField::from_codes(&lattice, 3, "VX").is_err());
    }
}
