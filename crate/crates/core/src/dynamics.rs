//! Reinforcement dynamics.
//!
//! Each round, every vertex picks `k` of its four incident edges based on the
//! current weights and every edge gains one unit of weight per endpoint that
//! picked it. With `alpha = inf` the pick is the top-`k` by weight with ties
//! broken by independent uniform keys; with finite `alpha` a `k`-tuple is drawn
//! with probability proportional to the product of its weights to the power
//! `alpha`. All vertices read the same pre-round weights.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::edge_set::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rng::{Domain, RngStream};

/// Reinforcement exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    Infinite,
    Finite(f64),
}

impl Alpha {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Alpha::Finite(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "alpha must be a positive real or inf, got {value}"
            )))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Alpha::Infinite)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Infinite => f.write_str("inf"),
            Alpha::Finite(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Alpha::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse alpha {s:?}")))?;
                Alpha::finite(v)
            }
        }
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha::Infinite => s.serialize_str("inf"),
            Alpha::Finite(a) => s.serialize_f64(*a),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let alpha = match Raw::deserialize(d)? {
            Raw::Num(v) => Alpha::finite(v),
            Raw::Str(s) => s.parse(),
        };
        alpha.map_err(serde::de::Error::custom)
    }
}

/// Bitmask over the positions of a vertex's incidence row (bit `i` set means
/// the `i`-th incident edge in E, N, W, S order was selected).
pub type Selection = u8;

const MAX_TUPLES: usize = 6;

/// All `k`-subsets of `0..d` as bitmasks, in increasing mask order.
fn k_subsets(d: usize, k: usize) -> ([Selection; MAX_TUPLES], usize) {
    let mut out = [0; MAX_TUPLES];
    let mut len = 0;
    for mask in 0u8..(1 << d) {
        if mask.count_ones() as usize == k {
            out[len] = mask;
            len += 1;
        }
    }
    (out, len)
}

/// Top-`k` positions by weight, ties ordered by the larger key.
pub fn select_topk_inf(weights: &[u32], k: usize, keys: &[u32; 4]) -> Selection {
    let d = weights.len();
    debug_assert!(d <= 4);
    let mut order = [0usize, 1, 2, 3];
    let order = &mut order[..d];
    order.sort_unstable_by(|&a, &b| {
        weights[b]
            .cmp(&weights[a])
            .then(keys[b].cmp(&keys[a]))
            .then(a.cmp(&b))
    });
    order[..k.min(d)].iter().fold(0, |m, &i| m | (1 << i))
}

/// Exact selection law for finite `alpha`: every `k`-tuple with its
/// probability, proportional to `prod W^alpha` (normalized in log space).
pub fn tuple_probabilities(weights: &[u32], k: usize, alpha: f64) -> Vec<(Selection, f64)> {
    let logs: Vec<f64> = weights.iter().map(|&w| (w as f64).ln()).collect();
    let (tuples, len) = k_subsets(logs.len(), k);
    let (scores, total) = tuple_scores(&logs, &tuples[..len], alpha);
    tuples[..len]
        .iter()
        .zip(&scores[..len])
        .map(|(&t, &s)| (t, s / total))
        .collect()
}

/// Unnormalized tuple masses `exp(alpha * (sum log W - max))` and their sum.
#[inline]
fn tuple_scores(logs: &[f64], tuples: &[Selection], alpha: f64) -> ([f64; MAX_TUPLES], f64) {
    let mut scores = [0.0; MAX_TUPLES];
    let mut max = f64::NEG_INFINITY;
    for (slot, &t) in scores.iter_mut().zip(tuples) {
        let mut s = 0.0;
        for (i, &l) in logs.iter().enumerate() {
            if t & (1 << i) != 0 {
                s += l;
            }
        }
        *slot = alpha * s;
        max = max.max(*slot);
    }
    let mut total = 0.0;
    for s in scores[..tuples.len()].iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    (scores, total)
}

#[inline]
fn sample_from_logs(logs: &[f64], k: usize, alpha: f64, u: f64) -> Selection {
    let (tuples, len) = k_subsets(logs.len(), k);
    let (scores, total) = tuple_scores(logs, &tuples[..len], alpha);
    let target = u * total;
    let mut acc = 0.0;
    for i in 0..len {
        acc += scores[i];
        if target < acc {
            return tuples[i];
        }
    }
    // u * total can round up to total
    tuples[len - 1]
}

/// Draws a `k`-tuple with probability proportional to `prod W^alpha`, using
/// one uniform `u` in `[0, 1)`.
pub fn sample_tuple_alpha(weights: &[u32], k: usize, alpha: f64, u: f64) -> Selection {
    let mut logs = [0.0; 4];
    for (l, &w) in logs.iter_mut().zip(weights) {
        *l = (w as f64).ln();
    }
    sample_from_logs(&logs[..weights.len()], k, alpha, u)
}

fn require_periodic(lattice: &Lattice) -> Result<()> {
    if lattice.is_periodic() {
        Ok(())
    } else {
        Err(Error::InvalidLattice(
            "dynamics run on periodic lattices only".into(),
        ))
    }
}

#[inline]
fn gather<T: Copy + Default>(row: &[u32; 4], values: &[T]) -> [T; 4] {
    [
        values[row[0] as usize],
        values[row[1] as usize],
        values[row[2] as usize],
        values[row[3] as usize],
    ]
}

/// Edge weights `W_e(t)` of the reinforcement process on a torus.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightState {
    lattice: Arc<Lattice>,
    round: u32,
    weight: Vec<u32>,
    last_increment: Vec<u8>,
    reinforce_count: Vec<u32>,
}

impl WeightState {
    /// Round 0: every weight is 1.
    pub fn init(lattice: Arc<Lattice>) -> Result<Self> {
        require_periodic(&lattice)?;
        let m = lattice.num_slots();
        Ok(Self {
            lattice,
            round: 0,
            weight: vec![1; m],
            last_increment: vec![0; m],
            reinforce_count: vec![0; m],
        })
    }

    /// Rebuilds a state from stored weights, e.g. a snapshot.
    pub fn from_weights(
        lattice: Arc<Lattice>,
        round: u32,
        weight: Vec<u32>,
        last_increment: Vec<u8>,
    ) -> Result<Self> {
        require_periodic(&lattice)?;
        let m = lattice.num_slots();
        if weight.len() != m || last_increment.len() != m {
            return Err(Error::Format(format!(
                "expected {m} edge weights and increments, got {} and {}",
                weight.len(),
                last_increment.len()
            )));
        }
        if weight.contains(&0) || last_increment.iter().any(|&i| i > 2) {
            return Err(Error::Format("weights must be >= 1 and increments <= 2".into()));
        }
        let reinforce_count = weight.iter().map(|&w| w - 1).collect();
        Ok(Self {
            lattice,
            round,
            weight,
            last_increment,
            reinforce_count,
        })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn weights(&self) -> &[u32] {
        &self.weight
    }

    pub fn last_increments(&self) -> &[u8] {
        &self.last_increment
    }

    /// Number of times each edge has been reinforced, `W_e - 1`.
    pub fn reinforce_counts(&self) -> &[u32] {
        &self.reinforce_count
    }

    /// `sum_e (W_e - 1)`; equals `k * |V| * round`.
    pub fn total_reinforcements(&self) -> u64 {
        self.reinforce_count.iter().map(|&c| c as u64).sum()
    }

    /// Each vertex's selection for the next round, read off the current weights.
    pub fn selections(&self, alpha: Alpha, rng: &RngStream) -> Vec<Selection> {
        let lattice = &*self.lattice;
        let k = lattice.k();
        let mut cursor = rng.cursor(Domain::Selection, self.round, 0);
        let n = lattice.num_vertices();
        match alpha {
            Alpha::Infinite => (0..n)
                .map(|v| {
                    let keys = cursor.slot().words();
                    let w = gather(lattice.incident_slots(v), &self.weight);
                    select_topk_inf(&w, k, &keys)
                })
                .collect(),
            Alpha::Finite(a) => {
                let logs: Vec<f64> = self.weight.iter().map(|&w| (w as f64).ln()).collect();
                (0..n)
                    .map(|v| {
                        let u = cursor.slot().uniform();
                        let l = gather(lattice.incident_slots(v), &logs);
                        sample_from_logs(&l, k, a, u)
                    })
                    .collect()
            }
        }
    }

    /// Adds one unit of weight per selecting endpoint and advances the round.
    pub fn apply(&mut self, selections: &[Selection]) {
        assert_eq!(selections.len(), self.lattice.num_vertices());
        self.last_increment.iter_mut().for_each(|i| *i = 0);
        for (v, &sel) in selections.iter().enumerate() {
            let row = self.lattice.incident_slots(v);
            for (i, &e) in row.iter().enumerate() {
                if sel & (1 << i) != 0 {
                    self.last_increment[e as usize] += 1;
                }
            }
        }
        for ((w, c), &inc) in self
            .weight
            .iter_mut()
            .zip(self.reinforce_count.iter_mut())
            .zip(&self.last_increment)
        {
            *w += inc as u32;
            *c += inc as u32;
        }
        self.round += 1;
    }

    /// One synchronous round.
    pub fn step(&mut self, alpha: Alpha, rng: &RngStream) {
        let sel = self.selections(alpha, rng);
        self.apply(&sel);
    }

    pub fn run(&mut self, rounds: u32, alpha: Alpha, rng: &RngStream) {
        for _ in 0..rounds {
            self.step(alpha, rng);
        }
    }

    #[cfg(test)]
    pub(crate) fn weights_mut(&mut self) -> &mut [u32] {
        &mut self.weight
    }

    /// Corrupts one edge weight so invariant checks have something to catch.
    pub(crate) fn inject_fault(&mut self) {
        self.weight[0] += 1;
        self.reinforce_count[0] += 1;
    }
}

/// Blue/red counter bookkeeping of the `alpha = inf` process. Each round a
/// vertex adds blue to its top-`k` edges by blue count and red to the rest,
/// so `blue + red = 2 * round + 2` on every edge.
#[derive(Clone, Debug, PartialEq)]
pub struct ColoredState {
    lattice: Arc<Lattice>,
    round: u32,
    blue: Vec<u32>,
    red: Vec<u32>,
}

/// Threshold sets of a colored state: `blue` = {b > n+1}, `red` = {r > n+1},
/// `undecided` = {b = n+1}.
#[derive(Clone, Debug, PartialEq)]
pub struct ColoredSets {
    pub blue: EdgeSet,
    pub red: EdgeSet,
    pub undecided: EdgeSet,
}

impl ColoredSets {
    /// Pairwise disjoint with union equal to the edge set.
    pub fn is_partition(&self, lattice: &Lattice) -> bool {
        lattice.edges().all(|e| {
            [&self.blue, &self.red, &self.undecided]
                .iter()
                .filter(|s| s.contains(e))
                .count()
                == 1
        })
    }
}

impl ColoredState {
    pub fn init(lattice: Arc<Lattice>) -> Result<Self> {
        require_periodic(&lattice)?;
        let m = lattice.num_slots();
        Ok(Self {
            lattice,
            round: 0,
            blue: vec![1; m],
            red: vec![1; m],
        })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn blue(&self) -> &[u32] {
        &self.blue
    }

    pub fn red(&self) -> &[u32] {
        &self.red
    }

    /// One round; draws the same tie-break keys as [`WeightState::step`] with
    /// `Alpha::Infinite` on the same stream.
    pub fn step(&mut self, rng: &RngStream) {
        let lattice = &*self.lattice;
        let k = lattice.k();
        let mut cursor = rng.cursor(Domain::Selection, self.round, 0);
        let mut blue_inc = vec![0u8; self.blue.len()];
        let mut red_inc = vec![0u8; self.red.len()];
        for v in 0..lattice.num_vertices() {
            let keys = cursor.slot().words();
            let row = lattice.incident_slots(v);
            let b = gather(row, &self.blue);
            let sel = select_topk_inf(&b, k, &keys);
            for (i, &e) in row.iter().enumerate() {
                if sel & (1 << i) != 0 {
                    blue_inc[e as usize] += 1;
                } else {
                    red_inc[e as usize] += 1;
                }
            }
        }
        for (b, i) in self.blue.iter_mut().zip(blue_inc) {
            *b += i as u32;
        }
        for (r, i) in self.red.iter_mut().zip(red_inc) {
            *r += i as u32;
        }
        self.round += 1;
    }

    pub fn run(&mut self, rounds: u32, rng: &RngStream) {
        for _ in 0..rounds {
            self.step(rng);
        }
    }

    pub fn sets(&self) -> ColoredSets {
        let lattice = &*self.lattice;
        let t = self.round + 1;
        ColoredSets {
            blue: EdgeSet::from_fn(lattice, |e| self.blue[e] > t),
            red: EdgeSet::from_fn(lattice, |e| self.red[e] > t),
            undecided: EdgeSet::from_fn(lattice, |e| self.blue[e] == t),
        }
    }
}

/// Independent k-out: every vertex picks a uniform `k`-subset of its incident
/// edges; the result is the union of all picks.
pub fn independent_kout(lattice: &Lattice, k: usize, rng: &RngStream) -> Result<EdgeSet> {
    require_periodic(lattice)?;
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidArgument(format!("k must lie in 1..=4, got {k}")));
    }
    let mut set = EdgeSet::empty(lattice);
    let mut cursor = rng.cursor(Domain::IndependentKOut, 0, 0);
    for v in 0..lattice.num_vertices() {
        let keys = cursor.slot().words();
        let sel = select_topk_inf(&[1, 1, 1, 1], k, &keys);
        for (i, &e) in lattice.incident_slots(v).iter().enumerate() {
            if sel & (1 << i) != 0 {
                set.insert(e as usize);
            }
        }
    }
    Ok(set)
}
