//! Property suite: exact invariants along seeded trajectories, plus Monte
//! Carlo checks of distributional claims.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{
    assign_corruption, classify_edges, count_based_statuses, eligible_for_corruption, einfty_bounds,
    p_star, promote_by_vertex_rule, EdgeStatus,
};
use crate::connectivity::{is_n_open, CoarseEdge, CrossingSpec};
use crate::dynamics::{sample_tuple_alpha, select_topk_inf, Alpha, ColoredSets, ColoredState, Selection, WeightState};
use crate::edge_set::EdgeSet;
use crate::error::Result;
use crate::experiment::with_threads;
use crate::lattice::{Lattice, LatticeConfig};
use crate::rng::{Domain, RngStream};
use crate::stats::{chi_square_gof, Moments};

pub const CONSERVATION: &str = "conservation";
pub const INCREMENT_BOUND: &str = "increment_bound";
pub const COUNTER_IDENTITY: &str = "counter_identity";
pub const COUPLING: &str = "blue_equals_weight";
pub const PARTITION: &str = "partition";
pub const MONOTONICITY: &str = "monotonicity";
pub const STABILIZATION: &str = "stabilization";
pub const CLASSIFY_AGREEMENT: &str = "classify_colored_agreement";
pub const BOUNDS_NESTING: &str = "einfty_bounds";
pub const UPGRADE_IDEMPOTENT: &str = "vertex_rule_idempotent";
pub const CORRUPTION_ELIGIBILITY: &str = "corruption_eligibility";

/// Finite `alpha` used for the finite-regime trajectory checks.
const FINITE_ALPHA: f64 = 3.0;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seeds: Range<u64>,
    pub sizes: Vec<usize>,
    pub rounds: u32,
    /// Run the Monte Carlo checks as well as the exact invariants.
    pub statistics: bool,
    /// Corrupt one weight mid-run so the suite has something to report.
    pub inject_fault: bool,
    pub threads: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seeds: 0..100,
            sizes: vec![16],
            rounds: 50,
            statistics: true,
            inject_fault: false,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub seed: u64,
    pub size: usize,
    pub round: u32,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated: seed {}, {}x{} torus, round {}: {}",
            self.invariant, self.seed, self.size, self.size, self.round, self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatCheck {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub detail: String,
}

impl fmt::Display for StatCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub trajectories: u64,
    pub checked_rounds: u64,
    pub violations: Vec<Violation>,
    pub statistics: Vec<StatCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.statistics.iter().all(|s| s.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "exact invariants: {} trajectories, {} rounds checked, {} violations",
            self.trajectories,
            self.checked_rounds,
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        for s in &self.statistics {
            writeln!(f, "{s}")?;
        }
        write!(f, "{}", if self.passed() { "all properties hold" } else { "PROPERTY FAILURES" })
    }
}

pub fn run_property_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let mut cases = Vec::new();
    for &size in &config.sizes {
        for seed in config.seeds.clone() {
            cases.push((seed, size));
        }
    }
    let fault_case = cases.first().copied();
    let outcomes = with_threads(config.threads, || {
        cases
            .par_iter()
            .map(|&(seed, size)| {
                let fault = config.inject_fault && Some((seed, size)) == fault_case;
                check_trajectory(seed, size, config.rounds, fault)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut report = SuiteReport::default();
    for (violations, rounds) in outcomes {
        report.trajectories += 1;
        report.checked_rounds += rounds;
        report.violations.extend(violations);
    }
    if config.statistics {
        let base = config.seeds.start;
        report.statistics = with_threads(config.threads, || -> Result<Vec<StatCheck>> {
            Ok(vec![
                color_symmetry(base, 2000, 8, 20)?,
                not_vacant_density(base, 1000, 16, 50)?,
                blue_density(base, 1000, 16, 50)?,
                selection_oracle_inf(base, [1, 1, 1, 1], 100_000),
                selection_oracle_inf(base, [3, 3, 3, 1], 100_000),
                selection_oracle_alpha(base, [2, 1, 1, 1], 1.0, 100_000),
                finite_alpha_concentration(base, 100_000),
                one_dependence(base, 2000, 4)?,
            ])
        })??;
    }
    Ok(report)
}

struct Recorder {
    seed: u64,
    size: usize,
    violations: Vec<Violation>,
}

impl Recorder {
    /// Records the first failure of each invariant only.
    fn check(&mut self, ok: bool, invariant: &'static str, round: u32, detail: impl FnOnce() -> String) {
        if !ok && !self.violations.iter().any(|v| v.invariant == invariant) {
            self.violations.push(Violation {
                invariant,
                seed: self.seed,
                size: self.size,
                round,
                detail: detail(),
            });
        }
    }
}

/// Coupled weight and colored runs at `alpha = inf`, then a finite-alpha run,
/// with every invariant asserted after every round.
fn check_trajectory(seed: u64, size: usize, rounds: u32, fault: bool) -> Result<(Vec<Violation>, u64)> {
    let lattice = Arc::new(Lattice::new(LatticeConfig::torus(size, size))?);
    let rng = RngStream::new(seed, 0);
    let mut rec = Recorder {
        seed,
        size,
        violations: Vec::new(),
    };
    let mut weights = WeightState::init(lattice.clone())?;
    let mut colored = ColoredState::init(lattice.clone())?;
    let mut prev_sets = colored.sets();
    rec.check(
        prev_sets.blue.is_empty() && prev_sets.red.is_empty(),
        PARTITION,
        0,
        || "B_0 or R_0 nonempty".into(),
    );
    for t in 1..=rounds {
        let before = weights.weights().to_vec();
        weights.step(Alpha::Infinite, &rng);
        colored.step(&rng);
        if fault && t == rounds.div_ceil(2) {
            weights.inject_fault();
        }
        check_weights(&mut rec, &lattice, &weights, &before, t);
        let blue = colored.blue();
        let red = colored.red();
        let bad = lattice.edges().find(|&e| blue[e] + red[e] != 2 * t + 2);
        rec.check(bad.is_none(), COUNTER_IDENTITY, t, || {
            let e = bad.unwrap_or_default();
            format!("edge {e}: b + r = {} != {}", blue[e] + red[e], 2 * t + 2)
        });
        let bad = lattice.edges().find(|&e| blue[e] != weights.weights()[e]);
        rec.check(bad.is_none(), COUPLING, t, || {
            let e = bad.unwrap_or_default();
            format!("edge {e}: blue {} vs weight {}", blue[e], weights.weights()[e])
        });
        let sets = colored.sets();
        rec.check(sets.is_partition(&lattice), PARTITION, t, || "B, R, U do not partition E".into());
        let monotone = prev_sets.blue.is_subset(&sets.blue)
            && prev_sets.red.is_subset(&sets.red)
            && sets.undecided.is_subset(&prev_sets.undecided);
        rec.check(monotone, MONOTONICITY, t, || "B or R shrank, or U grew".into());
        let inc = weights.last_increments();
        let bad = prev_sets
            .blue
            .iter()
            .find(|&e| inc[e] != 2)
            .or_else(|| prev_sets.red.iter().find(|&e| inc[e] != 0));
        rec.check(bad.is_none(), STABILIZATION, t, || {
            let e = bad.unwrap_or_default();
            format!("edge {e} decided at round {} but incremented by {}", t - 1, inc[e])
        });
        check_classification(&mut rec, &lattice, &weights, &sets, t)?;
        prev_sets = sets;
    }
    let mut finite = WeightState::init(lattice.clone())?;
    let alpha = Alpha::Finite(FINITE_ALPHA);
    for t in 1..=rounds {
        let before = finite.weights().to_vec();
        finite.step(alpha, &rng);
        check_weights(&mut rec, &lattice, &finite, &before, t);
        if t <= 6 {
            let eligible = eligible_for_corruption(&finite, t);
            let c = assign_corruption(&finite, t, p_star(FINITE_ALPHA, t)?.max(0.5), &rng)?;
            let bad = c.vertices().into_iter().find(|&v| !eligible[v]);
            rec.check(bad.is_none(), CORRUPTION_ELIGIBILITY, t, || {
                format!("vertex {} corrupted without a low-weight edge", bad.unwrap_or_default())
            });
            let status = classify_edges(&finite, t, alpha, Some(&c))?;
            let bad = lattice.edges().find(|&e| {
                let (a, b) = lattice.endpoints(e);
                (c.is_corrupted(a) || c.is_corrupted(b)) && status.get(e) != EdgeStatus::Undetermined
            });
            rec.check(bad.is_none(), CORRUPTION_ELIGIBILITY, t, || {
                format!("edge {} touches a corrupted vertex but is classified", bad.unwrap_or_default())
            });
        }
    }
    Ok((rec.violations, 2 * rounds as u64))
}

fn check_weights(rec: &mut Recorder, lattice: &Lattice, state: &WeightState, before: &[u32], t: u32) {
    let k = lattice.k() as u64;
    let expected = k * lattice.num_vertices() as u64 * t as u64;
    let total = state.total_reinforcements();
    rec.check(total == expected, CONSERVATION, t, || {
        format!("sum(W - 1) = {total}, expected {expected}")
    });
    let w = state.weights();
    let inc = state.last_increments();
    let bad = lattice
        .edges()
        .find(|&e| inc[e] > 2 || w[e] < before[e] || w[e] - before[e] != inc[e] as u32);
    rec.check(bad.is_none(), INCREMENT_BOUND, t, || {
        let e = bad.unwrap_or_default();
        format!("edge {e}: {} -> {} with recorded increment {}", before[e], w[e], inc[e])
    });
}

fn check_classification(rec: &mut Recorder, lattice: &Lattice, state: &WeightState, sets: &ColoredSets, t: u32) -> Result<()> {
    let counted = count_based_statuses(state, t)?;
    let full = classify_edges(state, t, Alpha::Infinite, None)?;
    let occupied = full.occupied(lattice);
    let agree = counted.edges_with(lattice, EdgeStatus::CertainlyOccupied) == sets.blue
        && counted.edges_with(lattice, EdgeStatus::CertainlyVacant) == sets.red
        && counted.edges_with(lattice, EdgeStatus::PotentiallyOccupied) == sets.undecided
        && full.edges_with(lattice, EdgeStatus::CertainlyVacant) == sets.red
        && sets.blue.is_subset(&occupied)
        && occupied.is_subset(&sets.blue.union(&sets.undecided));
    rec.check(agree, CLASSIFY_AGREEMENT, t, || "statuses differ from (B, R, U)".into());
    let bounds = einfty_bounds(state, Alpha::Infinite, None)?;
    let nested = bounds.lower == sets.blue
        && bounds.upper == sets.blue.union(&sets.undecided)
        && bounds.lower.is_subset(&bounds.upper);
    rec.check(nested, BOUNDS_NESTING, t, || "bounds differ from B and B + U".into());
    let mut again = full.clone();
    promote_by_vertex_rule(lattice, &mut again);
    rec.check(again == full, UPGRADE_IDEMPOTENT, t, || "second vertex-rule pass changed statuses".into());
    Ok(())
}

fn torus(size: usize) -> Result<Arc<Lattice>> {
    Ok(Arc::new(Lattice::new(LatticeConfig::torus(size, size))?))
}

fn colored_sets_at(lattice: &Arc<Lattice>, seed: u64, run: u64, rounds: u32) -> Result<ColoredSets> {
    let mut c = ColoredState::init(lattice.clone())?;
    c.run(rounds, &RngStream::new(seed, run));
    Ok(c.sets())
}

/// Mean `|B| - |R|` against zero, in standard errors of the paired difference.
pub fn color_symmetry(seed: u64, runs: u64, size: usize, rounds: u32) -> Result<StatCheck> {
    let lattice = torus(size)?;
    let diffs = (0..runs)
        .into_par_iter()
        .map(|r| {
            let s = colored_sets_at(&lattice, seed, r, rounds)?;
            Ok((s.blue.len() as f64, s.red.len() as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let b: Moments = diffs.iter().map(|d| d.0).collect();
    let r: Moments = diffs.iter().map(|d| d.1).collect();
    let d: Moments = diffs.iter().map(|d| d.0 - d.1).collect();
    let z = if d.std_error() > 0.0 { d.mean().abs() / d.std_error() } else { 0.0 };
    Ok(StatCheck {
        name: "color_symmetry",
        passed: z <= 4.0,
        measured: z,
        bound: 4.0,
        detail: format!(
            "mean |B_{rounds}| = {:.3}, mean |R_{rounds}| = {:.3}, difference {:.2} SE ({runs} runs, {size}x{size})",
            b.mean(),
            r.mean(),
            z
        ),
    })
}

/// Density of edges not certainly vacant at the horizon, which should sit at
/// or above 1/2.
pub fn not_vacant_density(seed: u64, runs: u64, size: usize, rounds: u32) -> Result<StatCheck> {
    let lattice = torus(size)?;
    let m = lattice.num_edges() as f64;
    let d: Moments = (0..runs)
        .into_par_iter()
        .map(|r| Ok(1.0 - colored_sets_at(&lattice, seed, r, rounds)?.red.len() as f64 / m))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    let bound = 0.5 - 4.0 * d.std_error();
    Ok(StatCheck {
        name: "not_vacant_density",
        passed: d.mean() >= bound,
        measured: d.mean(),
        bound,
        detail: format!("mean density {:.4} >= {:.4} (1/2 - 4 SE, T = {rounds})", d.mean(), bound),
    })
}

/// Density of `B_T`, which should not exceed the independent 2-out marginal 3/4.
pub fn blue_density(seed: u64, runs: u64, size: usize, rounds: u32) -> Result<StatCheck> {
    let lattice = torus(size)?;
    let m = lattice.num_edges() as f64;
    let d: Moments = (0..runs)
        .into_par_iter()
        .map(|r| Ok(colored_sets_at(&lattice, seed, r, rounds)?.blue.len() as f64 / m))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    let bound = 0.75 + 4.0 * d.std_error();
    Ok(StatCheck {
        name: "blue_density",
        passed: d.mean() <= bound,
        measured: d.mean(),
        bound,
        detail: format!("mean density {:.4} <= {:.4} (3/4 + 4 SE, T = {rounds})", d.mean(), bound),
    })
}

fn pair_masks() -> Vec<Selection> {
    (0u8..16).filter(|m| m.count_ones() == 2).collect()
}

/// Law of the top-2 set when ties are broken by a uniform random ranking:
/// average over all 24 rankings.
fn enumerate_topk_inf(weights: [u32; 4]) -> Vec<f64> {
    let masks = pair_masks();
    let mut counts = vec![0.0; masks.len()];
    let mut perm = [0usize, 1, 2, 3];
    let mut rankings = Vec::new();
    permutations(&mut perm, 0, &mut rankings);
    for rank in &rankings {
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(rank[a].cmp(&rank[b])));
        let mask = (1u8 << order[0]) | (1u8 << order[1]);
        let i = masks.iter().position(|&m| m == mask).expect("pair mask");
        counts[i] += 1.0;
    }
    counts.iter().map(|c| c / rankings.len() as f64).collect()
}

fn permutations(a: &mut [usize; 4], i: usize, out: &mut Vec<[usize; 4]>) {
    if i == a.len() {
        out.push(*a);
        return;
    }
    for j in i..a.len() {
        a.swap(i, j);
        permutations(a, i + 1, out);
        a.swap(i, j);
    }
}

/// Law of the pair when pairs are weighted by `(W_i W_j)^alpha`.
fn enumerate_pairs_alpha(weights: [u32; 4], alpha: f64) -> Vec<f64> {
    let raw: Vec<f64> = pair_masks()
        .iter()
        .map(|&m| {
            (0..4)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| (weights[i] as f64).powf(alpha))
                .product()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

fn tally(draws: impl Iterator<Item = Selection>) -> Vec<u64> {
    let masks = pair_masks();
    let mut counts = vec![0u64; masks.len()];
    for s in draws {
        counts[masks.iter().position(|&m| m == s).expect("two edges selected")] += 1;
    }
    counts
}

fn oracle_check(name: &'static str, label: String, observed: Vec<u64>, probs: Vec<f64>) -> StatCheck {
    let t = chi_square_gof(&observed, &probs);
    StatCheck {
        name,
        passed: t.p_value > 1e-3,
        measured: t.p_value,
        bound: 1e-3,
        detail: format!("{label}: chi2 = {:.2} on {} dof, p = {:.4}", t.statistic, t.dof, t.p_value),
    }
}

pub fn selection_oracle_inf(seed: u64, weights: [u32; 4], draws: usize) -> StatCheck {
    let mut cursor = RngStream::new(seed, u64::MAX).cursor(Domain::Selection, 0, 0);
    let observed = tally((0..draws).map(|_| select_topk_inf(&weights, 2, &cursor.slot().words())));
    oracle_check(
        "selection_oracle_inf",
        format!("{weights:?}, alpha = inf, {draws} draws"),
        observed,
        enumerate_topk_inf(weights),
    )
}

pub fn selection_oracle_alpha(seed: u64, weights: [u32; 4], alpha: f64, draws: usize) -> StatCheck {
    let mut cursor = RngStream::new(seed, u64::MAX - 1).cursor(Domain::Selection, 0, 0);
    let observed = tally((0..draws).map(|_| sample_tuple_alpha(&weights, 2, alpha, cursor.slot().uniform())));
    oracle_check(
        "selection_oracle_alpha",
        format!("{weights:?}, alpha = {alpha}, {draws} draws"),
        observed,
        enumerate_pairs_alpha(weights, alpha),
    )
}

/// Empirical total-variation distance between finite-alpha draws and the
/// `alpha = inf` choice, for strictly ordered weights at alpha 50 and 200.
pub fn finite_alpha_concentration(seed: u64, draws: usize) -> StatCheck {
    let weights = [4u32, 3, 2, 1];
    let top = select_topk_inf(&weights, 2, &[0; 4]);
    let tv = |alpha: f64, stream: u64| {
        let mut cursor = RngStream::new(seed, stream).cursor(Domain::Selection, 0, 0);
        let misses = (0..draws)
            .filter(|_| sample_tuple_alpha(&weights, 2, alpha, cursor.slot().uniform()) != top)
            .count();
        misses as f64 / draws as f64
    };
    let tv50 = tv(50.0, u64::MAX - 2);
    let tv200 = tv(200.0, u64::MAX - 3);
    // exact distance at alpha = 50 is about (2/3)^50 ~ 1.6e-9
    let bound = 10.0 / draws as f64;
    StatCheck {
        name: "finite_alpha_concentration",
        passed: tv50 <= bound && tv200 <= tv50,
        measured: tv50,
        bound,
        detail: format!("{weights:?}: TV(alpha=50) = {tv50:.2e}, TV(alpha=200) = {tv200:.2e}, {draws} draws each"),
    }
}

/// Covariance of openness of East(0,0) and East(2,0), whose cells are
/// disjoint, on a 160 x 40 torus at `alpha = inf`.
pub fn one_dependence(seed: u64, trials: u64, n: u32) -> Result<StatCheck> {
    let spec = CrossingSpec::new(n as usize)?;
    let w = 4 * spec.scale;
    let lattice = Arc::new(Lattice::new(LatticeConfig::torus(w, spec.scale))?);
    let pairs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let rng = RngStream::new(seed, t);
            let mut state = WeightState::init(lattice.clone())?;
            state.run(n, Alpha::Infinite, &rng);
            let status = classify_edges(&state, n, Alpha::Infinite, None)?;
            let a = is_n_open(&status, &lattice, &spec, CoarseEdge::east(0, 0))?;
            let b = is_n_open(&status, &lattice, &spec, CoarseEdge::east(2, 0))?;
            Ok((a as u8 as f64, b as u8 as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let (cov, se) = covariance_with_se(&pairs);
    let z = if se > 0.0 { cov.abs() / se } else { 0.0 };
    let pa = pairs.iter().map(|p| p.0).sum::<f64>() / trials as f64;
    let pb = pairs.iter().map(|p| p.1).sum::<f64>() / trials as f64;
    Ok(StatCheck {
        name: "one_dependence",
        passed: z <= 4.0,
        measured: cov,
        bound: 4.0 * se,
        detail: format!(
            "cov = {cov:.5} (SE {se:.5}, {z:.2} SE), P(open) = {pa:.4} / {pb:.4}, {trials} paired trials"
        ),
    })
}

/// Sample covariance and the standard error of its mean-product estimator.
pub fn covariance_with_se(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let products: Moments = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).collect();
    (products.mean() * n / (n - 1.0), products.std_error())
}

/// Crossing frequency of independent `k`-out on an `l x l` torus box.
pub fn kout_crossing_frequency(k: usize, l: usize, trials: u64, seed: u64) -> Result<f64> {
    let lattice = torus(l)?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let set: EdgeSet = crate::dynamics::independent_kout(&lattice, k, &RngStream::new(seed, t))?;
            crate::connectivity::has_crossing(&set, &lattice, crate::lattice::Rect::new(0, 0, l, l), crate::connectivity::Axis::Horizontal)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_oracles() {
        let uniform = enumerate_topk_inf([1, 1, 1, 1]);
        assert!(uniform.iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-12));
        // pair masks in order 3, 5, 6, 9, 10, 12
        let trio = enumerate_topk_inf([3, 3, 3, 1]);
        assert_eq!(trio, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0]);
        let a1 = enumerate_pairs_alpha([2, 1, 1, 1], 1.0);
        let expect = [2.0, 2.0, 1.0, 2.0, 1.0, 1.0].map(|x| x / 9.0);
        for (p, e) in a1.iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn small_suite_passes() {
        let report = run_property_suite(&SuiteConfig {
            seeds: 0..4,
            sizes: vec![6, 9],
            rounds: 20,
            statistics: false,
            inject_fault: false,
            threads: Some(2),
        })
        .unwrap();
        assert_eq!(report.trajectories, 8);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn injected_fault_is_named() {
        let report = run_property_suite(&SuiteConfig {
            seeds: 3..5,
            sizes: vec![6],
            rounds: 10,
            statistics: false,
            inject_fault: true,
            threads: Some(1),
        })
        .unwrap();
        assert!(!report.passed());
        let v = report.violations.iter().find(|v| v.invariant == CONSERVATION).unwrap();
        assert_eq!((v.seed, v.size, v.round), (3, 6, 5));
        assert!(report.to_string().contains("conservation violated: seed 3"));
    }

    #[test]
    fn oracle_checks_pass_and_detect_bias() {
        assert!(selection_oracle_inf(1, [1, 1, 1, 1], 20_000).passed);
        assert!(selection_oracle_alpha(1, [2, 1, 1, 1], 1.0, 20_000).passed);
        // alpha = 2 draws judged against the alpha = 1 law
        let mut cursor = RngStream::new(1, 9).cursor(Domain::Selection, 0, 0);
        let observed = tally((0..20_000).map(|_| sample_tuple_alpha(&[2, 1, 1, 1], 2, 2.0, cursor.slot().uniform())));
        assert!(!oracle_check("x", String::new(), observed, enumerate_pairs_alpha([2, 1, 1, 1], 1.0)).passed);
    }

    #[test]
    fn covariance_estimator() {
        let independent = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];
        assert_eq!(covariance_with_se(&independent).0, 0.0);
        let equal = [(0.0, 0.0), (1.0, 1.0)];
        assert!((covariance_with_se(&equal).0 - 0.5).abs() < 1e-12);
    }
}
