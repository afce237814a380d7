//! Seeded Monte Carlo estimation of the coarse-grained crossing probability.
//!
//! A trial runs `n` rounds on the torus, classifies the edges, and asks
//! whether the coarse edge `(0,0) -> (1,0)` is `n`-open. Trials are keyed
//! by `(master_seed, trial)` only and run in parallel; the aggregate is
//! independent of the thread count.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::classify::{assign_corruption, classify_edges, einfty_bounds, p_star, StatusCounts};
use crate::connectivity::{cell_crossings, percolation_probe, sprinkle, CellCrossings, CoarseEdge, CrossingSpec, SquarePaths};
use crate::dynamics::{Alpha, WeightState};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeConfig};
use crate::rng::RngStream;
use crate::stats::certainty_above_threshold;

/// Marginal above which 1-dependent bond percolation on the square lattice
/// percolates.
pub const ONE_DEPENDENT_THRESHOLD: f64 = 0.8457;

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "RKOUT_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "p", rename_all = "lowercase")]
pub enum Corruption {
    /// `p_star(alpha, n)`.
    Auto,
    Fixed(f64),
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: Alpha,
    pub n: u32,
    pub trials: u64,
    pub lattice: LatticeConfig,
    pub master_seed: u64,
    pub corruption: Corruption,
    pub threshold: f64,
    /// Coarse-graining scale; cells are `2 * scale` by `scale`.
    pub scale: usize,
    #[serde(default)]
    pub square_paths: SquarePaths,
}

impl ExperimentConfig {
    /// The reference protocol: 80 x 40 torus, `k = 2`, default corruption.
    pub fn reference(alpha: Alpha, n: u32, trials: u64, master_seed: u64) -> Self {
        Self {
            alpha,
            n,
            trials,
            lattice: LatticeConfig::torus(80, 40),
            master_seed,
            corruption: if alpha.is_infinite() {
                Corruption::None
            } else {
                Corruption::Auto
            },
            threshold: ONE_DEPENDENT_THRESHOLD,
            scale: CrossingSpec::DEFAULT_SCALE,
            square_paths: SquarePaths::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidArgument(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        match (self.alpha, self.corruption) {
            (Alpha::Infinite, Corruption::None) => {}
            (Alpha::Finite(_), Corruption::Auto) => {}
            (Alpha::Finite(_), Corruption::Fixed(p)) if (0.0..=1.0).contains(&p) => {}
            _ => return Err(Error::CorruptionMismatch),
        }
        CrossingSpec::with_scale(self.scale, self.n as usize)?;
        Ok(())
    }

    /// Corruption probability in force, `None` for `alpha = inf`.
    pub fn corruption_probability(&self) -> Result<Option<f64>> {
        match (self.alpha, self.corruption) {
            (Alpha::Finite(a), Corruption::Auto) => {
                // no rounds, no low-weight edges to worry about
                if self.n == 0 {
                    Ok(Some(0.0))
                } else {
                    Ok(Some(p_star(a, self.n)?))
                }
            }
            (_, Corruption::Fixed(p)) => Ok(Some(p)),
            _ => Ok(None),
        }
    }

    pub fn crossing_spec(&self) -> Result<CrossingSpec> {
        Ok(CrossingSpec::with_scale(self.scale, self.n as usize)?.with_square_paths(self.square_paths))
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: u64,
    pub open: bool,
    pub seed: RngStream,
    pub counts: StatusCounts,
    pub corrupted: usize,
    pub crossings: CellCrossings,
}

/// Runs one trial on `lattice` (which must match `config.lattice`).
pub fn run_crossing_trial(config: &ExperimentConfig, lattice: &Arc<Lattice>, trial: u64) -> Result<TrialResult> {
    let rng = RngStream::new(config.master_seed, trial);
    let mut state = WeightState::init(lattice.clone())?;
    state.run(config.n, config.alpha, &rng);
    let corruption = match config.corruption_probability()? {
        Some(p) => Some(assign_corruption(&state, config.n, p, &rng)?),
        None => None,
    };
    let status = classify_edges(&state, config.n, config.alpha, corruption.as_ref())?;
    let spec = config.crossing_spec()?;
    let occupied = status.occupied(lattice);
    let crossings = cell_crossings(&occupied, lattice, &spec, CoarseEdge::east(0, 0))?;
    Ok(TrialResult {
        trial,
        open: crossings.all(),
        seed: rng,
        counts: status.counts(lattice),
        corrupted: corruption.map_or(0, |c| c.len()),
        crossings,
    })
}

fn serialize_log10<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_finite() => s.serialize_some(x),
        Some(_) => s.serialize_some("-inf"),
        None => s.serialize_none(),
    }
}

fn deserialize_log10<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Num(x)) => Ok(Some(x)),
        Some(Raw::Str(s)) if s == "-inf" => Ok(Some(f64::NEG_INFINITY)),
        Some(Raw::Str(s)) => Err(serde::de::Error::custom(format!("bad log10 value {s:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub config_digest: String,
    pub seed: u64,
    #[serde(rename = "N")]
    pub trials: u64,
    #[serde(rename = "N0")]
    pub successes: u64,
    pub p_hat: f64,
    pub threshold: f64,
    /// Corruption probability used (finite alpha only).
    pub p_star: Option<f64>,
    /// `log10` of the residual probability under the plug-in normal
    /// approximation; absent when `p_hat <= threshold`.
    #[serde(serialize_with = "serialize_log10", deserialize_with = "deserialize_log10")]
    pub log10_normal: Option<f64>,
    #[serde(serialize_with = "serialize_log10", deserialize_with = "deserialize_log10")]
    pub log10_hoeffding: Option<f64>,
    pub wall_time_seconds: f64,
}

impl ExperimentSummary {
    pub fn from_trials(config: &ExperimentConfig, results: &[TrialResult], wall_time_seconds: f64) -> Result<Self> {
        let trials = results.len() as u64;
        let successes = results.iter().filter(|r| r.open).count() as u64;
        let certainty = match certainty_above_threshold(successes, trials, config.threshold) {
            Ok(c) => Some(c),
            Err(Error::BelowThreshold { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            config: config.clone(),
            config_digest: config.digest(),
            seed: config.master_seed,
            trials,
            successes,
            p_hat: successes as f64 / trials as f64,
            threshold: config.threshold,
            p_star: config.corruption_probability()?,
            log10_normal: certainty.map(|c| c.log10_normal),
            log10_hoeffding: certainty.map(|c| c.log10_hoeffding),
            wall_time_seconds,
        })
    }

    /// Whether `p_hat` exceeds the threshold with Hoeffding residual at most
    /// `10^max_log10_residual`.
    pub fn passes(&self, max_log10_residual: f64) -> bool {
        self.p_hat > self.threshold
            && self.log10_hoeffding.is_some_and(|h| h <= max_log10_residual)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the wall time zeroed: identical for identical configs.
    pub fn canonical_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_time_seconds = 0.0;
        copy.to_json()
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub summary: ExperimentSummary,
    pub trials: Vec<TrialResult>,
}

impl ExperimentRun {
    /// Comma-separated per-trial table with a header row.
    pub fn write_trial_table<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "trial,open,vacant,potential,occupied,undetermined,corrupted,long_crossing,first_square,second_square"
        )?;
        for r in &self.trials {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.trial,
                r.open as u8,
                r.counts.vacant,
                r.counts.potential,
                r.counts.occupied,
                r.counts.undetermined,
                r.corrupted,
                r.crossings.long as u8,
                r.crossings.first_square as u8,
                r.crossings.second_square as u8
            )?;
        }
        Ok(())
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn default_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&t| t > 0)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(t) => Ok(rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(f)),
        None => Ok(f()),
    }
}

pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentRun> {
    config.validate()?;
    let lattice = Arc::new(Lattice::new(config.lattice)?);
    let start = Instant::now();
    let trials = with_threads(threads, || {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_crossing_trial(config, &lattice, t))
            .collect::<Result<Vec<_>>>()
    })??;
    let summary = ExperimentSummary::from_trials(config, &trials, start.elapsed().as_secs_f64())?;
    Ok(ExperimentRun { summary, trials })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprinkleRow {
    pub size: usize,
    pub eps: f64,
    pub trials: u64,
    pub primal_frequency: f64,
    pub dual_frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SprinkleScanConfig {
    pub eps: Vec<f64>,
    pub sizes: Vec<usize>,
    pub horizon: u32,
    pub trials: u64,
    pub master_seed: u64,
}

/// Crossing frequencies of the certainly occupied set at the horizon, united
/// with sprinkling. Within a size all `eps` share states and sprinkling
/// uniforms, so frequencies are nondecreasing in `eps`.
pub fn run_sprinkling_scan(alpha: Alpha, scan: &SprinkleScanConfig, threads: Option<usize>) -> Result<Vec<SprinkleRow>> {
    if !alpha.is_infinite() {
        return Err(Error::InvalidArgument("the sprinkling scan runs at alpha = inf".into()));
    }
    if scan.trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let mut rows = Vec::new();
    for &size in &scan.sizes {
        let lattice = Arc::new(Lattice::new(LatticeConfig::torus(size, size))?);
        let hits = with_threads(threads, || {
            (0..scan.trials)
                .into_par_iter()
                .map(|t| {
                    let rng = RngStream::new(scan.master_seed, t);
                    let mut state = WeightState::init(lattice.clone())?;
                    state.run(scan.horizon, alpha, &rng);
                    let lower = einfty_bounds(&state, alpha, None)?.lower;
                    scan.eps
                        .iter()
                        .map(|&eps| {
                            let set = sprinkle(&lower, &lattice, eps, &rng)?;
                            let p = percolation_probe(&set, &lattice)?;
                            Ok((p.primal_crossing, p.dual_crossing))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })??;
        for (i, &eps) in scan.eps.iter().enumerate() {
            let primal = hits.iter().filter(|h| h[i].0).count();
            let dual = hits.iter().filter(|h| h[i].1).count();
            rows.push(SprinkleRow {
                size,
                eps,
                trials: scan.trials,
                primal_frequency: primal as f64 / scan.trials as f64,
                dual_frequency: dual as f64 / scan.trials as f64,
            });
        }
    }
    Ok(rows)
}
