//! JSON snapshots of a weight state, optionally with its classification.
//!
//! Edge arrays are slot-indexed: entry `2 * (y * width + x)` is the East edge
//! of `(x, y)` and the next entry its North edge.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classify::{assign_corruption, classify_edges, p_star, CorruptionField, StatusField};
use crate::dynamics::{Alpha, WeightState};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeConfig};
use crate::rng::RngStream;

pub const FORMAT: &str = "rkout-snapshot/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredClassification {
    pub n: u32,
    /// One status code per slot: `V`, `P`, `O` or `U`.
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredCorruption {
    pub p_star: f64,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format: String,
    pub lattice: LatticeConfig,
    pub alpha: Alpha,
    pub seed: RngStream,
    pub round: u32,
    pub weights: Vec<u32>,
    pub last_increments: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<StoredClassification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<StoredCorruption>,
}

impl Snapshot {
    pub fn capture(
        state: &WeightState,
        alpha: Alpha,
        seed: RngStream,
        status: Option<&StatusField>,
        corruption: Option<&CorruptionField>,
    ) -> Self {
        Self {
            format: FORMAT.to_string(),
            lattice: *state.lattice().config(),
            alpha,
            seed,
            round: state.round(),
            weights: state.weights().to_vec(),
            last_increments: state.last_increments().to_vec(),
            classification: status.map(|s| StoredClassification {
                n: s.round(),
                status: s.to_codes(),
            }),
            corruption: corruption.map(|c| StoredCorruption {
                p_star: c.p_star,
                vertices: c.vertices(),
            }),
        }
    }

    /// Runs `rounds` rounds from the initial state. With `classify`, edges are
    /// classified at `n = rounds`; finite `alpha` first draws corruption at
    /// `p_star(alpha, rounds)`.
    pub fn simulate(config: LatticeConfig, alpha: Alpha, rounds: u32, seed: RngStream, classify: bool) -> Result<Self> {
        let lattice = Arc::new(Lattice::new(config)?);
        let mut state = WeightState::init(lattice)?;
        state.run(rounds, alpha, &seed);
        if !classify {
            return Ok(Self::capture(&state, alpha, seed, None, None));
        }
        let corruption = match alpha {
            Alpha::Infinite => None,
            Alpha::Finite(a) => {
                let p = if rounds == 0 { 0.0 } else { p_star(a, rounds)? };
                Some(assign_corruption(&state, rounds, p, &seed)?)
            }
        };
        let status = classify_edges(&state, rounds, alpha, corruption.as_ref())?;
        Ok(Self::capture(&state, alpha, seed, Some(&status), corruption.as_ref()))
    }

    pub fn lattice(&self) -> Result<Arc<Lattice>> {
        Ok(Arc::new(Lattice::new(self.lattice)?))
    }

    pub fn state(&self) -> Result<WeightState> {
        WeightState::from_weights(self.lattice()?, self.round, self.weights.clone(), self.last_increments.clone())
    }

    pub fn status_field(&self, lattice: &Lattice) -> Result<Option<StatusField>> {
        self.classification
            .as_ref()
            .map(|c| StatusField::from_codes(lattice, c.n, &c.status))
            .transpose()
    }

    pub fn corruption_field(&self, lattice: &Lattice) -> Result<Option<CorruptionField>> {
        let n = self.classification.as_ref().map_or(self.round, |c| c.n);
        self.corruption
            .as_ref()
            .map(|c| CorruptionField::from_vertices(lattice, n, c.p_star, &c.vertices))
            .transpose()
    }

    /// Classifies the stored weights afresh, using the stored corruption.
    pub fn reclassify(&self) -> Result<StatusField> {
        let state = self.state()?;
        let corruption = self.corruption_field(state.lattice())?;
        if !self.alpha.is_infinite() && corruption.is_none() {
            return Err(Error::Format("finite-alpha snapshot has no corruption field".into()));
        }
        classify_edges(&state, self.round, self.alpha, corruption.as_ref())
    }

    /// Parses and checks a snapshot document.
    pub fn from_json(text: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(text)?;
        if snap.format != FORMAT {
            return Err(Error::Format(format!("unsupported snapshot format {:?}", snap.format)));
        }
        let lattice = snap.lattice()?;
        snap.state()?;
        if let Some(c) = &snap.classification {
            if c.n != snap.round {
                return Err(Error::Format(format!(
                    "classification at n = {} but weights are at round {}",
                    c.n, snap.round
                )));
            }
        }
        snap.status_field(&lattice)?;
        snap.corruption_field(&lattice)?;
        Ok(snap)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
