//! Counter-based random streams.
//!
//! Every variate is addressed by `(master_seed, trial, domain, round, index)`:
//! the first two form the ChaCha8 key, the domain selects the ChaCha stream,
//! and `(round, index)` selects a fixed block of four 32-bit words inside it.
//! A draw therefore never depends on evaluation order or thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const WORDS_PER_SLOT: u128 = 4;
const ROUND_SHIFT: u32 = 34;

/// What a stream of variates is used for. Distinct domains never share words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    /// Per-vertex tie-break keys or tuple draws, indexed by vertex.
    Selection = 1,
    /// Per-vertex corruption coins, indexed by vertex.
    Corruption = 2,
    /// Per-edge sprinkling uniforms, indexed by edge slot.
    Sprinkle = 3,
    /// Per-vertex choices of the independent k-out baseline.
    IndependentKOut = 4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub trial: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, trial: u64) -> Self {
        Self { master_seed, trial }
    }

    /// Cursor positioned on slot `index` of `round`; successive
    /// [`Cursor::slot`] calls walk slots `index, index + 1, ...`.
    pub fn cursor(&self, domain: Domain, round: u32, index: usize) -> Cursor {
        debug_assert!(index < (1usize << 32));
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.trial.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(domain as u64);
        rng.set_word_pos(((round as u128) << ROUND_SHIFT) + index as u128 * WORDS_PER_SLOT);
        Cursor { rng }
    }

    /// The slot addressed by `(domain, round, index)`.
    pub fn slot(&self, domain: Domain, round: u32, index: usize) -> Slot {
        self.cursor(domain, round, index).slot()
    }
}

pub struct Cursor {
    rng: ChaCha8Rng,
}

impl Cursor {
    #[inline]
    pub fn slot(&mut self) -> Slot {
        Slot([
            self.rng.next_u32(),
            self.rng.next_u32(),
            self.rng.next_u32(),
            self.rng.next_u32(),
        ])
    }
}

/// Four independent uniform 32-bit words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot(pub [u32; 4]);

impl Slot {
    pub fn words(&self) -> [u32; 4] {
        self.0
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution, from words 0 and 1.
    #[inline]
    pub fn uniform(&self) -> f64 {
        let bits = ((self.0[0] as u64) << 32) | self.0[1] as u64;
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
