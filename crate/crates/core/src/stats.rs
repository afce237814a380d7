//! Small statistics helpers: certainty of exceeding a threshold, chi-square
//! goodness of fit, running means.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const LOG10_E: f64 = std::f64::consts::LOG10_E;

/// `log10 P(Z > z)` for a standard normal `Z`, accurate far into the tail.
pub fn log10_normal_upper_tail(z: f64) -> f64 {
    if z == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if z < 30.0 {
        return (0.5 * erfc(z / std::f64::consts::SQRT_2)).log10();
    }
    // asymptotic Mills ratio series
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2)
        + 105.0 / (z2 * z2 * z2 * z2);
    let ln = -0.5 * z2 - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln();
    ln * LOG10_E
}

/// How surely a success rate exceeds a threshold, as `log10` of the residual
/// probability (so `-300` reads "certainty 1 - 1e-300").
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certainty {
    /// Plug-in normal approximation with variance `p_hat (1 - p_hat) / N`.
    pub log10_normal: f64,
    /// Hoeffding bound `exp(-2 N (p_hat - threshold)^2)`.
    pub log10_hoeffding: f64,
}

pub fn certainty_above_threshold(successes: u64, trials: u64, threshold: f64) -> Result<Certainty> {
    if trials == 0 || successes > trials {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= successes <= trials and trials > 0, got {successes}/{trials}"
        )));
    }
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    if p_hat <= threshold {
        return Err(Error::BelowThreshold { p_hat, threshold });
    }
    let gap = p_hat - threshold;
    let sd = (p_hat * (1.0 - p_hat) / n).sqrt();
    let log10_normal = if sd == 0.0 {
        f64::NEG_INFINITY
    } else {
        log10_normal_upper_tail(gap / sd)
    };
    Ok(Certainty {
        log10_normal,
        log10_hoeffding: -2.0 * n * gap * gap * LOG10_E,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of `observed` counts to category probabilities.
/// Categories with zero expected probability must have zero counts (else the
/// p-value is 0); they do not contribute degrees of freedom.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareTest {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    let mut cells = 0usize;
    let mut impossible_hit = false;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            impossible_hit |= o > 0;
            continue;
        }
        let e = p * total as f64;
        statistic += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    let p_value = if impossible_hit {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).expect("positive dof");
        1.0 - dist.cdf(statistic)
    };
    ChiSquareTest {
        statistic,
        dof,
        p_value,
    }
}

/// Running mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}
