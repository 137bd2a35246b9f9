//! Order statistics and histogram math for the similarity reports.
//!
//! Percentiles use linear interpolation between closest ranks: for quantile
//! `q` over `n` sorted values the rank is `q * (n - 1)` and the result
//! interpolates between the two neighbouring order statistics. This is the
//! documented method so oracle tests can be exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("at least one score is required")]
    EmptyInput,
    #[error("bin width must be in (0, 1]")]
    InvalidBinWidth,
}

/// Median and quartiles of one score population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tendency<S> {
    pub median: S,
    pub p25: S,
    pub p75: S,
}

/// Quantile by linear interpolation between closest ranks.
/// `values` must be non-empty; they are sorted internally.
pub fn quantile<S: Real>(values: &[S], q: S) -> Result<S, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    let n = sorted.len();
    if n == 1 {
        return Ok(sorted[0]);
    }
    let rank = q * S::from_usize(n - 1).expect("fits Real");
    let lo = rank.floor();
    let frac = rank - lo;
    let lo = lo.to_usize().expect("non-negative rank");
    let hi = (lo + 1).min(n - 1);
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub fn mean<S: Real>(values: &[S]) -> Result<S, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let sum = values.iter().fold(S::zero(), |acc, v| acc + *v);
    Ok(sum / S::from_usize(values.len()).expect("fits Real"))
}

pub fn tendency<S: Real>(values: &[S]) -> Result<Tendency<S>, StatsError> {
    let q = |x: f64| S::from_f64(x).expect("quantile fits Real");
    Ok(Tendency {
        median: quantile(values, q(0.5))?,
        p25: quantile(values, q(0.25))?,
        p75: quantile(values, q(0.75))?,
    })
}

/// Histogram over [0, 1] with a fixed bin width; scores below zero land in
/// the underflow bin. Bin `i` covers `[i*w, (i+1)*w)` with the final bin
/// closed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram<S> {
    pub bin_width: S,
    pub underflow: usize,
    pub counts: Vec<usize>,
}

impl<S: Real> Histogram<S> {
    pub fn total(&self) -> usize {
        self.underflow + self.counts.iter().sum::<usize>()
    }

    /// Low edge of bin `i`.
    pub fn bin_low(&self, i: usize) -> S {
        S::from_usize(i).expect("fits Real") * self.bin_width
    }

    /// High edge of bin `i`, capped at 1.
    pub fn bin_high(&self, i: usize) -> S {
        (self.bin_low(i) + self.bin_width).min(S::one())
    }
}

pub fn histogram<S: Real>(scores: &[S], bin_width: S) -> Result<Histogram<S>, StatsError> {
    if bin_width <= S::zero() || bin_width > S::one() {
        return Err(StatsError::InvalidBinWidth);
    }
    let bins = (S::one() / bin_width)
        .ceil()
        .to_usize()
        .ok_or(StatsError::InvalidBinWidth)?;
    let mut counts = vec![0usize; bins];
    let mut underflow = 0usize;
    for &s in scores {
        if s < S::zero() {
            underflow += 1;
            continue;
        }
        let idx = (s / bin_width)
            .floor()
            .to_usize()
            .unwrap_or(bins - 1)
            .min(bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram {
        bin_width,
        underflow,
        counts,
    })
}
