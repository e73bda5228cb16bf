//! Order-independent summaries used by the experiment runners.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    /// Two-pass mean and standard error (sample variance with n - 1).
    ///
    /// Returns `None` for an empty slice.
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Self {
            mean,
            std_error: (var / n).sqrt(),
            count: xs.len(),
        })
    }

    /// Number of standard errors separating the estimate from `target`.
    /// A zero standard error yields 0 on exact agreement and infinity otherwise.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if self.std_error > 0.0 {
            gap / self.std_error
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Fixed-bin histogram over `[lo, lo + width * bins)`. Values outside the
/// range are tallied separately so totals stay exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(lo: f64, width: f64, bins: usize) -> Self {
        assert!(
            width > 0.0 && bins > 0,
            "histogram needs positive width and bins"
        );
        Self {
            lo,
            width,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        }
    }

    /// Symmetric histogram centred on zero: bins `[-half_range, half_range)`.
    pub fn symmetric(half_range: f64, width: f64) -> Self {
        let bins = (2.0 * half_range / width).round() as usize;
        Self::new(-half_range, width, bins)
    }

    pub fn add(&mut self, x: f64) {
        let pos = (x - self.lo) / self.width;
        if pos < 0.0 || pos.is_nan() {
            self.underflow += 1;
        } else if pos >= self.counts.len() as f64 {
            self.overflow += 1;
        } else {
            self.counts[pos as usize] += 1;
        }
    }

    pub fn from_samples(
        lo: f64,
        width: f64,
        bins: usize,
        xs: impl IntoIterator<Item = f64>,
    ) -> Self {
        let mut h = Self::new(lo, width, bins);
        xs.into_iter().for_each(|x| h.add(x));
        h
    }

    pub fn center(&self, bin: usize) -> f64 {
        self.lo + (bin as f64 + 0.5) * self.width
    }

    /// Index of the bin holding `x`, if in range.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let pos = (x - self.lo) / self.width;
        (pos >= 0.0 && pos < self.counts.len() as f64).then_some(pos as usize)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}
