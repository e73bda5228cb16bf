//! Two-hypothesis Bayesian inference of the time arrow.
//!
//! An observed process `X` is explained either by the forward law `P(X)` or by
//! the law of the time-reversed process `P~(X) = P(X~)`. With the symmetric
//! prior `P0(+) = P0(-) = 1/2` the posterior depends on the data only through
//! the log-likelihood ratio
//!
//! ```text
//! D(X) = log P(X) - log P~(X)
//! P(s | X) = 1 / (1 + exp(-s D(X)))
//! ```
//!
//! All logarithms are natural: information is measured in nats.

use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::stats::MeanEstimate;

/// Direction of physical time relative to the reference-time labelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeArrow {
    Plus,
    Minus,
    /// No information change: the direction cannot be assigned.
    Undetermined,
}

impl TimeArrow {
    /// `+1` or `-1`; `None` when undetermined.
    pub fn sign(self) -> Option<f64> {
        match self {
            TimeArrow::Plus => Some(1.0),
            TimeArrow::Minus => Some(-1.0),
            TimeArrow::Undetermined => None,
        }
    }
}

impl Neg for TimeArrow {
    type Output = TimeArrow;

    fn neg(self) -> TimeArrow {
        match self {
            TimeArrow::Plus => TimeArrow::Minus,
            TimeArrow::Minus => TimeArrow::Plus,
            TimeArrow::Undetermined => TimeArrow::Undetermined,
        }
    }
}

/// Change of information along a process, in nats. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct InformationChange(f64);

impl InformationChange {
    pub fn new(nats: f64) -> Result<Self> {
        finite("information change", nats).map(Self)
    }

    pub fn nats(self) -> f64 {
        self.0
    }
}

/// Where a decision statistic came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    Thermodynamic,
    JointClassical,
    MarginalClassical,
    Quantum,
    Raw,
}

/// Log-likelihood ratio `D = log P(X) - log P~(X)` in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionStatistic {
    value: f64,
    provenance: Provenance,
}

impl DecisionStatistic {
    pub fn new(value: f64, provenance: Provenance) -> Result<Self> {
        Ok(Self {
            value: finite("decision statistic", value)?,
            provenance,
        })
    }

    pub fn raw(value: f64) -> Result<Self> {
        Self::new(value, Provenance::Raw)
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn provenance(self) -> Provenance {
        self.provenance
    }
}

/// Mean of per-sample probabilities with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub sample_count: usize,
}

impl From<MeanEstimate> for FidelityEstimate {
    fn from(m: MeanEstimate) -> Self {
        Self {
            mean: m.mean,
            std_error: m.std_error,
            sample_count: m.count,
        }
    }
}

/// The thermodynamic arrow `s = sign(ΔI)`.
pub fn thermodynamic_arrow(delta_i: f64) -> Result<TimeArrow> {
    let x = finite("information change", delta_i)?;
    Ok(if x > 0.0 {
        TimeArrow::Plus
    } else if x < 0.0 {
        TimeArrow::Minus
    } else {
        TimeArrow::Undetermined
    })
}

/// Logistic function evaluated through the branch that only ever
/// exponentiates a non-positive argument.
pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `P(s | x) = 1 / (1 + exp(-s x))`.
///
/// `x` is either an information change or a decision statistic `D`.
pub fn arrow_probability(x: f64, s: TimeArrow) -> Result<f64> {
    let x = finite("arrow argument", x)?;
    let sign = s.sign().ok_or(Error::UndeterminedArrow)?;
    Ok(logistic(sign * x))
}

/// `D = log p_forward - log p_reversed`.
///
/// Zero or negative probabilities have no finite log-ratio and are reported
/// as [`Error::DegenerateSupport`].
pub fn log_ratio(p_forward: f64, p_reversed: f64) -> Result<DecisionStatistic> {
    let p_forward = finite("p_forward", p_forward)?;
    let p_reversed = finite("p_reversed", p_reversed)?;
    if p_forward <= 0.0 || p_reversed <= 0.0 {
        return Err(Error::DegenerateSupport {
            p_forward,
            p_reversed,
        });
    }
    DecisionStatistic::raw(p_forward.ln() - p_reversed.ln())
}

/// [`log_ratio`] for densities already given as logarithms. Any additive
/// normalization constant must be the same on both sides.
pub fn log_ratio_from_logs(log_forward: f64, log_reversed: f64) -> Result<DecisionStatistic> {
    let a = finite("log_forward", log_forward)?;
    let b = finite("log_reversed", log_reversed)?;
    DecisionStatistic::raw(a - b)
}

/// Posterior of the arrow under the symmetric prior.
pub fn bayes_posterior(p_forward: f64, p_reversed: f64, s: TimeArrow) -> Result<f64> {
    let d = log_ratio(p_forward, p_reversed)?;
    arrow_probability(d.value(), s)
}

fn require_nonempty(samples: &[DecisionStatistic]) -> Result<()> {
    if samples.is_empty() {
        Err(Error::EmptySamples)
    } else {
        Ok(())
    }
}

/// `F = <1 / (1 + exp(-D))>` over samples drawn from the forward law.
pub fn mean_fidelity(samples: &[DecisionStatistic]) -> Result<FidelityEstimate> {
    average_arrow_probability(samples, TimeArrow::Plus)
}

/// `P(s) = <1 / (1 + exp(-s D))>` over the observed samples.
pub fn average_arrow_probability(
    samples: &[DecisionStatistic],
    s: TimeArrow,
) -> Result<FidelityEstimate> {
    require_nonempty(samples)?;
    let probs = samples
        .iter()
        .map(|d| arrow_probability(d.value(), s))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanEstimate::from_samples(&probs).expect("nonempty").into())
}
