//! Classical ensemble of `n` independent `d`-state systems.
//!
//! The process is a transition between two snapshots, `X = (ξ, η)`, whose
//! occupation numbers follow independent multinomials with shapes `ρ1` and
//! `ρ2`. Likelihoods use the diagonal Gaussian approximation
//!
//! ```text
//! log P(ξ, η) = -Σ (n1 - n ρ1)^2 / (2 n ρ1) - Σ (n2 - n ρ2)^2 / (2 n ρ2) + log C
//! ```
//!
//! with independent count coordinates (no multinomial covariance, no
//! `Σ n_i = n` constraint). The constant `log C` is the same for `(ξ, η)` and
//! `(η, ξ)` and cancels from every log-ratio.
//!
//! When both snapshots are observed, `D` comes out at twice the Shannon
//! information change to leading order in `Δρ = ρ2 - ρ1` (with flat `ρ2`).
//! Observing only `η` removes the factor of two.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrow::{DecisionStatistic, InformationChange, Provenance};
use crate::error::{finite, invalid, Error, Result};
use crate::rng::{ids, StreamKey};
use crate::stats::MeanEstimate;

/// Smallest admissible probability component. The Gaussian branches divide
/// by every `ρ_i`.
pub const EPSILON_FLOOR: f64 = 1e-9;

const SUM_TOLERANCE: f64 = 1e-12;
const FLAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexDistribution {
    probs: Vec<f64>,
}

impl SimplexDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(invalid("rho", "needs at least two states"));
        }
        for (index, &value) in probs.iter().enumerate() {
            finite("rho", value)?;
            if value < EPSILON_FLOOR {
                return Err(Error::BelowFloor {
                    index,
                    value,
                    floor: EPSILON_FLOOR,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid("rho", format!("components sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Uniform distribution `1/d`.
    pub fn flat(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid("d", "needs at least two states"));
        }
        Self::new(vec![1.0 / d as f64; d])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn is_flat(&self) -> bool {
        let u = 1.0 / self.dim() as f64;
        self.probs.iter().all(|p| (p - u).abs() <= FLAT_TOLERANCE)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().map(|&p| p * p.ln()).sum::<f64>()
    }
}

/// Occupation numbers `n_i` of one snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// One observed transition `X = (ξ, η)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSample {
    xi: CountVector,
    eta: CountVector,
}

impl TransitionSample {
    pub fn new(xi: CountVector, eta: CountVector) -> Result<Self> {
        if xi.dim() != eta.dim() {
            return Err(Error::DimensionMismatch(xi.dim(), eta.dim()));
        }
        if xi.total() != eta.total() {
            return Err(invalid(
                "eta",
                "both snapshots must hold the same number of systems",
            ));
        }
        Ok(Self { xi, eta })
    }

    pub fn xi(&self) -> &CountVector {
        &self.xi
    }

    pub fn eta(&self) -> &CountVector {
        &self.eta
    }

    /// The time-reversed transition `(η, ξ)`.
    pub fn swapped(&self) -> Self {
        Self {
            xi: self.eta.clone(),
            eta: self.xi.clone(),
        }
    }
}

/// Which ordering of the snapshots the joint likelihood is evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    /// `P(ξ, η)`: `ξ` drawn from `ρ1`, `η` from `ρ2`.
    ForwardXiEta,
    /// `P(η, ξ)`: `η` drawn from `ρ1`, `ξ` from `ρ2`.
    ReversedEtaXi,
}

fn same_dim(a: &SimplexDistribution, b: &SimplexDistribution) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(a.dim(), b.dim()))
    }
}

fn check_counts(counts: &CountVector, rho: &SimplexDistribution, n: u64) -> Result<()> {
    if counts.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(counts.dim(), rho.dim()));
    }
    if counts.total() != n {
        return Err(invalid(
            "n",
            format!("counts sum to {}, expected {n}", counts.total()),
        ));
    }
    Ok(())
}

fn require_positive(n: u64) -> Result<()> {
    if n == 0 {
        Err(invalid("n", "ensemble size must be positive"))
    } else {
        Ok(())
    }
}

/// `ΔI = n [H(ρ2) - H(ρ1)]`.
pub fn shannon_information_change(
    rho1: &SimplexDistribution,
    rho2: &SimplexDistribution,
    n: u64,
) -> Result<InformationChange> {
    same_dim(rho1, rho2)?;
    require_positive(n)?;
    InformationChange::new(n as f64 * (rho2.entropy() - rho1.entropy()))
}

/// One multinomial draw, by sequential conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(
    rho: &SimplexDistribution,
    n: u64,
    rng: &mut R,
) -> CountVector {
    let d = rho.dim();
    let mut counts = Vec::with_capacity(d);
    let mut left = n;
    let mut mass = 1.0;
    for &p in &rho.probs[..d - 1] {
        let k = if left == 0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q)
                .expect("probability in [0, 1]")
                .sample(rng)
        };
        counts.push(k);
        left -= k;
        mass -= p;
    }
    counts.push(left);
    CountVector::new(counts)
}

/// `-Σ (k_i - n ρ_i)^2 / (2 n ρ_i)`.
fn gaussian_exponent(counts: &CountVector, rho: &SimplexDistribution, n: u64) -> f64 {
    let n = n as f64;
    counts
        .counts
        .iter()
        .zip(&rho.probs)
        .map(|(&k, &p)| {
            let mean = n * p;
            let dev = k as f64 - mean;
            -dev * dev / (2.0 * mean)
        })
        .sum()
}

/// Gaussian log-likelihood of a transition, up to the common constant `log C`.
pub fn log_joint_gaussian(
    sample: &TransitionSample,
    rho1: &SimplexDistribution,
    rho2: &SimplexDistribution,
    n: u64,
    order: Order,
) -> Result<f64> {
    same_dim(rho1, rho2)?;
    require_positive(n)?;
    check_counts(&sample.xi, rho1, n)?;
    check_counts(&sample.eta, rho1, n)?;
    let (first, second) = match order {
        Order::ForwardXiEta => (&sample.xi, &sample.eta),
        Order::ReversedEtaXi => (&sample.eta, &sample.xi),
    };
    Ok(gaussian_exponent(first, rho1, n) + gaussian_exponent(second, rho2, n))
}

pub(crate) fn d_joint_with_log_constant(
    sample: &TransitionSample,
    rho1: &SimplexDistribution,
    rho2: &SimplexDistribution,
    n: u64,
    log_c: f64,
) -> Result<DecisionStatistic> {
    let forward = log_joint_gaussian(sample, rho1, rho2, n, Order::ForwardXiEta)? + log_c;
    let reversed = log_joint_gaussian(sample, rho1, rho2, n, Order::ReversedEtaXi)? + log_c;
    DecisionStatistic::new(forward - reversed, Provenance::JointClassical)
}

/// `D(ξ, η) = log P(ξ, η) - log P(η, ξ)` with both snapshots observed.
pub fn d_joint(
    sample: &TransitionSample,
    rho1: &SimplexDistribution,
    rho2: &SimplexDistribution,
    n: u64,
) -> Result<DecisionStatistic> {
    d_joint_with_log_constant(sample, rho1, rho2, n, 0.0)
}

/// `D` evaluated at the mean counts:
/// `-(n/2) Σ (ρ2^2 - ρ1^2)(1/ρ2 - 1/ρ1)`.
///
/// The O(1) contribution of count fluctuations to the true expectation is
/// not included.
pub fn mean_d_joint(rho1: &SimplexDistribution, rho2: &SimplexDistribution, n: u64) -> Result<f64> {
    same_dim(rho1, rho2)?;
    require_positive(n)?;
    let s: f64 = rho1
        .probs
        .iter()
        .zip(&rho2.probs)
        .map(|(&a, &b)| (b * b - a * a) * (1.0 / b - 1.0 / a))
        .sum();
    finite("mean D", -(n as f64) / 2.0 * s)
}

/// `D(η) = log P(η) - log P~(η)` when only the final snapshot is observed.
///
/// Summing the Gaussian over `ξ` contributes the same factor to both
/// hypotheses, so only the `η` terms survive.
pub fn d_marginal(
    eta: &CountVector,
    rho1: &SimplexDistribution,
    rho2: &SimplexDistribution,
    n: u64,
) -> Result<DecisionStatistic> {
    same_dim(rho1, rho2)?;
    require_positive(n)?;
    check_counts(eta, rho1, n)?;
    let forward = gaussian_exponent(eta, rho2, n);
    let reversed = gaussian_exponent(eta, rho1, n);
    DecisionStatistic::new(forward - reversed, Provenance::MarginalClassical)
}

/// Leading-order `(ΔI, D)` for flat `ρ2`:
/// `((n d / 2) Σ Δρ^2, n d Σ Δρ^2)`.
pub fn leading_order_pair(
    rho1: &SimplexDistribution,
    rho2: &SimplexDistribution,
    n: u64,
) -> Result<(f64, f64)> {
    same_dim(rho1, rho2)?;
    require_positive(n)?;
    if !rho2.is_flat() {
        return Err(Error::NotFlat);
    }
    let d = rho1.dim() as f64;
    let sq: f64 = rho1
        .probs
        .iter()
        .zip(&rho2.probs)
        .map(|(&a, &b)| (b - a) * (b - a))
        .sum();
    let d_leading = n as f64 * d * sq;
    Ok((d_leading / 2.0, d_leading))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub sample_index: u64,
    pub d_joint: f64,
    pub d_marginal: f64,
}

/// Sampled transitions with the reference values they are compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleExperiment {
    pub records: Vec<EnsembleRecord>,
    /// Exact Shannon information change.
    pub delta_i: f64,
    /// Mean-substitution closed form of `D_joint`.
    pub mean_d_joint: f64,
    /// Leading-order `(ΔI, D)`, present when `ρ2` is flat.
    pub leading_order: Option<(f64, f64)>,
}

impl EnsembleExperiment {
    pub fn d_joint_mean(&self) -> MeanEstimate {
        let xs: Vec<f64> = self.records.iter().map(|r| r.d_joint).collect();
        MeanEstimate::from_samples(&xs).expect("experiment has samples")
    }

    pub fn d_marginal_mean(&self) -> MeanEstimate {
        let xs: Vec<f64> = self.records.iter().map(|r| r.d_marginal).collect();
        MeanEstimate::from_samples(&xs).expect("experiment has samples")
    }

    /// `mean(D_joint) / ΔI`.
    pub fn joint_ratio(&self) -> f64 {
        self.d_joint_mean().mean / self.delta_i
    }

    /// `mean(D_marginal) / ΔI`.
    pub fn marginal_ratio(&self) -> f64 {
        self.d_marginal_mean().mean / self.delta_i
    }
}

/// Draw `ξ ~ Mult(n, ρ1)`, `η ~ Mult(n, ρ2)` per sample and evaluate both
/// decision statistics. Sample `i` uses stream `i`.
pub fn ensemble_experiment(
    rho1: &SimplexDistribution,
    rho2: &SimplexDistribution,
    n: u64,
    n_samples: usize,
    master_seed: u64,
) -> Result<EnsembleExperiment> {
    same_dim(rho1, rho2)?;
    require_positive(n)?;
    if n_samples == 0 {
        return Err(invalid("n_samples", "at least one sample is required"));
    }
    let key = StreamKey::new(master_seed, ids::CLASSICAL);
    let records = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.stream(i);
            let xi = sample_counts(rho1, n, &mut rng);
            let eta = sample_counts(rho2, n, &mut rng);
            let d_marginal = d_marginal(&eta, rho1, rho2, n)?.value();
            let sample = TransitionSample::new(xi, eta)?;
            Ok(EnsembleRecord {
                sample_index: i,
                d_joint: d_joint(&sample, rho1, rho2, n)?.value(),
                d_marginal,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleExperiment {
        records,
        delta_i: shannon_information_change(rho1, rho2, n)?.nats(),
        mean_d_joint: mean_d_joint(rho1, rho2, n)?,
        leading_order: leading_order_pair(rho1, rho2, n).ok(),
    })
}

/// [`ensemble_experiment`] with a flat final distribution: the setting in
/// which `mean(D_joint) ≈ 2 ΔI` and `mean(D_marginal) ≈ ΔI`.
pub fn factor_two_experiment(
    rho1: &SimplexDistribution,
    n: u64,
    n_samples: usize,
    master_seed: u64,
) -> Result<EnsembleExperiment> {
    let flat = SimplexDistribution::flat(rho1.dim())?;
    ensemble_experiment(rho1, &flat, n, n_samples, master_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleRng;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn simplex(p: &[f64]) -> SimplexDistribution {
        SimplexDistribution::new(p.to_vec()).unwrap()
    }

    fn counts(c: &[u64]) -> CountVector {
        CountVector::new(c.to_vec())
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexDistribution::new(vec![1.0]).is_err());
        assert!(SimplexDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(matches!(
            SimplexDistribution::new(vec![1.0 - 1e-10, 1e-10]),
            Err(Error::BelowFloor { index: 1, .. })
        ));
        assert!(SimplexDistribution::new(vec![0.999, 0.001]).is_ok());
        assert!(SimplexDistribution::flat(3).unwrap().is_flat());
        assert!(!simplex(&[0.6, 0.4]).is_flat());
    }

    #[test]
    fn shannon_information_change_examples() {
        let flat = SimplexDistribution::flat(2).unwrap();
        let a = simplex(&[0.6, 0.4]);
        assert_eq!(shannon_information_change(&a, &a, 100).unwrap().nats(), 0.0);
        let near_pure = simplex(&[1.0 - EPSILON_FLOOR, EPSILON_FLOOR]);
        let di = shannon_information_change(&near_pure, &flat, 100)
            .unwrap()
            .nats();
        assert!((di - 100.0 * std::f64::consts::LN_2).abs() < 1e-5);
        // 100 * (ln 2 - (0.6 ln(1/0.6) + 0.4 ln(1/0.4))) = 100 * (0.693147 - 0.673012)
        let di = shannon_information_change(&a, &flat, 100).unwrap().nats();
        assert!((di - 2.0136).abs() < 1e-3, "{di}");
        let three = SimplexDistribution::flat(3).unwrap();
        assert_eq!(
            shannon_information_change(&a, &three, 10),
            Err(Error::DimensionMismatch(2, 3))
        );
    }

    #[test]
    fn sampled_counts_conserve_mass_and_are_reproducible() {
        let rho = simplex(&[0.999, 0.001]);
        let mut rng = SampleRng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_counts(&rho, 10, &mut rng).total(), 10);
        }
        let rho = simplex(&[0.2, 0.3, 0.5]);
        let a = sample_counts(&rho, 1000, &mut SampleRng::seed_from_u64(8));
        let b = sample_counts(&rho, 1000, &mut SampleRng::seed_from_u64(8));
        assert_eq!(a, b);
        assert_eq!(a.total(), 1000);
    }

    /// Multinomial oracle: mean 60, variance n ρ (1 - ρ) = 24 per draw.
    #[test]
    fn sampled_counts_have_multinomial_mean() {
        let rho = simplex(&[0.6, 0.4]);
        let mut rng = SampleRng::seed_from_u64(2);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| sample_counts(&rho, 100, &mut rng).counts()[0] as f64)
            .collect();
        let m = MeanEstimate::from_samples(&xs).unwrap();
        assert!(
            (m.mean - 60.0).abs() < 3.0 * (24.0f64 / 1e4).sqrt(),
            "{}",
            m.mean
        );
    }

    #[test]
    fn log_joint_gaussian_examples() {
        let r1 = simplex(&[0.6, 0.4]);
        let r2 = simplex(&[0.5, 0.5]);
        let at_means = TransitionSample::new(counts(&[60, 40]), counts(&[50, 50])).unwrap();
        assert_eq!(
            log_joint_gaussian(&at_means, &r1, &r2, 100, Order::ForwardXiEta).unwrap(),
            0.0
        );
        // -[(50-60)^2/120 + (50-40)^2/80] - [(60-50)^2/100 + (40-50)^2/100]
        let expected = -(100.0 / 120.0 + 100.0 / 80.0) - (1.0 + 1.0);
        let rev = log_joint_gaussian(&at_means, &r1, &r2, 100, Order::ReversedEtaXi).unwrap();
        assert!((rev - expected).abs() < 1e-12);
        assert!((rev - -4.0833).abs() < 1e-4);

        let s = TransitionSample::new(counts(&[55, 45]), counts(&[62, 38])).unwrap();
        assert_eq!(
            log_joint_gaussian(&s, &r1, &r1, 100, Order::ForwardXiEta).unwrap(),
            log_joint_gaussian(&s, &r1, &r1, 100, Order::ReversedEtaXi).unwrap()
        );
        assert!(log_joint_gaussian(&s, &r1, &r2, 99, Order::ForwardXiEta).is_err());
        let wide = TransitionSample::new(counts(&[50, 25, 25]), counts(&[50, 25, 25])).unwrap();
        assert!(log_joint_gaussian(&wide, &r1, &r2, 100, Order::ForwardXiEta).is_err());
    }

    #[test]
    fn d_joint_examples() {
        let r1 = simplex(&[0.6, 0.4]);
        let r2 = simplex(&[0.5, 0.5]);
        let at_means = TransitionSample::new(counts(&[60, 40]), counts(&[50, 50])).unwrap();
        let d = d_joint(&at_means, &r1, &r2, 100).unwrap();
        assert!((d.value() - 4.083_333_333_333_333).abs() < 1e-12);
        assert_eq!(d.provenance(), Provenance::JointClassical);
        assert!((d.value() - mean_d_joint(&r1, &r2, 100).unwrap()).abs() < 1e-12);
        assert_eq!(d_joint(&at_means, &r1, &r1, 100).unwrap().value(), 0.0);
    }

    #[test]
    fn mean_d_joint_examples() {
        let r1 = simplex(&[0.6, 0.4]);
        let flat = SimplexDistribution::flat(2).unwrap();
        assert_eq!(mean_d_joint(&r1, &r1, 100).unwrap(), 0.0);
        // (-0.11)(1/3) + (0.09)(-0.5) = -0.081667; times -50
        let m = mean_d_joint(&r1, &flat, 100).unwrap();
        assert!((m - 4.083_333_333_333_333).abs() < 1e-12);
        // leading order n d Σ Δρ^2 = 100 * 2 * 0.02
        let (_, d_lead) = leading_order_pair(&r1, &flat, 100).unwrap();
        assert!((d_lead - 4.0).abs() < 1e-12);
        assert!((m - d_lead).abs() < 0.1);
    }

    #[test]
    fn d_marginal_examples() {
        let r1 = simplex(&[0.6, 0.4]);
        let r2 = simplex(&[0.5, 0.5]);
        let d = d_marginal(&counts(&[50, 50]), &r1, &r2, 100).unwrap();
        // 0 - (-[(50-60)^2/120 + (50-40)^2/80])
        assert!((d.value() - 2.083_333_333_333_333).abs() < 1e-12);
        assert_eq!(d.provenance(), Provenance::MarginalClassical);
        assert_eq!(
            d_marginal(&counts(&[47, 53]), &r1, &r1, 100)
                .unwrap()
                .value(),
            0.0
        );
    }

    /// Monte Carlo against the leading-order ΔI = (n d / 2) Σ Δρ^2.
    #[test]
    fn marginal_mean_tracks_leading_order_information() {
        let r1 = simplex(&[0.53, 0.47]);
        let exp = factor_two_experiment(&r1, 10_000, 10_000, 3).unwrap();
        let (di_lead, _) = exp.leading_order.unwrap();
        let m = exp.d_marginal_mean();
        // The sampled mean sits about 0.07 above ΔI_lead here (third-order
        // and count-variance terms), roughly one standard error.
        assert!(m.z_score(di_lead) < 3.0, "{m:?} vs {di_lead}");
    }

    #[test]
    fn leading_order_pair_examples() {
        let flat = SimplexDistribution::flat(2).unwrap();
        assert_eq!(leading_order_pair(&flat, &flat, 100).unwrap(), (0.0, 0.0));
        let (di, d) = leading_order_pair(&simplex(&[0.6, 0.4]), &flat, 100).unwrap();
        assert!((di - 2.0).abs() < 1e-12 && (d - 4.0).abs() < 1e-12);
        assert_eq!(
            leading_order_pair(&flat, &simplex(&[0.6, 0.4]), 100),
            Err(Error::NotFlat)
        );
    }

    #[test]
    fn reversible_ensemble_gives_zero_means() {
        let flat = SimplexDistribution::flat(3).unwrap();
        let exp = factor_two_experiment(&flat, 1000, 2000, 4).unwrap();
        assert!(exp.d_joint_mean().z_score(0.0) < 3.0);
        assert_eq!(exp.d_marginal_mean().mean, 0.0);
        assert_eq!(exp.delta_i, 0.0);
    }

    #[test]
    fn log_constant_cancels_from_d_joint() {
        let r1 = simplex(&[0.3, 0.7]);
        let r2 = simplex(&[0.5, 0.5]);
        let s = TransitionSample::new(counts(&[28, 72]), counts(&[55, 45])).unwrap();
        let base = d_joint(&s, &r1, &r2, 100).unwrap().value();
        for c in [-1e3, -7.5, 3.25, 1e3] {
            let shifted = d_joint_with_log_constant(&s, &r1, &r2, 100, c)
                .unwrap()
                .value();
            assert!((shifted - base).abs() < 1e-9 * base.abs().max(1.0));
        }
    }

    fn ln_binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
        let ln_fact = |m: u64| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
        ln_fact(n) - ln_fact(k) - ln_fact(n - k)
            + k as f64 * p.ln()
            + (n - k) as f64 * (1.0 - p).ln()
    }

    /// Exact multinomial enumeration for small n: sign of the exact
    /// log-ratio vs sign of the Gaussian D_joint, weighted by P(ξ, η).
    #[test]
    fn gaussian_sign_agrees_with_exact_small_instances() {
        let flat = SimplexDistribution::flat(2).unwrap();
        for (p1, n) in [(0.8, 6u64), (0.75, 5), (0.25, 6), (0.9, 4), (0.7, 6)] {
            let r1 = simplex(&[p1, 1.0 - p1]);
            let mut agree = 0.0;
            let mut total = 0.0;
            for a in 0..=n {
                for b in 0..=n {
                    let fwd = ln_binomial_pmf(a, n, p1) + ln_binomial_pmf(b, n, 0.5);
                    let rev = ln_binomial_pmf(b, n, p1) + ln_binomial_pmf(a, n, 0.5);
                    let sample =
                        TransitionSample::new(counts(&[a, n - a]), counts(&[b, n - b])).unwrap();
                    let g = d_joint(&sample, &r1, &flat, n).unwrap().value();
                    let w = fwd.exp();
                    total += w;
                    if (fwd - rev).signum() == g.signum()
                        || (fwd - rev).abs() < 1e-12 && g.abs() < 1e-12
                    {
                        agree += w;
                    }
                }
            }
            assert!((total - 1.0).abs() < 1e-12);
            assert!(agree >= 0.9, "p1 = {p1}, n = {n}: agreement {agree}");
        }
    }

    proptest! {
        #[test]
        fn d_joint_is_antisymmetric(
            p in 0.05f64..0.95,
            q in 0.05f64..0.95,
            a in 0u64..=50,
            b in 0u64..=50,
        ) {
            let r1 = simplex(&[p, 1.0 - p]);
            let r2 = simplex(&[q, 1.0 - q]);
            let s = TransitionSample::new(counts(&[a, 50 - a]), counts(&[b, 50 - b])).unwrap();
            let d = d_joint(&s, &r1, &r2, 50).unwrap().value();
            let back = d_joint(&s.swapped(), &r1, &r2, 50).unwrap().value();
            prop_assert_eq!(d, -back);
        }

        #[test]
        fn d_joint_at_forward_means_equals_closed_form(
            k in 1u64..50,
            j in 1u64..50,
        ) {
            let n = 50;
            let r1 = simplex(&[k as f64 / n as f64, (n - k) as f64 / n as f64]);
            let r2 = simplex(&[j as f64 / n as f64, (n - j) as f64 / n as f64]);
            let s = TransitionSample::new(counts(&[k, n - k]), counts(&[j, n - j])).unwrap();
            let d = d_joint(&s, &r1, &r2, n).unwrap().value();
            let m = mean_d_joint(&r1, &r2, n).unwrap();
            prop_assert!((d - m).abs() <= 1e-9 * m.abs().max(1.0));
        }

        #[test]
        fn leading_order_ratio_is_two(deltas in proptest::collection::vec(-0.2f64..0.2, 1..4)) {
            let d = deltas.len() + 1;
            let u = 1.0 / d as f64;
            let mut p: Vec<f64> = deltas.iter().map(|x| u + x * u).collect();
            let last = 1.0 - p.iter().sum::<f64>();
            p.push(last);
            let r1 = simplex(&p);
            let flat = SimplexDistribution::flat(d).unwrap();
            let (di, dl) = leading_order_pair(&r1, &flat, 1000).unwrap();
            prop_assume!(di > 0.0);
            prop_assert!((dl / di - 2.0).abs() < 1e-12);
        }

        #[test]
        fn leading_order_information_is_accurate_for_small_shifts(
            deltas in proptest::collection::vec(-0.05f64..0.05, 1..4)
        ) {
            let d = deltas.len() + 1;
            let u = 1.0 / d as f64;
            let mut p: Vec<f64> = deltas.iter().map(|x| u + x).collect();
            let last = 1.0 - p.iter().sum::<f64>();
            prop_assume!((last - u).abs() <= 0.05);
            p.push(last);
            let r1 = simplex(&p);
            let flat = SimplexDistribution::flat(d).unwrap();
            let exact = shannon_information_change(&r1, &flat, 1000).unwrap().nats();
            let (di, _) = leading_order_pair(&r1, &flat, 1000).unwrap();
            prop_assume!(exact > 1e-9);
            prop_assert!((exact - di).abs() / exact <= 0.10);
        }
    }
}
