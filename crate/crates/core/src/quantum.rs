//! Quantum ensemble `ρ1^{⊗n} → (1/d)^{⊗n}` and the typical-subspace test.
//!
//! With a maximally mixed final state every operator involved is diagonal in
//! the tensor-power eigenbasis of `ρ1`, so the `d^n`-dimensional problem
//! reduces to combinatorics over type classes: count vectors `k` with
//! `Σ k_j = n` over the eigenvalue indices. A type class holds
//! `n! / Π k_j!` eigenstrings, each of probability `Π p_j^{k_j}`.
//!
//! The projector `E1` spans the eigenstrings whose log-likelihood rate
//! `-(1/n) Σ k_j ln p_j` lies within `delta` of the entropy `I1 = S(ρ1)`.
//! Measuring `E1` yields outcome 1 with probability `Tr(E1 ρ1^{⊗n})` on the
//! initial ensemble and `rank(E1) / d^n` on the final one. For a spectrum that
//! is flat on its support and `delta = 0` these are exactly `1` and `e^{-ΔI}`.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrow::{arrow_probability, FidelityEstimate, InformationChange, TimeArrow};
use crate::error::{finite, invalid, Error, Result};
use crate::rng::{ids, StreamKey};
use crate::stats::MeanEstimate;

pub type Complex64 = Complex<f64>;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

/// Maximum number of type classes enumerated by [`typical_projector`].
pub const MAX_TYPE_CLASSES: u64 = 1_000_000;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-12;
const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-12;
const SPECTRUM_SUM_TOLERANCE: f64 = 1e-10;
/// Absolute slack on the typicality window, absorbing rounding in `ln p_j`.
const TYPICALITY_SLACK: f64 = 1e-12;

fn check_dim(d: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(invalid(
            "d",
            format!("dimension {d} outside {MIN_DIM}..={MAX_DIM}"),
        ))
    }
}

/// Eigenvalues of a density matrix, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    #[serde(skip)]
    basis: Option<DMatrix<Complex64>>,
}

impl Spectrum {
    /// Validates a probability vector; entries within `-1e-12` of zero are
    /// clamped to zero.
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        check_dim(eigenvalues.len())?;
        for p in &mut eigenvalues {
            finite("eigenvalue", *p)?;
            if *p < -NEGATIVE_EIGENVALUE_TOLERANCE {
                return Err(Error::InvalidDensityMatrix(format!(
                    "negative eigenvalue {p}"
                )));
            }
            *p = p.max(0.0);
        }
        let sum: f64 = eigenvalues.iter().sum();
        if (sum - 1.0).abs() > SPECTRUM_SUM_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "eigenvalues sum to {sum}"
            )));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            eigenvalues,
            basis: None,
        })
    }

    /// `k` equal eigenvalues `1/k` followed by `d - k` zeros.
    pub fn flat_on(k: usize, d: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(invalid(
                "k",
                format!("support size {k} must lie in 1..={d}"),
            ));
        }
        let mut p = vec![0.0; d];
        p[..k].fill(1.0 / k as f64);
        Self::new(p)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors (as columns) when the spectrum came from a matrix.
    pub fn basis(&self) -> Option<&DMatrix<Complex64>> {
        self.basis.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Von Neumann entropy `-Σ p ln p` with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .eigenvalues
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// All nonzero eigenvalues equal.
    pub fn is_flat(&self) -> bool {
        let support: Vec<f64> = self
            .eigenvalues
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .collect();
        let u = 1.0 / support.len() as f64;
        support.iter().all(|p| (p - u).abs() <= 1e-12)
    }
}

/// A `d × d` density matrix, `2 <= d <= 8`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        check_dim(d)?;
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(d, bad.len()));
        }
        let entries = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Self::from_matrix(entries)
    }

    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        let d = entries.nrows();
        check_dim(d)?;
        if entries.ncols() != d {
            return Err(Error::DimensionMismatch(d, entries.ncols()));
        }
        for z in entries.iter() {
            finite("matrix entry", z.re)?;
            finite("matrix entry", z.im)?;
        }
        for i in 0..d {
            for j in 0..d {
                let gap = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                if gap > HERMITIAN_TOLERANCE {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({i}, {j}): deviation {gap:e}"
                    )));
                }
            }
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {trace} is not 1"
            )));
        }
        let rho = Self { entries };
        rho.spectrum()?;
        Ok(rho)
    }

    /// Diagonal matrix with the given populations.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let d = probs.len();
        check_dim(d)?;
        Self::from_matrix(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex::new(probs[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Eigen-decomposition; eigenvalues sorted descending, eigenvectors kept
    /// as the basis change.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let eig = self.entries.clone().symmetric_eigen();
        let d = self.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut spectrum = Spectrum::new(values)?;
        spectrum.basis = Some(DMatrix::from_fn(d, d, |r, c| {
            eig.eigenvectors[(r, order[c])]
        }));
        Ok(spectrum)
    }

    pub fn entropy(&self) -> Result<f64> {
        Ok(self.spectrum()?.entropy())
    }
}

/// `ΔI = n [S(ρ2) - S(ρ1)]`.
pub fn von_neumann_information_change(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    n: u32,
) -> Result<InformationChange> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    InformationChange::new(n as f64 * (rho2.entropy()? - rho1.entropy()?))
}

/// The maximally mixed state `1/d`.
pub fn maximum_information_state(d: usize) -> Result<DensityMatrix> {
    check_dim(d)?;
    DensityMatrix::diagonal(&vec![1.0 / d as f64; d])
}

/// One type class of eigenstrings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeClass {
    pub counts: Vec<u32>,
    /// `ln(n! / Π k_j!)`, the number of strings in the class.
    pub ln_multiplicity: f64,
    /// `Σ k_j ln p_j`, the log-probability of each string in the class.
    pub ln_string_probability: f64,
}

impl TypeClass {
    /// Exact number of strings, if it fits in a `u128`.
    pub fn multiplicity(&self) -> Option<u128> {
        let n: u32 = self.counts.iter().sum();
        let mut result: u128 = 1;
        let mut placed: u32 = 0;
        for &k in &self.counts {
            // multiply by C(placed + k, k) incrementally
            for i in 1..=k {
                result = result.checked_mul(u128::from(placed + i))? / u128::from(i);
            }
            placed += k;
        }
        debug_assert_eq!(placed, n);
        Some(result)
    }
}

/// Compact description of the typical projector `E1` on `(C^d)^{⊗n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalProjectorSpec {
    pub n: u32,
    pub delta: f64,
    pub dim: usize,
    /// Entropy `I1` the typicality window is centred on.
    pub entropy: f64,
    pub classes: Vec<TypeClass>,
    /// `ln rank(E1)`; `-inf` when no class qualifies.
    pub log_dim: f64,
    eigenvalues: Vec<f64>,
}

impl TypicalProjectorSpec {
    pub fn rank(&self) -> f64 {
        self.log_dim.exp()
    }

    /// Exact rank, if it fits in a `u128`.
    pub fn rank_exact(&self) -> Option<u128> {
        self.classes
            .iter()
            .try_fold(0u128, |acc, c| acc.checked_add(c.multiplicity()?))
    }

    /// Whether an eigenstring with these index counts lies in `E1`.
    pub fn contains_counts(&self, counts: &[u32]) -> bool {
        self.classes.iter().any(|c| c.counts == counts)
    }
}

fn ln_factorials(n: u32) -> Vec<f64> {
    let mut table = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for i in 1..=n {
        acc += f64::from(i).ln();
        table.push(acc);
    }
    table
}

fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Number of count vectors of length `d` summing to `n`: `C(n + d - 1, d - 1)`.
pub fn type_class_count(n: u32, d: usize) -> f64 {
    let ln_fact = |m: f64| -> f64 { (1..=m as u64).map(|i| (i as f64).ln()).sum() };
    let top = f64::from(n) + d as f64 - 1.0;
    (ln_fact(top) - ln_fact(d as f64 - 1.0) - ln_fact(f64::from(n)))
        .exp()
        .round()
}

fn for_each_composition(n: u32, d: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(left: u32, slot: usize, buf: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if slot + 1 == buf.len() {
            buf[slot] = left;
            f(buf);
            return;
        }
        for k in (0..=left).rev() {
            buf[slot] = k;
            rec(left - k, slot + 1, buf, f);
        }
    }
    let mut buf = vec![0; d];
    rec(n, 0, &mut buf, f);
}

/// Enumerate the type classes that are `delta`-typical for `spectrum`.
pub fn typical_projector(spectrum: &Spectrum, n: u32, delta: f64) -> Result<TypicalProjectorSpec> {
    if n == 0 {
        return Err(invalid("n", "tensor power must be positive"));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid(
            "delta",
            "typicality width must be finite and nonnegative",
        ));
    }
    let d = spectrum.dim();
    let classes_total = type_class_count(n, d);
    if classes_total > MAX_TYPE_CLASSES as f64 {
        return Err(Error::InfeasibleEnumeration {
            classes: classes_total,
            limit: MAX_TYPE_CLASSES,
        });
    }
    let entropy = spectrum.entropy();
    let ln_p: Vec<f64> = spectrum.eigenvalues.iter().map(|p| p.ln()).collect();
    let ln_fact = ln_factorials(n);
    let mut classes = Vec::new();
    for_each_composition(n, d, &mut |k| {
        if k.iter()
            .zip(&ln_p)
            .any(|(&kj, lp)| kj > 0 && *lp == f64::NEG_INFINITY)
        {
            return;
        }
        let ln_prob: f64 = k
            .iter()
            .zip(&ln_p)
            .filter(|(&kj, _)| kj > 0)
            .map(|(&kj, lp)| f64::from(kj) * lp)
            .sum();
        let rate = -ln_prob / f64::from(n);
        if (rate - entropy).abs() <= delta + TYPICALITY_SLACK {
            let ln_mult =
                ln_fact[n as usize] - k.iter().map(|&kj| ln_fact[kj as usize]).sum::<f64>();
            classes.push(TypeClass {
                counts: k.to_vec(),
                ln_multiplicity: ln_mult,
                ln_string_probability: ln_prob,
            });
        }
    });
    let log_dim = log_sum_exp(classes.iter().map(|c| c.ln_multiplicity));
    Ok(TypicalProjectorSpec {
        n,
        delta,
        dim: d,
        entropy,
        classes,
        log_dim,
        eigenvalues: spectrum.eigenvalues.clone(),
    })
}

/// Outcome-1 probabilities of the `E1` measurement on the two ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorTraces {
    /// `Tr(E1 ρ1^{⊗n})`.
    pub tr_xi: f64,
    /// `Tr(E1 (1/d)^{⊗n}) = rank(E1) / d^n`.
    pub tr_eta: f64,
    pub ln_tr_xi: f64,
    pub ln_tr_eta: f64,
}

pub fn projector_traces(
    spec: &TypicalProjectorSpec,
    spectrum: &Spectrum,
) -> Result<ProjectorTraces> {
    if spec.eigenvalues != spectrum.eigenvalues {
        return Err(Error::SpectrumMismatch);
    }
    let ln_tr_xi = log_sum_exp(
        spec.classes
            .iter()
            .map(|c| c.ln_multiplicity + c.ln_string_probability),
    );
    let ln_tr_eta = spec.log_dim - f64::from(spec.n) * (spec.dim as f64).ln();
    Ok(ProjectorTraces {
        tr_xi: ln_tr_xi.exp(),
        tr_eta: ln_tr_eta.exp(),
        ln_tr_xi,
        ln_tr_eta,
    })
}

/// Laws of the outcome `E1 = 1` under the two hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomePair {
    /// Forward law (the maximally mixed ensemble is tested): `e^{-ΔI}`.
    pub p_one_forward: f64,
    /// Reversed law (the initial ensemble is tested): `1`.
    pub p_one_reversed: f64,
    /// `ln p_one_forward = -ΔI`, exact for any `ΔI`.
    pub ln_p_one_forward: f64,
}

fn nonnegative(delta_i: f64) -> Result<f64> {
    let x = finite("information change", delta_i)?;
    if x < 0.0 {
        Err(Error::NegativeInformation(x))
    } else {
        Ok(x)
    }
}

pub fn outcome_distributions(delta_i: f64) -> Result<OutcomePair> {
    let x = nonnegative(delta_i)?;
    Ok(OutcomePair {
        p_one_forward: (-x).exp(),
        p_one_reversed: 1.0,
        ln_p_one_forward: -x,
    })
}

/// Posterior over the arrow after one `E1` measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrowPosterior {
    pub plus: f64,
    pub minus: f64,
}

impl ArrowPosterior {
    pub fn mass(&self, s: TimeArrow) -> f64 {
        match s {
            TimeArrow::Plus => self.plus,
            TimeArrow::Minus => self.minus,
            TimeArrow::Undetermined => 0.0,
        }
    }
}

/// `E1 = 0` is impossible under the reversed law, so it settles the arrow
/// at `+` directly. `E1 = 1` has `D = -ΔI` and `P(+|1) = 1/(1 + e^{ΔI})`.
pub fn infer_arrow_from_outcome(e1: u8, delta_i: f64) -> Result<ArrowPosterior> {
    let x = nonnegative(delta_i)?;
    match e1 {
        0 => Ok(ArrowPosterior {
            plus: 1.0,
            minus: 0.0,
        }),
        1 => Ok(ArrowPosterior {
            plus: arrow_probability(-x, TimeArrow::Plus)?,
            minus: arrow_probability(-x, TimeArrow::Minus)?,
        }),
        other => Err(Error::InvalidOutcome(other)),
    }
}

/// `F = 1 / (1 + e^{-ΔI})`.
pub fn fidelity_closed_form(delta_i: f64) -> Result<f64> {
    arrow_probability(nonnegative(delta_i)?, TimeArrow::Plus)
}

/// `Σ_{E1} P(+|E1) P(E1)` under the forward law: the fidelity by direct
/// summation over both outcomes.
pub fn fidelity_two_outcome_sum(delta_i: f64) -> Result<f64> {
    let law = outcome_distributions(delta_i)?;
    let zero = infer_arrow_from_outcome(0, delta_i)?.plus * (1.0 - law.p_one_forward);
    let one = infer_arrow_from_outcome(1, delta_i)?.plus * law.p_one_forward;
    Ok(zero + one)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub arrow: TimeArrow,
    pub outcome: u8,
    /// Posterior mass assigned to the true arrow.
    pub score: f64,
}

/// Result of a simulated arrow-inference experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityExperiment {
    pub delta_i: f64,
    pub tr_xi: f64,
    pub tr_eta: f64,
    pub f_closed: f64,
    /// Expected score under the sampled laws, computed without sampling.
    pub f_expected: f64,
    pub f_empirical: FidelityEstimate,
    pub trials: Vec<TrialRecord>,
}

/// Sample `(s, E1)` pairs: `s` uniform; `E1 = 1` with probability `p_plus`
/// when `s = +` and `p_minus` when `s = -`. Posteriors use `delta_i`.
fn run_trials(
    p_plus: f64,
    p_minus: f64,
    delta_i: f64,
    n_trials: usize,
    key: StreamKey,
) -> Result<Vec<TrialRecord>> {
    if n_trials == 0 {
        return Err(invalid("n_trials", "at least one trial is required"));
    }
    let p_plus = p_plus.clamp(0.0, 1.0);
    let p_minus = p_minus.clamp(0.0, 1.0);
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.stream(i);
            let arrow = if rng.random_bool(0.5) {
                TimeArrow::Plus
            } else {
                TimeArrow::Minus
            };
            let p = if arrow == TimeArrow::Plus {
                p_plus
            } else {
                p_minus
            };
            let outcome = u8::from(rng.random_bool(p));
            let score = infer_arrow_from_outcome(outcome, delta_i)?.mass(arrow);
            Ok(TrialRecord {
                trial: i,
                arrow,
                outcome,
                score,
            })
        })
        .collect()
}

fn expected_score(p_plus: f64, p_minus: f64, delta_i: f64) -> Result<f64> {
    let one = infer_arrow_from_outcome(1, delta_i)?;
    let zero = infer_arrow_from_outcome(0, delta_i)?;
    let plus = (1.0 - p_plus) * zero.plus + p_plus * one.plus;
    let minus = (1.0 - p_minus) * zero.minus + p_minus * one.minus;
    Ok(0.5 * (plus + minus))
}

fn summarize(trials: &[TrialRecord]) -> FidelityEstimate {
    let scores: Vec<f64> = trials.iter().map(|t| t.score).collect();
    MeanEstimate::from_samples(&scores).expect("trials").into()
}

/// Arrow inference on `ρ1^{⊗n}` against the maximally mixed ensemble.
///
/// Under `s = +` the final ensemble is tested (outcome 1 with probability
/// `tr_eta`); under `s = -` the initial one is (probability `tr_xi`, which is
/// exactly 1 only in the flat, `delta = 0` regime). Posteriors use the exact
/// von Neumann `ΔI = n (ln d - S(ρ1))`.
pub fn fidelity_experiment(
    spectrum: &Spectrum,
    n: u32,
    delta: f64,
    n_trials: usize,
    master_seed: u64,
) -> Result<FidelityExperiment> {
    let d = spectrum.dim();
    let delta_i = f64::from(n) * ((d as f64).ln() - spectrum.entropy());
    let delta_i = delta_i.max(0.0);
    let spec = typical_projector(spectrum, n, delta)?;
    let traces = projector_traces(&spec, spectrum)?;
    let trials = run_trials(
        traces.tr_eta,
        traces.tr_xi,
        delta_i,
        n_trials,
        StreamKey::new(master_seed, ids::QUANTUM),
    )?;
    Ok(FidelityExperiment {
        delta_i,
        tr_xi: traces.tr_xi,
        tr_eta: traces.tr_eta,
        f_closed: fidelity_closed_form(delta_i)?,
        f_expected: expected_score(traces.tr_eta, traces.tr_xi, delta_i)?,
        f_empirical: summarize(&trials),
        trials,
    })
}

/// [`fidelity_experiment`] for a density matrix.
pub fn fidelity_experiment_for_state(
    rho1: &DensityMatrix,
    n: u32,
    delta: f64,
    n_trials: usize,
    master_seed: u64,
) -> Result<FidelityExperiment> {
    fidelity_experiment(&rho1.spectrum()?, n, delta, n_trials, master_seed)
}

/// Arrow inference directly from the two-point outcome laws at a given `ΔI`
/// (the exact regime, without building a projector). `point` separates the
/// random streams of different curve points.
pub fn two_point_fidelity_experiment(
    delta_i: f64,
    n_trials: usize,
    master_seed: u64,
    point: u64,
) -> Result<FidelityExperiment> {
    let law = outcome_distributions(delta_i)?;
    let key = StreamKey::new(master_seed, &format!("{}/{point}", ids::FIDELITY_CURVE));
    let trials = run_trials(
        law.p_one_forward,
        law.p_one_reversed,
        delta_i,
        n_trials,
        key,
    )?;
    Ok(FidelityExperiment {
        delta_i,
        tr_xi: law.p_one_reversed,
        tr_eta: law.p_one_forward,
        f_closed: fidelity_closed_form(delta_i)?,
        f_expected: expected_score(law.p_one_forward, law.p_one_reversed, delta_i)?,
        f_empirical: summarize(&trials),
        trials,
    })
}
