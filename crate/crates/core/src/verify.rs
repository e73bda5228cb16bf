//! Acceptance checks.
//!
//! Each criterion runs at fixed sample sizes and tolerances and reports a
//! pass/fail verdict with the numbers behind it. The checks are shared by the
//! `verify` subcommand and the `acceptance` integration test.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrow::{arrow_probability, TimeArrow};
use crate::classical::{
    factor_two_experiment, mean_d_joint, shannon_information_change, SimplexDistribution,
};
use crate::error::Result;
use crate::langevin::{
    d_statistic, entropy_production, om_log_weight, sample_arm, simulate_path,
    simulate_path_with_noise, stationary_sample, LangevinParams, Protocol,
};
use crate::quantum::{
    fidelity_closed_form, fidelity_experiment, fidelity_two_outcome_sum, projector_traces,
    typical_projector, Spectrum,
};
use crate::rng::{ids, SampleRng, StreamKey};
use crate::stats::{Histogram, MeanEstimate};

pub const ALL_CRITERIA: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Seed used when none is given.
pub const DEFAULT_VERIFY_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    /// `criterion N [PASS|FAIL] name: detail`.
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed(id: u8, name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CriterionReport {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionReport {
        id,
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Run one criterion.
pub fn run_criterion(id: u8, seed: u64) -> Option<CriterionReport> {
    Some(match id {
        1 => quantum_fidelity_law(seed),
        2 => flat_regime_exactness(),
        3 => discrete_fluctuation_identity(seed),
        4 => integral_relation(seed),
        5 => histogram_fluctuation_theorem(seed),
        6 => factor_two(seed),
        7 => closed_forms(),
        8 => arrow_core_properties(seed),
        9 => dt_convergence(seed),
        _ => return None,
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    ALL_CRITERIA
        .iter()
        .filter_map(|&id| run_criterion(id, seed))
        .collect()
}

// Quantum

pub const QUANTUM_TRIALS: usize = 100_000;

/// Pure qubit, n = 1..=12: empirical fidelity within 3 SE of
/// `1/(1 + 2^{-n})`, exact two-outcome sum within 1e-12.
pub fn quantum_fidelity_law(seed: u64) -> CriterionReport {
    timed(1, "quantum fidelity law", || {
        let pure = Spectrum::flat_on(1, 2)?;
        let mut worst_z: f64 = 0.0;
        let mut worst_sum: f64 = 0.0;
        for n in 1..=12u32 {
            let exp = fidelity_experiment(
                &pure,
                n,
                0.0,
                QUANTUM_TRIALS,
                seed.wrapping_add(u64::from(n)),
            )?;
            let closed = 1.0 / (1.0 + (-f64::from(n) * std::f64::consts::LN_2).exp());
            let est = MeanEstimate {
                mean: exp.f_empirical.mean,
                std_error: exp.f_empirical.std_error,
                count: exp.f_empirical.sample_count,
            };
            worst_z = worst_z.max(est.z_score(closed));
            worst_sum = worst_sum
                .max((fidelity_two_outcome_sum(exp.delta_i)? - closed).abs())
                .max((fidelity_closed_form(exp.delta_i)? - closed).abs());
        }
        Ok((
            worst_z <= 3.0 && worst_sum <= 1e-12,
            format!("max |F_emp - F|/SE = {worst_z:.2} (<= 3), max exact-sum gap = {worst_sum:.1e} (<= 1e-12)"),
        ))
    })
}

/// Rank and `ρ1`-mass of the δ = 0 typical set by walking all `d^n` strings.
fn brute_force_traces(p: &[f64], n: u32) -> (f64, f64) {
    let d = p.len() as u64;
    let entropy: f64 = -p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x * x.ln())
        .sum::<f64>();
    let mut rank = 0u64;
    let mut mass = 0.0;
    for code in 0..d.pow(n) {
        let mut rest = code;
        let mut prob = 1.0;
        for _ in 0..n {
            prob *= p[(rest % d) as usize];
            rest /= d;
        }
        if prob > 0.0 && (-prob.ln() / f64::from(n) - entropy).abs() <= 1e-9 {
            rank += 1;
            mass += prob;
        }
    }
    (mass, rank as f64 / (d as f64).powi(n as i32))
}

pub const FLAT_CASES: [(usize, usize, u32); 3] = [(1, 2, 3), (2, 4, 2), (2, 2, 5)];

/// Flat-on-k spectra: `tr_xi = 1`, `tr_eta = e^{-ΔI}` to 1e-12, cross-checked
/// by brute force.
pub fn flat_regime_exactness() -> CriterionReport {
    timed(2, "flat-regime exactness", || {
        let mut worst: f64 = 0.0;
        for (k, d, n) in FLAT_CASES {
            let s = Spectrum::flat_on(k, d)?;
            let spec = typical_projector(&s, n, 0.0)?;
            let t = projector_traces(&spec, &s)?;
            let delta_i = f64::from(n) * (d as f64 / k as f64).ln();
            let (bf_xi, bf_eta) = brute_force_traces(s.eigenvalues(), n);
            worst = worst
                .max((t.tr_xi - 1.0).abs())
                .max((t.tr_eta - (-delta_i).exp()).abs())
                .max((t.tr_xi - bf_xi).abs())
                .max((t.tr_eta - bf_eta).abs());
        }
        Ok((
            worst <= 1e-12,
            format!("max deviation = {worst:.1e} over {FLAT_CASES:?} (<= 1e-12)"),
        ))
    })
}

// Langevin

pub const LAMBDA: f64 = 1.0;
pub const GAMMA: f64 = 0.5;
pub const DURATION: f64 = 5.0;
pub const IDENTITY_PATHS: usize = 1_000;
pub const LANGEVIN_PATHS: usize = 100_000;

/// `λ = 1`, `γ = 0.5`, `[0, 5]`, unit quench at `t = 2.5`.
pub fn quench_setup(dt: f64) -> Result<(LangevinParams, Protocol)> {
    let params = LangevinParams::new(LAMBDA, GAMMA, dt, 0.0, DURATION)?;
    let protocol = Protocol::quench(&params, 0.0, 1.0, 0.5 * DURATION)?;
    Ok((params, protocol))
}

/// Largest `|[log w_fwd - log w_rev] - ΔI|` over stationary-start paths.
pub fn identity_residual(dt: f64, n_paths: usize, seed: u64) -> Result<f64> {
    let (params, protocol) = quench_setup(dt)?;
    let reversed = protocol.reversed();
    let key = StreamKey::new(seed, ids::LANGEVIN_FORWARD);
    let residuals = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.stream(i);
            let x0 = stationary_sample(&params, protocol.first(), &mut rng)?;
            let path = simulate_path(&params, &protocol, x0, &mut rng)?;
            let fwd = om_log_weight(&path, &protocol, &params)?.log_weight;
            let rev = om_log_weight(&path.reversed(), &reversed, &params)?.log_weight;
            let delta_i = entropy_production(&path, &protocol, &params)?.nats();
            Ok(((fwd - rev) - delta_i).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

pub fn discrete_fluctuation_identity(seed: u64) -> CriterionReport {
    timed(3, "discrete fluctuation identity", || {
        let r = identity_residual(1e-3, IDENTITY_PATHS, seed)?;
        Ok((
            r <= 1e-9,
            format!("max residual = {r:.2e} over {IDENTITY_PATHS} paths (<= 1e-9)"),
        ))
    })
}

/// `<e^{-D}>` over the forward arm of the quench.
pub fn integral_relation_estimate(dt: f64, n_paths: usize, seed: u64) -> Result<MeanEstimate> {
    let (params, protocol) = quench_setup(dt)?;
    let arm = sample_arm(
        &params,
        &protocol,
        n_paths,
        StreamKey::new(seed, ids::LANGEVIN_FORWARD),
    )?;
    let w: Vec<f64> = arm.iter().map(|r| (-r.d).exp()).collect();
    MeanEstimate::from_samples(&w).ok_or(crate::Error::EmptySamples)
}

pub fn integral_relation(seed: u64) -> CriterionReport {
    timed(4, "integral relation", || {
        let est = integral_relation_estimate(1e-3, LANGEVIN_PATHS, seed)?;
        let z = est.z_score(1.0);
        Ok((
            z <= 3.0,
            format!(
                "<e^-D> = {:.5} +- {:.5}, |z| = {z:.2} (<= 3)",
                est.mean, est.std_error
            ),
        ))
    })
}

pub const HISTOGRAM_WIDTH: f64 = 0.2;
pub const HISTOGRAM_MIN_COUNT: u64 = 500;
pub const HISTOGRAM_TOLERANCE: f64 = 0.15;

/// Result of comparing `log[P_F(x) / P_R(-x)]` with `x` bin by bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramCheck {
    /// `(x, log ratio)` for every bin pair with enough counts on both sides.
    pub bins: Vec<(f64, f64)>,
    pub max_deviation: f64,
    /// Least-squares slope of the log ratio against `x`.
    pub slope: f64,
}

/// Compare forward samples at `x` with reverse samples at `-x`.
pub fn histogram_check(
    forward: &[f64],
    reverse: &[f64],
    width: f64,
    min_count: u64,
) -> HistogramCheck {
    let half = 40.0 * width;
    let hf = Histogram::from_samples(-half, width, 80, forward.iter().copied());
    let hr = Histogram::from_samples(-half, width, 80, reverse.iter().copied());
    let (nf, nr) = (forward.len() as f64, reverse.len() as f64);
    let bins: Vec<(f64, f64)> = (0..hf.counts.len())
        .filter_map(|b| {
            let mirror = hf.counts.len() - 1 - b;
            let (cf, cr) = (hf.counts[b], hr.counts[mirror]);
            (cf >= min_count && cr >= min_count)
                .then(|| (hf.center(b), (cf as f64 / nf).ln() - (cr as f64 / nr).ln()))
        })
        .collect();
    let max_deviation = bins.iter().map(|(x, l)| (l - x).abs()).fold(0.0, f64::max);
    let n = bins.len() as f64;
    let mx = bins.iter().map(|b| b.0).sum::<f64>() / n;
    let my = bins.iter().map(|b| b.1).sum::<f64>() / n;
    let sxy: f64 = bins.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = bins.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    HistogramCheck {
        bins,
        max_deviation,
        slope: sxy / sxx,
    }
}

pub fn histogram_fluctuation_theorem(seed: u64) -> CriterionReport {
    timed(5, "histogram fluctuation theorem", || {
        let (params, protocol) = quench_setup(1e-3)?;
        let exp =
            crate::langevin::forward_reverse_experiment(&params, &protocol, LANGEVIN_PATHS, seed)?;
        let di = histogram_check(
            &exp.forward_delta_i(),
            &exp.reverse_delta_i(),
            HISTOGRAM_WIDTH,
            HISTOGRAM_MIN_COUNT,
        );
        let d = histogram_check(
            &exp.forward_d(),
            &exp.reverse_d(),
            HISTOGRAM_WIDTH,
            HISTOGRAM_MIN_COUNT,
        );
        let passed = !di.bins.is_empty() && di.max_deviation <= HISTOGRAM_TOLERANCE;
        Ok((
            passed,
            format!(
                "ΔI: {} bins, max |log ratio - x| = {:.3} (<= {HISTOGRAM_TOLERANCE}), slope {:.3}; \
                 D for reference: {} bins, max dev {:.3}, slope {:.3}",
                di.bins.len(),
                di.max_deviation,
                di.slope,
                d.bins.len(),
                d.max_deviation,
                d.slope
            ),
        ))
    })
}

// Classical

pub fn factor_two(seed: u64) -> CriterionReport {
    timed(6, "factor-2 anomaly and resolution", || {
        let rho1 = SimplexDistribution::new(vec![0.55, 0.45])?;
        let exp = factor_two_experiment(&rho1, 10_000, 10_000, seed)?;
        let (j, m) = (exp.joint_ratio(), exp.marginal_ratio());
        Ok((
            (1.9..=2.1).contains(&j) && (0.95..=1.05).contains(&m),
            format!("D_joint/ΔI = {j:.4} in [1.9, 2.1], D_marginal/ΔI = {m:.4} in [0.95, 1.05]"),
        ))
    })
}

pub fn closed_forms() -> CriterionReport {
    timed(7, "closed-form checks", || {
        let rho1 = SimplexDistribution::new(vec![0.6, 0.4])?;
        let flat = SimplexDistribution::flat(2)?;
        let m = mean_d_joint(&rho1, &flat, 100)?;
        let di = shannon_information_change(&rho1, &flat, 100)?.nats();
        Ok((
            (m - 4.0833).abs() <= 1e-4 && (di - 2.0136).abs() <= 1e-3,
            format!("mean D_joint = {m:.6} (4.0833 +- 1e-4), ΔI = {di:.6} (2.0136 +- 1e-3)"),
        ))
    })
}

// Arrow core

pub const RANDOM_PAIRS: usize = 1_000;
pub const MAX_OUTCOMES: usize = 16;

fn random_distribution(rng: &mut SampleRng, m: usize) -> Vec<f64> {
    // Exponential weights give a uniform point on the simplex.
    let w: Vec<f64> = (0..m)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-12)
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Logistic-law properties on a grid, then `F >= 1/2` and `Σ P e^{-D} = 1`
/// by exact enumeration over random pairs of laws.
pub fn arrow_core_properties(seed: u64) -> CriterionReport {
    timed(8, "arrow-core property suite", || {
        let mut worst_norm: f64 = 0.0;
        let mut worst_cov: f64 = 0.0;
        let mut monotone = true;
        let mut prev = 0.0;
        for k in -20_000..=20_000 {
            let x = f64::from(k) * 1e-3;
            let p = arrow_probability(x, TimeArrow::Plus)?;
            let m = arrow_probability(x, TimeArrow::Minus)?;
            worst_norm = worst_norm.max((p + m - 1.0).abs());
            worst_cov = worst_cov.max((p - arrow_probability(-x, TimeArrow::Minus)?).abs());
            monotone &= k == -20_000 || p > prev;
            prev = p;
        }
        let mut rng = SampleRng::seed_from_u64(seed);
        let mut min_f = f64::INFINITY;
        let mut worst_sum: f64 = 0.0;
        for _ in 0..RANDOM_PAIRS {
            let m = rng.random_range(2..=MAX_OUTCOMES);
            let fwd = random_distribution(&mut rng, m);
            let rev = random_distribution(&mut rng, m);
            let mut f = 0.0;
            let mut sum = 0.0;
            for (p, q) in fwd.iter().zip(&rev) {
                let d = crate::arrow::log_ratio(*p, *q)?.value();
                f += p * arrow_probability(d, TimeArrow::Plus)?;
                sum += p * (-d).exp();
            }
            min_f = min_f.min(f);
            worst_sum = worst_sum.max((sum - 1.0).abs());
        }
        let passed = worst_norm <= 1e-15
            && worst_cov == 0.0
            && monotone
            && min_f >= 0.5
            && worst_sum <= 1e-12;
        Ok((
            passed,
            format!(
                "normalization {worst_norm:.1e}, covariance {worst_cov:.1e}, monotone {monotone}, \
                 min F = {min_f:.4} over {RANDOM_PAIRS} pairs, max |Σ P e^-D - 1| = {worst_sum:.1e}"
            ),
        ))
    })
}

// Discretization

/// `<e^{-D}>` at `dt` and `dt / 2` on coupled noise: each coarse increment
/// sums the two fine increments it covers, and both runs share `ξ`.
pub fn coupled_integral_relation(
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<(MeanEstimate, MeanEstimate)> {
    let (coarse, coarse_protocol) = quench_setup(dt)?;
    let (fine, fine_protocol) = quench_setup(dt / 2.0)?;
    let key = StreamKey::new(seed, ids::LANGEVIN_FORWARD);
    let pairs = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.stream(i);
            let x0 = stationary_sample(&coarse, coarse_protocol.first(), &mut rng)?;
            let z_fine: Vec<f64> = (0..fine.n_steps())
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let z_coarse: Vec<f64> = z_fine
                .chunks_exact(2)
                .map(|z| (z[0] + z[1]) / std::f64::consts::SQRT_2)
                .collect();
            let pc = simulate_path_with_noise(&coarse, &coarse_protocol, x0, &z_coarse)?;
            let pf = simulate_path_with_noise(&fine, &fine_protocol, x0, &z_fine)?;
            let dc = d_statistic(&pc, &coarse_protocol, &coarse)?.value();
            let df = d_statistic(&pf, &fine_protocol, &fine)?.value();
            Ok(((-dc).exp(), (-df).exp()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (wc, wf): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let empty = crate::Error::EmptySamples;
    Ok((
        MeanEstimate::from_samples(&wc).ok_or(empty.clone())?,
        MeanEstimate::from_samples(&wf).ok_or(empty)?,
    ))
}

pub fn dt_convergence(seed: u64) -> CriterionReport {
    timed(9, "dt-convergence", || {
        let r1 = identity_residual(1e-3, IDENTITY_PATHS, seed)?;
        let r2 = identity_residual(5e-4, IDENTITY_PATHS, seed)?;
        let ratio = r1 / r2;
        let (coarse, fine) = coupled_integral_relation(1e-3, LANGEVIN_PATHS, seed)?;
        let shift = (coarse.mean - fine.mean).abs();
        let se = coarse.std_error;
        Ok((
            ratio >= 1.9 && shift < se,
            format!(
                "identity residual {r1:.2e} -> {r2:.2e}, ratio {ratio:.2} (>= 1.9); \
                 <e^-D> {:.5} -> {:.5}, shift {shift:.5} vs SE {se:.5} (< 1 SE)",
                coarse.mean, fine.mean
            ),
        ))
    })
}
