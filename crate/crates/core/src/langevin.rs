//! Driven overdamped Langevin dynamics and its path functionals.
//!
//! The process obeys `dX = -λ (X - X̄(t)) dt + sqrt(2γ) dW` on a uniform grid
//! `t_k = t1 + k dt`. Paths are sampled with Euler–Maruyama; the entropy
//! production and the Onsager–Machlup action are evaluated with the midpoint
//! rule, under which
//!
//! ```text
//! log W[X | X̄] - log W[rev X | rev X̄] = ΔI[X | X̄]
//! ```
//!
//! holds exactly for every discrete path (per step it is
//! `(a + b)^2 - (a - b)^2 = 4ab`).
//!
//! The boundary densities are the stationary Gaussians of the frozen dynamics,
//! mean `X̄` at the respective endpoint and variance `γ / λ`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrow::{DecisionStatistic, InformationChange, Provenance};
use crate::error::{finite, invalid, Error, Result};
use crate::rng::{ids, StreamKey};
use crate::stats::MeanEstimate;

/// Relative slack allowed when checking that `(t2 - t1) / dt` is an integer.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinParams {
    lambda: f64,
    gamma: f64,
    dt: f64,
    t1: f64,
    t2: f64,
    n_steps: usize,
}

impl LangevinParams {
    /// `gamma = 0` is accepted for noise-free integration; functionals that
    /// divide by `gamma` reject it.
    pub fn new(lambda: f64, gamma: f64, dt: f64, t1: f64, t2: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda", lambda),
            ("gamma", gamma),
            ("dt", dt),
            ("t1", t1),
            ("t2", t2),
        ] {
            finite(name, v)?;
        }
        if lambda <= 0.0 {
            return Err(invalid("lambda", "relaxation rate must be positive"));
        }
        if gamma < 0.0 {
            return Err(invalid("gamma", "kinetic coefficient must be nonnegative"));
        }
        if dt <= 0.0 {
            return Err(invalid("dt", "time step must be positive"));
        }
        if t2 <= t1 {
            return Err(invalid(
                "t2",
                format!("interval end {t2} must exceed start {t1}"),
            ));
        }
        let ratio = (t2 - t1) / dt;
        let n_steps = ratio.round();
        if n_steps < 1.0 || (ratio - n_steps).abs() > GRID_SLACK * ratio.max(1.0) {
            return Err(invalid(
                "dt",
                format!("(t2 - t1) / dt = {ratio} is not a positive integer"),
            ));
        }
        Ok(Self {
            lambda,
            gamma,
            dt,
            t1,
            t2,
            n_steps: n_steps as usize,
        })
    }

    /// Default step `1e-3 / λ`.
    pub fn default_dt(lambda: f64) -> f64 {
        1e-3 / lambda
    }

    pub fn with_default_dt(lambda: f64, gamma: f64, t1: f64, t2: f64) -> Result<Self> {
        Self::new(lambda, gamma, Self::default_dt(lambda), t1, t2)
    }

    /// Same interval with the step halved.
    pub fn halved(&self) -> Result<Self> {
        Self::new(self.lambda, self.gamma, self.dt / 2.0, self.t1, self.t2)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn grid_len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t1 + k as f64 * self.dt
    }

    /// Variance `γ / λ` of the stationary density.
    pub fn stationary_variance(&self) -> f64 {
        self.gamma / self.lambda
    }

    fn require_noise(&self) -> Result<()> {
        if self.gamma > 0.0 {
            Ok(())
        } else {
            Err(invalid(
                "gamma",
                "must be positive for path weights and entropy production",
            ))
        }
    }

    fn check_grid(&self, len: usize) -> Result<()> {
        if len == self.grid_len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.grid_len(),
                actual: len,
            })
        }
    }
}

fn check_values(name: &'static str, values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(invalid(name, "needs at least two grid points"));
    }
    values.iter().try_for_each(|&v| finite(name, v).map(|_| ()))
}

/// Driving schedule `X̄(t_k)` sampled on the simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    values: Vec<f64>,
}

impl Protocol {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_values("protocol", &values)?;
        Ok(Self { values })
    }

    pub fn constant(params: &LangevinParams, value: f64) -> Result<Self> {
        Self::new(vec![value; params.grid_len()])
    }

    /// Resample knots `(t, X̄)` onto the grid by linear interpolation.
    ///
    /// Knots must be sorted by time. Two knots at the same time describe a
    /// jump; the grid point at the jump takes the later value. Outside the
    /// knot range the nearest end value is held.
    pub fn from_knots(params: &LangevinParams, knots: &[(f64, f64)]) -> Result<Self> {
        if knots.is_empty() {
            return Err(invalid("protocol", "at least one knot is required"));
        }
        for &(t, v) in knots {
            finite("protocol knot time", t)?;
            finite("protocol knot value", v)?;
        }
        if knots.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(invalid("protocol", "knot times must be nondecreasing"));
        }
        let eps = 1e-9 * params.dt;
        let values = (0..params.grid_len())
            .map(|k| {
                let t = params.time(k);
                match knots.iter().rposition(|&(tk, _)| tk <= t + eps) {
                    None => knots[0].1,
                    Some(j) if j + 1 == knots.len() || (t - knots[j].0).abs() <= eps => knots[j].1,
                    Some(j) => {
                        let (ta, va) = knots[j];
                        let (tb, vb) = knots[j + 1];
                        va + (vb - va) * (t - ta) / (tb - ta)
                    }
                }
            })
            .collect();
        Self::new(values)
    }

    /// Sudden switch from `before` to `after` at `t_switch`.
    pub fn quench(params: &LangevinParams, before: f64, after: f64, t_switch: f64) -> Result<Self> {
        Self::from_knots(
            params,
            &[
                (params.t1, before),
                (t_switch, before),
                (t_switch, after),
                (params.t2, after),
            ],
        )
    }

    /// Linear ramp from `from` to `to` over `[t_start, t_start + duration]`,
    /// held constant on either side.
    pub fn ramp(
        params: &LangevinParams,
        from: f64,
        to: f64,
        t_start: f64,
        duration: f64,
    ) -> Result<Self> {
        if duration <= 0.0 {
            return Err(invalid("duration", "ramp duration must be positive"));
        }
        Self::from_knots(params, &[(t_start, from), (t_start + duration, to)])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Time reversal `t -> -t`, realized as index reversal.
    pub fn reversed(&self) -> Self {
        Self {
            values: self.values.iter().rev().copied().collect(),
        }
    }
}

/// A discretized trajectory `X(t_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    values: Vec<f64>,
}

impl Path {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_values("path", &values)?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Initial value `ξ = X(t1)`.
    pub fn xi(&self) -> f64 {
        self.values[0]
    }

    /// Final value `η = X(t2)`.
    pub fn eta(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn reversed(&self) -> Self {
        Self {
            values: self.values.iter().rev().copied().collect(),
        }
    }
}

/// Unnormalized log path density. Only differences are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathWeight {
    pub log_weight: f64,
}

/// Euler–Maruyama integration driven by the supplied standard normals,
/// one per step.
pub fn simulate_path_with_noise(
    params: &LangevinParams,
    protocol: &Protocol,
    x0: f64,
    normals: &[f64],
) -> Result<Path> {
    params.check_grid(protocol.len())?;
    finite("x0", x0)?;
    if normals.len() != params.n_steps {
        return Err(Error::GridMismatch {
            expected: params.n_steps,
            actual: normals.len(),
        });
    }
    let drift = params.lambda * params.dt;
    let kick = (2.0 * params.gamma * params.dt).sqrt();
    let mut values = Vec::with_capacity(params.grid_len());
    let mut x = x0;
    values.push(x);
    for (&bar, &z) in protocol.values.iter().zip(normals) {
        x = x - drift * (x - bar) + kick * z;
        values.push(x);
    }
    Path::new(values)
}

/// Euler–Maruyama sample path starting at `x0`; deterministic given the
/// state of `rng`.
pub fn simulate_path<R: Rng + ?Sized>(
    params: &LangevinParams,
    protocol: &Protocol,
    x0: f64,
    rng: &mut R,
) -> Result<Path> {
    params.check_grid(protocol.len())?;
    let normals: Vec<f64> = (0..params.n_steps)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    simulate_path_with_noise(params, protocol, x0, &normals)
}

/// Draw from the stationary density at frozen driving `x_bar`:
/// Gaussian with mean `x_bar` and variance `γ / λ`.
pub fn stationary_sample<R: Rng + ?Sized>(
    params: &LangevinParams,
    x_bar: f64,
    rng: &mut R,
) -> Result<f64> {
    finite("x_bar", x_bar)?;
    let z: f64 = rng.sample(StandardNormal);
    Ok(x_bar + params.stationary_variance().sqrt() * z)
}

fn midpoint_steps<'a>(
    path: &'a Path,
    protocol: &'a Protocol,
) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    path.values
        .windows(2)
        .zip(protocol.values.windows(2))
        .map(|(x, b)| (x[1] - x[0], 0.5 * (x[0] + x[1]), 0.5 * (b[0] + b[1])))
}

/// Entropy production `ΔI = (λ/γ) Σ (X̄mid - Xmid) (X_{k+1} - X_k)`.
pub fn entropy_production(
    path: &Path,
    protocol: &Protocol,
    params: &LangevinParams,
) -> Result<InformationChange> {
    params.check_grid(path.len())?;
    params.check_grid(protocol.len())?;
    params.require_noise()?;
    let sum: f64 = midpoint_steps(path, protocol)
        .map(|(dx, x_mid, bar_mid)| (bar_mid - x_mid) * dx)
        .sum();
    InformationChange::new(params.lambda / params.gamma * sum)
}

/// Midpoint Onsager–Machlup log weight
/// `-(1/4γ) Σ [ΔX/dt + λ (Xmid - X̄mid)]^2 dt`, constant dropped.
pub fn om_log_weight(
    path: &Path,
    protocol: &Protocol,
    params: &LangevinParams,
) -> Result<PathWeight> {
    params.check_grid(path.len())?;
    params.check_grid(protocol.len())?;
    params.require_noise()?;
    let dt = params.dt;
    let action: f64 = midpoint_steps(path, protocol)
        .map(|(dx, x_mid, bar_mid)| {
            let r = dx / dt + params.lambda * (x_mid - bar_mid);
            r * r * dt
        })
        .sum();
    let log_weight = -action / (4.0 * params.gamma);
    finite("path weight", log_weight)?;
    Ok(PathWeight { log_weight })
}

/// `log P2(η) - log P1(ξ)` for the stationary boundary densities.
pub fn boundary_log_correction(
    xi: f64,
    eta: f64,
    protocol: &Protocol,
    params: &LangevinParams,
) -> Result<f64> {
    params.require_noise()?;
    finite("xi", xi)?;
    finite("eta", eta)?;
    let var = params.stationary_variance();
    let start = xi - protocol.first();
    let end = eta - protocol.last();
    Ok((start * start - end * end) / (2.0 * var))
}

/// `D = ΔI - [log P2(η) - log P1(ξ)]`.
pub fn d_statistic(
    path: &Path,
    protocol: &Protocol,
    params: &LangevinParams,
) -> Result<DecisionStatistic> {
    let delta_i = entropy_production(path, protocol, params)?;
    let boundary = boundary_log_correction(path.xi(), path.eta(), protocol, params)?;
    DecisionStatistic::new(delta_i.nats() - boundary, Provenance::Thermodynamic)
}

/// Per-path output of an experiment arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_index: u64,
    pub delta_i: f64,
    pub d: f64,
    pub xi: f64,
    pub eta: f64,
}

fn record_path(
    params: &LangevinParams,
    protocol: &Protocol,
    key: StreamKey,
    index: u64,
) -> Result<PathRecord> {
    let mut rng = key.stream(index);
    let x0 = stationary_sample(params, protocol.first(), &mut rng)?;
    let path = simulate_path(params, protocol, x0, &mut rng)?;
    let delta_i = entropy_production(&path, protocol, params)?.nats();
    let boundary = boundary_log_correction(path.xi(), path.eta(), protocol, params)?;
    Ok(PathRecord {
        path_index: index,
        delta_i,
        d: delta_i - boundary,
        xi: path.xi(),
        eta: path.eta(),
    })
}

/// Sample `n_paths` paths under `protocol`, each started from the stationary
/// density at `protocol.first()`. Path `i` uses stream `i` of `key`.
pub fn sample_arm(
    params: &LangevinParams,
    protocol: &Protocol,
    n_paths: usize,
    key: StreamKey,
) -> Result<Vec<PathRecord>> {
    params.check_grid(protocol.len())?;
    params.require_noise()?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| record_path(params, protocol, key, i))
        .collect()
}

/// Forward and reverse arms of a driven experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangevinExperiment {
    pub forward: Vec<PathRecord>,
    pub reverse: Vec<PathRecord>,
}

impl LangevinExperiment {
    pub fn forward_delta_i(&self) -> Vec<f64> {
        self.forward.iter().map(|r| r.delta_i).collect()
    }

    pub fn reverse_delta_i(&self) -> Vec<f64> {
        self.reverse.iter().map(|r| r.delta_i).collect()
    }

    pub fn forward_d(&self) -> Vec<f64> {
        self.forward.iter().map(|r| r.d).collect()
    }

    pub fn reverse_d(&self) -> Vec<f64> {
        self.reverse.iter().map(|r| r.d).collect()
    }

    /// `<e^{-D}>` over the forward arm.
    pub fn integral_relation(&self) -> MeanEstimate {
        let w: Vec<f64> = self.forward.iter().map(|r| (-r.d).exp()).collect();
        MeanEstimate::from_samples(&w).unwrap_or(MeanEstimate {
            mean: f64::NAN,
            std_error: f64::NAN,
            count: 0,
        })
    }
}

/// Forward arm: `ξ ~ P1`, driven by `protocol`. Reverse arm: `η ~ P2`,
/// driven by the reversed protocol. Deterministic for a given seed.
pub fn forward_reverse_experiment(
    params: &LangevinParams,
    protocol: &Protocol,
    n_paths: usize,
    master_seed: u64,
) -> Result<LangevinExperiment> {
    if n_paths == 0 {
        return Err(invalid("n_paths", "at least one path is required"));
    }
    let forward = sample_arm(
        params,
        protocol,
        n_paths,
        StreamKey::new(master_seed, ids::LANGEVIN_FORWARD),
    )?;
    let reverse = sample_arm(
        params,
        &protocol.reversed(),
        n_paths,
        StreamKey::new(master_seed, ids::LANGEVIN_REVERSE),
    )?;
    Ok(LangevinExperiment { forward, reverse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleRng;
    use rand::SeedableRng;

    fn rng(seed: u64) -> SampleRng {
        SampleRng::seed_from_u64(seed)
    }

    #[test]
    fn params_validation() {
        assert!(LangevinParams::new(1.0, 0.5, 0.1, 0.0, 1.0).is_ok());
        assert!(LangevinParams::new(0.0, 0.5, 0.1, 0.0, 1.0).is_err());
        assert!(LangevinParams::new(1.0, -0.5, 0.1, 0.0, 1.0).is_err());
        assert!(LangevinParams::new(1.0, 0.5, 0.3, 0.0, 1.0).is_err());
        assert!(LangevinParams::new(1.0, 0.5, 0.1, 1.0, 1.0).is_err());
        assert!(LangevinParams::new(f64::NAN, 0.5, 0.1, 0.0, 1.0).is_err());
        let p = LangevinParams::with_default_dt(2.0, 0.5, -1.0, 1.0).unwrap();
        assert_eq!(p.dt(), 5e-4);
        assert_eq!(p.n_steps(), 4000);
        assert_eq!(p.halved().unwrap().n_steps(), 8000);
    }

    #[test]
    fn quench_knots_switch_at_the_grid_point() {
        let p = LangevinParams::new(1.0, 0.5, 0.5, 0.0, 2.0).unwrap();
        let q = Protocol::quench(&p, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(q.values(), &[0.0, 0.0, 1.0, 1.0, 1.0]);
        let r = Protocol::ramp(&p, 0.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(r.values(), &[0.0, 0.0, 0.5, 1.0, 1.0]);
        assert!(Protocol::from_knots(&p, &[(1.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn noise_free_relaxation_is_exponential() {
        let p = LangevinParams::new(1.0, 0.0, 1e-4, 0.0, 1.0).unwrap();
        let bar = Protocol::constant(&p, 0.0).unwrap();
        let path = simulate_path(&p, &bar, 1.0, &mut rng(1)).unwrap();
        assert!((path.eta() - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn noise_free_fixed_point() {
        let p = LangevinParams::new(1.0, 0.0, 1e-2, 0.0, 1.0).unwrap();
        let bar = Protocol::constant(&p, 2.5).unwrap();
        let path = simulate_path(&p, &bar, 2.5, &mut rng(1)).unwrap();
        assert!(path.values().iter().all(|&x| x == 2.5));
    }

    #[test]
    fn simulate_rejects_grid_mismatch() {
        let p = LangevinParams::new(1.0, 0.5, 0.1, 0.0, 1.0).unwrap();
        let bar = Protocol::new(vec![0.0; 5]).unwrap();
        assert_eq!(
            simulate_path(&p, &bar, 0.0, &mut rng(1)),
            Err(Error::GridMismatch {
                expected: 11,
                actual: 5
            })
        );
        let path = Path::new(vec![0.0; 5]).unwrap();
        assert!(entropy_production(&path, &bar, &p).is_err());
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let p = LangevinParams::new(1.0, 0.5, 0.01, 0.0, 1.0).unwrap();
        let bar = Protocol::constant(&p, 0.0).unwrap();
        let a = simulate_path(&p, &bar, 0.3, &mut rng(9)).unwrap();
        let b = simulate_path(&p, &bar, 0.3, &mut rng(9)).unwrap();
        let c = simulate_path(&p, &bar, 0.3, &mut rng(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    /// Discrete-map oracle: `v_{k+1} = (1 - λdt)^2 v_k + 2γdt` has the fixed
    /// point `2γdt / (1 - (1 - λdt)^2)`, about 0.5025 for the values below.
    #[test]
    fn long_run_variance_matches_stationary_value() {
        let p = LangevinParams::new(1.0, 0.5, 1e-2, 0.0, 200.0).unwrap();
        let a = 1.0 - p.lambda() * p.dt();
        let fixed_point = 2.0 * p.gamma() * p.dt() / (1.0 - a * a);
        assert!((fixed_point - 0.502_512_562_8).abs() < 1e-9);

        let bar = Protocol::constant(&p, 0.0).unwrap();
        let key = StreamKey::new(11, "test/variance");
        let second_half: Vec<f64> = (0..16)
            .flat_map(|i| {
                let path = simulate_path(&p, &bar, 0.0, &mut key.stream(i)).unwrap();
                path.values()[p.grid_len() / 2..].to_vec()
            })
            .collect();
        let n = second_half.len() as f64;
        let mean = second_half.iter().sum::<f64>() / n;
        let var = second_half.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let target = p.stationary_variance();
        assert!((var - target).abs() / target < 0.10, "variance {var}");
    }

    #[test]
    fn stationary_sampling_moments_and_determinism() {
        let p = LangevinParams::new(1.0, 0.5, 0.1, 0.0, 1.0).unwrap();
        let mut r = rng(3);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| stationary_sample(&p, 2.0, &mut r).unwrap())
            .collect();
        let m = MeanEstimate::from_samples(&xs).unwrap();
        assert!((m.mean - 2.0).abs() < 3.0 * (0.5f64 / 1e5).sqrt());
        let var = xs.iter().map(|x| (x - m.mean).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0);
        assert!((var - 0.5).abs() / 0.5 < 0.05);

        let draw = |seed| {
            let mut r = rng(seed);
            (0..5)
                .map(|_| stationary_sample(&p, 0.0, &mut r).unwrap())
                .collect::<Vec<_>>()
        };
        let (b, c) = (draw(4), draw(4));
        assert_ne!(b, draw(5));
        assert_eq!(b, c);
    }

    #[test]
    fn entropy_production_of_a_resting_path_is_zero() {
        let p = LangevinParams::new(1.0, 0.5, 0.1, 0.0, 1.0).unwrap();
        let bar = Protocol::constant(&p, 0.7).unwrap();
        let path = Path::new(vec![0.7; p.grid_len()]).unwrap();
        assert_eq!(entropy_production(&path, &bar, &p).unwrap().nats(), 0.0);
        assert_eq!(d_statistic(&path, &bar, &p).unwrap().value(), 0.0);
    }

    /// Analytic oracle: `(λ/γ) ∫ -X dX = (λ/2γ)(x0^2 - X(T)^2)`; the midpoint
    /// sum telescopes to the same expression, so the tolerance covers only the
    /// residual `X(T)^2 ≈ e^{-20}`.
    #[test]
    fn relaxation_entropy_production_matches_integral() {
        let sim = LangevinParams::new(1.0, 0.0, 1e-3, 0.0, 10.0).unwrap();
        let bar = Protocol::constant(&sim, 0.0).unwrap();
        let path = simulate_path(&sim, &bar, 1.0, &mut rng(0)).unwrap();
        let eval = LangevinParams::new(1.0, 0.5, 1e-3, 0.0, 10.0).unwrap();
        let di = entropy_production(&path, &bar, &eval).unwrap().nats();
        assert!((di - 1.0).abs() < 1e-3, "ΔI = {di}");
    }

    #[test]
    fn entropy_production_requires_noise() {
        let p = LangevinParams::new(1.0, 0.0, 0.1, 0.0, 1.0).unwrap();
        let bar = Protocol::constant(&p, 0.0).unwrap();
        let path = Path::new(vec![0.0; p.grid_len()]).unwrap();
        assert!(matches!(
            entropy_production(&path, &bar, &p),
            Err(Error::InvalidParameter { name: "gamma", .. })
        ));
    }

    #[test]
    fn reversal_examples() {
        let p = Path::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.reversed().values(), &[3.0, 2.0, 1.0]);
        assert_eq!(p.reversed().reversed(), p);
        let c = Protocol::new(vec![4.0; 6]).unwrap();
        assert_eq!(c.reversed(), c);
    }

    #[test]
    fn drift_solution_has_zero_action() {
        // Per step solve ΔX = -λ (Xmid - X̄mid) dt for X_{k+1}.
        let p = LangevinParams::new(1.3, 0.5, 0.05, 0.0, 2.0).unwrap();
        let bar = Protocol::quench(&p, 0.0, 1.0, 1.0).unwrap();
        let h = p.lambda() * p.dt() / 2.0;
        let mut xs = vec![0.4];
        for b in bar.values().windows(2) {
            let x = *xs.last().unwrap();
            let bm = 0.5 * (b[0] + b[1]);
            xs.push((x * (1.0 - h) + 2.0 * h * bm) / (1.0 + h));
        }
        let path = Path::new(xs).unwrap();
        let w = om_log_weight(&path, &bar, &p).unwrap().log_weight;
        assert!(w.abs() < 1e-20, "{w}");
        let other = Path::new(path.values().iter().map(|x| x + 0.01).collect()).unwrap();
        assert!(om_log_weight(&other, &bar, &p).unwrap().log_weight < w);
    }

    /// Hand evaluation for X = {0, 0.5, 0.25}, X̄ ≡ 0, λ = 1, γ = 0.5, dt = 0.1.
    /// Forward steps (a = ΔX/dt, b = λ Xmid): (5, 0.25), (-2.5, 0.375);
    /// action 0.1 * (5.25^2 + 2.125^2) = 3.2078125, weight -1.60390625.
    /// Reversed steps: (2.5, 0.375), (-5, 0.25); action 3.0828125, weight -1.54140625.
    /// ΔI = 2 * [(-0.25)(0.5) + (-0.375)(-0.25)] = -0.0625 = fwd - rev.
    #[test]
    fn three_point_regression_path() {
        let p = LangevinParams::new(1.0, 0.5, 0.1, 0.0, 0.2).unwrap();
        let bar = Protocol::constant(&p, 0.0).unwrap();
        let path = Path::new(vec![0.0, 0.5, 0.25]).unwrap();
        let fwd = om_log_weight(&path, &bar, &p).unwrap().log_weight;
        let rev = om_log_weight(&path.reversed(), &bar.reversed(), &p)
            .unwrap()
            .log_weight;
        assert!((fwd - -1.603_906_25).abs() < 1e-12);
        assert!((rev - -1.541_406_25).abs() < 1e-12);
        let di = entropy_production(&path, &bar, &p).unwrap().nats();
        assert!((di - -0.0625).abs() < 1e-12);
        assert!((fwd - rev - di).abs() < 1e-12);
    }

    #[test]
    fn boundary_correction_examples() {
        let p = LangevinParams::new(1.0, 0.5, 0.1, 0.0, 1.0).unwrap();
        let bar = Protocol::quench(&p, 0.0, 2.0, 0.5).unwrap();
        assert_eq!(boundary_log_correction(0.0, 2.0, &bar, &p).unwrap(), 0.0);
        assert_eq!(boundary_log_correction(0.0, 3.0, &bar, &p).unwrap(), -1.0);
        assert!(boundary_log_correction(0.3, 2.3, &bar, &p).unwrap().abs() < 1e-14);
    }

    #[test]
    fn experiment_is_deterministic_and_arms_differ() {
        let p = LangevinParams::new(1.0, 0.5, 0.01, 0.0, 1.0).unwrap();
        let bar = Protocol::quench(&p, 0.0, 1.0, 0.5).unwrap();
        let a = forward_reverse_experiment(&p, &bar, 20, 5).unwrap();
        let b = forward_reverse_experiment(&p, &bar, 20, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.forward.len(), 20);
        assert_ne!(a.forward_delta_i(), a.reverse_delta_i());
        assert!(forward_reverse_experiment(&p, &bar, 0, 5).is_err());
        // the reverse arm starts near the final protocol value
        let mean_start = a.reverse.iter().map(|r| r.xi).sum::<f64>() / a.reverse.len() as f64;
        assert!((mean_start - 1.0).abs() < 0.5);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let p = LangevinParams::new(1.0, 0.5, 0.01, 0.0, 1.0).unwrap();
        let bar = Protocol::quench(&p, 0.0, 1.0, 0.5).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| forward_reverse_experiment(&p, &bar, 64, 17).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
