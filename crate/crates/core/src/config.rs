//! Experiment configuration files.
//!
//! A config is a TOML document with top-level experiment settings and one
//! section named after the experiment kind:
//!
//! ```toml
//! kind = "langevin"
//! seed = 42
//! n_samples = 10000
//! output = "quench.csv"
//!
//! [langevin]
//! lambda = 1.0
//! gamma = 0.5
//! protocol = [[0.0, 0.0], [2.5, 0.0], [2.5, 1.0], [5.0, 1.0]]
//! ```
//!
//! Unknown keys are rejected. Omitted optional keys are filled in and the
//! resolved config is echoed into every output file.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::SimplexDistribution;
use crate::langevin::{LangevinParams, Protocol};
use crate::quantum::{Complex64, DensityMatrix, Spectrum, MAX_DIM, MIN_DIM};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Default pass/fail tolerance, in standard errors.
pub const DEFAULT_TOLERANCE_SE: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Langevin,
    Classical,
    Quantum,
    FidelityCurve,
    Verify,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Langevin => "langevin",
            Self::Classical => "classical",
            Self::Quantum => "quantum",
            Self::FidelityCurve => "fidelity-curve",
            Self::Verify => "verify",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "langevin" => Ok(Self::Langevin),
            "classical" => Ok(Self::Classical),
            "quantum" => Ok(Self::Quantum),
            "fidelity-curve" => Ok(Self::FidelityCurve),
            "verify" => Ok(Self::Verify),
            other => Err(bad("kind", format!("unknown experiment kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(bad(
                "format",
                format!("expected csv or json, got {other:?}"),
            )),
        }
    }
}

// Raw document shapes. Everything optional that has a default.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: ExperimentKind,
    seed: Option<u64>,
    n_samples: Option<usize>,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
    langevin: Option<RawLangevin>,
    classical: Option<RawClassical>,
    quantum: Option<RawQuantum>,
    fidelity_curve: Option<RawFidelityCurve>,
    verify: Option<RawVerify>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLangevin {
    lambda: f64,
    gamma: f64,
    dt: Option<f64>,
    t1: Option<f64>,
    t2: Option<f64>,
    protocol: Option<Vec<[f64; 2]>>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassical {
    rho1: Vec<f64>,
    rho2: Option<Vec<f64>>,
    n: u64,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantum {
    d: Option<usize>,
    n: u32,
    delta: Option<f64>,
    spectrum: Option<Vec<f64>>,
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFidelityCurve {
    delta_i: Option<Vec<f64>>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    criteria: Option<Vec<u8>>,
}

// Resolved configs.

/// Driven Langevin experiment. The protocol is a list of `(t, value)` knots,
/// linearly interpolated on the grid; a repeated time marks a jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    pub lambda: f64,
    pub gamma: f64,
    pub dt: f64,
    pub t1: f64,
    pub t2: f64,
    pub protocol: Vec<[f64; 2]>,
    pub tolerance: f64,
}

impl LangevinConfig {
    pub fn params(&self) -> crate::Result<LangevinParams> {
        LangevinParams::new(self.lambda, self.gamma, self.dt, self.t1, self.t2)
    }

    pub fn build(&self) -> crate::Result<(LangevinParams, Protocol)> {
        let params = self.params()?;
        let knots: Vec<(f64, f64)> = self.protocol.iter().map(|k| (k[0], k[1])).collect();
        let protocol = Protocol::from_knots(&params, &knots)?;
        Ok((params, protocol))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConfig {
    pub rho1: Vec<f64>,
    pub rho2: Vec<f64>,
    pub n: u64,
    pub tolerance: f64,
}

impl ClassicalConfig {
    pub fn distributions(&self) -> crate::Result<(SimplexDistribution, SimplexDistribution)> {
        Ok((
            SimplexDistribution::new(self.rho1.clone())?,
            SimplexDistribution::new(self.rho2.clone())?,
        ))
    }
}

/// Typical-subspace experiment on `ρ1^{⊗n}`. `spectrum` always holds the
/// eigenvalues actually used, also when the state was given as a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumConfig {
    pub d: usize,
    pub n: u32,
    pub delta: f64,
    pub spectrum: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    pub tolerance: f64,
}

impl QuantumConfig {
    pub fn spectrum(&self) -> crate::Result<Spectrum> {
        Spectrum::new(self.spectrum.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurveConfig {
    pub delta_i: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub criteria: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindParams {
    Langevin(LangevinConfig),
    Classical(ClassicalConfig),
    Quantum(QuantumConfig),
    FidelityCurve(FidelityCurveConfig),
    Verify(VerifyConfig),
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub n_samples: usize,
    pub output: PathBuf,
    pub format: OutputFormat,
    pub params: KindParams,
}

impl ExperimentConfig {
    /// The built-in experiment of a kind, as if given an empty section.
    pub fn default_for(kind: ExperimentKind) -> Self {
        parse_config(&format!("kind = \"{}\"", kind.as_str())).expect("built-in defaults are valid")
    }

    /// Replace the output path and keep the format in step with its
    /// extension when the format was not given explicitly.
    pub fn set_output(&mut self, path: PathBuf) {
        self.output = path;
    }

    pub fn set_format(&mut self, format: OutputFormat) {
        if self.output.extension().and_then(|e| e.to_str()) == Some(self.format.extension()) {
            self.output.set_extension(format.extension());
        }
        self.format = format;
    }

    pub fn set_samples(&mut self, n: usize) -> Result<(), ConfigError> {
        if n == 0 {
            return Err(bad("n_samples", "must be positive"));
        }
        self.n_samples = n;
        Ok(())
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    resolve(raw)
}

fn check_tolerance(key: &str, value: Option<f64>) -> Result<f64, ConfigError> {
    let t = value.unwrap_or(DEFAULT_TOLERANCE_SE);
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(bad(key, "tolerance must be positive"))
    }
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let kind = raw.kind;
    let sections = [
        ("langevin", raw.langevin.is_some(), ExperimentKind::Langevin),
        (
            "classical",
            raw.classical.is_some(),
            ExperimentKind::Classical,
        ),
        ("quantum", raw.quantum.is_some(), ExperimentKind::Quantum),
        (
            "fidelity_curve",
            raw.fidelity_curve.is_some(),
            ExperimentKind::FidelityCurve,
        ),
        ("verify", raw.verify.is_some(), ExperimentKind::Verify),
    ];
    for (name, present, owner) in sections {
        if present && owner != kind {
            return Err(bad(
                name,
                format!("section does not apply to kind {:?}", kind.as_str()),
            ));
        }
    }
    let n_samples = raw.n_samples.unwrap_or(DEFAULT_SAMPLES);
    if n_samples == 0 {
        return Err(bad("n_samples", "must be positive"));
    }
    let format = raw.format.unwrap_or(OutputFormat::Csv);
    let output = raw
        .output
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", kind.as_str(), format.extension())));
    let params = match kind {
        ExperimentKind::Langevin => KindParams::Langevin(resolve_langevin(raw.langevin)?),
        ExperimentKind::Classical => KindParams::Classical(resolve_classical(raw.classical)?),
        ExperimentKind::Quantum => KindParams::Quantum(resolve_quantum(raw.quantum)?),
        ExperimentKind::FidelityCurve => {
            KindParams::FidelityCurve(resolve_fidelity_curve(raw.fidelity_curve)?)
        }
        ExperimentKind::Verify => KindParams::Verify(resolve_verify(raw.verify)?),
    };
    Ok(ExperimentConfig {
        kind,
        seed: raw.seed.unwrap_or(match kind {
            // verify reproduces the acceptance run unless told otherwise
            ExperimentKind::Verify => crate::verify::DEFAULT_VERIFY_SEED,
            _ => DEFAULT_SEED,
        }),
        n_samples,
        output,
        format,
        params,
    })
}

fn resolve_langevin(raw: Option<RawLangevin>) -> Result<LangevinConfig, ConfigError> {
    // Built-in: unit quench at mid-time over [0, 5].
    let raw = raw.unwrap_or(RawLangevin {
        lambda: 1.0,
        gamma: 0.5,
        dt: None,
        t1: None,
        t2: None,
        protocol: None,
        tolerance: None,
    });
    if !(raw.lambda.is_finite() && raw.lambda > 0.0) {
        return Err(bad("langevin.lambda", "must be positive"));
    }
    if !(raw.gamma.is_finite() && raw.gamma > 0.0) {
        return Err(bad("langevin.gamma", "must be positive"));
    }
    let dt = raw
        .dt
        .unwrap_or_else(|| LangevinParams::default_dt(raw.lambda));
    if !(dt.is_finite() && dt > 0.0) {
        return Err(bad("langevin.dt", "must be positive"));
    }
    let (t1, t2, protocol) = match raw.protocol {
        Some(knots) => {
            if knots.is_empty() {
                return Err(bad("langevin.protocol", "needs at least one knot"));
            }
            if knots.iter().flatten().any(|v| !v.is_finite()) {
                return Err(bad("langevin.protocol", "knots must be finite"));
            }
            if knots.windows(2).any(|w| w[1][0] < w[0][0]) {
                return Err(bad("langevin.protocol", "knot times must be nondecreasing"));
            }
            let t1 = raw.t1.unwrap_or(knots[0][0]);
            let t2 = raw.t2.unwrap_or(knots[knots.len() - 1][0]);
            (t1, t2, knots)
        }
        None => {
            let t1 = raw.t1.unwrap_or(0.0);
            let t2 = raw.t2.unwrap_or(t1 + 5.0);
            let mid = 0.5 * (t1 + t2);
            (t1, t2, vec![[t1, 0.0], [mid, 0.0], [mid, 1.0], [t2, 1.0]])
        }
    };
    let config = LangevinConfig {
        lambda: raw.lambda,
        gamma: raw.gamma,
        dt,
        t1,
        t2,
        protocol,
        tolerance: check_tolerance("langevin.tolerance", raw.tolerance)?,
    };
    config.build().map_err(|e| bad("langevin", e.to_string()))?;
    Ok(config)
}

fn resolve_classical(raw: Option<RawClassical>) -> Result<ClassicalConfig, ConfigError> {
    let raw = raw.unwrap_or(RawClassical {
        rho1: vec![0.55, 0.45],
        rho2: None,
        n: 10_000,
        tolerance: None,
    });
    let d = raw.rho1.len();
    SimplexDistribution::new(raw.rho1.clone()).map_err(|e| bad("classical.rho1", e.to_string()))?;
    let rho2 = match raw.rho2 {
        Some(r) => {
            if r.len() != d {
                return Err(bad(
                    "classical.rho2",
                    format!("length {} differs from rho1 ({d})", r.len()),
                ));
            }
            SimplexDistribution::new(r.clone())
                .map_err(|e| bad("classical.rho2", e.to_string()))?;
            r
        }
        None => vec![1.0 / d as f64; d],
    };
    if raw.n == 0 {
        return Err(bad("classical.n", "must be positive"));
    }
    Ok(ClassicalConfig {
        rho1: raw.rho1,
        rho2,
        n: raw.n,
        tolerance: check_tolerance("classical.tolerance", raw.tolerance)?,
    })
}

fn resolve_quantum(raw: Option<RawQuantum>) -> Result<QuantumConfig, ConfigError> {
    let raw = raw.unwrap_or(RawQuantum {
        d: None,
        n: 3,
        delta: None,
        spectrum: Some(vec![1.0, 0.0]),
        matrix: None,
        tolerance: None,
    });
    if let Some(d) = raw.d {
        if !(MIN_DIM..=MAX_DIM).contains(&d) {
            return Err(bad(
                "quantum.d",
                format!("must lie in {MIN_DIM}..={MAX_DIM}, got {d}"),
            ));
        }
    }
    if raw.n == 0 {
        return Err(bad("quantum.n", "must be positive"));
    }
    let delta = raw.delta.unwrap_or(0.0);
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(bad("quantum.delta", "must be finite and nonnegative"));
    }
    let spectrum = match (&raw.spectrum, &raw.matrix) {
        (Some(_), Some(_)) => {
            return Err(bad(
                "quantum.matrix",
                "give either spectrum or matrix, not both",
            ));
        }
        (None, None) => return Err(bad("quantum.spectrum", "spectrum or matrix is required")),
        (Some(p), None) => {
            Spectrum::new(p.clone()).map_err(|e| bad("quantum.spectrum", e.to_string()))?
        }
        (None, Some(m)) => {
            let rows: Vec<Vec<Complex64>> = m
                .iter()
                .map(|r| r.iter().map(|z| Complex64::new(z[0], z[1])).collect())
                .collect();
            DensityMatrix::from_rows(&rows)
                .and_then(|rho| rho.spectrum())
                .map_err(|e| bad("quantum.matrix", e.to_string()))?
        }
    };
    let d = spectrum.dim();
    if let Some(given) = raw.d {
        if given != d {
            return Err(bad(
                "quantum.d",
                format!("{given} does not match the state dimension {d}"),
            ));
        }
    }
    Ok(QuantumConfig {
        d,
        n: raw.n,
        delta,
        spectrum: spectrum.eigenvalues().to_vec(),
        matrix: raw.matrix,
        tolerance: check_tolerance("quantum.tolerance", raw.tolerance)?,
    })
}

fn resolve_fidelity_curve(
    raw: Option<RawFidelityCurve>,
) -> Result<FidelityCurveConfig, ConfigError> {
    let (delta_i, tolerance) = match raw {
        Some(r) => (r.delta_i, r.tolerance),
        None => (None, None),
    };
    let delta_i = delta_i.unwrap_or_else(|| (0..=12).map(|k| 0.5 * f64::from(k)).collect());
    if delta_i.is_empty() {
        return Err(bad("fidelity_curve.delta_i", "needs at least one value"));
    }
    if delta_i.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(bad(
            "fidelity_curve.delta_i",
            "values must be finite and nonnegative",
        ));
    }
    Ok(FidelityCurveConfig {
        delta_i,
        tolerance: check_tolerance("fidelity_curve.tolerance", tolerance)?,
    })
}

fn resolve_verify(raw: Option<RawVerify>) -> Result<VerifyConfig, ConfigError> {
    let criteria = raw
        .and_then(|r| r.criteria)
        .unwrap_or_else(|| crate::verify::ALL_CRITERIA.to_vec());
    if let Some(c) = criteria
        .iter()
        .find(|c| !crate::verify::ALL_CRITERIA.contains(c))
    {
        return Err(bad("verify.criteria", format!("no criterion {c}")));
    }
    Ok(VerifyConfig { criteria })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "langevin"
seed = 7
n_samples = 100

[langevin]
lambda = 2.0
gamma = 0.5
protocol = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [2.0, 1.0]]
"#;

    #[test]
    fn minimal_langevin_config_gets_default_dt() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.kind, ExperimentKind::Langevin);
        assert_eq!((c.seed, c.n_samples), (7, 100));
        assert_eq!(c.format, OutputFormat::Csv);
        let KindParams::Langevin(l) = &c.params else {
            panic!()
        };
        assert_eq!(l.dt, 5e-4);
        assert_eq!((l.t1, l.t2), (0.0, 2.0));
        let (params, protocol) = l.build().unwrap();
        assert_eq!(protocol.len(), params.grid_len());
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("lambda", "lamda");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
        let ConfigError::Parse { line, .. } = err else {
            panic!("{err:?}")
        };
        assert_eq!(line, 7);
    }

    #[test]
    fn quantum_dimension_is_range_checked() {
        let text = "kind = \"quantum\"\n[quantum]\nd = 9\nn = 2\nspectrum = [1.0, 0.0]\n";
        let err = parse_config(text).unwrap_err();
        assert!(
            matches!(&err, ConfigError::Invalid { key, .. } if key == "quantum.d"),
            "{err}"
        );
    }

    #[test]
    fn quantum_matrix_is_reduced_to_its_spectrum() {
        let text = r#"
kind = "quantum"
[quantum]
n = 4
delta = 0.1
matrix = [[[0.5, 0.0], [0.0, -0.2]], [[0.0, 0.2], [0.5, 0.0]]]
"#;
        let c = parse_config(text).unwrap();
        let KindParams::Quantum(q) = &c.params else {
            panic!()
        };
        assert_eq!(q.d, 2);
        assert!((q.spectrum[0] - 0.7).abs() < 1e-12);
        assert!(q.matrix.is_some());
    }

    #[test]
    fn defaults_fill_every_kind() {
        for kind in [
            ExperimentKind::Langevin,
            ExperimentKind::Classical,
            ExperimentKind::Quantum,
            ExperimentKind::FidelityCurve,
            ExperimentKind::Verify,
        ] {
            let c = ExperimentConfig::default_for(kind);
            assert_eq!(c.kind, kind);
            assert_eq!(c.output, PathBuf::from(format!("{}.csv", kind.as_str())));
        }
        let KindParams::FidelityCurve(f) =
            ExperimentConfig::default_for(ExperimentKind::FidelityCurve).params
        else {
            panic!()
        };
        assert_eq!(f.delta_i.len(), 13);
        assert_eq!(f.delta_i[12], 6.0);
    }

    #[test]
    fn foreign_sections_and_bad_values_are_rejected() {
        let text = format!("{MINIMAL}\n[classical]\nrho1 = [0.5, 0.5]\nn = 3\n");
        assert!(
            matches!(parse_config(&text), Err(ConfigError::Invalid { key, .. }) if key == "classical")
        );
        let text = MINIMAL.replace("gamma = 0.5", "gamma = -1.0");
        assert!(
            matches!(parse_config(&text), Err(ConfigError::Invalid { key, .. }) if key == "langevin.gamma")
        );
        let text = "kind = \"classical\"\n[classical]\nrho1 = [0.5, 0.6]\nn = 10\n";
        assert!(
            matches!(parse_config(text), Err(ConfigError::Invalid { key, .. }) if key == "classical.rho1")
        );
        assert!(matches!(
            parse_config("kind = \"bogus\""),
            Err(ConfigError::Parse { .. })
        ));
        assert!(matches!(
            parse_config("kind = \"verify\"\nn_samples = 0"),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        let c = parse_config(MINIMAL).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn format_switch_follows_default_extension() {
        let mut c = ExperimentConfig::default_for(ExperimentKind::Classical);
        c.set_format(OutputFormat::Json);
        assert_eq!(c.output, PathBuf::from("classical.json"));
    }
}
