//! Dispatch of a validated config to its experiment.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrow::{arrow_probability, TimeArrow};
use crate::classical::ensemble_experiment;
use crate::config::{ExperimentConfig, KindParams};
use crate::langevin::forward_reverse_experiment;
use crate::quantum::{fidelity_experiment, two_point_fidelity_experiment};
use crate::stats::MeanEstimate;
use crate::verify;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Module {
        context: &'static str,
        source: crate::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

fn ctx(context: &'static str) -> impl Fn(crate::Error) -> RunError {
    move |source| RunError::Module { context, source }
}

/// How a summary value was judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// `|value - reference| <= k * std_error`.
    StdErrors(f64),
    /// `|value - reference| <= tol`.
    Absolute(f64),
    /// `|value / reference - 1| <= tol`.
    Relative(f64),
}

/// One line of the summary block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerance: Option<Tolerance>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

impl Metric {
    pub fn value(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            std_error: None,
            reference: None,
            tolerance: None,
            passed: None,
            detail: None,
        }
    }

    pub fn estimate(name: impl Into<String>, est: MeanEstimate) -> Self {
        Self {
            std_error: Some(est.std_error),
            ..Self::value(name, est.mean)
        }
    }

    /// Attach a reference value and judge against it.
    pub fn against(mut self, reference: f64, tolerance: Tolerance) -> Self {
        let gap = (self.value - reference).abs();
        let passed = match tolerance {
            Tolerance::StdErrors(k) => gap <= k * self.std_error.unwrap_or(0.0),
            Tolerance::Absolute(t) => gap <= t,
            Tolerance::Relative(t) => (self.value / reference - 1.0).abs() <= t,
        };
        self.reference = Some(reference);
        self.tolerance = Some(tolerance);
        self.passed = Some(passed);
        self
    }
}

/// Everything produced by one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<Metric>,
    pub config: ExperimentConfig,
    pub runtime_seconds: f64,
}

impl ResultRecord {
    /// No judged metric failed.
    pub fn passed(&self) -> bool {
        self.summary.iter().all(|m| m.passed != Some(false))
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.summary.iter().find(|m| m.name == name)
    }
}

fn estimate(xs: &[f64]) -> MeanEstimate {
    MeanEstimate::from_samples(xs).expect("experiments produce samples")
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Run on the global worker pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultRecord, RunError> {
    let start = Instant::now();
    let (columns, rows, summary) = match &config.params {
        KindParams::Langevin(c) => run_langevin(config, c)?,
        KindParams::Classical(c) => run_classical(config, c)?,
        KindParams::Quantum(c) => run_quantum(config, c)?,
        KindParams::FidelityCurve(c) => run_fidelity_curve(config, c)?,
        KindParams::Verify(c) => run_verify(config, c),
    };
    Ok(ResultRecord {
        experiment: config.kind.as_str().to_string(),
        columns,
        rows,
        summary,
        config: config.clone(),
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run on a dedicated pool of `threads` workers. Results do not depend on
/// the count.
pub fn run_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ResultRecord, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::ThreadPool(e.to_string()))?;
    pool.install(|| run_experiment(config))
}

type Table = (Vec<String>, Vec<Vec<f64>>, Vec<Metric>);

fn run_langevin(
    config: &ExperimentConfig,
    c: &crate::config::LangevinConfig,
) -> Result<Table, RunError> {
    let (params, protocol) = c.build().map_err(ctx("langevin setup"))?;
    let exp = forward_reverse_experiment(&params, &protocol, config.n_samples, config.seed)
        .map_err(ctx("langevin experiment"))?;
    let arm_rows = |sign: f64, records: &[crate::langevin::PathRecord]| {
        records
            .iter()
            .map(move |r| vec![sign, r.path_index as f64, r.delta_i, r.d, r.xi, r.eta])
            .collect::<Vec<_>>()
    };
    let mut rows = arm_rows(1.0, &exp.forward);
    rows.extend(arm_rows(-1.0, &exp.reverse));
    let fidelity: Vec<f64> = exp
        .forward
        .iter()
        .map(|r| arrow_probability(r.d, TimeArrow::Plus))
        .collect::<crate::Result<_>>()
        .map_err(ctx("langevin fidelity"))?;
    let summary = vec![
        Metric::estimate("forward_delta_i_mean", estimate(&exp.forward_delta_i())),
        Metric::estimate("forward_d_mean", estimate(&exp.forward_d())),
        Metric::estimate("reverse_delta_i_mean", estimate(&exp.reverse_delta_i())),
        Metric::estimate("integral_relation", exp.integral_relation())
            .against(1.0, Tolerance::StdErrors(c.tolerance)),
        Metric::estimate("fidelity", estimate(&fidelity)),
    ];
    Ok((
        columns(&["arm", "path_index", "delta_i", "d", "xi", "eta"]),
        rows,
        summary,
    ))
}

fn run_classical(
    config: &ExperimentConfig,
    c: &crate::config::ClassicalConfig,
) -> Result<Table, RunError> {
    let (rho1, rho2) = c.distributions().map_err(ctx("classical setup"))?;
    let exp = ensemble_experiment(&rho1, &rho2, c.n, config.n_samples, config.seed)
        .map_err(ctx("classical experiment"))?;
    let rows = exp
        .records
        .iter()
        .map(|r| vec![r.sample_index as f64, r.d_joint, r.d_marginal])
        .collect();
    let mut summary = vec![
        Metric::value("delta_i", exp.delta_i),
        Metric::estimate("d_joint_mean", exp.d_joint_mean())
            .against(exp.mean_d_joint, Tolerance::StdErrors(c.tolerance)),
        Metric::estimate("d_marginal_mean", exp.d_marginal_mean())
            .against(exp.delta_i, Tolerance::Relative(0.05)),
        Metric::value("joint_ratio", exp.joint_ratio()),
        Metric::value("marginal_ratio", exp.marginal_ratio()),
    ];
    if let Some((di, d)) = exp.leading_order {
        summary.push(Metric::value("leading_order_delta_i", di));
        summary.push(Metric::value("leading_order_d", d));
    }
    Ok((
        columns(&["sample_index", "d_joint", "d_marginal"]),
        rows,
        summary,
    ))
}

fn run_quantum(
    config: &ExperimentConfig,
    c: &crate::config::QuantumConfig,
) -> Result<Table, RunError> {
    let spectrum = c.spectrum().map_err(ctx("quantum setup"))?;
    let exp = fidelity_experiment(&spectrum, c.n, c.delta, config.n_samples, config.seed)
        .map_err(ctx("quantum experiment"))?;
    let rows = exp
        .trials
        .iter()
        .map(|t| {
            let s = t.arrow.sign().unwrap_or(0.0);
            vec![t.trial as f64, s, f64::from(t.outcome), t.score]
        })
        .collect();
    let f = exp.f_empirical;
    let est = MeanEstimate {
        mean: f.mean,
        std_error: f.std_error,
        count: f.sample_count,
    };
    let summary = vec![
        Metric::value("delta_i", exp.delta_i),
        Metric::value("tr_xi", exp.tr_xi),
        Metric::value("tr_eta", exp.tr_eta),
        Metric::value("f_closed", exp.f_closed),
        Metric::estimate("f_empirical", est)
            .against(exp.f_expected, Tolerance::StdErrors(c.tolerance)),
    ];
    Ok((
        columns(&["trial", "arrow", "outcome", "score"]),
        rows,
        summary,
    ))
}

fn run_fidelity_curve(
    config: &ExperimentConfig,
    c: &crate::config::FidelityCurveConfig,
) -> Result<Table, RunError> {
    let mut rows = Vec::with_capacity(c.delta_i.len());
    let mut summary = Vec::with_capacity(c.delta_i.len());
    for (point, &x) in c.delta_i.iter().enumerate() {
        let exp = two_point_fidelity_experiment(x, config.n_samples, config.seed, point as u64)
            .map_err(ctx("fidelity curve"))?;
        let f = exp.f_empirical;
        rows.push(vec![x, exp.f_closed, f.mean, f.std_error]);
        let est = MeanEstimate {
            mean: f.mean,
            std_error: f.std_error,
            count: f.sample_count,
        };
        summary.push(
            Metric::estimate(format!("f_empirical[{x}]"), est)
                .against(exp.f_closed, Tolerance::StdErrors(c.tolerance)),
        );
    }
    Ok((
        columns(&["delta_i", "f_closed", "f_empirical", "stderr"]),
        rows,
        summary,
    ))
}

fn run_verify(config: &ExperimentConfig, c: &crate::config::VerifyConfig) -> Table {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &id in &c.criteria {
        if let Some(report) = verify::run_criterion(id, config.seed) {
            rows.push(vec![f64::from(id), f64::from(u8::from(report.passed))]);
            summary.push(Metric {
                passed: Some(report.passed),
                detail: Some(report.detail.clone()),
                ..Metric::value(
                    format!("criterion {id}: {}", report.name),
                    f64::from(u8::from(report.passed)),
                )
            });
        }
    }
    (columns(&["criterion", "passed"]), rows, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, ExperimentKind};

    fn small(kind: ExperimentKind, n: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::default_for(kind);
        c.n_samples = n;
        c.seed = 11;
        c
    }

    #[test]
    fn summaries_are_recomputable_from_rows() {
        let classical = run_experiment(&small(ExperimentKind::Classical, 300)).unwrap();
        let joint = estimate(&classical.column("d_joint").unwrap());
        let m = classical.metric("d_joint_mean").unwrap();
        assert_eq!((m.value, m.std_error), (joint.mean, Some(joint.std_error)));

        let quantum = run_experiment(&small(ExperimentKind::Quantum, 500)).unwrap();
        let score = estimate(&quantum.column("score").unwrap());
        assert_eq!(quantum.metric("f_empirical").unwrap().value, score.mean);
    }

    #[test]
    fn langevin_rows_hold_both_arms() {
        let text = "kind = \"langevin\"\nn_samples = 20\n[langevin]\nlambda = 1.0\ngamma = 0.5\n\
                    dt = 0.01\nprotocol = [[0.0, 0.0], [1.0, 1.0]]\n";
        let r = run_experiment(&parse_config(text).unwrap()).unwrap();
        assert_eq!(r.rows.len(), 40);
        let arms = r.column("arm").unwrap();
        assert_eq!(arms.iter().filter(|&&a| a == 1.0).count(), 20);
        let fwd: Vec<f64> = r
            .rows
            .iter()
            .filter(|row| row[0] == 1.0)
            .map(|row| row[2])
            .collect();
        assert_eq!(
            r.metric("forward_delta_i_mean").unwrap().value,
            estimate(&fwd).mean
        );
    }

    #[test]
    fn fidelity_curve_schema() {
        let r = run_experiment(&small(ExperimentKind::FidelityCurve, 2_000)).unwrap();
        assert_eq!(r.columns, ["delta_i", "f_closed", "f_empirical", "stderr"]);
        assert_eq!(r.rows.len(), 13);
        assert_eq!(r.rows[0][1], 0.5);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let c = small(ExperimentKind::Classical, 200);
        let mut a = run_with_threads(&c, 1).unwrap();
        let mut b = run_with_threads(&c, 3).unwrap();
        a.runtime_seconds = 0.0;
        b.runtime_seconds = 0.0;
        assert_eq!(a, b);
    }

    #[test]
    fn verify_reports_each_requested_criterion() {
        let mut c = small(ExperimentKind::Verify, 1);
        c.params = KindParams::Verify(crate::config::VerifyConfig {
            criteria: vec![2, 7],
        });
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.column("criterion").unwrap(), [2.0, 7.0]);
        assert!(r.passed());
    }

    #[test]
    fn tolerance_judgement() {
        let m = Metric::estimate(
            "x",
            MeanEstimate {
                mean: 1.02,
                std_error: 0.01,
                count: 10,
            },
        );
        assert_eq!(
            m.clone().against(1.0, Tolerance::StdErrors(3.0)).passed,
            Some(true)
        );
        assert_eq!(
            m.clone().against(1.0, Tolerance::StdErrors(1.0)).passed,
            Some(false)
        );
        assert_eq!(
            m.clone().against(1.0, Tolerance::Absolute(0.01)).passed,
            Some(false)
        );
        assert_eq!(m.against(1.0, Tolerance::Relative(0.05)).passed, Some(true));
    }
}
