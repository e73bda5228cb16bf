//! Acceptance criteria, one test each. Every test prints a
//! `criterion N [PASS|FAIL] ...` line before asserting.

use intrinsic_arrow::verify::{self, CriterionReport, DEFAULT_VERIFY_SEED};

fn check(report: CriterionReport, budget_seconds: Option<f64>) {
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
    if let Some(budget) = budget_seconds {
        assert!(
            report.seconds < budget,
            "criterion {} took {:.1} s (budget {budget} s)",
            report.id,
            report.seconds
        );
    }
}

#[test]
fn criterion_1_quantum_fidelity_law() {
    check(
        verify::quantum_fidelity_law(DEFAULT_VERIFY_SEED),
        Some(10.0),
    );
}

#[test]
fn criterion_2_flat_regime_exactness() {
    check(verify::flat_regime_exactness(), Some(5.0));
}

#[test]
fn criterion_3_discrete_fluctuation_identity() {
    check(
        verify::discrete_fluctuation_identity(DEFAULT_VERIFY_SEED),
        Some(5.0),
    );
}

#[test]
fn criterion_4_integral_relation() {
    check(verify::integral_relation(DEFAULT_VERIFY_SEED), Some(60.0));
}

#[test]
fn criterion_5_histogram_fluctuation_theorem() {
    check(
        verify::histogram_fluctuation_theorem(DEFAULT_VERIFY_SEED),
        None,
    );
}

#[test]
fn criterion_6_factor_two() {
    check(verify::factor_two(DEFAULT_VERIFY_SEED), Some(30.0));
}

#[test]
fn criterion_7_closed_forms() {
    check(verify::closed_forms(), None);
}

#[test]
fn criterion_8_arrow_core_properties() {
    check(
        verify::arrow_core_properties(DEFAULT_VERIFY_SEED),
        Some(5.0),
    );
}

#[test]
fn criterion_9_dt_convergence() {
    check(verify::dt_convergence(DEFAULT_VERIFY_SEED), None);
}
