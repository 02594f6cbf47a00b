//! Acceptance gate: one test per release criterion, each printing a single
//! `acceptance N: PASS/FAIL` line (visible under `--nocapture`).
//!
//! Criteria 1–8 are certification-suite entries replayed at the pinned
//! fixtures and tolerances with their runtime ceilings enforced; criteria
//! 9–10 run the full benchmark experiment twice (once against `w8a` when
//! the `SHUFFLEGRAD_W8A` environment variable points at it, otherwise
//! against the pinned synthetic fallback) and check the qualitative
//! ordering plus byte-identical reproducibility; criterion 11 audits the
//! analytical assumptions on every objective family.

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use shufflegrad::certify::{run_certification, CertConfig, CertEntry, CertReport};
use shufflegrad::dataset::generate_separable_blobs;
use shufflegrad::harness::{run_experiment, write_csv, DataSource, ExperimentConfig};
use shufflegrad::objective::{LogisticL2, QuadraticSum, SigmoidSquared};
use shufflegrad::optimizers::Method;

/// Synthetic fallback for the benchmark experiment when w8a is absent:
/// widely separated clusters keep every variance-reduced method stable
/// across the step-size grid at this scale.
const FALLBACK_MARGIN: f64 = 16.0;
const FALLBACK_DATA_SEED: u64 = 1;

fn report() -> &'static CertReport {
    static REPORT: OnceLock<CertReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        run_certification(&CertConfig {
            mc_seeds: 200,
            base_seed: 42,
        })
        .expect("certification suite runs")
    })
}

fn entry(id: &str) -> &'static CertEntry {
    report()
        .entry(id)
        .unwrap_or_else(|| panic!("certification entry {id} exists"))
}

fn gate(criterion: usize, entry: &CertEntry, ceiling_ms: Option<u128>) {
    let within = ceiling_ms.is_none_or(|limit| entry.runtime_ms < limit);
    let verdict = if entry.passed && within { "PASS" } else { "FAIL" };
    println!(
        "acceptance {criterion}: {verdict} — {} (worst {:.3e} vs bound {:.3e}, {} ms)",
        entry.id, entry.measured, entry.bound, entry.runtime_ms
    );
    assert!(
        entry.passed,
        "criterion {criterion}: {} failed: worst {:.6e} vs bound {:.6e}",
        entry.id, entry.measured, entry.bound
    );
    if let Some(limit) = ceiling_ms {
        assert!(
            within,
            "criterion {criterion}: {} took {} ms, ceiling {limit} ms",
            entry.id, entry.runtime_ms
        );
    }
}

#[test]
fn criterion_01_epoch_sum_identity() {
    gate(1, entry("lemma-delta-identity"), Some(5_000));
}

#[test]
fn criterion_02_update_norm_monotonicity() {
    gate(2, entry("lemma-v-monotone"), Some(5_000));
}

#[test]
fn criterion_03_shuffling_variance_formula() {
    gate(3, entry("lemma-shuffling-variance"), Some(10_000));
}

#[test]
fn criterion_04_exact_strongly_convex_rate() {
    gate(4, entry("theorem-exact-sc"), Some(30_000));
}

#[test]
fn criterion_05_exact_nonconvex_stationarity() {
    gate(5, entry("theorem-exact-nc"), Some(30_000));
}

#[test]
fn criterion_06_inexact_strongly_convex_neighborhood() {
    gate(6, entry("theorem-inexact-sc"), Some(120_000));
}

#[test]
fn criterion_07_inexact_nonconvex_stationarity() {
    gate(7, entry("theorem-inexact-nc"), Some(120_000));
}

#[test]
fn criterion_08_inner_size_selection() {
    gate(8, entry("corollary-inner-size"), None);
}

#[test]
fn criterion_09_and_10_benchmark_ordering_and_reproducibility() {
    let source = match std::env::var_os("SHUFFLEGRAD_W8A") {
        Some(path) if Path::new(&path).is_file() => DataSource::Path(PathBuf::from(path)),
        _ => DataSource::SyntheticBlobs {
            n: 50_000,
            d: 300,
            margin: FALLBACK_MARGIN,
            seed: FALLBACK_DATA_SEED,
        },
    };
    // Defaults pin the benchmark protocol: lambda = 0.01, the seven-point
    // step-size grid, 10 seeds, 40 epochs. The criterion is stated on
    // gradient norms, so the converged-reference solve is skipped.
    let mut cfg = ExperimentConfig::new(source);
    cfg.reference = false;

    let started = Instant::now();
    let first = run_experiment(&cfg).expect("benchmark experiment runs");
    let elapsed = started.elapsed();
    let second = run_experiment(&cfg).expect("benchmark experiment reruns");

    let csv_first = write_csv(&first.rows).expect("csv renders");
    let csv_second = write_csv(&second.rows).expect("csv renders");
    let reproducible = csv_first == csv_second;
    println!(
        "acceptance 10: {} — identical base seed twice -> byte-identical CSV ({} bytes)",
        if reproducible { "PASS" } else { "FAIL" },
        csv_first.len()
    );

    let final_of = |method: Method| -> f64 {
        let summary = first
            .summaries
            .iter()
            .find(|s| s.method == method)
            .unwrap_or_else(|| panic!("summary for {}", method.label()));
        assert!(
            !summary.failed,
            "criterion 9: every step size diverged for {}",
            method.label()
        );
        summary
            .final_mean_grad_sq
            .unwrap_or_else(|| panic!("final mean for {}", method.label()))
    };
    let adj = final_of(Method::AdjSarah);
    let sarah = final_of(Method::RrSarah);
    let svrg = final_of(Method::RrSvrg);

    let reach = adj <= 1e-10 && sarah <= 1e-10 && svrg <= 1e-10;
    let ordered = adj <= sarah;
    let in_time = elapsed.as_secs_f64() < 600.0;
    println!(
        "acceptance 9: {} — {}: finals adj {adj:.3e} / rr-sarah {sarah:.3e} / rr-svrg {svrg:.3e}, \
         one run {:.0} s",
        if reach && ordered && in_time {
            "PASS"
        } else {
            "FAIL"
        },
        first.dataset_label,
        elapsed.as_secs_f64()
    );

    assert!(reproducible, "criterion 10: reruns differ");
    assert!(
        reach,
        "criterion 9: best-grid final mean grad_sq_norm above 1e-10 \
         (adj {adj:.3e}, rr-sarah {sarah:.3e}, rr-svrg {svrg:.3e})"
    );
    assert!(
        ordered,
        "criterion 9: adj-sarah final mean {adj:.3e} above rr-sarah final mean {sarah:.3e}"
    );
    assert!(
        in_time,
        "criterion 9: one grid run took {:.0} s, ceiling 600 s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_11_assumption_audit() {
    use shufflegrad::analysis::run_assumption_suite;

    let trials = 200;
    let fixtures: Vec<(&str, Box<dyn shufflegrad::objective::FiniteSumObjective>)> = vec![
        (
            "logistic-l2",
            Box::new(
                LogisticL2::new(
                    Arc::new(generate_separable_blobs(32, 5, 1.2, 11).unwrap()),
                    0.05,
                )
                .unwrap(),
            ),
        ),
        (
            "quadratic-sum",
            Box::new(QuadraticSum::sample(12, 4, 13).unwrap()),
        ),
        (
            "sigmoid-squared",
            Box::new(
                SigmoidSquared::new(Arc::new(generate_separable_blobs(24, 4, 1.0, 17).unwrap()))
                    .unwrap(),
            ),
        ),
    ];

    let mut all_passed = true;
    let mut pieces = Vec::new();
    for (tag, (name, obj)) in fixtures.iter().enumerate() {
        let audit = run_assumption_suite(obj.as_ref(), trials, 42 + tag as u64).unwrap();
        all_passed &= audit.passed();
        pieces.push(format!(
            "{name} {}",
            if audit.passed() { "ok" } else { "VIOLATED" }
        ));
    }
    println!(
        "acceptance 11: {} — {} trials per check: {}",
        if all_passed { "PASS" } else { "FAIL" },
        trials,
        pieces.join(", ")
    );
    assert!(all_passed, "criterion 11: assumption audit found violations");
}
