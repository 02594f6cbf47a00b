//! End-to-end certification of the convergence theory on fixed fixtures.
//!
//! Each lemma, theorem, and corollary behind the adjusted shuffling
//! recursion is checked numerically: identities on instrumented epochs,
//! brute-force enumeration against closed forms, deterministic per-epoch
//! contraction, and Monte-Carlo expectation bounds with explicit
//! estimator slack. Every check is a one-sided inequality against
//! measured runs — never a tightness claim — and negative controls
//! confirm the checkers can fail. Results land in a [`CertReport`] that
//! renders as a human-readable text block plus a machine-readable
//! key-value section.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use crate::analysis::{
    brute_force_prefix_variance, check_delta_identity_relative, check_v_monotone,
    choose_inner_size, exact_nc_bound, exact_sc_bound, inexact_sc_bound, InnerSizeSetting,
    TheoreticalBounds,
};
use crate::dataset::generate_separable_blobs;
use crate::error::{Error, Result};
use crate::numerics::ParameterVector;
use crate::objective::{FiniteSumObjective, LogisticL2, QuadraticSum, SigmoidSquared};
use crate::optimizers::{run, run_epoch_adjusted, Method, OptimizerConfig};
use crate::shuffling::{derive_seed, SchemeKind, SeededRng, ShufflingScheme};

/// Knobs for the certification sweep. Fixtures are pinned; only the
/// Monte-Carlo breadth of the expectation-level checks is adjustable.
#[derive(Clone, Copy, Debug)]
pub struct CertConfig {
    /// Seed count for the expectation-level (inexact-mode) checks.
    pub mc_seeds: usize,
    /// Base seed from which every run's stream is derived.
    pub base_seed: u64,
}

impl Default for CertConfig {
    fn default() -> Self {
        CertConfig {
            mc_seeds: 200,
            base_seed: 42,
        }
    }
}

/// One certified statement: what was checked, on what instance, the
/// binding threshold, the worst measured value, and the verdict.
#[derive(Clone, Debug)]
pub struct CertEntry {
    pub id: &'static str,
    pub statement: &'static str,
    pub instance: String,
    /// The threshold the measurement is compared against (tolerance for
    /// identities, worst-case bound value for inequalities, zero for
    /// exact matches).
    pub bound: f64,
    /// Worst measured statistic across the sweep.
    pub measured: f64,
    pub passed: bool,
    pub runtime_ms: u128,
    pub notes: Vec<String>,
}

/// The full certification outcome, one entry per statement.
#[derive(Clone, Debug)]
pub struct CertReport {
    pub entries: Vec<CertEntry>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, id: &str) -> Option<&CertEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Human-readable section.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "convergence certification report");
        let _ = writeln!(out, "================================");
        let passed = self.entries.iter().filter(|e| e.passed).count();
        let _ = writeln!(
            out,
            "overall: {} ({passed}/{} entries)\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.entries.len()
        );
        for e in &self.entries {
            let _ = writeln!(out, "[{}] {}", if e.passed { "PASS" } else { "FAIL" }, e.id);
            let _ = writeln!(out, "  statement: {}", e.statement);
            let _ = writeln!(out, "  instance:  {}", e.instance);
            let _ = writeln!(
                out,
                "  threshold: {:e}   worst measured: {:e}   runtime: {} ms",
                e.bound, e.measured, e.runtime_ms
            );
            for n in &e.notes {
                let _ = writeln!(out, "  - {n}");
            }
            let _ = writeln!(out);
        }
        out
    }

    /// Machine-readable section: one `cert.<id>.<field>=<value>` per line.
    pub fn render_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cert.overall.passed={}", self.passed());
        let _ = writeln!(out, "cert.entries={}", self.entries.len());
        for e in &self.entries {
            let _ = writeln!(out, "cert.{}.passed={}", e.id, e.passed);
            let _ = writeln!(out, "cert.{}.bound={}", e.id, e.bound);
            let _ = writeln!(out, "cert.{}.measured={}", e.id, e.measured);
            let _ = writeln!(out, "cert.{}.runtime_ms={}", e.id, e.runtime_ms);
            let _ = writeln!(out, "cert.{}.instance={}", e.id, e.instance);
        }
        out
    }

    /// Both sections in one document, text first.
    pub fn render(&self) -> String {
        format!("{}\n{}", self.render_text(), self.render_key_value())
    }
}

/// Runs every certification entry in order and collects the report.
pub fn run_certification(cfg: &CertConfig) -> Result<CertReport> {
    if cfg.mc_seeds < 2 {
        return Err(Error::Precondition(
            "expectation-level checks need at least 2 seeds".into(),
        ));
    }
    let entries = vec![
        certify_delta_identity(cfg)?,
        certify_v_monotone(cfg)?,
        certify_shuffling_variance(cfg)?,
        certify_exact_sc(cfg)?,
        certify_exact_nc(cfg)?,
        certify_inexact_sc(cfg)?,
        certify_inexact_nc(cfg)?,
        certify_inner_size(cfg)?,
    ];
    Ok(CertReport { entries })
}

// ---- shared fixture and solver helpers ----

fn blobs_logistic(n: usize, d: usize, margin: f64, seed: u64, lambda: f64) -> Result<LogisticL2> {
    let ds = generate_separable_blobs(n, d, margin, seed)?;
    LogisticL2::new(Arc::new(ds), lambda)
}

fn blobs_sigmoid(n: usize, d: usize, margin: f64, seed: u64) -> Result<SigmoidSquared> {
    let ds = generate_separable_blobs(n, d, margin, seed)?;
    SigmoidSquared::new(Arc::new(ds))
}

/// Full-gradient descent at step 1/L until ‖∇P‖² ≤ `tol_grad_sq`,
/// returning the minimizer and P at it. Used to pin P* on strongly
/// convex fixtures; the gap error this leaves is at most
/// tol_grad_sq/(2μ), far below every tolerance used here.
fn minimize_gd(
    obj: &dyn FiniteSumObjective,
    tol_grad_sq: f64,
    max_iters: usize,
) -> Result<(ParameterVector, f64)> {
    let mut w = ParameterVector::zeros(obj.dim());
    let mut grad = ParameterVector::zeros(obj.dim());
    let eta = 1.0 / obj.lipschitz();
    for _ in 0..max_iters {
        obj.full_gradient_into(&w, &mut grad)?;
        if grad.norm_sq()? <= tol_grad_sq {
            let p = obj.value(&w)?;
            return Ok((w, p));
        }
        crate::numerics::axpy_in_place(-eta, grad.as_slice(), w.as_mut_slice());
    }
    Err(Error::Precondition(format!(
        "reference solve did not reach gradient tolerance {tol_grad_sq:e} \
         within {max_iters} iterations"
    )))
}

struct InexactSweep {
    /// Per-epoch seed-mean of the tracked statistic, index 0 = initial point.
    mean: Vec<f64>,
    /// Per-epoch standard error across seeds.
    se: Vec<f64>,
    /// Per-seed average of squared gradient norms over s = 0..S−1.
    per_seed_nc_average: Vec<f64>,
    /// Trajectory max of variance_at over every recorded outer iterate.
    sigma_sq: f64,
    gap0: f64,
}

/// Drives the adjusted recursion in inexact mode (m < n, fresh
/// permutations) over `seeds` independent streams, recording per-epoch
/// gaps (against `p_star`), squared gradient norms, and the
/// trajectory-max gradient variance.
fn drive_inexact(
    obj: &dyn FiniteSumObjective,
    m: usize,
    eta: f64,
    epochs: usize,
    seeds: usize,
    base_seed: u64,
    p_star: f64,
) -> Result<InexactSweep> {
    let n = obj.n_components();
    let d = obj.dim();
    let w0 = ParameterVector::zeros(d);
    let p0 = obj.value(&w0)?;
    let gap0 = p0 - p_star;

    let mut gaps = vec![vec![0.0; seeds]; epochs + 1];
    let mut per_seed_nc_average = Vec::with_capacity(seeds);
    let mut sigma_sq = 0.0f64;
    let mut grad = ParameterVector::zeros(d);

    for k in 0..seeds {
        let mut rng = SeededRng::new(derive_seed(base_seed, k as u64));
        let scheme = ShufflingScheme::new(SchemeKind::RandomReshuffling, n, &mut rng)?;
        let mut w = w0.clone();
        let mut grad_sq_sum = 0.0;
        for s in 0..=epochs {
            if s > 0 {
                let out = run_epoch_adjusted(obj, &w, m, eta, &scheme, &mut rng, s, false)?;
                w = out.w_next;
            }
            gaps[s][k] = obj.value(&w)? - p_star;
            if s < epochs {
                obj.full_gradient_into(&w, &mut grad)?;
                grad_sq_sum += grad.norm_sq()?;
            }
            sigma_sq = sigma_sq.max(obj.variance_at(&w)?);
        }
        per_seed_nc_average.push(grad_sq_sum / epochs as f64);
    }

    let mut mean = Vec::with_capacity(epochs + 1);
    let mut se = Vec::with_capacity(epochs + 1);
    for row in &gaps {
        let (m_, s_) = mean_and_se(row);
        mean.push(m_);
        se.push(s_);
    }
    Ok(InexactSweep {
        mean,
        se,
        per_seed_nc_average,
        sigma_sq,
        gap0,
    })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

// ---- entry 1: cumulative-update identity ----

fn certify_delta_identity(cfg: &CertConfig) -> Result<CertEntry> {
    let start = Instant::now();
    let quad = QuadraticSum::sample(16, 4, 101)?;
    let logi = blobs_logistic(32, 5, 1.2, 102, 0.01)?;
    let fixtures: [(&dyn FiniteSumObjective, &str); 2] =
        [(&quad, "quadratic n=m=16"), (&logi, "logistic blobs n=m=32")];

    let mut worst = 0.0f64;
    let mut epochs_checked = 0usize;
    for (obj, _) in fixtures {
        for seed in 0..5u64 {
            let mut run_cfg = OptimizerConfig::new(Method::AdjSarah);
            run_cfg.epochs = 50;
            run_cfg.record_inner = true;
            run_cfg.seed = derive_seed(cfg.base_seed, 1000 + seed);
            let trace = run(obj, &ParameterVector::zeros(obj.dim()), &run_cfg)?;
            for epoch in trace.instrumented() {
                worst = worst.max(check_delta_identity_relative(epoch)?);
                epochs_checked += 1;
            }
        }
    }
    let bound = 1e-9;
    Ok(CertEntry {
        id: "lemma-delta-identity",
        statement: "every gradient difference enters the epoch-cumulative update \
                    Δ_m = Σ v_t with the same weight m+1",
        instance: format!(
            "quadratic n=m=16 and logistic blobs n=m=32, 50 epochs x 5 seeds each \
             ({epochs_checked} instrumented epochs)"
        ),
        bound,
        measured: worst,
        passed: worst <= bound && epochs_checked == 500,
        runtime_ms: start.elapsed().as_millis(),
        notes: vec![
            "residuals are relative to the identity's natural magnitude \
             (m+1)(1 + ||v_0||_inf + sum of diff norms)"
                .into(),
        ],
    })
}

// ---- entry 2: direction-norm monotonicity ----

fn certify_v_monotone(cfg: &CertConfig) -> Result<CertEntry> {
    let start = Instant::now();
    let logi = blobs_logistic(24, 4, 1.2, 103, 0.05)?;
    let quad = QuadraticSum::sample(12, 3, 104)?;
    let fixtures: [(&dyn FiniteSumObjective, &str); 2] = [(&logi, "logistic"), (&quad, "quadratic")];

    let mut worst_ratio = 0.0f64;
    let mut all_monotone = true;
    for (obj, _) in fixtures {
        let m = obj.n_components();
        for seed in 0..3u64 {
            let mut run_cfg = OptimizerConfig::new(Method::AdjSarah);
            run_cfg.epochs = 20;
            run_cfg.record_inner = true;
            run_cfg.eta = Some(1.0 / (4.0 * m as f64 * obj.lipschitz()));
            run_cfg.seed = derive_seed(cfg.base_seed, 2000 + seed);
            let trace = run(obj, &ParameterVector::zeros(obj.dim()), &run_cfg)?;
            for epoch in trace.instrumented() {
                let check = check_v_monotone(epoch)?;
                all_monotone &= check.monotone;
                let mut prev = epoch.v[0].norm_sq()?;
                for v in epoch.v.iter().skip(1) {
                    let cur = v.norm_sq()?;
                    if prev > 0.0 {
                        worst_ratio = worst_ratio.max(cur / prev);
                    }
                    prev = cur;
                }
            }
        }
    }

    // negative control: an oversized step on an ill-conditioned quadratic
    // must produce a detected violation, proving the check has teeth
    let ill = QuadraticSum::sample_ill_conditioned(6, 4, 3, 1e4)?;
    let mut rng = SeededRng::new(derive_seed(cfg.base_seed, 2100));
    let scheme = ShufflingScheme::new(SchemeKind::RandomReshuffling, 6, &mut rng)?;
    let w0 = ParameterVector::new(vec![0.3, -0.2, 0.15, 0.08])?;
    let out = run_epoch_adjusted(&ill, &w0, 6, 10.0 / ill.lipschitz(), &scheme, &mut rng, 1, true)?;
    let control = check_v_monotone(out.instrumented.as_ref().unwrap())?;

    let bound = 1.0 + 1e-12;
    Ok(CertEntry {
        id: "lemma-v-monotone",
        statement: "inner direction norms ||v_t|| are non-increasing when \
                    eta <= 1/(4mL) and the components are convex",
        instance: "logistic blobs n=24 and quadratic n=12, eta=1/(4mL), \
                   20 epochs x 3 seeds; negative control eta=10/L on an \
                   ill-conditioned quadratic (kappa=1e4)"
            .into(),
        bound,
        measured: worst_ratio,
        passed: all_monotone && worst_ratio <= bound && !control.monotone,
        runtime_ms: start.elapsed().as_millis(),
        notes: vec![
            format!(
                "negative control violated monotonicity at inner step {} as intended",
                control
                    .first_violation
                    .map(|(t, _, _)| t as i64)
                    .unwrap_or(-1)
            ),
            "the monotonicity statement is posed under smoothness alone, but its \
             derivation uses co-coercivity of component gradients, which needs \
             convexity; the check is therefore scoped to convex fixtures and the \
             gap is flagged here rather than resolved"
                .into(),
        ],
    })
}

// ---- entry 3: prefix-mean variance equality ----

fn certify_shuffling_variance(cfg: &CertConfig) -> Result<CertEntry> {
    let start = Instant::now();
    let mut worst_rel = 0.0f64;
    let mut worst_full_abs = 0.0f64;
    let mut cells = 0usize;
    let mut rng = SeededRng::new(derive_seed(cfg.base_seed, 3000));
    for n in 2..=8usize {
        let obj = blobs_logistic(n, 3, 1.2, 300 + n as u64, 0.03)?;
        for _ in 0..3 {
            let w = ParameterVector::new((0..3).map(|_| rng.next_gaussian()).collect())?;
            let sigma_sq = obj.variance_at(&w)?;
            for m in 1..=n {
                let v = brute_force_prefix_variance(&obj, &w, m)?;
                let closed = (n - m) as f64 * sigma_sq / (m as f64 * (n - 1) as f64);
                if m == n {
                    worst_full_abs = worst_full_abs.max(v.abs());
                } else {
                    worst_rel = worst_rel.max((v - closed).abs() / closed);
                }
                cells += 1;
            }
        }
    }
    let bound = 1e-12;
    Ok(CertEntry {
        id: "lemma-shuffling-variance",
        statement: "the m-prefix mean-gradient variance equals \
                    (n-m) sigma^2(w) / (m(n-1)) exactly, by full enumeration \
                    of all C(n,m) subsets",
        instance: format!(
            "logistic blobs, all n in 2..=8, all m in 1..=n, 3 random points each \
             ({cells} (n,m,point) cells)"
        ),
        bound,
        measured: worst_rel,
        passed: worst_rel <= bound && worst_full_abs <= 1e-24,
        runtime_ms: start.elapsed().as_millis(),
        notes: vec![format!(
            "m = n cells check the closed form's exact zero against an absolute \
             floor 1e-24 (enumerated mean differs from the full gradient only by \
             summation order); worst |residual| observed {worst_full_abs:e}"
        )],
    })
}

// ---- entry 4: exact mode, strongly convex, deterministic ----

fn certify_exact_sc(cfg: &CertConfig) -> Result<CertEntry> {
    let start = Instant::now();
    let obj = blobs_logistic(64, 5, 1.2, 105, 0.01)?;
    let constants = obj.smoothness_constants()?;
    let (_, p_star) = minimize_gd(&obj, 1e-24, 400_000)?;

    let schemes = [
        SchemeKind::RandomReshuffling,
        SchemeKind::ShuffleOnce,
        SchemeKind::Cyclic,
    ];
    let mut worst_ratio = 0.0f64;
    let mut violations = 0usize;
    for scheme in schemes {
        for seed in 0..5u64 {
            let mut run_cfg = OptimizerConfig::new(Method::AdjSarah);
            run_cfg.epochs = 50;
            run_cfg.scheme = scheme;
            run_cfg.seed = derive_seed(cfg.base_seed, 4000 + seed);
            let trace = run(&obj, &ParameterVector::zeros(5), &run_cfg)?;
            let eta = trace.resolved_eta();
            let records = trace.records();
            let gap0 = records[0].loss.unwrap() - p_star;
            for (s, rec) in records.iter().enumerate().skip(1) {
                let gap = rec.loss.unwrap() - p_star;
                let bound =
                    exact_sc_bound(constants.l, constants.mu, eta, 64, s, gap0)?;
                if gap > bound {
                    violations += 1;
                }
                worst_ratio = worst_ratio.max(gap / bound);
            }
        }
    }
    Ok(CertEntry {
        id: "theorem-exact-sc",
        statement: "exact mode contracts the optimality gap by the factor \
                    1 - eta(n+1)mu/2 every epoch, for every permutation \
                    sequence (no expectation)",
        instance: format!(
            "logistic blobs n=64 lambda=0.01 (kappa={:.1}), eta=1/(2nL), \
             rr/shuffle-once/cyclic x 5 seeds, all s <= 50",
            constants.kappa
        ),
        bound: 1.0,
        measured: worst_ratio,
        passed: violations == 0 && worst_ratio <= 1.0,
        runtime_ms: start.elapsed().as_millis(),
        notes: vec![
            "measured as the worst gap/bound ratio over 750 (scheme, seed, epoch) \
             cells; P* pinned by full-gradient descent to ||grad P||^2 <= 1e-24"
                .into(),
            "the contraction uses the stated constant with the looser \
             1 - eta^2 n^2 L^2 >= 1/2 simplification kept verbatim, although \
             3/4 holds at this step size"
                .into(),
        ],
    })
}

// ---- entry 5: exact mode, non-convex mean-gradient bound ----

fn certify_exact_nc(cfg: &CertConfig) -> Result<CertEntry> {
    let start = Instant::now();
    let logi = blobs_logistic(64, 5, 1.2, 105, 0.01)?;
    let (_, logi_star) = minimize_gd(&logi, 1e-24, 400_000)?;
    let sig = blobs_sigmoid(48, 4, 1.0, 106)?;

    let schemes = [
        SchemeKind::RandomReshuffling,
        SchemeKind::ShuffleOnce,
        SchemeKind::Cyclic,
    ];
    let mut worst_ratio = 0.0f64;
    let mut curvature_seen = 0.0f64;
    let fixtures: [(&dyn FiniteSumObjective, usize, Option<f64>, &str); 2] = [
        (&logi, 64, Some(logi_star), "logistic"),
        (&sig, 48, None, "sigmoid-squared"),
    ];
    for (obj, n, p_star, _) in fixtures {
        for scheme in schemes {
            for seed in 0..5u64 {
                let mut run_cfg = OptimizerConfig::new(Method::AdjSarah);
                run_cfg.epochs = 50;
                run_cfg.scheme = scheme;
                run_cfg.seed = derive_seed(cfg.base_seed, 5000 + seed);
                let trace = run(obj, &ParameterVector::zeros(obj.dim()), &run_cfg)?;
                let eta = trace.resolved_eta();
                let records = trace.records();
                // gap0 against the true minimum when known, else against
                // the global lower bound 0 (valid, merely looser)
                let gap0 = records[0].loss.unwrap() - p_star.unwrap_or(0.0);
                for big_s in [10usize, 50] {
                    let mean: f64 = records[..big_s]
                        .iter()
                        .map(|r| r.grad_sq_norm)
                        .sum::<f64>()
                        / big_s as f64;
                    let bound = exact_nc_bound(obj.lipschitz(), eta, n, big_s, gap0)?;
                    worst_ratio = worst_ratio.max(mean / bound);
                }
            }
        }
    }

    // curvature audit for the nonconvex fixture: sweep the pointwise
    // Hessian norm over a driven trajectory and record the max against
    // the global constant used in the bound
    {
        let mut rng = SeededRng::new(derive_seed(cfg.base_seed, 5100));
        let scheme = ShufflingScheme::new(SchemeKind::RandomReshuffling, 48, &mut rng)?;
        let mut w = ParameterVector::zeros(4);
        let eta = 1.0 / (2.0 * 48.0 * sig.lipschitz());
        curvature_seen = curvature_seen.max(sig.max_component_curvature(&w)?);
        for s in 1..=50 {
            let out = run_epoch_adjusted(&sig, &w, 48, eta, &scheme, &mut rng, s, false)?;
            w = out.w_next;
            curvature_seen = curvature_seen.max(sig.max_component_curvature(&w)?);
        }
    }

    Ok(CertEntry {
        id: "theorem-exact-nc",
        statement: "exact-mode mean squared gradient over s = 0..S-1 obeys \
                    2 gap0 / (eta (n+1)(1 - eta^2 n^2 L^2) S)",
        instance: "logistic blobs n=64 (gap0 against solved P*) and \
                   sigmoid-squared blobs n=48 (gap0 against the global lower \
                   bound 0), three schemes x 5 seeds, S in {10, 50}"
            .into(),
        bound: 1.0,
        measured: worst_ratio,
        passed: worst_ratio <= 1.0 && curvature_seen <= sig.lipschitz() * (1.0 + 1e-12),
        runtime_ms: start.elapsed().as_millis(),
        notes: vec![
            format!(
                "nonconvex smoothness constant: global cap sup|g''| x max||x||^2 = \
                 {:.6e}; pointwise Hessian-norm sweep over a 50-epoch driven \
                 trajectory peaked at {:.6e} (audit holds)",
                sig.lipschitz(),
                curvature_seen
            ),
            "sigmoid-squared losses are bounded below by 0, so gap0 = P(w_0) - 0 \
             upper-bounds the true gap and the certified inequality is implied by \
             the theorem"
                .into(),
        ],
    })
}

// ---- entry 6: inexact mode, strongly convex expectation bound ----

fn certify_inexact_sc(cfg: &CertConfig) -> Result<CertEntry> {
    let start = Instant::now();
    let obj = blobs_logistic(512, 10, 1.2, 107, 0.1)?;
    let constants = obj.smoothness_constants()?;
    let (m, epochs) = (32usize, 40usize);
    let eta = 1.0 / (4.0 * m as f64 * constants.l);
    let (_, p_star) = minimize_gd(&obj, 1e-24, 400_000)?;

    let sweep = drive_inexact(
        &obj,
        m,
        eta,
        epochs,
        cfg.mc_seeds,
        derive_seed(cfg.base_seed, 6000),
        p_star,
    )?;
    let bounds = TheoreticalBounds::compute(constants.l, constants.mu, eta, 512, m, sweep.sigma_sq)?;

    let mut worst_margin = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for s in 1..=epochs {
        let bound = inexact_sc_bound(
            constants.l,
            constants.mu,
            eta,
            m,
            s,
            sweep.gap0,
            sweep.sigma_sq,
        )? + 3.0 * sweep.se[s];
        if sweep.mean[s] > bound {
            violations += 1;
        }
        worst_margin = worst_margin.max(sweep.mean[s] / bound);
    }
    let floor_ok = sweep.mean[epochs] <= 2.0 * bounds.noise_floor;

    Ok(CertEntry {
        id: "theorem-inexact-sc",
        statement: "inexact-mode expected gap obeys alpha^s gap0 + \
                    6 sigma^2 / (eta (m+1) mu L m) at every epoch",
        instance: format!(
            "logistic blobs n=512 d=10 lambda=0.1, m=32, eta=1/(4mL), rr, \
             {} seeds, s <= {epochs}, 3-standard-error estimator slack",
            cfg.mc_seeds
        ),
        bound: 1.0,
        measured: worst_margin,
        passed: violations == 0 && floor_ok,
        runtime_ms: start.elapsed().as_millis(),
        notes: vec![
            format!(
                "sigma^2 surrogate: max of variance_at over all recorded outer \
                 iterates across seeds = {:.6e} (a uniform-variance assumption is \
                 certified with the tightest trajectory-supported value)",
                sweep.sigma_sq
            ),
            format!(
                "noise floor {:.6e}; seed-mean gap at s={epochs} is {:.6e} \
                 (<= 2x floor confirms neighborhood convergence)",
                bounds.noise_floor, sweep.mean[epochs]
            ),
            format!("alpha = {:.9}", bounds.alpha),
        ],
    })
}

// ---- entry 7: inexact mode, non-convex expectation bound ----

fn certify_inexact_nc(cfg: &CertConfig) -> Result<CertEntry> {
    let start = Instant::now();
    let obj = blobs_sigmoid(512, 10, 1.2, 108)?;
    let (m, epochs) = (32usize, 40usize);
    let l = obj.lipschitz();
    let eta = 1.0 / (4.0 * m as f64 * l);

    let sweep = drive_inexact(
        &obj,
        m,
        eta,
        epochs,
        cfg.mc_seeds,
        derive_seed(cfg.base_seed, 7000),
        obj.lower_bound(),
    )?;
    let (estimate, se) = mean_and_se(&sweep.per_seed_nc_average);
    let bound = crate::analysis::inexact_nc_bound(l, eta, m, epochs, sweep.gap0, sweep.sigma_sq)?
        + 3.0 * se;

    // curvature audit over one driven trajectory
    let mut curvature_seen = 0.0f64;
    {
        let mut rng = SeededRng::new(derive_seed(cfg.base_seed, 7100));
        let scheme = ShufflingScheme::new(SchemeKind::RandomReshuffling, 512, &mut rng)?;
        let mut w = ParameterVector::zeros(10);
        curvature_seen = curvature_seen.max(obj.max_component_curvature(&w)?);
        for s in 1..=epochs {
            let out = run_epoch_adjusted(&obj, &w, m, eta, &scheme, &mut rng, s, false)?;
            w = out.w_next;
            curvature_seen = curvature_seen.max(obj.max_component_curvature(&w)?);
        }
    }

    Ok(CertEntry {
        id: "theorem-inexact-nc",
        statement: "inexact-mode mean squared gradient over s = 0..S-1 obeys \
                    the two-term bound 2 gap0 / (eta (m+1)(1-4m^2L^2eta^2) S) + \
                    6 sigma^2 / (eta (m+1)(1-4m^2L^2eta^2) L m)",
        instance: format!(
            "sigmoid-squared blobs n=512 d=10, m=32, eta=1/(4mL), rr, {} seeds, \
             S={epochs}, 3-standard-error estimator slack",
            cfg.mc_seeds
        ),
        bound,
        measured: estimate,
        passed: estimate <= bound && curvature_seen <= l * (1.0 + 1e-12),
        runtime_ms: start.elapsed().as_millis(),
        notes: vec![
            format!(
                "sigma^2 surrogate (trajectory max of variance_at): {:.6e}",
                sweep.sigma_sq
            ),
            format!(
                "smoothness constant {l:.6e} audited by a pointwise Hessian-norm \
                 sweep over a driven trajectory, peak {curvature_seen:.6e}"
            ),
            "gap0 = P(w_0) - 0 via the losses' global lower bound".into(),
        ],
    })
}

// ---- entry 8: inner-size selection corollary ----

fn certify_inner_size(cfg: &CertConfig) -> Result<CertEntry> {
    let start = Instant::now();
    // 8 pinned tuples crossing every clamp edge, then 12 random draws
    let mut tuples: Vec<(f64, f64, usize, InnerSizeSetting)> = vec![
        (0.0, 0.5, 100, InnerSizeSetting::StronglyConvex { mu: 0.1 }),
        (0.0, 0.5, 100, InnerSizeSetting::NonConvex),
        (1e18, 0.5, 64, InnerSizeSetting::StronglyConvex { mu: 0.1 }),
        (1e18, 0.5, 64, InnerSizeSetting::NonConvex),
        (1.0, 0.1, 1_000_000, InnerSizeSetting::StronglyConvex { mu: 0.01 }),
        (0.5, 0.1, 1_000_000, InnerSizeSetting::NonConvex),
        (1.0, 0.5, 192, InnerSizeSetting::StronglyConvex { mu: 2.0 }),
        (2.5e-3, 0.05, 1000, InnerSizeSetting::NonConvex),
    ];
    let mut rng = SeededRng::new(derive_seed(cfg.base_seed, 8000));
    for k in 0..12 {
        let sigma_sq = 10.0f64.powf(4.0 * rng.next_f64() - 2.0);
        let eps = 0.01 + 0.98 * rng.next_f64();
        let n = 1 + rng.next_below(100_000);
        let setting = if k % 2 == 0 {
            InnerSizeSetting::StronglyConvex {
                mu: 10.0f64.powf(2.0 * rng.next_f64() - 2.0),
            }
        } else {
            InnerSizeSetting::NonConvex
        };
        tuples.push((sigma_sq, eps, n, setting));
    }

    let mut mismatches = 0usize;
    for &(sigma_sq, eps, n, setting) in &tuples {
        let got = choose_inner_size(sigma_sq, eps, n, setting)?;
        let raw = match setting {
            InnerSizeSetting::StronglyConvex { mu } => (96.0 * sigma_sq / (mu * eps)).ceil() - 1.0,
            InnerSizeSetting::NonConvex => (sigma_sq / (eps * eps)).ceil(),
        };
        let expected = if !raw.is_finite() || raw >= n as f64 {
            n
        } else if raw < 1.0 {
            1
        } else {
            raw as usize
        };
        if got != expected {
            mismatches += 1;
        }
    }

    Ok(CertEntry {
        id: "corollary-inner-size",
        statement: "inner-size selection reproduces min{ceil(96 sigma^2/(mu eps))-1, n} \
                    (strongly convex) and min{ceil(sigma^2/eps^2), n} (non-convex), \
                    clamped below at 1",
        instance: format!(
            "{} parameter tuples: 8 pinned across the clamp edges, 12 random draws",
            tuples.len()
        ),
        bound: 0.0,
        measured: mismatches as f64,
        passed: mismatches == 0 && tuples.len() == 20,
        runtime_ms: start.elapsed().as_millis(),
        notes: vec!["exact integer comparison against direct formula evaluation".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_solver_matches_closed_form_minimum() {
        let obj = QuadraticSum::sample(12, 4, 9).unwrap();
        let (w, p) = minimize_gd(&obj, 1e-26, 2_000_000).unwrap();
        assert!((p - obj.min_value()).abs() <= 1e-12);
        let mut dist = 0.0;
        for (a, b) in w.as_slice().iter().zip(obj.w_star().as_slice()) {
            dist += (a - b) * (a - b);
        }
        assert!(dist <= 1e-16);
    }

    #[test]
    fn reference_solver_reports_budget_exhaustion() {
        let obj = QuadraticSum::sample(12, 4, 9).unwrap();
        assert!(matches!(
            minimize_gd(&obj, 1e-30, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mean_and_se_hand_case() {
        let (m, se) = mean_and_se(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        // sample variance 2, se = sqrt(2/2) = 1
        assert!((se - 1.0).abs() < 1e-15);
        let (m1, se1) = mean_and_se(&[5.0]);
        assert_eq!((m1, se1), (5.0, 0.0));
    }

    #[test]
    fn report_renders_both_sections() {
        let report = CertReport {
            entries: vec![CertEntry {
                id: "sample-entry",
                statement: "statement text",
                instance: "instance text".into(),
                bound: 1e-9,
                measured: 2e-13,
                passed: true,
                runtime_ms: 12,
                notes: vec!["a note".into()],
            }],
        };
        let text = report.render_text();
        assert!(text.contains("overall: PASS (1/1 entries)"));
        assert!(text.contains("[PASS] sample-entry"));
        assert!(text.contains("a note"));
        let kv = report.render_key_value();
        assert!(kv.contains("cert.overall.passed=true"));
        assert!(kv.contains("cert.sample-entry.measured=0.0000000000002"));
        let full = report.render();
        assert!(full.contains("[PASS]") && full.contains("cert.entries=1"));
        assert!(report.entry("sample-entry").is_some());
        assert!(report.entry("missing").is_none());
    }

    #[test]
    fn failed_entry_fails_the_report() {
        let mut entry = CertEntry {
            id: "sample-entry",
            statement: "s",
            instance: "i".into(),
            bound: 1.0,
            measured: 2.0,
            passed: false,
            runtime_ms: 0,
            notes: vec![],
        };
        let report = CertReport {
            entries: vec![entry.clone()],
        };
        assert!(!report.passed());
        assert!(report.render_text().contains("[FAIL]"));
        entry.passed = true;
        assert!(CertReport {
            entries: vec![entry]
        }
        .passed());
    }

    #[test]
    fn inner_size_entry_is_exact() {
        let entry = certify_inner_size(&CertConfig::default()).unwrap();
        assert!(entry.passed, "{entry:?}");
        assert_eq!(entry.measured, 0.0);
    }

    #[test]
    fn identity_and_monotonicity_entries_pass() {
        let cfg = CertConfig::default();
        let e1 = certify_delta_identity(&cfg).unwrap();
        assert!(e1.passed, "{e1:?}");
        assert!(e1.measured <= 1e-9);
        let e2 = certify_v_monotone(&cfg).unwrap();
        assert!(e2.passed, "{e2:?}");
    }

    #[test]
    fn variance_entry_passes() {
        let entry = certify_shuffling_variance(&CertConfig::default()).unwrap();
        assert!(entry.passed, "{entry:?}");
        assert!(entry.measured <= 1e-12);
    }

    #[test]
    fn exact_mode_entries_pass() {
        let cfg = CertConfig::default();
        let e4 = certify_exact_sc(&cfg).unwrap();
        assert!(e4.passed, "{e4:?}");
        assert!(e4.measured <= 1.0);
        let e5 = certify_exact_nc(&cfg).unwrap();
        assert!(e5.passed, "{e5:?}");
    }

    #[test]
    fn inexact_mode_entries_pass_at_reduced_breadth() {
        // 60 seeds keeps this test quick; the full 200-seed sweep runs in
        // the acceptance suite
        let cfg = CertConfig {
            mc_seeds: 60,
            base_seed: 42,
        };
        let e6 = certify_inexact_sc(&cfg).unwrap();
        assert!(e6.passed, "{e6:?}");
        let e7 = certify_inexact_nc(&cfg).unwrap();
        assert!(e7.passed, "{e7:?}");
    }

    #[test]
    fn tiny_seed_count_rejected() {
        let cfg = CertConfig {
            mc_seeds: 1,
            base_seed: 1,
        };
        assert!(matches!(
            run_certification(&cfg),
            Err(Error::Precondition(_))
        ));
    }
}
