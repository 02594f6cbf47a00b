//! Experiment orchestration: reference solving, learning-rate grid
//! search, multi-seed runs, aggregation, and CSV emission.
//!
//! A benchmark run sweeps every (method, learning rate, seed) cell of an
//! [`ExperimentConfig`], aggregates traces per epoch across seeds into
//! means with 95% normal-approximation confidence half-widths, and picks
//! each method's learning rate by final-epoch mean squared gradient
//! norm. Emitted CSV is deterministic for a fixed config and base seed:
//! cell RNG streams are derived from the cell's content (method,
//! learning rate, seed tag) rather than its position, rows are sorted by
//! (method, lr, seed, epoch), floats are written in shortest round-trip
//! form, and `wall_ms` is recorded as 0 so reruns are byte-identical.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::dataset::{generate_separable_blobs, parse_libsvm_path};
use crate::error::{Error, Result};
use crate::numerics::ParameterVector;
use crate::objective::{FiniteSumObjective, LogisticL2};
use crate::optimizers::{run, Method, OptimizerConfig, RunTrace};
use crate::shuffling::{derive_seed, SchemeKind};

/// Width multiplier of the 95% two-sided normal confidence interval.
const Z_95: f64 = 1.96;

/// Where the training examples come from.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    /// A LIBSVM-format file, gzip-compressed or plain (detected by content).
    Path(PathBuf),
    /// Two separable Gaussian blobs generated on the fly.
    SyntheticBlobs {
        n: usize,
        d: usize,
        margin: f64,
        seed: u64,
    },
}

impl DataSource {
    /// The `dataset` column value: a file stem, or a descriptive tag for
    /// synthetic data.
    pub fn label(&self) -> String {
        match self {
            DataSource::Path(p) => p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            DataSource::SyntheticBlobs { n, d, .. } => format!("blobs-n{n}-d{d}"),
        }
    }
}

/// One optimizer entry in the sweep, with its per-method knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    /// Inner-loop size; `None` keeps the method default (m = n).
    pub m: Option<usize>,
    pub scheme: SchemeKind,
}

impl MethodSpec {
    pub fn new(method: Method) -> Self {
        MethodSpec {
            method,
            m: None,
            scheme: SchemeKind::RandomReshuffling,
        }
    }
}

/// Full description of one benchmark sweep.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub source: DataSource,
    /// l2 regularization weight of the logistic objective.
    pub lambda: f64,
    pub methods: Vec<MethodSpec>,
    /// Learning-rate grid searched per method.
    pub grid: Vec<f64>,
    /// Seed tags, one full run per tag per (method, lr). Tags feed the
    /// per-cell stream derivation, so duplicate tags repeat a run exactly.
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub base_seed: u64,
    /// Scale every example to unit Euclidean norm before training.
    pub normalize: bool,
    /// Solve for w* first and emit `loss_gap` columns. Skipping the
    /// reference keeps huge sweeps affordable; `loss_gap` is then empty.
    pub reference: bool,
    /// Worker threads for the (method, lr, seed) cells; results are
    /// identical for any value.
    pub jobs: usize,
}

impl ExperimentConfig {
    /// Defaults matching the benchmark protocol: λ = 0.01, the
    /// seven-point grid from 1 down to 0.001, 10 seeds, 40 epochs.
    pub fn new(source: DataSource) -> Self {
        ExperimentConfig {
            source,
            lambda: 0.01,
            methods: vec![
                MethodSpec::new(Method::AdjSarah),
                MethodSpec::new(Method::RrSarah),
                MethodSpec::new(Method::RrSvrg),
            ],
            grid: vec![1.0, 0.5, 0.1, 0.05, 0.01, 0.005, 0.001],
            seeds: (0..10).collect(),
            epochs: 40,
            base_seed: 42,
            normalize: false,
            reference: true,
            jobs: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("learning-rate grid is empty".into()));
        }
        if self.grid.iter().any(|lr| !lr.is_finite() || *lr <= 0.0) {
            return Err(Error::InvalidConfig(
                "learning rates must be finite and positive".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seed list is empty".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epoch count must be ≥ 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("method list is empty".into()));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidConfig("jobs must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// A solved (or best-effort) minimizer for loss-gap reporting.
#[derive(Clone, Debug)]
pub struct ReferenceSolution {
    pub w_star: ParameterVector,
    pub p_star: f64,
    /// Final ‖∇P‖² at `w_star`.
    pub residual: f64,
    /// Whether the residual met the 1e-24 target within the iteration
    /// cap. An unconverged reference withholds `loss_gap` columns.
    pub converged: bool,
}

const REFERENCE_TOL: f64 = 1e-24;
const REFERENCE_CAP: usize = 1_000_000;

/// Deterministic full-gradient descent at step 1/L with a periodic
/// step-doubling probe, run until ‖∇P‖² ≤ 1e-24 or the iteration cap.
/// Exhausting the cap flags the result as unconverged instead of failing.
pub fn solve_reference(obj: &dyn FiniteSumObjective) -> Result<ReferenceSolution> {
    solve_reference_capped(obj, REFERENCE_CAP)
}

fn solve_reference_capped(
    obj: &dyn FiniteSumObjective,
    cap: usize,
) -> Result<ReferenceSolution> {
    if obj.strong_convexity() <= 0.0 {
        return Err(Error::Precondition(
            "reference solving needs a strongly convex objective (λ > 0)".into(),
        ));
    }
    let d = obj.dim();
    let eta = 1.0 / obj.lipschitz();
    let mut w = ParameterVector::zeros(d);
    let mut grad = ParameterVector::zeros(d);
    for iter in 0..cap {
        obj.full_gradient_into(&w, &mut grad)?;
        let residual = grad.norm_sq()?;
        if residual <= REFERENCE_TOL {
            return Ok(ReferenceSolution {
                p_star: obj.value(&w)?,
                w_star: w,
                residual,
                converged: true,
            });
        }
        // every 64th iteration, probe a doubled step and keep it when it
        // reaches a lower value than the plain step would
        if iter % 64 == 63 {
            let mut probe = w.clone();
            crate::numerics::axpy_in_place(-2.0 * eta, grad.as_slice(), probe.as_mut_slice());
            let mut plain = w;
            crate::numerics::axpy_in_place(-eta, grad.as_slice(), plain.as_mut_slice());
            w = if obj.value(&probe)? < obj.value(&plain)? {
                probe
            } else {
                plain
            };
        } else {
            crate::numerics::axpy_in_place(-eta, grad.as_slice(), w.as_mut_slice());
        }
    }
    obj.full_gradient_into(&w, &mut grad)?;
    Ok(ReferenceSolution {
        p_star: obj.value(&w)?,
        residual: grad.norm_sq()?,
        w_star: w,
        converged: false,
    })
}

/// One emitted CSV record.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub method: String,
    pub dataset: String,
    pub lr: f64,
    pub seed: u64,
    pub epoch: usize,
    pub grad_sq_norm: f64,
    /// Empty in the CSV when no converged reference was available.
    pub loss_gap: Option<f64>,
    pub grad_evals: u64,
    pub wall_ms: f64,
}

/// Seed-aggregated metrics at one epoch of one (method, lr) cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregatePoint {
    pub epoch: usize,
    pub mean_grad_sq: f64,
    /// 95% normal-approximation confidence half-width.
    pub ci_grad_sq: f64,
    pub mean_loss_gap: Option<f64>,
    pub ci_loss_gap: Option<f64>,
}

/// One (method, lr) grid cell after aggregation.
#[derive(Clone, Debug)]
pub struct GridCell {
    pub method: Method,
    pub lr: f64,
    pub completed_seeds: usize,
    pub diverged_seeds: usize,
    /// Per-epoch aggregates over the completed seeds; empty when every
    /// seed diverged.
    pub per_epoch: Vec<AggregatePoint>,
}

/// Grid-search outcome for one method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    /// Learning rate minimizing final-epoch mean grad_sq_norm among
    /// cells where every seed completed; `None` when the method failed.
    pub best_lr: Option<f64>,
    pub final_mean_grad_sq: Option<f64>,
    /// True when no learning rate completed on all seeds.
    pub failed: bool,
}

/// Everything a sweep produces: raw rows, per-cell aggregates, and
/// per-method grid-search selections.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub dataset_label: String,
    pub rows: Vec<CsvRow>,
    pub cells: Vec<GridCell>,
    pub summaries: Vec<MethodSummary>,
    pub reference: Option<ReferenceSolution>,
}

fn method_ordinal(method: Method) -> u64 {
    Method::ALL
        .iter()
        .position(|m| *m == method)
        .expect("every method is listed") as u64
}

/// The RNG stream seed of one cell, derived from content so that
/// reordering the grid or method list never changes a run.
fn cell_seed(base_seed: u64, method: Method, lr: f64, seed_tag: u64) -> u64 {
    let a = derive_seed(base_seed, method_ordinal(method));
    let b = derive_seed(a, lr.to_bits());
    derive_seed(b, seed_tag)
}

struct TaskSpec {
    method_idx: usize,
    lr: f64,
    seed_tag: u64,
}

enum TaskOutcome {
    Completed(RunTrace),
    Diverged,
}

fn run_task(
    obj: &dyn FiniteSumObjective,
    cfg: &ExperimentConfig,
    spec: &MethodSpec,
    task: &TaskSpec,
    reference_value: Option<f64>,
) -> Result<TaskOutcome> {
    let mut run_cfg = OptimizerConfig::new(spec.method);
    run_cfg.eta = Some(task.lr);
    run_cfg.m = spec.m;
    run_cfg.epochs = cfg.epochs;
    run_cfg.scheme = spec.scheme;
    run_cfg.seed = cell_seed(cfg.base_seed, spec.method, task.lr, task.seed_tag);
    run_cfg.reference_value = reference_value;
    run_cfg.track_loss = reference_value.is_some();
    let w0 = ParameterVector::zeros(obj.dim());
    match run(obj, &w0, &run_cfg) {
        Ok(trace) => Ok(TaskOutcome::Completed(trace)),
        Err(Error::Divergence { .. }) => Ok(TaskOutcome::Diverged),
        Err(e) => Err(e),
    }
}

/// Runs the whole sweep described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;

    let dataset = match &cfg.source {
        DataSource::Path(path) => parse_libsvm_path(path, None)?,
        DataSource::SyntheticBlobs { n, d, margin, seed } => {
            generate_separable_blobs(*n, *d, *margin, *seed)?
        }
    };
    let dataset = if cfg.normalize {
        dataset.normalized()
    } else {
        dataset
    };
    let obj = LogisticL2::new(Arc::new(dataset), cfg.lambda)?;

    let reference = if cfg.reference {
        Some(solve_reference(&obj)?)
    } else {
        None
    };
    let reference_value = reference
        .as_ref()
        .filter(|r| r.converged)
        .map(|r| r.p_star);

    // one task per (method, lr, seed) cell
    let mut tasks = Vec::new();
    for (method_idx, _) in cfg.methods.iter().enumerate() {
        for &lr in &cfg.grid {
            for &seed_tag in &cfg.seeds {
                tasks.push(TaskSpec {
                    method_idx,
                    lr,
                    seed_tag,
                });
            }
        }
    }

    let results: Vec<Mutex<Option<Result<TaskOutcome>>>> =
        (0..tasks.len()).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.jobs.min(tasks.len()).max(1);
    if workers == 1 {
        for (i, task) in tasks.iter().enumerate() {
            let spec = &cfg.methods[task.method_idx];
            *results[i].lock().unwrap() = Some(run_task(&obj, cfg, spec, task, reference_value));
        }
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tasks.len() {
                        break;
                    }
                    let task = &tasks[i];
                    let spec = &cfg.methods[task.method_idx];
                    let outcome = run_task(&obj, cfg, spec, task, reference_value);
                    *results[i].lock().unwrap() = Some(outcome);
                });
            }
        });
    }

    // deterministic merge in task order
    let dataset_label = cfg.source.label();
    let mut rows = Vec::new();
    let mut traces: Vec<Option<RunTrace>> = Vec::with_capacity(tasks.len());
    for slot in results {
        let outcome = slot
            .into_inner()
            .expect("poisoned task slot")
            .expect("every task slot is filled");
        match outcome? {
            TaskOutcome::Completed(trace) => traces.push(Some(trace)),
            TaskOutcome::Diverged => traces.push(None),
        }
    }
    for (task, trace) in tasks.iter().zip(&traces) {
        let Some(trace) = trace else { continue };
        let spec = &cfg.methods[task.method_idx];
        for rec in trace.records() {
            rows.push(CsvRow {
                method: spec.method.label().to_string(),
                dataset: dataset_label.clone(),
                lr: task.lr,
                seed: task.seed_tag,
                epoch: rec.epoch,
                grad_sq_norm: rec.grad_sq_norm,
                loss_gap: rec.loss_gap,
                grad_evals: rec.grad_evals,
                wall_ms: rec.wall_ms,
            });
        }
    }
    sort_rows(&mut rows);

    // aggregate each (method, lr) cell over its completed seeds
    let mut cells = Vec::new();
    for (method_idx, spec) in cfg.methods.iter().enumerate() {
        for &lr in &cfg.grid {
            let cell_traces: Vec<&RunTrace> = tasks
                .iter()
                .zip(&traces)
                .filter(|(t, _)| t.method_idx == method_idx && t.lr == lr)
                .filter_map(|(_, tr)| tr.as_ref())
                .collect();
            let diverged = cfg.seeds.len() - cell_traces.len();
            cells.push(GridCell {
                method: spec.method,
                lr,
                completed_seeds: cell_traces.len(),
                diverged_seeds: diverged,
                per_epoch: aggregate_epochs(&cell_traces, cfg.epochs),
            });
        }
    }

    // grid search: smallest final-epoch mean among fully completed cells.
    // Cells are laid out one contiguous block of grid.len() per config
    // entry, so a method listed twice gets two independent summaries.
    let mut summaries = Vec::new();
    for (entry_idx, spec) in cfg.methods.iter().enumerate() {
        let block = &cells[entry_idx * cfg.grid.len()..(entry_idx + 1) * cfg.grid.len()];
        let mut best: Option<(f64, f64)> = None;
        for cell in block.iter().filter(|c| c.diverged_seeds == 0) {
            let final_mean = cell
                .per_epoch
                .last()
                .map(|p| p.mean_grad_sq)
                .unwrap_or(f64::INFINITY);
            let better = match best {
                None => true,
                Some((_, incumbent)) => final_mean < incumbent,
            };
            if better {
                best = Some((cell.lr, final_mean));
            }
        }
        summaries.push(MethodSummary {
            method: spec.method,
            best_lr: best.map(|(lr, _)| lr),
            final_mean_grad_sq: best.map(|(_, v)| v),
            failed: best.is_none(),
        });
    }

    Ok(ExperimentOutcome {
        dataset_label,
        rows,
        cells,
        summaries,
        reference,
    })
}

fn sort_rows(rows: &mut [CsvRow]) {
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.lr.total_cmp(&b.lr))
            .then(a.seed.cmp(&b.seed))
            .then(a.epoch.cmp(&b.epoch))
    });
}

fn aggregate_epochs(traces: &[&RunTrace], epochs: usize) -> Vec<AggregatePoint> {
    if traces.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(epochs + 1);
    for s in 0..=epochs {
        let grad: Vec<f64> = traces.iter().map(|t| t.records()[s].grad_sq_norm).collect();
        let gaps: Option<Vec<f64>> = traces
            .iter()
            .map(|t| t.records()[s].loss_gap)
            .collect();
        let (mean_grad_sq, ci_grad_sq) = mean_and_ci(&grad);
        let (mean_loss_gap, ci_loss_gap) = match gaps {
            Some(g) => {
                let (m, c) = mean_and_ci(&g);
                (Some(m), Some(c))
            }
            None => (None, None),
        };
        out.push(AggregatePoint {
            epoch: s,
            mean_grad_sq,
            ci_grad_sq,
            mean_loss_gap,
            ci_loss_gap,
        });
    }
    out
}

/// Mean and 95% normal-approximation confidence half-width
/// z·sd/√k over one epoch's per-seed values.
fn mean_and_ci(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, Z_95 * (var / k).sqrt())
}

pub const CSV_HEADER: &str = "method,dataset,lr,seed,epoch,grad_sq_norm,loss_gap,grad_evals,wall_ms";

/// Renders rows to CSV text: the fixed header, then one line per record
/// in the given order. Floats use shortest round-trip formatting; an
/// absent loss gap is an empty field. Rejects an empty table rather than
/// emit a header-only file.
pub fn write_csv(rows: &[CsvRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Precondition(
            "refusing to emit a header-only CSV for an empty table".into(),
        ));
    }
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let gap = r.loss_gap.map(|g| g.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.dataset,
            r.lr,
            r.seed,
            r.epoch,
            r.grad_sq_norm,
            gap,
            r.grad_evals,
            r.wall_ms
        ));
    }
    Ok(out)
}

/// Writes [`write_csv`] output to a file, attaching the path to any
/// I/O failure.
pub fn write_csv_path(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let text = write_csv(rows)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses CSV text produced by [`write_csv`] back into rows.
pub fn read_csv(text: &str) -> Result<Vec<CsvRow>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        origin: "csv".into(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(parse_err(1, format!("unexpected header '{header}'")));
        }
        None => return Err(parse_err(0, "empty input".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(parse_err(
                idx + 1,
                format!("expected 9 fields, got {}", fields.len()),
            ));
        }
        let field = |k: usize, name: &str| -> Result<f64> {
            fields[k]
                .parse()
                .map_err(|_| parse_err(idx + 1, format!("unreadable {name} '{}'", fields[k])))
        };
        rows.push(CsvRow {
            method: fields[0].to_string(),
            dataset: fields[1].to_string(),
            lr: field(2, "lr")?,
            seed: fields[3]
                .parse()
                .map_err(|_| parse_err(idx + 1, format!("unreadable seed '{}'", fields[3])))?,
            epoch: fields[4]
                .parse()
                .map_err(|_| parse_err(idx + 1, format!("unreadable epoch '{}'", fields[4])))?,
            grad_sq_norm: field(5, "grad_sq_norm")?,
            loss_gap: if fields[6].is_empty() {
                None
            } else {
                Some(field(6, "loss_gap")?)
            },
            grad_evals: fields[7]
                .parse()
                .map_err(|_| parse_err(idx + 1, format!("unreadable grad_evals '{}'", fields[7])))?,
            wall_ms: field(8, "wall_ms")?,
        });
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Ok(rows)
}

/// Reads a CSV file produced by [`write_csv_path`].
pub fn read_csv_path(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::QuadraticSum;

    fn blobs_source(n: usize, d: usize) -> DataSource {
        DataSource::SyntheticBlobs {
            n,
            d,
            margin: 1.2,
            seed: 9,
        }
    }

    fn small_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(blobs_source(48, 4));
        cfg.grid = vec![0.5, 0.1];
        cfg.seeds = vec![0, 1, 2];
        cfg.epochs = 5;
        cfg
    }

    #[test]
    fn reference_matches_quadratic_closed_form() {
        let obj = QuadraticSum::sample(10, 4, 31).unwrap();
        let reference = solve_reference(&obj).unwrap();
        assert!(reference.converged);
        assert!(reference.residual <= 1e-24);
        for (a, b) in reference
            .w_star
            .as_slice()
            .iter()
            .zip(obj.w_star().as_slice())
        {
            assert!((a - b).abs() <= 1e-10);
        }
        assert!((reference.p_star - obj.min_value()).abs() <= 1e-12);
    }

    #[test]
    fn reference_requires_strong_convexity() {
        let ds = generate_separable_blobs(12, 3, 1.0, 4).unwrap();
        let obj = LogisticL2::new(Arc::new(ds), 0.0).unwrap();
        assert!(matches!(
            solve_reference(&obj),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn reference_cap_flags_instead_of_failing() {
        let obj = QuadraticSum::sample(10, 4, 31).unwrap();
        let reference = solve_reference_capped(&obj, 3).unwrap();
        assert!(!reference.converged);
        assert!(reference.residual > 1e-24);
    }

    #[test]
    fn reference_on_blobs_logistic_converges() {
        let ds = generate_separable_blobs(64, 5, 1.2, 7).unwrap();
        let obj = LogisticL2::new(Arc::new(ds), 0.01).unwrap();
        let reference = solve_reference(&obj).unwrap();
        assert!(reference.converged);
        assert!(reference.residual <= 1e-24);
    }

    #[test]
    fn degenerate_single_cell_is_the_trace_verbatim() {
        let mut cfg = small_config();
        cfg.methods = vec![MethodSpec::new(Method::AdjSarah)];
        cfg.grid = vec![0.2];
        cfg.seeds = vec![5];
        let outcome = run_experiment(&cfg).unwrap();

        // reproduce the run directly with the same derived stream
        let ds = generate_separable_blobs(48, 4, 1.2, 9).unwrap();
        let obj = LogisticL2::new(Arc::new(ds), cfg.lambda).unwrap();
        let reference = solve_reference(&obj).unwrap();
        let mut run_cfg = OptimizerConfig::new(Method::AdjSarah);
        run_cfg.eta = Some(0.2);
        run_cfg.epochs = cfg.epochs;
        run_cfg.seed = cell_seed(cfg.base_seed, Method::AdjSarah, 0.2, 5);
        run_cfg.reference_value = Some(reference.p_star);
        let trace = run(&obj, &ParameterVector::zeros(4), &run_cfg).unwrap();

        assert_eq!(outcome.rows.len(), cfg.epochs + 1);
        for (row, rec) in outcome.rows.iter().zip(trace.records()) {
            assert_eq!(row.epoch, rec.epoch);
            assert_eq!(row.grad_sq_norm, rec.grad_sq_norm);
            assert_eq!(row.loss_gap, rec.loss_gap);
            assert_eq!(row.grad_evals, rec.grad_evals);
            assert_eq!(row.seed, 5);
        }
        // degenerate aggregation: the cell mean IS the trace, zero width
        let cell = &outcome.cells[0];
        for (p, rec) in cell.per_epoch.iter().zip(trace.records()) {
            assert_eq!(p.mean_grad_sq, rec.grad_sq_norm);
            assert_eq!(p.ci_grad_sq, 0.0);
        }
    }

    #[test]
    fn duplicate_seed_tags_have_zero_confidence_width() {
        let mut cfg = small_config();
        cfg.methods = vec![MethodSpec::new(Method::RrSarah)];
        cfg.grid = vec![0.3];
        cfg.seeds = vec![7, 7];
        let outcome = run_experiment(&cfg).unwrap();
        let cell = &outcome.cells[0];
        assert_eq!(cell.completed_seeds, 2);
        for p in &cell.per_epoch {
            assert_eq!(p.ci_grad_sq, 0.0);
            assert_eq!(p.ci_loss_gap, Some(0.0));
        }
    }

    #[test]
    fn vr_methods_reach_target_on_blobs_defaults() {
        let mut cfg = ExperimentConfig::new(blobs_source(128, 5));
        cfg.epochs = 100;
        let outcome = run_experiment(&cfg).unwrap();
        for summary in &outcome.summaries {
            assert!(!summary.failed, "{:?}", summary.method);
            assert!(
                summary.final_mean_grad_sq.unwrap() <= 1e-10,
                "{:?} best lr {:?} reached only {:e}",
                summary.method,
                summary.best_lr,
                summary.final_mean_grad_sq.unwrap()
            );
        }
    }

    #[test]
    fn rerun_is_byte_identical() {
        let cfg = small_config();
        let a = write_csv(&run_experiment(&cfg).unwrap().rows).unwrap();
        let b = write_csv(&run_experiment(&cfg).unwrap().rows).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
    }

    #[test]
    fn grid_or_seed_reordering_preserves_cell_streams() {
        let mut cfg = small_config();
        cfg.methods = vec![MethodSpec::new(Method::AdjSarah)];
        let outcome_a = run_experiment(&cfg).unwrap();
        cfg.grid.reverse();
        cfg.seeds.reverse();
        let outcome_b = run_experiment(&cfg).unwrap();
        // rows are sorted by content, and streams are content-derived, so
        // the emitted CSV is identical despite the reordered config
        assert_eq!(
            write_csv(&outcome_a.rows).unwrap(),
            write_csv(&outcome_b.rows).unwrap()
        );
    }

    #[test]
    fn grad_evals_follow_the_cost_contract() {
        let mut cfg = small_config();
        cfg.methods = vec![
            MethodSpec::new(Method::AdjSarah),
            MethodSpec::new(Method::RrSarah),
            MethodSpec::new(Method::RrSvrg),
            MethodSpec::new(Method::Sgd),
            MethodSpec::new(Method::Gd),
        ];
        cfg.grid = vec![0.05];
        cfg.seeds = vec![0];
        let mut inexact = MethodSpec::new(Method::AdjSarah);
        inexact.m = Some(12);
        cfg.methods.push(inexact);
        let outcome = run_experiment(&cfg).unwrap();
        let n = 48u64;
        for row in &outcome.rows {
            let e = row.epoch as u64;
            // the duplicated adj-sarah entry surfaces as the same label,
            // so infer the inexact runs by their eval totals
            let expected_exact = match row.method.as_str() {
                "adj-sarah" => 3 * n * e,
                "rr-sarah" | "rr-svrg" => 3 * n * e,
                "sgd" | "gd" => n * e,
                other => panic!("unexpected method {other}"),
            };
            let expected_inexact = 3 * 12 * e;
            assert!(
                row.grad_evals == expected_exact || row.grad_evals == expected_inexact,
                "{} epoch {}: {}",
                row.method,
                row.epoch,
                row.grad_evals
            );
        }
    }

    #[test]
    fn aggregation_matches_naive_recomputation() {
        let cfg = small_config();
        let outcome = run_experiment(&cfg).unwrap();
        for cell in &outcome.cells {
            let per_seed: Vec<Vec<f64>> = cfg
                .seeds
                .iter()
                .map(|&tag| {
                    outcome
                        .rows
                        .iter()
                        .filter(|r| {
                            r.method == cell.method.label()
                                && r.lr == cell.lr
                                && r.seed == tag
                        })
                        .map(|r| r.grad_sq_norm)
                        .collect()
                })
                .collect();
            for (s, point) in cell.per_epoch.iter().enumerate() {
                let naive: f64 =
                    per_seed.iter().map(|t| t[s]).sum::<f64>() / per_seed.len() as f64;
                assert_eq!(point.mean_grad_sq, naive);
            }
        }
    }

    #[test]
    fn oversized_rate_marks_method_failed_and_run_continues() {
        let mut cfg = small_config();
        cfg.methods = vec![
            MethodSpec::new(Method::Sgd),
            MethodSpec::new(Method::AdjSarah),
        ];
        cfg.grid = vec![1e12];
        cfg.epochs = 3;
        let outcome = run_experiment(&cfg).unwrap();
        let sgd = outcome
            .summaries
            .iter()
            .find(|s| s.method == Method::Sgd)
            .unwrap();
        let adj = outcome
            .summaries
            .iter()
            .find(|s| s.method == Method::AdjSarah)
            .unwrap();
        assert!(sgd.failed && adj.failed);
        for cell in &outcome.cells {
            assert_eq!(cell.completed_seeds, 0);
            assert_eq!(cell.diverged_seeds, cfg.seeds.len());
        }
        assert!(outcome.rows.is_empty());
    }

    #[test]
    fn mixed_grid_excludes_diverging_rate_from_selection() {
        let mut cfg = small_config();
        cfg.methods = vec![MethodSpec::new(Method::AdjSarah)];
        cfg.grid = vec![1e12, 0.2];
        cfg.epochs = 3;
        let outcome = run_experiment(&cfg).unwrap();
        let summary = &outcome.summaries[0];
        assert!(!summary.failed);
        assert_eq!(summary.best_lr, Some(0.2));
        // rows exist only for the surviving rate
        assert!(outcome.rows.iter().all(|r| r.lr == 0.2));
    }

    #[test]
    fn reference_off_withholds_loss_gap() {
        let mut cfg = small_config();
        cfg.reference = false;
        let outcome = run_experiment(&cfg).unwrap();
        assert!(outcome.reference.is_none());
        assert!(outcome.rows.iter().all(|r| r.loss_gap.is_none()));
        let text = write_csv(&outcome.rows).unwrap();
        let second_line = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = second_line.split(',').collect();
        assert_eq!(fields[6], "");
    }

    #[test]
    fn parallel_jobs_match_serial_results() {
        let mut cfg = small_config();
        cfg.jobs = 4;
        let parallel = run_experiment(&cfg).unwrap();
        cfg.jobs = 1;
        let serial = run_experiment(&cfg).unwrap();
        assert_eq!(
            write_csv(&parallel.rows).unwrap(),
            write_csv(&serial.rows).unwrap()
        );
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let cfg = small_config();
        let outcome = run_experiment(&cfg).unwrap();
        let text = write_csv(&outcome.rows).unwrap();
        let parsed = read_csv(&text).unwrap();
        assert_eq!(parsed, outcome.rows);
        assert_eq!(write_csv(&parsed).unwrap(), text);
    }

    #[test]
    fn csv_guards() {
        assert!(matches!(write_csv(&[]), Err(Error::Precondition(_))));
        let row = CsvRow {
            method: "gd".into(),
            dataset: "t".into(),
            lr: 0.1,
            seed: 0,
            epoch: 0,
            grad_sq_norm: 1.0,
            loss_gap: None,
            grad_evals: 0,
            wall_ms: 0.0,
        };
        let text = write_csv(&[row]).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(matches!(
            read_csv("method,bogus\n1,2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(read_csv(""), Err(Error::Parse { .. })));
        assert!(matches!(
            read_csv(CSV_HEADER),
            Err(Error::Parse { .. })
        ));
        let bad = format!("{CSV_HEADER}\ngd,t,0.1,0,0,1.0,,0\n");
        assert!(matches!(read_csv(&bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn config_validation_rejects_bad_inputs() {
        let base = small_config();
        let mut cfg = base.clone();
        cfg.grid.clear();
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = base.clone();
        cfg.grid = vec![-0.1];
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = base.clone();
        cfg.seeds.clear();
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = base.clone();
        cfg.epochs = 0;
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = base.clone();
        cfg.methods.clear();
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = base.clone();
        cfg.lambda = f64::NAN;
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = base;
        cfg.jobs = 0;
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn missing_dataset_file_reports_path() {
        let mut cfg = small_config();
        cfg.source = DataSource::Path(PathBuf::from("/nonexistent/w8a"));
        match run_experiment(&cfg) {
            Err(Error::Io { path, .. }) => {
                assert!(path.display().to_string().contains("nonexistent"))
            }
            other => panic!("expected I/O error, got {other:?}"),
        }
    }

    #[test]
    fn source_labels() {
        assert_eq!(blobs_source(10, 3).label(), "blobs-n10-d3");
        assert_eq!(
            DataSource::Path(PathBuf::from("/data/w8a.gz")).label(),
            "w8a.gz"
        );
    }
}
