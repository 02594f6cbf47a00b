//! Command-line entry points: single runs, grid experiments, the
//! verification suite, synthetic data generation, and dataset
//! inspection.
//!
//! Machine-readable output (CSV tables, key=value reports) goes to
//! standard output; progress and summaries go to standard error. Exit
//! codes: 0 success, 1 a verification check failed, 2 usage or
//! configuration problems, 3 I/O failures, 4 divergence.
//!
//! Every flag doubles as a key in an optional `--config` file of flat
//! `key=value` lines (UTF-8, `#` starts a comment, last duplicate
//! wins); explicit flags override file values, which override the
//! documented defaults.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Arg, ArgMatches, Command};

use crate::analysis::run_assumption_suite;
use crate::certify::{run_certification, CertConfig};
use crate::dataset::{generate_separable_blobs, parse_libsvm_path, write_libsvm, Dataset};
use crate::error::Error;
use crate::harness::{
    run_experiment, solve_reference, write_csv, CsvRow, DataSource, ExperimentConfig, MethodSpec,
};
use crate::numerics::ParameterVector;
use crate::objective::{FiniteSumObjective, LogisticL2, QuadraticSum, SigmoidSquared};
use crate::optimizers::{run, Method, OptimizerConfig};
use crate::shuffling::{derive_seed, SchemeKind};

/// A terminal failure: the message is printed to stderr and the code
/// becomes the process exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn io_failure(path: impl std::fmt::Display, e: std::io::Error) -> Failure {
    Failure {
        code: 3,
        message: format!("{path}: {e}"),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::Io { .. } | Error::Parse { .. } => 3,
            Error::Divergence { .. } => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn arg(name: &'static str, value: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name(value).help(help)
}

/// A boolean option: bare `--name` means true, `--name=false` switches
/// it off (so a config-file `name=true` stays overridable).
fn switch(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_name("BOOL")
        .num_args(0..=1)
        .default_missing_value("true")
        .require_equals(true)
        .help(help)
}

fn config_arg() -> Arg {
    arg(
        "config",
        "FILE",
        "Flat key=value config file; explicit flags override its keys",
    )
}

fn seed_arg(help: &'static str) -> Arg {
    arg("seed", "U64", help)
}

fn dataset_arg(help: &'static str) -> Arg {
    arg("dataset", "SPEC", help)
}

const DATASET_HELP: &str =
    "LIBSVM path (.gz ok) or blobs:n=<N>,d=<D>[,margin=<F>][,seed=<U64>] [default: blobs:n=128,d=5]";

fn build_command() -> Command {
    Command::new("shufflegrad")
        .about("Shuffling-based variance-reduced finite-sum optimization")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("run")
                .about("Execute one (method, lr, seed) run and print its trace as CSV")
                .arg(dataset_arg(DATASET_HELP))
                .arg(arg("lambda", "F64", "l2 regularization weight [default: 0.01]"))
                .arg(arg(
                    "method",
                    "NAME",
                    "adj-sarah, rr-sarah, rr-svrg, sgd, or gd [default: adj-sarah]",
                ))
                .arg(arg(
                    "lr",
                    "F64",
                    "Learning rate [default: the method's recommended step]",
                ))
                .arg(arg(
                    "m",
                    "USIZE",
                    "Inner steps per epoch for adj-sarah; m < n needs scheme rr [default: n]",
                ))
                .arg(arg("scheme", "NAME", "cyclic, so, or rr [default: rr]"))
                .arg(arg("epochs", "USIZE", "Epochs to run [default: 40]"))
                .arg(switch("normalize", "Scale every example to unit norm first"))
                .arg(switch(
                    "record-inner",
                    "Instrument the inner recursion and report identity residuals on stderr",
                ))
                .arg(switch(
                    "reference",
                    "Solve for the minimizer first so the trace includes loss gaps",
                ))
                .arg(arg("out", "FILE", "Write the CSV here instead of stdout"))
                .arg(seed_arg("RNG seed for the run [default: 42]"))
                .arg(config_arg()),
        )
        .subcommand(
            Command::new("experiment")
                .about("Sweep methods over a learning-rate grid and seeds; write CSV")
                .arg(dataset_arg(DATASET_HELP))
                .arg(arg("lambda", "F64", "l2 regularization weight [default: 0.01]"))
                .arg(arg(
                    "method",
                    "LIST",
                    "Comma-separated methods [default: adj-sarah,rr-sarah,rr-svrg]",
                ))
                .arg(arg(
                    "grid",
                    "LIST",
                    "Comma-separated learning rates [default: 1,0.5,0.1,0.05,0.01,0.005,0.001]",
                ))
                .arg(arg(
                    "m",
                    "USIZE",
                    "Inner steps per epoch for adj-sarah entries; baselines always run full passes",
                ))
                .arg(arg("scheme", "NAME", "cyclic, so, or rr [default: rr]"))
                .arg(arg("epochs", "USIZE", "Epochs per run [default: 40]"))
                .arg(arg(
                    "seeds",
                    "N|LIST",
                    "Seed count N (tags 0..N) or comma-separated tags [default: 10]",
                ))
                .arg(switch("normalize", "Scale every example to unit norm first"))
                .arg(switch(
                    "reference",
                    "Solve for the minimizer and emit loss_gap columns [default: true]",
                ))
                .arg(arg(
                    "out",
                    "FILE",
                    "CSV path; a certification report lands next to it [default: stdout]",
                ))
                .arg(arg("jobs", "N", "Concurrent (method, lr, seed) cells [default: 1]"))
                .arg(seed_arg("Base seed for per-cell stream derivation [default: 42]"))
                .arg(config_arg()),
        )
        .subcommand(
            Command::new("verify")
                .about("Run the full lemma/theorem certification and assumption suites")
                .arg(arg(
                    "seeds",
                    "N",
                    "Monte-Carlo seeds for expectation-level checks [default: 200]",
                ))
                .arg(arg("out", "FILE", "Also write the report here"))
                .arg(seed_arg("Base seed for the certification fixtures [default: 42]"))
                .arg(config_arg()),
        )
        .subcommand(
            Command::new("gen-data")
                .about("Write a synthetic dataset in LIBSVM format (.gz compresses)")
                .arg(dataset_arg(
                    "blobs:n=<N>,d=<D>[,margin=<F>][,seed=<U64>] spec to generate",
                ))
                .arg(arg("out", "FILE", "Output path; a .gz suffix gzip-compresses"))
                .arg(seed_arg("Generator seed when the spec has no seed= key [default: 42]"))
                .arg(config_arg()),
        )
        .subcommand(
            Command::new("inspect")
                .about("Print dataset statistics and the derived constants L, mu")
                .arg(dataset_arg("LIBSVM path (.gz ok) or blobs:n=<N>,d=<D>[,...] spec"))
                .arg(arg("lambda", "F64", "l2 weight the constants assume [default: 0.01]"))
                .arg(switch("normalize", "Inspect the unit-norm copy instead"))
                .arg(seed_arg("Generator seed for blobs specs [default: 42]"))
                .arg(config_arg()),
        )
}

/// Parses and executes `argv`, returning the process exit status.
pub fn dispatch(argv: &[String]) -> i32 {
    if argv.is_empty() {
        eprintln!("usage: shufflegrad <command> --help");
        return 2;
    }
    let matches = match build_command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let outcome = match matches.subcommand() {
        Some(("run", sub)) => cmd_run(sub),
        Some(("experiment", sub)) => cmd_experiment(sub),
        Some(("verify", sub)) => cmd_verify(sub),
        Some(("gen-data", sub)) => cmd_gen_data(sub),
        Some(("inspect", sub)) => cmd_inspect(sub),
        _ => unreachable!("clap enforces a known subcommand"),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Flag lookup with config-file fallback: explicit CLI values win, then
/// the `--config` file, then each command's documented default.
struct Resolver<'a> {
    matches: &'a ArgMatches,
    config: HashMap<String, String>,
}

impl<'a> Resolver<'a> {
    fn load(matches: &'a ArgMatches, allowed: &[&str]) -> CliResult<Self> {
        let mut config = HashMap::new();
        if let Some(path) = matches.get_one::<String>("config") {
            let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            config = parse_config(&text, path, allowed)?;
        }
        Ok(Resolver { matches, config })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.matches
            .get_one::<String>(key)
            .map(String::as_str)
            .or_else(|| self.config.get(key).map(String::as_str))
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(text) => text
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("invalid value '{text}' for --{key}"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn flag(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => Err(usage(format!(
                "--{key} takes true or false, got '{other}'"
            ))),
        }
    }
}

fn parse_config(
    text: &str,
    origin: &str,
    allowed: &[&str],
) -> CliResult<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!(
                "{origin} line {}: expected key=value, got '{line}'",
                idx + 1
            )));
        };
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(usage(format!(
                "{origin} line {}: unknown key '{key}' (valid: {})",
                idx + 1,
                allowed.join(", ")
            )));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// `blobs:` specs become synthetic sources; anything else is a path.
/// A spec without `seed=` uses `default_seed` (the `--seed` value).
fn parse_data_source(spec: &str, default_seed: u64) -> CliResult<DataSource> {
    let Some(rest) = spec.strip_prefix("blobs:") else {
        return Ok(DataSource::Path(PathBuf::from(spec)));
    };
    let mut n = None;
    let mut d = None;
    let mut margin = 1.2;
    let mut seed = default_seed;
    for part in rest.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some((key, value)) = part.split_once('=') else {
            return Err(usage(format!(
                "blobs spec part '{part}' is not key=value"
            )));
        };
        let bad = || usage(format!("invalid blobs value '{value}' for {key}"));
        match key.trim() {
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
            "d" => d = Some(value.parse::<usize>().map_err(|_| bad())?),
            "margin" => margin = value.parse().map_err(|_| bad())?,
            "seed" => seed = value.parse().map_err(|_| bad())?,
            other => {
                return Err(usage(format!(
                    "unknown blobs key '{other}' (valid: n, d, margin, seed)"
                )))
            }
        }
    }
    let n = n.ok_or_else(|| usage("blobs spec needs n=<N>"))?;
    let d = d.ok_or_else(|| usage("blobs spec needs d=<D>"))?;
    Ok(DataSource::SyntheticBlobs { n, d, margin, seed })
}

fn load_dataset(source: &DataSource, normalize: bool) -> CliResult<Dataset> {
    let data = match source {
        DataSource::Path(path) => parse_libsvm_path(path, None)?,
        DataSource::SyntheticBlobs { n, d, margin, seed } => {
            generate_separable_blobs(*n, *d, *margin, *seed)?
        }
    };
    Ok(if normalize { data.normalized() } else { data })
}

fn emit(out: Option<&str>, text: &str) -> CliResult<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e)),
    }
}

/// Seed tags: a bare count N expands to 0..N; a comma-separated list
/// (`0,1,2` — or `7,` for a single explicit tag) is taken verbatim.
fn parse_seed_tags(text: &str) -> CliResult<Vec<u64>> {
    let bad = |part: &str| usage(format!("invalid seed value '{part}' in --seeds"));
    if text.contains(',') {
        let tags: Vec<u64> = text
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(|_| bad(p)))
            .collect::<CliResult<_>>()?;
        if tags.is_empty() {
            return Err(usage("--seeds list is empty"));
        }
        Ok(tags)
    } else {
        let count: u64 = text.trim().parse().map_err(|_| bad(text))?;
        if count == 0 {
            return Err(usage("--seeds count must be ≥ 1"));
        }
        Ok((0..count).collect())
    }
}

fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| usage(format!("invalid learning rate '{p}' in --grid")))
        })
        .collect()
}

/// Comma-separated method labels. The `--m` override applies to
/// adj-sarah entries only; the baselines always run full passes.
fn parse_method_list(
    text: &str,
    m: Option<usize>,
    scheme: SchemeKind,
) -> CliResult<Vec<MethodSpec>> {
    let mut methods = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let method = Method::parse(part)?;
        methods.push(MethodSpec {
            method,
            m: if method == Method::AdjSarah { m } else { None },
            scheme,
        });
    }
    if methods.is_empty() {
        return Err(usage("--method list is empty"));
    }
    Ok(methods)
}

fn cmd_run(matches: &ArgMatches) -> CliResult<i32> {
    const KEYS: &[&str] = &[
        "dataset",
        "lambda",
        "method",
        "lr",
        "m",
        "scheme",
        "epochs",
        "normalize",
        "record-inner",
        "reference",
        "out",
        "seed",
    ];
    let r = Resolver::load(matches, KEYS)?;
    let seed = r.get_or("seed", 42u64)?;
    let source = parse_data_source(r.raw("dataset").unwrap_or("blobs:n=128,d=5"), seed)?;
    let data = load_dataset(&source, r.flag("normalize", false)?)?;
    let obj = LogisticL2::new(Arc::new(data), r.get_or("lambda", 0.01)?)?;

    let method = match r.raw("method") {
        Some(text) => Method::parse(text)?,
        None => Method::AdjSarah,
    };
    let mut cfg = OptimizerConfig::new(method);
    cfg.eta = r.get("lr")?;
    cfg.m = r.get("m")?;
    cfg.epochs = r.get_or("epochs", 40usize)?;
    if let Some(text) = r.raw("scheme") {
        cfg.scheme = SchemeKind::parse(text)?;
    }
    cfg.seed = seed;
    cfg.record_inner = r.flag("record-inner", false)?;
    cfg.time_epochs = true;
    if r.flag("reference", false)? {
        let reference = solve_reference(&obj)?;
        if reference.converged {
            cfg.reference_value = Some(reference.p_star);
        } else {
            eprintln!(
                "reference solve stopped at residual {:e}; loss_gap withheld",
                reference.residual
            );
        }
    }

    let w0 = ParameterVector::zeros(obj.dim());
    let trace = run(&obj, &w0, &cfg)?;
    let label = source.label();
    let rows: Vec<CsvRow> = trace
        .records()
        .iter()
        .map(|rec| CsvRow {
            method: method.label().to_string(),
            dataset: label.clone(),
            lr: trace.resolved_eta(),
            seed,
            epoch: rec.epoch,
            grad_sq_norm: rec.grad_sq_norm,
            loss_gap: rec.loss_gap,
            grad_evals: rec.grad_evals,
            wall_ms: rec.wall_ms,
        })
        .collect();
    emit(r.raw("out"), &write_csv(&rows)?)?;

    if cfg.record_inner {
        for epoch in trace.instrumented() {
            let residual = crate::analysis::check_delta_identity_relative(epoch)?;
            let monotone = crate::analysis::check_v_monotone(epoch)?;
            eprintln!(
                "epoch {}: delta-identity residual {:e}, v-norms monotone: {}",
                epoch.epoch, residual, monotone.monotone
            );
        }
    }
    let last = trace.final_record();
    eprintln!(
        "{} on {}: lr {}, {} epochs, final grad_sq_norm {:e}, {} gradient evals",
        method.label(),
        label,
        trace.resolved_eta(),
        cfg.epochs,
        last.grad_sq_norm,
        last.grad_evals
    );
    Ok(0)
}

fn cmd_experiment(matches: &ArgMatches) -> CliResult<i32> {
    const KEYS: &[&str] = &[
        "dataset",
        "lambda",
        "method",
        "grid",
        "m",
        "scheme",
        "epochs",
        "seeds",
        "normalize",
        "reference",
        "out",
        "jobs",
        "seed",
    ];
    let r = Resolver::load(matches, KEYS)?;
    let seed = r.get_or("seed", 42u64)?;
    let source = parse_data_source(r.raw("dataset").unwrap_or("blobs:n=128,d=5"), seed)?;

    let mut cfg = ExperimentConfig::new(source);
    cfg.base_seed = seed;
    cfg.lambda = r.get_or("lambda", cfg.lambda)?;
    let scheme = match r.raw("scheme") {
        Some(text) => SchemeKind::parse(text)?,
        None => SchemeKind::RandomReshuffling,
    };
    let m: Option<usize> = r.get("m")?;
    cfg.methods = parse_method_list(
        r.raw("method").unwrap_or("adj-sarah,rr-sarah,rr-svrg"),
        m,
        scheme,
    )?;
    if let Some(text) = r.raw("grid") {
        cfg.grid = parse_grid(text)?;
    }
    if let Some(text) = r.raw("seeds") {
        cfg.seeds = parse_seed_tags(text)?;
    }
    cfg.epochs = r.get_or("epochs", cfg.epochs)?;
    cfg.normalize = r.flag("normalize", false)?;
    cfg.reference = r.flag("reference", true)?;
    cfg.jobs = r.get_or("jobs", 1usize)?;

    let outcome = run_experiment(&cfg)?;
    if let Some(reference) = &outcome.reference {
        if reference.converged {
            eprintln!("reference value {:e} (residual {:e})", reference.p_star, reference.residual);
        } else {
            eprintln!(
                "reference solve stopped at residual {:e}; loss_gap withheld",
                reference.residual
            );
        }
    }
    for cell in &outcome.cells {
        if cell.diverged_seeds > 0 {
            eprintln!(
                "{} at lr {}: {}/{} seeds diverged",
                cell.method.label(),
                cell.lr,
                cell.diverged_seeds,
                cell.diverged_seeds + cell.completed_seeds
            );
        }
    }
    for summary in &outcome.summaries {
        match (summary.best_lr, summary.final_mean_grad_sq) {
            (Some(lr), Some(value)) => eprintln!(
                "{}: best lr {} with final mean grad_sq_norm {:e}",
                summary.method.label(),
                lr,
                value
            ),
            _ => eprintln!(
                "{}: failed (no learning rate completed on every seed)",
                summary.method.label()
            ),
        }
    }
    if outcome.rows.is_empty() {
        return Err(Failure {
            code: 4,
            message: "every (method, lr, seed) cell diverged; nothing to write".into(),
        });
    }

    let text = write_csv(&outcome.rows)?;
    match r.raw("out") {
        None => print!("{text}"),
        Some(out) => {
            std::fs::write(out, &text).map_err(|e| io_failure(out, e))?;
            eprintln!("wrote {} rows to {out}", outcome.rows.len());
            let report = run_certification(&CertConfig {
                mc_seeds: 200,
                base_seed: seed,
            })?;
            let report_path = Path::new(out).with_extension("cert.txt");
            std::fs::write(&report_path, report.render())
                .map_err(|e| io_failure(report_path.display(), e))?;
            eprintln!(
                "certification report ({}) written to {}",
                if report.passed() { "all passed" } else { "FAILURES" },
                report_path.display()
            );
        }
    }
    Ok(0)
}

fn cmd_verify(matches: &ArgMatches) -> CliResult<i32> {
    const KEYS: &[&str] = &["seeds", "out", "seed"];
    let r = Resolver::load(matches, KEYS)?;
    let base_seed = r.get_or("seed", 42u64)?;
    let mc_seeds = r.get_or("seeds", 200usize)?;
    let report = run_certification(&CertConfig {
        mc_seeds,
        base_seed,
    })?;

    // gradient-correctness assumption suite over the three objective
    // families, 200 random trials per check
    let fixtures: Vec<(&str, Box<dyn FiniteSumObjective>)> = vec![
        (
            "logistic-l2",
            Box::new(LogisticL2::new(
                Arc::new(generate_separable_blobs(32, 5, 1.2, 11)?),
                0.05,
            )?),
        ),
        (
            "quadratic-sum",
            Box::new(QuadraticSum::sample(12, 4, 13)?),
        ),
        (
            "sigmoid-squared",
            Box::new(SigmoidSquared::new(Arc::new(generate_separable_blobs(
                24, 4, 1.0, 17,
            )?))?),
        ),
    ];
    let mut assumption_lines = Vec::new();
    let mut assumptions_passed = true;
    for (tag, (name, obj)) in fixtures.iter().enumerate() {
        let suite = run_assumption_suite(obj.as_ref(), 200, derive_seed(base_seed, 90 + tag as u64))?;
        for check in &suite.checks {
            assumptions_passed &= check.passed;
            assumption_lines.push((
                format!("{name}.{}", check.name.replace(' ', "-")),
                check.worst,
                check.threshold,
                check.passed,
            ));
        }
    }

    let mut text = report.render_text();
    text.push_str("\nassumption checks (200 trials each):\n");
    for (key, worst, threshold, passed) in &assumption_lines {
        text.push_str(&format!(
            "  {key}: worst {worst:e} vs threshold {threshold:e}  [{}]\n",
            if *passed { "pass" } else { "FAIL" }
        ));
    }
    text.push('\n');
    text.push_str(&report.render_key_value());
    for (key, _, _, passed) in &assumption_lines {
        text.push_str(&format!("assumption.{key}.passed={passed}\n"));
    }
    let overall = report.passed() && assumptions_passed;
    text.push_str(&format!("verify.overall.passed={overall}\n"));

    print!("{text}");
    if let Some(out) = r.raw("out") {
        std::fs::write(out, &text).map_err(|e| io_failure(out, e))?;
    }
    Ok(if overall { 0 } else { 1 })
}

fn cmd_gen_data(matches: &ArgMatches) -> CliResult<i32> {
    const KEYS: &[&str] = &["dataset", "out", "seed"];
    let r = Resolver::load(matches, KEYS)?;
    let seed = r.get_or("seed", 42u64)?;
    let spec = r
        .raw("dataset")
        .ok_or_else(|| usage("gen-data requires --dataset with a blobs: spec"))?;
    let source = parse_data_source(spec, seed)?;
    let DataSource::SyntheticBlobs { .. } = source else {
        return Err(usage(
            "gen-data writes synthetic data; --dataset must be a blobs: spec, not a path",
        ));
    };
    let data = load_dataset(&source, false)?;
    let out = r
        .raw("out")
        .ok_or_else(|| usage("gen-data requires --out"))?;
    write_dataset(&data, Path::new(out))?;
    eprintln!("wrote {} examples (d={}) to {out}", data.n(), data.dim());
    Ok(0)
}

fn write_dataset(data: &Dataset, path: &Path) -> CliResult<()> {
    let file = File::create(path).map_err(|e| io_failure(path.display(), e))?;
    let io_err = |e| io_failure(path.display(), e);
    if path.extension().is_some_and(|ext| ext == "gz") {
        let mut sink = flate2::write::GzEncoder::new(file, flate2::Compression::default());
        write_libsvm(data, &mut sink).map_err(io_err)?;
        sink.finish().map_err(io_err)?;
    } else {
        let mut sink = std::io::BufWriter::new(file);
        write_libsvm(data, &mut sink).map_err(io_err)?;
        sink.flush().map_err(io_err)?;
    }
    Ok(())
}

fn cmd_inspect(matches: &ArgMatches) -> CliResult<i32> {
    const KEYS: &[&str] = &["dataset", "lambda", "normalize", "seed"];
    let r = Resolver::load(matches, KEYS)?;
    let seed = r.get_or("seed", 42u64)?;
    let spec = r
        .raw("dataset")
        .ok_or_else(|| usage("inspect requires --dataset"))?;
    let source = parse_data_source(spec, seed)?;
    let data = load_dataset(&source, r.flag("normalize", false)?)?;
    let lambda = r.get_or("lambda", 0.01)?;
    let (positives, negatives) = data.label_balance();
    println!("dataset={}", source.label());
    println!("n={}", data.n());
    println!("d={}", data.dim());
    println!("positives={positives}");
    println!("negatives={negatives}");
    println!("max_norm_sq={}", data.max_norm_sq());
    println!("mean_nnz={}", data.mean_nnz());
    let obj = LogisticL2::new(Arc::new(data), lambda)?;
    println!("lambda={lambda}");
    println!("l={}", obj.lipschitz());
    println!("mu={}", obj.strong_convexity());
    Ok(0)
}
