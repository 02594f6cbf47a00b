//! Scratch probe for experiment calibration. Not part of the shipped examples.

use shufflegrad::harness::{run_experiment, DataSource, ExperimentConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let margin: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(4.0);
    let tags: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1);
    let dseed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1);
    let rates: Vec<f64> = args
        .get(4)
        .map(|s| s.split(',').map(|r| r.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![0.1, 0.05, 0.01]);

    let mut cfg = ExperimentConfig::new(DataSource::SyntheticBlobs {
        n: 50_000,
        d: 300,
        margin,
        seed: dseed,
    });
    cfg.grid = rates;
    cfg.seeds = (0..tags).collect();
    cfg.reference = false;

    let started = std::time::Instant::now();
    let outcome = run_experiment(&cfg).unwrap();
    for cell in &outcome.cells {
        let last = cell.per_epoch.last();
        println!(
            "cell {} lr={} completed={} diverged={} final_mean={:?}",
            cell.method.label(),
            cell.lr,
            cell.completed_seeds,
            cell.diverged_seeds,
            last.map(|p| p.mean_grad_sq)
        );
    }
    for s in &outcome.summaries {
        println!(
            "summary {}: best lr {:?} final {:?} failed={}",
            s.method.label(),
            s.best_lr,
            s.final_mean_grad_sq,
            s.failed
        );
    }
    println!("elapsed {:.1}s", started.elapsed().as_secs_f64());
}
