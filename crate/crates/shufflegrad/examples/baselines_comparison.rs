//! All five methods on one fixture, each at its default step size, with the
//! loss gap measured against a converged reference solution.

use std::sync::Arc;

use shufflegrad::dataset::generate_separable_blobs;
use shufflegrad::harness::solve_reference;
use shufflegrad::numerics::ParameterVector;
use shufflegrad::objective::{FiniteSumObjective, LogisticL2};
use shufflegrad::optimizers::{run, Method, OptimizerConfig};

fn main() -> shufflegrad::Result<()> {
    let data = Arc::new(generate_separable_blobs(256, 8, 1.2, 5)?);
    let obj = LogisticL2::new(data, 0.01)?;
    let w0 = ParameterVector::zeros(obj.dim());

    let reference = solve_reference(&obj)?;
    println!(
        "reference: P*={:.12} residual={:.3e} converged={}",
        reference.p_star, reference.residual, reference.converged
    );

    println!(
        "{:<10} {:>12} {:>12} {:>10}",
        "method", "grad_sq", "loss_gap", "evals"
    );
    for method in [
        Method::AdjSarah,
        Method::RrSarah,
        Method::RrSvrg,
        Method::Sgd,
        Method::Gd,
    ] {
        let mut cfg = OptimizerConfig::new(method);
        cfg.epochs = 50;
        cfg.reference_value = Some(reference.p_star);
        let trace = run(&obj, &w0, &cfg)?;
        let last = trace.records().last().unwrap();
        println!(
            "{:<10} {:>12.3e} {:>12.3e} {:>10}",
            method.label(),
            last.grad_sq_norm,
            last.loss_gap.unwrap(),
            last.grad_evals
        );
    }
    Ok(())
}
