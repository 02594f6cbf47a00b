//! LIBSVM round trip: write a dataset to the interchange format, parse it
//! back, inspect its statistics, and train on it.

use std::sync::Arc;

use shufflegrad::dataset::{generate_separable_blobs, parse_libsvm, write_libsvm};
use shufflegrad::numerics::ParameterVector;
use shufflegrad::objective::{FiniteSumObjective, LogisticL2};
use shufflegrad::optimizers::{run, Method, OptimizerConfig};

fn main() -> shufflegrad::Result<()> {
    let original = generate_separable_blobs(200, 6, 2.0, 9)?;

    let mut buffer = Vec::new();
    write_libsvm(&original, &mut buffer).expect("write to memory");
    println!("serialized {} bytes", buffer.len());
    let first_line = buffer.split(|&b| b == b'\n').next().unwrap();
    println!("first line: {}", String::from_utf8_lossy(first_line));

    let parsed = parse_libsvm(buffer.as_slice(), "in-memory", None)?;
    assert_eq!(parsed, original);
    let (pos, neg) = parsed.label_balance();
    println!(
        "parsed back: n={} d={} positives={} negatives={} max_norm_sq={:.4} mean_nnz={:.1}",
        parsed.n(),
        parsed.dim(),
        pos,
        neg,
        parsed.max_norm_sq(),
        parsed.mean_nnz()
    );

    let obj = LogisticL2::new(Arc::new(parsed), 0.01)?;
    let mut cfg = OptimizerConfig::new(Method::AdjSarah);
    cfg.epochs = 20;
    let trace = run(&obj, &ParameterVector::zeros(obj.dim()), &cfg)?;
    println!(
        "trained 20 epochs: grad_sq_norm {:.3e}",
        trace.records().last().unwrap().grad_sq_norm
    );
    Ok(())
}
