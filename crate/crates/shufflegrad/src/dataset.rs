//! LIBSVM-format ingestion and synthetic problem generation.
//!
//! The parser reads the classic sparse text format, one example per line:
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ...
//! ```
//!
//! with 1-based, strictly increasing indices. Labels must be −1/+1 (or 0/1,
//! with 0 mapped to −1). Indices are stored 0-based internally. Gzip input
//! is detected by the 0x1f 0x8b magic bytes and decompressed transparently.
//!
//! Comment lines are rejected rather than skipped: the target datasets do
//! not contain them, so their appearance means the file is not what the
//! caller thinks it is.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use crate::error::{Error, Result};
use crate::numerics::ParameterVector;
use crate::shuffling::SeededRng;

/// One labeled sparse feature vector (x_i, y_i).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseExample {
    /// Strictly increasing 0-based feature ids.
    pub indices: Vec<u32>,
    /// Nonzero feature values, parallel to `indices`.
    pub values: Vec<f64>,
    /// Class label, −1 or +1.
    pub label: i8,
}

impl SparseExample {
    /// Validating constructor enforcing the documented invariants.
    pub fn new(indices: Vec<u32>, values: Vec<f64>, label: i8) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                got: values.len(),
            });
        }
        if label != -1 && label != 1 {
            return Err(Error::InvalidConfig(format!(
                "label must be -1 or +1, got {label}"
            )));
        }
        for pair in indices.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidConfig(format!(
                    "indices not strictly increasing at {}..{}",
                    pair[0], pair[1]
                )));
            }
        }
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "sparse example value",
                });
            }
            if v == 0.0 {
                return Err(Error::InvalidConfig(
                    "explicit zero feature values are not stored".into(),
                ));
            }
        }
        Ok(SparseExample {
            indices,
            values,
            label,
        })
    }

    /// x_iᵀw. Errors if the example refers past the end of w.
    pub fn dot(&self, w: &ParameterVector) -> Result<f64> {
        if let Some(&max) = self.indices.last() {
            if max as usize >= w.dim() {
                return Err(Error::IndexOutOfRange {
                    index: max as usize,
                    bound: w.dim(),
                });
            }
        }
        Ok(dot_sparse(&self.indices, &self.values, w.as_slice()))
    }

    /// ‖x_i‖².
    pub fn norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for &v in &self.values {
            acc += v * v;
        }
        acc
    }
}

/// Unchecked sparse inner product for hot loops; bounds are the caller's
/// responsibility. An example touching every feature (strictly increasing
/// indices spanning 0..d) takes a contiguous path with four accumulators,
/// breaking the serial dependency chain; the summation order is fixed, so
/// results stay bit-reproducible.
pub(crate) fn dot_sparse(indices: &[u32], values: &[f64], w: &[f64]) -> f64 {
    let len = values.len();
    if indices.len() == w.len() {
        let w = &w[..len];
        let (mut a0, mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0, 0.0);
        let mut i = 0;
        while i + 4 <= len {
            a0 += values[i] * w[i];
            a1 += values[i + 1] * w[i + 1];
            a2 += values[i + 2] * w[i + 2];
            a3 += values[i + 3] * w[i + 3];
            i += 4;
        }
        while i < len {
            a0 += values[i] * w[i];
            i += 1;
        }
        return (a0 + a1) + (a2 + a3);
    }
    let mut acc = 0.0;
    for (&i, &v) in indices.iter().zip(values) {
        acc += v * w[i as usize];
    }
    acc
}

/// Both x·wa and x·wb in one pass over the example, for gradient
/// differences that evaluate the same component at two points.
pub(crate) fn dot2_sparse(indices: &[u32], values: &[f64], wa: &[f64], wb: &[f64]) -> (f64, f64) {
    let len = values.len();
    if indices.len() == wa.len() && wa.len() == wb.len() {
        let wa = &wa[..len];
        let wb = &wb[..len];
        let (mut a0, mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0, 0.0);
        let (mut b0, mut b1, mut b2, mut b3) = (0.0, 0.0, 0.0, 0.0);
        let mut i = 0;
        while i + 4 <= len {
            a0 += values[i] * wa[i];
            b0 += values[i] * wb[i];
            a1 += values[i + 1] * wa[i + 1];
            b1 += values[i + 1] * wb[i + 1];
            a2 += values[i + 2] * wa[i + 2];
            b2 += values[i + 2] * wb[i + 2];
            a3 += values[i + 3] * wa[i + 3];
            b3 += values[i + 3] * wb[i + 3];
            i += 4;
        }
        while i < len {
            a0 += values[i] * wa[i];
            b0 += values[i] * wb[i];
            i += 1;
        }
        return ((a0 + a1) + (a2 + a3), (b0 + b1) + (b2 + b3));
    }
    let (mut a, mut b) = (0.0, 0.0);
    for (&i, &v) in indices.iter().zip(values) {
        a += v * wa[i as usize];
        b += v * wb[i as usize];
    }
    (a, b)
}

/// An ordered collection of examples with a common feature dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    examples: Vec<SparseExample>,
    d: usize,
}

impl Dataset {
    /// Validates that every example fits inside dimension d and that the
    /// collection is nonempty.
    pub fn new(examples: Vec<SparseExample>, d: usize) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::InvalidConfig("dataset must contain at least one example".into()));
        }
        for (k, ex) in examples.iter().enumerate() {
            if let Some(&max) = ex.indices.last() {
                if max as usize >= d {
                    return Err(Error::IndexOutOfRange {
                        index: max as usize,
                        bound: d,
                    });
                }
            }
            let _ = k;
        }
        Ok(Dataset { examples, d })
    }

    pub fn n(&self) -> usize {
        self.examples.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn examples(&self) -> &[SparseExample] {
        &self.examples
    }

    pub fn example(&self, i: usize) -> &SparseExample {
        &self.examples[i]
    }

    /// Best-effort cache prefetch of example `i`'s feature values.
    ///
    /// Shuffled optimizers visit examples in an order the hardware
    /// prefetcher cannot predict; issuing the next example's lines while
    /// the current one is being processed hides most of that latency.
    /// Purely a hint — no observable effect on results.
    pub(crate) fn prefetch_example(&self, i: usize) {
        #[cfg(target_arch = "x86_64")]
        {
            use core::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
            let values = &self.examples[i].values;
            let base = values.as_ptr() as *const i8;
            let bytes = values.len() * std::mem::size_of::<f64>();
            let mut off = 0;
            while off < bytes {
                // SAFETY: the address stays inside the values allocation,
                // and prefetch is an architectural no-op that never faults
                unsafe { _mm_prefetch(base.add(off), _MM_HINT_T0) };
                off += 64;
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = i;
    }

    /// (count of +1 labels, count of −1 labels).
    pub fn label_balance(&self) -> (usize, usize) {
        let pos = self.examples.iter().filter(|e| e.label == 1).count();
        (pos, self.examples.len() - pos)
    }

    /// max_i ‖x_i‖².
    pub fn max_norm_sq(&self) -> f64 {
        self.examples
            .iter()
            .map(SparseExample::norm_sq)
            .fold(0.0, f64::max)
    }

    /// Mean number of stored features per example.
    pub fn mean_nnz(&self) -> f64 {
        let total: usize = self.examples.iter().map(|e| e.indices.len()).sum();
        total as f64 / self.examples.len() as f64
    }

    /// Returns a copy with every example scaled to unit Euclidean norm
    /// (examples with no stored features are kept as-is).
    pub fn normalized(&self) -> Dataset {
        let examples = self
            .examples
            .iter()
            .map(|ex| {
                let norm = ex.norm_sq().sqrt();
                if norm == 0.0 {
                    return ex.clone();
                }
                SparseExample {
                    indices: ex.indices.clone(),
                    values: ex.values.iter().map(|v| v / norm).collect(),
                    label: ex.label,
                }
            })
            .collect();
        Dataset {
            examples,
            d: self.d,
        }
    }
}

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Parses LIBSVM text (optionally gzip-compressed) from an arbitrary byte
/// stream. `origin` names the source in error messages; `force_d` overrides
/// max-index dimension inference so related files can share a dimension.
pub fn parse_libsvm<R: Read>(mut source: R, origin: &str, force_d: Option<usize>) -> Result<Dataset> {
    // sniff the first two bytes for the gzip magic, then stitch them back
    let mut head = [0u8; 2];
    let mut got = 0;
    while got < 2 {
        let k = source
            .read(&mut head[got..])
            .map_err(|e| Error::io(origin, e))?;
        if k == 0 {
            break;
        }
        got += k;
    }
    let rejoined = std::io::Cursor::new(head[..got].to_vec()).chain(source);
    if got == 2 && head == GZIP_MAGIC {
        parse_libsvm_text(BufReader::new(MultiGzDecoder::new(rejoined)), origin, force_d)
    } else {
        parse_libsvm_text(BufReader::new(rejoined), origin, force_d)
    }
}

/// Opens and parses a file path, with gzip detection by content (the file
/// name is irrelevant).
pub fn parse_libsvm_path(path: &Path, force_d: Option<usize>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(file, &path.display().to_string(), force_d)
}

fn parse_libsvm_text<R: BufRead>(reader: R, origin: &str, force_d: Option<usize>) -> Result<Dataset> {
    let parse_err = |line: usize, message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };

    let mut examples = Vec::new();
    let mut max_index: Option<u32> = None;
    let mut line_no = 0usize;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            return Err(parse_err(
                line_no,
                "comment lines are not accepted in this format".into(),
            ));
        }
        let mut tokens = trimmed.split_whitespace();
        let label_token = tokens.next().expect("nonempty line has a first token");
        let label_value: f64 = label_token
            .parse()
            .map_err(|_| parse_err(line_no, format!("unreadable label '{label_token}'")))?;
        let label: i8 = if label_value == 1.0 {
            1
        } else if label_value == -1.0 || label_value == 0.0 {
            -1
        } else {
            return Err(parse_err(
                line_no,
                format!("label {label_token} outside the accepted sets {{-1,+1}} and {{0,1}}"),
            ));
        };

        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut prev: Option<u32> = None;
        for token in tokens {
            let (idx_str, val_str) = token
                .split_once(':')
                .ok_or_else(|| parse_err(line_no, format!("malformed feature token '{token}'")))?;
            let one_based: u64 = idx_str
                .parse()
                .map_err(|_| parse_err(line_no, format!("unreadable feature index '{idx_str}'")))?;
            if one_based == 0 {
                return Err(parse_err(line_no, "feature indices are 1-based; 0 is invalid".into()));
            }
            if one_based > u32::MAX as u64 {
                return Err(parse_err(line_no, format!("feature index {one_based} too large")));
            }
            let index = (one_based - 1) as u32;
            if let Some(p) = prev {
                if index <= p {
                    return Err(parse_err(
                        line_no,
                        format!("feature indices not strictly increasing at {one_based}"),
                    ));
                }
            }
            let value: f64 = val_str
                .parse()
                .map_err(|_| parse_err(line_no, format!("unreadable feature value '{val_str}'")))?;
            if !value.is_finite() {
                return Err(parse_err(line_no, format!("non-finite feature value '{val_str}'")));
            }
            if value == 0.0 {
                return Err(parse_err(
                    line_no,
                    "explicit zero feature value (omit the feature instead)".into(),
                ));
            }
            prev = Some(index);
            indices.push(index);
            values.push(value);
        }
        if let Some(&m) = indices.last() {
            max_index = Some(max_index.map_or(m, |cur| cur.max(m)));
        }
        examples.push(SparseExample {
            indices,
            values,
            label,
        });
    }
    if examples.is_empty() {
        return Err(parse_err(line_no, "no examples in input".into()));
    }
    let inferred = max_index.map_or(0, |m| m as usize + 1);
    let d = match force_d {
        Some(forced) => {
            if inferred > forced {
                return Err(parse_err(
                    line_no,
                    format!("max feature index {inferred} exceeds forced dimension {forced}"),
                ));
            }
            forced
        }
        None => inferred,
    };
    Dataset::new(examples, d)
}

/// Serializes in LIBSVM text form (1-based indices, full round-trip float
/// precision). `parse_libsvm` of the output reproduces the dataset exactly.
pub fn write_libsvm<W: Write>(dataset: &Dataset, mut sink: W) -> std::io::Result<()> {
    for ex in dataset.examples() {
        if ex.label > 0 {
            sink.write_all(b"+1")?;
        } else {
            sink.write_all(b"-1")?;
        }
        for (&i, &v) in ex.indices.iter().zip(&ex.values) {
            write!(sink, " {}:{}", i as u64 + 1, v)?;
        }
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Generates two Gaussian clusters with centers ±margin·u for a random unit
/// direction u, labels alternating +1/−1 (balanced within one example).
/// Deterministic for a fixed seed.
pub fn generate_separable_blobs(n: usize, d: usize, margin: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "blob generation needs n >= 2, got {n}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidConfig("blob generation needs d >= 1".into()));
    }
    if !(margin > 0.0) || !margin.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "blob margin must be positive and finite, got {margin}"
        )));
    }
    let mut rng = SeededRng::new(seed);

    // random unit direction; re-draw in the measure-zero degenerate case
    let mut u = vec![0.0; d];
    loop {
        for uj in u.iter_mut() {
            *uj = rng.next_gaussian();
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for uj in u.iter_mut() {
                *uj /= norm;
            }
            break;
        }
    }

    let mut examples = Vec::with_capacity(n);
    for k in 0..n {
        let label: i8 = if k % 2 == 0 { 1 } else { -1 };
        let center_scale = label as f64 * margin;
        let mut indices = Vec::with_capacity(d);
        let mut values = Vec::with_capacity(d);
        for (j, &uj) in u.iter().enumerate() {
            let x = center_scale * uj + rng.next_gaussian();
            if x != 0.0 {
                indices.push(j as u32);
                values.push(x);
            }
        }
        examples.push(SparseExample {
            indices,
            values,
            label,
        });
    }
    Dataset::new(examples, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse_str(s: &str) -> Result<Dataset> {
        parse_libsvm(s.as_bytes(), "test", None)
    }

    #[test]
    fn parses_single_line() {
        let ds = parse_str("+1 3:1.5").unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.dim(), 3);
        let ex = ds.example(0);
        assert_eq!(ex.label, 1);
        assert_eq!(ex.indices, [2]);
        assert_eq!(ex.values, [1.5]);
    }

    #[test]
    fn skips_empty_lines() {
        let ds = parse_str("+1 1:1\n\n   \n-1 2:2\n").unwrap();
        assert_eq!(ds.n(), 2);
    }

    #[test]
    fn rejects_comment_lines() {
        let err = parse_str("+1 1:1\n# a comment\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn maps_zero_one_labels() {
        let ds = parse_str("0 1:1\n1 1:2\n").unwrap();
        assert_eq!(ds.example(0).label, -1);
        assert_eq!(ds.example(1).label, 1);
    }

    #[test]
    fn rejects_other_labels() {
        let err = parse_str("+1 1:1\n2 1:1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_non_increasing_indices() {
        let err = parse_str("+1 2:1 2:3").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_str("+1 3:1 2:3").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_zero_values_and_zero_indices() {
        assert!(parse_str("+1 1:0.0").is_err());
        assert!(parse_str("+1 0:2.0").is_err());
    }

    #[test]
    fn rejects_malformed_tokens() {
        assert!(parse_str("+1 1").is_err());
        assert!(parse_str("+1 a:1").is_err());
        assert!(parse_str("+1 1:b").is_err());
        assert!(parse_str("abc 1:1").is_err());
    }

    #[test]
    fn preserves_example_order() {
        let ds = parse_str("+1 1:10\n-1 1:20\n+1 1:30\n").unwrap();
        let vals: Vec<f64> = ds.examples().iter().map(|e| e.values[0]).collect();
        assert_eq!(vals, [10.0, 20.0, 30.0]);
    }

    #[test]
    fn force_d_overrides_inference() {
        let ds = parse_libsvm("+1 2:1".as_bytes(), "test", Some(10)).unwrap();
        assert_eq!(ds.dim(), 10);
        assert!(parse_libsvm("+1 11:1".as_bytes(), "test", Some(10)).is_err());
    }

    #[test]
    fn round_trips_hand_fixture() {
        let text = "+1 1:0.5 4:-2.25\n-1 2:1\n+1 3:3.5\n-1 1:-1 2:2 3:-3\n+1 5:0.125\n";
        let ds = parse_str(text).unwrap();
        let mut out = Vec::new();
        write_libsvm(&ds, &mut out).unwrap();
        let reparsed = parse_libsvm(out.as_slice(), "roundtrip", None).unwrap();
        assert_eq!(ds, reparsed);
    }

    #[test]
    fn gzip_detected_and_round_trips() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        let ds = parse_str("+1 1:1.5\n-1 2:-0.5\n").unwrap();
        let mut plain = Vec::new();
        write_libsvm(&ds, &mut plain).unwrap();
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&plain).unwrap();
        let gz = enc.finish().unwrap();
        assert_eq!(&gz[..2], &GZIP_MAGIC);
        let reparsed = parse_libsvm(gz.as_slice(), "gz", None).unwrap();
        assert_eq!(ds, reparsed);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_str("").is_err());
        assert!(parse_str("\n\n").is_err());
    }

    #[test]
    fn sparse_dot_examples() {
        let w = ParameterVector::new(vec![3.0, 9.0, 0.5]).unwrap();
        let empty = SparseExample::new(vec![], vec![], 1).unwrap();
        assert_eq!(empty.dot(&w).unwrap(), 0.0);

        let e = SparseExample::new(vec![0, 2], vec![1.0, 2.0], 1).unwrap();
        assert_eq!(e.dot(&w).unwrap(), 4.0);

        // densified w against itself equals its squared norm
        let dense = SparseExample::new(vec![0, 1, 2], vec![3.0, 9.0, 0.5], -1).unwrap();
        assert_eq!(dense.dot(&w).unwrap(), w.norm_sq().unwrap());
    }

    #[test]
    fn sparse_dot_out_of_range() {
        let w = ParameterVector::zeros(2);
        let e = SparseExample::new(vec![5], vec![1.0], 1).unwrap();
        assert!(matches!(e.dot(&w), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn blobs_minimal_case() {
        let ds = generate_separable_blobs(2, 1, 10.0, 1).unwrap();
        let labels: Vec<i8> = ds.examples().iter().map(|e| e.label).collect();
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, [-1, 1]);
    }

    #[test]
    fn blobs_deterministic() {
        let a = generate_separable_blobs(50, 4, 3.0, 9).unwrap();
        let b = generate_separable_blobs(50, 4, 3.0, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_separable_blobs(50, 4, 3.0, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn blobs_balanced_within_one() {
        for n in [2, 7, 50, 101] {
            let ds = generate_separable_blobs(n, 3, 2.0, 4).unwrap();
            let (pos, neg) = ds.label_balance();
            assert!(pos.abs_diff(neg) <= 1, "n={n}: {pos} vs {neg}");
        }
    }

    #[test]
    fn blobs_clusters_sit_on_opposite_sides() {
        // class-conditional mean projection onto the separating direction
        // should be near ±margin; with margin 6 and ~1/sqrt(n) noise the
        // sign check has enormous slack
        let ds = generate_separable_blobs(400, 5, 6.0, 123).unwrap();
        let mut w = vec![0.0; 5];
        for ex in ds.examples() {
            for (&i, &v) in ex.indices.iter().zip(&ex.values) {
                w[i as usize] += ex.label as f64 * v / 400.0;
            }
        }
        // w estimates 2·margin·u/2 = margin·u up to noise; project examples
        for ex in ds.examples() {
            let proj: f64 = ex
                .indices
                .iter()
                .zip(&ex.values)
                .map(|(&i, &v)| v * w[i as usize])
                .sum();
            assert!(
                (ex.label as f64) * proj > 0.0,
                "example on the wrong side of the estimated direction"
            );
        }
    }

    #[test]
    fn blobs_validation() {
        assert!(generate_separable_blobs(1, 3, 1.0, 0).is_err());
        assert!(generate_separable_blobs(10, 0, 1.0, 0).is_err());
        assert!(generate_separable_blobs(10, 3, 0.0, 0).is_err());
        assert!(generate_separable_blobs(10, 3, -4.0, 0).is_err());
    }

    #[test]
    fn normalized_scales_to_unit_norm() {
        let ds = parse_str("+1 1:3 2:4\n-1 1:5\n").unwrap();
        let nrm = ds.normalized();
        for ex in nrm.examples() {
            assert!((ex.norm_sq() - 1.0).abs() < 1e-12);
        }
        assert_eq!(nrm.example(0).values, [0.6, 0.8]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        // sparse_dot against a densify-then-dense-dot oracle
        #[test]
        fn sparse_dot_matches_densified(
            picks in proptest::collection::btree_map(0u32..12, -5.0_f64..5.0, 0..8),
            ws in proptest::collection::vec(-3.0_f64..3.0, 12),
        ) {
            let (indices, values): (Vec<u32>, Vec<f64>) =
                picks.iter().filter(|(_, v)| **v != 0.0).map(|(&i, &v)| (i, v)).unzip();
            let ex = SparseExample { indices: indices.clone(), values: values.clone(), label: 1 };
            let w = ParameterVector::new(ws.clone()).unwrap();
            let sparse = ex.dot(&w).unwrap();
            let mut dense = vec![0.0; 12];
            for (&i, &v) in indices.iter().zip(&values) {
                dense[i as usize] = v;
            }
            let oracle: f64 = dense.iter().zip(&ws).map(|(a, b)| a * b).sum();
            let scale = oracle.abs().max(1.0);
            prop_assert!((sparse - oracle).abs() <= 1e-14 * scale);
        }
    }
}
