//! Dense vector primitives shared by every other module.
//!
//! All arithmetic is 64-bit floating point, and every reduction accumulates
//! sequentially left to right, so results are bit-reproducible for a fixed
//! seed on any platform. Compensated summation is deliberately not used: the
//! certification tolerances (1e-9 and coarser) leave plain summation orders
//! of magnitude of headroom at the dimensions this crate targets.
//!
//! The public operations validate their inputs (finiteness, matching
//! dimensions) and return errors instead of propagating NaN. The optimizer
//! hot loops use the `pub(crate)` slice kernels at the bottom of this file,
//! which skip validation; divergence there is caught by explicit finiteness
//! checks once per inner step.

use crate::error::{Error, Result};

/// A dense model-coordinate vector: w, the iterates w_t, and the recursive
/// gradient estimates v_t all live in this type.
///
/// Construction through [`ParameterVector::new`] guarantees every entry is
/// finite. In-place mutation during optimization can break that temporarily;
/// the optimizers re-check finiteness each step and abort with a divergence
/// error instead of emitting NaN traces.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
}

impl ParameterVector {
    /// Wraps a coordinate vector, rejecting NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !all_finite(&values) {
            return Err(Error::NonFinite {
                context: "parameter vector entry",
            });
        }
        Ok(ParameterVector { values })
    }

    /// The zero vector of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        ParameterVector {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Σ x_j², accumulated left to right.
    ///
    /// Errors if any entry is non-finite, so metric code never silently
    /// reports NaN norms.
    pub fn norm_sq(&self) -> Result<f64> {
        if !all_finite(&self.values) {
            return Err(Error::NonFinite {
                context: "norm_sq input",
            });
        }
        Ok(norm_sq_slice(&self.values))
    }

    /// Euclidean inner product with another vector of the same dimension.
    pub fn dot(&self, other: &ParameterVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if !all_finite(&self.values) || !all_finite(&other.values) {
            return Err(Error::NonFinite { context: "dot input" });
        }
        Ok(dot_slices(&self.values, &other.values))
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(v: ParameterVector) -> Vec<f64> {
        v.values
    }
}

/// Returns a·x + y without modifying either input.
pub fn axpy(a: f64, x: &ParameterVector, y: &ParameterVector) -> Result<ParameterVector> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite {
            context: "axpy scale factor",
        });
    }
    let values = x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(&xj, &yj)| a * xj + yj)
        .collect();
    Ok(ParameterVector { values })
}

/// Returns x − y.
pub fn sub(x: &ParameterVector, y: &ParameterVector) -> Result<ParameterVector> {
    axpy(-1.0, y, x)
}

// ---- unchecked slice kernels for the optimizer hot paths ----

pub(crate) fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

pub(crate) fn norm_sq_slice(xs: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &x in xs {
        acc += x * x;
    }
    acc
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (&ai, &bi) in a.iter().zip(b) {
        acc += ai * bi;
    }
    acc
}

/// y += a·x, in place.
pub(crate) fn axpy_in_place(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yj, &xj) in y.iter_mut().zip(x) {
        *yj += a * xj;
    }
}
