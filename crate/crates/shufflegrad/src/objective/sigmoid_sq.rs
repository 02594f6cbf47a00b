//! Smooth nonconvex fixture: squared sigmoid error per example.
//!
//! f_i(w) = (σ(x_iᵀw) − y_i)² with y_i ∈ {0,1} mapped from the ±1 labels.
//! The scalar loss g(z) = (σ(z) − y)² is smooth, bounded in [0, 1], and
//! nonconvex (its second derivative changes sign), which makes the sum a
//! well-behaved test bed for the nonconvex-mode guarantees: P ≥ 0 gives a
//! free lower bound for gap computations, and the componentwise smoothness
//! constant is sup|g″| · max_i ‖x_i‖², with sup|g″| pinned numerically at
//! construction by a sweep-plus-ternary-refine over the scalar curvature.

use std::sync::Arc;

use super::{check_component_args, check_dim, sigmoid, FiniteSumObjective};
use crate::dataset::{dot2_sparse, dot_sparse, Dataset};
use crate::error::Result;
use crate::numerics::ParameterVector;

/// Finite sum of squared sigmoid errors over a sparse dataset.
pub struct SigmoidSquared {
    data: Arc<Dataset>,
    curvature_cap: f64,
    l: f64,
}

/// Scalar loss derivative: d/dz (σ(z) − y)² = 2(σ(z) − y)σ(z)(1−σ(z)).
/// Written via σ(−z) so the (σ − 1) factor keeps full precision for
/// large positive z.
fn scalar_slope(z: f64, y_is_one: bool) -> f64 {
    let sp = sigmoid(z);
    let sn = sigmoid(-z);
    let delta = if y_is_one { -sn } else { sp };
    2.0 * delta * sp * sn
}

/// Scalar loss second derivative: 2σ′[σ′ + (σ − y)(1 − 2σ)].
fn scalar_curvature(z: f64, y_is_one: bool) -> f64 {
    let sp = sigmoid(z);
    let sn = sigmoid(-z);
    let delta = if y_is_one { -sn } else { sp };
    let sprime = sp * sn;
    2.0 * sprime * (sprime + delta * (1.0 - 2.0 * sp))
}

fn scalar_value(z: f64, y_is_one: bool) -> f64 {
    let delta = if y_is_one { -sigmoid(-z) } else { sigmoid(z) };
    delta * delta
}

/// sup_z |g″(z)|, located by a coarse sweep and sharpened by ternary
/// search. The two label cases mirror each other under z ↦ −z, so one
/// branch suffices.
fn curvature_cap() -> f64 {
    let step = 1e-3;
    let mut best_z = 0.0;
    let mut best = 0.0f64;
    let mut z = -16.0;
    while z <= 16.0 {
        let c = scalar_curvature(z, false).abs();
        if c > best {
            best = c;
            best_z = z;
        }
        z += step;
    }
    let (mut lo, mut hi) = (best_z - step, best_z + step);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if scalar_curvature(m1, false).abs() < scalar_curvature(m2, false).abs() {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    scalar_curvature(0.5 * (lo + hi), false).abs()
}

impl SigmoidSquared {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        let cap = curvature_cap();
        let l = cap * data.max_norm_sq();
        Ok(SigmoidSquared {
            data,
            curvature_cap: cap,
            l,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// P ≥ 0 everywhere, so 0 is a valid optimum surrogate for gap terms.
    pub fn lower_bound(&self) -> f64 {
        0.0
    }

    /// sup_z |g″(z)| for the scalar loss.
    pub fn scalar_curvature_cap(&self) -> f64 {
        self.curvature_cap
    }

    fn z_and_label(&self, i: usize, w: &[f64]) -> (f64, bool) {
        let ex = self.data.example(i);
        (dot_sparse(&ex.indices, &ex.values, w), ex.label == 1)
    }
}

impl FiniteSumObjective for SigmoidSquared {
    fn n_components(&self) -> usize {
        self.data.n()
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn component_value(&self, i: usize, w: &ParameterVector) -> Result<f64> {
        check_component_args(self.n_components(), self.dim(), i, w)?;
        let (z, y) = self.z_and_label(i, w.as_slice());
        Ok(scalar_value(z, y))
    }

    fn component_gradient_into(
        &self,
        i: usize,
        w: &ParameterVector,
        out: &mut ParameterVector,
    ) -> Result<()> {
        check_component_args(self.n_components(), self.dim(), i, w)?;
        check_dim(self.dim(), out)?;
        let (z, y) = self.z_and_label(i, w.as_slice());
        let slope = scalar_slope(z, y);
        let ex = self.data.example(i);
        let out_s = out.as_mut_slice();
        out_s.fill(0.0);
        for (&idx, &v) in ex.indices.iter().zip(&ex.values) {
            out_s[idx as usize] = slope * v;
        }
        Ok(())
    }

    fn component_gradient_diff_into(
        &self,
        i: usize,
        w_a: &ParameterVector,
        w_b: &ParameterVector,
        out: &mut ParameterVector,
    ) -> Result<()> {
        check_component_args(self.n_components(), self.dim(), i, w_a)?;
        check_dim(self.dim(), w_b)?;
        check_dim(self.dim(), out)?;
        let ex = self.data.example(i);
        let (za, zb) = dot2_sparse(&ex.indices, &ex.values, w_a.as_slice(), w_b.as_slice());
        let y = ex.label == 1;
        let slope = scalar_slope(za, y) - scalar_slope(zb, y);
        let out_s = out.as_mut_slice();
        out_s.fill(0.0);
        for (&idx, &v) in ex.indices.iter().zip(&ex.values) {
            out_s[idx as usize] = slope * v;
        }
        Ok(())
    }

    fn full_gradient_into(&self, w: &ParameterVector, out: &mut ParameterVector) -> Result<()> {
        check_dim(self.dim(), w)?;
        check_dim(self.dim(), out)?;
        let ws = w.as_slice();
        let out_s = out.as_mut_slice();
        out_s.fill(0.0);
        for (i, ex) in self.data.examples().iter().enumerate() {
            let (z, y) = self.z_and_label(i, ws);
            let slope = scalar_slope(z, y);
            if ex.indices.len() == out_s.len() {
                for (o, &v) in out_s.iter_mut().zip(&ex.values) {
                    *o += slope * v;
                }
            } else {
                for (&idx, &v) in ex.indices.iter().zip(&ex.values) {
                    out_s[idx as usize] += slope * v;
                }
            }
        }
        let inv = 1.0 / self.data.n() as f64;
        for o in out_s.iter_mut() {
            *o *= inv;
        }
        Ok(())
    }

    fn lipschitz(&self) -> f64 {
        self.l
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn prefetch_component(&self, i: usize) {
        self.data.prefetch_example(i);
    }

    fn max_component_curvature(&self, w: &ParameterVector) -> Result<f64> {
        check_dim(self.dim(), w)?;
        let ws = w.as_slice();
        let mut best: f64 = 0.0;
        for (i, ex) in self.data.examples().iter().enumerate() {
            let (z, y) = self.z_and_label(i, ws);
            best = best.max(scalar_curvature(z, y).abs() * ex.norm_sq());
        }
        Ok(best)
    }
}
