//! l2-regularized logistic regression over a sparse dataset.

use std::sync::Arc;

use super::{check_component_args, check_dim, log1p_exp_neg, sigmoid, FiniteSumObjective};
use crate::dataset::{dot2_sparse, dot_sparse, Dataset};
use crate::error::{Error, Result};
use crate::numerics::ParameterVector;

/// f_i(w) = log(1 + exp(−y_i x_iᵀw)) + (λ/2)‖w‖².
///
/// Every component carries the regularizer, so P is their plain average.
/// The componentwise smoothness constant is L = max_i ‖x_i‖²/4 + λ
/// (σ′ ≤ 1/4 gives the per-component Hessian bound; the looser average
/// bound is deliberately not used), and P is λ-strongly convex.
pub struct LogisticL2 {
    data: Arc<Dataset>,
    lambda: f64,
    norms_sq: Vec<f64>,
    l: f64,
}

impl LogisticL2 {
    pub fn new(data: Arc<Dataset>, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        let norms_sq: Vec<f64> = data.examples().iter().map(|e| e.norm_sq()).collect();
        let max_norm_sq = norms_sq.iter().copied().fold(0.0, f64::max);
        let l = max_norm_sq / 4.0 + lambda;
        Ok(LogisticL2 {
            data,
            lambda,
            norms_sq,
            l,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// y_i · x_iᵀw for component i.
    fn margin(&self, i: usize, w: &[f64]) -> f64 {
        let ex = self.data.example(i);
        ex.label as f64 * dot_sparse(&ex.indices, &ex.values, w)
    }
}

impl FiniteSumObjective for LogisticL2 {
    fn n_components(&self) -> usize {
        self.data.n()
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn component_value(&self, i: usize, w: &ParameterVector) -> Result<f64> {
        check_component_args(self.n_components(), self.dim(), i, w)?;
        let z = self.margin(i, w.as_slice());
        let reg = 0.5 * self.lambda * crate::numerics::norm_sq_slice(w.as_slice());
        Ok(log1p_exp_neg(z) + reg)
    }

    fn value(&self, w: &ParameterVector) -> Result<f64> {
        check_dim(self.dim(), w)?;
        let ws = w.as_slice();
        let mut acc = 0.0;
        for i in 0..self.data.n() {
            acc += log1p_exp_neg(self.margin(i, ws));
        }
        let reg = 0.5 * self.lambda * crate::numerics::norm_sq_slice(ws);
        Ok(acc / self.data.n() as f64 + reg)
    }

    fn component_gradient_into(
        &self,
        i: usize,
        w: &ParameterVector,
        out: &mut ParameterVector,
    ) -> Result<()> {
        check_component_args(self.n_components(), self.dim(), i, w)?;
        check_dim(self.dim(), out)?;
        let ws = w.as_slice();
        let ex = self.data.example(i);
        let y = ex.label as f64;
        let z = y * dot_sparse(&ex.indices, &ex.values, ws);
        // ∇f_i = −y σ(−z) x_i + λw
        let factor = -y * sigmoid(-z);
        let out_s = out.as_mut_slice();
        if ex.indices.len() == out_s.len() {
            for ((o, &wj), &v) in out_s.iter_mut().zip(ws).zip(&ex.values) {
                *o = self.lambda * wj + factor * v;
            }
        } else {
            for (o, &wj) in out_s.iter_mut().zip(ws) {
                *o = self.lambda * wj;
            }
            for (&idx, &v) in ex.indices.iter().zip(&ex.values) {
                out_s[idx as usize] += factor * v;
            }
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
        let (wa, wb) = (w_a.as_slice(), w_b.as_slice());
        let ex = self.data.example(i);
        let y = ex.label as f64;
        let (da, db) = dot2_sparse(&ex.indices, &ex.values, wa, wb);
        let (za, zb) = (y * da, y * db);
        let factor = -y * (sigmoid(-za) - sigmoid(-zb));
        let out_s = out.as_mut_slice();
        if ex.indices.len() == out_s.len() {
            for (((o, &aj), &bj), &v) in out_s.iter_mut().zip(wa).zip(wb).zip(&ex.values) {
                *o = self.lambda * (aj - bj) + factor * v;
            }
        } else {
            for ((o, &aj), &bj) in out_s.iter_mut().zip(wa).zip(wb) {
                *o = self.lambda * (aj - bj);
            }
            for (&idx, &v) in ex.indices.iter().zip(&ex.values) {
                out_s[idx as usize] += factor * v;
            }
        }
        Ok(())
    }

    fn full_gradient_into(&self, w: &ParameterVector, out: &mut ParameterVector) -> Result<()> {
        check_dim(self.dim(), w)?;
        check_dim(self.dim(), out)?;
        let ws = w.as_slice();
        let out_s = out.as_mut_slice();
        out_s.fill(0.0);
        // accumulate the data terms sparsely, then fold in 1/n and the
        // regularizer in one dense pass
        for ex in self.data.examples() {
            let y = ex.label as f64;
            let z = y * dot_sparse(&ex.indices, &ex.values, ws);
            let factor = -y * sigmoid(-z);
            if ex.indices.len() == out_s.len() {
                for (o, &v) in out_s.iter_mut().zip(&ex.values) {
                    *o += factor * v;
                }
            } else {
                for (&idx, &v) in ex.indices.iter().zip(&ex.values) {
                    out_s[idx as usize] += factor * v;
                }
            }
        }
        let inv = 1.0 / self.data.n() as f64;
        for (o, &wj) in out_s.iter_mut().zip(ws) {
            *o = *o * inv + self.lambda * wj;
        }
        Ok(())
    }

    fn lipschitz(&self) -> f64 {
        self.l
    }

    fn strong_convexity(&self) -> f64 {
        self.lambda
    }

    fn prefetch_component(&self, i: usize) {
        self.data.prefetch_example(i);
    }

    fn max_component_curvature(&self, w: &ParameterVector) -> Result<f64> {
        check_dim(self.dim(), w)?;
        let ws = w.as_slice();
        let mut best: f64 = 0.0;
        for (i, &nsq) in self.norms_sq.iter().enumerate() {
            let z = self.margin(i, ws);
            let s = sigmoid(z);
            best = best.max(s * (1.0 - s) * nsq);
        }
        Ok(best + self.lambda)
    }
}
