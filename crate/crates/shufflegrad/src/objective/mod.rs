//! Finite-sum objective oracles P(w) = (1/n) Σ f_i(w).
//!
//! Three concrete objectives cover the library's needs:
//!
//! * [`LogisticL2`] — l2-regularized logistic regression, the benchmark
//!   objective (strongly convex when λ > 0);
//! * [`QuadraticSum`] — per-component diagonal-plus-rank-one quadratics with
//!   an analytically known minimizer, used as a closed-form oracle in tests
//!   and certification runs;
//! * [`SigmoidSquared`] — squared-error sigmoid regression, a smooth
//!   bounded-below nonconvex fixture.
//!
//! Objectives are immutable once constructed and safe to share across
//! concurrent runs. They do not count their own gradient evaluations;
//! accounting belongs to the optimizer run that calls them, keeping the
//! oracle pure.

mod logistic;
mod quadratic;
mod sigmoid_sq;

pub use logistic::LogisticL2;
pub use quadratic::{QuadComponent, QuadraticSum};
pub use sigmoid_sq::SigmoidSquared;

use crate::error::{Error, Result};
use crate::numerics::ParameterVector;

/// Smoothness and strong-convexity constants of an objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessConstants {
    /// Componentwise gradient Lipschitz constant: every ∇f_i is L-Lipschitz.
    pub l: f64,
    /// Strong-convexity modulus of P.
    pub mu: f64,
    /// Condition number L/μ.
    pub kappa: f64,
}

/// A finite sum of n smooth components over R^d.
///
/// `component_gradient_into` and `component_gradient_diff_into` are the hot
/// oracle calls; implementations should avoid allocating in them. The
/// provided defaults are correct for any implementation but allocate
/// scratch space, so performance-sensitive objectives override them.
pub trait FiniteSumObjective: Send + Sync {
    /// Number of components n.
    fn n_components(&self) -> usize;

    /// Model dimension d.
    fn dim(&self) -> usize;

    /// f_i(w).
    fn component_value(&self, i: usize, w: &ParameterVector) -> Result<f64>;

    /// Writes ∇f_i(w) into `out`.
    fn component_gradient_into(
        &self,
        i: usize,
        w: &ParameterVector,
        out: &mut ParameterVector,
    ) -> Result<()>;

    /// Componentwise gradient Lipschitz constant L.
    fn lipschitz(&self) -> f64;

    /// Strong-convexity modulus μ of P, or 0 when no claim is made.
    fn strong_convexity(&self) -> f64;

    /// max_i of the pointwise curvature bound ‖∇²f_i(w)‖ at w. Used by the
    /// certification report to audit the global constant along visited
    /// trajectories.
    fn max_component_curvature(&self, w: &ParameterVector) -> Result<f64>;

    /// Hint that component `i` will be evaluated soon, letting data-backed
    /// objectives warm the cache. Must have no observable effect; the
    /// default does nothing.
    fn prefetch_component(&self, i: usize) {
        let _ = i;
    }

    /// P(w) = (1/n) Σ f_i(w).
    fn value(&self, w: &ParameterVector) -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..self.n_components() {
            acc += self.component_value(i, w)?;
        }
        Ok(acc / self.n_components() as f64)
    }

    /// Allocating convenience wrapper around `component_gradient_into`.
    fn component_gradient(&self, i: usize, w: &ParameterVector) -> Result<ParameterVector> {
        let mut out = ParameterVector::zeros(self.dim());
        self.component_gradient_into(i, w, &mut out)?;
        Ok(out)
    }

    /// Writes ∇f_i(w_a) − ∇f_i(w_b) into `out`.
    ///
    /// The default takes two gradients and subtracts; objectives with sparse
    /// structure override this with a fused form that touches each feature
    /// once.
    fn component_gradient_diff_into(
        &self,
        i: usize,
        w_a: &ParameterVector,
        w_b: &ParameterVector,
        out: &mut ParameterVector,
    ) -> Result<()> {
        let mut gb = ParameterVector::zeros(self.dim());
        self.component_gradient_into(i, w_b, &mut gb)?;
        self.component_gradient_into(i, w_a, out)?;
        let out_s = out.as_mut_slice();
        for (o, b) in out_s.iter_mut().zip(gb.as_slice()) {
            *o -= b;
        }
        Ok(())
    }

    /// Writes ∇P(w) = (1/n) Σ ∇f_i(w) into `out`.
    fn full_gradient_into(&self, w: &ParameterVector, out: &mut ParameterVector) -> Result<()> {
        check_dim(self.dim(), out)?;
        let n = self.n_components();
        let mut scratch = ParameterVector::zeros(self.dim());
        out.as_mut_slice().fill(0.0);
        for i in 0..n {
            self.component_gradient_into(i, w, &mut scratch)?;
            let out_s = out.as_mut_slice();
            for (o, s) in out_s.iter_mut().zip(scratch.as_slice()) {
                *o += s;
            }
        }
        let inv = 1.0 / n as f64;
        for o in out.as_mut_slice() {
            *o *= inv;
        }
        Ok(())
    }

    /// Allocating convenience wrapper around `full_gradient_into`.
    fn full_gradient(&self, w: &ParameterVector) -> Result<ParameterVector> {
        let mut out = ParameterVector::zeros(self.dim());
        self.full_gradient_into(w, &mut out)?;
        Ok(out)
    }

    /// The exact empirical component-gradient variance
    /// σ²(w) = (1/n) Σ ‖∇f_i(w) − ∇P(w)‖².
    fn variance_at(&self, w: &ParameterVector) -> Result<f64> {
        let mean = self.full_gradient(w)?;
        let mut scratch = ParameterVector::zeros(self.dim());
        let mut acc = 0.0;
        for i in 0..self.n_components() {
            self.component_gradient_into(i, w, &mut scratch)?;
            let mut dev = 0.0;
            for (g, m) in scratch.as_slice().iter().zip(mean.as_slice()) {
                let d = g - m;
                dev += d * d;
            }
            acc += dev;
        }
        Ok(acc / self.n_components() as f64)
    }

    /// (L, μ, κ) for strongly convex use. Errors when the objective carries
    /// no positive strong-convexity modulus (for example logistic with
    /// λ = 0), since κ would be meaningless.
    fn smoothness_constants(&self) -> Result<SmoothnessConstants> {
        let l = self.lipschitz();
        let mu = self.strong_convexity();
        if mu <= 0.0 {
            return Err(Error::InvalidConfig(
                "strongly-convex constants requested, but the objective has no positive \
                 strong-convexity modulus"
                    .into(),
            ));
        }
        Ok(SmoothnessConstants {
            l,
            mu,
            kappa: l / mu,
        })
    }
}

/// Checks i < n and dim(w) == d; shared by the concrete objectives.
pub(crate) fn check_component_args(
    n: usize,
    d: usize,
    i: usize,
    w: &ParameterVector,
) -> Result<()> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, bound: n });
    }
    check_dim(d, w)
}

pub(crate) fn check_dim(d: usize, w: &ParameterVector) -> Result<()> {
    if w.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: w.dim(),
        });
    }
    Ok(())
}

/// Numerically stable logistic sigmoid 1/(1+e^{−z}).
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable log(1 + e^{−z}).
pub(crate) fn log1p_exp_neg(z: f64) -> f64 {
    if z >= 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}
