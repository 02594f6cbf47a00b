//! Synthetic quadratic finite sums with a closed-form minimizer.
//!
//! Each component is f_i(w) = ½·wᵀ(D_i + u_iu_iᵀ)w − b_iᵀw with D_i a
//! nonnegative diagonal, so every component Hessian is positive
//! semidefinite and the average Ā is positive definite whenever any
//! component contributes positive diagonal mass in every coordinate.
//! The global minimizer w* = Ā⁻¹b̄ is computed at construction and
//! verified to satisfy ‖∇P(w*)‖ ≤ 1e-12, which makes this family the
//! exact oracle fixture for convergence-bound tests: loss gaps and
//! constants (L, μ via eigenvalues) are known rather than estimated.

use super::{check_component_args, check_dim, FiniteSumObjective};
use crate::error::{Error, Result};
use crate::numerics::ParameterVector;
use crate::shuffling::SeededRng;

/// One diagonal-plus-rank-one quadratic: ½·wᵀ(D + uuᵀ)w − bᵀw.
pub struct QuadComponent {
    diag: Vec<f64>,
    u: Vec<f64>,
    b: Vec<f64>,
}

impl QuadComponent {
    /// `diag` entries must be finite and nonnegative (Hessian stays PSD);
    /// `u` and `b` finite, all three the same length.
    pub fn new(diag: Vec<f64>, u: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if diag.len() != u.len() || diag.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len(),
                got: if diag.len() != u.len() { u.len() } else { b.len() },
            });
        }
        if diag.is_empty() {
            return Err(Error::InvalidConfig(
                "quadratic component must have dimension ≥ 1".into(),
            ));
        }
        if diag.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidConfig(
                "diagonal entries must be finite and nonnegative".into(),
            ));
        }
        if u.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "quadratic component coefficients",
            });
        }
        Ok(QuadComponent { diag, u, b })
    }

    fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Dense D + uuᵀ, for eigenvalue extraction and test oracles.
    pub(crate) fn hessian_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut h = vec![vec![0.0; d]; d];
        for i in 0..d {
            h[i][i] = self.diag[i];
            for j in 0..d {
                h[i][j] += self.u[i] * self.u[j];
            }
        }
        h
    }
}

/// P(w) = (1/n) Σ f_i(w) over [`QuadComponent`]s, with w*, P(w*), and
/// eigen-exact smoothness constants computed once at construction.
pub struct QuadraticSum {
    components: Vec<QuadComponent>,
    dim: usize,
    w_star: ParameterVector,
    min_value: f64,
    l: f64,
    mu: f64,
}

impl QuadraticSum {
    pub fn new(components: Vec<QuadComponent>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidConfig(
                "quadratic sum needs at least one component".into(),
            ));
        };
        let d = first.dim();
        for c in &components {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.dim(),
                });
            }
        }
        let n = components.len() as f64;

        // Average Hessian and linear term.
        let mut a_bar = vec![vec![0.0; d]; d];
        let mut b_bar = vec![0.0; d];
        for c in &components {
            let h = c.hessian_dense();
            for i in 0..d {
                for j in 0..d {
                    a_bar[i][j] += h[i][j] / n;
                }
            }
            for (acc, &bj) in b_bar.iter_mut().zip(&c.b) {
                *acc += bj / n;
            }
        }

        let mut mean_eigs = linalg::sym_eigenvalues(&a_bar);
        mean_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mu = mean_eigs[0];
        let mut l: f64 = 0.0;
        for c in &components {
            let eigs = linalg::sym_eigenvalues(&c.hessian_dense());
            l = l.max(eigs.iter().copied().fold(0.0, f64::max));
        }
        if !(mu > 1e-12 * l.max(1.0)) {
            return Err(Error::InvalidConfig(format!(
                "average Hessian must be positive definite (smallest eigenvalue {mu:.3e})"
            )));
        }

        // w* = Ā⁻¹ b̄, with one refinement pass to tighten the residual.
        let mut w_star = linalg::lu_solve(&a_bar, &b_bar)?;
        let residual: Vec<f64> = (0..d)
            .map(|i| b_bar[i] - a_bar[i].iter().zip(&w_star).map(|(a, w)| a * w).sum::<f64>())
            .collect();
        let correction = linalg::lu_solve(&a_bar, &residual)?;
        for (w, c) in w_star.iter_mut().zip(&correction) {
            *w += c;
        }
        let w_star = ParameterVector::new(w_star)?;

        let mut out = QuadraticSum {
            components,
            dim: d,
            w_star,
            min_value: 0.0,
            l,
            mu,
        };
        let grad_norm_sq = out.full_gradient(&out.w_star)?.norm_sq()?;
        if grad_norm_sq > 1e-24 {
            return Err(Error::InvalidConfig(format!(
                "minimizer solve left ‖∇P(w*)‖ = {:.3e} > 1e-12",
                grad_norm_sq.sqrt()
            )));
        }
        out.min_value = out.value(&out.w_star)?;
        Ok(out)
    }

    /// Well-conditioned random instance: diagonals uniform in [0.5, 1.5],
    /// rank-one directions with ‖u‖² ≈ 1, Gaussian linear terms.
    pub fn sample(n: usize, d: usize, seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidConfig(
                "sample requires n ≥ 1 and d ≥ 1".into(),
            ));
        }
        let mut rng = SeededRng::new(seed);
        let scale = 1.0 / (d as f64).sqrt();
        let mut comps = Vec::with_capacity(n);
        for _ in 0..n {
            let diag = (0..d).map(|_| 0.5 + rng.next_f64()).collect();
            let u = (0..d).map(|_| scale * rng.next_gaussian()).collect();
            let b = (0..d).map(|_| rng.next_gaussian()).collect();
            comps.push(QuadComponent::new(diag, u, b)?);
        }
        QuadraticSum::new(comps)
    }

    /// Instance whose average-Hessian spectrum spans roughly [1/κ, 1]:
    /// a shared geometric diagonal decay with per-component jitter and a
    /// small rank-one perturbation for cross terms.
    pub fn sample_ill_conditioned(n: usize, d: usize, seed: u64, kappa: f64) -> Result<Self> {
        if n == 0 || d < 2 {
            return Err(Error::InvalidConfig(
                "ill-conditioned sample requires n ≥ 1 and d ≥ 2".into(),
            ));
        }
        if !kappa.is_finite() || kappa < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "condition target must be ≥ 1, got {kappa}"
            )));
        }
        let mut rng = SeededRng::new(seed);
        let scale = 0.05 / (d as f64).sqrt();
        let mut comps = Vec::with_capacity(n);
        for _ in 0..n {
            let diag = (0..d)
                .map(|j| {
                    let decay = kappa.powf(-(j as f64) / (d as f64 - 1.0));
                    decay * (0.9 + 0.2 * rng.next_f64())
                })
                .collect();
            let u = (0..d).map(|_| scale * rng.next_gaussian()).collect();
            let b = (0..d).map(|_| rng.next_gaussian()).collect();
            comps.push(QuadComponent::new(diag, u, b)?);
        }
        QuadraticSum::new(comps)
    }

    pub fn w_star(&self) -> &ParameterVector {
        &self.w_star
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }
}

impl FiniteSumObjective for QuadraticSum {
    fn n_components(&self) -> usize {
        self.components.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn component_value(&self, i: usize, w: &ParameterVector) -> Result<f64> {
        check_component_args(self.n_components(), self.dim, i, w)?;
        let c = &self.components[i];
        let ws = w.as_slice();
        let mut quad = 0.0;
        let mut uw = 0.0;
        let mut lin = 0.0;
        for j in 0..self.dim {
            quad += c.diag[j] * ws[j] * ws[j];
            uw += c.u[j] * ws[j];
            lin += c.b[j] * ws[j];
        }
        Ok(0.5 * (quad + uw * uw) - lin)
    }

    fn component_gradient_into(
        &self,
        i: usize,
        w: &ParameterVector,
        out: &mut ParameterVector,
    ) -> Result<()> {
        check_component_args(self.n_components(), self.dim, i, w)?;
        check_dim(self.dim, out)?;
        let c = &self.components[i];
        let ws = w.as_slice();
        let uw: f64 = c.u.iter().zip(ws).map(|(u, w)| u * w).sum();
        let out_s = out.as_mut_slice();
        for j in 0..self.dim {
            out_s[j] = c.diag[j] * ws[j] + uw * c.u[j] - c.b[j];
        }
        Ok(())
    }

    fn lipschitz(&self) -> f64 {
        self.l
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }

    fn max_component_curvature(&self, w: &ParameterVector) -> Result<f64> {
        check_dim(self.dim, w)?;
        Ok(self.l)
    }
}

/// Dense symmetric eigenvalues and linear solves for the small matrices
/// this fixture needs (d is tens, not thousands). Kept private: the rest
/// of the crate works with implicit sparse operators.
mod linalg {
    use crate::error::{Error, Result};

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    /// Unsorted; callers order them as needed.
    pub(super) fn sym_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
        let d = a.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let norm: f64 = a
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        for _ in 0..64 {
            let off: f64 = (0..d)
                .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
                .map(|(p, q)| m[p][q] * m[p][q])
                .sum();
            if off.sqrt() <= 1e-14 * (1.0 + norm) {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    if m[p][q].abs() <= 1e-300 {
                        continue;
                    }
                    let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                    for row in m.iter_mut() {
                        let (rkp, rkq) = (row[p], row[q]);
                        row[p] = c * rkp - s * rkq;
                        row[q] = s * rkp + c * rkq;
                    }
                }
            }
        }
        (0..d).map(|i| m[i][i]).collect()
    }

    /// Solve a·x = b by Gaussian elimination with partial pivoting.
    pub(super) fn lu_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
        let d = a.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x: Vec<f64> = b.to_vec();
        for col in 0..d {
            let mut piv = col;
            for r in (col + 1)..d {
                if m[r][col].abs() > m[piv][col].abs() {
                    piv = r;
                }
            }
            if m[piv][col].abs() < 1e-300 {
                return Err(Error::InvalidConfig(
                    "linear system is numerically singular".into(),
                ));
            }
            m.swap(col, piv);
            x.swap(col, piv);
            for r in (col + 1)..d {
                let f = m[r][col] / m[col][col];
                m[r][col] = 0.0;
                for c in (col + 1)..d {
                    m[r][c] -= f * m[col][c];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..d).rev() {
            let mut acc = x[col];
            for c in (col + 1)..d {
                acc -= m[col][c] * x[c];
            }
            x[col] = acc / m[col][col];
        }
        Ok(x)
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn eigenvalues_two_by_two() {
            let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
            let mut eigs = sym_eigenvalues(&a);
            eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let root = 5f64.sqrt();
            assert!((eigs[0] - (5.0 - root) / 2.0).abs() < 1e-12);
            assert!((eigs[1] - (5.0 + root) / 2.0).abs() < 1e-12);
        }

        #[test]
        fn eigenvalues_diagonal_passthrough() {
            let a = vec![
                vec![4.0, 0.0, 0.0],
                vec![0.0, -1.5, 0.0],
                vec![0.0, 0.0, 0.25],
            ];
            let mut eigs = sym_eigenvalues(&a);
            eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            assert_eq!(eigs, vec![-1.5, 0.25, 4.0]);
        }

        #[test]
        fn eigenvalues_preserve_trace() {
            let a = vec![
                vec![1.0, 0.3, -0.2, 0.05],
                vec![0.3, 2.0, 0.4, -0.1],
                vec![-0.2, 0.4, 0.5, 0.2],
                vec![0.05, -0.1, 0.2, 3.0],
            ];
            let eigs = sym_eigenvalues(&a);
            let trace: f64 = (0..4).map(|i| a[i][i]).sum();
            assert!((eigs.iter().sum::<f64>() - trace).abs() < 1e-12);
        }

        #[test]
        fn solve_two_by_two() {
            let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
            let x = lu_solve(&a, &[5.0, 10.0]).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-14);
            assert!((x[1] - 3.0).abs() < 1e-14);
        }

        #[test]
        fn solve_needs_pivoting() {
            // leading zero forces a row swap
            let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
            let x = lu_solve(&a, &[7.0, -2.0]).unwrap();
            assert_eq!(x, vec![-2.0, 7.0]);
        }

        #[test]
        fn solve_singular_reports_error() {
            let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
            assert!(lu_solve(&a, &[1.0, 1.0]).is_err());
        }

        #[test]
        fn solve_residual_small_on_random_spd() {
            // A = Mᵀ M + I for a fixed M is SPD
            let m = [
                [0.8, -0.3, 0.5],
                [0.2, 1.1, -0.7],
                [-0.4, 0.6, 0.9],
            ];
            let mut a = vec![vec![0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for row in &m {
                        a[i][j] += row[i] * row[j];
                    }
                }
                a[i][i] += 1.0;
            }
            let b = [1.0, -2.0, 0.5];
            let x = lu_solve(&a, &b).unwrap();
            for i in 0..3 {
                let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i];
                assert!(r.abs() < 1e-13);
            }
        }
    }
}
