//! Identity checks, brute-force oracles, and convergence-bound
//! calculators for the adjusted shuffling recursion.
//!
//! Three kinds of tools live here:
//!
//! * **Identity checks** over instrumented epochs: the cumulative-update
//!   identity Δ_m = (m+1)·Σ_t(∇f_{π^t}(w_t) − ∇f_{π^t}(w_{t−1})) + (m+1)·v_0
//!   (every gradient difference enters the epoch total with the same
//!   weight), and non-increase of ‖v_t‖ along the inner loop.
//! * **Brute-force oracles**: exact enumeration of the without-replacement
//!   prefix-mean variance over all C(n,m) subsets, feasible for n ≤ 10.
//! * **Bound calculators**: the strongly convex and non-convex rate
//!   bounds for both exact (m = n) and inexact (m < n) modes, plus the
//!   inner-size selection rule, evaluated exactly as stated so measured
//!   runs can be certified against them.
//!
//! Calculators use sequential multiplication for geometric factors, so
//! consecutive epochs of the same bound differ by exactly the contraction
//! factor — a structural property the certification suite relies on.

use crate::error::{Error, Result};
use crate::numerics::ParameterVector;
use crate::objective::FiniteSumObjective;
use crate::optimizers::InstrumentedEpoch;
use crate::shuffling::SeededRng;

/// Σ_{t=0}^{m} v_t for one instrumented epoch. Scaled by 1/(m+1) it is
/// the average update direction the epoch applied.
#[derive(Clone, Debug)]
pub struct CumulativeUpdate {
    delta: ParameterVector,
    m: usize,
}

impl CumulativeUpdate {
    pub fn from_epoch(epoch: &InstrumentedEpoch) -> Result<Self> {
        validate_epoch(epoch)?;
        let d = epoch.v[0].dim();
        let mut delta = vec![0.0; d];
        for v in &epoch.v {
            for (acc, &vj) in delta.iter_mut().zip(v.as_slice()) {
                *acc += vj;
            }
        }
        Ok(CumulativeUpdate {
            delta: ParameterVector::new(delta)?,
            m: epoch.m,
        })
    }

    pub fn delta(&self) -> &ParameterVector {
        &self.delta
    }

    /// Δ_m/(m+1), the equal-weight average over the epoch's updates.
    pub fn mean(&self) -> Result<ParameterVector> {
        let inv = 1.0 / (self.m + 1) as f64;
        ParameterVector::new(self.delta.as_slice().iter().map(|x| x * inv).collect())
    }
}

fn validate_epoch(epoch: &InstrumentedEpoch) -> Result<()> {
    if epoch.m == 0 || epoch.v.len() != epoch.m + 1 || epoch.grad_diffs.len() != epoch.m {
        return Err(Error::Precondition(format!(
            "instrumented epoch is malformed: m={}, {} direction snapshots, {} gradient diffs",
            epoch.m,
            epoch.v.len(),
            epoch.grad_diffs.len()
        )));
    }
    let d = epoch.v[0].dim();
    if epoch
        .v
        .iter()
        .chain(&epoch.grad_diffs)
        .any(|p| p.dim() != d)
    {
        return Err(Error::Precondition(
            "instrumented epoch mixes vector dimensions".into(),
        ));
    }
    Ok(())
}

/// Verifies the cumulative-update identity on a recorded epoch and
/// returns the max-absolute residual between its two sides:
/// `Σ_{t=0}^{m} v_t` versus `(m+1)·Σ_t d_t + (m+1)·v_0` with d_t the
/// recorded gradient differences.
pub fn check_delta_identity(epoch: &InstrumentedEpoch) -> Result<f64> {
    let lhs = CumulativeUpdate::from_epoch(epoch)?;
    let d = epoch.v[0].dim();
    let weight = (epoch.m + 1) as f64;
    let mut worst = 0.0f64;
    for j in 0..d {
        let mut diff_sum = 0.0;
        for g in &epoch.grad_diffs {
            diff_sum += g.as_slice()[j];
        }
        let rhs = weight * diff_sum + weight * epoch.v[0].as_slice()[j];
        let r = (lhs.delta.as_slice()[j] - rhs).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// [`check_delta_identity`] normalized by the identity's natural
/// magnitude, (m+1)·(1 + ‖v_0‖_∞ + Σ_t ‖d_t‖_∞), which bounds the
/// intermediate sums on both sides. Certification compares this against
/// a relative tolerance.
pub fn check_delta_identity_relative(epoch: &InstrumentedEpoch) -> Result<f64> {
    let residual = check_delta_identity(epoch)?;
    let inf = |p: &ParameterVector| p.as_slice().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mass: f64 = epoch.grad_diffs.iter().map(|g| inf(g)).sum();
    let scale = (epoch.m + 1) as f64 * (1.0 + inf(&epoch.v[0]) + mass);
    Ok(residual / scale)
}

/// Outcome of the ‖v_t‖ monotonicity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VMonotone {
    pub monotone: bool,
    /// First (t, ‖v_{t−1}‖², ‖v_t‖²) violating the non-increase, if any.
    pub first_violation: Option<(usize, f64, f64)>,
}

/// Checks ‖v_t‖² ≤ ‖v_{t−1}‖²·(1 + 1e-12) for t = 1..m on a recorded
/// epoch. The inner directions are non-increasing in norm when the step
/// is small enough and the components are convex; an oversized step on a
/// badly conditioned problem breaks it, which negative controls exploit.
pub fn check_v_monotone(epoch: &InstrumentedEpoch) -> Result<VMonotone> {
    validate_epoch(epoch)?;
    let mut prev = epoch.v[0].norm_sq()?;
    for (t, v) in epoch.v.iter().enumerate().skip(1) {
        let cur = v.norm_sq()?;
        if !(cur <= prev * (1.0 + 1e-12)) {
            return Ok(VMonotone {
                monotone: false,
                first_violation: Some((t, prev, cur)),
            });
        }
        prev = cur;
    }
    Ok(VMonotone {
        monotone: true,
        first_violation: None,
    })
}

/// Exact expectation of ‖∇P(w) − (1/m)Σ_{i∈B}∇f_i(w)‖² over all C(n,m)
/// unordered m-subsets B, by full enumeration. Feasible only for small n;
/// larger problems should use `variance_at` with the closed form
/// (n−m)σ²/(m(n−1)) instead.
pub fn brute_force_prefix_variance(
    obj: &dyn FiniteSumObjective,
    w: &ParameterVector,
    m: usize,
) -> Result<f64> {
    let n = obj.n_components();
    if n > 10 {
        return Err(Error::Precondition(format!(
            "enumeration over C({n},{m}) subsets is infeasible; for n > 10 use \
             variance_at with the closed form (n-m)*sigma_sq/(m*(n-1))"
        )));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidConfig(format!(
            "subset size m={m} outside valid range [1, {n}]"
        )));
    }
    let full = obj.full_gradient(w)?;
    let grads: Vec<ParameterVector> = (0..n)
        .map(|i| obj.component_gradient(i, w))
        .collect::<Result<_>>()?;
    let d = full.dim();

    // lexicographic enumeration of m-combinations of 0..n
    let mut subset: Vec<usize> = (0..m).collect();
    let mut total = 0.0;
    let mut count = 0u64;
    loop {
        let mut sq = 0.0;
        for j in 0..d {
            let mut mean = 0.0;
            for &i in &subset {
                mean += grads[i].as_slice()[j];
            }
            mean /= m as f64;
            let r = full.as_slice()[j] - mean;
            sq += r * r;
        }
        total += sq;
        count += 1;

        // advance to the next combination
        let mut k = m;
        loop {
            if k == 0 {
                return Ok(total / count as f64);
            }
            k -= 1;
            if subset[k] != k + n - m {
                subset[k] += 1;
                for j in k + 1..m {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// gap0 · factor^s by sequential multiplication, so consecutive s values
/// differ by exactly one multiplication with the factor.
fn geometric(factor: f64, s: usize, gap0: f64) -> f64 {
    let mut acc = gap0;
    for _ in 0..s {
        acc *= factor;
    }
    acc
}

fn require_positive(name: &'static str, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Precondition(format!(
            "{name} must be finite and positive, got {x}"
        )));
    }
    Ok(())
}

fn require_gap(gap0: f64) -> Result<()> {
    if !gap0.is_finite() || gap0 < 0.0 {
        return Err(Error::Precondition(format!(
            "initial gap must be finite and non-negative, got {gap0}"
        )));
    }
    Ok(())
}

/// Strongly convex exact-mode bound: (1 − η(n+1)μ/2)^s · gap0,
/// valid for 0 < η ≤ 1/(2nL).
pub fn exact_sc_bound(l: f64, mu: f64, eta: f64, n: usize, s: usize, gap0: f64) -> Result<f64> {
    require_positive("smoothness constant", l)?;
    require_positive("strong convexity constant", mu)?;
    require_positive("learning rate", eta)?;
    require_gap(gap0)?;
    if n == 0 {
        return Err(Error::Precondition("component count must be ≥ 1".into()));
    }
    if eta > 1.0 / (2.0 * n as f64 * l) {
        return Err(Error::Precondition(format!(
            "bound requires eta ≤ 1/(2nL) = {}, got {eta}",
            1.0 / (2.0 * n as f64 * l)
        )));
    }
    let factor = 1.0 - eta * (n + 1) as f64 * mu / 2.0;
    Ok(geometric(factor, s, gap0))
}

/// Non-convex exact-mode bound on the mean squared gradient norm over S
/// epochs: 2·gap0 / (η(n+1)(1 − η²n²L²)S), valid for 0 < η ≤ 1/(2nL).
pub fn exact_nc_bound(l: f64, eta: f64, n: usize, big_s: usize, gap0: f64) -> Result<f64> {
    require_positive("smoothness constant", l)?;
    require_positive("learning rate", eta)?;
    require_gap(gap0)?;
    if n == 0 || big_s == 0 {
        return Err(Error::Precondition(
            "component count and epoch count must be ≥ 1".into(),
        ));
    }
    if eta > 1.0 / (2.0 * n as f64 * l) {
        return Err(Error::Precondition(format!(
            "bound requires eta ≤ 1/(2nL) = {}, got {eta}",
            1.0 / (2.0 * n as f64 * l)
        )));
    }
    let t = eta * n as f64 * l;
    Ok(2.0 * gap0 / (eta * (n + 1) as f64 * (1.0 - t * t) * big_s as f64))
}

/// Strongly convex inexact-mode bound: α^s·gap0 + 6σ²/(η(m+1)μLm) with
/// α = 1 − η(m+1)μ/2, valid for 0 < η ≤ 1/(4mL).
pub fn inexact_sc_bound(
    l: f64,
    mu: f64,
    eta: f64,
    m: usize,
    s: usize,
    gap0: f64,
    sigma_sq: f64,
) -> Result<f64> {
    require_positive("smoothness constant", l)?;
    require_positive("strong convexity constant", mu)?;
    require_positive("learning rate", eta)?;
    require_gap(gap0)?;
    if m == 0 {
        return Err(Error::Precondition("inner size must be ≥ 1".into()));
    }
    if !sigma_sq.is_finite() || sigma_sq < 0.0 {
        return Err(Error::Precondition(format!(
            "variance must be finite and non-negative, got {sigma_sq}"
        )));
    }
    if eta > 1.0 / (4.0 * m as f64 * l) {
        return Err(Error::Precondition(format!(
            "bound requires eta ≤ 1/(4mL) = {}, got {eta}",
            1.0 / (4.0 * m as f64 * l)
        )));
    }
    let alpha = 1.0 - eta * (m + 1) as f64 * mu / 2.0;
    let floor = 6.0 * sigma_sq / (eta * (m + 1) as f64 * mu * l * m as f64);
    Ok(geometric(alpha, s, gap0) + floor)
}

/// Non-convex inexact-mode bound on the mean squared gradient norm:
/// 2·gap0/(η(m+1)(1−4m²L²η²)S) + 6σ²/(η(m+1)(1−4m²L²η²)Lm),
/// valid for 0 < η ≤ 1/(4mL).
pub fn inexact_nc_bound(
    l: f64,
    eta: f64,
    m: usize,
    big_s: usize,
    gap0: f64,
    sigma_sq: f64,
) -> Result<f64> {
    require_positive("smoothness constant", l)?;
    require_positive("learning rate", eta)?;
    require_gap(gap0)?;
    if m == 0 || big_s == 0 {
        return Err(Error::Precondition(
            "inner size and epoch count must be ≥ 1".into(),
        ));
    }
    if !sigma_sq.is_finite() || sigma_sq < 0.0 {
        return Err(Error::Precondition(format!(
            "variance must be finite and non-negative, got {sigma_sq}"
        )));
    }
    if eta > 1.0 / (4.0 * m as f64 * l) {
        return Err(Error::Precondition(format!(
            "bound requires eta ≤ 1/(4mL) = {}, got {eta}",
            1.0 / (4.0 * m as f64 * l)
        )));
    }
    let t = 2.0 * m as f64 * l * eta;
    let den = eta * (m + 1) as f64 * (1.0 - t * t);
    Ok(2.0 * gap0 / (den * big_s as f64) + 6.0 * sigma_sq / (den * l * m as f64))
}

/// The convergence constants of one configuration, with the inexact-mode
/// noise terms broken out so reports can show each piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoreticalBounds {
    /// Contraction factor 1 − η(m+1)μ/2 of the strongly convex rates.
    pub alpha: f64,
    /// Inexact-mode noise floor 6σ²/(η(m+1)μLm).
    pub noise_floor: f64,
    /// Exact-mode non-convex coefficient 2/(η(n+1)(1−η²n²L²)), the
    /// bound's numerator scale before division by gap-normalized S.
    /// Defined only while ηnL < 1 keeps its denominator positive; an
    /// inexact-regime step with m ≪ n can exceed that, leaving the
    /// exact-mode constant meaningless.
    pub exact_rate_coeff: Option<f64>,
    /// Inexact-mode non-convex coefficient 2/(η(m+1)(1−4m²L²η²)).
    pub inexact_rate_coeff: f64,
    /// Inexact-mode non-convex noise term 6σ²/(η(m+1)(1−4m²L²η²)Lm).
    pub inexact_noise_term: f64,
}

impl TheoreticalBounds {
    /// Computes every constant, requiring the inexact-regime step
    /// 0 < η ≤ 1/(4mL) and μ > 0 so that α lies strictly inside (0, 1)
    /// and the noise terms are positive.
    pub fn compute(
        l: f64,
        mu: f64,
        eta: f64,
        n: usize,
        m: usize,
        sigma_sq: f64,
    ) -> Result<TheoreticalBounds> {
        require_positive("smoothness constant", l)?;
        require_positive("strong convexity constant", mu)?;
        require_positive("learning rate", eta)?;
        if n == 0 || m == 0 || m > n {
            return Err(Error::Precondition(format!(
                "need 1 ≤ m ≤ n, got m={m}, n={n}"
            )));
        }
        if !sigma_sq.is_finite() || sigma_sq < 0.0 {
            return Err(Error::Precondition(format!(
                "variance must be finite and non-negative, got {sigma_sq}"
            )));
        }
        let cap = 1.0 / (4.0 * m as f64 * l);
        if eta > cap {
            return Err(Error::Precondition(format!(
                "constants require eta ≤ 1/(4mL) = {cap}, got {eta}"
            )));
        }
        let alpha = 1.0 - eta * (m + 1) as f64 * mu / 2.0;
        let noise_floor = 6.0 * sigma_sq / (eta * (m + 1) as f64 * mu * l * m as f64);
        let te = eta * n as f64 * l;
        let exact_rate_coeff =
            (te < 1.0).then(|| 2.0 / (eta * (n + 1) as f64 * (1.0 - te * te)));
        let ti = 2.0 * m as f64 * l * eta;
        let den = eta * (m + 1) as f64 * (1.0 - ti * ti);
        Ok(TheoreticalBounds {
            alpha,
            noise_floor,
            exact_rate_coeff,
            inexact_rate_coeff: 2.0 / den,
            inexact_noise_term: 6.0 * sigma_sq / (den * l * m as f64),
        })
    }
}

/// Regime selector for [`choose_inner_size`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerSizeSetting {
    StronglyConvex { mu: f64 },
    NonConvex,
}

/// The inner-loop size achieving the advertised complexity:
/// min{⌈96σ²/(με)⌉ − 1, n} when strongly convex, min{⌈σ²/ε²⌉, n}
/// otherwise, clamped below at 1. Saturating at n recovers exact mode.
pub fn choose_inner_size(
    sigma_sq: f64,
    eps: f64,
    n: usize,
    setting: InnerSizeSetting,
) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!(
            "accuracy must lie strictly inside (0, 1), got {eps}"
        )));
    }
    if !sigma_sq.is_finite() || sigma_sq < 0.0 {
        return Err(Error::Precondition(format!(
            "variance must be finite and non-negative, got {sigma_sq}"
        )));
    }
    if n == 0 {
        return Err(Error::Precondition("component count must be ≥ 1".into()));
    }
    let raw = match setting {
        InnerSizeSetting::StronglyConvex { mu } => {
            require_positive("strong convexity constant", mu)?;
            (96.0 * sigma_sq / (mu * eps)).ceil() - 1.0
        }
        InnerSizeSetting::NonConvex => (sigma_sq / (eps * eps)).ceil(),
    };
    Ok(if !raw.is_finite() || raw >= n as f64 {
        n
    } else if raw < 1.0 {
        1
    } else {
        raw as usize
    })
}

/// max over the given points of the gradient variance σ²(w) — the
/// trajectory-max surrogate certification feeds to the bound
/// calculators, since the theory assumes a uniform bound.
pub fn max_variance_over(
    obj: &dyn FiniteSumObjective,
    points: &[ParameterVector],
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Precondition(
            "variance surrogate needs at least one trajectory point".into(),
        ));
    }
    let mut worst = 0.0f64;
    for w in points {
        worst = worst.max(obj.variance_at(w)?);
    }
    Ok(worst)
}

/// One line of the smoothness/convexity audit.
#[derive(Clone, Debug)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub trials: usize,
    /// Worst observed statistic: max error for the gradient check, max
    /// ratio for Lipschitz, most negative normalized slack for strong
    /// convexity.
    pub worst: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// The audit over one objective: finite-difference gradients, the
/// L-Lipschitz gradient bound, and (when μ > 0) the strong-convexity
/// inequality, each at random Gaussian points.
#[derive(Clone, Debug)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs the assumption audit with `trials` random trials per check.
///
/// Gradients are compared against central finite differences with step
/// 1e-6 at tolerance 1e-5 per coordinate; gradient-difference ratios are
/// compared against the objective's L with 1e-9 relative headroom;
/// strong convexity uses the same headroom on a magnitude-normalized
/// slack.
pub fn run_assumption_suite(
    obj: &dyn FiniteSumObjective,
    trials: usize,
    seed: u64,
) -> Result<AssumptionReport> {
    if trials == 0 {
        return Err(Error::Precondition("audit needs at least one trial".into()));
    }
    let n = obj.n_components();
    let d = obj.dim();
    let mut rng = SeededRng::new(seed);
    let gaussian = |rng: &mut SeededRng| -> Result<ParameterVector> {
        ParameterVector::new((0..d).map(|_| rng.next_gaussian()).collect())
    };
    let h = 1e-6;
    let fd_tol = 1e-5;

    let mut fd_worst = 0.0f64;
    for _ in 0..trials {
        let w = gaussian(&mut rng)?;
        let i = rng.next_below(n);
        let grad = obj.component_gradient(i, &w)?;
        let mut probe = w.clone();
        for j in 0..d {
            let wj = w.as_slice()[j];
            probe.as_mut_slice()[j] = wj + h;
            let up = obj.component_value(i, &probe)?;
            probe.as_mut_slice()[j] = wj - h;
            let down = obj.component_value(i, &probe)?;
            probe.as_mut_slice()[j] = wj;
            let fd = (up - down) / (2.0 * h);
            fd_worst = fd_worst.max((fd - grad.as_slice()[j]).abs());
        }
    }

    let l = obj.lipschitz();
    let lip_tol = l * (1.0 + 1e-9);
    let mut lip_worst = 0.0f64;
    for _ in 0..trials {
        let wa = gaussian(&mut rng)?;
        let wb = gaussian(&mut rng)?;
        let i = rng.next_below(n);
        let ga = obj.component_gradient(i, &wa)?;
        let gb = obj.component_gradient(i, &wb)?;
        let mut dwsq = 0.0;
        let mut gsq = 0.0;
        for j in 0..d {
            let dw = wa.as_slice()[j] - wb.as_slice()[j];
            let dg = ga.as_slice()[j] - gb.as_slice()[j];
            dwsq += dw * dw;
            gsq += dg * dg;
        }
        if dwsq > 1e-24 {
            lip_worst = lip_worst.max((gsq / dwsq).sqrt());
        }
    }

    let mut checks = vec![
        AssumptionCheck {
            name: "gradient matches central finite differences",
            trials,
            worst: fd_worst,
            threshold: fd_tol,
            passed: fd_worst <= fd_tol,
        },
        AssumptionCheck {
            name: "gradient differences within the smoothness constant",
            trials,
            worst: lip_worst,
            threshold: lip_tol,
            passed: lip_worst <= lip_tol,
        },
    ];

    let mu = obj.strong_convexity();
    if mu > 0.0 {
        let mut sc_worst = f64::INFINITY;
        for _ in 0..trials {
            let wa = gaussian(&mut rng)?;
            let wb = gaussian(&mut rng)?;
            let pa = obj.value(&wa)?;
            let pb = obj.value(&wb)?;
            let gb = obj.full_gradient(&wb)?;
            let mut inner = 0.0;
            let mut dist_sq = 0.0;
            for j in 0..d {
                let dw = wa.as_slice()[j] - wb.as_slice()[j];
                inner += gb.as_slice()[j] * dw;
                dist_sq += dw * dw;
            }
            let slack = pa - pb - inner - mu / 2.0 * dist_sq;
            sc_worst = sc_worst.min(slack / (1.0 + pa.abs() + pb.abs()));
        }
        checks.push(AssumptionCheck {
            name: "strong-convexity lower bound holds",
            trials,
            worst: sc_worst,
            threshold: -1e-9,
            passed: sc_worst >= -1e-9,
        });
    }

    Ok(AssumptionReport { checks })
}
