//! Replacing a PC matrix by a nearby consistent one.
//!
//! The objective is the sum of squared metric distances between the input
//! entries and the entries of a consistent matrix generated by a gauge vector:
//!
//! ```text
//! f(λ) = Σ_{i<j} d(a[i][j], c[i][j](λ))²
//! ```
//!
//! For ℝ₊* and U(1) the minimizer is available in closed form (row means of
//! the logarithms). For other groups the objective is minimized by gradient
//! descent in exponential coordinates, `λ_m ← λ_m·exp(−η·∇_m f)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::pc_matrix::{
    from_gauge_vector_with, GaugeVector, Indicator, IndicatorMap, PcMatrix, Variance,
};

/// How a descent run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentStatus {
    /// Closed-form projection, no descent.
    ClosedForm,
    Converged,
    MaxIterReached,
}

#[derive(Debug, Clone)]
pub struct ConsistencizationResult {
    /// Normalized gauge vector, `λ_0 = 1_G`.
    pub gauge: GaugeVector,
    /// The consistent matrix generated by `gauge`, same variance as the input.
    pub consistent: PcMatrix,
    /// `Σ_{i<j} d(a[i][j], c[i][j])²`.
    pub residual: f64,
    pub ii_before: f64,
    pub ii_after: f64,
    pub iterations: usize,
    pub status: DescentStatus,
    /// Objective after initialization and after every accepted step.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Initial step size; `None` picks `1/(2n)`.
    pub step: Option<f64>,
    /// Stop once an accepted step lowers the objective by less than this.
    pub tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            max_iter: 10_000,
            step: None,
            tol: 1e-15,
        }
    }
}

fn require_gap_free(a: &PcMatrix) -> Result<()> {
    let v = a.validate();
    if !v.is_empty() {
        return Err(Error::InvalidMatrix(v));
    }
    if a.has_gaps() {
        return Err(Error::InvalidArgument(
            "matrix has gaps; use simplicial consistencization".into(),
        ));
    }
    Ok(())
}

/// Least-squares objective of `λ` against `a`, in `a`'s variance.
pub fn objective(a: &PcMatrix, lambda: &GaugeVector) -> Result<f64> {
    let c = from_gauge_vector_with(lambda, a.variance())?;
    residual(a, &c)
}

fn residual(a: &PcMatrix, c: &PcMatrix) -> Result<f64> {
    let n = a.n();
    let mut terms = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (Some(x), Some(y)) = (a.get(i, j), c.get(i, j)) else {
                return Err(Error::GapsPresent);
            };
            terms.push(x.distance(y)?.powi(2));
        }
    }
    Ok(terms.iter().sum())
}

/// Gradient of [`objective`] for a covariant matrix, with respect to right
/// perturbations `λ_m ↦ λ_m·exp(ξ)`. Entry `m` has the Lie-algebra dimension
/// of the group; entry 0 is included although descent keeps `λ_0` fixed.
pub fn objective_gradient(a: &PcMatrix, lambda: &GaugeVector) -> Result<Vec<Vec<f64>>> {
    if a.variance() != Variance::Covariant {
        return Err(Error::InvalidArgument(
            "gradient is defined for covariant matrices; dualize first".into(),
        ));
    }
    let n = a.n();
    if lambda.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: lambda.len(),
        });
    }
    let group = a.group();
    let dim = group.lie_dim();
    let l = lambda.as_slice();
    let mut grad = vec![vec![0.0; dim]; n];
    for i in 0..n {
        for j in i + 1..n {
            let aij = a.get(i, j).ok_or(Error::GapsPresent)?;
            let c = l[i].inverse().mul(&l[j])?;
            // ∂/∂ξ d(a, c·e^ξ)² = 2 log(a⁻¹c); ∂/∂ξ d(a, e^{−ξ}·c)² = 2 log(a·c⁻¹)
            let at_j = group.log_coords(&aij.inverse().mul(&c)?)?;
            let at_i = group.log_coords(&aij.mul(&c.inverse())?)?;
            for d in 0..dim {
                grad[j][d] += 2.0 * at_j[d];
                grad[i][d] += 2.0 * at_i[d];
            }
        }
    }
    Ok(grad)
}

fn finish(
    a: &PcMatrix,
    gauge: GaugeVector,
    iterations: usize,
    status: DescentStatus,
    objective_trace: Vec<f64>,
) -> Result<ConsistencizationResult> {
    let gauge = gauge.normalized(a.variance())?;
    let consistent = from_gauge_vector_with(&gauge, a.variance())?;
    let residual = residual(a, &consistent)?;
    let ii_before = a.ii_indicator(&Indicator::Distance)?.value;
    let ii_after = consistent.ii_indicator(&Indicator::Distance)?.value;
    Ok(ConsistencizationResult {
        gauge,
        consistent,
        residual,
        ii_before,
        ii_after,
        iterations,
        status,
        objective_trace,
    })
}

/// Closed-form least-squares projection for ℝ₊* and U(1).
///
/// In log coordinates `ℓ_i = −(1/n)·Σ_k log a[i][k]` (principal angles for
/// U(1)), normalized to `ℓ_0 = 0`. On U(1) the principal branch can pick the
/// wrong winding; when some entry ends up more than π/2 away from the
/// projection, descent is run from the closed form and the better result kept.
pub fn consistencize_abelian(a: &PcMatrix) -> Result<ConsistencizationResult> {
    let group = a.group();
    if !matches!(group, Group::RPlus | Group::U1) {
        return Err(Error::RequiresAbelian("consistencize_abelian (rplus or u1)"));
    }
    require_gap_free(a)?;
    let n = a.n();
    let logs: Vec<f64> = (0..n)
        .map(|i| {
            let s: f64 = (0..n)
                .map(|k| group.log_coords(a.get(i, k).expect("gap-free")).map(|v| v[0]))
                .sum::<Result<f64>>()?;
            Ok(-s / n as f64)
        })
        .collect::<Result<_>>()?;
    let gauge = GaugeVector::new(
        logs.iter()
            .map(|l| group.exp_coords(&[l - logs[0]]))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let closed = finish(a, gauge, 0, DescentStatus::ClosedForm, Vec::new())?;
    let closed = ConsistencizationResult {
        objective_trace: vec![closed.residual],
        ..closed
    };

    if group == Group::U1 && max_entry_distance(a, &closed.consistent)? > std::f64::consts::FRAC_PI_2 {
        let refined = descend(a, closed.gauge.clone(), &DescentOptions::default())?;
        if refined.residual < closed.residual {
            return Ok(refined);
        }
    }
    Ok(closed)
}

fn max_entry_distance(a: &PcMatrix, c: &PcMatrix) -> Result<f64> {
    let n = a.n();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max(a.get(i, j).unwrap().distance(c.get(i, j).unwrap())?);
        }
    }
    Ok(m)
}

/// Gradient descent on the least-squares objective, for any group.
///
/// Starts from `λ_j = a[0][j]`, which is exact for consistent input. The step
/// is halved whenever a trial step raises the objective or lands where the
/// logarithm is singular.
pub fn consistencize_riemannian(
    a: &PcMatrix,
    opts: &DescentOptions,
) -> Result<ConsistencizationResult> {
    require_gap_free(a)?;
    let init = GaugeVector::new((0..a.n()).map(|j| *a.get(0, j).unwrap()).collect())?;
    descend(a, init, opts)
}

fn descend(
    a: &PcMatrix,
    init: GaugeVector,
    opts: &DescentOptions,
) -> Result<ConsistencizationResult> {
    // contravariant problems are covariant problems on the transpose with
    // λ replaced by λ⁻¹
    let (work, init) = match a.variance() {
        Variance::Covariant => (a.clone(), init),
        Variance::Contravariant => (
            a.dualize()?,
            GaugeVector::new(init.as_slice().iter().map(Element::inverse).collect())?,
        ),
    };
    let (lambda, iterations, status, trace) = descend_covariant(&work, init, opts)?;
    let lambda = match a.variance() {
        Variance::Covariant => lambda,
        Variance::Contravariant => {
            GaugeVector::new(lambda.as_slice().iter().map(Element::inverse).collect())?
        }
    };
    finish(a, lambda, iterations, status, trace)
}

fn step_gauge(
    group: Group,
    lambda: &GaugeVector,
    grad: &[Vec<f64>],
    step: f64,
) -> Result<GaugeVector> {
    let elems = lambda
        .as_slice()
        .iter()
        .zip(grad)
        .enumerate()
        .map(|(m, (l, g))| {
            if m == 0 {
                return Ok(*l);
            }
            let v: Vec<f64> = g.iter().map(|x| -step * x).collect();
            l.mul(&group.exp_coords(&v)?)
        })
        .collect::<Result<Vec<_>>>()?;
    GaugeVector::new(elems)
}

type DescentOutcome = (GaugeVector, usize, DescentStatus, Vec<f64>);

fn descend_covariant(
    a: &PcMatrix,
    init: GaugeVector,
    opts: &DescentOptions,
) -> Result<DescentOutcome> {
    let group = a.group();
    let n = a.n();
    let mut step = opts.step.unwrap_or(1.0 / (2.0 * n as f64));
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size {step}")));
    }
    let min_step = step * 1e-30;

    let mut lambda = init;
    let mut f = objective(a, &lambda)?;
    let mut trace = vec![f];
    if group.lie_dim() == 0 {
        return Ok((lambda, 0, DescentStatus::Converged, trace));
    }
    let mut grad = match objective_gradient(a, &lambda) {
        Ok(g) => g,
        Err(Error::LogBranchSingularity) => {
            // nudge off the cut locus along an arbitrary direction
            let nudge = vec![vec![1e-6; group.lie_dim()]; n];
            lambda = step_gauge(group, &lambda, &nudge, 1.0)?;
            f = objective(a, &lambda)?;
            trace = vec![f];
            objective_gradient(a, &lambda)?
        }
        Err(e) => return Err(e),
    };

    let mut iterations = 0;
    while iterations < opts.max_iter {
        let grad_norm2: f64 = grad.iter().skip(1).flatten().map(|x| x * x).sum();
        if grad_norm2 == 0.0 {
            return Ok((lambda, iterations, DescentStatus::Converged, trace));
        }
        let mut singular = false;
        let accepted = loop {
            if step < min_step {
                if singular {
                    return Err(Error::StepUnderflow);
                }
                // no descent direction left at working precision
                break None;
            }
            let cand = step_gauge(group, &lambda, &grad, step)?;
            let f_new = objective(a, &cand)?;
            if f_new > f {
                step *= 0.5;
                continue;
            }
            match objective_gradient(a, &cand) {
                Ok(g) => break Some((cand, f_new, g)),
                Err(Error::LogBranchSingularity) => {
                    singular = true;
                    step *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };
        let Some((cand, f_new, g)) = accepted else {
            return Ok((lambda, iterations, DescentStatus::Converged, trace));
        };
        let decrease = f - f_new;
        if decrease < opts.tol {
            if decrease > 0.0 {
                lambda = cand;
                trace.push(f_new);
            }
            return Ok((lambda, iterations, DescentStatus::Converged, trace));
        }
        lambda = cand;
        f = f_new;
        grad = g;
        trace.push(f);
        iterations += 1;
    }
    Ok((lambda, iterations, DescentStatus::MaxIterReached, trace))
}

/// Membership in `V_ε = {A : ii_In(A) < ε}`.
pub fn epsilon_membership<I: IndicatorMap + ?Sized>(
    a: &PcMatrix,
    eps: f64,
    indicator: &I,
) -> Result<bool> {
    if eps < 0.0 || eps.is_nan() {
        return Err(Error::NegativeEpsilon(eps));
    }
    Ok(a.ii_indicator(indicator)?.value < eps)
}
