//! The norm functional, the gradient map, and flow to minimal vectors.
//!
//! The functional f(v) = ½‖v‖² restricted to an orbit G·v attains its
//! infimum exactly on the closed orbit in the fiber of v. Gradient descent
//! along p-directions (the gradient map μ_p, with ⟨μ_p(v),ξ⟩ = ⟨ξ·v,v⟩ for
//! ξ ∈ p) converges to a minimal vector, which represents the unique
//! closed orbit of the fiber. A vanishing limit detects the nullcone.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::CompatibleGroup;
use crate::error::{CoreError, Result};

/// The norm functional f(v) = ½‖v‖².
pub fn value_f(v: &DVector<f64>) -> f64 {
    0.5 * v.norm_squared()
}

/// Options controlling the descent flow.
#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    /// Residual ‖μ_p‖ below which a point counts as minimal.
    pub flow_tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    /// Backtracking contraction factor.
    pub contraction: f64,
    pub max_backtracks: usize,
    /// Nullcone threshold, relative to f at the start point...
    pub null_tol_rel: f64,
    /// ...with an absolute floor (strata are cones, so the test is
    /// scale-relative).
    pub null_tol_floor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            flow_tol: 1e-9,
            max_iter: 50_000,
            armijo_c: 1e-4,
            contraction: 0.5,
            max_backtracks: 60,
            null_tol_rel: 1e-8,
            null_tol_floor: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlowStatus {
    /// Residual dropped below `flow_tol`.
    Minimal,
    /// Iteration or backtracking budget exhausted.
    MaxIterations,
    /// The iteration produced values outside the representable range.
    Diverged,
}

/// Outcome of minimizing f along an orbit.
#[derive(Debug, Clone, Serialize)]
pub struct FlowResult {
    pub limit: Vec<f64>,
    pub f_start: f64,
    pub f_limit: f64,
    /// ‖μ_p(limit)‖.
    pub residual: f64,
    pub iterations: usize,
    pub status: FlowStatus,
}

impl FlowResult {
    pub fn limit_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.limit)
    }

    /// Scale-relative nullcone threshold for this flow's start point.
    pub fn null_tol(&self, opts: &FlowOptions) -> f64 {
        (opts.null_tol_rel * self.f_start).max(opts.null_tol_floor)
    }

    /// True when the limit is indistinguishable from 0 at the nullcone
    /// threshold.
    pub fn in_nullcone(&self, opts: &FlowOptions) -> bool {
        self.f_limit <= self.null_tol(opts)
    }

    /// The point representing the closed orbit of this fiber: the flow
    /// limit, or exactly 0 when the limit lies under the nullcone
    /// threshold (the closed orbit there is the origin itself).
    pub fn closed_orbit_representative(&self, opts: &FlowOptions) -> DVector<f64> {
        if self.in_nullcone(opts) {
            DVector::zeros(self.limit.len())
        } else {
            self.limit_vector()
        }
    }
}

/// Components ⟨ξᵢ·v, v⟩ of the gradient map over a generator list.
pub(crate) fn gradient_with(p_mats: &[DMatrix<f64>], v: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(p_mats.len(), |i, _| (&p_mats[i] * v).dot(v))
}

/// φ(X)·v with φ(x) = (eˣ − 1)/x, by the vector series Σ Xⁿv/(n+1)!.
/// Accurate to machine precision for ‖X‖ ≲ 2, which the step policy
/// guarantees (the initial step 1/(1+‖μ‖) bounds ‖2A‖ < 2).
fn phi_apply(x: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut acc = v.clone();
    let mut term = v.clone();
    for k in 1..=28 {
        term = (x * &term) / ((k + 1) as f64);
        acc += &term;
    }
    acc
}

/// f(e^A v) − f(v) = ½ vᵀ(e^{2A} − I)v = vᵀ A φ(2A) v, computed without
/// the catastrophic cancellation of subtracting two nearby f values. This
/// keeps the Armijo test meaningful down to steps far below the float
/// resolution of f itself.
fn descent_delta(a: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let u = phi_apply(&(a * 2.0), v);
    (a * v).dot(&u)
}

/// e^A v = v + A φ(A) v by the same series.
fn exp_apply(a: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    v + a * phi_apply(a, v)
}

/// Gradient descent on f along the generator directions, with Armijo
/// backtracking (initial step 1/(1+‖μ‖)). f never increases.
pub(crate) fn flow_with(
    p_mats: &[DMatrix<f64>],
    v0: &DVector<f64>,
    opts: &FlowOptions,
) -> Result<FlowResult> {
    if v0.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::NonFinite {
            iteration: 0,
            f_last: f64::NAN,
        });
    }
    let f_start = value_f(v0);
    let mut v = v0.clone();
    let mut f = f_start;
    let dim_v = v0.len();
    let mut iterations = 0usize;
    loop {
        let mu = gradient_with(p_mats, &v);
        let r = mu.norm();
        if !r.is_finite() {
            return Err(CoreError::NonFinite {
                iteration: iterations,
                f_last: f,
            });
        }
        if r <= opts.flow_tol {
            return Ok(FlowResult {
                limit: v.as_slice().to_vec(),
                f_start,
                f_limit: value_f(&v).min(f_start),
                residual: r,
                iterations,
                status: FlowStatus::Minimal,
            });
        }
        if iterations >= opts.max_iter {
            return Ok(FlowResult {
                limit: v.as_slice().to_vec(),
                f_start,
                f_limit: value_f(&v).min(f_start),
                residual: r,
                iterations,
                status: FlowStatus::MaxIterations,
            });
        }

        // Realized descent direction -M, M = Σ μᵢ Pᵢ. The orthonormal basis
        // makes ‖M‖_F = r exactly.
        let mut m = DMatrix::zeros(dim_v, dim_v);
        for (c, p) in mu.iter().zip(p_mats) {
            m += p * *c;
        }

        // Δf for the step exp(-tM): series route for small steps (exact at
        // any scale), matrix-exponential route for large ones where the
        // decrease dwarfs rounding anyway. Returns (delta, new point).
        let trial = |t: f64, v: &DVector<f64>| -> Option<(f64, DVector<f64>)> {
            let a = &m * (-t);
            if 2.0 * t * r <= 1.5 {
                let delta = descent_delta(&a, v);
                delta.is_finite().then(|| (delta, exp_apply(&a, v)))
            } else {
                let w = a.exp() * v;
                let fw = value_f(&w);
                fw.is_finite().then(|| (fw - value_f(v), w))
            }
        };

        let mut t = 1.0 / (1.0 + r);
        let armijo = |t: f64, delta: f64| delta <= -opts.armijo_c * t * r * r;
        let mut accepted: Option<(f64, DVector<f64>)> = None;
        match trial(t, &v) {
            Some((delta, w)) if armijo(t, delta) => {
                // Greedy expansion: double the step while the decrease keeps
                // improving and Armijo still holds. Without this, flows into
                // the nullcone (zero transverse curvature) slow to O(1/n).
                accepted = Some((delta, w));
                for _ in 0..60 {
                    let t2 = t * 2.0;
                    match trial(t2, &v) {
                        Some((d2, w2))
                            if armijo(t2, d2) && d2 < accepted.as_ref().unwrap().0 =>
                        {
                            accepted = Some((d2, w2));
                            t = t2;
                        }
                        _ => break,
                    }
                }
            }
            _ => {
                // Backtrack.
                let mut bt = 0;
                while bt < opts.max_backtracks {
                    t *= opts.contraction;
                    if let Some((delta, w)) = trial(t, &v) {
                        if armijo(t, delta) {
                            accepted = Some((delta, w));
                            break;
                        }
                    }
                    bt += 1;
                }
            }
        }
        iterations += 1;
        match accepted {
            Some((delta, w)) => {
                v = w;
                f += delta;
            }
            None => {
                // No representable descent left; report honestly.
                return Ok(FlowResult {
                    limit: v.as_slice().to_vec(),
                    f_start,
                    f_limit: value_f(&v).min(f_start),
                    residual: r,
                    iterations,
                    status: FlowStatus::Diverged,
                });
            }
        }
    }
}

/// The gradient map μ_p(v) as a coefficient vector over the orthonormalized
/// p-basis of the group.
pub fn gradient_map(group: &CompatibleGroup, v: &DVector<f64>) -> DVector<f64> {
    gradient_with(group.p_mats(), v)
}

/// Realized matrix Σ μᵢ(v) pᵢ of the gradient map at v.
pub fn gradient_realized(group: &CompatibleGroup, v: &DVector<f64>) -> DMatrix<f64> {
    let mu = gradient_map(group, v);
    let mut m = DMatrix::zeros(group.dim_v(), group.dim_v());
    for (c, p) in mu.iter().zip(group.p_mats()) {
        m += p * *c;
    }
    m
}

/// Flow v along −μ_p to a minimal vector of its orbit closure.
pub fn flow_to_minimal(
    group: &CompatibleGroup,
    v: &DVector<f64>,
    opts: &FlowOptions,
) -> Result<FlowResult> {
    flow_with(group.p_mats(), v, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrbitKind {
    Closed,
    NonClosed,
}

/// Orbit classification derived from a converged flow.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitStatus {
    pub kind: OrbitKind,
    pub in_nullcone: bool,
    pub isotropy_dim_start: usize,
    pub isotropy_dim_limit: usize,
}

/// Classify the orbit through v: closed iff the isotropy dimension does not
/// jump between v and the flow limit (non-closed orbits have strictly
/// larger dimension than the closed orbit in their fiber).
pub fn orbit_status(
    group: &CompatibleGroup,
    v: &DVector<f64>,
    opts: &FlowOptions,
) -> Result<(OrbitStatus, FlowResult)> {
    let flow = flow_to_minimal(group, v, opts)?;
    if flow.status != FlowStatus::Minimal {
        return Err(CoreError::FlowFailed(format!(
            "flow stopped with status {:?} at residual {:.3e}",
            flow.status, flow.residual
        )));
    }
    let d_start = crate::isotropy::isotropy_algebra(group, v).dim_total();
    let rep_point = flow.closed_orbit_representative(opts);
    let floor = crate::isotropy::limit_floor(opts.flow_tol, &rep_point);
    let d_limit =
        crate::isotropy::isotropy_algebra_with_floor(group, &rep_point, floor).dim_total();
    let status = OrbitStatus {
        kind: if d_limit == d_start {
            OrbitKind::Closed
        } else {
            OrbitKind::NonClosed
        },
        in_nullcone: flow.in_nullcone(opts),
        isotropy_dim_start: d_start,
        isotropy_dim_limit: d_limit,
    };
    Ok((status, flow))
}
