//! Exact solution of the linearised radial system.
//!
//! Around a rest state the system reduces to a linear wave system with
//! signal speed 1/sqrt(3). With `a0` extended evenly and `b0` oddly, the
//! solution at time t and radius x > 0 is an explicit combination of data
//! values at x +- t/sqrt(3) and of the primitives A0, B0 of u*a0(u) and
//! b0(u). The same formulas also give the classical reference solution for
//! the imploding two-state profile, including the reflected shock.

use crate::error::{Result, UrelError};
use crate::piecewise::{build_primitives, PiecewiseData, Primitives};
use crate::state::SQRT3;

/// Radii below this are treated as the coordinate singularity at x = 0.
pub const MIN_RADIUS: f64 = 1e-10;

/// Default probe radii for the boundary limit extrapolation.
pub const BOUNDARY_RADII: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Clone, Debug)]
pub struct LinearSolution {
    data: PiecewiseData,
    prim: Primitives,
}

impl LinearSolution {
    pub fn new(data: PiecewiseData) -> Self {
        let prim = build_primitives(&data);
        Self { data, prim }
    }

    pub fn data(&self) -> &PiecewiseData {
        &self.data
    }

    /// Evaluate (a, b) at time t >= 0 and radius x >= MIN_RADIUS.
    pub fn eval(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(UrelError::NegativeTime(t));
        }
        if !(x >= MIN_RADIUS) {
            return Err(UrelError::RadiusTooSmall(x));
        }
        let tau = t / SQRT3;
        let (yp, ym) = (x + tau, x - tau);
        let (ap, bp) = self.data.eval_extended(yp);
        let (am, bm) = self.data.eval_extended(ym);
        let aap = self.prim.a_prim(yp);
        let aam = self.prim.a_prim(ym);
        let bbp = self.prim.b_prim(yp);
        let bbm = self.prim.b_prim(ym);

        let half_x = 0.5 / x;
        let a = half_x * (yp * ap + ym * am) - SQRT3 * half_x * (yp * bp + bbp)
            + SQRT3 * half_x * (ym * bm + bbm);
        let b = -half_x / SQRT3 * (yp * ap - aap / x)
            + half_x / SQRT3 * (ym * am - aam / x)
            + half_x * (yp * bp - tau / x * bbp)
            + half_x * (ym * bm + tau / x * bbm);
        Ok((a, b))
    }

    /// Polynomial extrapolation of b(t, x) to x = 0 through the given probe
    /// radii. Refuses data that is not twice differentiable where it matters:
    /// any value jump at all, or a breakpoint kink at the sonic radius
    /// t/sqrt(3) whose signal reaches the origin at exactly time t.
    pub fn boundary_limit(&self, t: f64, radii: &[f64]) -> Result<f64> {
        if !(t > 0.0) {
            return Err(UrelError::NegativeTime(t));
        }
        if radii.is_empty() {
            return Err(UrelError::BadExtrapolationRadii);
        }
        for w in radii.windows(2) {
            if !(w[1] < w[0]) {
                return Err(UrelError::BadExtrapolationRadii);
            }
        }
        if !(radii[0].is_finite() && radii[radii.len() - 1] >= MIN_RADIUS) {
            return Err(UrelError::BadExtrapolationRadii);
        }
        if let Some(r) = self.data.first_value_jump() {
            return Err(UrelError::DiscontinuousData(r));
        }
        let tau = t / SQRT3;
        if self.data.kink_near(tau, 1e-12) {
            return Err(UrelError::DiscontinuousData(tau));
        }
        let mut vals = Vec::with_capacity(radii.len());
        for &r in radii {
            vals.push(self.eval(t, r)?.1);
        }
        // Neville's scheme, evaluated at x = 0.
        let n = vals.len();
        for level in 1..n {
            for i in 0..n - level {
                let (xi, xj) = (radii[i], radii[i + level]);
                vals[i] = (xj * vals[i] - xi * vals[i + 1]) / (xj - xi);
            }
        }
        Ok(vals[0])
    }
}

/// Two-state imploding profile: a0 = 1 inside radius 1, a0 = 2 beyond, b0 = 0.
pub fn imploding_shock_data() -> PiecewiseData {
    PiecewiseData::piecewise_constant(&[1.0], &[1.0, 2.0], &[0.0, 0.0])
        .expect("reference profile is admissible")
}

/// Region of the (t, x) quarter plane for the imploding profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Undisturbed inner state ahead of the incoming front.
    Inner,
    /// Between the fronts, where the solution varies.
    Wave,
    /// Undisturbed outer state beyond the outgoing front.
    Outer,
    /// Behind the front reflected at the origin.
    Reflected,
}

/// Closed-form solution of the linearised system for the imploding profile.
///
/// Fronts: x = 1 - t/sqrt(3) (incoming, t < sqrt(3)), x = t/sqrt(3) - 1
/// (reflected, t > sqrt(3)) and x = 1 + t/sqrt(3) (outgoing). Points within
/// 1e-12 of a front are rejected since the solution jumps there.
pub fn imploding_shock_exact(t: f64, x: f64) -> Result<(f64, f64, Region)> {
    if !(t > 0.0) {
        return Err(UrelError::NegativeTime(t));
    }
    if !(x >= MIN_RADIUS) {
        return Err(UrelError::RadiusTooSmall(x));
    }
    let tau = t / SQRT3;
    let line_tol = 1e-12;
    if (x - (1.0 + tau)).abs() <= line_tol
        || (tau < 1.0 && (x - (1.0 - tau)).abs() <= line_tol)
        || (tau > 1.0 && (x - (tau - 1.0)).abs() <= line_tol)
    {
        return Err(UrelError::OnShockLine { t, x });
    }
    if x > 1.0 + tau {
        return Ok((2.0, 0.0, Region::Outer));
    }
    if tau < 1.0 && x < 1.0 - tau {
        return Ok((1.0, 0.0, Region::Inner));
    }
    if tau > 1.0 && x < tau - 1.0 {
        return Ok((2.0, 0.0, Region::Reflected));
    }
    let a = 1.5 + t / (2.0 * SQRT3 * x);
    let b = (t * t - 3.0 * (1.0 + x * x)) / (12.0 * SQRT3 * x * x);
    Ok((a, b, Region::Wave))
}

/// Jump speed (b_right - b_left) / (a_right - a_left).
/// Central-difference residual of the two balance laws at (t, x) with
/// stencil width h: d_t(x^2 a) + d_x(x^2 b) and
/// d_t(x^2 b) + d_x(x^2 a / 3) - 2 x a / 3; returns the larger magnitude.
/// A second-order signal for twice differentiable solutions.
pub fn pde_residual(sol: &LinearSolution, t: f64, x: f64, h: f64) -> Result<f64> {
    let (apt, bpt) = sol.eval(t + h, x)?;
    let (amt, bmt) = sol.eval(t - h, x)?;
    let (apx, bpx) = sol.eval(t, x + h)?;
    let (amx, bmx) = sol.eval(t, x - h)?;
    let (a0, _) = sol.eval(t, x)?;
    let r1 = (x * x * (apt - amt)) / (2.0 * h)
        + ((x + h) * (x + h) * bpx - (x - h) * (x - h) * bmx) / (2.0 * h);
    let r2 = (x * x * (bpt - bmt)) / (2.0 * h)
        + ((x + h) * (x + h) * apx / 3.0 - (x - h) * (x - h) * amx / 3.0) / (2.0 * h)
        - 2.0 * x * a0 / 3.0;
    Ok(r1.abs().max(r2.abs()))
}

pub fn rh_speed(left: (f64, f64), right: (f64, f64)) -> Result<f64> {
    let da = right.0 - left.0;
    if da == 0.0 {
        return Err(UrelError::DegenerateJump);
    }
    Ok((right.1 - left.1) / da)
}
