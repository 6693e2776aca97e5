//! Piecewise linear radial initial data and its exact integral primitives.
//!
//! Data lives on [0, inf): strictly increasing breakpoints starting at 0,
//! one linear piece of `a0` and `b0` per interval, the last piece unbounded.
//! For the exact solution formulas of the linearised system the data is
//! extended to negative radii with `a0` even and `b0` odd; consistently,
//! when `b0` is continuous at 0 its odd extension forces `b0(0) = 0`
//! (a nonzero constant `b0` is allowed and simply has a jump at 0).

use crate::error::{Result, UrelError};

/// Tolerance scale used to decide whether two segment limits agree.
const JUMP_TOL: f64 = 1e-9;

/// One linear piece: `value + slope * (x - left_break)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearCoef {
    pub value: f64,
    pub slope: f64,
}

impl LinearCoef {
    pub fn constant(value: f64) -> Self {
        Self { value, slope: 0.0 }
    }

    fn at(self, d: f64) -> f64 {
        self.value + self.slope * d
    }
}

#[derive(Clone, Debug)]
pub struct PiecewiseData {
    breaks: Vec<f64>,
    a: Vec<LinearCoef>,
    b: Vec<LinearCoef>,
}

fn err(msg: impl Into<String>) -> UrelError {
    UrelError::Piecewise(msg.into())
}

impl PiecewiseData {
    /// Segment i covers [breaks[i], breaks[i+1]); the last segment covers
    /// [breaks.last(), inf). Requires breaks[0] == 0, strictly increasing
    /// breakpoints and |b0| < a0 on every segment closure (for the unbounded
    /// tail this means a nondecreasing cone margin, slope_a >= |slope_b|).
    pub fn new(breaks: Vec<f64>, a: Vec<LinearCoef>, b: Vec<LinearCoef>) -> Result<Self> {
        if breaks.is_empty() || breaks[0] != 0.0 {
            return Err(err("breakpoints must start at 0"));
        }
        if a.len() != breaks.len() || b.len() != breaks.len() {
            return Err(err("need exactly one (a, b) coefficient pair per breakpoint"));
        }
        for w in breaks.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(err("breakpoints must be finite and strictly increasing"));
            }
        }
        for (i, (ca, cb)) in a.iter().zip(&b).enumerate() {
            for v in [ca.value, ca.slope, cb.value, cb.slope] {
                if !v.is_finite() {
                    return Err(err(format!("segment {i}: non-finite coefficient")));
                }
            }
            let check = |d: f64| -> Result<()> {
                if !(cb.at(d).abs() < ca.at(d)) {
                    return Err(err(format!(
                        "segment {i}: |b0| < a0 violated at x = {}",
                        breaks[i] + d
                    )));
                }
                Ok(())
            };
            check(0.0)?;
            if i + 1 < breaks.len() {
                check(breaks[i + 1] - breaks[i])?;
            } else if ca.slope < cb.slope.abs() {
                return Err(err(
                    "unbounded tail segment: slope of a0 must dominate |slope of b0|",
                ));
            }
        }
        Ok(Self { breaks, a, b })
    }

    pub fn constant(a0: f64, b0: f64) -> Result<Self> {
        Self::new(
            vec![0.0],
            vec![LinearCoef::constant(a0)],
            vec![LinearCoef::constant(b0)],
        )
    }

    /// Constant values between consecutive edges: `a_vals[i]` holds on
    /// [edge[i-1], edge[i]) with edge[-1] = 0 and edge[last] = inf.
    pub fn piecewise_constant(edges: &[f64], a_vals: &[f64], b_vals: &[f64]) -> Result<Self> {
        if a_vals.len() != edges.len() + 1 || b_vals.len() != edges.len() + 1 {
            return Err(err("need exactly one value per interval between edges"));
        }
        let mut breaks = Vec::with_capacity(edges.len() + 1);
        breaks.push(0.0);
        breaks.extend_from_slice(edges);
        Self::new(
            breaks,
            a_vals.iter().map(|&v| LinearCoef::constant(v)).collect(),
            b_vals.iter().map(|&v| LinearCoef::constant(v)).collect(),
        )
    }

    /// Piecewise-linear interpolant of a sampled table; constant beyond the
    /// last sample. This is the admission path for general smooth data.
    pub fn from_samples(xs: &[f64], a_vals: &[f64], b_vals: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(err("need at least two samples"));
        }
        if a_vals.len() != xs.len() || b_vals.len() != xs.len() {
            return Err(err("sample tables must have equal length"));
        }
        let mut a = Vec::with_capacity(xs.len());
        let mut b = Vec::with_capacity(xs.len());
        for i in 0..xs.len() - 1 {
            let w = xs[i + 1] - xs[i];
            a.push(LinearCoef { value: a_vals[i], slope: (a_vals[i + 1] - a_vals[i]) / w });
            b.push(LinearCoef { value: b_vals[i], slope: (b_vals[i + 1] - b_vals[i]) / w });
        }
        let last = xs.len() - 1;
        a.push(LinearCoef::constant(a_vals[last]));
        b.push(LinearCoef::constant(b_vals[last]));
        Self::new(xs.to_vec(), a, b)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    fn seg_index(&self, x: f64) -> usize {
        debug_assert!(x >= 0.0);
        self.breaks.partition_point(|&bp| bp <= x).saturating_sub(1)
    }

    /// Right-continuous evaluation at x >= 0.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let i = self.seg_index(x);
        let d = x - self.breaks[i];
        (self.a[i].at(d), self.b[i].at(d))
    }

    /// Limit from below; differs from `eval` only at jump breakpoints.
    pub fn eval_left(&self, x: f64) -> (f64, f64) {
        let i = self.seg_index(x);
        if i > 0 && x == self.breaks[i] {
            let d = x - self.breaks[i - 1];
            return (self.a[i - 1].at(d), self.b[i - 1].at(d));
        }
        self.eval(x)
    }

    /// Even/odd extension to all radii: a0(-x) = a0(x), b0(-x) = -b0(x).
    /// At x = 0 the odd-symmetric value 0 is used for b0.
    pub fn eval_extended(&self, x: f64) -> (f64, f64) {
        if x > 0.0 {
            self.eval(x)
        } else if x < 0.0 {
            let (a, b) = self.eval(-x);
            (a, -b)
        } else {
            (self.eval(0.0).0, 0.0)
        }
    }

    /// Point evaluation used when sampling initial data onto a grid: at an
    /// exact breakpoint the left limit wins, so a jump sitting exactly on a
    /// cell midpoint resolves deterministically.
    pub fn sample(&self, x: f64) -> (f64, f64) {
        self.eval_left(x)
    }

    /// Radius of the first value discontinuity, if any.
    pub fn first_value_jump(&self) -> Option<f64> {
        for i in 1..self.breaks.len() {
            let d = self.breaks[i] - self.breaks[i - 1];
            let (al, bl) = (self.a[i - 1].at(d), self.b[i - 1].at(d));
            let (ar, br) = (self.a[i].value, self.b[i].value);
            if (al - ar).abs() > JUMP_TOL * (1.0 + al.abs() + ar.abs())
                || (bl - br).abs() > JUMP_TOL * (1.0 + bl.abs() + br.abs())
            {
                return Some(self.breaks[i]);
            }
        }
        None
    }

    /// True when a breakpoint within `tol` of `y` changes value or slope.
    pub fn kink_near(&self, y: f64, tol: f64) -> bool {
        for i in 1..self.breaks.len() {
            if (self.breaks[i] - y).abs() > tol {
                continue;
            }
            let d = self.breaks[i] - self.breaks[i - 1];
            let (pa, pb) = (&self.a[i - 1], &self.b[i - 1]);
            let (na, nb) = (&self.a[i], &self.b[i]);
            let value_jump = (pa.at(d) - na.value).abs() > JUMP_TOL * (1.0 + na.value.abs())
                || (pb.at(d) - nb.value).abs() > JUMP_TOL * (1.0 + nb.value.abs());
            let slope_jump = (pa.slope - na.slope).abs() > JUMP_TOL * (1.0 + na.slope.abs())
                || (pb.slope - nb.slope).abs() > JUMP_TOL * (1.0 + nb.slope.abs());
            if value_jump || slope_jump {
                return true;
            }
        }
        false
    }
}

/// Exact antiderivatives A0(x) = integral of u a0(u) and B0(x) = integral of
/// b0(u), both taken from 0 and extended evenly to negative arguments.
#[derive(Clone, Debug)]
pub struct Primitives {
    breaks: Vec<f64>,
    // A0 is cubic per segment (integrand u*a0(u) is quadratic), B0 quadratic.
    a_int: Vec<[f64; 4]>,
    b_int: Vec<[f64; 3]>,
}

pub fn build_primitives(data: &PiecewiseData) -> Primitives {
    let n = data.breaks.len();
    let mut a_int = Vec::with_capacity(n);
    let mut b_int = Vec::with_capacity(n);
    let (mut a_off, mut b_off) = (0.0, 0.0);
    for i in 0..n {
        let left = data.breaks[i];
        let (ca, cb) = (data.a[i], data.b[i]);
        // Integrand u a0(u) = (left + d)(value + slope d) in d = u - left.
        let a_seg = [
            a_off,
            left * ca.value,
            (ca.value + left * ca.slope) / 2.0,
            ca.slope / 3.0,
        ];
        let b_seg = [b_off, cb.value, cb.slope / 2.0];
        if i + 1 < n {
            let w = data.breaks[i + 1] - left;
            a_off = a_seg[0] + w * (a_seg[1] + w * (a_seg[2] + w * a_seg[3]));
            b_off = b_seg[0] + w * (b_seg[1] + w * b_seg[2]);
        }
        a_int.push(a_seg);
        b_int.push(b_seg);
    }
    Primitives { breaks: data.breaks.clone(), a_int, b_int }
}

impl Primitives {
    fn seg_index(&self, x: f64) -> usize {
        self.breaks.partition_point(|&bp| bp <= x).saturating_sub(1)
    }

    /// A0(|x|); even by construction.
    pub fn a_prim(&self, x: f64) -> f64 {
        let x = x.abs();
        let i = self.seg_index(x);
        let d = x - self.breaks[i];
        let k = self.a_int[i];
        k[0] + d * (k[1] + d * (k[2] + d * k[3]))
    }

    /// B0(|x|); even by construction.
    pub fn b_prim(&self, x: f64) -> f64 {
        let x = x.abs();
        let i = self.seg_index(x);
        let d = x - self.breaks[i];
        let k = self.b_int[i];
        k[0] + d * (k[1] + d * k[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_has_quadratic_a_primitive() {
        let data = PiecewiseData::constant(1.0, 0.0).unwrap();
        let prim = build_primitives(&data);
        for &x in &[0.0, 0.25, 0.5, 1.0, 3.0] {
            assert_eq!(prim.a_prim(x), x * x / 2.0);
            assert_eq!(prim.b_prim(x), 0.0);
            assert_eq!(prim.a_prim(-x), prim.a_prim(x));
        }
    }

    #[test]
    fn two_state_profile_matches_hand_integrals() {
        // a0 = 1 below radius 1, 2 beyond: A0 = x^2/2 inside, x^2 - 1/2 outside.
        let data = PiecewiseData::piecewise_constant(&[1.0], &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        let prim = build_primitives(&data);
        assert_eq!(prim.a_prim(0.5), 0.125);
        assert_eq!(prim.a_prim(1.0), 0.5);
        assert_eq!(prim.a_prim(1.5), 1.5f64 * 1.5 - 0.5);
        assert_eq!(prim.a_prim(2.0), 3.5);
        assert_eq!(prim.a_prim(-2.0), 3.5);
    }

    #[test]
    fn primitive_is_continuous_across_breakpoints() {
        let data = PiecewiseData::new(
            vec![0.0, 0.5, 2.0],
            vec![
                LinearCoef { value: 2.0, slope: 1.0 },
                LinearCoef { value: 3.0, slope: -0.5 },
                LinearCoef::constant(2.25),
            ],
            vec![
                LinearCoef { value: 0.0, slope: 0.5 },
                LinearCoef { value: 0.25, slope: 0.0 },
                LinearCoef::constant(0.25),
            ],
        )
        .unwrap();
        let prim = build_primitives(&data);
        for &bp in &[0.5, 2.0] {
            let eps = 1e-8;
            assert!((prim.a_prim(bp - eps) - prim.a_prim(bp + eps)).abs() < 1e-7);
            assert!((prim.b_prim(bp - eps) - prim.b_prim(bp + eps)).abs() < 1e-7);
        }
        assert_eq!(prim.a_prim(0.0), 0.0);
        assert_eq!(prim.b_prim(0.0), 0.0);
    }

    #[test]
    fn eval_is_right_continuous_and_eval_left_takes_the_left_limit() {
        let data = PiecewiseData::piecewise_constant(&[1.0], &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(data.eval(1.0).0, 2.0);
        assert_eq!(data.eval_left(1.0).0, 1.0);
        assert_eq!(data.sample(1.0).0, 1.0);
        assert_eq!(data.eval(0.999).0, 1.0);
        assert_eq!(data.eval_left(0.999).0, 1.0);
        assert_eq!(data.eval(1.001).0, 2.0);
    }

    #[test]
    fn extension_is_even_in_a_and_odd_in_b() {
        let data = PiecewiseData::constant(7.0, 4.0).unwrap();
        assert_eq!(data.eval_extended(0.5), (7.0, 4.0));
        assert_eq!(data.eval_extended(-0.5), (7.0, -4.0));
        assert_eq!(data.eval_extended(0.0), (7.0, 0.0));
    }

    #[test]
    fn from_samples_interpolates_linearly() {
        let xs = [0.0, 1.0, 2.0];
        let a = [3.0, 5.0, 5.0];
        let b = [0.0, 1.0, -1.0];
        let data = PiecewiseData::from_samples(&xs, &a, &b).unwrap();
        assert_eq!(data.eval(0.5), (4.0, 0.5));
        assert_eq!(data.eval(1.5), (5.0, 0.0));
        // constant beyond the last sample
        assert_eq!(data.eval(10.0), (5.0, -1.0));
    }

    #[test]
    fn jump_and_kink_detection() {
        let jumpy = PiecewiseData::piecewise_constant(&[1.0], &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(jumpy.first_value_jump(), Some(1.0));
        assert!(jumpy.kink_near(1.0, 1e-12));
        assert!(!jumpy.kink_near(1.0 + 1e-6, 1e-12));

        let smooth = PiecewiseData::from_samples(
            &[0.0, 1.0, 2.0],
            &[3.0, 4.0, 5.0],
            &[0.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(smooth.first_value_jump(), None);
        // same slope on both sides of x = 1: no kink
        assert!(!smooth.kink_near(1.0, 1e-12));

        let kinked = PiecewiseData::from_samples(
            &[0.0, 1.0, 2.0],
            &[3.0, 4.0, 4.0],
            &[0.0, 0.0, 0.0],
        )
        .unwrap();
        assert_eq!(kinked.first_value_jump(), None);
        assert!(kinked.kink_near(1.0, 1e-12));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        // cone violation inside a segment closure
        assert!(PiecewiseData::constant(1.0, 1.0).is_err());
        assert!(PiecewiseData::constant(1.0, -1.5).is_err());
        // ramp that leaves the cone at the right end of a bounded segment
        assert!(PiecewiseData::new(
            vec![0.0, 1.0],
            vec![LinearCoef::constant(1.0), LinearCoef::constant(1.0)],
            vec![LinearCoef { value: 0.0, slope: 1.5 }, LinearCoef::constant(0.0)],
        )
        .is_err());
        // unbounded tail with |b| slope exceeding a slope
        assert!(PiecewiseData::new(
            vec![0.0],
            vec![LinearCoef { value: 2.0, slope: 0.0 }],
            vec![LinearCoef { value: 0.0, slope: -0.1 }],
        )
        .is_err());
        // breakpoints must start at zero and increase
        assert!(PiecewiseData::new(
            vec![0.5],
            vec![LinearCoef::constant(1.0)],
            vec![LinearCoef::constant(0.0)],
        )
        .is_err());
        assert!(
            PiecewiseData::piecewise_constant(&[1.0, 1.0], &[1.0, 1.0, 1.0], &[0.0; 3]).is_err()
        );
    }
}
