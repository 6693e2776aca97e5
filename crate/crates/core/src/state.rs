//! Pointwise state algebra.
//!
//! A gas state is either primitive (pressure `p > 0`, radial 4-velocity
//! component `u`) or conserved (`a`, `b`). The two are linked by
//!
//! ```text
//! a = p (3 + 4u^2),    b = 4 p u sqrt(1 + u^2)
//! ```
//!
//! and every admissible conserved pair satisfies `|b| < a`. Inside that cone
//! the map is a bijection; `to_primitive` inverts it in closed form.

use crate::error::{Result, UrelError};

pub const SQRT3: f64 = 1.732050807568877293527446341505872367_f64;

/// Pressure and radial 4-velocity component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub p: f64,
    pub u: f64,
}

/// Conserved pair: `a` is the rescaled energy density, `b` the rescaled
/// radial momentum density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conserved {
    pub a: f64,
    pub b: f64,
}

/// Relative slack for clamping the radicand 4a^2 - 3b^2: negative values no
/// larger than this times a^2 count as floating-point dust, anything worse
/// is a hard error.
pub const RADICAND_SLACK: f64 = 1e-14;

/// sqrt(4a^2 - 3b^2), the recurring root of the pressure inversion.
///
/// For admissible states the radicand is >= a^2, so a meaningfully negative
/// radicand means the inputs were far outside the state cone.
pub fn root_4a2_3b2(a: f64, b: f64) -> Result<f64> {
    let mut rad = 4.0 * a * a - 3.0 * b * b;
    if rad < 0.0 {
        if rad >= -RADICAND_SLACK * a * a {
            rad = 0.0;
        } else {
            return Err(UrelError::NegativeRadicand(rad));
        }
    }
    Ok(rad.sqrt())
}

/// v = u / sqrt(1 + u^2), always in (-1, 1).
pub fn three_velocity(u: f64) -> f64 {
    u / (1.0 + u * u).sqrt()
}

/// Inverse of [`three_velocity`]: u = v / sqrt(1 - v^2), defined for |v| < 1.
pub fn four_velocity(v: f64) -> Result<f64> {
    if !(v.abs() < 1.0) {
        return Err(UrelError::InvalidGeometry(format!(
            "spatial velocity {v} is not inside (-1, 1)"
        )));
    }
    Ok(v / (1.0 - v * v).sqrt())
}

/// 3c(a, b) = a + 2(2a - s) with s = sqrt(4a^2 - 3b^2).
///
/// Written this way because for b = 0 both `s = 2a` and the subtraction
/// `2a - s` are exact in floating point (the subtraction is exact for every
/// admissible state, since s lies in (a, 2a]), so the triple flux of a rest
/// state is exactly `a`. The staggered update relies on that cancellation.
pub fn triple_flux(a: f64, b: f64) -> Result<f64> {
    let s = root_4a2_3b2(a, b)?;
    Ok(a + 2.0 * (2.0 * a - s))
}

impl Primitive {
    pub fn new(p: f64, u: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(UrelError::NonPositivePressure(p));
        }
        if !u.is_finite() {
            return Err(UrelError::InvalidGeometry(format!("non-finite velocity {u}")));
        }
        Ok(Self { p, u })
    }

    pub fn to_conserved(self) -> Conserved {
        let u2 = self.u * self.u;
        Conserved {
            a: self.p * (3.0 + 4.0 * u2),
            b: 4.0 * self.p * self.u * (1.0 + u2).sqrt(),
        }
    }

    /// Spatial velocity of this state, see [`three_velocity`].
    pub fn three_velocity(self) -> f64 {
        three_velocity(self.u)
    }

    /// Entropy density and entropy flux, (p^{3/4} sqrt(1 + u^2), p^{3/4} u).
    pub fn entropy_pair(self) -> (f64, f64) {
        let p34 = (self.p * self.p.sqrt()).sqrt();
        (p34 * (1.0 + self.u * self.u).sqrt(), p34 * self.u)
    }
}

impl Conserved {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || b.abs() >= a {
            return Err(UrelError::InvalidState { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn rest(a: f64) -> Result<Self> {
        Self::new(a, 0.0)
    }

    pub fn to_primitive(self) -> Result<Primitive> {
        let s = root_4a2_3b2(self.a, self.b)
            .map_err(|_| UrelError::InvalidState { a: self.a, b: self.b })?;
        // s - a is exact for admissible states (s in (a, 2a]).
        let p = (s - self.a) / 3.0;
        if !(p > 0.0) {
            return Err(UrelError::InvalidState { a: self.a, b: self.b });
        }
        let u = self.b / (2.0 * (p * (p + self.a)).sqrt());
        Ok(Primitive { p, u })
    }

    /// Flux c(a, b) = p (1 + 4u^2); satisfies a/3 <= c < a on the state cone.
    pub fn flux(self) -> Result<f64> {
        Ok(triple_flux(self.a, self.b)? / 3.0)
    }

    pub fn entropy_pair(self) -> Result<(f64, f64)> {
        Ok(self.to_primitive()?.entropy_pair())
    }
}

/// Upper bound (a/3)^{3/4} for the entropy density at given `a`; attained
/// exactly by the rest state.
pub fn entropy_density_cap(a: f64) -> f64 {
    let t = a / 3.0;
    (t * t.sqrt()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: f64, y: f64, tol: f64) {
        assert!((x - y).abs() <= tol, "{x} vs {y} (tol {tol})");
    }

    #[test]
    fn rest_state_round_trip_is_exact() {
        let c = Primitive::new(2.5, 0.0).unwrap().to_conserved();
        assert_eq!(c.a, 7.5);
        assert_eq!(c.b, 0.0);
        let q = c.to_primitive().unwrap();
        assert_eq!(q.p, 2.5);
        assert_eq!(q.u, 0.0);
    }

    #[test]
    fn unit_pressure_unit_velocity_maps_to_a7() {
        let c = Primitive::new(1.0, 1.0).unwrap().to_conserved();
        assert_eq!(c.a, 7.0);
        assert_eq!(c.b, 32f64.sqrt()); // 4 sqrt(2)
        let q = c.to_primitive().unwrap();
        close(q.p, 1.0, 1e-14);
        close(q.u, 1.0, 1e-14);
    }

    #[test]
    fn flux_of_rest_state_is_a_third_and_triple_flux_is_exact() {
        for &a in &[1.0, 0.5, 3.0, 1e-6, 7.25e3] {
            assert_eq!(triple_flux(a, 0.0).unwrap(), a);
            assert_eq!(Conserved::rest(a).unwrap().flux().unwrap(), a / 3.0);
        }
    }

    #[test]
    fn flux_at_a7_b4sqrt2_is_five() {
        // p = 1, u = 1: c = p (1 + 4u^2) = 5.
        let c = Conserved::new(7.0, 32f64.sqrt()).unwrap();
        close(c.flux().unwrap(), 5.0, 1e-13);
    }

    #[test]
    fn entropy_pairs_match_hand_values() {
        let (s, f) = Conserved::rest(3.0).unwrap().entropy_pair().unwrap();
        assert_eq!(s, 1.0);
        assert_eq!(f, 0.0);

        let (s, f) = Conserved::new(7.0, 32f64.sqrt()).unwrap().entropy_pair().unwrap();
        close(s, 2f64.sqrt(), 1e-13); // p^{3/4} sqrt(2) at p = 1
        close(f, 1.0, 1e-13);
    }

    #[test]
    fn entropy_density_cap_is_attained_at_rest() {
        for &a in &[0.5, 1.0, 3.0, 11.0] {
            let (s, _) = Conserved::rest(a).unwrap().entropy_pair().unwrap();
            close(s, entropy_density_cap(a), 1e-14 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn cone_boundary_and_outside_are_rejected() {
        assert!(Conserved::new(1.0, 1.0).is_err());
        assert!(Conserved::new(1.0, -1.0000001).is_err());
        assert!(Conserved::new(0.0, 0.0).is_err());
        assert!(Primitive::new(0.0, 1.0).is_err());
        assert!(Primitive::new(-2.0, 0.0).is_err());
        assert!(Conserved { a: 1.0, b: 1.5 }.to_primitive().is_err());
    }

    #[test]
    fn three_velocity_is_subluminal() {
        for &u in &[-50.0, -1.0, 0.0, 0.3, 2.0, 1e6] {
            let v = three_velocity(u);
            assert!(v.abs() < 1.0);
            assert_eq!(v.signum(), if u == 0.0 { v.signum() } else { u.signum() });
        }
        assert_eq!(three_velocity(0.0), 0.0);
    }

    #[test]
    fn velocity_conversions_invert_each_other() {
        // u = 1 gives v = 1/sqrt(2), u = -1 its mirror.
        close(three_velocity(1.0), 1.0 / 2f64.sqrt(), 1e-16);
        close(three_velocity(-1.0), -1.0 / 2f64.sqrt(), 1e-16);
        for &u in &[-3.0, -1.0, 0.0, 1e-8, 0.7, 12.0] {
            close(four_velocity(three_velocity(u)).unwrap(), u, 1e-12 * (1.0 + u.abs()));
        }
        for &v in &[-0.999, -0.5, 0.0, 0.25, 0.9] {
            close(three_velocity(four_velocity(v).unwrap()), v, 1e-14);
        }
        assert!(four_velocity(1.0).is_err());
        assert!(four_velocity(-1.2).is_err());
        assert!(four_velocity(f64::NAN).is_err());
    }

    #[test]
    fn radicand_dust_is_clamped_but_real_violations_fail() {
        assert_eq!(root_4a2_3b2(1.0, 0.0).unwrap(), 2.0);
        // b two ulps above 2/sqrt(3) puts the radicand a few 1e-15 below zero,
        // inside the slack band: must clamp to exactly zero.
        let b = f64::from_bits((2.0 / 3f64.sqrt()).to_bits() + 2);
        assert_eq!(root_4a2_3b2(1.0, b).unwrap(), 0.0);
        assert!(root_4a2_3b2(1.0, 1.2).is_err());
    }
}
