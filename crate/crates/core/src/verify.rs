//! Property suites behind the `verify` command: randomized state-algebra
//! inequalities, update-kernel agreement with a bisection oracle,
//! stationary exactness of the scheme, and checks of the closed-form
//! solution of the linearized system. All randomness is seeded, so a suite
//! reports identical numbers on every run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, UrelError};
use crate::linear::{
    imploding_shock_data, pde_residual, rh_speed, LinearSolution,
};
use crate::piecewise::{LinearCoef, PiecewiseData};
use crate::scheme::{euler_update, run_with_observer, GridSpec, RunOptions};
use crate::state::{triple_flux, SQRT3};

#[derive(Clone, Debug)]
pub struct PropertyResult {
    pub name: &'static str,
    pub trials: u64,
    /// For inequality properties the smallest slack seen (positive means
    /// satisfied); for agreement properties the largest deviation from the
    /// reference (small means satisfied).
    pub worst_margin: f64,
    pub passed: bool,
}

fn sample_state(rng: &mut ChaCha8Rng, a_lo: f64, a_hi: f64, f_max: f64) -> (f64, f64) {
    let a = rng.gen_range(a_lo..a_hi);
    let b = a * rng.gen_range(-f_max..f_max);
    (a, b)
}

/// Strict bracketing of the flux moments b +- c / lambda by the density
/// moments a +- b / lambda, for every admissible state and lambda >= 1.
fn flux_moment_brackets(trials: u64) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c31);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let (a, b) = sample_state(&mut rng, 0.05, 8.0, 0.999);
        let lambda = rng.gen_range(1.0..4.0);
        let c = triple_flux(a, b).expect("sampled states are admissible") / 3.0;
        let minus_mid = b + c / lambda;
        let minus_bound = a + b / lambda;
        let plus_mid = b - c / lambda;
        let plus_bound = a - b / lambda;
        for slack in [
            minus_bound - minus_mid,
            minus_mid + minus_bound,
            plus_bound - plus_mid,
            plus_mid + plus_bound,
        ] {
            worst = worst.min(slack / a);
        }
    }
    PropertyResult { name: "flux_moment_brackets", trials, worst_margin: worst, passed: worst > 0.0 }
}

/// Positivity of the update radicand 4a^2 (1 + 3 eta^2) - 3 xi^2 and the
/// cone bound |b'| < a for the explicit root, over the full precondition
/// range 0 < eta <= 1/3, -a (1 + eta) < xi < a (1 - eta).
fn update_radicand_and_cone(trials: u64) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c32);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let a = rng.gen_range(0.05..8.0);
        let eta = rng.gen_range(f64::MIN_POSITIVE..(1.0 / 3.0));
        let xi = -a * (1.0 + eta) + 2.0 * a * rng.gen_range(1e-12..1.0);
        let scale = 4.0 * a * a * (1.0 + 3.0 * eta * eta);
        let rad = scale - 3.0 * xi * xi;
        worst = worst.min(rad / scale);
        let b = (xi + eta * rad.max(0.0).sqrt()) / (1.0 + 3.0 * eta * eta);
        worst = worst.min((a - b.abs()) / a);
    }
    PropertyResult {
        name: "update_radicand_and_cone",
        trials,
        worst_margin: worst,
        passed: worst > 0.0,
    }
}

/// The closed-form moment update against a bisection solve of its implicit
/// equation b' = xi + eta sqrt(4a'^2 - 3b'^2).
fn kernel_matches_bisection(trials: u64) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c33);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (am, bm) = sample_state(&mut rng, 0.2, 4.0, 0.9);
        let (ap, bp) = sample_state(&mut rng, 0.2, 4.0, 0.9);
        let lambda = rng.gen_range(1.0..3.0);
        let x_bar = rng.gen_range(0.0..5.0);
        let dx = rng.gen_range(0.01..0.5);
        let (_, b_new) = euler_update(am, bm, ap, bp, x_bar, dx, lambda)
            .expect("sampled updates stay admissible");
        let q = 2.0 * x_bar * dx / (x_bar * x_bar + dx * dx / 3.0);
        let cm = triple_flux(am, bm).expect("admissible") / 3.0;
        let cp = triple_flux(ap, bp).expect("admissible") / 3.0;
        let a_new = 0.5 * (am + bm / lambda) * (1.0 - q / 2.0)
            + 0.5 * (ap - bp / lambda) * (1.0 + q / 2.0);
        let eta = q / (6.0 * lambda);
        let xi = 0.5 * (bm + cm / lambda) * (1.0 - q / 2.0)
            + 0.5 * (bp - cp / lambda) * (1.0 + q / 2.0)
            - a_new * q / (6.0 * lambda);
        let g = |y: f64| y - xi - eta * (4.0 * a_new * a_new - 3.0 * y * y).max(0.0).sqrt();
        let (mut lo, mut hi) = (-a_new, a_new);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst = worst.max((b_new - 0.5 * (lo + hi)).abs());
    }
    PropertyResult {
        name: "kernel_matches_bisection",
        trials,
        worst_margin: worst,
        passed: worst <= 1e-12,
    }
}

pub fn lemma_suite() -> Result<Vec<PropertyResult>> {
    Ok(vec![
        flux_moment_brackets(100_000),
        update_radicand_and_cone(100_000),
        kernel_matches_bisection(10_000),
    ])
}

/// A constant rest state marched over the full grid: every level must
/// reproduce the data bit for bit, and the boundary moment must vanish
/// exactly on every unstaggered level.
pub fn stationary_suite() -> Result<Vec<PropertyResult>> {
    let grid = GridSpec::new(1.0, 1.0, 200)?;
    let mut drift: f64 = 0.0;
    let mut boundary: f64 = 0.0;
    let mut updates = 0u64;
    let mut boundary_levels = 0u64;
    run_with_observer(
        |_| Ok((3.0, 0.0)),
        &grid,
        &RunOptions { parallel: false, ..RunOptions::default() },
        |_, next| {
            updates += next.states.len() as u64;
            for s in &next.states {
                drift = drift.max((s.a - 3.0).abs()).max(s.b.abs());
            }
            if !grid.is_midpoint_level(next.index) {
                boundary = boundary.max(next.states[0].b.abs());
                boundary_levels += 1;
            }
            Ok(())
        },
    )?;
    Ok(vec![
        PropertyResult {
            name: "rest_state_is_a_fixed_point",
            trials: updates,
            worst_margin: drift,
            passed: drift == 0.0,
        },
        PropertyResult {
            name: "boundary_moment_vanishes_exactly",
            trials: boundary_levels,
            worst_margin: boundary,
            passed: boundary == 0.0,
        },
    ])
}

fn constant_profile_is_stationary() -> Result<PropertyResult> {
    let sol = LinearSolution::new(PiecewiseData::constant(4.0, 0.0)?);
    let mut worst: f64 = 0.0;
    let mut trials = 0u64;
    for i in 0..=20 {
        let t = 0.05 + 0.15 * i as f64;
        for j in 0..40 {
            let x = 0.05 + 0.075 * j as f64;
            let (a, b) = sol.eval(t, x)?;
            worst = worst.max((a - 4.0).abs()).max(b.abs());
            trials += 1;
        }
    }
    Ok(PropertyResult {
        name: "constant_profile_is_stationary",
        trials,
        worst_margin: worst,
        passed: worst <= 1e-12,
    })
}

/// Wave-region values of the reference imploding setup, straight from its
/// closed form.
fn wave_state(t: f64, x: f64) -> (f64, f64) {
    (
        1.5 + t / (2.0 * SQRT3 * x),
        (t * t - 3.0 * (1.0 + x * x)) / (12.0 * SQRT3 * x * x),
    )
}

fn reference_profile_matches_closed_form() -> Result<PropertyResult> {
    let sol = LinearSolution::new(imploding_shock_data());
    let mut worst: f64 = 0.0;
    let mut trials = 0u64;
    for i in 0..=24 {
        let t = 0.1 + 0.12 * i as f64;
        let tau = t / SQRT3;
        for j in 0..60 {
            let x = 0.05 + 0.08 * j as f64;
            let fronts = [1.0 - tau, tau - 1.0, 1.0 + tau];
            if fronts.iter().any(|f| (x - f).abs() < 0.04) {
                continue;
            }
            let (a, b) = sol.eval(t, x)?;
            let (ae, be) = if x > 1.0 + tau {
                (2.0, 0.0)
            } else if tau < 1.0 && x < 1.0 - tau {
                (1.0, 0.0)
            } else if tau > 1.0 && x < tau - 1.0 {
                (2.0, 0.0)
            } else {
                wave_state(t, x)
            };
            worst = worst.max((a - ae).abs()).max((b - be).abs());
            trials += 1;
        }
    }
    Ok(PropertyResult {
        name: "reference_profile_matches_closed_form",
        trials,
        worst_margin: worst,
        passed: worst <= 1e-12,
    })
}

fn interior_residual_decays() -> Result<PropertyResult> {
    let sloped = PiecewiseData::new(
        vec![0.0, 0.5, 1.5],
        vec![
            LinearCoef { value: 2.0, slope: 1.0 },
            LinearCoef { value: 2.5, slope: -0.5 },
            LinearCoef::constant(2.0),
        ],
        vec![
            LinearCoef { value: 0.0, slope: 0.4 },
            LinearCoef { value: 0.2, slope: 0.0 },
            LinearCoef::constant(0.2),
        ],
    )?;
    let sol = LinearSolution::new(sloped);
    let mut worst: f64 = 0.0;
    let mut passed = true;
    let mut trials = 0u64;
    for &(t, x) in &[(0.35, 0.9), (0.2, 1.1)] {
        let res: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&h| pde_residual(&sol, t, x, h))
            .collect::<Result<_>>()?;
        for w in res.windows(2) {
            let ratio = w[0] / w[1];
            worst = worst.max((ratio - 4.0).abs());
            passed &= (3.0..=5.0).contains(&ratio);
            trials += 1;
        }
    }
    Ok(PropertyResult {
        name: "interior_residual_decays_at_second_order",
        trials,
        worst_margin: worst,
        passed,
    })
}

fn jump_speeds_match_characteristics() -> Result<PropertyResult> {
    let inv = 1.0 / SQRT3;
    let mut worst: f64 = 0.0;
    let mut trials = 0u64;
    for &t in &[0.5, 1.0, 1.5] {
        let tau = t / SQRT3;
        let s = rh_speed((1.0, 0.0), wave_state(t, 1.0 - tau))?;
        worst = worst.max((s + inv).abs());
        let s = rh_speed(wave_state(t, 1.0 + tau), (2.0, 0.0))?;
        worst = worst.max((s - inv).abs());
        trials += 2;
    }
    for &t in &[2.0, 2.5, 3.2] {
        let tau = t / SQRT3;
        let s = rh_speed((2.0, 0.0), wave_state(t, tau - 1.0))?;
        worst = worst.max((s - inv).abs());
        let s = rh_speed(wave_state(t, 1.0 + tau), (2.0, 0.0))?;
        worst = worst.max((s - inv).abs());
        trials += 2;
    }
    Ok(PropertyResult {
        name: "jump_speeds_match_characteristics",
        trials,
        worst_margin: worst,
        passed: worst <= 1e-12,
    })
}

/// For small-amplitude data the nonlinear scheme must converge to the
/// closed-form solution of the linearized system as the grid is refined.
fn small_amplitude_runs_approach_the_linear_solution() -> Result<PropertyResult> {
    let eps = 1e-4;
    let bump = |x: f64| {
        let s = (x - 0.5) / 0.3;
        if s.abs() < 1.0 {
            (1.0 - s * s).powi(3)
        } else {
            0.0
        }
    };
    let k = 48;
    let mut xs = vec![0.0];
    let mut a_vals = vec![3.0];
    let mut b_vals = vec![0.0];
    for i in 0..=k {
        let x = 0.2 + 0.6 * i as f64 / k as f64;
        xs.push(x);
        a_vals.push(3.0 * (1.0 + eps * bump(x)));
        b_vals.push(3.0 * eps * bump(x));
    }
    xs.push(1.0);
    a_vals.push(3.0);
    b_vals.push(0.0);
    let data = PiecewiseData::from_samples(&xs, &a_vals, &b_vals)?;
    let sol = LinearSolution::new(data.clone());

    let mut errors = Vec::new();
    for &n in &[100usize, 200, 400] {
        let grid = GridSpec::new(0.5, 1.5, n)?;
        let opts = RunOptions { snapshot_times: vec![0.5], ..RunOptions::default() };
        let result = crate::scheme::run(|x| Ok(data.sample(x)), &grid, &opts)?;
        let snap = &result.snapshots[0];
        let mut err = 0.0;
        for (x, s) in snap.positions.iter().zip(&snap.states) {
            let (a_lin, _) = sol.eval(snap.time, *x)?;
            err += (s.a - a_lin).abs();
        }
        errors.push(err / snap.positions.len() as f64);
    }
    let mut worst: f64 = 0.0;
    for w in errors.windows(2) {
        worst = worst.max(w[1] / w[0]);
    }
    Ok(PropertyResult {
        name: "small_amplitude_runs_approach_the_linear_solution",
        trials: errors.len() as u64,
        worst_margin: worst,
        passed: worst < 1.0,
    })
}

pub fn linear_suite() -> Result<Vec<PropertyResult>> {
    Ok(vec![
        constant_profile_is_stationary()?,
        reference_profile_matches_closed_form()?,
        interior_residual_decays()?,
        jump_speeds_match_characteristics()?,
        small_amplitude_runs_approach_the_linear_solution()?,
    ])
}

/// Run the selected suite: `lemmas`, `stationary`, `linear` or `all`.
pub fn run_suite(selector: &str) -> Result<Vec<PropertyResult>> {
    match selector {
        "lemmas" => lemma_suite(),
        "stationary" => stationary_suite(),
        "linear" => linear_suite(),
        "all" => {
            let mut out = lemma_suite()?;
            out.extend(stationary_suite()?);
            out.extend(linear_suite()?);
            Ok(out)
        }
        _ => Err(UrelError::Config(format!(
            "unknown suite `{selector}`; available: lemmas, stationary, linear, all"
        ))),
    }
}
