//! Post-processing diagnostics: shock location and speed, discrete entropy
//! production, self-similarity defect and the energy balance at a fixed
//! radius.

use crate::error::{Result, UrelError};
use crate::scheme::{GridSpec, Level, SimulationResult, Snapshot};
use crate::state::Conserved;

/// Search window covering the snapshot minus three cells at each end.
pub fn default_window(snapshot: &Snapshot) -> (f64, f64) {
    let xs = &snapshot.positions;
    if xs.len() < 7 {
        return (xs[0], xs[xs.len() - 1]);
    }
    (xs[3], xs[xs.len() - 4])
}

/// Locate a shock as the largest pressure jump between neighbouring nodes
/// inside the window. The jump must stand out: at least ten times the median
/// jump, otherwise the profile is considered shock-free.
pub fn detect_shock(snapshot: &Snapshot, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    for (x, s) in snapshot.positions.iter().zip(&snapshot.states) {
        if (lo..=hi).contains(x) {
            xs.push(*x);
            ps.push(s.to_primitive()?.p);
        }
    }
    if xs.len() < 3 {
        return Err(UrelError::WindowTooSmall(format!(
            "{} nodes inside [{lo}, {hi}]",
            xs.len()
        )));
    }
    let mut jumps: Vec<f64> = ps.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let (mut best, mut best_jump) = (0, 0.0);
    for (j, &d) in jumps.iter().enumerate() {
        if d > best_jump {
            best_jump = d;
            best = j;
        }
    }
    jumps.sort_unstable_by(|a, b| a.partial_cmp(b).expect("pressure jumps are finite"));
    let median = jumps[jumps.len() / 2];
    if best_jump <= 0.0 || best_jump < 10.0 * median {
        return Err(UrelError::NoShock);
    }
    Ok(0.5 * (xs[best] + xs[best + 1]))
}

#[derive(Clone, Debug)]
pub struct ShockTrack {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub fitted_speed: f64,
    /// Root-mean-square deviation of the track from the fitted line.
    pub fit_residual: f64,
}

fn fit_line(times: &[f64], positions: &[f64]) -> Result<(f64, f64, f64)> {
    let n = times.len();
    if n < 5 {
        return Err(UrelError::ShortTrack(n));
    }
    let tm = times.iter().sum::<f64>() / n as f64;
    let xm = positions.iter().sum::<f64>() / n as f64;
    let (mut cov, mut var) = (0.0, 0.0);
    for (t, x) in times.iter().zip(positions) {
        cov += (t - tm) * (x - xm);
        var += (t - tm) * (t - tm);
    }
    if var == 0.0 {
        return Err(UrelError::ShortTrack(n));
    }
    let slope = cov / var;
    let intercept = xm - slope * tm;
    let mut sq = 0.0;
    for (t, x) in times.iter().zip(positions) {
        let d = x - (slope * t + intercept);
        sq += d * d;
    }
    Ok((slope, intercept, (sq / n as f64).sqrt()))
}

/// Follow the largest pressure jump through a sequence of snapshots. The
/// first snapshot is searched inside `initial_window`; afterwards the window
/// recenters on the last hit with half-width `follow_radius`. Tracking stops
/// quietly once the shock can no longer be isolated.
pub fn track_shock(
    snapshots: &[Snapshot],
    initial_window: (f64, f64),
    follow_radius: f64,
) -> Result<ShockTrack> {
    let mut times = Vec::new();
    let mut positions = Vec::new();
    let mut window = initial_window;
    for snap in snapshots {
        match detect_shock(snap, window) {
            Ok(x) => {
                times.push(snap.time);
                positions.push(x);
                window = (x - follow_radius, x + follow_radius);
            }
            Err(UrelError::NoShock) | Err(UrelError::WindowTooSmall(_)) if !times.is_empty() => {
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let (fitted_speed, _, fit_residual) = fit_line(&times, &positions)?;
    Ok(ShockTrack { times, positions, fitted_speed, fit_residual })
}

/// Least-squares speed of a track; needs at least five points.
pub fn shock_speed(track: &ShockTrack) -> Result<f64> {
    Ok(fit_line(&track.times, &track.positions)?.0)
}

/// Time at which an inward-moving tracked shock reaches the origin: the tail
/// of the track (up to ten points, ending with the first position within
/// twenty cells of the origin) is extrapolated linearly to radius zero. The
/// gate only confirms that the track closed in on the origin; a front that
/// near the centre merges into the converging shell and cannot be isolated
/// any further, so a tighter gate would never be reachable.
pub fn shock_arrival_time(track: &ShockTrack, dx: f64) -> Result<f64> {
    let k = track
        .positions
        .iter()
        .position(|&x| x < 20.0 * dx)
        .ok_or(UrelError::NoArrival)?;
    let start = (k + 1).saturating_sub(10);
    let (slope, intercept, _) = fit_line(&track.times[start..=k], &track.positions[start..=k])?;
    if !(slope < 0.0) {
        return Err(UrelError::NoArrival);
    }
    Ok(-intercept / slope)
}

/// A single admissible shock moves mass towards lower four-velocity: the
/// state on the left must be faster than the state on the right.
pub fn shock_admissible(left: &Conserved, right: &Conserved) -> Result<bool> {
    Ok(left.to_primitive()?.u > right.to_primitive()?.u)
}

#[derive(Clone, Debug)]
pub struct EntropyReport {
    /// Apex radius of each update triangle.
    pub x_bars: Vec<f64>,
    /// Signed entropy production of each triangle; admissible solutions
    /// produce nonpositive values up to quadrature error.
    pub values: Vec<f64>,
    pub max_positive: f64,
    pub min_value: f64,
}

/// Contour integral of the entropy pair around every update triangle
/// between two consecutive levels, weighted by x^2 and oriented so that
/// entropy-satisfying updates give nonpositive values: strictly negative
/// across shocks, zero to rounding on constant states. Positive values
/// flag a violation; `max_positive` reports the worst one.
pub fn entropy_production(prev: &Level, next: &Level, grid: &GridSpec) -> Result<EntropyReport> {
    if next.index != prev.index + 1 {
        return Err(UrelError::MismatchedLevels(format!(
            "levels {} and {} are not consecutive",
            prev.index, next.index
        )));
    }
    for lv in [prev, next] {
        if lv.states.len() != grid.level_len(lv.index) {
            return Err(UrelError::MismatchedLevels(format!(
                "level {} has {} nodes, expected {}",
                lv.index,
                lv.states.len(),
                grid.level_len(lv.index)
            )));
        }
    }
    let mut pairs = Vec::with_capacity(prev.states.len());
    for s in &prev.states {
        pairs.push(s.entropy_pair()?);
    }
    let (dt, dx, lambda) = (grid.dt, grid.dx, grid.lambda);
    let midpoint_prev = grid.is_midpoint_level(prev.index);
    let mut x_bars = Vec::with_capacity(next.states.len());
    let mut values = Vec::with_capacity(next.states.len());
    for (j, s) in next.states.iter().enumerate() {
        let (sn, _) = s.entropy_pair()?;
        let x_bar = grid.node_position(next.index, j);
        let ((sm, fm), (sp, fp)) = if midpoint_prev {
            if j == 0 {
                let (s0, f0) = pairs[0];
                ((s0, -f0), pairs[0])
            } else {
                (pairs[j - 1], pairs[j])
            }
        } else {
            (pairs[j], pairs[j + 1])
        };
        let t0 = x_bar * x_bar + dx * dx / 3.0;
        let e = x_bar * dx;
        let kp = t0 + e;
        let km = t0 - e;
        let val =
            2.0 * dt * ((lambda * sp - fp) * kp + (lambda * sm + fm) * km - 2.0 * lambda * sn * t0);
        x_bars.push(x_bar);
        values.push(val);
    }
    let mut max_positive: f64 = 0.0;
    let mut min_value = f64::INFINITY;
    for &v in &values {
        max_positive = max_positive.max(v);
        min_value = min_value.min(v);
    }
    Ok(EntropyReport { x_bars, values, max_positive, min_value })
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert!(xs.len() >= 2 && xs.len() == ys.len());
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

#[derive(Clone, Copy, Debug)]
pub struct SimilarityGap {
    /// L1 distance between the pressure profiles in the similarity variable.
    pub pressure: f64,
    /// Same for the three-velocity profiles.
    pub velocity: f64,
}

/// Compare two snapshots in the similarity variable x / t: profiles of an
/// exactly self-similar solution coincide and the gap vanishes.
pub fn self_similarity_error(first: &Snapshot, second: &Snapshot) -> Result<SimilarityGap> {
    if !(first.time > 0.0) || !(second.time > 0.0) {
        return Err(UrelError::InvalidGeometry(
            "similarity comparison needs snapshots at positive times".into(),
        ));
    }
    let scale = |snap: &Snapshot| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let mut z = Vec::with_capacity(snap.positions.len());
        let mut p = Vec::with_capacity(snap.positions.len());
        let mut v = Vec::with_capacity(snap.positions.len());
        for (x, s) in snap.positions.iter().zip(&snap.states) {
            let prim = s.to_primitive()?;
            z.push(x / snap.time);
            p.push(prim.p);
            v.push(prim.three_velocity());
        }
        Ok((z, p, v))
    };
    let (za, pa, va) = scale(first)?;
    let (zb, pb, vb) = scale(second)?;
    let lo = za[0].max(zb[0]);
    let hi = za[za.len() - 1].min(zb[zb.len() - 1]);
    if !(hi > lo) {
        return Err(UrelError::EmptyOverlap);
    }
    let k = 1024usize;
    let dz = (hi - lo) / (k - 1) as f64;
    let (mut gap_p, mut gap_v) = (0.0, 0.0);
    let (mut prev_p, mut prev_v) = (0.0, 0.0);
    for i in 0..k {
        let z = lo + dz * i as f64;
        let dp = (interp(&za, &pa, z) - interp(&zb, &pb, z)).abs();
        let dv = (interp(&za, &va, z) - interp(&zb, &vb, z)).abs();
        if i > 0 {
            gap_p += 0.5 * (prev_p + dp) * dz;
            gap_v += 0.5 * (prev_v + dv) * dz;
        }
        prev_p = dp;
        prev_v = dv;
    }
    Ok(SimilarityGap { pressure: gap_p, velocity: gap_v })
}

#[derive(Clone, Debug)]
pub struct EnergyBalance {
    /// Times of the interior retained levels.
    pub times: Vec<f64>,
    /// d/dt of the energy inside `radius` plus the boundary flux.
    pub residuals: Vec<f64>,
    /// Largest residual relative to the terms it balances.
    pub normalized_max: f64,
}

/// Check conservation of the weighted energy integral over [0, radius]:
/// its time derivative must cancel the flux through the sphere at `radius`.
/// Needs a run with retained history.
pub fn energy_balance(result: &SimulationResult, radius: f64) -> Result<EnergyBalance> {
    if result.history.is_empty() {
        return Err(UrelError::HistoryNotRetained);
    }
    if result.history.len() < 3 {
        return Err(UrelError::WindowTooSmall(format!(
            "{} retained levels, need at least 3",
            result.history.len()
        )));
    }
    let grid = &result.grid;
    let mut times = Vec::new();
    let mut integrals = Vec::new();
    let mut fluxes = Vec::new();
    for level in &result.history {
        let xs = level.positions(grid);
        let last = xs[xs.len() - 1];
        if !(radius >= xs[0]) || !(radius <= last) {
            return Err(UrelError::RadiusOutsideDomain(radius));
        }
        // weighted trapezoid of a x^2 from 0, using a(0) x^2 -> 0
        let f: Vec<f64> = xs
            .iter()
            .zip(&level.states)
            .map(|(x, s)| s.a * x * x)
            .collect();
        let mut integral = 0.5 * xs[0] * f[0];
        let mut j = 0;
        while j + 1 < xs.len() && xs[j + 1] <= radius {
            integral += 0.5 * (xs[j + 1] - xs[j]) * (f[j] + f[j + 1]);
            j += 1;
        }
        if xs[j] < radius {
            let a_r = interp(&xs, &level.states.iter().map(|s| s.a).collect::<Vec<_>>(), radius);
            integral += 0.5 * (radius - xs[j]) * (f[j] + a_r * radius * radius);
        }
        let b_r = interp(&xs, &level.states.iter().map(|s| s.b).collect::<Vec<_>>(), radius);
        times.push(grid.time(level.index));
        integrals.push(integral);
        fluxes.push(radius * radius * b_r);
    }
    let mut out_times = Vec::new();
    let mut residuals = Vec::new();
    let mut normalized_max: f64 = 0.0;
    for k in 1..times.len() - 1 {
        let di = (integrals[k + 1] - integrals[k - 1]) / (times[k + 1] - times[k - 1]);
        let res = di + fluxes[k];
        let denom = di.abs() + fluxes[k].abs() + f64::MIN_POSITIVE;
        normalized_max = normalized_max.max(res.abs() / denom);
        out_times.push(times[k]);
        residuals.push(res);
    }
    Ok(EnergyBalance { times: out_times, residuals, normalized_max })
}
