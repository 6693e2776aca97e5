//! Staggered finite-volume marching scheme on the truncated radial domain.
//!
//! Time levels alternate between cell midpoints (odd levels, starting at the
//! initial one) and gridpoints (even levels). Every update integrates the
//! balance laws over a triangle whose base connects the two neighbouring
//! nodes of the previous level; at the origin the triangle is closed by the
//! reflection (a, b) -> (a, -b), which keeps the boundary moment exactly
//! zero. The kernel below is an algebraic rearrangement of the closed-form
//! triangle update, organised so that rest states and the reflected origin
//! node are reproduced bit for bit; `verify::lemmas` cross-checks it against
//! the direct closed form and a bisection solve of the implicit equation.

use crate::error::{Result, UrelError};
use crate::state::{triple_flux, Conserved};
use rayon::prelude::*;

/// Node count below which a level is updated sequentially.
const PAR_THRESHOLD: usize = 2048;

/// Grid geometry for marching to time `t_star` while keeping the radial
/// window [0, x_star] fully determined by the data.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub t_star: f64,
    pub x_star: f64,
    /// Half the number of time steps: dt = t_star / (2 n).
    pub n: usize,
    pub dt: f64,
    /// Cells per level-one row inside [0, x_star].
    pub m: usize,
    pub dx: f64,
    /// Mesh ratio dx / (2 dt); the scheme requires lambda >= 1.
    pub lambda: f64,
}

impl GridSpec {
    pub fn new(t_star: f64, x_star: f64, n: usize) -> Result<Self> {
        if !(t_star > 0.0) || !t_star.is_finite() || !(x_star > 0.0) || !x_star.is_finite() {
            return Err(UrelError::InvalidGrid(format!(
                "t_star and x_star must be positive and finite, got {t_star}, {x_star}"
            )));
        }
        if n == 0 {
            return Err(UrelError::InvalidGrid("need at least one time step".into()));
        }
        let cells = x_star * n as f64 / t_star;
        if cells < 1.0 {
            return Err(UrelError::CflViolation(cells));
        }
        let dt = t_star / (2.0 * n as f64);
        let m = cells.floor() as usize;
        let dx = x_star / m as f64;
        let mut lambda = dx / (2.0 * dt);
        if lambda < 1.0 {
            // m = floor(cells) keeps lambda >= 1 up to rounding dust.
            if lambda >= 1.0 - 1e-12 {
                lambda = 1.0;
            } else {
                return Err(UrelError::InvalidGrid(format!(
                    "mesh ratio {lambda} fell below 1"
                )));
            }
        }
        Ok(Self { t_star, x_star, n, dt, m, dx, lambda })
    }

    /// Total number of levels, the initial one included.
    pub fn levels(&self) -> usize {
        2 * self.n + 1
    }

    /// Time of a 1-based level index.
    pub fn time(&self, index: usize) -> f64 {
        (index - 1) as f64 * self.dt
    }

    /// Odd levels carry midpoint nodes, even levels gridpoint nodes.
    pub fn is_midpoint_level(&self, index: usize) -> bool {
        index % 2 == 1
    }

    /// Node count of a level: one node is lost every second step as the
    /// domain of determinacy narrows.
    pub fn level_len(&self, index: usize) -> usize {
        self.m + self.n - (index - 1) / 2
    }

    pub fn node_position(&self, index: usize, j: usize) -> f64 {
        if self.is_midpoint_level(index) {
            (j as f64 + 0.5) * self.dx
        } else {
            j as f64 * self.dx
        }
    }
}

/// One time level of the march.
#[derive(Clone, Debug)]
pub struct Level {
    /// 1-based level index; time is grid.time(index).
    pub index: usize,
    pub states: Vec<Conserved>,
}

impl Level {
    pub fn positions(&self, grid: &GridSpec) -> Vec<f64> {
        (0..self.states.len())
            .map(|j| grid.node_position(self.index, j))
            .collect()
    }
}

/// Triangle update. Inputs are the two base states (minus at x_bar - dx/2,
/// plus at x_bar + dx/2) together with their tripled fluxes 3c, the apex
/// radius x_bar, the base width dx and the mesh ratio lambda.
///
/// The arrangement below is exact-by-construction in two senses: for a rest
/// state (b = 0 on both sides, equal a) every correction term evaluates to
/// +0.0, and for reflected inputs at x_bar = 0 the moment output is +0.0.
/// The grouping of operations is what guarantees this; do not reassociate.
fn update_kernel(
    am: f64,
    bm: f64,
    c3m: f64,
    ap: f64,
    bp: f64,
    c3p: f64,
    x_bar: f64,
    dx: f64,
    lambda: f64,
) -> (f64, f64) {
    let q = 2.0 * x_bar * dx / (x_bar * x_bar + dx * dx / 3.0);
    let um = am + bm / lambda;
    let up = ap - bp / lambda;
    let a_new = 0.5 * (um + up) + 0.25 * q * (up - um);
    let vm = 3.0 * lambda * bm + c3m;
    let vp = 3.0 * lambda * bp - c3p;
    // y equals 3 lambda xi of the closed form; dev = 3 lambda xi + q a_new.
    let y = 0.5 * (vm + vp) + 0.25 * q * (vp - vm) - 0.5 * q * a_new;
    let dev = y + q * a_new;
    let h = q / (2.0 * lambda);
    let zq = 3.0 * q * a_new;
    // Same radicand as the closed form, scaled by (3q/2)^2:
    // dev (2 q a_new - dev) = (q a_new)^2 - (3 lambda xi)^2.
    let mut rad = zq * zq + 3.0 * h * h * dev * (2.0 * q * a_new - dev);
    if rad < 0.0 {
        rad = 0.0;
    }
    let rt = rad.sqrt();
    let b_new = (3.0 * dev + (rt - zq)) / ((3.0 + h * h) * (3.0 * lambda));
    (a_new, b_new)
}

/// Single admissibility-checked triangle update of two conserved states.
pub fn euler_update(
    a_minus: f64,
    b_minus: f64,
    a_plus: f64,
    b_plus: f64,
    x_bar: f64,
    dx: f64,
    lambda: f64,
) -> Result<(f64, f64)> {
    if !(b_minus.abs() < a_minus) {
        return Err(UrelError::InvalidState { a: a_minus, b: b_minus });
    }
    if !(b_plus.abs() < a_plus) {
        return Err(UrelError::InvalidState { a: a_plus, b: b_plus });
    }
    if !(x_bar >= 0.0) || !(dx > 0.0) || !x_bar.is_finite() || !dx.is_finite() {
        return Err(UrelError::InvalidGeometry(format!(
            "triangle needs x_bar >= 0 and dx > 0, got x_bar={x_bar}, dx={dx}"
        )));
    }
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(UrelError::InvalidGrid(format!("mesh ratio {lambda} below 1")));
    }
    let c3m = triple_flux(a_minus, b_minus)?;
    let c3p = triple_flux(a_plus, b_plus)?;
    let (a, b) = update_kernel(a_minus, b_minus, c3m, a_plus, b_plus, c3p, x_bar, dx, lambda);
    if !(b.abs() < a) {
        return Err(UrelError::StabilityLoss { level: 0, node: 0, a, b });
    }
    Ok((a, b))
}

/// Tripled flux per node; rejects any node whose reconstructed pressure is
/// not strictly positive (equivalent to sqrt(4a^2-3b^2) > a).
fn compute_c3(level: &Level, c3: &mut Vec<f64>, parallel: bool) -> Result<()> {
    let states = &level.states;
    c3.clear();
    c3.resize(states.len(), 0.0);
    let index = level.index;
    let body = |node: usize, st: &Conserved, out: &mut f64| -> Result<()> {
        let rad = 4.0 * st.a * st.a - 3.0 * st.b * st.b;
        let s = rad.sqrt();
        if !(s > st.a) {
            return Err(UrelError::StabilityLoss { level: index, node, a: st.a, b: st.b });
        }
        *out = st.a + 2.0 * (2.0 * st.a - s);
        Ok(())
    };
    if parallel && states.len() >= PAR_THRESHOLD {
        c3.par_iter_mut()
            .zip(states.par_iter())
            .enumerate()
            .with_min_len(512)
            .try_for_each(|(j, (out, st))| body(j, st, out))
    } else {
        for (j, (out, st)) in c3.iter_mut().zip(states).enumerate() {
            body(j, st, out)?;
        }
        Ok(())
    }
}

/// Advance one level; `next` is overwritten.
fn advance(
    grid: &GridSpec,
    prev: &Level,
    c3: &[f64],
    next: &mut Level,
    parallel: bool,
) -> Result<()> {
    if prev.index >= grid.levels() {
        return Err(UrelError::LevelExhausted);
    }
    let len = prev.states.len();
    if len != grid.level_len(prev.index) {
        return Err(UrelError::MismatchedLevels(format!(
            "level {} has {} nodes, expected {}",
            prev.index,
            len,
            grid.level_len(prev.index)
        )));
    }
    next.index = prev.index + 1;
    let out_len = grid.level_len(next.index);
    next.states.clear();
    next.states.resize(out_len, Conserved { a: 1.0, b: 0.0 });
    let (dx, lambda) = (grid.dx, grid.lambda);
    let midpoint_prev = grid.is_midpoint_level(prev.index);
    let next_index = next.index;
    let states = &prev.states;
    let body = |j: usize, out: &mut Conserved| -> Result<()> {
        let (a, b) = if midpoint_prev {
            if j == 0 {
                // reflected ghost node closes the triangle at the origin
                let s = states[0];
                update_kernel(s.a, -s.b, c3[0], s.a, s.b, c3[0], 0.0, dx, lambda)
            } else {
                let (sm, sp) = (states[j - 1], states[j]);
                update_kernel(
                    sm.a,
                    sm.b,
                    c3[j - 1],
                    sp.a,
                    sp.b,
                    c3[j],
                    j as f64 * dx,
                    dx,
                    lambda,
                )
            }
        } else {
            let (sm, sp) = (states[j], states[j + 1]);
            update_kernel(
                sm.a,
                sm.b,
                c3[j],
                sp.a,
                sp.b,
                c3[j + 1],
                (j as f64 + 0.5) * dx,
                dx,
                lambda,
            )
        };
        if !(b.abs() < a) {
            return Err(UrelError::StabilityLoss { level: next_index, node: j, a, b });
        }
        *out = Conserved { a, b };
        Ok(())
    };
    if parallel && out_len >= PAR_THRESHOLD {
        next.states
            .par_iter_mut()
            .enumerate()
            .with_min_len(512)
            .try_for_each(|(j, out)| body(j, out))
    } else {
        for (j, out) in next.states.iter_mut().enumerate() {
            body(j, out)?;
        }
        Ok(())
    }
}

/// Allocating single-step wrapper around the marching core.
pub fn step(level: &Level, grid: &GridSpec) -> Result<Level> {
    let mut c3 = Vec::new();
    compute_c3(level, &mut c3, false)?;
    let mut next = Level { index: level.index, states: Vec::new() };
    advance(grid, level, &c3, &mut next, false)?;
    Ok(next)
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Times to capture; each resolves to the nearest level (ties towards
    /// the earlier level).
    pub snapshot_times: Vec<f64>,
    /// Retain every `decimation`-th level, starting with the first updated
    /// one; the initial level is never part of the history.
    pub keep_history: bool,
    pub decimation: usize,
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { snapshot_times: Vec::new(), keep_history: false, decimation: 1, parallel: true }
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub requested_time: f64,
    pub time: f64,
    pub level_index: usize,
    pub positions: Vec<f64>,
    pub states: Vec<Conserved>,
}

#[derive(Clone, Copy, Debug)]
pub struct LevelStats {
    pub time: f64,
    pub min_a: f64,
    pub max_a: f64,
    pub min_b: f64,
    pub max_b: f64,
    /// min over the level of a - |b|.
    pub cone_margin: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RunStats {
    pub updates: u64,
    pub min_cone_margin: f64,
    /// Whether states[0].b == 0.0 held on every gridpoint level.
    pub boundary_b_exact_zero: bool,
    pub levels: Vec<LevelStats>,
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub grid: GridSpec,
    pub snapshots: Vec<Snapshot>,
    pub final_level: Level,
    pub history: Vec<Level>,
    pub decimation: usize,
    pub stats: RunStats,
}

/// Level whose time is nearest to `t`, ties resolved towards the earlier
/// level, clamped to the available range.
pub fn snapshot_level(grid: &GridSpec, t: f64) -> usize {
    let last = grid.levels();
    let k = (t / grid.dt).floor();
    if k < 0.0 {
        return 1;
    }
    let n1 = ((k as usize) + 1).min(last);
    let n2 = (n1 + 1).min(last);
    if (t - grid.time(n2)).abs() < (t - grid.time(n1)).abs() {
        n2
    } else {
        n1
    }
}

fn level_stats(grid: &GridSpec, level: &Level) -> LevelStats {
    let mut st = LevelStats {
        time: grid.time(level.index),
        min_a: f64::INFINITY,
        max_a: f64::NEG_INFINITY,
        min_b: f64::INFINITY,
        max_b: f64::NEG_INFINITY,
        cone_margin: f64::INFINITY,
    };
    for s in &level.states {
        st.min_a = st.min_a.min(s.a);
        st.max_a = st.max_a.max(s.a);
        st.min_b = st.min_b.min(s.b);
        st.max_b = st.max_b.max(s.b);
        st.cone_margin = st.cone_margin.min(s.a - s.b.abs());
    }
    st
}

/// March the scheme from sampled initial data to t_star.
pub fn run<S>(sampler: S, grid: &GridSpec, options: &RunOptions) -> Result<SimulationResult>
where
    S: Fn(f64) -> Result<(f64, f64)>,
{
    run_with_observer(sampler, grid, options, |_, _| Ok(()))
}

/// Like `run`, additionally calling `observer` for every consecutive level
/// pair as it is produced (before buffers are recycled).
pub fn run_with_observer<S, F>(
    sampler: S,
    grid: &GridSpec,
    options: &RunOptions,
    mut observer: F,
) -> Result<SimulationResult>
where
    S: Fn(f64) -> Result<(f64, f64)>,
    F: FnMut(&Level, &Level) -> Result<()>,
{
    if options.decimation == 0 {
        return Err(UrelError::InvalidGrid("decimation must be at least 1".into()));
    }
    let first_len = grid.level_len(1);
    let mut states = Vec::with_capacity(first_len);
    for j in 0..first_len {
        let (a, b) = sampler(grid.node_position(1, j))?;
        if !(b.abs() < a) || !a.is_finite() {
            return Err(UrelError::InvalidState { a, b });
        }
        states.push(Conserved { a, b });
    }
    let mut prev = Level { index: 1, states };
    let mut next = Level { index: 1, states: Vec::new() };
    let mut c3: Vec<f64> = Vec::new();

    // map each level index to the snapshot request slots it serves
    let mut slots: Vec<(usize, usize)> = options
        .snapshot_times
        .iter()
        .enumerate()
        .map(|(slot, &t)| (snapshot_level(grid, t), slot))
        .collect();
    slots.sort_unstable();
    let mut captured: Vec<Option<Snapshot>> = vec![None; options.snapshot_times.len()];
    let capture = |level: &Level, captured: &mut Vec<Option<Snapshot>>| {
        for &(idx, slot) in &slots {
            if idx == level.index {
                captured[slot] = Some(Snapshot {
                    requested_time: options.snapshot_times[slot],
                    time: grid.time(level.index),
                    level_index: level.index,
                    positions: level.positions(grid),
                    states: level.states.clone(),
                });
            }
        }
    };

    let mut stats = RunStats {
        updates: 0,
        min_cone_margin: f64::INFINITY,
        boundary_b_exact_zero: true,
        levels: Vec::with_capacity(grid.levels()),
    };
    let mut history: Vec<Level> = Vec::new();
    let note = |level: &Level,
                    stats: &mut RunStats,
                    history: &mut Vec<Level>,
                    captured: &mut Vec<Option<Snapshot>>| {
        let st = level_stats(grid, level);
        stats.min_cone_margin = stats.min_cone_margin.min(st.cone_margin);
        if !grid.is_midpoint_level(level.index) && level.states[0].b != 0.0 {
            stats.boundary_b_exact_zero = false;
        }
        stats.levels.push(st);
        if options.keep_history && level.index >= 2 && (level.index - 2) % options.decimation == 0
        {
            history.push(level.clone());
        }
        capture(level, captured);
    };
    note(&prev, &mut stats, &mut history, &mut captured);

    for _ in 1..grid.levels() {
        compute_c3(&prev, &mut c3, options.parallel)?;
        advance(grid, &prev, &c3, &mut next, options.parallel)?;
        stats.updates += next.states.len() as u64;
        note(&next, &mut stats, &mut history, &mut captured);
        observer(&prev, &next)?;
        std::mem::swap(&mut prev, &mut next);
    }

    let snapshots = captured
        .into_iter()
        .map(|s| s.expect("every level index in range is visited"))
        .collect();
    Ok(SimulationResult {
        grid: *grid,
        snapshots,
        final_level: prev,
        history,
        decimation: options.decimation,
        stats,
    })
}
