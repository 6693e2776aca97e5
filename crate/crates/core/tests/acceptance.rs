//! End-to-end acceptance runs. Each criterion exercises a reference flow at
//! the resolution it is specified for, checks the published value at its
//! stated tolerance and prints a single PASS/FAIL line. The test fails if
//! any criterion does.

use std::time::Instant;

use urel::diagnostics::{
    detect_shock, entropy_production, self_similarity_error, shock_admissible,
    shock_arrival_time, track_shock, ShockTrack,
};
use urel::piecewise::PiecewiseData;
use urel::scheme::{
    run, run_with_observer, GridSpec, RunOptions, RunStats, SimulationResult, Snapshot,
};
use urel::verify::run_suite;

const REST: (f64, f64) = (3.0, 0.0);

fn expanding_data() -> PiecewiseData {
    PiecewiseData::constant(7.0, 32f64.sqrt()).expect("constant expanding state is admissible")
}

fn imploding_data() -> PiecewiseData {
    PiecewiseData::constant(7.0, -(32f64.sqrt())).expect("constant imploding state is admissible")
}

/// Unit pressure inside the unit sphere, a tenth of it outside, gas at rest.
fn bubble_data() -> PiecewiseData {
    PiecewiseData::piecewise_constant(&[1.0], &[3.0, 3.0 * 0.1], &[0.0, 0.0])
        .expect("bubble state is admissible")
}

fn simulate(data: &PiecewiseData, grid: &GridSpec, times: &[f64]) -> SimulationResult {
    let options = RunOptions { snapshot_times: times.to_vec(), ..RunOptions::default() };
    run(|x| Ok(data.sample(x)), grid, &options).expect("acceptance run stays admissible")
}

/// Median pressure and largest |v| over the nodes with lo <= x <= hi.
fn inner_stats(snap: &Snapshot, lo: f64, hi: f64) -> (f64, f64) {
    let mut ps = Vec::new();
    let mut v_max = 0.0f64;
    for (x, s) in snap.positions.iter().zip(&snap.states) {
        if (lo..=hi).contains(x) {
            let prim = s.to_primitive().expect("inner states are admissible");
            ps.push(prim.p);
            v_max = v_max.max(prim.three_velocity().abs());
        }
    }
    ps.sort_by(|a, b| a.partial_cmp(b).expect("pressures are finite"));
    (ps[ps.len() / 2], v_max)
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

struct Outcome {
    label: &'static str,
    passed: bool,
    detail: String,
}

type Pool = Vec<(String, RunStats)>;

/// A constant rest state must be reproduced bitwise over the whole run.
fn stationary_exactness(pool: &mut Pool) -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::new(1.0, 1.0, 200).expect("grid is valid");
    let mut drift = 0.0f64;
    let result = run_with_observer(
        |_| Ok(REST),
        &grid,
        &RunOptions::default(),
        |_, next| {
            for s in &next.states {
                drift = drift.max((s.a - REST.0).abs()).max(s.b.abs());
            }
            Ok(())
        },
    )
    .expect("rest state run succeeds");
    let elapsed = start.elapsed().as_secs_f64();
    let final_exact = result.final_level.states.iter().all(|s| s.a == REST.0 && s.b == REST.1);
    pool.push(("rest n=200".into(), result.stats));
    Outcome {
        label: "stationary exactness",
        passed: drift == 0.0 && final_exact && elapsed < 1.0,
        detail: format!("drift={drift:.1e} final_exact={final_exact} elapsed={elapsed:.2}s"),
    }
}

/// Expanding flow: the inner region empties to a known residual pressure.
fn expanding_inner_state(pool: &mut Pool) -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::new(1.0, 1.0, 3000).expect("grid is valid");
    let result = simulate(&expanding_data(), &grid, &[1.0]);
    let elapsed = start.elapsed().as_secs_f64();
    let (p, v_max) = inner_stats(&result.snapshots[0], 0.01, 0.05);
    pool.push(("expanding n=3000".into(), result.stats));
    Outcome {
        label: "expanding flow inner state",
        passed: within(p, 0.00032, 0.05) && v_max <= 1e-3 && elapsed <= 30.0,
        detail: format!(
            "inner p={p:.4e} (0.00032 within 5%) max|v|={v_max:.1e} elapsed={elapsed:.1}s"
        ),
    }
}

/// Imploding flow: compressed core pressure and outgoing shock speed.
fn imploding_shock(pool: &mut Pool) -> Outcome {
    let grid = GridSpec::new(1.0, 1.0, 3000).expect("grid is valid");
    let times: Vec<f64> = (0..=16).map(|k| 0.2 + 0.05 * k as f64).collect();
    let result = simulate(&imploding_data(), &grid, &times);
    let last = result.snapshots.last().expect("snapshots were requested");
    let (p, _) = inner_stats(last, 0.01, 0.05);
    pool.push(("imploding n=3000".into(), result.stats.clone()));
    let track = match track_shock(&result.snapshots, (0.02, 0.3), 0.05) {
        Ok(track) if track.times.len() == times.len() => track,
        Ok(track) => {
            return Outcome {
                label: "imploding flow shock",
                passed: false,
                detail: format!("track lost after {} of {} snapshots", track.times.len(), times.len()),
            }
        }
        Err(e) => {
            return Outcome {
                label: "imploding flow shock",
                passed: false,
                detail: format!("tracking failed: {e}"),
            }
        }
    };
    let admissible = match detect_shock(last, (0.02, 0.8)) {
        Ok(x) => {
            let idx = last.positions.partition_point(|&q| q < x);
            shock_admissible(&last.states[idx - 1], &last.states[idx])
                .expect("states near the shock are admissible")
        }
        Err(_) => false,
    };
    Outcome {
        label: "imploding flow shock",
        passed: within(p, 25.55, 0.02) && within(track.fitted_speed, 0.523, 0.02) && admissible,
        detail: format!(
            "inner p={p:.4} (25.55 within 2%) shock speed={:.4} (0.523 within 2%) admissible={admissible}",
            track.fitted_speed
        ),
    }
}

/// Both reference flows are self-similar; the profile gap between half time
/// and full time must shrink under refinement.
fn self_similarity_refinement(pool: &mut Pool) -> Outcome {
    let mut passed = true;
    let mut detail = String::new();
    for (name, data) in [("expanding", expanding_data()), ("imploding", imploding_data())] {
        let mut gaps = Vec::new();
        for n in [375usize, 750, 1500] {
            let grid = GridSpec::new(1.0, 1.0, n).expect("grid is valid");
            let result = simulate(&data, &grid, &[0.5, 1.0]);
            let gap = self_similarity_error(&result.snapshots[0], &result.snapshots[1])
                .expect("snapshots overlap");
            pool.push((format!("{name} n={n}"), result.stats));
            gaps.push(gap);
        }
        let monotone = gaps
            .windows(2)
            .all(|w| w[1].pressure < w[0].pressure && w[1].velocity < w[0].velocity);
        passed &= monotone;
        if !detail.is_empty() {
            detail.push_str("; ");
        }
        detail.push_str(&format!(
            "{name} p {:.2e}>{:.2e}>{:.2e} ({})",
            gaps[0].pressure,
            gaps[1].pressure,
            gaps[2].pressure,
            if monotone { "monotone" } else { "not monotone" }
        ));
    }
    Outcome { label: "self-similarity refinement", passed, detail }
}

/// Collapsing bubble: the inward shock reaches the origin at a known time
/// and reflects into a pressure spike there.
fn bubble_collapse(pool: &mut Pool) -> Outcome {
    let grid = GridSpec::new(5.0, 2.0, 1500).expect("grid is valid");
    let data = bubble_data();
    let mut times: Vec<f64> = (0..=16).map(|k| 3.3 + 0.05 * k as f64).collect();
    times.extend((1..=3).map(|k| 4.1 + 0.01 * k as f64));
    let options = RunOptions { snapshot_times: times, ..RunOptions::default() };
    let mut pre_boundary_p = f64::NAN;
    let mut spike = 0.0f64;
    let result = run_with_observer(
        |x| Ok(data.sample(x)),
        &grid,
        &options,
        |prev, next| {
            let (tp, tn) = (grid.time(prev.index), grid.time(next.index));
            if tp < 4.0 && tn >= 4.0 {
                pre_boundary_p = prev.states[0].to_primitive()?.p;
            }
            if (4.0..=4.4).contains(&tn) {
                for (j, s) in next.states.iter().enumerate() {
                    if grid.node_position(next.index, j) >= 0.05 {
                        break;
                    }
                    spike = spike.max(s.to_primitive()?.p);
                }
            }
            Ok(())
        },
    )
    .expect("bubble run stays admissible");
    pool.push(("bubble n=1500".into(), result.stats.clone()));
    // The front runs into near-vacuum, so recentre with a window biased
    // towards the quiet inner side; the steep ambient gradient outside would
    // otherwise drown the isolation test.
    let mut track =
        ShockTrack { times: Vec::new(), positions: Vec::new(), fitted_speed: 0.0, fit_residual: 0.0 };
    let mut window = (0.3, 1.1);
    for snap in &result.snapshots {
        if let Ok(x) = detect_shock(snap, window) {
            track.times.push(snap.time);
            track.positions.push(x);
            window = (x - 0.25, x + 0.05);
        }
    }
    let (arrival_ok, arrival_text) = match shock_arrival_time(&track, grid.dx) {
        Ok(t) => (within(t, 4.16, 0.02), format!("{t:.4}")),
        Err(e) => (false, format!("{e} ({} tracked points)", track.times.len())),
    };
    let spike_ok = spike > 3.0 * pre_boundary_p;
    Outcome {
        label: "bubble collapse arrival and spike",
        passed: arrival_ok && spike_ok,
        detail: format!(
            "arrival={arrival_text} (4.16 within 2%) spike p={spike:.3} vs pre-arrival boundary p={pre_boundary_p:.2e}"
        ),
    }
}

/// The closed-form checks of the linearized system, at machine tolerance.
fn linearized_checks() -> Outcome {
    let results = run_suite("linear").expect("linear suite runs");
    let wanted = [
        "constant_profile_is_stationary",
        "reference_profile_matches_closed_form",
        "interior_residual_decays_at_second_order",
        "jump_speeds_match_characteristics",
    ];
    let mut passed = true;
    let mut failing = Vec::new();
    for name in wanted {
        let r = results.iter().find(|r| r.name == name).expect("property is part of the suite");
        if !r.passed {
            passed = false;
            failing.push(name);
        }
    }
    Outcome {
        label: "linearized solution checks",
        passed,
        detail: if passed {
            format!("{} closed-form properties hold", wanted.len())
        } else {
            format!("failing: {}", failing.join(", "))
        },
    }
}

/// Randomized trials of the update bracket bounds and the closed-form
/// moment against a bisection oracle.
fn update_lemma_trials() -> Outcome {
    let results = run_suite("lemmas").expect("lemma suite runs");
    let passed = results.iter().all(|r| r.passed);
    let trials: u64 = results.iter().map(|r| r.trials).sum();
    let oracle = results
        .iter()
        .find(|r| r.name == "kernel_matches_bisection")
        .expect("oracle comparison is part of the suite");
    Outcome {
        label: "update lemma trials",
        passed,
        detail: format!(
            "{trials} randomized trials, oracle agreement worst={:.1e} (tol 1e-12)",
            oracle.worst_margin
        ),
    }
}

/// Every state of every run above must stay strictly inbounds, and the
/// reflecting boundary must hold b = 0 exactly. A positive cone margin
/// forces a > |b| >= 0 and with it a positive reconstructed pressure.
fn state_cone_and_boundary(pool: &Pool) -> Outcome {
    let mut worst = f64::INFINITY;
    let mut failing = Vec::new();
    for (label, stats) in pool {
        worst = worst.min(stats.min_cone_margin);
        if !(stats.min_cone_margin > 0.0) || !stats.boundary_b_exact_zero {
            failing.push(label.as_str());
        }
    }
    Outcome {
        label: "state cone and boundary",
        passed: failing.is_empty(),
        detail: if failing.is_empty() {
            format!("{} runs, min cone margin {worst:.3e}, boundary b exactly zero", pool.len())
        } else {
            format!("violations in: {}", failing.join(", "))
        },
    }
}

/// Discrete entropy production: zero to rounding on a constant state,
/// strictly negative across the outgoing shock of the imploding flow, and
/// nowhere more than an empirically pinned positive excess.
fn entropy_diagnostic() -> Outcome {
    let grid = GridSpec::new(1.0, 1.0, 200).expect("grid is valid");
    let mut constant_worst = 0.0f64;
    run_with_observer(|_| Ok(REST), &grid, &RunOptions::default(), |prev, next| {
        let rep = entropy_production(prev, next, &grid)?;
        constant_worst = constant_worst.max(rep.max_positive.abs()).max(rep.min_value.abs());
        Ok(())
    })
    .expect("rest state run succeeds");

    let grid = GridSpec::new(1.0, 1.0, 1500).expect("grid is valid");
    let data = imploding_data();
    let mut max_excess = 0.0f64;
    let mut shock_negative = true;
    let mut global_min = f64::INFINITY;
    run_with_observer(
        |x| Ok(data.sample(x)),
        &grid,
        &RunOptions::default(),
        |prev, next| {
            let rep = entropy_production(prev, next, &grid)?;
            max_excess = max_excess.max(rep.max_positive);
            global_min = global_min.min(rep.min_value);
            let t = grid.time(next.index);
            if t >= 0.5 {
                // triangles straddling the outgoing shock front
                let front = 0.523 * t;
                let mut local = f64::INFINITY;
                for (x, v) in rep.x_bars.iter().zip(&rep.values) {
                    if (x - front).abs() <= 0.03 {
                        local = local.min(*v);
                    }
                }
                if !(local < 0.0) {
                    shock_negative = false;
                }
            }
            Ok(())
        },
    )
    .expect("imploding run stays admissible");
    Outcome {
        label: "entropy production",
        passed: constant_worst <= 1e-12 && shock_negative && max_excess <= 1e-6,
        detail: format!(
            "constant worst={constant_worst:.1e} (tol 1e-12) shock min={global_min:.1e} strictly_negative={shock_negative} max excess={max_excess:.1e} (tol 1e-6)"
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let mut pool: Pool = Vec::new();
    let outcomes = vec![
        stationary_exactness(&mut pool),
        expanding_inner_state(&mut pool),
        imploding_shock(&mut pool),
        self_similarity_refinement(&mut pool),
        bubble_collapse(&mut pool),
        linearized_checks(),
        update_lemma_trials(),
        state_cone_and_boundary(&pool),
        entropy_diagnostic(),
    ];
    let mut failed = 0;
    for (k, o) in outcomes.iter().enumerate() {
        println!(
            "criterion {} {}: {} ({})",
            k + 1,
            o.label,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.passed {
            failed += 1;
        }
    }
    assert_eq!(failed, 0, "{failed} of {} acceptance criteria failed", outcomes.len());
}
