//! CSV emission and ingestion: per-snapshot tables with derived fields,
//! space-time matrices of pressure and velocity for external heatmap
//! plotting, and profiles of the linearized solution.
//!
//! All numbers are written with 17 significant digits, which round-trips
//! f64 exactly; lines end with LF on every platform.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, UrelError};
use crate::scheme::{SimulationResult, Snapshot};
use crate::state::Conserved;

pub const SNAPSHOT_HEADER: &str = "t,x,a,b,p,u,v,c,entropy_density";

fn push_f64(buf: &mut String, v: f64) {
    write!(buf, "{v:.16e}").expect("writing to a string cannot fail");
}

/// Render a snapshot as CSV, one row per node with the conserved and the
/// derived primitive fields.
pub fn snapshot_csv(snap: &Snapshot) -> Result<String> {
    let mut buf = String::new();
    buf.push_str(SNAPSHOT_HEADER);
    buf.push('\n');
    for (x, s) in snap.positions.iter().zip(&snap.states) {
        let prim = s.to_primitive()?;
        let (entropy, _) = prim.entropy_pair();
        let cols = [
            snap.time,
            *x,
            s.a,
            s.b,
            prim.p,
            prim.u,
            prim.three_velocity(),
            s.flux()?,
            entropy,
        ];
        for (k, c) in cols.iter().enumerate() {
            if k > 0 {
                buf.push(',');
            }
            push_f64(&mut buf, *c);
        }
        buf.push('\n');
    }
    Ok(buf)
}

pub fn emit_snapshot(snap: &Snapshot, path: &Path) -> Result<()> {
    fs::write(path, snapshot_csv(snap)?)?;
    Ok(())
}

fn malformed(path: &Path, line: usize, message: &str) -> UrelError {
    UrelError::Config(format!("{}: line {line}: {message}", path.display()))
}

/// Read a snapshot CSV back; the conserved fields reproduce the emitted
/// level bit-exactly, derived columns are ignored.
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SNAPSHOT_HEADER => {}
        _ => return Err(malformed(path, 1, "missing snapshot header")),
    }
    let mut time = 0.0;
    let mut positions = Vec::new();
    let mut states = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        let mut cols = row.split(',');
        let mut field = |name: &str| -> Result<f64> {
            cols.next()
                .ok_or_else(|| malformed(path, line, &format!("missing column {name}")))?
                .parse()
                .map_err(|_| malformed(path, line, &format!("column {name} is not a number")))
        };
        let t = field("t")?;
        let x = field("x")?;
        let a = field("a")?;
        let b = field("b")?;
        if positions.is_empty() {
            time = t;
        }
        positions.push(x);
        states.push(Conserved::new(a, b)?);
    }
    if positions.is_empty() {
        return Err(malformed(path, 1, "no data rows"));
    }
    Ok(Snapshot { requested_time: time, time, level_index: 0, positions, states })
}

/// Space-time matrices of pressure and three-velocity, thinned by
/// `decimation` in both directions: one row per retained level with index
/// 2, 2+k, ..., one column per node slot 0, k, 2k, ... of the widest level.
/// The first row holds the node positions of an unstaggered level (staggered
/// rows sit half a cell to the right); the first column holds the level
/// times. Slots beyond a shrinking level's width are written as nan. Writes
/// `spacetime_p.csv` and `spacetime_v.csv` into `dir`.
pub fn emit_spacetime_grid(
    result: &SimulationResult,
    decimation: usize,
    dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    if result.history.is_empty() {
        return Err(UrelError::HistoryNotRetained);
    }
    if decimation == 0 {
        return Err(UrelError::InvalidGrid("decimation must be at least 1".into()));
    }
    if decimation % result.decimation != 0 {
        return Err(UrelError::InvalidGrid(format!(
            "spacetime decimation {decimation} must be a multiple of the retained stride {}",
            result.decimation
        )));
    }
    let grid = &result.grid;
    let width = grid.level_len(2);
    let cols = (width + decimation - 1) / decimation;
    let mut header = String::from("t");
    for j in 0..cols {
        header.push(',');
        push_f64(&mut header, grid.node_position(2, j * decimation));
    }
    header.push('\n');
    let mut buf_p = header.clone();
    let mut buf_v = header;
    for level in &result.history {
        if (level.index - 2) % decimation != 0 {
            continue;
        }
        push_f64(&mut buf_p, grid.time(level.index));
        push_f64(&mut buf_v, grid.time(level.index));
        for j in 0..cols {
            buf_p.push(',');
            buf_v.push(',');
            match level.states.get(j * decimation) {
                Some(s) => {
                    let prim = s.to_primitive()?;
                    push_f64(&mut buf_p, prim.p);
                    push_f64(&mut buf_v, prim.three_velocity());
                }
                None => {
                    buf_p.push_str("nan");
                    buf_v.push_str("nan");
                }
            }
        }
        buf_p.push('\n');
        buf_v.push('\n');
    }
    let path_p = dir.join("spacetime_p.csv");
    let path_v = dir.join("spacetime_v.csv");
    fs::write(&path_p, buf_p)?;
    fs::write(&path_v, buf_v)?;
    Ok((path_p, path_v))
}

/// Profile of the linearized solution at one time: rows of t,x,a,b.
pub fn emit_linear_profile(t: f64, xs: &[f64], values: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut buf = String::from("t,x,a,b\n");
    for (x, (a, b)) in xs.iter().zip(values) {
        for (k, c) in [t, *x, *a, *b].iter().enumerate() {
            if k > 0 {
                buf.push(',');
            }
            push_f64(&mut buf, *c);
        }
        buf.push('\n');
    }
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{run, GridSpec, RunOptions};

    fn temp_path(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("urel-output-{}", std::process::id()));
        fs::create_dir_all(&dir).expect("temp dir is writable");
        dir.join(name)
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let grid = GridSpec::new(1.0, 1.0, 8).unwrap();
        let opts = RunOptions { snapshot_times: vec![0.5], ..RunOptions::default() };
        let result = run(|_| Ok((7.0, 32f64.sqrt())), &grid, &opts).unwrap();
        let snap = &result.snapshots[0];
        let path = temp_path("roundtrip.csv");
        emit_snapshot(snap, &path).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.time.to_bits(), snap.time.to_bits());
        assert_eq!(back.positions.len(), snap.positions.len());
        for (x, y) in back.positions.iter().zip(&snap.positions) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (s, t) in back.states.iter().zip(&snap.states) {
            assert_eq!(s.a.to_bits(), t.a.to_bits());
            assert_eq!(s.b.to_bits(), t.b.to_bits());
        }
    }

    #[test]
    fn rest_state_row_carries_the_derived_fields() {
        let snap = Snapshot {
            requested_time: 0.0,
            time: 0.0,
            level_index: 1,
            positions: vec![0.5],
            states: vec![Conserved { a: 3.0, b: 0.0 }],
        };
        let csv = snapshot_csv(&snap).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SNAPSHOT_HEADER));
        let row: Vec<f64> =
            lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(row, vec![0.0, 0.5, 3.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn moving_state_row_matches_the_transformation() {
        let snap = Snapshot {
            requested_time: 0.0,
            time: 0.0,
            level_index: 1,
            positions: vec![0.5],
            states: vec![Conserved { a: 7.0, b: 32f64.sqrt() }],
        };
        let csv = snapshot_csv(&snap).unwrap();
        let row: Vec<f64> =
            csv.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        let (p, u, v, c) = (row[4], row[5], row[6], row[7]);
        assert!((p - 1.0).abs() <= 1e-12);
        assert!((u - 1.0).abs() <= 1e-12);
        assert!((v - 1.0 / 2f64.sqrt()).abs() <= 1e-12);
        assert!((c - 5.0).abs() <= 1e-12);
    }

    #[test]
    fn malformed_snapshot_files_are_rejected() {
        let path = temp_path("broken.csv");
        fs::write(&path, "nonsense\n").unwrap();
        assert!(read_snapshot(&path).unwrap_err().to_string().contains("header"));
        fs::write(&path, format!("{SNAPSHOT_HEADER}\n1,2,3\n")).unwrap();
        assert!(read_snapshot(&path).unwrap_err().to_string().contains("column"));
        fs::write(&path, format!("{SNAPSHOT_HEADER}\n")).unwrap();
        assert!(read_snapshot(&path).unwrap_err().to_string().contains("no data rows"));
    }

    #[test]
    fn spacetime_dims_follow_the_decimation() {
        let grid = GridSpec::new(1.0, 2.0, 2).unwrap();
        let opts = RunOptions { keep_history: true, ..RunOptions::default() };
        let result = run(|_| Ok((3.0, 0.0)), &grid, &opts).unwrap();
        let dir = temp_path("");
        // full resolution: 2N rows, M+N columns
        let (pp, pv) = emit_spacetime_grid(&result, 1, &dir).unwrap();
        let text = fs::read_to_string(&pp).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 1 + 4);
        assert_eq!(rows[0].split(',').count(), 1 + 6);
        for row in &rows[1..] {
            for cell in row.split(',').skip(1).filter(|c| *c != "nan") {
                let val: f64 = cell.parse().unwrap();
                assert_eq!(val, 1.0);
            }
        }
        let vtext = fs::read_to_string(&pv).unwrap();
        for row in vtext.lines().skip(1) {
            for cell in row.split(',').skip(1).filter(|c| *c != "nan") {
                assert_eq!(cell.parse::<f64>().unwrap(), 0.0);
            }
        }
        // thinned: ceil(4/3) rows, ceil(6/3) columns
        let (pp, _) = emit_spacetime_grid(&result, 3, &dir).unwrap();
        let text = fs::read_to_string(&pp).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 1 + 2);
        assert_eq!(rows[0].split(',').count(), 1 + 2);
        // oversized stride collapses to a single row
        let (pp, _) = emit_spacetime_grid(&result, 100, &dir).unwrap();
        assert_eq!(fs::read_to_string(&pp).unwrap().lines().count(), 1 + 1);
    }

    #[test]
    fn shrinking_levels_pad_with_nan() {
        let grid = GridSpec::new(1.0, 1.0, 4).unwrap();
        let opts = RunOptions { keep_history: true, ..RunOptions::default() };
        let result = run(|_| Ok((3.0, 0.0)), &grid, &opts).unwrap();
        let dir = temp_path("");
        let (pp, _) = emit_spacetime_grid(&result, 1, &dir).unwrap();
        let text = fs::read_to_string(&pp).unwrap();
        let last = text.lines().last().unwrap();
        assert!(last.contains("nan"), "{last}");
        let first_data = text.lines().nth(1).unwrap();
        assert!(!first_data.contains("nan"), "{first_data}");
    }

    #[test]
    fn spacetime_requires_compatible_history() {
        let grid = GridSpec::new(1.0, 2.0, 2).unwrap();
        let plain = run(|_| Ok((3.0, 0.0)), &grid, &RunOptions::default()).unwrap();
        let dir = temp_path("");
        assert!(matches!(
            emit_spacetime_grid(&plain, 1, &dir),
            Err(UrelError::HistoryNotRetained)
        ));
        let opts = RunOptions { keep_history: true, decimation: 2, ..RunOptions::default() };
        let kept = run(|_| Ok((3.0, 0.0)), &grid, &opts).unwrap();
        assert!(matches!(
            emit_spacetime_grid(&kept, 3, &dir),
            Err(UrelError::InvalidGrid(_))
        ));
        assert!(emit_spacetime_grid(&kept, 4, &dir).is_ok());
    }

    #[test]
    fn linear_profile_uses_the_plain_header() {
        let path = temp_path("linear.csv");
        emit_linear_profile(0.5, &[0.1, 0.2], &[(1.0, 0.0), (2.0, 0.5)], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,a,b"));
        assert_eq!(lines.clone().count(), 2);
        let row: Vec<f64> =
            lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(row, vec![0.5, 0.1, 1.0, 0.0]);
    }
}
