//! Line-oriented run configuration: `key = value` pairs for the grid and
//! output selection, a `preset` shortcut for the four reference setups, and
//! `[segment]` blocks for custom piecewise initial data in either (p, v) or
//! (a, b) variables.

use crate::error::{Result, UrelError};
use crate::piecewise::{LinearCoef, PiecewiseData};
use crate::scheme::GridSpec;
use crate::state::{four_velocity, Primitive};

/// Pieces a sloped (p, v) segment is split into when converted to the
/// piecewise-linear (a, b) representation.
const PV_SUBDIVISIONS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Example1,
    Example2,
    Example3,
    Example4,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variables {
    /// Segments give conserved fields `a`, `b`.
    AB,
    /// Segments give pressure `p` and three-velocity `v`.
    PV,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub preset: Preset,
    pub t_star: f64,
    pub x_star: f64,
    pub n: usize,
    pub snapshot_times: Vec<f64>,
    pub emit_snapshots: bool,
    pub emit_spacetime: bool,
    pub emit_diagnostics: bool,
    /// Initial data resolved to conserved variables.
    pub data: PiecewiseData,
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.t_star, self.x_star, self.n)
    }
}

fn fail(line: usize, message: impl Into<String>) -> UrelError {
    UrelError::ConfigAt { line, message: message.into() }
}

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| fail(line, format!("{key}: `{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(fail(line, format!("{key}: `{raw}` is not finite")));
    }
    Ok(v)
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(fail(line, format!("{key}: expected true or false, got `{raw}`"))),
    }
}

/// One field of a segment: constant or a linear ramp `start -> end`.
#[derive(Clone, Copy, Debug)]
struct Ramp {
    start: f64,
    end: Option<f64>,
    line: usize,
}

impl Ramp {
    fn parse(line: usize, key: &str, raw: &str) -> Result<Self> {
        let (start, end) = match raw.split_once("->") {
            Some((s, e)) => (
                parse_f64(line, key, s.trim())?,
                Some(parse_f64(line, key, e.trim())?),
            ),
            None => (parse_f64(line, key, raw)?, None),
        };
        Ok(Ramp { start, end, line })
    }

    fn end(&self) -> f64 {
        self.end.unwrap_or(self.start)
    }
}

#[derive(Clone, Debug, Default)]
struct SegmentBlock {
    header_line: usize,
    range: Option<(f64, Option<f64>, usize)>,
    fields: Vec<(String, Ramp)>,
}

impl SegmentBlock {
    fn field(&self, key: &str) -> Option<&Ramp> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, r)| r)
    }
}

/// Admissibility of a (p, v) pair, reported against the config line.
fn check_pv(line: usize, p: f64, v: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(fail(line, format!("pressure must be positive, got {p}")));
    }
    if !(v.abs() < 1.0) {
        return Err(fail(line, format!("three-velocity must satisfy |v| < 1, got {v}")));
    }
    Ok(())
}

fn pv_to_ab(p: f64, v: f64) -> Result<(f64, f64)> {
    let u = four_velocity(v)?;
    let c = Primitive::new(p, u)?.to_conserved();
    Ok((c.a, c.b))
}

/// Assemble piecewise (a, b) data from segment blocks. Sloped (p, v)
/// segments are subdivided because the conversion is nonlinear; the cone
/// |b| < a is convex, so interpolating converted endpoint states stays
/// admissible.
fn build_data(variables: Variables, segments: &[SegmentBlock]) -> Result<PiecewiseData> {
    let (k1, k2) = match variables {
        Variables::AB => ("a", "b"),
        Variables::PV => ("p", "v"),
    };
    let mut breaks = Vec::new();
    let mut a_coefs = Vec::new();
    let mut b_coefs = Vec::new();
    let mut expected_lo = 0.0;
    for (i, seg) in segments.iter().enumerate() {
        let (lo, hi, range_line) = seg
            .range
            .ok_or_else(|| fail(seg.header_line, "segment is missing `range`"))?;
        if lo != expected_lo {
            return Err(fail(
                range_line,
                format!("segments must tile [0, inf) without gaps: expected start {expected_lo}, got {lo}"),
            ));
        }
        let last = i == segments.len() - 1;
        match hi {
            Some(h) if last => {
                return Err(fail(range_line, format!("the last segment must extend to inf, got {h}")))
            }
            None if !last => {
                return Err(fail(range_line, "only the last segment may extend to inf"))
            }
            Some(h) if !(h > lo) => {
                return Err(fail(range_line, format!("range end {h} must exceed start {lo}")))
            }
            _ => {}
        }
        for (key, _) in &seg.fields {
            if key != k1 && key != k2 {
                let want = format!("{k1}/{k2}");
                return Err(fail(
                    seg.header_line,
                    format!("segment key `{key}` does not match variables = {want}"),
                ));
            }
        }
        let f1 = seg
            .field(k1)
            .ok_or_else(|| fail(seg.header_line, format!("segment is missing `{k1}`")))?;
        let f2 = seg
            .field(k2)
            .ok_or_else(|| fail(seg.header_line, format!("segment is missing `{k2}`")))?;
        let sloped = f1.end.is_some() || f2.end.is_some();
        if sloped && hi.is_none() {
            return Err(fail(
                f1.end.map_or(f2.line, |_| f1.line),
                "an unbounded segment cannot carry a ramp",
            ));
        }
        match variables {
            Variables::AB => {
                let width = hi.map(|h| h - lo);
                let slope = |r: &Ramp| width.map_or(0.0, |w| (r.end() - r.start) / w);
                breaks.push(lo);
                a_coefs.push(LinearCoef { value: f1.start, slope: slope(f1) });
                b_coefs.push(LinearCoef { value: f2.start, slope: slope(f2) });
            }
            Variables::PV => {
                check_pv(f1.line, f1.start, f2.start)?;
                check_pv(f1.line, f1.end(), f2.end())?;
                if !sloped {
                    let (a, b) = pv_to_ab(f1.start, f2.start)?;
                    breaks.push(lo);
                    a_coefs.push(LinearCoef::constant(a));
                    b_coefs.push(LinearCoef::constant(b));
                } else {
                    let h = hi.expect("sloped segments are bounded");
                    let w = (h - lo) / PV_SUBDIVISIONS as f64;
                    let at = |k: usize| {
                        let s = k as f64 / PV_SUBDIVISIONS as f64;
                        let p = f1.start + (f1.end() - f1.start) * s;
                        let v = f2.start + (f2.end() - f2.start) * s;
                        pv_to_ab(p, v)
                    };
                    for k in 0..PV_SUBDIVISIONS {
                        let (a0, b0) = at(k)?;
                        let (a1, b1) = at(k + 1)?;
                        breaks.push(lo + w * k as f64);
                        a_coefs.push(LinearCoef { value: a0, slope: (a1 - a0) / w });
                        b_coefs.push(LinearCoef { value: b0, slope: (b1 - b0) / w });
                    }
                }
            }
        }
        if let Some(h) = hi {
            expected_lo = h;
        }
    }
    PiecewiseData::new(breaks, a_coefs, b_coefs)
}

fn preset_data(preset: Preset) -> Result<PiecewiseData> {
    match preset {
        Preset::Example1 => PiecewiseData::constant(3.0, 0.0),
        Preset::Example2 => PiecewiseData::constant(7.0, 32f64.sqrt()),
        Preset::Example3 => PiecewiseData::constant(7.0, -(32f64.sqrt())),
        // pressure 1 inside the unit sphere, 0.1 outside, fluid at rest
        Preset::Example4 => {
            PiecewiseData::piecewise_constant(&[1.0], &[3.0, 3.0 * 0.1], &[0.0, 0.0])
        }
        Preset::Custom => unreachable!("custom data comes from segments"),
    }
}

/// Parse a configuration file. Unknown keys, malformed numbers and
/// invariant violations are reported with their line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut preset: Option<(Preset, usize)> = None;
    let mut t_star: Option<f64> = None;
    let mut x_star: Option<f64> = None;
    let mut n: Option<(usize, usize)> = None;
    let mut snapshot_times: Option<(Vec<f64>, usize)> = None;
    let mut variables = Variables::PV;
    let mut emit = (true, false, true);
    let mut segments: Vec<SegmentBlock> = Vec::new();
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw_line.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        if stripped == "[segment]" {
            segments.push(SegmentBlock { header_line: line, ..Default::default() });
            continue;
        }
        if stripped.starts_with('[') {
            return Err(fail(line, format!("unknown section `{stripped}`")));
        }
        let (key, value) = stripped
            .split_once('=')
            .ok_or_else(|| fail(line, format!("expected `key = value`, got `{stripped}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(fail(line, format!("{key}: missing value")));
        }

        if let Some(seg) = segments.last_mut() {
            match key {
                "range" => {
                    if seg.range.is_some() {
                        return Err(fail(line, "duplicate `range` in segment"));
                    }
                    let mut it = value.split_whitespace();
                    let lo_raw = it.next().expect("value is nonempty");
                    let hi_raw = it
                        .next()
                        .ok_or_else(|| fail(line, "range needs two entries: `lo hi` or `lo inf`"))?;
                    if it.next().is_some() {
                        return Err(fail(line, "range takes exactly two entries"));
                    }
                    let lo = parse_f64(line, "range", lo_raw)?;
                    let hi = if hi_raw == "inf" {
                        None
                    } else {
                        Some(parse_f64(line, "range", hi_raw)?)
                    };
                    seg.range = Some((lo, hi, line));
                }
                "a" | "b" | "p" | "v" => {
                    if seg.field(key).is_some() {
                        return Err(fail(line, format!("duplicate `{key}` in segment")));
                    }
                    seg.fields.push((key.to_string(), Ramp::parse(line, key, value)?));
                }
                _ => return Err(fail(line, format!("unknown segment key `{key}`"))),
            }
            continue;
        }

        if seen.iter().any(|k| k == key) {
            return Err(fail(line, format!("duplicate key `{key}`")));
        }
        seen.push(key.to_string());
        match key {
            "preset" => {
                let p = match value {
                    "example1" => Preset::Example1,
                    "example2" => Preset::Example2,
                    "example3" => Preset::Example3,
                    "example4" => Preset::Example4,
                    "custom" => Preset::Custom,
                    _ => {
                        return Err(fail(
                            line,
                            format!("unknown preset `{value}` (example1..example4 or custom)"),
                        ))
                    }
                };
                preset = Some((p, line));
            }
            "t_star" => t_star = Some(parse_f64(line, key, value)?),
            "x_star" => x_star = Some(parse_f64(line, key, value)?),
            "n" => {
                let v: usize = value
                    .parse()
                    .map_err(|_| fail(line, format!("n: `{value}` is not a positive integer")))?;
                n = Some((v, line));
            }
            "snapshot_times" => {
                let mut times = Vec::new();
                let toks = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty());
                for tok in toks {
                    times.push(parse_f64(line, key, tok)?);
                }
                snapshot_times = Some((times, line));
            }
            "variables" => {
                variables = match value {
                    "ab" => Variables::AB,
                    "pv" => Variables::PV,
                    _ => return Err(fail(line, format!("variables must be ab or pv, got `{value}`"))),
                };
            }
            "emit_snapshots" => emit.0 = parse_bool(line, key, value)?,
            "emit_spacetime" => emit.1 = parse_bool(line, key, value)?,
            "emit_diagnostics" => emit.2 = parse_bool(line, key, value)?,
            _ => return Err(fail(line, format!("unknown key `{key}`"))),
        }
    }

    let missing_data = preset.is_none() && segments.is_empty();
    if t_star.is_none() || x_star.is_none() || missing_data {
        return Err(UrelError::Config(
            "required keys: t_star, x_star, and initial data (a preset or [segment] blocks)".into(),
        ));
    }
    let t_star = t_star.expect("checked above");
    let x_star = x_star.expect("checked above");
    if !(t_star > 0.0) {
        return Err(UrelError::Config(format!("t_star must be positive, got {t_star}")));
    }
    if !(x_star > 0.0) {
        return Err(UrelError::Config(format!("x_star must be positive, got {x_star}")));
    }

    let preset = match (preset, segments.is_empty()) {
        (Some((Preset::Custom, line)), true) => {
            return Err(fail(line, "preset = custom needs [segment] blocks"))
        }
        (Some((p, line)), false) => {
            if p != Preset::Custom {
                return Err(fail(line, "a preset and [segment] blocks are mutually exclusive"));
            }
            Preset::Custom
        }
        (Some((p, _)), true) => p,
        (None, _) => Preset::Custom,
    };
    let data = if preset == Preset::Custom {
        build_data(variables, &segments)?
    } else {
        preset_data(preset)?
    };

    let (n, n_line) = n.unwrap_or((750, 0));
    if n == 0 {
        return Err(fail(n_line, "n must be at least 1"));
    }
    GridSpec::new(t_star, x_star, n).map_err(|e| {
        UrelError::Config(format!("t_star = {t_star}, x_star = {x_star}, n = {n}: {e}"))
    })?;

    let snapshot_times = match snapshot_times {
        None => vec![t_star],
        Some((times, line)) => {
            if times.is_empty() {
                return Err(fail(line, "snapshot_times needs at least one entry"));
            }
            for &t in &times {
                if !(0.0..=t_star).contains(&t) {
                    return Err(fail(
                        line,
                        format!("snapshot time {t} is outside [0, {t_star}]"),
                    ));
                }
            }
            times
        }
    };

    Ok(RunConfig {
        preset,
        t_star,
        x_star,
        n,
        snapshot_times,
        emit_snapshots: emit.0,
        emit_spacetime: emit.1,
        emit_diagnostics: emit.2,
        data,
    })
}
