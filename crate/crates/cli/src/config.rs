//! `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, keys are dotted
//! (`solve.h`, `surface.kind`). Lists are comma separated. Every key is
//! optional; unknown keys are rejected.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Verify,
    Curvature,
    Trajectory,
    Solve,
    Probe,
    Counterexample,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Self::Verify,
        Self::Curvature,
        Self::Trajectory,
        Self::Solve,
        Self::Probe,
        Self::Counterexample,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Verify => "verify",
            Self::Curvature => "curvature",
            Self::Trajectory => "trajectory",
            Self::Solve => "solve",
            Self::Probe => "probe",
            Self::Counterexample => "counterexample",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown subcommand '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceSpec {
    Sphere { n: usize, radius: f64 },
    Cylinder1 { radius: f64 },
    Cylinder2 { radius: f64 },
    Ellipsoid { axes: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainConfig {
    Box { lower: [f64; 3], upper: [f64; 3] },
    Ball { center: [f64; 3], radius: f64 },
    Ellipsoid { center: [f64; 3], axes: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryConfig {
    /// `value + slope · x`.
    Affine { value: f64, slope: [f64; 3] },
    /// `-√(R² - |x - center|²)`.
    Hemisphere { center: [f64; 3], radius: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureConfig {
    Constant { value: f64 },
    /// `offset + slope · r`.
    AffineInR { offset: f64, slope: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub h: f64,
    pub eps_schedule: Vec<f64>,
    pub damping: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub linear_tol: f64,
    pub blowup_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Option<Subcommand>,
    pub surface: SurfaceSpec,
    pub curvature_samples: usize,
    pub seed: u64,
    pub trajectory_t_end: f64,
    pub trajectory_dt: f64,
    pub trajectory_start: Option<Vec<f64>>,
    pub domain: DomainConfig,
    pub boundary: BoundaryConfig,
    pub k: CurvatureConfig,
    pub solve: SolveConfig,
    pub critical_tol: f64,
    pub level_tol: f64,
    pub verify_samples: usize,
    pub counterexample_radius: f64,
    pub counterexample_h: f64,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            subcommand: None,
            surface: SurfaceSpec::Sphere { n: 1, radius: 1.0 },
            curvature_samples: 100,
            seed: 0,
            trajectory_t_end: std::f64::consts::TAU,
            trajectory_dt: 1e-3,
            trajectory_start: None,
            domain: DomainConfig::Ball {
                center: [0.0; 3],
                radius: 1.0,
            },
            boundary: BoundaryConfig::Hemisphere {
                center: [0.0; 3],
                radius: 2.0,
            },
            k: CurvatureConfig::Constant { value: 0.5 },
            solve: SolveConfig {
                h: 0.0625,
                eps_schedule: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4],
                damping: 0.7,
                max_iters: 200,
                tol: 1e-9,
                linear_tol: 1e-10,
                blowup_threshold: None,
            },
            critical_tol: 1e-10,
            level_tol: 1e-8,
            verify_samples: 100,
            counterexample_radius: 1.0,
            counterexample_h: 0.0625,
            output_dir: ".".into(),
        }
    }
}

/// Raw assignments with their line numbers, in file order.
struct Entries(Vec<(String, String, usize)>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        let pos = self.0.iter().position(|(k, _, _)| k == key)?;
        let (_, v, line) = self.0.remove(pos);
        Some((v, line))
    }

    fn scalar<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, _)) => v
                .parse()
                .map(Some)
                .map_err(|_| invalid(key, format!("cannot parse '{v}'"))),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((v, _)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(key, format!("cannot parse '{}'", s.trim()))))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    fn triple(&mut self, key: &str) -> Result<Option<[f64; 3]>, ConfigError> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) => <[f64; 3]>::try_from(v.as_slice())
                .map(Some)
                .map_err(|_| invalid(key, format!("expected 3 values, got {}", v.len()))),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, v: &[f64]) -> Result<(), ConfigError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(key, "values must be finite"))
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut entries: Vec<(String, String, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected 'key = value', got '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let key_ok = !key.is_empty()
            && key
                .split('.')
                .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
        if !key_ok {
            return Err(ConfigError::Parse {
                line,
                message: format!("malformed key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("missing value for '{key}'"),
            });
        }
        if let Some((_, _, first)) = entries.iter().find(|(k, _, _)| k == key) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key '{key}' (first set on line {first})"),
            });
        }
        entries.push((key.to_string(), value.to_string(), line));
    }
    Ok(Entries(entries))
}

/// Parses and validates a configuration, filling in defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut e = tokenize(text)?;
    let d = RunConfig::default();

    let subcommand = match e.take("run.subcommand") {
        None => None,
        Some((v, _)) => Some(v.parse().map_err(|m: String| invalid("run.subcommand", m))?),
    };

    let surface_kind: String = e.scalar("surface.kind")?.unwrap_or_else(|| "sphere".into());
    let surface_radius = e.scalar("surface.R")?.map(|r| positive("surface.R", r)).transpose()?;
    let surface_n: Option<usize> = e.scalar("surface.n")?;
    let surface_axes = e.list("surface.axes")?;
    let reject = |key: &str, present: bool, kind: &str| {
        if present {
            Err(invalid(key, format!("not used by surface.kind = {kind}")))
        } else {
            Ok(())
        }
    };
    let surface = match surface_kind.as_str() {
        "sphere" => {
            reject("surface.axes", surface_axes.is_some(), "sphere")?;
            let n = surface_n.unwrap_or(1);
            if n == 0 {
                return Err(invalid("surface.n", "must be at least 1"));
            }
            SurfaceSpec::Sphere {
                n,
                radius: surface_radius.unwrap_or(1.0),
            }
        }
        "cylinder1" | "cylinder2" => {
            reject("surface.axes", surface_axes.is_some(), &surface_kind)?;
            if surface_n.is_some_and(|n| n != 1) {
                return Err(invalid("surface.n", "cylinders live in C², n must be 1"));
            }
            let radius = surface_radius.unwrap_or(1.0);
            if surface_kind == "cylinder1" {
                SurfaceSpec::Cylinder1 { radius }
            } else {
                SurfaceSpec::Cylinder2 { radius }
            }
        }
        "ellipsoid" => {
            reject("surface.R", surface_radius.is_some(), "ellipsoid")?;
            let axes = surface_axes.unwrap_or_else(|| vec![1.0, 2.0, 1.5, 0.5]);
            if axes.len() < 4 || axes.len() % 2 != 0 {
                return Err(invalid("surface.axes", "need an even number >= 4 of semi-axes"));
            }
            for a in &axes {
                positive("surface.axes", *a)?;
            }
            if surface_n.is_some_and(|n| 2 * n + 2 != axes.len()) {
                return Err(invalid("surface.n", "does not match the number of semi-axes"));
            }
            SurfaceSpec::Ellipsoid { axes }
        }
        other => return Err(invalid("surface.kind", format!("unknown surface '{other}'"))),
    };
    let n = match &surface {
        SurfaceSpec::Sphere { n, .. } => *n,
        SurfaceSpec::Ellipsoid { axes } => axes.len() / 2 - 1,
        _ => 1,
    };

    let curvature_samples = e.scalar("curvature.samples")?.unwrap_or(d.curvature_samples);
    let seed = e.scalar("run.seed")?.unwrap_or(d.seed);

    let trajectory_t_end = positive("trajectory.t_end", e.scalar("trajectory.t_end")?.unwrap_or(d.trajectory_t_end))?;
    let trajectory_dt = positive("trajectory.dt", e.scalar("trajectory.dt")?.unwrap_or(d.trajectory_dt))?;
    let trajectory_start = e.list("trajectory.start")?;
    if let Some(start) = &trajectory_start {
        finite("trajectory.start", start)?;
        if start.len() != 2 * n + 2 {
            return Err(invalid(
                "trajectory.start",
                format!("expected {} coordinates, got {}", 2 * n + 2, start.len()),
            ));
        }
    }

    let domain_kind: String = e.scalar("domain.kind")?.unwrap_or_else(|| "ball".into());
    let lower = e.triple("domain.lower")?;
    let upper = e.triple("domain.upper")?;
    let center = e.triple("domain.center")?;
    let radius = e.scalar::<f64>("domain.R")?;
    let axes = e.triple("domain.axes")?;
    let unused = |key: &str, present: bool| {
        if present {
            Err(invalid(key, format!("not used by domain.kind = {domain_kind}")))
        } else {
            Ok(())
        }
    };
    let domain = match domain_kind.as_str() {
        "box" => {
            unused("domain.center", center.is_some())?;
            unused("domain.R", radius.is_some())?;
            unused("domain.axes", axes.is_some())?;
            let lower = lower.unwrap_or([0.0; 3]);
            let upper = upper.unwrap_or([1.0; 3]);
            finite("domain.lower", &lower)?;
            finite("domain.upper", &upper)?;
            if (0..3).any(|a| lower[a] >= upper[a]) {
                return Err(invalid("domain.upper", "must exceed domain.lower in every coordinate"));
            }
            DomainConfig::Box { lower, upper }
        }
        "ball" => {
            unused("domain.lower", lower.is_some())?;
            unused("domain.upper", upper.is_some())?;
            unused("domain.axes", axes.is_some())?;
            let center = center.unwrap_or([0.0; 3]);
            finite("domain.center", &center)?;
            DomainConfig::Ball {
                center,
                radius: positive("domain.R", radius.unwrap_or(1.0))?,
            }
        }
        "ellipsoid" => {
            unused("domain.lower", lower.is_some())?;
            unused("domain.upper", upper.is_some())?;
            unused("domain.R", radius.is_some())?;
            let center = center.unwrap_or([0.0; 3]);
            finite("domain.center", &center)?;
            let axes = axes.unwrap_or([1.0; 3]);
            for a in axes {
                positive("domain.axes", a)?;
            }
            DomainConfig::Ellipsoid { center, axes }
        }
        other => return Err(invalid("domain.kind", format!("unknown domain '{other}'"))),
    };

    let boundary_kind: String = e.scalar("boundary.kind")?.unwrap_or_else(|| "hemisphere".into());
    let b_value = e.scalar::<f64>("boundary.value")?;
    let b_slope = e.triple("boundary.slope")?;
    let b_center = e.triple("boundary.center")?;
    let b_radius = e.scalar::<f64>("boundary.R")?;
    let unused = |key: &str, present: bool| {
        if present {
            Err(invalid(key, format!("not used by boundary.kind = {boundary_kind}")))
        } else {
            Ok(())
        }
    };
    let boundary = match boundary_kind.as_str() {
        "affine" => {
            unused("boundary.center", b_center.is_some())?;
            unused("boundary.R", b_radius.is_some())?;
            let value = b_value.unwrap_or(0.0);
            let slope = b_slope.unwrap_or([0.0; 3]);
            finite("boundary.value", &[value])?;
            finite("boundary.slope", &slope)?;
            BoundaryConfig::Affine { value, slope }
        }
        "constant" => {
            unused("boundary.slope", b_slope.is_some())?;
            unused("boundary.center", b_center.is_some())?;
            unused("boundary.R", b_radius.is_some())?;
            let value = b_value.unwrap_or(0.0);
            finite("boundary.value", &[value])?;
            BoundaryConfig::Constant { value }
        }
        "hemisphere" => {
            unused("boundary.value", b_value.is_some())?;
            unused("boundary.slope", b_slope.is_some())?;
            let center = b_center.unwrap_or([0.0; 3]);
            finite("boundary.center", &center)?;
            BoundaryConfig::Hemisphere {
                center,
                radius: positive("boundary.R", b_radius.unwrap_or(2.0))?,
            }
        }
        other => return Err(invalid("boundary.kind", format!("unknown boundary data '{other}'"))),
    };

    let k_kind: String = e.scalar("k.kind")?.unwrap_or_else(|| "constant".into());
    let k_value = e.scalar::<f64>("k.value")?;
    let k_offset = e.scalar::<f64>("k.offset")?;
    let k_slope = e.scalar::<f64>("k.slope")?;
    let k = match k_kind.as_str() {
        "constant" => {
            if k_offset.is_some() || k_slope.is_some() {
                return Err(invalid("k.kind", "k.offset and k.slope need k.kind = affine_in_r"));
            }
            let value = k_value.unwrap_or(0.5);
            finite("k.value", &[value])?;
            CurvatureConfig::Constant { value }
        }
        "affine_in_r" => {
            if k_value.is_some() {
                return Err(invalid("k.value", "not used by k.kind = affine_in_r"));
            }
            let (offset, slope) = (k_offset.unwrap_or(0.0), k_slope.unwrap_or(0.0));
            finite("k.offset", &[offset])?;
            finite("k.slope", &[slope])?;
            CurvatureConfig::AffineInR { offset, slope }
        }
        other => return Err(invalid("k.kind", format!("unknown curvature '{other}'"))),
    };

    let ds = &d.solve;
    let h = positive("solve.h", e.scalar("solve.h")?.unwrap_or(ds.h))?;
    let eps_schedule = e.list("solve.eps_schedule")?.unwrap_or_else(|| ds.eps_schedule.clone());
    if eps_schedule.is_empty() || !eps_schedule.iter().all(|v| *v > 0.0 && v.is_finite()) {
        return Err(invalid("solve.eps_schedule", "values must be positive and finite"));
    }
    if !eps_schedule.windows(2).all(|w| w[1] < w[0]) {
        return Err(invalid("solve.eps_schedule", "must be strictly decreasing"));
    }
    let damping = e.scalar::<f64>("solve.damping")?.unwrap_or(ds.damping);
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(invalid("solve.damping", format!("must lie in (0, 1], got {damping}")));
    }
    let max_iters: usize = e.scalar("solve.max_iters")?.unwrap_or(ds.max_iters);
    if max_iters == 0 {
        return Err(invalid("solve.max_iters", "must be positive"));
    }
    let tol = positive("solve.tol", e.scalar("solve.tol")?.unwrap_or(ds.tol))?;
    let linear_tol = positive("solve.linear_tol", e.scalar("solve.linear_tol")?.unwrap_or(ds.linear_tol))?;
    let blowup_threshold = e
        .scalar("solve.blowup_threshold")?
        .map(|v| positive("solve.blowup_threshold", v))
        .transpose()?;

    let critical_tol = positive("tol.critical", e.scalar("tol.critical")?.unwrap_or(d.critical_tol))?;
    let level_tol = positive("tol.level", e.scalar("tol.level")?.unwrap_or(d.level_tol))?;
    let verify_samples: usize = e.scalar("verify.samples")?.unwrap_or(d.verify_samples);
    if verify_samples == 0 {
        return Err(invalid("verify.samples", "must be positive"));
    }
    if curvature_samples == 0 {
        return Err(invalid("curvature.samples", "must be positive"));
    }
    let counterexample_radius = positive("counterexample.R", e.scalar("counterexample.R")?.unwrap_or(d.counterexample_radius))?;
    let counterexample_h = positive("counterexample.h", e.scalar("counterexample.h")?.unwrap_or(d.counterexample_h))?;
    if counterexample_h >= counterexample_radius {
        return Err(invalid("counterexample.h", "must be smaller than counterexample.R"));
    }
    let output_dir = e.scalar("output.dir")?.unwrap_or(d.output_dir);

    if let Some((key, _, line)) = e.0.first() {
        return Err(ConfigError::Parse {
            line: *line,
            message: format!("unknown key '{key}'"),
        });
    }

    Ok(RunConfig {
        subcommand,
        surface,
        curvature_samples,
        seed,
        trajectory_t_end,
        trajectory_dt,
        trajectory_start,
        domain,
        boundary,
        k,
        solve: SolveConfig {
            h,
            eps_schedule,
            damping,
            max_iters,
            tol,
            linear_tol,
            blowup_threshold,
        },
        critical_tol,
        level_tol,
        verify_samples,
        counterexample_radius,
        counterexample_h,
        output_dir,
    })
}

struct List<'a>(&'a [f64]);

impl fmt::Display for List<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            // `{:?}` is the shortest representation that parses back exactly.
            write!(f, "{v:?}")?;
        }
        Ok(())
    }
}

/// Writes every setting explicitly; `parse_config(&emit_config(c)) == c`.
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut put = |key: &str, value: String| {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    };
    if let Some(s) = cfg.subcommand {
        put("run.subcommand", s.as_str().into());
    }
    put("run.seed", cfg.seed.to_string());
    match &cfg.surface {
        SurfaceSpec::Sphere { n, radius } => {
            put("surface.kind", "sphere".into());
            put("surface.n", n.to_string());
            put("surface.R", format!("{radius:?}"));
        }
        SurfaceSpec::Cylinder1 { radius } => {
            put("surface.kind", "cylinder1".into());
            put("surface.R", format!("{radius:?}"));
        }
        SurfaceSpec::Cylinder2 { radius } => {
            put("surface.kind", "cylinder2".into());
            put("surface.R", format!("{radius:?}"));
        }
        SurfaceSpec::Ellipsoid { axes } => {
            put("surface.kind", "ellipsoid".into());
            put("surface.axes", List(axes).to_string());
        }
    }
    put("curvature.samples", cfg.curvature_samples.to_string());
    put("trajectory.t_end", format!("{:?}", cfg.trajectory_t_end));
    put("trajectory.dt", format!("{:?}", cfg.trajectory_dt));
    if let Some(start) = &cfg.trajectory_start {
        put("trajectory.start", List(start).to_string());
    }
    match &cfg.domain {
        DomainConfig::Box { lower, upper } => {
            put("domain.kind", "box".into());
            put("domain.lower", List(lower).to_string());
            put("domain.upper", List(upper).to_string());
        }
        DomainConfig::Ball { center, radius } => {
            put("domain.kind", "ball".into());
            put("domain.center", List(center).to_string());
            put("domain.R", format!("{radius:?}"));
        }
        DomainConfig::Ellipsoid { center, axes } => {
            put("domain.kind", "ellipsoid".into());
            put("domain.center", List(center).to_string());
            put("domain.axes", List(axes).to_string());
        }
    }
    match &cfg.boundary {
        BoundaryConfig::Affine { value, slope } => {
            put("boundary.kind", "affine".into());
            put("boundary.value", format!("{value:?}"));
            put("boundary.slope", List(slope).to_string());
        }
        BoundaryConfig::Hemisphere { center, radius } => {
            put("boundary.kind", "hemisphere".into());
            put("boundary.center", List(center).to_string());
            put("boundary.R", format!("{radius:?}"));
        }
        BoundaryConfig::Constant { value } => {
            put("boundary.kind", "constant".into());
            put("boundary.value", format!("{value:?}"));
        }
    }
    match &cfg.k {
        CurvatureConfig::Constant { value } => {
            put("k.kind", "constant".into());
            put("k.value", format!("{value:?}"));
        }
        CurvatureConfig::AffineInR { offset, slope } => {
            put("k.kind", "affine_in_r".into());
            put("k.offset", format!("{offset:?}"));
            put("k.slope", format!("{slope:?}"));
        }
    }
    let s = &cfg.solve;
    put("solve.h", format!("{:?}", s.h));
    put("solve.eps_schedule", List(&s.eps_schedule).to_string());
    put("solve.damping", format!("{:?}", s.damping));
    put("solve.max_iters", s.max_iters.to_string());
    put("solve.tol", format!("{:?}", s.tol));
    put("solve.linear_tol", format!("{:?}", s.linear_tol));
    if let Some(t) = s.blowup_threshold {
        put("solve.blowup_threshold", format!("{t:?}"));
    }
    put("tol.critical", format!("{:?}", cfg.critical_tol));
    put("tol.level", format!("{:?}", cfg.level_tol));
    put("verify.samples", cfg.verify_samples.to_string());
    put("counterexample.R", format!("{:?}", cfg.counterexample_radius));
    put("counterexample.h", format!("{:?}", cfg.counterexample_h));
    put("output.dir", cfg.output_dir.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_with_radius() {
        let cfg = parse_config("surface.kind = sphere\nsurface.R = 2").unwrap();
        assert_eq!(cfg.surface, SurfaceSpec::Sphere { n: 1, radius: 2.0 });
    }

    #[test]
    fn zero_spacing_names_the_key() {
        let err = parse_config("solve.h = 0").unwrap_err();
        assert!(matches!(&err, ConfigError::Invalid { key, .. } if key == "solve.h"), "{err}");
    }

    #[test]
    fn default_schedule() {
        let cfg = parse_config("# nothing but a comment\n\n").unwrap();
        assert_eq!(cfg.solve.eps_schedule, vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4]);
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "surface.kind = sphere\n\nnot an assignment\n";
        assert_eq!(parse_config(text).unwrap_err(), ConfigError::Parse {
            line: 3,
            message: "expected 'key = value', got 'not an assignment'".into()
        });
        let err = parse_config("solve.h = 0.1\nsolve.typo = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = parse_config("solve.h = 0.1\nsolve.h = 0.2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn inline_comments_and_lists() {
        let cfg = parse_config("solve.eps_schedule = 0.5, 0.05 # short\ndomain.kind = box\ndomain.upper = 2,2,2").unwrap();
        assert_eq!(cfg.solve.eps_schedule, vec![0.5, 0.05]);
        assert_eq!(cfg.domain, DomainConfig::Box {
            lower: [0.0; 3],
            upper: [2.0; 3]
        });
    }

    #[test]
    fn validation_errors() {
        for (text, key) in [
            ("solve.eps_schedule = 0.1, 1", "solve.eps_schedule"),
            ("solve.damping = 0", "solve.damping"),
            ("surface.kind = torus", "surface.kind"),
            ("surface.kind = ellipsoid\nsurface.axes = 1, 2, 3", "surface.axes"),
            ("domain.kind = box\ndomain.R = 1", "domain.R"),
            ("domain.kind = box\ndomain.lower = 0,0,2", "domain.upper"),
            ("k.value = nan", "k.value"),
            ("trajectory.start = 1, 0, 0", "trajectory.start"),
            ("run.subcommand = plot", "run.subcommand"),
            ("domain.R = 1, 2", "domain.R"),
        ] {
            match parse_config(text) {
                Err(ConfigError::Invalid { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn emitted_default_parses_back() {
        let cfg = RunConfig::default();
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    }
}
