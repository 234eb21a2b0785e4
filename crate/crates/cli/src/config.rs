//! Run configuration: JSON schema, loading and validation.

use std::fs;
use std::path::{Path, PathBuf};

use nls_ist_core::closed_form::ExampleParams;
use nls_ist_core::evolution::{CaseATerm, CaseBTerm, SourceSpec, TimeFunction};
use nls_ist_core::glm::{ADotVariable, F1Phase};
use nls_ist_core::pipeline::PipelineConfig;
use nls_ist_core::{BoundaryData, PotentialField, UniformGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Validation { field: field.into(), message: message.into() }
    }
}

/// `{"const": [re, im]}` or `{"table": [[t, re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TimeSpec {
    Const([f64; 2]),
    Table(Vec<[f64; 3]>),
}

impl TimeSpec {
    fn is_real(&self) -> bool {
        match self {
            TimeSpec::Const(v) => v[1] == 0.0,
            TimeSpec::Table(rows) => rows.iter().all(|r| r[2] == 0.0),
        }
    }

    fn build(&self, field: &str) -> Result<TimeFunction, ConfigError> {
        match self {
            TimeSpec::Const([re, im]) => Ok(TimeFunction::constant(*re, *im)),
            TimeSpec::Table(rows) => {
                let samples = rows.iter().map(|r| (r[0], Complex64::new(r[1], r[2]))).collect();
                TimeFunction::table(samples).map_err(|e| ConfigError::invalid(field, e.to_string()))
            }
        }
    }

    fn covers(&self, t: f64) -> bool {
        match self {
            TimeSpec::Const(_) => true,
            TimeSpec::Table(rows) => rows.iter().any(|r| r[0] <= t) && rows.iter().any(|r| r[0] >= t),
        }
    }
}

fn one() -> TimeSpec {
    TimeSpec::Const([1.0, 0.0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub rho: f64,
    #[serde(default)]
    pub alpha_minus: f64,
    /// Derived from the soliton for example potentials when omitted.
    #[serde(default)]
    pub alpha_plus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleSpec {
    pub nu: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Example(ExampleSpec),
    /// Whitespace or comma separated `x re im` rows on a uniform grid.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermA {
    pub normalization: TimeSpec,
    #[serde(default = "one")]
    pub gauge: TimeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermB {
    pub constraint: TimeSpec,
    pub beta: TimeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", content = "terms", deny_unknown_fields)]
pub enum SourcesSpec {
    A(Vec<TermA>),
    B(Vec<TermB>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Potential window `[-X, X]` and its intervals (ignored for file potentials).
    pub half_width: f64,
    pub intervals: usize,
    /// Continuous-spectrum cut in units of rho, and the node count on `[-Z, Z]`.
    pub z_max: f64,
    pub z_nodes: usize,
    pub glm_step: f64,
    pub glm_tail: Option<f64>,
    pub recon_half_width: f64,
    pub recon_intervals: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            half_width: 20.0,
            intervals: 4000,
            z_max: p.z_max,
            z_nodes: p.z_nodes,
            glm_step: 0.02,
            glm_tail: None,
            recon_half_width: p.recon_half_width,
            recon_intervals: p.recon_intervals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub glm_cutoff: f64,
    pub glm_residual: f64,
    pub max_condition: f64,
    pub boundary: f64,
    pub newton: f64,
    pub root_abs: f64,
    /// Field error against the closed form accepted by `verify`.
    pub roundtrip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            glm_cutoff: p.glm.cutoff,
            glm_residual: p.glm.residual_tol,
            max_condition: p.glm.max_condition,
            boundary: p.glm.boundary_tol,
            newton: p.zs.newton_tol,
            root_abs: p.zs.root_abs_tol,
            roundtrip: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub extrapolate: bool,
    pub f1_phase: F1Phase,
    pub glm_a_dot: ADotVariable,
    pub source_a_dot: ADotVariable,
}

impl Default for Options {
    fn default() -> Self {
        Self { extrapolate: true, f1_phase: F1Phase::default(), glm_a_dot: ADotVariable::Z, source_a_dot: ADotVariable::Xi }
    }
}

/// The file as written, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub sources: SourcesSpec,
    pub times: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum Potential {
    Example(ExampleParams),
    Samples(UniformGrid, Vec<Complex64>),
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub boundary: BoundaryData,
    pub potential: Potential,
    pub sources: SourceSpec,
    pub pipeline: PipelineConfig,
    pub times: Vec<f64>,
    /// SHA-256 of the canonical JSON form.
    pub hash: String,
}

impl RunConfig {
    pub fn output_dir(&self) -> PathBuf {
        self.raw.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn example(&self) -> Option<&ExampleParams> {
        match &self.potential {
            Potential::Example(p) => Some(p),
            Potential::Samples(..) => None,
        }
    }

    /// Initial potential; example grids are refined `refine` times.
    pub fn initial_field(&self, refine: usize) -> nls_ist_core::Result<PotentialField> {
        match &self.potential {
            Potential::Example(p) => {
                let g = &self.raw.grid;
                let grid = UniformGrid::symmetric(g.half_width, g.intervals * refine.max(1))?;
                PotentialField::from_fn(grid, self.boundary, 0.0, |x| nls_ist_core::closed_form::example_initial(p, x))
            }
            Potential::Samples(grid, u) => PotentialField::from_samples_with_tol(
                *grid,
                u.clone(),
                self.boundary,
                0.0,
                self.raw.tolerances.boundary * self.boundary.rho(),
            ),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    let raw: RawConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    validate(raw, base)
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("{field} must be positive")))
    }
}

/// Checks every field and builds the core objects. Relative file paths are
/// resolved against `base`.
pub fn validate(raw: RawConfig, base: &Path) -> Result<RunConfig, ConfigError> {
    let b = &raw.boundary;
    positive("rho", b.rho)?;
    let g = &raw.grid;
    positive("grid.half_width", g.half_width)?;
    positive("grid.z_max", g.z_max)?;
    positive("grid.glm_step", g.glm_step)?;
    positive("grid.recon_half_width", g.recon_half_width)?;
    if g.intervals < 4 || g.recon_intervals < 1 {
        return Err(ConfigError::invalid("grid.intervals", "too few intervals"));
    }
    if g.z_nodes < 8 || !g.z_nodes.is_multiple_of(4) {
        return Err(ConfigError::invalid("grid.z_nodes", "z_nodes must be a multiple of 4, at least 8"));
    }
    if let Some(y) = g.glm_tail {
        positive("grid.glm_tail", y)?;
    }
    let tol = &raw.tolerances;
    for (name, v) in [
        ("tolerances.glm_cutoff", tol.glm_cutoff),
        ("tolerances.glm_residual", tol.glm_residual),
        ("tolerances.max_condition", tol.max_condition),
        ("tolerances.boundary", tol.boundary),
        ("tolerances.newton", tol.newton),
        ("tolerances.root_abs", tol.root_abs),
        ("tolerances.roundtrip", tol.roundtrip),
    ] {
        positive(name, v)?;
    }
    if raw.times.is_empty() {
        return Err(ConfigError::invalid("times", "at least one output time is required"));
    }
    if raw.times.iter().any(|t| !t.is_finite()) {
        return Err(ConfigError::invalid("times", "times must be finite"));
    }

    let (potential, boundary) = match &raw.potential {
        PotentialSpec::Example(e) => {
            let params = ExampleParams::new(b.rho, e.nu, e.c, b.alpha_minus)
                .map_err(|err| ConfigError::invalid("potential.example", err.to_string()))?;
            if let Some(ap) = b.alpha_plus {
                let d = (ap - params.alpha_plus).rem_euclid(std::f64::consts::TAU);
                if d.min(std::f64::consts::TAU - d) > 1e-9 {
                    return Err(ConfigError::invalid(
                        "boundary.alpha_plus",
                        format!("the soliton requires alpha_plus = {} (mod 2 pi)", params.alpha_plus),
                    ));
                }
            }
            (Potential::Example(params), params.boundary())
        }
        PotentialSpec::File(rel) => {
            let boundary = BoundaryData::new(b.rho, b.alpha_minus, b.alpha_plus.unwrap_or(b.alpha_minus))
                .map_err(|e| ConfigError::invalid("boundary", e.to_string()))?;
            let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
            let (grid, u) = read_samples(&path)?;
            (Potential::Samples(grid, u), boundary)
        }
    };

    let horizon = raw.times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let sources = match &raw.sources {
        SourcesSpec::A(terms) => {
            let mut out = Vec::with_capacity(terms.len());
            for (n, t) in terms.iter().enumerate() {
                out.push(CaseATerm {
                    normalization: t.normalization.build(&format!("sources.terms[{n}].normalization"))?,
                    gauge: t.gauge.build(&format!("sources.terms[{n}].gauge"))?,
                });
            }
            SourceSpec::A(out)
        }
        SourcesSpec::B(terms) => {
            let mut out = Vec::with_capacity(terms.len());
            for (n, t) in terms.iter().enumerate() {
                let field = format!("sources.terms[{n}].constraint");
                if !t.constraint.is_real() {
                    return Err(ConfigError::invalid(field, "B_n must be real"));
                }
                out.push(CaseBTerm { constraint: t.constraint.build(&field)?, beta: t.beta.build(&format!("sources.terms[{n}].beta"))? });
            }
            SourceSpec::B(out)
        }
    };
    let all_specs: Vec<&TimeSpec> = match &raw.sources {
        SourcesSpec::A(t) => t.iter().flat_map(|t| [&t.normalization, &t.gauge]).collect(),
        SourcesSpec::B(t) => t.iter().flat_map(|t| [&t.constraint, &t.beta]).collect(),
    };
    if all_specs.iter().any(|s| !s.covers(0.0) || !raw.times.iter().all(|&t| s.covers(t))) {
        return Err(ConfigError::invalid("sources", "tabulated time functions must cover 0 and every output time"));
    }
    sources.validate(horizon).map_err(|e| ConfigError::invalid("sources", e.to_string()))?;
    if let Potential::Example(_) = potential {
        if sources.len() != 1 {
            return Err(ConfigError::invalid("sources.terms", "the example potential has exactly one eigenvalue"));
        }
    }

    let mut pipeline = PipelineConfig {
        z_max: g.z_max,
        z_nodes: g.z_nodes,
        recon_half_width: g.recon_half_width,
        recon_intervals: g.recon_intervals,
        ..PipelineConfig::default()
    };
    pipeline.glm.step = g.glm_step;
    pipeline.glm.tail_cap = g.glm_tail;
    pipeline.glm.cutoff = tol.glm_cutoff;
    pipeline.glm.residual_tol = tol.glm_residual;
    pipeline.glm.max_condition = tol.max_condition;
    pipeline.glm.boundary_tol = tol.boundary;
    pipeline.glm.extrapolate = raw.options.extrapolate;
    pipeline.glm.f1_phase = raw.options.f1_phase;
    pipeline.glm.a_dot = raw.options.glm_a_dot;
    pipeline.zs.newton_tol = tol.newton;
    pipeline.zs.root_abs_tol = tol.root_abs;
    pipeline.glm.validate().map_err(|e| ConfigError::invalid("grid", e.to_string()))?;
    let step_ratio = 2.0 * g.recon_half_width / g.recon_intervals as f64 * 2.0 / g.glm_step;
    let need = if raw.options.extrapolate { 2.0 } else { 1.0 };
    if ((step_ratio / need) - (step_ratio / need).round()).abs() > 1e-9 || step_ratio < need {
        return Err(ConfigError::invalid(
            "grid.glm_step",
            "twice the reconstruction spacing must be a multiple of glm_step (of 2 glm_step when extrapolating)",
        ));
    }

    let hash = config_hash(&raw);
    let times = raw.times.clone();
    Ok(RunConfig { raw, boundary, potential, sources, pipeline, times, hash })
}

/// Hash of the canonical JSON form, independent of formatting and key order.
pub fn config_hash(raw: &RawConfig) -> String {
    let value = serde_json::to_value(raw).expect("config serializes");
    let canonical = serde_json::to_string(&value).expect("value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn read_samples(path: &Path) -> Result<(UniformGrid, Vec<Complex64>), ConfigError> {
    let field = "potential.file";
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    let mut xs = Vec::new();
    let mut u = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let nums: Result<Vec<f64>, _> = cols.iter().map(|s| s.parse::<f64>()).collect();
        match nums {
            Ok(v) if v.len() >= 3 => {
                xs.push(v[0]);
                u.push(Complex64::new(v[1], v[2]));
            }
            // a header line is allowed before the data
            Err(_) if xs.is_empty() => continue,
            _ => {
                return Err(ConfigError::Parse {
                    path: path.display().to_string(),
                    line: k + 1,
                    column: 1,
                    message: "expected three numbers: x re im".into(),
                })
            }
        }
    }
    if xs.len() < 5 {
        return Err(ConfigError::invalid(field, "need at least 5 samples"));
    }
    let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if xs.windows(2).enumerate().any(|(k, w)| ((w[1] - w[0]) - dx).abs() > 1e-8 * dx.abs().max(1.0) || (xs[k] - (xs[0] + k as f64 * dx)).abs() > 1e-6 * dx) {
        return Err(ConfigError::invalid(field, "samples must lie on a uniform increasing grid"));
    }
    let grid = UniformGrid::new(xs[0], dx, xs.len()).map_err(|e| ConfigError::invalid(field, e.to_string()))?;
    Ok((grid, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> serde_json::Value {
        serde_json::json!({
            "boundary": {"rho": 1.0},
            "potential": {"example": {"nu": 0.6, "c": 1.0}},
            "sources": {"case": "A", "terms": [{"normalization": {"const": [0.0, 0.0]}}]},
            "times": [0.0, 0.5]
        })
    }

    fn parse(v: serde_json::Value) -> Result<RunConfig, ConfigError> {
        validate(serde_json::from_value(v).map_err(|e| ConfigError::invalid("json", e.to_string()))?, Path::new("."))
    }

    #[test]
    fn minimal_example_is_valid() {
        let cfg = parse(minimal()).unwrap();
        assert!(cfg.example().is_some());
        assert_eq!(cfg.sources.len(), 1);
        assert_eq!(cfg.hash.len(), 64);
    }

    #[test]
    fn zero_rho_is_rejected() {
        let mut v = minimal();
        v["boundary"]["rho"] = 0.0.into();
        let err = parse(v).unwrap_err();
        assert_eq!(err.to_string(), "rho: rho must be positive");
    }

    #[test]
    fn complex_constraint_is_rejected() {
        let mut v = minimal();
        v["sources"] = serde_json::json!({"case": "B", "terms": [{"constraint": {"const": [1.0, 0.5]}, "beta": {"const": [0.0, 1.0]}}]});
        let err = parse(v).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref field, .. } if field == "sources.terms[0].constraint"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = minimal();
        v["grid"] = serde_json::json!({"half_widht": 3.0});
        assert!(serde_json::from_value::<RawConfig>(v).is_err());
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = parse(minimal()).unwrap().hash;
        let text = serde_json::to_string_pretty(&minimal()).unwrap();
        let b = parse(serde_json::from_str(&text).unwrap()).unwrap().hash;
        assert_eq!(a, b);
    }

    #[test]
    fn tables_parse() {
        let mut v = minimal();
        v["sources"]["terms"][0]["normalization"] = serde_json::json!({"table": [[0.0, 0.1, 0.0], [1.0, 0.3, 0.0]]});
        assert!(parse(v).is_ok());
    }
}
