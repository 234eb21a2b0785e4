//! The six pipeline commands.

use std::io;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use nls_ist_core::closed_form::{example_u, ExampleCase};
use nls_ist_core::evolution::SourceSpec;
use nls_ist_core::glm::Reconstruction;
use nls_ist_core::source_terms::{build_sources_case_a, build_sources_case_b, constraint_drift, source_rhs, SourcePair};
use nls_ist_core::verify::{invariant_suite, linear_system_residual, roundtrip_check, unitarity_report, ResidualReport};
use nls_ist_core::zakharov_shabat::{eigenmode, ScatteringData};
use nls_ist_core::{PotentialField, UniformGrid};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::output::{discrete_json, field_csv, gnuplot_script, scattering_csv, time_label, Writer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Direct,
    Evolve,
    Inverse,
    Simulate,
    Verify,
    Example,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Direct => "direct",
            Command::Evolve => "evolve",
            Command::Inverse => "inverse",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Example => "example",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(#[from] nls_ist_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("verification failed: {}", failed.join(", "))]
    Verification { failed: Vec<String> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) | CliError::Verification { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Verification { .. } => "verification",
            CliError::Io { .. } => "io",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({"error": self.class(), "exit_code": self.exit_code(), "message": self.to_string()});
        match self {
            CliError::Config(ConfigError::Validation { field, .. }) => v["field"] = json!(field),
            CliError::Config(ConfigError::Parse { line, column, .. }) => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            CliError::Verification { failed } => v["failed"] = json!(failed),
            _ => {}
        }
        v
    }
}

trait IoContext<T> {
    fn at(self, path: &Path) -> Result<T, CliError>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: &Path) -> Result<T, CliError> {
        self.map_err(|source| CliError::Io { path: path.to_path_buf(), source })
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// Multiplies the intervals of an example potential grid.
    pub refine: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out: None, refine: 1 }
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Summary {
    pub files: Vec<PathBuf>,
    pub reports: Vec<ResidualReport>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    opts: &'a RunOptions,
    writer: Writer,
}

impl Ctx<'_> {
    fn initial_field(&self) -> Result<PotentialField, CliError> {
        if self.opts.refine > 1 && self.cfg.example().is_none() {
            return Err(ConfigError::Validation {
                field: "seed-grid-refine".into(),
                message: "refinement needs an example potential".into(),
            }
            .into());
        }
        // a tabulated potential that misses its plane-wave limits is a config problem
        self.cfg.initial_field(self.opts.refine).map_err(|e| match e {
            nls_ist_core::Error::BoundaryMismatch { .. } => {
                CliError::Config(ConfigError::Validation { field: "potential".into(), message: e.to_string() })
            }
            other => other.into(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let dir = self.writer.dir().to_path_buf();
        self.writer.write(name, contents).at(&dir.join(name)).map(|_| ())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), CliError> {
        let dir = self.writer.dir().to_path_buf();
        self.writer.write_json(name, v).at(&dir.join(name)).map(|_| ())
    }

    fn write_table(&mut self, stem: &str, csv: &str) -> Result<(), CliError> {
        let dir = self.writer.dir().to_path_buf();
        self.writer.write_table(stem, csv).at(&dir.join(stem)).map(|_| ())
    }

    fn scattering(&mut self, sd: &ScatteringData, suffix: &str) -> Result<(), CliError> {
        self.write_table(&format!("scattering{suffix}"), &scattering_csv(sd))?;
        self.write_json(&format!("discrete{suffix}.json"), &discrete_json(sd))
    }

    fn fields(&mut self, grid: &UniformGrid, fields: &[(f64, Vec<num_complex::Complex64>)], stem: &str) -> Result<(), CliError> {
        let mut dats = Vec::new();
        for (t, u) in fields {
            let name = format!("{stem}_t{}", time_label(*t));
            self.write_table(&name, &field_csv(grid.points(), u))?;
            dats.push(format!("{name}.dat"));
        }
        self.write(&format!("{stem}.plt"), &gnuplot_script(&format!("{stem}(x, t)"), "|u|", 4, &dats))
    }
}

fn tolerances(cfg: &RunConfig) -> serde_json::Value {
    let g = &cfg.pipeline.glm;
    json!({
        "glm_cutoff": g.cutoff,
        "glm_residual": g.residual_tol,
        "glm_max_condition": g.max_condition,
        "glm_step": g.step,
        "glm_extrapolate": g.extrapolate,
        "boundary": g.boundary_tol,
        "newton": cfg.pipeline.zs.newton_tol,
        "root_abs": cfg.pipeline.zs.root_abs_tol,
        "roundtrip": cfg.raw.tolerances.roundtrip,
    })
}

pub fn run(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Summary, CliError> {
    let dir = opts.out.clone().unwrap_or_else(|| cfg.output_dir());
    let writer = Writer::new(&dir, cmd.name(), &cfg.hash, tolerances(cfg)).at(&dir)?;
    let mut ctx = Ctx { cfg, opts, writer };
    let reports = match cmd {
        Command::Direct => direct(&mut ctx).map(|_| Vec::new()),
        Command::Evolve => evolve(&mut ctx).map(|_| Vec::new()),
        Command::Inverse => inverse(&mut ctx, false).map(|_| Vec::new()),
        Command::Simulate => inverse(&mut ctx, true).map(|_| Vec::new()),
        Command::Verify => verify(&mut ctx),
        Command::Example => example(&mut ctx).map(|_| Vec::new()),
    }?;
    let files = ctx.writer.written().to_vec();
    let failed: Vec<String> = reports.iter().filter(|r| !r.ok()).map(|r| r.name.clone()).collect();
    if !failed.is_empty() {
        return Err(CliError::Verification { failed });
    }
    Ok(Summary { files, reports })
}

fn direct(ctx: &mut Ctx) -> Result<ScatteringData, CliError> {
    let field = ctx.initial_field()?;
    let sd = ctx.cfg.pipeline.direct(&field)?;
    ctx.scattering(&sd, "")?;
    let plot = gnuplot_script("reflection coefficient", "Re r, Im r", 6, &["scattering.dat".into()]);
    ctx.write("scattering.plt", &plot)?;
    Ok(sd)
}

fn evolved(ctx: &Ctx, sd0: &ScatteringData) -> Result<Vec<(f64, ScatteringData)>, CliError> {
    let cfg = ctx.cfg;
    cfg.times.iter().map(|&t| Ok((t, cfg.pipeline.evolve(sd0, t, &cfg.sources)?))).collect()
}

fn evolve(ctx: &mut Ctx) -> Result<Vec<(f64, ScatteringData)>, CliError> {
    let sd0 = direct(ctx)?;
    let all = evolved(ctx, &sd0)?;
    for (t, sd) in &all {
        ctx.scattering(sd, &format!("_t{}", time_label(*t)))?;
    }
    Ok(all)
}

#[derive(Serialize)]
struct GlmSummary {
    time: f64,
    max_residual: f64,
    max_condition: f64,
    max_tail: f64,
}

fn summarize(t: f64, rec: &Reconstruction) -> GlmSummary {
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    GlmSummary { time: t, max_residual: max(&rec.residual), max_condition: max(&rec.condition), max_tail: max(&rec.tail) }
}

fn inverse(ctx: &mut Ctx, with_sources: bool) -> Result<(), CliError> {
    let all = if with_sources {
        evolve(ctx)?
    } else {
        let field = ctx.initial_field()?;
        let sd0 = ctx.cfg.pipeline.direct(&field)?;
        evolved(ctx, &sd0)?
    };
    let grid = ctx.cfg.pipeline.recon_grid()?;
    let mut fields = Vec::new();
    let mut glm = Vec::new();
    for (t, sd) in &all {
        let rec = ctx.cfg.pipeline.inverse(sd)?;
        glm.push(summarize(*t, &rec));
        fields.push((*t, rec.u));
    }
    ctx.fields(&grid, &fields, "u")?;
    ctx.write_json("glm_summary.json", &glm)?;
    if with_sources {
        for ((t, sd), (_, u)) in all.iter().zip(&fields) {
            let b = sd.boundary;
            let field = PotentialField::from_samples_with_tol(grid, u.clone(), b, *t, ctx.cfg.pipeline.glm.boundary_tol * b.rho())?;
            let pairs = sources(ctx.cfg, &field, sd, *t)?;
            let csv = sources_csv(&grid, &pairs)?;
            ctx.write_table(&format!("sources_t{}", time_label(*t)), &csv)?;
        }
    }
    Ok(())
}

/// Source pairs of the configured kind on `field`.
fn sources(cfg: &RunConfig, field: &PotentialField, sd: &ScatteringData, t: f64) -> Result<Vec<SourcePair>, CliError> {
    let modes = sd
        .discrete
        .par_iter()
        .map(|d| eigenmode(field, d.xi, &cfg.pipeline.zs))
        .collect::<nls_ist_core::Result<Vec<_>>>()?;
    Ok(match &cfg.sources {
        SourceSpec::A(terms) => build_sources_case_a(field, &modes, terms, t)?,
        SourceSpec::B(terms) => build_sources_case_b(field, &modes, terms, t, cfg.raw.options.source_a_dot)?,
    })
}

fn sources_csv(grid: &UniformGrid, pairs: &[SourcePair]) -> Result<String, CliError> {
    let rhs = source_rhs(pairs, grid.n)?;
    let mut head = vec!["x".to_string()];
    for n in 1..=pairs.len() {
        for part in ["f1", "f2", "g1", "g2"] {
            head.push(format!("re_{part}_{n}"));
            head.push(format!("im_{part}_{n}"));
        }
    }
    head.push("re_rhs".into());
    head.push("im_rhs".into());
    let mut out = head.join(",");
    out.push('\n');
    for (i, x) in grid.points().enumerate() {
        let mut vals = vec![x];
        for p in pairs {
            for v in [p.f[i][0], p.f[i][1], p.g[i][0], p.g[i][1]] {
                vals.push(v.re);
                vals.push(v.im);
            }
        }
        vals.push(rhs[i].re);
        vals.push(rhs[i].im);
        let cells: Vec<String> = vals.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn example_case(cfg: &RunConfig) -> ExampleCase {
    match &cfg.sources {
        SourceSpec::A(t) => ExampleCase::A { a1: t[0].normalization.clone(), gauge: t[0].gauge.clone() },
        SourceSpec::B(t) => ExampleCase::B { beta1: t[0].beta.clone(), b1: t[0].constraint.clone() },
    }
}

fn example(ctx: &mut Ctx) -> Result<(), CliError> {
    let params = *ctx.cfg.example().ok_or_else(|| ConfigError::Validation {
        field: "potential".into(),
        message: "the example command needs an example potential".into(),
    })?;
    let case = example_case(ctx.cfg);
    let grid = ctx.cfg.pipeline.recon_grid()?;
    let mut fields = Vec::new();
    for &t in &ctx.cfg.times {
        let g = case.g(t)?;
        fields.push((t, grid.points().map(|x| example_u(&params, x, t, g)).collect()));
    }
    ctx.fields(&grid, &fields, "u")
}

/// Threshold for the discretized first-order systems at the potential grid spacing.
const LINEAR_SYSTEM_TOL: f64 = 1e-4;
const CONSTRAINT_DRIFT_TOL: f64 = 1e-6;

fn verify(ctx: &mut Ctx) -> Result<Vec<ResidualReport>, CliError> {
    let cfg = ctx.cfg;
    let field = ctx.initial_field()?;
    let sd0 = cfg.pipeline.direct(&field)?;
    let mut reports = invariant_suite(&field, &sd0, &cfg.pipeline.zs);

    let pairs = sources(cfg, &field, &sd0, 0.0)?;
    let dx = field.grid().dx;
    for (n, pair) in pairs.iter().enumerate() {
        for r in linear_system_residual(pair, field.values(), dx)? {
            let mut r = r.with_threshold(LINEAR_SYSTEM_TOL);
            r.name = format!("{}_{}", r.name, n + 1);
            reports.push(r);
        }
        if let SourceSpec::B(terms) = &cfg.sources {
            let b = terms[n].constraint.eval(0.0)?.re;
            let drift = constraint_drift(pair, b);
            reports.push(
                ResidualReport::from_values(format!("bilinear_constraint_{}", n + 1), (dx, 0.0), &[drift])
                    .with_threshold(CONSTRAINT_DRIFT_TOL),
            );
        }
    }

    let grid = cfg.pipeline.recon_grid()?;
    let tol = cfg.raw.tolerances.roundtrip;
    for (t, sd) in evolved(ctx, &sd0)? {
        let mut u = unitarity_report(&sd);
        u.name = format!("unitarity_t{}", time_label(t));
        reports.push(u);
        let r = match cfg.example() {
            Some(params) => {
                let case = example_case(cfg);
                let g = case.g(t)?;
                let rec = cfg.pipeline.inverse(&sd)?;
                let errs: Vec<f64> = nls_ist_core::verify::interior(grid.n)
                    .map(|i| (rec.u[i] - example_u(params, grid.x(i), t, g)).norm())
                    .collect();
                ResidualReport::from_values(format!("roundtrip_t{}", time_label(t)), (grid.dx, t), &errs)
                    .with_note("field error against the closed form")
            }
            None => roundtrip_check(&field, &cfg.sources, t, &cfg.pipeline, None)?,
        };
        reports.push(r.with_threshold(tol));
    }
    ctx.write_json("reports.json", &reports)?;
    Ok(reports)
}
