use std::path::Path;

use gaussflow::flow::{self, FlowConfig};
use gaussflow::gaussian::{self, OptimizerConfig};
use gaussflow::sweep::{self, MainCalculationConfig};
use gaussflow::zoo::{self, EntropyBoundConfig};
use gaussflow::{shapes, slicing, smf, QuadConfig, SimplicialManifold};
use serde::Serialize;

use crate::config::{check_positive, FlowInitial, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{emit, to_json, write_atomic};
use crate::{Cli, Command, Shape, ShapeParams, SourceArgs, VerifyCommand};

const SLICING_MARGIN: f64 = 1e-3;

struct Settings {
    config: RunConfig,
    seed: u64,
}

impl Settings {
    fn quad(&self) -> QuadConfig {
        match self.config.tolerances.quad {
            Some(t) => QuadConfig::with_tol(t),
            None => QuadConfig::with_tol(1e-7),
        }
    }

    fn optimizer(&self) -> OptimizerConfig {
        let mut o = OptimizerConfig { seed: self.seed, quad: self.quad(), ..Default::default() };
        if let Some(s) = self.config.tolerances.step {
            o.step_tol = s;
        }
        o
    }

    fn margin(&self, default: f64) -> f64 {
        self.config.tolerances.margin.unwrap_or(default)
    }
}

#[derive(Serialize)]
struct Flags {
    boundary_supremum: bool,
}

#[derive(Serialize)]
struct MeasureReport {
    value: f64,
    witness: gaussian::Witness,
    error: f64,
    flags: Flags,
    evaluations: usize,
}

impl From<gaussian::DensityReport> for MeasureReport {
    fn from(r: gaussian::DensityReport) -> Self {
        MeasureReport {
            value: r.value,
            witness: r.witness,
            error: r.quad_error,
            flags: Flags { boundary_supremum: r.boundary_supremum_flag },
            evaluations: r.evaluations,
        }
    }
}

#[derive(Serialize)]
struct Verdict<'a, T: Serialize> {
    holds: bool,
    report: &'a T,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let settings = Settings { config, seed };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::PhiArea(a) => {
            let m = load(&a.mesh)?;
            let e = gaussian::phi_area(&m, &settings.quad())?;
            let r = MeasureReport {
                value: e.value,
                witness: gaussian::Witness::None,
                error: e.error,
                flags: Flags { boundary_supremum: false },
                evaluations: 1,
            };
            emit(out, &to_json("phi-area", &r)?)
        }
        Command::Entropy(a) => measure(out, "entropy", gaussian::entropy(&load(&a.mesh)?, &settings.optimizer())?),
        Command::Mdr(a) => measure(out, "mdr", gaussian::mdr(&load(&a.mesh)?, &settings.optimizer())?),
        Command::Mcd(a) => measure(out, "mcd", gaussian::mcd(&load(&a.mesh)?, &settings.optimizer())?),
        Command::ConeDensity { mesh, shift } => {
            let m = load(&mesh.mesh)?;
            let e = gaussian::cone_density(&m, shift, &settings.quad())?;
            let r = MeasureReport {
                value: e.value,
                witness: gaussian::Witness::Shift { shift: shift.clone() },
                error: e.error,
                flags: Flags { boundary_supremum: false },
                evaluations: 1,
            };
            emit(out, &to_json("cone-density", &r)?)
        }
        Command::Verify(v) => verify(v, &settings, out),
        Command::Generate { shape, params } => {
            let m = generate(*shape, params)?;
            emit(out, &smf::write_smf(&m))
        }
    }
}

fn measure(out: Option<&Path>, name: &str, r: gaussian::DensityReport) -> CliResult<()> {
    emit(out, &to_json(name, &MeasureReport::from(r))?)
}

fn load(path: &Path) -> CliResult<SimplicialManifold> {
    Ok(smf::load_smf(path)?)
}

fn source(s: &SourceArgs, default: Shape) -> CliResult<SimplicialManifold> {
    match &s.mesh {
        Some(p) => load(p),
        None => generate(s.gen.unwrap_or(default), &s.params),
    }
}

/// Writes the report, then fails with exit code 4 if the check did not hold.
fn finish<T: Serialize>(out: Option<&Path>, name: &str, holds: bool, report: &T) -> CliResult<()> {
    emit(out, &to_json(name, &Verdict { holds, report })?)?;
    if holds {
        Ok(())
    } else {
        Err(CliError::Violated(format!("{name}: a margin is below its tolerance")))
    }
}

fn verify(cmd: &VerifyCommand, settings: &Settings, out: Option<&Path>) -> CliResult<()> {
    match cmd {
        VerifyCommand::TranslatorBound(s) => {
            let m = source(s, Shape::GrimReaper)?;
            let cfg = EntropyBoundConfig { optimizer: settings.optimizer(), plane_tol: None, tol: settings.margin(1e-2) };
            let r = zoo::verify_entropy_bound(&m, &cfg)?;
            finish(out, "verify translator-bound", r.holds(), &r)
        }
        VerifyCommand::SweepBound { source: s, a } => {
            let v = &s.params.speed;
            check_positive("--v", *v)?;
            let sigma = source(s, Shape::Circle)?;
            let cfg = MainCalculationConfig {
                optimizer: settings.optimizer(),
                tol: settings.margin(1e-2),
                ..Default::default()
            };
            let r = sweep::verify_main_calculation(&sigma, *a, *v, &cfg)?;
            finish(out, "verify sweep-bound", r.holds(), &r)
        }
        VerifyCommand::Slicing(s) => {
            let m = source(s, Shape::Torus)?;
            let r = slicing::verify_gauss_slicing(&m, &settings.quad())?;
            let tol = settings.margin(SLICING_MARGIN).max(r.tol);
            finish(out, "verify slicing", r.margin >= -tol, &r)
        }
        VerifyCommand::Monotonicity => monotonicity(settings, out),
    }
}

fn monotonicity(settings: &Settings, out: Option<&Path>) -> CliResult<()> {
    let Some(mc) = &settings.config.monotonicity else {
        return Err(CliError::BadInput("verify monotonicity needs --config with a [monotonicity] table".into()));
    };
    let (curve, motion) = match mc.initial {
        FlowInitial::GrimReaper { v, ycut, res } => flow::grim_reaper_flow(v, ycut, res, mc.a)?,
        FlowInitial::PinnedLoop { radius, res } => flow::pinned_loop_flow(radius, res, mc.a, mc.b)?,
    };
    let mut cfg = FlowConfig::new(curve, motion, mc.a, mc.b, mc.dt, mc.h);
    if let Some(r) = mc.report_interval {
        cfg.report_interval = r;
    }
    if let Some(c) = mc.model_constant {
        cfg.model_constant = c;
    }
    cfg.quad = settings.quad();
    let r = flow::run_and_verify(&cfg)?;
    if let Some(csv) = &mc.csv {
        write_atomic(csv, &r.to_csv())?;
    }
    finish(out, "verify monotonicity", r.holds(), &r)
}

fn parse_vertices(s: &str) -> CliResult<Vec<[f64; 2]>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let xy: Vec<f64> = p
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::BadInput(format!("bad vertex {p:?}: {e}")))?;
            match xy[..] {
                [x, y] => Ok([x, y]),
                _ => Err(CliError::BadInput(format!("vertex {p:?} needs two coordinates"))),
            }
        })
        .collect()
}

pub fn generate(shape: Shape, p: &ShapeParams) -> CliResult<SimplicialManifold> {
    let m = match shape {
        Shape::GrimReaper => zoo::grim_reaper(p.speed, p.ycut, p.res.unwrap_or(2048))?,
        Shape::BowlCap => zoo::bowl_cap(p.dim, p.speed, p.rmax, p.res.unwrap_or(128))?,
        Shape::Circle => shapes::circle(p.r, p.n)?,
        Shape::Polygon => {
            let v = p.vertices.as_deref().ok_or_else(|| CliError::BadInput("polygon needs --vertices".into()))?;
            shapes::polygon(&parse_vertices(v)?)?
        }
        Shape::Square => shapes::square(p.side, p.res.unwrap_or(64))?,
        Shape::TwoPoints => shapes::two_points(p.sep, p.ambient)?,
        Shape::Sphere => shapes::sphere(p.r, p.level)?,
        Shape::Torus => shapes::torus(p.big, p.r, p.n, p.res.unwrap_or(48))?,
    };
    Ok(m)
}
