//! Command-line front end: `analyze`, `simulate`, `holonomy` and `portrait`.
//!
//! Exit codes are part of the interface: 0 Lagrangian, 3 not Lagrangian,
//! 2 unsupported, 1 error. Other commands exit 0 on success.

pub mod config;
mod output;

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use vhc_core::analysis::{analyze, AnalysisOptions, Verdict, SCHEMA_VERSION};
use vhc_core::calculus::{Constant, CurveSampler, Polyline};
use vhc_core::holonomy::{loop_transport, LoopDescriptor, TRANSPORT_TOL};
use vhc_core::models::ModelBundle;
use vhc_core::sim::{
    classify_orbit, on_constraint_state, phase_portrait, portrait_csv, simulate_constrained, simulate_full,
    speed_sweep, OrbitClass, PortraitOptions, SimOptions, PORTRAIT_SPEEDS,
};
use vhc_core::vhc::Gains;

pub use config::{CommandKind, Format, RunConfig};
pub use output::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "vhc", version, about = "Lagrangian structure of virtual holonomic constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the constrained dynamics is Lagrangian.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Gauge constant of the curved-case metric.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
    },
    /// Integrate the constrained or the full closed-loop dynamics.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ic: InitialCondition,
        /// Simulate the full system under the stabilizing feedback.
        #[arg(long)]
        full: bool,
        /// Feedback gains `kp,kd` for `--full`.
        #[arg(long, value_delimiter = ',')]
        gains: Option<Vec<f64>>,
        /// Configuration offset from the constraint for `--full`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        offset: Option<Vec<f64>>,
        /// Skip the analysis that provides the energy column.
        #[arg(long)]
        no_energy: bool,
    },
    /// Parallel transport around loops in the constraint chart.
    Holonomy {
        #[command(flatten)]
        common: Common,
        /// `generators`, `constant[:x,y,…]` or `polyline:x,y;x,y;…`.
        #[arg(long = "loop", allow_hyphen_values = true)]
        loop_spec: Option<String>,
    },
    /// Phase portrait from a sweep of initial rates.
    Portrait {
        #[command(flatten)]
        common: Common,
        /// Base configuration of every run.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        /// Initial rates of the recorded coordinate.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        speeds: Option<Vec<f64>>,
        /// Index of the recorded coordinate.
        #[arg(long)]
        coord: Option<usize>,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    /// Model parameter override, `key=value`.
    #[arg(long = "param", value_parser = config::parse_param)]
    pub params: Vec<(String, f64)>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory [default: $VHC_OUT_DIR or .].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct InitialCondition {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub dtheta: Option<Vec<f64>>,
    #[arg(long)]
    pub t1: Option<f64>,
    /// Output sample spacing.
    #[arg(long)]
    pub dt: Option<f64>,
}

impl Common {
    fn into_config(self, command: CommandKind) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            command: Some(command),
            model: self.model,
            params: self.params.into_iter().collect(),
            grid: self.grid,
            tol: self.tol,
            out: self.out,
            seed: self.seed,
            format: self.format,
            ..RunConfig::default()
        };
        Ok(base.merge(flags))
    }
}

impl Cli {
    /// Resolve flags and config file into a single configuration.
    pub fn into_config(self) -> Result<RunConfig> {
        Ok(match self.command {
            Command::Analyze { common, b } => {
                let mut c = common.into_config(CommandKind::Analyze)?;
                c = c.merge(RunConfig { b, ..RunConfig::default() });
                c
            }
            Command::Simulate { common, ic, full, gains, offset, no_energy } => {
                let c = common.into_config(CommandKind::Simulate)?;
                let gains = match gains.as_deref() {
                    Some([kp, kd]) => Some([*kp, *kd]),
                    Some(_) => bail!("--gains takes two values"),
                    None => None,
                };
                c.merge(RunConfig {
                    theta: ic.theta,
                    dtheta: ic.dtheta,
                    t1: ic.t1,
                    dt: ic.dt,
                    full: full.then_some(true),
                    gains,
                    offset,
                    energy: no_energy.then_some(false),
                    ..RunConfig::default()
                })
            }
            Command::Holonomy { common, loop_spec } => {
                common.into_config(CommandKind::Holonomy)?.merge(RunConfig { loop_spec, ..RunConfig::default() })
            }
            Command::Portrait { common, theta, speeds, coord, t1, dt } => common
                .into_config(CommandKind::Portrait)?
                .merge(RunConfig { theta, speeds, coord, t1, dt, ..RunConfig::default() }),
        })
    }
}

/// Run a resolved configuration; returns the process exit code.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    match cfg.command {
        Some(CommandKind::Analyze) => cmd_analyze(cfg),
        Some(CommandKind::Simulate) => cmd_simulate(cfg),
        Some(CommandKind::Holonomy) => cmd_holonomy(cfg),
        Some(CommandKind::Portrait) => cmd_portrait(cfg),
        None => bail!("no command given"),
    }
}

/// Exit code for an error: 2 for unsupported cases, 1 otherwise.
pub fn error_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<vhc_core::Error>() {
        Some(vhc_core::Error::Unsupported(_)) => 2,
        _ => 1,
    }
}

fn analysis_options(cfg: &RunConfig) -> AnalysisOptions {
    let mut opts = AnalysisOptions { grid: cfg.grid, b: cfg.b, ..AnalysisOptions::default() };
    if let Some(t) = cfg.tol {
        opts.tol = t;
        opts.search.tol = t;
    }
    if let Some(s) = cfg.seed {
        opts.seed = s;
    }
    opts
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let a = analyze(&bundle, &analysis_options(cfg))?;
    let json = to_json(&a.report)?;
    let path = write_atomic(&cfg.out_dir(), &format!("{}-analysis.json", bundle.name), &json)?;
    match cfg.format {
        Some(Format::Json) => print!("{json}"),
        _ => print!("{}", a.report.summary()),
    }
    eprintln!("wrote {}", path.display());
    if a.report.verdict == Verdict::Unsupported {
        eprintln!("unsupported: {}", a.report.diagnostic.as_deref().unwrap_or("no decision procedure applies"));
    }
    Ok(a.report.exit_code())
}

/// Middle of the sampling box, 0 on periodic axes.
fn center(bundle: &ModelBundle) -> Vec<f64> {
    let chart = bundle.sample_box.clone().unwrap_or_else(|| bundle.chart());
    (0..chart.dim())
        .map(|i| if chart.is_periodic(i) { 0.0 } else { 0.5 * (chart.lower[i] + chart.upper[i]) })
        .collect()
}

fn orbit_coord(bundle: &ModelBundle, cfg: &RunConfig) -> usize {
    cfg.coord.unwrap_or_else(|| bundle.chart().periodic_indices().first().copied().unwrap_or(0))
}

#[derive(Debug, Serialize)]
struct SimSummary {
    schema_version: u32,
    model: String,
    mode: &'static str,
    t1: f64,
    samples: usize,
    energy_drift: Option<f64>,
    max_residual: Option<f64>,
    orbit_class: Option<OrbitClass>,
    lift_range: Option<f64>,
    final_state: Vec<f64>,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let c = bundle.constrained();
    let k = c.reduced_dim();
    let theta = cfg.theta.clone().unwrap_or_else(|| center(&bundle));
    let dtheta = cfg.dtheta.clone().unwrap_or_else(|| vec![0.0; k]);
    if theta.len() != k || dtheta.len() != k {
        bail!("initial condition must have {k} positions and {k} rates (got {} and {})", theta.len(), dtheta.len());
    }
    let t1 = cfg.t1.unwrap_or(10.0);
    let opts = SimOptions { sample_dt: Some(cfg.dt.unwrap_or(0.01)), ..SimOptions::default() };
    let full = cfg.full.unwrap_or(false);
    let (tr, mode) = if full {
        let (mut q0, dq0) = on_constraint_state(&c.par, &theta, &dtheta)?;
        if let Some(off) = &cfg.offset {
            if off.len() != q0.len() {
                bail!("offset must have {} components", q0.len());
            }
            q0.iter_mut().zip(off).for_each(|(q, d)| *q += d);
        }
        let [kp, kd] = cfg.gains.unwrap_or([16.0, 8.0]);
        (simulate_full(&c.sys, &c.par, &q0, &dq0, Gains::new(kp, kd), t1, &opts)?, "full")
    } else {
        let structure = if cfg.energy.unwrap_or(true) {
            analyze(&bundle, &analysis_options(cfg))?.structure
        } else {
            None
        };
        (simulate_constrained(&c, structure.as_deref(), &theta, &dtheta, t1, &opts)?, "constrained")
    };
    let (orbit_class, lift_range) = if full {
        (None, None)
    } else {
        let j = orbit_coord(&bundle, cfg).min(k - 1);
        let angle: Vec<f64> = (0..tr.len()).map(|i| tr.position(i)[j]).collect();
        let rate: Vec<f64> = (0..tr.len()).map(|i| tr.velocity(i)[j]).collect();
        let (cl, r) = classify_orbit(&angle, &rate);
        (Some(cl), Some(r))
    };
    let summary = SimSummary {
        schema_version: SCHEMA_VERSION,
        model: bundle.name.clone(),
        mode,
        t1,
        samples: tr.len(),
        energy_drift: tr.energy_drift(),
        max_residual: tr.max_residual(),
        orbit_class,
        lift_range,
        final_state: tr.last_state().to_vec(),
    };
    let dir = cfg.out_dir();
    let data = match cfg.format {
        Some(Format::Json) => write_atomic(&dir, &format!("{}-trajectory.json", bundle.name), &to_json(&tr)?)?,
        _ => write_atomic(&dir, &format!("{}-trajectory.csv", bundle.name), &tr.to_csv())?,
    };
    let json = to_json(&summary)?;
    let sp = write_atomic(&dir, &format!("{}-summary.json", bundle.name), &json)?;
    print!("{json}");
    eprintln!("wrote {} and {}", data.display(), sp.display());
    Ok(0)
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| anyhow::anyhow!("bad coordinate '{v}' in loop spec")))
        .collect()
}

/// Loops named by a spec string.
pub fn parse_loops(spec: &str, bundle: &ModelBundle) -> Result<Vec<LoopDescriptor>> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind.trim() {
        "generators" => Ok(bundle.generators.clone()),
        "constant" => {
            let at = if rest.trim().is_empty() { center(bundle) } else { parse_point(rest)? };
            let seg: Arc<dyn CurveSampler> = Arc::new(Constant { at: at.clone(), duration: 1.0 });
            Ok(vec![LoopDescriptor::new(at, vec![seg], "constant")])
        }
        "polyline" => {
            let vertices = rest.split(';').filter(|s| !s.trim().is_empty()).map(parse_point).collect::<Result<Vec<_>>>()?;
            if vertices.len() < 2 {
                bail!("a polyline loop needs at least two vertices");
            }
            let base = vertices[0].clone();
            let seg: Arc<dyn CurveSampler> = Arc::new(Polyline::new(vertices));
            Ok(vec![LoopDescriptor::new(base, vec![seg], "polyline")])
        }
        other => bail!("unknown loop kind '{other}' (expected generators, constant or polyline)"),
    }
}

fn check_in_chart(lp: &LoopDescriptor, bundle: &ModelBundle) -> Result<()> {
    let chart = bundle.chart();
    lp.validate(&chart, 1e-9)?;
    for seg in &lp.segments {
        let (a, b) = seg.span();
        for i in 0..=64 {
            let p = seg.point(a + (b - a) * i as f64 / 64.0);
            if !chart.contains(&p) {
                bail!("loop '{}' leaves the chart at {p:?}", lp.tag);
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct LoopReport {
    tag: String,
    base: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    distance_from_identity: f64,
}

#[derive(Debug, Serialize)]
struct HolonomyReport {
    schema_version: u32,
    model: String,
    tol: f64,
    loops: Vec<LoopReport>,
}

pub fn cmd_holonomy(cfg: &RunConfig) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let c = bundle.constrained();
    let loops = parse_loops(cfg.loop_spec.as_deref().unwrap_or("generators"), &bundle)?;
    let tol = cfg.tol.unwrap_or(TRANSPORT_TOL);
    let mut report = HolonomyReport { schema_version: SCHEMA_VERSION, model: bundle.name.clone(), tol, loops: Vec::new() };
    for lp in &loops {
        check_in_chart(lp, &bundle)?;
        let t = loop_transport(&c, lp, tol)?;
        report.loops.push(LoopReport {
            tag: lp.tag.clone(),
            base: lp.base.clone(),
            distance_from_identity: t.distance_from_identity(),
            matrix: t.matrix,
        });
    }
    if report.loops.is_empty() {
        eprintln!("model '{}' has no generator loops", bundle.name);
    }
    let dir = cfg.out_dir();
    let path = match cfg.format {
        Some(Format::Csv) => {
            let mut s = String::from("loop,row,col,value\n");
            for l in &report.loops {
                for (i, row) in l.matrix.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        s += &format!("{},{i},{j},{v:.16e}\n", l.tag);
                    }
                }
            }
            write_atomic(&dir, &format!("{}-holonomy.csv", bundle.name), &s)?
        }
        _ => write_atomic(&dir, &format!("{}-holonomy.json", bundle.name), &to_json(&report)?)?,
    };
    for l in &report.loops {
        println!("{}: {:?} (|P - I| = {:.3e})", l.tag, l.matrix, l.distance_from_identity);
    }
    eprintln!("wrote {}", path.display());
    Ok(0)
}

#[derive(Debug, Serialize)]
struct OrbitSummary {
    dtheta0: Vec<f64>,
    class: OrbitClass,
    lift_range: f64,
}

pub fn cmd_portrait(cfg: &RunConfig) -> Result<i32> {
    let bundle = cfg.bundle()?;
    let c = bundle.constrained();
    let k = c.reduced_dim();
    let theta = cfg.theta.clone().unwrap_or_else(|| center(&bundle));
    if theta.len() != k {
        bail!("--theta must have {k} components");
    }
    let coord = orbit_coord(&bundle, cfg);
    if coord >= k {
        bail!("--coord must be below {k}");
    }
    let speeds = cfg.speeds.clone().unwrap_or_else(|| PORTRAIT_SPEEDS.to_vec());
    let ics = speed_sweep(&theta, coord, &speeds);
    let sim = SimOptions { sample_dt: Some(cfg.dt.unwrap_or(0.01)), ..SimOptions::default() };
    let opts = PortraitOptions { coord, t1: cfg.t1.unwrap_or(10.0), sim };
    let orbits = phase_portrait(&c, &ics, &opts)?;
    let dir = cfg.out_dir();
    let path = match cfg.format {
        Some(Format::Json) => write_atomic(&dir, &format!("{}-portrait.json", bundle.name), &to_json(&orbits)?)?,
        _ => write_atomic(&dir, &format!("{}-portrait.csv", bundle.name), &portrait_csv(&orbits))?,
    };
    let summary: Vec<OrbitSummary> = orbits
        .iter()
        .map(|o| OrbitSummary { dtheta0: o.dtheta0.clone(), class: o.class, lift_range: o.lift_range })
        .collect();
    let json = to_json(&summary)?;
    write_atomic(&dir, &format!("{}-portrait-summary.json", bundle.name), &json)?;
    for o in &summary {
        println!("dtheta0 = {:?}: {} (lift range {:.4})", o.dtheta0, o.class, o.lift_range);
    }
    eprintln!("wrote {}", path.display());
    Ok(0)
}
