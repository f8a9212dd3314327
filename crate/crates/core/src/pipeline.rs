//! The `validate → build → surface → dimension → report` pipeline behind
//! the command-line tool.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{CountMode, JobConfig};
use crate::dimension::{
    counting_resolution, dimension_report, scale_list, DimensionOptions, DimensionReport,
};
use crate::error::Result;
use crate::export;
use crate::ifs::{solve_fixed_point, IfsSystem, SolveOptions, SurfaceSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Build,
    Surface,
    Dimension,
    Report,
}

/// Command-line values that replace configuration entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut JobConfig) {
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        if let Some(seed) = self.seed {
            config.chaos.seed = seed;
        }
        if let Some(r) = self.resolution {
            config.solver.resolution = r;
        }
        if let Some(t) = self.tol {
            config.solver.tol = t;
        }
    }
}

/// Human-readable summary and the files written.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub text: String,
    pub files: Vec<PathBuf>,
}

struct Run<'a> {
    config: &'a JobConfig,
    out_dir: PathBuf,
    summary: RunSummary,
}

impl Run<'_> {
    fn line(&mut self, text: impl AsRef<str>) {
        self.summary.text.push_str(text.as_ref());
        self.summary.text.push('\n');
    }

    fn emit<F>(&mut self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    {
        fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        write(&mut w)?;
        w.flush()?;
        self.summary.files.push(path);
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        self.emit(name, |w| w.write_all(text.as_bytes()))
    }
}

/// Output directory: relative configured paths are taken from `base_dir`.
pub fn output_dir(config: &JobConfig, base_dir: Option<&Path>) -> PathBuf {
    match base_dir {
        Some(base) if config.output.dir.is_relative() => base.join(&config.output.dir),
        _ => config.output.dir.clone(),
    }
}

pub fn run_pipeline(
    config: &JobConfig,
    base_dir: Option<&Path>,
    command: Command,
) -> Result<RunSummary> {
    let mut run = Run {
        config,
        out_dir: output_dir(config, base_dir),
        summary: RunSummary::default(),
    };
    let system = config.build_system(base_dir)?;
    let cert_text = certificate_text(&system)?;
    if command == Command::Validate {
        run.line("configuration valid");
        run.summary.text.push_str(&cert_text);
        return Ok(run.summary);
    }
    run.write_text("certificate.txt", &cert_text)?;
    run.line(format!(
        "certified: c_s = {} (cell {}), c_L = {}",
        system.certificate().c_s,
        system.certificate().c_s_cell,
        system.certificate().c_l
    ));
    if command == Command::Build {
        run.write_text("config.json", &config.to_json())?;
        return Ok(run.summary);
    }

    let points = if matches!(command, Command::Surface | Command::Report)
        || config.dimension.mode == CountMode::PointCloud
    {
        let started = Instant::now();
        let pts = system.chaos_game(config.chaos.points, config.chaos.seed, config.chaos.burn_in);
        run.line(format!(
            "chaos game: {} points, seed {}, {:.2} s",
            pts.len(),
            config.chaos.seed,
            started.elapsed().as_secs_f64()
        ));
        Some(pts)
    } else {
        None
    };

    let mut sample = None;
    if matches!(command, Command::Surface | Command::Report) {
        let s = solve(&mut run, &system, config.solver.into())?;
        run.emit("heightmap.csv", |w| export::write_heightmap_csv(&s, w))?;
        run.emit("heightmap.pgm", |w| export::write_pgm16(&s, w))?;
        if let Some(pts) = &points {
            run.emit("chaos.xyz", |w| export::write_xyz(pts, w))?;
        }
        sample = Some(s);
    }

    let mut dim = None;
    if matches!(command, Command::Dimension | Command::Report) {
        let report = dimension(&mut run, &system, points.as_deref())?;
        dim = Some(report);
    }

    if command == Command::Report {
        let sample = sample.expect("report solves the surface");
        let mut checks = String::new();
        let res = system.fixed_point_residual(&sample, 10_000, config.chaos.seed);
        writeln!(checks, "residual_points={}", res.points).unwrap();
        writeln!(checks, "residual_max={}", res.max_residual).unwrap();
        writeln!(checks, "residual_max_ratio={}", res.max_ratio).unwrap();
        writeln!(checks, "edge_jump={}", system.edge_jump(&sample, 64)).unwrap();
        if let Some(pts) = &points {
            let chaos = system.chaos_agreement(&sample, pts, 8)?;
            writeln!(checks, "chaos_points={}", chaos.points).unwrap();
            writeln!(checks, "chaos_max_difference={}", chaos.max_difference).unwrap();
            writeln!(checks, "chaos_max_ratio={}", chaos.max_ratio).unwrap();
        }
        let metric = system.certify_metric(None, 4000, config.chaos.seed)?;
        match metric.theta_upper {
            Some(u) => writeln!(checks, "theta_upper={u}").unwrap(),
            None => writeln!(checks, "theta_upper=unbounded").unwrap(),
        }
        writeln!(checks, "theta={}", metric.theta).unwrap();
        writeln!(checks, "metric_admissible={}", metric.admissible).unwrap();
        writeln!(
            checks,
            "metric_predicted_factor={}",
            metric.predicted_factor
        )
        .unwrap();
        writeln!(checks, "metric_sampled_factor={}", metric.sampled_factor).unwrap();
        writeln!(checks, "solve_iterations={}", sample.iterations).unwrap();
        writeln!(checks, "solve_error_bound={}", sample.error_bound).unwrap();
        if let Some(d) = &dim {
            writeln!(checks, "dimension_estimate={}", d.empirical_estimate()).unwrap();
            writeln!(checks, "dimension_case={}", d.bounds.case.label()).unwrap();
        }
        run.summary.text.push_str(&checks);
        run.write_text("summary.txt", &checks)?;
    }
    Ok(run.summary)
}

fn certificate_text(system: &IfsSystem) -> Result<String> {
    let mut buf = Vec::new();
    export::write_certificate(system, &mut buf)?;
    Ok(String::from_utf8(buf).expect("certificate is UTF-8"))
}

fn solve(run: &mut Run<'_>, system: &IfsSystem, options: SolveOptions) -> Result<SurfaceSample> {
    let started = Instant::now();
    let s = solve_fixed_point(system, options)?;
    run.line(format!(
        "solved at R = {}: {} iterations, error bound {:e}, {:.2} s",
        options.resolution,
        s.iterations,
        s.error_bound,
        started.elapsed().as_secs_f64()
    ));
    Ok(s)
}

/// Lattice resolution used for box counting: the smallest one at or
/// above the configured size that aligns with the knots and every scale.
pub fn counting_options(config: &JobConfig, system: &IfsSystem) -> Result<SolveOptions> {
    let d = config.dimension;
    let deltas = scale_list(system.grid().n(), d.first_scale, d.scales);
    let at_least = d.resolution.unwrap_or(config.solver.resolution);
    Ok(SolveOptions {
        resolution: counting_resolution(system.grid(), &deltas, at_least)?,
        ..config.solver.into()
    })
}

pub fn dimension_options(config: &JobConfig) -> DimensionOptions {
    let d = config.dimension;
    DimensionOptions {
        first_scale: d.first_scale,
        scales: d.scales,
        epsilon: d.epsilon,
        extrema_resolution: config.sampling.extrema_resolution,
    }
}

/// Solves at the counting resolution and writes the dimension files.
fn dimension(
    run: &mut Run<'_>,
    system: &IfsSystem,
    points: Option<&[[f64; 3]]>,
) -> Result<DimensionReport> {
    let cfg = run.config;
    let sample = solve(run, system, counting_options(cfg, system)?)?;
    let cloud = if cfg.dimension.mode == CountMode::PointCloud {
        points
    } else {
        None
    };
    let report = dimension_report(system, &sample, cloud, dimension_options(cfg))?;
    run.emit("dimension.csv", |w| export::write_counts_csv(&report, w))?;
    run.emit("dimension.txt", |w| export::write_dimension_kv(&report, w))?;
    run.line(format!(
        "dimension: estimate {} ({}, band [{}, {}])",
        report.empirical_estimate(),
        report.bounds.case.label(),
        report.bounds.lower,
        report.bounds.upper
    ));
    Ok(report)
}
