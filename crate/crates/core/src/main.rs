use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{Map, Value};

use fractsurf::config::{parse_config, parse_config_value};
use fractsurf::error::Result;
use fractsurf::pipeline::{run_pipeline, Command, Overrides};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Check the configuration and print the contraction certificate.
    Validate,
    /// Build the IFS and write its certificate.
    Build,
    /// Solve the surface and write heightmap, image and chaos-game points.
    Surface,
    /// Box-counting estimate and theoretical band.
    Dimension,
    /// Everything above plus the self-consistency checks.
    Report,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Validate => Command::Validate,
            Cmd::Build => Command::Build,
            Cmd::Surface => Command::Surface,
            Cmd::Dimension => Command::Dimension,
            Cmd::Report => Command::Report,
        }
    }
}

/// Fractal interpolation surfaces with boundary-vanishing vertical scaling.
#[derive(Debug, Parser)]
#[command(name = "fractsurf", version)]
struct Cli {
    command: Cmd,
    /// JSON job file. Its keys override the fixture when both are given.
    #[arg(long, required_unless_present = "fixture")]
    config: Option<PathBuf>,
    /// Built-in job to start from.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver lattice nodes per axis.
    #[arg(long)]
    resolution: Option<usize>,
    /// Target sup-norm error bound of the solver.
    #[arg(long)]
    tol: Option<f64>,
}

fn load(cli: &Cli) -> Result<(fractsurf::config::JobConfig, Option<PathBuf>)> {
    let base_dir = cli
        .config
        .as_ref()
        .map(|p| p.parent().map(PathBuf::from).unwrap_or_default());
    let config = match (&cli.config, &cli.fixture) {
        (Some(path), None) => parse_config(&std::fs::read_to_string(path)?, base_dir.as_deref())?,
        (path, Some(name)) => {
            let mut doc = match path {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    serde_json::from_str::<Value>(&text).map_err(|e| {
                        fractsurf::error::Error::Config(vec![fractsurf::error::ConfigIssue {
                            path: format!("line {} column {}", e.line(), e.column()),
                            message: e.to_string(),
                        }])
                    })?
                }
                None => Value::Object(Map::new()),
            };
            if let Value::Object(top) = &mut doc {
                top.insert("fixture".into(), Value::String(name.clone()));
            }
            parse_config_value(doc, base_dir.as_deref())?
        }
        (None, None) => unreachable!("clap requires --config or --fixture"),
    };
    Ok((config, base_dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|(mut config, base_dir)| {
        // an explicit --out is relative to the working directory
        let out = match &cli.out {
            Some(p) if p.is_relative() => Some(std::env::current_dir()?.join(p)),
            other => other.clone(),
        };
        Overrides {
            out,
            seed: cli.seed,
            resolution: cli.resolution,
            tol: cli.tol,
        }
        .apply(&mut config);
        run_pipeline(&config, base_dir.as_deref(), cli.command.into())
    });
    match result {
        Ok(summary) => {
            print!("{}", summary.text);
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
