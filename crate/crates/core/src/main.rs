use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use flc_core::config::{parse_scalar, parse_window, preset, RunConfig};
use flc_core::error::Error;
use flc_core::output::{render_svg, write_csv};
use flc_core::regularity::enumerate_patches;
use flc_core::suite::{run_groupoid, run_hull, run_suite, run_witness, Suite};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "flc", version, about = "Exact checks for FLC point sets, their hulls and groupoids")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in descriptor when no config is given: z, z2, heisenberg, composite, silver_mean.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Patch radius R, as an exact rational; the arrow radius is lowered to R if larger.
    #[arg(long, global = true)]
    radius: Option<String>,
    /// Sample window: a radius ("20") or a JSON list of intervals.
    #[arg(long, global = true)]
    sample: Option<String>,
    /// Directory for report and point files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Write Λ ∩ S as CSV and an SVG scatter.
    Generate,
    /// Run a check suite; exit 0 iff every certificate passes.
    Check {
        #[arg(value_parser = ["ud", "flc", "patches", "hull", "groupoid", "witness", "all"])]
        which: String,
    },
    /// Print the patch catalog at radius R.
    Patches,
    /// Refinement, clopen partition, separation and metric checks.
    Hull,
    /// Groupoid axioms and bisection injectivity.
    Groupoid,
    /// Inner-amenability witness report.
    Witness,
    /// Run every suite and write report.json plus point files.
    Report,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<Error>() {
            Ok(core) => core.into(),
            Err(other) => Failure::Runtime(format!("{other:#}")),
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut c = match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::Config(format!("configuration error: cannot read {}: {e}", path.display()))
            })?;
            RunConfig::from_json(&text)?
        }
        (None, Some(name)) => RunConfig::from_descriptor(preset(name)?),
        (None, None) => {
            return Err(Failure::Config("configuration error: pass --config PATH or --preset NAME".into()))
        }
    };
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    if let Some(r) = &cli.radius {
        c.radius = parse_scalar(&Value::String(r.clone()), c.field)?;
        c.clamp_arrow_radius();
    }
    if let Some(s) = &cli.sample {
        let v = serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.clone()));
        c.sample = parse_window(&v, c.dim(), c.field)?;
    }
    c.validate()?;
    Ok(c)
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn emit(cli: &Cli, name: &str, v: &Value) -> anyhow::Result<()> {
    let text = render_json(v);
    if let Some(dir) = &cli.out {
        write_file(dir, name, text.as_bytes())?;
    }
    io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

fn write_points(cli: &Cli, c: &RunConfig, dir: &Path) -> anyhow::Result<Value> {
    let sample = c.descriptor.enumerate_window(&c.sample)?;
    let mut files = Vec::new();
    let want = |f: Format| cli.format.is_none_or(|g| g == f);
    if want(Format::Csv) {
        let mut buf = Vec::new();
        write_csv(&sample, c.dim(), &mut buf)?;
        write_file(dir, "points.csv", &buf)?;
        files.push("points.csv");
    }
    if want(Format::Svg) {
        match render_svg(&sample, c.dim()) {
            Ok(svg) => {
                write_file(dir, "points.svg", svg.as_bytes())?;
                files.push("points.svg");
            }
            Err(e) if cli.format == Some(Format::Svg) => return Err(e.into()),
            Err(_) => {}
        }
    }
    Ok(json!({ "points": sample.len(), "sample": sample.window, "files": files }))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let c = load_config(cli)?;
    match &cli.command {
        Command::Generate => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let summary = write_points(cli, &c, &dir)?;
            io::stdout()
                .lock()
                .write_all(render_json(&summary).as_bytes())
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            Ok(true)
        }
        Command::Check { which } => {
            let suite: Suite = which.parse()?;
            let report = run_suite(&c, suite)?;
            emit(cli, "report.json", &report)?;
            Ok(report["pass"] == Value::Bool(true))
        }
        Command::Patches => {
            let cat = enumerate_patches(&c.descriptor, &c.radius, &c.sample)?;
            let v = serde_json::to_value(&cat).map_err(|e| Failure::Runtime(e.to_string()))?;
            emit(cli, "patches.json", &v)?;
            Ok(true)
        }
        Command::Hull => single(cli, "hull.json", run_hull(&c)?),
        Command::Groupoid => single(cli, "groupoid.json", run_groupoid(&c)?),
        Command::Witness => single(cli, "witness.json", run_witness(&c)?),
        Command::Report => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let report = run_suite(&c, Suite::All)?;
            write_file(&dir, "report.json", render_json(&report).as_bytes())?;
            let files = write_points(cli, &c, &dir)?;
            let pass = report["pass"] == Value::Bool(true);
            let summary = json!({ "pass": pass, "dir": dir.display().to_string(), "points": files });
            io::stdout()
                .lock()
                .write_all(render_json(&summary).as_bytes())
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            Ok(pass)
        }
    }
}

fn single(cli: &Cli, name: &str, v: Value) -> Result<bool, Failure> {
    emit(cli, name, &v)?;
    Ok(v["pass"] == Value::Bool(true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Config(msg)) => {
            eprintln!("flc: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("flc: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
