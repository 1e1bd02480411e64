//! Command-line definitions and output routing.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use warpband_core::bubble::Stencil;
use warpband_core::riccati::ComparisonProblem;
use warpband_core::sweep::{Range, SweepSpec};
use warpband_core::warp::ModelFamily;

use crate::commands::{self, BubbleArgs, CurveSource, Outcome};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::oracle::OracleKind;
use crate::report::{ensure_dir, ensure_parent, write_atomic, Envelope};
use crate::syntax::{AnchorSpec, BandSpec, MapSpec, ModelSpec, PotentialSpec, PrescriptionSpec, WeightSpec};
use crate::verify::{Suite, VerifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StencilArg {
    Crofton,
    Axis,
}

#[derive(Debug, Parser)]
#[command(
    name = "warpband",
    version,
    about = "Band widths, mu-bubbles and stability spectra of warped products"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for outputs named after the command.
    #[arg(long, global = true, env = "WARPBAND_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// TOML file with `[tolerances]` and `[sweep]` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

fn family(s: &str) -> std::result::Result<ModelFamily, String> {
    ModelFamily::from_name(s).ok_or_else(|| format!("unknown family `{s}`"))
}

/// `start:end:count` or a single value.
fn range(s: &str) -> std::result::Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad range value `{x}`: {e}"))
    };
    match parts[..] {
        [x] => Ok(Range::single(num(x)?)),
        [a, b, k] => Ok(Range {
            start: num(a)?,
            end: num(b)?,
            count: k.parse().map_err(|e| format!("bad count `{k}`: {e}"))?,
        }),
        _ => Err(format!("range `{s}` is neither a value nor start:end:count")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature profile and classification of a catalog model.
    Model {
        #[arg(long, value_parser = family)]
        family: ModelFamily,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        l_minus: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        l_plus: Option<f64>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Also write the profile table, optionally to the given path.
        #[arg(long, num_args = 0..=1)]
        emit_profile: Option<Option<PathBuf>>,
    },
    /// Maximal width of a band under curvature bounds.
    Width {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        h_minus: f64,
        #[arg(long, allow_hyphen_values = true)]
        h_plus: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Integration horizon for profiles that never reach `H₊`.
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, num_args = 0..=1)]
        emit_profile: Option<Option<PathBuf>>,
    },
    /// Width verdicts over a parameter grid.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        #[arg(long, value_parser = range, allow_hyphen_values = true)]
        sigma: Option<Range>,
        #[arg(long, value_parser = range, allow_hyphen_values = true)]
        h_minus: Option<Range>,
        #[arg(long, value_parser = range, allow_hyphen_values = true)]
        h_plus: Option<Range>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Compares two scalar-flat warped products.
    Compare {
        #[arg(long, allow_hyphen_values = true)]
        first: ModelSpec,
        #[arg(long, allow_hyphen_values = true)]
        second: ModelSpec,
    },
    /// Minimises the prescribed-curvature functional on a band.
    Bubble {
        #[arg(long)]
        band: BandSpec,
        #[arg(long, allow_hyphen_values = true)]
        h: PrescriptionSpec,
        /// Perimeter weight of the warped functional.
        #[arg(long)]
        u_field: Option<WeightSpec>,
        #[arg(long, default_value = "rows:1")]
        anchor: AnchorSpec,
        #[arg(long, default_value = "affine")]
        map: MapSpec,
        #[arg(long, value_enum, default_value_t = StencilArg::Crofton)]
        stencil: StencilArg,
        #[arg(long)]
        oracle: Option<OracleKind>,
        /// Also write plot data, optionally to the given path.
        #[arg(long, num_args = 0..=1)]
        plot: Option<Option<PathBuf>>,
    },
    /// Stability spectrum of a closed curve.
    Spectrum {
        /// CSV with `length,potential` columns.
        #[arg(long, conflicts_with = "uniform")]
        curve: Option<PathBuf>,
        /// Number of vertices of a uniform curve.
        #[arg(long)]
        uniform: Option<usize>,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        circumference: f64,
        #[arg(long, default_value = "const:0", allow_hyphen_values = true)]
        potential: PotentialSpec,
        /// Absolute verdict tolerance; relative to the operator norm if unset.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Runs the built-in verification suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 16)]
        max_cells: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Model { .. } => "model",
            Command::Width { .. } => "width",
            Command::Sweep { .. } => "sweep",
            Command::Compare { .. } => "compare",
            Command::Bubble { .. } => "bubble",
            Command::Spectrum { .. } => "spectrum",
            Command::Verify { .. } => "verify",
        }
    }

    /// Destination given explicitly for a side table, if any.
    pub fn side_destination(&self) -> Option<&Path> {
        match self {
            Command::Model {
                emit_profile: Some(Some(p)),
                ..
            }
            | Command::Width {
                emit_profile: Some(Some(p)),
                ..
            }
            | Command::Bubble {
                plot: Some(Some(p)), ..
            } => Some(p),
            _ => None,
        }
    }
}

fn dispatch(command: &Command, config: &Config) -> Result<Outcome> {
    let tol = &config.tolerances;
    match command {
        Command::Model {
            family,
            n,
            l_minus,
            l_plus,
            samples,
            emit_profile,
        } => commands::model(*family, *n, *l_minus, *l_plus, *samples, emit_profile.clone(), tol),
        Command::Width {
            n,
            sigma,
            h_minus,
            h_plus,
            samples,
            horizon,
            emit_profile,
        } => {
            let p = ComparisonProblem::new(*n, *sigma, *h_minus, *h_plus)?;
            commands::width(p, *samples, *horizon, emit_profile.clone(), tol)
        }
        Command::Sweep {
            n,
            sigma,
            h_minus,
            h_plus,
            jobs,
        } => {
            let base = config.sweep.clone();
            let missing = |what: &str| CliError::Argument(format!("sweep needs --{what} or a [sweep] config section"));
            let spec = SweepSpec {
                n: if n.is_empty() {
                    base.as_ref().map(|b| b.n.clone()).ok_or_else(|| missing("n"))?
                } else {
                    n.clone()
                },
                sigma: sigma
                    .or(base.as_ref().map(|b| b.sigma))
                    .ok_or_else(|| missing("sigma"))?,
                h_minus: h_minus
                    .or(base.as_ref().map(|b| b.h_minus))
                    .ok_or_else(|| missing("h-minus"))?,
                h_plus: h_plus
                    .or(base.as_ref().map(|b| b.h_plus))
                    .ok_or_else(|| missing("h-plus"))?,
            };
            commands::sweep(spec, *jobs)
        }
        Command::Compare { first, second } => commands::compare(first, second),
        Command::Bubble {
            band,
            h,
            u_field,
            anchor,
            map,
            stencil,
            oracle,
            plot,
        } => {
            let args = BubbleArgs {
                band: band.clone(),
                h: h.clone(),
                u_field: *u_field,
                anchor: *anchor,
                map: *map,
                stencil: match stencil {
                    StencilArg::Crofton => Stencil::Crofton,
                    StencilArg::Axis => Stencil::Axis,
                },
                oracle: *oracle,
                plot: plot.clone(),
            };
            commands::bubble(&args, tol)
        }
        Command::Spectrum {
            curve,
            uniform,
            circumference,
            potential,
            tol: vt,
        } => {
            let source = match (curve, uniform) {
                (Some(path), _) => CurveSource::File(path.clone()),
                (None, Some(m)) => CurveSource::Uniform {
                    vertices: *m,
                    circumference: *circumference,
                    potential: *potential,
                },
                (None, None) => return Err(CliError::Argument("spectrum needs --curve or --uniform".into())),
            };
            commands::spectrum(&source, *vt, tol.spectral_relative)
        }
        Command::Verify { suite, max_cells, seed } => commands::verify(
            *suite,
            VerifyOptions {
                max_cells: *max_cells,
                seed: *seed,
            },
            tol,
        ),
    }
}

fn side_path(global: &GlobalArgs, command: &str, kind: &str, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(dir) = &global.out_dir {
        return dir.join(format!("{command}_{kind}.csv"));
    }
    if let Some(out) = &global.out {
        let stem = out
            .file_stem()
            .map_or_else(|| command.into(), |s| s.to_string_lossy().into_owned());
        return out.with_file_name(format!("{stem}_{kind}.csv"));
    }
    PathBuf::from(format!("{command}_{kind}.csv"))
}

/// Runs a parsed command line. `argv` is echoed in the report envelope.
pub fn run(cli: &Cli, argv: &[String]) -> Result<()> {
    let global = &cli.global;
    let config = match &global.config {
        Some(path) => Config::read(path)?,
        None => Config::default(),
    };
    config.tolerances.validate()?;
    if let Some(dir) = &global.out_dir {
        ensure_dir(dir)?;
    }
    for path in global.out.as_deref().into_iter().chain(cli.command.side_destination()) {
        ensure_parent(path)?;
    }
    let name = cli.command.name();
    let started = Instant::now();
    let outcome = dispatch(&cli.command, &config)?;

    let text = match global.format {
        Format::Json => {
            let mut env = Envelope::new(argv, config.tolerances, &outcome.warnings, &outcome.payload);
            env.wall_clock_seconds = started.elapsed().as_secs_f64();
            env.to_json()?
        }
        Format::Csv => outcome.csv.clone(),
    };
    let ext = match global.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let main = global
        .out
        .clone()
        .or_else(|| global.out_dir.as_ref().map(|d| d.join(format!("{name}.{ext}"))));
    match main {
        Some(path) => write_atomic(&path, text.as_bytes())?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("writing standard output", e))?,
    }
    for side in &outcome.side {
        let path = side_path(global, name, side.kind, side.path.as_deref());
        ensure_parent(&path)?;
        write_atomic(&path, side.contents.as_bytes())?;
    }
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(outcome.failures.join("; ")))
    }
}
