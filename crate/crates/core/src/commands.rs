//! Command-line interface: argument parsing, config overrides, dispatch to
//! the model and audit routines, and output with a run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::audit::{
    self, contraction_profile, horseshoe_contrast, horseshoe_scan, log_grid, periodic_orbit_search,
    stability_sample, HorseshoeOptions, ScanOptions, SearchOptions, StabilityOptions, WallRect,
};
use crate::config::{self, ConfigError, PrecisionKind, RawConfig, RunConfig};
use crate::error::ModelError;
use crate::geometry::{local_map, time_of_flight, WallPoint};
use crate::itinerary::ItineraryPath;
use crate::record;
use crate::records::{emit_records, json_text, sha256_hex, to_record, Format, Record, RecordError, RunManifest};
use crate::suspension::{passage_horizon, suspend_orbit, SampleState, SectionEvent};
use crate::switching::{
    crossing_residual, find_crossings, realize_path, verify_follows, RealizeMode, RealizeOptions, Segment,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 2 config error, 3 precision exhausted, 4 hypothesis
    /// violation, 5 runtime model error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(ConfigError::Hypothesis(_)) => 4,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Model(ModelError::PrecisionExhausted { .. }) => 3,
            CliError::Model(ModelError::HypothesisViolation(_)) => 4,
            CliError::Model(_) | CliError::Record(_) | CliError::Io(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Hypothesis(_)) => "hypothesis_violation",
            CliError::Config(_) => "config_error",
            CliError::Usage(_) => "usage_error",
            CliError::Model(ModelError::PrecisionExhausted { .. }) => "precision_exhausted",
            CliError::Model(ModelError::HypothesisViolation(_)) => "hypothesis_violation",
            CliError::Model(_) => "model_error",
            CliError::Record(_) => "internal_error",
            CliError::Io(_) => "io_error",
        }
    }

    /// Machine-readable error object.
    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "hswitch", version, about = "Switching and stability near a symmetric homoclinic network")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Output options and config overrides; flags win over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Config file (TOML); defaults to the file named by HSWITCH_CONFIG.
    #[arg(long, global = true, env = config::CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "jsonl")]
    pub format: Format,
    /// Write records here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json` when `--out` is set.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub e: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Acknowledge a run with C <= E.
    #[arg(long, global = true)]
    pub contrast: bool,
    /// Transition matrix as `a11,a12,a21,a22`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub r_max: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `binary64` or `extended`.
    #[arg(long, global = true)]
    pub precision: Option<String>,
    #[arg(long, global = true)]
    pub bits: Option<usize>,
    #[arg(long, global = true)]
    pub tube_radius: Option<f64>,
    #[arg(long, global = true)]
    pub window: Option<f64>,
    #[arg(long, global = true)]
    pub network_radius: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Local map and return map of one wall point.
    Map {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// Zeros of `y o R o beta` along the seed segment.
    Crossings {
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Witness for a finite symbolic path.
    Realize {
        #[arg(long)]
        path: ItineraryPath,
        #[arg(long, default_value = "nested")]
        mode: RealizeMode,
        /// Use the rank-th matching ring at depth 1 (0 = outermost).
        #[arg(long, default_value_t = 0)]
        rank: usize,
        #[command(flatten)]
        seed: SeedArgs,
    },
    /// Orbit of the return map with symbols, one record per return.
    Itinerary {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 50)]
        n: usize,
    },
    /// Continuous-time samples (or section events) of an orbit.
    Suspend {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        /// Emit section crossings instead of samples.
        #[arg(long)]
        events: bool,
    },
    /// Check that a suspended trajectory follows a path.
    VerifyFollows {
        #[arg(long)]
        path: ItineraryPath,
        /// Start point; when absent the witness of `--witness-path` is used.
        #[arg(long, allow_hyphen_values = true, requires = "y")]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "x")]
        y: Option<f64>,
        /// Path whose witness is suspended (defaults to `--path`).
        #[arg(long)]
        witness_path: Option<ItineraryPath>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Attraction statistics for random starts, one record per orbit.
    AuditStability {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.0)]
        y_min: f64,
        #[arg(long, default_value_t = 0.5)]
        y_max: f64,
        #[arg(long, default_value_t = 64)]
        max_returns: usize,
        #[arg(long, default_value_t = 1e-12)]
        threshold: f64,
    },
    /// Derivative norms against height, one record per height.
    AuditContraction {
        #[arg(long, default_value_t = 1e-8)]
        y_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        y_max: f64,
        #[arg(long, default_value_t = 25)]
        count: usize,
    },
    /// Periodic points of the return map, one record per orbit.
    PeriodicSearch {
        #[arg(long, default_value_t = 4)]
        max_period: usize,
        #[arg(long, default_value_t = 1e-6)]
        y_floor: f64,
        #[arg(long, default_value_t = 512)]
        x_points: usize,
        #[arg(long, default_value_t = 256)]
        y_points: usize,
    },
    /// Attractors for split connections, one record per splitting value.
    Attractors {
        #[arg(long = "mus", value_delimiter = ',', allow_hyphen_values = true, default_value = "0.001,0.01")]
        mus: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        starts: usize,
        #[arg(long, default_value_t = 0.5)]
        y_min: f64,
        #[arg(long, default_value_t = 0.95)]
        y_max: f64,
    },
    /// Double-crossing test on one rectangle, or on a scan when no
    /// rectangle is given.
    ContrastHorseshoe {
        #[arg(long, allow_hyphen_values = true, requires_all = ["width", "y0", "y1"])]
        x0: Option<f64>,
        #[arg(long)]
        width: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y1: Option<f64>,
        #[arg(long, default_value_t = 8192)]
        samples: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Map { .. } => "map",
            Command::Crossings { .. } => "crossings",
            Command::Realize { .. } => "realize",
            Command::Itinerary { .. } => "itinerary",
            Command::Suspend { .. } => "suspend",
            Command::VerifyFollows { .. } => "verify-follows",
            Command::AuditStability { .. } => "audit-stability",
            Command::AuditContraction { .. } => "audit-contraction",
            Command::PeriodicSearch { .. } => "periodic-search",
            Command::Attractors { .. } => "attractors",
            Command::ContrastHorseshoe { .. } => "contrast-horseshoe",
        }
    }
}

/// Vertical seed segment `beta(s) = (x0, s y0)`.
#[derive(Debug, Clone, Copy, Args)]
pub struct SeedArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub y0: f64,
}

impl SeedArgs {
    fn segment(&self) -> Result<Segment, CliError> {
        Ok(Segment::vertical(self.x0, self.y0)?)
    }
}

/// Records plus the aggregate written into the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub records: Vec<Record>,
    pub summary: Value,
}

fn parse_matrix(s: &str) -> Result<[[f64; 2]; 2], ConfigError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| ConfigError::Field { key: "transition.a".into(), message: e.to_string() })?;
    match v.as_slice() {
        [a, b, c, d] => Ok([[*a, *b], [*c, *d]]),
        _ => Err(ConfigError::Field { key: "transition.a".into(), message: "expected four entries".into() }),
    }
}

/// Reads the config file (if any) and applies the flag overrides.
pub fn resolve_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut raw = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            config::parse_raw(&text)?
        }
        None => RawConfig::default(),
    };
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut raw.spectrum.c, g.c);
    set(&mut raw.spectrum.e, g.e);
    set(&mut raw.spectrum.alpha, g.alpha);
    raw.spectrum.contrast |= g.contrast;
    if let Some(a) = &g.a {
        raw.transition.a = parse_matrix(a)?;
    }
    set(&mut raw.transition.mu, g.mu);
    set(&mut raw.transition.tau, g.tau);
    set(&mut raw.transition.r_max, g.r_max);
    if let Some(s) = g.seed {
        raw.run.seed = s;
    }
    if let Some(p) = &g.precision {
        raw.run.precision = match p.as_str() {
            "binary64" => PrecisionKind::Binary64,
            "extended" => PrecisionKind::Extended,
            other => {
                return Err(ConfigError::Field {
                    key: "run.precision".into(),
                    message: format!("unknown precision {other:?} (binary64, extended)"),
                }
                .into())
            }
        };
    }
    if let Some(b) = g.bits {
        raw.run.bits = b;
    }
    set(&mut raw.neighbourhoods.tube_radius, g.tube_radius);
    set(&mut raw.neighbourhoods.window, g.window);
    set(&mut raw.neighbourhoods.network_radius, g.network_radius);
    Ok(config::validate(raw)?)
}

fn wall(x: f64, y: f64) -> Result<WallPoint, CliError> {
    Ok(WallPoint::new(x, y)?)
}

fn realize_opts(cfg: &RunConfig, rank: usize) -> RealizeOptions {
    RealizeOptions { precision: cfg.precision, ring_rank: rank, tol: cfg.tolerances }
}

/// Runs one command against a validated configuration.
pub fn run_command(cmd: &Command, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let model = &cfg.model;
    let out = |records: Vec<Record>, summary: Value| Ok(CommandOutput { records, summary });
    match cmd {
        Command::Map { x, y } => {
            let w = wall(*x, *y)?;
            let cap = local_map(&w, &model.spectrum)?;
            let tof = time_of_flight(&w, &model.spectrum)?;
            let (img, sym) = model.return_map(&w)?;
            let r = record! {
                "x" => w.x, "y" => w.y,
                "r" => cap.r, "phi" => cap.phi, "cap" => cap.cap, "flight_time" => tof,
                "symbol" => sym, "return_x" => img.x, "return_y" => img.y,
            };
            out(vec![r], Value::Null)
        }
        Command::Crossings { k, seed } => {
            let seg = seed.segment()?;
            let zs = find_crossings(&seg, *k, model, &cfg.tolerances)?;
            let records = zs
                .iter()
                .enumerate()
                .map(|(i, &a)| record! { "k" => i + 1, "a_k" => a, "residual" => crossing_residual(&seg, a, model) })
                .collect();
            out(records, json!({ "found": zs.len() }))
        }
        Command::Realize { path, mode, rank, seed } => {
            let seg = Arc::new(seed.segment()?);
            let r = realize_path(path, seg, *mode, model, &realize_opts(cfg, *rank))?;
            let rec = record! {
                "path" => path.to_string(),
                "mode" => r.mode,
                "precision" => r.precision.label(),
                "realized" => r.witness_symbols.to_string(),
                "witness_x" => r.witness.x,
                "witness_y" => r.witness.y,
                "witness_ln_abs_y" => r.witness_ln_abs_y,
                "seed_parameter" => r.seed_parameter,
                "widths" => r.widths.clone(),
                "revolutions" => r.revolution_counts(),
            };
            out(vec![rec], json!({ "verified": r.verified(), "admissible": r.admissible }))
        }
        Command::Itinerary { x, y, n } => {
            let w = wall(*x, *y)?;
            let rec = model.iterate(&w, *n, &cfg.stop);
            let term = rec.termination.label();
            let records = rec
                .steps
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    record! {
                        "step" => i, "x" => s.point.x, "y" => s.point.y, "ln_abs_y" => s.ln_abs_y,
                        "symbol" => s.symbol, "flight_time" => s.flight_time,
                        "revolutions" => s.revolutions, "termination" => term,
                    }
                })
                .collect();
            out(records, json!({ "symbols": rec.symbols().to_string(), "termination": rec.termination }))
        }
        Command::Suspend { x, y, horizon, dt, events } => {
            let w = wall(*x, *y)?;
            let traj = suspend_orbit(&w, *horizon, *dt, model)?;
            let records = if *events {
                traj.events.iter().map(event_record).collect()
            } else {
                traj.samples.iter().map(|s| sample_record(s.t, &s.state)).collect()
            };
            out(records, json!({ "events": traj.events.len(), "tubes": traj.tubes.len() }))
        }
        Command::VerifyFollows { path, x, y, witness_path, horizon } => {
            let w = match (x, y) {
                (Some(x), Some(y)) => wall(*x, *y)?,
                _ => {
                    let wp = witness_path.as_ref().unwrap_or(path);
                    if wp.is_empty() {
                        return Err(CliError::Usage("an empty path needs --x and --y".into()));
                    }
                    let seg = Arc::new(Segment::default());
                    realize_path(wp, seg, RealizeMode::Nested, model, &realize_opts(cfg, 0))?.witness
                }
            };
            let h = match horizon {
                Some(h) => *h,
                None => passage_horizon(&w, path.order(), model)?,
            };
            let traj = suspend_orbit(&w, h, 0.0, model)?;
            let rep = verify_follows(&traj, path, &cfg.neighbourhoods())?;
            let (vj, reason) = match &rep.violation {
                Some(v) => (Some(v.j), Some(v.reason.clone())),
                None => (None, None),
            };
            let rec = record! {
                "path" => path.to_string(), "x" => w.x, "y" => w.y, "follows" => rep.follows,
                "t_values" => rep.t_values, "z_values" => rep.z_values,
                "violation_j" => vj, "violation_reason" => reason,
            };
            out(vec![rec], Value::Null)
        }
        Command::AuditStability { samples, y_min, y_max, max_returns, threshold } => {
            let opts = StabilityOptions {
                samples: *samples,
                y_min: *y_min,
                y_max: *y_max,
                seed: cfg.seed(),
                max_returns: *max_returns,
                threshold: *threshold,
            };
            let rep = stability_sample(model, &opts)?;
            let records = rep.orbits.iter().map(to_record).collect::<Result<_, _>>()?;
            let mut summary = serde_json::to_value(&rep).unwrap_or(Value::Null);
            if let Value::Object(m) = &mut summary {
                m.remove("orbits");
            }
            out(records, summary)
        }
        Command::AuditContraction { y_min, y_max, count } => {
            let prof = contraction_profile(&log_grid(*y_min, *y_max, *count), model)?;
            let records = prof.rows.iter().map(to_record).collect::<Result<_, _>>()?;
            out(
                records,
                json!({
                    "slope": prof.slope, "expected_slope": prof.expected_slope,
                    "slope_ok": prof.slope_ok, "max_mirror_deviation": prof.max_mirror_deviation,
                }),
            )
        }
        Command::PeriodicSearch { max_period, y_floor, x_points, y_points } => {
            let opts = SearchOptions {
                max_period: *max_period,
                y_floor: *y_floor,
                x_points: *x_points,
                y_points: *y_points,
                ..Default::default()
            };
            let rep = periodic_orbit_search(model, &opts)?;
            let records = rep
                .orbits
                .iter()
                .zip(&rep.partners)
                .map(|(o, partner)| {
                    record! {
                        "period" => o.period, "word" => o.word.to_string(),
                        "x" => o.points[0].x, "y" => o.points[0].y, "amplitude" => o.amplitude,
                        "multiplier_1" => o.multipliers[0].modulus, "multiplier_2" => o.multipliers[1].modulus,
                        "kind" => o.kind, "residual" => o.residual, "partner" => partner,
                    }
                })
                .collect();
            out(
                records,
                json!({
                    "orbits": rep.orbits.len(), "seeds": rep.seeds, "discarded": rep.discarded,
                    "symmetric": rep.symmetric, "max_multiplier": rep.max_multiplier(),
                    "saddles": rep.count(audit::OrbitKind::Saddle),
                }),
            )
        }
        Command::Attractors { mus, starts, y_min, y_max } => {
            let opts = ScanOptions {
                starts: *starts,
                seed: cfg.seed(),
                y_min: *y_min,
                y_max: *y_max,
                ..Default::default()
            };
            let scan = audit::attractor_scan(mus, model, &opts)?;
            let records = scan
                .iter()
                .map(|e| {
                    let words: Vec<String> = e
                        .report
                        .orbits
                        .iter()
                        .filter(|o| o.kind == audit::OrbitKind::Attracting)
                        .map(|o| o.word.to_string())
                        .collect();
                    record! {
                        "mu" => e.mu, "degenerate" => e.degenerate, "attractor_count" => e.attractor_count,
                        "words" => words.join(";"), "amplitude" => e.amplitude, "symmetric" => e.report.symmetric,
                        "converged" => e.converged, "max_transient_switches" => e.max_transient_switches,
                        "fraction_three_switches" => e.fraction_three_switches,
                        "longest_transient" => e.longest_transient.as_ref().map(|t| t.itinerary.to_string()),
                    }
                })
                .collect();
            out(records, Value::Null)
        }
        Command::ContrastHorseshoe { x0, width, y0, y1, samples } => {
            let opts = HorseshoeOptions { samples_per_path: *samples, ..Default::default() };
            let reports = match (x0, width, y0, y1) {
                (Some(x0), Some(w), Some(a), Some(b)) => {
                    vec![horseshoe_contrast(&WallRect::new(*x0, *w, *a, *b)?, model, &opts)?]
                }
                _ => horseshoe_scan(model, &opts)?,
            };
            let any = reports.iter().any(|r| r.double_crossing);
            let records = reports
                .iter()
                .map(|r| {
                    record! {
                        "x0" => r.rect.x0, "width" => r.rect.width, "y0" => r.rect.y0, "y1" => r.rect.y1,
                        "min_count" => r.min_count, "max_count" => r.max_count(),
                        "double_crossing" => r.double_crossing, "contrast" => r.contrast,
                    }
                })
                .collect();
            out(records, json!({ "rectangles": reports.len(), "any_double_crossing": any }))
        }
    }
}

fn sample_record(t: f64, s: &SampleState) -> Record {
    let none = Value::Null;
    match *s {
        SampleState::Block { rho, theta, z } => record! {
            "t" => t, "region" => "block", "rho" => rho, "theta" => theta, "z" => z,
            "connection" => none.clone(), "phase" => none.clone(), "offset" => none,
        },
        SampleState::Tube { connection, phase, offset } => record! {
            "t" => t, "region" => "tube", "rho" => none.clone(), "theta" => none.clone(), "z" => none,
            "connection" => connection, "phase" => phase, "offset" => offset,
        },
    }
}

fn event_record(e: &SectionEvent) -> Record {
    let none = Value::Null;
    match *e {
        SectionEvent::SigmaIn { t, x, ln_abs_y, symbol } => record! {
            "t" => t, "event" => "sigma_in", "x" => x, "ln_abs_y" => ln_abs_y, "symbol" => symbol,
            "r" => none.clone(), "phi" => none.clone(), "cap" => none,
        },
        SectionEvent::SigmaOut { t, r, phi, cap } => record! {
            "t" => t, "event" => "sigma_out", "x" => none.clone(), "ln_abs_y" => none.clone(),
            "symbol" => none, "r" => r, "phi" => phi, "cap" => cap,
        },
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Builds the manifest for a finished run.
pub fn manifest(
    cmd: &Command,
    args: &[String],
    cfg: &RunConfig,
    format: Format,
    outputs: BTreeMap<String, String>,
    summary: Value,
) -> RunManifest {
    let config = serde_json::to_value(cfg.raw).unwrap_or(Value::Null);
    RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        command: cmd.name().to_string(),
        arguments: args.to_vec(),
        precision: cfg.precision.label(),
        format,
        input_digest: sha256_hex(json_text(&config).as_bytes()),
        config,
        output_digests: outputs,
        summary,
    }
}

/// Parses, runs and writes; returns the records as bytes.
pub fn execute(cli: &Cli, args: &[String]) -> Result<Vec<u8>, CliError> {
    let cfg = resolve_config(&cli.global)?;
    let output = run_command(&cli.command, &cfg)?;
    let bytes = emit_records(&output.records, cli.global.format)?;
    let name = match &cli.global.out {
        Some(p) => {
            write_file(p, &bytes)?;
            p.display().to_string()
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::Io(e.to_string()))?;
            "stdout".to_string()
        }
    };
    let manifest_path = cli.global.manifest.clone().or_else(|| {
        cli.global.out.as_ref().map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    if let Some(mp) = manifest_path {
        let outputs = BTreeMap::from([(name, sha256_hex(&bytes))]);
        let m = manifest(&cli.command, args, &cfg, cli.global.format, outputs, output.summary);
        write_file(&mp, m.to_json().as_bytes())?;
    }
    Ok(bytes)
}

/// Entry point used by the binary.
pub fn main_entry() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&args);
    match execute(&cli, &args[1..]) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
