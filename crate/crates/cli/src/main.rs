use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use classtab_core::construct::{stable_set, HField};
use classtab_core::distance::{distance_profile, DistanceSpec, MeasureConfig};
use classtab_core::field::extend;
use classtab_core::nn::{default_compact, train_narrow_deep, train_shallow, verify, TrainConfig};
use classtab_core::reproduce::{reproduce, ReproduceConfig};
use classtab_core::stability::{
    ball_stability_closed_form, class_stability, cube_stability_closed_form, matched_radius, volume_matched_ratio,
    Integrator,
};
use classtab_core::{load_field, Activation, BoundaryMode, Mode, Network, NormP};

#[derive(Parser)]
#[command(name = "classtab", version, about = "Distance to the decision boundary and class stability")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout (`train`: the network file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Distance to the decision boundary at given points.
    Dist {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        points: PointArgs,
        #[command(flatten)]
        measure: MeasureArgs,
    },
    /// Class stability over the field's domain.
    Stability {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// mc or grid.
        #[arg(long, default_value = "mc")]
        integrator: Integrator,
    },
    /// Closed-form cube and ball stabilities and their volume-matched ratio.
    Tables {
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        /// Cube half width.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
    /// The vector field H at given points.
    Hfield {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Grid points at distance more than eps from the boundary.
    Stableset {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
    },
    /// Trains a network approximating H and verifies it.
    Train {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Build a narrow deep network of width d+q+2 instead.
        #[arg(long)]
        deep: bool,
        #[arg(long, default_value_t = 256)]
        max_depth: usize,
    },
    /// Verifies a saved network against H.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Spacing of the verification grid.
        #[arg(long, default_value_t = 0.0025)]
        spacing: f64,
    },
    /// Runs the reference table.
    Reproduce {
        #[arg(long, default_value_t = 42, env = "CLASSTAB_SEED")]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 100_000)]
        lipschitz_pairs: usize,
        /// Skips the network training cases.
        #[arg(long)]
        skip_networks: bool,
    },
}

#[derive(Args)]
struct FieldArgs {
    /// Field file (CSV point cloud or grid) or catalog name.
    #[arg(long)]
    field: String,
    #[arg(long, default_value = "1")]
    p: NormP,
    #[arg(long, default_value = "interior")]
    boundary: BoundaryMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PointArgs {
    /// Comma separated coordinates; repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    point: Vec<String>,
    /// CSV file with one point per row and a header.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long, default_value = "pointwise")]
    mode: Mode,
    #[arg(long, default_value_t = 1e-3)]
    tau: f64,
    #[arg(long, default_value_t = 4096)]
    samples_per_radius: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value = "relu")]
    activation: Activation,
    /// Spacing of the training grid.
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    #[arg(long, default_value_t = 12)]
    lawson_iterations: usize,
    #[arg(long, default_value_t = 300)]
    refine_steps: usize,
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad coordinate {v:?}")))
        .collect()
}

fn read_points(args: &PointArgs) -> Result<Vec<Vec<f64>>> {
    let mut pts = args.point.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>>>()?;
    if let Some(path) = &args.points {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            pts.push(parse_point(line)?);
        }
    }
    if pts.is_empty() {
        bail!("no points given; use --point or --points");
    }
    Ok(pts)
}

fn spec(field: &FieldArgs, m: &MeasureArgs) -> DistanceSpec {
    let measure = MeasureConfig {
        samples_per_radius: m.samples_per_radius,
        tau: m.tau,
        seed: field.seed,
        ..MeasureConfig::default()
    };
    DistanceSpec {
        p: field.p,
        mode: m.mode,
        boundary: field.boundary,
        measure,
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Renders a list of flat records.
fn render(rows: &[Value], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let v = if rows.len() == 1 { rows[0].clone() } else { Value::Array(rows.to_vec()) };
            let mut s = serde_json::to_vec_pretty(&v)?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let mut keys: Vec<String> = Vec::new();
            for r in rows {
                if let Value::Object(m) = r {
                    for k in m.keys() {
                        if !keys.contains(k) {
                            keys.push(k.clone());
                        }
                    }
                }
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&keys)?;
            for r in rows {
                let rec: Vec<String> = keys.iter().map(|k| r.get(k).map(cell).unwrap_or_default()).collect();
                w.write_record(&rec)?;
            }
            Ok(w.into_inner()?)
        }
    }
}

fn emit(cli: &Cli, rows: &[Value]) -> Result<()> {
    let bytes = render(rows, cli.format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn with_point(x: &[f64], v: Value) -> Value {
    let mut m = Map::new();
    m.insert("point".into(), json!(x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")));
    if let Value::Object(rest) = v {
        m.extend(rest);
    }
    Value::Object(m)
}

fn train_config(field: &FieldArgs, t: &TrainArgs) -> TrainConfig {
    TrainConfig {
        epsilon: t.eps,
        p: field.p,
        boundary: field.boundary,
        activation: t.activation,
        width: t.width,
        train_resolution: t.resolution,
        lawson_iterations: t.lawson_iterations,
        refine_steps: t.refine_steps,
        seed: field.seed,
        ..TrainConfig::default()
    }
}

fn save_net(net: &Network, path: &Path) -> Result<()> {
    net.save(path).with_context(|| format!("writing {}", path.display()))
}

/// Returns whether every check passed.
fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Dist { field, points, measure } => {
            let f = extend(load_field(&field.field)?);
            let pts = read_points(points)?;
            let est = distance_profile(&f, &pts, &spec(field, measure))?;
            let rows: Vec<Value> = pts
                .iter()
                .zip(&est)
                .map(|(x, e)| Ok(with_point(x, serde_json::to_value(e)?)))
                .collect::<Result<_>>()?;
            emit(cli, &rows)?;
        }
        Command::Stability {
            field,
            measure,
            samples,
            integrator,
        } => {
            let f = extend(load_field(&field.field)?);
            let dom = f.domain().clone();
            let s = class_stability(&f, &dom, &spec(field, measure), *integrator, *samples, field.seed)?;
            emit(cli, &[serde_json::to_value(s)?])?;
        }
        Command::Tables { max_n, a } => {
            let mut prev = 0.0;
            let mut rows = Vec::new();
            for n in 1..=*max_n {
                let ratio = volume_matched_ratio(n);
                let r = matched_radius(n, *a);
                rows.push(json!({
                    "n": n,
                    "cube": cube_stability_closed_form(n, *a),
                    "matched_radius": r,
                    "ball": ball_stability_closed_form(n, r),
                    "ratio": ratio,
                    "monotone": ratio > prev,
                }));
                prev = ratio;
            }
            emit(cli, &rows)?;
        }
        Command::Hfield { field, points } => {
            let h = HField::new(extend(load_field(&field.field)?), field.p, field.boundary);
            let slots: Vec<String> = h.slots().iter().map(|s| s.to_string()).collect();
            let rows = read_points(points)?
                .iter()
                .map(|x| {
                    let v = h.evaluate(x)?;
                    Ok(with_point(
                        x,
                        json!({
                            "h": v.vector,
                            "slots": slots,
                            "label": v.label.to_string(),
                            "slot": v.slot,
                            "error_bound": v.error_bound,
                        }),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            emit(cli, &rows)?;
        }
        Command::Stableset { field, eps, resolution } => {
            let f = extend(load_field(&field.field)?);
            let s = stable_set(&f, *eps, field.p, field.boundary, *resolution)?;
            match cli.format {
                Format::Json => emit(cli, &[serde_json::to_value(&s)?])?,
                Format::Csv => {
                    let rows: Vec<Value> = s
                        .members
                        .iter()
                        .map(|x| {
                            let m: Map<String, Value> =
                                x.iter().enumerate().map(|(k, v)| (format!("x_{}", k + 1), json!(v))).collect();
                            Value::Object(m)
                        })
                        .collect();
                    emit(cli, &rows)?;
                }
            }
        }
        Command::Train {
            field,
            train,
            deep,
            max_depth,
        } => {
            let f = extend(load_field(&field.field)?);
            let cfg = train_config(field, train);
            let k = default_compact(&f, cfg.epsilon, cfg.boundary)?;
            let (net, report) = if *deep {
                let (d, r) = train_narrow_deep(&f, &k, &cfg, *max_depth)?;
                (d.network, r)
            } else {
                train_shallow(&f, &k, &cfg)?
            };
            // --out names the network file here; the report goes to stdout
            if let Some(path) = &cli.out {
                save_net(&net, path)?;
            }
            let bytes = render(&[serde_json::to_value(&report)?], cli.format)?;
            std::io::stdout().write_all(&bytes)?;
            return Ok(report.passed);
        }
        Command::Verify {
            field,
            net,
            eps,
            spacing,
        } => {
            let f = extend(load_field(&field.field)?);
            let network = Network::load(net).with_context(|| format!("reading {}", net.display()))?;
            let k = default_compact(&f, *eps, field.boundary)?;
            let h = HField::new(f, field.p, field.boundary);
            let report = if network.depth() == 1 {
                verify(&network, None, &h, &k, *eps, *spacing)?
            } else {
                bail!("verification of deep networks needs their shallow source; verify the source network")
            };
            emit(cli, &[serde_json::to_value(&report)?])?;
            return Ok(report.passed && report.interpolation_fraction == 1.0);
        }
        Command::Reproduce {
            seed,
            samples,
            lipschitz_pairs,
            skip_networks,
        } => {
            let cfg = ReproduceConfig {
                seed: *seed,
                samples: *samples,
                lipschitz_pairs: *lipschitz_pairs,
                networks: !skip_networks,
                ..ReproduceConfig::default()
            };
            let report = reproduce(&cfg)?;
            match &cli.out {
                Some(path) => report.write(path)?,
                None => match cli.format {
                    Format::Json => println!("{}", report.to_json()?),
                    Format::Csv => report.write_csv(std::io::stdout())?,
                },
            }
            let failures = report.failures();
            if !failures.is_empty() {
                eprintln!("failing cases: {}", failures.join(", "));
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("CLASSTAB_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            _ => {
                eprintln!("error: CLASSTAB_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
