//! Command-line front end. Every subcommand loads documents, calls one
//! library operation and prints or stores the result.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain or numeric error (the
//! error name goes to stderr), 3 verification failure.

pub mod docs;
pub mod json;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{GyroError, Result};
use crate::grassmann::{
    gr_add, gr_gyr, gr_gyrodistance, gr_inverse, onb_add, onb_gyr, onb_inverse, principal_angle_distance, tau,
};
use crate::kgc::{KgcModel, KgcModelDocument};
use crate::spd_gyro::{spd_add, spd_gyr, spd_gyroangle, spd_gyrodistance, spd_inverse, spd_scale, SpdMetric};
use crate::spd_mlr::{blockdiag_dist, demo_fit, plane_dist, DemoConfig};
use crate::verify::{run_suite, Dim, SuiteConfig, SuiteId};

use docs::{load_document, load_matrix, store_document, BlocksDocument, MatrixDocument, MlrModelDocument, PlaneDocument};
use json::{fmt_f64, to_document_string};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gyromat", version, about = "Gyrovector-space operations on SPD and Grassmann manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Operations on SPD matrices.
    #[command(subcommand)]
    Spd(SpdCommand),
    /// Operations on the Grassmann manifold.
    #[command(subcommand)]
    Gr(GrCommand),
    /// Knowledge-graph scoring.
    #[command(subcommand)]
    Kgc(KgcCommand),
    /// Runs a verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Le,
    Lc,
    Ai,
}

impl From<MetricArg> for SpdMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Le => SpdMetric::Le,
            MetricArg::Lc => SpdMetric::Lc,
            MetricArg::Ai => SpdMetric::Ai,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Perspective {
    Proj,
    Onb,
}

#[derive(Debug, Args)]
struct Metric {
    #[arg(long, value_enum)]
    metric: MetricArg,
}

#[derive(Debug, Args)]
struct Output {
    /// Write the result document here instead of stdout.
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SpdCommand {
    /// A ⊕ B
    Add {
        #[command(flatten)]
        metric: Metric,
        #[arg(short = 'A')]
        a: PathBuf,
        #[arg(short = 'B')]
        b: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// ⊖A
    Inv {
        #[command(flatten)]
        metric: Metric,
        #[arg(short = 'A')]
        a: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// t ⊗ A
    Scale {
        #[command(flatten)]
        metric: Metric,
        #[arg(short = 't', allow_hyphen_values = true)]
        t: f64,
        #[arg(short = 'A')]
        a: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// gyr[A, B]C
    Gyr {
        #[command(flatten)]
        metric: Metric,
        #[arg(short = 'A')]
        a: PathBuf,
        #[arg(short = 'B')]
        b: PathBuf,
        #[arg(short = 'C')]
        c: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Gyrodistance between A and B.
    Dist {
        #[command(flatten)]
        metric: Metric,
        #[arg(short = 'A')]
        a: PathBuf,
        #[arg(short = 'B')]
        b: PathBuf,
    },
    /// Gyroangle at vertex A of the triangle ABC.
    Angle {
        #[command(flatten)]
        metric: Metric,
        #[arg(short = 'A')]
        a: PathBuf,
        #[arg(short = 'B')]
        b: PathBuf,
        #[arg(short = 'C')]
        c: PathBuf,
    },
    /// Distance from a point to a hypergyroplane.
    MlrDist {
        /// Plane document; one plane per block with --blocks.
        #[arg(long)]
        plane: PathBuf,
        /// An spd document, or a blocks document with --blocks.
        #[arg(short = 'X')]
        x: PathBuf,
        #[arg(long)]
        blocks: bool,
    },
    /// Fits MLR on synthetic SPD clusters and prints a summary per metric.
    MlrFit(MlrFitArgs),
}

#[derive(Debug, Args)]
struct MlrFitArgs {
    /// Train on generated clusters (the only data source).
    #[arg(long)]
    demo: bool,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 300)]
    samples: usize,
    #[arg(long, default_value_t = 0.15)]
    noise: f64,
    #[arg(long, default_value_t = 150)]
    epochs: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "le,lc,ai")]
    metrics: Vec<MetricArg>,
    /// Write the fitted model document (needs a single metric).
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GrPerspective {
    #[arg(long, value_enum)]
    perspective: Perspective,
}

#[derive(Debug, Subcommand)]
enum GrCommand {
    /// A ⊕ B
    Add {
        #[command(flatten)]
        perspective: GrPerspective,
        #[arg(short = 'A')]
        a: PathBuf,
        #[arg(short = 'B')]
        b: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// ⊖A
    Inv {
        #[command(flatten)]
        perspective: GrPerspective,
        #[arg(short = 'A')]
        a: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// gyr[A, B]C
    Gyr {
        #[command(flatten)]
        perspective: GrPerspective,
        #[arg(short = 'A')]
        a: PathBuf,
        #[arg(short = 'B')]
        b: PathBuf,
        #[arg(short = 'C')]
        c: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Gyrodistance between A and B.
    Dist {
        #[command(flatten)]
        perspective: GrPerspective,
        #[arg(short = 'A')]
        a: PathBuf,
        #[arg(short = 'B')]
        b: PathBuf,
    },
    /// Principal-angle distance between two frames.
    Pangle {
        #[arg(short = 'U')]
        u: PathBuf,
        #[arg(short = 'V')]
        v: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum KgcCommand {
    /// Scores one triple of a model document.
    Score {
        #[arg(long)]
        model: PathBuf,
        /// Subject, relation and object, by name or index.
        #[arg(long)]
        triple: String,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: SuiteId,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated orders (N) or Grassmann shapes (NxP).
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<Dim>>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Write the report here; without it the report goes to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Domain(GyroError),
    Verify,
}

impl From<GyroError> for Failure {
    fn from(e: GyroError) -> Self {
        match e {
            GyroError::InvalidConfig(msg) => Failure::Usage(msg),
            other => Failure::Domain(other),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn emit<T: serde::Serialize>(doc: &T, out: &Output) -> Outcome {
    match &out.out {
        Some(path) => store_document(doc, path)?,
        None => print!("{}", to_document_string(doc)?),
    }
    Ok(())
}

fn scalar(x: f64) -> Outcome {
    println!("{}", fmt_f64(x));
    Ok(())
}

fn spd(path: &Path) -> Result<crate::matker::SpdMatrix> {
    load_matrix(path)?.to_spd()
}

fn run_spd(cmd: SpdCommand) -> Outcome {
    match cmd {
        SpdCommand::Add { metric, a, b, out } => {
            emit(&MatrixDocument::from_spd(&spd_add(metric.metric.into(), &spd(&a)?, &spd(&b)?)?), &out)
        }
        SpdCommand::Inv { metric, a, out } => {
            emit(&MatrixDocument::from_spd(&spd_inverse(metric.metric.into(), &spd(&a)?)?), &out)
        }
        SpdCommand::Scale { metric, t, a, out } => {
            emit(&MatrixDocument::from_spd(&spd_scale(metric.metric.into(), t, &spd(&a)?)?), &out)
        }
        SpdCommand::Gyr { metric, a, b, c, out } => emit(
            &MatrixDocument::from_spd(&spd_gyr(metric.metric.into(), &spd(&a)?, &spd(&b)?, &spd(&c)?)?),
            &out,
        ),
        SpdCommand::Dist { metric, a, b } => scalar(spd_gyrodistance(metric.metric.into(), &spd(&a)?, &spd(&b)?)?),
        SpdCommand::Angle { metric, a, b, c } => {
            scalar(spd_gyroangle(metric.metric.into(), &spd(&a)?, &spd(&b)?, &spd(&c)?)?)
        }
        SpdCommand::MlrDist { plane, x, blocks } => {
            let planes = load_document::<PlaneDocument>(&plane)?.to_planes()?;
            if blocks {
                let set = load_document::<BlocksDocument>(&x)?.to_set()?;
                scalar(blockdiag_dist(&planes, &set)?)
            } else {
                if planes.len() != 1 {
                    return Err(Failure::Usage(format!(
                        "plane document lists {} planes; use --blocks for block-diagonal points",
                        planes.len()
                    )));
                }
                scalar(plane_dist(&planes[0], &spd(&x)?)?)
            }
        }
        SpdCommand::MlrFit(args) => run_mlr_fit(args),
    }
}

fn run_mlr_fit(args: MlrFitArgs) -> Outcome {
    if !args.demo {
        return Err(Failure::Usage("mlr-fit only supports --demo".into()));
    }
    if args.model_out.is_some() && args.metrics.len() != 1 {
        return Err(Failure::Usage("--model-out needs exactly one metric".into()));
    }
    let cfg = DemoConfig {
        n: args.n,
        classes: args.classes,
        samples: args.samples,
        noise: args.noise,
        epochs: args.epochs,
        seed: args.seed,
    };
    let reports = args
        .metrics
        .iter()
        .map(|&m| {
            let metric: SpdMetric = m.into();
            demo_fit(&cfg, metric).map(|r| (metric, r))
        })
        .collect::<Result<Vec<_>>>()?;
    println!(
        "demo n={} classes={} samples={} noise={} epochs={} seed={}",
        cfg.n, cfg.classes, cfg.samples, cfg.noise, cfg.epochs, cfg.seed
    );
    for (metric, report) in &reports {
        println!(
            "metric={} accuracy={:.4} loss={:.6}->{:.6} epochs_run={}",
            metric,
            report.train_accuracy,
            report.initial_loss(),
            report.final_loss(),
            report.losses.len() - 1
        );
        if let Some(path) = &args.model_out {
            store_document(&MlrModelDocument::from_model(&report.model), path)?;
        }
    }
    Ok(())
}

fn run_gr(cmd: GrCommand) -> Outcome {
    let proj = |path: &Path| load_matrix(path)?.to_projector();
    let onb = |path: &Path| load_matrix(path)?.to_onb();
    match cmd {
        GrCommand::Add { perspective, a, b, out } => match perspective.perspective {
            Perspective::Proj => emit(&MatrixDocument::from_projector(&gr_add(&proj(&a)?, &proj(&b)?)?), &out),
            Perspective::Onb => emit(&MatrixDocument::from_onb(&onb_add(&onb(&a)?, &onb(&b)?)?), &out),
        },
        GrCommand::Inv { perspective, a, out } => match perspective.perspective {
            Perspective::Proj => emit(&MatrixDocument::from_projector(&gr_inverse(&proj(&a)?)?), &out),
            Perspective::Onb => emit(&MatrixDocument::from_onb(&onb_inverse(&onb(&a)?)?), &out),
        },
        GrCommand::Gyr { perspective, a, b, c, out } => match perspective.perspective {
            Perspective::Proj => {
                emit(&MatrixDocument::from_projector(&gr_gyr(&proj(&a)?, &proj(&b)?, &proj(&c)?)?), &out)
            }
            Perspective::Onb => emit(&MatrixDocument::from_onb(&onb_gyr(&onb(&a)?, &onb(&b)?, &onb(&c)?)?), &out),
        },
        GrCommand::Dist { perspective, a, b } => match perspective.perspective {
            Perspective::Proj => scalar(gr_gyrodistance(&proj(&a)?, &proj(&b)?)?),
            Perspective::Onb => scalar(gr_gyrodistance(&tau(&onb(&a)?), &tau(&onb(&b)?))?),
        },
        GrCommand::Pangle { u, v } => scalar(principal_angle_distance(&onb(&u)?, &onb(&v)?)?),
    }
}

fn run_kgc(cmd: KgcCommand) -> Outcome {
    match cmd {
        KgcCommand::Score { model, triple } => {
            let model = KgcModel::from_document(&load_document::<KgcModelDocument>(&model)?)?;
            let parts: Vec<&str> = triple.split(',').map(str::trim).collect();
            let [s, r, o] = parts[..] else {
                return Err(Failure::Usage(format!("--triple needs s,r,o, got {triple:?}")));
            };
            let lookup = |name: &str, by_name: Option<usize>| {
                by_name
                    .or_else(|| name.parse().ok())
                    .ok_or_else(|| Failure::Usage(format!("unknown name {name:?}")))
            };
            let s = lookup(s, model.entity_index(s))?;
            let r = lookup(r, model.relation_index(r))?;
            let o = lookup(o, model.entity_index(o))?;
            scalar(model.score(s, r, o)?)
        }
    }
}

fn run_verify(args: VerifyArgs) -> Outcome {
    let mut cfg = SuiteConfig::new(args.suite, args.trials, args.seed);
    cfg.tol = args.tol;
    if let Some(dims) = args.dims {
        cfg.dims = dims;
    }
    let report = run_suite(&cfg)?;
    let text = report.to_json();
    match &args.report {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| GyroError::Io(format!("{}: {e}", path.display())))?;
            for c in &report.checks {
                let worst = c.max_residual.map_or("null".to_string(), |r| format!("{r:.3e}"));
                println!("{} {} max_residual={} tol={:.1e}", if c.pass { "PASS" } else { "FAIL" }, c.name, worst, c.tol);
            }
            println!("{} {}", report.suite, if report.pass { "PASS" } else { "FAIL" });
        }
        None => print!("{text}"),
    }
    for c in report.failures() {
        eprintln!("failed check {}", c.name);
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Spd(cmd) => run_spd(cmd),
        Command::Gr(cmd) => run_gr(cmd),
        Command::Kgc(cmd) => run_kgc(cmd),
        Command::Verify(args) => run_verify(args),
    };
    let _ = std::io::stdout().flush();
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(e)) => {
            eprintln!("{}: {e}", e.name());
            EXIT_DOMAIN
        }
        Err(Failure::Verify) => EXIT_VERIFY,
    }
}
