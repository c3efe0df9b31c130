//! `polyarrow`: spaces, arrows, push-outs, catalogs, engine runs and
//! verification suites from the command line.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! configuration or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use polyarrow::json::{self, FormatError};
use polyarrow::suites::{is_randomized, run_suite, SuiteConfig, SUITES};
use polyarrow_core::arrows::exactify_projection;
use polyarrow_core::catalog::{gen_double_arrows_with, gen_spaces, match_arrow, Limits};
use polyarrow_core::engine::{audit_extension, init, AuditOutcome, EngineParams};
use polyarrow_core::geometry::{dimension_cap, set_dimension_cap};
use polyarrow_core::pushout::pushout;
use polyarrow_core::{rational, NormedSpace, Q};
use serde_json::{json, Value};

/// Environment variable overriding the geometry dimension cap.
const DIM_CAP_VAR: &str = "POLYARROW_DIM_CAP";
const STATE_FILE: &str = "state.json";

#[derive(Parser)]
#[command(name = "polyarrow", version, about = "Exact polytopal normed spaces, double arrows and push-outs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or normalize a normed space.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Classify or exactify a double arrow.
    #[command(subcommand)]
    Arrow(ArrowCmd),
    /// Build push-outs.
    #[command(subcommand)]
    Pushout(PushoutCmd),
    /// Generate or query arrow catalogs.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Run the staged construction or audit it.
    #[command(subcommand)]
    Engine(EngineCmd),
    /// Run a verification suite and write its report.
    Verify(VerifyArgs),
    /// Extract one object of a saved state as canonical JSON.
    Export(ExportArgs),
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// The l1 space of the given dimension.
    L1 {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The max-norm space of the given dimension.
    Linf {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read a space, reduce its points to the extreme ones and re-emit it.
    FromJson {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ArrowCmd {
    /// Print the exact (alpha, beta, gamma) class.
    Classify { file: PathBuf },
    /// Replace the back map by an exact projection along the forward map.
    Exactify {
        file: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PushoutCmd {
    /// Push out `i: Y -> A` against `j: Y -> B`.
    Build {
        #[arg(long)]
        i: PathBuf,
        #[arg(long)]
        j: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// Enumerate (1,0,1)-arrows between small spaces.
    Gen {
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, default_value_t = 4)]
        max_denom: u32,
        #[arg(long, default_value_t = 4)]
        max_vertices: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the catalog entry intertwined with an arrow.
    Match {
        #[arg(long)]
        arrow: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        eps: String,
    },
}

#[derive(Subcommand)]
enum EngineCmd {
    /// Build stages from a seed space and a catalog.
    Run {
        #[arg(long)]
        seed_space: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        steps: usize,
        /// New ledger items pushed out per step.
        #[arg(long, default_value_t = 2)]
        budget: usize,
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        /// Grid resolution exponent.
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit the extension of a target arrow along a probe into a stage.
    Audit {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        probe: PathBuf,
        /// Stage the probe maps into; defaults to the first equal stage.
        #[arg(long)]
        probe_stage: Option<usize>,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct VerifyArgs {
    suite: String,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long)]
    max_denom: Option<u32>,
    /// Required for randomized suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated rationals such as `1/10,1/4`.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ExportArgs {
    /// Directory written by `engine run`.
    #[arg(long)]
    state: PathBuf,
    /// Slash-separated path such as `stages/2`, `ledger/0/arrow`,
    /// `steps/1/certificate`, `catalog` or `state`.
    #[arg(long)]
    object: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Why a command did not succeed.
enum Failure {
    /// A check failed; exit 1.
    Checks(String),
    /// Bad arguments, files or inputs; exit 2.
    Config(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<polyarrow_core::Error> for Failure {
    fn from(e: polyarrow_core::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    json::from_text(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Writes to `out` or prints to stdout.
fn emit(value: &Value, out: Option<&Path>) -> Outcome {
    let text = json::to_text(value);
    match out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_eps(text: &str) -> Result<Q, Failure> {
    rational::parse(text).ok_or_else(|| Failure::Config(format!("cannot parse {text:?} as an exact rational")))
}

fn checks_pass(all_hold: bool, what: &str) -> Outcome {
    if all_hold {
        Ok(())
    } else {
        Err(Failure::Checks(format!("{what}: some checks failed")))
    }
}

fn space_cmd(cmd: SpaceCmd) -> Outcome {
    let within_cap = |dim: usize| {
        if dim > dimension_cap() {
            return Err(Failure::Config(format!("dimension {dim} exceeds the geometry cap {}", dimension_cap())));
        }
        Ok(dim)
    };
    let (space, out) = match cmd {
        SpaceCmd::L1 { dim, out } => (NormedSpace::l1(within_cap(dim)?), out),
        SpaceCmd::Linf { dim, out } => (NormedSpace::linf(within_cap(dim)?), out),
        SpaceCmd::FromJson { file, out } => (json::parse_space(&read_json(&file)?)?, out),
    };
    emit(&json::space(&space), out.as_deref())
}

fn arrow_cmd(cmd: ArrowCmd) -> Outcome {
    match cmd {
        ArrowCmd::Classify { file } => {
            let arrow = json::parse_arrow(&read_json(&file)?)?;
            emit(&json::class(&arrow.classify()?), None)
        }
        ArrowCmd::Exactify { file, eps, out } => {
            let arrow = json::parse_arrow(&read_json(&file)?)?;
            let (exact, cert) = exactify_projection(&arrow, &parse_eps(&eps)?)?;
            emit(&json!({ "arrow": json::arrow(&exact), "certificate": json::certificate(&cert) }), out.as_deref())?;
            checks_pass(cert.all_hold(), "exactify")
        }
    }
}

fn pushout_cmd(cmd: PushoutCmd) -> Outcome {
    let PushoutCmd::Build { i, j, out } = cmd;
    let (i, j) = (json::parse_operator(&read_json(&i)?)?, json::parse_operator(&read_json(&j)?)?);
    let po = pushout(&i, &j)?;
    for (name, value) in [
        ("po.json", json::space(&po.po)),
        ("i_prime.json", json::operator(&po.i_prime)),
        ("j_prime.json", json::operator(&po.j_prime)),
        ("certificate.json", json::certificate(&po.certificate)),
    ] {
        write_text(&out.join(name), &json::to_text(&value))?;
    }
    checks_pass(po.certificate.all_hold(), "pushout")
}

fn catalog_cmd(cmd: CatalogCmd) -> Outcome {
    match cmd {
        CatalogCmd::Gen { max_dim, max_denom, max_vertices, seed, out } => {
            if max_denom == 0 {
                return Err(Failure::Config("max-denom must be positive".into()));
            }
            let spaces = gen_spaces(max_dim, max_vertices, max_denom);
            let cat = gen_double_arrows_with(&spaces, max_denom, &Limits::default(), seed);
            emit(&json::catalog(&cat), out.as_deref())
        }
        CatalogCmd::Match { arrow, catalog, eps } => {
            let arrow = json::parse_arrow(&read_json(&arrow)?)?;
            let cat = json::parse_catalog(&read_json(&catalog)?)?;
            let found = match_arrow(&arrow, &cat, &parse_eps(&eps)?);
            let value = found.as_ref().map_or(Value::Null, |m| {
                json!({
                    "entry": m.entry,
                    "exact": m.is_exact(),
                    "distortion": json::rational(&m.distortion),
                    "defect": json::rational(&m.defect),
                    "a": json::operator(&m.a),
                    "b": json::operator(&m.b),
                })
            });
            emit(&value, None)?;
            checks_pass(found.is_some(), "match")
        }
    }
}

fn engine_cmd(cmd: EngineCmd) -> Outcome {
    match cmd {
        EngineCmd::Run { seed_space, catalog, steps, budget, max_dim, m, out } => {
            let x = json::parse_space(&read_json(&seed_space)?)?;
            let cat = json::parse_catalog(&read_json(&catalog)?)?;
            let params = EngineParams { m, max_denom: cat.max_denom, seed: cat.seed, max_entries: budget, max_dim, limits: Limits::default() };
            let mut state = init(&x, Arc::new(cat), params);
            for _ in 0..steps {
                state = state.step()?;
            }
            let composites = state.check_composites()?;
            write_text(&out.join(STATE_FILE), &json::to_text(&json::state(&state)))?;
            write_text(&out.join("composites.json"), &json::to_text(&json::certificate(&composites)))?;
            let steps_hold = state.steps.iter().all(|s| s.certificate.all_hold());
            eprintln!("{} stages, {} ledger items", state.stages.len(), state.ledger.len());
            checks_pass(steps_hold && composites.all_hold(), "engine run")
        }
        EngineCmd::Audit { state, target, probe, probe_stage, eps, out } => {
            let st = json::parse_state(&read_json(&state.join(STATE_FILE))?)?;
            let target = json::parse_arrow(&read_json(&target)?)?;
            let probe = json::parse_arrow(&read_json(&probe)?)?;
            let stage = match probe_stage {
                Some(k) => k,
                None => st
                    .stages
                    .iter()
                    .position(|s| s == probe.target())
                    .ok_or_else(|| Failure::Config("the probe does not map into any stage".into()))?,
            };
            let report = audit_extension(&st, &target, &probe, stage, &parse_eps(&eps)?)?;
            emit(&json::audit_report(&report), out.as_deref())?;
            match report.outcome {
                AuditOutcome::Success => Ok(()),
                other => Err(Failure::Checks(format!("audit ended with {}", json::outcome(other)))),
            }
        }
    }
}

fn verify(args: VerifyArgs) -> Outcome {
    let mut cfg = SuiteConfig::defaults(&args.suite)
        .map_err(|e| Failure::Config(format!("{e}\nusage: polyarrow verify <{}> [--seed N] ...", SUITES.join("|"))))?;
    match args.seed {
        Some(seed) => cfg.seed = seed,
        None if is_randomized(&args.suite) => return Err(Failure::Config(format!("suite {} is randomized and needs --seed", args.suite))),
        None => {}
    }
    if let Some(n) = args.instances {
        cfg.instances = n;
    }
    if let Some(d) = args.max_dim {
        cfg.max_dim = d;
    }
    if let Some(q) = args.max_denom {
        cfg.max_denom = q;
    }
    if let Some(s) = args.steps {
        cfg.steps = s;
    }
    if let Some(list) = args.eps {
        cfg.eps = list.split(',').map(parse_eps).collect::<Result<_, _>>()?;
    }
    let report = run_suite(&args.suite, &cfg).map_err(|e| Failure::Config(e.to_string()))?;
    emit(&report.to_json(), args.out.as_deref())?;
    let passed = report.instances.iter().filter(|i| i.passed()).count();
    eprintln!("{}: {passed}/{} instances passed", report.suite, report.instances.len());
    for (label, count) in report.failed_checks() {
        eprintln!("  {label}: failed on {count}");
    }
    checks_pass(report.passed(), &report.suite)
}

/// Validates an extracted object by decoding it and re-encoding it to the
/// same bytes.
fn revalidate(kind: &str, value: &Value) -> Result<(), Failure> {
    let again = match kind {
        "state" => json::state(&json::parse_state(value)?),
        "stages" => json::space(&json::parse_space(value)?),
        "inclusions" | "arrow" | "target" | "probe" | "extension" => json::arrow(&json::parse_arrow(value)?),
        "catalog" => json::catalog(&json::parse_catalog(value)?),
        "certificate" => json::certificate(&json::parse_certificate(value)?),
        "amalgam" if value.is_null() => Value::Null,
        "amalgam" => json::operator(&json::parse_operator(value)?),
        "params" => json::params(&json::parse_params(value)?),
        _ => return Ok(()),
    };
    if &again == value {
        Ok(())
    } else {
        Err(Failure::Config(format!("malformed state: {kind} does not round-trip")))
    }
}

fn export(args: ExportArgs) -> Outcome {
    let bundle = read_json(&args.state.join(STATE_FILE))?;
    let path = args.object.trim_matches('/');
    let (value, kind) = if path == "state" || path.is_empty() {
        (&bundle, "state")
    } else {
        let pointer = format!("/{path}");
        let value = bundle.pointer(&pointer).ok_or_else(|| Failure::Config(format!("no object at {path:?}")))?;
        let segments: Vec<&str> = path.split('/').collect();
        let last_name = segments.iter().rev().find(|s| s.parse::<usize>().is_err()).copied().unwrap_or("");
        let kind = if segments.last().is_some_and(|s| s.parse::<usize>().is_ok()) && segments.len() == 2 { segments[0] } else { last_name };
        (value, kind)
    };
    revalidate(kind, value)?;
    emit(value, args.out.as_deref())
}

fn apply_dim_cap() -> Outcome {
    if let Ok(text) = std::env::var(DIM_CAP_VAR) {
        let cap: usize = text.trim().parse().map_err(|_| Failure::Config(format!("{DIM_CAP_VAR} must be a positive integer, got {text:?}")))?;
        if cap == 0 {
            return Err(Failure::Config(format!("{DIM_CAP_VAR} must be positive")));
        }
        set_dimension_cap(cap);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = apply_dim_cap().and_then(|()| match cli.command {
        Command::Space(c) => space_cmd(c),
        Command::Arrow(c) => arrow_cmd(c),
        Command::Pushout(c) => pushout_cmd(c),
        Command::Catalog(c) => catalog_cmd(c),
        Command::Engine(c) => engine_cmd(c),
        Command::Verify(a) => verify(a),
        Command::Export(a) => export(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
