//! `nsk`: command-line driver for runs, truncation and commutator suites,
//! remainder sweeps and run reports.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 config or argument error,
//! 3 numerical blow-up, 4 inequality or invariant violation.

mod manifest;
mod report;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nsk_core::diagnostics::{rbar_sweep, remainder_sweep, stress_state, DiagnosticsRecord};
use nsk_core::fields::io::{read_snapshot, write_snapshot};
use nsk_core::fields::{Grid, VectorField};
use nsk_core::mollify::{commutator_sweep, CommutatorCorpus, CommutatorForm};
use nsk_core::operators::{CoefficientSet, PhysicsParams};
use nsk_core::solver::config::RunConfig;
use nsk_core::solver::{initial_data, run, State};
use nsk_core::truncations::run_bound_suite;
use nsk_core::NskError;

use manifest::{version, OutputDir};

#[derive(Parser)]
#[command(name = "nsk", version = env!("CARGO_PKG_VERSION"), about = "Navier-Stokes-Korteweg numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver from a `key = value` config and write diagnostics.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Sample every truncation bound against its certified constant.
    TestTruncations {
        /// Dimension; all of 1, 2 and 3 when omitted.
        #[arg(long)]
        dim: Option<usize>,
        /// Sweep `delta, lambda = 2^0 .. 2^-max_exp`.
        #[arg(long, default_value_t = 10)]
        max_exp: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sweep both mollifier commutators over dyadic radii on the smooth corpus.
    TestCommutator {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 257)]
        frames: usize,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.125)]
        r0: f64,
        #[arg(long, default_value_t = 4)]
        halvings: u32,
        #[arg(long, default_value_t = 2.0)]
        p3: f64,
        #[arg(long, value_enum, default_value_t = Form::Transport)]
        form: Form,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Remainder scaling sweep with `delta = lambda^alpha`, plus the R-bar sweep.
    SweepRemainder(RemainderArgs),
    /// Run a config and print the JSON verdict document.
    Report {
        config: PathBuf,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Write the CSV and a manifest into this directory instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RemainderArgs {
    /// Read `rho` and the momentum components from a snapshot instead of
    /// building the stress state.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long, default_value_t = 2048)]
    n: usize,
    #[arg(long, default_value_t = 6.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 150.0)]
    b: f64,
    #[arg(long, default_value_t = 4.0)]
    u0: f64,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    /// `lambda = 2^-lambda_min_exp .. 2^-lambda_max_exp`.
    #[arg(long, default_value_t = 2)]
    lambda_min_exp: i32,
    #[arg(long, default_value_t = 8)]
    lambda_max_exp: i32,
    /// Component index `l` of the truncated momentum.
    #[arg(long, default_value_t = 0)]
    l: usize,
    #[arg(long, default_value_t = 1e-14)]
    floor: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Transport,
    Conservative,
}

impl From<Form> for CommutatorForm {
    fn from(f: Form) -> Self {
        match f {
            Form::Transport => CommutatorForm::Transport,
            Form::Conservative => CommutatorForm::Conservative,
        }
    }
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<NskError> for Failure {
    fn from(e: NskError) -> Self {
        let code = match &e {
            NskError::BlowUp { .. }
            | NskError::NonFinite { .. }
            | NskError::NegativeDensity { .. }
            | NskError::VacuumViolation { .. } => EXIT_BLOWUP,
            NskError::Io(_) => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

/// Worker count from `NSK_THREADS` and the config knob; the smaller wins.
fn configure_threads(config_threads: Option<usize>) -> Result<(), Failure> {
    let env = match std::env::var("NSK_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => return Err(Failure::config(format!("NSK_THREADS must be a positive integer (got '{v}')"))),
        },
        Err(_) => None,
    };
    let threads = match (env, config_threads) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if let Some(n) = threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn read_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_CONFIG,
        message: format!("cannot read config {}: {e}", path.display()),
    })?;
    Ok(RunConfig::parse(&text)?)
}

/// CSV to stdout, or into `out_dir` with a manifest.
fn emit_csv(out: &OutArgs, name: &str, csv: &str, command: &str, summary: serde_json::Value, code: u8, start: Instant) -> Outcome {
    match &out.out_dir {
        None => print!("{csv}"),
        Some(dir) => {
            let mut od = OutputDir::create(dir)?;
            od.write(name, csv.as_bytes())?;
            od.finish(command, start.elapsed(), None, serde_json::Value::Null, code as i32, summary)?;
        }
    }
    Ok(code)
}

fn cmd_run(config: &Path, out_dir: Option<&Path>) -> Outcome {
    let start = Instant::now();
    let cfg = read_config(config)?;
    configure_threads(cfg.threads)?;
    let grid = cfg.grid()?;
    let s0 = initial_data(&grid, &cfg.initial(), cfg.params()?)?;
    let root = out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let out = match run(&s0, &cfg.solver()) {
        Ok(out) => out,
        Err(e) => {
            let failure = Failure::from(e);
            let od = OutputDir::create(&root)?;
            od.finish(
                "run",
                start.elapsed(),
                Some(cfg.to_text()),
                serde_json::to_value(&cfg).unwrap_or_default(),
                failure.code as i32,
                json!({ "error": failure.message }),
            )?;
            return Err(failure);
        }
    };
    if let Some(w) = &out.cfl_warning {
        eprintln!("warning: {w}");
    }
    let rep = report::build(version(), &cfg, &s0, &out)?;
    let mut od = OutputDir::create(&root)?;
    let mut csv = DiagnosticsRecord::csv_header();
    csv.push('\n');
    for r in &out.records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    od.write("diagnostics.csv", csv.as_bytes())?;
    od.write("report.json", (serde_json::to_string_pretty(&rep).map_err(std::io::Error::other)? + "\n").as_bytes())?;
    od.write("config.txt", cfg.to_text().as_bytes())?;
    if cfg.snapshots {
        for (k, s) in out.frames.frames().iter().enumerate() {
            let mut buf = Vec::new();
            let m: Vec<_> = s
                .m
                .components()
                .iter()
                .enumerate()
                .map(|(i, c)| c.clone().named(format!("m{i}")))
                .collect();
            let mut fields = vec![&s.rho];
            fields.extend(m.iter());
            write_snapshot(&mut buf, &fields)?;
            od.write(&format!("snapshot_{k:05}.bin"), &buf)?;
        }
    }
    let code = if rep.pass { 0 } else { EXIT_VIOLATION };
    let summary = json!({
        "steps": out.steps,
        "dt": out.dt,
        "energy_pass": rep.energy.pass,
        "bd_pass": rep.bd.as_ref().map(|r| r.pass),
        "bd_bound_pass": rep.bd_bound.as_ref().map(|r| r.pass),
        "conservation_pass": rep.conservation.pass,
        "pass": rep.pass,
    });
    od.finish("run", start.elapsed(), Some(cfg.to_text()), serde_json::to_value(&cfg).unwrap_or_default(), code as i32, summary)?;
    eprintln!(
        "{} steps, dt = {:e}: {} (outputs in {})",
        out.steps,
        out.dt,
        if rep.pass { "all checks pass" } else { "inequality or conservation violation" },
        root.display()
    );
    Ok(code)
}

fn cmd_report(config: &Path, out: Option<&Path>) -> Outcome {
    let cfg = read_config(config)?;
    configure_threads(cfg.threads)?;
    let s0 = initial_data(&cfg.grid()?, &cfg.initial(), cfg.params()?)?;
    let run_out = run(&s0, &cfg.solver())?;
    let rep = report::build(version(), &cfg, &s0, &run_out)?;
    let text = serde_json::to_string_pretty(&rep).map_err(std::io::Error::other)? + "\n";
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(if rep.pass { 0 } else { EXIT_VIOLATION })
}

fn cmd_test_truncations(dim: Option<usize>, max_exp: u32, samples: usize, out: &OutArgs) -> Outcome {
    let start = Instant::now();
    configure_threads(None)?;
    if samples < 2 {
        return Err(Failure::config("samples must be at least 2"));
    }
    let dims: Vec<usize> = match dim {
        Some(d @ 1..=3) => vec![d],
        Some(d) => return Err(Failure::config(format!("dim must be 1, 2 or 3 (got {d})"))),
        None => vec![1, 2, 3],
    };
    let mut csv = String::from("dim,name,param,measured,certified,pass\n");
    let (mut rows, mut failing) = (0usize, 0usize);
    for d in dims {
        for r in run_bound_suite(d, max_exp, samples) {
            rows += 1;
            failing += usize::from(!r.pass);
            let _ = writeln!(csv, "{d},{},{:e},{:.17e},{:.17e},{}", r.name, r.param, r.measured, r.certified, r.pass);
        }
    }
    let code = if failing == 0 { 0 } else { EXIT_VIOLATION };
    emit_csv(out, "truncations.csv", &csv, "test-truncations", json!({ "rows": rows, "failing": failing }), code, start)
}

#[allow(clippy::too_many_arguments)]
fn cmd_test_commutator(dim: usize, n: usize, frames: usize, t_end: f64, r0: f64, halvings: u32, p3: f64, form: Form, out: &OutArgs) -> Outcome {
    let start = Instant::now();
    configure_threads(None)?;
    if frames < 3 || !(t_end > 0.0) || !(p3 >= 1.0) {
        return Err(Failure::config("need frames >= 3, t_end > 0 and p3 >= 1"));
    }
    let grid = Grid::new(dim, n)?;
    let corpus = CommutatorCorpus::smooth(&grid, t_end, frames)?;
    let rows = commutator_sweep(&corpus, r0, halvings, p3, form.into())?;
    let mut csv = String::from("r,p3,div_norm,dt_norm\n");
    for r in &rows {
        let _ = writeln!(csv, "{:e},{},{:.17e},{:.17e}", r.r, r.p3, r.div_norm, r.dt_norm);
    }
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].div_norm < w[0].div_norm && w[1].dt_norm < w[0].dt_norm);
    let ratio = rows
        .last()
        .map(|l| (l.div_norm / rows[0].div_norm).max(l.dt_norm / rows[0].dt_norm))
        .unwrap_or(1.0);
    let code = if decreasing { 0 } else { EXIT_VIOLATION };
    emit_csv(
        out,
        "commutator.csv",
        &csv,
        "test-commutator",
        json!({ "decreasing": decreasing, "final_over_initial": ratio }),
        code,
        start,
    )
}

fn load_state(a: &RemainderArgs, params: PhysicsParams) -> Result<State, Failure> {
    match &a.snapshot {
        Some(path) => {
            let file = fs::File::open(path)?;
            let mut fields = read_snapshot(std::io::BufReader::new(file))?;
            if fields.is_empty() {
                return Err(Failure::config("snapshot holds no fields"));
            }
            let rho = fields.remove(0);
            let dim = rho.grid().dim();
            if fields.len() < dim {
                return Err(Failure::config(format!(
                    "snapshot needs rho and {dim} momentum components, found {} fields",
                    fields.len() + 1
                )));
            }
            fields.truncate(dim);
            let m = VectorField::new(fields)?;
            Ok(State::new(rho, m, 0.0, params)?)
        }
        None => {
            let grid = Grid::new(1, a.n)?;
            Ok(stress_state(&grid, a.amplitude, a.b, a.u0, params)?)
        }
    }
}

fn cmd_sweep_remainder(a: &RemainderArgs) -> Outcome {
    let start = Instant::now();
    configure_threads(None)?;
    if a.lambda_min_exp > a.lambda_max_exp {
        return Err(Failure::config("lambda_min_exp must not exceed lambda_max_exp"));
    }
    let params = PhysicsParams::new(a.gamma, a.epsilon, CoefficientSet::paper())?;
    let state = load_state(a, params)?;
    if a.l >= state.grid().dim() {
        return Err(Failure::config(format!("l must be below the dimension {}", state.grid().dim())));
    }
    let lambdas: Vec<f64> = (a.lambda_min_exp..=a.lambda_max_exp).map(|k| 2f64.powi(-k)).collect();
    let rows = remainder_sweep(&state, &lambdas, a.alpha, a.l, a.floor)?;
    let mut csv = String::from("delta,lambda");
    for i in 1..=6 {
        let _ = write!(csv, ",r{i}");
    }
    for i in 1..=6 {
        let _ = write!(csv, ",r_tilde{i}");
    }
    csv.push_str(",total,total_tilde,envelope,pass\n");
    let mut all_pass = true;
    for (k, r) in rows.iter().enumerate() {
        let bound = r.bound.unwrap_or(f64::INFINITY);
        let decreasing = k == 0 || r.total < rows[k - 1].total;
        let pass = r.total <= bound * (1.0 + 1e-12) && decreasing;
        all_pass &= pass;
        let _ = write!(csv, "{:.17e},{:.17e}", r.delta, r.lambda);
        for v in r.r.iter().chain(r.r_tilde.iter()) {
            let _ = write!(csv, ",{v:.17e}");
        }
        let _ = writeln!(csv, ",{:.17e},{:.17e},{:.17e},{pass}", r.total, r.total_tilde, bound);
    }
    // R-bar over dyadic delta starting one halving below 1.
    let deltas: Vec<f64> = (1..=7).map(|k| 2f64.powi(-k)).collect();
    let rbar = rbar_sweep(&state, &deltas, a.floor)?;
    let mut rcsv = String::from("delta,rbar,envelope,pass\n");
    for (k, &(d, v, env)) in rbar.iter().enumerate() {
        let pass = v <= env * (1.0 + 1e-12) && (k == 0 || v < rbar[k - 1].1);
        all_pass &= pass;
        let _ = writeln!(rcsv, "{d:e},{v:.17e},{env:.17e},{pass}");
    }
    let code = if all_pass { 0 } else { EXIT_VIOLATION };
    let config = json!({
        "snapshot": a.snapshot.as_ref().map(|p| p.display().to_string()),
        "n": a.n, "amplitude": a.amplitude, "b": a.b, "u0": a.u0,
        "gamma": a.gamma, "epsilon": a.epsilon, "alpha": a.alpha,
        "lambda_exps": [a.lambda_min_exp, a.lambda_max_exp], "l": a.l, "floor": a.floor,
    });
    match &a.out.out_dir {
        None => print!("{csv}"),
        Some(dir) => {
            let mut od = OutputDir::create(dir)?;
            od.write("remainder.csv", csv.as_bytes())?;
            od.write("rbar.csv", rcsv.as_bytes())?;
            od.finish("sweep-remainder", start.elapsed(), None, config, code as i32, json!({ "pass": all_pass }))?;
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run { config, out_dir } => cmd_run(config, out_dir.as_deref()),
        Command::TestTruncations {
            dim,
            max_exp,
            samples,
            out,
        } => cmd_test_truncations(*dim, *max_exp, *samples, out),
        Command::TestCommutator {
            dim,
            n,
            frames,
            t_end,
            r0,
            halvings,
            p3,
            form,
            out,
        } => cmd_test_commutator(*dim, *n, *frames, *t_end, *r0, *halvings, *p3, *form, out),
        Command::SweepRemainder(a) => cmd_sweep_remainder(a),
        Command::Report { config, out } => cmd_report(config, out.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
