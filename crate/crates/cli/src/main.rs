//! `delaystab`: stability certificates, equilibria and simulations for
//! delayed neural networks described in JSON files.
//!
//! Machine-readable results go to stdout as JSON, a human summary goes to
//! stderr. Exit status: 0 stable (or success), 2 inconclusive, 1 bad input.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use delaystab::criteria::{certify_decay_rate, Criterion, Status};
use delaystab::io::{InputError, SystemFile};
use delaystab::report::{
    analyze, equilibrium_section, resolve_tolerance, simulate_file, simulation_config, AnalyzeOptions, RunError,
    EXIT_INCONCLUSIVE, EXIT_INPUT_ERROR, EXIT_STABLE, TOOL, VERSION,
};
use delaystab::sim::{write_csv, SimError};
use delaystab::sweep::{bisect_parameter, parse_values, sweep};

const BISECT_STEPS: usize = 60;

#[derive(Parser)]
#[command(name = "delaystab", version, about = "Delay-independent stability analysis for neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every applicable stability criterion and report the verdict.
    Analyze(AnalyzeArgs),
    /// Certify an exponential decay rate.
    CertifyRate(Common),
    /// Check existence conditions and solve for the equilibrium of a BAM network.
    Equilibrium {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Integrate the system and write the trajectory as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// CSV destination; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Analyze the system for each value of one parameter.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// System file (JSON); `-` reads stdin.
    file: PathBuf,
    /// Comparison tolerance (overrides DELAYSTAB_TOL, default 1e-12).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SimArgs {
    /// End time (overrides the file's simulation block).
    #[arg(long)]
    t_end: Option<f64>,
    /// Step size; defaults to the file's, or the largest of 0.01, 0.005, 0.002, ... the delays allow.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Decide the verdict with this criterion (e.g. theorem1, cor7, cor9-2, thm3).
    #[arg(long)]
    criterion: Option<Criterion>,
    /// Positive weight vector for the weighted criteria.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Also simulate and fit the observed decay rate.
    #[arg(long)]
    simulate: bool,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Dotted path of the swept scalar, e.g. `parameters.mu` or `a_conn[0][0]`.
    #[arg(long)]
    param: String,
    /// `v1,v2,...` or `start:stop:step`.
    #[arg(long)]
    values: String,
    /// Also bisect for the first failing value on `LO,HI`.
    #[arg(long, value_name = "LO,HI", value_parser = parse_interval)]
    bisect: Option<(f64, f64)>,
    #[arg(long)]
    criterion: Option<Criterion>,
    #[arg(long)]
    simulate: bool,
    #[command(flatten)]
    sim: SimArgs,
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    match parse_values(s)?[..] {
        [lo, hi] if lo < hi => Ok((lo, hi)),
        _ => Err("expected LO,HI with LO < HI".into()),
    }
}

enum Failure {
    Input(InputError),
    Io(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map(|_| ())
    };
    res.map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn load(path: &Path) -> Result<(String, SystemFile), Failure> {
    let text = read_source(path)?;
    let file = SystemFile::parse(&text)?;
    Ok((text, file))
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out).map_err(|e| Failure::Io(e.to_string()))
}

fn header(file: &SystemFile, tol: f64) -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "name": file.name,
        "kind": file.spec.kind(),
        "input_sha256": file.sha256(),
        "tolerance": tol,
    })
}

fn analyze_cmd(args: AnalyzeArgs) -> Result<i32, Failure> {
    let tol = resolve_tolerance(args.common.tol)?;
    let (_, file) = load(&args.common.file)?;
    let simulate = if args.simulate { Some(simulation_config(&file, args.sim.t_end, args.sim.step)?) } else { None };
    let opts = AnalyzeOptions { criterion: args.criterion, tol, weights: args.weights, simulate };
    let report = analyze(&file, &opts)?;
    print_json(&report)?;
    eprint!("{}", report.summary());
    Ok(report.exit_code())
}

fn certify_cmd(args: Common) -> Result<i32, Failure> {
    let tol = resolve_tolerance(args.tol)?;
    let (_, file) = load(&args.file)?;
    let general = file
        .spec
        .to_general()
        .map_err(|v| InputError::single("", v.iter().map(|v| format!("{}: {}", v.path, v.message)).collect::<Vec<_>>().join("; ")))?;
    let mut out = header(&file, tol);
    let code = match certify_decay_rate(&general, tol) {
        Ok(cert) => {
            eprintln!("decay rate certified: lambda0 = {:.6e}", cert.lambda0);
            out["certificate"] = json!(cert);
            EXIT_STABLE
        }
        Err(e) => {
            eprintln!("no decay rate certified: {e}");
            out["error"] = json!(e.to_string());
            EXIT_INCONCLUSIVE
        }
    };
    print_json(&out)?;
    Ok(code)
}

fn equilibrium_cmd(args: Common, max_iter: usize) -> Result<i32, Failure> {
    let tol = resolve_tolerance(args.tol)?;
    let (_, file) = load(&args.file)?;
    if max_iter == 0 {
        return Err(InputError::single("--max-iter", "must be at least 1").into());
    }
    let Some(mut section) = equilibrium_section(&file, tol)? else {
        return Err(InputError::single("kind", format!("no equilibrium analysis for kind `{}`", file.spec.kind())).into());
    };
    if max_iter != delaystab::report::EQUILIBRIUM_MAX_ITER {
        let bam = file.spec.as_bam().expect("equilibrium section implies a BAM view");
        let (f, g) = file.activations().expect("equilibrium section implies activations");
        match delaystab::solve_equilibrium(&bam, &f, &g, tol, max_iter) {
            Ok(s) => (section.solution, section.error) = (Some(s), None),
            Err(e) => (section.solution, section.error) = (None, Some(e.to_string())),
        }
    }
    let ex = &section.existence;
    for c in &ex.conditions {
        eprintln!("  condition {}: {} ({:.6e}) {}", c.index, c.description, c.value, if c.holds { "holds" } else { "fails" });
    }
    let code = match (&section.solution, &section.error) {
        (Some(s), _) => {
            eprintln!("equilibrium x* = {:?}, y* = {:?} after {} iterations", s.x_star, s.y_star, s.iterations);
            EXIT_STABLE
        }
        (None, e) => {
            eprintln!("no equilibrium found: {}", e.as_deref().unwrap_or("unknown"));
            EXIT_INCONCLUSIVE
        }
    };
    let mut out = header(&file, tol);
    out["equilibrium"] = json!(section);
    print_json(&out)?;
    Ok(code)
}

fn simulate_cmd(common: Common, sim: SimArgs, out: Option<PathBuf>) -> Result<i32, Failure> {
    let (_, file) = load(&common.file)?;
    let cfg = simulation_config(&file, sim.t_end, sim.step)?;
    let traj = match simulate_file(&file, &cfg) {
        Ok(t) => t,
        Err(RunError::Input(e)) => return Err(e.into()),
        Err(RunError::Sim(e @ (SimError::Overflow { .. } | SimError::DelayBound { .. }))) => {
            eprintln!("error: simulation failed: {e}");
            return Ok(EXIT_INCONCLUSIVE);
        }
        Err(RunError::Sim(e)) => return Err(InputError::single("simulation", e.to_string()).into()),
    };
    let io_err = |e: io::Error| Failure::Io(e.to_string());
    match &out {
        Some(path) => {
            let f = File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            write_csv(&traj, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        None => write_csv(&traj, io::stdout().lock()).map_err(io_err)?,
    }
    eprintln!(
        "simulated {} rows, t = {}..{} with h = {}; final state {:?}; system sha256 {}",
        traj.times.len(),
        cfg.t0,
        cfg.t_end,
        cfg.h,
        traj.final_state(),
        traj.meta.system_hash
    );
    Ok(EXIT_STABLE)
}

fn sweep_cmd(args: SweepArgs) -> Result<i32, Failure> {
    let tol = resolve_tolerance(args.common.tol)?;
    let (text, file) = load(&args.common.file)?;
    let doc: Value = serde_json::from_str(&text).expect("already parsed");
    let values = parse_values(&args.values).map_err(|e| InputError::single("--values", e))?;
    let simulate = if args.simulate { Some(simulation_config(&file, args.sim.t_end, args.sim.step)?) } else { None };
    let opts = AnalyzeOptions { criterion: args.criterion, tol, weights: None, simulate };
    let rows = sweep(&doc, &args.param, &values, &opts)?;
    let boundary = match args.bisect {
        Some((lo, hi)) => Some(bisect_parameter(&doc, &args.param, lo, hi, &opts, BISECT_STEPS)?),
        None => None,
    };

    for r in &rows {
        let status = match (&r.status, &r.error) {
            (Some(Status::StableCertified), _) => "stable_certified".into(),
            (Some(Status::Inconclusive), _) => "inconclusive".into(),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "-".into(),
        };
        let crit = r.criterion.map(|c| c.to_string()).unwrap_or_default();
        eprintln!("  {} = {:<12} {:<16} {}", args.param, r.value, status, crit);
    }
    let mut out = header(&file, tol);
    out["parameter"] = json!(args.param);
    out["rows"] = json!(rows);
    if let Some(b) = boundary {
        match b {
            Some(b) => eprintln!("  boundary: last stable {}, first failing {:?}", b.last_stable, b.first_unstable),
            None => eprintln!("  boundary: lower end of the bisection interval is not stable"),
        }
        out["boundary"] = json!(b);
    }
    print_json(&out)?;
    Ok(if rows.iter().all(|r| r.is_stable()) { EXIT_STABLE } else { EXIT_INCONCLUSIVE })
}

fn main() -> ExitCode {
    // Usage errors are input errors; clap's own status 2 means inconclusive here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT_ERROR as u8 } else { 0 });
        }
    };
    let file = match &cli.command {
        Command::Analyze(a) => a.common.file.clone(),
        Command::CertifyRate(c) | Command::Equilibrium { common: c, .. } | Command::Simulate { common: c, .. } => {
            c.file.clone()
        }
        Command::Sweep(s) => s.common.file.clone(),
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze_cmd(a),
        Command::CertifyRate(c) => certify_cmd(c),
        Command::Equilibrium { common, max_iter } => equilibrium_cmd(common, max_iter),
        Command::Simulate { common, sim, out } => simulate_cmd(common, sim, out),
        Command::Sweep(s) => sweep_cmd(s),
    };
    let code = match result {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            for d in &e.diagnostics {
                eprintln!("error: {}: {d}", file.display());
            }
            EXIT_INPUT_ERROR
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
