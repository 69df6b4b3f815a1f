//! `trotterion`: build, certify and exercise commutator product formulas from the shell.

mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use trotterion::apps::{self, cd, chain, km};
use trotterion::bases::{f_r, s2, s3};
use trotterion::certify::{self, ScanRow, ScanTarget, Window};
use trotterion::recursion::{apply_chain, SchemeKind};
use trotterion::{solver, Formula, Gen, Generators};

use output::{sig12, Gnuplot};

/// Exit status 2: bad usage, configuration or input files.
const EXIT_USAGE: u8 = 2;
/// Exit status 3: a numeric procedure failed.
const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, msg: msg.into() }
    }
}

impl From<trotterion::Error> for Failure {
    fn from(e: trotterion::Error) -> Self {
        let code = if e.is_numeric_failure() { EXIT_NUMERIC } else { EXIT_USAGE };
        Self { code, msg: e.to_string() }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "trotterion", version, about = "Product formulas for exponentials of commutators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a formula from a base and a chain of recursion schemes.
    Build(BuildArgs),
    /// Error of a formula against its target over a grid of x.
    Scan(ScanArgs),
    /// Log-log fit of a scan CSV.
    Fit(FitArgs),
    /// Copies and gates needed to reach an accuracy, per x.
    Gates(GatesArgs),
    /// Solve for composition coefficients.
    Solve(SolveArgs),
    /// Counterdiabatic driving of a two-site Ising model.
    Cd(CdArgs),
    /// Next-nearest-neighbour hopping on a fermion chain.
    Chain(ChainArgs),
    /// Flux lattice with engineered next-nearest-neighbour hopping.
    Km(KmArgs),
    /// Running coefficient sums of a formula.
    Trajectory(TrajectoryArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// `s2`, `s3` or `fr:R`.
    #[arg(long, default_value = "s3")]
    base: String,
    /// Recursion scheme to apply; repeat to chain.
    #[arg(long = "scheme")]
    schemes: Vec<String>,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Linear grid `start:step:stop`.
    #[arg(long, conflicts_with = "logspace")]
    xs: Option<String>,
    /// Log grid `lo:hi:count`.
    #[arg(long)]
    logspace: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    /// exp(x^2 [A, B]).
    Commutator,
    /// exp(x (A + B) + R x^2 [A, B]); needs --r.
    Sum,
}

#[derive(Args)]
struct ScanArgs {
    /// Formula JSON written by `build`.
    formula: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "commutator")]
    target: TargetArg,
    /// R for the sum target.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to --out.
    #[arg(long, requires = "out")]
    gnuplot: bool,
}

#[derive(Args)]
struct WindowArgs {
    /// Fit only the last N rows (default 10).
    #[arg(long, conflicts_with_all = ["all", "range"])]
    last: Option<usize>,
    /// Fit every row.
    #[arg(long, conflicts_with = "range")]
    all: bool,
    /// Fit rows with `lo <= x <= hi`, given as `lo:hi`.
    #[arg(long)]
    range: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with `x,error` as its first two columns.
    csv: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Args)]
struct GatesArgs {
    formula: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Largest number of copies tried.
    #[arg(long, default_value_t = certify::DEFAULT_GATE_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    gnuplot: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SolveWhich {
    /// Four-copy coefficients for odd order n.
    #[arg(long)]
    sqrt4: Option<u32>,
    /// Exact six-gate coefficients of the sum+commutator step at R.
    #[arg(long, allow_negative_numbers = true)]
    pr: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    which: SolveWhich,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoefficientArg {
    Closed,
    Exact,
}

#[derive(Args)]
struct CdArgs {
    #[arg(long = "J", default_value_t = -1.0, allow_negative_numbers = true)]
    j: f64,
    #[arg(long = "hz", default_value_t = 5.0, allow_negative_numbers = true)]
    h_z: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long = "N", default_value_t = 100)]
    steps: usize,
    #[arg(long, value_enum, default_value = "closed")]
    coefficients: CoefficientArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    gnuplot: bool,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long = "L", default_value_t = 6)]
    l: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    t2: f64,
    #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
    total_time: f64,
    /// Step counts; repeat or comma-separate. Defaults to 8, 16, ..., 256.
    #[arg(long = "n", value_delimiter = ',')]
    ns: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    gnuplot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Auto,
    Periodic,
    Open,
}

#[derive(Args)]
struct KmArgs {
    #[arg(long = "Lx", default_value_t = 4)]
    lx: usize,
    #[arg(long = "Ly", default_value_t = 4)]
    ly: usize,
    #[arg(long = "J", default_value_t = 1.0, allow_negative_numbers = true)]
    j: f64,
    /// Flux per plaquette.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
    phi: f64,
    #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
    total_time: f64,
    #[arg(long = "n", value_delimiter = ',')]
    ns: Vec<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    boundary: BoundaryArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, requires = "out")]
    gnuplot: bool,
}

#[derive(Args)]
struct TrajectoryArgs {
    formula: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> CliResult {
    let Ok(raw) = std::env::var("TROTTERION_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("TROTTERION_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Build(a) => cmd_build(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Gates(a) => cmd_gates(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Cd(a) => cmd_cd(a),
        Command::Chain(a) => cmd_chain(a),
        Command::Km(a) => cmd_km(a),
        Command::Trajectory(a) => cmd_trajectory(a),
    }
}

fn parse_base(name: &str) -> CliResult<Formula> {
    let lower = name.trim().to_ascii_lowercase();
    match lower.as_str() {
        "s2" => return Ok(s2()),
        "s3" => return Ok(s3()),
        _ => {}
    }
    let r = lower
        .strip_prefix("fr:")
        .or_else(|| lower.strip_prefix("fr(").and_then(|s| s.strip_suffix(')')))
        .ok_or_else(|| Failure::usage(format!("unknown base '{name}' (expected s2, s3 or fr:R)")))?;
    let r: f64 = r.parse().map_err(|_| Failure::usage(format!("bad R in base '{name}'")))?;
    Ok(f_r(r)?)
}

fn parse_schemes(names: &[String]) -> CliResult<Vec<SchemeKind>> {
    names
        .iter()
        .map(|n| {
            SchemeKind::from_name(n).ok_or_else(|| {
                let known: Vec<_> = SchemeKind::ALL.iter().map(|k| k.name()).collect();
                Failure::usage(format!("unknown scheme '{n}' (known: {})", known.join(", ")))
            })
        })
        .collect()
}

fn read_formula(path: &Path) -> CliResult<Formula> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Formula::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => write_stdout(text),
    }
}

/// Writes to stdout, treating a closed pipe (e.g. `| head`) as success.
fn write_stdout(text: &str) -> CliResult {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::usage(format!("cannot write to stdout: {e}"))),
        _ => Ok(()),
    }
}

fn floats(text: &str, parts: usize, what: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("bad {what} '{text}'")))?;
    if v.len() != parts {
        return Err(Failure::usage(format!("{what} needs {parts} ':'-separated numbers, got '{text}'")));
    }
    Ok(v)
}

fn grid(args: &GridArgs, default: impl FnOnce() -> Vec<f64>) -> CliResult<Vec<f64>> {
    if let Some(text) = &args.xs {
        let v = floats(text, 3, "--xs")?;
        return Ok(certify::linspace_step(v[0], v[1], v[2])?);
    }
    if let Some(text) = &args.logspace {
        let v = floats(text, 3, "--logspace")?;
        if v[2] < 1.0 || v[2].fract() != 0.0 {
            return Err(Failure::usage("--logspace count must be a positive integer"));
        }
        return Ok(certify::logspace(v[0], v[1], v[2] as usize)?);
    }
    Ok(default())
}

fn window(args: &WindowArgs) -> CliResult<Window<f64>> {
    if args.all {
        return Ok(Window::All);
    }
    if let Some(text) = &args.range {
        let v = floats(text, 2, "--range")?;
        return Ok(Window::Range(v[0], v[1]));
    }
    Ok(Window::LastN(args.last.unwrap_or(certify::DEFAULT_FIT_POINTS)))
}

fn gnuplot_for(out: &Option<PathBuf>, enabled: bool, plot: Gnuplot) -> CliResult {
    match (enabled, out) {
        (true, Some(path)) => {
            let script = path.with_extension("gp");
            fs::write(&script, plot.script(path))
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", script.display())))
        }
        _ => Ok(()),
    }
}

fn cmd_build(a: BuildArgs) -> CliResult {
    let base = parse_base(&a.base)?;
    let kinds = parse_schemes(&a.schemes)?;
    let f = apply_chain(&base, &kinds)?;
    let json = f.to_json()?;
    let summary = format!(
        "{}: {} steps, {} gates, order {}",
        f.label(),
        f.len(),
        f.gate_count(),
        f.claimed_order().map_or("?".to_string(), |o| o.to_string())
    );
    match &a.out {
        Some(path) => {
            emit(Some(path), &format!("{json}\n"))?;
            write_stdout(&format!("{summary}\n"))?;
        }
        None => {
            write_stdout(&format!("{json}\n"))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn cmd_scan(a: ScanArgs) -> CliResult {
    let f = read_formula(&a.formula)?;
    let target = match (a.target, a.r) {
        (TargetArg::Commutator, None) => ScanTarget::Commutator,
        (TargetArg::Commutator, Some(_)) => return Err(Failure::usage("--r only applies to --target sum")),
        (TargetArg::Sum, Some(r)) => ScanTarget::SumCommutator(r),
        (TargetArg::Sum, None) => return Err(Failure::usage("--target sum needs --r")),
    };
    let xs = grid(&a.grid, certify::default_grid)?;
    let win = window(&a.window)?;
    info!("scanning {} over {} points", f.label(), xs.len());
    let scan = certify::error_scan(&f, &Generators::pauli_xz(), &target, &xs, win)?;
    emit(a.out.as_deref(), &scan.to_csv("x"))?;
    gnuplot_for(&a.out, a.gnuplot, Gnuplot::loglog("x", "error", &[(2, f.label())]))
}

fn read_scan_csv(path: &Path) -> CliResult<Vec<ScanRow<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || i == 0 && !line.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '.') {
            continue;
        }
        let mut cells = line.split(',');
        let mut next = || -> CliResult<f64> {
            cells
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Failure::usage(format!("{}:{}: expected numeric x,error", path.display(), i + 1)))
        };
        let (x, error) = (next()?, next()?);
        rows.push(ScanRow { x, error, gates: None });
    }
    if rows.is_empty() {
        return Err(Failure::usage(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

fn cmd_fit(a: FitArgs) -> CliResult {
    let rows = read_scan_csv(&a.csv)?;
    let win = window(&a.window)?;
    let pts: Vec<(f64, f64)> = certify::window_rows(&rows, win)
        .iter()
        .filter(|r| r.x > 0.0 && r.error > 0.0)
        .map(|r| (r.x, r.error))
        .collect();
    let fit = certify::fit_loglog(&pts)
        .ok_or_else(|| Failure { code: EXIT_NUMERIC, msg: "fewer than two positive rows in the fit window".into() })?;
    write_stdout(&format!(
        "slope,intercept,x_lo,x_hi,points\n{},{},{},{},{}\n",
        certify::fmt_sig17(fit.slope),
        certify::fmt_sig17(fit.intercept),
        certify::fmt_sig17(fit.x_lo),
        certify::fmt_sig17(fit.x_hi),
        fit.points
    ))
}

fn cmd_gates(a: GatesArgs) -> CliResult {
    let f = read_formula(&a.formula)?;
    let xs = grid(&a.grid, || certify::linspace_step(0.05, 0.05, 0.5).expect("static grid"))?;
    let gens = Generators::pauli_xz();
    let mut csv = String::from("x,r,gates\n");
    for x in xs {
        let b = certify::gates_to_accuracy_capped(&f, &gens, x, a.eps, a.cap)?;
        csv.push_str(&format!("{},{},{}\n", certify::fmt_sig17(x), b.r, b.gates));
    }
    emit(a.out.as_deref(), &csv)?;
    gnuplot_for(&a.out, a.gnuplot, Gnuplot::linear("x", "gates", &[(3, f.label())]))
}

fn cmd_solve(a: SolveArgs) -> CliResult {
    let csv = if let Some(n) = a.which.sqrt4 {
        let s = solver::solve_sqrt4::<f64>(n)?;
        format!(
            "n,a,b,c,d,signed_sum\n{},{},{},{},{},{}\n",
            s.n,
            sig12(s.a),
            sig12(s.b),
            sig12(s.c),
            sig12(s.d),
            sig12(s.signed_sum)
        )
    } else {
        let r = a.which.pr.expect("clap enforces one of --sqrt4/--pr");
        let s = solver::solve_p_of_r(r, None)?;
        if !s.converged {
            return Err(Failure {
                code: EXIT_NUMERIC,
                msg: format!("p(R) did not converge at R = {r} (residual {:e})", s.max_residual),
            });
        }
        let p: Vec<String> = s.params.p.iter().map(|&v| sig12(v)).collect();
        format!("R,p1,p2,p3,p4,p5,p6,max_residual\n{},{},{}\n", sig12(r), p.join(","), sig12(s.max_residual))
    };
    emit(a.out.as_deref(), &csv)
}

fn cmd_cd(a: CdArgs) -> CliResult {
    let mut cfg = cd::CdConfig::new(a.j, a.h_z, a.tau, a.steps, cd::Protocol::Cd)?;
    cfg.coefficients = match a.coefficients {
        CoefficientArg::Closed => cd::CoefficientSource::ClosedForm,
        CoefficientArg::Exact => cd::CoefficientSource::Exact,
    };
    let rows = cd::cd_compare(&cfg)?;
    let mut csv = String::from("t,fidelity_trotter,fidelity_cd,beta\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            certify::fmt_sig17(r.t),
            certify::fmt_sig17(r.fidelity_trotter),
            certify::fmt_sig17(r.fidelity_cd),
            certify::fmt_sig17(r.beta.unwrap_or(f64::NAN))
        ));
    }
    emit(a.out.as_deref(), &csv)?;
    gnuplot_for(&a.out, a.gnuplot, Gnuplot::linear("t", "fidelity", &[(2, "Trotter"), (3, "CD")]))
}

fn step_counts(ns: &[usize]) -> Vec<usize> {
    if ns.is_empty() {
        apps::DEFAULT_NS.to_vec()
    } else {
        ns.to_vec()
    }
}

fn cmd_chain(a: ChainArgs) -> CliResult {
    let ns = step_counts(&a.ns);
    let cfg = chain::ChainConfig::new(a.l, a.t1, a.t2, a.total_time, ns[0])?;
    let scan = chain::chain_simulate(&cfg, &ns)?;
    emit(a.out.as_deref(), &scan.to_csv_with("n", |n| format!("{n:.0}")))?;
    gnuplot_for(&a.out, a.gnuplot, Gnuplot::loglog("n", "error", &[(2, "chain")]))
}

fn cmd_km(a: KmArgs) -> CliResult {
    let ns = step_counts(&a.ns);
    let boundary = match a.boundary {
        BoundaryArg::Auto => km::Boundary::Auto,
        BoundaryArg::Periodic => km::Boundary::Periodic,
        BoundaryArg::Open => km::Boundary::Open,
    };
    let cfg = km::KmConfig::new(a.lx, a.ly, a.j, a.phi, a.total_time, ns[0])?.with_boundary(boundary);
    cfg.validate()?;
    let scan = km::km_simulate(&cfg, &ns)?;
    emit(a.out.as_deref(), &scan.to_csv_with("n", |n| format!("{n:.0}")))?;
    gnuplot_for(&a.out, a.gnuplot, Gnuplot::loglog("n", "error", &[(2, "lattice")]))
}

fn cmd_trajectory(a: TrajectoryArgs) -> CliResult {
    let f = read_formula(&a.formula)?;
    let mut csv = String::from("k,gen,coeff,sum_a,sum_b\n");
    let (mut sa, mut sb) = (0.0, 0.0);
    for (k, s) in f.steps().iter().enumerate() {
        match s.gen {
            Gen::A => sa += s.coeff,
            Gen::B => sb += s.coeff,
            Gen::C => {}
        }
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            k + 1,
            s.gen,
            certify::fmt_sig17(s.coeff),
            certify::fmt_sig17(sa),
            certify::fmt_sig17(sb)
        ));
    }
    emit(a.out.as_deref(), &csv)
}
