mod experiments;
mod kkt;
mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sqvar::bcqp::BcOptions;
use sqvar::cls::DEFAULT_TAUS;
use sqvar::linalg::SolvePath;
use sqvar::lp::{LpMethod, MpcCorrector};
use sqvar::nmf::{NmfOptions, NmfVariant};
use thiserror::Error;

use experiments::*;
use report::{Format, ReportError, Table};

#[derive(Debug, Parser)]
#[command(
    name = "sqvar",
    version,
    about = "Squared-variable solvers: experiments and certificate checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Report one row per run instead of the per-configuration summary.
    #[arg(long)]
    runs: bool,
    /// Write per-iteration traces into this directory.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct LpArgs {
    /// Overrides the per-method default step fraction.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 750.0)]
    max_seconds: f64,
    /// Fixed centering parameter of pdip.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value = "paper")]
    mpc_corrector: MpcCorrector,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Nonnegative QP: projected gradient vs scaled gradient descent on the squared form.
    Qp {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "pg,dss-scaled")]
        method: Vec<QpMethod>,
        /// `a..b` or a comma-separated list.
        #[arg(long, default_value = "0..25")]
        seeds: String,
        #[command(flatten)]
        output: Output,
    },
    /// Random standard-form LPs with pdip, mpc and ssv.
    LpRandom {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_value = "mpc")]
        method: Vec<LpMethod>,
        #[command(flatten)]
        lp: LpArgs,
        #[arg(long, default_value = "normal")]
        solver_path: SolvePath,
        #[arg(long, default_value = "0..10")]
        seeds: String,
        #[command(flatten)]
        output: Output,
    },
    /// Solve an LP read from an MPS file (fixed or free format).
    SolveMps {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "mpc")]
        method: Vec<LpMethod>,
        #[command(flatten)]
        lp: LpArgs,
        #[arg(long, default_value = "augmented")]
        solver_path: SolvePath,
        #[command(flatten)]
        output: Output,
    },
    /// Symmetric NMF `min ‖M − XXᵀ‖²` over the five first-order variants.
    Nmf {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        r: usize,
        #[arg(long, value_delimiter = ',', default_value = "pg,pg_polyak,gd,gd_polyak,lbfgs")]
        variant: Vec<NmfVariant>,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long, default_value = "0..20")]
        seeds: String,
        #[command(flatten)]
        output: Output,
    },
    /// Pseudo-norm constrained least squares with continuation in τ.
    Cls {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 207)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        s: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Strictly decreasing stage exponents; defaults to 1,1/2,1/4,1/6,1/8.
        #[arg(long, alias = "taus", value_delimiter = ',')]
        tau: Vec<f64>,
        #[arg(long, default_value = "0..100")]
        seeds: String,
        #[command(flatten)]
        output: Output,
    },
    /// Approximate second-order measures of a point read from a JSON file.
    CheckKkt {
        file: PathBuf,
        /// Threshold below which a constraint counts as active.
        #[arg(long, default_value_t = 0.1)]
        zeta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Desk-scale versions of every experiment; writes one summary table.
    BenchAll {
        /// Overrides every family's default seed list.
        #[arg(long)]
        seeds: Option<String>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{} solver failure(s)", .0.len())]
    Solver(Vec<String>),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Report(_) => 1,
        }
    }

    fn record(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Validation(_) => "validation",
            CliError::Solver(_) => "solver",
            CliError::Report(_) => "io",
        };
        let mut r = serde_json::json!({ "error": kind, "message": self.to_string() });
        if let CliError::Solver(f) = self {
            r["failures"] = f.clone().into();
        }
        r
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// `a..b` (half open) or a comma-separated list.
fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = |e: std::num::ParseIntError| invalid(format!("bad seed list `{s}`: {e}"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        (a.trim().parse().map_err(bad)?..b.trim().parse().map_err(bad)?).collect()
    } else {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(bad))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(invalid("seed list is empty"));
    }
    Ok(seeds)
}

fn require(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(msg))
    }
}

fn validate_lp(lp: &LpArgs) -> Result<(), CliError> {
    require(lp.eps > 0.0, "--eps must be positive")?;
    require(lp.tau.is_none_or(|t| t > 0.0 && t <= 1.0), "--tau must lie in (0, 1]")?;
    require((0.0..=1.0).contains(&lp.sigma), "--sigma must lie in [0, 1]")?;
    require(lp.max_seconds > 0.0, "--max-seconds must be positive")
}

fn lp_config(n: usize, m: usize, methods: Vec<LpMethod>, lp: &LpArgs, solve_path: SolvePath) -> LpConfig {
    LpConfig {
        n,
        m,
        methods,
        tau: lp.tau,
        eps: lp.eps,
        max_iter: lp.max_iter,
        max_seconds: lp.max_seconds,
        sigma: lp.sigma,
        solve_path,
        corrector: lp.mpc_corrector,
    }
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(ReportError::from)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit(table: &Table, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let mut w = writer(out)?;
    table.write(&mut w, format)?;
    w.flush().map_err(ReportError::from)?;
    Ok(())
}

fn finish(ex: Experiment, output: &Output) -> Result<(), CliError> {
    if let Some(dir) = &output.trace_dir {
        std::fs::create_dir_all(dir).map_err(ReportError::from)?;
        for (name, trace) in &ex.traces {
            let path = dir.join(format!("{name}.{}", output.format.extension()));
            emit(&Table::from_trace(trace), Some(&path), output.format)?;
        }
    }
    let table = if output.runs { &ex.runs } else { &ex.summary };
    emit(table, output.out.as_deref(), output.format)?;
    if ex.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Solver(ex.failures))
    }
}

fn header(family: &str, params: &[(&str, String)]) {
    let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!("# sqvar {family}: {}", p.join(" "));
}

fn list<T: std::fmt::Debug>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| format!("{x:?}").to_lowercase())
        .collect::<Vec<_>>()
        .join(",")
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Qp {
            n,
            kappa,
            tol,
            max_iter,
            method,
            seeds,
            output,
        } => {
            let seed_list = parse_seeds(&seeds)?;
            require(n > 0, "--n must be positive")?;
            require(kappa >= 1.0, "--kappa must be at least 1")?;
            require(tol > 0.0, "--tol must be positive")?;
            header(
                "qp",
                &[
                    ("n", n.to_string()),
                    ("kappa", kappa.to_string()),
                    ("tol", format!("{tol:e}")),
                    ("max_iter", max_iter.to_string()),
                    ("method", method.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
                    ("seeds", seeds),
                ],
            );
            let cfg = QpConfig {
                n,
                kappa,
                methods: method,
                opts: BcOptions {
                    tol,
                    max_iter,
                    ..BcOptions::default()
                },
            };
            finish(run_qp(&cfg, &seed_list), &output)
        }
        Command::LpRandom {
            n,
            m,
            method,
            lp,
            solver_path,
            seeds,
            output,
        } => {
            let seed_list = parse_seeds(&seeds)?;
            validate_lp(&lp)?;
            require(m > 0 && n > m, "need 0 < m < n")?;
            header(
                "lp-random",
                &[
                    ("n", n.to_string()),
                    ("m", m.to_string()),
                    ("method", list(&method)),
                    (
                        "tau",
                        lp.tau
                            .map_or("default (pdip 0.9, mpc 0.995, ssv 0.5)".into(), |t| t.to_string()),
                    ),
                    ("eps", format!("{:e}", lp.eps)),
                    ("max_iter", lp.max_iter.to_string()),
                    ("max_seconds", lp.max_seconds.to_string()),
                    ("sigma", lp.sigma.to_string()),
                    ("solver_path", format!("{solver_path:?}").to_lowercase()),
                    ("mpc_corrector", format!("{:?}", lp.mpc_corrector).to_lowercase()),
                    ("seeds", seeds),
                ],
            );
            finish(
                run_lp_random(&lp_config(n, m, method, &lp, solver_path), &seed_list),
                &output,
            )
        }
        Command::SolveMps {
            file,
            method,
            mut lp,
            solver_path,
            output,
        } => {
            validate_lp(&lp)?;
            lp.tau = Some(lp.tau.unwrap_or(0.9));
            header(
                "solve-mps",
                &[
                    ("file", file.display().to_string()),
                    ("method", list(&method)),
                    ("tau", lp.tau.unwrap().to_string()),
                    ("eps", format!("{:e}", lp.eps)),
                    ("max_iter", lp.max_iter.to_string()),
                    ("max_seconds", lp.max_seconds.to_string()),
                    ("solver_path", format!("{solver_path:?}").to_lowercase()),
                    ("mpc_corrector", format!("{:?}", lp.mpc_corrector).to_lowercase()),
                ],
            );
            let ex = run_mps(&file, &lp_config(0, 0, method, &lp, solver_path)).map_err(|e| invalid(e.to_string()))?;
            finish(ex, &output)
        }
        Command::Nmf {
            n,
            r,
            variant,
            eps,
            max_iter,
            seeds,
            output,
        } => {
            let seed_list = parse_seeds(&seeds)?;
            require(eps > 0.0, "--eps must be positive")?;
            require(r > 0 && n >= r, "need 0 < r <= n")?;
            header(
                "nmf",
                &[
                    ("n", n.to_string()),
                    ("r", r.to_string()),
                    (
                        "variant",
                        variant.iter().map(|v| v.name()).collect::<Vec<_>>().join(","),
                    ),
                    ("eps", format!("{eps:e}")),
                    ("max_iter", max_iter.to_string()),
                    ("seeds", seeds),
                ],
            );
            let cfg = NmfConfig {
                n,
                r,
                variants: variant,
                opts: NmfOptions { eps, max_iter },
            };
            finish(run_nmf(&cfg, &seed_list), &output)
        }
        Command::Cls {
            n,
            m,
            s,
            sigma,
            tau,
            seeds,
            output,
        } => {
            let seed_list = parse_seeds(&seeds)?;
            let taus = if tau.is_empty() { DEFAULT_TAUS.to_vec() } else { tau };
            require(
                taus.windows(2).all(|t| t[1] < t[0]),
                "--tau values must be strictly decreasing",
            )?;
            require(
                taus.iter().all(|t| *t > 0.0 && *t <= 1.0),
                "--tau values must lie in (0, 1]",
            )?;
            require(s > 0 && s <= n && m > 0, "need 0 < s <= n and m > 0")?;
            require(sigma >= 0.0, "--sigma must be nonnegative")?;
            header(
                "cls",
                &[
                    ("n", n.to_string()),
                    ("m", m.to_string()),
                    ("s", s.to_string()),
                    ("sigma", sigma.to_string()),
                    ("tau", taus.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
                    ("stage_max_iter", sqvar::cls::MAX_STAGE_ITER.to_string()),
                    ("prox_tol", format!("{:e}", sqvar::cls::PROX_TOL)),
                    ("seeds", seeds),
                ],
            );
            let cfg = ClsConfig { n, m, s, sigma, taus };
            finish(run_cls(&cfg, &seed_list), &output)
        }
        Command::CheckKkt {
            file,
            zeta,
            out,
            format,
        } => {
            require(zeta >= 0.0, "--zeta must be nonnegative")?;
            let text =
                std::fs::read_to_string(&file).map_err(|e| invalid(format!("cannot read {}: {e}", file.display())))?;
            let point: kkt::PointFile =
                serde_json::from_str(&text).map_err(|e| invalid(format!("bad point file {}: {e}", file.display())))?;
            let (table, notes) = kkt::check_kkt(&point, zeta).map_err(|e| invalid(e.to_string()))?;
            for n in notes {
                eprintln!("# {n}");
            }
            emit(&table, out.as_deref(), format)
        }
        Command::BenchAll { seeds, output } => bench_all(seeds.as_deref(), &output),
    }
}

/// Default configurations of every family. Each entry's seed list applies
/// unless `--seeds` overrides it.
fn bench_all(seeds: Option<&str>, output: &Output) -> Result<(), CliError> {
    if output.runs || output.trace_dir.is_some() {
        return Err(invalid(
            "bench-all writes only the summary; --runs and --trace-dir are not supported",
        ));
    }
    let override_seeds = seeds.map(parse_seeds).transpose()?;
    let pick = |default: &str| match &override_seeds {
        Some(s) => Ok(s.clone()),
        None => parse_seeds(default),
    };
    header(
        "bench-all",
        &[("seeds", seeds.unwrap_or("per-family defaults").to_string())],
    );
    let mut all: Vec<Experiment> = vec![];
    for kappa in [10.0, 100.0] {
        let cfg = QpConfig {
            n: 100,
            kappa,
            methods: vec![QpMethod::Pg, QpMethod::DssScaled],
            opts: BcOptions::default(),
        };
        all.push(run_qp(&cfg, &pick("0..25")?));
    }
    for (method, tau) in [(LpMethod::Mpc, 0.995), (LpMethod::Ssv, 0.5), (LpMethod::Ssv, 0.75)] {
        let cfg = LpConfig {
            n: 500,
            m: 50,
            methods: vec![method],
            tau: Some(tau),
            eps: 1e-8,
            max_iter: 500,
            max_seconds: 750.0,
            sigma: 0.1,
            solve_path: SolvePath::Normal,
            corrector: MpcCorrector::Paper,
        };
        all.push(run_lp_random(&cfg, &pick("0..10")?));
    }
    let nmf = NmfConfig {
        n: 200,
        r: 10,
        variants: NmfVariant::ALL.to_vec(),
        opts: NmfOptions::default(),
    };
    all.push(run_nmf(&nmf, &pick("0..20")?));
    let cls = ClsConfig {
        n: 1000,
        m: 207,
        s: 5,
        sigma: 1.0,
        taus: DEFAULT_TAUS.to_vec(),
    };
    all.push(run_cls(&cls, &pick("0..20")?));

    let mut summary = Table::new(&SUMMARY_COLUMNS);
    let mut failures = vec![];
    for ex in all {
        summary.append(ex.summary)?;
        failures.extend(ex.failures);
    }
    emit(&summary, output.out.as_deref(), output.format)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Solver(failures))
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SQVAR_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| invalid(format!("SQVAR_THREADS must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_pool().and_then(|pool| pool.install(|| run(cli)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
