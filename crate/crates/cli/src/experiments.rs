use rayon::prelude::*;
use sqvar::bcqp::{dss_gd_scaled_solve, gen_qp, pg_solve, standard_start, BcOptions, BcStatus};
use sqvar::cls::{continuation_solve, gen_cls, PROX_TOL};
use sqvar::linalg::SolvePath;
use sqvar::lp::{gen_random_lp, lp_solve, LpMethod, LpOptions, LpStatus, MpcCorrector};
use sqvar::mps::{parse_mps, to_lp_u};
use sqvar::nmf::{gen_nmf, nmf_solve, nmf_start, NmfError, NmfOptions, NmfVariant};
use sqvar::SolveTrace;

use crate::report::{Table, Value};

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "family",
    "method",
    "config",
    "runs",
    "converged",
    "iter_mean",
    "iter_sd",
    "metric",
    "metric_mean",
    "metric_sd",
];

/// Output of one experiment family.
#[derive(Debug)]
pub struct Experiment {
    pub runs: Table,
    pub summary: Table,
    pub traces: Vec<(String, SolveTrace)>,
    pub failures: Vec<String>,
}

impl Experiment {
    fn new(run_columns: &[&str]) -> Self {
        Self {
            runs: Table::new(run_columns),
            summary: Table::new(&SUMMARY_COLUMNS),
            traces: vec![],
            failures: vec![],
        }
    }
}

/// Mean and sample standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

struct Group<'a> {
    family: &'a str,
    method: String,
    config: String,
    iterations: Vec<f64>,
    converged: usize,
    metric: &'a str,
    values: Vec<f64>,
}

fn summary_row(g: Group) -> Vec<Value> {
    let (im, isd) = mean_sd(&g.iterations);
    let (mm, msd) = mean_sd(&g.values);
    vec![
        g.family.into(),
        g.method.into(),
        g.config.into(),
        g.iterations.len().into(),
        g.converged.into(),
        im.into(),
        isd.into(),
        g.metric.into(),
        mm.into(),
        msd.into(),
    ]
}

/// Runs `f` for every seed on the current pool; results keep seed order.
fn per_seed<T: Send>(seeds: &[u64], f: impl Fn(u64) -> T + Sync) -> Vec<T> {
    seeds.par_iter().map(|&s| f(s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum QpMethod {
    Pg,
    DssScaled,
}

impl QpMethod {
    pub fn name(self) -> &'static str {
        match self {
            QpMethod::Pg => "pg",
            QpMethod::DssScaled => "dss-scaled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct QpConfig {
    pub n: usize,
    pub kappa: f64,
    pub methods: Vec<QpMethod>,
    pub opts: BcOptions,
}

pub fn run_qp(cfg: &QpConfig, seeds: &[u64]) -> Experiment {
    let mut ex = Experiment::new(&[
        "method",
        "seed",
        "n",
        "kappa",
        "iterations",
        "objective",
        "prox_residual",
        "status",
    ]);
    let config = format!("n={} kappa={} tol={:e}", cfg.n, cfg.kappa, cfg.opts.tol);
    for &method in &cfg.methods {
        let results = per_seed(seeds, |seed| {
            let p = gen_qp(cfg.n, cfg.kappa, seed);
            let x0 = standard_start(cfg.n, seed);
            match method {
                QpMethod::Pg => pg_solve(&p, &x0, cfg.opts),
                QpMethod::DssScaled => {
                    let v0: Vec<f64> = x0.iter().map(|x| x.sqrt()).collect();
                    dss_gd_scaled_solve(&p, &v0, cfg.opts)
                }
            }
        });
        let mut g = Group {
            family: "qp",
            method: method.name().into(),
            config: config.clone(),
            iterations: vec![],
            converged: 0,
            metric: "objective",
            values: vec![],
        };
        for (&seed, r) in seeds.iter().zip(results) {
            match r {
                Ok(r) => {
                    let status = format!("{:?}", r.status);
                    if r.status == BcStatus::Converged {
                        g.converged += 1;
                    } else {
                        ex.failures.push(format!("qp {} seed {seed}: {status}", method.name()));
                    }
                    g.iterations.push(r.iterations as f64);
                    g.values.push(r.objective);
                    ex.runs.push(vec![
                        method.name().into(),
                        seed.into(),
                        cfg.n.into(),
                        cfg.kappa.into(),
                        r.iterations.into(),
                        r.objective.into(),
                        r.prox_residual.into(),
                        status.into(),
                    ]);
                    ex.traces.push((format!("qp_{}_seed{seed}", method.name()), r.trace));
                }
                Err(e) => ex.failures.push(format!("qp {} seed {seed}: {e}", method.name())),
            }
        }
        ex.summary.push(summary_row(g));
    }
    ex
}

fn method_name(m: LpMethod) -> &'static str {
    match m {
        LpMethod::Pdip => "pdip",
        LpMethod::Mpc => "mpc",
        LpMethod::Ssv => "ssv",
    }
}

#[derive(Debug, Clone)]
pub struct LpConfig {
    pub n: usize,
    pub m: usize,
    pub methods: Vec<LpMethod>,
    /// Overrides each method's default step fraction.
    pub tau: Option<f64>,
    pub eps: f64,
    pub max_iter: usize,
    pub max_seconds: f64,
    pub sigma: f64,
    pub solve_path: SolvePath,
    pub corrector: MpcCorrector,
}

impl LpConfig {
    pub fn options(&self, method: LpMethod) -> LpOptions {
        let mut o = LpOptions::new(method);
        o.tau = self.tau.unwrap_or(o.tau);
        o.eps = self.eps;
        o.max_iter = self.max_iter;
        o.max_seconds = self.max_seconds;
        o.sigma = self.sigma;
        o.solve_path = self.solve_path;
        o.corrector = self.corrector;
        o
    }
}

const LP_RUN_COLUMNS: [&str; 9] = [
    "problem",
    "method",
    "seed",
    "tau",
    "iterations",
    "objective",
    "res",
    "max_violation",
    "status",
];

pub fn run_lp_random(cfg: &LpConfig, seeds: &[u64]) -> Experiment {
    let mut ex = Experiment::new(&LP_RUN_COLUMNS);
    let problem = format!("random({},{})", cfg.n, cfg.m);
    for &method in &cfg.methods {
        let opts = cfg.options(method);
        let name = method_name(method);
        let results = per_seed(seeds, |seed| {
            gen_random_lp(cfg.n, cfg.m, seed).and_then(|p| lp_solve(&p, &opts))
        });
        let mut g = Group {
            family: "lp-random",
            method: name.into(),
            config: format!("n={} m={} tau={} eps={:e}", cfg.n, cfg.m, opts.tau, opts.eps),
            iterations: vec![],
            converged: 0,
            metric: "objective",
            values: vec![],
        };
        for (&seed, r) in seeds.iter().zip(results) {
            match r {
                Ok(r) => {
                    let status = format!("{:?}", r.status);
                    if r.status == LpStatus::Solved {
                        g.converged += 1;
                    } else {
                        ex.failures.push(format!(
                            "lp {name} seed {seed}: {status} {}",
                            r.failure.unwrap_or_default()
                        ));
                    }
                    g.iterations.push(r.iterations as f64);
                    g.values.push(r.objective);
                    ex.runs.push(vec![
                        problem.clone().into(),
                        name.into(),
                        seed.into(),
                        opts.tau.into(),
                        r.iterations.into(),
                        r.objective.into(),
                        r.res.into(),
                        f64::NAN.into(),
                        status.into(),
                    ]);
                    ex.traces.push((format!("lp_{name}_seed{seed}"), r.trace));
                }
                Err(e) => ex.failures.push(format!("lp {name} seed {seed}: {e}")),
            }
        }
        ex.summary.push(summary_row(g));
    }
    ex
}

/// Errors that stop `solve-mps` before any solve.
#[derive(Debug, thiserror::Error)]
pub enum MpsRunError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error(transparent)]
    Mps(#[from] sqvar::mps::MpsError),
}

pub fn run_mps(path: &std::path::Path, cfg: &LpConfig) -> Result<Experiment, MpsRunError> {
    let text = std::fs::read_to_string(path).map_err(|source| MpsRunError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let g = parse_mps(&text)?;
    let (lp, map) = to_lp_u(&g)?;
    let mut ex = Experiment::new(&LP_RUN_COLUMNS);
    for &method in &cfg.methods {
        let opts = cfg.options(method);
        let name = method_name(method);
        let mut grp = Group {
            family: "lp-mps",
            method: name.into(),
            config: format!("{} tau={} eps={:e}", g.name, opts.tau, opts.eps),
            iterations: vec![],
            converged: 0,
            metric: "objective",
            values: vec![],
        };
        match lp_solve(&lp, &opts) {
            Ok(r) => {
                let status = format!("{:?}", r.status);
                if r.status == LpStatus::Solved {
                    grp.converged += 1;
                } else {
                    ex.failures
                        .push(format!("{} {name}: {status} {}", g.name, r.failure.unwrap_or_default()));
                }
                let objective = r.objective + map.objective_constant;
                let violation = g.max_violation(&map.recover(&r.iterate.x));
                grp.iterations.push(r.iterations as f64);
                grp.values.push(objective);
                ex.runs.push(vec![
                    g.name.clone().into(),
                    name.into(),
                    0u64.into(),
                    opts.tau.into(),
                    r.iterations.into(),
                    objective.into(),
                    r.res.into(),
                    violation.into(),
                    status.into(),
                ]);
                ex.traces
                    .push((format!("mps_{}_{name}", g.name.to_lowercase()), r.trace));
            }
            Err(e) => ex.failures.push(format!("{} {name}: {e}", g.name)),
        }
        ex.summary.push(summary_row(grp));
    }
    Ok(ex)
}

#[derive(Debug, Clone)]
pub struct NmfConfig {
    pub n: usize,
    pub r: usize,
    pub variants: Vec<NmfVariant>,
    pub opts: NmfOptions,
}

pub fn run_nmf(cfg: &NmfConfig, seeds: &[u64]) -> Experiment {
    let mut ex = Experiment::new(&["variant", "seed", "n", "r", "iterations", "acc", "increases", "status"]);
    for &variant in &cfg.variants {
        let name = variant.name();
        let results = per_seed(seeds, |seed| {
            let p = gen_nmf(cfg.n, cfg.r, seed);
            nmf_solve(&p, &nmf_start(&p, seed), variant, &cfg.opts)
        });
        let mut g = Group {
            family: "nmf",
            method: name.into(),
            config: format!("n={} r={} eps={:e}", cfg.n, cfg.r, cfg.opts.eps),
            iterations: vec![],
            converged: 0,
            metric: "acc",
            values: vec![],
        };
        for (&seed, r) in seeds.iter().zip(results) {
            let (r, status) = match r {
                Ok(r) => {
                    g.converged += 1;
                    (r, "Converged")
                }
                Err(NmfError::MaxIterReached(r)) => {
                    ex.failures.push(format!("nmf {name} seed {seed}: iteration cap"));
                    (*r, "MaxIterReached")
                }
                Err(e) => {
                    ex.failures.push(format!("nmf {name} seed {seed}: {e}"));
                    continue;
                }
            };
            g.iterations.push(r.iterations as f64);
            g.values.push(r.acc);
            ex.runs.push(vec![
                name.into(),
                seed.into(),
                cfg.n.into(),
                cfg.r.into(),
                r.iterations.into(),
                r.acc.into(),
                r.increases.into(),
                status.into(),
            ]);
            ex.traces.push((format!("nmf_{name}_seed{seed}"), r.trace));
        }
        ex.summary.push(summary_row(g));
    }
    ex
}

#[derive(Debug, Clone)]
pub struct ClsConfig {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub sigma: f64,
    pub taus: Vec<f64>,
}

/// Stages stop at the fixed iteration cap; a stage that hits it is reported
/// as unconverged but is not a failure.
pub fn run_cls(cfg: &ClsConfig, seeds: &[u64]) -> Experiment {
    let mut ex = Experiment::new(&[
        "seed",
        "tau",
        "iterations",
        "objective_ratio",
        "recovery_error",
        "prox_residual",
    ]);
    let results = per_seed(seeds, |seed| {
        let p = gen_cls(cfg.n, cfg.m, cfg.s, cfg.sigma, seed);
        continuation_solve(&p, &cfg.taus, seed)
    });
    let config = format!("n={} m={} s={} sigma={}", cfg.n, cfg.m, cfg.s, cfg.sigma);
    let mut groups: Vec<Group> = cfg
        .taus
        .iter()
        .map(|tau| Group {
            family: "cls",
            method: format!("tau={tau}"),
            config: config.clone(),
            iterations: vec![],
            converged: 0,
            metric: "recovery_error",
            values: vec![],
        })
        .collect();
    for (&seed, r) in seeds.iter().zip(results) {
        match r {
            Ok(stages) => {
                for (g, st) in groups.iter_mut().zip(stages) {
                    g.iterations.push(st.iterations as f64);
                    g.values.push(st.recovery_error);
                    g.converged += usize::from(st.prox_residual <= PROX_TOL);
                    ex.runs.push(vec![
                        seed.into(),
                        st.tau.into(),
                        st.iterations.into(),
                        st.objective_ratio.into(),
                        st.recovery_error.into(),
                        st.prox_residual.into(),
                    ]);
                }
            }
            Err(e) => ex.failures.push(format!("cls seed {seed}: {e}")),
        }
    }
    for g in groups {
        ex.summary.push(summary_row(g));
    }
    ex
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sample_sd() {
        let (m, s) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));
        assert!(mean_sd(&[]).0.is_nan());
    }

    #[test]
    fn summary_has_one_row_per_method() {
        let cfg = QpConfig {
            n: 10,
            kappa: 10.0,
            methods: vec![QpMethod::Pg, QpMethod::DssScaled],
            opts: BcOptions::default(),
        };
        let ex = run_qp(&cfg, &[0, 1]);
        assert_eq!(ex.summary.rows.len(), 2);
        assert_eq!(ex.runs.rows.len(), 4);
        assert_eq!(ex.traces.len(), 4);
        assert!(ex.failures.is_empty(), "{:?}", ex.failures);
    }
}
