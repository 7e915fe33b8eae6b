//! Executes one command of an experiment and writes its report and tables.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{Command, ExperimentConfig};
use crate::dependence::{estimate_theta, log_linear_rate};
use crate::error::{Error, Result};
use crate::limits::partial_sum_stats;
use crate::models::ModelSpec;
use crate::noise::SeedStream;
use crate::stationarity::{
    backward_sample, check_conditions, coalescence_times, gap_profile, lyapunov_estimate, stationary_path, state_gap,
    CheckReport,
};
use crate::stats;
use crate::util::{fmt_csv, fmt_num};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CONDITION: i32 = 2;

pub const REPORT_FILE: &str = "report.txt";

/// Streams used by the backward sampler inside the counterexample command.
const COUNTEREXAMPLE_BACKWARD_RUNS: usize = 200;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: String,
    pub files: Vec<PathBuf>,
}

/// A CSV table with a header row, rendered with LF line endings.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes `contents` to `dir/name` through a temporary file in the same directory.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
    Ok(path)
}

fn int(v: impl std::fmt::Display) -> String {
    v.to_string()
}

fn verdict_block(out: &mut String, check: &CheckReport) {
    out.push_str("verdicts:\n");
    for c in &check.conditions {
        let _ = writeln!(out, "  {c}{}", if c.governing { "  [governing]" } else { "" });
    }
    out.push_str("certificate:\n");
    for line in check.certificate.to_string().lines() {
        let _ = writeln!(out, "  {line}");
    }
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    check: CheckReport,
    report: String,
    tables: Vec<(String, Table)>,
    failed: bool,
}

/// Runs `command` on a validated configuration and writes everything into `out_dir`.
///
/// Exit code 2 means the governing condition fails or the engine could not
/// produce its result for a condition-related reason; the report is written
/// either way.
pub fn run(cfg: &ExperimentConfig, command: Command, out_dir: &Path) -> Result<Outcome> {
    cfg.validate()?;
    if let Some(c) = cfg.run.command {
        if c != command {
            return Err(Error::config("run.command", format!("config is for `{c}`, invoked as `{command}`")));
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let check = check_conditions(&cfg.model, &cfg.covariate);
    let governing_fails = check.governing().map_or(false, |g| g.verdict.fails());
    let mut r = Run { cfg, check, report: String::new(), tables: Vec::new(), failed: governing_fails };
    let _ = writeln!(r.report, "command: {command}");
    let _ = writeln!(r.report, "seed: {}", cfg.run.seed);
    let _ = writeln!(r.report, "family: {}", cfg.model.family());
    let _ = writeln!(r.report, "covariate: {}", cfg.covariate.family.name());
    verdict_block(&mut r.report, &r.check);
    let _ = writeln!(r.report, "result:");

    let skip = governing_fails && matches!(command, Command::Simulate | Command::Dependence | Command::Clt);
    let outcome = if skip {
        let g = r.check.governing().unwrap();
        let _ = writeln!(r.report, "  not run: the governing condition fails ({g})");
        Ok(())
    } else {
        match command {
            Command::Check => Ok(()),
            Command::Simulate => simulate(&mut r),
            Command::Lyapunov => lyapunov(&mut r),
            Command::Dependence => dependence(&mut r),
            Command::Clt => clt(&mut r),
            Command::Coalescence => coalescence(&mut r),
            Command::Counterexample => counterexample(&mut r),
        }
    };
    match outcome {
        Ok(()) => {}
        Err(e @ (Error::Config { .. } | Error::Io(_))) => return Err(e),
        Err(Error::NonConvergence(rep)) => {
            r.failed = true;
            let _ = writeln!(
                r.report,
                "  non-convergence: backward iterations reached s_max={} with gap {}",
                rep.s_max,
                fmt_num(rep.gap)
            );
        }
        Err(e) => {
            r.failed = true;
            let _ = writeln!(r.report, "  {e}");
        }
    }
    let exit_code = if r.failed { EXIT_CONDITION } else { EXIT_OK };
    let _ = writeln!(r.report, "exit: {exit_code}");

    let mut files = Vec::new();
    for (name, t) in &r.tables {
        files.push(write_atomic(out_dir, name, &t.render())?);
    }
    files.push(write_atomic(out_dir, REPORT_FILE, &r.report)?);
    Ok(Outcome { exit_code, report: r.report, files })
}

fn simulate(r: &mut Run<'_>) -> Result<()> {
    let c = &r.cfg.run;
    let model = &r.cfg.model;
    let traj = stationary_path(model, &r.cfg.covariate, SeedStream::new(c.seed, 0), c.n, c.tol, c.s_max)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=traj.k).map(|i| format!("state_{i}")));
    header.extend((1..=traj.dim).map(|i| format!("z_{i}")));
    header.push("eps".into());
    let mut t = Table::new(&header);
    for i in 0..traj.len() {
        let mut row = vec![int(traj.t[i])];
        row.extend(traj.state(i).iter().map(|v| fmt_csv(*v)));
        row.extend(traj.z[i * traj.dim..(i + 1) * traj.dim].iter().map(|v| fmt_csv(*v)));
        row.push(fmt_csv(traj.eps[i]));
        t.push(row);
    }
    let rep = &traj.report;
    let _ = writeln!(r.report, "  path length: {}", traj.len());
    let _ = writeln!(
        r.report,
        "  backward start: s={} gap={} tol={}{}",
        rep.s_used,
        fmt_num(rep.gap),
        fmt_num(rep.tol),
        rep.coalescence_time.map(|t| format!(" coalescence_time={t}")).unwrap_or_default()
    );
    let obs: Vec<f64> = (0..traj.len()).map(|i| model.observation(traj.state(i))).collect();
    let _ = writeln!(r.report, "  observation mean: {}", fmt_num(stats::mean(&obs)));
    let _ = writeln!(r.report, "  observation variance: {}", fmt_num(stats::variance(&obs)));
    r.tables.push(("trajectory.csv".into(), t));
    Ok(())
}

fn lyapunov(r: &mut Run<'_>) -> Result<()> {
    let c = &r.cfg.run;
    let e = lyapunov_estimate(&r.cfg.model, &r.cfg.covariate, c.seed, c.n, c.replicates)?;
    let _ = writeln!(r.report, "  chi: {}", fmt_num(e.chi));
    let _ = writeln!(r.report, "  stderr: {}", fmt_num(e.stderr));
    let _ = writeln!(r.report, "  n: {}, replicates: {}", e.n, e.per_replicate.len());
    let _ = writeln!(r.report, "  negative: {}", if e.chi < 0.0 { "yes" } else { "no" });
    let mut t = Table::new(&["replicate", "chi"]);
    for (i, v) in e.per_replicate.iter().enumerate() {
        t.push(vec![int(i), fmt_csv(*v)]);
    }
    r.tables.push(("lyapunov.csv".into(), t));
    Ok(())
}

fn dependence(r: &mut Run<'_>) -> Result<()> {
    let c = &r.cfg.run;
    let p = estimate_theta(&r.cfg.model, &r.cfg.covariate, c.seed, c.t_max, c.burn_in, c.replicates)?;
    let _ = writeln!(r.report, "  p: {}, o: {}", fmt_num(p.p), fmt_num(p.o));
    let _ = writeln!(r.report, "  replicates: {}, burn_in: {}", p.replicates, p.burn_in);
    if let Some(b) = p.residual_bound {
        let _ = writeln!(r.report, "  residual bound from burn-in: {}", fmt_num(b));
    }
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_else(|| "none".into());
    let _ = writeln!(r.report, "  fitted decay rate: {}", opt(p.rho_fit));
    let _ = writeln!(r.report, "  envelope rate: {}", opt(p.bound_rate));
    let _ = writeln!(r.report, "  Theta_0: {}", fmt_num(p.tail_sums[0]));
    for w in &p.warnings {
        let _ = writeln!(r.report, "  warning: {w}");
    }
    let mut t = Table::new(&["t", "theta_hat", "stderr", "bound_shape"]);
    for i in 0..p.theta_hat.len() {
        let b = p.bound_curve.as_ref().and_then(|b| b.get(i)).copied().unwrap_or(f64::NAN);
        t.push(vec![int(i), fmt_csv(p.theta_hat[i]), fmt_csv(p.stderr[i]), fmt_csv(b)]);
    }
    r.tables.push(("dependence.csv".into(), t));
    Ok(())
}

fn clt(r: &mut Run<'_>) -> Result<()> {
    let c = &r.cfg.run;
    let rep = partial_sum_stats(&r.cfg.model, &r.cfg.covariate, c.seed, &c.functional, c.n, c.replicates, c.moment)?;
    let _ = writeln!(r.report, "  functional: {}", rep.functional);
    let _ = writeln!(r.report, "  n: {}, replicates: {}", rep.n, rep.replicates);
    let _ = writeln!(r.report, "  sigma2 (batch means, b={}): {}", rep.batch_len, fmt_num(rep.sigma2_hat));
    let _ = writeln!(r.report, "  sigma2 (plug-in, {} lags): {}", rep.plugin_lags, fmt_num(rep.sigma2_plugin));
    let _ = writeln!(r.report, "  estimators agree: {}", if rep.variances_agree() { "yes" } else { "no" });
    let _ = writeln!(r.report, "  skewness: {}", fmt_num(rep.skewness));
    let _ = writeln!(r.report, "  excess kurtosis: {}", fmt_num(rep.excess_kurtosis));
    let _ = writeln!(r.report, "  ks: {} (critical {})", fmt_num(rep.ks), fmt_num(rep.ks_critical));
    let _ = writeln!(r.report, "  normality: {}", if rep.normality_holds() { "accepted" } else { "rejected" });
    let _ = writeln!(r.report, "  moment order: {}", fmt_num(rep.moment_order));
    for n in &rep.notes {
        let _ = writeln!(r.report, "  note: {n}");
    }
    let mut t = Table::new(&["replicate", "standardized_sum"]);
    for (i, v) in rep.standardized.iter().enumerate() {
        t.push(vec![int(i), fmt_csv(*v)]);
    }
    r.tables.push(("clt.csv".into(), t));
    Ok(())
}

fn coalescence(r: &mut Run<'_>) -> Result<()> {
    let c = &r.cfg.run;
    let rep = coalescence_times(&r.cfg.model, &r.cfg.covariate, c.seed, c.replicates, c.cap)?;
    let _ = writeln!(r.report, "  replicates: {}, cap: {}", rep.times.len(), rep.cap);
    let _ = writeln!(r.report, "  censored: {} (rate {})", rep.censored(), fmt_num(rep.censoring_rate()));
    let _ = writeln!(r.report, "  mean T (uncensored): {}", fmt_num(rep.mean_time()));
    if let Some(d) = rep.refresh_probability {
        let _ = writeln!(r.report, "  refresh probability: {}", fmt_num(d));
    }
    if let Some(b) = rep.bound_mean() {
        let _ = writeln!(r.report, "  mean bound q/refresh: {}", fmt_num(b));
    }
    let mut times = Table::new(&["replicate", "coalescence_time"]);
    for (i, t) in rep.times.iter().enumerate() {
        times.push(vec![int(i), t.map(int).unwrap_or_default()]);
    }
    let mut surv = Table::new(&["k", "survival", "stderr", "bound"]);
    let horizon = c.horizon.max(1);
    let mut violations = 0;
    for k in 0..=horizon {
        let (p, se) = rep.survival(k);
        let bound = rep.survival_bound(k);
        if bound.map_or(false, |b| p > b + 3.0 * se) {
            violations += 1;
        }
        surv.push(vec![int(k), fmt_csv(p), fmt_csv(se), fmt_csv(bound.unwrap_or(f64::NAN))]);
    }
    if rep.refresh_probability.is_some() {
        let _ = writeln!(r.report, "  survival above bound + 3 stderr for k <= {horizon}: {violations}");
    }
    r.tables.push(("coalescence.csv".into(), times));
    r.tables.push(("survival.csv".into(), surv));
    Ok(())
}

/// Mean `L¹` gap of two copies started apart, per lag, with the closed form when known.
fn counterexample(r: &mut Run<'_>) -> Result<()> {
    let c = &r.cfg.run;
    let (model, cov) = (&r.cfg.model, &r.cfg.covariate);
    let horizon = c.horizon.max(2);
    let (lo, hi) = model.init_pair();
    let start = state_gap(&lo, &hi, model.o());
    let profiles = (0..c.replicates as u64)
        .into_par_iter()
        .map(|i| gap_profile(model, cov, SeedStream::new(c.seed, i), horizon))
        .collect::<Result<Vec<_>>>()?;
    let exact = |j: usize| match model {
        ModelSpec::LinearRc(m) => m.mean_gap_exact(cov, j),
        _ => None,
    };
    let mut mc = vec![0.0; horizon + 1];
    let mut table = Table::new(&["j", "mean_gap", "stderr", "mean_gap_exact"]);
    table.push(vec![int(0), fmt_csv(1.0), fmt_csv(0.0), fmt_csv(1.0)]);
    mc[0] = 1.0;
    let _ = writeln!(r.report, "  mean gap table (relative to the initial gap {}):", fmt_num(start));
    let _ = writeln!(r.report, "    j  mean_gap  stderr  exact");
    for j in 1..=horizon {
        let xs: Vec<f64> = profiles.iter().map(|p| p[j - 1] / start).collect();
        mc[j] = stats::mean(&xs);
        let se = stats::std_error(&xs);
        let ex = exact(j);
        table.push(vec![int(j), fmt_csv(mc[j]), fmt_csv(se), fmt_csv(ex.unwrap_or(f64::NAN))]);
        let _ = writeln!(
            r.report,
            "    {j}  {}  {}  {}",
            fmt_num(mc[j]),
            fmt_num(se),
            ex.map(fmt_num).unwrap_or_else(|| "-".into())
        );
    }
    // the closed form decides when it exists; the Monte Carlo trend otherwise
    let growing = match (exact(horizon), exact(horizon - 1)) {
        (Some(a), Some(b)) => a >= b,
        _ => log_linear_rate(&mc, (1, horizon)).map_or(false, |rate| rate >= 1.0),
    };
    let _ = writeln!(
        r.report,
        "  mean gap: {}",
        if growing { "grows (no convergence in L1)" } else { "decays (converges in L1)" }
    );
    let runs = COUNTEREXAMPLE_BACKWARD_RUNS.min(c.replicates);
    let converged = (0..runs as u64)
        .into_par_iter()
        .map(|i| match backward_sample(model, cov, SeedStream::new(c.seed, (1 << 32) + i), 0, c.tol, c.s_max) {
            Ok(_) => Ok(true),
            Err(Error::NonConvergence(_)) => Ok(false),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<bool>>>()?;
    let _ = writeln!(
        r.report,
        "  backward sampler: converged on {} of {runs} streams within s_max={}",
        converged.iter().filter(|b| **b).count(),
        c.s_max
    );
    let _ = writeln!(r.report, "  verdict: {}", if growing { "non-convergence" } else { "convergence" });
    if growing {
        r.failed = true;
    }
    r.tables.push(("mean_gap.csv".into(), table));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn table_renders_with_lf() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.render(), "a,b\n1,2\n");
    }

    #[test]
    fn command_mismatch_is_a_config_error() {
        let cfg = preset("garch_iid").unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(run(&cfg, Command::Simulate, dir.path()), Err(Error::Config { key, .. }) if key == "run.command"));
    }

    #[test]
    fn failing_check_still_writes_certificate() {
        let cfg = preset("binary_frozen").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = run(&cfg, Command::Check, dir.path()).unwrap();
        assert_eq!(out.exit_code, EXIT_CONDITION);
        let text = std::fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap();
        assert!(text.contains("deJ: fails"));
        assert!(text.contains("certificate:"));
    }
}
