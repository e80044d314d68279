//! Subcommand bodies. Each returns the text appended to `summary.txt` and
//! the overall status.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::cli::config::{BasisChoice, RunConfig};
use crate::error::{Error, Result};
use crate::speckit::HEvaluator;
use crate::spectral::basis::eigen_exact_laplace_on_grid;
use crate::spectral::{coefficient_decay_check, eigen_fractional, EigenBasis, SpectralSolution};
use crate::stochastic::{ctrw_simulate, mc_solution_grid, McConfig, McProblem, OrderSampler, RngStream};
use crate::validation::{
    compare_analytic_mc, ctrw_convergence, decay_report, eigen_convergence, initial_datum_report, pde_convergence,
    ComparisonReport, CrossSpec, CtrwSettings, Status,
};

/// Stream used by `simulate` and the `mc-cross` suite.
const MC_STREAM: u64 = 0;
/// Stream offset of the `ctrw` subcommand's levels.
const CTRW_STREAM: u64 = 3000;

pub const SUITES: [&str; 6] = ["eigenrelation", "pde-residual", "mc-cross", "ctrw", "decay", "initial-datum"];

pub struct Outcome {
    pub status: Status,
    pub summary: String,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Outcome { status: Status::Pass, summary }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    Ok(fs::write(dir.join(name), contents)?)
}

pub fn build_basis(cfg: &RunConfig) -> Result<EigenBasis> {
    match cfg.basis.kind {
        BasisChoice::Exact => eigen_exact_laplace_on_grid(cfg.domain, cfg.basis.n, cfg.basis.m),
        BasisChoice::Discretized => eigen_fractional(cfg.domain, cfg.alpha, cfg.basis.m, cfg.basis.n),
    }
}

fn build_solution(cfg: &RunConfig, basis: Arc<EigenBasis>) -> Result<SpectralSolution> {
    SpectralSolution::from_datum(basis, cfg.datum, HEvaluator::for_measure(&cfg.measure)?)
}

pub fn eigen(cfg: &RunConfig, out: &Path, with_phi: bool) -> Result<Outcome> {
    let basis = build_basis(cfg)?;
    let mut csv = String::from("n,lambda\n");
    for n in 1..=basis.len() {
        let _ = writeln!(csv, "{n},{:.16e}", basis.lambda(n));
    }
    write_file(out, "eigen.csv", &csv)?;
    if with_phi {
        let mut m = String::from("x");
        for n in 1..=basis.len() {
            let _ = write!(m, ",phi_{n}");
        }
        m.push('\n');
        for (i, x) in basis.grid().iter().enumerate() {
            let _ = write!(m, "{x:.16e}");
            for n in 1..=basis.len() {
                let _ = write!(m, ",{:.16e}", basis.samples(n)[i]);
            }
            m.push('\n');
        }
        write_file(out, "phi.csv", &m)?;
    }
    Ok(Outcome::ok(format!(
        "eigenpairs: {} ({:?}), gram defect {:.3e}, lambda_1 = {:.16e}\n",
        basis.len(),
        basis.kind(),
        basis.gram_defect(),
        basis.lambda(1)
    )))
}

pub fn h_eval(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let h = HEvaluator::for_measure(&cfg.measure)?;
    let mut csv = String::from("t,lambda,h,method\n");
    for &t in &cfg.times {
        for &l in &cfg.lambdas {
            let _ = writeln!(csv, "{t:.16e},{l:.16e},{:.16e},{}", h.eval(t, l)?, h.method());
        }
    }
    write_file(out, "h.csv", &csv)?;
    Ok(Outcome::ok(format!("h values: {} x {} ({})\n", cfg.times.len(), cfg.lambdas.len(), h.method())))
}

pub fn solve(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let sol = build_solution(cfg, Arc::new(build_basis(cfg)?))?;
    let mut csv = String::from("t,x,u\n");
    for &t in &cfg.times {
        let hv = sol.h_values(t)?;
        for &x in &cfg.xs {
            let _ = writeln!(csv, "{t:.16e},{x:.16e},{:.16e}", sol.eval_with(&hv, x));
        }
    }
    write_file(out, "solve.csv", &csv)?;
    Ok(Outcome::ok(format!(
        "series solution: datum {}, {} terms, {} points\n",
        cfg.datum.label(),
        sol.coefficients().len(),
        cfg.times.len() * cfg.xs.len()
    )))
}

fn mc_config(cfg: &RunConfig) -> McConfig {
    let mut c = McConfig::new(cfg.mc.paths, cfg.mc.dt, cfg.mc.delta, cfg.seed);
    c.stream = MC_STREAM;
    c.threads = cfg.mc.threads;
    c
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let basis = Arc::new(build_basis(cfg)?);
    let datum = cfg.datum;
    let b = basis.clone();
    let f = move |x: f64| datum.eval(&b, x);
    let problem = McProblem { alpha: cfg.alpha, domain: cfg.domain, measure: &cfg.measure };
    let mc = mc_config(cfg);
    let grid = mc_solution_grid(&[&f], &cfg.xs, &cfg.times, &problem, &mc)?;
    let mut csv = String::from("x,t,estimate,stderr,M,delta_op,delta_space\n");
    for (i, &x) in cfg.xs.iter().enumerate() {
        for (j, &t) in cfg.times.iter().enumerate() {
            let e = grid.get(0, i, j);
            let _ = writeln!(
                csv,
                "{x:.16e},{t:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e}",
                e.mean, e.std_error, e.paths, e.dt, e.delta
            );
        }
    }
    write_file(out, "simulate.csv", &csv)?;
    Ok(Outcome::ok(format!("monte carlo: {} paths, datum {}\n", mc.paths, datum.label())))
}

pub fn ctrw(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let orders = OrderSampler::new(&cfg.measure)?;
    let t = cfg.ctrw.t;
    let mut csv = String::from("c,run,N_t,scaled\n");
    for (level, &c) in cfg.ctrw.ladder.iter().enumerate() {
        let base = RngStream::new(cfg.seed, CTRW_STREAM + level as u64);
        let counts = crate::stochastic::collect_chunked(cfg.ctrw.runs, cfg.mc.threads, |m| {
            Ok(ctrw_simulate(&orders, c, t, &mut base.substream(m as u64).rng())?.0 as f64)
        })?;
        for (run, n) in counts.iter().enumerate() {
            let _ = writeln!(csv, "{c:.16e},{run},{},{:.16e}", *n as u64, n / c);
        }
    }
    write_file(out, "ctrw.csv", &csv)?;
    Ok(Outcome::ok(format!("ctrw: t = {t}, {} levels x {} runs\n", cfg.ctrw.ladder.len(), cfg.ctrw.runs)))
}

/// Concatenates reports into one CSV with a leading `case` column.
fn merged_csv(reports: &[&ComparisonReport]) -> String {
    let mut s = String::new();
    for (k, r) in reports.iter().enumerate() {
        let csv = r.csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap_or_default();
        if k == 0 {
            let _ = writeln!(s, "case,{header}");
        }
        for l in lines {
            let _ = writeln!(s, "{k},{l}");
        }
    }
    s
}

fn combine(reports: &[&ComparisonReport]) -> Status {
    if reports.iter().any(|r| r.status == Status::Fail) {
        Status::Fail
    } else if reports.iter().any(|r| r.status == Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Pass
    }
}

fn suite_reports(cfg: &RunConfig, suite: &str) -> Result<Vec<ComparisonReport>> {
    let v = &cfg.validate;
    match suite {
        "eigenrelation" => {
            let h = HEvaluator::for_measure(&cfg.measure)?;
            v.lambdas
                .iter()
                .map(|&l| Ok(eigen_convergence(&h, l, v.dt, v.horizon, v.window, v.halvings)?.report))
                .collect()
        }
        "pde-residual" => {
            let sol = build_solution(cfg, Arc::new(build_basis(cfg)?))?;
            let study = pde_convergence(&sol, &cfg.measure, &cfg.xs, v.dt, v.horizon, v.window, v.halvings)?;
            Ok(vec![study.report])
        }
        "mc-cross" => {
            let basis = Arc::new(build_basis(cfg)?);
            let sol = build_solution(cfg, basis.clone())?;
            let points: Vec<(f64, f64)> = cfg.times.iter().flat_map(|&t| cfg.xs.iter().map(move |&x| (t, x))).collect();
            let extra_bias = if cfg.basis.kind == BasisChoice::Discretized {
                let mut fine_cfg = cfg.clone();
                fine_cfg.basis.m *= 2;
                let fine = build_solution(&fine_cfg, Arc::new(build_basis(&fine_cfg)?))?;
                points
                    .iter()
                    .map(|&(t, x)| Ok((sol.eval(t, x)? - fine.eval(t, x)?).abs()))
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            let datum = cfg.datum;
            let f = move |x: f64| datum.eval(&basis, x);
            let spec = CrossSpec {
                problem: McProblem { alpha: cfg.alpha, domain: cfg.domain, measure: &cfg.measure },
                datum: &f,
                cfg: mc_config(cfg),
                max_paths: cfg.mc.max_paths,
                extra_bias,
            };
            let mut r = compare_analytic_mc(&sol, &spec, &points, "mc cross-validation")?.report;
            if cfg.basis.kind == BasisChoice::Discretized {
                r = r.note(format!("extra bias: basis refinement M = {} vs {}", cfg.basis.m, 2 * cfg.basis.m));
            }
            Ok(vec![r])
        }
        "ctrw" => {
            let settings = CtrwSettings {
                t: cfg.ctrw.t,
                ladder: cfg.ctrw.ladder.clone(),
                runs: cfg.ctrw.runs,
                seed: cfg.seed,
                dt: cfg.ctrw.dt,
                threads: cfg.mc.threads,
            };
            Ok(vec![ctrw_convergence(&cfg.measure, &settings)?.report])
        }
        "decay" => {
            let basis = Arc::new(build_basis(cfg)?);
            let sol = build_solution(cfg, basis.clone())?;
            let f = cfg.datum.sample(&basis);
            let mut r = decay_report(&sol, &f, &v.decay_times, "decay estimate")?;
            if let Ok(d) = coefficient_decay_check(sol.coefficients(), &basis, 3.0) {
                r = r.note(format!(
                    "coefficient decay exponent (report-only) = {:?}, sup|phi| exponent = {:?} vs {:.4}",
                    d.fitted_exponent, d.phi_sup_exponent, d.phi_reference_exponent
                ));
            }
            Ok(vec![r])
        }
        "initial-datum" => {
            let basis = Arc::new(build_basis(cfg)?);
            let sol = build_solution(cfg, basis.clone())?;
            let f = cfg.datum.sample(&basis);
            Ok(vec![initial_datum_report(&sol, &f, &v.initial_times, v.eps_rel, "initial datum")?.0])
        }
        other => Err(Error::Config(format!("unknown suite `{other}` (one of {})", SUITES.join(", ")))),
    }
}

pub fn validate(cfg: &RunConfig, out: &Path, suite: &str) -> Result<Outcome> {
    let suites: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut summary = String::new();
    let mut statuses = Vec::new();
    for s in suites {
        let reports = suite_reports(cfg, s)?;
        let refs: Vec<&ComparisonReport> = reports.iter().collect();
        let status = combine(&refs);
        let mut text = format!("suite {s}: {}\n", status.as_str());
        for (k, r) in reports.iter().enumerate() {
            let _ = write!(text, "case {k}: {}", r.summary());
        }
        write_file(out, &format!("{s}.csv"), &merged_csv(&refs))?;
        write_file(out, &format!("{s}.summary.txt"), &text)?;
        summary.push_str(&text);
        statuses.push(status);
    }
    let status = if statuses.contains(&Status::Fail) {
        Status::Fail
    } else if statuses.contains(&Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(Outcome { status, summary })
}
