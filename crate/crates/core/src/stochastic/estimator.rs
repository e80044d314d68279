//! Monte Carlo estimator of u(t, x) = E_x[f(X(E_t)) 1(τ_D(X) > E_t)] and
//! the Laplace functionals of W and E used to check it.
//!
//! Path m always draws from substream m. Paths are grouped into fixed
//! chunks of [`CHUNK`] indices, each chunk accumulates sequentially, and
//! chunk accumulators are merged in index order, so results do not depend
//! on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mixture::{FiniteAtoms, MixingMeasure};
use crate::spectral::IntervalDomain;
use crate::stats::Moments;
use crate::stochastic::motion::StableStep;
use crate::stochastic::rng::RngStream;
use crate::stochastic::subordinator::{first_passage_times, MultitermStep};

pub const CHUNK: usize = 512;

/// Assumed convergence rate in δ of the discrete-monitoring killing bias.
pub const KILLING_RATE: f64 = 0.5;

/// 1/(2^r − 1): bias at δ from the coupled difference between 2δ and δ.
pub fn richardson_factor(rate: f64) -> f64 {
    1.0 / (2f64.powf(rate) - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub paths: usize,
    /// Operational-time step Δ of the subordinator.
    pub dt: f64,
    /// Operational-time step δ of the killed motion.
    pub delta: f64,
    pub seed: u64,
    pub stream: u64,
    /// Cap on subordinator steps per path.
    pub max_steps: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Gauss nodes used to discretize a density into atoms.
    pub density_nodes: usize,
}

impl McConfig {
    pub fn new(paths: usize, dt: f64, delta: f64, seed: u64) -> Self {
        McConfig { paths, dt, delta, seed, stream: 0, max_steps: 50_000_000, threads: None, density_nodes: 16 }
    }

    fn validate(&self, op: &'static str) -> Result<()> {
        if self.paths < 2 {
            return Err(Error::domain(op, format!("path count {} must be at least 2", self.paths)));
        }
        for (name, v) in [("dt", self.dt), ("delta", self.delta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(op, format!("{name} = {v} must be positive")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::domain(op, "threads must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
    pub dt: f64,
    pub delta: f64,
    /// Mean with killing checked only at even δ-steps, minus `mean`.
    pub killing_diff: f64,
    pub killing_diff_se: f64,
    /// Upper estimate of the killing bias at δ:
    /// richardson_factor(KILLING_RATE)·(|diff| + 2·SE_diff).
    pub killing_bias: f64,
}

impl McEstimate {
    fn plain(m: &Moments, dt: f64, delta: f64) -> Self {
        McEstimate {
            mean: m.mean,
            std_error: m.std_error(),
            paths: m.count,
            dt,
            delta,
            killing_diff: 0.0,
            killing_diff_se: 0.0,
            killing_bias: 0.0,
        }
    }
}

/// Atoms driving the time change; densities are discretized by Gauss nodes.
pub fn time_change_atoms(measure: &MixingMeasure, nodes: usize) -> Result<FiniteAtoms> {
    match measure {
        MixingMeasure::Atoms(a) => Ok(a.clone()),
        MixingMeasure::Density(d) => d.to_atoms(nodes),
    }
}

/// Runs `per_path` for every path index, accumulating into `width` slots.
pub(crate) fn run_chunked<F>(paths: usize, width: usize, threads: Option<usize>, per_path: F) -> Result<Vec<Moments>>
where
    F: Fn(usize, &mut [Moments]) -> Result<()> + Sync,
{
    let chunks = paths.div_ceil(CHUNK);
    let work = || -> Result<Vec<Vec<Moments>>> {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![Moments::default(); width];
                for m in c * CHUNK..((c + 1) * CHUNK).min(paths) {
                    per_path(m, &mut acc).map_err(|e| Error::Path { path: m, source: Box::new(e) })?;
                }
                Ok(acc)
            })
            .collect()
    };
    let parts = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::numerical("run_chunked", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let mut total = vec![Moments::default(); width];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            *t = t.merge(p);
        }
    }
    Ok(total)
}

/// One value per path, in path order, computed in fixed chunks.
pub fn collect_chunked<F>(paths: usize, threads: Option<usize>, per_path: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let work = || -> Result<Vec<f64>> {
        let parts: Vec<Vec<f64>> = (0..paths.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                (c * CHUNK..((c + 1) * CHUNK).min(paths))
                    .map(|m| per_path(m).map_err(|e| Error::Path { path: m, source: Box::new(e) }))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(parts.concat())
    };
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::numerical("collect_chunked", e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// A real-valued datum f on the line (zero outside D is enforced by killing).
pub type Datum<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

#[derive(Debug, Clone, Copy)]
pub struct McProblem<'a> {
    pub alpha: f64,
    pub domain: IntervalDomain,
    pub measure: &'a MixingMeasure,
}

/// Estimates indexed by (datum, start point, time).
#[derive(Debug, Clone, PartialEq)]
pub struct McGrid {
    pub times: Vec<f64>,
    pub starts: Vec<f64>,
    pub data: usize,
    estimates: Vec<McEstimate>,
}

impl McGrid {
    pub fn get(&self, datum: usize, start: usize, time: usize) -> &McEstimate {
        &self.estimates[(datum * self.starts.len() + start) * self.times.len() + time]
    }
}

const SNAP: f64 = 1e-9;

/// u(t, x₀) for every datum, start point and time, with common random
/// numbers: one subordinator path and one increment sequence per path index.
pub fn mc_solution_grid(
    data: &[Datum<'_>],
    starts: &[f64],
    times: &[f64],
    problem: &McProblem<'_>,
    cfg: &McConfig,
) -> Result<McGrid> {
    const OP: &str = "mc_solution";
    cfg.validate(OP)?;
    if data.is_empty() || starts.is_empty() || times.is_empty() {
        return Err(Error::domain(OP, "data, start points and times must be nonempty"));
    }
    let domain = problem.domain;
    for &x in starts {
        if !domain.closure_contains(x) {
            return Err(Error::domain(
                OP,
                format!("x0 = {x} lies outside the closure of ({}, {})", domain.a(), domain.b()),
            ));
        }
    }
    for &t in times {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(OP, format!("t = {t} must be nonnegative")));
        }
    }
    let atoms = time_change_atoms(problem.measure, cfg.density_nodes)?;
    let sub = MultitermStep::new(&atoms, cfg.dt)?;
    let motion = StableStep::new(problem.alpha, cfg.delta)?;
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));
    let levels: Vec<f64> = order.iter().map(|&i| times[i]).collect();
    let (nf, nx, nt) = (data.len(), starts.len(), times.len());
    let slot = |fi: usize, xi: usize, ti: usize| ((fi * nx + xi) * nt + ti) * 3;
    let base = RngStream::new(cfg.seed, cfg.stream);
    let delta = cfg.delta;

    let acc = run_chunked(cfg.paths, nf * nx * nt * 3, cfg.threads, |m, acc| {
        let mut rng = base.substream(m as u64).rng();
        let hits = first_passage_times(&sub, &levels, cfg.max_steps, &mut rng)?;
        // operational query times in ascending order, paired with time index
        let queries: Vec<(f64, usize)> = hits.iter().zip(&order).map(|(&e, &i)| (e, i)).collect();
        let mut x: Vec<f64> = starts.to_vec();
        let mut alive: Vec<bool> = starts.iter().map(|&s| domain.contains(s)).collect();
        let mut alive_c = alive.clone();
        let mut tau = 0.0;
        let mut j = 1usize;
        let mut q = 0usize;
        let record = |x: &[f64], alive: &[bool], alive_c: &[bool], ti: usize, acc: &mut [Moments]| {
            for (xi, (&pos, (&a, &ac))) in x.iter().zip(alive.iter().zip(alive_c)).enumerate() {
                for (fi, f) in data.iter().enumerate() {
                    let v = if a || ac { f(pos) } else { 0.0 };
                    let fine = if a { v } else { 0.0 };
                    let coarse = if ac { v } else { 0.0 };
                    let s = slot(fi, xi, ti);
                    acc[s].push(fine);
                    acc[s + 1].push(coarse);
                    acc[s + 2].push(coarse - fine);
                }
            }
        };
        while q < queries.len() {
            let (e, ti) = queries[q];
            if e <= tau + SNAP * delta {
                record(&x, &alive, &alive_c, ti, acc);
                q += 1;
                continue;
            }
            let grid = j as f64 * delta;
            let (target, coarse_check) = if grid <= e + SNAP * delta {
                j += 1;
                (grid, j % 2 == 1 || (grid - e).abs() <= SNAP * delta)
            } else {
                (e, true)
            };
            let inc = if (target - tau - delta).abs() <= SNAP * delta {
                motion.draw(&mut rng)
            } else {
                motion.draw_partial(target - tau, &mut rng)
            };
            for k in 0..nx {
                x[k] += inc;
                if !domain.contains(x[k]) {
                    alive[k] = false;
                    if coarse_check {
                        alive_c[k] = false;
                    }
                }
            }
            tau = target;
        }
        Ok(())
    })?;

    let factor = richardson_factor(KILLING_RATE);
    let mut estimates = Vec::with_capacity(nf * nx * nt);
    for fi in 0..nf {
        for xi in 0..nx {
            for ti in 0..nt {
                let s = slot(fi, xi, ti);
                let (fine, diff) = (&acc[s], &acc[s + 2]);
                let mut est = McEstimate::plain(fine, cfg.dt, cfg.delta);
                est.killing_diff = diff.mean;
                est.killing_diff_se = if diff.m2 == 0.0 { 0.0 } else { diff.std_error() };
                est.killing_bias = factor * (diff.mean.abs() + 2.0 * est.killing_diff_se);
                estimates.push(est);
            }
        }
    }
    Ok(McGrid { times: times.to_vec(), starts: starts.to_vec(), data: nf, estimates })
}

/// Single-point form of [`mc_solution_grid`].
pub fn mc_solution(f: Datum<'_>, x0: f64, t: f64, problem: &McProblem<'_>, cfg: &McConfig) -> Result<McEstimate> {
    Ok(*mc_solution_grid(&[f], &[x0], &[t], problem, cfg)?.get(0, 0, 0))
}

/// E[g(E_t)] for each t, from one streamed subordinator per path.
pub fn mc_inverse_functional(
    atoms: &FiniteAtoms,
    times: &[f64],
    g: &(dyn Fn(f64) -> f64 + Sync),
    cfg: &McConfig,
) -> Result<Vec<McEstimate>> {
    cfg.validate("mc_inverse_functional")?;
    let sub = MultitermStep::new(atoms, cfg.dt)?;
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));
    let levels: Vec<f64> = order.iter().map(|&i| times[i]).collect();
    let base = RngStream::new(cfg.seed, cfg.stream);
    let acc = run_chunked(cfg.paths, times.len(), cfg.threads, |m, acc| {
        let mut rng = base.substream(m as u64).rng();
        let hits = first_passage_times(&sub, &levels, cfg.max_steps, &mut rng)?;
        for (e, &i) in hits.iter().zip(&order) {
            acc[i].push(g(*e));
        }
        Ok(())
    })?;
    Ok(acc.iter().map(|m| McEstimate::plain(m, cfg.dt, 0.0)).collect())
}

/// E[e^{−sW_t}] indexed [time][s], with W sampled exactly at the sorted
/// times (no step discretization enters).
pub fn mc_subordinator_laplace(
    atoms: &FiniteAtoms,
    times: &[f64],
    s_values: &[f64],
    cfg: &McConfig,
) -> Result<Vec<Vec<McEstimate>>> {
    cfg.validate("mc_subordinator_laplace")?;
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));
    let mut steps = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    for &i in &order {
        let t = times[i];
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain("mc_subordinator_laplace", format!("t = {t} must be positive")));
        }
        steps.push(if t > prev { Some(MultitermStep::new(atoms, t - prev)?) } else { None });
        prev = t;
    }
    let ns = s_values.len();
    let base = RngStream::new(cfg.seed, cfg.stream);
    let acc = run_chunked(cfg.paths, times.len() * ns, cfg.threads, |m, acc| {
        let mut rng = base.substream(m as u64).rng();
        let mut w = 0.0;
        for (step, &i) in steps.iter().zip(&order) {
            if let Some(st) = step {
                w += st.draw(&mut rng);
            }
            for (k, s) in s_values.iter().enumerate() {
                acc[i * ns + k].push((-s * w).exp());
            }
        }
        Ok(())
    })?;
    Ok((0..times.len()).map(|i| (0..ns).map(|k| McEstimate::plain(&acc[i * ns + k], 0.0, 0.0)).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speckit::relax::h_multiterm;
    use std::f64::consts::PI;

    fn domain() -> IntervalDomain {
        IntervalDomain::new(0.0, PI).unwrap()
    }

    #[test]
    fn zero_time_returns_datum() {
        let m: MixingMeasure = FiniteAtoms::single(0.5, 1.0).unwrap().into();
        let p = McProblem { alpha: 2.0, domain: domain(), measure: &m };
        let f = |x: f64| x.sin();
        let e = mc_solution(&f, 1.0, 0.0, &p, &McConfig::new(100, 1e-3, 1e-3, 1)).unwrap();
        assert_eq!(e.mean, 1f64.sin());
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn exterior_rejected_boundary_zero() {
        let m: MixingMeasure = FiniteAtoms::single(0.5, 1.0).unwrap().into();
        let p = McProblem { alpha: 2.0, domain: domain(), measure: &m };
        let one = |_: f64| 1.0;
        let cfg = McConfig::new(64, 1e-2, 1e-2, 2);
        assert!(mc_solution(&one, -0.1, 0.5, &p, &cfg).is_err());
        assert_eq!(mc_solution(&one, 0.0, 0.5, &p, &cfg).unwrap().mean, 0.0);
        assert!(mc_solution(&one, 1.0, 0.5, &p, &McConfig::new(1, 1e-2, 1e-2, 2)).is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let m: MixingMeasure = FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap().into();
        let p = McProblem { alpha: 1.5, domain: domain(), measure: &m };
        let f = |x: f64| x.sin();
        let mut cfg = McConfig::new(3 * CHUNK + 17, 1e-2, 1e-2, 3);
        cfg.threads = Some(1);
        let a = mc_solution_grid(&[&f], &[1.0, 2.0], &[0.5, 1.0], &p, &cfg).unwrap();
        cfg.threads = Some(3);
        let b = mc_solution_grid(&[&f], &[1.0, 2.0], &[0.5, 1.0], &p, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn survival_larger_at_centre() {
        let m: MixingMeasure = FiniteAtoms::single(0.5, 1.0).unwrap().into();
        let p = McProblem { alpha: 2.0, domain: domain(), measure: &m };
        let one = |_: f64| 1.0;
        let g = mc_solution_grid(&[&one], &[0.2, PI / 2.0], &[1.0], &p, &McConfig::new(20_000, 1e-2, 1e-2, 4)).unwrap();
        let (edge, mid) = (g.get(0, 0, 0), g.get(0, 1, 0));
        assert!(mid.mean - edge.mean > 3.0 * (mid.std_error.powi(2) + edge.std_error.powi(2)).sqrt());
        assert!(mid.killing_diff >= 0.0 && mid.killing_bias >= 0.0);
    }

    #[test]
    fn inverse_laplace_identity() {
        let atoms = FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap();
        let dt = 1e-3;
        let est = mc_inverse_functional(&atoms, &[1.0], &|e| (-e).exp(), &McConfig::new(50_000, dt, 1.0, 5)).unwrap();
        let h = h_multiterm(&atoms, 1.0, 1.0).unwrap();
        // E overshoots by at most Δ, so e^{-E} is low by at most Δ·h
        assert!(est[0].mean <= h + 3.0 * est[0].std_error);
        assert!(est[0].mean >= h - dt - 3.0 * est[0].std_error, "{} vs {h}", est[0].mean);
    }

    #[test]
    fn subordinator_laplace_small() {
        let atoms = FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap();
        let r = mc_subordinator_laplace(&atoms, &[1.0, 0.5], &[1.0], &McConfig::new(50_000, 1.0, 1.0, 6)).unwrap();
        for (t, row) in [1.0f64, 0.5].iter().zip(&r) {
            let expect = (-t * atoms.psi(1.0)).exp();
            assert!((row[0].mean - expect).abs() < 3.0 * row[0].std_error, "t {t}");
        }
    }

    #[test]
    fn operational_and_real_clock_killing_agree() {
        // X(E_s) for s on a real-time grid visits a subset of the operational
        // monitoring times; disagreements vanish as the real grid refines.
        let atoms = FiniteAtoms::single(0.5, 1.0).unwrap();
        let (dt, t) = (1e-3, 1.0);
        let sub = MultitermStep::new(&atoms, dt).unwrap();
        let motion = StableStep::new(2.0, dt).unwrap();
        let dom = domain();
        let mut miss = [0usize; 3];
        let mut killed_op = 0usize;
        for m in 0..2000u64 {
            let mut rng = RngStream::new(7, 0).substream(m).rng();
            let mut w = vec![0.0];
            while *w.last().unwrap() <= t {
                let next = w.last().unwrap() + sub.draw(&mut rng);
                w.push(next);
            }
            let k_t = w.len() - 1;
            let mut x = vec![PI / 2.0];
            for _ in 0..k_t {
                let next = x.last().unwrap() + motion.draw(&mut rng);
                x.push(next);
            }
            let op_alive = x.iter().all(|&p| dom.contains(p));
            if !op_alive {
                killed_op += 1;
            }
            for (r, slot) in [10usize, 100, 1000].iter().zip(miss.iter_mut()) {
                let real_alive = (0..=*r).all(|i| {
                    let s = t * i as f64 / *r as f64;
                    let k = w.partition_point(|&v| v <= s);
                    dom.contains(x[k])
                });
                assert!(real_alive || !op_alive);
                if real_alive != op_alive {
                    *slot += 1;
                }
            }
        }
        assert!(killed_op > 100);
        assert!(miss[2] <= miss[1] && miss[1] <= miss[0], "{miss:?}");
        assert!((miss[2] as f64) < 0.1 * killed_op as f64, "{miss:?} of {killed_op}");
    }
}
