//! The relaxation function h(t, λ) = E[e^{−λE_t}].
//!
//! h is the Laplace transform in the spatial variable of the law of the
//! inverse subordinator; in the time variable its transform is
//!
//! h̃(s, λ) = ψ_W(s) / (s (ψ_W(s) + λ)),
//!
//! which is the algebraic form of D^(ν)h = −λh, h(0) = 1.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mixture::{FiniteAtoms, MixingMeasure};
use crate::quad::{self, Tolerance};
use crate::speckit::mittag_leffler::mittag_leffler;
use crate::speckit::talbot;

/// Slack allowed outside [0, 1] before a value counts as a numerical failure.
pub const RANGE_SLACK: f64 = 1e-6;

/// E_β(−λ t^β): the single-order relaxation, ψ_W(s) = s^β.
pub fn h_single(beta: f64, lambda: f64, t: f64) -> Result<f64> {
    check_args("h_single", lambda, t)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain("h_single", format!("beta = {beta} must lie in (0, 1)")));
    }
    if lambda == 0.0 || t == 0.0 {
        return Ok(1.0);
    }
    mittag_leffler(beta, -lambda * t.powf(beta))
}

/// Multi-term relaxation by real-line Laplace inversion:
///
/// h(t, λ) = (λ/π) ∫₀^∞ r^{-1} e^{−tr} B(r) / ((A(r) + λ)² + B(r)²) dr,
///
/// where A + iB = ψ_W(r e^{iπ}) = Σ c_j^{β_j} r^{β_j} e^{iβ_jπ}. Integrated
/// in u = ln r over unit panels, truncated where the integrand falls below
/// 1e-18 of its peak.
pub fn h_multiterm(atoms: &FiniteAtoms, lambda: f64, t: f64) -> Result<f64> {
    check_args("h_multiterm", lambda, t)?;
    if lambda == 0.0 || t == 0.0 {
        return Ok(1.0);
    }
    let terms: Vec<(f64, f64, f64)> = atoms
        .atoms()
        .iter()
        .map(|a| {
            let (s, c) = (a.beta * PI).sin_cos();
            (a.beta, a.coefficient() * c, a.coefficient() * s)
        })
        .collect();
    let integrand = |u: f64| {
        let r = u.exp();
        let ln_r = u;
        let mut re = lambda;
        let mut im = 0.0;
        for &(b, ac, as_) in &terms {
            let rb = (b * ln_r).exp();
            re += ac * rb;
            im += as_ * rb;
        }
        (-t * r).exp() * im / (re * re + im * im)
    };
    let u_lo = (1e-30f64).ln() / atoms.beta_min() - lambda.ln().abs() / atoms.beta_min();
    let u_hi = (60.0 / t).ln();
    let lo = u_lo.floor() as i64;
    let hi = u_hi.ceil() as i64;
    let samples: Vec<f64> = (lo..=hi).map(|k| integrand(k as f64)).collect();
    let peak = samples.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::numerical("h_multiterm", format!("degenerate integrand at t = {t}, lambda = {lambda}")));
    }
    let keep = |v: f64| v > 1e-18 * peak;
    let first = samples.iter().position(|&v| keep(v)).unwrap_or(0);
    let last = samples.iter().rposition(|&v| keep(v)).unwrap_or(samples.len() - 1);
    let start = lo + first as i64 - 1;
    let end = lo + last as i64 + 1;
    let tol = Tolerance { rel: 1e-12, abs: 1e-13 / (lambda / PI).max(1.0), max_depth: 25 };
    let mut total = 0.0;
    for k in start..end {
        total += quad::adaptive("h_multiterm", k as f64, (k + 1) as f64, tol, integrand)?;
    }
    range_checked("h_multiterm", lambda / PI * total)
}

/// Distributed-order relaxation by fixed-Talbot inversion of
/// ψ_W(s)/(s(ψ_W(s) + λ)), with ψ_W from a cached node table.
pub fn h_distributed(psi: &PsiTable, lambda: f64, t: f64, nodes: usize) -> Result<f64> {
    check_args("h_distributed", lambda, t)?;
    if lambda == 0.0 || t == 0.0 {
        return Ok(1.0);
    }
    let v = talbot::invert(t, nodes, |s| {
        let p = psi.eval(s);
        Ok(p / (s * (p + lambda)))
    })?;
    range_checked("h_distributed", v)
}

fn check_args(op: &'static str, lambda: f64, t: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(op, format!("lambda = {lambda} must be nonnegative")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(op, format!("t = {t} must be nonnegative")));
    }
    Ok(())
}

fn range_checked(op: &'static str, v: f64) -> Result<f64> {
    if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v) {
        return Err(Error::numerical(op, format!("h = {v} outside [0, 1]")));
    }
    Ok(v)
}

/// ψ_W(s) = Σ_q w_q s^{β_q}, cached for repeated complex evaluation.
///
/// Atomic measures give the exact sum; densities use fixed Gauss nodes.
#[derive(Debug, Clone)]
pub struct PsiTable {
    terms: Vec<(f64, f64)>,
}

impl PsiTable {
    pub fn new(measure: &MixingMeasure) -> Result<Self> {
        let terms = match measure {
            MixingMeasure::Atoms(a) => a.atoms().iter().map(|at| (at.beta, at.coefficient())).collect(),
            MixingMeasure::Density(d) => {
                if d.touches_one() && !measure.check_moment_condition().finite {
                    return Err(Error::numerical("h_distributed", "ψ_W diverges: moment condition fails at β = 1"));
                }
                d.nodes(8).into_iter().map(|(b, w)| (b, w * crate::speckit::gamma::gamma_unchecked(1.0 - b))).collect()
            }
        };
        Ok(PsiTable { terms })
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let ln_s = s.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(b, w) in &self.terms {
            acc += (ln_s * b).exp() * w;
        }
        acc
    }

    pub fn eval_real(&self, s: f64) -> f64 {
        let ln_s = s.ln();
        self.terms.iter().map(|&(b, w)| w * (b * ln_s).exp()).sum()
    }
}

/// Evaluator of h(t, λ) for one of the three temporal models.
#[derive(Debug, Clone)]
pub enum HEvaluator {
    /// ψ_W(s) = s^β; closed form via Mittag-Leffler.
    SingleTerm { beta: f64 },
    /// ψ_W(s) = Σ c_j^{β_j}s^{β_j}; real-line inversion.
    MultiTerm(FiniteAtoms),
    /// General μ; contour inversion.
    Distributed { measure: MixingMeasure, psi: PsiTable, nodes: usize },
}

impl HEvaluator {
    pub fn single(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain("HEvaluator", format!("beta = {beta} must lie in (0, 1)")));
        }
        Ok(HEvaluator::SingleTerm { beta })
    }

    pub fn multi(atoms: FiniteAtoms) -> Self {
        HEvaluator::MultiTerm(atoms)
    }

    pub fn distributed(measure: MixingMeasure) -> Result<Self> {
        Self::distributed_with_nodes(measure, talbot::DEFAULT_NODES)
    }

    pub fn distributed_with_nodes(measure: MixingMeasure, nodes: usize) -> Result<Self> {
        let psi = PsiTable::new(&measure)?;
        Ok(HEvaluator::Distributed { measure, psi, nodes })
    }

    /// Picks the natural evaluator for a measure: multi-term inversion for
    /// atoms, contour inversion for densities.
    pub fn for_measure(measure: &MixingMeasure) -> Result<Self> {
        match measure {
            MixingMeasure::Atoms(a) => Ok(HEvaluator::MultiTerm(a.clone())),
            MixingMeasure::Density(_) => HEvaluator::distributed(measure.clone()),
        }
    }

    /// The mixing measure this evaluator represents.
    pub fn measure(&self) -> MixingMeasure {
        match self {
            HEvaluator::SingleTerm { beta } => {
                MixingMeasure::Atoms(FiniteAtoms::single(*beta, 1.0).expect("validated order"))
            }
            HEvaluator::MultiTerm(a) => MixingMeasure::Atoms(a.clone()),
            HEvaluator::Distributed { measure, .. } => measure.clone(),
        }
    }

    pub fn beta_max(&self) -> f64 {
        match self {
            HEvaluator::SingleTerm { beta } => *beta,
            HEvaluator::MultiTerm(a) => a.beta_max(),
            HEvaluator::Distributed { measure, .. } => measure.beta_max(),
        }
    }

    pub fn method(&self) -> &'static str {
        match self {
            HEvaluator::SingleTerm { .. } => "mittag-leffler",
            HEvaluator::MultiTerm(_) => "real-inversion",
            HEvaluator::Distributed { .. } => "talbot",
        }
    }

    /// h(t, λ).
    pub fn eval(&self, t: f64, lambda: f64) -> Result<f64> {
        match self {
            HEvaluator::SingleTerm { beta } => h_single(*beta, lambda, t),
            HEvaluator::MultiTerm(a) => h_multiterm(a, lambda, t),
            HEvaluator::Distributed { psi, nodes, .. } => h_distributed(psi, lambda, t, *nodes),
        }
    }

    /// h(t, λ) sampled along a time grid.
    pub fn sample(&self, times: &[f64], lambda: f64) -> Result<Vec<f64>> {
        times.iter().map(|&t| self.eval(t, lambda)).collect()
    }
}
