//! Mixing measures on the order interval (0, 1) and their scalar functionals.
//!
//! A [`MixingMeasure`] is the base measure μ of the waiting-time mixture.
//! The derived measure ν(dβ) = Γ(1−β)μ(dβ) weights the Caputo derivatives
//! in the distributed-order operator, and the subordinator W has Laplace
//! exponent ψ_W(s) = ∫ s^β Γ(1−β) μ(dβ).
//!
//! Atomic measures are stored as pairs (β_j, c_j); the μ-weight of atom j
//! is c_j^{β_j}/Γ(1−β_j), so ψ_W(s) = Σ c_j^{β_j} s^{β_j} and the
//! distributed-order operator becomes Σ c_j^{β_j} ∂_t^{β_j}.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{self, QuadValue, Tolerance};
use crate::speckit::gamma::{gamma, gamma_unchecked};

/// Upper cutoff of the u-variable when β = 1 − e^{-u} is used near β = 1.
const U_CUTOFF: f64 = 37.0;

/// One atom (β, c) of a multi-term measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub beta: f64,
    pub c: f64,
}

impl Atom {
    pub fn new(beta: f64, c: f64) -> Self {
        Atom { beta, c }
    }

    /// c^β, the coefficient of ∂^β in the multi-term operator.
    pub fn coefficient(&self) -> f64 {
        self.c.powf(self.beta)
    }

    /// μ({β}) = c^β / Γ(1−β).
    pub fn mu_weight(&self) -> f64 {
        self.coefficient() / gamma_unchecked(1.0 - self.beta)
    }
}

/// A finite set of atoms with strictly increasing orders in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAtoms {
    atoms: Vec<Atom>,
}

impl FiniteAtoms {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("FiniteAtoms", "at least one atom is required"));
        }
        for (j, a) in atoms.iter().enumerate() {
            if !(a.beta > 0.0 && a.beta < 1.0) {
                return Err(Error::domain("FiniteAtoms", format!("atom {j}: beta = {} must lie in (0, 1)", a.beta)));
            }
            if !(a.c > 0.0) || !a.c.is_finite() {
                return Err(Error::domain("FiniteAtoms", format!("atom {j}: c = {} must be positive and finite", a.c)));
            }
            if j > 0 && !(atoms[j - 1].beta < a.beta) {
                return Err(Error::domain(
                    "FiniteAtoms",
                    format!("atom orders must be strictly increasing (atom {j})"),
                ));
            }
        }
        Ok(FiniteAtoms { atoms })
    }

    /// Convenience constructor from `(beta, c)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(b, c)| Atom::new(b, c)).collect())
    }

    pub fn single(beta: f64, c: f64) -> Result<Self> {
        Self::new(vec![Atom::new(beta, c)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn beta_max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].beta
    }

    pub fn beta_min(&self) -> f64 {
        self.atoms[0].beta
    }

    /// ψ_W(s) = Σ c_j^{β_j} s^{β_j}, exact.
    pub fn psi(&self, s: f64) -> f64 {
        self.atoms.iter().map(|a| a.coefficient() * s.powf(a.beta)).sum()
    }

    /// ψ_W on the principal branch of s^β.
    pub fn psi_complex(&self, s: Complex64) -> Complex64 {
        let ln_s = s.ln();
        self.atoms
            .iter()
            .map(|a| (ln_s * a.beta).exp() * a.coefficient())
            .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
    }

    /// Lévy-measure tail bound k_e(t) = (c_j^{β_j} sin(β_j π))^{-1} t^{β_j−1}
    /// for atom `j` (0-based).
    pub fn kernel_bound_ke(&self, j: usize, t: f64) -> Result<f64> {
        let a = self.atoms.get(j).ok_or(Error::Index { op: "kernel_bound_ke", index: j, len: self.atoms.len() })?;
        if !(t > 0.0) {
            return Err(Error::domain("kernel_bound_ke", format!("t = {t} must be positive")));
        }
        Ok(t.powf(a.beta - 1.0) / (a.coefficient() * (a.beta * PI).sin()))
    }

    /// The bound obtained by carrying the Laplace-inversion estimate through
    /// with ψ_W(s) = Σ c_j^{β_j}s^{β_j}: k_e(t)·Γ(1−β_j)/π.
    pub fn kernel_bound_ke_derived(&self, j: usize, t: f64) -> Result<f64> {
        let ke = self.kernel_bound_ke(j, t)?;
        Ok(ke * gamma_unchecked(1.0 - self.atoms[j].beta) / PI)
    }

    /// k_e(t)·max(1, Γ(1−β_j)²/π); dominates both the stated bound and the
    /// bound with the extra Gamma factors.
    pub fn kernel_bound_ke_conservative(&self, j: usize, t: f64) -> Result<f64> {
        let ke = self.kernel_bound_ke(j, t)?;
        let g = gamma_unchecked(1.0 - self.atoms[j].beta);
        Ok(ke * (g * g / PI).max(1.0))
    }
}

/// Named density families accepted by the run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityKind {
    /// p(β) = value.
    Uniform { value: f64 },
    /// p(β) = scale · (1 − β)^exponent.
    Power { scale: f64, exponent: f64 },
    /// Caller-supplied evaluator.
    Custom,
}

/// μ(dβ) = p(β)dβ on (lower, upper).
#[derive(Clone)]
pub struct ContinuousDensity {
    lower: f64,
    upper: f64,
    kind: DensityKind,
    p: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ContinuousDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousDensity")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("kind", &self.kind)
            .finish()
    }
}

impl ContinuousDensity {
    /// A density given by an arbitrary callback. The callback is trusted to be
    /// nonnegative and continuously differentiable on the support.
    pub fn new(lower: f64, upper: f64, p: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::with_kind(lower, upper, DensityKind::Custom, Arc::new(p))
    }

    pub fn uniform(lower: f64, upper: f64, value: f64) -> Result<Self> {
        Self::with_kind(lower, upper, DensityKind::Uniform { value }, Arc::new(move |_| value))
    }

    pub fn power(lower: f64, upper: f64, scale: f64, exponent: f64) -> Result<Self> {
        Self::with_kind(
            lower,
            upper,
            DensityKind::Power { scale, exponent },
            Arc::new(move |b: f64| scale * (1.0 - b).powf(exponent)),
        )
    }

    fn with_kind(lower: f64, upper: f64, kind: DensityKind, p: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        if !(lower > 0.0 && lower < upper && upper <= 1.0) {
            return Err(Error::domain(
                "ContinuousDensity",
                format!("support ({lower}, {upper}) must satisfy 0 < lower < upper <= 1"),
            ));
        }
        let d = ContinuousDensity { lower, upper, kind, p };
        let mass = d.mass()?;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::domain("ContinuousDensity", format!("total mass {mass} must be positive and finite")));
        }
        Ok(d)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn density(&self, beta: f64) -> f64 {
        (self.p)(beta)
    }

    /// p(1 − gap), computed without forming 1 − gap for the power family.
    pub fn density_at_gap(&self, gap: f64) -> f64 {
        match self.kind {
            DensityKind::Power { scale, exponent } => scale * gap.powf(exponent),
            DensityKind::Uniform { value } => value,
            DensityKind::Custom => (self.p)(1.0 - gap),
        }
    }

    /// Whether the support reaches β = 1, where Γ(1−β) has its pole.
    pub fn touches_one(&self) -> bool {
        self.upper >= 1.0
    }

    /// ∫ g(β) p(β) dβ over the support. Near β = 1 the substitution
    /// β = 1 − e^{-u} is applied.
    pub fn integrate<T: QuadValue>(&self, op: &'static str, tol: Tolerance, g: impl Fn(f64) -> T) -> Result<T> {
        if !self.touches_one() {
            return quad::adaptive(op, self.lower, self.upper, tol, |b| g(b) * self.density(b));
        }
        let split = self.lower.max(0.5);
        let head = quad::adaptive(op, self.lower, split, tol, |b| g(b) * self.density(b))?;
        let u0 = -(1.0 - split).ln();
        let tail = quad::adaptive(op, u0, U_CUTOFF, tol, |u| {
            let e = (-u).exp();
            let b = 1.0 - e;
            g(b) * (self.density_at_gap(e) * e)
        })?;
        Ok(head + tail)
    }

    /// μ(0, 1). For supports reaching β = 1 this is the mass on
    /// (lower, 1 − e^{-37}); use the moment condition to detect divergence.
    pub fn mass(&self) -> Result<f64> {
        self.integrate("mass", Tolerance::default(), |_| 1.0)
    }

    /// C(β₀, β₁, p) = ∫ sin(βπ) Γ(1−β) p(β) dβ.
    pub fn kernel_constant(&self) -> Result<f64> {
        if self.touches_one() {
            return Err(Error::precondition(
                "kernel_bound_k",
                "support must end strictly below 1 so that Γ(1−β₁) is finite",
            ));
        }
        self.integrate("kernel_bound_k", Tolerance::default(), |b| (b * PI).sin() * gamma_unchecked(1.0 - b))
    }

    /// k(t) = [Cπ]^{-1}[Γ(1−β₁)t^{β₁−1} + Γ(1−β₀)t^{β₀−1}].
    pub fn kernel_bound_k(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain("kernel_bound_k", format!("t = {t} must be positive")));
        }
        let c = self.kernel_constant()?;
        if !(c > 0.0) {
            return Err(Error::precondition("kernel_bound_k", format!("C(β₀, β₁, p) = {c} is not positive")));
        }
        let hi = gamma(1.0 - self.upper)? * t.powf(self.upper - 1.0);
        let lo = gamma(1.0 - self.lower)? * t.powf(self.lower - 1.0);
        Ok((hi + lo) / (c * PI))
    }

    /// Fixed quadrature nodes (β_q, w_q p(β_q)) for repeated integration
    /// against μ. Uses `panels` Gauss panels of 20 points; supports reaching
    /// β = 1 are mapped through β = 1 − e^{-u}.
    pub fn nodes(&self, panels: usize) -> Vec<(f64, f64)> {
        let rule = quad::rule20();
        let mut out = Vec::new();
        if !self.touches_one() {
            let (xs, ws) = rule.composite_nodes(self.lower, self.upper, panels);
            for (b, w) in xs.into_iter().zip(ws) {
                out.push((b, w * self.density(b)));
            }
            return out;
        }
        let split = self.lower.max(0.5);
        if split > self.lower {
            let (xs, ws) = rule.composite_nodes(self.lower, split, panels);
            for (b, w) in xs.into_iter().zip(ws) {
                out.push((b, w * self.density(b)));
            }
        }
        let u0 = -(1.0 - split).ln();
        let (us, ws) = rule.composite_nodes(u0, U_CUTOFF, panels.max(2 * (U_CUTOFF - u0).ceil() as usize));
        for (u, w) in us.into_iter().zip(ws) {
            let e = (-u).exp();
            let b = 1.0 - e;
            if b < 1.0 {
                out.push((b, w * e * self.density_at_gap(e)));
            }
        }
        out
    }

    /// Discretizes μ into Gauss-node atoms: node β_q with quadrature weight
    /// w_q becomes an atom with c_q^{β_q} = w_q Γ(1−β_q) p(β_q), so the
    /// atomic ψ_W is the quadrature of the continuous one.
    pub fn to_atoms(&self, nodes: usize) -> Result<FiniteAtoms> {
        if self.touches_one() {
            return Err(Error::precondition(
                "to_atoms",
                "support touching 1 cannot be discretized into atoms in (0, 1) with finite c",
            ));
        }
        let rule = quad::GaussRule::new(nodes);
        let (xs, ws) = rule.composite_nodes(self.lower, self.upper, 1);
        let mut atoms = Vec::with_capacity(nodes);
        for (b, w) in xs.into_iter().zip(ws) {
            let coef = w * gamma_unchecked(1.0 - b) * self.density(b);
            if coef > 0.0 {
                atoms.push(Atom::new(b, coef.powf(1.0 / b)));
            }
        }
        FiniteAtoms::new(atoms)
    }
}

/// Outcome of [`MixingMeasure::check_moment_condition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCondition {
    pub finite: bool,
    /// ∫ μ(dβ)/(1−β) when finite, `f64::INFINITY` otherwise.
    pub value: f64,
}

/// The base mixing measure μ.
#[derive(Debug, Clone)]
pub enum MixingMeasure {
    Atoms(FiniteAtoms),
    Density(ContinuousDensity),
}

impl From<FiniteAtoms> for MixingMeasure {
    fn from(a: FiniteAtoms) -> Self {
        MixingMeasure::Atoms(a)
    }
}

impl From<ContinuousDensity> for MixingMeasure {
    fn from(d: ContinuousDensity) -> Self {
        MixingMeasure::Density(d)
    }
}

impl MixingMeasure {
    /// μ(0, 1).
    pub fn mass(&self) -> Result<f64> {
        match self {
            MixingMeasure::Atoms(a) => Ok(a.atoms().iter().map(Atom::mu_weight).sum()),
            MixingMeasure::Density(d) => d.mass(),
        }
    }

    /// Largest order in the support.
    pub fn beta_max(&self) -> f64 {
        match self {
            MixingMeasure::Atoms(a) => a.beta_max(),
            MixingMeasure::Density(d) => d.upper(),
        }
    }

    /// Lévy exponent ψ_W(s) = ∫ s^β Γ(1−β) μ(dβ).
    pub fn levy_exponent(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain("levy_exponent", format!("s = {s} must be positive")));
        }
        match self {
            MixingMeasure::Atoms(a) => Ok(a.psi(s)),
            MixingMeasure::Density(d) => {
                if d.touches_one() && !self.check_moment_condition().finite {
                    return Err(Error::numerical("levy_exponent", "∫Γ(1−β)μ(dβ) diverges at β = 1"));
                }
                d.integrate("levy_exponent", Tolerance::default(), |b| s.powf(b) * gamma_unchecked(1.0 - b))
            }
        }
    }

    /// ψ_W at complex s on the principal branch.
    pub fn levy_exponent_complex(&self, s: Complex64) -> Result<Complex64> {
        match self {
            MixingMeasure::Atoms(a) => Ok(a.psi_complex(s)),
            MixingMeasure::Density(d) => {
                let ln_s = s.ln();
                d.integrate("levy_exponent", Tolerance::default(), |b| (ln_s * b).exp() * gamma_unchecked(1.0 - b))
            }
        }
    }

    /// Lévy-measure tail φ_W(t, ∞) = ∫ t^{-β} μ(dβ).
    pub fn levy_tail(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain("levy_tail", format!("t = {t} must be positive")));
        }
        match self {
            MixingMeasure::Atoms(a) => Ok(a.atoms().iter().map(|at| at.mu_weight() * t.powf(-at.beta)).sum()),
            MixingMeasure::Density(d) => d.integrate("levy_tail", Tolerance::default(), |b| t.powf(-b)),
        }
    }

    /// Checks ∫ μ(dβ)/(1−β) < ∞.
    ///
    /// For densities reaching β = 1 the integral is split into dyadic shells
    /// (1−2^{-k}, 1−2^{-k-1}); the condition holds when the shell masses
    /// decay geometrically, in which case the geometric tail is added.
    pub fn check_moment_condition(&self) -> MomentCondition {
        match self {
            MixingMeasure::Atoms(a) => MomentCondition {
                finite: true,
                value: a.atoms().iter().map(|at| at.mu_weight() / (1.0 - at.beta)).sum(),
            },
            MixingMeasure::Density(d) if !d.touches_one() => {
                match d.integrate("check_moment_condition", Tolerance::default(), |b| 1.0 / (1.0 - b)) {
                    Ok(v) => MomentCondition { finite: true, value: v },
                    Err(_) => MomentCondition { finite: false, value: f64::INFINITY },
                }
            }
            MixingMeasure::Density(d) => moment_by_shells(d),
        }
    }
}

fn moment_by_shells(d: &ContinuousDensity) -> MomentCondition {
    const SHELLS: i32 = 48;
    let divergent = MomentCondition { finite: false, value: f64::INFINITY };
    let integrand = |b: f64| d.density(b) / (1.0 - b);
    let start = d.lower().max(0.5);
    let head = if d.lower() < 0.5 {
        match quad::adaptive("check_moment_condition", d.lower(), 0.5, Tolerance::default(), integrand) {
            Ok(v) => v,
            Err(_) => return divergent,
        }
    } else {
        0.0
    };
    // First shell index whose left edge is at or beyond `start`.
    let k0 = (-(1.0 - start).log2()).ceil() as i32;
    let mut total = head;
    if start < 1.0 - 2f64.powi(-k0) {
        match quad::adaptive("check_moment_condition", start, 1.0 - 2f64.powi(-k0), Tolerance::default(), integrand) {
            Ok(v) => total += v,
            Err(_) => return divergent,
        }
    }
    // shells in the gap variable g = 1 − β
    let shell_integrand = |g: f64| d.density_at_gap(g) / g;
    let mut shells = Vec::with_capacity(SHELLS as usize);
    for k in k0..k0 + SHELLS {
        let lo = 2f64.powi(-k - 1);
        let hi = 2f64.powi(-k);
        match quad::adaptive("check_moment_condition", lo, hi, Tolerance::default(), shell_integrand) {
            Ok(v) => shells.push(v),
            Err(_) => return divergent,
        }
    }
    // Limit comparison: the trailing shell ratio must settle below one.
    let tail = &shells[shells.len() - 8..];
    let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
    let rmax = ratios.iter().cloned().fold(0.0, f64::max);
    if !(rmax < 0.95) || shells.iter().any(|v| !v.is_finite()) {
        return divergent;
    }
    let sum: f64 = shells.iter().sum();
    let last = shells[shells.len() - 1];
    let geometric_tail = last * rmax / (1.0 - rmax);
    MomentCondition { finite: true, value: total + sum + geometric_tail }
}
