//! Continuous-time random walk with order-mixed Pareto waiting times:
//! P(J > u | B = β) = c^{-1}u^{-β} for u ≥ c^{-1/β}.

use rand::Rng;
use rand_distr::Open01;

use crate::error::{Error, Result};
use crate::mixture::{Atom, FiniteAtoms, MixingMeasure};
use crate::speckit::gamma;

/// Points in the inverse-CDF table of a density for B.
pub const TABLE_POINTS: usize = 10_000;

/// Sampler for the order B of each waiting time.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderSampler {
    /// Categorical over atom orders with cumulative probabilities.
    Atoms { betas: Vec<f64>, cdf: Vec<f64> },
    /// Quantiles of B at probabilities k/(TABLE_POINTS−1).
    Table { quantiles: Vec<f64> },
}

impl OrderSampler {
    /// Probabilities proportional to the normalized μ-weights (atoms) or to
    /// the density p (inverse CDF tabulated from quadrature nodes).
    pub fn new(measure: &MixingMeasure) -> Result<Self> {
        match measure {
            MixingMeasure::Atoms(a) => {
                let w: Vec<f64> = a.atoms().iter().map(Atom::mu_weight).collect();
                let total: f64 = w.iter().sum();
                let mut acc = 0.0;
                let cdf = w
                    .iter()
                    .map(|x| {
                        acc += x / total;
                        acc
                    })
                    .collect();
                Ok(OrderSampler::Atoms { betas: a.atoms().iter().map(|x| x.beta).collect(), cdf })
            }
            MixingMeasure::Density(d) => {
                let mut nodes = d.nodes(8);
                nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
                let total: f64 = nodes.iter().map(|n| n.1).sum();
                if !(total > 0.0) || !total.is_finite() {
                    return Err(Error::numerical("OrderSampler", "density mass is not positive and finite"));
                }
                // CDF knots at the support ends and midway between nodes
                let mut xs = vec![d.lower()];
                let mut ps = vec![0.0];
                let mut acc = 0.0;
                for (i, &(b, w)) in nodes.iter().enumerate() {
                    acc += w / total;
                    let right = nodes.get(i + 1).map_or(d.upper(), |n| 0.5 * (b + n.0));
                    xs.push(right);
                    ps.push(acc.min(1.0));
                }
                let last = ps.len() - 1;
                ps[last] = 1.0;
                let quantiles = (0..TABLE_POINTS)
                    .map(|k| {
                        let p = k as f64 / (TABLE_POINTS - 1) as f64;
                        let i = ps.partition_point(|&q| q < p).clamp(1, last);
                        let (p0, p1) = (ps[i - 1], ps[i]);
                        let s = if p1 > p0 { (p - p0) / (p1 - p0) } else { 0.0 };
                        xs[i - 1] + s * (xs[i] - xs[i - 1])
                    })
                    .collect();
                Ok(OrderSampler::Table { quantiles })
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            OrderSampler::Atoms { betas, cdf } => {
                if betas.len() == 1 {
                    return betas[0];
                }
                let u: f64 = rng.random();
                betas[cdf.partition_point(|&p| p <= u).min(betas.len() - 1)]
            }
            OrderSampler::Table { quantiles } => {
                let pos = rng.random::<f64>() * (quantiles.len() - 1) as f64;
                let i = (pos as usize).min(quantiles.len() - 2);
                let s = pos - i as f64;
                quantiles[i] + s * (quantiles[i + 1] - quantiles[i])
            }
        }
    }
}

/// Waiting time J = (cU)^{-1/β}.
#[inline]
pub fn waiting_time<R: Rng + ?Sized>(beta: f64, c: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    (-(c * u).ln() / beta).exp()
}

/// (N_t^c, c^{-1}N_t^c) with N_t^c = max{n : J_1 + … + J_n ≤ t}.
pub fn ctrw_simulate<R: Rng + ?Sized>(orders: &OrderSampler, c: f64, t: f64, rng: &mut R) -> Result<(u64, f64)> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain("ctrw_simulate", format!("scale c = {c} must be positive")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("ctrw_simulate", format!("t = {t} must be positive")));
    }
    let mut sum = 0.0;
    let mut n = 0u64;
    loop {
        sum += waiting_time(orders.sample(rng), c, rng);
        if sum > t {
            return Ok((n, n as f64 / c));
        }
        n += 1;
    }
}

/// Atoms of the subordinator whose inverse is the c → ∞ limit of c^{-1}N_t^c:
/// each order β_j with B-probability w_j contributes (w_jΓ(1−β_j))^{1/β_j}.
pub fn ctrw_limit_atoms(orders: &OrderSampler) -> Result<FiniteAtoms> {
    match orders {
        OrderSampler::Atoms { betas, cdf } => {
            let mut prev = 0.0;
            let mut atoms = Vec::with_capacity(betas.len());
            for (&b, &p) in betas.iter().zip(cdf) {
                let w = p - prev;
                prev = p;
                atoms.push(Atom::new(b, (w * gamma(1.0 - b)?).powf(1.0 / b)));
            }
            FiniteAtoms::new(atoms)
        }
        OrderSampler::Table { .. } => {
            Err(Error::precondition("ctrw_limit_atoms", "limit atoms are defined for atomic order laws only"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::ContinuousDensity;
    use crate::stats::mean_se;
    use crate::stochastic::rng::RngStream;

    #[test]
    fn tail_law_and_threshold() {
        let (beta, c) = (0.5f64, 4.0f64);
        let mut rng = RngStream::new(30, 0).rng();
        let thr = c.powf(-1.0 / beta);
        let v: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let j = waiting_time(beta, c, &mut rng);
                assert!(j >= thr);
                if j > 1.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let (m, se) = mean_se(&v);
        assert!((m - 0.25).abs() < 3.0 * se, "{m}");
    }

    #[test]
    fn atom_probabilities_follow_mu_weights() {
        let atoms = FiniteAtoms::from_pairs(&[(0.3, 1.0), (0.7, 1.0)]).unwrap();
        let s = OrderSampler::new(&atoms.clone().into()).unwrap();
        let w0 = atoms.atoms()[0].mu_weight() / (atoms.atoms()[0].mu_weight() + atoms.atoms()[1].mu_weight());
        let mut rng = RngStream::new(31, 0).rng();
        let v: Vec<f64> = (0..200_000).map(|_| if s.sample(&mut rng) == 0.3 { 1.0 } else { 0.0 }).collect();
        let (m, se) = mean_se(&v);
        assert!((m - w0).abs() < 4.0 * se);
        // single-atom limit: c' = Γ(1/2)² = π
        let one = OrderSampler::new(&FiniteAtoms::single(0.5, 1.0).unwrap().into()).unwrap();
        let lim = ctrw_limit_atoms(&one).unwrap();
        assert!((lim.atoms()[0].c - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn density_table_matches_cdf() {
        let d = ContinuousDensity::uniform(0.2, 0.8, 1.0).unwrap();
        let s = OrderSampler::new(&d.into()).unwrap();
        let OrderSampler::Table { quantiles } = &s else { panic!() };
        assert!((quantiles[0] - 0.2).abs() < 1e-12);
        assert!((quantiles[TABLE_POINTS - 1] - 0.8).abs() < 1e-12);
        let mid = quantiles[(TABLE_POINTS - 1) / 2];
        assert!((mid - 0.5).abs() < 1e-3, "{mid}");
        let mut rng = RngStream::new(32, 0).rng();
        assert!((0..1000).all(|_| (0.2..=0.8).contains(&s.sample(&mut rng))));
    }

    #[test]
    fn counts_are_consistent() {
        let s = OrderSampler::new(&FiniteAtoms::single(0.5, 1.0).unwrap().into()).unwrap();
        let mut rng = RngStream::new(33, 0).rng();
        let (n, scaled) = ctrw_simulate(&s, 100.0, 1.0, &mut rng).unwrap();
        assert_eq!(scaled, n as f64 / 100.0);
        assert!(ctrw_simulate(&s, 0.0, 1.0, &mut rng).is_err());
    }
}
