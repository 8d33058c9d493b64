//! Degree distributions and inverse-transform sampling.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

/// Discrete distribution over the contiguous degrees
/// `first..first + mass.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    first: usize,
    mass: Vec<f64>,
    cdf: Vec<f64>,
}

impl DegreeDistribution {
    /// Builds a distribution from per-degree probabilities starting at
    /// degree `first`. Masses must be non-negative and sum to one within
    /// `1e-9`.
    pub fn from_masses(first: usize, mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::invalid("mass", "empty support"));
        }
        if mass.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("mass", "negative or non-finite probability"));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("mass", "probabilities do not sum to one"));
        }
        let cdf = mass
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(DegreeDistribution { first, mass, cdf })
    }

    pub fn point(degree: usize) -> Self {
        DegreeDistribution {
            first: degree,
            mass: alloc::vec![1.0],
            cdf: alloc::vec![1.0],
        }
    }

    pub fn min_degree(&self) -> usize {
        self.first
    }

    pub fn max_degree(&self) -> usize {
        self.first + self.mass.len() - 1
    }

    /// Probability of `degree`; zero outside the support.
    pub fn mass(&self, degree: usize) -> f64 {
        degree
            .checked_sub(self.first)
            .and_then(|i| self.mass.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, p)| (self.first + i) as f64 * p)
            .sum()
    }

    /// Inverse-transform sample: the smallest degree whose cumulative mass
    /// exceeds a uniform draw, found by binary search.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.first + idx.min(self.mass.len() - 1)
    }
}

/// How the LT cutoff `D` is derived from the overhead `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutoffFormula {
    /// `D = ceil(4 (1 + eps) / eps)`.
    #[default]
    Standard,
    /// `D = ceil(4 (1 + eps) eps)`, clamped to at least 2.
    Literal,
}

// Guards ceil() against products such as 4 * 1.1 / 0.1 = 44.00000000000001.
fn ceil_tolerant(x: f64) -> usize {
    libm::ceil(x - 1e-9) as usize
}

pub fn lt_cutoff(epsilon: f64, formula: CutoffFormula) -> usize {
    let raw = match formula {
        CutoffFormula::Standard => ceil_tolerant(4.0 * (1.0 + epsilon) / epsilon),
        CutoffFormula::Literal => ceil_tolerant(4.0 * (1.0 + epsilon) * epsilon),
    };
    raw.max(2)
}

/// `rho = eps/2 + (eps/2)^2`.
pub fn spike_mass(epsilon: f64) -> f64 {
    let half = epsilon / 2.0;
    half + half * half
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid("epsilon", "must lie in (0, 1]"));
    }
    Ok(())
}

/// LT output-degree law: a modified ideal soliton with a spike at degree
/// one and all tail mass beyond `D` folded into degree `D + 1`.
pub fn raptor_lt_distribution(epsilon: f64) -> Result<DegreeDistribution> {
    raptor_lt_distribution_with(epsilon, CutoffFormula::Standard)
}

pub fn raptor_lt_distribution_with(epsilon: f64, formula: CutoffFormula) -> Result<DegreeDistribution> {
    check_epsilon(epsilon)?;
    let rho = spike_mass(epsilon);
    let d = lt_cutoff(epsilon, formula);
    let norm = 1.0 + rho;
    let mut mass = Vec::with_capacity(d + 1);
    mass.push(rho / norm);
    for i in 2..=d {
        let i = i as f64;
        mass.push(1.0 / (i * (i - 1.0) * norm));
    }
    mass.push(1.0 / (d as f64 * norm));
    DegreeDistribution::from_masses(1, mass)
}

/// `Binomial(trials, p)` over `0..=trials`, evaluated in log space.
pub fn binomial_distribution(trials: usize, p: f64) -> Result<DegreeDistribution> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", "must lie in [0, 1]"));
    }
    if p == 0.0 {
        return Ok(DegreeDistribution::point(0));
    }
    if p == 1.0 {
        return Ok(DegreeDistribution::point(trials));
    }
    let n = trials as f64;
    let (lp, lq) = (libm::log(p), libm::log1p(-p));
    let ln_n_fact = libm::lgamma(n + 1.0);
    let mass: Vec<f64> = (0..=trials)
        .map(|d| {
            let d = d as f64;
            let ln_choose = ln_n_fact - libm::lgamma(d + 1.0) - libm::lgamma(n - d + 1.0);
            libm::exp(ln_choose + d * lp + (n - d) * lq)
        })
        .collect();
    DegreeDistribution::from_masses(0, mass)
}

/// Pre-code in-degree law `Binomial(k, E[b] / m)`: the number of source
/// packets a pre-coding output node absorbs.
pub fn precode_indegree_distribution(k: usize, eb: f64, m: usize) -> Result<DegreeDistribution> {
    if m == 0 || !(eb > 0.0) || eb >= m as f64 {
        return Err(Error::invalid("eb", "need 0 < E[b] < m"));
    }
    binomial_distribution(k, eb / m as f64)
}

/// Left-degree law of the randomized pre-code: how many pre-coding outputs
/// each source feeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftDegree {
    Constant(usize),
    /// Poisson with the given rate, conditioned on `1 <= b <= max`.
    TruncatedPoisson { lambda: f64, max: usize },
}

impl Default for LeftDegree {
    fn default() -> Self {
        LeftDegree::Constant(4)
    }
}

impl LeftDegree {
    pub fn distribution(&self) -> Result<DegreeDistribution> {
        match *self {
            LeftDegree::Constant(b) => {
                if b == 0 {
                    return Err(Error::invalid("left_degree", "constant degree must be positive"));
                }
                Ok(DegreeDistribution::point(b))
            }
            LeftDegree::TruncatedPoisson { lambda, max } => {
                if !(lambda > 0.0) || max == 0 {
                    return Err(Error::invalid("left_degree", "need lambda > 0 and max >= 1"));
                }
                let ln_l = libm::log(lambda);
                let weights: Vec<f64> = (1..=max)
                    .map(|d| libm::exp(d as f64 * ln_l - libm::lgamma(d as f64 + 1.0)))
                    .collect();
                let total: f64 = weights.iter().sum();
                DegreeDistribution::from_masses(1, weights.into_iter().map(|w| w / total).collect())
            }
        }
    }

    /// `E[b]`.
    pub fn mean(&self) -> Result<f64> {
        Ok(self.distribution()?.mean())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand::Rng;

    #[test]
    fn half_overhead_values() {
        let dist = raptor_lt_distribution(0.5).unwrap();
        assert_eq!(dist.max_degree(), 13);
        assert!((spike_mass(0.5) - 0.3125).abs() < 1e-15);
        assert!((dist.mass(1) - 0.3125 / 1.3125).abs() < 1e-12);
        assert!((dist.mass(1) - 0.238095).abs() < 1e-6);
        assert!((dist.mass(2) - 0.380952).abs() < 1e-6);
        assert!((dist.mass(13) - 0.063492).abs() < 1e-6);
        assert_eq!(dist.mass(14), 0.0);
        assert_eq!(dist.mass(0), 0.0);
    }

    #[test]
    fn tenth_overhead_cutoff() {
        assert_eq!(lt_cutoff(0.1, CutoffFormula::Standard), 44);
        let dist = raptor_lt_distribution(0.1).unwrap();
        assert_eq!(dist.max_degree(), 45);
        assert!((dist.mass(1) - 0.0525 / 1.0525).abs() < 1e-12);
    }

    #[test]
    fn literal_cutoff_collapses() {
        assert_eq!(lt_cutoff(0.5, CutoffFormula::Literal), 3);
        assert_eq!(lt_cutoff(0.1, CutoffFormula::Literal), 2);
        let dist = raptor_lt_distribution_with(0.5, CutoffFormula::Literal).unwrap();
        assert!((dist.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalisation_over_random_epsilons() {
        let mut rng = rng_from(11);
        for _ in 0..100 {
            let eps = 1.0 - rng.gen::<f64>() * 0.999;
            let dist = raptor_lt_distribution(eps).unwrap();
            assert!((dist.total_mass() - 1.0).abs() < 1e-12, "eps = {eps}");
            let cdf_end = *dist.cdf().last().unwrap();
            assert!((cdf_end - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilon_range_is_checked() {
        assert!(raptor_lt_distribution(0.0).is_err());
        assert!(raptor_lt_distribution(1.5).is_err());
        assert!(raptor_lt_distribution(1.0).is_ok());
    }

    #[test]
    fn binomial_indegree() {
        let dist = precode_indegree_distribution(20, 3.0, 24).unwrap();
        assert!((dist.mean() - 2.5).abs() < 1e-9);
        assert!((dist.mass(0) - 0.875f64.powi(20)).abs() < 1e-12);
        assert!((dist.mass(0) - 0.069).abs() < 5e-4);
        assert!(precode_indegree_distribution(20, 24.0, 24).is_err());

        // Vanishing rate puts all mass at zero.
        let tiny = precode_indegree_distribution(20, 1e-12, 24).unwrap();
        assert!(tiny.mass(0) > 1.0 - 1e-9);
    }

    #[test]
    fn point_mass_always_samples_its_degree() {
        let mut rng = rng_from(0);
        let dist = DegreeDistribution::point(3);
        assert!((0..1000).all(|_| dist.sample(&mut rng) == 3));
    }

    #[test]
    fn empirical_spike_frequency() {
        let dist = raptor_lt_distribution(0.5).unwrap();
        let mut rng = rng_from(2024);
        let draws = 1_000_000;
        let ones = (0..draws).filter(|_| dist.sample(&mut rng) == 1).count();
        let freq = ones as f64 / draws as f64;
        assert!((freq - 0.2381).abs() < 0.002, "freq = {freq}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let dist = raptor_lt_distribution(0.5).unwrap();
        let a: Vec<usize> = {
            let mut rng = rng_from(9);
            (0..64).map(|_| dist.sample(&mut rng)).collect()
        };
        let mut rng = rng_from(9);
        assert!(a.iter().all(|&d| d == dist.sample(&mut rng)));
    }

    #[test]
    fn truncated_poisson_left_degree() {
        let ld = LeftDegree::TruncatedPoisson { lambda: 3.0, max: 12 };
        let dist = ld.distribution().unwrap();
        assert_eq!(dist.min_degree(), 1);
        assert!((dist.total_mass() - 1.0).abs() < 1e-12);
        // Zero-truncated Poisson mean is lambda / (1 - e^-lambda) before the
        // upper cut, which removes almost nothing at max = 12.
        let expect = 3.0 / (1.0 - (-3.0f64).exp());
        assert!((ld.mean().unwrap() - expect).abs() < 1e-3);
        assert_eq!(LeftDegree::default().mean().unwrap(), 4.0);
    }

    #[test]
    fn rejects_unnormalised() {
        assert!(DegreeDistribution::from_masses(0, alloc::vec![0.5, 0.4]).is_err());
        assert!(DegreeDistribution::from_masses(0, alloc::vec![1.5, -0.5]).is_err());
    }
}
