//! Coding layer: degree laws, pre-code sizing, XOR blocks, decoders and
//! the reference Raptor encoder.

mod block;
mod distribution;
mod raptor;
mod system;

pub use block::{xor_combine, Block};
pub use distribution::{
    binomial_distribution, lt_cutoff, precode_indegree_distribution, raptor_lt_distribution,
    raptor_lt_distribution_with, spike_mass, CutoffFormula, DegreeDistribution, LeftDegree,
};
pub use raptor::{
    centralized_raptor_encode, composite_gauss_decode, expand_lineage, two_stage_decode,
    CentralizedEncoding, EncodedSymbol, Fallback, LtSymbol, Precode, TwoStageOutcome,
};
pub use system::{
    cancel_pairs, gauss_decode, peel_decode, ConstraintSystem, Decoded, Equation, GaussOutcome,
};

use crate::error::{Error, Result};

/// Pre-code rate `R0 = (1 + eps/2) / (1 + eps)`.
pub fn precode_rate(epsilon: f64) -> f64 {
    (1.0 + epsilon / 2.0) / (1.0 + epsilon)
}

/// Number of pre-coding outputs for `k` sources: `round(k / R0)`.
///
/// Works with a real-valued `k` so locally estimated source counts can be
/// sized the same way.
pub fn precode_output_count(k: f64, epsilon: f64) -> usize {
    libm::round(k / precode_rate(epsilon)) as usize
}

/// `(m, R0)` for `k` sources at overhead `epsilon`.
pub fn precode_params(k: usize, epsilon: f64) -> Result<(usize, f64)> {
    if k == 0 {
        return Err(Error::invalid("k", "need at least one source"));
    }
    distribution::check_epsilon(epsilon)?;
    Ok((precode_output_count(k as f64, epsilon), precode_rate(epsilon)))
}

/// Every scalar the protocols and decoders share.
///
/// Construct with [`SystemParams::new`] and adjust with the `with_*`
/// methods; they keep the derived fields (`m`, `r0`, `rho`, `d`, `eb`)
/// consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub m: usize,
    pub r0: f64,
    pub rho: f64,
    /// LT cutoff `D`.
    pub d: usize,
    pub d_formula: CutoffFormula,
    /// Cover-time constant.
    pub c1: f64,
    /// Inference stop constant.
    pub c2: u32,
    pub payload_len: usize,
    pub left_degree: LeftDegree,
    /// Mean left degree `E[b]`.
    pub eb: f64,
}

impl SystemParams {
    pub const DEFAULT_C1: f64 = 5.0;
    pub const DEFAULT_C2: u32 = 50;
    pub const DEFAULT_PAYLOAD_LEN: usize = 32;

    pub fn new(n: usize, k: usize, epsilon: f64) -> Result<Self> {
        let (m, r0) = precode_params(k, epsilon)?;
        let left_degree = LeftDegree::default();
        let params = SystemParams {
            n,
            k,
            epsilon,
            m,
            r0,
            rho: spike_mass(epsilon),
            d: lt_cutoff(epsilon, CutoffFormula::Standard),
            d_formula: CutoffFormula::Standard,
            c1: Self::DEFAULT_C1,
            c2: Self::DEFAULT_C2,
            payload_len: Self::DEFAULT_PAYLOAD_LEN,
            left_degree,
            eb: left_degree.mean()?,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_c1(mut self, c1: f64) -> Result<Self> {
        self.c1 = c1;
        self.validate().map(|_| self)
    }

    pub fn with_c2(mut self, c2: u32) -> Result<Self> {
        self.c2 = c2;
        self.validate().map(|_| self)
    }

    pub fn with_payload_len(mut self, len: usize) -> Result<Self> {
        self.payload_len = len;
        self.validate().map(|_| self)
    }

    pub fn with_left_degree(mut self, left: LeftDegree) -> Result<Self> {
        self.eb = left.mean()?;
        self.left_degree = left;
        self.validate().map(|_| self)
    }

    pub fn with_cutoff_formula(mut self, formula: CutoffFormula) -> Result<Self> {
        self.d_formula = formula;
        self.d = lt_cutoff(self.epsilon, formula);
        self.validate().map(|_| self)
    }

    pub fn validate(&self) -> Result<()> {
        distribution::check_epsilon(self.epsilon)?;
        if self.k == 0 {
            return Err(Error::invalid("k", "need at least one source"));
        }
        if self.n < 2 {
            return Err(Error::invalid("n", "need at least two nodes"));
        }
        if self.k > self.n {
            return Err(Error::invalid("k", "more sources than nodes"));
        }
        if self.m > self.n {
            return Err(Error::PrecodeTooLarge { m: self.m, n: self.n });
        }
        if !(self.c1 > 0.0) || !self.c1.is_finite() {
            return Err(Error::invalid("c1", "must be positive"));
        }
        if self.c2 == 0 {
            return Err(Error::invalid("c2", "must be a positive integer"));
        }
        if self.payload_len == 0 {
            return Err(Error::invalid("payload_len", "must be positive"));
        }
        if self.d < 2 {
            return Err(Error::invalid("d", "LT cutoff must be at least 2"));
        }
        Ok(())
    }

    /// `Omega_r` for this overhead and cutoff formula.
    pub fn lt_distribution(&self) -> Result<DegreeDistribution> {
        raptor_lt_distribution_with(self.epsilon, self.d_formula)
    }
}
