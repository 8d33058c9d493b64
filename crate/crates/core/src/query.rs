//! Querying storage nodes and estimating the successful decoding
//! probability `Ps`.

use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::codec::{composite_gauss_decode, two_stage_decode, Block, Fallback, LtSymbol};
use crate::error::{Error, Result};
use crate::protocol::StorageOutcome;

/// Default cap on the number of sampled query sets.
pub const DEFAULT_SAMPLE_CAP: usize = 200;

/// `ln C(n, h)` via log-gamma.
pub fn ln_binomial(n: usize, h: usize) -> f64 {
    let (n, h) = (n as f64, h as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(h + 1.0) - libm::lgamma(n - h + 1.0)
}

/// Number of query sets to draw: `floor(C(n, h) / 10)`, at least one and
/// at most `cap`.
pub fn sample_count(n: usize, h: usize, cap: usize) -> usize {
    let ln_m = ln_binomial(n, h) - libm::log(10.0);
    let cap = cap.max(1);
    if ln_m >= libm::log(cap as f64) {
        return cap;
    }
    (libm::floor(libm::exp(ln_m) + 1e-9) as usize).clamp(1, cap)
}

/// Draws query sets of `h` distinct nodes, each uniform without
/// replacement and independent of the others.
pub fn sample_query_sets<R: Rng + ?Sized>(n: usize, h: usize, cap: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    if h == 0 || h > n {
        return Err(Error::invalid("h", "need 1 <= h <= n"));
    }
    Ok((0..sample_count(n, h, cap))
        .map(|_| {
            let mut set = index::sample(rng, n, h).into_vec();
            set.sort_unstable();
            set
        })
        .collect())
}

/// Decoding attempt over one query set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeAttempt {
    /// Every source recovered, each bit-exact.
    pub success: bool,
    /// Success by belief propagation alone.
    pub bp_success: bool,
    pub recovered: Vec<Option<Block>>,
    pub bp_recovered: usize,
    pub intermediates_recovered: usize,
    /// Composite elimination over source lineages succeeded.
    pub oracle_success: bool,
    /// Sources the composite oracle recovered.
    pub oracle_recovered: usize,
    /// A recovered block differed from ground truth (must never happen).
    pub mismatch: bool,
    /// The two-stage decoder recovered a source the oracle did not.
    pub oracle_violation: bool,
}

/// Builds the two-stage system from the queried nodes' storage packets and
/// decodes it. Empty storage packets contribute nothing.
pub fn attempt_decode(outcome: &StorageOutcome, query: &[usize], fallback: Fallback) -> Result<DecodeAttempt> {
    let k = outcome.params.k;
    let len = outcome.params.payload_len;
    let precode = outcome.precode();
    let symbols: Vec<LtSymbol> = query
        .iter()
        .map(|&u| {
            let s = outcome
                .storage
                .get(u)
                .ok_or(Error::invalid("query", "node ID out of range"))?;
            Ok(LtSymbol {
                intermediates: s.precoded_ids.clone(),
                block: s.block.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let decoded = two_stage_decode(&precode, &symbols, k, len, fallback)?;
    let oracle = composite_gauss_decode(&precode, &symbols, k, len)?;

    let mismatch = decoded
        .sources
        .iter()
        .zip(&outcome.source_blocks)
        .any(|(got, truth)| got.as_ref().is_some_and(|b| b != truth));
    let oracle_violation = decoded
        .sources
        .iter()
        .enumerate()
        .any(|(s, v)| v.is_some() && !oracle.decoded.is_solved(s));

    Ok(DecodeAttempt {
        success: decoded.success() && !mismatch,
        bp_success: decoded.bp_success() && !mismatch,
        bp_recovered: decoded.bp_recovered,
        intermediates_recovered: decoded.intermediates_recovered,
        oracle_success: oracle.success(),
        oracle_recovered: oracle.decoded.solved,
        recovered: decoded.sources,
        mismatch,
        oracle_violation,
    })
}

/// 95% Wilson score interval for `successes / trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Tallies of a `Ps` estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub eta: f64,
    pub h: usize,
    /// `M`.
    pub samples: usize,
    /// `M_s`.
    pub successes: usize,
    pub bp_successes: usize,
    pub oracle_successes: usize,
    /// Sum over samples of sources recovered by belief propagation.
    pub peel_recovered_total: usize,
    /// Sum over samples of sources recovered by the full decoder.
    pub recovered_total: usize,
    pub oracle_violations: usize,
    pub mismatches: usize,
}

impl QueryResult {
    pub fn empty(eta: f64, h: usize) -> Self {
        QueryResult {
            eta,
            h,
            samples: 0,
            successes: 0,
            bp_successes: 0,
            oracle_successes: 0,
            peel_recovered_total: 0,
            recovered_total: 0,
            oracle_violations: 0,
            mismatches: 0,
        }
    }

    /// `Ps = M_s / M`.
    pub fn ps(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.successes as f64 / self.samples as f64
        }
    }

    pub fn wilson(&self) -> (f64, f64) {
        wilson_interval(self.successes, self.samples)
    }

    pub fn mean_peel_recovered(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.peel_recovered_total as f64 / self.samples as f64
        }
    }

    fn add(&mut self, attempt: &DecodeAttempt) {
        self.samples += 1;
        self.successes += attempt.success as usize;
        self.bp_successes += attempt.bp_success as usize;
        self.oracle_successes += attempt.oracle_success as usize;
        self.peel_recovered_total += attempt.bp_recovered;
        self.recovered_total += attempt.recovered.iter().filter(|r| r.is_some()).count();
        self.oracle_violations += attempt.oracle_violation as usize;
        self.mismatches += attempt.mismatch as usize;
    }

    /// Pools the tallies of another estimate at the same `(eta, h)`.
    pub fn merge(&mut self, other: &QueryResult) {
        self.samples += other.samples;
        self.successes += other.successes;
        self.bp_successes += other.bp_successes;
        self.oracle_successes += other.oracle_successes;
        self.peel_recovered_total += other.peel_recovered_total;
        self.recovered_total += other.recovered_total;
        self.oracle_violations += other.oracle_violations;
        self.mismatches += other.mismatches;
    }
}

/// `h = round(eta * k)` query nodes for decoding ratio `eta`.
pub fn query_size(eta: f64, k: usize, n: usize) -> Result<usize> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::invalid("eta", "must be positive"));
    }
    let h = libm::round(eta * k as f64) as usize;
    if h == 0 {
        return Err(Error::invalid("eta", "queries no node"));
    }
    if h > n {
        return Err(Error::invalid("eta", "eta * k exceeds n"));
    }
    Ok(h)
}

/// Estimates `Ps` at decoding ratio `eta` from at most `cap` sampled query
/// sets.
pub fn estimate_ps<R: Rng + ?Sized>(
    outcome: &StorageOutcome,
    eta: f64,
    cap: usize,
    fallback: Fallback,
    rng: &mut R,
) -> Result<QueryResult> {
    let n = outcome.storage.len();
    let h = query_size(eta, outcome.params.k, n)?;
    let mut result = QueryResult::empty(eta, h);
    for set in sample_query_sets(n, h, cap, rng)? {
        result.add(&attempt_decode(outcome, &set, fallback)?);
    }
    Ok(result)
}
