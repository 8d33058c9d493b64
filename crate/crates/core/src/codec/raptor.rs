//! Raptor layering: a sparse random pre-code followed by LT symbols over
//! the pre-coded (intermediate) blocks, plus the two-stage decoder used on
//! both centrally encoded streams and distributed storage.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use super::block::{xor_combine, Block};
use super::system::{cancel_pairs, gauss_decode, peel_decode, ConstraintSystem};
use super::SystemParams;
use crate::error::{Error, Result};

/// Source lineage of every intermediate block: `precode[w]` lists the
/// source indices XORed into intermediate `w`.
pub type Precode = Vec<Vec<usize>>;

/// An LT-coded symbol: the XOR of the listed intermediates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LtSymbol {
    pub intermediates: Vec<usize>,
    pub block: Block,
}

/// Source-level lineage of a combination of intermediates (pairs cancel).
pub fn expand_lineage(intermediates: &[usize], precode: &[Vec<usize>]) -> Vec<usize> {
    cancel_pairs(
        intermediates
            .iter()
            .flat_map(|&w| precode[w].iter().copied())
            .collect(),
    )
}

/// Output of the reference (non-distributed) encoder.
#[derive(Debug, Clone)]
pub struct CentralizedEncoding {
    pub precode: Precode,
    pub intermediates: Vec<Block>,
    pub symbols: Vec<EncodedSymbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSymbol {
    pub intermediates: Vec<usize>,
    /// Fully expanded source lineage.
    pub lineage: Vec<usize>,
    pub block: Block,
}

impl EncodedSymbol {
    pub fn lt_symbol(&self) -> LtSymbol {
        LtSymbol {
            intermediates: self.intermediates.clone(),
            block: self.block.clone(),
        }
    }
}

/// Centralised Raptor encoder: every source feeds `b ~ Omega_L` distinct
/// intermediates, each intermediate is the XOR of its incoming sources,
/// and each of the `count` output symbols XORs `d ~ Omega_r` distinct
/// intermediates.
pub fn centralized_raptor_encode<R: Rng + ?Sized>(
    sources: &[Block],
    params: &SystemParams,
    count: usize,
    rng: &mut R,
) -> Result<CentralizedEncoding> {
    if sources.len() != params.k {
        return Err(Error::invalid("sources", "expected exactly k source blocks"));
    }
    let m = params.m;
    let left = params.left_degree.distribution()?;
    let lt = params.lt_distribution()?;

    let mut precode: Precode = vec![Vec::new(); m];
    for s in 0..params.k {
        let b = left.sample(rng).min(m);
        for w in index::sample(rng, m, b) {
            precode[w].push(s);
        }
    }
    precode.iter_mut().for_each(|l| l.sort_unstable());
    let intermediates = precode
        .iter()
        .map(|l| xor_combine(params.payload_len, l.iter().map(|&s| &sources[s])))
        .collect::<Result<Vec<_>>>()?;

    let symbols = (0..count)
        .map(|_| {
            let d = lt.sample(rng).min(m);
            let mut ids = index::sample(rng, m, d).into_vec();
            ids.sort_unstable();
            let block = xor_combine(params.payload_len, ids.iter().map(|&w| &intermediates[w]))?;
            let lineage = expand_lineage(&ids, &precode);
            Ok(EncodedSymbol {
                intermediates: ids,
                lineage,
                block,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CentralizedEncoding {
        precode,
        intermediates,
        symbols,
    })
}

/// Result of [`two_stage_decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoStageOutcome {
    pub sources: Vec<Option<Block>>,
    /// Intermediates known once belief propagation stalls.
    pub intermediates_recovered: usize,
    /// Sources recovered by belief propagation alone.
    pub bp_recovered: usize,
    /// Sources recovered after the elimination fallback on the pre-code.
    pub recovered: usize,
}

impl TwoStageOutcome {
    pub fn success(&self) -> bool {
        self.recovered == self.sources.len()
    }

    pub fn bp_success(&self) -> bool {
        self.bp_recovered == self.sources.len()
    }
}

/// Elimination used once belief propagation stalls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fallback {
    /// Elimination over the whole two-layer system: symbol equations and
    /// pre-code relations together.
    #[default]
    Joint,
    /// Elimination over the pre-code relations of the intermediates that
    /// peeling recovered.
    PrecodeOnly,
}

impl Fallback {
    pub fn as_str(self) -> &'static str {
        match self {
            Fallback::Joint => "joint",
            Fallback::PrecodeOnly => "precode-only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "joint" => Some(Fallback::Joint),
            "precode-only" => Some(Fallback::PrecodeOnly),
            _ => None,
        }
    }
}

/// Two-stage Raptor decoding.
///
/// Stage 1 peels the LT symbols for intermediates; stage 2 peels the
/// pre-code relations `y_w = XOR(precode[w])` for sources. The two stages
/// are run jointly (one peeling pass over intermediates and sources), which
/// is their fixed point. If sources are still missing, elimination takes
/// over as selected by `fallback`.
pub fn two_stage_decode(
    precode: &[Vec<usize>],
    symbols: &[LtSymbol],
    k: usize,
    block_len: usize,
    fallback: Fallback,
) -> Result<TwoStageOutcome> {
    let m = precode.len();
    // Unknowns 0..m are intermediates, m..m+k are sources.
    let mut joint = ConstraintSystem::new(m + k, block_len);
    for sym in symbols {
        joint.add_equation(sym.intermediates.iter().copied(), sym.block.clone())?;
    }
    for (w, lineage) in precode.iter().enumerate() {
        if lineage.iter().any(|&s| s >= k) {
            return Err(Error::invalid("precode", "source index out of range"));
        }
        joint.add_equation(
            core::iter::once(w).chain(lineage.iter().map(|&s| m + s)),
            Block::zero(block_len),
        )?;
    }
    let bp = peel_decode(&joint);
    let mut values = bp.values;
    let intermediates_recovered = values[..m].iter().filter(|v| v.is_some()).count();
    let mut sources: Vec<Option<Block>> = values.split_off(m);
    let bp_recovered = sources.iter().filter(|v| v.is_some()).count();

    let mut recovered = bp_recovered;
    if bp_recovered < k {
        match fallback {
            Fallback::Joint => {
                let mut ge = gauss_decode(&joint).decoded.values;
                sources = ge.split_off(m);
            }
            Fallback::PrecodeOnly => {
                let mut stage2 = ConstraintSystem::new(k, block_len);
                for (w, y) in values.iter().enumerate() {
                    if let Some(y) = y {
                        stage2.add_equation(precode[w].iter().copied(), y.clone())?;
                    }
                }
                for (s, x) in sources.iter().enumerate() {
                    if let Some(x) = x {
                        stage2.add_equation([s], x.clone())?;
                    }
                }
                sources = gauss_decode(&stage2).decoded.values;
            }
        }
        recovered = sources.iter().filter(|v| v.is_some()).count();
    }

    Ok(TwoStageOutcome {
        sources,
        intermediates_recovered,
        bp_recovered,
        recovered,
    })
}

/// Maximum-likelihood reference: every symbol is expanded to its source
/// lineage and the resulting single-layer system is solved by elimination.
pub fn composite_gauss_decode(
    precode: &[Vec<usize>],
    symbols: &[LtSymbol],
    k: usize,
    block_len: usize,
) -> Result<super::system::GaussOutcome> {
    let mut sys = ConstraintSystem::new(k, block_len);
    for sym in symbols {
        sys.add_equation(expand_lineage(&sym.intermediates, precode), sym.block.clone())?;
    }
    Ok(gauss_decode(&sys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn random_sources(k: usize, len: usize, seed: u64) -> Vec<Block> {
        let mut rng = rng_from(seed);
        (0..k).map(|_| Block::random(len, &mut rng)).collect()
    }

    #[test]
    fn single_source_outputs_equal_source() {
        let params = SystemParams::new(10, 1, 0.5).unwrap();
        assert_eq!(params.m, 1);
        let src = random_sources(1, params.payload_len, 1);
        let enc = centralized_raptor_encode(&src, &params, 50, &mut rng_from(2)).unwrap();
        assert!(enc.symbols.iter().all(|s| s.block == src[0]));
    }

    #[test]
    fn lineage_expansion_matches_blocks() {
        let params = SystemParams::new(400, 100, 0.5).unwrap();
        let src = random_sources(100, params.payload_len, 3);
        let enc = centralized_raptor_encode(&src, &params, 300, &mut rng_from(4)).unwrap();
        for (w, lineage) in enc.precode.iter().enumerate() {
            let y = xor_combine(params.payload_len, lineage.iter().map(|&s| &src[s])).unwrap();
            assert_eq!(y, enc.intermediates[w]);
        }
        for sym in &enc.symbols {
            let x = xor_combine(params.payload_len, sym.lineage.iter().map(|&s| &src[s])).unwrap();
            assert_eq!(x, sym.block);
        }
    }

    #[test]
    fn decoding_is_exact_and_dominated_by_oracle() {
        let params = SystemParams::new(200, 30, 0.5).unwrap();
        for trial in 0..50 {
            let src = random_sources(30, params.payload_len, 100 + trial);
            let enc = centralized_raptor_encode(&src, &params, 45, &mut rng_from(trial)).unwrap();
            let syms: Vec<LtSymbol> = enc.symbols.iter().map(EncodedSymbol::lt_symbol).collect();
            let out = two_stage_decode(&enc.precode, &syms, 30, params.payload_len, Fallback::Joint).unwrap();
            let restricted =
                two_stage_decode(&enc.precode, &syms, 30, params.payload_len, Fallback::PrecodeOnly).unwrap();
            assert!(restricted.recovered <= out.recovered);
            assert_eq!(restricted.bp_recovered, out.bp_recovered);
            let oracle = composite_gauss_decode(&enc.precode, &syms, 30, params.payload_len).unwrap();
            assert!(out.bp_recovered <= out.recovered);
            assert_eq!(oracle.decoded.solved, out.recovered);
            for (s, v) in out.sources.iter().enumerate() {
                if let Some(v) = v {
                    assert_eq!(v, &src[s]);
                    assert!(oracle.decoded.is_solved(s));
                }
            }
        }
    }

    #[test]
    fn no_symbols_means_failure() {
        let params = SystemParams::new(50, 5, 0.5).unwrap();
        let src = random_sources(5, params.payload_len, 0);
        let enc = centralized_raptor_encode(&src, &params, 0, &mut rng_from(0)).unwrap();
        let out = two_stage_decode(&enc.precode, &[], 5, params.payload_len, Fallback::Joint).unwrap();
        assert!(!out.success());
    }
}
