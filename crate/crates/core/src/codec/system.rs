//! XOR constraint systems and their two decoders.
//!
//! An equation states that the XOR of a set of unknown blocks equals a
//! right-hand-side block. [`peel_decode`] is the belief-propagation
//! (peeling) decoder; [`gauss_decode`] is GF(2) elimination and recovers
//! exactly the unknowns that the system determines, which makes it the
//! maximum-likelihood reference for peeling.

use alloc::vec;
use alloc::vec::Vec;

use super::block::Block;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    unknowns: Vec<usize>,
    rhs: Block,
}

impl Equation {
    /// Sorted, duplicate-free unknown IDs.
    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    pub fn rhs(&self) -> &Block {
        &self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    unknown_count: usize,
    block_len: usize,
    equations: Vec<Equation>,
}

/// Sorts `ids` and removes pairs of equal IDs (`x ^ x = 0`).
pub fn cancel_pairs(mut ids: Vec<usize>) -> Vec<usize> {
    ids.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(ids.len());
    for id in ids {
        if out.last() == Some(&id) {
            out.pop();
        } else {
            out.push(id);
        }
    }
    out
}

impl ConstraintSystem {
    pub fn new(unknown_count: usize, block_len: usize) -> Self {
        ConstraintSystem {
            unknown_count,
            block_len,
            equations: Vec::new(),
        }
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown_count
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Adds `XOR(ids) = rhs`. Repeated IDs cancel in pairs.
    pub fn add_equation(&mut self, ids: impl IntoIterator<Item = usize>, rhs: Block) -> Result<()> {
        if rhs.len() != self.block_len {
            return Err(Error::LengthMismatch {
                expected: self.block_len,
                found: rhs.len(),
            });
        }
        let unknowns = cancel_pairs(ids.into_iter().collect());
        if unknowns.last().is_some_and(|&id| id >= self.unknown_count) {
            return Err(Error::invalid("equation", "unknown ID out of range"));
        }
        self.equations.push(Equation { unknowns, rhs });
        Ok(())
    }

    /// True when every equation holds under a complete assignment.
    pub fn is_satisfied_by(&self, values: &[Block]) -> bool {
        self.equations.iter().all(|eq| {
            let mut acc = eq.rhs.clone();
            for &id in &eq.unknowns {
                acc.xor_assign(&values[id]);
            }
            acc.is_zero()
        })
    }
}

/// Values recovered by a decoder; `None` marks an unknown it could not
/// determine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub values: Vec<Option<Block>>,
    pub solved: usize,
}

impl Decoded {
    pub fn is_complete(&self) -> bool {
        self.solved == self.values.len()
    }

    pub fn is_solved(&self, id: usize) -> bool {
        self.values[id].is_some()
    }
}

/// Peeling decoder: repeatedly resolves an equation with exactly one
/// unresolved unknown and substitutes the value into every other equation
/// containing it. Runs in time linear in the number of equation entries.
pub fn peel_decode(system: &ConstraintSystem) -> Decoded {
    let n = system.unknown_count;
    let eqs = &system.equations;
    let mut occurrences: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (e, eq) in eqs.iter().enumerate() {
        for &id in &eq.unknowns {
            occurrences[id].push(e as u32);
        }
    }
    let mut remaining: Vec<usize> = eqs.iter().map(|eq| eq.unknowns.len()).collect();
    let mut rhs: Vec<Option<Block>> = vec![None; eqs.len()];
    let mut ripple: Vec<usize> = (0..eqs.len()).filter(|&e| remaining[e] == 1).collect();
    let mut values: Vec<Option<Block>> = vec![None; n];
    let mut solved = 0;

    while let Some(e) = ripple.pop() {
        if remaining[e] != 1 {
            continue;
        }
        let Some(&id) = eqs[e].unknowns.iter().find(|&&id| values[id].is_none()) else {
            continue;
        };
        let value = rhs[e].take().unwrap_or_else(|| eqs[e].rhs.clone());
        for &f in &occurrences[id] {
            let f = f as usize;
            if f == e || remaining[f] == 0 {
                continue;
            }
            rhs[f].get_or_insert_with(|| eqs[f].rhs.clone()).xor_assign(&value);
            remaining[f] -= 1;
            if remaining[f] == 1 {
                ripple.push(f);
            }
        }
        remaining[e] = 0;
        values[id] = Some(value);
        solved += 1;
    }
    Decoded { values, solved }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussOutcome {
    pub decoded: Decoded,
    pub rank: usize,
}

impl GaussOutcome {
    /// Full rank: every unknown is determined.
    pub fn success(&self) -> bool {
        self.decoded.is_complete()
    }
}

/// Gauss-Jordan elimination over GF(2) on the incidence matrix, carrying
/// the right-hand blocks along. An unknown is recovered iff its pivot row
/// in reduced row-echelon form has no free columns.
pub fn gauss_decode(system: &ConstraintSystem) -> GaussOutcome {
    let n = system.unknown_count;
    let words = n.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(system.len());
    let mut rhs: Vec<Block> = Vec::with_capacity(system.len());
    for eq in &system.equations {
        let mut row = vec![0u64; words];
        for &id in &eq.unknowns {
            row[id / 64] ^= 1 << (id % 64);
        }
        rows.push(row);
        rhs.push(eq.rhs.clone());
    }

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    for col in 0..n {
        if next == rows.len() {
            break;
        }
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (next..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(next, p);
        rhs.swap(next, p);
        let (pivot_row, pivot_rhs) = (rows[next].clone(), rhs[next].clone());
        for r in 0..rows.len() {
            if r != next && rows[r][w] & bit != 0 {
                rows[r].iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                rhs[r].xor_assign(&pivot_rhs);
            }
        }
        pivots.push((next, col));
        next += 1;
    }

    let mut values = vec![None; n];
    let mut solved = 0;
    for &(r, col) in &pivots {
        let ones: u32 = rows[r].iter().map(|w| w.count_ones()).sum();
        if ones == 1 {
            values[col] = Some(rhs[r].clone());
            solved += 1;
        }
    }
    GaussOutcome {
        decoded: Decoded { values, solved },
        rank: pivots.len(),
    }
}
