//! Constraint-system dump: one line per equation, the sorted unknown IDs
//! followed by the right-hand side in hex.

use std::fmt::Write as _;

use rcds_core::codec::ConstraintSystem;

use super::{field, hex_block, lines};
use crate::error::SimResult;

pub fn write_system(system: &ConstraintSystem) -> String {
    let mut out = String::new();
    for eq in system.equations() {
        for id in eq.unknowns() {
            write!(out, "{id} ").unwrap();
        }
        writeln!(out, "{}", hex::encode(eq.rhs().as_bytes())).unwrap();
    }
    out
}

pub fn read_system(text: &str, unknown_count: usize, block_len: usize) -> SimResult<ConstraintSystem> {
    let mut system = ConstraintSystem::new(unknown_count, block_len);
    for (ln, line) in lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let (payload, ids) = tokens.split_last().expect("non-blank line");
        let ids = ids
            .iter()
            .map(|t| field::<usize>(ln, Some(t), "unknown ID"))
            .collect::<SimResult<Vec<_>>>()?;
        system.add_equation(ids, hex_block(ln, Some(payload))?)?;
    }
    Ok(system)
}
