//! Raptor-coded distributed storage on random geometric graphs.
//!
//! The crate is `no_std` (with `alloc`) and contains every algorithmic piece
//! of the simulator: graph generation, the coding layer (degree
//! distributions, XOR blocks, peeling and Gaussian-elimination decoders),
//! the random-walk engine, the RCDS-I / RCDS-II protocol state machines and
//! the query/decoding evaluation. All randomness is drawn from explicitly
//! passed RNG streams, so every operation is a pure function of its seeds.
//!
//! File formats, experiment orchestration and the command line live in the
//! companion `rcds-sim` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod codec;
pub mod error;
pub mod network;
pub mod protocol;
pub mod query;
pub mod seed;
pub mod trace;
pub mod walkers;

pub use codec::{Block, ConstraintSystem, DegreeDistribution, SystemParams};
pub use error::{Error, Result};
pub use network::GraphTopology;
pub use protocol::{StorageOutcome, StoredPacket};
pub use query::QueryResult;
