//! Storage outcome text format.
//!
//! ```text
//! algorithm rcds1
//! param n 200            (one line per parameter)
//! transmissions <inference> <precoding> <raptor>
//! source <index> <node> <hex>
//! precoded <id> <origin> |<source>,...| <hex>
//! <node> <d_c> |<precoded id>,...| <hex>
//! ```

use std::fmt::Write as _;

use rcds_core::codec::{CutoffFormula, SystemParams};
use rcds_core::protocol::{
    Algorithm, Diagnostics, PhaseTransmissions, PrecodedPacket, StorageOutcome, StoredPacket,
};

use super::{expect_end, field, hex_block, id_list, lines, parse_id_list};
use crate::config::{format_left_degree, parse_left_degree};
use crate::error::{SimError, SimResult};

pub fn write_storage(outcome: &StorageOutcome) -> String {
    let p = &outcome.params;
    let mut out = String::new();
    writeln!(out, "algorithm {}", outcome.algorithm.as_str()).unwrap();
    writeln!(out, "param n {}", p.n).unwrap();
    writeln!(out, "param k {}", p.k).unwrap();
    writeln!(out, "param epsilon {}", p.epsilon).unwrap();
    writeln!(out, "param c1 {}", p.c1).unwrap();
    writeln!(out, "param c2 {}", p.c2).unwrap();
    writeln!(out, "param payload_len {}", p.payload_len).unwrap();
    writeln!(out, "param left_degree {}", format_left_degree(&p.left_degree)).unwrap();
    let formula = match p.d_formula {
        CutoffFormula::Standard => "standard",
        CutoffFormula::Literal => "literal",
    };
    writeln!(out, "param d_formula {formula}").unwrap();
    let t = &outcome.transmissions;
    writeln!(out, "transmissions {} {} {}", t.inference, t.precoding, t.raptor).unwrap();
    for (i, (node, block)) in outcome.sources.iter().zip(&outcome.source_blocks).enumerate() {
        writeln!(out, "source {i} {node} {}", hex::encode(block.as_bytes())).unwrap();
    }
    for (j, y) in outcome.precoded.iter().enumerate() {
        writeln!(
            out,
            "precoded {j} {} {} {}",
            y.origin,
            id_list(&y.lineage),
            hex::encode(y.block.as_bytes())
        )
        .unwrap();
    }
    for (u, s) in outcome.storage.iter().enumerate() {
        writeln!(
            out,
            "{u} {} {} {}",
            s.d_c,
            id_list(&s.precoded_ids),
            hex::encode(s.block.as_bytes())
        )
        .unwrap();
    }
    out
}

#[derive(Default)]
struct RawParams {
    n: Option<usize>,
    k: Option<usize>,
    epsilon: Option<f64>,
    c1: Option<f64>,
    c2: Option<u32>,
    payload_len: Option<usize>,
    left_degree: Option<String>,
    d_formula: Option<String>,
}

impl RawParams {
    fn build(self) -> SimResult<SystemParams> {
        let missing = |k: &str| SimError::config(format!("storage file lacks param {k}"));
        let mut p = SystemParams::new(
            self.n.ok_or_else(|| missing("n"))?,
            self.k.ok_or_else(|| missing("k"))?,
            self.epsilon.ok_or_else(|| missing("epsilon"))?,
        )?;
        if let Some(c1) = self.c1 {
            p = p.with_c1(c1)?;
        }
        if let Some(c2) = self.c2 {
            p = p.with_c2(c2)?;
        }
        if let Some(len) = self.payload_len {
            p = p.with_payload_len(len)?;
        }
        if let Some(left) = self.left_degree {
            let left = parse_left_degree(&left).ok_or_else(|| SimError::config("bad left_degree"))?;
            p = p.with_left_degree(left)?;
        }
        match self.d_formula.as_deref() {
            None | Some("standard") => {}
            Some("literal") => p = p.with_cutoff_formula(CutoffFormula::Literal)?,
            Some(other) => return Err(SimError::config(format!("bad d_formula {other:?}"))),
        }
        Ok(p)
    }
}

pub fn read_storage(text: &str) -> SimResult<StorageOutcome> {
    let mut algorithm = None;
    let mut raw = RawParams::default();
    let mut transmissions = PhaseTransmissions::default();
    let mut sources = Vec::new();
    let mut source_blocks = Vec::new();
    let mut precoded = Vec::new();
    let mut storage = Vec::new();

    for (ln, line) in lines(text) {
        let mut t = line.split_whitespace();
        let head = t.next().expect("non-blank line");
        match head {
            "algorithm" => {
                let name: String = field(ln, t.next(), "algorithm")?;
                algorithm = Some(Algorithm::parse(&name).ok_or_else(|| SimError::parse(ln, "unknown algorithm"))?);
            }
            "param" => {
                let key: String = field(ln, t.next(), "param name")?;
                let v = t.next();
                match key.as_str() {
                    "n" => raw.n = Some(field(ln, v, "n")?),
                    "k" => raw.k = Some(field(ln, v, "k")?),
                    "epsilon" => raw.epsilon = Some(field(ln, v, "epsilon")?),
                    "c1" => raw.c1 = Some(field(ln, v, "c1")?),
                    "c2" => raw.c2 = Some(field(ln, v, "c2")?),
                    "payload_len" => raw.payload_len = Some(field(ln, v, "payload_len")?),
                    "left_degree" => raw.left_degree = Some(field(ln, v, "left_degree")?),
                    "d_formula" => raw.d_formula = Some(field(ln, v, "d_formula")?),
                    _ => return Err(SimError::parse(ln, format!("unknown param {key:?}"))),
                }
            }
            "transmissions" => {
                transmissions = PhaseTransmissions {
                    inference: field(ln, t.next(), "count")?,
                    precoding: field(ln, t.next(), "count")?,
                    raptor: field(ln, t.next(), "count")?,
                };
            }
            "source" => {
                let i: usize = field(ln, t.next(), "source index")?;
                if i != sources.len() {
                    return Err(SimError::parse(ln, "source lines out of order"));
                }
                sources.push(field(ln, t.next(), "source node")?);
                source_blocks.push(hex_block(ln, t.next())?);
            }
            "precoded" => {
                let j: usize = field(ln, t.next(), "pre-coded ID")?;
                if j != precoded.len() {
                    return Err(SimError::parse(ln, "pre-coded lines out of order"));
                }
                precoded.push(PrecodedPacket {
                    origin: field(ln, t.next(), "origin")?,
                    lineage: parse_id_list(ln, t.next())?,
                    block: hex_block(ln, t.next())?,
                });
            }
            _ => {
                let u: usize = field(ln, Some(head), "node ID")?;
                if u != storage.len() {
                    return Err(SimError::parse(ln, "node lines out of order"));
                }
                storage.push(StoredPacket {
                    d_c: field(ln, t.next(), "d_c")?,
                    precoded_ids: parse_id_list(ln, t.next())?,
                    block: hex_block(ln, t.next())?,
                });
            }
        }
        expect_end(ln, t)?;
    }

    let params = raw.build()?;
    if storage.len() != params.n || sources.len() != params.k {
        return Err(SimError::config("node or source count disagrees with params"));
    }
    if precoded.iter().any(|y| y.lineage.iter().any(|&s| s >= params.k))
        || storage.iter().any(|s| s.precoded_ids.iter().any(|&j| j >= precoded.len()))
    {
        return Err(SimError::config("lineage references an unknown ID"));
    }
    Ok(StorageOutcome {
        algorithm: algorithm.ok_or_else(|| SimError::config("storage file lacks algorithm"))?,
        params,
        sources,
        source_blocks,
        storage,
        precoded,
        transmissions,
        diagnostics: Diagnostics::default(),
    })
}
