//! Topology dump: header `n side radius`, then `id x y` per node, then
//! `u v` per edge with `u < v`. Floats carry 17 significant digits.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rcds_core::GraphTopology;

use super::{expect_end, field, lines};
use crate::error::{SimError, SimResult};

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_topology(g: &GraphTopology) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", g.n(), float(g.side()), float(g.radius())).unwrap();
    for (i, &(x, y)) in g.positions().iter().enumerate() {
        writeln!(out, "{i} {} {}", float(x), float(y)).unwrap();
    }
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

/// Parses a dump and checks that its edge list is exactly the one implied
/// by the positions and radius.
pub fn read_topology(text: &str) -> SimResult<GraphTopology> {
    let mut it = lines(text);
    let (ln, header) = it.next().ok_or_else(|| SimError::parse(1, "empty topology"))?;
    let mut t = header.split_whitespace();
    let n: usize = field(ln, t.next(), "node count")?;
    let side: f64 = field(ln, t.next(), "side")?;
    let radius: f64 = field(ln, t.next(), "radius")?;
    expect_end(ln, t)?;

    let mut positions = Vec::with_capacity(n);
    for i in 0..n {
        let (ln, line) = it
            .next()
            .ok_or_else(|| SimError::parse(0, format!("missing node line {i}")))?;
        let mut t = line.split_whitespace();
        let id: usize = field(ln, t.next(), "node ID")?;
        if id != i {
            return Err(SimError::parse(ln, format!("expected node {i}, found {id}")));
        }
        positions.push((field(ln, t.next(), "x")?, field(ln, t.next(), "y")?));
        expect_end(ln, t)?;
    }

    let mut edges = BTreeSet::new();
    for (ln, line) in it {
        let mut t = line.split_whitespace();
        let u: usize = field(ln, t.next(), "edge endpoint")?;
        let v: usize = field(ln, t.next(), "edge endpoint")?;
        expect_end(ln, t)?;
        if u >= v || v >= n {
            return Err(SimError::parse(ln, "edge must satisfy u < v < n"));
        }
        if !edges.insert((u, v)) {
            return Err(SimError::parse(ln, "duplicate edge"));
        }
    }

    let g = GraphTopology::from_positions(side, radius, positions)?;
    if g.edges().ne(edges.iter().copied()) {
        return Err(SimError::config("edge list disagrees with positions and radius"));
    }
    Ok(g)
}
