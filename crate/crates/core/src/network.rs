//! Random geometric graphs modelling the sensor field.
//!
//! Nodes are dropped uniformly in the square `[0, L]²` and two distinct
//! nodes are linked when their Euclidean distance is at most the
//! connectivity radius (closed ball, so a pair at exactly `r` is adjacent).
//! The region is a hard box; there is no wrap-around.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Target mean degree used when no radius is configured.
pub const DEFAULT_TARGET_DEGREE: f64 = 10.0;

/// Radius giving an expected interior degree of `target`:
/// `r = L * sqrt(target / (pi * n))`.
pub fn radius_for_degree(n: usize, side: f64, target: f64) -> f64 {
    side * libm::sqrt(target / (core::f64::consts::PI * n as f64))
}

pub fn default_radius(n: usize, side: f64) -> f64 {
    radius_for_degree(n, side, DEFAULT_TARGET_DEGREE)
}

/// Immutable undirected graph with node positions.
///
/// Adjacency is kept in compressed sparse row form; every neighbour list is
/// sorted in increasing node order.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTopology {
    side: f64,
    radius: f64,
    positions: Vec<(f64, f64)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl GraphTopology {
    /// Builds the graph induced by the distance rule on given positions.
    pub fn from_positions(side: f64, radius: f64, positions: Vec<(f64, f64)>) -> Result<Self> {
        let n = positions.len();
        if n < 2 {
            return Err(Error::invalid("n", "need at least two nodes"));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::invalid("side", "must be positive"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("radius", "must be positive"));
        }
        if positions
            .iter()
            .any(|&(x, y)| !(0.0..=side).contains(&x) || !(0.0..=side).contains(&y))
        {
            return Err(Error::invalid("positions", "outside [0, L]^2"));
        }

        let lists = neighbor_lists(side, radius, &positions);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        offsets.push(0);
        for list in lists {
            neighbors.extend(list);
            offsets.push(neighbors.len());
        }
        Ok(GraphTopology {
            side,
            radius,
            positions,
            offsets,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.offsets.windows(2).map(|w| w[1] - w[0])
    }

    /// `mu = (1/n) * sum of degrees`.
    pub fn mean_degree(&self) -> f64 {
        self.neighbors.len() as f64 / self.n() as f64
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }
}

fn neighbor_lists(side: f64, radius: f64, positions: &[(f64, f64)]) -> Vec<Vec<u32>> {
    let n = positions.len();
    let r2 = radius * radius;
    // Bucket nodes into square cells of side >= radius; neighbours can only
    // sit in the 3x3 block of cells around a node.
    let cells = libm::floor(side / radius).clamp(1.0, 1024.0) as usize;
    let cell_len = side / cells as f64;
    let cell_of = |c: f64| ((c / cell_len) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in positions.iter().enumerate() {
        buckets[cell_of(y) * cells + cell_of(x)].push(i as u32);
    }

    let mut lists = vec![Vec::new(); n];
    for (u, &(x, y)) in positions.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &v in &buckets[gy * cells + gx] {
                    if v as usize == u {
                        continue;
                    }
                    let (vx, vy) = positions[v as usize];
                    let (dx, dy) = (vx - x, vy - y);
                    if dx * dx + dy * dy <= r2 {
                        lists[u].push(v);
                    }
                }
            }
        }
        lists[u].sort_unstable();
    }
    lists
}

/// Drops `n` nodes uniformly in `[0, side]²` and links every pair within
/// `radius`.
pub fn generate_rgg<R: Rng + ?Sized>(
    n: usize,
    side: f64,
    radius: f64,
    rng: &mut R,
) -> Result<GraphTopology> {
    if n < 2 {
        return Err(Error::invalid("n", "need at least two nodes"));
    }
    if !(side > 0.0) || !(radius > 0.0) {
        return Err(Error::invalid("side/radius", "must be positive"));
    }
    let positions = (0..n)
        .map(|_| (rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect();
    GraphTopology::from_positions(side, radius, positions)
}

/// Breadth-first search from node 0.
pub fn is_connected(g: &GraphTopology) -> bool {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == n
}

/// Picks `k` distinct source nodes uniformly without replacement. The
/// returned IDs are sorted; source index `i` refers to the `i`-th entry.
pub fn choose_sources<R: Rng + ?Sized>(g: &GraphTopology, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::invalid("k", "need at least one source"));
    }
    if k > g.n() {
        return Err(Error::invalid("k", "more sources than nodes"));
    }
    let mut ids = index::sample(rng, g.n(), k).into_vec();
    ids.sort_unstable();
    Ok(ids)
}
