//! Seeded random digraph generators.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with `seed`, so the same
//! [`GenSpec`] always yields the same graph on every platform.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GenError;
use crate::graphmat::BoolMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Each ordered pair `(u, v)`, `u != v`, is an edge with probability
    /// `p_edge`; self-loops with the same probability when `allow_loops`.
    Uniform { p_edge: f64, allow_loops: bool },
    /// Watts–Strogatz ring lattice (each vertex joined to its `k / 2` nearest
    /// neighbours on each side), rewired with probability `p`; every
    /// undirected edge is then oriented uniformly at random.
    SmallWorld { k: usize, p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn uniform(n: usize, p_edge: f64, seed: u64) -> Self {
        GenSpec {
            family: Family::Uniform {
                p_edge,
                allow_loops: false,
            },
            n,
            seed,
        }
    }

    pub fn small_world(n: usize, k: usize, p: f64, seed: u64) -> Self {
        GenSpec {
            family: Family::SmallWorld { k, p },
            n,
            seed,
        }
    }

    pub fn generate(&self) -> Result<BoolMatrix, GenError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.family {
            Family::Uniform {
                p_edge,
                allow_loops,
            } => uniform(self.n, p_edge, allow_loops, &mut rng),
            Family::SmallWorld { k, p } => small_world(self.n, k, p, &mut rng),
        }
    }
}

fn check_probability(p: f64) -> Result<(), GenError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GenError::InvalidParameter("probability must lie in [0, 1]"))
    }
}

pub fn uniform<R: Rng + ?Sized>(
    n: usize,
    p_edge: f64,
    allow_loops: bool,
    rng: &mut R,
) -> Result<BoolMatrix, GenError> {
    check_probability(p_edge)?;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if (u != v || allow_loops) && rng.random_bool(p_edge) {
                edges.push((u, v));
            }
        }
    }
    Ok(BoolMatrix::from_edges(n, edges).expect("indices below n"))
}

pub fn small_world<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    p: f64,
    rng: &mut R,
) -> Result<BoolMatrix, GenError> {
    check_probability(p)?;
    if k >= n {
        return Err(GenError::InvalidParameter("small-world degree k must be below n"));
    }
    let half = k / 2;
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|_| BTreeSet::new()).collect();
    for u in 0..n {
        for j in 1..=half {
            let w = (u + j) % n;
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    for j in 1..=half {
        for u in 0..n {
            let v = (u + j) % n;
            if !adj[u].contains(&v) || !rng.random_bool(p) {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let mut edges = Vec::new();
    for (u, nbrs) in adj.iter().enumerate() {
        for &w in nbrs.range(u + 1..) {
            if rng.random_bool(0.5) {
                edges.push((u, w));
            } else {
                edges.push((w, u));
            }
        }
    }
    Ok(BoolMatrix::from_edges(n, edges).expect("indices below n"))
}
