//! Deterministic graph families and a seeded random connected graph.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lab::rng;

fn need(n: usize, min: usize, name: &str) -> Result<()> {
    if n < min {
        Err(Error::InvalidParameter(format!(
            "{name} needs at least {min} vertices, got {n}"
        )))
    } else {
        Ok(())
    }
}

pub fn path(n: usize, weight: f64, r: f64) -> Result<Graph> {
    need(n, 2, "path")?;
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, weight)).collect();
    Graph::from_edges(n, &edges, r)
}

pub fn cycle(n: usize, weight: f64, r: f64) -> Result<Graph> {
    need(n, 3, "cycle")?;
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, weight)).collect();
    Graph::from_edges(n, &edges, r)
}

pub fn complete(n: usize, weight: f64, r: f64) -> Result<Graph> {
    need(n, 2, "complete graph")?;
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j, weight)))
        .collect();
    Graph::from_edges(n, &edges, r)
}

/// Vertex 0 joined to each of the other `n − 1`.
pub fn star(n: usize, weight: f64, r: f64) -> Result<Graph> {
    need(n, 2, "star")?;
    let edges: Vec<_> = (1..n).map(|i| (0, i, weight)).collect();
    Graph::from_edges(n, &edges, r)
}

/// Two cliques on `⌈n/2⌉` and `⌊n/2⌋` vertices with intra-cluster weight
/// `weight`, and weight `inter` on every pair across the clusters.
pub fn two_cluster(n: usize, weight: f64, inter: f64, r: f64) -> Result<Graph> {
    need(n, 2, "two-cluster graph")?;
    let half = n.div_ceil(2);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let same = (i < half) == (j < half);
            edges.push((i, j, if same { weight } else { inter }));
        }
    }
    Graph::from_edges(n, &edges, r)
}

/// A random spanning tree plus each remaining pair with probability `p`,
/// weights uniform in `[0.1, 1]`.
pub fn random_connected(n: usize, p: f64, r: f64, seed: u64) -> Result<Graph> {
    need(n, 2, "random graph")?;
    let mut rng = rng(seed);
    let mut w = vec![0.0; n * n];
    let mut set = |i: usize, j: usize, x: f64| {
        w[i * n + j] = x;
        w[j * n + i] = x;
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        set(i, j, rng.gen_range(0.1..=1.0));
    }
    for i in 0..n {
        for j in i + 1..n {
            let draw = rng.gen::<f64>();
            let x = rng.gen_range(0.1..=1.0);
            if draw < p && w[i * n + j] == 0.0 {
                w[i * n + j] = x;
                w[j * n + i] = x;
            }
        }
    }
    Graph::from_weights(n, w, r)
}
