//! Weighted graphs and their discrete calculus.
//!
//! Vertex functions are paired with the degree-weighted inner product
//! `⟨u, v⟩ = Σ u_i v_i d_i^r` and edge functions with
//! `⟨φ, ψ⟩ = ½ Σ φ_ij ψ_ij ω_ij`. The Laplacian
//! `(Δu)_i = d_i^{-r} Σ_j ω_ij (u_i − u_j)` is self-adjoint for the vertex
//! product, and `⟨Δu, v⟩ = ⟨∇u, ∇v⟩`.

use std::collections::VecDeque;

use sha2::{Digest, Sha256};

use crate::error::{check_len, Error, Result};
use crate::vertex::{EdgeFunction, VertexFunction, VertexSet};

/// A finite, simple, connected, undirected graph with positive symmetric
/// weights and a degree exponent `r ∈ [0, 1]`. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    degree_pow: Vec<f64>,
    r: f64,
}

impl Graph {
    /// Builds a graph from a dense row-major weight matrix.
    pub fn from_weights(n: usize, weights: Vec<f64>, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        check_len(n * n, weights.len())?;
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidExponent(r));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(Error::SelfLoop(i));
            }
            for j in 0..n {
                let w = weights[i * n + j];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidWeight { i, j, weight: w });
                }
                if w != weights[j * n + i] {
                    return Err(Error::Asymmetric { i, j });
                }
            }
        }
        let degrees: Vec<f64> = (0..n)
            .map(|i| weights[i * n..(i + 1) * n].iter().sum())
            .collect();
        if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
            return Err(Error::ZeroDegree(i));
        }
        let g = Self {
            n,
            degree_pow: degrees.iter().map(|&d| d.powf(r)).collect(),
            weights,
            degrees,
            r,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph from undirected edges `(i, j, w)`; each unordered pair
    /// may appear once.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], r: f64) -> Result<Self> {
        let mut w = vec![0.0; n * n];
        for &(i, j, x) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidWeight { i, j, weight: x });
            }
            if w[i * n + j] != 0.0 {
                return Err(Error::DuplicateEdge {
                    i: i.min(j),
                    j: i.max(j),
                });
            }
            w[i * n + j] = x;
            w[j * n + i] = x;
        }
        Self::from_weights(n, w, r)
    }

    /// The same weights with a different degree exponent.
    pub fn with_exponent(&self, r: f64) -> Result<Self> {
        Self::from_weights(self.n, self.weights.clone(), r)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for (j, _) in self.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row-major dense weight matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `d_i = Σ_j ω_ij`. Panics if `i` is out of range.
    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// The vertex weights `d_i^r`.
    pub fn degree_powers(&self) -> &[f64] {
        &self.degree_pow
    }

    /// Neighbours of `i` with their weights, in increasing vertex order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let row = &self.weights[i * self.n..(i + 1) * self.n];
        row.iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, &w)| (j, w))
    }

    /// Undirected edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for (j, w) in self.neighbors(i) {
                if i < j {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// `⟨u, v⟩_V = Σ u_i v_i d_i^r`.
    pub fn vertex_inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(self.n, u.len())?;
        check_len(self.n, v.len())?;
        Ok(self.ip(u, v))
    }

    pub(crate) fn ip(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert!(u.len() == self.n && v.len() == self.n);
        u.iter()
            .zip(v)
            .zip(&self.degree_pow)
            .map(|((a, b), d)| a * b * d)
            .sum()
    }

    /// `‖u − v‖_V`.
    pub(crate) fn dist(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter()
            .zip(v)
            .zip(&self.degree_pow)
            .map(|((a, b), d)| (a - b) * (a - b) * d)
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨φ, ψ⟩_E = ½ Σ φ_ij ψ_ij ω_ij`.
    pub fn edge_inner(&self, phi: &EdgeFunction, psi: &EdgeFunction) -> Result<f64> {
        check_len(self.n, phi.n_vertices())?;
        check_len(self.n, psi.n_vertices())?;
        let mut s = 0.0;
        for i in 0..self.n {
            for (j, w) in self.neighbors(i) {
                s += phi.get(i, j) * psi.get(i, j) * w;
            }
        }
        Ok(0.5 * s)
    }

    /// `(∇u)_ij = u_j − u_i` on edges, zero elsewhere.
    pub fn gradient(&self, u: &[f64]) -> Result<EdgeFunction> {
        check_len(self.n, u.len())?;
        let mut phi = EdgeFunction::zeros(self.n);
        for (i, j, _) in self.edges() {
            phi.set(i, j, u[j] - u[i]);
        }
        Ok(phi)
    }

    /// `(Δu)_i = d_i^{-r} Σ_j ω_ij (u_i − u_j)`.
    pub fn laplacian(&self, u: &[f64]) -> Result<VertexFunction> {
        check_len(self.n, u.len())?;
        Ok(self.lap(u))
    }

    pub(crate) fn lap(&self, u: &[f64]) -> VertexFunction {
        (0..self.n)
            .map(|i| {
                let s: f64 = self.neighbors(i).map(|(j, w)| w * (u[i] - u[j])).sum();
                s / self.degree_pow[i]
            })
            .collect::<Vec<_>>()
            .into()
    }

    /// `½‖∇u‖²_E = ¼ Σ_ij ω_ij (u_i − u_j)²`.
    pub fn dirichlet_energy(&self, u: &[f64]) -> Result<f64> {
        check_len(self.n, u.len())?;
        Ok(self.dirichlet(u))
    }

    pub(crate) fn dirichlet(&self, u: &[f64]) -> f64 {
        self.edges()
            .iter()
            .map(|&(i, j, w)| 0.5 * w * (u[i] - u[j]).powi(2))
            .sum()
    }

    /// `TV(u) = ½ Σ_ij ω_ij |u_i − u_j|`.
    pub fn total_variation(&self, u: &[f64]) -> Result<f64> {
        check_len(self.n, u.len())?;
        Ok(self.tv(u))
    }

    pub(crate) fn tv(&self, u: &[f64]) -> f64 {
        self.edges()
            .iter()
            .map(|&(i, j, w)| w * (u[i] - u[j]).abs())
            .sum()
    }

    /// Total weight of edges leaving `s`.
    pub fn cut_weight(&self, s: &VertexSet) -> f64 {
        self.edges()
            .iter()
            .filter(|&&(i, j, _)| s.contains(i) != s.contains(j))
            .map(|&(_, _, w)| w)
            .sum()
    }

    /// `⟨1, 1⟩_V = Σ d_i^r`.
    pub fn volume(&self) -> f64 {
        self.degree_pow.iter().sum()
    }

    /// SHA-256 of the canonical edge list and exponent, as hex.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("n={} r={:?}\n", self.n, self.r));
        for (i, j, w) in self.edges() {
            h.update(format!("{i} {j} {w:?}\n"));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
