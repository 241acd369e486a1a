//! Functions on vertices and edges, and vertex subsets.

use std::ops::{Add, Deref, DerefMut, Mul, Sub};

use serde::{Deserialize, Serialize};

/// A real value per vertex. Range constraints are checked by the operations
/// that need them, not by the type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    /// Indicator of the given vertices.
    pub fn indicator(n: usize, members: &[usize]) -> Self {
        let mut v = vec![0.0; n];
        for &i in members {
            v[i] = 1.0;
        }
        Self(v)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "vertex function length mismatch");
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.0)
    }

    pub fn min_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn in_unit_interval(&self) -> bool {
        self.0.iter().all(|&x| (0.0..=1.0).contains(&x))
    }

    /// Every entry is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0 || x == 1.0)
    }

    /// Every entry strictly inside (0, 1).
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0 && x < 1.0)
    }
}

impl Deref for VertexFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for VertexFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for VertexFunction {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Add for &VertexFunction {
    type Output = VertexFunction;
    fn add(self, rhs: &VertexFunction) -> VertexFunction {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &VertexFunction {
    type Output = VertexFunction;
    fn sub(self, rhs: &VertexFunction) -> VertexFunction {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &VertexFunction {
    type Output = VertexFunction;
    fn mul(self, c: f64) -> VertexFunction {
        self.map(|a| a * c)
    }
}

/// Largest absolute entry; 0 for an empty slice.
pub fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// An antisymmetric function on ordered vertex pairs, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeFunction {
    n: usize,
    values: Vec<f64>,
}

impl EdgeFunction {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Sets φ_ij = x and φ_ji = −x.
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.values[i * self.n + j] = x;
        self.values[j * self.n + i] = -x;
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == -self.get(j, i)))
    }
}

/// A subset of the vertices as a membership vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<bool>);

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn from_members(n: usize, members: &[usize]) -> Self {
        let mut s = vec![false; n];
        for &i in members {
            s[i] = true;
        }
        Self(s)
    }

    pub fn from_membership(m: Vec<bool>) -> Self {
        Self(m)
    }

    /// Bit i of `mask` is membership of vertex i.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |m, (i, &b)| m | (b as u64) << i)
    }

    /// Membership of u_i ≥ ½; exact for binary functions.
    pub fn from_indicator(u: &VertexFunction) -> Self {
        Self(u.iter().map(|&x| x >= 0.5).collect())
    }

    pub fn indicator(&self) -> VertexFunction {
        VertexFunction::new(self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn cardinality(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i]).collect()
    }

    pub fn membership(&self) -> &[bool] {
        &self.0
    }

    pub fn symmetric_difference_size(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}
