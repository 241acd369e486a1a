//! Exact heat semigroup through a dense eigendecomposition of the Laplacian.
//!
//! `Δ = D^{-r}(D − W)` is self-adjoint for the `d^r`-weighted product, so
//! `M = D^{-r/2}(D − W)D^{-r/2}` is a symmetric matrix similar to it. With
//! `M = QΛQᵀ` the spectral coefficients of `u` are `c = Qᵀ D^{r/2} u` and
//! `e^{-tΔ}u = D^{-r/2} Q e^{-tΛ} c`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::vertex::VertexFunction;

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    // Columns are orthonormal eigenvectors of the symmetrized matrix.
    vectors: DMatrix<f64>,
    sqrt_dr: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn new(g: &Graph) -> Result<Self> {
        let n = g.n_vertices();
        let sqrt_dr: Vec<f64> = g.degree_powers().iter().map(|d| d.sqrt()).collect();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let entry = if i == j { g.degree(i) } else { -g.weight(i, j) };
            entry / (sqrt_dr[i] * sqrt_dr[j])
        });
        let eig =
            SymmetricEigen::try_new(m, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::Eigensolver)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        // The smallest eigenvalue is 0 up to rounding.
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
        let vectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
        Ok(Self {
            eigenvalues,
            vectors,
            sqrt_dr,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.sqrt_dr.len()
    }

    /// Eigenvalues of Δ in increasing order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `‖Δ‖`, the largest eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty graph")
    }

    /// Coordinates of `u` in the eigenbasis, orthonormal for the vertex product.
    pub fn forward(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_vertices(), u.len())?;
        Ok(self.to_spectral(u))
    }

    /// Inverse of [`forward`](Self::forward).
    pub fn backward(&self, c: &[f64]) -> Result<VertexFunction> {
        check_len(self.n_vertices(), c.len())?;
        Ok(self.from_spectral(c))
    }

    pub(crate) fn to_spectral(&self, u: &[f64]) -> Vec<f64> {
        let x = DVector::from_iterator(u.len(), u.iter().zip(&self.sqrt_dr).map(|(a, s)| a * s));
        (self.vectors.transpose() * x).iter().copied().collect()
    }

    pub(crate) fn from_spectral(&self, c: &[f64]) -> VertexFunction {
        let y = &self.vectors * DVector::from_column_slice(c);
        y.iter()
            .zip(&self.sqrt_dr)
            .map(|(a, s)| a / s)
            .collect::<Vec<_>>()
            .into()
    }

    /// Applies `f(λ_k)` to each spectral coefficient.
    pub fn apply_spectral(&self, u: &[f64], f: impl Fn(f64) -> f64) -> Result<VertexFunction> {
        check_len(self.n_vertices(), u.len())?;
        Ok(self.spectral_map(u, f))
    }

    pub(crate) fn spectral_map(&self, u: &[f64], f: impl Fn(f64) -> f64) -> VertexFunction {
        let mut c = self.to_spectral(u);
        for (ck, &lk) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= f(lk);
        }
        self.from_spectral(&c)
    }

    /// `Δu` reconstructed from the spectrum.
    pub fn laplacian(&self, u: &[f64]) -> Result<VertexFunction> {
        self.apply_spectral(u, |l| l)
    }

    /// `e^{-tΔ}u`.
    pub fn heat_apply(&self, t: f64, u: &[f64]) -> Result<VertexFunction> {
        check_len(self.n_vertices(), u.len())?;
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.heat(t, u))
    }

    pub(crate) fn heat(&self, t: f64, u: &[f64]) -> VertexFunction {
        if t == 0.0 {
            return u.to_vec().into();
        }
        self.spectral_map(u, |l| (-t * l).exp())
    }

    /// `e^{tA}u` with `A = ε^{-1}I − Δ`, i.e. `e^{t/ε} e^{-tΔ} u`.
    pub fn semigroup_with_drift(&self, epsilon: f64, t: f64, u: &[f64]) -> Result<VertexFunction> {
        check_len(self.n_vertices(), u.len())?;
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if t == 0.0 {
            return Ok(u.to_vec().into());
        }
        Ok(self.spectral_map(u, |l| (t / epsilon - t * l).exp()))
    }
}

/// Eigendecomposition of the graph Laplacian.
pub fn decompose(g: &Graph) -> Result<SpectralDecomposition> {
    SpectralDecomposition::new(g)
}
