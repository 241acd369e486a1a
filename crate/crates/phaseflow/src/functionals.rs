//! Energies: the double-obstacle potential, Ginzburg–Landau, the MBO and
//! semi-discrete Lyapunov functionals, and the binary limit functional.

use serde::{Serialize, Serializer};

use crate::error::{check_len, Result};
use crate::graph::Graph;
use crate::params::SchemeParams;
use crate::spectral::SpectralDecomposition;
use crate::vertex::VertexFunction;

/// Values within this distance of 0 or 1 count as binary in [`limit_functional_f0`].
pub const BINARY_QUANTIZATION: f64 = 1e-12;

/// A real number or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::PosInfinity => None,
        }
    }

    /// `f64::INFINITY` for `+∞`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(x) => s.serialize_f64(*x),
            Extended::PosInfinity => s.serialize_str("inf"),
        }
    }
}

/// Energies of a single state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub gl: Extended,
    pub h: f64,
    pub j: f64,
    pub tv: f64,
    pub dirichlet: f64,
}

/// `W(x) = ½x(1−x)` on `[0, 1]`, `+∞` elsewhere.
pub fn double_obstacle_w(x: f64) -> Extended {
    if (0.0..=1.0).contains(&x) {
        Extended::Finite(0.5 * x * (1.0 - x))
    } else {
        Extended::PosInfinity
    }
}

/// `GL_ε(u) = ½‖∇u‖²_E + ε^{-1}⟨W∘u, 1⟩_V`.
pub fn ginzburg_landau(g: &Graph, epsilon: f64, u: &[f64]) -> Result<Extended> {
    check_len(g.n_vertices(), u.len())?;
    Ok(gl(g, epsilon, u))
}

pub(crate) fn gl(g: &Graph, epsilon: f64, u: &[f64]) -> Extended {
    if !u.iter().all(|x| (0.0..=1.0).contains(x)) {
        return Extended::PosInfinity;
    }
    let potential: f64 = u
        .iter()
        .zip(g.degree_powers())
        .map(|(&x, d)| 0.5 * x * (1.0 - x) * d)
        .sum();
    Extended::Finite(g.dirichlet(u) + potential / epsilon)
}

/// `J(u) = ⟨1 − u, e^{-τΔ}u⟩_V`.
pub fn mbo_lyapunov_j(g: &Graph, dec: &SpectralDecomposition, tau: f64, u: &[f64]) -> Result<f64> {
    check_len(g.n_vertices(), u.len())?;
    let v = dec.heat_apply(tau, u)?;
    let one_minus: Vec<f64> = u.iter().map(|x| 1.0 - x).collect();
    Ok(g.ip(&one_minus, &v))
}

/// `H(u) = λ⟨u, 1 − u⟩_V + ⟨u, (I − e^{-τΔ})u⟩_V`.
pub fn lyapunov_h(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<f64> {
    check_len(g.n_vertices(), u.len())?;
    Ok(h(g, dec, params, u))
}

pub(crate) fn h(g: &Graph, dec: &SpectralDecomposition, params: &SchemeParams, u: &[f64]) -> f64 {
    let v = dec.heat(params.tau(), u);
    let potential: f64 = u
        .iter()
        .zip(g.degree_powers())
        .map(|(x, d)| x * (1.0 - x) * d)
        .sum();
    let smoothing: f64 = u
        .iter()
        .zip(v.iter())
        .zip(g.degree_powers())
        .map(|((x, y), d)| x * (x - y) * d)
        .sum();
    params.lambda() * potential + smoothing
}

/// `H(u)/(2τ)`, which approximates `GL_ε(u)` to `O(τ)`.
pub fn scaled_lyapunov(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<f64> {
    Ok(lyapunov_h(g, dec, params, u)? / (2.0 * params.tau()))
}

/// `½TV(u)` for binary `u`, `+∞` otherwise. Entries within
/// [`BINARY_QUANTIZATION`] of 0 or 1 are snapped first.
pub fn limit_functional_f0(g: &Graph, u: &[f64]) -> Result<Extended> {
    check_len(g.n_vertices(), u.len())?;
    let mut snapped = Vec::with_capacity(u.len());
    for &x in u {
        if x.abs() <= BINARY_QUANTIZATION {
            snapped.push(0.0);
        } else if (x - 1.0).abs() <= BINARY_QUANTIZATION {
            snapped.push(1.0);
        } else {
            return Ok(Extended::PosInfinity);
        }
    }
    Ok(Extended::Finite(0.5 * g.tv(&snapped)))
}

/// Gradient of `H` for the vertex product: `λ1 − 2e^{-τΔ}u + 2(1−λ)u`.
pub fn lyapunov_gradient(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<VertexFunction> {
    check_len(g.n_vertices(), u.len())?;
    let lambda = params.lambda();
    let v = dec.heat(params.tau(), u);
    Ok(u.iter()
        .zip(v.iter())
        .map(|(x, y)| lambda - 2.0 * y + 2.0 * (1.0 - lambda) * x)
        .collect::<Vec<_>>()
        .into())
}

/// True when `u` is interior and `∇H(u)` vanishes to within `1e-9`.
pub fn stationary_set_check(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<bool> {
    let grad = lyapunov_gradient(g, dec, params, u)?;
    let interior = u.iter().all(|&x| x > 0.0 && x < 1.0);
    Ok(interior && grad.sup_norm() <= 1e-9)
}

/// Whether `½1` maximizes `H` globally on `[0,1]^V`, which holds exactly
/// when `τ ≤ ε ≤ τ/(1 − e^{-τ‖Δ‖})`.
pub fn half_one_global_max_condition(dec: &SpectralDecomposition, params: &SchemeParams) -> bool {
    let lambda = params.lambda();
    lambda <= 1.0 && lambda >= -(-params.tau() * dec.operator_norm()).exp_m1()
}

pub fn energy_report(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<EnergyReport> {
    check_len(g.n_vertices(), u.len())?;
    Ok(EnergyReport {
        gl: gl(g, params.epsilon(), u),
        h: h(g, dec, params, u),
        j: mbo_lyapunov_j(g, dec, params.tau(), u)?,
        tv: g.tv(u),
        dirichlet: g.dirichlet(u),
    })
}
