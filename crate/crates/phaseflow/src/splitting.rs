//! Diffusion–reaction splitting: an exact heat step followed by the exact
//! flow of `εu̇ = u − ½` with clamping at the obstacles.

use crate::allen_cahn::interior_closed_form;
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::params::SchemeParams;
use crate::semidiscrete::rho_lambda;
use crate::spectral::SpectralDecomposition;
use crate::trajectory::{Metadata, SchemeTag, Trajectory};
use crate::vertex::VertexFunction;

fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

fn reaction_scalar(lambda: f64, v: f64) -> f64 {
    let grown = lambda.exp() * (v - 0.5);
    if grown.abs() < 0.5 {
        0.5 + grown
    } else {
        heaviside(v - 0.5)
    }
}

/// Reaction over a step `τ`: `½ + e^λ(v_i − ½)` while that stays inside
/// `(0, 1)`, otherwise the nearer obstacle (`v_i = ½` would go to 1).
pub fn reaction_exact(epsilon: f64, tau: f64, v: &[f64]) -> Result<VertexFunction> {
    let params = SchemeParams::new(epsilon, tau)?;
    Ok(reaction(params.lambda(), v))
}

fn reaction(lambda: f64, v: &[f64]) -> VertexFunction {
    v.iter()
        .map(|&x| reaction_scalar(lambda, x))
        .collect::<Vec<_>>()
        .into()
}

pub fn ts_step(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<VertexFunction> {
    check_len(g.n_vertices(), u.len())?;
    Ok(reaction(params.lambda(), &dec.heat(params.tau(), u)))
}

pub fn ts_run(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u0: &[f64],
    n_steps: usize,
) -> Result<Trajectory> {
    check_len(g.n_vertices(), u0.len())?;
    let meta = Metadata {
        epsilon: Some(params.epsilon()),
        tau: Some(params.tau()),
        lambda: Some(params.lambda()),
        ..Default::default()
    };
    let mut traj = Trajectory::new(SchemeTag::TimeSplitting, meta);
    let mut u: VertexFunction = u0.to_vec().into();
    traj.push(0, 0.0, u.clone(), None);
    for n in 1..=n_steps {
        u = ts_step(g, dec, params, &u)?;
        traj.push(n, n as f64 * params.tau(), u.clone(), None);
    }
    Ok(traj)
}

/// Checks `|reaction(v)_i − ½| ≤ |u_i − ½|` where `u` is the semi-discrete
/// update of the same diffused state (`λ ∈ [0, 1]`). A relative slack of
/// `1e-15` absorbs rounding.
pub fn wells_proximity_compare(params: &SchemeParams, v: &[f64]) -> Result<bool> {
    let lambda = params.lambda();
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "wells comparison needs lambda in [0, 1], got {lambda}"
        )));
    }
    let split = reaction(lambda, v);
    let sd = if lambda < 1.0 {
        rho_lambda(lambda, v)?
    } else {
        v.iter()
            .map(|&x| heaviside(x - 0.5))
            .collect::<Vec<_>>()
            .into()
    };
    Ok(split
        .iter()
        .zip(sd.iter())
        .all(|(a, b)| (a - 0.5).abs() <= (b - 0.5).abs() + 1e-15))
}

/// Whether every `U_TS(t)` on the grid is no farther from `½1` in sup norm
/// than the Allen–Cahn state, up to `tol`. Between steps,
/// `U_TS(t) = ½1 + e^{(t−nτ)/ε}(e^{-τΔ}ũ_n − ½1)` for `t ∈ (nτ, (n+1)τ]`.
/// Requires both flows to stay interior on the grid.
#[allow(clippy::too_many_arguments)]
pub fn ts_vs_ac_wells(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    tau: f64,
    u0: &[f64],
    t_grid: &[f64],
    tol: f64,
) -> Result<bool> {
    check_len(g.n_vertices(), u0.len())?;
    let params = SchemeParams::new(epsilon, tau)?;
    let mut n = 0usize;
    let mut split: VertexFunction = u0.to_vec().into();
    for &t in t_grid {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let ac = interior_closed_form(g, dec, epsilon, u0, t)?;
        if !ac.is_interior() {
            return Err(Error::Precondition(format!(
                "Allen-Cahn state leaves (0, 1) by t = {t}"
            )));
        }
        let ts = if t == 0.0 {
            split.clone()
        } else {
            // Step index with t ∈ (nτ, (n+1)τ].
            let target = ((t / tau - 1e-12).ceil() as usize).max(1) - 1;
            while n < target {
                split = ts_step(g, dec, &params, &split)?;
                n += 1;
            }
            let s = t - n as f64 * tau;
            dec.heat(tau, &split)
                .map(|x| 0.5 + (s / epsilon).exp() * (x - 0.5))
        };
        if !ts.is_interior() {
            return Err(Error::Precondition(format!(
                "split state leaves (0, 1) by t = {t}"
            )));
        }
        let dist = |w: &VertexFunction| w.iter().fold(0.0f64, |m, x| m.max((x - 0.5).abs()));
        if dist(&ac) < dist(&ts) - tol {
            return Ok(false);
        }
    }
    Ok(true)
}
