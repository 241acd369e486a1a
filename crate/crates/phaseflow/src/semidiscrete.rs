//! The semi-discrete obstacle scheme: diffuse by `e^{-τΔ}`, then solve the
//! obstacle problem for `u_{n+1}` in closed form.
//!
//! With `v = e^{-τΔ}u_n` the update satisfies
//! `(1−λ)u_{n+1} − v + (λ/2)1 = λβ_{n+1}` with `β_{n+1}` in the obstacle
//! subdifferential of `u_{n+1}`. For `λ = 1` the update is the MBO
//! threshold; diffused values equal to ½ go to 1.

use crate::error::{check_len, Error, Result};
use crate::functionals::energy_report;
use crate::graph::Graph;
use crate::params::{Regime, SchemeParams};
use crate::spectral::SpectralDecomposition;
use crate::trajectory::{Metadata, SchemeTag, Trajectory};
use crate::vertex::{VertexFunction, VertexSet};

/// An iterate together with the obstacle reaction that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeState {
    pub u: VertexFunction,
    /// Absent for the initial state.
    pub beta: Option<VertexFunction>,
}

fn require_unit_interval(u: &[f64]) -> Result<()> {
    if u.iter().all(|x| (0.0..=1.0).contains(x)) {
        Ok(())
    } else {
        Err(Error::Precondition("state must lie in [0, 1]".into()))
    }
}

fn rho_scalar(lambda: f64, v: f64) -> f64 {
    if v < 0.5 * lambda {
        0.0
    } else if v < 1.0 - 0.5 * lambda {
        (0.5 + (v - 0.5) / (1.0 - lambda)).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

fn beta_scalar(lambda: f64, v: f64) -> f64 {
    if v < 0.5 * lambda {
        0.5 - v / lambda
    } else if v < 1.0 - 0.5 * lambda {
        0.0
    } else {
        -0.5 + (1.0 - v) / lambda
    }
}

fn threshold(v: f64) -> f64 {
    if v >= 0.5 {
        1.0
    } else {
        0.0
    }
}

/// The piecewise-linear obstacle solution map for `λ ∈ [0, 1)`.
pub fn rho_lambda(lambda: f64, v: &[f64]) -> Result<VertexFunction> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "rho_lambda needs lambda in [0, 1), got {lambda}"
        )));
    }
    Ok(v.iter()
        .map(|&x| rho_scalar(lambda, x))
        .collect::<Vec<_>>()
        .into())
}

/// The obstacle reaction paired with [`rho_lambda`], for `λ ∈ (0, 1)`.
pub fn beta_from_diffused(lambda: f64, v: &[f64]) -> Result<VertexFunction> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta_from_diffused needs lambda in (0, 1), got {lambda}"
        )));
    }
    Ok(v.iter()
        .map(|&x| beta_scalar(lambda, x))
        .collect::<Vec<_>>()
        .into())
}

/// Update and reaction from an already diffused state, any `λ`.
pub(crate) fn update_from_diffused(lambda: f64, v: &VertexFunction) -> SchemeState {
    let (u, beta): (Vec<f64>, Vec<f64>) = if lambda == 0.0 {
        (
            v.iter().map(|&x| rho_scalar(0.0, x)).collect(),
            vec![0.0; v.len()],
        )
    } else if lambda < 0.0 {
        let u = v
            .iter()
            .map(|&x| (x - 0.5 * lambda) / (1.0 - lambda))
            .collect();
        (u, vec![0.0; v.len()])
    } else if lambda < 1.0 {
        v.iter()
            .map(|&x| (rho_scalar(lambda, x), beta_scalar(lambda, x)))
            .unzip()
    } else if lambda == 1.0 {
        v.iter().map(|&x| (threshold(x), 0.5 - x)).unzip()
    } else {
        // Recover β from the defining relation.
        v.iter()
            .map(|&x| {
                let y = threshold(x);
                (y, ((1.0 - lambda) * y - x + 0.5 * lambda) / lambda)
            })
            .unzip()
    };
    SchemeState {
        u: u.into(),
        beta: Some(beta.into()),
    }
}

/// One step for `λ ∈ [0, 1]`.
pub fn sd_step(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<SchemeState> {
    check_len(g.n_vertices(), u.len())?;
    require_unit_interval(u)?;
    let lambda = params.lambda();
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "sd_step needs lambda in [0, 1], got {lambda}"
        )));
    }
    Ok(update_from_diffused(lambda, &dec.heat(params.tau(), u)))
}

/// One MBO step: diffuse the indicator for time `τ`, keep vertices at or above ½.
pub fn mbo_step(
    g: &Graph,
    dec: &SpectralDecomposition,
    tau: f64,
    u: &[f64],
) -> Result<VertexFunction> {
    check_len(g.n_vertices(), u.len())?;
    if !u.iter().all(|&x| x == 0.0 || x == 1.0) {
        return Err(Error::Precondition("mbo_step needs a binary state".into()));
    }
    let v = dec.heat_apply(tau, u)?;
    Ok(v.map(threshold))
}

/// The variational update for `λ > 1`, which is again the MBO threshold.
pub fn step_lambda_gt1(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<VertexFunction> {
    check_len(g.n_vertices(), u.len())?;
    if params.regime() != Regime::SuperUnit {
        return Err(Error::InvalidParameter(format!(
            "step_lambda_gt1 needs lambda > 1, got {}",
            params.lambda()
        )));
    }
    Ok(dec.heat(params.tau(), u).map(threshold))
}

/// The update for `λ < 0`: `(1−λ)^{-1}(v − (λ/2)1)` with zero reaction.
pub fn step_lambda_neg(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<SchemeState> {
    check_len(g.n_vertices(), u.len())?;
    if params.regime() != Regime::Negative {
        return Err(Error::InvalidParameter(format!(
            "step_lambda_neg needs lambda < 0, got {}",
            params.lambda()
        )));
    }
    Ok(update_from_diffused(
        params.lambda(),
        &dec.heat(params.tau(), u),
    ))
}

/// One step in any regime.
pub fn advance(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u: &[f64],
) -> Result<SchemeState> {
    check_len(g.n_vertices(), u.len())?;
    Ok(update_from_diffused(
        params.lambda(),
        &dec.heat(params.tau(), u),
    ))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Stop when `‖u_{n+1} − u_n‖_∞` is at most this; `None` means exact equality.
    pub fixed_point_tol: Option<f64>,
    /// Skip the per-step energy report.
    pub skip_energies: bool,
}

/// Iterates the scheme, stopping early at a fixed point.
pub fn sd_run(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u0: &[f64],
    n_steps: usize,
) -> Result<Trajectory> {
    sd_run_with(g, dec, params, u0, n_steps, RunOptions::default())
}

pub fn sd_run_with(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u0: &[f64],
    n_steps: usize,
    opts: RunOptions,
) -> Result<Trajectory> {
    check_len(g.n_vertices(), u0.len())?;
    let tag = if params.lambda() == 1.0 {
        SchemeTag::Mbo
    } else {
        SchemeTag::SemiDiscrete
    };
    let meta = Metadata {
        epsilon: Some(params.epsilon()),
        tau: Some(params.tau()),
        lambda: Some(params.lambda()),
        ..Default::default()
    };
    let mut traj = Trajectory::new(tag, meta);
    let energy = |u: &[f64]| -> Result<_> {
        if opts.skip_energies {
            Ok(None)
        } else {
            energy_report(g, dec, params, u).map(Some)
        }
    };
    let mut u: VertexFunction = u0.to_vec().into();
    traj.push(0, 0.0, u.clone(), None);
    traj.samples[0].energy = energy(&u)?;
    for n in 1..=n_steps {
        let next = advance(g, dec, params, &u)?;
        let fixed = match opts.fixed_point_tol {
            None => next.u == u,
            Some(tol) => (&next.u - &u).sup_norm() <= tol,
        };
        if fixed {
            traj.fixed_point = Some(n - 1);
            break;
        }
        u = next.u;
        traj.push(n, n as f64 * params.tau(), u.clone(), next.beta);
        traj.samples.last_mut().expect("just pushed").energy = energy(&u)?;
    }
    Ok(traj)
}

/// Step-size bounds below which one step fixes `χ_S`:
/// `‖Δ‖^{-1} log(1 + (λ/2)√(min_i d_i^r / ⟨χ_S, 1⟩_V))` and `λ / (2‖Δχ_S‖_∞)`.
/// Either is `+∞` when its denominator vanishes.
pub fn pinning_bounds(
    g: &Graph,
    dec: &SpectralDecomposition,
    s: &VertexSet,
    lambda: f64,
) -> Result<(f64, f64)> {
    check_len(g.n_vertices(), s.len())?;
    let chi = s.indicator();
    let mass = g.ip(&chi, &vec![1.0; chi.len()]);
    let min_dr = g
        .degree_powers()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let bound1 = if mass == 0.0 {
        f64::INFINITY
    } else {
        (0.5 * lambda * (min_dr / mass).sqrt()).ln_1p() / dec.operator_norm()
    };
    let lap_sup = g.lap(&chi).sup_norm();
    let bound2 = if lap_sup == 0.0 {
        f64::INFINITY
    } else {
        lambda / (2.0 * lap_sup)
    };
    Ok((bound1, bound2))
}

/// Checks `‖u_k − v_k‖_V ≤ (1−λ)^{-k}‖u_0 − v_0‖_V (1 + 1e-10)` for `k ≤ n`.
pub fn sd_lipschitz_check(
    g: &Graph,
    dec: &SpectralDecomposition,
    params: &SchemeParams,
    u0: &[f64],
    v0: &[f64],
    n: usize,
) -> Result<bool> {
    let lambda = params.lambda();
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz bound needs lambda in [0, 1), got {lambda}"
        )));
    }
    check_len(g.n_vertices(), v0.len())?;
    let d0 = g.dist(u0, v0);
    let mut u: VertexFunction = u0.to_vec().into();
    let mut v: VertexFunction = v0.to_vec().into();
    for k in 1..=n {
        u = sd_step(g, dec, params, &u)?.u;
        v = sd_step(g, dec, params, &v)?.u;
        let bound = (1.0 - lambda).powi(-(k as i32)) * d0 * (1.0 + 1e-10);
        if g.dist(&u, &v) > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_rejects_lambda_one() {
        assert!(rho_lambda(1.0, &[0.5]).is_err());
        assert!(beta_from_diffused(0.0, &[0.5]).is_err());
    }

    #[test]
    fn super_unit_beta_has_obstacle_signs() {
        let st = update_from_diffused(1.7, &vec![0.1, 0.5, 0.9].into());
        let b = st.beta.unwrap();
        assert_eq!(&st.u[..], &[0.0, 1.0, 1.0]);
        assert!(b[0] >= 0.0 && b[1] <= 0.0 && b[2] <= 0.0);
    }
}
