//! Double-obstacle Allen–Cahn flow `εu̇ = −εΔu + u − ½1 + β`.
//!
//! Ground truth comes from the semi-discrete scheme at a small step
//! `τ_ref` (default `ε/1024`). A smooth penalized flow with the potential
//! `W_ν` is integrated by RK4 as an independent check.

use crate::error::{check_len, Error, Result};
use crate::functionals::gl;
use crate::graph::Graph;
use crate::params::SchemeParams;
use crate::semidiscrete::update_from_diffused;
use crate::spectral::SpectralDecomposition;
use crate::trajectory::{Metadata, SchemeTag, Trajectory};
use crate::vertex::VertexFunction;

/// Entries within this distance of 0 or 1 are treated as touching the obstacle.
pub const OBSTACLE_SNAP: f64 = 1e-9;

/// Half-width of the admissible band around `[−ν, 1+ν]` for the penalized flow.
const BAND_SLACK: f64 = 1e-6;

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

/// `ε/1024`.
pub fn default_tau_ref(epsilon: f64) -> f64 {
    epsilon / 1024.0
}

/// `0, h, 2h, …` up to and including `t_end` (the last point is `t_end`).
pub fn uniform_grid(t_end: f64, h: f64) -> Vec<f64> {
    let m = (t_end / h - 1e-9).ceil().max(0.0) as usize;
    (0..=m)
        .map(|k| if k == m { t_end } else { k as f64 * h })
        .collect()
}

/// The obstacle reaction of a state: `±½ + ε(Δu)_i` at the obstacles, 0 inside.
pub fn beta_explicit(g: &Graph, epsilon: f64, u: &[f64]) -> Result<VertexFunction> {
    check_len(g.n_vertices(), u.len())?;
    let lap = g.lap(u);
    Ok(u.iter()
        .zip(lap.iter())
        .map(|(&x, &l)| {
            if x.abs() <= OBSTACLE_SNAP {
                0.5 + epsilon * l
            } else if (x - 1.0).abs() <= OBSTACLE_SNAP {
                -0.5 + epsilon * l
            } else {
                0.0
            }
        })
        .collect::<Vec<_>>()
        .into())
}

/// Derivative of the penalized potential: linear with slope `1/(2ν)` outside
/// `[0, 1]` and equal to `½ − x` inside.
pub fn w_nu_prime(nu: f64, x: f64) -> f64 {
    if x < 0.0 {
        x / (2.0 * nu) + 0.5
    } else if x <= 1.0 {
        0.5 - x
    } else {
        (x - 1.0) / (2.0 * nu) - 0.5
    }
}

/// `min(0.1εν, 0.01/‖Δ‖)`.
pub fn default_regularized_dt(dec: &SpectralDecomposition, epsilon: f64, nu: f64) -> f64 {
    (0.1 * epsilon * nu).min(0.01 / dec.operator_norm())
}

/// RK4 for `u̇ = −Δu − ε^{-1}W_ν′(u)`. The step is shrunk so that it divides
/// `t_end`; every step is stored with `β_ν = ½1 − u − W_ν′(u)`.
#[allow(clippy::too_many_arguments)]
pub fn regularized_flow(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    nu: f64,
    u0: &[f64],
    t_end: f64,
    dt: Option<f64>,
) -> Result<Trajectory> {
    check_len(g.n_vertices(), u0.len())?;
    require_positive("epsilon", epsilon)?;
    require_positive("nu", nu)?;
    if nu > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "nu must be at most 1, got {nu}"
        )));
    }
    if !(t_end >= 0.0) {
        return Err(Error::NegativeTime(t_end));
    }
    let dt = dt.unwrap_or_else(|| default_regularized_dt(dec, epsilon, nu));
    require_positive("dt", dt)?;
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps == 0 {
        0.0
    } else {
        t_end / steps as f64
    };

    let rhs = |u: &[f64]| -> Vec<f64> {
        let lap = g.lap(u);
        u.iter()
            .zip(lap.iter())
            .map(|(&x, &l)| -l - w_nu_prime(nu, x) / epsilon)
            .collect()
    };
    let beta = |u: &[f64]| -> VertexFunction {
        u.iter()
            .map(|&x| 0.5 - x - w_nu_prime(nu, x))
            .collect::<Vec<_>>()
            .into()
    };
    let axpy = |u: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        u.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };

    let meta = Metadata {
        epsilon: Some(epsilon),
        nu: Some(nu),
        dt: Some(h),
        ..Default::default()
    };
    let mut traj = Trajectory::new(SchemeTag::Regularized, meta);
    let mut u = u0.to_vec();
    traj.push(0, 0.0, u.clone().into(), Some(beta(&u)));
    for n in 1..=steps {
        let k1 = rhs(&u);
        let k2 = rhs(&axpy(&u, &k1, 0.5 * h));
        let k3 = rhs(&axpy(&u, &k2, 0.5 * h));
        let k4 = rhs(&axpy(&u, &k3, h));
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = n as f64 * h;
        if let Some(&bad) = u
            .iter()
            .find(|&&x| !(x >= -nu - BAND_SLACK && x <= 1.0 + nu + BAND_SLACK))
        {
            return Err(Error::StepRejected { t, value: bad });
        }
        traj.push(n, t, u.clone().into(), Some(beta(&u)));
    }
    Ok(traj)
}

/// Semi-discrete run with step `τ_ref` and `λ = τ_ref/ε`, sampled at
/// `m = ⌈t/τ_ref⌉` for each grid time. Each sample carries the reaction of
/// the step that produced it.
pub fn ac_reference(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    t_grid: &[f64],
    tau_ref: f64,
) -> Result<Trajectory> {
    check_len(g.n_vertices(), u0.len())?;
    require_positive("epsilon", epsilon)?;
    let params = SchemeParams::new(epsilon, tau_ref)?;
    if params.lambda() > 1.0 {
        return Err(Error::InvalidParameter(
            "tau_ref must not exceed epsilon".into(),
        ));
    }
    if !u0.iter().all(|x| (0.0..=1.0).contains(x)) {
        return Err(Error::Precondition(
            "initial state must lie in [0, 1]".into(),
        ));
    }
    let meta = Metadata {
        epsilon: Some(epsilon),
        tau_ref: Some(tau_ref),
        ..Default::default()
    };
    let mut traj = Trajectory::new(SchemeTag::AcReference, meta);
    let mut u: VertexFunction = u0.to_vec().into();
    let mut beta = beta_explicit(g, epsilon, u0)?;
    let mut m = 0usize;
    let mut last_t = f64::NEG_INFINITY;
    for &t in t_grid {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        if t <= last_t {
            return Err(Error::InvalidParameter(
                "time grid must be strictly increasing".into(),
            ));
        }
        last_t = t;
        let target = (t / tau_ref - 1e-9).ceil().max(0.0) as usize;
        while m < target {
            let st = update_from_diffused(params.lambda(), &dec.heat(tau_ref, &u));
            u = st.u;
            beta = st.beta.expect("scheme steps carry a reaction");
            m += 1;
        }
        traj.push(m, t, u.clone(), Some(beta.clone()));
    }
    Ok(traj)
}

/// `½1 + e^{t/ε} e^{-tΔ}(u_0 − ½1)`, the flow while no vertex touches an obstacle.
pub fn interior_closed_form(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    t: f64,
) -> Result<VertexFunction> {
    check_len(g.n_vertices(), u0.len())?;
    let centered: Vec<f64> = u0.iter().map(|x| x - 0.5).collect();
    Ok(dec
        .semigroup_with_drift(epsilon, t, &centered)?
        .map(|x| x + 0.5))
}

/// Time at which the constant trajectory from `α1` reaches 0: `−ε log(1 − 2α)`.
pub fn freeze_time_alpha(epsilon: f64, alpha: f64) -> Result<f64> {
    require_positive("epsilon", epsilon)?;
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1/2), got {alpha}"
        )));
    }
    Ok(-epsilon * (-2.0 * alpha).ln_1p())
}

/// Time at which sample `k` was actually computed: reference runs store the
/// state after `n` steps of `τ_ref`, which can lag the grid time by up to one step.
fn state_time(traj: &Trajectory, k: usize) -> f64 {
    let s = &traj.samples[k];
    match (traj.tag, traj.metadata.tau_ref) {
        (SchemeTag::AcReference, Some(h)) => s.n as f64 * h,
        _ => s.t,
    }
}

// ∫_0^h e^{az} dz and ∫_0^h z e^{az} dz.
fn exp_moments(a: f64, h: f64) -> (f64, f64) {
    let x = a * h;
    if x.abs() < 0.5 {
        let (mut e0, mut e1, mut term) = (0.0, 0.0, 1.0);
        for m in 0..30 {
            // term = x^m / m!
            e0 += term / (m + 1) as f64;
            e1 += term / (m + 2) as f64;
            term *= x / (m + 1) as f64;
        }
        (h * e0, h * h * e1)
    } else {
        let e0 = x.exp_m1() / a;
        (e0, (h * x.exp() - e0) / a)
    }
}

/// Largest `‖·‖_V` gap, over the samples, between `u(t)` and the variation
/// of constants formula driven by the sampled reactions. The reaction is
/// interpolated linearly between samples and integrated exactly against the
/// exponential kernel.
pub fn integral_form_residual(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    traj: &Trajectory,
) -> Result<f64> {
    require_positive("epsilon", epsilon)?;
    let first = traj
        .first()
        .ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    check_len(g.n_vertices(), first.u.len())?;
    let t0 = state_time(traj, 0);
    let u0: Vec<f64> = first.u.iter().map(|x| x - 0.5).collect();
    let c0 = dec.to_spectral(&u0);
    let betas = traj
        .samples
        .iter()
        .map(|s| match &s.beta {
            Some(b) => Ok(dec.to_spectral(b)),
            None => beta_explicit(g, epsilon, &s.u).map(|b| dec.to_spectral(&b)),
        })
        .collect::<Result<Vec<_>>>()?;
    let lam = dec.eigenvalues();
    let mut worst: f64 = 0.0;
    for (k, s) in traj.samples.iter().enumerate() {
        let t = state_time(traj, k) - t0;
        let mut c: Vec<f64> = (0..lam.len())
            .map(|q| ((1.0 / epsilon - lam[q]) * t).exp() * c0[q])
            .collect();
        for j in 0..k {
            let (sa, sb) = (state_time(traj, j) - t0, state_time(traj, j + 1) - t0);
            let h = sb - sa;
            for q in 0..lam.len() {
                let a = 1.0 / epsilon - lam[q];
                let (e0, e1) = exp_moments(a, h);
                let (b0, b1) = (betas[j][q], betas[j + 1][q]);
                c[q] += (a * (t - sb)).exp() * (b1 * e0 + (b0 - b1) * e1 / h) / epsilon;
            }
        }
        let predicted = dec.from_spectral(&c).map(|x| x + 0.5);
        worst = worst.max(g.dist(&predicted, &s.u));
    }
    Ok(worst)
}

/// Minimum over interior samples and test functions of
/// `⟨εu̇ − u + ½1, η − u⟩_V + ε⟨∇u, ∇η − ∇u⟩_E`, with `u̇` by central
/// differences. Besides `etas`, each vertex is moved to 0 and to 1 in turn.
pub fn weak_form_residual(
    g: &Graph,
    epsilon: f64,
    traj: &Trajectory,
    etas: &[VertexFunction],
) -> Result<f64> {
    let n = g.n_vertices();
    for eta in etas {
        check_len(n, eta.len())?;
    }
    let mut worst = f64::INFINITY;
    for k in 1..traj.len().saturating_sub(1) {
        let (prev, cur, next) = (&traj.samples[k - 1], &traj.samples[k], &traj.samples[k + 1]);
        if next.n == prev.n && traj.tag == SchemeTag::AcReference {
            continue;
        }
        check_len(n, cur.u.len())?;
        let span = state_time(traj, k + 1) - state_time(traj, k - 1);
        let lap = g.lap(&cur.u);
        // ⟨∇u, ∇w⟩_E = ⟨Δu, w⟩_V
        let field: Vec<f64> = (0..n)
            .map(|i| epsilon * (next.u[i] - prev.u[i]) / span - cur.u[i] + 0.5 + epsilon * lap[i])
            .collect();
        let pair = |eta: &[f64]| -> f64 {
            (0..n)
                .map(|i| field[i] * (eta[i] - cur.u[i]) * g.degree_powers()[i])
                .sum()
        };
        for eta in etas {
            worst = worst.min(pair(eta));
        }
        for i in 0..n {
            for corner in [0.0, 1.0] {
                let mut eta = cur.u.to_vec();
                eta[i] = corner;
                worst = worst.min(pair(&eta));
            }
        }
    }
    Ok(if worst.is_finite() { worst } else { 0.0 })
}

/// `GL(u(s)) − GL(u(t)) ≥ ‖u(s) − u(t)‖²_V / (2(t − s)) − tol` for all sampled `s < t`.
pub fn gl_decrease_check(g: &Graph, traj: &Trajectory, epsilon: f64, tol: f64) -> Result<bool> {
    let energies = traj
        .samples
        .iter()
        .map(|s| gl(g, epsilon, &s.u).to_f64())
        .collect::<Vec<_>>();
    for a in 0..traj.len() {
        for b in a + 1..traj.len() {
            let (s, t) = (&traj.samples[a], &traj.samples[b]);
            let span = state_time(traj, b) - state_time(traj, a);
            if span <= 0.0 {
                continue;
            }
            let gap = g.dist(&s.u, &t.u).powi(2) / (2.0 * span);
            if !(energies[a] - energies[b] >= gap - tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `‖u(s) − u(t)‖_V ≤ √|t − s| √(2 GL(u(0))) + tol` for all sampled pairs.
pub fn holder_half_check(g: &Graph, traj: &Trajectory, epsilon: f64, tol: f64) -> Result<bool> {
    let first = traj
        .first()
        .ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    let scale = (2.0 * gl(g, epsilon, &first.u).to_f64()).sqrt();
    for a in 0..traj.len() {
        for b in a + 1..traj.len() {
            let (s, t) = (&traj.samples[a], &traj.samples[b]);
            let span = state_time(traj, b) - state_time(traj, a);
            if g.dist(&s.u, &t.u) > span.abs().sqrt() * scale + tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `‖u(t) − v(t)‖_V ≤ e^{t/ε}‖u_0 − v_0‖_V (1 + 1e-8)` along reference trajectories.
pub fn wellposed_bound_check(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    v0: &[f64],
    t_grid: &[f64],
    tau_ref: f64,
) -> Result<bool> {
    let a = ac_reference(g, dec, epsilon, u0, t_grid, tau_ref)?;
    let b = ac_reference(g, dec, epsilon, v0, t_grid, tau_ref)?;
    let d0 = g.dist(u0, v0);
    Ok(a.samples
        .iter()
        .zip(&b.samples)
        .all(|(x, y)| g.dist(&x.u, &y.u) <= (x.t / epsilon).exp() * d0 * (1.0 + 1e-8)))
}

/// Global Lipschitz constant in time: `½‖1‖_V (e^{1/ε} − 1 + ε^{-1}e^{1/ε})`.
pub fn time_lipschitz_constant(g: &Graph, epsilon: f64) -> f64 {
    let e = (1.0 / epsilon).exp();
    0.5 * g.volume().sqrt() * (e - 1.0 + e / epsilon)
}

/// Linear interpolation of the state at time `t` (clamped to the sampled range).
pub fn interpolate(traj: &Trajectory, t: f64) -> Option<VertexFunction> {
    let s = &traj.samples;
    let first = s.first()?;
    if t <= first.t {
        return Some(first.u.clone());
    }
    let idx = s.partition_point(|x| x.t < t);
    if idx >= s.len() {
        return Some(s.last()?.u.clone());
    }
    let (a, b) = (&s[idx - 1], &s[idx]);
    let w = (t - a.t) / (b.t - a.t);
    Some(a.u.zip_map(&b.u, |x, y| x + w * (y - x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_moments_match_quadrature() {
        for &(a, h) in &[(0.0, 0.3), (1e-8, 0.1), (2.0, 0.1), (-7.0, 0.4), (3.0, 0.5)] {
            let m = 20_000;
            let (mut q0, mut q1) = (0.0, 0.0);
            for k in 0..m {
                let z = (k as f64 + 0.5) * h / m as f64;
                q0 += (a * z).exp() * h / m as f64;
                q1 += z * (a * z).exp() * h / m as f64;
            }
            let (e0, e1) = exp_moments(a, h);
            assert!((e0 - q0).abs() < 1e-9, "{a} {h}");
            assert!((e1 - q1).abs() < 1e-9, "{a} {h}");
        }
    }

    #[test]
    fn grid_ends_at_t_end() {
        assert_eq!(uniform_grid(1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(uniform_grid(0.0, 0.1), vec![0.0]);
    }
}
