//! Comparison principles, convergence studies and auxiliary identities.
//!
//! Every randomized routine takes an explicit seed and draws from ChaCha8, so
//! results are bit-reproducible. Batches fan out over rayon and collect in
//! seed order.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::allen_cahn::{ac_reference, uniform_grid};
use crate::error::{check_len, Error, Result};
use crate::functionals::{gl, h, limit_functional_f0};
use crate::graph::Graph;
use crate::mcf::new_mcf_step;
use crate::params::SchemeParams;
use crate::semidiscrete::{mbo_step, sd_step, update_from_diffused};
use crate::spectral::{decompose, SpectralDecomposition};
use crate::trajectory::fmt17;
use crate::vertex::{VertexFunction, VertexSet};

/// Tolerance for the ordering checks of the comparison experiments.
pub const ORDER_TOL: f64 = 1e-8;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `⟨∇z₊, ∇z₊⟩_E ≤ ⟨∇z, ∇z₊⟩_E`.
pub fn positive_part_inequality(g: &Graph, z: &[f64]) -> Result<bool> {
    check_len(g.n_vertices(), z.len())?;
    let zp: Vec<f64> = z.iter().map(|x| x.max(0.0)).collect();
    let gp = g.gradient(&zp)?;
    let lhs = g.edge_inner(&gp, &gp)?;
    let rhs = g.edge_inner(&g.gradient(z)?, &gp)?;
    Ok(lhs <= rhs + 1e-12 * rhs.abs().max(1.0))
}

/// `Σ‖v_n‖² = N^{-1}‖Σv_n‖² + N^{-1}Σ_{k<n}‖v_n − v_k‖²` in the Euclidean
/// product, to relative accuracy `1e-9`.
pub fn cesaro_identity_check(vectors: &[Vec<f64>]) -> bool {
    let n = vectors.len();
    if n == 0 {
        return true;
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return false;
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let lhs: f64 = vectors.iter().map(|v| sq(v)).sum();
    let total: Vec<f64> = (0..dim)
        .map(|i| vectors.iter().map(|v| v[i]).sum())
        .collect();
    let mut cross = 0.0;
    for a in 0..n {
        for b in 0..a {
            cross += vectors[a]
                .iter()
                .zip(&vectors[b])
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>();
        }
    }
    let rhs = (sq(&total) + cross) / n as f64;
    (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1e-300)
}

/// Runs both reference flows up to `T` and checks `v(t) ≤ u(t) + 1e-8` at
/// every reference step, including `t = 0`.
pub fn cp2_experiment(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    v0: &[f64],
    t_end: f64,
    tau_ref: f64,
) -> Result<bool> {
    let grid = uniform_grid(t_end, tau_ref);
    let u = ac_reference(g, dec, epsilon, u0, &grid, tau_ref)?;
    let v = ac_reference(g, dec, epsilon, v0, &grid, tau_ref)?;
    Ok(u.samples
        .iter()
        .zip(&v.samples)
        .all(|(a, b)| below(&b.u, &a.u)))
}

fn below(w: &[f64], u: &[f64]) -> bool {
    w.iter().zip(u).all(|(a, b)| *a <= b + ORDER_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cp1Outcome {
    Pass,
    Fail,
    /// The subsolution rose above 1, so it is not admissible.
    Discarded,
}

/// Exact propagator of `εw′ = −εΔw + w − ½1 − g` over one step `h` with `g`
/// held constant: `e^{hA}` and `∫_0^h e^{sA} ds` on each eigenvalue of
/// `A = ε^{-1}I − Δ`.
struct ForcedPropagator<'a> {
    dec: &'a SpectralDecomposition,
    epsilon: f64,
    growth: Vec<f64>,
    integral: Vec<f64>,
}

impl<'a> ForcedPropagator<'a> {
    fn new(dec: &'a SpectralDecomposition, epsilon: f64, h: f64) -> Self {
        let lam = dec.eigenvalues();
        let growth = lam
            .iter()
            .map(|l| ((1.0 / epsilon - l) * h).exp())
            .collect();
        let integral = lam
            .iter()
            .map(|l| {
                let a = 1.0 / epsilon - l;
                if (a * h).abs() < 1e-12 {
                    h
                } else {
                    (a * h).exp_m1() / a
                }
            })
            .collect();
        ForcedPropagator {
            dec,
            epsilon,
            growth,
            integral,
        }
    }

    fn step(&self, w: &[f64], forcing: &[f64]) -> Vec<f64> {
        let drive: Vec<f64> = forcing.iter().map(|x| (0.5 + x) / self.epsilon).collect();
        let cw = self.dec.to_spectral(w);
        let cd = self.dec.to_spectral(&drive);
        let c: Vec<f64> = (0..cw.len())
            .map(|q| self.growth[q] * cw[q] - self.integral[q] * cd[q])
            .collect();
        self.dec.from_spectral(&c).into_vec()
    }
}

/// The solution of `εw′ = −εΔw + w − ½1 − g(t)` at every reference step up
/// to `T`, starting with `w0`. The forcing for step `k` is `forcing(k)`.
#[allow(clippy::too_many_arguments)]
pub fn forced_subsolution(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    w0: &[f64],
    t_end: f64,
    tau_ref: f64,
    mut forcing: impl FnMut(usize) -> Vec<f64>,
) -> Result<Vec<VertexFunction>> {
    check_len(g.n_vertices(), w0.len())?;
    SchemeParams::new(epsilon, tau_ref)?;
    let steps = (t_end / tau_ref - 1e-9).ceil().max(0.0) as usize;
    let prop = ForcedPropagator::new(dec, epsilon, tau_ref);
    let mut path = vec![VertexFunction::from(w0.to_vec())];
    for k in 0..steps {
        let gk = forcing(k);
        check_len(w0.len(), gk.len())?;
        let next = prop.step(&path[k], &gk);
        path.push(next.into());
    }
    Ok(path)
}

/// Integrates `εw′ = −εΔw + w − ½1 − g(t)` exactly over each reference step
/// with the forcing `g` held constant, and checks `w ≤ u + 1e-8` against the
/// reference flow from `u0` at every step. A `w` that rises above 1 is not
/// admissible and the run is discarded.
#[allow(clippy::too_many_arguments)]
pub fn cp1_with_forcing(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    w0: &[f64],
    t_end: f64,
    tau_ref: f64,
    mut forcing: impl FnMut(usize) -> Vec<f64>,
) -> Result<Cp1Outcome> {
    check_len(g.n_vertices(), w0.len())?;
    check_len(g.n_vertices(), u0.len())?;
    let params = SchemeParams::new(epsilon, tau_ref)?;
    let steps = (t_end / tau_ref - 1e-9).ceil().max(0.0) as usize;
    let prop = ForcedPropagator::new(dec, epsilon, tau_ref);
    let mut u: VertexFunction = u0.to_vec().into();
    let mut w: Vec<f64> = w0.to_vec();
    if w.iter().any(|&x| x > 1.0) {
        return Ok(Cp1Outcome::Discarded);
    }
    let mut outcome = if below(&w, &u) {
        Cp1Outcome::Pass
    } else {
        Cp1Outcome::Fail
    };
    for k in 0..steps {
        let gk = forcing(k);
        check_len(w.len(), gk.len())?;
        w = prop.step(&w, &gk);
        u = update_from_diffused(params.lambda(), &dec.heat(tau_ref, &u)).u;
        if w.iter().any(|&x| x > 1.0) {
            return Ok(Cp1Outcome::Discarded);
        }
        if !below(&w, &u) {
            outcome = Cp1Outcome::Fail;
        }
    }
    Ok(outcome)
}

/// [`cp1_with_forcing`] with forcing entries drawn uniformly from `[0, 1]`
/// on every reference step.
#[allow(clippy::too_many_arguments)]
pub fn cp1_experiment(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    w0: &[f64],
    t_end: f64,
    seed: u64,
    tau_ref: f64,
) -> Result<Cp1Outcome> {
    let mut r = rng(seed);
    let n = g.n_vertices();
    cp1_with_forcing(g, dec, epsilon, u0, w0, t_end, tau_ref, |_| {
        (0..n).map(|_| r.gen::<f64>()).collect()
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub seed: u64,
    pub outcome: Cp1Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn count(&self, o: Cp1Outcome) -> usize {
        self.rows.iter().filter(|r| r.outcome == o).count()
    }

    pub fn discard_rate(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.count(Cp1Outcome::Discarded) as f64 / self.rows.len() as f64
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "seed,outcome,discard_rate")?;
        let rate = fmt17(self.discard_rate());
        for r in &self.rows {
            let o = match r.outcome {
                Cp1Outcome::Pass => "pass",
                Cp1Outcome::Fail => "fail",
                Cp1Outcome::Discarded => "discarded",
            };
            writeln!(w, "{},{},{}", r.seed, o, rate)?;
        }
        Ok(())
    }
}

/// Random ordered pair: `u0` uniform in `[0,1]^V`, `v0 = max(u0 − δ, 0)` with
/// `δ` uniform in `[0, 0.3]` per vertex.
pub fn random_ordered_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let u: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
    let v = u
        .iter()
        .map(|x| (x - 0.3 * r.gen::<f64>()).max(0.0))
        .collect();
    (u, v)
}

/// `cp2_experiment` over seeded random ordered pairs.
pub fn cp2_batch(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    t_end: f64,
    tau_ref: f64,
    seeds: &[u64],
) -> Result<ComparisonReport> {
    let rows = seeds
        .par_iter()
        .map(|&seed| {
            let (u0, v0) = random_ordered_pair(g.n_vertices(), seed);
            let ok = cp2_experiment(g, dec, epsilon, &u0, &v0, t_end, tau_ref)?;
            Ok(ComparisonRow {
                seed,
                outcome: if ok {
                    Cp1Outcome::Pass
                } else {
                    Cp1Outcome::Fail
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { rows })
}

/// `cp1_experiment` over seeds; `u0` uniform, `w0 = u0 − δ` with `δ` uniform in `[0, 0.3]`.
pub fn cp1_batch(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    t_end: f64,
    tau_ref: f64,
    seeds: &[u64],
) -> Result<ComparisonReport> {
    let rows = seeds
        .par_iter()
        .map(|&seed| {
            let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
            let u0: Vec<f64> = (0..g.n_vertices()).map(|_| r.gen::<f64>()).collect();
            let w0: Vec<f64> = u0.iter().map(|x| x - 0.3 * r.gen::<f64>()).collect();
            let outcome = cp1_experiment(g, dec, epsilon, &u0, &w0, t_end, seed, tau_ref)?;
            Ok(ComparisonRow { seed, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { rows })
}

/// Iterates the scheme `⌈t/τ⌉` times.
fn iterate_to(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    t: f64,
    tau: f64,
) -> Result<(VertexFunction, Option<VertexFunction>)> {
    let params = SchemeParams::new(epsilon, tau)?;
    let steps = (t / tau - 1e-9).ceil().max(0.0) as usize;
    let mut u: VertexFunction = u0.to_vec().into();
    let mut beta = None;
    for _ in 0..steps {
        let st = sd_step(g, dec, &params, &u)?;
        u = st.u;
        beta = st.beta;
    }
    Ok((u, beta))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub tau_ref: f64,
    /// `(τ, ‖u^τ − u_ref‖_V)`
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of `log e` against `log τ`; `NaN` if any error is 0.
    pub slope: f64,
}

impl ConvergenceTable {
    pub fn errors_nonincreasing(&self) -> bool {
        // Rows are sorted by decreasing τ.
        self.rows.windows(2).all(|w| w[1].1 <= w[0].1)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,error")?;
        for (t, e) in &self.rows {
            writeln!(w, "{},{}", fmt17(*t), fmt17(*e))?;
        }
        writeln!(
            w,
            "# slope={} tau_ref={}",
            fmt17(self.slope),
            fmt17(self.tau_ref)
        )
    }
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Errors of the scheme at time `t` for each step in `taus` against a
/// reference run with `tau_ref` (default `min(taus)/64`).
pub fn convergence_order_experiment(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    t: f64,
    taus: &[f64],
    tau_ref: Option<f64>,
) -> Result<ConvergenceTable> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter("no step sizes given".into()));
    }
    let mut taus = taus.to_vec();
    taus.sort_by(|a, b| b.total_cmp(a));
    let tau_ref = tau_ref.unwrap_or(taus[taus.len() - 1] / 64.0);
    let (reference, _) = iterate_to(g, dec, epsilon, u0, t, tau_ref)?;
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let (u, _) = iterate_to(g, dec, epsilon, u0, t, tau)?;
            Ok((tau, g.dist(&u, &reference)))
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = if rows.iter().all(|r| r.1 > 0.0) && rows.len() > 1 {
        fit_slope(
            &rows
                .iter()
                .map(|&(t, e)| (t.ln(), e.ln()))
                .collect::<Vec<_>>(),
        )
    } else {
        f64::NAN
    };
    Ok(ConvergenceTable {
        tau_ref,
        rows,
        slope,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaRow {
    pub epsilon: f64,
    pub min_energy: f64,
    pub minimizer_distance: f64,
    pub n_minimizers: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaTable {
    pub grid: usize,
    pub rows: Vec<GammaRow>,
    /// Largest `|H/(2τ) − GL|` divided by `(τ/4)‖Δ‖²⟨1,1⟩_V` over the grid,
    /// for `τ ∈ {ε, ε/2}`.
    pub worst_bound_ratio: f64,
}

impl GammaTable {
    pub fn scaled_bound_holds(&self) -> bool {
        self.worst_bound_ratio <= 1.0 + 1e-12
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epsilon,min_energy,minimizer_distance,n_minimizers")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                fmt17(r.epsilon),
                fmt17(r.min_energy),
                fmt17(r.minimizer_distance),
                r.n_minimizers
            )?;
        }
        writeln!(
            w,
            "# worst_scaled_bound_ratio={}",
            fmt17(self.worst_bound_ratio)
        )
    }
}

fn grid_point(index: usize, n: usize, k: usize) -> Vec<f64> {
    let mut idx = index;
    (0..n)
        .map(|_| {
            let c = idx % (k + 1);
            idx /= k + 1;
            c as f64 / k as f64
        })
        .collect()
}

fn hausdorff_sup(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = |x: &Vec<f64>, y: &Vec<f64>| {
        x.iter()
            .zip(y)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
    };
    let directed = |p: &[Vec<f64>], q: &[Vec<f64>]| {
        p.iter()
            .map(|x| q.iter().map(|y| d(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Brute-force minimizers of `GL_ε` on `{0, 1/K, …, 1}^V` for each `ε`, with
/// their sup-norm Hausdorff distance to the minimizers of the binary limit.
pub fn gamma_convergence_experiment(
    g: &Graph,
    eps_list: &[f64],
    grid_k: usize,
) -> Result<GammaTable> {
    let n = g.n_vertices();
    if n > 6 {
        return Err(Error::TooLarge { n, limit: 6 });
    }
    if grid_k == 0 {
        return Err(Error::InvalidParameter(
            "grid resolution must be positive".into(),
        ));
    }
    let dec = decompose(g)?;
    let points: Vec<Vec<f64>> = (0..(grid_k + 1).pow(n as u32))
        .map(|i| grid_point(i, n, grid_k))
        .collect();

    let binary: Vec<Vec<f64>> = (0..1u64 << n)
        .map(|m| VertexSet::from_mask(n, m).indicator().into_vec())
        .collect();
    let f0: Vec<f64> = binary
        .iter()
        .map(|b| limit_functional_f0(g, b).map(|e| e.to_f64()))
        .collect::<Result<_>>()?;
    let f0_min = f0.iter().copied().fold(f64::INFINITY, f64::min);
    let f0_set: Vec<Vec<f64>> = binary
        .iter()
        .zip(&f0)
        .filter(|(_, &e)| e <= f0_min + 1e-12)
        .map(|(b, _)| b.clone())
        .collect();

    let bound_scale = 0.25 * dec.operator_norm().powi(2) * g.volume();
    let mut worst_ratio: f64 = 0.0;
    let mut rows = Vec::new();
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {eps}"
            )));
        }
        let energies: Vec<f64> = points.par_iter().map(|p| gl(g, eps, p).to_f64()).collect();
        let min_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let minimizers: Vec<Vec<f64>> = points
            .iter()
            .zip(&energies)
            .filter(|(_, &e)| e <= min_energy + 1e-12 * min_energy.abs().max(1.0))
            .map(|(p, _)| p.clone())
            .collect();
        rows.push(GammaRow {
            epsilon: eps,
            min_energy,
            minimizer_distance: hausdorff_sup(&minimizers, &f0_set),
            n_minimizers: minimizers.len(),
        });
        for tau in [eps, 0.5 * eps] {
            let params = SchemeParams::new(eps, tau)?;
            let ratio = points
                .par_iter()
                .zip(&energies)
                .map(|(p, &e)| {
                    (h(g, &dec, &params, p) / (2.0 * tau) - e).abs() / (tau * bound_scale)
                })
                .reduce(|| 0.0, f64::max);
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    Ok(GammaTable {
        grid: grid_k,
        rows,
        worst_bound_ratio: worst_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaRow {
    /// Number of step sizes averaged.
    pub count: usize,
    pub tau: f64,
    pub distance: f64,
}

/// Distance of the running average of the reactions at time `t` over the
/// step sizes in `taus` from the reference reaction. Diagnostic only.
pub fn beta_consistency_experiment(
    g: &Graph,
    dec: &SpectralDecomposition,
    epsilon: f64,
    u0: &[f64],
    t: f64,
    taus: &[f64],
    tau_ref: f64,
) -> Result<Vec<BetaRow>> {
    let (_, beta_ref) = iterate_to(g, dec, epsilon, u0, t, tau_ref)?;
    let n = g.n_vertices();
    let beta_ref = beta_ref.unwrap_or_else(|| VertexFunction::zeros(n));
    let mut sum = vec![0.0; n];
    let mut rows = Vec::new();
    for (k, &tau) in taus.iter().enumerate() {
        let (_, beta) = iterate_to(g, dec, epsilon, u0, t, tau)?;
        let beta = beta.unwrap_or_else(|| VertexFunction::zeros(n));
        for i in 0..n {
            sum[i] += beta[i];
        }
        let avg: Vec<f64> = sum.iter().map(|x| x / (k + 1) as f64).collect();
        rows.push(BetaRow {
            count: k + 1,
            tau,
            distance: g.dist(&avg, &beta_ref),
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct PinningRow {
    pub lambda: f64,
    pub set: VertexSet,
    pub bound1: f64,
    pub bound2: f64,
    /// One step at `τ = max(bound1, bound2)` fixes the indicator (for
    /// `λ = 1` the first bound is approached from below).
    pub pins_at_bound: bool,
    /// Bisection estimate of the largest `τ` below which the indicator is fixed.
    pub empirical_tau: f64,
}

fn pins(
    g: &Graph,
    dec: &SpectralDecomposition,
    chi: &[f64],
    lambda: f64,
    tau: f64,
) -> Result<bool> {
    let params = SchemeParams::from_lambda(lambda, tau)?;
    Ok(&sd_step(g, dec, &params, chi)?.u[..] == chi)
}

/// The step size at which a pinning guarantee applies: the larger bound,
/// nudged below the first bound when `λ = 1` since that case is strict.
pub fn guaranteed_pinning_tau(bound1: f64, bound2: f64, lambda: f64) -> f64 {
    let b1 = if lambda == 1.0 {
        bound1 * (1.0 - 1e-9)
    } else {
        bound1
    };
    b1.max(bound2)
}

/// Pinning thresholds for every nonempty proper subset (`|V| ≤ 12`).
pub fn pinning_map(
    g: &Graph,
    dec: &SpectralDecomposition,
    lambdas: &[f64],
) -> Result<Vec<PinningRow>> {
    let n = g.n_vertices();
    if n > 12 {
        return Err(Error::TooLarge { n, limit: 12 });
    }
    let mut rows = Vec::new();
    for &lambda in lambdas {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0, 1], got {lambda}"
            )));
        }
        let chunk = (1..(1u64 << n) - 1)
            .into_par_iter()
            .map(|mask| {
                let set = VertexSet::from_mask(n, mask);
                let chi = set.indicator();
                let (b1, b2) = crate::semidiscrete::pinning_bounds(g, dec, &set, lambda)?;
                let tau = guaranteed_pinning_tau(b1, b2, lambda);
                let pins_at_bound = pins(g, dec, &chi, lambda, tau)?;
                let (mut lo, mut hi) = (0.0, 4.0 * (tau + 1.0 / dec.operator_norm()));
                while pins(g, dec, &chi, lambda, hi)? && hi < 1e6 {
                    hi *= 2.0;
                }
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if mid == 0.0 || pins(g, dec, &chi, lambda, mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(PinningRow {
                    lambda,
                    set,
                    bound1: b1,
                    bound2: b2,
                    pins_at_bound,
                    empirical_tau: lo,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(chunk);
    }
    Ok(rows)
}

pub fn write_pinning_csv<W: Write>(rows: &[PinningRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "lambda,set,bound1,bound2,pins_at_bound,empirical_tau")?;
    for r in rows {
        let set: Vec<String> = r.set.members().iter().map(|i| i.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt17(r.lambda),
            set.join(" "),
            fmt17(r.bound1),
            fmt17(r.bound2),
            r.pins_at_bound,
            fmt17(r.empirical_tau)
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct AgreementRow {
    pub tau: f64,
    pub steps: usize,
    pub agreement: f64,
}

/// Follows MBO from `s0` and records how often the smoothed set
/// minimization picks the same next set.
pub fn mcf_agreement(
    g: &Graph,
    dec: &SpectralDecomposition,
    s0: &VertexSet,
    taus: &[f64],
    steps: usize,
) -> Result<Vec<AgreementRow>> {
    taus.iter()
        .map(|&tau| {
            let mut s = s0.clone();
            let mut agree = 0usize;
            for _ in 0..steps {
                let mbo = VertexSet::from_indicator(&mbo_step(g, dec, tau, &s.indicator())?);
                if new_mcf_step(g, dec, &s, tau)? == mbo {
                    agree += 1;
                }
                s = mbo;
            }
            let agreement = if steps == 0 {
                1.0
            } else {
                agree as f64 / steps as f64
            };
            Ok(AgreementRow {
                tau,
                steps,
                agreement,
            })
        })
        .collect()
}

pub fn write_agreement_csv<W: Write>(rows: &[AgreementRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "tau,agreement")?;
    for r in rows {
        writeln!(w, "{},{}", fmt17(r.tau), fmt17(r.agreement))?;
    }
    Ok(())
}
