//! Graph mean curvature flows: a distance-penalized set minimization, a
//! heat-smoothed set minimization, and an ODE driven by signed curvature.
//!
//! Set minimizations enumerate every subset, so they are limited to
//! [`EXHAUSTIVE_LIMIT`] vertices. Among minimizers the one closest to the
//! current set (smallest symmetric difference) wins, then the
//! lexicographically smallest membership vector.

use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::functionals::mbo_lyapunov_j;
use crate::graph::Graph;
use crate::spectral::SpectralDecomposition;
use crate::trajectory::{Metadata, SchemeTag, Trajectory};
use crate::vertex::{VertexFunction, VertexSet};

pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Objective values this close (relative to `max(1, |min|)`) count as ties.
const TIE_TOL: f64 = 1e-12;

/// How distances to the boundary are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DistanceKind {
    /// Number of edges on a shortest path.
    #[default]
    Hops,
    /// Shortest path where an edge of weight `ω` has length `1/ω`.
    Weighted,
}

/// Vertices with a neighbour on the other side of `S`.
pub fn boundary_set(g: &Graph, s: &VertexSet) -> Result<VertexSet> {
    check_len(g.n_vertices(), s.len())?;
    Ok(VertexSet::from_membership(
        (0..g.n_vertices())
            .map(|i| g.neighbors(i).any(|(j, _)| s.contains(i) != s.contains(j)))
            .collect(),
    ))
}

/// Hop distance from every vertex to the nearest member of `target`.
pub fn graph_distance_to(g: &Graph, target: &VertexSet) -> Result<VertexFunction> {
    distance_to(g, target, DistanceKind::Hops)
}

pub fn distance_to(g: &Graph, target: &VertexSet, kind: DistanceKind) -> Result<VertexFunction> {
    check_len(g.n_vertices(), target.len())?;
    if target.cardinality() == 0 {
        return Err(Error::Precondition(
            "distance to an empty set is undefined".into(),
        ));
    }
    let n = g.n_vertices();
    let mut dist = vec![f64::INFINITY; n];
    match kind {
        DistanceKind::Hops => {
            let mut queue = VecDeque::new();
            for i in target.members() {
                dist[i] = 0.0;
                queue.push_back(i);
            }
            while let Some(i) = queue.pop_front() {
                for (j, _) in g.neighbors(i) {
                    if dist[j].is_infinite() {
                        dist[j] = dist[i] + 1.0;
                        queue.push_back(j);
                    }
                }
            }
        }
        DistanceKind::Weighted => {
            // Dijkstra keyed on the bit pattern of a nonnegative float, which orders like the float.
            let mut heap = BinaryHeap::new();
            for i in target.members() {
                dist[i] = 0.0;
                heap.push(std::cmp::Reverse((0u64, i)));
            }
            while let Some(std::cmp::Reverse((bits, i))) = heap.pop() {
                let d = f64::from_bits(bits);
                if d > dist[i] {
                    continue;
                }
                for (j, w) in g.neighbors(i) {
                    let nd = d + 1.0 / w;
                    if nd < dist[j] {
                        dist[j] = nd;
                        heap.push(std::cmp::Reverse((nd.to_bits(), j)));
                    }
                }
            }
        }
    }
    Ok(dist.into())
}

fn check_exhaustive(n: usize) -> Result<()> {
    if n > EXHAUSTIVE_LIMIT {
        Err(Error::TooLarge {
            n,
            limit: EXHAUSTIVE_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Cut weight of the subset encoded by `mask`.
fn cut_of(g: &Graph, mask: u64) -> f64 {
    let n = g.n_vertices();
    let w = g.weights();
    let mut s = 0.0;
    for i in (0..n).filter(|&i| mask >> i & 1 == 1) {
        for j in (0..n).filter(|&j| mask >> j & 1 == 0) {
            s += w[i * n + j];
        }
    }
    s
}

/// Deterministic exhaustive argmin over subsets. `lower` must never exceed
/// `objective`; it is used to skip evaluations.
fn argmin_subsets<L, F>(n: usize, current: &VertexSet, lower: L, objective: F) -> VertexSet
where
    L: Fn(u64) -> f64 + Sync,
    F: Fn(u64) -> f64 + Sync,
{
    let total: u64 = 1 << n;
    let chunk = (total / 64).max(1);
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let best = starts
        .par_iter()
        .map(|&a| {
            let mut best = f64::INFINITY;
            for mask in a..(a + chunk).min(total) {
                if lower(mask) > best {
                    continue;
                }
                best = best.min(objective(mask));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    let cutoff = best + TIE_TOL * best.abs().max(1.0);
    let cur = current.to_mask();
    let key = |mask: u64| ((mask ^ cur).count_ones(), VertexSet::from_mask(n, mask));
    let winner = starts
        .par_iter()
        .filter_map(|&a| {
            (a..(a + chunk).min(total))
                .filter(|&mask| lower(mask) <= cutoff && objective(mask) <= cutoff)
                .map(key)
                .min()
        })
        .min()
        .expect("the minimum is attained");
    winner.1
}

/// `argmin_{S'} TV(χ_{S'}) + δt^{-1}⟨(χ_{S'} − χ_S)², d^Σ⟩_V` with `Σ` the
/// boundary of `S` and hop distances.
pub fn vggob_mcf_step(g: &Graph, s: &VertexSet, dt: f64) -> Result<VertexSet> {
    vggob_mcf_step_with(g, s, dt, DistanceKind::Hops)
}

pub fn vggob_mcf_step_with(
    g: &Graph,
    s: &VertexSet,
    dt: f64,
    kind: DistanceKind,
) -> Result<VertexSet> {
    let n = g.n_vertices();
    check_len(n, s.len())?;
    check_exhaustive(n)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let boundary = boundary_set(g, s)?;
    if boundary.cardinality() == 0 {
        // S is ∅ or V: both terms vanish at S' = S.
        return Ok(s.clone());
    }
    let dist = distance_to(g, &boundary, kind)?;
    let cost: Vec<f64> = (0..n)
        .map(|i| dist[i] * g.degree_powers()[i] / dt)
        .collect();
    let cur = s.to_mask();
    let penalty = |mask: u64| -> f64 {
        let flip = mask ^ cur;
        (0..n)
            .filter(|&i| flip >> i & 1 == 1)
            .map(|i| cost[i])
            .sum()
    };
    Ok(argmin_subsets(n, s, penalty, |mask| {
        penalty(mask) + cut_of(g, mask)
    }))
}

/// Adds weight `ϵ` between every pair of non-adjacent vertices.
/// `ϵ = 0` returns the graph unchanged with a warning.
pub fn augment_complete(g: &Graph, eps: f64) -> Result<Graph> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "augmentation weight must be nonnegative, got {eps}"
        )));
    }
    if eps == 0.0 {
        log::warn!("augment_complete with weight 0 leaves the graph unchanged");
        return Ok(g.clone());
    }
    let n = g.n_vertices();
    let w = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            match g.weights()[k] {
                _ if i == j => 0.0,
                x if x > 0.0 => x,
                _ => eps,
            }
        })
        .collect();
    Graph::from_weights(n, w, g.r())
}

/// `argmin_{S'} TV(χ_{S'}) + τ^{-1}⟨χ_{S'} − χ_S, e^{-τΔ}(χ_{S'} − χ_S)⟩_V`.
pub fn new_mcf_step(
    g: &Graph,
    dec: &SpectralDecomposition,
    s: &VertexSet,
    tau: f64,
) -> Result<VertexSet> {
    let n = g.n_vertices();
    check_len(n, s.len())?;
    check_exhaustive(n)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let m = smoothing_form(g, dec, tau);
    let cur = s.to_mask();
    let objective = |mask: u64| -> f64 {
        let flip = mask ^ cur;
        let idx: Vec<(usize, f64)> = (0..n)
            .filter(|&i| flip >> i & 1 == 1)
            .map(|i| (i, if mask >> i & 1 == 1 { 1.0 } else { -1.0 }))
            .collect();
        let mut q = 0.0;
        for &(i, xi) in &idx {
            for &(j, xj) in &idx {
                q += xi * xj * m[i * n + j];
            }
        }
        cut_of(g, mask) + q / tau
    };
    Ok(argmin_subsets(n, s, |_| 0.0, objective))
}

/// The symmetric matrix of `x ↦ ⟨x, e^{-τΔ}x⟩_V`.
fn smoothing_form(g: &Graph, dec: &SpectralDecomposition, tau: f64) -> Vec<f64> {
    let n = g.n_vertices();
    let mut p = vec![0.0; n * n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = dec.heat(tau, &e);
        for i in 0..n {
            p[i * n + j] = g.degree_powers()[i] * col[i];
        }
    }
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (p[i * n + j] + p[j * n + i]);
        }
    }
    m
}

/// `|J(χ_S) − τ TV(χ_S)| / τ`, which is `O(τ)`.
pub fn tv_expansion_residual(
    g: &Graph,
    dec: &SpectralDecomposition,
    s: &VertexSet,
    tau: f64,
) -> Result<f64> {
    check_len(g.n_vertices(), s.len())?;
    let chi = s.indicator();
    let j = mbo_lyapunov_j(g, dec, tau, &chi)?;
    Ok((j - tau * g.tv(&chi)).abs() / tau)
}

/// `K_i = Σ_j (ω_ij / d_i) sgn(u_j − u_i)` with `sgn(0) = 0`.
pub fn curvature_k(g: &Graph, u: &[f64]) -> Result<VertexFunction> {
    check_len(g.n_vertices(), u.len())?;
    Ok(curvature(g, u))
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn curvature(g: &Graph, u: &[f64]) -> VertexFunction {
    (0..g.n_vertices())
        .map(|i| {
            g.neighbors(i)
                .map(|(j, w)| w * sgn(u[j] - u[i]))
                .sum::<f64>()
                / g.degree(i)
        })
        .collect::<Vec<_>>()
        .into()
}

/// Exponent of the gradient norms in the curvature flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(PNorm::Infinity)
        } else if p >= 1.0 {
            Ok(PNorm::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!(
                "p must be at least 1, got {p}"
            )))
        }
    }
}

/// `(‖(∇⁺u)_i‖_p, ‖(∇⁻u)_i‖_p)` with `‖x‖_p = (Σ_j ω_ij |x_j|^p)^{1/p}`
/// and `max_j ω_ij |x_j|` for `p = ∞`.
pub fn updownwind_norms(g: &Graph, u: &[f64], i: usize, p: PNorm) -> Result<(f64, f64)> {
    check_len(g.n_vertices(), u.len())?;
    if i >= g.n_vertices() {
        return Err(Error::VertexOutOfRange {
            vertex: i,
            n: g.n_vertices(),
        });
    }
    Ok(norms(g, u, i, p))
}

fn norms(g: &Graph, u: &[f64], i: usize, p: PNorm) -> (f64, f64) {
    let (mut plus, mut minus) = (0.0f64, 0.0f64);
    for (j, w) in g.neighbors(i) {
        let d = u[j] - u[i];
        let (a, b) = (d.max(0.0), (-d).max(0.0));
        match p {
            PNorm::Finite(q) => {
                plus += w * a.powf(q);
                minus += w * b.powf(q);
            }
            PNorm::Infinity => {
                plus = plus.max(w * a);
                minus = minus.max(w * b);
            }
        }
    }
    match p {
        PNorm::Finite(q) => (plus.powf(1.0 / q), minus.powf(1.0 / q)),
        PNorm::Infinity => (plus, minus),
    }
}

/// Right-hand side `K⁺_i ‖(∇⁺u)_i‖_p − K⁻_i ‖(∇⁻u)_i‖_p`.
pub fn elmo_velocity(g: &Graph, u: &[f64], p: PNorm) -> Result<VertexFunction> {
    check_len(g.n_vertices(), u.len())?;
    Ok(velocity(g, u, p))
}

fn velocity(g: &Graph, u: &[f64], p: PNorm) -> VertexFunction {
    let k = curvature(g, u);
    (0..g.n_vertices())
        .map(|i| {
            let (plus, minus) = norms(g, u, i, p);
            k[i].max(0.0) * plus - (-k[i]).max(0.0) * minus
        })
        .collect::<Vec<_>>()
        .into()
}

/// Largest Euler step for which no two neighbours pass each other.
pub fn elmo_dt_max(g: &Graph, u: &[f64], p: PNorm) -> Result<f64> {
    check_len(g.n_vertices(), u.len())?;
    Ok(dt_limit(g, u, &velocity(g, u, p)))
}

fn dt_limit(g: &Graph, u: &[f64], f: &[f64]) -> f64 {
    let mut limit = f64::INFINITY;
    for (i, j, _) in g.edges() {
        let (lo, hi) = if u[i] < u[j] { (i, j) } else { (j, i) };
        let gap = u[hi] - u[lo];
        let closing = f[lo] - f[hi];
        if gap > 0.0 && closing > 0.0 {
            limit = limit.min(gap / closing);
        }
    }
    limit
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

/// Explicit Euler for the curvature flow. Each step is
/// `min(dt, elmo_dt_max(u))`; neighbours that meet are merged to their mean.
pub fn elmo_mcf_flow(
    g: &Graph,
    u0: &[f64],
    p: PNorm,
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    let n = g.n_vertices();
    check_len(n, u0.len())?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let meta = Metadata {
        dt: Some(dt),
        ..Default::default()
    };
    let mut traj = Trajectory::new(SchemeTag::ElmoMcf, meta);
    let mut u = u0.to_vec();
    let mut t = 0.0;
    traj.push(0, t, u.clone().into(), None);
    for step in 1..=n_steps {
        let f = velocity(g, &u, p);
        let limit = dt_limit(g, &u, &f);
        let h = dt.min(limit);
        let mut parent: Vec<usize> = (0..n).collect();
        for (i, j, _) in g.edges() {
            let (lo, hi) = if u[i] < u[j] { (i, j) } else { (j, i) };
            let (gap, closing) = (u[hi] - u[lo], f[lo] - f[hi]);
            if gap > 0.0 && closing > 0.0 && h >= gap / closing * (1.0 - 1e-12) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
        for i in 0..n {
            u[i] += h * f[i];
        }
        let mut sums = vec![(0.0, 0usize); n];
        for i in 0..n {
            let r = find(&mut parent, i);
            sums[r].0 += u[i];
            sums[r].1 += 1;
        }
        for i in 0..n {
            let r = find(&mut parent, i);
            if sums[r].1 > 1 {
                u[i] = sums[r].0 / sums[r].1 as f64;
            }
        }
        t += h;
        traj.push(step, t, u.clone().into(), None);
    }
    Ok(traj)
}

/// Largest gap between `−K_i` and the finite-difference gradient of TV in
/// the `d`-weighted product, `d_i^{-1} ∂TV/∂u_i`. Needs `r = 1` and no
/// two neighbours with equal values.
pub fn tv_first_variation_check(g: &Graph, u: &[f64]) -> Result<f64> {
    check_len(g.n_vertices(), u.len())?;
    if g.r() != 1.0 {
        return Err(Error::Precondition(
            "first variation identity needs r = 1".into(),
        ));
    }
    let min_gap = g
        .edges()
        .iter()
        .map(|&(i, j, _)| (u[i] - u[j]).abs())
        .fold(f64::INFINITY, f64::min);
    if !(min_gap > 0.0) {
        return Err(Error::Precondition(
            "neighbouring values must differ".into(),
        ));
    }
    let h = (min_gap / 4.0).min(1e-4);
    let k = curvature(g, u);
    let mut worst: f64 = 0.0;
    let mut w = u.to_vec();
    for i in 0..u.len() {
        w[i] = u[i] + h;
        let up = g.tv(&w);
        w[i] = u[i] - h;
        let down = g.tv(&w);
        w[i] = u[i];
        let fd = (up - down) / (2.0 * h) / g.degree(i);
        worst = worst.max((-k[i] - fd).abs());
    }
    Ok(worst)
}
