use phaseflow::functionals::{lyapunov_gradient, lyapunov_h};
use phaseflow::lab::rng;
use phaseflow::semidiscrete::{
    advance, beta_from_diffused, pinning_bounds, rho_lambda, sd_lipschitz_check, step_lambda_gt1,
    step_lambda_neg,
};
use phaseflow::{
    decompose, generators, mbo_step, sd_run, sd_step, Graph, SchemeParams, SpectralDecomposition,
    VertexFunction, VertexSet,
};
use rand::Rng;

fn setup(g: Graph) -> (Graph, SpectralDecomposition) {
    let dec = decompose(&g).unwrap();
    (g, dec)
}

fn k2() -> (Graph, SpectralDecomposition) {
    setup(generators::complete(2, 1.0, 0.0).unwrap())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn obstacle_map_branches() {
    assert_eq!(
        &rho_lambda(0.6, &[0.5, 0.2, 0.7]).unwrap()[..],
        &[0.5, 0.0, 1.0]
    );
    let v = [0.0, 0.13, 0.5, 0.77, 1.0];
    assert_eq!(&rho_lambda(0.0, &v).unwrap()[..], &v);
    assert_eq!(
        &beta_from_diffused(0.6, &[0.0, 0.5, 1.0]).unwrap()[..],
        &[0.5, 0.0, -0.5]
    );
}

#[test]
fn obstacle_map_is_monotone_and_lipschitz() {
    let mut r = rng(7);
    for _ in 0..2000 {
        let lambda: f64 = r.gen_range(0.0..0.99);
        let (a, b): (f64, f64) = (r.gen_range(-0.2..1.2), r.gen_range(-0.2..1.2));
        let ra = rho_lambda(lambda, &[a]).unwrap()[0];
        let rb = rho_lambda(lambda, &[b]).unwrap()[0];
        if a <= b {
            assert!(ra <= rb);
        }
        assert!((ra - rb).abs() <= (a - b).abs() / (1.0 - lambda) + 1e-15);
    }
}

// On K2 with u = (1,0) the diffused state is ½ ± ½e^{−2τ}.
#[test]
fn two_node_step() {
    let (g, dec) = k2();
    let params = SchemeParams::new(1.0, 0.1).unwrap();
    let st = sd_step(&g, &dec, &params, &[1.0, 0.0]).unwrap();
    let d = 0.5 * (-0.2f64).exp() / 0.9;
    assert!(max_diff(&st.u, &[0.5 + d, 0.5 - d]) < 1e-14);
    assert_eq!(st.beta.unwrap().sup_norm(), 0.0);

    let st = sd_step(&g, &dec, &params, &[0.5, 0.5]).unwrap();
    assert!(max_diff(&st.u, &[0.5, 0.5]) < 1e-15);
    assert!(st.beta.unwrap().sup_norm() < 1e-15);
}

#[test]
fn star_centre_pins_below_the_bound() {
    let (g, dec) = setup(generators::star(4, 1.0, 0.0).unwrap());
    let set = VertexSet::from_members(4, &[0]);
    let chi = set.indicator();
    for lambda in [0.3, 0.7, 1.0] {
        let (b1, b2) = pinning_bounds(&g, &dec, &set, lambda).unwrap();
        assert!((b2 - lambda / 6.0).abs() < 1e-15);
        let tau = 0.99 * b1.max(b2);
        let params = SchemeParams::from_lambda(lambda, tau).unwrap();
        assert_eq!(sd_step(&g, &dec, &params, &chi).unwrap().u, chi);
    }
}

#[test]
fn pinning_bound_values() {
    let (g, dec) = k2();
    let (_, b2) = pinning_bounds(&g, &dec, &VertexSet::from_members(2, &[0]), 0.8).unwrap();
    assert!((b2 - 0.4).abs() < 1e-15);
    let (g, dec) = setup(generators::random_connected(7, 0.3, 1.0, 2).unwrap());
    let (b1, b2) = pinning_bounds(&g, &dec, &VertexSet::full(7), 0.5).unwrap();
    assert!(b1.is_finite() && b2 == f64::INFINITY);
    let (b1, b2) = pinning_bounds(&g, &dec, &VertexSet::empty(7), 0.5).unwrap();
    assert!(b1 == f64::INFINITY && b2 == f64::INFINITY);
    // The full set is diffusion-invariant and pins for any step.
    for tau in [0.1, 10.0] {
        let params = SchemeParams::from_lambda(0.5, tau).unwrap();
        assert_eq!(
            &sd_step(&g, &dec, &params, &[1.0; 7]).unwrap().u[..],
            &[1.0; 7]
        );
    }
}

#[test]
fn mbo_examples() {
    let (g, dec) = k2();
    assert_eq!(
        &mbo_step(&g, &dec, 0.3, &[0.0, 0.0]).unwrap()[..],
        &[0.0, 0.0]
    );
    assert_eq!(
        &mbo_step(&g, &dec, 0.3, &[1.0, 1.0]).unwrap()[..],
        &[1.0, 1.0]
    );
    // Beyond τ ≈ 18 the gap e^{−2τ}/2 drops below f64 resolution at ½.
    for tau in [0.01, 1.0, 5.0] {
        assert_eq!(
            &mbo_step(&g, &dec, tau, &[1.0, 0.0]).unwrap()[..],
            &[1.0, 0.0]
        );
    }
    assert!(mbo_step(&g, &dec, 0.3, &[0.5, 0.0]).is_err());
}

#[test]
fn super_unit_step_is_the_threshold() {
    let (g, dec) = setup(generators::random_connected(9, 0.3, 0.0, 3).unwrap());
    let mut r = rng(8);
    for _ in 0..30 {
        let tau = r.gen_range(0.05..2.0);
        let params = SchemeParams::from_lambda(r.gen_range(1.01..5.0), tau).unwrap();
        let u: Vec<f64> = (0..9)
            .map(|_| if r.gen::<bool>() { 1.0 } else { 0.0 })
            .collect();
        let v = dec.heat_apply(tau, &u).unwrap();
        if v.iter().any(|x| (x - 0.5).abs() < 1e-9) {
            continue;
        }
        assert_eq!(
            step_lambda_gt1(&g, &dec, &params, &u).unwrap(),
            mbo_step(&g, &dec, tau, &u).unwrap()
        );
    }
    let (g, dec) = k2();
    let params = SchemeParams::from_lambda(2.0, 0.4).unwrap();
    assert_eq!(
        &step_lambda_gt1(&g, &dec, &params, &[1.0, 1.0]).unwrap()[..],
        &[1.0, 1.0]
    );
    assert_eq!(
        &step_lambda_gt1(&g, &dec, &params, &[1.0, 0.0]).unwrap()[..],
        &[1.0, 0.0]
    );
}

#[test]
fn negative_ratio_step() {
    let (g, dec) = k2();
    let tau = 0.3;
    let params = SchemeParams::from_lambda(-1.0, tau).unwrap();
    let st = step_lambda_neg(&g, &dec, &params, &[0.5, 0.5]).unwrap();
    assert!(max_diff(&st.u, &[0.5, 0.5]) < 1e-15);
    let e = (-2.0 * tau).exp();
    let v = [0.5 + 0.5 * e, 0.5 - 0.5 * e];
    let st = step_lambda_neg(&g, &dec, &params, &[1.0, 0.0]).unwrap();
    assert!(max_diff(&st.u, &[0.5 * (v[0] + 0.5), 0.5 * (v[1] + 0.5)]) < 1e-14);

    let (g, dec) = setup(generators::cycle(6, 1.0, 1.0).unwrap());
    let mut r = rng(9);
    for _ in 0..200 {
        let params = SchemeParams::from_lambda(-r.gen_range(0.01..4.0), 0.5).unwrap();
        let u: Vec<f64> = (0..6).map(|_| r.gen()).collect();
        let out = step_lambda_neg(&g, &dec, &params, &u).unwrap().u;
        assert!(out.is_interior());
    }
}

#[test]
fn runs_and_fixed_points() {
    let (g, dec) = setup(generators::star(5, 1.0, 0.0).unwrap());
    let params = SchemeParams::new(1.0, 0.05).unwrap();
    let u0 = [0.2, 0.9, 0.4, 0.6, 0.1];
    let traj = sd_run(&g, &dec, &params, &u0, 0).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(&traj.samples[0].u[..], &u0);

    // λ = 0.1 and ‖Δχ‖_∞ = 4 put τ = 0.01 under the second pinning bound.
    let params = SchemeParams::new(0.1, 0.01).unwrap();
    let chi = VertexSet::from_members(5, &[0]).indicator();
    let traj = sd_run(&g, &dec, &params, &chi, 20).unwrap();
    assert_eq!(traj.fixed_point, Some(0));
    assert!(traj.states().all(|u| *u == chi));

    // MBO trajectories are eventually constant.
    for seed in 0..10 {
        let (g, dec) = setup(generators::random_connected(10, 0.3, 1.0, 50 + seed).unwrap());
        let params = SchemeParams::new(0.4, 0.4).unwrap();
        let mut r = rng(seed);
        let u0: Vec<f64> = (0..10)
            .map(|_| if r.gen::<bool>() { 1.0 } else { 0.0 })
            .collect();
        assert!(sd_run(&g, &dec, &params, &u0, 500)
            .unwrap()
            .fixed_point
            .is_some());
    }
}

#[test]
fn defining_relation_holds() {
    let (g, dec) = setup(generators::random_connected(8, 0.4, 1.0, 4).unwrap());
    let mut r = rng(10);
    for _ in 0..100 {
        let lambda: f64 = if r.gen::<f64>() < 0.2 {
            1.0
        } else {
            r.gen_range(0.01..1.0)
        };
        let tau = r.gen_range(0.05..2.0);
        let params = SchemeParams::from_lambda(lambda, tau).unwrap();
        let u: Vec<f64> = (0..8).map(|_| r.gen()).collect();
        let st = sd_step(&g, &dec, &params, &u).unwrap();
        let v = dec.heat_apply(tau, &u).unwrap();
        let beta = st.beta.unwrap();
        for i in 0..8 {
            let lhs = (1.0 - lambda) * st.u[i] - v[i] + 0.5 * lambda;
            assert!((lhs - lambda * beta[i]).abs() < 1e-10);
            // β sits in the obstacle subdifferential.
            if st.u[i] > 0.0 && st.u[i] < 1.0 {
                assert!(beta[i].abs() < 1e-12);
            } else if st.u[i] == 0.0 {
                assert!(beta[i] >= -1e-12);
            } else {
                assert!(beta[i] <= 1e-12);
            }
        }
    }
}

#[test]
fn update_minimizes_the_step_functional() {
    let k = 40;
    for (g, seed) in [
        (generators::path(3, 1.0, 0.0).unwrap(), 1),
        (generators::complete(3, 0.7, 1.0).unwrap(), 2),
        (generators::complete(2, 1.0, 0.0).unwrap(), 3),
    ] {
        let dec = decompose(&g).unwrap();
        let n = g.n_vertices();
        let mut r = rng(seed);
        for _ in 0..10 {
            let lambda: f64 = r.gen_range(0.0..=1.0);
            let params = SchemeParams::from_lambda(lambda, 0.4).unwrap();
            let un: Vec<f64> = (0..n).map(|_| r.gen()).collect();
            let v = dec.heat_apply(0.4, &un).unwrap();
            let objective = |u: &[f64]| {
                let pot: Vec<f64> = u.iter().map(|x| 1.0 - x).collect();
                let d: Vec<f64> = u.iter().zip(v.iter()).map(|(a, b)| a - b).collect();
                lambda * g.vertex_inner(u, &pot).unwrap() + g.vertex_inner(&d, &d).unwrap()
            };
            let best = objective(&sd_step(&g, &dec, &params, &un).unwrap().u);
            for idx in 0..(k + 1usize).pow(n as u32) {
                let mut rest = idx;
                let u: Vec<f64> = (0..n)
                    .map(|_| {
                        let c = rest % (k + 1);
                        rest /= k + 1;
                        c as f64 / k as f64
                    })
                    .collect();
                assert!(objective(&u) >= best - 1e-12);
            }
        }
    }
}

#[test]
fn gradient_relation_at_iterates() {
    let (g, dec) = setup(generators::random_connected(7, 0.4, 0.0, 6).unwrap());
    let mut r = rng(11);
    for _ in 0..50 {
        let lambda: f64 = r.gen_range(0.01..=1.0);
        let params = SchemeParams::from_lambda(lambda, 0.3).unwrap();
        let u: Vec<f64> = (0..7).map(|_| r.gen_range(0.01..0.99)).collect();
        let st = sd_step(&g, &dec, &params, &u).unwrap();
        let grad = lyapunov_gradient(&g, &dec, &params, &u).unwrap();
        let beta = st.beta.unwrap();
        for i in 0..7 {
            let rhs = 2.0 * lambda * beta[i] + 2.0 * (1.0 - lambda) * (u[i] - st.u[i]);
            assert!((grad[i] - rhs).abs() < 1e-9);
        }
    }
}

#[test]
fn increments_are_square_summable() {
    let (g, dec) = setup(generators::random_connected(9, 0.3, 1.0, 12).unwrap());
    let mut r = rng(12);
    for lambda in [0.0, 0.2, 0.6, 0.9] {
        let params = SchemeParams::from_lambda(lambda, 0.5).unwrap();
        let u0: Vec<f64> = (0..9).map(|_| r.gen()).collect();
        let h0 = lyapunov_h(&g, &dec, &params, &u0).unwrap();
        let mut u: VertexFunction = u0.into();
        let mut sum = 0.0;
        for _ in 0..300 {
            let next = advance(&g, &dec, &params, &u).unwrap().u;
            let d = &next - &u;
            sum += g.vertex_inner(&d, &d).unwrap();
            u = next;
        }
        assert!(sum <= h0 / (1.0 - lambda) + 1e-12);
    }
}

#[test]
fn lipschitz_examples() {
    let (g, dec) = setup(generators::cycle(6, 1.0, 0.0).unwrap());
    let u0 = [0.1, 0.5, 0.9, 0.3, 0.7, 0.2];
    let params = SchemeParams::from_lambda(0.5, 0.3).unwrap();
    assert!(sd_lipschitz_check(&g, &dec, &params, &u0, &u0, 10).unwrap());
    // λ = 0 is a clamp after a contraction, so distances never grow.
    let params = SchemeParams::from_lambda(0.0, 0.3).unwrap();
    let v0 = [0.0, 1.0, 0.4, 0.3, 0.2, 0.9];
    assert!(sd_lipschitz_check(&g, &dec, &params, &u0, &v0, 30).unwrap());
    assert!(sd_lipschitz_check(
        &g,
        &dec,
        &SchemeParams::from_lambda(1.0, 0.3).unwrap(),
        &u0,
        &v0,
        3
    )
    .is_err());
}

#[test]
fn preconditions() {
    let (g, dec) = k2();
    let params = SchemeParams::new(1.0, 0.1).unwrap();
    assert!(sd_step(&g, &dec, &params, &[1.2, 0.0]).is_err());
    assert!(sd_step(&g, &dec, &params, &[1.0]).is_err());
    let neg = SchemeParams::from_lambda(-0.5, 0.1).unwrap();
    assert!(sd_step(&g, &dec, &neg, &[1.0, 0.0]).is_err());
    assert!(step_lambda_neg(&g, &dec, &params, &[1.0, 0.0]).is_err());
    assert!(step_lambda_gt1(&g, &dec, &params, &[1.0, 0.0]).is_err());
}
