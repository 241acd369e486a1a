use phaseflow::lab::rng;
use phaseflow::mcf::{
    augment_complete, boundary_set, curvature_k, distance_to, elmo_dt_max, elmo_mcf_flow,
    elmo_velocity, graph_distance_to, new_mcf_step, tv_expansion_residual,
    tv_first_variation_check, updownwind_norms, vggob_mcf_step, DistanceKind, PNorm,
};
use phaseflow::{decompose, generators, Error, Graph, SpectralDecomposition, VertexSet};
use rand::seq::SliceRandom;
use rand::Rng;

fn set(n: usize, members: &[usize]) -> VertexSet {
    VertexSet::from_members(n, members)
}

fn setup(g: Graph) -> (Graph, SpectralDecomposition) {
    let dec = decompose(&g).unwrap();
    (g, dec)
}

#[test]
fn boundaries_and_distances() {
    let p3 = generators::path(3, 1.0, 0.0).unwrap();
    assert_eq!(boundary_set(&p3, &set(3, &[0])).unwrap(), set(3, &[0, 1]));
    assert_eq!(boundary_set(&p3, &set(3, &[])).unwrap(), set(3, &[]));
    assert_eq!(
        &graph_distance_to(&p3, &set(3, &[0])).unwrap()[..],
        &[0.0, 1.0, 2.0]
    );
    let c4 = generators::cycle(4, 1.0, 0.0).unwrap();
    assert_eq!(
        &graph_distance_to(&c4, &set(4, &[0])).unwrap()[..],
        &[0.0, 1.0, 2.0, 1.0]
    );
    assert!(matches!(
        graph_distance_to(&c4, &set(4, &[])),
        Err(Error::Precondition(_))
    ));
    // Weighted distances use edge length 1/ω.
    let g = Graph::from_edges(3, &[(0, 1, 2.0), (1, 2, 0.5), (0, 2, 0.2)], 0.0).unwrap();
    assert_eq!(
        &distance_to(&g, &set(3, &[0]), DistanceKind::Weighted).unwrap()[..],
        &[0.0, 0.5, 2.5]
    );
}

#[test]
fn distance_penalized_step() {
    let p5 = generators::path(5, 1.0, 0.0).unwrap();
    assert_eq!(vggob_mcf_step(&p5, &set(5, &[]), 1.0).unwrap(), set(5, &[]));
    assert_eq!(
        vggob_mcf_step(&p5, &VertexSet::full(5), 1.0).unwrap(),
        VertexSet::full(5)
    );
    // A lone middle vertex costs a cut of 2 and is dropped once moving is cheap.
    assert_eq!(
        vggob_mcf_step(&p5, &set(5, &[2]), 100.0).unwrap(),
        set(5, &[])
    );
    // A half-line already has the least possible cut, so it stays.
    assert_eq!(
        vggob_mcf_step(&p5, &set(5, &[0, 1, 2]), 0.01).unwrap(),
        set(5, &[0, 1, 2])
    );
    assert!(vggob_mcf_step(&p5, &set(5, &[2]), 0.0).is_err());
    let big = generators::cycle(21, 1.0, 0.0).unwrap();
    assert!(matches!(
        vggob_mcf_step(&big, &set(21, &[0]), 1.0),
        Err(Error::TooLarge { .. })
    ));
}

#[test]
fn augmented_path_collapses() {
    let p4 = generators::path(4, 1.0, 0.0).unwrap();
    let aug = augment_complete(&p4, 0.1).unwrap();
    let out = vggob_mcf_step(&aug, &set(4, &[0, 1]), 1e3).unwrap();
    assert!(out.cardinality() == 0 || out.cardinality() == 4);
}

#[test]
fn augmentation_weights() {
    let p3 = generators::path(3, 1.0, 0.0).unwrap();
    let aug = augment_complete(&p3, 0.1).unwrap();
    assert_eq!(aug.weight(0, 2), 0.1);
    assert_eq!(aug.weight(0, 1), 1.0);
    assert_eq!(aug.weight(0, 0), 0.0);
    assert_eq!(aug.degree(0), 1.1);
    let same = augment_complete(&p3, 0.0).unwrap();
    assert_eq!(same.fingerprint(), p3.fingerprint());
    assert!(augment_complete(&p3, -1.0).is_err());
}

fn smoothed_objective(
    g: &Graph,
    dec: &SpectralDecomposition,
    s: &VertexSet,
    t: &VertexSet,
    tau: f64,
) -> f64 {
    let x = t.indicator().zip_map(&s.indicator(), |a, b| a - b);
    let hx = dec.heat_apply(tau, &x).unwrap();
    g.total_variation(&t.indicator()).unwrap() + g.vertex_inner(&x, &hx).unwrap() / tau
}

#[test]
fn heat_smoothed_step_is_a_minimizer() {
    for seed in 0..6 {
        let n = 5 + seed as usize % 4;
        let (g, dec) =
            setup(generators::random_connected(n, 0.4, (seed % 2) as f64, seed).unwrap());
        let mut r = rng(seed);
        for tau in [0.05, 0.5, 3.0] {
            let s = VertexSet::from_mask(n, r.gen_range(0..1u64 << n));
            let out = new_mcf_step(&g, &dec, &s, tau).unwrap();
            let got = smoothed_objective(&g, &dec, &s, &out, tau);
            for mask in 0..1u64 << n {
                let t = VertexSet::from_mask(n, mask);
                assert!(got <= smoothed_objective(&g, &dec, &s, &t, tau) + 1e-10);
            }
        }
    }
}

#[test]
fn heat_smoothed_step_examples() {
    let (g, dec) = setup(generators::complete(2, 1.0, 0.0).unwrap());
    assert_eq!(
        new_mcf_step(&g, &dec, &set(2, &[]), 1.0).unwrap(),
        set(2, &[])
    );
    // Small steps make any change expensive.
    assert_eq!(
        new_mcf_step(&g, &dec, &set(2, &[0]), 0.01).unwrap(),
        set(2, &[0])
    );
    // Large steps: (½ + ½e^{−2τ})/τ < 1, so dropping the cut wins.
    let out = new_mcf_step(&g, &dec, &set(2, &[0]), 5.0).unwrap();
    assert!(out.cardinality() != 1);
    assert!(new_mcf_step(&g, &dec, &set(2, &[0]), 0.0).is_err());
}

#[test]
fn minimizer_follows_vertex_relabelling() {
    // Random weights make the minimizer unique, so relabelling commutes with the step.
    for seed in 0..8 {
        let n = 7;
        let mut r = rng(100 + seed);
        let mut edges = Vec::new();
        for i in 0..n {
            edges.push((i, (i + 1) % n, r.gen_range(0.5..2.0)));
        }
        for _ in 0..5 {
            let (i, j) = (r.gen_range(0..n), r.gen_range(0..n));
            if i != j
                && !edges
                    .iter()
                    .any(|&(a, b, _)| (a, b) == (i, j) || (a, b) == (j, i))
            {
                edges.push((i, j, r.gen_range(0.5..2.0)));
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let moved: Vec<_> = edges
            .iter()
            .map(|&(i, j, w)| (perm[i], perm[j], w))
            .collect();
        let (g, dec) = setup(Graph::from_edges(n, &edges, 0.0).unwrap());
        let (h, hdec) = setup(Graph::from_edges(n, &moved, 0.0).unwrap());
        let s = set(n, &[0, 1, 2]);
        let hs = VertexSet::from_membership(
            (0..n)
                .map(|k| s.contains(perm.iter().position(|&p| p == k).unwrap()))
                .collect(),
        );
        for tau in [0.1, 1.0] {
            let a = new_mcf_step(&g, &dec, &s, tau).unwrap();
            let b = new_mcf_step(&h, &hdec, &hs, tau).unwrap();
            for i in 0..n {
                assert_eq!(a.contains(i), b.contains(perm[i]));
            }
        }
        for dt in [0.3, 3.0] {
            let a = vggob_mcf_step(&g, &s, dt).unwrap();
            let b = vggob_mcf_step(&h, &hs, dt).unwrap();
            for i in 0..n {
                assert_eq!(a.contains(i), b.contains(perm[i]));
            }
        }
    }
}

#[test]
fn smoothed_energy_expands_total_variation() {
    let (g, dec) = setup(generators::random_connected(8, 0.4, 0.0, 5).unwrap());
    let s = set(8, &[0, 2, 3]);
    let mut prev = f64::INFINITY;
    for k in 2..9 {
        let tau = 0.5f64.powi(k);
        let res = tv_expansion_residual(&g, &dec, &s, tau).unwrap();
        assert!(res < prev);
        if k > 4 {
            let ratio = prev / res;
            assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
        }
        prev = res;
    }
}

#[test]
fn curvature_values() {
    let p3 = generators::path(3, 1.0, 0.0).unwrap();
    assert_eq!(
        &curvature_k(&p3, &[0.0, 1.0, 2.0]).unwrap()[..],
        &[1.0, 0.0, -1.0]
    );
    assert_eq!(&curvature_k(&p3, &[0.4; 3]).unwrap()[..], &[0.0; 3]);
    let s4 = generators::star(4, 1.0, 0.0).unwrap();
    assert_eq!(
        &curvature_k(&s4, &[1.0, 0.0, 0.0, 2.0]).unwrap()[..],
        &[-1.0 / 3.0, 1.0, 1.0, -1.0]
    );
}

#[test]
fn upwind_and_downwind_norms() {
    let k2 = generators::complete(2, 1.0, 0.0).unwrap();
    let p2 = PNorm::new(2.0).unwrap();
    assert_eq!(
        updownwind_norms(&k2, &[1.0, 0.0], 1, p2).unwrap(),
        (1.0, 0.0)
    );
    assert_eq!(
        updownwind_norms(&k2, &[1.0, 0.0], 0, p2).unwrap(),
        (0.0, 1.0)
    );
    assert!(updownwind_norms(&k2, &[1.0, 0.0], 2, p2).is_err());
    assert!(PNorm::new(0.5).is_err());

    let g = Graph::from_edges(4, &[(0, 1, 1.0), (0, 2, 2.0), (0, 3, 0.5)], 0.0).unwrap();
    let u = [0.0, 0.3, 0.2, -0.4];
    let inf = updownwind_norms(&g, &u, 0, PNorm::Infinity).unwrap();
    assert_eq!(inf, (0.4, 0.2));
    let mut prev = f64::INFINITY;
    for p in [4.0, 16.0, 64.0, 256.0] {
        let (plus, _) = updownwind_norms(&g, &u, 0, PNorm::new(p).unwrap()).unwrap();
        // Weights enter as ω rather than ω^p, so the limit is reached from above.
        let gap = (plus - 0.3).abs();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 0.01);
}

#[test]
fn two_point_curvature_flow_meets_in_the_middle() {
    let k2 = generators::complete(2, 1.0, 0.0).unwrap();
    let p1 = PNorm::new(1.0).unwrap();
    let u0 = [0.0, 1.0];
    assert_eq!(&elmo_velocity(&k2, &u0, p1).unwrap()[..], &[1.0, -1.0]);
    assert_eq!(elmo_dt_max(&k2, &u0, p1).unwrap(), 0.5);
    let traj = elmo_mcf_flow(&k2, &u0, p1, 1.0, 3).unwrap();
    assert_eq!(traj.samples[1].t, 0.5);
    assert_eq!(&traj.samples[1].u[..], &[0.5, 0.5]);
    assert_eq!(&traj.last().unwrap().u[..], &[0.5, 0.5]);
    // With small steps the gap solves d′ = −2d and only closes asymptotically.
    let traj = elmo_mcf_flow(&k2, &u0, p1, 1e-3, 500).unwrap();
    let last = traj.last().unwrap();
    assert!((last.t - 0.5).abs() < 1e-12);
    let gap = last.u[1] - last.u[0];
    assert!((gap - (-1.0f64).exp()).abs() < 1e-3, "{gap}");
}

#[test]
fn curvature_flow_obeys_a_maximum_principle() {
    for seed in 0..10 {
        let g = generators::random_connected(9, 0.35, 1.0, seed).unwrap();
        let mut r = rng(seed);
        let u0: Vec<f64> = (0..9).map(|_| r.gen()).collect();
        let (lo, hi) = u0
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        for p in [
            PNorm::new(1.0).unwrap(),
            PNorm::new(2.0).unwrap(),
            PNorm::Infinity,
        ] {
            let traj = elmo_mcf_flow(&g, &u0, p, 0.05, 40).unwrap();
            for u in traj.states() {
                assert!(u.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
            }
        }
    }
}

#[test]
fn curvature_flow_restarts_consistently() {
    let g = generators::random_connected(8, 0.4, 0.0, 12).unwrap();
    let u0 = [0.1, 0.7, 0.3, 0.9, 0.5, 0.2, 0.8, 0.4];
    let p = PNorm::new(2.0).unwrap();
    let whole = elmo_mcf_flow(&g, &u0, p, 0.02, 20).unwrap();
    let half = elmo_mcf_flow(&g, &u0, p, 0.02, 10).unwrap();
    let rest = elmo_mcf_flow(&g, &half.last().unwrap().u, p, 0.02, 10).unwrap();
    assert_eq!(whole.last().unwrap().u, rest.last().unwrap().u);
    assert!(elmo_mcf_flow(&g, &u0, p, 0.0, 1).is_err());
}

#[test]
fn curvature_is_minus_the_total_variation_gradient() {
    let p3 = generators::path(3, 1.0, 1.0).unwrap();
    assert!(tv_first_variation_check(&p3, &[0.0, 0.3, 1.0]).unwrap() < 1e-8);
    let c5 = generators::cycle(5, 0.7, 1.0).unwrap();
    assert!(tv_first_variation_check(&c5, &[0.1, 0.5, 0.2, 0.9, 0.4]).unwrap() < 1e-8);
    let g = generators::random_connected(9, 0.4, 1.0, 2).unwrap();
    let u: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
    assert!(tv_first_variation_check(&g, &u).unwrap() < 1e-8);
    assert!(matches!(
        tv_first_variation_check(&p3, &[0.5; 3]),
        Err(Error::Precondition(_))
    ));
    let p3r0 = generators::path(3, 1.0, 0.0).unwrap();
    assert!(tv_first_variation_check(&p3r0, &[0.0, 0.3, 1.0]).is_err());
}
