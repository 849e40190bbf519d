//! Cross-checks between the reduction operators, the truncated recursions,
//! and the exact oracle on seeded random instances.

use corrcount::graph::{shifted_index, Graph};
use corrcount::instance::ColoringInstance;
use corrcount::mrf::{
    coloring_to_mrf, gamma_condition, potts, EdgePotential, MrfInstance, PottsParams,
};
use corrcount::oracle::Oracle;
use corrcount::{compute_z, mrf_error_bound, phi_mrf, phi_mrf_vector};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, edge_prob: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

fn random_mrf(rng: &mut ChaCha8Rng, g: &Graph, k: usize, f_lo: f64, f_hi: f64) -> MrfInstance {
    let phi: Vec<Vec<f64>> = (0..g.node_count())
        .map(|_| (0..k).map(|_| rng.gen_range(0.5..2.0)).collect())
        .collect();
    let edges: Vec<EdgePotential> = g
        .edges()
        .map(|(u, v)| EdgePotential {
            u,
            v,
            table: (0..k * k).map(|_| rng.gen_range(f_lo..f_hi)).collect(),
        })
        .collect();
    MrfInstance::new(g.clone(), k, phi, edges, 0.0, false).unwrap()
}

#[test]
fn reduce_node_single_step_identity() {
    // Z(m) * P(X_v = x) must equal Z(reduce(m, v, x)) for any node and symbol.
    let oracle = Oracle::default();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed as usize) % 4; // up to 5
        let k = 2 + (seed as usize) % 2;
        let g = random_graph(&mut rng, n, 0.5);
        let m = random_mrf(&mut rng, &g, k, 0.9, 1.1);
        let v = rng.gen_range(0..n);
        let x = rng.gen_range(0..k);
        let reduced = m.reduce_node(v, x).unwrap();
        let lhs = oracle.exact_log_z_mrf(&m).unwrap()
            + oracle.exact_marginal_mrf(&m, v, x).unwrap().ln();
        let rhs = oracle.exact_log_z_mrf(&reduced).unwrap();
        assert!(
            ((lhs - rhs).exp() - 1.0).abs() <= 1e-8,
            "seed {seed}: lhs {lhs} rhs {rhs}"
        );
    }
}

#[test]
fn conditioning_matches_brute_force_conditional() {
    // path 0-1-2: pinning node 0 must reproduce P(X_2 = x | X_0 = a)
    let oracle = Oracle::default();
    let g = Graph::path(3);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let k = 2;
        let m = random_mrf(&mut rng, &g, k, 0.6, 1.6);
        for a in 0..k {
            let conditioned = m.condition_on(&[(0, a)]).unwrap();
            for x in 0..k {
                // brute-force conditional from the joint over all assignments
                let mut joint = 0.0;
                let mut mass = 0.0;
                for x1 in 0..k {
                    for x2 in 0..k {
                        let w = m.phi(0)[a]
                            * m.phi(1)[x1]
                            * m.phi(2)[x2]
                            * m.f_between(0, a, 1, x1)
                            * m.f_between(1, x1, 2, x2);
                        mass += w;
                        if x2 == x {
                            joint += w;
                        }
                    }
                }
                let expected = joint / mass;
                let got = oracle
                    .exact_marginal_mrf(&conditioned, shifted_index(2, 0), x)
                    .unwrap();
                assert!(
                    (got - expected).abs() <= 1e-9,
                    "seed {seed} a={a} x={x}: {got} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn conditioning_on_many_pins_matches_nested_pins() {
    let oracle = Oracle::default();
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let g = random_graph(&mut rng, 5, 0.5);
        let m = random_mrf(&mut rng, &g, 2, 0.7, 1.4);
        let batch = m.condition_on(&[(1, 0), (3, 1)]).unwrap();
        let nested = m
            .condition_on(&[(1, 0)])
            .unwrap()
            .condition_on(&[(shifted_index(3, 1), 1)])
            .unwrap();
        assert_eq!(batch, nested, "seed {seed}");
        let _ = oracle; // silence when the loop body changes
    }
}

#[test]
fn oracle_marginals_respect_potential_ratio_bounds() {
    // c_f^{-deg(v)} phi_v(x)/sum phi_v <= P(X_v = x) <= c_f^{deg(v)} ...
    let oracle = Oracle::default();
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let n = 2 + (seed as usize) % 4;
        let g = random_graph(&mut rng, n, 0.5);
        let m = random_mrf(&mut rng, &g, 3, 0.5, 2.0);
        let c_f = m.c_f();
        for v in 0..n {
            let total: f64 = m.phi(v).iter().sum();
            let spread = c_f.powi(m.graph().degree(v) as i32);
            for x in 0..3 {
                let p = oracle.exact_marginal_mrf(&m, v, x).unwrap();
                let ratio = m.phi(v)[x] / total;
                assert!(p >= ratio / spread - 1e-9, "seed {seed} v={v} x={x}");
                assert!(p <= ratio * spread + 1e-9, "seed {seed} v={v} x={x}");
            }
        }
    }
}

/// Walks the conditioned sub-instances the recursion visits and checks that
/// every truncated-marginal vector respects the potential-ratio bounds of its
/// own sub-instance.
#[test]
fn truncated_marginals_respect_ratio_bounds_at_every_tree_node() {
    fn walk(current: &MrfInstance, neighbors: &[usize], depth_budget: usize, checked: &mut usize) {
        let Some((&first, rest)) = neighbors.split_first() else {
            return;
        };
        let c_f = current.c_f();
        for d in 1..=depth_budget {
            let estimates = phi_mrf_vector(current, first, d).unwrap();
            let total: f64 = current.phi(first).iter().sum();
            let spread = c_f.powi(current.graph().degree(first) as i32);
            for (x, &e) in estimates.iter().enumerate() {
                let ratio = current.phi(first)[x] / total;
                assert!(e >= ratio / spread - 1e-12 && e <= ratio * spread + 1e-12);
                *checked += 1;
            }
        }
        for y in 0..current.alphabet() {
            let conditioned = current.condition_on(&[(first, y)]).unwrap();
            let rest_idx: Vec<usize> = rest.iter().map(|&u| shifted_index(u, first)).collect();
            walk(&conditioned, &rest_idx, depth_budget, checked);
        }
    }

    let mut checked = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let g = random_graph(&mut rng, 4, 0.6);
        let m = random_mrf(&mut rng, &g, 2, 0.8, 1.3);
        for v in 0..4 {
            if m.graph().degree(v) == 0 {
                continue;
            }
            let deleted = m.remove_node_plain(v).unwrap();
            let neighbor_idx: Vec<usize> = m
                .graph()
                .neighbors(v)
                .iter()
                .map(|&u| shifted_index(u, v))
                .collect();
            walk(&deleted, &neighbor_idx, 2, &mut checked);
        }
    }
    assert!(checked > 200, "only {checked} bound checks ran");
}

#[test]
fn truncation_error_below_decay_bound_on_potts_chain() {
    let oracle = Oracle::default();
    let g = Graph::path(4);
    let m = potts(&g, &PottsParams::new(2, 0.03).unwrap());
    let report = gamma_condition(&m);
    assert!(report.passes);
    for d in 1..=4 {
        let mut worst = 0.0_f64;
        for v in 0..4 {
            for x in 0..2 {
                let exact = oracle.exact_marginal_mrf(&m, v, x).unwrap();
                let estimate = phi_mrf(&m, v, x, d).unwrap();
                worst = worst.max((exact.ln() - estimate.ln()).abs());
            }
        }
        let bound = mrf_error_bound(
            report.c_f,
            m.c_phi(),
            report.delta_max,
            m.alphabet(),
            report.gamma,
            d,
        );
        assert!(worst <= bound, "depth {d}: {worst} > {bound}");
    }
}

#[test]
fn stabilized_depth_matches_oracle() {
    // once every step estimate agrees to 1e-12 across successive depths, the
    // count must sit within 1e-6 relative of the exact value
    let oracle = Oracle::default();
    let g = Graph::cycle(5);
    let m = potts(&g, &PottsParams::new(2, 0.03).unwrap());
    assert!(gamma_condition(&m).passes);
    let mut d = 1;
    let result = loop {
        let now = compute_z(&m, d).unwrap();
        let next = compute_z(&m, d + 1).unwrap();
        let stable = now
            .steps
            .iter()
            .zip(&next.steps)
            .all(|(a, b)| (a.p_hat - b.p_hat).abs() < 1e-12);
        if stable {
            break next;
        }
        d += 1;
        assert!(d < 30, "no stabilization");
    };
    let exact = oracle.exact_log_z_mrf(&m).unwrap();
    let rel = ((result.log_z_hat - exact).exp() - 1.0).abs();
    assert!(rel <= 1e-6, "stabilized at depth {d} but off by {rel}");
}

#[test]
fn indicator_encoding_counts_tiny_cases() {
    let oracle = Oracle::default();
    let g = Graph::from_edges(1, &[]).unwrap();
    let inst = ColoringInstance::new(g, 5, vec![vec![2, 5]]).unwrap();
    assert_eq!(oracle.exact_z_mrf(&coloring_to_mrf(&inst)).unwrap(), 2.0);

    for seed in 0..25u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1100 + seed);
        let n = 2 + (seed as usize) % 5;
        let q = 3 + (seed as usize) % 3;
        let g = random_graph(&mut rng, n, 0.4);
        let lists: Vec<Vec<usize>> = (0..n)
            .map(|_| (1..=q).filter(|_| rng.gen_bool(0.75)).collect())
            .collect();
        let inst = ColoringInstance::new(g, q, lists).unwrap();
        let z = oracle.exact_z_coloring(&inst).unwrap().to_f64().unwrap();
        assert_eq!(
            oracle.exact_z_mrf(&coloring_to_mrf(&inst)).unwrap(),
            z,
            "seed {seed}"
        );
    }
}
