//! Deterministic fixture generation. Counting itself is randomness-free;
//! everything here is driven by an explicit 64-bit seed.

use crate::graph::Graph;
use crate::instance::ColoringInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("infeasible generator parameters: {0}")]
pub struct InfeasibleParams(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Path,
    Cycle,
    Star,
    RandomTriangleFree,
}

impl std::str::FromStr for GraphKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "path" => Ok(GraphKind::Path),
            "cycle" => Ok(GraphKind::Cycle),
            "star" => Ok(GraphKind::Star),
            "random-triangle-free" => Ok(GraphKind::RandomTriangleFree),
            other => Err(format!(
                "unknown kind `{other}` (path, cycle, star, random-triangle-free)"
            )),
        }
    }
}

/// Builds a triangle-free graph of the requested shape. `max_degree` and
/// `seed` only matter for the random kind.
pub fn generate_graph(
    kind: GraphKind,
    nodes: usize,
    max_degree: usize,
    seed: u64,
) -> Result<Graph, InfeasibleParams> {
    if nodes == 0 {
        return Err(InfeasibleParams("need at least one node".into()));
    }
    let g = match kind {
        GraphKind::Path => Graph::path(nodes),
        GraphKind::Cycle => {
            if nodes < 4 {
                return Err(InfeasibleParams(
                    "cycles below 4 nodes are not triangle-free".into(),
                ));
            }
            Graph::cycle(nodes)
        }
        GraphKind::Star => Graph::star(nodes),
        GraphKind::RandomTriangleFree => random_triangle_free(nodes, max_degree, seed),
    };
    debug_assert_eq!(g.validate(), Ok(()));
    Ok(g)
}

/// Shuffles all candidate edges and adds each one whose endpoints still have
/// spare degree and share no neighbor.
fn random_triangle_free(nodes: usize, max_degree: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<(usize, usize)> = (0..nodes)
        .flat_map(|u| ((u + 1)..nodes).map(move |v| (u, v)))
        .collect();
    for i in (1..candidates.len()).rev() {
        candidates.swap(i, rng.gen_range(0..=i));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut edges = Vec::new();
    for (u, v) in candidates {
        if adj[u].len() >= max_degree || adj[v].len() >= max_degree {
            continue;
        }
        if adj[u].iter().any(|w| adj[v].contains(w)) {
            continue;
        }
        adj[u].push(v);
        adj[v].push(u);
        edges.push((u, v));
    }
    Graph::from_edges(nodes, &edges).expect("construction filters defects")
}

/// Builds a coloring instance whose lists satisfy
/// `|L(v)| >= ceil(alpha * deg(v) + beta)`. The deterministic shapes get full
/// universes; the random kind draws a random list of exactly the required
/// size per node.
pub fn generate_instance(
    kind: GraphKind,
    nodes: usize,
    max_degree: usize,
    q: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> Result<ColoringInstance, InfeasibleParams> {
    let graph = generate_graph(kind, nodes, max_degree, seed)?;
    let required: Vec<usize> = (0..nodes)
        .map(|v| (alpha * graph.degree(v) as f64 + beta).ceil() as usize)
        .collect();
    if let Some(v) = (0..nodes).find(|&v| required[v] > q) {
        return Err(InfeasibleParams(format!(
            "node {v} needs a list of {} colors but the universe has only {q}",
            required[v]
        )));
    }
    let inst = match kind {
        GraphKind::RandomTriangleFree => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let lists: Vec<Vec<usize>> = (0..nodes)
                .map(|v| {
                    let mut pool: Vec<usize> = (1..=q).collect();
                    for i in (1..pool.len()).rev() {
                        pool.swap(i, rng.gen_range(0..=i));
                    }
                    let mut list: Vec<usize> = pool.into_iter().take(required[v]).collect();
                    list.sort_unstable();
                    list
                })
                .collect();
            ColoringInstance::new(graph, q, lists).expect("generated lists are valid")
        }
        _ => ColoringInstance::full_lists(graph, q),
    };
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::check_list_condition;

    #[test]
    fn deterministic_shapes() {
        let c = generate_graph(GraphKind::Cycle, 4, 0, 0).unwrap();
        assert_eq!(c.edge_count(), 4);
        assert!(generate_graph(GraphKind::Cycle, 3, 0, 0).is_err());
        let s = generate_graph(GraphKind::Star, 6, 0, 0).unwrap();
        assert_eq!(s.max_degree(), 5);
    }

    #[test]
    fn random_graphs_are_triangle_free_and_seeded() {
        for seed in 0..20 {
            let g = random_triangle_free(12, 3, seed);
            assert_eq!(g.validate(), Ok(()));
            assert!(g.max_degree() <= 3);
        }
        let a = random_triangle_free(10, 3, 42);
        let b = random_triangle_free(10, 3, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn generated_instances_pass_the_list_condition() {
        let inst =
            generate_instance(GraphKind::RandomTriangleFree, 8, 2, 26, 3.0, 20.0, 9).unwrap();
        let report = check_list_condition(&inst, 3.0, 20.0);
        assert!(report.list_size_ok && report.beta_ok);
    }

    #[test]
    fn infeasible_universe_is_rejected() {
        let err = generate_instance(GraphKind::Cycle, 4, 2, 10, 3.0, 20.0, 0);
        assert!(err.is_err());
    }

    #[test]
    fn generation_is_reproducible() {
        let a = generate_instance(GraphKind::RandomTriangleFree, 9, 2, 26, 3.0, 20.0, 7).unwrap();
        let b = generate_instance(GraphKind::RandomTriangleFree, 9, 2, 26, 3.0, 20.0, 7).unwrap();
        assert_eq!(a, b);
    }
}
