//! Simple undirected graphs with sorted adjacency lists.

use thiserror::Error;

/// Structural defects detected by [`Graph::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("adjacency not symmetric: {0} lists {1} but not vice versa")]
    AsymmetricAdjacency(usize, usize),
    #[error("triangle found on nodes ({0}, {1}, {2})")]
    TriangleFound(usize, usize, usize),
    #[error("node {0} out of range (node count {1})")]
    NodeOutOfRange(usize, usize),
}

/// An undirected simple graph on nodes `0..node_count`.
///
/// Every adjacency list is kept in strictly ascending order, which makes
/// neighbor ranks, edge iteration, and canonical serialization deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicate
    /// edges, and out-of-range endpoints.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            if u >= node_count {
                return Err(GraphError::NodeOutOfRange(u, node_count));
            }
            if v >= node_count {
                return Err(GraphError::NodeOutOfRange(v, node_count));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adj[u].contains(&v) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { adj })
    }

    /// Wraps a raw adjacency structure without any checking.
    ///
    /// Intended for tests that exercise [`Graph::validate`] on broken inputs.
    pub fn from_adjacency_unchecked(adj: Vec<Vec<usize>>) -> Self {
        Graph { adj }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Maximum degree over all nodes; 0 for the empty graph.
    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(|l| l.len()).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// All edges as `(u, v)` pairs with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Checks simplicity (no self-loops, no duplicates), symmetry, and
    /// triangle-freeness, reporting the offending nodes on failure.
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.node_count();
        for (u, list) in self.adj.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &v in list {
                if v >= n {
                    return Err(GraphError::NodeOutOfRange(v, n));
                }
                if v == u {
                    return Err(GraphError::SelfLoop(u));
                }
                if prev == Some(v) {
                    return Err(GraphError::DuplicateEdge(u, v));
                }
                // Unsorted lists are treated as duplicates of the canonical form.
                if let Some(p) = prev {
                    if v < p {
                        return Err(GraphError::DuplicateEdge(u, v));
                    }
                }
                if self.adj[v].binary_search(&u).is_err() {
                    return Err(GraphError::AsymmetricAdjacency(u, v));
                }
                prev = Some(v);
            }
        }
        // Triangle scan: for each edge (u, v) intersect the sorted lists.
        for (u, v) in self.edges() {
            let (mut i, mut j) = (0, 0);
            let (a, b) = (&self.adj[u], &self.adj[v]);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        return Err(GraphError::TriangleFound(u, v, a[i]));
                    }
                }
            }
        }
        Ok(())
    }

    /// The graph with node `v` deleted and the remaining nodes re-indexed
    /// compactly (every index above `v` shifts down by one).
    pub fn remove_node(&self, v: usize) -> Graph {
        let shift = |u: usize| if u > v { u - 1 } else { u };
        let adj = self
            .adj
            .iter()
            .enumerate()
            .filter(|&(u, _)| u != v)
            .map(|(_, list)| {
                list.iter()
                    .filter(|&&w| w != v)
                    .map(|&w| shift(w))
                    .collect()
            })
            .collect();
        Graph { adj }
    }

    /// Path on `n` nodes: edges (0,1), (1,2), ...
    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    /// Cycle on `n >= 3` nodes.
    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycle needs at least 3 nodes");
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((0, n - 1));
        Graph::from_edges(n, &edges).unwrap()
    }

    /// Star with center 0 and `n - 1` leaves.
    pub fn star(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }
}

/// New index of `u` after deleting node `removed` under compact re-indexing.
pub fn shifted_index(u: usize, removed: usize) -> usize {
    debug_assert_ne!(u, removed);
    if u > removed {
        u - 1
    } else {
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cycle_is_valid() {
        assert_eq!(Graph::cycle(4).validate(), Ok(()));
    }

    #[test]
    fn triangle_is_rejected() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.validate(), Err(GraphError::TriangleFound(0, 1, 2)));
    }

    #[test]
    fn path_of_three_is_valid() {
        assert_eq!(Graph::path(3).validate(), Ok(()));
    }

    #[test]
    fn self_loop_rejected_at_build_and_validate() {
        assert_eq!(
            Graph::from_edges(2, &[(1, 1)]),
            Err(GraphError::SelfLoop(1))
        );
        let g = Graph::from_adjacency_unchecked(vec![vec![0]]);
        assert_eq!(g.validate(), Err(GraphError::SelfLoop(0)));
    }

    #[test]
    fn asymmetric_adjacency_detected() {
        let g = Graph::from_adjacency_unchecked(vec![vec![1], vec![]]);
        assert_eq!(g.validate(), Err(GraphError::AsymmetricAdjacency(0, 1)));
    }

    #[test]
    fn duplicate_edge_detected() {
        assert_eq!(
            Graph::from_edges(2, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(1, 0))
        );
        let g = Graph::from_adjacency_unchecked(vec![vec![1, 1], vec![0, 0]]);
        assert_eq!(g.validate(), Err(GraphError::DuplicateEdge(0, 1)));
    }

    #[test]
    fn remove_node_reindexes() {
        let g = Graph::path(4); // 0-1-2-3
        let h = g.remove_node(1);
        assert_eq!(h.node_count(), 3);
        // old nodes 0, 2, 3 -> new 0, 1, 2; only edge left is old (2,3).
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(1, 2)]);
        assert_eq!(h.degree(0), 0);
    }

    #[test]
    fn degree_bounds() {
        let g = Graph::star(5);
        assert_eq!(g.max_degree(), 4);
        assert!(g.max_degree() <= g.node_count() - 1);
        for v in 0..g.node_count() {
            assert!(g.degree(v) <= g.max_degree());
        }
    }
}
