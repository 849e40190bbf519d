//! List-coloring instances: a graph plus a color list per node.

use crate::graph::{shifted_index, Graph};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("node {0} is absent")]
    NodeAbsent(usize),
    #[error("neighbor rank {rank} out of range 1..={degree} for node {node}")]
    RankOutOfRange {
        node: usize,
        rank: usize,
        degree: usize,
    },
    #[error("color {0} outside universe 1..={1}")]
    ColorOutOfRange(usize, usize),
    #[error("list of node {0} is not strictly ascending")]
    ListNotSorted(usize),
    #[error("list count {0} does not match node count {1}")]
    ListCountMismatch(usize, usize),
}

/// Greedy list coloring got stuck: some node's list was exhausted by its
/// already-colored neighbors. Only possible when some list is not larger
/// than the node's degree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("greedy coloring stuck at node {0}: list exhausted")]
pub struct Stuck(pub usize);

/// A graph together with per-node color lists drawn from the universe `1..=q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringInstance {
    graph: Graph,
    q: usize,
    lists: Vec<Vec<usize>>,
}

impl ColoringInstance {
    /// Builds an instance, checking that each list is a strictly ascending
    /// subset of `1..=q` and that there is one list per node.
    pub fn new(graph: Graph, q: usize, lists: Vec<Vec<usize>>) -> Result<Self, InstanceError> {
        if lists.len() != graph.node_count() {
            return Err(InstanceError::ListCountMismatch(
                lists.len(),
                graph.node_count(),
            ));
        }
        for (v, list) in lists.iter().enumerate() {
            let mut prev = 0usize;
            for &c in list {
                if c < 1 || c > q {
                    return Err(InstanceError::ColorOutOfRange(c, q));
                }
                if c <= prev {
                    return Err(InstanceError::ListNotSorted(v));
                }
                prev = c;
            }
        }
        Ok(ColoringInstance { graph, q, lists })
    }

    /// Every node gets the full universe `{1..=q}`.
    pub fn full_lists(graph: Graph, q: usize) -> Self {
        let n = graph.node_count();
        let full: Vec<usize> = (1..=q).collect();
        ColoringInstance {
            graph,
            q,
            lists: vec![full; n],
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn list(&self, v: usize) -> &[usize] {
        &self.lists[v]
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.lists
    }

    /// Size of the largest list.
    pub fn max_list_len(&self) -> usize {
        self.lists.iter().map(|l| l.len()).max().unwrap_or(0)
    }

    /// Instance size: `max(|V|, |E|, q)`.
    pub fn size(&self) -> usize {
        self.graph
            .node_count()
            .max(self.graph.edge_count())
            .max(self.q)
    }

    pub fn has_color(&self, v: usize, i: usize) -> bool {
        self.lists[v].binary_search(&i).is_ok()
    }

    /// Greedy list coloring: nodes in ascending index order, each taking the
    /// smallest list color unused by already-colored neighbors. Succeeds
    /// whenever every list is larger than the node's degree.
    pub fn greedy_coloring(&self) -> Result<Vec<usize>, Stuck> {
        let n = self.node_count();
        let mut colors = vec![0usize; n];
        for v in 0..n {
            let taken: Vec<usize> = self
                .graph
                .neighbors(v)
                .iter()
                .filter(|&&u| u < v)
                .map(|&u| colors[u])
                .collect();
            match self.lists[v].iter().find(|c| !taken.contains(c)) {
                Some(&c) => colors[v] = c,
                None => return Err(Stuck(v)),
            }
        }
        Ok(colors)
    }

    /// True if `colors` is a proper list coloring of this instance.
    pub fn is_proper(&self, colors: &[usize]) -> bool {
        colors.len() == self.node_count()
            && (0..self.node_count()).all(|v| self.has_color(v, colors[v]))
            && self.graph.edges().all(|(u, v)| colors[u] != colors[v])
    }

    /// The reduced pair for node `v`, neighbor rank `k` (1-based, neighbors
    /// ranked by ascending index), and color `i`: node `v` is deleted and
    /// color `i` is struck from the lists of neighbors of rank below `k`.
    pub fn reduced_pair(
        &self,
        v: usize,
        k: usize,
        i: usize,
    ) -> Result<ColoringInstance, InstanceError> {
        if v >= self.node_count() {
            return Err(InstanceError::NodeAbsent(v));
        }
        let degree = self.graph.degree(v);
        if k < 1 || k > degree {
            return Err(InstanceError::RankOutOfRange {
                node: v,
                rank: k,
                degree,
            });
        }
        let early: &[usize] = &self.graph.neighbors(v)[..k - 1];
        let lists = self
            .lists
            .iter()
            .enumerate()
            .filter(|&(u, _)| u != v)
            .map(|(u, list)| {
                if early.contains(&u) {
                    list.iter().copied().filter(|&c| c != i).collect()
                } else {
                    list.clone()
                }
            })
            .collect();
        Ok(ColoringInstance {
            graph: self.graph.remove_node(v),
            q: self.q,
            lists,
        })
    }

    /// Deletes node `v`, leaving all other lists intact.
    pub fn remove_node(&self, v: usize) -> ColoringInstance {
        let lists = self
            .lists
            .iter()
            .enumerate()
            .filter(|&(u, _)| u != v)
            .map(|(_, l)| l.clone())
            .collect();
        ColoringInstance {
            graph: self.graph.remove_node(v),
            q: self.q,
            lists,
        }
    }

    /// One elimination step: delete `v` and strike color `i` from the lists
    /// of its neighbors.
    pub fn strike_and_remove(&self, v: usize, i: usize) -> ColoringInstance {
        let neighbors = self.graph.neighbors(v);
        let lists = self
            .lists
            .iter()
            .enumerate()
            .filter(|&(u, _)| u != v)
            .map(|(u, list)| {
                if neighbors.contains(&u) {
                    list.iter().copied().filter(|&c| c != i).collect()
                } else {
                    list.clone()
                }
            })
            .collect();
        ColoringInstance {
            graph: self.graph.remove_node(v),
            q: self.q,
            lists,
        }
    }

    /// Copy of the instance with the list of `v` replaced (used to pin a node
    /// to a single color when querying the oracle).
    pub fn with_list(&self, v: usize, list: Vec<usize>) -> ColoringInstance {
        let mut lists = self.lists.clone();
        lists[v] = list;
        ColoringInstance {
            graph: self.graph.clone(),
            q: self.q,
            lists,
        }
    }

    /// Canonical byte encoding (graph, universe, lists) used as a memo key.
    pub fn canonical_bytes(&self, extra: &[usize]) -> Vec<u8> {
        let mut out = Vec::with_capacity(64);
        let push = |out: &mut Vec<u8>, x: usize| out.extend_from_slice(&(x as u64).to_le_bytes());
        push(&mut out, self.node_count());
        push(&mut out, self.q);
        for v in 0..self.node_count() {
            let nbrs = self.graph.neighbors(v);
            push(&mut out, nbrs.len());
            for &u in nbrs {
                push(&mut out, u);
            }
            push(&mut out, self.lists[v].len());
            for &c in &self.lists[v] {
                push(&mut out, c);
            }
        }
        for &x in extra {
            push(&mut out, x);
        }
        out
    }
}

/// New position of node `u` after `removed` has been deleted.
pub fn node_after_removal(u: usize, removed: usize) -> usize {
    shifted_index(u, removed)
}
