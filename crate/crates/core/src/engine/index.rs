use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::edge_weight_unchecked;
use crate::graph::{KnowledgeGraph, NodeRef};

/// Compressed adjacency of a graph with edge lengths precomputed for one
/// decay constant.
#[derive(Debug)]
pub struct WeightedIndex<'g> {
    nodes: Vec<&'g NodeRef>,
    ids: HashMap<&'g NodeRef, usize>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

/// Single-source distances and the predecessor tree that realizes them.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    pub pred: Vec<Option<usize>>,
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost; ties by node index for a deterministic pop order.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'g> WeightedIndex<'g> {
    pub fn new(g: &'g KnowledgeGraph, decay: f64) -> Self {
        let nodes: Vec<&NodeRef> = g.nodes().map(|(n, _)| n).collect();
        let ids: HashMap<&NodeRef, usize> =
            nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut offsets = vec![0usize; nodes.len() + 1];
        let mut targets = Vec::with_capacity(g.edge_count());
        let mut weights = Vec::with_capacity(g.edge_count());
        // Edges iterate in (src, dst) order, the same order as `nodes`, so
        // every source's edges are contiguous.
        for (src, dst, count) in g.edges() {
            offsets[ids[src] + 1] += 1;
            targets.push(ids[dst]);
            weights.push(edge_weight_unchecked(count, decay));
        }
        for i in 0..nodes.len() {
            offsets[i + 1] += offsets[i];
        }
        WeightedIndex {
            nodes,
            ids,
            offsets,
            targets,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn id(&self, node: &NodeRef) -> Option<usize> {
        self.ids.get(node).copied()
    }

    pub fn node(&self, id: usize) -> &'g NodeRef {
        self.nodes[id]
    }

    pub fn out_edges(&self, id: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[id]..self.offsets[id + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Dijkstra from `source` over positive edge lengths.
    pub fn shortest_paths(&self, source: usize) -> ShortestPaths {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(State {
            cost: 0.0,
            node: source,
        });
        while let Some(State { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for (next, w) in self.out_edges(node) {
                let next_cost = cost + w;
                if next_cost < dist[next] {
                    dist[next] = next_cost;
                    pred[next] = Some(node);
                    heap.push(State {
                        cost: next_cost,
                        node: next,
                    });
                }
            }
        }
        ShortestPaths { source, dist, pred }
    }
}

impl ShortestPaths {
    /// Node ids from the source to `target`, inclusive, if reachable.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = vec![target];
        let mut cur = target;
        while cur != self.source {
            cur = self.pred[cur]?;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}
