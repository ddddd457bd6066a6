//! Deterministic Dijkstra over nonnegative arc lengths.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path tree from one source.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub source: usize,
    pub dist: Vec<f64>,
    pub pred_arc: Vec<Option<usize>>,
}

impl ShortestPathTree {
    /// Arc indices of the tree path from the source to `target`, in order.
    /// `None` when `target` is unreachable.
    pub fn path_to(&self, arcs: &[Arc], target: usize) -> Option<Vec<usize>> {
        if !self.dist[target].is_finite() {
            return None;
        }
        let mut path = Vec::new();
        let mut v = target;
        while v != self.source {
            let a = self.pred_arc[v]?;
            path.push(a);
            v = arcs[a].tail;
        }
        path.reverse();
        Some(path)
    }
}

/// Adjacency list: outgoing arc indices per node, in increasing index order.
pub fn out_arcs(n: usize, arcs: &[Arc]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for (i, a) in arcs.iter().enumerate() {
        out[a.tail].push(i);
    }
    out
}

/// Runs Dijkstra from `source`. `lengths` must be nonnegative. Among equally
/// short labels the predecessor arc with the lowest index is kept.
pub fn dijkstra(
    n: usize,
    arcs: &[Arc],
    out: &[Vec<usize>],
    lengths: &[f64],
    source: usize,
) -> ShortestPathTree {
    let mut dist = vec![f64::INFINITY; n];
    let mut pred_arc: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse(Entry {
        dist: 0.0,
        node: source,
    }));
    while let Some(Reverse(Entry { dist: d, node: u })) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        for &a in &out[u] {
            let v = arcs[a].head;
            if done[v] {
                continue;
            }
            let nd = d + lengths[a];
            if nd < dist[v] {
                dist[v] = nd;
                pred_arc[v] = Some(a);
                heap.push(Reverse(Entry { dist: nd, node: v }));
            } else if nd == dist[v] && pred_arc[v].is_some_and(|p| a < p) {
                pred_arc[v] = Some(a);
            }
        }
    }
    ShortestPathTree {
        source,
        dist,
        pred_arc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(tail: usize, head: usize) -> Arc {
        Arc {
            tail,
            head,
            cost: 1.0,
            capacity: 1.0,
        }
    }

    #[test]
    fn ties_prefer_lowest_arc_index() {
        let arcs = vec![arc(0, 1), arc(0, 2), arc(2, 3), arc(1, 3)];
        let out = out_arcs(4, &arcs);
        let t = dijkstra(4, &arcs, &out, &[1.0, 1.0, 1.0, 1.0], 0);
        assert_eq!(t.dist[3], 2.0);
        assert_eq!(t.pred_arc[3], Some(2));
        assert_eq!(t.path_to(&arcs, 3), Some(vec![1, 2]));
    }

    #[test]
    fn unreachable_nodes_have_no_path() {
        let arcs = vec![arc(0, 1)];
        let out = out_arcs(3, &arcs);
        let t = dijkstra(3, &arcs, &out, &[2.0], 0);
        assert!(t.path_to(&arcs, 2).is_none());
        assert_eq!(t.path_to(&arcs, 0), Some(vec![]));
    }
}
