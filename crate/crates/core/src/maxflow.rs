//! Dinic's maximum-flow algorithm on real capacities.
//!
//! Arcs are stored in pairs so that `e ^ 1` is the residual partner of `e`.
//! Infinite capacities are allowed as long as every source–sink path has a
//! finite arc.

use alloc::{collections::VecDeque, vec, vec::Vec};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Default)]
pub struct FlowGraph {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        FlowGraph {
            head: vec![NONE; nodes],
            ..Default::default()
        }
    }

    pub fn node_count(&self) -> usize {
        self.head.len()
    }

    fn push_arc(&mut self, from: usize, to: usize, cap: f64) {
        self.to.push(to);
        self.cap.push(cap);
        self.next.push(self.head[from]);
        self.head[from] = self.to.len() - 1;
    }

    /// Adds `from → to` with capacity `cap` and `to → from` with `rev_cap`.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64, rev_cap: f64) {
        debug_assert!(cap >= 0.0 && rev_cap >= 0.0);
        self.push_arc(from, to, cap);
        self.push_arc(to, from, rev_cap);
    }

    fn tolerance(&self) -> f64 {
        let scale = self
            .cap
            .iter()
            .filter(|c| c.is_finite())
            .fold(0.0_f64, |m, c| m.max(*c));
        1e-14 * scale
    }

    fn levels(&self, s: usize, eps: f64) -> Vec<usize> {
        let mut level = vec![NONE; self.head.len()];
        let mut queue = VecDeque::new();
        level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let mut e = self.head[u];
            while e != NONE {
                let v = self.to[e];
                if self.cap[e] > eps && level[v] == NONE {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
                e = self.next[e];
            }
        }
        level
    }

    /// Blocking flow on the level graph with an explicit path stack.
    fn blocking_flow(&mut self, s: usize, t: usize, level: &mut [usize], eps: f64) -> f64 {
        let mut iter = self.head.clone();
        let mut path: Vec<usize> = Vec::new();
        let mut total = 0.0;
        let mut u = s;
        loop {
            if u == t {
                let f = path.iter().map(|&e| self.cap[e]).fold(f64::INFINITY, f64::min);
                for &e in &path {
                    self.cap[e] -= f;
                    self.cap[e ^ 1] += f;
                }
                total += f;
                let k = path.iter().position(|&e| self.cap[e] <= eps).unwrap_or(0);
                path.truncate(k);
                u = path.last().map_or(s, |&e| self.to[e]);
                continue;
            }
            let mut advanced = false;
            while iter[u] != NONE {
                let e = iter[u];
                let v = self.to[e];
                if self.cap[e] > eps && level[v] != NONE && level[v] == level[u] + 1 {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                iter[u] = self.next[e];
            }
            if advanced {
                continue;
            }
            if u == s {
                return total;
            }
            level[u] = NONE;
            let e = path.pop().expect("non-source node has an incoming path arc");
            u = self.to[e ^ 1];
            iter[u] = self.next[iter[u]];
        }
    }

    /// Maximum flow from `s` to `t`. Capacities are left in residual form.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let eps = self.tolerance();
        let mut flow = 0.0;
        loop {
            let mut level = self.levels(s, eps);
            if level[t] == NONE {
                return flow;
            }
            flow += self.blocking_flow(s, t, &mut level, eps);
        }
    }

    /// Nodes reachable from `s` in the residual graph, the source side of
    /// the minimal minimum cut after [`FlowGraph::max_flow`].
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let eps = self.tolerance();
        self.levels(s, eps).into_iter().map(|l| l != NONE).collect()
    }
}
