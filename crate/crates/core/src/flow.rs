//! Integral maximum flow (Edmonds-Karp) for the small assignment graphs the
//! solver builds.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: u32,
}

#[derive(Clone, Debug)]
pub struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        FlowGraph {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds `from -> to` and returns its edge handle.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: u32) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap });
        self.edges.push(Edge { to: from, cap: 0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently routed through the edge `handle`.
    pub fn flow(&self, handle: usize) -> u32 {
        self.edges[handle ^ 1].cap
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> u32 {
        let mut total = 0;
        let n = self.adj.len();
        loop {
            let mut via = vec![usize::MAX; n];
            let mut queue = VecDeque::from([source]);
            let mut reached = false;
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let Edge { to, cap } = self.edges[e];
                    if cap > 0 && to != source && via[to] == usize::MAX {
                        via[to] = e;
                        if to == sink {
                            reached = true;
                            break;
                        }
                        queue.push_back(to);
                    }
                }
                if reached {
                    break;
                }
            }
            if !reached {
                return total;
            }
            let mut push = u32::MAX;
            let mut v = sink;
            while v != source {
                let e = via[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = via[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            total += push;
        }
    }
}
