//! Small max-profit flow by successive longest augmenting paths.

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    cap: u32,
    profit: f64,
}

#[derive(Debug, Default)]
pub(crate) struct FlowNet {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    dist: Vec<f64>,
    pred: Vec<usize>,
    in_queue: Vec<bool>,
    queue: std::collections::VecDeque<usize>,
}

const NO_EDGE: usize = usize::MAX;

impl FlowNet {
    pub(crate) fn reset(&mut self, n_nodes: usize) {
        self.edges.clear();
        self.adj.iter_mut().for_each(Vec::clear);
        self.adj.resize_with(n_nodes.max(self.adj.len()), Vec::new);
        self.adj.truncate(n_nodes);
    }

    pub(crate) fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: u32, profit: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, profit });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0, profit: -profit });
    }

    /// Largest total profit of any `s`-`t` flow (of any value).
    pub(crate) fn max_profit(&mut self, s: usize, t: usize) -> f64 {
        let n = self.adj.len();
        let mut total = 0.0;
        loop {
            self.dist.clear();
            self.dist.resize(n, f64::NEG_INFINITY);
            self.pred.clear();
            self.pred.resize(n, NO_EDGE);
            self.in_queue.clear();
            self.in_queue.resize(n, false);
            self.dist[s] = 0.0;
            self.queue.clear();
            self.queue.push_back(s);
            let mut pops = 0usize;
            while let Some(u) = self.queue.pop_front() {
                self.in_queue[u] = false;
                pops += 1;
                if pops > n * n + n {
                    break;
                }
                for &e in &self.adj[u] {
                    let Edge { to, cap, profit } = self.edges[e];
                    if cap == 0 {
                        continue;
                    }
                    let d = self.dist[u] + profit;
                    if d > self.dist[to] + 1e-12 * d.abs() {
                        self.dist[to] = d;
                        self.pred[to] = e;
                        if !self.in_queue[to] {
                            self.in_queue[to] = true;
                            self.queue.push_back(to);
                        }
                    }
                }
            }
            if !(self.dist[t] > 0.0) {
                return total;
            }
            let mut push = u32::MAX;
            let mut v = t;
            let mut hops = 0;
            while v != s {
                let e = self.pred[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
                hops += 1;
                if hops > n {
                    return total;
                }
            }
            let mut v = t;
            while v != s {
                let e = self.pred[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            total += push as f64 * self.dist[t];
        }
    }
}
