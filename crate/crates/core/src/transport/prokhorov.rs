//! Prokhorov distance through Strassen's coupling characterization, and the Ky Fan metric.
//!
//! `g(eps) = min_pi pi{d > eps} = 1 - maxflow(eps)` is a nonincreasing step function
//! jumping only at pairwise distances, so the infimum of `{eps : g(eps) <= eps}` is
//! found exactly from the breakpoints.

use crate::error::Result;
use crate::space::{FiniteMmSpace, ProbWeights};

const FLOW_EPS: f64 = 1e-15;
const EXCESS_FLOOR: f64 = 1e-13;

struct Edge {
    to: usize,
    cap: f64,
}

/// Dinic max-flow with floating capacities.
pub(crate) struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
        }
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0.0 });
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<i32>> {
        let mut level = vec![-1; self.adj.len()];
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &e in &self.adj[x] {
                let edge = &self.edges[e];
                if edge.cap > FLOW_EPS && level[edge.to] < 0 {
                    level[edge.to] = level[x] + 1;
                    queue.push_back(edge.to);
                }
            }
        }
        (level[t] >= 0).then_some(level)
    }

    fn push(&mut self, x: usize, t: usize, limit: f64, level: &[i32], next: &mut [usize]) -> f64 {
        if x == t {
            return limit;
        }
        while next[x] < self.adj[x].len() {
            let e = self.adj[x][next[x]];
            let (to, cap) = (self.edges[e].to, self.edges[e].cap);
            if cap > FLOW_EPS && level[to] == level[x] + 1 {
                let pushed = self.push(to, t, limit.min(cap), level, next);
                if pushed > 0.0 {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[x] += 1;
        }
        0.0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0; self.adj.len()];
            loop {
                let f = self.push(s, t, f64::INFINITY, &level, &mut next);
                if !(f > FLOW_EPS) {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// `min_pi pi{(x, y) : d(x, y) > eps}` over couplings of `mu` and `nu`.
pub fn strassen_excess(space: &FiniteMmSpace, mu: &ProbWeights, nu: &ProbWeights, eps: f64) -> f64 {
    let (sa, sb) = (mu.support(), nu.support());
    let (na, nb) = (sa.len(), sb.len());
    let (source, sink) = (na + nb, na + nb + 1);
    let mut net = FlowNetwork::new(na + nb + 2);
    for (a, &i) in sa.iter().enumerate() {
        net.add_edge(source, a, mu[i]);
        for (b, &j) in sb.iter().enumerate() {
            if space.d(i, j) <= eps {
                net.add_edge(a, na + b, mu[i]);
            }
        }
    }
    for (b, &j) in sb.iter().enumerate() {
        net.add_edge(na + b, sink, nu[j]);
    }
    let excess = 1.0 - net.max_flow(source, sink);
    // rounding residue of the flow is not mass
    if excess < EXCESS_FLOOR {
        0.0
    } else {
        excess
    }
}

/// `min_j max(d_j, g_j)` for a step function `g` that is constant on
/// `[d_j, d_{j+1})`, nonincreasing, with `d` strictly increasing from 0;
/// located by binary search on the monotone predicate `g_j <= d_j`.
fn step_infimum(breaks: &[f64], mut g: impl FnMut(usize) -> f64) -> f64 {
    let last = breaks.len() - 1;
    let g_last = g(last);
    if g_last > breaks[last] {
        return g_last.min(1.0);
    }
    let (mut lo, mut hi) = (0usize, last);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if g(mid) <= breaks[mid] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let before = if hi > 0 { g(hi - 1) } else { f64::INFINITY };
    breaks[hi].min(before).min(1.0)
}

fn sorted_breaks(mut values: Vec<f64>) -> Vec<f64> {
    values.push(0.0);
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

/// Exact Prokhorov distance between two measures on a common finite space.
pub fn prokhorov(space: &FiniteMmSpace, mu: &ProbWeights, nu: &ProbWeights) -> Result<f64> {
    crate::space::check_len(space, mu)?;
    crate::space::check_len(space, nu)?;
    let (sa, sb) = (mu.support(), nu.support());
    let mut ds = Vec::with_capacity(sa.len() * sb.len());
    for &i in &sa {
        for &j in &sb {
            ds.push(space.d(i, j));
        }
    }
    let breaks = sorted_breaks(ds);
    Ok(step_infimum(&breaks, |j| strassen_excess(space, mu, nu, breaks[j])))
}

/// `2 d_P(mu, nu)`, an upper bound for the box distance between `(X, mu)` and `(X, nu)`.
pub fn box_upper_bound_common_space(space: &FiniteMmSpace, mu: &ProbWeights, nu: &ProbWeights) -> Result<f64> {
    Ok(2.0 * prokhorov(space, mu, nu)?)
}

/// Ky Fan distance `inf{eps : mu{|f - g| > eps} <= eps}`.
pub fn ky_fan(weights: &ProbWeights, f: &[f64], g: &[f64]) -> Result<f64> {
    let n = weights.len();
    for v in [f, g] {
        if v.len() != n {
            return Err(crate::Error::LengthMismatch { expected: n, got: v.len() });
        }
    }
    let gaps: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a - b).abs()).collect();
    let breaks = sorted_breaks(gaps.clone());
    let tail = |j: usize| -> f64 {
        gaps.iter()
            .zip(weights.as_slice())
            .filter(|(d, _)| **d > breaks[j])
            .map(|(_, w)| w)
            .sum()
    };
    Ok(step_infimum(&breaks, tail))
}
