//! Binary submodular subproblems solved by max-flow, and the two pruning
//! shortcuts built on them.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::GraphicalModel;
use crate::substitution::SubsetToOne;
use crate::verification::ReducedCosts;

/// A two-state model. State 0 of variable `k` stands for label `labels[k][0]`
/// of node `nodes[k]`, state 1 for `labels[k][1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryEnergy {
    pub nodes: Vec<usize>,
    pub labels: Vec<[usize; 2]>,
    pub unary: Vec<[f64; 2]>,
    /// `(a, b, [t00, t01, t10, t11])` over variable indices.
    pub edges: Vec<(usize, usize, [f64; 4])>,
    pub constant: f64,
}

impl BinaryEnergy {
    pub fn new(n: usize) -> Self {
        BinaryEnergy {
            nodes: (0..n).collect(),
            labels: vec![[0, 1]; n],
            unary: vec![[0.0; 2]; n],
            edges: Vec::new(),
            constant: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.unary.len()
    }

    pub fn energy(&self, s: &[usize]) -> f64 {
        let mut e = self.constant;
        for (k, u) in self.unary.iter().enumerate() {
            e += u[s[k]];
        }
        for &(a, b, t) in &self.edges {
            e += t[2 * s[a] + s[b]];
        }
        e
    }

    /// Edges whose table violates `t00 + t11 <= t01 + t10` beyond `tol`.
    pub fn non_submodular(&self, tol: f64) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, (_, _, t))| t[0] + t[3] > t[1] + t[2] + tol)
            .map(|(k, _)| k)
            .collect()
    }

    fn scale(&self) -> f64 {
        let mut s = self.constant.abs();
        for u in &self.unary {
            s = s.max(u[0].abs()).max(u[1].abs());
        }
        for (_, _, t) in &self.edges {
            for x in t {
                s = s.max(x.abs());
            }
        }
        s
    }
}

/// Restricts `g_bar` to labels `{y_v, x_v}` per node. Nodes with `x_v = y_v`,
/// and nodes where `x_v` is not movable, are fixed at `y_v` (immovable labels
/// are indistinguishable from `y_v` in `g_bar`).
pub fn restrict_to_move(r: &ReducedCosts, x: &[usize]) -> Result<BinaryEnergy> {
    let g = r.model();
    g.check_labeling(x)?;
    let y = r.substitution().test_labeling();
    let n = g.num_nodes();
    let mut var = vec![usize::MAX; n];
    let mut b = BinaryEnergy {
        nodes: Vec::new(),
        labels: Vec::new(),
        unary: Vec::new(),
        edges: Vec::new(),
        constant: 0.0,
    };
    for v in 0..n {
        if x[v] != y[v] && r.is_movable(v, x[v]) {
            var[v] = b.nodes.len();
            b.nodes.push(v);
            b.labels.push([y[v], x[v]]);
            b.unary.push([g.unary(v)[y[v]], g.unary(v)[x[v]]]);
        } else {
            b.constant += g.unary(v)[y[v]];
        }
    }
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        match (var[u] != usize::MAX, var[v] != usize::MAX) {
            (true, true) => {
                let (lu, lv) = (b.labels[var[u]], b.labels[var[v]]);
                let t = [
                    g.pair(e, lu[0], lv[0]),
                    g.pair(e, lu[0], lv[1]),
                    g.pair(e, lu[1], lv[0]),
                    g.pair(e, lu[1], lv[1]),
                ];
                b.edges.push((var[u], var[v], t));
            }
            (true, false) => {
                let k = var[u];
                let lu = b.labels[k];
                b.unary[k][0] += g.pair(e, lu[0], y[v]);
                b.unary[k][1] += g.pair(e, lu[1], y[v]);
            }
            (false, true) => {
                let k = var[v];
                let lv = b.labels[k];
                b.unary[k][0] += g.pair(e, y[u], lv[0]);
                b.unary[k][1] += g.pair(e, y[u], lv[1]);
            }
            (false, false) => b.constant += g.pair(e, y[u], y[v]),
        }
    }
    let bad = b.non_submodular(1e-9 * (1.0 + b.scale()));
    if !bad.is_empty() {
        return Err(Error::InvalidModel(format!(
            "restricted move has {} non-submodular edges",
            bad.len()
        )));
    }
    Ok(b)
}

/// Directed network with float capacities, solved by Dinic's algorithm.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    head: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
    eps: f64,
}

impl FlowNetwork {
    /// `n` nodes; capacities below `eps` count as saturated.
    pub fn new(n: usize, eps: f64) -> Self {
        FlowNetwork {
            n,
            head: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
            eps,
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, cap: f64) {
        debug_assert!(cap >= 0.0);
        self.adj[a].push(self.head.len());
        self.head.push(b);
        self.cap.push(cap);
        self.adj[b].push(self.head.len());
        self.head.push(a);
        self.cap.push(0.0);
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.n];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &a in &self.adj[v] {
                let w = self.head[a];
                if self.cap[a] > self.eps && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        level
    }

    fn augment(
        &mut self,
        v: usize,
        t: usize,
        limit: f64,
        level: &[usize],
        next: &mut [usize],
    ) -> f64 {
        if v == t {
            return limit;
        }
        while next[v] < self.adj[v].len() {
            let a = self.adj[v][next[v]];
            let w = self.head[a];
            if self.cap[a] > self.eps && level[w] == level[v] + 1 {
                let pushed = self.augment(w, t, limit.min(self.cap[a]), level, next);
                if pushed > 0.0 {
                    self.cap[a] -= pushed;
                    self.cap[a ^ 1] += pushed;
                    return pushed;
                }
            }
            next[v] += 1;
        }
        0.0
    }

    /// Maximum flow value from `s` to `t`. The residual network is kept.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return flow;
            }
            let mut next = vec![0; self.n];
            loop {
                let f = self.augment(s, t, f64::INFINITY, &level, &mut next);
                if f <= 0.0 {
                    break;
                }
                flow += f;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let level = self.levels(s);
        level.iter().map(|&l| l != usize::MAX).collect()
    }

    /// Nodes that can reach `t` in the residual network.
    pub fn sink_side(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[t] = true;
        let mut q = VecDeque::from([t]);
        while let Some(v) = q.pop_front() {
            for &a in &self.adj[v] {
                // residual arc w -> v is the reverse of the stored arc a
                let w = self.head[a];
                if !seen[w] && self.cap[a ^ 1] > self.eps {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        seen
    }
}

/// Minimum of a submodular binary energy and the states that occur in some
/// minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSupport {
    pub value: f64,
    /// `achievable[k][s]`: state `s` of variable `k` appears in a minimizer.
    pub achievable: Vec<[bool; 2]>,
    /// The minimizer with the smallest set of state-1 variables.
    pub minimal: Vec<usize>,
}

/// Solves `b` by max-flow and reads both extremal minimum cuts off the residual
/// network. Source side is state 0.
pub fn min_cut_support(b: &BinaryEnergy) -> CutSupport {
    let n = b.num_vars();
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2, 1e-9 * (1.0 + b.scale()));
    let mut t0: Vec<f64> = b.unary.iter().map(|u| u[0]).collect();
    let mut t1: Vec<f64> = b.unary.iter().map(|u| u[1]).collect();
    let mut constant = b.constant;
    for &(u, v, [a, bb, c, d]) in &b.edges {
        // t(a,b) = A + (C-A) x_u + (D-C) x_v + (B+C-A-D) (1-x_u) x_v
        constant += a;
        t1[u] += c - a;
        t1[v] += d - c;
        net.add_edge(u, v, (bb + c - a - d).max(0.0));
    }
    for k in 0..n {
        let m = t0[k].min(t1[k]);
        constant += m;
        t0[k] -= m;
        t1[k] -= m;
        if t1[k] > 0.0 {
            net.add_edge(s, k, t1[k]);
        }
        if t0[k] > 0.0 {
            net.add_edge(k, t, t0[k]);
        }
    }
    let flow = net.max_flow(s, t);
    let smin = net.source_side(s);
    let reach_t = net.sink_side(t);
    let achievable = (0..n).map(|k| [!reach_t[k], !smin[k]]).collect();
    let minimal = (0..n).map(|k| usize::from(!smin[k])).collect();
    CutSupport {
        value: flow + constant,
        achievable,
        minimal,
    }
}

/// Cut-based pruning with a labeling `x`: removes `x_v` from `Y_v` wherever
/// state `x_v` occurs in a minimizer of `g_bar` restricted to `{y_v, x_v}`.
/// Returns the number of labels removed.
pub fn pruning_cut(r: &ReducedCosts, sub: &mut SubsetToOne, x: &[usize]) -> Result<usize> {
    let b = restrict_to_move(r, x)?;
    let support = min_cut_support(&b);
    let mut removed = 0;
    for (k, &v) in b.nodes.iter().enumerate() {
        if support.achievable[k][1] && sub.keep(v, b.labels[k][1]) {
            removed += 1;
        }
    }
    Ok(removed)
}

/// Removes every `i` in `Y_u` with
/// `g_bar_u(i) + sum_v g_bar_uv(i, y_v) <= tol`, evaluated from `f` and the
/// current sets, until no such label remains. Returns the number removed.
pub fn single_node_prune(f: &GraphicalModel, sub: &mut SubsetToOne, tol: f64) -> Result<usize> {
    sub.check_model(f)?;
    let y = sub.test_labeling().clone();
    let n = f.num_nodes();
    let mut queued = vec![true; n];
    let mut work: VecDeque<usize> = (0..n).collect();
    let mut removed = 0;
    while let Some(u) = work.pop_front() {
        queued[u] = false;
        let candidates = sub.eliminated(u).to_vec();
        let mut changed = false;
        for i in candidates {
            let mut value = f.unary(u)[i] - f.unary(u)[y[u]];
            for inc in f.incidence(u) {
                let w = inc.other;
                // D(i) = min over immovable labels j of w of f(i, j) - f(y_u, j)
                let kw = f.num_labels(w);
                let d = (0..kw)
                    .filter(|&j| !sub.is_eliminated(w, j))
                    .map(|j| {
                        if inc.is_tail {
                            f.pair(inc.edge, i, j) - f.pair(inc.edge, y[u], j)
                        } else {
                            f.pair(inc.edge, j, i) - f.pair(inc.edge, j, y[u])
                        }
                    })
                    .fold(f64::INFINITY, f64::min);
                value += d;
            }
            if value <= tol {
                sub.keep(u, i);
                removed += 1;
                changed = true;
            }
        }
        if changed {
            for inc in f.incidence(u) {
                if !queued[inc.other] {
                    queued[inc.other] = true;
                    work.push_back(inc.other);
                }
            }
        }
    }
    Ok(removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Labeling;
    use crate::verification::reduce;

    #[test]
    fn simple_networks() {
        let mut net = FlowNetwork::new(2, 1e-12);
        net.add_edge(0, 1, 5.0);
        assert_eq!(net.max_flow(0, 1), 5.0);
        let mut net = FlowNetwork::new(4, 1e-12);
        net.add_edge(0, 1, 2.0);
        net.add_edge(1, 3, 4.0);
        net.add_edge(0, 2, 3.0);
        net.add_edge(2, 3, 3.0);
        assert_eq!(net.max_flow(0, 3), 5.0);
    }

    #[test]
    fn zero_energy_is_fully_degenerate() {
        let mut b = BinaryEnergy::new(3);
        b.edges.push((0, 1, [0.0; 4]));
        let s = min_cut_support(&b);
        assert_eq!(s.value, 0.0);
        assert!(s.achievable.iter().all(|a| a[0] && a[1]));
    }

    #[test]
    fn worked_move_is_submodular() {
        let mut f = GraphicalModel::new(vec![2, 2]).unwrap();
        f.add_edge(0, 1, vec![0.0, 4.0, 3.0, 10.0]).unwrap();
        let p = SubsetToOne::new(Labeling(vec![0, 0]), vec![vec![1], vec![1]]).unwrap();
        let r = reduce(&f, &p).unwrap();
        let b = restrict_to_move(&r, &[1, 1]).unwrap();
        assert_eq!(b.edges[0].2, [0.0, 4.0, 3.0, 7.0]);
        let y = restrict_to_move(&r, &[0, 0]).unwrap();
        assert_eq!((y.num_vars(), y.constant), (0, 0.0));
    }

    #[test]
    fn cut_prunes_negative_single_node() {
        let mut f = GraphicalModel::new(vec![3]).unwrap();
        f.set_unary(0, vec![0.0, -1.0, 2.0]).unwrap();
        let mut p = SubsetToOne::all_to_one(Labeling(vec![0]), f.labels()).unwrap();
        let r = reduce(&f, &p).unwrap();
        assert_eq!(pruning_cut(&r, &mut p, &[1]).unwrap(), 1);
        assert_eq!(p.eliminated(0), &[2]);
        let r = reduce(&f, &p).unwrap();
        assert_eq!(pruning_cut(&r, &mut p, &[0]).unwrap(), 0);
    }

    #[test]
    fn single_node_cases() {
        let mut f = GraphicalModel::new(vec![2]).unwrap();
        f.set_unary(0, vec![0.0, -1.0]).unwrap();
        let mut p = SubsetToOne::all_to_one(Labeling(vec![0]), f.labels()).unwrap();
        assert_eq!(single_node_prune(&f, &mut p, 0.0).unwrap(), 1);
        assert!(p.is_identity());

        let mut f = GraphicalModel::new(vec![2, 2]).unwrap();
        f.set_unary(0, vec![0.0, 3.0]).unwrap();
        f.set_unary(1, vec![0.0, 1.0]).unwrap();
        f.add_edge(0, 1, vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        let mut p = SubsetToOne::all_to_one(Labeling(vec![0, 0]), f.labels()).unwrap();
        assert_eq!(single_node_prune(&f, &mut p, 0.0).unwrap(), 0);
        assert_eq!(p.total_eliminated(), 2);
    }

    #[test]
    fn chain_of_three_removes_one_label() {
        let mut f = GraphicalModel::new(vec![2, 2, 2]).unwrap();
        f.set_unary(0, vec![0.0, 2.0]).unwrap();
        f.set_unary(1, vec![0.0, 1.0]).unwrap();
        f.set_unary(2, vec![0.0, 3.0]).unwrap();
        // node 1 label 1 gains -1 towards node 0 and -1 towards node 2 at y
        f.add_edge(0, 1, vec![0.0, -1.0, 5.0, 5.0]).unwrap();
        f.add_edge(1, 2, vec![0.0, 4.0, -1.0, 4.0]).unwrap();
        let mut p = SubsetToOne::all_to_one(Labeling(vec![0, 0, 0]), f.labels()).unwrap();
        assert_eq!(single_node_prune(&f, &mut p, 0.0).unwrap(), 1);
        assert_eq!(p.eliminated_sets(), &[vec![1], vec![], vec![1]]);
        assert_eq!(single_node_prune(&f, &mut p, 0.0).unwrap(), 0);
    }
}
