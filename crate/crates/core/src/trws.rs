//! Sequential tree-reweighted message passing (TRW-S) over monotonic chains.
//!
//! Messages live in a [`Reparametrization`]: `tail[e]` is the message into the
//! tail of edge `e`, `head[e]` the message into its head. A forward pass visits
//! nodes in chain order and refreshes the messages into later neighbours:
//!
//! ```text
//! phi_vu(j) := min_i [ f^phi_u(i) / n_u - phi_uv(i) + f_uv(i, j) ]
//! ```
//!
//! where `n_u` counts the chains through `u`. A backward pass does the same in
//! reverse. On reduced verification costs the messages can be computed from
//! the reduction pieces alone, see [`reduced_message`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling, Reparametrization};
use crate::verification::{EdgeReduction, ReducedCosts};

/// Edge-disjoint cover of the edges by chains that increase in a node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDecomposition {
    order: Vec<usize>,
    rank: Vec<usize>,
    chains: Vec<Vec<usize>>,
    chain_edges: Vec<Vec<usize>>,
    count: Vec<usize>,
    starts: Vec<usize>,
    ends: Vec<usize>,
}

impl ChainDecomposition {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }

    /// Node sequence of each chain.
    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    /// Edge sequence of each chain.
    pub fn chain_edges(&self) -> &[Vec<usize>] {
        &self.chain_edges
    }

    /// Number of chains through `v`; 1 for nodes on no chain.
    pub fn n(&self, v: usize) -> usize {
        self.count[v].max(1)
    }

    /// Number of chains having `v` as an endpoint.
    pub fn n_term(&self, v: usize) -> usize {
        self.starts[v] + self.ends[v]
    }

    /// Weight of `min f^phi_v` in the bound after a forward pass.
    fn forward_weight(&self, v: usize) -> f64 {
        if self.count[v] == 0 {
            1.0
        } else {
            self.ends[v] as f64 / self.count[v] as f64
        }
    }

    fn backward_weight(&self, v: usize) -> f64 {
        if self.count[v] == 0 {
            1.0
        } else {
            self.starts[v] as f64 / self.count[v] as f64
        }
    }
}

/// Greedy chain cover. Each node, in order, starts chains along its unused
/// edges towards later nodes, nearest first; a chain is extended while the
/// next unused edge keeps the same step in the order. On row-major grids this
/// yields the rows and the columns.
pub fn build_chains(model: &GraphicalModel, order: &[usize]) -> Result<ChainDecomposition> {
    let n = model.num_nodes();
    let mut rank = vec![usize::MAX; n];
    if order.len() != n {
        return Err(Error::Config("order must list every node once".into()));
    }
    for (k, &v) in order.iter().enumerate() {
        if v >= n || rank[v] != usize::MAX {
            return Err(Error::Config("order must list every node once".into()));
        }
        rank[v] = k;
    }
    // Forward edges of each node, sorted by the rank of the other endpoint.
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(u, v)) in model.edges().iter().enumerate() {
        let (a, b) = if rank[u] < rank[v] { (u, v) } else { (v, u) };
        out[a].push((rank[b], e));
    }
    for list in &mut out {
        list.sort_unstable();
    }
    let mut used = vec![false; model.num_edges()];
    let other = |e: usize, v: usize| {
        let (a, b) = model.edge(e);
        if a == v {
            b
        } else {
            a
        }
    };

    let mut chains = Vec::new();
    let mut chain_edges = Vec::new();
    for &start in order {
        for &(_, e0) in &out[start] {
            if used[e0] {
                continue;
            }
            used[e0] = true;
            let mut nodes = vec![start, other(e0, start)];
            let mut edges = vec![e0];
            let step = rank[nodes[1]] - rank[start];
            loop {
                let cur = *nodes.last().unwrap();
                let next = out[cur]
                    .iter()
                    .find(|&&(r, e)| !used[e] && r == rank[cur] + step)
                    .map(|&(_, e)| e);
                match next {
                    Some(e) => {
                        used[e] = true;
                        nodes.push(other(e, cur));
                        edges.push(e);
                    }
                    None => break,
                }
            }
            chains.push(nodes);
            chain_edges.push(edges);
        }
    }

    let mut count = vec![0; n];
    let mut starts = vec![0; n];
    let mut ends = vec![0; n];
    for c in &chains {
        for &v in c {
            count[v] += 1;
        }
        starts[c[0]] += 1;
        ends[*c.last().unwrap()] += 1;
    }
    Ok(ChainDecomposition {
        order: order.to_vec(),
        rank,
        chains,
        chain_edges,
        count,
        starts,
        ends,
    })
}

/// Chains for the identity node order.
pub fn default_chains(model: &GraphicalModel) -> ChainDecomposition {
    let order: Vec<usize> = (0..model.num_nodes()).collect();
    build_chains(model, &order).expect("identity order is a permutation")
}

/// Read access to one edge of a reduced problem, oriented from a source node
/// to a target node. Label arguments are original label indices; `restricted`
/// takes positions in the source and target sets.
pub trait ReducedEdge {
    fn source_set(&self) -> &[usize];
    fn target_set(&self) -> &[usize];
    fn source_rep(&self) -> usize;
    fn source_delta(&self, i: usize) -> f64;
    fn target_delta(&self, j: usize) -> f64;
    fn anchor(&self) -> f64;
    fn restricted(&self, a: usize, b: usize) -> f64;
}

/// An [`EdgeReduction`] read from tail to head, or from head to tail.
#[derive(Debug, Clone, Copy)]
pub struct Directed<'a> {
    pub edge: EdgeReduction<'a>,
    pub from_tail: bool,
}

impl ReducedEdge for Directed<'_> {
    fn source_set(&self) -> &[usize] {
        if self.from_tail {
            self.edge.tail_set
        } else {
            self.edge.head_set
        }
    }

    fn target_set(&self) -> &[usize] {
        if self.from_tail {
            self.edge.head_set
        } else {
            self.edge.tail_set
        }
    }

    fn source_rep(&self) -> usize {
        if self.from_tail {
            self.edge.tail_rep
        } else {
            self.edge.head_rep
        }
    }

    fn source_delta(&self, i: usize) -> f64 {
        if self.from_tail {
            self.edge.delta_tail[i]
        } else {
            self.edge.delta_head[i]
        }
    }

    fn target_delta(&self, j: usize) -> f64 {
        if self.from_tail {
            self.edge.delta_head[j]
        } else {
            self.edge.delta_tail[j]
        }
    }

    fn anchor(&self) -> f64 {
        self.edge.anchor
    }

    fn restricted(&self, a: usize, b: usize) -> f64 {
        let w = self.edge.head_set.len();
        if self.from_tail {
            self.edge.restricted[a * w + b]
        } else {
            self.edge.restricted[b * w + a]
        }
    }
}

/// `out(j) = min_i [a(i) + g(i, j)]` over the full table, from the tail side
/// (`from_tail`) or from the head side.
pub fn naive_message(
    model: &GraphicalModel,
    e: usize,
    from_tail: bool,
    a: &[f64],
    out: &mut [f64],
) {
    let (u, v) = model.edge(e);
    let (ku, kv) = (model.num_labels(u), model.num_labels(v));
    let t = model.pairwise(e);
    if from_tail {
        out.fill(f64::INFINITY);
        for i in 0..ku {
            let row = &t[i * kv..(i + 1) * kv];
            for (o, &g) in out.iter_mut().zip(row) {
                *o = o.min(a[i] + g);
            }
        }
    } else {
        for (i, o) in out.iter_mut().enumerate().take(ku) {
            let row = &t[i * kv..(i + 1) * kv];
            *o = row
                .iter()
                .zip(a)
                .map(|(g, x)| g + x)
                .fold(f64::INFINITY, f64::min);
        }
    }
}

/// The same message on reduced costs, touching only the movable labels of
/// both endpoints. `a` must be constant on the source's immovable labels.
///
/// With `c = f(y_u, y_v)` and `a0` the common immovable value:
///
/// ```text
/// base   = min(a0, min_{i in Y_u} a(i) + D_uv(i))           j not in Y_v
/// out(j) = min(min_{i in Y_u} a(i) + f(i, j) - c, base + D_vu(j))   j in Y_v
/// ```
pub fn reduced_message<E: ReducedEdge>(edge: &E, a: &[f64], out: &mut [f64]) {
    let src = edge.source_set();
    let mut base = a[edge.source_rep()];
    for &i in src {
        base = base.min(a[i] + edge.source_delta(i));
    }
    out.fill(base);
    let tgt = edge.target_set();
    if tgt.is_empty() {
        return;
    }
    let c = edge.anchor();
    for (b, &j) in tgt.iter().enumerate() {
        let mut m = f64::INFINITY;
        for (ai, &i) in src.iter().enumerate() {
            m = m.min(a[i] + edge.restricted(ai, b));
        }
        out[j] = (m - c).min(base + edge.target_delta(j));
    }
}

/// Message along edge `e` of `r.model()`, in naive or reduced form.
pub fn message(
    r: &ReducedCosts,
    e: usize,
    from_tail: bool,
    a: &[f64],
    reduced: bool,
) -> Result<Vec<f64>> {
    let model = r.model();
    let (u, v) = model.edge(e);
    let (src, dst) = if from_tail { (u, v) } else { (v, u) };
    if a.len() != model.num_labels(src) {
        return Err(Error::shape("message input has the wrong length"));
    }
    let mut out = vec![0.0; model.num_labels(dst)];
    if reduced {
        let rep = a[r.substitution().test_labeling()[src]];
        let tol = 1e-9 * (1.0 + rep.abs());
        let constant = (0..a.len()).all(|i| r.is_movable(src, i) || (a[i] - rep).abs() <= tol);
        if !constant {
            return Err(Error::Config(
                "reduced message needs an input constant on immovable labels".into(),
            ));
        }
        reduced_message(
            &Directed {
                edge: r.edge_view(e),
                from_tail,
            },
            a,
            &mut out,
        );
    } else {
        naive_message(model, e, from_tail, a, &mut out);
    }
    Ok(out)
}

/// Cost vector driven by the passes, and how its messages are computed.
#[derive(Debug, Clone, Copy)]
pub enum Costs<'a> {
    Naive(&'a GraphicalModel),
    Reduced(&'a ReducedCosts),
}

impl<'a> Costs<'a> {
    pub fn model(&self) -> &'a GraphicalModel {
        match *self {
            Costs::Naive(m) => m,
            Costs::Reduced(r) => r.model(),
        }
    }
}

/// Outcome of one pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassResult {
    pub lower_bound: f64,
    /// Per-node argmin of the reparametrized unaries, ties to the smallest label.
    pub labeling: Labeling,
    /// Per-node labels within the activity tolerance of the unary minimum.
    pub active: Vec<Vec<usize>>,
}

fn pass(
    costs: Costs,
    phi: &mut Reparametrization,
    dec: &ChainDecomposition,
    backward: bool,
    tol: f64,
) -> PassResult {
    let model = costs.model();
    let kmax = model.labels().iter().copied().max().unwrap_or(0);
    let mut a = vec![0.0; kmax];
    let mut out = vec![0.0; kmax];
    let nodes: Box<dyn Iterator<Item = &usize>> = if backward {
        Box::new(dec.order.iter().rev())
    } else {
        Box::new(dec.order.iter())
    };
    for &u in nodes {
        let fu = phi.unary(model, u);
        let nu = dec.n(u) as f64;
        for inc in model.incidence(u) {
            let w = inc.other;
            let ahead = if backward {
                dec.rank[w] < dec.rank[u]
            } else {
                dec.rank[w] > dec.rank[u]
            };
            if !ahead {
                continue;
            }
            let ku = fu.len();
            let kw = model.num_labels(w);
            for ((ai, &f), &m) in a[..ku].iter_mut().zip(&fu).zip(phi.into_node(inc)) {
                *ai = f / nu - m;
            }
            match costs {
                Costs::Naive(m) => {
                    naive_message(m, inc.edge, inc.is_tail, &a[..ku], &mut out[..kw])
                }
                Costs::Reduced(r) => reduced_message(
                    &Directed {
                        edge: r.edge_view(inc.edge),
                        from_tail: inc.is_tail,
                    },
                    &a[..ku],
                    &mut out[..kw],
                ),
            }
            let target = if inc.is_tail {
                &mut phi.head[inc.edge]
            } else {
                &mut phi.tail[inc.edge]
            };
            target.copy_from_slice(&out[..kw]);
        }
    }

    let mut lb = phi.lower_bound(model);
    let mut labeling = Vec::with_capacity(model.num_nodes());
    let mut active = Vec::with_capacity(model.num_nodes());
    for v in 0..model.num_nodes() {
        let fv = phi.unary(model, v);
        let (best, min) = argmin(&fv);
        let weight = if backward {
            dec.backward_weight(v)
        } else {
            dec.forward_weight(v)
        };
        if weight != 0.0 {
            lb += weight * min;
        }
        labeling.push(best);
        active.push(within(&fv, min, tol));
    }
    PassResult {
        lower_bound: lb,
        labeling: Labeling(labeling),
        active,
    }
}

/// One pass in chain order updating messages into later nodes.
pub fn forward_pass(
    costs: Costs,
    phi: &mut Reparametrization,
    dec: &ChainDecomposition,
    tol: f64,
) -> PassResult {
    pass(costs, phi, dec, false, tol)
}

/// One pass in reverse chain order updating messages into earlier nodes.
pub fn backward_pass(
    costs: Costs,
    phi: &mut Reparametrization,
    dec: &ChainDecomposition,
    tol: f64,
) -> PassResult {
    pass(costs, phi, dec, true, tol)
}

/// A forward pass followed by a backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub forward: PassResult,
    pub backward: PassResult,
}

pub fn sweep(
    costs: Costs,
    phi: &mut Reparametrization,
    dec: &ChainDecomposition,
    tol: f64,
) -> Sweep {
    let forward = forward_pass(costs, phi, dec, tol);
    let backward = backward_pass(costs, phi, dec, tol);
    Sweep { forward, backward }
}

pub(crate) fn argmin(xs: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[best] {
            best = i;
        }
    }
    (best, xs[best])
}

fn within(xs: &[f64], min: f64, tol: f64) -> Vec<usize> {
    xs.iter()
        .enumerate()
        .filter(|(_, &x)| x <= min + tol)
        .map(|(i, _)| i)
        .collect()
}

/// Rewrites the state left by a pass as an equivalent reparametrization with
/// nonnegative terms whose constant is at least the pass bound.
///
/// After a backward pass every chain edge satisfies
/// `min_i [f^phi_w(j) / n_w + f^phi_e(i, j)] = 0` for each label `i` of the
/// earlier endpoint, where `w` is the later one. Moving the minimum over `i`
/// onto `w` therefore keeps both the edge and `w` nonnegative and leaves the
/// slack on the nodes. After a forward pass the roles are swapped.
pub fn node_slack_form(
    model: &GraphicalModel,
    phi: &Reparametrization,
    dec: &ChainDecomposition,
    after_backward: bool,
) -> Reparametrization {
    let mut out = phi.clone();
    for (nodes, edges) in dec.chains.iter().zip(&dec.chain_edges) {
        for (k, &e) in edges.iter().enumerate() {
            let w = if after_backward {
                nodes[k + 1]
            } else {
                nodes[k]
            };
            let (tail, head) = model.edge(e);
            let (kt, kh) = (model.labels()[tail], model.labels()[head]);
            if w == tail {
                for i in 0..kt {
                    out.tail[e][i] += (0..kh)
                        .map(|j| phi.pair(model, e, i, j))
                        .fold(f64::INFINITY, f64::min);
                }
            } else {
                for j in 0..kh {
                    out.head[e][j] += (0..kt)
                        .map(|i| phi.pair(model, e, i, j))
                        .fold(f64::INFINITY, f64::min);
                }
            }
        }
    }
    for v in 0..model.num_nodes() {
        let m = phi_min(model, &out, v);
        out.offset[v] += m;
    }
    out
}

/// Moves all slack from the pairwise terms onto the nodes and normalizes the
/// node minima to zero. Afterwards every unary has minimum zero, and every
/// row and column of every reparametrized pairwise table has minimum zero.
pub fn dual_correct(model: &GraphicalModel, phi: &Reparametrization) -> Reparametrization {
    let mut out = phi.clone();
    for (e, &(u, v)) in model.edges().iter().enumerate() {
        let (ku, kv) = (model.num_labels(u), model.num_labels(v));
        let mut t: Vec<f64> = (0..ku * kv)
            .map(|k| out.pair(model, e, k / kv, k % kv))
            .collect();
        let m = t.iter().copied().fold(f64::INFINITY, f64::min);
        for i in 0..ku {
            out.tail[e][i] += m;
        }
        t.iter_mut().for_each(|x| *x -= m);
        for i in 0..ku {
            let row = &mut t[i * kv..(i + 1) * kv];
            let r = row.iter().copied().fold(f64::INFINITY, f64::min);
            out.tail[e][i] += r;
            row.iter_mut().for_each(|x| *x -= r);
        }
        for j in 0..kv {
            let c = (0..ku).map(|i| t[i * kv + j]).fold(f64::INFINITY, f64::min);
            out.head[e][j] += c;
        }
    }
    for v in 0..model.num_nodes() {
        let m = phi_min(model, &out, v);
        out.offset[v] += m;
    }
    out
}

fn phi_min(model: &GraphicalModel, phi: &Reparametrization, v: usize) -> f64 {
    phi.unary(model, v)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// `O_v(phi)`: labels whose reparametrized unary is within `tol` of the minimum.
pub fn active_labels(model: &GraphicalModel, phi: &Reparametrization, tol: f64) -> Vec<Vec<usize>> {
    (0..model.num_nodes())
        .map(|v| {
            let fv = phi.unary(model, v);
            let (_, min) = argmin(&fv);
            within(&fv, min, tol)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margins {
    /// `min_i f^phi_v(i) - f^phi_v(y_v)` per node.
    pub node: Vec<f64>,
    pub problem: f64,
}

pub fn margin(model: &GraphicalModel, phi: &Reparametrization, y: &[usize]) -> Margins {
    let node: Vec<f64> = (0..model.num_nodes())
        .map(|v| {
            let fv = phi.unary(model, v);
            argmin(&fv).1 - fv[y[v]]
        })
        .collect();
    let problem = node.iter().copied().fold(f64::INFINITY, f64::min);
    Margins {
        node,
        problem: if problem.is_finite() { problem } else { 0.0 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcViolation {
    /// An active pairwise entry with an inactive endpoint label.
    InactiveEndpoint { edge: usize, i: usize, j: usize },
    /// An active label with no active pairwise entry towards a neighbour.
    Unsupported {
        node: usize,
        label: usize,
        edge: usize,
    },
}

/// Checks both arc-consistency clauses. Unary labels are active within `tol`
/// of their node minimum, pairwise entries within `tol` of their table minimum.
pub fn arc_consistency_check(
    model: &GraphicalModel,
    phi: &Reparametrization,
    tol: f64,
) -> Vec<ArcViolation> {
    let active = active_labels(model, phi, tol);
    let mut is_active: Vec<Vec<bool>> = model.labels().iter().map(|&k| vec![false; k]).collect();
    for (v, set) in active.iter().enumerate() {
        for &i in set {
            is_active[v][i] = true;
        }
    }
    let mut violations = Vec::new();
    for (e, &(u, v)) in model.edges().iter().enumerate() {
        let (ku, kv) = (model.num_labels(u), model.num_labels(v));
        let t: Vec<f64> = (0..ku * kv)
            .map(|k| phi.pair(model, e, k / kv, k % kv))
            .collect();
        let m = t.iter().copied().fold(f64::INFINITY, f64::min);
        let on = |i: usize, j: usize| t[i * kv + j] <= m + tol;
        for i in 0..ku {
            for j in 0..kv {
                if on(i, j) && !(is_active[u][i] && is_active[v][j]) {
                    violations.push(ArcViolation::InactiveEndpoint { edge: e, i, j });
                }
            }
        }
        for &i in &active[u] {
            if !(0..kv).any(|j| on(i, j)) {
                violations.push(ArcViolation::Unsupported {
                    node: u,
                    label: i,
                    edge: e,
                });
            }
        }
        for &j in &active[v] {
            if !(0..ku).any(|i| on(i, j)) {
                violations.push(ArcViolation::Unsupported {
                    node: v,
                    label: j,
                    edge: e,
                });
            }
        }
    }
    violations
}

/// One line of the per-sweep trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTrace {
    pub round: usize,
    pub sweep: usize,
    pub lower_bound: f64,
    pub problem_margin: f64,
    pub active_labels: usize,
    pub movable_labels: usize,
}

/// Result of running TRW-S on a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub phi: Reparametrization,
    pub lower_bound: f64,
    /// Lowest-energy labeling among those produced by the passes.
    pub best: Labeling,
    pub best_energy: f64,
    /// Labeling of the final pass.
    pub last: Labeling,
    pub sweeps: usize,
}

/// Runs sweeps until `max_sweeps`, or until the bound stalls for five sweeps,
/// or (integer costs) until the gap to the best labeling drops below one.
pub fn solve(model: &GraphicalModel, max_sweeps: usize) -> Solution {
    let dec = default_chains(model);
    let mut phi = Reparametrization::zeros(model);
    let integer = model.integer_costs();
    let scale = 1.0 + model.cost_scale();
    let mut best = Labeling::zeros(model.num_nodes());
    let mut best_energy = model.energy_unchecked(&best);
    let mut last = best.clone();
    let mut lower_bound = f64::NEG_INFINITY;
    let mut stall = 0;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let s = sweep(Costs::Naive(model), &mut phi, &dec, 0.0);
        sweeps += 1;
        for x in [&s.forward.labeling, &s.backward.labeling] {
            let en = model.energy_unchecked(x);
            if en < best_energy {
                best_energy = en;
                best = x.clone();
            }
        }
        last = s.backward.labeling;
        let lb = s.backward.lower_bound;
        if lb - lower_bound <= 1e-9 * scale {
            stall += 1;
        } else {
            stall = 0;
        }
        lower_bound = lower_bound.max(lb);
        if stall >= 5 || integer && best_energy - lower_bound < 1.0 {
            break;
        }
    }
    Solution {
        phi,
        lower_bound,
        best,
        best_energy,
        last,
        sweeps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_grid, Family, GridSpec};

    fn path(n: usize, k: usize) -> GraphicalModel {
        let mut m = GraphicalModel::new(vec![k; n]).unwrap();
        for v in 1..n {
            m.add_edge(v - 1, v, vec![0.0; k * k]).unwrap();
        }
        m
    }

    #[test]
    fn path_is_one_chain() {
        let m = path(5, 2);
        let d = default_chains(&m);
        assert_eq!(d.chains(), &[vec![0, 1, 2, 3, 4]]);
        assert!((0..5).all(|v| d.n(v) == 1));
        assert_eq!((d.n_term(0), d.n_term(2), d.n_term(4)), (1, 0, 1));
    }

    #[test]
    fn small_grid_chains() {
        let m = generate_grid(&GridSpec::new(Family::Potts, 2, 2, 2, 0)).unwrap();
        let d = default_chains(&m);
        assert_eq!(
            d.chains(),
            &[vec![0, 1], vec![0, 2], vec![1, 3], vec![2, 3]]
        );
        assert!((0..4).all(|v| d.n(v) == 2));
        let m = generate_grid(&GridSpec::new(Family::Potts, 3, 4, 2, 0)).unwrap();
        let d = default_chains(&m);
        assert_eq!(d.chains().len(), 3 + 4);
        assert!(d.chains().contains(&vec![4, 5, 6, 7]));
        assert!(d.chains().contains(&vec![1, 5, 9]));
    }

    #[test]
    fn isolated_node_has_weight_one() {
        let mut m = GraphicalModel::new(vec![3]).unwrap();
        m.set_unary(0, vec![4.0, 2.0, 7.0]).unwrap();
        let d = default_chains(&m);
        assert_eq!(d.n(0), 1);
        let mut phi = Reparametrization::zeros(&m);
        let r = forward_pass(Costs::Naive(&m), &mut phi, &d, 0.0);
        assert_eq!(r.lower_bound, 2.0);
        assert_eq!(r.labeling.0, vec![1]);
    }

    #[test]
    fn zero_costs_leave_messages_zero() {
        let m = generate_grid(&GridSpec {
            cost_range: (0, 0),
            ..GridSpec::new(Family::Full, 2, 3, 3, 1)
        })
        .unwrap();
        let d = default_chains(&m);
        let mut phi = Reparametrization::zeros(&m);
        let s = sweep(Costs::Naive(&m), &mut phi, &d, 1e-9);
        assert_eq!(phi, Reparametrization::zeros(&m));
        assert_eq!(s.backward.lower_bound, 0.0);
        assert!(s.backward.active.iter().all(|a| a.len() == 3));
    }

    #[test]
    fn single_edge_exact_after_one_pass() {
        let mut m = GraphicalModel::new(vec![2, 3]).unwrap();
        m.set_unary(0, vec![1.0, -2.0]).unwrap();
        m.set_unary(1, vec![0.0, 3.0, 1.0]).unwrap();
        m.add_edge(0, 1, vec![5.0, 0.0, 2.0, 4.0, 1.0, 6.0])
            .unwrap();
        let d = default_chains(&m);
        let mut phi = Reparametrization::zeros(&m);
        let r = forward_pass(Costs::Naive(&m), &mut phi, &d, 0.0);
        // brute force: (1,0) = -2 + 0 + 4 = 2 ; (0,1) = 1 + 3 + 0 = 4 ; (1,1) = -2+3+1 = 2
        assert_eq!(r.lower_bound, 2.0);
    }

    #[test]
    fn dual_correct_on_zero_is_identity() {
        let m = path(3, 2);
        let phi = Reparametrization::zeros(&m);
        assert_eq!(dual_correct(&m, &phi), phi);
    }

    #[test]
    fn margins() {
        let mut m = GraphicalModel::new(vec![3, 2]).unwrap();
        m.set_unary(0, vec![1.0, 0.0, 2.0]).unwrap();
        m.set_unary(1, vec![0.0, 4.0]).unwrap();
        let phi = Reparametrization::zeros(&m);
        let mg = margin(&m, &phi, &[1, 0]);
        assert_eq!(mg.node, vec![0.0, 0.0]);
        let mg = margin(&m, &phi, &[2, 1]);
        assert_eq!(mg.node, vec![-2.0, -4.0]);
        assert_eq!(mg.problem, -4.0);
    }

    #[test]
    fn arc_consistency_violations() {
        let m = path(2, 2);
        let phi = Reparametrization::zeros(&m);
        assert!(arc_consistency_check(&m, &phi, 1e-9).is_empty());
        let mut m2 = m.clone();
        m2.set_unary(0, vec![0.0, 1.0]).unwrap();
        let v = arc_consistency_check(&m2, &phi, 1e-9);
        assert!(v.contains(&ArcViolation::InactiveEndpoint {
            edge: 0,
            i: 1,
            j: 0
        }));
    }

    #[test]
    fn reduced_message_with_empty_sets_broadcasts_min() {
        use crate::substitution::SubsetToOne;
        use crate::verification::reduce;
        let mut m = GraphicalModel::new(vec![3, 3]).unwrap();
        m.add_edge(0, 1, (0..9).map(|t| t as f64).collect())
            .unwrap();
        let p = SubsetToOne::identity(Labeling(vec![1, 2]));
        let r = reduce(&m, &p).unwrap();
        let a = [2.0, 2.0, 2.0];
        assert_eq!(message(&r, 0, true, &a, true).unwrap(), vec![2.0; 3]);
        assert_eq!(message(&r, 0, true, &a, false).unwrap(), vec![2.0; 3]);
    }

    #[test]
    fn solve_finds_tree_optimum() {
        let m = generate_grid(&GridSpec {
            cost_range: (-10, 10),
            ..GridSpec::new(Family::Full, 1, 6, 3, 7)
        })
        .unwrap();
        let s = solve(&m, 100);
        let mut best = f64::INFINITY;
        crate::model::for_each_labeling(m.labels(), |x| best = best.min(m.energy(x).unwrap()));
        assert!((s.lower_bound - best).abs() < 1e-9);
        assert_eq!(s.best_energy, best);
    }

    #[test]
    fn node_slack_form_is_feasible_and_keeps_the_bound() {
        for seed in 0..20 {
            let spec = GridSpec {
                cost_range: (-20, 20),
                ..GridSpec::new(Family::Full, 3, 3, 3, seed)
            };
            let m = generate_grid(&spec).unwrap();
            let dec = default_chains(&m);
            let mut phi = Reparametrization::zeros(&m);
            for _ in 0..5 {
                let fw = forward_pass(Costs::Naive(&m), &mut phi, &dec, 1e-7);
                let ns = node_slack_form(&m, &phi, &dec, false);
                assert!(ns.lower_bound(&m) >= fw.lower_bound - 1e-9);
                let bw = backward_pass(Costs::Naive(&m), &mut phi, &dec, 1e-7);
                let ns = node_slack_form(&m, &phi, &dec, true);
                assert!(ns.lower_bound(&m) >= bw.lower_bound - 1e-9);
                for v in 0..m.num_nodes() {
                    assert!(ns.unary(&m, v).iter().all(|&x| x >= -1e-9));
                }
                for e in 0..m.num_edges() {
                    let (a, b) = m.edge(e);
                    for i in 0..m.labels()[a] {
                        for j in 0..m.labels()[b] {
                            assert!(ns.pair(&m, e, i, j) >= -1e-9);
                        }
                    }
                }
            }
        }
    }
}
