//! Pairwise graphical models, labelings, reparametrizations and the lifted
//! (indicator) representation of labelings.
//!
//! Costs are energies: lower is better, and the energy of a labeling `x` is
//!
//! ```text
//! E(x) = const + sum_v unary_v(x_v) + sum_{uv} pairwise_uv(x_u, x_v)
//! ```

mod generate;
mod uai;

pub use generate::{generate_grid, Family, GridSpec};
pub use uai::{parse_uai, serialize_uai};

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where an edge attaches to a node: the edge index, the other endpoint and
/// whether the node is the edge's tail (`u` in `uv`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    pub other: usize,
    pub is_tail: bool,
}

/// A pairwise model over a directed graph with dense cost tables.
///
/// Pairwise tables are stored row-major over `(label of tail, label of head)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphicalModel {
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
    unary: Vec<Vec<f64>>,
    pairwise: Vec<Vec<f64>>,
    constant: f64,
    incidence: Vec<Vec<Incidence>>,
}

impl GraphicalModel {
    /// Creates a model with all costs zero and no edges.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if let Some(v) = labels.iter().position(|&k| k == 0) {
            return Err(Error::InvalidModel(format!("node {v} has no labels")));
        }
        let n = labels.len();
        Ok(GraphicalModel {
            unary: labels.iter().map(|&k| vec![0.0; k]).collect(),
            labels,
            edges: Vec::new(),
            pairwise: Vec::new(),
            constant: 0.0,
            incidence: vec![Vec::new(); n],
        })
    }

    /// Adds the edge `uv` with the given row-major table and returns its index.
    pub fn add_edge(&mut self, u: usize, v: usize, table: Vec<f64>) -> Result<usize> {
        let n = self.num_nodes();
        if u >= n || v >= n {
            return Err(Error::InvalidModel(format!(
                "edge ({u},{v}) references a node outside 0..{n}"
            )));
        }
        if u == v {
            return Err(Error::InvalidModel(format!("self loop at node {u}")));
        }
        if self.find_edge(u, v).is_some() {
            return Err(Error::InvalidModel(format!(
                "duplicate edge between {u} and {v}"
            )));
        }
        let expected = self.labels[u] * self.labels[v];
        if table.len() != expected {
            return Err(Error::shape(format!(
                "pairwise table for ({u},{v}) has {} entries, expected {expected}",
                table.len()
            )));
        }
        check_finite(&table)?;
        let e = self.edges.len();
        self.edges.push((u, v));
        self.pairwise.push(table);
        self.incidence[u].push(Incidence {
            edge: e,
            other: v,
            is_tail: true,
        });
        self.incidence[v].push(Incidence {
            edge: e,
            other: u,
            is_tail: false,
        });
        Ok(e)
    }

    pub fn set_unary(&mut self, v: usize, costs: Vec<f64>) -> Result<()> {
        if v >= self.num_nodes() {
            return Err(Error::InvalidModel(format!("node {v} out of range")));
        }
        if costs.len() != self.labels[v] {
            return Err(Error::shape(format!(
                "unary table for node {v} has {} entries, expected {}",
                costs.len(),
                self.labels[v]
            )));
        }
        check_finite(&costs)?;
        self.unary[v] = costs;
        Ok(())
    }

    pub fn set_pairwise(&mut self, e: usize, table: Vec<f64>) -> Result<()> {
        let (u, v) = self.edges[e];
        if table.len() != self.labels[u] * self.labels[v] {
            return Err(Error::shape(format!(
                "pairwise table for edge {e} has wrong size"
            )));
        }
        check_finite(&table)?;
        self.pairwise[e] = table;
        Ok(())
    }

    pub fn set_constant(&mut self, c: f64) {
        self.constant = c;
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_labels(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.incidence
            .get(u)?
            .iter()
            .find(|inc| inc.other == v)
            .map(|inc| inc.edge)
    }

    pub fn incidence(&self, v: usize) -> &[Incidence] {
        &self.incidence[v]
    }

    pub fn unary(&self, v: usize) -> &[f64] {
        &self.unary[v]
    }

    pub fn pairwise(&self, e: usize) -> &[f64] {
        &self.pairwise[e]
    }

    /// `f_uv(i, j)` with `i` the tail label and `j` the head label.
    #[inline]
    pub fn pair(&self, e: usize, i: usize, j: usize) -> f64 {
        let (_, v) = self.edges[e];
        self.pairwise[e][i * self.labels[v] + j]
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// True when every stored cost is an exact integer.
    pub fn integer_costs(&self) -> bool {
        let int = |x: &f64| x.fract() == 0.0;
        int(&self.constant)
            && self.unary.iter().flatten().all(int)
            && self.pairwise.iter().flatten().all(int)
    }

    /// Largest absolute cost, used to scale tolerances.
    pub fn cost_scale(&self) -> f64 {
        self.unary
            .iter()
            .flatten()
            .chain(self.pairwise.iter().flatten())
            .fold(self.constant.abs(), |m, x| m.max(x.abs()))
    }

    /// Size of the labeling space, saturating at `u128::MAX`.
    pub fn labeling_count(&self) -> u128 {
        self.labels
            .iter()
            .fold(1u128, |acc, &k| acc.saturating_mul(k as u128))
    }

    pub fn check_labeling(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.num_nodes() {
            return Err(Error::shape(format!(
                "labeling has {} entries, model has {} nodes",
                x.len(),
                self.num_nodes()
            )));
        }
        if let Some(v) = (0..x.len()).find(|&v| x[v] >= self.labels[v]) {
            return Err(Error::shape(format!(
                "label {} at node {v} out of range 0..{}",
                x[v], self.labels[v]
            )));
        }
        Ok(())
    }

    /// Energy of a labeling.
    pub fn energy(&self, x: &[usize]) -> Result<f64> {
        self.check_labeling(x)?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[usize]) -> f64 {
        let mut e = self.constant;
        for (v, &xv) in x.iter().enumerate() {
            e += self.unary[v][xv];
        }
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            e += self.pair(k, x[u], x[v]);
        }
        e
    }

    /// A copy of the model with the same structure and every cost zero.
    pub fn zeroed(&self) -> GraphicalModel {
        let mut out = self.clone();
        out.constant = 0.0;
        out.unary.iter_mut().flatten().for_each(|c| *c = 0.0);
        out.pairwise.iter_mut().flatten().for_each(|c| *c = 0.0);
        out
    }

    /// `<f, mu>` for a lifted point.
    pub fn inner(&self, mu: &LiftedPoint) -> Result<f64> {
        mu.check_shape(self)?;
        let mut s = self.constant * mu.constant;
        for v in 0..self.num_nodes() {
            s += dot(&self.unary[v], &mu.unary[v]);
        }
        for e in 0..self.num_edges() {
            s += dot(&self.pairwise[e], &mu.pairwise[e]);
        }
        Ok(s)
    }

    /// Applies a reparametrization, producing the equivalent cost vector `f^phi`.
    pub fn reparametrized(&self, phi: &Reparametrization) -> Result<GraphicalModel> {
        phi.check_shape(self)?;
        let mut out = self.clone();
        for v in 0..self.num_nodes() {
            out.unary[v] = phi.unary(self, v);
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let kv = self.labels[v];
            for i in 0..self.labels[u] {
                for j in 0..kv {
                    out.pairwise[e][i * kv + j] -= phi.tail[e][i] + phi.head[e][j];
                }
            }
        }
        out.constant = self.constant + phi.offset.iter().sum::<f64>();
        Ok(out)
    }

    /// Lower bound `f^phi_const` together with feasibility and normalization
    /// of the reparametrized costs.
    pub fn dual_lower_bound(&self, phi: &Reparametrization, tol: f64) -> Result<DualBound> {
        let r = self.reparametrized(phi)?;
        let mut feasible = true;
        let mut normalized = true;
        for v in 0..r.num_nodes() {
            let m = min_of(&r.unary[v]);
            feasible &= m >= -tol;
            normalized &= m.abs() <= tol;
        }
        for e in 0..r.num_edges() {
            let m = min_of(&r.pairwise[e]);
            feasible &= m >= -tol;
            normalized &= m.abs() <= tol;
        }
        Ok(DualBound {
            value: r.constant,
            feasible,
            normalized,
        })
    }

    /// Copy of the model restricted to the given per-node label lists
    /// (listed labels are re-indexed in the given order).
    pub fn restrict(&self, keep: &[Vec<usize>]) -> Result<GraphicalModel> {
        if keep.len() != self.num_nodes() {
            return Err(Error::shape("label lists do not match node count"));
        }
        for (v, ks) in keep.iter().enumerate() {
            if ks.is_empty() || ks.iter().any(|&i| i >= self.labels[v]) {
                return Err(Error::shape(format!("invalid label list for node {v}")));
            }
        }
        let mut out = GraphicalModel::new(keep.iter().map(Vec::len).collect())?;
        out.constant = self.constant;
        for v in 0..self.num_nodes() {
            out.unary[v] = keep[v].iter().map(|&i| self.unary[v][i]).collect();
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let mut t = Vec::with_capacity(keep[u].len() * keep[v].len());
            for &i in &keep[u] {
                for &j in &keep[v] {
                    t.push(self.pair(e, i, j));
                }
            }
            out.add_edge(u, v, t)?;
        }
        Ok(out)
    }
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidModel("non-finite cost".into()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Result of [`GraphicalModel::dual_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualBound {
    pub value: f64,
    pub feasible: bool,
    pub normalized: bool,
}

/// One label per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Labeling(pub Vec<usize>);

impl Labeling {
    pub fn zeros(n: usize) -> Self {
        Labeling(vec![0; n])
    }
}

impl Deref for Labeling {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl DerefMut for Labeling {
    fn deref_mut(&mut self) -> &mut [usize] {
        &mut self.0
    }
}

impl From<Vec<usize>> for Labeling {
    fn from(v: Vec<usize>) -> Self {
        Labeling(v)
    }
}

/// Iterates over every labeling of a model in odometer order (node 0 fastest).
pub fn for_each_labeling(labels: &[usize], mut visit: impl FnMut(&[usize])) {
    let mut x = vec![0usize; labels.len()];
    loop {
        visit(&x);
        let mut v = 0;
        loop {
            if v == labels.len() {
                return;
            }
            x[v] += 1;
            if x[v] < labels[v] {
                break;
            }
            x[v] = 0;
            v += 1;
        }
    }
}

/// Dual variables of the local polytope relaxation.
///
/// `tail[e][i]` is the amount moved from edge `e = uv` into its tail node `u`
/// at label `i`; `head[e][j]` the amount moved into the head `v` at label `j`;
/// `offset[u]` moves a constant from node `u` into the model constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparametrization {
    pub tail: Vec<Vec<f64>>,
    pub head: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl Reparametrization {
    pub fn zeros(model: &GraphicalModel) -> Self {
        Reparametrization {
            tail: model
                .edges
                .iter()
                .map(|&(u, _)| vec![0.0; model.labels[u]])
                .collect(),
            head: model
                .edges
                .iter()
                .map(|&(_, v)| vec![0.0; model.labels[v]])
                .collect(),
            offset: vec![0.0; model.num_nodes()],
        }
    }

    pub fn check_shape(&self, model: &GraphicalModel) -> Result<()> {
        let ok = self.tail.len() == model.num_edges()
            && self.head.len() == model.num_edges()
            && self.offset.len() == model.num_nodes()
            && model.edges.iter().enumerate().all(|(e, &(u, v))| {
                self.tail[e].len() == model.labels[u] && self.head[e].len() == model.labels[v]
            });
        if ok {
            Ok(())
        } else {
            Err(Error::shape("reparametrization does not match the model"))
        }
    }

    /// The message into node `v` along the incidence `inc`.
    #[inline]
    pub fn into_node(&self, inc: &Incidence) -> &[f64] {
        if inc.is_tail {
            &self.tail[inc.edge]
        } else {
            &self.head[inc.edge]
        }
    }

    #[inline]
    pub fn into_node_mut(&mut self, inc: &Incidence) -> &mut Vec<f64> {
        if inc.is_tail {
            &mut self.tail[inc.edge]
        } else {
            &mut self.head[inc.edge]
        }
    }

    /// Reparametrized unary `f^phi_v`.
    pub fn unary(&self, model: &GraphicalModel, v: usize) -> Vec<f64> {
        let mut out: Vec<f64> = model.unary[v].iter().map(|c| c - self.offset[v]).collect();
        for inc in &model.incidence[v] {
            for (o, m) in out.iter_mut().zip(self.into_node(inc)) {
                *o += m;
            }
        }
        out
    }

    /// Reparametrized pairwise entry `f^phi_uv(i, j)`.
    #[inline]
    pub fn pair(&self, model: &GraphicalModel, e: usize, i: usize, j: usize) -> f64 {
        model.pair(e, i, j) - self.tail[e][i] - self.head[e][j]
    }

    pub fn lower_bound(&self, model: &GraphicalModel) -> f64 {
        model.constant + self.offset.iter().sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.tail
            .iter()
            .chain(self.head.iter())
            .flatten()
            .chain(self.offset.iter())
            .all(|x| x.is_finite())
    }
}

/// A point of the lifted space: node and edge marginals plus the constant
/// coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    pub constant: f64,
    pub unary: Vec<Vec<f64>>,
    pub pairwise: Vec<Vec<f64>>,
}

impl LiftedPoint {
    pub fn zeros(model: &GraphicalModel) -> Self {
        LiftedPoint {
            constant: 0.0,
            unary: model.labels.iter().map(|&k| vec![0.0; k]).collect(),
            pairwise: model
                .edges
                .iter()
                .map(|&(u, v)| vec![0.0; model.labels[u] * model.labels[v]])
                .collect(),
        }
    }

    /// The 0/1 indicator vector of a labeling.
    pub fn lift(model: &GraphicalModel, x: &[usize]) -> Result<Self> {
        model.check_labeling(x)?;
        let mut mu = LiftedPoint::zeros(model);
        mu.constant = 1.0;
        for (v, &xv) in x.iter().enumerate() {
            mu.unary[v][xv] = 1.0;
        }
        for (e, &(u, v)) in model.edges.iter().enumerate() {
            mu.pairwise[e][x[u] * model.labels[v] + x[v]] = 1.0;
        }
        Ok(mu)
    }

    fn check_shape(&self, model: &GraphicalModel) -> Result<()> {
        let ok = self.unary.len() == model.num_nodes()
            && self.pairwise.len() == model.num_edges()
            && (0..model.num_nodes()).all(|v| self.unary[v].len() == model.labels[v])
            && (0..model.num_edges()).all(|e| self.pairwise[e].len() == model.pairwise[e].len());
        if ok {
            Ok(())
        } else {
            Err(Error::shape("lifted point does not match the model"))
        }
    }
}
