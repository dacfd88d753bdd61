//! Verification costs for a substitution and their partial submodular
//! truncation.
//!
//! For `p` with test labeling `y` and sets `Y_v`, the verification cost vector
//! `g = f - P^T f` measures how much `p` improves each labeling:
//! `E_g(x) = E_f(x) - E_f(p(x))`. The reduced vector `g_bar` keeps the unary
//! part of `g` and replaces each pairwise table by
//!
//! ```text
//!   0                                  i not in Y_u, j not in Y_v
//!   D_vu(j)                            i not in Y_u, j in Y_v
//!   D_uv(i)                            i in Y_u,     j not in Y_v
//!   min(g_uv(i,j), D_uv(i) + D_vu(j))  i in Y_u,     j in Y_v
//! ```
//!
//! with `D_uv(i) = min_{j' not in Y_v} g_uv(i, j')` and symmetrically for
//! `D_vu`. All mixed differences that pair a movable label with an immovable
//! one are then nonnegative.

use crate::error::Result;
use crate::model::GraphicalModel;
use crate::substitution::SubsetToOne;

/// `g = f - P^T f`, with zero constant.
pub fn verification_costs(f: &GraphicalModel, p: &SubsetToOne) -> Result<GraphicalModel> {
    let pf = p.pullback(f)?;
    let mut g = f.clone();
    g.set_constant(0.0);
    for v in 0..f.num_nodes() {
        let t = f
            .unary(v)
            .iter()
            .zip(pf.unary(v))
            .map(|(a, b)| a - b)
            .collect();
        g.set_unary(v, t)?;
    }
    for e in 0..f.num_edges() {
        let t = f
            .pairwise(e)
            .iter()
            .zip(pf.pairwise(e))
            .map(|(a, b)| a - b)
            .collect();
        g.set_pairwise(e, t)?;
    }
    Ok(g)
}

/// The reduced verification problem for one substitution.
#[derive(Debug, Clone)]
pub struct ReducedCosts {
    model: GraphicalModel,
    sub: SubsetToOne,
    movable: Vec<Vec<bool>>,
    delta_tail: Vec<Vec<f64>>,
    delta_head: Vec<Vec<f64>>,
    anchor: Vec<f64>,
    restricted: Vec<Vec<f64>>,
}

impl ReducedCosts {
    /// The cost vector `g_bar` as a model with the structure of `f`.
    pub fn model(&self) -> &GraphicalModel {
        &self.model
    }

    pub fn substitution(&self) -> &SubsetToOne {
        &self.sub
    }

    #[inline]
    pub fn is_movable(&self, v: usize, i: usize) -> bool {
        self.movable[v][i]
    }

    pub fn movable_mask(&self, v: usize) -> &[bool] {
        &self.movable[v]
    }

    /// `D_uv(i)` for the tail `u` of edge `e` (zero on immovable labels).
    pub fn delta_tail(&self, e: usize) -> &[f64] {
        &self.delta_tail[e]
    }

    /// `D_vu(j)` for the head `v` of edge `e` (zero on immovable labels).
    pub fn delta_head(&self, e: usize) -> &[f64] {
        &self.delta_head[e]
    }

    /// Read-only view of one edge in the form used by reduced message passing.
    pub fn edge_view(&self, e: usize) -> EdgeReduction<'_> {
        let (u, v) = self.model.edge(e);
        EdgeReduction {
            tail_set: self.sub.eliminated(u),
            head_set: self.sub.eliminated(v),
            tail_rep: self.sub.test_labeling()[u],
            head_rep: self.sub.test_labeling()[v],
            delta_tail: &self.delta_tail[e],
            delta_head: &self.delta_head[e],
            anchor: self.anchor[e],
            restricted: &self.restricted[e],
        }
    }
}

/// The pieces of a reduced edge term: the sets `Y_u`, `Y_v`, the `D` vectors,
/// the anchor `f_uv(y_u, y_v)` and `f_uv` restricted to `Y_u x Y_v`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeReduction<'a> {
    pub tail_set: &'a [usize],
    pub head_set: &'a [usize],
    pub tail_rep: usize,
    pub head_rep: usize,
    pub delta_tail: &'a [f64],
    pub delta_head: &'a [f64],
    pub anchor: f64,
    /// Row-major over `tail_set x head_set`.
    pub restricted: &'a [f64],
}

/// Builds `g_bar` directly from `f` and the sets of `p`.
pub fn reduce(f: &GraphicalModel, p: &SubsetToOne) -> Result<ReducedCosts> {
    p.check_model(f)?;
    let y = p.test_labeling();
    let movable: Vec<Vec<bool>> = (0..f.num_nodes())
        .map(|v| {
            (0..f.num_labels(v))
                .map(|i| p.is_eliminated(v, i))
                .collect()
        })
        .collect();

    let mut model = f.zeroed();
    for v in 0..f.num_nodes() {
        let fy = f.unary(v)[y[v]];
        let t = (0..f.num_labels(v))
            .map(|i| {
                if movable[v][i] {
                    f.unary(v)[i] - fy
                } else {
                    0.0
                }
            })
            .collect();
        model.set_unary(v, t)?;
    }

    let mut delta_tail = Vec::with_capacity(f.num_edges());
    let mut delta_head = Vec::with_capacity(f.num_edges());
    let mut anchor = Vec::with_capacity(f.num_edges());
    let mut restricted = Vec::with_capacity(f.num_edges());
    for (e, &(u, v)) in f.edges().iter().enumerate() {
        let (ku, kv) = (f.num_labels(u), f.num_labels(v));
        let (yu, yv) = (y[u], y[v]);
        let c = f.pair(e, yu, yv);

        let mut dt = vec![0.0; ku];
        for &i in p.eliminated(u) {
            dt[i] = (0..kv)
                .filter(|&j| !movable[v][j])
                .map(|j| f.pair(e, i, j) - f.pair(e, yu, j))
                .fold(f64::INFINITY, f64::min);
            debug_assert!(dt[i].is_finite(), "immovable set always contains y_v");
        }
        let mut dh = vec![0.0; kv];
        for &j in p.eliminated(v) {
            dh[j] = (0..ku)
                .filter(|&i| !movable[u][i])
                .map(|i| f.pair(e, i, j) - f.pair(e, i, yv))
                .fold(f64::INFINITY, f64::min);
            debug_assert!(dh[j].is_finite(), "immovable set always contains y_u");
        }

        let mut table = vec![0.0; ku * kv];
        for i in 0..ku {
            for j in 0..kv {
                table[i * kv + j] = match (movable[u][i], movable[v][j]) {
                    (false, false) => 0.0,
                    (false, true) => dh[j],
                    (true, false) => dt[i],
                    (true, true) => (f.pair(e, i, j) - c).min(dt[i] + dh[j]),
                };
            }
        }
        model.set_pairwise(e, table)?;

        let mut r = Vec::with_capacity(p.eliminated(u).len() * p.eliminated(v).len());
        for &i in p.eliminated(u) {
            for &j in p.eliminated(v) {
                r.push(f.pair(e, i, j));
            }
        }
        delta_tail.push(dt);
        delta_head.push(dh);
        anchor.push(c);
        restricted.push(r);
    }

    Ok(ReducedCosts {
        model,
        sub: p.clone(),
        movable,
        delta_tail,
        delta_head,
        anchor,
        restricted,
    })
}

/// Second route to `g_bar`: materialize `g` and truncate it table by table.
pub fn reduce_from_verification_costs(
    f: &GraphicalModel,
    p: &SubsetToOne,
) -> Result<GraphicalModel> {
    let g = verification_costs(f, p)?;
    let mut out = g.clone();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let (ku, kv) = (g.num_labels(u), g.num_labels(v));
        let mu = |i| p.is_eliminated(u, i);
        let mv = |j| p.is_eliminated(v, j);
        let d_head = |j| {
            (0..ku)
                .filter(|&i| !mu(i))
                .map(|i| g.pair(e, i, j))
                .fold(f64::INFINITY, f64::min)
        };
        let d_tail = |i| {
            (0..kv)
                .filter(|&j| !mv(j))
                .map(|j| g.pair(e, i, j))
                .fold(f64::INFINITY, f64::min)
        };
        let mut t = vec![0.0; ku * kv];
        for i in 0..ku {
            for j in 0..kv {
                t[i * kv + j] = match (mu(i), mv(j)) {
                    (false, false) => 0.0,
                    (false, true) => d_head(j),
                    (true, false) => d_tail(i),
                    (true, true) => g.pair(e, i, j).min(d_tail(i) + d_head(j)),
                };
            }
        }
        out.set_pairwise(e, t)?;
    }
    Ok(out)
}

/// `g_bar` with the immovable labels of each node merged into `y_v`.
#[derive(Debug, Clone)]
pub struct Contracted {
    pub model: GraphicalModel,
    /// `labels[v][k]` is the original label represented by contracted label `k`;
    /// the representative `y_v` stands for every immovable label.
    pub labels: Vec<Vec<usize>>,
}

impl Contracted {
    /// Maps an original labeling to the contracted one.
    pub fn contract_labeling(&self, sub: &SubsetToOne, x: &[usize]) -> Vec<usize> {
        x.iter()
            .enumerate()
            .map(|(v, &i)| {
                let target = if sub.is_eliminated(v, i) {
                    i
                } else {
                    sub.test_labeling()[v]
                };
                self.labels[v]
                    .binary_search(&target)
                    .expect("label present")
            })
            .collect()
    }
}

pub fn contract(r: &ReducedCosts) -> Result<Contracted> {
    let sub = r.substitution();
    let labels: Vec<Vec<usize>> = (0..r.model.num_nodes())
        .map(|v| {
            let mut ls = sub.eliminated(v).to_vec();
            ls.push(sub.test_labeling()[v]);
            ls.sort_unstable();
            ls
        })
        .collect();
    let model = r.model.restrict(&labels)?;
    Ok(Contracted { model, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{for_each_labeling, Labeling};

    fn worked_example() -> (GraphicalModel, SubsetToOne) {
        let mut f = GraphicalModel::new(vec![2, 2]).unwrap();
        f.add_edge(0, 1, vec![0.0, 4.0, 3.0, 10.0]).unwrap();
        let p = SubsetToOne::new(Labeling(vec![0, 0]), vec![vec![1], vec![1]]).unwrap();
        (f, p)
    }

    #[test]
    fn identity_gives_zero_costs() {
        let (f, _) = worked_example();
        let p = SubsetToOne::identity(Labeling(vec![1, 0]));
        let g = verification_costs(&f, &p).unwrap();
        assert_eq!(g, f.zeroed());
        let r = reduce(&f, &p).unwrap();
        assert_eq!(r.model(), &f.zeroed());
    }

    #[test]
    fn worked_reduction() {
        let (f, p) = worked_example();
        let r = reduce(&f, &p).unwrap();
        assert_eq!(r.delta_tail(0), &[0.0, 3.0]);
        assert_eq!(r.delta_head(0), &[0.0, 4.0]);
        assert_eq!(r.model().pairwise(0), &[0.0, 4.0, 3.0, 7.0]);
        assert_eq!(reduce_from_verification_costs(&f, &p).unwrap(), *r.model());
    }

    #[test]
    fn contraction_sizes_and_minimum() {
        let mut f = GraphicalModel::new(vec![5, 3]).unwrap();
        f.set_unary(0, vec![3.0, -1.0, 2.0, 0.0, 4.0]).unwrap();
        f.add_edge(0, 1, (0..15).map(|t| ((t * 7) % 5) as f64 - 2.0).collect())
            .unwrap();
        let p = SubsetToOne::new(Labeling(vec![2, 0]), vec![vec![1], vec![1, 2]]).unwrap();
        let r = reduce(&f, &p).unwrap();
        let c = contract(&r).unwrap();
        assert_eq!(c.model.labels(), &[2, 3]);
        let mut orig = f64::INFINITY;
        for_each_labeling(f.labels(), |x| {
            let e = r.model().energy(x).unwrap();
            orig = orig.min(e);
            let cx = c.contract_labeling(&p, x);
            assert_eq!(c.model.energy(&cx).unwrap(), e);
        });
        let mut con = f64::INFINITY;
        for_each_labeling(c.model.labels(), |x| {
            con = con.min(c.model.energy(x).unwrap())
        });
        assert_eq!(orig, con);
    }
}
