//! Exact reference machinery for small models.
//!
//! Everything here is exponential or dense-LP based and only meant for models
//! with a handful of nodes. The drivers in [`crate::persist`] use it for the
//! exact mode; the test suites use it as ground truth.

pub mod simplex;

use crate::error::{Error, Result};
use crate::model::{for_each_labeling, GraphicalModel, Labeling, LiftedPoint};
use crate::substitution::SubsetToOne;
use crate::verification::verification_costs;
use simplex::Tableau;

/// Threshold above which a maximized marginal counts as nonzero.
pub const SUPPORT_TOL: f64 = 1e-7;
const REDUCED_COST_TOL: f64 = 1e-9;

/// Size caps for the exact routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_labels: usize,
    /// Cap on `prod |X_v|` for exhaustive labeling enumeration.
    pub max_labelings: u128,
    /// Cap on `sum (|X_v| - 1)` for enumerating substitutions.
    pub max_candidates: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 12,
            max_labels: 5,
            max_labelings: 10_000_000,
            max_candidates: 20,
        }
    }
}

impl OracleLimits {
    pub fn check_lp(&self, model: &GraphicalModel) -> Result<()> {
        let kmax = model.labels().iter().copied().max().unwrap_or(0);
        if model.num_nodes() > self.max_nodes || kmax > self.max_labels {
            return Err(Error::SizeLimit(format!(
                "LP oracle accepts at most {} nodes with {} labels (model has {} nodes, up to {} labels)",
                self.max_nodes,
                self.max_labels,
                model.num_nodes(),
                kmax
            )));
        }
        Ok(())
    }

    pub fn check_enumeration(&self, model: &GraphicalModel) -> Result<()> {
        let count = model.labeling_count();
        if count > self.max_labelings {
            return Err(Error::SizeLimit(format!(
                "{count} labelings exceed the enumeration cap {}",
                self.max_labelings
            )));
        }
        Ok(())
    }
}

/// The local polytope relaxation `min <g, mu>` in equality form, with the
/// constant coordinate fixed to one.
#[derive(Debug, Clone)]
pub struct LocalPolytopeLP {
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
    unary_offset: Vec<usize>,
    pair_offset: Vec<usize>,
    cols: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    constant: f64,
    /// `order[k]` is the variable placed in tableau column `k`.
    order: Vec<usize>,
}

impl LocalPolytopeLP {
    pub fn new(g: &GraphicalModel, limits: &OracleLimits) -> Result<Self> {
        limits.check_lp(g)?;
        let labels = g.labels().to_vec();
        let edges = g.edges().to_vec();
        let mut unary_offset = Vec::with_capacity(labels.len());
        let mut cols = 0;
        for &k in &labels {
            unary_offset.push(cols);
            cols += k;
        }
        let mut pair_offset = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            pair_offset.push(cols);
            cols += labels[u] * labels[v];
        }

        let mut cost = vec![0.0; cols];
        for v in 0..labels.len() {
            cost[unary_offset[v]..unary_offset[v] + labels[v]].copy_from_slice(g.unary(v));
        }
        for e in 0..edges.len() {
            let t = g.pairwise(e);
            cost[pair_offset[e]..pair_offset[e] + t.len()].copy_from_slice(t);
        }

        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for v in 0..labels.len() {
            let mut r = vec![0.0; cols];
            r[unary_offset[v]..unary_offset[v] + labels[v]]
                .iter_mut()
                .for_each(|x| *x = 1.0);
            rows.push(r);
            rhs.push(1.0);
        }
        for (e, &(u, v)) in edges.iter().enumerate() {
            let (ku, kv) = (labels[u], labels[v]);
            for i in 0..ku {
                let mut r = vec![0.0; cols];
                for j in 0..kv {
                    r[pair_offset[e] + i * kv + j] = 1.0;
                }
                r[unary_offset[u] + i] = -1.0;
                rows.push(r);
                rhs.push(0.0);
            }
            for j in 0..kv {
                let mut r = vec![0.0; cols];
                for i in 0..ku {
                    r[pair_offset[e] + i * kv + j] = 1.0;
                }
                r[unary_offset[v] + j] = -1.0;
                rows.push(r);
                rhs.push(0.0);
            }
        }
        Ok(LocalPolytopeLP {
            labels,
            edges,
            unary_offset,
            pair_offset,
            cols,
            rows,
            rhs,
            cost,
            constant: g.constant(),
            order: (0..cols).collect(),
        })
    }

    /// Reorders the tableau columns; `order[k]` becomes column `k`.
    pub fn with_column_order(mut self, order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; self.cols];
        if order.len() != self.cols
            || !order
                .iter()
                .all(|&c| c < self.cols && !std::mem::replace(&mut seen[c], true))
        {
            return Err(Error::Config("column order is not a permutation".into()));
        }
        self.order = order;
        Ok(self)
    }

    pub fn num_variables(&self) -> usize {
        self.cols
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    /// Index of `mu_v(i)`.
    pub fn unary_var(&self, v: usize, i: usize) -> usize {
        self.unary_offset[v] + i
    }

    /// Index of `mu_uv(i, j)` for edge `e`.
    pub fn pair_var(&self, e: usize, i: usize, j: usize) -> usize {
        let (_, v) = self.edges[e];
        self.pair_offset[e] + i * self.labels[v] + j
    }

    /// Constraint row `r` over variables, and its right-hand side.
    pub fn constraint(&self, r: usize) -> (&[f64], f64) {
        (&self.rows[r], self.rhs[r])
    }

    fn permuted(&self, x: &[f64]) -> Vec<f64> {
        self.order.iter().map(|&c| x[c]).collect()
    }

    fn unpermuted(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for (k, &c) in self.order.iter().enumerate() {
            x[c] = y[k];
        }
        x
    }

    fn point(&self, x: &[f64]) -> LiftedPoint {
        LiftedPoint {
            constant: 1.0,
            unary: (0..self.labels.len())
                .map(|v| x[self.unary_offset[v]..self.unary_offset[v] + self.labels[v]].to_vec())
                .collect(),
            pairwise: self
                .edges
                .iter()
                .enumerate()
                .map(|(e, &(u, v))| {
                    x[self.pair_offset[e]..self.pair_offset[e] + self.labels[u] * self.labels[v]]
                        .to_vec()
                })
                .collect(),
        }
    }

    fn start(&self) -> Result<Tableau> {
        let a: Vec<Vec<f64>> = self.rows.iter().map(|r| self.permuted(r)).collect();
        Tableau::feasible(&a, &self.rhs, self.cols)
    }
}

/// Optimal value (including the model constant) and one optimal vertex.
pub fn solve_lp(lp: &LocalPolytopeLP) -> Result<(f64, LiftedPoint)> {
    let mut tab = lp.start()?;
    let c = lp.permuted(&lp.cost);
    let value = tab.optimize(&c, &vec![true; lp.cols])?;
    Ok((
        value + lp.constant,
        lp.point(&lp.unpermuted(&tab.solution())),
    ))
}

/// Tableau positioned at an optimal vertex with the non-optimal columns barred,
/// so that any further optimization stays inside the optimal face.
struct OptimalFace<'a> {
    lp: &'a LocalPolytopeLP,
    tab: Tableau,
    allowed: Vec<bool>,
    value: f64,
}

impl<'a> OptimalFace<'a> {
    fn new(lp: &'a LocalPolytopeLP) -> Result<Self> {
        let mut tab = lp.start()?;
        let c = lp.permuted(&lp.cost);
        let value = tab.optimize(&c, &vec![true; lp.cols])?;
        let scale = 1.0 + lp.cost.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        let allowed = tab
            .reduced_costs(&c)
            .iter()
            .map(|&d| d <= REDUCED_COST_TOL * scale)
            .collect();
        Ok(OptimalFace {
            lp,
            tab,
            allowed,
            value: value + lp.constant,
        })
    }

    /// Maximizes the sum of the given unary marginals over the optimal face
    /// and returns the maximum together with the maximizing point.
    fn maximize(&mut self, targets: &[(usize, usize)]) -> Result<(f64, Vec<f64>)> {
        let mut c = vec![0.0; self.lp.cols];
        for &(v, i) in targets {
            c[self.lp.unary_var(v, i)] = -1.0;
        }
        let c = self.lp.permuted(&c);
        let value = -self.tab.optimize(&c, &self.allowed)?;
        Ok((value, self.lp.unpermuted(&self.tab.solution())))
    }
}

/// Per-node label sets `O*_v` used by some optimal solution of the relaxation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSets(pub Vec<Vec<usize>>);

impl SupportSets {
    pub fn get(&self, v: usize) -> &[usize] {
        &self.0[v]
    }

    pub fn contains(&self, v: usize, i: usize) -> bool {
        self.0[v].binary_search(&i).is_ok()
    }
}

pub fn support_sets(g: &GraphicalModel, limits: &OracleLimits) -> Result<SupportSets> {
    support_sets_of(&LocalPolytopeLP::new(g, limits)?)
}

/// Exact supports of the optimal face.
///
/// Columns with positive reduced cost at an optimal basis are zero on the whole
/// optimal face; the remaining columns span it. Inside the face, the summed
/// marginal of all labels not yet seen is maximized repeatedly. A per-label
/// maximization settles the rest if the aggregate stalls.
pub fn support_sets_of(lp: &LocalPolytopeLP) -> Result<SupportSets> {
    Ok(optimal_support(lp)?.1)
}

/// Optimal value together with the supports of the optimal face.
pub fn optimal_support(lp: &LocalPolytopeLP) -> Result<(f64, SupportSets)> {
    let mut face = OptimalFace::new(lp)?;
    let n = lp.labels.len();
    let mut found: Vec<Vec<bool>> = lp.labels.iter().map(|&k| vec![false; k]).collect();
    let mark = |x: &[f64], found: &mut Vec<Vec<bool>>| {
        let mut new = false;
        for v in 0..n {
            for i in 0..lp.labels[v] {
                if !found[v][i] && x[lp.unary_var(v, i)] > SUPPORT_TOL {
                    found[v][i] = true;
                    new = true;
                }
            }
        }
        new
    };
    mark(&lp.unpermuted(&face.tab.solution()), &mut found);

    loop {
        let unknown: Vec<(usize, usize)> = (0..n)
            .flat_map(|v| (0..lp.labels[v]).map(move |i| (v, i)))
            .filter(|&(v, i)| !found[v][i])
            .collect();
        if unknown.is_empty() {
            break;
        }
        let (best, x) = face.maximize(&unknown)?;
        if best <= SUPPORT_TOL {
            break;
        }
        if !mark(&x, &mut found) {
            for &(v, i) in &unknown {
                if !found[v][i] {
                    let (m, x) = face.maximize(&[(v, i)])?;
                    if m > SUPPORT_TOL {
                        mark(&x, &mut found);
                    }
                }
            }
            break;
        }
    }
    let sets = found
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    Ok((face.value, SupportSets(sets)))
}

fn strict_margin(f: &GraphicalModel) -> f64 {
    if f.integer_costs() {
        0.0
    } else {
        1e-9 * (1.0 + f.cost_scale())
    }
}

/// A labeling `x` with `p(x) != x` and `E(p(x)) >= E(x)`, if one exists.
pub fn improving_counterexample(
    f: &GraphicalModel,
    p: &SubsetToOne,
    limits: &OracleLimits,
) -> Result<Option<Labeling>> {
    p.check_model(f)?;
    limits.check_enumeration(f)?;
    let eps = strict_margin(f);
    let mut witness = None;
    let mut px = vec![0; f.num_nodes()];
    for_each_labeling(f.labels(), |x| {
        if witness.is_some() {
            return;
        }
        let mut moved = false;
        for (v, &xv) in x.iter().enumerate() {
            px[v] = p.map_label(v, xv);
            moved |= px[v] != xv;
        }
        if moved && f.energy_unchecked(x) - f.energy_unchecked(&px) <= eps {
            witness = Some(Labeling(x.to_vec()));
        }
    });
    Ok(witness)
}

/// `E(p(x)) < E(x)` for every labeling that `p` moves.
pub fn is_strictly_improving_brute(
    f: &GraphicalModel,
    p: &SubsetToOne,
    limits: &OracleLimits,
) -> Result<bool> {
    Ok(improving_counterexample(f, p, limits)?.is_none())
}

/// Membership in the relaxed improving set: every label in the optimal support
/// of `g = f - P^T f` is a fixed point of `p`.
pub fn is_relaxed_improving_exact(
    f: &GraphicalModel,
    p: &SubsetToOne,
    limits: &OracleLimits,
) -> Result<bool> {
    let g = verification_costs(f, p)?;
    let o = support_sets(&g, limits)?;
    Ok((0..f.num_nodes()).all(|v| o.get(v).iter().all(|&i| !p.is_eliminated(v, i))))
}

/// Same verdict as [`is_relaxed_improving_exact`] from one face maximization
/// instead of full support extraction.
pub fn is_relaxed_improving_fast(
    f: &GraphicalModel,
    p: &SubsetToOne,
    limits: &OracleLimits,
) -> Result<bool> {
    if p.is_identity() {
        return Ok(true);
    }
    let g = verification_costs(f, p)?;
    let lp = LocalPolytopeLP::new(&g, limits)?;
    let mut face = OptimalFace::new(&lp)?;
    if face.value < -SUPPORT_TOL * (1.0 + g.cost_scale()) {
        return Ok(false);
    }
    let targets: Vec<(usize, usize)> = (0..f.num_nodes())
        .flat_map(|v| p.eliminated(v).iter().map(move |&i| (v, i)))
        .collect();
    let (m, _) = face.maximize(&targets)?;
    Ok(m <= SUPPORT_TOL)
}

/// Output of the exact iterative pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct Algorithm1Output {
    pub substitution: SubsetToOne,
    /// The sets `Y` at the start of each iteration.
    pub rounds: Vec<Vec<Vec<usize>>>,
    /// Optimal value of each verification LP solved.
    pub values: Vec<f64>,
}

/// Exact iterative pruning: start from `Y_v = X_v \ {y_v}` and remove the
/// optimal support of the verification LP until it no longer meets `Y`.
pub fn algorithm1(
    f: &GraphicalModel,
    y: &Labeling,
    limits: &OracleLimits,
) -> Result<Algorithm1Output> {
    limits.check_lp(f)?;
    let mut p = SubsetToOne::all_to_one(y.clone(), f.labels())?;
    let mut rounds = Vec::new();
    let mut values = Vec::new();
    while !p.is_identity() {
        rounds.push(p.eliminated_sets().to_vec());
        let g = verification_costs(f, &p)?;
        let (value, o) = optimal_support(&LocalPolytopeLP::new(&g, limits)?)?;
        values.push(value);
        let mut changed = false;
        for v in 0..f.num_nodes() {
            for &i in o.get(v) {
                changed |= p.keep(v, i);
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Algorithm1Output {
        substitution: p,
        rounds,
        values,
    })
}

/// The largest member of the relaxed improving set among substitutions onto
/// `y`, by exhaustive enumeration of the sets `Y_v`.
pub fn max_persistency_brute(
    f: &GraphicalModel,
    y: &Labeling,
    limits: &OracleLimits,
) -> Result<SubsetToOne> {
    limits.check_lp(f)?;
    limits.check_enumeration(f)?;
    let candidates: Vec<(usize, usize)> = (0..f.num_nodes())
        .flat_map(|v| {
            (0..f.num_labels(v))
                .filter(move |&i| i != y[v])
                .map(move |i| (v, i))
        })
        .collect();
    let n = candidates.len();
    if n > limits.max_candidates {
        return Err(Error::SizeLimit(format!(
            "{n} eliminable labels exceed the enumeration cap {}",
            limits.max_candidates
        )));
    }
    let build = |mask: u32| {
        let mut sets = vec![Vec::new(); f.num_nodes()];
        for (b, &(v, i)) in candidates.iter().enumerate() {
            if mask >> b & 1 == 1 {
                sets[v].push(i);
            }
        }
        SubsetToOne::new(y.clone(), sets)
    };
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for mask in 0..(1u32 << n) {
        by_size[mask.count_ones() as usize].push(mask);
    }
    for level in by_size.iter().rev() {
        let mut members = Vec::new();
        for &mask in level {
            let p = build(mask)?;
            // Relaxed improving implies strictly improving on labelings.
            if is_strictly_improving_brute(f, &p, limits)?
                && is_relaxed_improving_fast(f, &p, limits)?
            {
                members.push(p);
            }
        }
        match members.len() {
            0 => continue,
            1 => return Ok(members.pop().unwrap()),
            k => {
                return Err(Error::Numerical(format!(
                    "{k} distinct maximal relaxed-improving substitutions found"
                )))
            }
        }
    }
    unreachable!("the identity substitution is always relaxed improving")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_min(f: &GraphicalModel) -> f64 {
        let mut best = f64::INFINITY;
        for_each_labeling(f.labels(), |x| best = best.min(f.energy(x).unwrap()));
        best
    }

    fn dominant(k: usize, y: &[usize]) -> GraphicalModel {
        let mut f = GraphicalModel::new(vec![k; y.len()]).unwrap();
        for (v, &yv) in y.iter().enumerate() {
            f.set_unary(
                v,
                (0..k)
                    .map(|i| if i == yv { 0.0 } else { 5.0 + i as f64 })
                    .collect(),
            )
            .unwrap();
        }
        for v in 1..y.len() {
            f.add_edge(v - 1, v, vec![0.0; k * k]).unwrap();
        }
        f
    }

    #[test]
    fn zero_costs() {
        let mut f = GraphicalModel::new(vec![2, 3]).unwrap();
        f.add_edge(0, 1, vec![0.0; 6]).unwrap();
        let lim = OracleLimits::default();
        let (v, _) = solve_lp(&LocalPolytopeLP::new(&f, &lim).unwrap()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(
            support_sets(&f, &lim).unwrap().0,
            vec![vec![0, 1], vec![0, 1, 2]]
        );
        let out = algorithm1(&f, &Labeling(vec![0, 0]), &lim).unwrap();
        assert!(out.substitution.is_identity());
        assert!(max_persistency_brute(&f, &Labeling(vec![0, 0]), &lim)
            .unwrap()
            .is_identity());
    }

    #[test]
    fn matrix_entries_are_unit() {
        let f = dominant(3, &[0, 1, 2]);
        let lp = LocalPolytopeLP::new(&f, &OracleLimits::default()).unwrap();
        for r in 0..lp.num_constraints() {
            assert!(lp
                .constraint(r)
                .0
                .iter()
                .all(|&a| a == 0.0 || a == 1.0 || a == -1.0));
        }
    }

    #[test]
    fn chain_is_tight() {
        let mut f = GraphicalModel::new(vec![3, 3, 3]).unwrap();
        f.set_unary(0, vec![2.0, -1.0, 0.5]).unwrap();
        f.set_unary(2, vec![0.0, 3.0, -2.0]).unwrap();
        f.add_edge(0, 1, vec![1.0, 4.0, -2.0, 0.0, 2.0, 2.0, 5.0, -1.0, 0.0])
            .unwrap();
        f.add_edge(1, 2, vec![0.0, 1.0, 3.0, 2.0, -3.0, 1.0, 0.0, 0.0, 4.0])
            .unwrap();
        f.set_constant(1.5);
        let (v, _) =
            solve_lp(&LocalPolytopeLP::new(&f, &OracleLimits::default()).unwrap()).unwrap();
        assert!((v - brute_min(&f)).abs() < 1e-9);
    }

    #[test]
    fn frustrated_cycle_is_loose() {
        let mut f = GraphicalModel::new(vec![2, 2, 2]).unwrap();
        let anti = vec![1.0, 0.0, 0.0, 1.0];
        f.add_edge(0, 1, anti.clone()).unwrap();
        f.add_edge(1, 2, anti.clone()).unwrap();
        f.add_edge(0, 2, anti).unwrap();
        let (v, _) =
            solve_lp(&LocalPolytopeLP::new(&f, &OracleLimits::default()).unwrap()).unwrap();
        assert!(v < brute_min(&f) - 0.5);
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn dominant_unaries_give_singletons() {
        let y = [1, 0, 2];
        let f = dominant(3, &y);
        let lim = OracleLimits::default();
        let o = support_sets(&f, &lim).unwrap();
        assert_eq!(o.0, vec![vec![1], vec![0], vec![2]]);
        let out = algorithm1(&f, &Labeling(y.to_vec()), &lim).unwrap();
        assert_eq!(out.substitution.measures(f.labels()).label_fraction, 1.0);
        assert_eq!((out.rounds.len(), out.values.len()), (1, 1));
        let full = SubsetToOne::all_to_one(Labeling(y.to_vec()), f.labels()).unwrap();
        assert!(is_relaxed_improving_exact(&f, &full, &lim).unwrap());
        assert_eq!(
            max_persistency_brute(&f, &Labeling(y.to_vec()), &lim).unwrap(),
            full
        );
    }

    #[test]
    fn degenerate_tie_has_two_support_labels() {
        let mut f = GraphicalModel::new(vec![3, 3]).unwrap();
        f.set_unary(0, vec![1.0, 1.0, 4.0]).unwrap();
        f.set_unary(1, vec![0.0, 2.0, 2.0]).unwrap();
        f.add_edge(0, 1, vec![0.0, 3.0, 3.0, 0.0, 3.0, 3.0, 3.0, 3.0, 0.0])
            .unwrap();
        let o = support_sets(&f, &OracleLimits::default()).unwrap();
        assert_eq!(o.0, vec![vec![0, 1], vec![0]]);
    }

    #[test]
    fn column_order_does_not_change_supports() {
        let mut f = GraphicalModel::new(vec![2, 2, 2]).unwrap();
        f.add_edge(0, 1, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        f.add_edge(1, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        f.add_edge(0, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        f.set_unary(0, vec![0.0, 0.5]).unwrap();
        let lim = OracleLimits::default();
        let lp = LocalPolytopeLP::new(&f, &lim).unwrap();
        let base = support_sets_of(&lp).unwrap();
        let rev: Vec<usize> = (0..lp.num_variables()).rev().collect();
        assert_eq!(
            support_sets_of(&lp.clone().with_column_order(rev).unwrap()).unwrap(),
            base
        );
    }

    #[test]
    fn improving_checks() {
        let lim = OracleLimits::default();
        let mut f = GraphicalModel::new(vec![3, 2]).unwrap();
        // label 2 at node 0 is dominated by label 0 for every neighbour label
        f.set_unary(0, vec![0.0, 1.0, 3.0]).unwrap();
        f.add_edge(0, 1, vec![0.0, 1.0, 2.0, 0.0, 1.0, 1.0])
            .unwrap();
        let id = SubsetToOne::identity(Labeling(vec![0, 0]));
        assert!(is_strictly_improving_brute(&f, &id, &lim).unwrap());
        let dee = SubsetToOne::new(Labeling(vec![0, 0]), vec![vec![2], vec![]]).unwrap();
        assert!(is_strictly_improving_brute(&f, &dee, &lim).unwrap());
        // x* = (0, 0) with energy 0 is the unique optimum; mapping it away fails
        let away = SubsetToOne::new(Labeling(vec![1, 0]), vec![vec![0], vec![]]).unwrap();
        let w = improving_counterexample(&f, &away, &lim).unwrap().unwrap();
        assert_eq!(w[0], 0);
        assert!(!is_relaxed_improving_exact(&f, &away, &lim).unwrap());
    }

    #[test]
    fn size_limits() {
        let f = GraphicalModel::new(vec![2; 13]).unwrap();
        assert!(matches!(
            LocalPolytopeLP::new(&f, &OracleLimits::default()),
            Err(Error::SizeLimit(_))
        ));
        let f = GraphicalModel::new(vec![6]).unwrap();
        assert!(matches!(
            support_sets(&f, &OracleLimits::default()),
            Err(Error::SizeLimit(_))
        ));
    }
}
