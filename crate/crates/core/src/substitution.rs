//! Subset-to-one substitutions: every label of a per-node set `Y_v` is mapped
//! to the test label `y_v`, all other labels are left in place.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubstitutionJson", into = "SubstitutionJson")]
pub struct SubsetToOne {
    y: Labeling,
    eliminated: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct SubstitutionJson {
    y: Vec<usize>,
    eliminated: Vec<Vec<usize>>,
}

impl TryFrom<SubstitutionJson> for SubsetToOne {
    type Error = Error;
    fn try_from(j: SubstitutionJson) -> Result<Self> {
        SubsetToOne::new(Labeling(j.y), j.eliminated)
    }
}

impl From<SubsetToOne> for SubstitutionJson {
    fn from(p: SubsetToOne) -> Self {
        SubstitutionJson {
            y: p.y.0,
            eliminated: p.eliminated,
        }
    }
}

impl SubsetToOne {
    /// Builds a substitution from a test labeling and the per-node label sets
    /// to be replaced. Sets are sorted and deduplicated.
    pub fn new(y: Labeling, mut eliminated: Vec<Vec<usize>>) -> Result<Self> {
        if eliminated.len() != y.len() {
            return Err(Error::shape(
                "eliminated sets do not match the test labeling",
            ));
        }
        for (v, set) in eliminated.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.binary_search(&y[v]).is_ok() {
                return Err(Error::InvalidModel(format!(
                    "node {v}: test label {} cannot be in its own eliminated set",
                    y[v]
                )));
            }
        }
        Ok(SubsetToOne { y, eliminated })
    }

    /// The identity map with test labeling `y`.
    pub fn identity(y: Labeling) -> Self {
        let n = y.len();
        SubsetToOne {
            y,
            eliminated: vec![Vec::new(); n],
        }
    }

    /// Every label except `y_v` mapped to `y_v`.
    pub fn all_to_one(y: Labeling, labels: &[usize]) -> Result<Self> {
        if y.len() != labels.len() || y.iter().zip(labels).any(|(&yv, &k)| yv >= k) {
            return Err(Error::shape("test labeling does not fit the label counts"));
        }
        let eliminated = y
            .iter()
            .zip(labels)
            .map(|(&yv, &k)| (0..k).filter(|&i| i != yv).collect())
            .collect();
        Ok(SubsetToOne { y, eliminated })
    }

    pub fn check_model(&self, model: &GraphicalModel) -> Result<()> {
        model.check_labeling(&self.y)?;
        for (v, set) in self.eliminated.iter().enumerate() {
            if set.last().is_some_and(|&i| i >= model.num_labels(v)) {
                return Err(Error::shape(format!(
                    "eliminated label out of range at node {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn test_labeling(&self) -> &Labeling {
        &self.y
    }

    pub fn num_nodes(&self) -> usize {
        self.y.len()
    }

    /// The sorted set `Y_v`.
    pub fn eliminated(&self, v: usize) -> &[usize] {
        &self.eliminated[v]
    }

    pub fn eliminated_sets(&self) -> &[Vec<usize>] {
        &self.eliminated
    }

    #[inline]
    pub fn is_eliminated(&self, v: usize, i: usize) -> bool {
        self.eliminated[v].binary_search(&i).is_ok()
    }

    pub fn is_identity(&self) -> bool {
        self.eliminated.iter().all(Vec::is_empty)
    }

    pub fn total_eliminated(&self) -> usize {
        self.eliminated.iter().map(Vec::len).sum()
    }

    /// Removes `i` from `Y_v`; returns whether it was present.
    pub fn keep(&mut self, v: usize, i: usize) -> bool {
        match self.eliminated[v].binary_search(&i) {
            Ok(pos) => {
                self.eliminated[v].remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// `p_v(i)`.
    #[inline]
    pub fn map_label(&self, v: usize, i: usize) -> usize {
        if self.is_eliminated(v, i) {
            self.y[v]
        } else {
            i
        }
    }

    pub fn apply(&self, x: &[usize]) -> Result<Labeling> {
        if x.len() != self.y.len() {
            return Err(Error::shape(
                "labeling length differs from the substitution",
            ));
        }
        Ok(Labeling(
            x.iter()
                .enumerate()
                .map(|(v, &i)| self.map_label(v, i))
                .collect(),
        ))
    }

    /// The pulled-back cost vector `P^T f`, satisfying
    /// `E_{P^T f}(x) = E_f(p(x))` for every labeling.
    pub fn pullback(&self, f: &GraphicalModel) -> Result<GraphicalModel> {
        self.check_model(f)?;
        let mut out = f.clone();
        for v in 0..f.num_nodes() {
            let t: Vec<f64> = (0..f.num_labels(v))
                .map(|i| f.unary(v)[self.map_label(v, i)])
                .collect();
            out.set_unary(v, t)?;
        }
        for (e, &(u, v)) in f.edges().iter().enumerate() {
            let mut t = Vec::with_capacity(f.pairwise(e).len());
            for i in 0..f.num_labels(u) {
                for j in 0..f.num_labels(v) {
                    t.push(f.pair(e, self.map_label(u, i), self.map_label(v, j)));
                }
            }
            out.set_pairwise(e, t)?;
        }
        Ok(out)
    }

    /// `self <= other` in the "is better or equal" order for a shared test
    /// labeling: every label moved by `self` is also moved by `other`.
    pub fn leq(&self, other: &SubsetToOne) -> Result<bool> {
        if self.y != other.y {
            return Err(Error::TestLabelingMismatch);
        }
        Ok(self
            .eliminated
            .iter()
            .zip(&other.eliminated)
            .all(|(a, b)| a.iter().all(|i| b.binary_search(i).is_ok())))
    }

    /// Fraction of eliminable labels eliminated, and the logarithmic
    /// reduction of the labeling space.
    pub fn measures(&self, labels: &[usize]) -> Measures {
        let mut removed = 0usize;
        let mut removable = 0usize;
        let mut log_left = 0.0;
        let mut log_all = 0.0;
        for (v, &k) in labels.iter().enumerate() {
            if k <= 1 {
                continue;
            }
            removed += self.eliminated[v].len();
            removable += k - 1;
            log_left += ((k - self.eliminated[v].len()) as f64).ln();
            log_all += (k as f64).ln();
        }
        if removable == 0 {
            return Measures {
                label_fraction: 1.0,
                log_fraction: 1.0,
            };
        }
        Measures {
            label_fraction: removed as f64 / removable as f64,
            log_fraction: 1.0 - log_left / log_all,
        }
    }

    /// Labels that survive at each node (`X_v \ Y_v`).
    pub fn remaining(&self, labels: &[usize]) -> Vec<Vec<usize>> {
        labels
            .iter()
            .enumerate()
            .map(|(v, &k)| (0..k).filter(|&i| !self.is_eliminated(v, i)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    pub label_fraction: f64,
    pub log_fraction: f64,
}
