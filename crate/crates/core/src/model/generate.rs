use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GraphicalModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `f_uv(i, j) = lambda_uv * [i != j]`.
    Potts,
    /// Every pairwise entry drawn independently.
    Full,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potts" => Ok(Family::Potts),
            "full" => Ok(Family::Full),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

/// Parameters of a random 4-connected grid instance. Costs are uniform
/// integers in the inclusive `cost_range`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub family: Family,
    pub rows: usize,
    pub cols: usize,
    pub labels: usize,
    pub cost_range: (i64, i64),
    pub seed: u64,
}

impl GridSpec {
    pub fn new(family: Family, rows: usize, cols: usize, labels: usize, seed: u64) -> Self {
        GridSpec {
            family,
            rows,
            cols,
            labels,
            cost_range: (0, 100),
            seed,
        }
    }
}

/// Node `(r, c)` is `r * cols + c`; edges go right then down from each node
/// in row-major order.
pub fn generate_grid(spec: &GridSpec) -> Result<GraphicalModel> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::Config(
            "grid needs at least one row and one column".into(),
        ));
    }
    if spec.labels < 2 {
        return Err(Error::Config("grid nodes need at least two labels".into()));
    }
    let (lo, hi) = spec.cost_range;
    if lo > hi {
        return Err(Error::Config(format!("empty cost range [{lo}, {hi}]")));
    }
    let k = spec.labels;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = move || rng.gen_range(lo..=hi) as f64;

    let n = spec.rows * spec.cols;
    let mut model = GraphicalModel::new(vec![k; n])?;
    for v in 0..n {
        model.set_unary(v, (0..k).map(|_| draw()).collect())?;
    }
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let u = r * spec.cols + c;
            let mut targets = Vec::with_capacity(2);
            if c + 1 < spec.cols {
                targets.push(u + 1);
            }
            if r + 1 < spec.rows {
                targets.push(u + spec.cols);
            }
            for v in targets {
                let table = match spec.family {
                    Family::Full => (0..k * k).map(|_| draw()).collect(),
                    Family::Potts => {
                        let lambda = draw();
                        (0..k * k)
                            .map(|t| if t / k == t % k { 0.0 } else { lambda })
                            .collect()
                    }
                };
                model.add_edge(u, v, table)?;
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_has_no_edges() {
        let spec = GridSpec {
            family: Family::Potts,
            rows: 1,
            cols: 1,
            labels: 3,
            cost_range: (0, 10),
            seed: 4,
        };
        let m = generate_grid(&spec).unwrap();
        assert_eq!((m.num_nodes(), m.num_edges()), (1, 0));
        assert!(m.integer_costs());
    }

    #[test]
    fn grid_edge_counts() {
        for (rows, cols) in [(2, 2), (3, 5), (1, 7), (4, 1)] {
            let m = generate_grid(&GridSpec::new(Family::Full, rows, cols, 3, 1)).unwrap();
            assert_eq!(m.num_nodes(), rows * cols);
            assert_eq!(m.num_edges(), rows * (cols - 1) + cols * (rows - 1));
        }
    }

    #[test]
    fn seed_determinism() {
        let spec = GridSpec::new(Family::Potts, 4, 4, 3, 99);
        assert_eq!(generate_grid(&spec).unwrap(), generate_grid(&spec).unwrap());
        let other = GridSpec { seed: 100, ..spec };
        assert_ne!(
            generate_grid(&spec).unwrap(),
            generate_grid(&other).unwrap()
        );
    }

    #[test]
    fn potts_tables_have_zero_diagonal() {
        let spec = GridSpec {
            family: Family::Potts,
            rows: 3,
            cols: 3,
            labels: 4,
            cost_range: (1, 9),
            seed: 5,
        };
        let m = generate_grid(&spec).unwrap();
        for e in 0..m.num_edges() {
            let lambda = m.pair(e, 0, 1);
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(m.pair(e, i, j), if i == j { 0.0 } else { lambda });
                }
            }
        }
    }

    #[test]
    fn invalid_sizes() {
        assert!(generate_grid(&GridSpec::new(Family::Potts, 0, 3, 3, 0)).is_err());
        assert!(generate_grid(&GridSpec::new(Family::Potts, 3, 3, 1, 0)).is_err());
    }
}
