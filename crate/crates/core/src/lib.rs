//! Partial optimality for pairwise discrete energy minimization.
//!
//! Given a model and a test labeling `y`, the crate searches for a
//! subset-to-one substitution that maps labels onto `y` without increasing the
//! energy of any labeling. Labels moved by such a substitution cannot appear in
//! any minimizer and can be dropped from the problem.
//!
//! Three drivers are available through [`persist::find_persistency`]:
//! an exact one backed by a dense simplex oracle (small models only), and two
//! driven by sequential tree-reweighted message passing on the reduced
//! verification problem.

pub mod error;
pub mod lp_oracle;
pub mod mincut;
pub mod model;
pub mod persist;
pub mod substitution;
pub mod trws;
pub mod verification;

pub use error::{Error, Result};
pub use model::{GraphicalModel, Labeling, LiftedPoint, Reparametrization};
pub use substitution::{Measures, SubsetToOne};
