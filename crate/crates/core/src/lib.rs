//! Support recovery for sparse multidimensional signals from their
//! pairwise-difference sets.
//!
//! Given the support `W` of an autocorrelation (the set of all pairwise
//! differences of an unknown lattice set `V`, without multiplicity), the
//! solver in [`search`] recovers `V` up to a shift and a global sign flip.
//! It orders `W` along random directions, runs one intersection step per
//! direction, and combines the results with a pruned breadth-first search
//! over relative orientations.
//!
//! The remaining modules provide the pieces needed to exercise the solver:
//! random scene generation ([`scene`]), a noisy phase-retrieval front end
//! ([`noise`]), an exhaustive reference solver for small inputs ([`oracle`])
//! and a batch experiment runner ([`harness`]).

pub mod error;
pub mod format;
pub mod harness;
pub mod lattice;
pub mod noise;
pub mod oracle;
pub mod projection;
pub mod rng;
pub mod scene;
pub mod search;

pub use error::{Error, Result};
pub use lattice::{difference_set, equivalent, k_min, DifferenceSet, LatticePoint, PointSet};
pub use projection::{Direction, IntersectionSet, OrderedHalfSet};
pub use search::{mistr, mistr_with_directions, MistrParams, MistrResult, SearchStats};
