//! Sharp comparison between the mean absolute value and the infimum of
//! mean-zero convex functions on bounded polytopes, together with the toric
//! dictionary that turns these inequalities into statements about the `d1`
//! metric, the Monge-Ampère energy and the `J` functional.
//!
//! Layout:
//! - [`polytope`]: bounded convex polytopes (V/H representations, volume,
//!   triangulation, uniform sampling);
//! - [`convexfn`]: max-of-affine convex functions and their elementary queries;
//! - [`legendre`]: discrete Legendre-Fenchel transforms on regular grids;
//! - [`integrate`]: certified integration over polytopes;
//! - [`inequality`]: the sharp double inequality, extremizers and scans;
//! - [`toric`]: toric fixtures, symplectic potentials, `d1`, `I`, `J`;
//! - [`rays`]: toric geodesic rays and the radial inequality.

pub mod convexfn;
pub mod error;
pub mod inequality;
pub mod integrate;
pub mod legendre;
mod linalg;
pub mod polytope;
pub mod rays;
pub mod toric;

pub use convexfn::{AffinePiece, FunctionSpec, MaxAffine, PiecewiseDecl};
pub use error::{Error, Result};
pub use inequality::{InequalityReport, Ratio};
pub use legendre::GridFunction;
pub use polytope::{Halfspace, Polytope, Simplex};
pub use rays::ToricRay;
pub use toric::{FixtureKind, ToricFixture, ToricPotential};
