//! Exact polytope analysis: hulls, face lattices, f-vectors, face-number
//! bounds, Monte Carlo solid angles and projection shadows.

pub mod angles;
pub mod bitset;
pub mod bounds;
pub mod corpus;
pub mod error;
pub mod exact;
pub mod generators;
pub mod lattice;
pub mod polytope;
pub mod projection;

pub use bitset::IndexSet;
pub use error::{PolyError, Result};
pub use exact::{Hyperplane, Scalar, Vector};
pub use lattice::{f_vector, face_lattice, FVector, Face, FaceLattice};
pub use polytope::{hull_from_points, hull_with_sources, FacetRecord, Polytope};
