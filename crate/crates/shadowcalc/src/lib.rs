//! Combinatorics of branched shadows: boundary-decorated almost-special
//! polyhedra with gleams, branchings, shadows of link diagrams, surgeries,
//! complexity and volume bounds, and a capping census.

pub mod branching;
pub mod build;
pub mod census;
pub mod group;
pub mod iso;
pub mod link;
mod normalize;
pub mod poly;
pub mod script;
pub mod volume;

pub use branching::Branching;
pub use poly::{HalfInt, ShadowPolyhedron};
