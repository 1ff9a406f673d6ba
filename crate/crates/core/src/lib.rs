//! Clean graphs `Cl₂(R)` of finite commutative rings.
//!
//! A ring is modelled as a product of local factors `Z_{p^α}`. The vertices of
//! `Cl₂(R)` are pairs `(e, u)` of a nonzero idempotent and a unit; two distinct
//! vertices `(e, u)`, `(f, v)` are adjacent when `e·f = 0` or `u·v = 1`.
//!
//! The crate provides exhaustive constructions (adjacency bitsets, BFS, exact
//! maximum matching) next to closed-form evaluations of distances, the Wiener
//! index and the matching number, so each formula can be checked against an
//! independent oracle.

pub mod error;
pub mod exec;
pub mod graph;
pub mod matching;
pub mod ring;
pub mod verify;
pub mod wiener;

pub use error::{Error, Result};
pub use graph::{CleanGraph, CleanVertex, Distance, DistanceProfile, ExportFormat};
pub use matching::MatchingResult;
pub use ring::{FactoredRing, IdempotentTable, RingElement, RingSpec, UnitTable};
pub use wiener::{WienerCase, WienerIndex, WienerReport, WienerVariant};
