//! Finite-scale workbench for Ramsey-type structures over semigroups.
//!
//! The crate provides:
//!
//! - [`semigroup`]: carriers (Cayley tables, bounded naturals) and the
//!   index-sum machinery: `a_H` folds, FS sets, properness.
//! - [`structures`]: generators and membership tests for m-sumgraphs,
//!   partite m-sumgraphs, partite m-graphs, (m,p,c)-sets and arithmetic
//!   progressions, plus colorings ([`coloring`]).
//! - [`oracle`]: a consistency-maintaining membership oracle standing in
//!   for an idempotent ultrafilter, with principal, scripted and
//!   backtracking realizations, the star operator and disjointification.
//! - [`engine`]: the round-based strategy construction driven by an
//!   oracle, a multiplicative two-operation variant, exhaustive witness
//!   searchers, and an independent certificate verifier.
//! - [`games`]: finite-horizon selection games with an exact solver,
//!   selection-principle checks, cover and superfilter predicates.
//!
//! Everything an engine run emits is a self-contained certificate that
//! the verifier re-derives by brute force; soundness lives in the
//! verifier, not in the oracle.

pub mod coloring;
pub mod engine;
pub mod games;
pub mod oracle;
pub mod semigroup;
pub mod sets;
pub mod structures;

pub use coloring::{Color, Coloring};
pub use semigroup::{Elem, Semigroup, SemigroupSpec};
pub use sets::SmallSet;
