// SPDX-License-Identifier: Apache-2.0
//! Symmetric Boolean circuits over relational inputs.
//!
//! A circuit of order `n` reads the atoms of a structure whose universe has
//! been identified with `[n]` and labels internal gates with structured
//! functions (AND, OR, NAND, MAJ, and RANK over prime fields). The crate
//! evaluates such circuits, decides syntactic equivalence of gates for
//! transparent circuits, normalises them to unique labels, extends
//! permutations of `[n]` to circuit automorphisms, computes supports, and
//! evaluates rank gates of symmetric circuits from supports alone.

pub mod circuit;
pub mod corpus;
pub mod equivalence;
pub mod eval;
pub mod function;
pub mod gi;
pub mod io;
pub mod majority;
pub mod normalize;
pub mod oracle;
pub mod orbits;
pub mod par;
pub mod partition;
pub mod permutation;
pub mod rank;
pub mod rank_support;
pub mod structure;
pub mod symmetry;

pub use circuit::{Circuit, CircuitBuilder, CircuitError, GateKind, GateSpec, Vocabulary};
pub use function::{IndexElement, MajorityConvention, StructuredFunction, UniverseElement};
pub use par::{Budget, Exec};
pub use partition::{Partition, SupportInfo};
pub use structure::{Bijection, EncodedInput, RhoStructure};
