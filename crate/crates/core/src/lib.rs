//! Finite-model toolkit for conditional semilattice logic.
//!
//! Formulas of a positive language with a conditional implication are
//! interpreted as filters of a finite meet-semilattice; the conditional is
//! read through a selection function. The crate provides the syntax, the
//! frame and algebraic semantics with exhaustive validity checking, the
//! finite duality between the two, the axiom/frame-condition catalog with
//! fill-ins, and a bounded prover with countermodel search.

pub mod algebra;
pub mod duality;
pub mod extensions;
pub mod fixtures;
pub mod frame;
pub mod search;
pub mod semilattice;
pub mod syntax;

pub use algebra::{ConditionalLattice, Lattice};
pub use extensions::{AxiomId, FillInKind};
pub use frame::{GeneralFrame, Model, SelectionKind, Valuation};
pub use search::{Budget, Verdict};
pub use semilattice::{FiniteSemilattice, Filter};
pub use syntax::{parse_formula, parse_pair, ConsequencePair, Formula, TheoryGamma};
