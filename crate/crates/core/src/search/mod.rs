//! Structure generation, bounded derivation, countermodel search, and the
//! combined three-valued decision loop.

pub mod countermodel;
pub mod generate;
pub mod proof;

pub use countermodel::{
    decide, find_countermodel, Budget, BudgetReport, Countermodel, TableStrategy, Verdict,
};
pub use generate::{
    admissible_subfamilies, enumerate_semilattices, generate_selections, sample_tables,
    valid_columns, SelectionStrategy, TableMap,
};
pub use proof::{check_proof, derive, AxiomSchema, ProofError, ProofTree, RuleApp};
