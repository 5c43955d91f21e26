//! SVE-based linear inversion, the circulant-preconditioned solve
//! pipeline, its error calculus, and the cost-model reporting.

pub mod bounds;
pub mod cost;
pub mod eigenstate;
pub mod invert;
pub mod pipeline;
pub mod report;

pub use bounds::{choose_epsilon, assembled_state_error_bound, simplified_bounds, ErrorBudget};
pub use cost::{cost_report, CostReport, PrecondKindForCost};
pub use eigenstate::{eigenvalue_state, EigenvalueStateOutcome};
pub use invert::{invert_via_sve, invert_with_walk, InversionResult};
pub use pipeline::{
    assemble_preconditioned_matrix_state, general_preconditioned_solve,
    inverse_preconditioner_apply, preconditioned_solve, AssembledState, AssemblyErrorReport,
    PreconditionerApply, SolveOutcome,
};
pub use report::SolveReport;
