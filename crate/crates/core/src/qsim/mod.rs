//! Exact statevector simulation of the SVE machinery: register states,
//! the amplitude storage trees, the two-reflection walk operator, phase
//! estimation, and the singular value estimation pipelines.

pub mod kptree;
pub mod qpe;
pub mod state;
pub mod sve;
pub mod walk;

pub use kptree::KpTree;
pub use qpe::phase_estimation;
pub use state::StateVector;
pub use sve::{sve_forward, sve_reverse, GarbagePolicy, SveConfig, SveOutcome};
pub use walk::{build_isometries, WalkBlock, WalkOperator};
