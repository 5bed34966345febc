//! Deterministic, seeded simulation of the inductive lifting driver.
//!
//! Global cohomology classes are modeled by a seeded synthetic sampler whose
//! independence assumptions mirror the Chebotarev disjointness used in the
//! theory. The simulator validates the combinatorial bookkeeping of the
//! lifting process — stage set algebra, purity of pinned characteristic
//! polynomials, ledger balances, obstruction removal — not the arithmetic
//! existence of any lift. Every report states this.

mod growth;
mod polarisation;
mod rng;
mod sampler;
mod state;

pub use growth::{
    growth_schedule, growth_violation_check, CountingFunction, GrowthError, GrowthSchedule,
    GrowthStage, ViolationReport, ViolationRow,
};
pub use polarisation::{
    density_shrink, find_polarisation_pair, gamma_constant, majority_class_filter,
    reciprocity_audit, GammaConstant, PolarisationRecord,
};
pub use rng::SimRng;
pub use sampler::{CocycleProfile, SamplerConfig, SyntheticChebotarev};
pub use state::{
    run_simulation, run_stage, Event, SimConfig, SimError, SimReport, SimState, Simulation,
    StageAudits, StageBlock, StageDiagnosis,
};

/// The note printed in every report header.
pub const EPISTEMIC_NOTE: &str = "global cohomology classes are drawn from a seeded synthetic \
sampler; this run validates combinatorial bookkeeping, not the arithmetic existence of lifts";
