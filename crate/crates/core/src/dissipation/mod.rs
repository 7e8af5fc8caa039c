//! The real-part form, its operator realizations, energy bookkeeping and
//! closability diagnostics.

mod ledger;
mod probe;
mod toolkit;

pub use ledger::{energy_audit, rt_bound_check, BoundReport, EnergyLedger, BOUND_TOL};
pub use probe::{
    closability_probe, refinement_study, ProbeReport, ProbeRow, ProbeSequence, QuantityTrend, StudyReport, Verdict,
    DELTA_REL, EPS_FORM_REL, EPS_NORM, NORM_DECAY_SLOPE, STABLE_REL,
};
pub use toolkit::{build_toolkit, dissipation_rate, form_matrix, form_r, q_identity_residual, DissipationToolkit};
