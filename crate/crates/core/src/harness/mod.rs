//! Configuration, scenarios, experiment drivers and result files.

pub mod config;
mod ledger;
pub mod output;
mod run;
pub mod scenario;
mod studies;
mod tension_audit;

pub use config::{load_config, parse_config, Experiment, ExperimentConfig, RegMode, Scenario, TensionConfig};
pub use ledger::{AuditEntry, Ledger, Status};
pub use output::{write_outputs, SERIES_COLUMNS};
pub use run::{audit_trajectory, build_model, initial_state, run_single, RunResult, SCENARIO_NOTE};
pub use scenario::scenario_init;
pub use studies::{
    run_ksweep, run_mms_order_study, run_refine, spacetime_l2, sup_sigma_error, KMember, KSweepReport, OrderLevel,
    OrderReport, RefineLevel, RefineReport, ORDER_WINDOW, WEAK_FLOOR,
};
pub use tension_audit::{
    audit_tension, log_grid, MollifiedAudit, TensionAuditReport, TruncatedAudit, CONVERGENCE_KS, MOLLIFIED_KS,
    TRUNCATED_KS,
};
