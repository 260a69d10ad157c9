//! Closed-form detection and efficiency formulas, the Monte Carlo experiment
//! runner and the per-hop error report.

mod efficiency;
mod experiment;
mod formulas;
mod report;

pub use efficiency::{efficiency, Convention, EfficiencyReport};
pub use experiment::{
    run_experiment, trial_seed, write_csv, ExperimentPlan, ExperimentResult, HopStats, LeakageSummary, PointResult,
    Sweep, SweepParam, CSV_HEADER, DEFAULT_CONFIDENCE,
};
pub use formulas::{analytic_abort_probability, analytic_detection, per_decoy_error};
pub use report::{qber_report, QberBand, QberRow, ATTACK_FLOOR, BAND_TOLERANCE, NOISE_CEILING};
