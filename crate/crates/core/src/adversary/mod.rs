//! Adversaries: the segment-table strategy with its bookkeeping and audits,
//! the prefix and phase schedules built on it, and simple baselines.

pub mod audit;
pub mod params;
mod schedule;
mod simple;
mod strategy;
pub mod table;

pub use audit::{audit_properties, epoch_costs, epochs, AuditReport, Epoch, EpochEnd, LevelStats, PropertyResult, RunRecord, Status, StepRecord};
pub use params::{derive_params, desk_depth, desk_params, params_for, AdversaryParams, Check, Overrides, Profile};
pub use schedule::{
    phase_count, phase_schedule, phase_schedule_with, subsample_equally, theorem1_prefix, unit_weight_universe,
    PhaseAdversary, PhaseSchedule, PrefixAdversary,
};
pub use simple::{BisectAdversary, DensestGapAdversary, RandomAdversary};
pub use strategy::SegmentTableAdversary;
pub use table::{build_column, charge_partition, color_column, select_key, Column, Level};
