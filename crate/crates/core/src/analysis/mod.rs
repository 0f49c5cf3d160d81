//! Metric extraction from traces, minimum-attack threshold search, and
//! batch sweeps over presets, zones and limits.

mod metrics;
mod sweep;
mod threshold;

pub use metrics::{
    first_crossing, max_rocof, max_rocof_zonal, nadir, settling_frequency, FrequencyMetrics,
    LimitCrossing, MetricOptions, DEFAULT_ROCOF_WINDOW, DEFAULT_SETTLING_TAIL, STUDY_LIMITS,
};
pub use sweep::{render_table, sweep_tables, Study, SweepCell, SweepRow, SweepSpec, SweepTable};
pub use threshold::{find_min_laa, ThresholdResult, ThresholdSearch, DEFAULT_TOLERANCE_MW};
