//! Static network description, validation, coupling matrix, steady state,
//! and the synthetic 36-zone dataset.

mod coupling;
mod equilibrium;
pub mod fixtures;
mod model;
mod synth;

pub use coupling::build_coupling_matrix;
pub use equilibrium::{flow_residual, solve_equilibrium, zone_injections, EquilibriumDispatch};
pub use model::{load_network, Interconnector, Line, NetworkModel, SyncGenerator, Zone};
pub use synth::{
    gb36_zone_labels, synthesize_gb36, GB36_GENERATORS, GB36_LINES, GB36_PEAK_DEMAND_MW,
    GB36_PEAK_ZONE, GB36_TOTAL_DEMAND_MW,
};
