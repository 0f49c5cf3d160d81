use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{build_coupling_matrix, NetworkModel};
use crate::error::{GridError, Result};

/// Pre-disturbance steady state at nominal frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumDispatch {
    /// Mechanical setpoint per generator, MW.
    pub setpoints: Vec<f64>,
    /// Voltage angle per zone, rad; zone 0 is the reference.
    pub angles: Vec<f64>,
}

/// Net active-power injection per zone (generation + imports - demand), MW.
pub fn zone_injections(model: &NetworkModel, setpoints: &[f64]) -> Vec<f64> {
    let index = model.zone_index();
    let mut injection: Vec<f64> = model.zones.iter().map(|z| -z.demand).collect();
    for (g, p) in model.generators.iter().zip(setpoints) {
        injection[index[g.zone.as_str()]] += p;
    }
    for ic in &model.interconnectors {
        injection[index[ic.zone.as_str()]] += ic.injection;
    }
    injection
}

/// Dispatches net load pro rata to rating and solves the DC flow for angles.
pub fn solve_equilibrium(model: &NetworkModel) -> Result<EquilibriumDispatch> {
    let net_load = model.total_demand() - model.total_imports();
    let capacity = model.total_capacity();
    let setpoints: Vec<f64> = model
        .generators
        .iter()
        .map(|g| net_load * g.rating / capacity)
        .collect();

    let n = model.zones.len();
    let mut angles = vec![0.0; n];
    if n > 1 {
        let injection = zone_injections(model, &setpoints);
        let laplacian = build_coupling_matrix(model);
        let reduced: DMatrix<f64> = laplacian.view((1, 1), (n - 1, n - 1)).into_owned();
        let rhs = DVector::from_iterator(n - 1, injection[1..].iter().map(|p| p / model.base_mva));
        let solved = reduced
            .cholesky()
            .ok_or(GridError::SingularSystem)?
            .solve(&rhs);
        angles[1..].copy_from_slice(solved.as_slice());
    }
    Ok(EquilibriumDispatch { setpoints, angles })
}

/// Per-zone power imbalance (injection minus outgoing flow), per unit.
pub fn flow_residual(model: &NetworkModel, dispatch: &EquilibriumDispatch) -> Vec<f64> {
    let index = model.zone_index();
    let mut residual: Vec<f64> = zone_injections(model, &dispatch.setpoints)
        .into_iter()
        .map(|p| p / model.base_mva)
        .collect();
    for line in &model.lines {
        let (a, b) = (index[line.from.as_str()], index[line.to.as_str()]);
        let flow = line.susceptance * (dispatch.angles[a] - dispatch.angles[b]);
        residual[a] -= flow;
        residual[b] += flow;
    }
    residual
}
