use std::f64::consts::TAU;

use crate::error::Result;
use crate::grid::{solve_equilibrium, EquilibriumDispatch, NetworkModel};
use crate::services::Fleet;

use super::SystemState;

/// Network compiled into flat per-zone and per-generator coefficient arrays.
#[derive(Debug, Clone)]
pub struct Plant {
    pub nominal_freq: f64,
    pub zone_ids: Vec<String>,
    /// Aggregate H·S per zone, MVA·s.
    pub zone_hs: Vec<f64>,
    /// 2·H·S / f0 per zone, MW·s/Hz.
    zone_inertia: Vec<f64>,
    /// D·S / f0 per zone, MW/Hz.
    zone_damping: Vec<f64>,
    zone_import: Vec<f64>,
    pub base_demand: Vec<f64>,
    /// (from, to, MW per rad).
    lines: Vec<(usize, usize, f64)>,
    pub gen_zone: Vec<usize>,
    /// S / (R·f0), MW/Hz.
    gen_gain: Vec<f64>,
    gen_tc: Vec<f64>,
    pub gen_setpoint: Vec<f64>,
    pub gen_max: Vec<f64>,
    pub fleet: Fleet,
    pub equilibrium: EquilibriumDispatch,
}

/// Time derivative of the continuous part of a [`SystemState`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    /// rad/s.
    pub angle: Vec<f64>,
    /// Hz/s.
    pub freq_dev: Vec<f64>,
    /// MW/s.
    pub gov_power: Vec<f64>,
}

impl Plant {
    pub fn new(model: &NetworkModel) -> Result<Plant> {
        model.validate()?;
        let f0 = model.nominal_freq;
        let index = model.zone_index();
        let n = model.zones.len();
        let equilibrium = solve_equilibrium(model)?;

        let mut zone_hs = vec![0.0; n];
        let mut zone_damping = vec![0.0; n];
        let mut gen_zone = Vec::with_capacity(model.generators.len());
        for g in &model.generators {
            let z = index[g.zone.as_str()];
            zone_hs[z] += g.inertia_h * g.rating;
            zone_damping[z] += g.damping * g.rating / f0;
            gen_zone.push(z);
        }
        let mut zone_import = vec![0.0; n];
        for ic in &model.interconnectors {
            zone_import[index[ic.zone.as_str()]] += ic.injection;
        }
        let lines = model
            .lines
            .iter()
            .map(|l| {
                (
                    index[l.from.as_str()],
                    index[l.to.as_str()],
                    l.susceptance * model.base_mva,
                )
            })
            .collect();
        let fleet = Fleet::new(
            model.bess_fleet.clone(),
            model
                .bess_fleet
                .iter()
                .map(|u| index[u.zone.as_str()])
                .collect(),
            n,
        );

        Ok(Plant {
            nominal_freq: f0,
            zone_ids: model.zones.iter().map(|z| z.id.clone()).collect(),
            zone_inertia: zone_hs.iter().map(|hs| 2.0 * hs / f0).collect(),
            zone_hs,
            zone_damping,
            zone_import,
            base_demand: model.zones.iter().map(|z| z.demand).collect(),
            lines,
            gen_zone,
            gen_gain: model
                .generators
                .iter()
                .map(|g| g.rating / (g.droop * f0))
                .collect(),
            gen_tc: model.generators.iter().map(|g| g.governor_tc).collect(),
            gen_max: model
                .generators
                .iter()
                .zip(&equilibrium.setpoints)
                .map(|(g, p)| p + g.headroom)
                .collect(),
            gen_setpoint: equilibrium.setpoints.clone(),
            fleet,
            equilibrium,
        })
    }

    pub fn n_zones(&self) -> usize {
        self.zone_ids.len()
    }

    pub fn n_generators(&self) -> usize {
        self.gen_zone.len()
    }

    /// Length of the flat continuous state: angles, deviations, governors.
    pub fn dim(&self) -> usize {
        2 * self.n_zones() + self.n_generators()
    }

    pub fn total_hs(&self) -> f64 {
        self.zone_hs.iter().sum()
    }

    /// Inertia-weighted mean frequency, Hz.
    pub fn coi_frequency(&self, freq_dev: &[f64]) -> f64 {
        let weighted: f64 = self.zone_hs.iter().zip(freq_dev).map(|(h, d)| h * d).sum();
        self.nominal_freq + weighted / self.total_hs()
    }

    /// Right-hand side on the flat state `x`, with loads and BESS injections
    /// held as given.
    pub fn rhs(&self, x: &[f64], load: &[f64], bess: &[f64], out: &mut [f64]) {
        let n = self.n_zones();
        let (angle, rest) = x.split_at(n);
        let (freq_dev, gov) = rest.split_at(n);
        let (d_angle, d_rest) = out.split_at_mut(n);
        let (d_freq, d_gov) = d_rest.split_at_mut(n);

        for i in 0..n {
            d_angle[i] = TAU * freq_dev[i];
            d_freq[i] =
                self.zone_import[i] + bess[i] - load[i] - self.zone_damping[i] * freq_dev[i];
        }
        for &(a, b, k) in &self.lines {
            let flow = k * (angle[a] - angle[b]);
            d_freq[a] -= flow;
            d_freq[b] += flow;
        }
        for (g, &z) in self.gen_zone.iter().enumerate() {
            d_freq[z] += gov[g];
            d_gov[g] =
                (self.gen_setpoint[g] - self.gen_gain[g] * freq_dev[z] - gov[g]) / self.gen_tc[g];
        }
        for i in 0..n {
            d_freq[i] /= self.zone_inertia[i];
        }
    }

    /// Flattens the continuous fields of `state`.
    pub fn pack(&self, state: &SystemState) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        x.extend_from_slice(&state.angle);
        x.extend_from_slice(&state.freq_dev);
        x.extend_from_slice(&state.gov_power);
        x
    }

    pub fn unpack(&self, x: &[f64], state: &mut SystemState) {
        let n = self.n_zones();
        state.angle.copy_from_slice(&x[..n]);
        state.freq_dev.copy_from_slice(&x[n..2 * n]);
        state.gov_power.copy_from_slice(&x[2 * n..]);
    }

    /// Derivatives at `state` using its current loads and BESS outputs.
    pub fn derivatives(&self, state: &SystemState) -> StateDerivative {
        let x = self.pack(state);
        let mut out = vec![0.0; x.len()];
        let bess = self.fleet.injection(&state.bess);
        self.rhs(&x, &state.load, &bess, &mut out);
        let n = self.n_zones();
        StateDerivative {
            angle: out[..n].to_vec(),
            freq_dev: out[n..2 * n].to_vec(),
            gov_power: out[2 * n..].to_vec(),
        }
    }

    /// Steady state at nominal frequency with the solved dispatch.
    pub fn equilibrium_state(&self) -> SystemState {
        SystemState {
            time: 0.0,
            angle: self.equilibrium.angles.clone(),
            freq_dev: vec![0.0; self.n_zones()],
            gov_power: self.gen_setpoint.clone(),
            bess: self.fleet.initial_states(),
            load: self.base_demand.clone(),
            ufls_latched: false,
        }
    }
}
