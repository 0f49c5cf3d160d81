use crate::attack::{boundary_index, AttackScenario};
use crate::error::{GridError, Result};
use crate::grid::NetworkModel;
use crate::protection::{apply_shedding, ufls_update, ProtectionPolicy, RelayState};

use super::{EventKind, Plant, Rk4, SimulationConfig, SystemState, Trace, TraceEvent, TraceSample};

#[derive(Debug, Clone)]
struct ScheduledStep {
    index: usize,
    zone: usize,
    delta: f64,
}

/// One simulation run over a borrowed network.
///
/// Holds all per-run mutable state (relay, event cursor, integrator
/// buffers); nothing is shared between runs except the model.
pub struct Simulation<'m> {
    model: &'m NetworkModel,
    plant: Plant,
    config: SimulationConfig,
    policy: ProtectionPolicy,
    schedule: Vec<ScheduledStep>,
    cursor: usize,
    step_index: usize,
    relay: RelayState,
    shed_mw: f64,
    events: Vec<TraceEvent>,
    rk4: Rk4,
    x: Vec<f64>,
}

impl<'m> Simulation<'m> {
    pub fn new(
        model: &'m NetworkModel,
        scenario: &AttackScenario,
        config: SimulationConfig,
        policy: ProtectionPolicy,
    ) -> Result<Self> {
        config.validate()?;
        policy.validate(model.nominal_freq)?;
        scenario.validate()?;
        let plant = Plant::new(model)?;
        let mut schedule = Vec::with_capacity(scenario.steps.len());
        for step in &scenario.steps {
            if step.time >= config.horizon {
                return Err(GridError::Scenario(format!(
                    "step at {} s lies beyond the {} s horizon",
                    step.time, config.horizon
                )));
            }
            let zone = model
                .zone_position(&step.zone)
                .ok_or_else(|| GridError::DanglingZone {
                    kind: "attack step",
                    zone: step.zone.clone(),
                })?;
            schedule.push(ScheduledStep {
                index: boundary_index(step.time, config.dt),
                zone,
                delta: step.delta,
            });
        }
        let dim = plant.dim();
        Ok(Simulation {
            model,
            plant,
            config,
            policy,
            schedule,
            cursor: 0,
            step_index: 0,
            relay: RelayState::default(),
            shed_mw: 0.0,
            events: Vec::new(),
            rk4: Rk4::new(dim),
            x: vec![0.0; dim],
        })
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn initial_state(&self) -> SystemState {
        self.plant.equilibrium_state()
    }

    fn now(&self) -> f64 {
        self.step_index as f64 * self.config.dt
    }

    /// Applies attack steps and relay action due at the current boundary.
    fn apply_boundary(&mut self, state: &mut SystemState) {
        let now = self.now();
        while let Some(step) = self.schedule.get(self.cursor) {
            if step.index > self.step_index {
                break;
            }
            let load = &mut state.load[step.zone];
            *load = (*load + step.delta).max(0.0);
            self.events.push(TraceEvent {
                time: now,
                kind: EventKind::AttackStep,
                zone: Some(self.plant.zone_ids[step.zone].clone()),
                unit: None,
                mw: step.delta,
            });
            self.cursor += 1;
        }

        let coi = self.plant.coi_frequency(&state.freq_dev);
        let (relay, trip) = ufls_update(&self.policy, self.relay, coi, now);
        self.relay = relay;
        if trip && !state.ufls_latched {
            let before: f64 = state.load.iter().sum();
            *state = apply_shedding(self.model, state, &self.policy);
            let shed = before - state.load.iter().sum::<f64>();
            self.shed_mw += shed;
            self.events.push(TraceEvent {
                time: now,
                kind: EventKind::UflsTrip,
                zone: None,
                unit: None,
                mw: shed,
            });
        }
    }

    /// Integrates one step from the current boundary.
    fn advance(&mut self, state: &mut SystemState) -> Result<()> {
        let now = self.now();
        let dt = self.config.dt;
        let fleet = &self.plant.fleet;

        let was_exhausted: Vec<bool> = fleet
            .units()
            .iter()
            .zip(&state.bess)
            .map(|(u, s)| s.is_exhausted(u))
            .collect();
        let bess_start = fleet.injection(&state.bess);
        let bess_end = fleet.fleet_injection(&mut state.bess, &state.freq_dev, now, dt);
        for ((unit, s), was) in fleet.units().iter().zip(&state.bess).zip(was_exhausted) {
            if !was && s.is_exhausted(unit) {
                self.events.push(TraceEvent {
                    time: now,
                    kind: EventKind::BessExhausted,
                    zone: Some(unit.zone.clone()),
                    unit: Some(unit.id.clone()),
                    mw: 0.0,
                });
            }
        }

        let plant = &self.plant;
        let x = &mut self.x;
        x.clear();
        x.extend_from_slice(&state.angle);
        x.extend_from_slice(&state.freq_dev);
        x.extend_from_slice(&state.gov_power);
        let mut bess = vec![0.0; plant.n_zones()];
        let load = &state.load;
        self.rk4.step(x, dt, |s, y, out| {
            for (b, (a, e)) in bess.iter_mut().zip(bess_start.iter().zip(&bess_end)) {
                *b = a + (e - a) * s;
            }
            plant.rhs(y, load, &bess, out);
        });
        plant.unpack(x, state);
        for (p, max) in state.gov_power.iter_mut().zip(&plant.gen_max) {
            *p = p.clamp(0.0, *max);
        }

        self.step_index += 1;
        state.time = self.now();
        if !state.is_finite() {
            return Err(GridError::NumericalBlowUp { time: state.time });
        }
        Ok(())
    }

    /// Applies boundary actions at the state's time, then advances by `dt`.
    pub fn step(&mut self, state: &mut SystemState) -> Result<()> {
        self.apply_boundary(state);
        self.advance(state)
    }

    fn sample(&self, state: &SystemState) -> TraceSample {
        let f0 = self.plant.nominal_freq;
        TraceSample {
            time: state.time,
            zone_freq: state.freq_dev.iter().map(|d| f0 + d).collect(),
            coi_freq: self.plant.coi_frequency(&state.freq_dev),
            zone_load: state.load.clone(),
            bess_power: state.bess.iter().map(|b| b.delivered).collect(),
            shed_mw: self.shed_mw,
        }
    }

    /// Runs from equilibrium to the horizon.
    pub fn run(mut self) -> Result<Trace> {
        let mut state = self.initial_state();
        let steps = self.config.steps();
        let every = self.config.sample_every;
        let mut samples = Vec::with_capacity(steps / every + 1);
        loop {
            self.apply_boundary(&mut state);
            if self.step_index % every == 0 {
                samples.push(self.sample(&state));
            }
            if self.step_index == steps {
                break;
            }
            self.advance(&mut state)?;
        }
        Ok(Trace {
            nominal_freq: self.plant.nominal_freq,
            zone_ids: self.plant.zone_ids.clone(),
            bess_ids: self
                .plant
                .fleet
                .units()
                .iter()
                .enumerate()
                .map(|(i, u)| {
                    if u.id.is_empty() {
                        format!("bess{i}")
                    } else {
                        u.id.clone()
                    }
                })
                .collect(),
            samples,
            events: self.events,
        })
    }
}

/// Runs `scenario` under the default protection policy.
pub fn run(
    model: &NetworkModel,
    scenario: &AttackScenario,
    config: SimulationConfig,
) -> Result<Trace> {
    run_with_policy(model, scenario, config, ProtectionPolicy::default())
}

pub fn run_with_policy(
    model: &NetworkModel,
    scenario: &AttackScenario,
    config: SimulationConfig,
    policy: ProtectionPolicy,
) -> Result<Trace> {
    Simulation::new(model, scenario, config, policy)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::static_laa;
    use crate::grid::{fixtures, load_network};

    fn single_zone() -> NetworkModel {
        load_network(
            r#"{"zones":[{"id":"A","demand":500}],
                "generators":[{"zone":"A","rating":1000,"inertia_h":5,"headroom":50}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_step_preserves_state() {
        let model = fixtures::five_zone();
        let mut sim = Simulation::new(
            &model,
            &AttackScenario::default(),
            SimulationConfig::default(),
            ProtectionPolicy::default(),
        )
        .unwrap();
        let start = sim.initial_state();
        let mut state = start.clone();
        sim.step(&mut state).unwrap();
        assert!((state.time - 0.01).abs() < 1e-15);
        for (a, b) in state.freq_dev.iter().zip(&start.freq_dev) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in state.angle.iter().zip(&start.angle) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in state.gov_power.iter().zip(&start.gov_power) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn one_step_after_load_step() {
        let model = single_zone();
        let scenario = static_laa("A", 100.0, 0.0).unwrap();
        let mut sim = Simulation::new(
            &model,
            &scenario,
            SimulationConfig::default(),
            ProtectionPolicy::default(),
        )
        .unwrap();
        let mut state = sim.initial_state();
        sim.step(&mut state).unwrap();
        let f = 50.0 + state.freq_dev[0];
        assert!((f - 49.995).abs() < 1e-4, "{f}");
    }

    #[test]
    fn events_recorded_at_schedule() {
        let model = fixtures::two_zone();
        let scenario = crate::attack::dynamic_laa("A", 90.0, &[1.0, 3.0, 6.0]).unwrap();
        let trace = run(&model, &scenario, SimulationConfig::with_horizon(10.0)).unwrap();
        let times: Vec<f64> = trace
            .events_of(EventKind::AttackStep)
            .map(|e| e.time)
            .collect();
        assert_eq!(times.len(), 3);
        for (t, expect) in times.iter().zip([1.0, 3.0, 6.0]) {
            assert!((t - expect).abs() < 1e-9);
        }
        assert_eq!(trace.samples.len(), 1001);
        assert!(trace.samples[0].zone_freq.iter().all(|f| *f == 50.0));
        for pair in trace.samples.windows(2) {
            assert!(pair[1].time > pair[0].time);
            assert!((pair[1].time - pair[0].time - 0.01).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_every_thins_trace() {
        let model = fixtures::two_zone();
        let config = SimulationConfig {
            sample_every: 10,
            ..SimulationConfig::with_horizon(5.0)
        };
        let trace = run(&model, &AttackScenario::default(), config).unwrap();
        assert_eq!(trace.samples.len(), 51);
        assert!((trace.samples[1].time - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_zone_and_late_steps() {
        let model = fixtures::two_zone();
        let config = SimulationConfig::with_horizon(5.0);
        assert!(matches!(
            run(&model, &static_laa("Q", 10.0, 1.0).unwrap(), config),
            Err(GridError::DanglingZone { .. })
        ));
        assert!(run(&model, &static_laa("A", 10.0, 5.0).unwrap(), config).is_err());
    }

    #[test]
    fn blow_up_reported() {
        let model = single_zone();
        let scenario = static_laa("A", 100.0, 1.0).unwrap();
        let config = SimulationConfig {
            dt: 1e154,
            horizon: 1e156,
            sample_every: 1,
        };
        match run(&model, &scenario, config) {
            Err(GridError::NumericalBlowUp { time }) => assert!(time > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn governor_clamped_to_headroom() {
        let model = single_zone();
        let scenario = static_laa("A", 200.0, 0.5).unwrap();
        let policy = ProtectionPolicy::default();
        let mut sim = Simulation::new(
            &model,
            &scenario,
            SimulationConfig::with_horizon(60.0),
            policy,
        )
        .unwrap();
        let max = sim.plant().gen_max[0];
        let mut state = sim.initial_state();
        for _ in 0..6000 {
            sim.step(&mut state).unwrap();
            assert!(state.gov_power[0] <= max && state.gov_power[0] >= 0.0);
        }
        assert_eq!(state.gov_power[0], max);
    }
}
