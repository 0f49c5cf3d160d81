use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AttackScenario, AttackStep};
use crate::analysis::nadir;
use crate::dynamics::{run_with_policy, SimulationConfig};
use crate::error::{GridError, Result};
use crate::grid::NetworkModel;
use crate::protection::ProtectionPolicy;

fn default_max_iterations() -> usize {
    10
}
fn default_start_time() -> f64 {
    1.0
}
fn default_step_interval() -> f64 {
    2.0
}

/// Adversary description as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    #[serde(rename = "budget_mw")]
    pub budget: f64,
    /// Registered strategy name.
    pub strategy: String,
    #[serde(rename = "impact_target_hz")]
    pub impact_target: f64,
    pub vulnerable_zones: Vec<String>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(rename = "start_time_s", default = "default_start_time")]
    pub start_time: f64,
    /// Spacing between escalation steps of staged strategies, s.
    #[serde(rename = "step_interval_s", default = "default_step_interval")]
    pub step_interval: f64,
}

impl AdversarySpec {
    pub fn new(strategy: &str, budget: f64, impact_target: f64, vulnerable_zones: &[&str]) -> Self {
        AdversarySpec {
            budget,
            strategy: strategy.to_string(),
            impact_target,
            vulnerable_zones: vulnerable_zones.iter().map(|z| z.to_string()).collect(),
            max_iterations: default_max_iterations(),
            start_time: default_start_time(),
            step_interval: default_step_interval(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(GridError::Scenario(
                "adversary budget_mw must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(GridError::Scenario(
                "adversary max_iterations must be >= 1".into(),
            ));
        }
        if self.vulnerable_zones.is_empty() {
            return Err(GridError::Scenario(
                "adversary needs at least one vulnerable zone".into(),
            ));
        }
        if !(self.step_interval > 0.0 && self.start_time >= 0.0) {
            return Err(GridError::Scenario(
                "adversary timing must be non-negative with a positive step interval".into(),
            ));
        }
        Ok(())
    }
}

/// What a strategy sees when proposing the next attack.
pub struct AdversaryContext<'a> {
    pub spec: &'a AdversarySpec,
    /// Vulnerable zones ordered by descending base demand, ties by id.
    pub ranked_zones: Vec<String>,
}

/// An attack-escalation policy, selected by name from a [`StrategyRegistry`].
pub trait AdversaryStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Scenario to try at `iteration` (0-based), or `None` once exhausted.
    fn propose(&self, ctx: &AdversaryContext<'_>, iteration: usize) -> Option<AttackScenario>;
}

/// Full budget in one step, trying vulnerable zones from the largest load down.
pub struct LargeScaleStatic;

impl AdversaryStrategy for LargeScaleStatic {
    fn name(&self) -> &'static str {
        "LargeScaleStatic"
    }

    fn propose(&self, ctx: &AdversaryContext<'_>, iteration: usize) -> Option<AttackScenario> {
        let zone = ctx.ranked_zones.get(iteration)?;
        Some(AttackScenario {
            label: format!("adversary static {} MW at {zone}", ctx.spec.budget),
            steps: vec![AttackStep {
                time: ctx.spec.start_time,
                zone: zone.clone(),
                delta: ctx.spec.budget,
            }],
        })
    }
}

/// Escalates by `budget / max_iterations` per iteration, one new timed step
/// each round, cycling through the vulnerable zones.
pub struct LowBudgetDynamic;

impl AdversaryStrategy for LowBudgetDynamic {
    fn name(&self) -> &'static str {
        "LowBudgetDynamic"
    }

    fn propose(&self, ctx: &AdversaryContext<'_>, iteration: usize) -> Option<AttackScenario> {
        let stages = ctx.spec.max_iterations;
        if iteration >= stages {
            return None;
        }
        let each = ctx.spec.budget / stages as f64;
        let mut steps: Vec<AttackStep> = (0..=iteration)
            .map(|j| AttackStep {
                time: ctx.spec.start_time + j as f64 * ctx.spec.step_interval,
                zone: ctx.ranked_zones[j % ctx.ranked_zones.len()].clone(),
                delta: each,
            })
            .collect();
        if iteration + 1 == stages {
            let head: f64 = steps[..stages - 1].iter().map(|s| s.delta).sum();
            steps.last_mut().unwrap().delta = ctx.spec.budget - head;
        }
        Some(AttackScenario {
            label: format!("adversary staged {} of {stages}", iteration + 1),
            steps,
        })
    }
}

pub struct StrategyRegistry {
    strategies: BTreeMap<&'static str, Box<dyn AdversaryStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry {
            strategies: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, strategy: Box<dyn AdversaryStrategy>) {
        self.strategies.insert(strategy.name(), strategy);
    }

    pub fn builtin() -> Self {
        let mut registry = StrategyRegistry::empty();
        registry.register(Box::new(LargeScaleStatic));
        registry.register(Box::new(LowBudgetDynamic));
        registry
    }

    pub fn get(&self, name: &str) -> Result<&dyn AdversaryStrategy> {
        self.strategies
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| GridError::UnknownName {
                kind: "adversary strategy",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.strategies.keys().copied()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        StrategyRegistry::builtin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryOutcome {
    /// Last scenario tried (the successful one when `achieved`).
    pub scenario: AttackScenario,
    pub achieved: bool,
    pub iterations: usize,
    /// COI nadir observed for `scenario`, Hz.
    pub observed_nadir: f64,
}

/// Feedback loop: propose, simulate, observe the COI nadir, and stop at the
/// first proposal that drives it below the impact target.
pub fn feedback_adversary(
    model: &NetworkModel,
    spec: &AdversarySpec,
    config: SimulationConfig,
    policy: ProtectionPolicy,
    registry: &StrategyRegistry,
) -> Result<AdversaryOutcome> {
    spec.validate()?;
    let strategy = registry.get(&spec.strategy)?;
    let mut ranked = Vec::with_capacity(spec.vulnerable_zones.len());
    for zone in &spec.vulnerable_zones {
        let z =
            model
                .zones
                .iter()
                .find(|z| &z.id == zone)
                .ok_or_else(|| GridError::DanglingZone {
                    kind: "adversary",
                    zone: zone.clone(),
                })?;
        ranked.push((z.demand, z.id.clone()));
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    ranked.dedup_by(|a, b| a.1 == b.1);
    let ctx = AdversaryContext {
        spec,
        ranked_zones: ranked.into_iter().map(|(_, id)| id).collect(),
    };

    let mut outcome: Option<AdversaryOutcome> = None;
    for iteration in 0..spec.max_iterations {
        let Some(scenario) = strategy.propose(&ctx, iteration) else {
            break;
        };
        let trace = run_with_policy(model, &scenario, config, policy)?;
        let (observed_nadir, _) = nadir(&trace)?;
        let achieved = observed_nadir < spec.impact_target;
        outcome = Some(AdversaryOutcome {
            scenario,
            achieved,
            iterations: iteration + 1,
            observed_nadir,
        });
        if achieved {
            break;
        }
    }
    outcome.ok_or_else(|| GridError::Scenario("adversary strategy proposed no scenario".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fixtures;

    fn ctx(spec: &AdversarySpec) -> AdversaryContext<'_> {
        AdversaryContext {
            spec,
            ranked_zones: spec.vulnerable_zones.clone(),
        }
    }

    #[test]
    fn staged_escalation_stays_within_budget() {
        let mut spec = AdversarySpec::new("LowBudgetDynamic", 1000.0, 49.8, &["A", "B"]);
        spec.max_iterations = 7;
        let strategy = LowBudgetDynamic;
        let mut last = 0.0;
        for i in 0..7 {
            let s = strategy.propose(&ctx(&spec), i).unwrap();
            let total = s.total_magnitude();
            assert!(total <= spec.budget * (1.0 + 1e-12));
            assert!(total > last);
            assert_eq!(s.steps.len(), i + 1);
            last = total;
        }
        assert!((last - 1000.0).abs() < 1e-9);
        assert!(strategy.propose(&ctx(&spec), 7).is_none());
    }

    #[test]
    fn negligible_budget_fails() {
        let model = fixtures::two_zone();
        let mut spec = AdversarySpec::new("LowBudgetDynamic", 1.0, 48.8, &["A"]);
        spec.max_iterations = 3;
        let out = feedback_adversary(
            &model,
            &spec,
            SimulationConfig::with_horizon(20.0),
            ProtectionPolicy::default(),
            &StrategyRegistry::builtin(),
        )
        .unwrap();
        assert!(!out.achieved);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn static_picks_largest_vulnerable_zone() {
        let model = fixtures::five_zone();
        let spec = AdversarySpec::new("LargeScaleStatic", 300.0, 49.8, &["N3", "N2", "N5"]);
        let out = feedback_adversary(
            &model,
            &spec,
            SimulationConfig::with_horizon(30.0),
            ProtectionPolicy::default(),
            &StrategyRegistry::builtin(),
        )
        .unwrap();
        assert!(out.achieved);
        assert_eq!(out.scenario.steps[0].zone, "N2");
    }

    #[test]
    fn empty_vulnerable_set_rejected() {
        let spec = AdversarySpec::new("LargeScaleStatic", 300.0, 49.8, &[]);
        assert!(feedback_adversary(
            &fixtures::two_zone(),
            &spec,
            SimulationConfig::with_horizon(5.0),
            ProtectionPolicy::default(),
            &StrategyRegistry::builtin(),
        )
        .is_err());
        assert!(StrategyRegistry::builtin().get("Botnet").is_err());
    }
}
