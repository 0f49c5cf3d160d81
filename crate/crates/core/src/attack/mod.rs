//! Load-altering attack scenarios and the feedback-driven adversary.

mod adversary;
mod scenario;

pub use adversary::{
    feedback_adversary, AdversaryContext, AdversaryOutcome, AdversarySpec, AdversaryStrategy,
    LargeScaleStatic, LowBudgetDynamic, StrategyRegistry,
};
pub use scenario::{
    boundary_index, dynamic_laa, scenario_to_profile, static_laa, AttackScenario, AttackStep,
    LoadProfile, ScenarioFile,
};

/// Default onset of a static attack, s.
pub const DEFAULT_ATTACK_TIME: f64 = 1.0;
/// Step times of the three-stage dynamic attack, s.
pub const DYNAMIC_STEP_TIMES: [f64; 3] = [1.0, 3.0, 6.0];
