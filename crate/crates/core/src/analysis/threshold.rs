use serde::Serialize;

use super::metrics::{FrequencyMetrics, MetricOptions};
use crate::attack::{static_laa, AttackScenario, DEFAULT_ATTACK_TIME};
use crate::dynamics::{run_with_policy, SimulationConfig};
use crate::error::{GridError, Result};
use crate::grid::NetworkModel;
use crate::protection::ProtectionPolicy;

pub const DEFAULT_TOLERANCE_MW: f64 = 1.0;

/// Full description of one threshold search.
#[derive(Debug, Clone)]
pub struct ThresholdSearch<'a> {
    pub model: &'a NetworkModel,
    pub zone: String,
    pub limit: f64,
    pub bracket: (f64, f64),
    pub tol: f64,
    pub attack_time: f64,
    pub config: SimulationConfig,
    pub policy: ProtectionPolicy,
    pub metrics: MetricOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub zone: String,
    pub limit: f64,
    pub min_laa: f64,
    pub iterations: usize,
    /// Final bracket `[lo, hi]` with `hi - lo <= tol`.
    pub bracket: [f64; 2],
    pub lo_metrics: FrequencyMetrics,
    pub hi_metrics: FrequencyMetrics,
}

impl<'a> ThresholdSearch<'a> {
    pub fn new(
        model: &'a NetworkModel,
        zone: &str,
        limit: f64,
        bracket: (f64, f64),
        config: SimulationConfig,
    ) -> Self {
        ThresholdSearch {
            model,
            zone: zone.to_string(),
            limit,
            bracket,
            tol: DEFAULT_TOLERANCE_MW,
            attack_time: DEFAULT_ATTACK_TIME,
            config,
            policy: ProtectionPolicy::default(),
            metrics: MetricOptions::default(),
        }
    }

    fn scenario(&self, magnitude: f64) -> Result<AttackScenario> {
        if magnitude == 0.0 {
            Ok(AttackScenario::empty("no attack"))
        } else {
            static_laa(&self.zone, magnitude, self.attack_time)
        }
    }

    /// Metrics of a static attack of `magnitude` MW at the search zone.
    pub fn evaluate(&self, magnitude: f64) -> Result<FrequencyMetrics> {
        let trace = run_with_policy(
            self.model,
            &self.scenario(magnitude)?,
            self.config,
            self.policy,
        )?;
        FrequencyMetrics::from_trace(&trace, &self.metrics)
    }

    /// Bisection on the breach predicate `nadir < limit`.
    pub fn run(&self) -> Result<ThresholdResult> {
        let (mut lo, mut hi) = self.bracket;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(GridError::field(
                "bracket",
                format!("need 0 <= lo < hi, got [{lo}, {hi}]"),
            ));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(GridError::field("tol", "must be positive"));
        }
        if self.model.zone_position(&self.zone).is_none() {
            return Err(GridError::DanglingZone {
                kind: "threshold search",
                zone: self.zone.clone(),
            });
        }

        let (lo_eval, hi_eval) = rayon::join(|| self.evaluate(lo), || self.evaluate(hi));
        let (mut lo_metrics, mut hi_metrics) = (lo_eval?, hi_eval?);
        if lo_metrics.breaches(self.limit) || !hi_metrics.breaches(self.limit) {
            return Err(GridError::InvalidBracket {
                lo,
                hi,
                lo_nadir: lo_metrics.nadir,
                hi_nadir: hi_metrics.nadir,
                limit: self.limit,
            });
        }

        let mut iterations = 0;
        while hi - lo > self.tol {
            let mid = 0.5 * (lo + hi);
            let m = self.evaluate(mid)?;
            iterations += 1;
            if m.breaches(self.limit) {
                hi = mid;
                hi_metrics = m;
            } else {
                lo = mid;
                lo_metrics = m;
            }
        }
        Ok(ThresholdResult {
            zone: self.zone.clone(),
            limit: self.limit,
            min_laa: hi,
            iterations,
            bracket: [lo, hi],
            lo_metrics,
            hi_metrics,
        })
    }
}

/// Smallest static attack magnitude at `zone` whose COI nadir falls below
/// `limit`, to within `tol` MW.
pub fn find_min_laa(
    model: &NetworkModel,
    zone: &str,
    limit: f64,
    bracket: (f64, f64),
    tol: f64,
    config: SimulationConfig,
) -> Result<ThresholdResult> {
    let mut search = ThresholdSearch::new(model, zone, limit, bracket, config);
    search.tol = tol;
    search.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fixtures;

    fn config() -> SimulationConfig {
        SimulationConfig {
            dt: 0.01,
            horizon: 40.0,
            sample_every: 10,
        }
    }

    #[test]
    fn bracket_below_tolerance_returns_hi() {
        let model = fixtures::two_zone();
        // Any positive load step breaches 50 Hz.
        let r = find_min_laa(&model, "A", 50.0, (0.0, 0.5), 1.0, config()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.min_laa, 0.5);
    }

    #[test]
    fn invalid_brackets() {
        let model = fixtures::two_zone();
        assert!(matches!(
            find_min_laa(&model, "A", 49.8, (0.0, 0.0), 1.0, config()),
            Err(GridError::InvalidField { .. })
        ));
        match find_min_laa(&model, "A", 49.8, (0.0, 1.0), 1.0, config()) {
            Err(GridError::InvalidBracket {
                lo_nadir, hi_nadir, ..
            }) => {
                assert_eq!(lo_nadir, 50.0);
                assert!(hi_nadir > 49.8 && hi_nadir < 50.0);
            }
            other => panic!("expected InvalidBracket, got {other:?}"),
        }
        assert!(find_min_laa(&model, "Q", 49.8, (0.0, 500.0), 1.0, config()).is_err());
    }

    #[test]
    fn result_invariants_and_iteration_bound() {
        let model = fixtures::two_zone();
        let (lo, hi, tol) = (0.0, 800.0, 1.0);
        let r = find_min_laa(&model, "B", 49.8, (lo, hi), tol, config()).unwrap();
        let bound = ((hi - lo) / tol).log2().ceil() as usize + 2;
        assert!(r.iterations <= bound);
        assert!(r.hi_metrics.nadir < 49.8);
        assert!(r.lo_metrics.nadir >= 49.8);
        assert!(r.bracket[1] - r.bracket[0] <= tol);
    }
}
