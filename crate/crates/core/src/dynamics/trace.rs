use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSample {
    pub time: f64,
    /// Absolute frequency per zone, Hz.
    pub zone_freq: Vec<f64>,
    pub coi_freq: f64,
    pub zone_load: Vec<f64>,
    /// Delivered power per BESS unit, MW.
    pub bess_power: Vec<f64>,
    /// Cumulative load shed so far, MW.
    pub shed_mw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    AttackStep,
    UflsTrip,
    BessExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zone: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub mw: f64,
}

/// Sampled output of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub nominal_freq: f64,
    pub zone_ids: Vec<String>,
    pub bess_ids: Vec<String>,
    pub samples: Vec<TraceSample>,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// Single-series trace from `(time, Hz)` pairs, for metric tests and
    /// offline analysis of measured data.
    pub fn from_coi_series(
        nominal_freq: f64,
        series: impl IntoIterator<Item = (f64, f64)>,
    ) -> Self {
        Trace {
            nominal_freq,
            zone_ids: vec!["coi".into()],
            bess_ids: Vec::new(),
            samples: series
                .into_iter()
                .map(|(time, f)| TraceSample {
                    time,
                    zone_freq: vec![f],
                    coi_freq: f,
                    zone_load: vec![0.0],
                    bess_power: Vec::new(),
                    shed_mw: 0.0,
                })
                .collect(),
            events: Vec::new(),
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.time)
    }

    pub fn coi(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.coi_freq)
    }

    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => 0.0,
        }
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn total_load(&self, sample: usize) -> f64 {
        self.samples[sample].zone_load.iter().sum()
    }
}
