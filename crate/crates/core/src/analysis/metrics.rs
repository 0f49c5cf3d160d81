use serde::Serialize;

use crate::dynamics::{EventKind, Trace};
use crate::error::{GridError, Result};

pub const DEFAULT_ROCOF_WINDOW: f64 = 0.5;
pub const DEFAULT_SETTLING_TAIL: f64 = 10.0;
/// Frequency limits reported in crossing columns, Hz.
pub const STUDY_LIMITS: [f64; 3] = [49.8, 49.5, 48.8];

fn require_samples(trace: &Trace) -> Result<()> {
    if trace.samples.is_empty() {
        Err(GridError::Trace("empty trace".into()))
    } else {
        Ok(())
    }
}

/// Signed windowed slope of largest magnitude, p.u./s on the nominal base.
fn max_windowed_slope(times: &[f64], values: &[f64], window: f64, nominal: f64) -> Result<f64> {
    if times.len() < 2 || times[times.len() - 1] - times[0] < window - 1e-9 {
        return Err(GridError::Trace(format!(
            "trace shorter than the {window} s RoCoF window"
        )));
    }
    let interval = times[1] - times[0];
    let lag = ((window / interval).round() as usize).max(1);
    let mut best = 0.0f64;
    for i in 0..times.len().saturating_sub(lag) {
        let slope = (values[i + lag] - values[i]) / (times[i + lag] - times[i]) / nominal;
        if slope.abs() > best.abs() {
            best = slope;
        }
    }
    Ok(best)
}

/// Largest-magnitude windowed RoCoF of the COI frequency, p.u./s.
pub fn max_rocof(trace: &Trace, window: f64) -> Result<f64> {
    require_samples(trace)?;
    let times: Vec<f64> = trace.times().collect();
    let coi: Vec<f64> = trace.coi().collect();
    max_windowed_slope(&times, &coi, window, trace.nominal_freq)
}

/// Largest-magnitude windowed RoCoF over every zonal frequency, with the
/// zone where it occurred.
pub fn max_rocof_zonal(trace: &Trace, window: f64) -> Result<(f64, String)> {
    require_samples(trace)?;
    let times: Vec<f64> = trace.times().collect();
    let mut best = (0.0f64, String::new());
    for (z, id) in trace.zone_ids.iter().enumerate() {
        let series: Vec<f64> = trace.samples.iter().map(|s| s.zone_freq[z]).collect();
        let slope = max_windowed_slope(&times, &series, window, trace.nominal_freq)?;
        if best.1.is_empty() || slope.abs() > best.0.abs() {
            best = (slope, id.clone());
        }
    }
    Ok(best)
}

/// Minimum COI frequency and the time it is first reached.
pub fn nadir(trace: &Trace) -> Result<(f64, f64)> {
    require_samples(trace)?;
    let mut best = (f64::INFINITY, 0.0);
    for s in &trace.samples {
        if s.coi_freq < best.0 {
            best = (s.coi_freq, s.time);
        }
    }
    Ok(best)
}

/// Mean COI frequency over the final `tail` seconds.
pub fn settling_frequency(trace: &Trace, tail: f64) -> Result<f64> {
    require_samples(trace)?;
    if trace.span() <= tail {
        return Err(GridError::Trace(format!(
            "trace span {} s does not exceed the {tail} s settling tail",
            trace.span()
        )));
    }
    let end = trace.samples.last().unwrap().time;
    let tail_samples: Vec<f64> = trace
        .samples
        .iter()
        .filter(|s| s.time >= end - tail - 1e-9)
        .map(|s| s.coi_freq)
        .collect();
    Ok(tail_samples.iter().sum::<f64>() / tail_samples.len() as f64)
}

/// First time the COI frequency drops strictly below `limit`.
pub fn first_crossing(trace: &Trace, limit: f64) -> Option<f64> {
    trace
        .samples
        .iter()
        .find(|s| s.coi_freq < limit)
        .map(|s| s.time)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCrossing {
    pub limit_hz: f64,
    pub time_s: Option<f64>,
}

/// Per-run metric row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyMetrics {
    /// COI RoCoF, p.u./s.
    pub max_rocof: f64,
    /// Largest zonal RoCoF, p.u./s.
    pub max_rocof_zonal: f64,
    pub rocof_zone: String,
    pub nadir: f64,
    pub nadir_time: f64,
    pub settling_freq: f64,
    pub first_crossing: Vec<LimitCrossing>,
    pub ufls_triggered: bool,
    pub ufls_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricOptions {
    pub rocof_window: f64,
    pub settling_tail: f64,
    pub limits: Vec<f64>,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            rocof_window: DEFAULT_ROCOF_WINDOW,
            settling_tail: DEFAULT_SETTLING_TAIL,
            limits: STUDY_LIMITS.to_vec(),
        }
    }
}

impl FrequencyMetrics {
    pub fn from_trace(trace: &Trace, options: &MetricOptions) -> Result<Self> {
        let (nadir, nadir_time) = nadir(trace)?;
        let (max_rocof_zonal, rocof_zone) = max_rocof_zonal(trace, options.rocof_window)?;
        let ufls_time = trace.events_of(EventKind::UflsTrip).map(|e| e.time).next();
        Ok(FrequencyMetrics {
            max_rocof: max_rocof(trace, options.rocof_window)?,
            max_rocof_zonal,
            rocof_zone,
            nadir,
            nadir_time,
            settling_freq: settling_frequency(trace, options.settling_tail)?,
            first_crossing: options
                .limits
                .iter()
                .map(|&limit_hz| LimitCrossing {
                    limit_hz,
                    time_s: first_crossing(trace, limit_hz),
                })
                .collect(),
            ufls_triggered: ufls_time.is_some(),
            ufls_time,
        })
    }

    pub fn crossing(&self, limit: f64) -> Option<f64> {
        self.first_crossing
            .iter()
            .find(|c| c.limit_hz == limit)
            .and_then(|c| c.time_s)
    }

    pub fn breaches(&self, limit: f64) -> bool {
        self.nadir < limit
    }
}
