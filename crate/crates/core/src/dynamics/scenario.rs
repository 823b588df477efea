use serde::{Deserialize, Serialize};

use super::events::EventSchedule;
use super::integrate::SimOptions;
use crate::error::{Error, Result};
use crate::grid_model::BusId;

/// s
pub const DEFAULT_FAULT_T: f64 = 1.0;
/// s
pub const DEFAULT_CLEAR_T: f64 = 1.1;
/// s
pub const DEFAULT_DURATION: f64 = 10.0;
/// s
pub const DEFAULT_DT: f64 = 1e-3;

/// A reproducible run: which case, which overlay, what happens and for how
/// long. `case` is a built-in name or a file path; `overlay` likewise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub case: String,
    #[serde(default)]
    pub overlay: Option<String>,
    #[serde(default)]
    pub events: EventSchedule,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
}

fn default_duration() -> f64 {
    DEFAULT_DURATION
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

impl Scenario {
    /// Bolted fault at `bus` applied and cleared at the default times.
    pub fn fault(case: impl Into<String>, overlay: Option<String>, bus: BusId) -> Self {
        Scenario {
            case: case.into(),
            overlay,
            events: EventSchedule::fault(bus, DEFAULT_FAULT_T, DEFAULT_CLEAR_T).expect("default timing is ordered"),
            duration_s: DEFAULT_DURATION,
            dt_s: DEFAULT_DT,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(Error::from_json)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Positive duration and dt, at least ten samples, events inside the run.
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::semantic("duration_s", "must be positive"));
        }
        if !(self.dt_s.is_finite() && self.dt_s > 0.0) {
            return Err(Error::semantic("dt_s", "must be positive"));
        }
        if self.dt_s > self.duration_s / 10.0 {
            return Err(Error::semantic("dt_s", "must be at most a tenth of duration_s"));
        }
        for (i, e) in self.events.events().iter().enumerate() {
            if e.t >= self.duration_s {
                return Err(Error::semantic(
                    format!("events[{i}]"),
                    "event time must be before duration_s",
                ));
            }
        }
        Ok(())
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            duration: self.duration_s,
            dt: self.dt_s,
            ..SimOptions::default()
        }
    }
}
