use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_model::BusId;

/// Bolted-fault shunt admittance, p.u. on the system base.
pub const DEFAULT_FAULT_ADMITTANCE: Complex64 = Complex64::new(1e4, -1e4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkMode {
    Prefault,
    Fault,
    Postfault,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    ApplyFault { bus: BusId, admittance: Complex64 },
    ClearFault,
    TripBranch { from: BusId, to: BusId },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EventRecord", into = "EventRecord")]
pub struct Event {
    /// s
    pub t: f64,
    pub action: Action,
}

impl Event {
    pub fn apply_fault(t: f64, bus: BusId) -> Self {
        Event {
            t,
            action: Action::ApplyFault {
                bus,
                admittance: DEFAULT_FAULT_ADMITTANCE,
            },
        }
    }

    pub fn clear_fault(t: f64) -> Self {
        Event {
            t,
            action: Action::ClearFault,
        }
    }

    pub fn trip_branch(t: f64, from: BusId, to: BusId) -> Self {
        Event {
            t,
            action: Action::TripBranch { from, to },
        }
    }
}

// JSON form: {"t": 1.0, "action": "apply_fault", "bus": 8, "admittance": [1e4, -1e4]}
#[derive(Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
enum EventRecord {
    ApplyFault {
        t: f64,
        bus: BusId,
        #[serde(default = "default_admittance")]
        admittance: [f64; 2],
    },
    ClearFault {
        t: f64,
    },
    TripBranch {
        t: f64,
        from: BusId,
        to: BusId,
    },
}

fn default_admittance() -> [f64; 2] {
    [DEFAULT_FAULT_ADMITTANCE.re, DEFAULT_FAULT_ADMITTANCE.im]
}

impl TryFrom<EventRecord> for Event {
    type Error = String;

    fn try_from(r: EventRecord) -> std::result::Result<Self, String> {
        Ok(match r {
            EventRecord::ApplyFault { t, bus, admittance } => Event {
                t,
                action: Action::ApplyFault {
                    bus,
                    admittance: Complex64::new(admittance[0], admittance[1]),
                },
            },
            EventRecord::ClearFault { t } => Event::clear_fault(t),
            EventRecord::TripBranch { t, from, to } => Event::trip_branch(t, from, to),
        })
    }
}

impl From<Event> for EventRecord {
    fn from(e: Event) -> Self {
        let t = e.t;
        match e.action {
            Action::ApplyFault { bus, admittance } => EventRecord::ApplyFault {
                t,
                bus,
                admittance: [admittance.re, admittance.im],
            },
            Action::ClearFault => EventRecord::ClearFault { t },
            Action::TripBranch { from, to } => EventRecord::TripBranch { t, from, to },
        }
    }
}

/// Network topology in force between two events.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkConfig {
    pub fault: Option<(BusId, Complex64)>,
    pub tripped: Vec<(BusId, BusId)>,
}

impl NetworkConfig {
    pub fn mode(&self, any_event_applied: bool) -> NetworkMode {
        match (self.fault.is_some(), any_event_applied) {
            (true, _) => NetworkMode::Fault,
            (false, false) => NetworkMode::Prefault,
            (false, true) => NetworkMode::Postfault,
        }
    }
}

/// Time-ordered events. At most one fault is active at a time and every
/// `clear_fault` must follow an `apply_fault`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct EventSchedule {
    events: Vec<Event>,
}

impl EventSchedule {
    pub fn new(events: Vec<Event>) -> Result<Self> {
        let mut fault_active = false;
        for (i, e) in events.iter().enumerate() {
            let loc = format!("events[{i}]");
            if !e.t.is_finite() || e.t < 0.0 {
                return Err(Error::semantic(
                    loc,
                    format!("event time {} must be finite and >= 0", e.t),
                ));
            }
            if i > 0 && !(e.t > events[i - 1].t) {
                return Err(Error::semantic(loc, "event times must be strictly increasing"));
            }
            match e.action {
                Action::ApplyFault { admittance, .. } => {
                    if fault_active {
                        return Err(Error::semantic(loc, "a fault is already applied"));
                    }
                    if !(admittance.re.is_finite() && admittance.im.is_finite()) || admittance.norm() == 0.0 {
                        return Err(Error::semantic(loc, "fault admittance must be finite and nonzero"));
                    }
                    fault_active = true;
                }
                Action::ClearFault => {
                    if !fault_active {
                        return Err(Error::semantic(loc, "clear_fault without a preceding apply_fault"));
                    }
                    fault_active = false;
                }
                Action::TripBranch { .. } => {}
            }
        }
        Ok(EventSchedule { events })
    }

    /// Apply a bolted fault at `bus` at `t_apply` and clear it at `t_clear`.
    pub fn fault(bus: BusId, t_apply: f64, t_clear: f64) -> Result<Self> {
        Self::new(vec![Event::apply_fault(t_apply, bus), Event::clear_fault(t_clear)])
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Configurations in force after each prefix of the schedule; element 0 is
    /// the pre-fault network.
    pub fn configs(&self) -> Vec<NetworkConfig> {
        let mut out = vec![NetworkConfig::default()];
        let mut cur = NetworkConfig::default();
        for e in &self.events {
            match e.action {
                Action::ApplyFault { bus, admittance } => cur.fault = Some((bus, admittance)),
                Action::ClearFault => cur.fault = None,
                Action::TripBranch { from, to } => cur.tripped.push((from, to)),
            }
            out.push(cur.clone());
        }
        out
    }
}

impl<'de> Deserialize<'de> for EventSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let events = Vec::<Event>::deserialize(d)?;
        EventSchedule::new(events).map_err(serde::de::Error::custom)
    }
}
