//! JSON case files and generator overlays.
//!
//! A case file holds `name`, `base_mva`, `f_nominal_hz`, `buses`, `branches`
//! and `generators`. An overlay is a JSON list of patches applied in order to
//! the generator at `bus`:
//!
//! ```json
//! [{ "bus": 2, "kind": "vsg", "p_dispatch": 133.0, "v_setpoint": 0.984, "relocate_to": 6 }]
//! ```
//!
//! Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};

use super::case::{BusId, BusKind, GenKind, GenModel, NetworkCase};
use crate::error::{Error, Result};

pub fn parse_case(text: &str) -> Result<NetworkCase> {
    let case: NetworkCase = serde_json::from_str(text).map_err(Error::from_json)?;
    case.validate()?;
    Ok(case)
}

pub fn serialize_case(case: &NetworkCase) -> String {
    serde_json::to_string_pretty(case).expect("case serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlayPatch {
    /// Bus of the generator being patched.
    pub bus: BusId,
    pub kind: GenKind,
    /// Kind-specific parameter block. When absent the generator keeps its
    /// parameters if `kind` is unchanged, otherwise takes the kind defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    /// MW
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_dispatch: Option<f64>,
    /// MVA
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_rated: Option<f64>,
    /// Voltage setpoint of the generator's (final) bus, p.u.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_setpoint: Option<f64>,
    /// Move the generator to another bus. The new bus inherits the old bus
    /// type and setpoint; the old bus becomes pq once it hosts no generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relocate_to: Option<BusId>,
    /// Make the generator's bus the slack bus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<bool>,
}

impl OverlayPatch {
    pub fn retype(bus: BusId, kind: GenKind) -> Self {
        OverlayPatch {
            bus,
            kind,
            params: None,
            p_dispatch: None,
            s_rated: None,
            v_setpoint: None,
            relocate_to: None,
            slack: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Overlay(pub Vec<OverlayPatch>);

pub fn parse_overlay(text: &str) -> Result<Overlay> {
    serde_json::from_str(text).map_err(Error::from_json)
}

/// Apply `overlay` to a copy of `case`. The result is re-validated.
pub fn apply_overlay(case: &NetworkCase, overlay: &Overlay) -> Result<NetworkCase> {
    let mut out = case.clone();
    for (i, patch) in overlay.0.iter().enumerate() {
        let loc = format!("overlay[{i}]");
        let matches: Vec<usize> = out
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.bus == patch.bus)
            .map(|(k, _)| k)
            .collect();
        let gi = match matches.as_slice() {
            [k] => *k,
            [] => return Err(Error::semantic(loc, format!("no generator at bus {}", patch.bus))),
            _ => {
                return Err(Error::semantic(
                    loc,
                    format!("bus {} hosts several generators", patch.bus),
                ))
            }
        };

        if let Some(target) = patch.relocate_to {
            relocate(&mut out, gi, target).map_err(|m| Error::semantic(&loc, m))?;
        }

        let gen = &mut out.generators[gi];
        if let Some(params) = &patch.params {
            gen.model = GenModel::from_params(patch.kind, params.clone())
                .map_err(|m| Error::semantic(format!("{loc}.params"), m))?;
        } else if gen.kind() != patch.kind {
            gen.model = GenModel::default_for(patch.kind);
        }
        if let Some(p) = patch.p_dispatch {
            gen.p_dispatch = p;
        }
        if let Some(s) = patch.s_rated {
            gen.s_rated = s;
        }
        let bus_id = gen.bus;

        if patch.slack == Some(true) {
            for b in out.buses.iter_mut() {
                if b.kind == BusKind::Slack {
                    b.kind = BusKind::Pv;
                }
            }
            let b = out
                .buses
                .iter_mut()
                .find(|b| b.id == bus_id)
                .expect("generator bus exists");
            b.kind = BusKind::Slack;
        }
        if let Some(v) = patch.v_setpoint {
            let b = out
                .buses
                .iter_mut()
                .find(|b| b.id == bus_id)
                .expect("generator bus exists");
            b.v_setpoint = Some(v);
        }
    }
    out.validate()?;
    Ok(out)
}

fn relocate(case: &mut NetworkCase, gi: usize, target: BusId) -> Result<(), String> {
    let source = case.generators[gi].bus;
    let ti = case
        .buses
        .iter()
        .position(|b| b.id == target)
        .ok_or_else(|| format!("relocate_to references unknown bus {target}"))?;
    let si = case
        .buses
        .iter()
        .position(|b| b.id == source)
        .expect("source bus exists");
    case.generators[gi].bus = target;

    let (src_kind, src_v) = (case.buses[si].kind, case.buses[si].v_setpoint);
    let tgt = &mut case.buses[ti];
    if tgt.kind == BusKind::Pq || src_kind == BusKind::Slack {
        tgt.kind = src_kind;
        tgt.v_setpoint = tgt.v_setpoint.or(src_v);
    }
    if !case.generators.iter().any(|g| g.bus == source) {
        let src = &mut case.buses[si];
        src.kind = BusKind::Pq;
        src.v_setpoint = None;
    }
    Ok(())
}
