use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: BusId,
    pub kind: BusKind,
    /// kV
    pub base_kv: f64,
    /// p.u., required on pv and slack buses
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_setpoint: Option<f64>,
    /// MW
    #[serde(default)]
    pub load_p: f64,
    /// MVAr
    #[serde(default)]
    pub load_q: f64,
}

fn unit_tap() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub from: BusId,
    pub to: BusId,
    /// Series resistance, p.u. on the system base.
    #[serde(default)]
    pub r: f64,
    /// Series reactance, p.u. on the system base.
    pub x: f64,
    /// Total line-charging susceptance, p.u.
    #[serde(default)]
    pub b_shunt: f64,
    /// Off-nominal turns ratio on the `from` side.
    #[serde(default = "unit_tap")]
    pub tap: f64,
}

impl Branch {
    pub fn connects(&self, a: BusId, b: BusId) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Sm,
    Vsg,
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenKind::Sm => "SM",
            GenKind::Vsg => "VSG",
        })
    }
}

pub const DEFAULT_SM_DAMPING: f64 = 20.0;
pub const DEFAULT_VSG_DAMPING: f64 = 50.0;

fn default_sm_damping() -> f64 {
    DEFAULT_SM_DAMPING
}

fn default_vsg_damping() -> f64 {
    DEFAULT_VSG_DAMPING
}

/// Synchronous-machine parameters. `h`, `xd_prime` and `d` are on the
/// machine's own MVA rating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmParams {
    /// Inertia constant, s.
    pub h: f64,
    /// Transient reactance, p.u.
    pub xd_prime: f64,
    /// Damping, p.u. power per p.u. speed.
    #[serde(default = "default_sm_damping")]
    pub d: f64,
}

impl Default for SmParams {
    fn default() -> Self {
        SmParams {
            h: 5.0,
            xd_prime: 0.25,
            d: DEFAULT_SM_DAMPING,
        }
    }
}

/// Virtual synchronous generator parameters. The DC link (`c_dc`, `v_dc`)
/// sets the virtual inertia; `xd_prime` is the coupling reactance on the
/// converter rating and `d` its frequency droop gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VsgParams {
    /// DC-link capacitance, F.
    pub c_dc: f64,
    /// DC-link voltage, V.
    pub v_dc: f64,
    pub xd_prime: f64,
    #[serde(default = "default_vsg_damping")]
    pub d: f64,
}

impl Default for VsgParams {
    /// 10 mF at 10 kV: 0.5 MJ of stored energy.
    fn default() -> Self {
        VsgParams {
            c_dc: 0.01,
            v_dc: 10_000.0,
            xd_prime: 0.15,
            d: DEFAULT_VSG_DAMPING,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenModel {
    Sm(SmParams),
    Vsg(VsgParams),
}

impl GenModel {
    pub fn kind(&self) -> GenKind {
        match self {
            GenModel::Sm(_) => GenKind::Sm,
            GenModel::Vsg(_) => GenKind::Vsg,
        }
    }

    pub fn default_for(kind: GenKind) -> Self {
        match kind {
            GenKind::Sm => GenModel::Sm(SmParams::default()),
            GenKind::Vsg => GenModel::Vsg(VsgParams::default()),
        }
    }

    pub fn xd_prime(&self) -> f64 {
        match self {
            GenModel::Sm(p) => p.xd_prime,
            GenModel::Vsg(p) => p.xd_prime,
        }
    }

    pub fn damping(&self) -> f64 {
        match self {
            GenModel::Sm(p) => p.d,
            GenModel::Vsg(p) => p.d,
        }
    }

    /// Decode a kind-specific parameter block.
    pub fn from_params(kind: GenKind, params: serde_json::Value) -> Result<Self, String> {
        let model = match kind {
            GenKind::Sm => GenModel::Sm(serde_json::from_value(params).map_err(|e| e.to_string())?),
            GenKind::Vsg => GenModel::Vsg(serde_json::from_value(params).map_err(|e| e.to_string())?),
        };
        Ok(model)
    }

    pub fn params_value(&self) -> serde_json::Value {
        match self {
            GenModel::Sm(p) => serde_json::to_value(p),
            GenModel::Vsg(p) => serde_json::to_value(p),
        }
        .expect("parameter structs serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorRecord", into = "GeneratorRecord")]
pub struct Generator {
    pub bus: BusId,
    /// MVA
    pub s_rated: f64,
    /// MW. Informational on the slack bus.
    pub p_dispatch: f64,
    pub model: GenModel,
    /// MVAr, only used when reactive limits are enforced.
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
}

impl Generator {
    pub fn kind(&self) -> GenKind {
        self.model.kind()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRecord {
    bus: BusId,
    kind: GenKind,
    s_rated: f64,
    p_dispatch: f64,
    /// Kind defaults when absent.
    #[serde(default)]
    params: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_max: Option<f64>,
}

impl TryFrom<GeneratorRecord> for Generator {
    type Error = String;

    fn try_from(rec: GeneratorRecord) -> Result<Self, Self::Error> {
        let model = match rec.params {
            Some(p) => {
                GenModel::from_params(rec.kind, p).map_err(|e| format!("generator at bus {}: params: {e}", rec.bus))?
            }
            None => GenModel::default_for(rec.kind),
        };
        Ok(Generator {
            bus: rec.bus,
            s_rated: rec.s_rated,
            p_dispatch: rec.p_dispatch,
            model,
            q_min: rec.q_min,
            q_max: rec.q_max,
        })
    }
}

impl From<Generator> for GeneratorRecord {
    fn from(g: Generator) -> Self {
        GeneratorRecord {
            bus: g.bus,
            kind: g.kind(),
            s_rated: g.s_rated,
            p_dispatch: g.p_dispatch,
            params: Some(g.model.params_value()),
            q_min: g.q_min,
            q_max: g.q_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkCase {
    pub name: String,
    /// MVA
    pub base_mva: f64,
    #[serde(rename = "f_nominal_hz")]
    pub f_nominal: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
}

impl NetworkCase {
    /// Synchronous speed, electrical rad/s.
    pub fn omega_s(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f_nominal
    }

    pub fn bus_index(&self) -> HashMap<BusId, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn slack_bus(&self) -> Option<&Bus> {
        self.buses.iter().find(|b| b.kind == BusKind::Slack)
    }

    /// Column labels for generators: the bus number, with a `.k` suffix for
    /// the second and later units sharing a bus.
    pub fn generator_labels(&self) -> Vec<String> {
        let mut seen: BTreeMap<BusId, usize> = BTreeMap::new();
        self.generators
            .iter()
            .map(|g| {
                let k = seen.entry(g.bus).or_insert(0);
                *k += 1;
                if *k == 1 {
                    g.bus.to_string()
                } else {
                    format!("{}.{}", g.bus, k)
                }
            })
            .collect()
    }

    /// Distinct generator buses in ascending order.
    pub fn generator_buses(&self) -> Vec<BusId> {
        self.generators
            .iter()
            .map(|g| g.bus)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn total_load_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.load_p).sum()
    }

    /// Check every structural rule; the first violation is reported with its
    /// location.
    pub fn validate(&self) -> Result<()> {
        if !(self.base_mva > 0.0) {
            return Err(Error::semantic("base_mva", "must be > 0"));
        }
        if !(self.f_nominal > 0.0) {
            return Err(Error::semantic("f_nominal_hz", "must be > 0"));
        }
        if self.buses.is_empty() {
            return Err(Error::semantic("buses", "at least one bus is required"));
        }

        let mut first_seen: HashMap<BusId, usize> = HashMap::new();
        for (i, bus) in self.buses.iter().enumerate() {
            let loc = format!("buses[{i}]");
            if bus.id.0 < 1 {
                return Err(Error::semantic(loc, "bus id must be >= 1"));
            }
            if let Some(prev) = first_seen.insert(bus.id, i) {
                return Err(Error::semantic(
                    loc,
                    format!("duplicate bus id {} (first defined at buses[{prev}])", bus.id),
                ));
            }
            if !(bus.base_kv > 0.0) {
                return Err(Error::semantic(loc, "base_kv must be > 0"));
            }
            if !(bus.load_p >= 0.0) || !bus.load_q.is_finite() {
                return Err(Error::semantic(loc, "load_p must be >= 0 and load_q finite"));
            }
            match (bus.kind, bus.v_setpoint) {
                (BusKind::Pq, _) => {}
                (_, Some(v)) if v > 0.0 => {}
                (_, Some(_)) => return Err(Error::semantic(loc, "v_setpoint must be > 0")),
                (_, None) => return Err(Error::semantic(loc, "pv and slack buses need a v_setpoint")),
            }
        }

        let slacks: Vec<BusId> = self
            .buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .map(|b| b.id)
            .collect();
        match slacks.len() {
            1 => {}
            0 => return Err(Error::semantic("buses", "no slack bus")),
            _ => {
                let names: Vec<String> = slacks.iter().map(|b| b.to_string()).collect();
                return Err(Error::semantic(
                    "buses",
                    format!("multiple slack buses: {}", names.join(", ")),
                ));
            }
        }

        for (i, br) in self.branches.iter().enumerate() {
            let loc = format!("branches[{i}]");
            if br.from == br.to {
                return Err(Error::semantic(loc, format!("branch loops on bus {}", br.from)));
            }
            for end in [br.from, br.to] {
                if !first_seen.contains_key(&end) {
                    return Err(Error::semantic(loc, format!("references unknown bus {end}")));
                }
            }
            if !(br.r >= 0.0) || !(br.x > 0.0) || !(br.b_shunt >= 0.0) || !(br.tap > 0.0) {
                return Err(Error::semantic(loc, "requires r >= 0, x > 0, b_shunt >= 0, tap > 0"));
            }
        }

        if self.generators.is_empty() {
            return Err(Error::semantic("generators", "at least one generator is required"));
        }
        for (i, g) in self.generators.iter().enumerate() {
            let loc = format!("generators[{i}]");
            let Some(&bi) = first_seen.get(&g.bus) else {
                return Err(Error::semantic(loc, format!("references unknown bus {}", g.bus)));
            };
            if self.buses[bi].kind == BusKind::Pq {
                return Err(Error::semantic(
                    loc,
                    format!("generator bus {} must be pv or slack", g.bus),
                ));
            }
            if !(g.s_rated > 0.0) || !g.p_dispatch.is_finite() {
                return Err(Error::semantic(loc, "s_rated must be > 0 and p_dispatch finite"));
            }
            let ok = match &g.model {
                GenModel::Sm(p) => p.h > 0.0 && p.xd_prime > 0.0 && p.d >= 0.0,
                GenModel::Vsg(p) => p.c_dc > 0.0 && p.v_dc > 0.0 && p.xd_prime > 0.0 && p.d >= 0.0,
            };
            if !ok {
                return Err(Error::semantic(
                    format!("{loc}.params"),
                    "parameters must be positive (d >= 0)",
                ));
            }
        }
        for (i, bus) in self.buses.iter().enumerate() {
            if bus.kind != BusKind::Pq && !self.generators.iter().any(|g| g.bus == bus.id) {
                return Err(Error::semantic(
                    format!("buses[{i}]"),
                    format!("{:?} bus {} hosts no generator", bus.kind, bus.id).to_lowercase(),
                ));
            }
        }

        self.check_connected()
    }

    fn check_connected(&self) -> Result<()> {
        let index = self.bus_index();
        let mut adj = vec![Vec::new(); self.buses.len()];
        for br in &self.branches {
            let (a, b) = (index[&br.from], index[&br.to]);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.buses.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::semantic(
                format!("buses[{i}]"),
                format!("bus {} is not connected to bus {}", self.buses[i].id, self.buses[0].id),
            ));
        }
        Ok(())
    }
}
