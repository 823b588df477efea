use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::machine::MachineDynParams;
use super::DynamicState;
use crate::error::{Error, Result};
use crate::grid_model::{BusId, GenModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub state: DynamicState,
    /// Bus voltage magnitudes, p.u., in case bus order.
    pub v_bus: Vec<f64>,
    /// Electrical power per machine, p.u. on the system base.
    pub p_e: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossOfSynchronism {
    /// s
    pub t: f64,
    pub generator: String,
    /// rad
    pub angle_from_coi: f64,
}

/// Uniformly sampled simulation output. The first sample is the power-flow
/// equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// s
    pub dt: f64,
    /// RK4 steps per sample interval.
    pub substeps: usize,
    pub base_mva: f64,
    pub omega_s: f64,
    pub bus_ids: Vec<BusId>,
    pub gen_labels: Vec<String>,
    pub gen_buses: Vec<BusId>,
    pub gen_models: Vec<GenModel>,
    pub machines: Vec<MachineDynParams>,
    pub samples: Vec<Sample>,
    pub loss_of_synchronism: Option<LossOfSynchronism>,
}

/// When a window of samples counts as a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettleRule {
    /// s
    pub window: f64,
    /// Largest peak-to-peak variation of any bus voltage or machine power
    /// inside the window, p.u.
    pub tolerance: f64,
}

impl Default for SettleRule {
    fn default() -> Self {
        SettleRule {
            window: 1.0,
            tolerance: 0.002,
        }
    }
}

/// Window means of a settled stretch of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettledReadings {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    /// p.u., case bus order
    pub v_bus: Vec<f64>,
    /// p.u. system base, generator order
    pub p_e: Vec<f64>,
    /// rad/s, generator order
    pub omega_dev: Vec<f64>,
    /// Largest peak-to-peak variation seen in the window, p.u.
    pub peak_to_peak: f64,
}

impl SettledReadings {
    pub fn voltage(&self, bus_ids: &[BusId], bus: BusId) -> Option<f64> {
        bus_ids.iter().position(|b| *b == bus).map(|i| self.v_bus[i])
    }
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.state.t)
    }

    pub fn bus_position(&self, bus: BusId) -> Option<usize> {
        self.bus_ids.iter().position(|b| *b == bus)
    }

    /// Index of the sample nearest to `t`, if `t` lies inside the run.
    pub fn sample_index(&self, t: f64) -> Option<usize> {
        let last = self.samples.len().checked_sub(1)?;
        let k = (t / self.dt).round();
        if !(k >= 0.0) || k as usize > last {
            return None;
        }
        Some(k as usize)
    }

    /// Mean readings over the `rule.window` seconds ending at `t_end`
    /// (clipped at t = 0), or [`Error::NotSettled`] if anything in the window
    /// varies by `rule.tolerance` or more.
    pub fn settled(&self, t_end: f64, rule: &SettleRule) -> Result<SettledReadings> {
        if let Some(los) = &self.loss_of_synchronism {
            if t_end >= los.t - 0.5 * self.dt {
                return Err(Error::NotSettled {
                    t_end,
                    quantity: format!("rotor angle of {} (loss of synchronism)", los.generator),
                    peak_to_peak: los.angle_from_coi.abs(),
                });
            }
        }
        let last = self
            .sample_index(t_end)
            .ok_or_else(|| Error::InvalidInput(format!("t = {t_end} s is outside the trajectory")))?;
        let first = self.sample_index((t_end - rule.window).max(0.0)).unwrap_or(0);
        let window = &self.samples[first..=last];
        let count = window.len() as f64;

        let mut worst = (0.0, String::new());
        let mut check = |values: &mut dyn Iterator<Item = f64>, name: String| {
            let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            let p2p = hi - lo;
            if !(p2p <= worst.0) {
                worst = (p2p, name);
            }
        };
        for (i, bus) in self.bus_ids.iter().enumerate() {
            check(&mut window.iter().map(|s| s.v_bus[i]), format!("v_{bus}"));
        }
        for (k, label) in self.gen_labels.iter().enumerate() {
            check(&mut window.iter().map(|s| s.p_e[k]), format!("pe_{label}"));
        }
        if !(worst.0 < rule.tolerance) {
            return Err(Error::NotSettled {
                t_end,
                quantity: worst.1,
                peak_to_peak: worst.0,
            });
        }

        let mean = |f: &dyn Fn(&Sample) -> &[f64], len: usize| -> Vec<f64> {
            (0..len)
                .map(|i| window.iter().map(|s| f(s)[i]).sum::<f64>() / count)
                .collect()
        };
        Ok(SettledReadings {
            t_start: window[0].state.t,
            t_end: window[window.len() - 1].state.t,
            samples: window.len(),
            v_bus: mean(&|s| &s.v_bus, self.bus_ids.len()),
            p_e: mean(&|s| &s.p_e, self.gen_labels.len()),
            omega_dev: mean(&|s| &s.state.omega_dev, self.gen_labels.len()),
            peak_to_peak: worst.0,
        })
    }

    /// [`Trajectory::settled`] over the last window of the run.
    pub fn settled_final(&self, rule: &SettleRule) -> Result<SettledReadings> {
        self.settled(self.t_end(), rule)
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend(self.gen_labels.iter().map(|g| format!("delta_{g}")));
        cols.extend(self.gen_labels.iter().map(|g| format!("omega_{g}")));
        cols.extend(self.bus_ids.iter().map(|b| format!("v_{b}")));
        cols.extend(self.gen_labels.iter().map(|g| format!("pe_{g}")));
        cols.join(",")
    }

    /// One row per sample: time in s, angles in rad, speed deviations in
    /// rad/s, voltages and powers in p.u.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        let mut line = String::new();
        for s in &self.samples {
            line.clear();
            line.push_str(&s.state.t.to_string());
            for x in s
                .state
                .delta
                .iter()
                .chain(&s.state.omega_dev)
                .chain(&s.v_bus)
                .chain(&s.p_e)
            {
                line.push(',');
                line.push_str(&x.to_string());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
