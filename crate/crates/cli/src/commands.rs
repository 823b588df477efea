use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use atomgrid::anatomy::{analyze, sweep, AnalysisOptions, AtomicReport, ClusterReference, RadiusNetwork, SweepPoint};
use atomgrid::dynamics::{LossOfSynchronism, SettleRule, Trajectory};
use atomgrid::grid_model::{
    apply_overlay, builtin_case, builtin_overlay, builtin_overlay_names, parse_case, parse_overlay, BusId, BusKind,
    GenKind, NetworkCase, Overlay, BUILTIN_CASES,
};
use atomgrid::{simulate, solve_powerflow, EventSchedule, PowerFlowOptions, PowerFlowSolution, Scenario};

use crate::output::{to_json, use_color, write_atomic};
use crate::render;
use crate::{
    AnalyzeArgs, CaseArgs, CliError, Command, Format, PowerflowArgs, RadiusNet, Reference, ScenarioArgs, SimulateArgs,
    SweepArgs,
};

type CmdResult = Result<(), CliError>;

pub fn dispatch(cmd: &Command, out: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Powerflow(a) => cmd_powerflow(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes()).map_err(CliError::Stdout)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Relative paths inside a scenario file are taken relative to that file.
fn source_path(src: &str, base: Option<&Path>) -> PathBuf {
    let p = PathBuf::from(src);
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

fn resolve_case(src: &str, base: Option<&Path>) -> Result<NetworkCase, CliError> {
    if BUILTIN_CASES.contains(&src) {
        return Ok(builtin_case(src)?);
    }
    let path = source_path(src, base);
    if !path.exists() {
        return Err(CliError::Input(format!(
            "case `{src}` is neither a built-in ({}) nor an existing file",
            BUILTIN_CASES.join(", ")
        )));
    }
    Ok(parse_case(&read_text(&path)?)?)
}

fn resolve_overlay(src: &str, base: Option<&Path>) -> Result<Overlay, CliError> {
    if builtin_overlay_names().any(|n| n == src) {
        return Ok(builtin_overlay(src)?);
    }
    let path = source_path(src, base);
    if !path.exists() {
        return Err(CliError::Input(format!(
            "overlay `{src}` is neither a built-in ({}) nor an existing file",
            builtin_overlay_names().collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(parse_overlay(&read_text(&path)?)?)
}

fn load_case(case: &str, overlay: Option<&str>, base: Option<&Path>) -> Result<NetworkCase, CliError> {
    let net = resolve_case(case, base)?;
    match overlay {
        Some(o) => Ok(apply_overlay(&net, &resolve_overlay(o, base)?)?),
        None => Ok(net),
    }
}

/// The scenario from --scenario or from the individual flags, plus the case
/// it runs on.
fn prepare(args: &ScenarioArgs) -> Result<(Scenario, NetworkCase), CliError> {
    let (scenario, base) = match &args.scenario {
        Some(path) => {
            let s = Scenario::parse(&read_text(path)?)?;
            (s, Some(path.parent().unwrap_or(Path::new(".")).to_path_buf()))
        }
        None => {
            let events = match args.fault_bus {
                Some(bus) => EventSchedule::fault(BusId(bus), args.fault_t, args.clear_t)?,
                None => EventSchedule::default(),
            };
            let s = Scenario {
                case: args.case.clone().expect("clap requires --case without --scenario"),
                overlay: args.overlay.clone(),
                events,
                duration_s: args.duration,
                dt_s: args.dt,
            };
            s.validate()?;
            (s, None)
        }
    };
    let case = load_case(&scenario.case, scenario.overlay.as_deref(), base.as_deref())?;
    Ok((scenario, case))
}

fn run_scenario(scenario: &Scenario, case: &NetworkCase) -> Result<Trajectory, CliError> {
    let pf = solve_powerflow(case, &PowerFlowOptions::default())?;
    Ok(simulate(case, &pf, &scenario.events, &scenario.sim_options())?)
}

fn unsupported(cmd: &str, f: Format) -> CliError {
    let name = match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Table => "table",
    };
    CliError::Input(format!("--format {name} is not available for {cmd}"))
}

#[derive(Debug, Serialize)]
pub struct BusRow {
    pub bus: BusId,
    pub kind: BusKind,
    /// p.u.
    pub v: f64,
    pub theta_deg: f64,
}

#[derive(Debug, Serialize)]
pub struct GenRow {
    pub gen: String,
    pub bus: BusId,
    pub kind: GenKind,
    pub p_mw: f64,
    pub q_mvar: f64,
}

#[derive(Debug, Serialize)]
pub struct PowerflowDoc {
    pub case: String,
    pub iterations: usize,
    pub max_mismatch: f64,
    pub q_limited: Vec<BusId>,
    pub buses: Vec<BusRow>,
    pub generators: Vec<GenRow>,
}

impl PowerflowDoc {
    fn new(case: &NetworkCase, sol: &PowerFlowSolution) -> Self {
        let buses = case
            .buses
            .iter()
            .zip(&sol.v)
            .map(|(b, v)| BusRow {
                bus: b.id,
                kind: b.kind,
                v: v.norm(),
                theta_deg: v.arg().to_degrees(),
            })
            .collect();
        let generators = case
            .generators
            .iter()
            .zip(case.generator_labels())
            .enumerate()
            .map(|(k, (g, gen))| GenRow {
                gen,
                bus: g.bus,
                kind: g.kind(),
                p_mw: sol.p_gen[k],
                q_mvar: sol.q_gen[k],
            })
            .collect();
        PowerflowDoc {
            case: case.name.clone(),
            iterations: sol.iterations,
            max_mismatch: sol.max_mismatch,
            q_limited: sol.q_limited.clone(),
            buses,
            generators,
        }
    }
}

fn cmd_powerflow(a: &PowerflowArgs, out: &mut dyn Write) -> CmdResult {
    let CaseArgs { case, overlay } = &a.case;
    let net = load_case(case, overlay.as_deref(), None)?;
    if !(a.tol.is_finite() && a.tol > 0.0) || a.max_iter == 0 {
        return Err(CliError::Input(
            "--tol must be positive and --max-iter at least 1".into(),
        ));
    }
    let opts = PowerFlowOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        enforce_q_limits: a.q_limits,
        warm_start: None,
    };
    let doc = PowerflowDoc::new(&net, &solve_powerflow(&net, &opts)?);
    let json = to_json(&doc);
    if let Some(dir) = &a.output.out {
        write_atomic(dir, "powerflow.json", json.as_bytes())?;
    }
    match a.output.format.unwrap_or(Format::Json) {
        Format::Json => emit(out, &json),
        Format::Csv => emit(out, &render::powerflow_csv(&doc)),
        Format::Table => emit(out, &render::powerflow_table(&doc, use_color())),
    }
}

#[derive(Debug, Serialize)]
pub struct SimSummary {
    pub case: String,
    pub overlay: Option<String>,
    pub samples: usize,
    /// s
    pub dt: f64,
    pub t_end: f64,
    pub substeps: usize,
    pub generators: Vec<String>,
    pub settled: bool,
    pub loss_of_synchronism: Option<LossOfSynchronism>,
    pub warnings: Vec<String>,
}

impl SimSummary {
    fn new(scenario: &Scenario, traj: &Trajectory) -> Self {
        let mut warnings = Vec::new();
        if let Some(los) = &traj.loss_of_synchronism {
            warnings.push(format!(
                "loss of synchronism: generator {} at t = {} s; trajectory truncated",
                los.generator, los.t
            ));
        }
        let settled = match traj.settled_final(&SettleRule::default()) {
            Ok(_) => true,
            Err(e) => {
                warnings.push(e.to_string());
                false
            }
        };
        SimSummary {
            case: scenario.case.clone(),
            overlay: scenario.overlay.clone(),
            samples: traj.samples.len(),
            dt: traj.dt,
            t_end: traj.t_end(),
            substeps: traj.substeps,
            generators: traj.gen_labels.clone(),
            settled,
            loss_of_synchronism: traj.loss_of_synchronism.clone(),
            warnings,
        }
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let (scenario, case) = prepare(&a.scenario)?;
    let traj = run_scenario(&scenario, &case)?;
    let summary = SimSummary::new(&scenario, &traj);
    let summary_json = to_json(&summary);
    if let Some(dir) = &a.output.out {
        write_atomic(dir, "trajectory.csv", traj.to_csv().as_bytes())?;
        write_atomic(dir, "scenario.json", (scenario.to_json() + "\n").as_bytes())?;
        write_atomic(dir, "summary.json", summary_json.as_bytes())?;
    }
    let default = if a.output.out.is_some() {
        Format::Json
    } else {
        Format::Csv
    };
    match a.output.format.unwrap_or(default) {
        Format::Csv if a.output.out.is_none() => emit(out, &traj.to_csv()),
        Format::Csv | Format::Json => emit(out, &summary_json),
        Format::Table => emit(out, &render::summary_table(&summary, use_color())),
    }
}

#[derive(Debug, Serialize)]
pub struct AnalyzeDoc<'a> {
    pub scenario: &'a Scenario,
    pub options: &'a AnalysisOptions,
    #[serde(flatten)]
    pub report: &'a AtomicReport,
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> CmdResult {
    let format = a.output.format.unwrap_or(Format::Json);
    if format == Format::Csv {
        return Err(unsupported("analyze", format));
    }
    if !(a.settle_window.is_finite() && a.settle_window > 0.0) {
        return Err(CliError::Input("--settle-window must be positive".into()));
    }
    let opts = AnalysisOptions {
        q_unit: a.q_unit,
        embed_dim: a.embed_dim,
        settle: SettleRule {
            window: a.settle_window,
            ..SettleRule::default()
        },
        reference: match a.reference {
            Reference::Mean => ClusterReference::Mean,
            Reference::Nearest => ClusterReference::Nearest,
        },
        radius_network: match a.radius_network {
            RadiusNet::Prefault => RadiusNetwork::Prefault,
            RadiusNet::Postfault => RadiusNetwork::Postfault,
        },
    };
    let (scenario, case) = prepare(&a.scenario)?;
    let traj = run_scenario(&scenario, &case)?;
    let report = analyze(&case, &scenario.events, &traj, &opts)?;
    let doc = AnalyzeDoc {
        scenario: &scenario,
        options: &opts,
        report: &report,
    };
    let json = to_json(&doc);
    if let Some(dir) = &a.output.out {
        write_atomic(dir, "report.json", json.as_bytes())?;
        write_atomic(dir, "report.txt", render::analysis_table(&doc, false).as_bytes())?;
        write_atomic(dir, "scenario.json", (scenario.to_json() + "\n").as_bytes())?;
    }
    match format {
        Format::Table => emit(out, &render::analysis_table(&doc, use_color())),
        _ => emit(out, &json),
    }
}

#[derive(Debug, Serialize)]
pub struct SweepDoc {
    pub case: String,
    pub overlay: Option<String>,
    pub replacements: Vec<BusId>,
    pub embed_dim: usize,
    pub points: Vec<SweepPoint>,
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CmdResult {
    let CaseArgs { case, overlay } = &a.case;
    let net = load_case(case, overlay.as_deref(), None)?;
    let replacements: Vec<BusId> = a.replace.iter().map(|&b| BusId(b)).collect();
    let doc = SweepDoc {
        case: case.clone(),
        overlay: overlay.clone(),
        points: sweep(&net, &replacements, a.embed_dim)?,
        replacements,
        embed_dim: a.embed_dim,
    };
    let json = to_json(&doc);
    if let Some(dir) = &a.output.out {
        write_atomic(dir, "sweep.json", json.as_bytes())?;
    }
    match a.output.format.unwrap_or(Format::Json) {
        Format::Json => emit(out, &json),
        Format::Csv => emit(out, &render::sweep_csv(&doc)),
        Format::Table => emit(out, &render::sweep_table(&doc, use_color())),
    }
}
