use std::fmt::Write;

use atomgrid::anatomy::{GenReading, OrbitOutcome};
use atomgrid::grid_model::GenKind;

use crate::commands::{AnalyzeDoc, PowerflowDoc, SimSummary, SweepDoc};

const BOLD: &str = "1";
const CYAN: &str = "36";
const YELLOW: &str = "33";

fn paint(text: &str, code: &str, color: bool) -> String {
    if color {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn kind_cell(kind: GenKind, color: bool) -> String {
    let label = format!("{:<5}", kind.to_string());
    match kind {
        GenKind::Vsg => paint(&label, CYAN, color),
        GenKind::Sm => paint(&label, YELLOW, color),
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}

fn vector(r: &[f64]) -> String {
    let parts: Vec<String> = r.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn warnings(out: &mut String, list: &[String], color: bool) {
    for w in list {
        writeln!(out, "{}", paint(&format!("warning: {w}"), YELLOW, color)).unwrap();
    }
}

pub fn powerflow_csv(doc: &PowerflowDoc) -> String {
    let mut s = String::from("bus,kind,v,theta_deg\n");
    for b in &doc.buses {
        let kind = serde_json::to_value(b.kind).unwrap();
        writeln!(s, "{},{},{},{}", b.bus, kind.as_str().unwrap_or(""), b.v, b.theta_deg).unwrap();
    }
    s
}

pub fn powerflow_table(doc: &PowerflowDoc, color: bool) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{} converged in {} iterations (max mismatch {:.2e} p.u.)",
        doc.case, doc.iterations, doc.max_mismatch
    )
    .unwrap();
    writeln!(
        s,
        "{}",
        paint(
            &format!("{:<6} {:>10} {:>11}", "bus", "V (p.u.)", "θ (deg)"),
            BOLD,
            color
        )
    )
    .unwrap();
    for b in &doc.buses {
        writeln!(s, "{:<6} {:>10.6} {:>11.4}", b.bus.to_string(), b.v, b.theta_deg).unwrap();
    }
    writeln!(s).unwrap();
    writeln!(
        s,
        "{}",
        paint(
            &format!("{:<5} {:<6} {:>10} {:>10}", "role", "bus", "P (MW)", "Q (MVAr)"),
            BOLD,
            color
        )
    )
    .unwrap();
    for g in &doc.generators {
        writeln!(
            s,
            "{} {:<6} {:>10.3} {:>10.3}",
            kind_cell(g.kind, color),
            g.gen,
            g.p_mw,
            g.q_mvar
        )
        .unwrap();
    }
    s
}

pub fn summary_table(sum: &SimSummary, color: bool) -> String {
    let mut s = String::new();
    let overlay = sum.overlay.as_deref().map_or(String::new(), |o| format!(" + {o}"));
    writeln!(s, "{}{overlay}", paint(&sum.case, BOLD, color)).unwrap();
    writeln!(
        s,
        "{} samples, dt {} s, t_end {} s, {} RK4 steps per sample",
        sum.samples, sum.dt, sum.t_end, sum.substeps
    )
    .unwrap();
    writeln!(s, "generators: {}", sum.generators.join(", ")).unwrap();
    writeln!(s, "settled: {}", if sum.settled { "yes" } else { "no" }).unwrap();
    warnings(&mut s, &sum.warnings, color);
    s
}

fn reading_row(s: &mut String, r: &GenReading, gap: Option<(f64, u64)>, color: bool) {
    let (dv, n) = gap.map_or((String::new(), String::new()), |(dv, n)| {
        (format!("{dv:+.6}"), n.to_string())
    });
    writeln!(
        s,
        "{} {:<6} {:<6} {:>10.6} {:>10.3} {:>11} {:>4}",
        kind_cell(r.kind, color),
        r.gen,
        r.bus.to_string(),
        r.v,
        r.p_mw,
        dv,
        n
    )
    .unwrap();
}

/// Role, bus, settled V and P per generator (VSGs first), then the gaps,
/// the SM spread and the center of mass.
pub fn analysis_table(doc: &AnalyzeDoc<'_>, color: bool) -> String {
    let mut s = String::new();
    let sc = doc.scenario;
    let overlay = sc.overlay.as_deref().map_or(String::new(), |o| format!(" + {o}"));
    writeln!(
        s,
        "{}{overlay}, {} events, {} s",
        paint(&sc.case, BOLD, color),
        sc.events.events().len(),
        sc.duration_s
    )
    .unwrap();
    match &doc.report.orbit_report {
        OrbitOutcome::Settled(r) => {
            writeln!(
                s,
                "{}",
                paint(
                    &format!(
                        "{:<5} {:<6} {:<6} {:>10} {:>10} {:>11} {:>4}",
                        "role", "gen", "bus", "V (p.u.)", "P (MW)", "ΔV (p.u.)", "n"
                    ),
                    BOLD,
                    color
                )
            )
            .unwrap();
            for (o, g) in r.orbitals.iter().zip(&r.gaps) {
                reading_row(&mut s, o, Some((g.delta_v, g.n)), color);
            }
            for n in &r.nucleus {
                reading_row(&mut s, n, None, color);
            }
            writeln!(s, "SM spread {:.6} p.u., q_unit {} p.u.", r.sm_spread, r.q_unit).unwrap();
            for g in &r.gaps {
                writeln!(
                    s,
                    "VSG {}: nearest SM {} at radius {:.6} p.u., ΔP {:+.3} MW",
                    g.gen, g.nearest_sm_bus, g.radius, g.delta_p_mw
                )
                .unwrap();
            }
        }
        OrbitOutcome::NotSettled {
            t_end,
            quantity,
            peak_to_peak,
        } => {
            writeln!(
                s,
                "orbit report: not settled at t = {t_end} s ({quantity} varies {peak_to_peak:.3e} p.u.)"
            )
            .unwrap();
        }
    }
    let com = &doc.report.com;
    writeln!(
        s,
        "center of mass R = {}, M = {:.6e} kg·m², nearest bus {}, nearest SM {} at {}",
        vector(&com.r),
        com.m_total,
        com.nearest_bus,
        opt(com.nearest_sm_bus),
        com.dist_to_nearest_sm.map_or("-".into(), |d| format!("{d:.6}"))
    )
    .unwrap();
    warnings(&mut s, &doc.report.warnings, color);
    s
}

pub fn sweep_csv(doc: &SweepDoc) -> String {
    let mut s = String::from("n_vsg,replaced,m_total,dist_to_nearest_sm,nearest_bus,nearest_sm_bus");
    for a in 0..doc.embed_dim {
        write!(s, ",r_{a}").unwrap();
    }
    s.push('\n');
    for p in &doc.points {
        let replaced: Vec<String> = p.replaced.iter().map(|b| b.to_string()).collect();
        write!(
            s,
            "{},{},{},{},{},{}",
            p.n_vsg,
            replaced.join(" "),
            p.m_total,
            opt(p.dist_to_nearest_sm),
            p.nearest_bus,
            opt(p.nearest_sm_bus)
        )
        .unwrap();
        for x in &p.r {
            write!(s, ",{x}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn sweep_table(doc: &SweepDoc, color: bool) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{}",
        paint(
            &format!(
                "{:<5} {:<12} {:>14} {:>12} {:>8}  {}",
                "n_vsg", "replaced", "M (kg·m²)", "d_SM (p.u.)", "near SM", "R"
            ),
            BOLD,
            color
        )
    )
    .unwrap();
    for p in &doc.points {
        let replaced: Vec<String> = p.replaced.iter().map(|b| b.to_string()).collect();
        writeln!(
            s,
            "{:<5} {:<12} {:>14.6e} {:>12} {:>8}  {}",
            p.n_vsg,
            if replaced.is_empty() {
                "-".into()
            } else {
                replaced.join(",")
            },
            p.m_total,
            p.dist_to_nearest_sm.map_or("-".into(), |d| format!("{d:.6}")),
            opt(p.nearest_sm_bus),
            vector(&p.r)
        )
        .unwrap();
    }
    s
}
