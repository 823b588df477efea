//! Built-in IEEE test systems and the case-study overlays that go with them.
//!
//! * `ieee9`: the WSCC 3-machine 9-bus system (Anderson & Fouad numbering:
//!   generators on buses 1-3 behind step-up transformers to buses 4, 7, 9;
//!   loads on buses 5, 6, 8).
//! * `ieee39`: the New England 10-machine 39-bus system (generators on buses
//!   30-39, bus 31 slack).
//!
//! Machine data are the classical-model values usually published with these
//! systems, converted to each unit's own rating. Damping is set to `4·h` so
//! every electromechanical mode decays at 1 s⁻¹.

use super::case::{Branch, Bus, BusId, BusKind, GenModel, Generator, NetworkCase, SmParams};
use super::io::{parse_overlay, Overlay};
use crate::error::{Error, Result};

pub const BUILTIN_CASES: [&str; 2] = ["ieee9", "ieee39"];

pub fn builtin_case(name: &str) -> Result<NetworkCase> {
    match name {
        "ieee9" => Ok(ieee9()),
        "ieee39" => Ok(ieee39()),
        _ => Err(Error::UnknownBuiltin {
            what: "case",
            name: name.to_string(),
        }),
    }
}

const OVERLAYS: [(&str, &str); 7] = [
    ("ieee9-case1", include_str!("../../data/overlays/ieee9-case1.json")),
    ("ieee9-case2", include_str!("../../data/overlays/ieee9-case2.json")),
    ("ieee9-case3", include_str!("../../data/overlays/ieee9-case3.json")),
    ("ieee9-case4", include_str!("../../data/overlays/ieee9-case4.json")),
    ("ieee9-case5", include_str!("../../data/overlays/ieee9-case5.json")),
    ("ieee39-sg", include_str!("../../data/overlays/ieee39-sg.json")),
    ("ieee39-vsg", include_str!("../../data/overlays/ieee39-vsg.json")),
];

pub fn builtin_overlay_names() -> impl Iterator<Item = &'static str> {
    OVERLAYS.iter().map(|(n, _)| *n)
}

pub fn builtin_overlay(name: &str) -> Result<Overlay> {
    let (_, text) = OVERLAYS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownBuiltin {
            what: "overlay",
            name: name.to_string(),
        })?;
    parse_overlay(text)
}

fn bus(id: u32, kind: BusKind, base_kv: f64, v: Option<f64>, p: f64, q: f64) -> Bus {
    Bus {
        id: BusId(id),
        kind,
        base_kv,
        v_setpoint: v,
        load_p: p,
        load_q: q,
    }
}

fn line(from: u32, to: u32, r: f64, x: f64, b: f64) -> Branch {
    Branch {
        from: BusId(from),
        to: BusId(to),
        r,
        x,
        b_shunt: b,
        tap: 1.0,
    }
}

fn xfmr(from: u32, to: u32, r: f64, x: f64, tap: f64) -> Branch {
    Branch {
        from: BusId(from),
        to: BusId(to),
        r,
        x,
        b_shunt: 0.0,
        tap,
    }
}

fn sm(bus: u32, s_rated: f64, p: f64, h: f64, xd_prime: f64) -> Generator {
    Generator {
        bus: BusId(bus),
        s_rated,
        p_dispatch: p,
        model: GenModel::Sm(SmParams {
            h,
            xd_prime,
            d: 4.0 * h,
        }),
        q_min: None,
        q_max: None,
    }
}

fn ieee9() -> NetworkCase {
    use BusKind::*;
    let buses = vec![
        bus(1, Slack, 16.5, Some(1.04), 0.0, 0.0),
        bus(2, Pv, 18.0, Some(1.025), 0.0, 0.0),
        bus(3, Pv, 13.8, Some(1.025), 0.0, 0.0),
        bus(4, Pq, 230.0, None, 0.0, 0.0),
        bus(5, Pq, 230.0, None, 125.0, 50.0),
        bus(6, Pq, 230.0, None, 90.0, 30.0),
        bus(7, Pq, 230.0, None, 0.0, 0.0),
        bus(8, Pq, 230.0, None, 100.0, 35.0),
        bus(9, Pq, 230.0, None, 0.0, 0.0),
    ];
    let branches = vec![
        xfmr(1, 4, 0.0, 0.0576, 1.0),
        xfmr(2, 7, 0.0, 0.0625, 1.0),
        xfmr(3, 9, 0.0, 0.0586, 1.0),
        line(4, 5, 0.010, 0.085, 0.176),
        line(4, 6, 0.017, 0.092, 0.158),
        line(5, 7, 0.032, 0.161, 0.306),
        line(6, 9, 0.039, 0.170, 0.358),
        line(7, 8, 0.0085, 0.072, 0.149),
        line(8, 9, 0.0119, 0.1008, 0.209),
    ];
    // H and x'd converted from the 100 MVA base to each unit's rating.
    let generators = vec![
        sm(1, 247.5, 71.6, 9.55, 0.15048),
        sm(2, 192.0, 163.0, 3.33, 0.230016),
        sm(3, 128.0, 85.0, 2.35, 0.232064),
    ];
    NetworkCase {
        name: "ieee9".into(),
        base_mva: 100.0,
        f_nominal: 60.0,
        buses,
        branches,
        generators,
    }
}

fn ieee39() -> NetworkCase {
    use BusKind::*;
    #[rustfmt::skip]
    let loads: [(u32, f64, f64); 39] = [
        (1, 97.6, 44.2), (2, 0.0, 0.0), (3, 322.0, 2.4), (4, 500.0, 184.0),
        (5, 0.0, 0.0), (6, 0.0, 0.0), (7, 233.8, 84.0), (8, 522.0, 176.6),
        (9, 6.5, -66.6), (10, 0.0, 0.0), (11, 0.0, 0.0), (12, 8.53, 88.0),
        (13, 0.0, 0.0), (14, 0.0, 0.0), (15, 320.0, 153.0), (16, 329.0, 32.3),
        (17, 0.0, 0.0), (18, 158.0, 30.0), (19, 0.0, 0.0), (20, 680.0, 103.0),
        (21, 274.0, 115.0), (22, 0.0, 0.0), (23, 247.5, 84.6), (24, 308.6, -92.2),
        (25, 224.0, 47.2), (26, 139.0, 17.0), (27, 281.0, 75.5), (28, 206.0, 27.6),
        (29, 283.5, 26.9), (30, 0.0, 0.0), (31, 9.2, 4.6), (32, 0.0, 0.0),
        (33, 0.0, 0.0), (34, 0.0, 0.0), (35, 0.0, 0.0), (36, 0.0, 0.0),
        (37, 0.0, 0.0), (38, 0.0, 0.0), (39, 1104.0, 250.0),
    ];
    let setpoints: [(u32, f64); 10] = [
        (30, 1.0499),
        (31, 0.982),
        (32, 0.9841),
        (33, 0.9972),
        (34, 1.0123),
        (35, 1.0494),
        (36, 1.0636),
        (37, 1.0275),
        (38, 1.0265),
        (39, 1.03),
    ];
    let buses = loads
        .iter()
        .map(|&(id, p, q)| {
            let v = setpoints.iter().find(|(b, _)| *b == id).map(|(_, v)| *v);
            let kind = match (id, v) {
                (31, _) => Slack,
                (_, Some(_)) => Pv,
                _ => Pq,
            };
            bus(id, kind, 345.0, v, p, q)
        })
        .collect();

    #[rustfmt::skip]
    let branches = vec![
        line(1, 2, 0.0035, 0.0411, 0.6987),
        line(1, 39, 0.001, 0.025, 0.75),
        line(2, 3, 0.0013, 0.0151, 0.2572),
        line(2, 25, 0.007, 0.0086, 0.146),
        xfmr(2, 30, 0.0, 0.0181, 1.025),
        line(3, 4, 0.0013, 0.0213, 0.2214),
        line(3, 18, 0.0011, 0.0133, 0.2138),
        line(4, 5, 0.0008, 0.0128, 0.1342),
        line(4, 14, 0.0008, 0.0129, 0.1382),
        line(5, 6, 0.0002, 0.0026, 0.0434),
        line(5, 8, 0.0008, 0.0112, 0.1476),
        line(6, 7, 0.0006, 0.0092, 0.113),
        line(6, 11, 0.0007, 0.0082, 0.1389),
        xfmr(6, 31, 0.0, 0.025, 1.07),
        line(7, 8, 0.0004, 0.0046, 0.078),
        line(8, 9, 0.0023, 0.0363, 0.3804),
        line(9, 39, 0.001, 0.025, 1.2),
        line(10, 11, 0.0004, 0.0043, 0.0729),
        line(10, 13, 0.0004, 0.0043, 0.0729),
        xfmr(10, 32, 0.0, 0.02, 1.07),
        xfmr(12, 11, 0.0016, 0.0435, 1.006),
        xfmr(12, 13, 0.0016, 0.0435, 1.006),
        line(13, 14, 0.0009, 0.0101, 0.1723),
        line(14, 15, 0.0018, 0.0217, 0.366),
        line(15, 16, 0.0009, 0.0094, 0.171),
        line(16, 17, 0.0007, 0.0089, 0.1342),
        line(16, 19, 0.0016, 0.0195, 0.304),
        line(16, 21, 0.0008, 0.0135, 0.2548),
        line(16, 24, 0.0003, 0.0059, 0.068),
        line(17, 18, 0.0007, 0.0082, 0.1319),
        line(17, 27, 0.0013, 0.0173, 0.3216),
        xfmr(19, 20, 0.0007, 0.0138, 1.06),
        xfmr(19, 33, 0.0007, 0.0142, 1.07),
        xfmr(20, 34, 0.0009, 0.018, 1.009),
        line(21, 22, 0.0008, 0.014, 0.2565),
        line(22, 23, 0.0006, 0.0096, 0.1846),
        xfmr(22, 35, 0.0, 0.0143, 1.025),
        line(23, 24, 0.0022, 0.035, 0.361),
        xfmr(23, 36, 0.0005, 0.0272, 1.0),
        line(25, 26, 0.0032, 0.0323, 0.531),
        xfmr(25, 37, 0.0006, 0.0232, 1.025),
        line(26, 27, 0.0014, 0.0147, 0.2396),
        line(26, 28, 0.0043, 0.0474, 0.7802),
        line(26, 29, 0.0057, 0.0625, 1.029),
        line(28, 29, 0.0014, 0.0151, 0.249),
        xfmr(29, 38, 0.0008, 0.0156, 1.025),
    ];

    // (bus, dispatch MW, H and x'd on a 100 MVA base); units rated 1000 MVA.
    #[rustfmt::skip]
    let machines: [(u32, f64, f64, f64); 10] = [
        (30, 250.0, 42.0, 0.031),
        (31, 677.871, 30.3, 0.0697),
        (32, 650.0, 35.8, 0.0531),
        (33, 632.0, 28.6, 0.0436),
        (34, 508.0, 26.0, 0.132),
        (35, 650.0, 34.8, 0.05),
        (36, 560.0, 26.4, 0.049),
        (37, 540.0, 24.3, 0.057),
        (38, 830.0, 34.5, 0.057),
        (39, 1000.0, 500.0, 0.006),
    ];
    let s_rated = 1000.0;
    let scale = s_rated / 100.0;
    let generators = machines
        .iter()
        .map(|&(b, p, h, xd)| sm(b, s_rated, p, h / scale, xd * scale))
        .collect();

    NetworkCase {
        name: "ieee39".into(),
        base_mva: 100.0,
        f_nominal: 60.0,
        buses,
        branches,
        generators,
    }
}
