#![allow(dead_code)]

use atomgrid::grid_model::parse_case;
use atomgrid::NetworkCase;

/// Two machines joined by one lossless line, no loads. Machine 2 exports
/// `p_mw` to machine 1.
pub fn two_machine_case(h1: f64, h2: f64, d: f64, x_line: f64, p_mw: f64) -> NetworkCase {
    parse_case(&format!(
        r#"{{
  "name": "two-machine", "base_mva": 100.0, "f_nominal_hz": 60.0,
  "buses": [
    {{"id": 1, "kind": "slack", "base_kv": 230.0, "v_setpoint": 1.0}},
    {{"id": 2, "kind": "pv", "base_kv": 230.0, "v_setpoint": 1.0}}
  ],
  "branches": [{{"from": 1, "to": 2, "x": {x_line}}}],
  "generators": [
    {{"bus": 1, "kind": "sm", "s_rated": 100.0, "p_dispatch": 0.0, "params": {{"h": {h1}, "xd_prime": 0.2, "d": {d}}}}},
    {{"bus": 2, "kind": "sm", "s_rated": 100.0, "p_dispatch": {p_mw}, "params": {{"h": {h2}, "xd_prime": 0.2, "d": {d}}}}}
  ]
}}"#
    ))
    .expect("two-machine case is valid")
}

/// Two identical idle machines at either end of a lossless line with a
/// midpoint bus 2 and no load.
pub fn symmetric_pair(h: f64, x_half: f64) -> NetworkCase {
    parse_case(&format!(
        r#"{{
  "name": "symmetric-pair", "base_mva": 100.0, "f_nominal_hz": 60.0,
  "buses": [
    {{"id": 1, "kind": "slack", "base_kv": 230.0, "v_setpoint": 1.0}},
    {{"id": 2, "kind": "pq", "base_kv": 230.0}},
    {{"id": 3, "kind": "pv", "base_kv": 230.0, "v_setpoint": 1.0}}
  ],
  "branches": [{{"from": 1, "to": 2, "x": {x_half}}}, {{"from": 2, "to": 3, "x": {x_half}}}],
  "generators": [
    {{"bus": 1, "kind": "sm", "s_rated": 100.0, "p_dispatch": 0.0, "params": {{"h": {h}, "xd_prime": 0.2, "d": 0.0}}}},
    {{"bus": 3, "kind": "sm", "s_rated": 100.0, "p_dispatch": 0.0, "params": {{"h": {h}, "xd_prime": 0.2, "d": 0.0}}}}
  ]
}}"#
    ))
    .expect("symmetric pair is valid")
}

mod gauss_seidel;
#[allow(unused_imports)]
pub use gauss_seidel::gauss_seidel;
