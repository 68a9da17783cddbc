//! Embedded example networks and codes, usable from the CLI via
//! `--fixture` / `--code-fixture` and from tests. The JSON constants are the
//! single source of truth; loading them exercises the real file parsers.

use crate::code::{CodeFile, LinearCode};
use crate::gf::FieldSpec;
use crate::network::{Network, NetworkFile};

/// Reverse butterfly: two sources, shared middle path, two sink edges.
pub const RBFLY_JSON: &str = r#"{
  "field": 3,
  "nodes": ["s1", "s2", "v3", "v4", "v5", "v6", "rho"],
  "edges": [
    {"id": "e1", "tail": "s1", "head": "v4"},
    {"id": "e2", "tail": "s1", "head": "v3"},
    {"id": "e3", "tail": "s2", "head": "v3"},
    {"id": "e4", "tail": "s2", "head": "v5"},
    {"id": "e5", "tail": "v3", "head": "v6"},
    {"id": "e6", "tail": "v6", "head": "v4"},
    {"id": "e7", "tail": "v6", "head": "v5"},
    {"id": "e8", "tail": "v4", "head": "rho"},
    {"id": "e9", "tail": "v5", "head": "rho"}
  ],
  "sources": ["s1", "s2"],
  "sink": "rho"
}"#;

/// Two sources, one direct edge each into the sink, over GF(2).
pub const TOY2_JSON: &str = r#"{
  "field": 2,
  "nodes": ["s1", "s2", "rho"],
  "edges": [
    {"id": "e1", "tail": "s1", "head": "rho"},
    {"id": "e2", "tail": "s2", "head": "rho"}
  ],
  "sources": ["s1", "s2"],
  "sink": "rho"
}"#;

/// Rate-2 sum-computing code on the reverse butterfly (no keys). Carries
/// both the local coefficients and the propagated globals.
pub const RBFLY_BASE_JSON: &str = r#"{
  "field": 3,
  "ell": 2,
  "z": [0, 0],
  "globals": {
    "e1": [1, 2, 0, 0],
    "e2": [0, 1, 0, 0],
    "e3": [0, 0, 1, 0],
    "e4": [0, 0, 2, 1],
    "e5": [0, 1, 1, 0],
    "e6": [0, 1, 1, 0],
    "e7": [0, 1, 1, 0],
    "e8": [1, 0, 1, 0],
    "e9": [0, 1, 0, 1]
  },
  "locals": {
    "source_columns": {
      "e1": [1, 2],
      "e2": [0, 1],
      "e3": [1, 0],
      "e4": [2, 1]
    },
    "pair_coeffs": [
      {"from": "e2", "to": "e5", "coeff": 1},
      {"from": "e3", "to": "e5", "coeff": 1},
      {"from": "e5", "to": "e6", "coeff": 1},
      {"from": "e5", "to": "e7", "coeff": 1},
      {"from": "e1", "to": "e8", "coeff": 1},
      {"from": "e6", "to": "e8", "coeff": 1},
      {"from": "e4", "to": "e9", "coeff": 1},
      {"from": "e7", "to": "e9", "coeff": 1}
    ]
  }
}"#;

/// Rate-1 secure code on the reverse butterfly: one message and one key per
/// source; the sum m1+m2 stays hidden from any single-edge wiretapper.
pub const RBFLY_SECURE_JSON: &str = r#"{
  "field": 3,
  "ell": 1,
  "z": [1, 1],
  "globals": {
    "e1": [1, 0, 0, 0],
    "e2": [0, 1, 0, 0],
    "e3": [0, 0, 0, 1],
    "e4": [0, 0, 2, 0],
    "e5": [0, 1, 0, 1],
    "e6": [0, 1, 0, 1],
    "e7": [0, 1, 0, 1],
    "e8": [1, 1, 0, 1],
    "e9": [0, 1, 2, 1]
  }
}"#;

/// Keyless rate-1 sum code on the two-edge network over GF(2).
pub const TOY2_SUM_JSON: &str = r#"{
  "field": 2,
  "ell": 1,
  "z": [0, 0],
  "globals": {
    "e1": [1, 0],
    "e2": [0, 1]
  },
  "locals": {
    "source_columns": {
      "e1": [1],
      "e2": [1]
    },
    "pair_coeffs": []
  }
}"#;

pub fn network_fixture(name: &str) -> Option<&'static str> {
    match name {
        "rbfly" => Some(RBFLY_JSON),
        "toy2" => Some(TOY2_JSON),
        _ => None,
    }
}

pub fn code_fixture(name: &str) -> Option<&'static str> {
    match name {
        "rbfly-base" => Some(RBFLY_BASE_JSON),
        "rbfly-secure" => Some(RBFLY_SECURE_JSON),
        "toy2-sum" => Some(TOY2_SUM_JSON),
        _ => None,
    }
}

pub const NETWORK_FIXTURES: &[&str] = &["rbfly", "toy2"];
pub const CODE_FIXTURES: &[&str] = &["rbfly-base", "rbfly-secure", "toy2-sum"];

pub fn rbfly() -> (Network, FieldSpec) {
    NetworkFile::parse(RBFLY_JSON)
        .unwrap()
        .to_network()
        .unwrap()
}

pub fn toy2() -> (Network, FieldSpec) {
    NetworkFile::parse(TOY2_JSON).unwrap().to_network().unwrap()
}

pub fn rbfly_base(net: &Network) -> LinearCode {
    CodeFile::parse(RBFLY_BASE_JSON)
        .unwrap()
        .to_code(net)
        .unwrap()
}

pub fn rbfly_secure(net: &Network) -> LinearCode {
    CodeFile::parse(RBFLY_SECURE_JSON)
        .unwrap()
        .to_code(net)
        .unwrap()
}

pub fn toy2_sum(net: &Network) -> LinearCode {
    CodeFile::parse(TOY2_SUM_JSON)
        .unwrap()
        .to_code(net)
        .unwrap()
}
