//! Secure network function computation for algebraic sums.
//!
//! This crate builds and verifies scalar linear network codes that let a
//! single sink compute the sum of source messages over GF(q) on a directed
//! acyclic network, while a wiretapper observing any one edge subset from a
//! configured collection learns nothing about the protected quantity. Two
//! security notions are supported: protecting the sum itself
//! (target-function security) and protecting the full source message vector
//! (source security).
//!
//! Module map:
//! - [`gf`]: exact finite-field arithmetic and linear algebra.
//! - [`network`]: DAG model, cuts, max-flow, wiretap collections.
//! - [`code`]: linear codes, global-vector propagation, security checks.
//! - [`bounds`]: capacity bounds from cut/wiretap enumeration.
//! - [`construct`]: secure-code constructions by basis transformation.
//! - [`oracle`]: brute-force independence tests and transform-set counting.
//! - [`cli`]: the `snfc` command-line front end.
//!
//! ```
//! use snfc::network::Limits;
//! use snfc::oracle::Statistic;
//! use snfc::{construct, fixtures, oracle};
//!
//! let (net, field) = fixtures::rbfly();
//! let wiretaps = net.wiretap_collection(1, true, &Limits::default()).unwrap();
//! let built = construct::construct_target(&net, &field, 2, 1, 7, &wiretaps).unwrap();
//! assert!(built.code.check_computability(&net).is_some());
//!
//! let full = net.wiretap_collection(1, false, &Limits::default()).unwrap();
//! assert!(built.code.check_target_security(&net, &full).secure);
//! let verdict =
//!     oracle::oracle_security(&built.code, &full, Statistic::TargetFn, 1_000_000).unwrap();
//! assert!(verdict.secure);
//! ```

pub mod bounds;
pub mod cli;
pub mod code;
pub mod construct;
pub mod fixtures;
pub mod gf;
pub mod netgen;
pub mod network;
pub mod oracle;

pub use gf::{FieldSpec, Matrix};
pub use network::{EdgeId, Limits, Network, NodeId, WiretapCollection};

#[cfg(test)]
mod tests {
    // Values are immutable after construction and all analyses are pure, so
    // everything can be shared across threads.
    #[test]
    fn core_types_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<crate::gf::FieldSpec>();
        check::<crate::gf::Matrix>();
        check::<crate::network::Network>();
        check::<crate::network::WiretapCollection>();
        check::<crate::code::LinearCode>();
        check::<crate::construct::TransformKit>();
        check::<crate::oracle::JointDistribution>();
    }
}
