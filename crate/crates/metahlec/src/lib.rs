//! Metamodel-driven two-phase verification of datapath designs.
//!
//! The crate implements a desk-scale version of a metamodel-based
//! verification flow for arithmetic pipelines:
//!
//! 1. a structured verification plan (requirements plus an
//!    implementation mapping) is captured in an XML instance of a small
//!    metamodel ([`model`]);
//! 2. phase one checks the requirements against an untimed algorithm
//!    ([`bmc`]), the same role a C-level model checker plays in an
//!    industrial flow;
//! 3. phase two checks the pipelined RTL against the algorithm under the
//!    mapping's port delays, condition and stalling ([`hlec`]);
//! 4. the artifacts an external tool flow would consume (C harness,
//!    SystemVerilog wrapper, runscripts) are generated from the same
//!    instance ([`codegen`]).
//!
//! Both phases discharge their obligations with the built-in bit-vector
//! engine ([`sat`]): expressions are bit-blasted to CNF and solved by a
//! CDCL solver. Bundled example designs with seeded bugs live in
//! [`design`].

pub mod bench;
pub mod bmc;
pub mod codegen;
pub mod design;
pub mod expr;
pub mod hlec;
pub mod model;
pub mod report;
pub mod sat;
