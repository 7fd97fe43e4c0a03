//! Decoding pipeline for the distance-3 heavy-hexagon subsystem code under
//! circuit-level Pauli noise.
//!
//! Circuits come from [`code`], faults from [`noise`], and [`frame`] turns each
//! fault into measurement flips. [`hypergraph`] summarizes those flips as a
//! decoding hypergraph that feeds the matching ([`matching`]) and
//! maximum-likelihood ([`mld`]) decoders. [`harness`] runs Monte Carlo memory
//! experiments and fits their decay curves.

pub mod bits;
pub mod circuit;
pub mod code;
pub mod error;
pub mod exec;
pub mod frame;
pub mod harness;
pub mod hypergraph;
pub mod matching;
pub mod mld;
pub mod noise;
pub mod pauli;
pub mod tableau;

pub use bits::Bits;
pub use circuit::{Component, Kind, MeasurementLabel, Purpose, ScheduledCircuit};
pub use code::{heavy_hex_code, memory_experiment, Basis, CodeDefinition, State};
pub use error::{Error, Result};
pub use exec::Exec;
pub use hypergraph::{build_hypergraph, DecodingHypergraph, EventMap, Hyperedge};
pub use noise::NoiseParams;
pub use pauli::PauliOperator;
