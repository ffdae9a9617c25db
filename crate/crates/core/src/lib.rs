//! Toolkit for studying integer factorisation on quantum hardware.
//!
//! Two pipelines share the number-theory primitives in [`numtheory`]:
//!
//! * [`shor`] simulates the iterative order-finding circuit with optional
//!   Gaussian rotation noise, and [`postproc`] turns measured bitstrings into
//!   factors and success categories.
//! * [`qubo`] builds QUBO cost functions whose ground states encode the
//!   factors, [`hwgraph`] maps them onto Pegasus hardware graphs, and
//!   [`samplers`] minimises them.
//!
//! [`harness`] runs the noise sweeps and scaling benchmarks on top of both.

pub mod error;
pub mod harness;
pub mod hwgraph;
pub mod numtheory;
pub mod postproc;
pub mod qubo;
pub mod samplers;
pub mod seed;
pub mod shor;

pub use error::{Error, Result};
