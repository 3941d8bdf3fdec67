//! Two-stage C-to-Rust translation pipeline.
//!
//! A C program is split into fragments (types, globals, functions), ordered
//! by dependencies, and translated in two stages: an interface-preserving
//! unidiomatic stage verified by relinking the translation into the original
//! C build over the C ABI, and an idiomatic refinement stage verified through
//! generated C-ABI harnesses. End-to-end tests drive acceptance of every
//! fragment; idiomaticity metrics are reported on the combined result.

pub mod c_frontend;
pub mod gateway;
pub mod idiomaticity;
pub mod proc;
pub mod rustsrc;
pub mod spec_harness;
