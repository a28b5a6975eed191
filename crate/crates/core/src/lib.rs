//! Hybrid quantum-classical molecule generation at desk scale: a simulated
//! patch circuit, a valence-aware graph assembler, small trainable
//! networks, and an evaluation harness.

pub mod assemble;
pub mod blob;
pub mod chem;
pub mod evalx;
pub mod io;
pub mod nets;
pub mod qpatch;
pub mod train;
