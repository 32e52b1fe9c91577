//! Hardware-aware circuit cutting and distributed qubit mapping for quantum
//! processors joined by EPR links.
//!
//! The pipeline per link candidate is: build the virtual system topology
//! ([`hardware::con_vst`]), partition the circuit across workers
//! ([`cutter::topo_cutter`]), then place and route every worker
//! ([`router::route`]). [`optimizer::optimize`] runs it over all candidates
//! and keeps the one with the fewest inserted SWAPs.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod cutter;
pub mod hardware;
pub mod optimizer;
pub mod router;
pub mod verifier;
