//! Zeta and Omega numbers of machine domains, the constructions that move
//! between them, and the supporting exact arithmetic.
//!
//! Every real-valued quantity is returned as an [`numerics::Enclosure`]:
//! a pair of exact rationals guaranteed to bracket the true value.

pub mod binstr;
pub mod complexity;
pub mod egyptian;
pub mod iota;
pub mod machines;
pub mod numerics;
pub mod spectral;
