//! Exact-arithmetic construction and verification of elementary abelian
//! towers over local function fields F_q((t)).
//!
//! The crate builds towers L = K(x_0, ..., x_n) with x_i^p - x_i =
//! phi^n(omega_i) beta + eps_i, the group-algebra basis elements
//! Theta_(i) and normalizers alpha_j attached to them, and checks every
//! claimed valuation against an independent norm-based oracle: v_L is
//! only ever computed as v_K of a full conjugate product, never from the
//! structure under test.

pub mod base_field;
pub mod error;
pub mod examples;
pub mod group_algebra;
pub mod ramification;
pub mod scaffold;
pub mod tower;

pub use error::{Error, Result};
