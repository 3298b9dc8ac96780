//! Magnetic wells in the plane.
//!
//! The crate follows a charged particle in a non-vanishing magnetic field
//! `B(q)` on `ℝ²` from three angles:
//!
//! * [`symflow`] integrates the flow of `H(q, p) = |p − A(q)|²` and extracts
//!   guiding-centre data;
//! * [`starbirk`] computes the semiclassical Birkhoff normal form of `H`
//!   near `Σ = H⁻¹(0)` with a truncated Moyal product and turns its classical
//!   part into a numerically evaluable symplectic map;
//! * [`specwell`] discretizes the magnetic Laplacian `(−iħ∇ − A)²` and the
//!   effective one-dimensional operator of the lowest band.
//!
//! [`fieldlab`] holds the fields, gauges and the Darboux chart of `Σ` that
//! all three share.

pub mod fieldlab;
pub mod numeric;
pub mod poly;
pub mod rng;
pub mod specwell;
pub mod starbirk;
pub mod symflow;
