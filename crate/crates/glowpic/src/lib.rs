//! A 1D3V particle-in-cell / direct-simulation-Monte-Carlo solver for
//! collisional low-temperature plasmas.
//!
//! Electrons are tracked kinetically as macro-particles; heavy species
//! (ions, metastables, neutrals) are fluid densities on a regular grid.
//! The kinetic side combines electron-heavy collisions (elastic,
//! ionization, excitation, two-step ionization), three-body recombination
//! with unique primary-catalyte pairing, and binary electron-electron
//! Coulomb collisions, coupled to a 1D Poisson / drift-diffusion grid
//! solver through particle-to-cell reductions.
//!
//! The crate is organized around the solver phases:
//!
//! - [`store`]: preallocated structure-of-arrays particle storage with an
//!   atomic append cursor and stable compaction.
//! - [`rng`]: counter-based random number generation; every draw is a pure
//!   function of `(seed, stream, step, slot)` so results do not depend on
//!   execution order or thread count.
//! - [`xsect`]: cross-section table ingestion and certified piecewise
//!   polynomial fits.
//! - [`dsmc`]: the electron-heavy collision/advection kernel and its
//!   null-collision variant.
//! - [`recomb`]: three-body recombination with per-cell atomic catalyte pools.
//! - [`coulomb`]: per-cell pair construction and Takizuka-Abe collisions.
//! - [`p2c`]: particle-to-cell segmented reductions (atomic, sorted-oracle,
//!   and deterministic chunked paths).
//! - [`fields`]: tridiagonal Poisson solve and explicit upwinded transport
//!   of the heavy species.
//! - [`driver`]: operator-split time integration, the 0-D steady-state
//!   mode, diagnostics, rank-replicated ensembles, and the benchmark
//!   harness.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod config;
pub mod constants;
pub mod coulomb;
pub mod driver;
pub mod dsmc;
pub mod error;
pub mod fields;
pub mod grid;
pub mod math;
pub mod p2c;
pub mod recomb;
pub mod rng;
pub mod store;
pub mod xsect;

pub use config::SimConfig;
pub use constants::PhysConstants;
pub use error::{Error, Result};
pub use grid::Grid;
pub use rng::CounterRng;
pub use store::ParticleStore;
