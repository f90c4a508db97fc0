//! Mean-field phase diagrams of the unbalanced three-level V-type Dicke model.
//!
//! The crate is `no_std` (with `alloc`) and purely computational:
//!
//! * [`model`]: parameters, derived scalars, symmetry classes, Raman mapping.
//! * [`closed`]: closed-system energy landscape, extrema, Bogoliubov spectra.
//! * [`fluctuations`]: quadratic fluctuation forms around mean-field states.
//! * [`open`]: open-system fixed points, rapidities and inverted-state regions.
//! * [`dynamics`]: mean-field equations of motion, integration, attractors,
//!   dark states and fidelity.
//! * [`grid`]: parameter grids shared by the sweeps.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod closed;
pub mod dynamics;
pub mod error;
pub mod fluctuations;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod open;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
