//! Clock-particle model: relativistic clock signals, parity filtering, the
//! four-state lattice walk and its continuum limits.

pub mod clock;
pub mod error;
pub mod kinematics;
pub mod lattice;
pub mod reference;
pub mod spectral;
pub mod studies;

pub use error::{Error, Result};
pub use kinematics::UnitsConfig;
pub use lattice::LatticeParams;
