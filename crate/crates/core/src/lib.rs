//! Delayed nonlinear noisy leaky integrate-and-fire network: the firing-rate
//! recurrence N_{k+1} = 1/I(N_k), its pseudo-equilibrium density profiles,
//! and a WENO5/RK3 solver for the full Fokker-Planck dynamics.

pub mod discrete;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod init;
pub mod params;
pub mod pde;
pub mod quad;
pub mod specfun;
pub mod weno;

pub use error::{Error, Result};
pub use params::ModelParams;
