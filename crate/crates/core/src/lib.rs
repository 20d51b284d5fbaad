//! Inverse-scattering toolkit for coupling quenches of the nonlinear Schrödinger equation
//! iq_t + q_xx − 2c²|q|²q = 0.
//!
//! * [`model`]: couplings, sampled fields, spectral grids, scattering data.
//! * [`specfun`]: complex Gamma and ₂F₁.
//! * [`zs`], [`zeros`]: numerical direct scattering and the discrete spectrum.
//! * [`closed_form`]: the explicit sech, kink and dark-background examples.
//! * [`quench`]: quench map, time evolution, classification, Θ factorization.
//! * [`darboux`]: add/remove a zero of a(k); the dual quench.
//! * [`glm`]: radiative reconstruction (Neumann series and resolvent).
//! * [`nls`]: split-step Fourier oracle for the PDE.
//! * [`io`]: JSON and CSV records.

pub mod closed_form;
pub mod darboux;
pub mod error;
pub mod glm;
pub mod io;
pub mod mat2;
pub mod model;
pub mod nls;
pub mod quench;
pub mod specfun;
pub mod zeros;
pub mod zs;

pub use error::{Error, Result};
pub use mat2::{Mat2, C64};
