//! Density-operator simulation of Deutschian closed-timelike-curve circuits.
//!
//! The crate solves Deutsch's self-consistency condition for a CTC system
//! interacting with a chronology-respecting system, builds the cyclic-shift
//! cloner circuit with modular-addition readout, and runs the approximate
//! cloning protocol built on an informationally complete measurement: measure,
//! copy the outcome distribution through the CTC, count frequencies, and
//! reconstruct the input state by linear inversion.
//!
//! Modules:
//! - [`qmath`]: dense complex linear algebra over tensor-factored spaces.
//! - [`povm`]: informationally complete measurements and tomography.
//! - [`ctc`]: the fixed-point solver and chronology-respecting output.
//! - [`circuits`]: cyclic shift, modular addition and cloner interactions.
//! - [`cloning`]: the end-to-end protocol, sample planning and corollaries.
//! - [`validation`]: the cross-oracle checks run by `dctc-sim validate`.

pub mod circuits;
pub mod cloning;
pub mod ctc;
pub mod error;
pub mod par;
pub mod povm;
pub mod qmath;
pub mod seed;
pub mod validation;

pub use error::{Error, Result};
