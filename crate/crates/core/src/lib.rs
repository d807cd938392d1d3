//! Phase reduction of limit-cycle oscillators and optimal weak-forcing
//! waveforms for subharmonic N:M entrainment.

// index loops mirror the component formulas; `!(x > 0)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod arnold;
pub mod error;
pub mod fourier;
pub mod interaction;
pub mod io;
pub mod ode;
pub mod par;
pub mod phase;
pub mod sim;
pub mod synthesis;

pub use error::{Error, Result};
pub use fourier::FourierSeries;
pub use interaction::SubharmonicRatio;
pub use par::Execution;
pub use phase::PhaseModel;
pub use synthesis::Waveform;
