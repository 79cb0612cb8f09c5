//! Exact and numerical tools for the frozen boundary of uniformly random
//! alternating sign matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`combinatorics`]: ASMs, path corner sum matrices, gog and magog
//!   arrays, the TSSCPP dimer graph and the observables linking them.
//! * [`kasteleyn`]: the Kasteleyn matrix of the dimer graph, its closed-form
//!   inverse and local edge statistics.
//! * [`kernel`]: the Pfaffian point process on the diagonal boundary of the
//!   dimer graph, gap probabilities and the exact law of the frozen corner.
//! * [`asymptotics`]: saddle-point functions and the rescaled kernel.
//! * [`goetw`]: the Airy function, the GOE block kernel and `F1`.
//! * [`sampler`]: heat-bath Glauber dynamics on monotone triangles.
//!
//! [`numeric`] and [`pfaffian`] hold the shared scalar types.

pub mod asymptotics;
pub mod combinatorics;
pub mod error;
pub mod goetw;
pub mod kasteleyn;
pub mod kernel;
pub mod numeric;
pub mod pfaffian;
pub mod sampler;
pub mod verify;

pub use error::{Error, Result};
