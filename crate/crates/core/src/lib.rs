//! High-harmonic generation in a one-dimensional Kronig-Penney solid.
//!
//! The crate covers the whole theory pipeline:
//!
//! - [`lattice`]: square-well potential and its analytic Fourier series
//! - [`bands`]: plane-wave band structure and momentum matrix elements
//! - [`floquet`]: Floquet replicas and the CB1 / lower-replica-of-CB2 coupling
//! - [`pulse`]: sin²-envelope driving pulse
//! - [`tdse`]: velocity-gauge Lanczos propagation of the reduced Bloch state
//! - [`observables`]: Ehrenfest current, zone integration, harmonic spectra
//! - [`scan`]: resumable, parallel parameter sweeps
//! - [`io`]: band tables, heatmap matrices, SVG rendering
//!
//! Everything is in Hartree atomic units; eV and fs appear only in files.
//! Runnable walkthroughs live in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod config;
pub mod error;
pub mod floquet;
pub mod io;
pub mod lattice;
pub mod observables;
pub mod pulse;
pub mod run;
pub mod scan;
pub mod tdse;
pub mod units;

pub use config::{validate_config, RawConfig, RunConfig};
pub use error::{Error, Result};
