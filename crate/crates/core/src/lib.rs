//! Parameter-free similarity distances and tree clustering.
//!
//! * [`compress`]: compressor backends and the normal-compressor harness.
//! * [`ncd`]: normalized compression distance over byte strings.
//! * [`ngd`]: normalized Google distance over page/document counts.
//! * [`quartet`]: ternary trees fitted to distance matrices, scored by `S(T)`.
//! * [`learn`]: anchor-distance features and an RBF support vector machine.
//! * [`io`]: matrix, tree, trace and model file formats.
//! * [`cli`]: the `simdist` command-line front end.

pub mod cli;
pub mod compress;
pub mod error;
pub mod io;
pub mod learn;
pub mod matrix;
pub mod ncd;
pub mod ngd;
pub mod quartet;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::DistanceMatrix;
