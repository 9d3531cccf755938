//! Forensic codes: store a message in a 2D matrix or 3D cuboid so that any
//! single large enough axis-parallel fragment recovers it, optionally despite
//! a bounded number of bit flips.
//!
//! Modules, bottom up:
//!
//! - [`grid`]: dense symbol arrays, cropping, prefix sums, file format.
//! - [`discrepancy`]: Van der Corput and Halton-Hammersley point sets and
//!   exact empty-rectangle/box oracles.
//! - [`codec2d`], [`codec3d`]: the noiseless codes.
//! - [`robust`]: the flip-tolerant 2D code and sliced-channel codecs.
//! - [`channel`]: fragmentation and flip injection.
//! - [`rates`]: rate formulas, tables and bounds.
//! - [`verify`]: self-check suites.

pub mod channel;
pub mod codec2d;
pub mod codec3d;
pub mod discrepancy;
pub mod error;
pub mod grid;
pub mod message;
pub mod rates;
pub mod robust;
pub mod verify;

pub use error::{DecodeError, Error, Result};
pub use grid::{AnyGrid, BitGrid2D, BitGrid3D};
pub use message::Message;
