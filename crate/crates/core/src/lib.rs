//! Separable reversible data hiding in encrypted 8-bit grayscale images.
//!
//! The pipeline has three independent parties:
//!
//! * the image owner encrypts the image with a stream cipher under an
//!   image key,
//! * the data hider embeds an encrypted payload into the most significant
//!   bits of the encrypted image, blind to the content and holding only a
//!   data key, and
//! * the recipient extracts the payload with the data key alone, or
//!   losslessly reconstructs the original image with the image key alone.
//!
//! Embedding groups the interior pixels of a chess-board lattice into
//! small subsets, packs their MSBs into one integer, halves its range by
//! histogram modification and stores one payload bit per subset.
//! Reconstruction resolves each subset's flip ambiguity by comparing
//! integrated prediction errors of the two candidates.
//!
//! The crate is `no_std` (it allocates through `alloc`); all file and
//! process plumbing lives in the companion CLI crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod codec;
pub mod crypto;
pub mod image;
pub mod lattice;
pub mod pgm;
pub mod predict;
pub mod recovery;

pub use codec::capacity;
pub use crypto::{DataKey, ImageKey};
pub use image::{Dims, GrayImage, Histogram, Psnr};
pub use lattice::{LatticePlan, Role, TargetClass};
pub use predict::Predictor;
pub use recovery::{RiskClass, RiskReport};
