//! Dense complex linear algebra, seeded random streams and samplers.

mod gmm;
mod linalg;
mod matrix;
mod rng;

pub use gmm::{sample_gmm, GmmParams};
pub use linalg::{frobenius_norm, right_pseudo_inverse};
pub use matrix::CMatrix;
pub use rng::{derive_stream, RngStream, StreamRng};
