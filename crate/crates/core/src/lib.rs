//! Hybrid analog/digital beamforming for a multiuser massive MIMO-OFDM
//! downlink in the terahertz band, with intercarrier interference (ICI)
//! caused by carrier frequency offset taken into account.
//!
//! The crate is organised bottom-up:
//!
//! - [`mathcore`]: complex matrices, the right pseudo-inverse, seeded random
//!   streams and the Gaussian-mixture angle sampler.
//! - [`channel`]: clustered THz channel realizations (spreading plus
//!   molecular absorption path gain, planar array response).
//! - [`ici`]: ICI coefficient profiles, physical (CFO) or scalar leakage.
//! - [`objectives`]: per-user rate, system rate, interference power and the
//!   Wirtinger gradients with respect to the analog precoder.
//! - [`manifold`]: the constant-modulus manifold and Riemannian conjugate
//!   gradient.
//! - [`precoding`]: zero-forcing digital precoding and the hybrid pipelines.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`). The `*64`
//! aliases below fix the scalar to `f64`, which is what the experiment
//! harness and all tolerances in the test-suite assume.

pub mod channel;
pub mod error;
pub mod ici;
pub mod manifold;
pub mod mathcore;
pub mod objectives;
pub mod precoding;
pub mod scalar;

pub use error::{Error, Result};
pub use mathcore::{derive_stream, CMatrix, GmmParams, RngStream};
pub use num_complex::Complex;
pub use scalar::Real;

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;
pub type CMatrix64 = CMatrix<f64>;
pub type CMatrix32 = CMatrix<f32>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type IciProfile64 = ici::IciProfile<f64>;
pub type ManifoldPoint64 = manifold::ManifoldPoint<f64>;
pub type HybridPrecoder64 = precoding::HybridPrecoder<f64>;
