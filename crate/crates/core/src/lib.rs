//! Haar wavelet approximation of compound Poisson processes and Brownian
//! motion.
//!
//! Compound Poisson paths are held exactly as their jumps, so every Haar
//! coefficient and every approximation error is computed in closed form.
//! Linear, greedy and best-M-term selections are provided alongside the
//! matching theoretical quantities, a DCT dictionary for comparison and a
//! seeded parallel Monte Carlo harness.

pub mod dct;
pub mod dyadic;
pub mod error;
pub mod haar;
pub mod harness;
pub mod levy_sim;
pub mod rng;
pub mod schemes;
pub mod theory;

pub use dct::{dct2_forward, dct2_inverse, dct_best_m_error, Dct2, DctCoeffs};
pub use dyadic::{Dyadic, MAX_SCALE};
pub use error::{Error, Result};
pub use haar::{AtomId, Expansion, WaveletCoefficient};
pub use harness::{CurveRecord, Dictionary, ExperimentConfig};
pub use levy_sim::{CompoundPoissonPath, JumpLaw, ProcessKind, SampledPath};
pub use rng::RandomStream;
pub use schemes::{Scheme, Selection};
pub use theory::TheoryPoint;
