//! Certified bounds on the Hausdorff dimension of sets of continued fractions
//! whose digits avoid a finite list of forbidden words.
//!
//! The pipeline is: [`subshift`] enumerates allowed blocks and the reduced
//! transition matrix, [`transfer`] discretizes the transfer operator by
//! Chebyshev collocation and finds its leading eigenvector, and [`certify`]
//! turns that eigenvector into rigorous ratio bounds with ball arithmetic.

pub mod ball;
pub mod cache;
pub mod certify;
pub mod cf;
pub mod error;
pub mod pipeline;
pub mod scalar;
pub mod sets;
pub mod subshift;
pub mod transfer;
pub mod word;

pub use ball::{Ball, BallF64, BallInterval, BallMp, Cmp3};
pub use error::{Error, Result};
pub use scalar::{Endpoint, Mp, Real, Rnd};
pub use word::{PointedWord, TailSpec, Word};
