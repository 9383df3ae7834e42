//! Exact p-adic geometry, SL2 decompositions over Z[1/p], and the primitive
//! vector counting experiments built on them.

pub mod decomp;
pub mod error;
pub mod experiment;
pub mod haar;
pub mod lattice;
pub mod matrix;
pub mod padic;
pub mod plane;
pub mod report;
pub mod scalar;
pub mod wellround;

use num_rational::BigRational;

pub use error::{Error, Result};
pub use padic::{PAdicApprox, PNorm, PrimeCtx, Valuation, ZInvP};
pub use scalar::{Field, PAdicValued, Scalar};

/// Matrices over Z[1/p].
pub type ExactMat2 = matrix::Mat2<ZInvP>;
pub type RationalMat2 = matrix::Mat2<BigRational>;
/// Matrices over Z_p truncated at a fixed precision.
pub type ApproxMat2 = matrix::Mat2<PAdicApprox>;
pub type RealMat2 = matrix::Mat2<f64>;
pub type RealMat2F32 = matrix::Mat2<f32>;
pub type RealIwasawa = decomp::IwasawaRealFactors<f64>;
pub type ExactBruhat = decomp::BruhatFactors<BigRational>;
pub type ApproxBruhat = decomp::BruhatFactors<PAdicApprox>;
