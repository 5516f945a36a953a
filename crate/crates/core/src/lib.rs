//! Exact evaluation and verification of divisor-sum / finite Euler-product
//! identities for multiplicative arithmetic functions.
//!
//! Evaluators are generic over [`Scalar`]: [`Exact`] rationals for integer
//! exponents, `f64` (or `f32`) for real ones. [`verify`] picks the scalar
//! from the exponent at run time and reports both sides of an identity.

pub mod arith;
pub mod error;
pub mod identities;
pub mod numerics;
pub mod selberg;
pub mod verify;
pub mod zeta;

pub use arith::{factorize, Factorization, SpfTable};
pub use error::{Error, Result};
pub use identities::{DinevaForm, Enumeration, LocalWeight};
pub use numerics::{approx_equal, ArithValue, Exact, Mode, SParam, Scalar};
pub use selberg::SieveWeights;
pub use verify::{verify, verify_range, Identity, IdentityReport, Summary, VerifyOptions};

/// Floating-point scalar used for real exponents.
pub type Approx = f64;

pub type ExactSieveWeights = SieveWeights<Exact>;
pub type ApproxSieveWeights = SieveWeights<Approx>;
