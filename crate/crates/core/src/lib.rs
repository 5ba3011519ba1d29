//! Curvature and Weyl-tensor verification for 4-dimensional binary
//! (isothermic) metrics
//!
//! ```text
//! g = M⁻² Σᵢ exp(2 Σ_{j≠i} φ_ij) / F_i (dxⁱ)²
//! ```
//!
//! The crate evaluates scalar fields given as [`Expr`] trees over second-order
//! jets, builds Christoffel/Riemann/Ricci/Weyl tensors from them, implements
//! the closed-form Weyl components and classification conditions for binary
//! metrics, and checks the algebraic identities of the case-iv family exactly
//! over the rationals.

pub mod classify;
pub mod consts;
pub mod curvature;
pub mod error;
pub mod exact;
pub mod expr;
pub mod formulas;
pub mod generate;
pub mod jet;
pub mod metric;
pub mod sampling;
pub mod scalar;
pub mod specfile;

pub use classify::{LemmaCase, PetrovKind, PetrovTag, SignatureKind, SignatureProfile, Verdict};
pub use curvature::CurvatureBundle;
pub use error::Error;
pub use exact::{IdentityCase, IdentityKind, IdentityReport};
pub use expr::{parse, Expr, VarDependence};
pub use jet::{Jet1, Jet2};
pub use metric::{Domain, Family, MetricSpec};
pub use num_rational::BigRational;
pub use scalar::{Func, Real, Ring, Scalar};

/// A point of ℝ⁴ over the ring `S`.
pub type Point4<S> = [S; 4];
