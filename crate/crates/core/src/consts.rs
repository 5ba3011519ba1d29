//! Frozen tolerances and convention factors.

/// Absolute part of the mixed float comparison.
pub const TAU_ABS: f64 = 1e-12;
/// Relative part of the mixed float comparison.
pub const TAU_REL: f64 = 1e-9;
/// Normalized Weyl residual below which a metric counts as conformally flat.
pub const TAU_FLAT: f64 = 1e-8;
/// Minimum coordinate separation for float-mode admissibility.
pub const DEFAULT_GAP: f64 = 1e-6;

/// Ratio of the closed-form `C^k_{ikj}` to the engine's, with the engine's
/// Riemann convention `R^i_{jkl} = ∂_kΓ^i_{lj} − ∂_lΓ^i_{kj} + …`.
/// Measured over random binary metrics; see the `formulas` tests.
pub const KAPPA_CKIKJ: f64 = 1.0;
/// Same for `C^{ij}_{ij}`.
pub const KAPPA_CIJIJ: f64 = 1.0;

/// `|a − b| ≤ τ_abs + τ_rel·max(|a|, |b|)`.
pub fn approx_eq(a: f64, b: f64) -> bool {
    approx_eq_with(a, b, TAU_ABS, TAU_REL)
}

pub fn approx_eq_with(a: f64, b: f64, abs: f64, rel: f64) -> bool {
    (a - b).abs() <= abs + rel * a.abs().max(b.abs())
}
