//! Per-check tolerance manifest.
//!
//! Every verification check reads its threshold from here so that quadrature
//! regressions show up as manifest diffs, not silent test edits. Bump the
//! version when a threshold moves.

pub const MANIFEST_VERSION: &str = "1";

/// Exact node-level identities (pure rounding): operator reductions at flat
/// or affine interfaces, adjoint transposition, telescoping defects. Scaled
/// by the operand magnitude where the check says so.
pub const EXACT_IDENTITY: f64 = 1e-12;

/// Identities whose two sides are evaluated through independent quadrature
/// routes on smooth data at M = 1024; dominated by resolution, not rounding.
pub const QUADRATURE_IDENTITY: f64 = 1e-3;

/// Residual-decrease factor demanded per grid doubling on the refinement
/// ladders (second order would give 4; spectral gives far more).
pub const LADDER_DECREASE: f64 = 3.5;

/// Agreement between a base evaluation and the 8x-refined oracle on smooth
/// fixtures; the observed convergence level recorded at build time.
pub const ORACLE_AGREEMENT: f64 = 1e-4;

/// Relative error accepted on the cubic-multiplier response per mode.
pub const MULTIPLIER_RESPONSE: f64 = 2e-2;

/// Positive floor for the smallest singular value of every resolvent probe
/// on the stock Gaussian family (grid-dependent witness, not an analytic
/// constant).
pub const RESOLVENT_FLOOR: f64 = 0.1;

/// Residuals of identities that degenerate to exact statements at the flat
/// interface (spectral crumbs plus rounding).
pub const FLAT_CONFIGURATION: f64 = 1e-10;

/// Relative defect of the first-order formulation along a density solve
/// (`omega = theta'` against the primitive system).
pub const FORMULATION_EQUIVALENCE: f64 = 1e-3;
