//! Linear solves with `1 + a_mu A(f)*` and resolvent probes of
//! `lambda - A(f)*`.
//!
//! For `|a_mu| < 1` the shifted adjoint is invertible on the line; the solve
//! below is the discrete shadow of that fact (the shift `lambda = -1/a_mu`
//! lies outside `[-1, 1]`). The Krylov path is matrix-free; a dense LU
//! fallback covers stalls at desk scale.

pub mod gmres;
mod resolvent;
mod theta;

pub use gmres::{gmres as gmres_solve, GmresConfig, GmresOutcome};
pub use resolvent::{resolvent_probe, resolvent_probe_with, ResolventProbe, LAMBDA_LADDER};
pub use theta::{
    density_rhs, solve_theta, solve_theta_refined_norm_report, solve_theta_with,
    RefinedNormReport, SolveOptions, ThetaSolution,
};
