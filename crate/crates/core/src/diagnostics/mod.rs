//! Independent oracles and the verification harness.

pub mod oracle;
pub mod suite;
pub mod tolerances;

pub use oracle::{oracle_family, oracle_operator, OperatorTag, FAMILY_CODE_PATH, ORACLE_CODE_PATH};
pub use suite::{
    formulation_residual, run_verification_suite, run_verification_suite_with, FaultInjection,
    VerificationLevel, VerificationReport,
};
