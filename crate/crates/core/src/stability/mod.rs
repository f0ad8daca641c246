//! Linearized stability of the delayed tracking loop and the outage tolerance.

mod jacobian;
mod lifted;
mod linalg;
mod oracle;
mod tolerance;

pub use jacobian::{jacobian_a, jacobian_b};
pub use lifted::DelayedLoop;
pub use linalg::{eigenvalues3, eigenvector3, is_stable_step, EigenTriple, Matrix3, Matrix3x2};
pub use oracle::{stability_oracle_sim, stability_oracle_with, Excitation, OracleOptions, OracleOutcome};
pub use tolerance::{
    outage_tolerance, outage_tolerance_with, scan_candidate, CandidateScan, StabilityReport, StabilityTest,
    ToleranceOptions, CANDIDATE_CSV_HEADER,
};
