//! Numerical toolkit for reversed Copson inequalities with exponent `0 < p < 1`.
//!
//! For a positive weight sequence `λ` with partial sums `Λ_n = λ_1 + … + λ_n`
//! the inequality in question reads
//!
//! ```text
//! Σ_n ( Λ_n^{-1} Σ_{k ≥ n} λ_k x_k )^p  ≥  (p / (L − p))^p · Σ_n x_n^p
//! ```
//!
//! where `L` bounds the gap `Λ_{n+1}/λ_{n+1} − Λ_n/λ_n`. The crate evaluates
//! both sides on truncated sequences, certifies the sufficient conditions on
//! the weights over a finite horizon, builds the auxiliary weight sequence
//! behind the proof, and estimates the best constant from above.

pub mod auxiliary;
pub mod certify;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod inequality;
pub mod params;
pub mod polynomials;
pub mod sum;
pub mod weight_trace;
pub mod weights;

pub use auxiliary::{aux_eval, aux_sign_scan, AuxFunction, AuxParams, SignReport};
pub use certify::{Certificate, ConditionId};
pub use error::{Error, Result};
pub use estimate::{
    brute_force_oracle, extremal_probe, minimize_ratio, stationarity_check, OptimizerConfig,
    RatioEstimate,
};
pub use inequality::{dual_sides, ratio_functional, verify_inequality, TruncatedSequence};
pub use params::{Exponents, Param};
pub use polynomials::{a1, a2, relaxed_threshold, small_gap_threshold, theorem1_applicable};
pub use weight_trace::{build_weights, verify_mean_identity, verify_weighted_condition, WeightTrace};
pub use weights::{WeightFamily, WeightTable};
