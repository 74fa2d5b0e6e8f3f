//! Preference-based global optimization with radial basis function surrogates
//! and inverse distance weighting exploration.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense linear algebra reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod acquisition;
pub mod benchmarks;
pub mod driver;
pub mod error;
pub mod exploration;
pub mod inner;
mod linalg;
pub mod metrics;
pub mod problem;
pub mod rescaling;
pub mod rng;
pub mod surrogate;

pub use acquisition::{AcquisitionContext, DeltaCycle, Variant, LEGACY_DELTA};
pub use benchmarks::{benchmark_by_name, benchmark_catalog, BenchmarkProblem, SyntheticDm};
pub use driver::{
    initial_queries, solve, IterationRecord, PendingQuery, Phase, PreferenceOracle, ProposalSource,
    Session, SolveOutput, SolverConfig,
};
pub use error::{Error, Result};
pub use exploration::{IdwContext, COINCIDENCE_TOL};
pub use inner::{minimize_acquisition, multistart_refine, PsoConfig, PsoResult};
pub use problem::{latin_hypercube, make_rescaler, AffineRescaler, ConstraintFn, ConstraintSet};
pub use rescaling::{augment, kmeans, AugmentedSet, MinMaxStats};
pub use rng::{derive_seed, Rng};
pub use surrogate::{
    fit_weights, loocv_select, loocv_select_epsilon, loocv_select_epsilon_by_sample, radial_eval,
    surrogate_preference, Comparison, FitSettings, LoocvHoldout, Preference, PreferenceDataset,
    RadialKind, RbfSurrogate, WeightFit,
};
