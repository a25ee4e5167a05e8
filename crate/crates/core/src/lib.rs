//! Bounds on locally discriminating a bipartite state from the completely
//! mixed state `I/D` without ever rejecting the state itself.
//!
//! For a state `ρ` on `H_A ⊗ H_B` (dimension `D`) and an operation class
//! `c`, `β_c(ρ)` is the smallest probability of accepting `I/D` by a
//! two-outcome measurement `{T, I - T}` from class `c` that accepts `ρ`
//! with certainty. For pure states this crate computes
//!
//! * `β_g = 1/D`, the unrestricted (global) value,
//! * `β_sep = (Σ√λ)²/D`, attained by an explicit separable POVM,
//! * `β̃_↔`, an upper bound on two-way LOCC obtained by optimizing a
//!   concrete three-step protocol,
//! * `β_→ = rank/D`, the exact one-way LOCC value,
//!
//! and checks the ordering `β_g ≤ β_sep ≤ β̃_↔ ≤ β_→`. Every bound comes
//! with the operator that attains it so it can be verified independently.

pub mod error;
pub mod one_way;
pub mod operators;
pub mod optimizer;
pub mod report;
pub mod separable;
pub mod state;
pub mod two_way;

pub use error::{Error, Result};
pub use one_way::{beta_one_way, build_one_way_test, check_lemma3, OneWayBound, OneWayProtocol};
pub use operators::{
    eig_hermitian, partial_trace, povm_element_check, psd_check, support_projection, tensor,
    Operator, Side, Vector,
};
pub use optimizer::{
    beta_two_way_qubit_analytic, beta_two_way_upper, grid_oracle, Method, OptimizationResult,
    OptimizerConfig,
};
pub use report::{BoundsReport, FamilySpec, SweepRow};
pub use separable::{
    beta_sep_pure, build_optimal_separable_povm, distinguishable_set_bound, sep_lower_bound_mixed,
    twirl, verify_appendix_identity, SeparableForm, SeparablePovmPair,
};
pub use state::{
    schmidt_decompose, sqrt_trace_reduced, state_from_spectrum, BipartiteState,
    MaximallyCorrelatedState, SchmidtBases, SchmidtSpectrum,
};
pub use two_way::{
    build_mub_basis, build_two_way_t, sigma_a, simulate_protocol, trace_t_closed_form, DeltaMatrix,
    SimulationResult, Source, TwoWayProtocol,
};
