//! Multi-access coded caching with the combinatorial topology.
//!
//! `Λ` caches, and one user for every `λ`-subset of them (`K = C(Λ, λ)`
//! users). This crate simulates the cache-level MAN placement with XOR
//! delivery over `(t+λ)`-subsets end to end, and independently computes the
//! uncoded-placement lower bound from acyclic sets of the index-coding
//! side-information graph. Both meet at the corners
//! `(tN/Λ, C(Λ, t+λ)/C(Λ, t))`.
//!
//! Numeric routines are generic over [`Scalar`]; use the [`Rational`]
//! aliases for exact results and the `f64` ones for plotting.

pub mod bits;
pub mod combinatorics;
pub mod converse;
pub mod error;
pub mod export;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod scheme;

pub use bits::Bits;
pub use combinatorics::{
    binomial, enumerate_ksubsets, enumerate_permutations, rank_ksubset, unrank_ksubset,
    CachePermutation, GroundSet, KSubset,
};
pub use converse::{
    acyclic_selection, averaged_bound, bound_value, build_side_info_graph, count_coefficient,
    f_ratio, is_acyclic, lower_bound_curve, solve_lp, AcyclicSelection, BoundCurve,
    CountCoefficient, LpSolution, SideInfoGraph, SymbolicSizes,
};
pub use error::{MaccError, Result};
pub use model::{
    derive_topology, split_file, worst_case_demands, DemandVector, Library, SubfileId,
    SystemParams, Topology,
};
pub use oracle::EnumerationBudget;
pub use scalar::{fmt_exact, Scalar};
pub use scheme::{
    accessible_subfiles, achievable_load, corner_point_load, decode, deliver, place, simulate,
    LoadReport, MulticastMessage, Placement, Simulation,
};

/// Exact rational used for every equality claim.
pub type Rational = num_rational::BigRational;

pub type ExactBoundCurve = BoundCurve<Rational>;
pub type FloatBoundCurve = BoundCurve<f64>;
pub type ExactSizes = SymbolicSizes<Rational>;
pub type FloatSizes = SymbolicSizes<f64>;
pub type ExactLpSolution = LpSolution<Rational>;
