//! Exact exponent polytopes of Hölder–Brascamp–Lieb data.
//!
//! Given integer matrices φ_1, …, φ_m acting on ℤ^d, the set of exponents
//! s ∈ [0,1]^m for which
//!
//! ```text
//! |E| ≤ ∏_j |φ_j(E)|^{s_j}   for every finite nonempty E ⊆ ℤ^d
//! ```
//!
//! is a convex polytope cut out by the rank conditions
//! `dim W ≤ Σ_j s_j dim φ_j(W)` over all subspaces W ≤ ℚ^d. This crate
//! computes that polytope exactly (inequalities with witness subspaces and
//! extreme points), decides membership of exponent tuples, checks the
//! inequality itself by brute force, and implements the encoding of rational
//! Diophantine sets as rank-realizability questions.

pub mod datum;
pub mod decision;
pub mod diophantine;
pub mod enumerate;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod polytope;
pub mod rational;

pub use datum::{
    clamp_exponents, classify, delete_index, quotient_datum, rank_tuple, restrict_datum,
    restrict_to_kernel_datum, Criticality, ExponentTuple, HblDatum, RankTuple,
};
pub use decision::{
    base_case_rank_one, compute_polytope, is_member, member_with_critical, MembershipTrace,
    PolytopeResult, Solver,
};
pub use enumerate::enumerate_subspaces;
pub use error::{Error, Result};
pub use linalg::{RationalMatrix, Subspace};
pub use polytope::{Inequality, Polytope, Vertex};
pub use rational::Rational;
