//! Acyclic subgraphs through spectral radius minimization.
//!
//! A directed graph is acyclic exactly when its adjacency matrix has zero
//! spectral radius. This crate minimizes the spectral radius of a Boolean
//! matrix over a product of per-row L1-balls (at most `r_i` incoming edges cut
//! at vertex `i`), which solves the max-MAS problem exactly through integer
//! bisection on `r`, and turns the resulting acyclic witness into an
//! approximate Maximal Acyclic Subgraph by re-admitting every edge that is
//! forward in the witness' topological order.
//!
//! Module map:
//!
//! * [`graphmat`]: sparse Boolean/weighted matrices, SCCs, Frobenius form.
//! * [`spectral`]: Perron pairs of irreducible blocks, minimal leading
//!   eigenvectors, basic sets.
//! * [`greedy`]: minimal rows and the relaxation loop over `B(A, r)`.
//! * [`solver`]: max-MAS bisection, budgeted/weighted/protected variants,
//!   approximate MAS and the random-permutation baseline.
//! * [`oracle`]: brute-force ground truth for small graphs.
//! * [`harness`]: seeded random graph generators.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod graphmat;
pub mod greedy;
pub mod harness;
pub mod oracle;
pub mod solver;
pub mod spectral;

pub use error::{GenError, GraphError, GreedyError, OracleError, SolverError, SpectralError};
pub use graphmat::{BoolMatrix, FrobeniusForm, IndexSet, WeightedMatrix};
pub use greedy::{min_rho_over_ball, BudgetSpec, GreedyConfig, MinRhoResult, WeightKey};
pub use solver::{
    approx_mas, solve_max_mas, MasApproximation, MaxMasSolution, SolveConfig,
};
pub use spectral::{EigenConfig, EigenPair, MinimalLeadingEigenvector};
