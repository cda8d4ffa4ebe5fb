//! Exact and stochastic analysis of generalized stochastic sandpile models.
//!
//! A model is a finite set of sites, each with a finite toppling law over
//! integer grain-delta vectors; grains leaving the system fall into an
//! implicit sink. The crate covers
//!
//! * validation and the dissipativity (almost-sure termination) test,
//! * deck-coupled stabilization under arbitrary site-selection policies,
//! * exact rational transition matrices via the extended chain, per-site
//!   matrices, recurrent classes, periods and stationary laws,
//! * Monte Carlo occupancy and total-variation comparison.

pub mod cli;
pub mod error;
pub mod exact;
pub mod io;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod presets;
pub mod rational;
pub mod stabilize;

pub use error::{Error, Result};
pub use exact::{
    build_extended, chain_decomposition, collapse, commute_check, enumerate_states, extended_chain,
    mu_independence, per_site_matrix, stationary, stationary_for, transition_matrix,
    ChainDecomposition, ClassSelector, CommuteReport, ExtendedChain, MuIndependenceReport,
    StateIndex, StationaryVector, TopplingRule,
};
pub use linalg::RationalMatrix;
pub use model::{
    add_grain, dissipativity, is_stable, unstable_sites, validate_model, AdditionDistribution,
    Configuration, DissipativityReport, ModelDescription, SandpileModel, SiteIndex,
    TopplingDistribution, TopplingVector,
};
pub use montecarlo::{simulate, tv_distance, OccupancyReport};
pub use rational::Probability;
pub use stabilize::{
    deterministic_stabilize, is_legal_sequence, markov_step, random_stabilize, topple,
    CounterState, DeckSource, SiteSelectionPolicy, TopplingLog,
};
