//! Relative-payoff analysis of symmetric two-player games and exploitation
//! search against imitation rules.

pub mod catalog;
pub mod error;
pub mod game;
pub mod io;
pub mod potential;
pub mod properties;
pub mod report;
pub mod rules;
pub mod scalar;
pub mod solver;

pub use catalog::{
    build_catalog_game, generate_random_game, CatalogSpec, Family, RandomGameConfig, RandomMode,
};
pub use error::{Error, Result};
pub use game::{build_relative_game, AnyGame, RelativePayoffGame, SymmetricGame};
pub use io::{load_game, load_game_str, save_game, Format};
pub use potential::{
    certify_potential, check_equivalence, check_valuation, construct_exact_potential,
    separable_decomposition, EquivalenceReport, PotentialCertificate, PotentialVerdict,
};
pub use rules::{trajectory, CustomTable, Rule, RuleSpec, TiePolicy};
pub use scalar::{Scalar, Tolerance, DEFAULT_EPSILON};
pub use solver::{
    brute_force_oracle, build_transition_graph, certify_unbeatable, ExploitVerdict,
    ExploitationCertificate, StartPolicy, TransitionGraph,
};
