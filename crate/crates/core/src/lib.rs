//! Analysis toolkit for a one-round sealed-bid poker game with two bet sizes.
//!
//! Each of two players sees one private card in `[0, 1]` and simultaneously
//! bets either high (`a`) or low (`b`). The crate provides the rules
//! ([`engine`]), strategies ([`strategy`]), exact payoffs and the closed-form
//! equilibrium ([`analytic`]), best responses and fictitious play
//! ([`solver`]), and seeded Monte Carlo plus exact discrete-deck checks
//! ([`montecarlo`]).

pub mod analytic;
pub mod cli;
pub mod engine;
pub mod error;
pub mod montecarlo;
pub mod solver;
pub mod strategy;

pub use analytic::{
    closed_form_equilibrium, conditional_evs, expected_payoff, indifference_bluff,
    indifference_threshold, taxonomy_table, ConditionalEV, EquilibriumPoint, PayoffValue,
    PiecewiseLinear, TaxonomyTable,
};
pub use engine::{
    deal, play_hand, settle, validate_config, BetAction, Card, CardModel, GameConfig,
    HandResult, Settlement, Stake,
};
pub use error::{Error, Result};
pub use montecarlo::{
    brute_force_discrete, convergence_report, simulate, simulate_with, ExactDiscreteValue,
    MCEstimate, SimulationOptions,
};
pub use solver::{
    best_response, exploitability, fictitious_play, ratio_sweep, BestResponse,
    EquilibriumResult, FictitiousPlay, SweepRow,
};
pub use strategy::{refine, NamedStrategy, Strategy};
