//! Oracles, structural checks and Monte Carlo experiments.

pub mod checks;
pub mod montecarlo;
pub mod streams;

pub use checks::{
    check_fair, check_monotone, coupled_dond_pair, credit_substitution_check, Branch, CoupledPair,
    CreditCheck, CreditSubstitutionReport, FairCheck,
};
pub use montecarlo::{
    monte_carlo, monte_carlo_sets, monte_carlo_stream, Experiment, MonteCarloReport,
};
pub use streams::{exact_f0, generate_stream, last_occurrences, LastOccurrence, StreamSpec};
