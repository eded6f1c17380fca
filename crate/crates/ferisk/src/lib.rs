//! Fractional-order entropy and entropy-based risk measures for risky prospects.
//!
//! The library has three layers:
//!
//! * [`entropy`] and [`prospect`] implement the primitives: Ubriaco's
//!   fractional-order entropy `S_q(p) = sum p (-ln p)^q` with its exact
//!   normalizer, and discrete payoff/probability prospects with an S-shaped
//!   logarithmic utility.
//! * [`market`] turns daily close prices into prospects (log returns, a shared
//!   uniform bin grid, per-bin frequencies and mean payoffs), [`risk`] combines
//!   entropy, variance and expected utility into the EU-FE / EU-FEV / NEU-FE /
//!   NEU-FEV risk measures and ranks prospects by them.
//! * [`ml`] builds an entropy feature matrix and fits four small from-scratch
//!   regressors against the risk scores; [`sweep`] and [`report`] evaluate
//!   `(q, lambda)` grids and write the CSV/JSON outputs.
//!
//! Every random choice in the crate flows from an explicit seed through
//! [`rng::Rng`], so equal seeds give byte-identical results on any platform.

pub mod entropy;
pub mod error;
pub mod market;
pub mod ml;
pub mod prospect;
pub mod report;
pub mod risk;
pub mod rng;
pub mod sweep;

pub use entropy::{
    entropy_term_max, fractional_entropy, information_gain, normalized_fractional_entropy,
    normalized_shannon_entropy, Distribution, EntropyParams, SupportRule,
};
pub use error::{Error, Result};
pub use prospect::{expected_utility, utility, MomentSummary, Outcome, Prospect};
pub use risk::{rank, score, ActionSpace, Measure, Normalizers, Ranking, RiskConfig, RiskScore};
