//! Simulator for the coarse grained multicomputer model CGM(n, p) with an
//! explicit cost ledger, and three parallel selection algorithms built on
//! it.
//!
//! ```
//! use cgm_select::{saukas_song, CgmConfig, Coarseness, Machine};
//!
//! let data: Vec<i64> = (1..=64).rev().collect();
//! let config = CgmConfig::new(64, 4, Coarseness::StrictPSquared).unwrap();
//! let machine = Machine::distribute_evenly(data, config).unwrap();
//! let outcome = saukas_song(machine, 10).unwrap();
//! assert_eq!(outcome.value, 10);
//! println!("{} units in {} rounds", outcome.ledger.total_units(), outcome.ledger.rounds);
//! ```

pub mod error;
pub mod kernels;
pub mod machine;
pub mod selection;
pub mod stats;
pub mod workload;

pub use error::{Error, Result};
pub use kernels::{
    bucket_count, lower_median, select_kth, smallest_index_reaching, weighted_median, BucketCounts,
    SupportSet, WeightedValue,
};
pub use machine::{CgmConfig, Coarseness, CostLedger, Key, Machine};
pub use selection::{
    finite_support_select, interval_bounds, order_stat_mean, order_stat_variance, round_bound,
    saukas_song, saukas_song_with, uniform_expected_select, FiniteSupportParams, IntervalBounds,
    IntervalEstimate, RoundCounts, SaukasSongParams, SelectionOutcome, SelectionPath,
    UniformParams, UnitInterval, UnitKey, ITERATION_CHARGE_BOUND,
};
pub use stats::{
    bound_not_c, bound_not_d_given_c, chebyshev_tail, run_trials, BoundReport, Frequency, KPolicy,
    TrialRecord, TrialSpec,
};
pub use workload::Distribution;
