//! Parallel selection on a simulated CGM(n, p).
//!
//! Three algorithms share one outcome type:
//!
//! * [`saukas_song`]: weighted median-of-medians pruning, worst case
//!   `Θ(n log p / p)`, best case `Θ(n/p)`.
//! * [`finite_support_select`]: bucket counting over a known finite set of
//!   key values, `Θ(n/p)`.
//! * [`uniform_expected_select`]: order-statistic interval estimate for
//!   uniformly distributed keys, expected `Θ(n/p)`, falling back to
//!   Saukas-Song when the estimate misses.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::select_kth;
use crate::machine::{CostLedger, Key, Machine};

mod finite_support;
mod order_stats;
mod saukas_song;
mod uniform;

pub use finite_support::{finite_support_select, FiniteSupportParams};
pub use order_stats::{order_stat_mean, order_stat_variance};
pub use saukas_song::{
    round_bound, saukas_song, saukas_song_with, SaukasSongParams, ITERATION_CHARGE_BOUND,
};
pub use uniform::{
    interval_bounds, uniform_expected_select, IntervalBounds, IntervalEstimate, UniformParams,
    UnitInterval, UnitKey,
};

/// Counts observed in one pass of the Saukas-Song loop body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounts {
    /// Remaining elements below the pivot.
    pub less: usize,
    /// Remaining elements equal to the pivot (at least one).
    pub equal: usize,
    /// Remaining elements above the pivot.
    pub greater: usize,
    /// Remaining elements before the discard.
    pub remaining: usize,
    /// Elements kept after the discard; `None` when the pivot was the answer.
    pub retained: Option<usize>,
}

/// Which branch of an algorithm produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPath {
    ExtremeMinLoop,
    ExtremeMaxLoop,
    FastInterval,
    FallbackBelow,
    FallbackAbove,
    /// The interval brackets rank k but holds more than n/p elements.
    FallbackInterval,
    SaukasSongDirect,
    FiniteSupport,
    /// p = 1: plain sequential selection, no communication.
    Sequential,
}

impl SelectionPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionPath::ExtremeMinLoop => "extreme_min_loop",
            SelectionPath::ExtremeMaxLoop => "extreme_max_loop",
            SelectionPath::FastInterval => "fast_interval",
            SelectionPath::FallbackBelow => "fallback_below",
            SelectionPath::FallbackAbove => "fallback_above",
            SelectionPath::FallbackInterval => "fallback_interval",
            SelectionPath::SaukasSongDirect => "saukas_song_direct",
            SelectionPath::FiniteSupport => "finite_support",
            SelectionPath::Sequential => "sequential",
        }
    }

    pub fn is_fallback(&self) -> bool {
        matches!(
            self,
            SelectionPath::FallbackBelow
                | SelectionPath::FallbackAbove
                | SelectionPath::FallbackInterval
        )
    }
}

impl fmt::Display for SelectionPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SelectionPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use SelectionPath::*;
        [
            ExtremeMinLoop,
            ExtremeMaxLoop,
            FastInterval,
            FallbackBelow,
            FallbackAbove,
            FallbackInterval,
            SaukasSongDirect,
            FiniteSupport,
            Sequential,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| Error::Domain(format!("unknown selection path {s:?}")))
    }
}

/// Result of a selection run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionOutcome<K> {
    pub value: K,
    pub path: SelectionPath,
    /// One entry per performance of the Saukas-Song loop body.
    pub trace: Vec<RoundCounts>,
    pub ledger: CostLedger,
    /// Present for the interval-estimate algorithm outside the extreme ranks.
    pub interval: Option<IntervalEstimate>,
}

impl<K> SelectionOutcome<K> {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

pub(crate) fn check_rank(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Rank { k, n });
    }
    Ok(())
}

/// Degenerate p = 1 machine: one sequential selection, no communication.
pub(crate) fn sequential<K: Key>(mut machine: Machine<K>, k: usize) -> Result<SelectionOutcome<K>> {
    let data: Vec<K> = machine.elements().copied().collect();
    machine.charge_local(data.len() as u64);
    let value = select_kth(&data, k)?;
    Ok(SelectionOutcome {
        value,
        path: SelectionPath::Sequential,
        trace: Vec::new(),
        ledger: machine.ledger(),
        interval: None,
    })
}
