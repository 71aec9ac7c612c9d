use serde::{Deserialize, Serialize};

use super::{check_rank, sequential, RoundCounts, SelectionOutcome, SelectionPath};
use crate::error::{Error, Result};
use crate::kernels::{lower_median, select_kth, weighted_median, WeightedValue};
use crate::machine::{Key, Machine};

/// Upper bound `C` on the units charged by one performance of the loop body
/// on an evenly distributed machine: `C * (n/p + p)`.
///
/// One pass charges three scans of the longest segment (local medians,
/// three-way counts, compaction), two `Θ(p)` folds at processor 0 and two
/// gathers plus two broadcasts of `p` units each. With the longest segment
/// at most `n/p + 1` that is `3(n/p + 1) + 2p + 4p <= 9 (n/p + p)`.
pub const ITERATION_CHARGE_BOUND: u64 = 9;

/// Loop-exit factor: the loop runs while more than
/// `termination_factor * n / p` elements remain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaukasSongParams {
    pub termination_factor: f64,
}

impl Default for SaukasSongParams {
    fn default() -> Self {
        SaukasSongParams {
            termination_factor: 1.0,
        }
    }
}

impl SaukasSongParams {
    pub fn validate(&self) -> Result<()> {
        // NaN fails this too
        if self.termination_factor.is_nan() || self.termination_factor < 1.0 {
            return Err(Error::Config(format!(
                "termination factor must be >= 1, got {}",
                self.termination_factor
            )));
        }
        Ok(())
    }
}

/// `ceil(log(p) / log(4/3))`: the maximal trace length with the default
/// termination factor. Before the `i`-th pass at most `(3/4)^(i-1) n`
/// elements remain and the loop only runs while more than `n/p` remain.
pub fn round_bound(p: usize) -> usize {
    if p <= 1 {
        return 0;
    }
    // smallest j with (4/3)^j >= p, computed exactly in integers
    let (mut num, mut den, mut j) = (1u128, 1u128, 0usize);
    while num < den * p as u128 {
        num *= 4;
        den *= 3;
        j += 1;
    }
    j
}

pub fn saukas_song<K: Key>(machine: Machine<K>, k: usize) -> Result<SelectionOutcome<K>> {
    saukas_song_with(machine, k, SaukasSongParams::default())
}

pub fn saukas_song_with<K: Key>(
    mut machine: Machine<K>,
    k: usize,
    params: SaukasSongParams,
) -> Result<SelectionOutcome<K>> {
    params.validate()?;
    check_rank(k, machine.remaining())?;
    if machine.p() == 1 {
        return sequential(machine, k);
    }
    let n = machine.config().n;
    let (value, trace) = run(&mut machine, k, n, params)?;
    Ok(SelectionOutcome {
        value,
        path: SelectionPath::SaukasSongDirect,
        trace,
        ledger: machine.ledger(),
        interval: None,
    })
}

fn count_around<K: Ord>(seg: &[K], pivot: &K) -> (usize, usize, usize) {
    seg.iter()
        .fold((0, 0, 0), |(l, e, g), x| match x.cmp(pivot) {
            std::cmp::Ordering::Less => (l + 1, e, g),
            std::cmp::Ordering::Equal => (l, e + 1, g),
            std::cmp::Ordering::Greater => (l, e, g + 1),
        })
}

/// Selects rank `k` among the elements currently on `machine`. The loop
/// threshold uses `n_ref`, the size of the original problem, so a
/// sub-multiset left on the machine is handled as part of it.
pub(crate) fn run<K: Key>(
    machine: &mut Machine<K>,
    k: usize,
    n_ref: usize,
    params: SaukasSongParams,
) -> Result<(K, Vec<RoundCounts>)> {
    let p = machine.p();
    let mut k = k;
    let mut remaining = machine.remaining();
    check_rank(k, remaining)?;
    let mut trace = Vec::new();

    while remaining as f64 * p as f64 > params.termination_factor * n_ref as f64 {
        // (2.1) local lower medians, weighted by local counts
        let medians = machine.local_map(|seg| {
            lower_median(seg).ok().map(|value| WeightedValue {
                value,
                weight: seg.len() as u64,
            })
        });
        // (2.2)
        let medians = machine.gather(0, medians.into_iter().map(Vec::from_iter).collect())?;
        // (2.3)
        machine.charge_local(medians.len() as u64);
        let pivot = weighted_median(&medians)?;
        // (2.4)
        machine.broadcast(0, pivot)?;
        // (2.5)
        let counts = machine.local_map(|seg| count_around(seg, &pivot));
        // (2.6)
        let counts = machine.gather(0, counts.into_iter().map(|c| vec![c]).collect())?;
        // (2.7)
        machine.charge_local(counts.len() as u64);
        let (less, equal, greater) = counts
            .into_iter()
            .fold((0, 0, 0), |(l, e, g), (a, b, c)| (l + a, e + b, g + c));
        // (2.8)
        machine.broadcast(0, (less, equal, greater))?;

        // (2.9)
        let mut round = RoundCounts {
            less,
            equal,
            greater,
            remaining,
            retained: None,
        };
        if less < k && k <= less + equal {
            trace.push(round);
            return Ok((pivot, trace));
        }
        if k <= less {
            machine.retain(|x| *x < pivot);
            remaining = less;
        } else {
            machine.retain(|x| *x > pivot);
            k -= less + equal;
            remaining = greater;
        }
        round.retained = Some(remaining);
        trace.push(round);
    }

    // (3)
    let rest = machine.segments().to_vec();
    let rest = machine.gather(0, rest)?;
    // (4)
    machine.charge_local(rest.len() as u64);
    let value = select_kth(&rest, k)?;
    machine.broadcast(0, value)?;
    Ok((value, trace))
}
