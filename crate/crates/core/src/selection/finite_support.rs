use serde::{Deserialize, Serialize};

use super::{check_rank, sequential, SelectionOutcome, SelectionPath};
use crate::error::{Error, Result};
use crate::kernels::{bucket_count, smallest_index_reaching, BucketCounts, SupportSet};
use crate::machine::{Key, Machine};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSupportParams {
    /// Gather the counts one support value at a time (`c` gathers of `p`
    /// words) and broadcast both the index and the value, instead of one
    /// batched gather of `p * c` words and a single index broadcast.
    pub faithful_loop: bool,
}

/// Selects rank `k` when every key belongs to `support`.
///
/// Charges `O(n/p + c)` local work per processor, `O(p c)` communication
/// and a constant number of rounds (`c + 2` with `faithful_loop`).
pub fn finite_support_select<K: Key>(
    mut machine: Machine<K>,
    k: usize,
    support: &SupportSet<K>,
    params: FiniteSupportParams,
) -> Result<SelectionOutcome<K>> {
    check_rank(k, machine.remaining())?;
    let c = support.len();

    let counts = machine.local_map(|seg| bucket_count(seg, support));
    let counts: Vec<BucketCounts> = counts.into_iter().collect::<Result<_>>()?;
    if machine.p() == 1 {
        return sequential(machine, k);
    }
    // zeroing the c counters on every processor
    machine.charge_local(c as u64);

    let p = machine.p();
    let mut totals = vec![0u64; c];
    if params.faithful_loop {
        for (m, total) in totals.iter_mut().enumerate() {
            let column = counts.iter().map(|bc| vec![bc.per_value[m]]).collect();
            let column = machine.gather(0, column)?;
            machine.charge_local(p as u64);
            *total = column.into_iter().sum();
        }
    } else {
        let rows = counts.into_iter().map(|bc| bc.per_value).collect();
        let flat = machine.gather(0, rows)?;
        machine.charge_local(flat.len() as u64);
        for (i, count) in flat.into_iter().enumerate() {
            totals[i % c] += count;
        }
    }

    let totals = BucketCounts::from_counts(totals);
    machine.charge_local(c as u64);
    let v = smallest_index_reaching(&totals, k as u64)?;
    machine.charge_local(u64::from(usize::BITS - c.leading_zeros()));

    machine.broadcast(0, v)?;
    let value = *support
        .values()
        .get(v)
        .ok_or_else(|| Error::Domain(format!("support index {v} out of range")))?;
    if params.faithful_loop {
        machine.broadcast(0, value)?;
    }

    Ok(SelectionOutcome {
        value,
        path: SelectionPath::FiniteSupport,
        trace: Vec::new(),
        ledger: machine.ledger(),
        interval: None,
    })
}
