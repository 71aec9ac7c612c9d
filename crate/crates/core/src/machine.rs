//! Deterministic simulation of a coarse grained multicomputer CGM(n, p).
//!
//! A [`Machine`] holds `p` processor-local segments and a [`CostLedger`].
//! Collectives are applied to the whole machine as atomic steps and are
//! charged with unit coefficients:
//!
//! | operation          | local units          | comm units   | rounds |
//! |--------------------|----------------------|--------------|--------|
//! | `broadcast`        | 0                    | `p`          | 1      |
//! | `gather` (N items) | 0                    | `max(N, p)`  | 1      |
//! | `semigroup`        | longest segment      | `2p`         | 2      |
//! | `local_map`        | longest segment      | 0            | 0      |

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, copyable key stored in processor segments. Ties are allowed.
pub trait Key: Copy + Ord + Hash + Debug + Send + Sync + 'static {}

impl<T> Key for T where T: Copy + Ord + Hash + Debug + Send + Sync + 'static {}

/// Which relation between `n` and `p` a configuration must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coarseness {
    /// `n >= p^2`.
    StrictPSquared,
    /// `n > p^2 log2 p`.
    SaukasSongP2LogP,
    None,
}

/// Machine shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgmConfig {
    pub n: usize,
    pub p: usize,
    pub coarseness: Coarseness,
    /// Relative cost of one communication unit against one local unit.
    /// Only [`CostLedger::weighted_total`] reads it; the ledger columns are
    /// always reported unweighted.
    pub comm_weight: u64,
}

impl CgmConfig {
    pub fn new(n: usize, p: usize, coarseness: Coarseness) -> Result<Self> {
        let config = CgmConfig {
            n,
            p,
            coarseness,
            comm_weight: 1,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_comm_weight(mut self, comm_weight: u64) -> Self {
        self.comm_weight = comm_weight;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::Config(format!(
                "n and p must be positive (n = {}, p = {})",
                self.n, self.p
            )));
        }
        let (n, p) = (self.n as f64, self.p as f64);
        match self.coarseness {
            Coarseness::StrictPSquared => {
                if (self.n as u128) < (self.p as u128) * (self.p as u128) {
                    return Err(Error::Config(format!(
                        "n = {} < p^2 = {}",
                        self.n,
                        self.p * self.p
                    )));
                }
            }
            Coarseness::SaukasSongP2LogP => {
                let bound = p * p * p.log2();
                if n <= bound {
                    return Err(Error::Config(format!(
                        "n = {} <= p^2 log2 p = {bound:.2}",
                        self.n
                    )));
                }
            }
            Coarseness::None => {}
        }
        Ok(())
    }
}

/// Accumulated cost of a run. Every field only grows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CostLedger {
    pub local_units: u64,
    pub comm_units: u64,
    pub rounds: u64,
}

impl CostLedger {
    pub fn total_units(&self) -> u64 {
        self.local_units + self.comm_units
    }

    pub fn weighted_total(&self, comm_weight: u64) -> u64 {
        self.local_units + comm_weight * self.comm_units
    }

    /// Charges accumulated since `earlier`.
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        CostLedger {
            local_units: self.local_units - earlier.local_units,
            comm_units: self.comm_units - earlier.comm_units,
            rounds: self.rounds - earlier.rounds,
        }
    }
}

impl std::ops::Add for CostLedger {
    type Output = CostLedger;

    fn add(self, rhs: CostLedger) -> CostLedger {
        CostLedger {
            local_units: self.local_units + rhs.local_units,
            comm_units: self.comm_units + rhs.comm_units,
            rounds: self.rounds + rhs.rounds,
        }
    }
}

/// `p` simulated processors, each owning one data segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Machine<K> {
    config: CgmConfig,
    segments: Vec<Vec<K>>,
    ledger: CostLedger,
    rng_seed: u64,
}

impl<K: Key> Machine<K> {
    /// Splits `data` into `p` contiguous blocks; the first `n mod p` blocks
    /// get one extra element.
    pub fn distribute_evenly(data: Vec<K>, config: CgmConfig) -> Result<Self> {
        config.validate()?;
        if data.len() != config.n {
            return Err(Error::Config(format!(
                "data length {} does not match n = {}",
                data.len(),
                config.n
            )));
        }
        let (base, extra) = (config.n / config.p, config.n % config.p);
        let mut segments = Vec::with_capacity(config.p);
        let mut rest = data.as_slice();
        for i in 0..config.p {
            let len = base + usize::from(i < extra);
            let (head, tail) = rest.split_at(len);
            segments.push(head.to_vec());
            rest = tail;
        }
        Ok(Machine {
            config,
            segments,
            ledger: CostLedger::default(),
            rng_seed: 0,
        })
    }

    /// Builds a machine with an explicit (possibly uneven) placement.
    pub fn from_segments(segments: Vec<Vec<K>>, config: CgmConfig) -> Result<Self> {
        config.validate()?;
        if segments.len() != config.p {
            return Err(Error::Config(format!(
                "{} segments given for p = {}",
                segments.len(),
                config.p
            )));
        }
        let n: usize = segments.iter().map(Vec::len).sum();
        if n != config.n {
            return Err(Error::Config(format!(
                "segments hold {n} elements, expected n = {}",
                config.n
            )));
        }
        Ok(Machine {
            config,
            segments,
            ledger: CostLedger::default(),
            rng_seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn config(&self) -> &CgmConfig {
        &self.config
    }

    pub fn p(&self) -> usize {
        self.config.p
    }

    pub fn segments(&self) -> &[Vec<K>] {
        &self.segments
    }

    pub fn ledger(&self) -> CostLedger {
        self.ledger
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Number of elements currently held across all processors.
    pub fn remaining(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }

    pub fn max_segment_len(&self) -> usize {
        self.segments.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// All elements, in processor order.
    pub fn elements(&self) -> impl Iterator<Item = &K> {
        self.segments.iter().flatten()
    }

    pub fn charge_local(&mut self, units: u64) {
        self.ledger.local_units += units;
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.config.p {
            return Err(Error::ProcessorIndex {
                index,
                p: self.config.p,
            });
        }
        Ok(())
    }

    /// Sends an O(1)-word payload from `source` to every processor and
    /// returns the `p` received copies.
    pub fn broadcast<T: Clone>(&mut self, source: usize, payload: T) -> Result<Vec<T>> {
        self.check_index(source)?;
        self.ledger.comm_units += self.config.p as u64;
        self.ledger.rounds += 1;
        Ok(vec![payload; self.config.p])
    }

    /// Collects `items[i]` from every processor `i` at `dest`, concatenated
    /// in source order. Charged `max(N, p)` for `N` items in total.
    pub fn gather<T>(&mut self, dest: usize, items: Vec<Vec<T>>) -> Result<Vec<T>> {
        self.check_index(dest)?;
        if items.len() != self.config.p {
            return Err(Error::Config(format!(
                "gather expects one item list per processor ({} given, p = {})",
                items.len(),
                self.config.p
            )));
        }
        let total: usize = items.iter().map(Vec::len).sum();
        if total == 0 {
            return Err(Error::Empty);
        }
        self.ledger.comm_units += total.max(self.config.p) as u64;
        self.ledger.rounds += 1;
        Ok(items.into_iter().flatten().collect())
    }

    /// Folds every element with `op`: local fold, gather of the partials to
    /// processor 0, sequential fold, broadcast. Every processor ends up with
    /// the returned value.
    pub fn semigroup<F>(&mut self, op: F) -> Result<K>
    where
        F: Fn(K, K) -> K,
    {
        let partials = self.local_map(|seg| seg.iter().copied().reduce(&op));
        if partials.iter().all(Option::is_none) {
            return Err(Error::Empty);
        }
        let partials = partials
            .into_iter()
            .map(|x| x.into_iter().collect())
            .collect();
        let gathered = self.gather(0, partials)?;
        let value = gathered.into_iter().reduce(&op).ok_or(Error::Empty)?;
        self.broadcast(0, value)?;
        Ok(value)
    }

    /// Runs `f` on every segment in parallel; charged the longest segment.
    pub fn local_map<T, F>(&mut self, f: F) -> Vec<T>
    where
        F: Fn(&[K]) -> T,
    {
        self.ledger.local_units += self.max_segment_len() as u64;
        self.segments.iter().map(|seg| f(seg)).collect()
    }

    /// Per-processor count of elements satisfying `predicate`.
    pub fn local_map_count<P>(&mut self, predicate: P) -> Vec<usize>
    where
        P: Fn(&K) -> bool,
    {
        self.local_map(|seg| seg.iter().filter(|x| predicate(x)).count())
    }

    /// Discards, in place, every element failing `keep`. Charged the longest
    /// segment (one compaction pass per processor).
    pub fn retain<P>(&mut self, keep: P)
    where
        P: Fn(&K) -> bool,
    {
        self.ledger.local_units += self.max_segment_len() as u64;
        for seg in &mut self.segments {
            seg.retain(|x| keep(x));
        }
    }

    /// Removes one occurrence of `value` from the lowest-indexed processor
    /// that holds it. Returns that processor's index.
    pub fn remove_one(&mut self, value: &K) -> Option<usize> {
        for (i, seg) in self.segments.iter_mut().enumerate() {
            if let Some(pos) = seg.iter().position(|x| x == value) {
                seg.swap_remove(pos);
                self.ledger.local_units += 1;
                return Some(i);
            }
        }
        None
    }
}
