//! Seeded input generators.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with the given `u64`,
//! so a (distribution, n, seed) triple always yields the same data.

use std::fmt;
use std::str::FromStr;

use ordered_float::OrderedFloat;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::selection::UnitKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    /// i.i.d. Uniform[0, 1).
    Uniform01,
    /// A random permutation of `1..=n`.
    Permutation,
    /// i.i.d. uniform over the integers `0..c`.
    Support(usize),
    /// Half the elements share one value, the rest are a permutation.
    AdversarialDuplicates,
    /// `1..=n` in ascending order, so each processor holds one contiguous
    /// block of ranks.
    SortedBlocks,
}

impl Distribution {
    pub fn is_unit_interval(&self) -> bool {
        matches!(self, Distribution::Uniform01)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform01 => f.write_str("uniform01"),
            Distribution::Permutation => f.write_str("permutation"),
            Distribution::Support(c) => write!(f, "support:{c}"),
            Distribution::AdversarialDuplicates => f.write_str("adversarial-duplicates"),
            Distribution::SortedBlocks => f.write_str("sorted-blocks"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform01" => Ok(Distribution::Uniform01),
            "permutation" => Ok(Distribution::Permutation),
            "adversarial-duplicates" => Ok(Distribution::AdversarialDuplicates),
            "sorted-blocks" => Ok(Distribution::SortedBlocks),
            _ => {
                let c = s
                    .strip_prefix("support:")
                    .and_then(|c| c.parse::<usize>().ok())
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| Error::Config(format!("unknown distribution {s:?}")))?;
                Ok(Distribution::Support(c))
            }
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_unit(n: usize, seed: u64) -> Vec<UnitKey> {
    let mut rng = rng(seed);
    (0..n).map(|_| OrderedFloat(rng.random::<f64>())).collect()
}

/// Integer data for every distribution except `Uniform01`.
pub fn integers(dist: Distribution, n: usize, seed: u64) -> Result<Vec<i64>> {
    let mut rng = rng(seed);
    let data = match dist {
        Distribution::Uniform01 => {
            return Err(Error::Config(
                "uniform01 produces unit-interval keys".into(),
            ))
        }
        Distribution::Permutation => {
            let mut v: Vec<i64> = (1..=n as i64).collect();
            v.shuffle(&mut rng);
            v
        }
        Distribution::Support(c) => (0..n).map(|_| rng.random_range(0..c as i64)).collect(),
        Distribution::AdversarialDuplicates => {
            let distinct = n - n / 2;
            let repeated = (distinct / 2) as i64;
            let mut v: Vec<i64> = (0..distinct as i64)
                .chain(std::iter::repeat_n(repeated, n / 2))
                .collect();
            v.shuffle(&mut rng);
            v
        }
        Distribution::SortedBlocks => (1..=n as i64).collect(),
    };
    Ok(data)
}
