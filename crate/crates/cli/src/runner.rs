use std::fmt;

use cgm_select::workload::{self, integers, uniform_unit};
use cgm_select::{
    finite_support_select, interval_bounds, saukas_song_with, uniform_expected_select,
    Distribution, FiniteSupportParams, Key, Machine, SelectionOutcome, SupportSet, UnitKey,
};
use ordered_float::OrderedFloat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::spec::{Algorithm, ExperimentSpec};

/// A selected key as emitted in records: integers stay integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KeyValue {
    Int(i64),
    Real(f64),
}

impl fmt::Display for KeyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyValue::Int(v) => write!(f, "{v}"),
            KeyValue::Real(v) => write!(f, "{v:?}"),
        }
    }
}

impl From<i64> for KeyValue {
    fn from(v: i64) -> Self {
        KeyValue::Int(v)
    }
}

impl From<UnitKey> for KeyValue {
    fn from(v: UnitKey) -> Self {
        KeyValue::Real(v.into_inner())
    }
}

/// One oracle-checked trial. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub d: f64,
    pub seed: u64,
    pub trial: usize,
    pub result: KeyValue,
    pub oracle: KeyValue,
    #[serde(rename = "match")]
    pub matched: bool,
    pub path: String,
    pub iterations: usize,
    pub rounds: u64,
    pub local_units: u64,
    pub comm_units: u64,
    pub total_units: u64,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "algorithm",
    "n",
    "p",
    "k",
    "d",
    "seed",
    "trial",
    "result",
    "oracle",
    "match",
    "path",
    "iterations",
    "rounds",
    "local_units",
    "comm_units",
    "total_units",
];

/// Salt separating the rank stream from the data stream of a trial.
const RANK_STREAM: u64 = 0x005e_ed0f_4a4b;

/// Runs every trial of `spec` (trial `i` seeded with `seed + i`) and checks
/// each result against a full sort of the input.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>, CliError> {
    spec.validate()?;
    (0..spec.trials)
        .into_par_iter()
        .map(|trial| run_trial(spec, trial))
        .collect()
}

fn sort_oracle<K: Key>(data: &[K], k: usize) -> K {
    let mut sorted = data.to_vec();
    sorted.sort_unstable();
    sorted[k - 1]
}

fn run_trial(spec: &ExperimentSpec, trial: usize) -> Result<ResultRecord, CliError> {
    let seed = spec.seed.wrapping_add(trial as u64);
    let k = spec
        .k
        .pick(spec.n, spec.small_c, &mut workload::rng(seed ^ RANK_STREAM))?;
    let config = spec.config()?;

    let (outcome, oracle): (SelectionOutcome<KeyValue>, KeyValue) = match spec.algorithm {
        Algorithm::Uniform => {
            let mut data = uniform_unit(spec.n, seed);
            if spec.force_fallback {
                push_outside_interval(&mut data, spec, k);
            }
            let oracle = sort_oracle(&data, k).into();
            let machine = Machine::distribute_evenly(data, config)?.with_seed(seed);
            let out = uniform_expected_select(machine, k, spec.uniform_params())?;
            (convert(out), oracle)
        }
        Algorithm::FiniteSupport => {
            let Distribution::Support(c) = spec.distribution else {
                return Err(CliError::Usage("finite-support needs support:<c>".into()));
            };
            let data = integers(spec.distribution, spec.n, seed)?;
            let oracle = sort_oracle(&data, k).into();
            let support = SupportSet::new((0..c as i64).collect())?;
            let params = FiniteSupportParams {
                faithful_loop: spec.faithful_loop,
            };
            let machine = Machine::distribute_evenly(data, config)?.with_seed(seed);
            (
                convert(finite_support_select(machine, k, &support, params)?),
                oracle,
            )
        }
        Algorithm::SaukasSong if spec.distribution.is_unit_interval() => {
            let data = uniform_unit(spec.n, seed);
            let oracle = sort_oracle(&data, k).into();
            let machine = Machine::distribute_evenly(data, config)?.with_seed(seed);
            (
                convert(saukas_song_with(machine, k, spec.saukas_song_params())?),
                oracle,
            )
        }
        Algorithm::SaukasSong => {
            let data = integers(spec.distribution, spec.n, seed)?;
            let oracle = sort_oracle(&data, k).into();
            let machine = Machine::distribute_evenly(data, config)?.with_seed(seed);
            (
                convert(saukas_song_with(machine, k, spec.saukas_song_params())?),
                oracle,
            )
        }
    };

    Ok(ResultRecord {
        algorithm: spec.algorithm,
        n: spec.n,
        p: spec.p,
        k,
        d: spec.d,
        seed: spec.seed,
        trial,
        result: outcome.value,
        oracle,
        matched: outcome.value == oracle,
        path: outcome.path.to_string(),
        iterations: outcome.iterations(),
        rounds: outcome.ledger.rounds,
        local_units: outcome.ledger.local_units,
        comm_units: outcome.ledger.comm_units,
        total_units: outcome.ledger.total_units(),
    })
}

fn convert<K: Into<KeyValue>>(out: SelectionOutcome<K>) -> SelectionOutcome<KeyValue> {
    SelectionOutcome {
        value: out.value.into(),
        path: out.path,
        trace: out.trace,
        ledger: out.ledger,
        interval: out.interval,
    }
}

/// Moves every key strictly outside `[U, V]` for rank `k`, keeping order:
/// below `U` when `U > 0`, otherwise above `V`.
fn push_outside_interval(data: &mut [UnitKey], spec: &ExperimentSpec, k: usize) {
    let bounds = interval_bounds(spec.n, k, spec.d);
    for x in data.iter_mut() {
        let y = x.into_inner();
        *x = if bounds.lower > 0.0 {
            OrderedFloat(y * bounds.lower * 0.5)
        } else {
            OrderedFloat(bounds.upper + (1.0 - bounds.upper) * (0.5 + 0.5 * y))
        };
    }
}
