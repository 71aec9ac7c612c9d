use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::runner::run;
use crate::spec::ExperimentSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sweep {
    /// Vary `p`; `n` is fixed, or `64 p^2 ceil(log2 p)` when `None`.
    P {
        values: Vec<usize>,
        n: Option<usize>,
    },
    N(Vec<usize>),
}

/// `64 p^2 ceil(log2 p)`: the default problem size of a `p` sweep.
pub fn sweep_n_for(p: usize) -> usize {
    let log = usize::BITS - (p.max(1) - 1).leading_zeros();
    64 * p * p * log as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub p: usize,
    pub mean_total_units: f64,
    /// `mean_total_units / (n/p)`
    pub total_over_np: f64,
    /// `mean_total_units / ((n/p) log2 p)`
    pub total_over_np_log2p: f64,
    pub mean_rounds: f64,
}

/// One oracle-verified row per sweep point.
pub fn scaling_table(base: &ExperimentSpec, sweep: &Sweep) -> Result<Vec<ScalingRow>, CliError> {
    let points: Vec<(usize, usize)> = match sweep {
        Sweep::P { values, n } => values
            .iter()
            .map(|&p| (n.unwrap_or(sweep_n_for(p)), p))
            .collect(),
        Sweep::N(values) => values.iter().map(|&n| (n, base.p)).collect(),
    };
    if points.is_empty() {
        return Err(CliError::Usage("empty sweep".into()));
    }
    let mut rows = Vec::with_capacity(points.len());
    for (n, p) in points {
        let spec = ExperimentSpec {
            n,
            p,
            ..base.clone()
        };
        let records = run(&spec)?;
        let bad = records.iter().filter(|r| !r.matched).count();
        if bad > 0 {
            return Err(CliError::Mismatch { count: bad });
        }
        let trials = records.len() as f64;
        let mean_total = records.iter().map(|r| r.total_units as f64).sum::<f64>() / trials;
        let mean_rounds = records.iter().map(|r| r.rounds as f64).sum::<f64>() / trials;
        let share = n as f64 / p as f64;
        rows.push(ScalingRow {
            n,
            p,
            mean_total_units: mean_total,
            total_over_np: mean_total / share,
            total_over_np_log2p: mean_total / (share * (p as f64).log2()),
            mean_rounds,
        });
    }
    Ok(rows)
}

pub fn write_table<W: Write>(out: &mut W, rows: &[ScalingRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
