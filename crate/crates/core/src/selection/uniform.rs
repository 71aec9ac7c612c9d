use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use super::saukas_song::{self, SaukasSongParams};
use super::{check_rank, sequential, SelectionOutcome, SelectionPath};
use crate::error::{Error, Result};
use crate::kernels::select_kth;
use crate::machine::Machine;

/// Key type for data on the unit interval.
pub type UnitKey = OrderedFloat<f64>;

/// Largest accepted `small_c`; it has to stay a constant.
const SMALL_C_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformParams {
    /// Interval half-width exponent, `0.5 < d < 1`.
    pub d: f64,
    /// Ranks `k <= small_c` and `k >= n - small_c` use repeated min/max.
    pub small_c: usize,
    pub saukas_song: SaukasSongParams,
}

impl Default for UniformParams {
    fn default() -> Self {
        UniformParams {
            d: 0.75,
            small_c: 3,
            saukas_song: SaukasSongParams::default(),
        }
    }
}

impl UniformParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.5 && self.d < 1.0) {
            return Err(Error::Config(format!(
                "d must lie in (0.5, 1), got {}",
                self.d
            )));
        }
        if self.small_c == 0 || self.small_c > SMALL_C_CAP {
            return Err(Error::Config(format!(
                "small_c must lie in 1..={SMALL_C_CAP}, got {}",
                self.small_c
            )));
        }
        self.saukas_song.validate()
    }
}

/// `n^(1 - d/2)` and the interval `[U, V]` expected to bracket the k-th
/// order statistic of `n` uniform samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalBounds {
    pub threshold: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `U = 0` when `k <= t`, else `(k - t) / (n + 1)`;
/// `V = 1` when `k >= n - t`, else `(k + t) / (n + 1)`; `t = n^(1 - d/2)`.
pub fn interval_bounds(n: usize, k: usize, d: f64) -> IntervalBounds {
    let (nf, kf) = (n as f64, k as f64);
    let threshold = nf.powf(1.0 - d / 2.0);
    let lower = if kf <= threshold {
        0.0
    } else {
        (kf - threshold) / (nf + 1.0)
    };
    let upper = if kf >= nf - threshold {
        1.0
    } else {
        (kf + threshold) / (nf + 1.0)
    };
    IntervalBounds {
        threshold,
        lower,
        upper,
    }
}

/// Interval estimate and the counts observed against it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub d: f64,
    pub epsilon: f64,
    pub threshold: f64,
    /// `U`
    pub lower: f64,
    /// `V`
    pub upper: f64,
    /// `S`: elements below `U`.
    pub below: usize,
    /// `M`: elements in `[U, V]`.
    pub inside: usize,
}

impl IntervalEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Affine map between `[lo, hi]` and `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitInterval {
    pub lo: f64,
    pub hi: f64,
}

impl UnitInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(UnitInterval { lo, hi })
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    pub fn from_unit(&self, y: f64) -> f64 {
        self.lo + y * (self.hi - self.lo)
    }
}

/// Expected-optimal selection for keys uniformly distributed on `[0, 1]`.
pub fn uniform_expected_select(
    mut machine: Machine<UnitKey>,
    k: usize,
    params: UniformParams,
) -> Result<SelectionOutcome<UnitKey>> {
    params.validate()?;
    let n = machine.remaining();
    check_rank(k, n)?;
    if let Some(bad) = machine
        .elements()
        .find(|x| !(0.0..=1.0).contains(&x.into_inner()))
    {
        return Err(Error::Domain(format!("key {bad} outside [0, 1]")));
    }
    if machine.p() == 1 {
        return sequential(machine, k);
    }

    if k <= params.small_c {
        let mut value = machine.semigroup(std::cmp::min)?;
        for _ in 1..k {
            machine.remove_one(&value);
            value = machine.semigroup(std::cmp::min)?;
        }
        return Ok(outcome(
            machine,
            value,
            SelectionPath::ExtremeMinLoop,
            vec![],
            None,
        ));
    }
    if k >= n.saturating_sub(params.small_c) {
        let mut value = machine.semigroup(std::cmp::max)?;
        for _ in k..n {
            machine.remove_one(&value);
            value = machine.semigroup(std::cmp::max)?;
        }
        return Ok(outcome(
            machine,
            value,
            SelectionPath::ExtremeMaxLoop,
            vec![],
            None,
        ));
    }

    let p = machine.p();
    let bounds = interval_bounds(n, k, params.d);
    machine.charge_local(1);
    let (lo, hi) = (OrderedFloat(bounds.lower), OrderedFloat(bounds.upper));
    let in_interval = move |x: &UnitKey| lo <= *x && *x <= hi;

    let counts = machine.local_map(|seg| {
        seg.iter().fold((0usize, 0usize), |(s, m), x| {
            if *x < lo {
                (s + 1, m)
            } else if in_interval(x) {
                (s, m + 1)
            } else {
                (s, m)
            }
        })
    });
    let counts = machine.gather(0, counts.into_iter().map(|c| vec![c]).collect())?;
    machine.charge_local(counts.len() as u64);
    let (below, inside) = counts
        .into_iter()
        .fold((0, 0), |(s, m), (a, b)| (s + a, m + b));
    machine.broadcast(0, (below, inside))?;

    let estimate = IntervalEstimate {
        d: params.d,
        epsilon: 1.0 - params.d,
        threshold: bounds.threshold,
        lower: bounds.lower,
        upper: bounds.upper,
        below,
        inside,
    };

    let n_ref = machine.config().n;
    let sub = params.saukas_song;
    if below < k && k <= below + inside {
        if inside * p <= n_ref {
            let members =
                machine.local_map(|seg| seg.iter().copied().filter(in_interval).collect());
            let members = machine.gather(0, members)?;
            machine.charge_local(members.len() as u64);
            let value = select_kth(&members, k - below)?;
            machine.broadcast(0, value)?;
            return Ok(outcome(
                machine,
                value,
                SelectionPath::FastInterval,
                vec![],
                Some(estimate),
            ));
        }
        machine.retain(in_interval);
        let (value, trace) = saukas_song::run(&mut machine, k - below, n_ref, sub)?;
        return Ok(outcome(
            machine,
            value,
            SelectionPath::FallbackInterval,
            trace,
            Some(estimate),
        ));
    }
    if k <= below {
        machine.retain(|x| *x < lo);
        let (value, trace) = saukas_song::run(&mut machine, k, n_ref, sub)?;
        return Ok(outcome(
            machine,
            value,
            SelectionPath::FallbackBelow,
            trace,
            Some(estimate),
        ));
    }
    machine.retain(|x| *x > hi);
    let (value, trace) = saukas_song::run(&mut machine, k - below - inside, n_ref, sub)?;
    Ok(outcome(
        machine,
        value,
        SelectionPath::FallbackAbove,
        trace,
        Some(estimate),
    ))
}

fn outcome(
    machine: Machine<UnitKey>,
    value: UnitKey,
    path: SelectionPath,
    trace: Vec<super::RoundCounts>,
    interval: Option<IntervalEstimate>,
) -> SelectionOutcome<UnitKey> {
    SelectionOutcome {
        value,
        path,
        trace,
        ledger: machine.ledger(),
        interval,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{CgmConfig, Coarseness};

    fn machine(data: &[f64], p: usize) -> Machine<UnitKey> {
        let config = CgmConfig::new(data.len(), p, Coarseness::None).unwrap();
        Machine::distribute_evenly(data.iter().map(|&x| OrderedFloat(x)).collect(), config).unwrap()
    }

    #[test]
    fn bounds_for_a_million_points() {
        let b = interval_bounds(1_000_000, 500_000, 0.75);
        // 10^3.75, then (500000 -/+ t) / 1000001, evaluated by hand
        let t = 5623.413251903491;
        assert!((b.threshold - t).abs() < 1e-9);
        assert!((b.lower - 0.494_376_092_372).abs() < 1e-11);
        assert!((b.upper - 0.505_622_907_628).abs() < 1e-11);
    }

    #[test]
    fn bounds_clamp_at_the_ends() {
        let b = interval_bounds(10_000, 5, 0.75);
        assert_eq!(b.lower, 0.0);
        assert!(b.upper < 1.0);
        let b = interval_bounds(10_000, 9_990, 0.75);
        assert_eq!(b.upper, 1.0);
        assert!(b.lower > 0.0);
    }

    #[test]
    fn extreme_ranks() {
        let data = [0.9, 0.1, 0.5, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6, 0.05];
        let params = UniformParams::default();
        let out = uniform_expected_select(machine(&data, 2), 1, params).unwrap();
        assert_eq!(out.path, SelectionPath::ExtremeMinLoop);
        assert_eq!(out.value.0, 0.05);
        let out = uniform_expected_select(machine(&data, 2), 3, params).unwrap();
        assert_eq!(out.value.0, 0.2);
        let out = uniform_expected_select(machine(&data, 2), 10, params).unwrap();
        assert_eq!(out.path, SelectionPath::ExtremeMaxLoop);
        assert_eq!(out.value.0, 0.9);
        let out = uniform_expected_select(machine(&data, 2), 7, params).unwrap();
        assert_eq!(out.path, SelectionPath::ExtremeMaxLoop);
        assert_eq!(out.value.0, 0.6);
    }

    #[test]
    fn extreme_min_loop_respects_ties() {
        let data = [0.5, 0.0, 0.0, 1.0, 0.0, 0.5];
        let out = uniform_expected_select(machine(&data, 3), 3, UniformParams::default()).unwrap();
        assert_eq!(out.value.0, 0.0);
    }

    #[test]
    fn rejects_keys_outside_unit_interval() {
        let params = UniformParams::default();
        assert!(matches!(
            uniform_expected_select(machine(&[0.2, 1.5], 2), 1, params),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            uniform_expected_select(machine(&[0.2, f64::NAN], 2), 1, params),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rejects_bad_params() {
        for (d, small_c) in [(0.5, 3), (1.0, 3), (0.75, 0), (0.75, 17)] {
            let params = UniformParams {
                d,
                small_c,
                ..Default::default()
            };
            assert!(params.validate().is_err());
        }
    }

    #[test]
    fn clustered_data_falls_back() {
        // everything far below U, so rank k sits in the fallback set
        let n = 4000;
        let data: Vec<f64> = (0..n).map(|i| 0.1 * i as f64 / n as f64).collect();
        let k = n / 2;
        let out = uniform_expected_select(machine(&data, 4), k, UniformParams::default()).unwrap();
        assert_eq!(out.path, SelectionPath::FallbackBelow);
        assert_eq!(out.value.0, data[k - 1]);

        let data: Vec<f64> = (0..n).map(|i| 0.9 + 0.1 * i as f64 / n as f64).collect();
        let out = uniform_expected_select(machine(&data, 4), k, UniformParams::default()).unwrap();
        assert_eq!(out.path, SelectionPath::FallbackAbove);
        assert_eq!(out.value.0, data[k - 1]);

        let data = vec![0.5; n];
        let out = uniform_expected_select(machine(&data, 4), k, UniformParams::default()).unwrap();
        assert_eq!(out.path, SelectionPath::FallbackInterval);
        assert_eq!(out.value.0, 0.5);
    }

    #[test]
    fn affine_round_trip() {
        let iv = UnitInterval::new(-3.0, 5.0).unwrap();
        assert_eq!(iv.to_unit(-3.0), 0.0);
        assert_eq!(iv.to_unit(5.0), 1.0);
        assert!((iv.from_unit(iv.to_unit(1.25)) - 1.25).abs() < 1e-12);
        assert!(UnitInterval::new(1.0, 1.0).is_err());
    }
}
