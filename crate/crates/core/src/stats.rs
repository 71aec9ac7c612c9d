//! Chebyshev bounds for the interval estimate and Monte Carlo frequencies
//! of the events they bound.
//!
//! For a trial with `n` uniform keys and rank `k`:
//!
//! * `C`: the exact k-th order statistic lies in `[U, V]`;
//! * `D`: `[U, V]` holds at most `floor(n^(1-d))` keys;
//! * `D'`: `[U, V]` holds at most `floor(n/p)` keys.
//!
//! Events are computed from the sample itself, not from the path the
//! algorithm took, so they stay meaningful on fallback runs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{CgmConfig, Coarseness, Machine};
use crate::selection::{
    interval_bounds, order_stat_variance, uniform_expected_select, SelectionPath, UniformParams,
};
use crate::workload;

/// Conditional frequencies need at least this many conditioning trials.
pub const MIN_CONDITIONING_TRIALS: usize = 30;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.96;

/// `min(1, variance / t^2)`.
pub fn chebyshev_tail(variance: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::Domain(format!(
            "variance must be non-negative, got {variance}"
        )));
    }
    Ok((variance / (t * t)).min(1.0))
}

fn check_args(n: usize, k: usize, d: f64) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Rank { k, n });
    }
    if !(d > 0.5 && d < 1.0) {
        return Err(Error::Domain(format!("d must lie in (0.5, 1), got {d}")));
    }
    Ok(())
}

/// Chebyshev bound on `Pr[not C]`: `min(1, k(n+1-k) / (n^(2-d) (n+2)))`.
pub fn bound_not_c(n: usize, k: usize, d: f64) -> Result<f64> {
    check_args(n, k, d)?;
    let (nf, kf) = (n as f64, k as f64);
    Ok((kf * (nf + 1.0 - kf) / (nf.powf(2.0 - d) * (nf + 2.0))).min(1.0))
}

/// Chebyshev bound on `Pr[not D | C]`, per rank regime:
///
/// * `k <= t`: the `(n^(1-d) + 1)`-th order statistic must exceed `V`;
/// * `k >= n - t`: mirror image of the above;
/// * otherwise: the `(k - n^(1-d))`-th order statistic must reach `U`.
///
/// Returned clamped to `[0, 1]`; a non-positive gap gives 1.
pub fn bound_not_d_given_c(n: usize, k: usize, d: f64) -> Result<f64> {
    check_args(n, k, d)?;
    let (nf, kf) = (n as f64, k as f64);
    let t = nf.powf(1.0 - d / 2.0);
    let width = nf.powf(1.0 - d);
    let edge = |k: f64| {
        let rank = width + 1.0;
        let gap = k + t - rank;
        if gap <= 0.0 {
            return 1.0;
        }
        rank * (nf - width) / (gap * gap * (nf + 2.0))
    };
    let bound = if kf <= t {
        edge(kf)
    } else if kf >= nf - t {
        edge(nf + 1.0 - kf)
    } else {
        let j = kf - width;
        let gap = t - width;
        if gap <= 0.0 {
            1.0
        } else {
            j * (nf + 1.0 - j) / (gap * gap * (nf + 2.0))
        }
    };
    Ok(bound.clamp(0.0, 1.0))
}

/// How each trial picks its rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KPolicy {
    Fixed(usize),
    /// `max(1, n / 2)`.
    Mid,
    /// Uniform over `small_c < k < n - small_c`.
    Random,
}

impl KPolicy {
    pub fn pick<R: Rng>(&self, n: usize, small_c: usize, rng: &mut R) -> Result<usize> {
        match *self {
            KPolicy::Fixed(k) => Ok(k),
            KPolicy::Mid => Ok((n / 2).max(1)),
            KPolicy::Random => {
                let (lo, hi) = (small_c + 1, n.saturating_sub(small_c));
                if lo >= hi {
                    return Err(Error::Config(format!(
                        "no rank strictly between {small_c} and n - {small_c} for n = {n}"
                    )));
                }
                Ok(rng.random_range(lo..hi))
            }
        }
    }
}

impl fmt::Display for KPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KPolicy::Fixed(k) => write!(f, "k={k}"),
            KPolicy::Mid => f.write_str("k=mid"),
            KPolicy::Random => f.write_str("k=rand"),
        }
    }
}

impl FromStr for KPolicy {
    type Err = Error;

    /// Accepts `mid`, `rand`, an integer, each optionally prefixed by `k=`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.strip_prefix("k=").unwrap_or(s);
        match body {
            "mid" => Ok(KPolicy::Mid),
            "rand" => Ok(KPolicy::Random),
            _ => body
                .parse::<usize>()
                .map(KPolicy::Fixed)
                .map_err(|_| Error::Config(format!("invalid k policy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub n: usize,
    pub p: usize,
    pub k_policy: KPolicy,
    pub params: UniformParams,
    pub trials: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub k: usize,
    pub d: f64,
    pub seed: u64,
    pub event_c: bool,
    pub event_d: bool,
    pub event_d_prime: bool,
    pub path: SelectionPath,
    pub total_units: u64,
}

/// An empirical frequency with its 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub value: f64,
    pub half_width: f64,
    pub hits: usize,
    pub trials: usize,
}

impl Frequency {
    pub fn new(hits: usize, trials: usize) -> Self {
        let value = if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        let half_width = if trials == 0 {
            0.0
        } else {
            Z95 * (value * (1.0 - value) / trials as f64).sqrt()
        };
        Frequency {
            value,
            half_width,
            hits,
            trials,
        }
    }

    /// `None` (insufficient) below [`MIN_CONDITIONING_TRIALS`].
    pub fn conditional(hits: usize, given: usize) -> Option<Self> {
        (given >= MIN_CONDITIONING_TRIALS).then(|| Frequency::new(hits, given))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub trials: usize,
    /// Mean over trials of [`bound_not_c`] at each trial's rank.
    pub chebyshev_bound_not_c: f64,
    pub empirical_freq_not_c: Frequency,
    /// Mean over trials of [`bound_not_d_given_c`].
    pub chebyshev_bound_not_d_given_c: f64,
    pub empirical_freq_not_d_given_c: Option<Frequency>,
    pub empirical_freq_not_d_prime_given_c: Option<Frequency>,
    pub fallback_freq: Frequency,
    /// Mean of `total_units / (n / p)`.
    pub mean_units_per_share: f64,
}

/// Runs `spec.trials` independent trials; trial `i` uses seed
/// `base_seed + i` for both its rank and its data.
pub fn run_trials(spec: &TrialSpec) -> Result<(Vec<TrialRecord>, BoundReport)> {
    if spec.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    spec.params.validate()?;
    CgmConfig::new(spec.n, spec.p, Coarseness::SaukasSongP2LogP)?;

    let records = (0..spec.trials)
        .into_par_iter()
        .map(|i| run_trial(spec, spec.base_seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;

    let mut bound_c = 0.0;
    let mut bound_d = 0.0;
    for r in &records {
        bound_c += bound_not_c(r.n, r.k, r.d)?;
        bound_d += bound_not_d_given_c(r.n, r.k, r.d)?;
    }
    let trials = records.len();
    let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count();
    let given_c = count(&|r| r.event_c);
    let share = spec.n as f64 / spec.p as f64;
    let report = BoundReport {
        trials,
        chebyshev_bound_not_c: bound_c / trials as f64,
        empirical_freq_not_c: Frequency::new(count(&|r| !r.event_c), trials),
        chebyshev_bound_not_d_given_c: bound_d / trials as f64,
        empirical_freq_not_d_given_c: Frequency::conditional(
            count(&|r| r.event_c && !r.event_d),
            given_c,
        ),
        empirical_freq_not_d_prime_given_c: Frequency::conditional(
            count(&|r| r.event_c && !r.event_d_prime),
            given_c,
        ),
        fallback_freq: Frequency::new(count(&|r| r.path.is_fallback()), trials),
        mean_units_per_share: records
            .iter()
            .map(|r| r.total_units as f64 / share)
            .sum::<f64>()
            / trials as f64,
    };
    Ok((records, report))
}

fn run_trial(spec: &TrialSpec, seed: u64) -> Result<TrialRecord> {
    let (n, d) = (spec.n, spec.params.d);
    let k = spec.k_policy.pick(
        n,
        spec.params.small_c,
        &mut workload::rng(seed ^ 0x9e37_79b9_7f4a_7c15),
    )?;
    let data = workload::uniform_unit(n, seed);

    let bounds = interval_bounds(n, k, d);
    let mut scratch: Vec<f64> = data.iter().map(|x| x.0).collect();
    let (_, exact, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    let exact = *exact;
    let inside = data
        .iter()
        .filter(|x| bounds.lower <= x.0 && x.0 <= bounds.upper)
        .count();

    let config = CgmConfig::new(n, spec.p, Coarseness::SaukasSongP2LogP)?;
    let machine = Machine::distribute_evenly(data, config)?.with_seed(seed);
    let outcome = uniform_expected_select(machine, k, spec.params)?;
    if outcome.value.0 != exact {
        return Err(Error::Domain(format!(
            "selection returned {} but the order statistic is {exact} (seed {seed})",
            outcome.value
        )));
    }

    Ok(TrialRecord {
        n,
        k,
        d,
        seed,
        event_c: bounds.lower <= exact && exact <= bounds.upper,
        event_d: inside <= (n as f64).powf(1.0 - d).floor() as usize,
        event_d_prime: inside <= n / spec.p,
        path: outcome.path,
        total_units: outcome.ledger.total_units(),
    })
}

/// Chebyshev bound on `Pr[|X(k) - E X(k)| > t]` for the k-th of `n`
/// uniform order statistics.
pub fn order_statistic_tail(n: usize, k: usize, t: f64) -> Result<f64> {
    chebyshev_tail(order_stat_variance(n, k)?, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_examples() {
        let v = 25.0 / 1100.0;
        assert!((chebyshev_tail(v, 0.2).unwrap() - 0.568_181_818).abs() < 1e-8);
        assert_eq!(chebyshev_tail(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(chebyshev_tail(1.0, 0.5).unwrap(), 1.0);
        assert!(chebyshev_tail(1.0, 0.0).is_err());
        assert!(chebyshev_tail(1.0, -1.0).is_err());
        assert!(chebyshev_tail(-1.0, 1.0).is_err());
        assert!((order_statistic_tail(9, 5, 0.2).unwrap() - 0.568_181_818).abs() < 1e-8);
    }

    #[test]
    fn bound_not_c_million() {
        // (5e5)(500001) / (10^7.5 (10^6 + 2)), evaluated independently
        let b = bound_not_c(1_000_000, 500_000, 0.75).unwrap();
        assert!((b - 0.007_905_694_150).abs() < 1e-11);
    }

    #[test]
    fn bound_not_c_shape() {
        let n = 10_001;
        let peak = bound_not_c(n, 5001, 0.75).unwrap();
        for k in [1, 10, 1000, 4000, 5000, 5002, 9000, n] {
            assert!(bound_not_c(n, k, 0.75).unwrap() <= peak);
        }
        let small: Vec<f64> = [1_000usize, 10_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| bound_not_c(n, 1, 0.75).unwrap())
            .collect();
        assert!(small.windows(2).all(|w| w[1] < w[0]));
        assert!(bound_not_c(10, 11, 0.75).is_err());
        assert!(bound_not_c(10, 5, 0.4).is_err());
    }

    #[test]
    fn bound_not_d_given_c_in_range() {
        for n in [1_000usize, 100_000] {
            for k in [1, 2, n / 100, n / 2, n - 3, n] {
                let b = bound_not_d_given_c(n, k, 0.75).unwrap();
                assert!((0.0..=1.0).contains(&b));
            }
        }
        // middle regime decays
        assert!(
            bound_not_d_given_c(1_000_000, 500_000, 0.75).unwrap()
                < bound_not_d_given_c(10_000, 5_000, 0.75).unwrap()
        );
    }

    #[test]
    fn k_policy_parsing() {
        assert_eq!("k=mid".parse::<KPolicy>().unwrap(), KPolicy::Mid);
        assert_eq!("rand".parse::<KPolicy>().unwrap(), KPolicy::Random);
        assert_eq!("k=17".parse::<KPolicy>().unwrap(), KPolicy::Fixed(17));
        assert_eq!("32768".parse::<KPolicy>().unwrap(), KPolicy::Fixed(32768));
        assert!("k=".parse::<KPolicy>().is_err());
        assert!("k=-1".parse::<KPolicy>().is_err());
    }

    #[test]
    fn random_policy_stays_off_the_extremes() {
        let mut rng = workload::rng(1);
        for _ in 0..1000 {
            let k = KPolicy::Random.pick(20, 3, &mut rng).unwrap();
            assert!(3 < k && k < 17);
        }
        assert!(KPolicy::Random.pick(7, 3, &mut rng).is_err());
    }

    #[test]
    fn single_trial_frequencies_are_binary() {
        let spec = TrialSpec {
            n: 2000,
            p: 4,
            k_policy: KPolicy::Mid,
            params: UniformParams::default(),
            trials: 1,
            base_seed: 9,
        };
        let (records, report) = run_trials(&spec).unwrap();
        assert_eq!(records.len(), 1);
        assert!([0.0, 1.0].contains(&report.empirical_freq_not_c.value));
        assert!([0.0, 1.0].contains(&report.fallback_freq.value));
        assert_eq!(report.empirical_freq_not_d_given_c, None);
    }

    #[test]
    fn trials_are_deterministic() {
        let spec = TrialSpec {
            n: 3000,
            p: 4,
            k_policy: KPolicy::Random,
            params: UniformParams::default(),
            trials: 40,
            base_seed: 100,
        };
        let a = run_trials(&spec).unwrap();
        let b = run_trials(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0[7].seed, 107);
        for r in &a.0 {
            // D is a sub-event of D' whenever n/p > n^(1-d)
            if r.event_d {
                assert!(r.event_d_prime);
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = TrialSpec {
            n: 100,
            p: 16,
            k_policy: KPolicy::Mid,
            params: UniformParams::default(),
            trials: 1,
            base_seed: 0,
        };
        assert!(matches!(run_trials(&spec), Err(Error::Config(_))));
        spec.n = 5000;
        spec.trials = 0;
        assert!(run_trials(&spec).is_err());
    }
}
