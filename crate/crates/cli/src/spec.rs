use std::fmt;
use std::str::FromStr;

use cgm_select::{CgmConfig, Coarseness, Distribution, KPolicy, SaukasSongParams, UniformParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    SaukasSong,
    FiniteSupport,
    Uniform,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::SaukasSong => "saukas-song",
            Algorithm::FiniteSupport => "finite-support",
            Algorithm::Uniform => "uniform",
        }
    }

    pub fn default_distribution(&self) -> Distribution {
        match self {
            Algorithm::SaukasSong => Distribution::Permutation,
            Algorithm::FiniteSupport => Distribution::Support(4),
            Algorithm::Uniform => Distribution::Uniform01,
        }
    }

    pub fn default_coarseness(&self) -> Coarseness {
        match self {
            Algorithm::FiniteSupport => Coarseness::StrictPSquared,
            Algorithm::SaukasSong | Algorithm::Uniform => Coarseness::SaukasSongP2LogP,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "saukas-song" => Ok(Algorithm::SaukasSong),
            "finite-support" => Ok(Algorithm::FiniteSupport),
            "uniform" => Ok(Algorithm::Uniform),
            _ => Err(CliError::Usage(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Usage(format!("unknown format {s:?}"))),
        }
    }
}

/// One fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub n: usize,
    pub p: usize,
    pub k: KPolicy,
    pub distribution: Distribution,
    pub d: f64,
    pub small_c: usize,
    pub termination_factor: f64,
    pub trials: usize,
    pub seed: u64,
    pub format: Format,
    pub faithful_loop: bool,
    pub force_fallback: bool,
    pub coarseness: Coarseness,
}

impl ExperimentSpec {
    /// Defaults for everything but the algorithm and the machine shape.
    pub fn new(algorithm: Algorithm, n: usize, p: usize) -> Self {
        let uniform = UniformParams::default();
        ExperimentSpec {
            algorithm,
            n,
            p,
            k: KPolicy::Mid,
            distribution: algorithm.default_distribution(),
            d: uniform.d,
            small_c: uniform.small_c,
            termination_factor: SaukasSongParams::default().termination_factor,
            trials: 1,
            seed: 0,
            format: Format::Csv,
            faithful_loop: false,
            force_fallback: false,
            coarseness: algorithm.default_coarseness(),
        }
    }

    pub fn saukas_song_params(&self) -> SaukasSongParams {
        SaukasSongParams {
            termination_factor: self.termination_factor,
        }
    }

    pub fn uniform_params(&self) -> UniformParams {
        UniformParams {
            d: self.d,
            small_c: self.small_c,
            saukas_song: self.saukas_song_params(),
        }
    }

    pub fn config(&self) -> Result<CgmConfig, CliError> {
        CgmConfig::new(self.n, self.p, self.coarseness).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Rejects anything outside the selected algorithm's preconditions.
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        self.config()?;
        if self.trials == 0 {
            return usage("--trials must be at least 1".into());
        }
        if let KPolicy::Fixed(k) = self.k {
            if k == 0 || k > self.n {
                return usage(format!("--k {k} outside 1..={}", self.n));
            }
        }
        self.uniform_params()
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if self.k == KPolicy::Random && self.n <= 2 * self.small_c + 1 {
            return usage(format!("k=rand needs n > {}", 2 * self.small_c + 1));
        }
        match self.algorithm {
            Algorithm::FiniteSupport => {
                if !matches!(self.distribution, Distribution::Support(_)) {
                    return usage("finite-support needs --distribution support:<c>".into());
                }
            }
            Algorithm::Uniform => {
                if !self.distribution.is_unit_interval() {
                    return usage("uniform needs --distribution uniform01".into());
                }
            }
            Algorithm::SaukasSong => {}
        }
        if self.faithful_loop && self.algorithm != Algorithm::FiniteSupport {
            return usage("--faithful-loop only applies to finite-support".into());
        }
        if self.force_fallback && self.algorithm != Algorithm::Uniform {
            return usage("--force-fallback only applies to uniform".into());
        }
        Ok(())
    }
}
