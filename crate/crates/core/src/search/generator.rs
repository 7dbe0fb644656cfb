use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{MmotError, Result};
use crate::measures::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    IsotropicGaussian { sigma: f64 },
    UniformCube { halfwidth: f64 },
}

impl Default for Distribution {
    fn default() -> Self {
        Distribution::IsotropicGaussian { sigma: 3.0 }
    }
}

impl Distribution {
    fn scale(&self) -> f64 {
        match *self {
            Distribution::IsotropicGaussian { sigma } => sigma,
            Distribution::UniformCube { halfwidth } => halfwidth,
        }
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> f64 {
        match *self {
            Distribution::IsotropicGaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Distribution::UniformCube { halfwidth } => halfwidth * (2.0 * rng.random::<f64>() - 1.0),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::IsotropicGaussian { sigma } => write!(f, "gaussian({sigma:?})"),
            Distribution::UniformCube { halfwidth } => write!(f, "uniform({halfwidth:?})"),
        }
    }
}

impl FromStr for Distribution {
    type Err = MmotError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || MmotError::InvalidConfig(format!("unrecognized distribution `{s}`"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let value: f64 = rest.strip_suffix(')').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        match name {
            "gaussian" => Ok(Distribution::IsotropicGaussian { sigma: value }),
            "uniform" => Ok(Distribution::UniformCube { halfwidth: value }),
            _ => Err(bad()),
        }
    }
}

/// Random instance generator.
///
/// Trial `t` draws from a ChaCha20 stream keyed by `master_seed` (expanded
/// with `seed_from_u64`) and selected by `set_stream(t)`, so every trial is
/// reproducible on its own and independent of scheduling. Coordinates are
/// drawn marginal by marginal, atom by atom, coordinate by coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(rename = "N")]
    pub n_marginals: usize,
    pub m: usize,
    pub d: usize,
    pub distribution: Distribution,
    pub master_seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_marginals: 3,
            m: 3,
            d: 2,
            distribution: Distribution::default(),
            master_seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_marginals < 2 {
            return Err(MmotError::InvalidConfig(format!(
                "N must be at least 2, got {}",
                self.n_marginals
            )));
        }
        if self.m == 0 || self.d == 0 {
            return Err(MmotError::InvalidConfig("m and d must be positive".into()));
        }
        let scale = self.distribution.scale();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(MmotError::InvalidConfig(format!(
                "distribution scale must be positive and finite, got {scale}"
            )));
        }
        Ok(())
    }

    pub fn rng_for(&self, trial_index: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial_index);
        rng
    }

    /// Identifier from which [`parse_digest`] recovers the config and trial.
    pub fn digest(&self, trial_index: u64) -> String {
        format!(
            "{}/N{}m{}d{}/seed{}/trial{}",
            self.distribution, self.n_marginals, self.m, self.d, self.master_seed, trial_index
        )
    }
}

pub fn generate_instance(config: &GeneratorConfig, trial_index: u64) -> Result<Instance> {
    config.validate()?;
    let mut rng = config.rng_for(trial_index);
    let points = (0..config.n_marginals)
        .map(|_| {
            (0..config.m)
                .map(|_| (0..config.d).map(|_| config.distribution.sample(&mut rng)).collect())
                .collect()
        })
        .collect();
    Instance::from_points(points)
}

/// Inverse of [`GeneratorConfig::digest`].
pub fn parse_digest(digest: &str) -> Result<(GeneratorConfig, u64)> {
    let bad = || MmotError::InvalidConfig(format!("malformed instance digest `{digest}`"));
    let parts: Vec<&str> = digest.split('/').collect();
    let [dist, shape, seed, trial] = parts.as_slice() else {
        return Err(bad());
    };
    let distribution: Distribution = dist.parse()?;
    let shape = shape.strip_prefix('N').ok_or_else(bad)?;
    let (n, rest) = shape.split_once('m').ok_or_else(bad)?;
    let (m, d) = rest.split_once('d').ok_or_else(bad)?;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let config = GeneratorConfig {
        n_marginals: num(n)?,
        m: num(m)?,
        d: num(d)?,
        distribution,
        master_seed: seed.strip_prefix("seed").ok_or_else(bad)?.parse().map_err(|_| bad())?,
    };
    let trial = trial.strip_prefix("trial").ok_or_else(bad)?.parse().map_err(|_| bad())?;
    config.validate()?;
    Ok((config, trial))
}

/// Regenerates the instance named by a digest.
pub fn reconstruct(digest: &str) -> Result<Instance> {
    let (config, trial) = parse_digest(digest)?;
    generate_instance(&config, trial)
}
