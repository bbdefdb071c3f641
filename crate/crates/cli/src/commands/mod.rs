use std::path::PathBuf;

use anyhow::{bail, Result};
use qvtrack_core::applications::Measurement;
use serde::Serialize;

use crate::artifacts::{Artifacts, Input};
use crate::config::{self, Loaded};
use crate::Mode;

pub mod disappearance;
pub mod lcu;
pub mod motion;
pub mod state_prep;
pub mod track;
pub mod verify;

pub struct Globals {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub mode: Option<Mode>,
    pub shots: Option<u64>,
}

impl Globals {
    pub fn load<T: serde::de::DeserializeOwned + Default>(&self) -> Result<Loaded<T>> {
        config::load(self.config.as_deref())
    }

    /// Resolve the readout from the config and the global flags.
    pub fn measurement(&self, configured: Measurement, default_shots: u64, seed: u64) -> Result<Measurement> {
        let m = match (self.mode, configured) {
            (Some(Mode::Projection), _) => Measurement::Projection,
            (Some(Mode::Sampled), Measurement::Sampled { shots, seed }) => {
                Measurement::Sampled { shots: self.shots.unwrap_or(shots), seed }
            }
            (Some(Mode::Sampled), Measurement::Projection) => {
                Measurement::Sampled { shots: self.shots.unwrap_or(default_shots), seed }
            }
            (None, Measurement::Sampled { shots, seed }) => Measurement::Sampled { shots: self.shots.unwrap_or(shots), seed },
            (None, Measurement::Projection) => Measurement::Projection,
        };
        match m {
            Measurement::Projection if self.shots.is_some() => bail!("--shots needs sampled mode"),
            Measurement::Sampled { shots: 0, .. } => bail!("shots must be >= 1"),
            _ => Ok(m),
        }
    }

    /// Reject sampled-mode flags for subcommands without a sampled readout.
    pub fn no_sampling(&self, subcommand: &str) -> Result<()> {
        if self.mode == Some(Mode::Sampled) || self.shots.is_some() {
            bail!("{subcommand} has no sampled readout; drop --mode sampled / --shots");
        }
        Ok(())
    }

    /// Artifact writer whose inputs are the config file (or the resolved
    /// config when none was given) followed by `extra`.
    pub fn artifacts<C: Serialize>(
        &self,
        subcommand: &'static str,
        resolved: &C,
        raw: Option<Vec<u8>>,
        extra: Vec<Input>,
    ) -> Result<Artifacts> {
        let config_bytes = match raw {
            Some(b) => b,
            None => serde_json::to_vec(resolved)?,
        };
        let mut inputs = vec![Input { name: "config".into(), bytes: config_bytes }];
        inputs.extend(extra);
        Artifacts::new(&self.out, subcommand, resolved, inputs)
    }
}

pub fn ensure(cond: bool, msg: &str) -> Result<()> {
    if !cond {
        bail!("{msg}");
    }
    Ok(())
}
