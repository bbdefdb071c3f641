use anyhow::Result;
use qvtrack_core::applications::{run_disappearance_experiment, shots_for_accuracy, DisappearanceExperiment};
use serde::{Deserialize, Serialize};

use super::Globals;
use crate::artifacts::f;
use crate::config::schema_version;
use crate::svg::p1_scatter;

/// Swap-test accuracy used to size the default shot count.
const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisappearanceConfig {
    pub schema_version: u32,
    pub experiment: DisappearanceExperiment,
    pub svg: bool,
}

impl Default for DisappearanceConfig {
    fn default() -> Self {
        Self { schema_version: schema_version(), experiment: DisappearanceExperiment::default(), svg: true }
    }
}

pub fn run(g: &Globals) -> Result<()> {
    let loaded = g.load::<DisappearanceConfig>()?;
    let mut cfg = loaded.config;
    let exp = &mut cfg.experiment;
    if let Some(seed) = g.seed {
        exp.seed = seed;
    }
    exp.mode = g.measurement(exp.mode, shots_for_accuracy(DEFAULT_DELTA), exp.seed)?;
    exp.validate()?;
    let exp = cfg.experiment;
    let mut out = g.artifacts("disappearance", &cfg, loaded.raw, Vec::new())?;
    let rows = run_disappearance_experiment(&exp)?;
    let table: Vec<Vec<String>> = rows.iter().map(|r| vec![r.run.to_string(), f(r.p1_exists), f(r.p1_gone)]).collect();
    out.csv("disappearance.csv", &["run", "p1_exists", "p1_gone"], &table)?;
    let detail: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let (a, b) = r.correctly_classified(exp.threshold);
            vec![
                r.run.to_string(),
                f(r.p1_exists_classical),
                f(r.p1_gone_classical),
                r.argmax_exists.to_string(),
                f(r.training_fidelity),
                a.to_string(),
                b.to_string(),
            ]
        })
        .collect();
    out.csv(
        "disappearance_detail.csv",
        &["run", "p1_exists_classical", "p1_gone_classical", "argmax_exists", "training_fidelity", "exists_correct", "gone_correct"],
        &detail,
    )?;
    if cfg.svg {
        let exists: Vec<f64> = rows.iter().map(|r| r.p1_exists).collect();
        let gone: Vec<f64> = rows.iter().map(|r| r.p1_gone).collect();
        out.svg("disappearance.svg", &p1_scatter(&exists, &gone, exp.threshold))?;
    }
    let correct: usize = rows
        .iter()
        .map(|r| {
            let (a, b) = r.correctly_classified(exp.threshold);
            usize::from(a) + usize::from(b)
        })
        .sum();
    let max_exists = rows.iter().map(|r| r.p1_exists).fold(0.0, f64::max);
    let min_gone = rows.iter().map(|r| r.p1_gone).fold(1.0, f64::min);
    println!(
        "{} runs: max P1 (exists) {max_exists:.4}, min P1 (gone) {min_gone:.4}, {correct}/{} classified at {}",
        rows.len(),
        2 * rows.len(),
        exp.threshold
    );
    out.finish()
}
