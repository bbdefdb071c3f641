use std::f64::consts::PI;

use anyhow::Result;
use qvtrack_core::state_prep::{prepare_surrogate_state, refine_to_y, surrogate};
use qvtrack_core::statevector::vector_overlap;
use qvtrack_core::tracker::gaussian_labels;
use qvtrack_core::C64;
use serde::{Deserialize, Serialize};

use super::{ensure, Globals};
use crate::artifacts::f;
use crate::config::schema_version;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatePrepConfig {
    pub schema_version: u32,
    /// Size whose surrogate table is written out.
    pub n: usize,
    /// Bandwidth constant, `s = c sqrt(n)`.
    pub c: f64,
    pub sweep: Vec<usize>,
}

impl Default for StatePrepConfig {
    fn default() -> Self {
        Self {
            schema_version: schema_version(),
            n: 50,
            c: 0.5,
            sweep: vec![16, 20, 32, 50, 64, 100, 128, 256, 512, 1000, 1024],
        }
    }
}

pub fn run(g: &Globals) -> Result<()> {
    g.no_sampling("state-prep-check")?;
    ensure(g.seed.is_none(), "state-prep-check is deterministic; --seed does not apply")?;
    let loaded = g.load::<StatePrepConfig>()?;
    let cfg = loaded.config;
    ensure(cfg.n >= 4 && cfg.sweep.iter().all(|&n| n >= 4), "sizes must be >= 4")?;
    ensure(cfg.sweep.iter().chain([&cfg.n]).all(|&n| n <= 1 << 20), "sizes must fit the qubit budget")?;
    ensure(cfg.c > 0.0, "c must be positive")?;
    let mut out = g.artifacts("state-prep-check", &cfg, loaded.raw, Vec::new())?;

    let y = gaussian_labels(cfg.n, cfg.c)?;
    let labels = surrogate(cfg.n, y.s)?;
    let mut table = Vec::new();
    labels.write_csv(&mut table, &y)?;
    out.csv_body("surrogate.csv", &["i", "y_sq", "y_tilde_sq", "prefix"], &String::from_utf8(table)?)?;

    let mut rows = Vec::new();
    for &n in &cfg.sweep {
        let y = gaussian_labels(n, cfg.c)?;
        let labels = surrogate(n, y.s)?;
        let prepared = prepare_surrogate_state(&labels)?;
        let refined = refine_to_y(&prepared.state, &y, &labels)?;
        let exact: Vec<C64> = y.y.iter().map(|&v| C64::new(v, 0.0)).collect();
        let sum_y2 = y.sum_sq();
        let model = PI.sqrt() * y.s / (2.0 * 2f64.sqrt());
        rows.push(vec![
            n.to_string(),
            f(y.s),
            f(sum_y2),
            f(labels.total()),
            f(refined.success_probability),
            f(sum_y2 / labels.total()),
            f(vector_overlap(refined.state.amplitudes(), &exact)),
            f(model),
            f(1.0 / sum_y2),
            f(1.0 / model),
            prepared.rotations.to_string(),
            refined.clamped.len().to_string(),
        ]);
    }
    out.csv(
        "state_prep.csv",
        &[
            "n",
            "s",
            "sum_y_sq",
            "sum_y_tilde_sq",
            "success_probability",
            "mass_ratio",
            "overlap",
            "sum_model",
            "p_max",
            "p_max_model",
            "rotations",
            "clamped",
        ],
        &rows,
    )?;
    println!("surrogate table for n = {}, {} sweep rows", cfg.n, rows.len());
    out.finish()
}
