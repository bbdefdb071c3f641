use anyhow::Result;
use qvtrack_core::applications::{motion_match, shots_for_accuracy, z_scenario, MotionMatchConfig, Z_PATH};
use serde::{Deserialize, Serialize};

use super::{ensure, Globals};
use crate::artifacts::f;
use crate::config::schema_version;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Video {
    /// Object follows the template path.
    Matching,
    /// Object follows the path mirrored left to right.
    Mirrored,
    /// The first `broken_frames` positions are moved off the path.
    Broken,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Uniform pixel noise added to the actual video.
    pub noise: f64,
    pub video: Video,
    pub broken_frames: usize,
    /// Also report P2 for 0..=K off-path frames.
    pub sweep: bool,
    #[serde(rename = "match")]
    pub matcher: MotionMatchConfig,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            schema_version: schema_version(),
            seed: 2019,
            noise: 0.02,
            video: Video::Matching,
            broken_frames: 1,
            sweep: true,
            matcher: MotionMatchConfig::default(),
        }
    }
}

pub fn run(g: &Globals) -> Result<()> {
    let loaded = g.load::<MotionConfig>()?;
    let mut cfg = loaded.config;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    let m = &mut cfg.matcher;
    ensure(m.threshold > 0.0 && m.threshold <= 1.0, "threshold must lie in (0, 1]")?;
    ensure(m.delta > 0.0 && m.delta < 1.0, "delta must lie in (0, 1)")?;
    ensure(m.alpha > 0.0 && m.c > 0.0, "alpha and c must be positive")?;
    ensure(cfg.noise >= 0.0 && cfg.noise < 0.2, "noise must lie in [0, 0.2)")?;
    ensure(cfg.broken_frames <= Z_PATH.len(), "broken_frames exceeds the template length")?;
    m.mode = g.measurement(m.mode, shots_for_accuracy(m.delta), cfg.seed)?;
    let mut out = g.artifacts("motion-match", &cfg, loaded.raw, Vec::new())?;
    let scene = z_scenario(cfg.seed, cfg.noise);
    let (initial, templates) = (scene.initial(), scene.templates());
    let actual = match cfg.video {
        Video::Matching => scene.matching(),
        Video::Mirrored => scene.mismatched(),
        Video::Broken => scene.with_mismatches(cfg.broken_frames),
    };
    let result = motion_match(&initial, &templates, &actual, &cfg.matcher, cfg.seed)?;
    let comps: Vec<Vec<String>> = result.components.iter().enumerate().map(|(k, c)| vec![k.to_string(), f(*c)]).collect();
    out.csv("components.csv", &["k", "component_overlap"], &comps)?;
    out.csv(
        "p2.csv",
        &["p2", "p2_measured", "threshold", "matched"],
        &[vec![f(result.p2), f(result.p2_measured), f(cfg.matcher.threshold), result.matched.to_string()]],
    )?;
    if cfg.sweep {
        let rows = (0..=Z_PATH.len())
            .map(|k| {
                let r = motion_match(&initial, &templates, &scene.with_mismatches(k), &cfg.matcher, cfg.seed)?;
                Ok(vec![k.to_string(), f(r.p2), f(r.p2_measured), r.matched.to_string()])
            })
            .collect::<Result<Vec<_>>>()?;
        out.csv("sweep.csv", &["off_path_frames", "p2", "p2_measured", "matched"], &rows)?;
    }
    println!("P2 = {:.6} (measured {:.6}), matched: {}", result.p2, result.p2_measured, result.matched);
    out.finish()
}
