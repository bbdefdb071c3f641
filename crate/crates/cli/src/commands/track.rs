use std::path::PathBuf;

use anyhow::{Context, Result};
use qvtrack_core::csvio::read_matrix;
use qvtrack_core::seed::SeedTree;
use qvtrack_core::tracker::{track, track_2d, Tracker2dConfig, TrackerConfig};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ensure, Globals};
use crate::artifacts::Input;
use crate::config::schema_version;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    /// 1D object at rest.
    Static,
    /// 1D object moving `step` pixels per frame.
    Shift,
    /// 2D object moving `step` pixels per frame along both axes.
    Diagonal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Headerless CSV with one frame per row; 2D frames row-major.
    pub input: Option<PathBuf>,
    /// Rows per 2D frame; `None` reads 1D frames.
    pub frame_rows: Option<usize>,
    /// Initial patch position: `[start]` in 1D, `[row, col]` in 2D. The
    /// fixtures default to the patch around their object.
    pub init: Option<Vec<usize>>,
    pub fixture: Fixture,
    pub frames: usize,
    pub step: usize,
    pub tracker: TrackerConfig,
    pub tracker_2d: Tracker2dConfig,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            schema_version: schema_version(),
            seed: 2019,
            input: None,
            frame_rows: None,
            init: None,
            fixture: Fixture::Shift,
            frames: 6,
            step: 3,
            tracker: TrackerConfig::default(),
            tracker_2d: Tracker2dConfig::default(),
        }
    }
}

enum Video {
    OneD(Vec<Vec<f64>>),
    TwoD(Vec<Vec<Vec<f64>>>),
}

fn synthetic(cfg: &TrackConfig) -> Video {
    let mut rng = SeedTree::new(cfg.seed).child("classical-track").rng();
    match cfg.fixture {
        Fixture::Static | Fixture::Shift => {
            let step = if cfg.fixture == Fixture::Static { 0 } else { cfg.step };
            let len = 30 + cfg.frames * step + 20;
            let bg: Vec<f64> = (0..len).map(|_| rng.gen_range(0.3..0.4)).collect();
            let obj: Vec<f64> = (0..10).map(|_| rng.gen_range(0.8..1.0)).collect();
            Video::OneD(
                (0..cfg.frames)
                    .map(|f| {
                        let mut px = bg.clone();
                        px[20 + f * step..30 + f * step].copy_from_slice(&obj);
                        px
                    })
                    .collect(),
            )
        }
        Fixture::Diagonal => {
            let side = 16 + cfg.frames * cfg.step;
            let bg: Vec<Vec<f64>> = (0..side).map(|_| (0..side).map(|_| rng.gen_range(0.0..0.2)).collect()).collect();
            let obj: Vec<f64> = (0..9).map(|_| rng.gen_range(0.8..1.0)).collect();
            Video::TwoD(
                (0..cfg.frames)
                    .map(|f| {
                        let mut px = bg.clone();
                        let at = 6 + f * cfg.step;
                        for r in 0..3 {
                            for c in 0..3 {
                                px[at + r][at + c] = obj[r * 3 + c];
                            }
                        }
                        px
                    })
                    .collect(),
            )
        }
    }
}

pub fn run(g: &Globals) -> Result<()> {
    g.no_sampling("classical-track")?;
    let loaded = g.load::<TrackConfig>()?;
    let mut cfg = loaded.config;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    let mut extra = Vec::new();
    let video = match &cfg.input {
        Some(path) => {
            let bytes = std::fs::read(path).with_context(|| format!("reading frames {}", path.display()))?;
            let rows = read_matrix(bytes.as_slice())?;
            extra.push(Input { name: "frames".into(), bytes });
            match cfg.frame_rows {
                None => Video::OneD(rows),
                Some(r) => {
                    ensure(r > 0 && rows.iter().all(|f| f.len() % r == 0), "frame length must be a multiple of frame_rows")?;
                    Video::TwoD(rows.iter().map(|f| f.chunks(f.len() / r).map(<[f64]>::to_vec).collect()).collect())
                }
            }
        }
        None => {
            let default_init = if cfg.fixture == Fixture::Diagonal { vec![4, 4] } else { vec![15] };
            cfg.init.get_or_insert(default_init);
            synthetic(&cfg)
        }
    };
    let init = cfg.init.clone().context("init is required with an input video")?;
    ensure(cfg.frames >= 2 || cfg.input.is_some(), "need at least two frames")?;
    let mut out = g.artifacts("classical-track", &cfg, loaded.raw, extra)?;
    match video {
        Video::OneD(frames) => {
            ensure(init.len() == 1, "1D tracking takes init = [start]")?;
            let path = track(&frames, init[0], &cfg.tracker)?;
            let rows: Vec<Vec<String>> = path.iter().enumerate().map(|(k, p)| vec![k.to_string(), p.to_string()]).collect();
            out.csv("trajectory.csv", &["frame", "position"], &rows)?;
            println!("tracked {} frames: {:?}", path.len(), path);
        }
        Video::TwoD(frames) => {
            ensure(init.len() == 2, "2D tracking takes init = [row, col]")?;
            let path = track_2d(&frames, (init[0], init[1]), &cfg.tracker_2d)?;
            let rows: Vec<Vec<String>> =
                path.iter().enumerate().map(|(k, p)| vec![k.to_string(), p.0.to_string(), p.1.to_string()]).collect();
            out.csv("trajectory.csv", &["frame", "row", "col"], &rows)?;
            println!("tracked {} frames: {:?}", path.len(), path);
        }
    }
    out.finish()
}
