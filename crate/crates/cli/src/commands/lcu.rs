use anyhow::Result;
use qvtrack_core::circulant::make_circulant;
use qvtrack_core::corpus::well_conditioned_generator;
use qvtrack_core::hamiltonian::{certify, lcu_order_for, linear_fit, order_trend_regressor, ExtendedHamiltonian};
use qvtrack_core::seed::SeedTree;
use serde::{Deserialize, Serialize};

use super::{ensure, Globals};
use crate::artifacts::f;
use crate::config::schema_version;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LcuConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub times: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub kappa_max: f64,
    /// Log-spaced epsilons per time for the order trend fit.
    pub trend_points: usize,
}

impl Default for LcuConfig {
    fn default() -> Self {
        Self {
            schema_version: schema_version(),
            seed: 2019,
            sizes: vec![2, 4, 8],
            times: vec![0.5, 1.0, 2.0],
            epsilons: vec![1e-2, 1e-4, 1e-6],
            kappa_max: 10.0,
            trend_points: 11,
        }
    }
}

fn validate(cfg: &LcuConfig) -> Result<()> {
    ensure(cfg.sizes.iter().all(|&n| n >= 2 && n.is_power_of_two() && n <= 64), "sizes must be powers of two in [2, 64]")?;
    ensure(cfg.times.iter().all(|&t| t >= 0.0 && t.is_finite()), "times must be finite and >= 0")?;
    ensure(cfg.epsilons.iter().all(|&e| e > 0.0 && e < 1.0), "epsilons must lie in (0, 1)")?;
    ensure(cfg.kappa_max >= 1.0, "kappa_max must be >= 1")?;
    ensure(cfg.trend_points == 0 || cfg.trend_points >= 3, "trend_points must be 0 or >= 3")?;
    Ok(())
}

pub fn run(g: &Globals) -> Result<()> {
    g.no_sampling("lcu-cert")?;
    let loaded = g.load::<LcuConfig>()?;
    let mut cfg = loaded.config;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    validate(&cfg)?;
    let mut out = g.artifacts("lcu-cert", &cfg, loaded.raw, Vec::new())?;
    let root = SeedTree::new(cfg.seed).child("lcu-cert");
    let mut rows = Vec::new();
    let mut failures = 0;
    for &n in &cfg.sizes {
        let (x, _) = well_conditioned_generator(&mut root.index(n as u64).rng(), n, cfg.kappa_max)?;
        let h = ExtendedHamiltonian::new(make_circulant(&x, true)?);
        for &t in &cfg.times {
            for &eps in &cfg.epsilons {
                let row = certify(&h, t, eps)?;
                failures += usize::from(!row.passed());
                rows.push(vec![
                    n.to_string(),
                    f(t),
                    f(eps),
                    row.k.to_string(),
                    row.r.to_string(),
                    f(row.epsilon_measured),
                    row.passed().to_string(),
                ]);
            }
        }
    }
    out.csv("lcu_cert.csv", &["n", "t", "epsilon_target", "k", "r", "epsilon_measured", "passed"], &rows)?;
    if cfg.trend_points > 0 {
        let mut trend = Vec::new();
        for &t in cfg.times.iter().filter(|&&t| t > 0.0) {
            let grid: Vec<f64> = (0..cfg.trend_points)
                .map(|k| 10f64.powf(-2.0 - 4.0 * k as f64 / (cfg.trend_points - 1) as f64))
                .collect();
            let xs: Vec<f64> = grid.iter().map(|&e| order_trend_regressor(t, e).ln()).collect();
            let ks = grid.iter().map(|&e| Ok((lcu_order_for(t, e)?.1 as f64).ln())).collect::<Result<Vec<f64>>>()?;
            let (slope, intercept, r2) = linear_fit(&xs, &ks);
            trend.push(vec![f(t), f(slope), f(intercept), f(r2), cfg.trend_points.to_string()]);
        }
        out.csv("lcu_trend.csv", &["t", "slope", "intercept", "r2", "points"], &trend)?;
    }
    println!("{} cells, {failures} above target", rows.len());
    out.finish()
}
