use anyhow::Result;
use qvtrack_core::circulant::{make_circulant, CirculantMatrix, CirculantOperator};
use qvtrack_core::corpus::quantum_instance;
use qvtrack_core::pipeline::{
    data_state, detect_quantum, train_quantum, EigenvalueMode, EvolutionMethod, PipelineConfig, PrecisionPolicy,
};
use qvtrack_core::seed::SeedTree;
use qvtrack_core::statevector::vector_overlap;
use qvtrack_core::tracker::{gaussian_labels, train_ridge_naive};
use qvtrack_core::C64;
use serde::{Deserialize, Serialize};

use super::{ensure, Globals};
use crate::artifacts::f;
use crate::config::schema_version;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub instances_per_size: usize,
    pub kappa_max: f64,
    pub s0: usize,
    pub s1: usize,
    pub c: f64,
    pub epsilon: f64,
    pub eigenvalue_mode: EigenvalueMode,
    pub evolution: EvolutionMethod,
    /// Add the identity-generator case at `n = 4`.
    pub include_identity: bool,
    /// Precision values swept on the first instance; run without the
    /// precision precheck.
    pub s0_sweep: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            schema_version: schema_version(),
            seed: 2019,
            sizes: vec![4, 8, 16],
            instances_per_size: 3,
            kappa_max: 10.0,
            s0: 10,
            s1: 10,
            c: 0.5,
            epsilon: 0.05,
            eigenvalue_mode: EigenvalueMode::PhaseEstimation,
            evolution: EvolutionMethod::Exact,
            include_identity: true,
            s0_sweep: Vec::new(),
        }
    }
}

struct Case {
    label: &'static str,
    x: CirculantMatrix,
    z: CirculantMatrix,
    alpha: f64,
}

fn validate(cfg: &VerifyConfig) -> Result<()> {
    ensure(cfg.sizes.iter().all(|&n| n >= 2 && n.is_power_of_two()), "sizes must be powers of two >= 2")?;
    ensure(cfg.kappa_max >= 1.0, "kappa_max must be >= 1")?;
    ensure(cfg.c > 0.0, "c must be positive")?;
    ensure(cfg.epsilon > 0.0 && cfg.epsilon < 1.0, "epsilon must lie in (0, 1)")?;
    ensure(cfg.s0 >= 1 && cfg.s1 >= 1 && cfg.s0_sweep.iter().all(|&s| s >= 1), "precision counts must be >= 1")?;
    Ok(())
}

pub fn run(g: &Globals) -> Result<()> {
    g.no_sampling("quantum-verify")?;
    let loaded = g.load::<VerifyConfig>()?;
    let mut cfg = loaded.config;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    validate(&cfg)?;
    let root = SeedTree::new(cfg.seed).child("quantum-verify");
    let mut cases = Vec::new();
    if cfg.include_identity {
        let id = make_circulant(&[1.0, 0.0, 0.0, 0.0], true)?;
        cases.push(Case { label: "identity", x: id.clone(), z: id, alpha: 0.1 });
    }
    for &n in &cfg.sizes {
        let mut rng = root.index(n as u64).rng();
        for _ in 0..cfg.instances_per_size {
            let inst = quantum_instance(&mut rng, n, cfg.kappa_max)?;
            cases.push(Case { label: "corpus", x: make_circulant(&inst.x, true)?, z: make_circulant(&inst.z, true)?, alpha: inst.alpha });
        }
    }
    let base = PipelineConfig {
        s0: cfg.s0,
        s1: cfg.s1,
        epsilon: cfg.epsilon,
        eigenvalue_mode: cfg.eigenvalue_mode,
        evolution: cfg.evolution,
        ..Default::default()
    };
    let mut out = g.artifacts("quantum-verify", &cfg, loaded.raw, Vec::new())?;
    let mut rows = Vec::new();
    let mut min_fid = 1.0f64;
    for case in &cases {
        let pcfg = PipelineConfig { alpha: case.alpha, ..base };
        let row = verify_case(case, &pcfg, cfg.c)?;
        min_fid = min_fid.min(row.1.min(row.2));
        rows.push(row_cells(case.label, case, &pcfg, row));
    }
    if let Some(first) = cases.iter().find(|c| c.label == "corpus") {
        for &s0 in &cfg.s0_sweep {
            let pcfg = PipelineConfig { s0, alpha: first.alpha, precision_policy: PrecisionPolicy::Verify, ..base };
            let row = verify_case(first, &pcfg, cfg.c)?;
            rows.push(row_cells("s0_sweep", first, &pcfg, row));
        }
    }
    out.csv(
        "fidelity.csv",
        &["case", "n", "kappa_x", "kappa_z", "s0", "s1", "fidelity_w", "fidelity_yhat", "p_success_train", "p_success_detect"],
        &rows,
    )?;
    println!("{} cases, min fidelity {min_fid:.6}", cases.len());
    out.finish()
}

/// `(n, fidelity_w, fidelity_yhat, p_train, p_detect)`.
fn verify_case(case: &Case, pcfg: &PipelineConfig, c: f64) -> Result<(usize, f64, f64, f64, f64)> {
    let n = case.x.dim();
    let y = gaussian_labels(n, c)?;
    let w = train_ridge_naive(&case.x.dense(), &y.y, case.alpha)?.w;
    let y_hat = case.z.apply_real(&w)?;
    let trained = train_quantum(&case.x, &data_state(&y.y)?, pcfg)?;
    let detected = detect_quantum(&case.z, &trained.output_state, pcfg)?;
    let to_c = |v: &[f64]| v.iter().map(|&a| C64::new(a, 0.0)).collect::<Vec<_>>();
    Ok((
        n,
        vector_overlap(trained.output_state.amplitudes(), &to_c(&w)),
        vector_overlap(detected.output_state.amplitudes(), &to_c(&y_hat)),
        trained.success_probability,
        detected.success_probability,
    ))
}

fn row_cells(label: &str, case: &Case, pcfg: &PipelineConfig, r: (usize, f64, f64, f64, f64)) -> Vec<String> {
    vec![
        label.to_string(),
        r.0.to_string(),
        f(case.x.condition_number()),
        f(case.z.condition_number()),
        pcfg.s0.to_string(),
        pcfg.s1.to_string(),
        f(r.1),
        f(r.2),
        f(r.3),
        f(r.4),
    ]
}
