//! Seeded random problem instances.

use rand::Rng;

use crate::circulant::{make_circulant, CirculantOperator};
use crate::error::Result;

/// Draw a normalised generator of length `n` whose circulant has condition
/// number at most `kappa_max`. Uniform entries with a boosted first entry
/// give a dominant diagonal; draws above the bound are rejected.
pub fn well_conditioned_generator<R: Rng>(rng: &mut R, n: usize, kappa_max: f64) -> Result<(Vec<f64>, f64)> {
    loop {
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        u[0] += rng.gen_range(0.0..2.0) * n as f64 / 4.0;
        let op = make_circulant(&u, true)?;
        let kappa = op.condition_number();
        if kappa <= kappa_max {
            return Ok((op.generator().to_vec(), kappa));
        }
    }
}

/// Log-uniform draw from `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return lo;
    }
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// A training/detection pair with its regulariser.
#[derive(Debug, Clone)]
pub struct QuantumInstance {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub kappa_x: f64,
    pub kappa_z: f64,
    /// Drawn log-uniformly from `[1/kappa_x^2, 1]`.
    pub alpha: f64,
}

pub fn quantum_instance<R: Rng>(rng: &mut R, n: usize, kappa_max: f64) -> Result<QuantumInstance> {
    let (x, kappa_x) = well_conditioned_generator(rng, n, kappa_max)?;
    let (z, kappa_z) = well_conditioned_generator(rng, n, kappa_max)?;
    let alpha = log_uniform(rng, 1.0 / (kappa_x * kappa_x), 1.0);
    Ok(QuantumInstance { x, z, kappa_x, kappa_z, alpha })
}

/// An unconstrained ridge-regression draw.
#[derive(Debug, Clone)]
pub struct RidgeInstance {
    pub x: Vec<f64>,
    pub alpha: f64,
    pub c: f64,
}

/// Uniform pixels, `alpha` log-uniform in `[1e-3, 1]`, `c` uniform in `[0.2, 1]`.
pub fn ridge_instance<R: Rng>(rng: &mut R, n: usize) -> RidgeInstance {
    RidgeInstance {
        x: (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
        alpha: log_uniform(rng, 1e-3, 1.0),
        c: rng.gen_range(0.2..1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedTree;

    #[test]
    fn instances_respect_bounds() {
        let mut rng = SeedTree::new(1).rng();
        for n in [4, 8, 16] {
            let inst = quantum_instance(&mut rng, n, 10.0).unwrap();
            assert!(inst.kappa_x <= 10.0 && inst.kappa_z <= 10.0);
            assert!(inst.alpha >= 1.0 / (inst.kappa_x * inst.kappa_x) - 1e-15 && inst.alpha <= 1.0);
            assert!((inst.x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
