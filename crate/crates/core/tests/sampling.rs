//! Statistical checks of the sampled measurement paths.

use qvtrack_core::applications::{sampled_swap_estimate, swap_test, Measurement};
use qvtrack_core::seed::SeedTree;
use qvtrack_core::statevector::{Layout, StateVector};
use qvtrack_core::C64;

fn state(amps: &[f64]) -> StateVector {
    let q = amps.len().trailing_zeros() as usize;
    let v = amps.iter().map(|&a| C64::new(a, 0.0)).collect();
    StateVector::from_unnormalized(Layout::of(&[("d", q)]).unwrap(), v).unwrap()
}

#[test]
fn sampling_frequencies_pass_chi_square() {
    let s = state(&[1.0, 2.0, 0.5, 1.5, 3.0, 0.25, 1.0, 2.5]);
    let p = s.probabilities("d").unwrap();
    let shots = 100_000u64;
    for seed in 0..5 {
        let counts = s.sample("d", shots, seed).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), shots);
        let chi2: f64 = counts
            .iter()
            .zip(&p)
            .map(|(&c, &q)| {
                let e = q * shots as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 99.9% quantile of chi-square with 7 degrees of freedom.
        assert!(chi2 < 24.32, "seed {seed}: chi2 {chi2}");
    }
}

#[test]
fn sampling_is_reproducible() {
    let s = state(&[1.0, 1.0, 1.0, 1.0]);
    assert_eq!(s.sample("d", 1000, 9).unwrap(), s.sample("d", 1000, 9).unwrap());
    assert_ne!(s.sample("d", 1000, 9).unwrap(), s.sample("d", 1000, 10).unwrap());
}

#[test]
fn swap_estimator_is_unbiased() {
    let overlap = 0.4;
    let (shots, trials) = (100u64, 10_000u64);
    let root = SeedTree::new(3).child("unbiased");
    let est: Vec<f64> = (0..trials).map(|k| sampled_swap_estimate(overlap, shots, root.index(k).value()).unwrap().overlap_estimate).collect();
    let mean = est.iter().sum::<f64>() / trials as f64;
    let p0 = (1.0 + overlap) / 2.0;
    let sigma = 2.0 * (p0 * (1.0 - p0) / shots as f64).sqrt() / (trials as f64).sqrt();
    assert!((mean - overlap).abs() <= 3.0 * sigma, "mean {mean}, sigma {sigma}");
}

#[test]
fn circuit_and_shortcut_agree_in_distribution() {
    let a = state(&[1.0, 0.3, -0.2, 0.7]);
    let b = state(&[0.2, 1.0, 0.4, -0.1]);
    let exact = a.overlap(&b).unwrap();
    let shots = 20_000;
    let circuit = swap_test(&a, &b, Measurement::Sampled { shots, seed: 4 }).unwrap();
    let shortcut = sampled_swap_estimate(exact, shots, 5).unwrap();
    for e in [circuit, shortcut] {
        assert_eq!(e.shots, shots);
        assert!((e.overlap_estimate - exact).abs() <= 4.0 * e.standard_error.max(1e-3));
    }
}

#[test]
fn orthogonal_states_estimate_zero() {
    let a = state(&[1.0, 0.0, 0.0, 0.0]);
    let b = state(&[0.0, 0.0, 1.0, 0.0]);
    let exact = swap_test(&a, &b, Measurement::Projection).unwrap();
    assert!((exact.p0 - 0.5).abs() < 1e-15 && exact.overlap_estimate.abs() < 1e-15);
    let e = swap_test(&a, &b, Measurement::Sampled { shots: 4000, seed: 6 }).unwrap();
    assert!(e.overlap_estimate <= 3.0 * e.standard_error.max(2.0 / 4000f64.sqrt()));
}
