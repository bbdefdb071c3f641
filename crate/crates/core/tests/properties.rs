//! Property tests for the algebraic invariants.

use proptest::prelude::*;
use qvtrack_core::applications::{swap_test, Measurement};
use qvtrack_core::circulant::{fourier_reconstruction, make_block_circulant, make_circulant, spectral, CirculantOperator};
use qvtrack_core::hamiltonian::{ExtendedHamiltonian, LcuEvolver};
use qvtrack_core::pipeline::{decode_signed, encode_signed};
use qvtrack_core::state_prep::{prepare_surrogate_state, surrogate};
use qvtrack_core::statevector::{Layout, Qubit, StateVector};
use qvtrack_core::tracker::{gaussian_labels, train_ridge_fft, train_ridge_naive};
use qvtrack_core::{CMatrix, C64};

fn pixels(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| prop::collection::vec(0.0f64..1.0, n))
}

fn amplitudes(qubits: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << qubits)
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
        .prop_filter("nonzero", |v: &Vec<C64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
}

fn state(name: &str, amps: Vec<C64>) -> StateVector {
    let q = amps.len().trailing_zeros() as usize;
    StateVector::from_unnormalized(Layout::of(&[(name, q)]).unwrap(), amps).unwrap()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    d / b.iter().map(|y| y * y).sum::<f64>().sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_training_matches_dense_solve(x in pixels(2..40), alpha in 1e-3f64..1.0, c in 0.2f64..1.0) {
        let op = make_circulant(&x, true).unwrap();
        let y = gaussian_labels(x.len(), c).unwrap();
        let fast = train_ridge_fft(&op, &y.y, alpha).unwrap();
        let naive = train_ridge_naive(&op.dense(), &y.y, alpha).unwrap();
        prop_assert!(rel_err(&fast.w, &naive.w) <= 1e-9);
    }

    #[test]
    fn apply_matches_dense_product(x in pixels(2..40), seed in any::<u64>()) {
        let op = make_circulant(&x, false).unwrap();
        let v: Vec<f64> = (0..x.len()).map(|i| ((seed.wrapping_add(i as u64) % 97) as f64) / 97.0 - 0.5).collect();
        let fast = op.apply_real(&v).unwrap();
        let dense = dense_apply(&op, &v);
        for (a, b) in fast.iter().zip(dense.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn fourier_reconstruction_is_exact(x in pixels(2..24)) {
        let op = make_circulant(&x, false).unwrap();
        let rec = fourier_reconstruction(&op);
        let dense = op.dense();
        for i in 0..x.len() {
            for k in 0..x.len() {
                prop_assert!((rec[(i, k)] - C64::new(dense[(i, k)], 0.0)).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn singular_triples_hold(x in pixels(2..24)) {
        let op = make_circulant(&x, false).unwrap();
        let spec = spectral(&op);
        for j in 0..spec.len() {
            let xv = op.apply(&spec.right_vectors[j]).unwrap();
            for (a, b) in xv.iter().zip(&spec.left_vectors[j]) {
                prop_assert!((a - b * spec.singular_values[j]).norm() <= 1e-10);
            }
        }
        let tol = 1e-12 * spec.max_singular_value();
        prop_assert!(spec.singular_values.windows(2).all(|w| w[0] >= w[1] - tol));
    }

    #[test]
    fn weight_norm_decreases_with_alpha(x in pixels(4..32), a in 1e-3f64..0.5, b in 1e-3f64..0.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let op = make_circulant(&x, true).unwrap();
        let y = gaussian_labels(x.len(), 0.5).unwrap();
        let w_lo = train_ridge_fft(&op, &y.y, lo).unwrap().w;
        let w_hi = train_ridge_fft(&op, &y.y, hi).unwrap().w;
        prop_assert!(norm(&w_hi) <= norm(&w_lo) * (1.0 + 1e-12));
    }

    #[test]
    fn block_apply_matches_dense(rows in 2usize..6, cols in 2usize..6, seed in any::<u64>()) {
        let x: Vec<f64> = (0..rows * cols).map(|i| ((seed >> (i % 32)) % 13) as f64 / 13.0 + 0.01).collect();
        let op = make_block_circulant(&x, rows, cols, false).unwrap();
        let v: Vec<f64> = (0..rows * cols).map(|i| (i as f64 * 0.37).sin()).collect();
        let fast = op.apply_real(&v).unwrap();
        let dense = dense_apply(&op, &v);
        for (a, b) in fast.iter().zip(dense.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn unitaries_preserve_norm(amps in amplitudes(4), theta in -3.2f64..3.2) {
        let mut s = state("r", amps);
        let (sn, cs) = theta.sin_cos();
        let gate = [[C64::new(cs, 0.0), C64::new(-sn, 0.0)], [C64::new(sn, 0.0), C64::new(cs, 0.0)]];
        s.apply_single(gate, Qubit { register: "r", bit: 2 }).unwrap();
        s.qft("r").unwrap();
        s.hadamard_all("r").unwrap();
        let m = CMatrix::from_fn(16, 16, |i, k| C64::new(((i * 7 + k * 3) % 5) as f64 - 2.0, (i as f64 - k as f64) * theta));
        let q = m.qr().q();
        s.apply_unitary(&q, &["r"]).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn projection_is_idempotent(amps in amplitudes(4), outcome in 0usize..4) {
        let s = StateVector::from_unnormalized(Layout::of(&[("a", 2), ("b", 2)]).unwrap(), amps).unwrap();
        prop_assume!(s.probability("a", outcome).unwrap() > 1e-6);
        let (once, p) = s.project("a", outcome).unwrap();
        let (twice, q) = once.project("a", outcome).unwrap();
        prop_assert!(p > 0.0 && (q - 1.0).abs() <= 1e-12);
        for (x, y) in once.amplitudes().iter().zip(twice.amplitudes()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn swap_test_probability_is_exact(a in amplitudes(3), b in amplitudes(3)) {
        let (a, b) = (state("d", a), state("d", b));
        let est = swap_test(&a, &b, Measurement::Projection).unwrap();
        let ov = a.overlap(&b).unwrap();
        prop_assert!((est.p0 - (1.0 + ov) / 2.0).abs() <= 1e-12);
        prop_assert!((est.overlap_estimate - ov).abs() <= 1e-12);
    }

    #[test]
    fn signed_encoding_round_trips(bits in 3usize..12, frac in -0.5f64..0.5) {
        let t = 1.7;
        let grid = 2.0 * std::f64::consts::PI / (t * (1u64 << bits) as f64);
        let mu = (frac * (1u64 << bits) as f64).floor() * grid;
        let l = encode_signed(mu, t, bits);
        prop_assert!((decode_signed(l, t, bits) - mu).abs() <= 1e-9);
    }

    #[test]
    fn surrogate_dominates_labels(n in 4usize..300) {
        let y = gaussian_labels(n, 0.5).unwrap();
        let labels = surrogate(n, y.s).unwrap();
        for (i, v) in y.y.iter().enumerate() {
            prop_assert!(v * v <= labels.y_tilde_sq[i] + 1e-10);
        }
    }

    #[test]
    fn grover_rudolph_amplitudes(n in 4usize..200) {
        let y = gaussian_labels(n, 0.5).unwrap();
        let labels = surrogate(n, y.s).unwrap();
        let prepared = prepare_surrogate_state(&labels).unwrap();
        let total = labels.total();
        for (i, a) in prepared.state.amplitudes().iter().enumerate() {
            let want = if i < n { (labels.y_tilde_sq[i] / total).sqrt() } else { 0.0 };
            prop_assert!((a - C64::new(want, 0.0)).norm() <= 1e-10, "index {} got {} want {}", i, a, want);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn higher_taylor_order_never_hurts(x in pixels(4..5), t in 0.1f64..2.0) {
        let h = ExtendedHamiltonian::new(make_circulant(&x, true).unwrap());
        let mut last = f64::INFINITY;
        for k in 1..=10 {
            let err = LcuEvolver::with_order(h.clone(), t, k).unwrap().measured_error().unwrap();
            prop_assert!(err <= last * (1.0 + 1e-9) + 1e-13);
            last = err;
        }
    }
}

fn dense_apply<O: CirculantOperator>(op: &O, v: &[f64]) -> Vec<f64> {
    let d = op.dense();
    (0..v.len()).map(|i| (0..v.len()).map(|k| d[(i, k)] * v[k]).sum()).collect()
}
