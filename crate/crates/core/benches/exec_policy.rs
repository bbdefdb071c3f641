//! Parallel vs sequential execution of the hot loops.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qvtrack_core::applications::{run_disappearance_experiment, DisappearanceExperiment};
use qvtrack_core::exec;
use qvtrack_core::statevector::{Layout, Qubit, StateVector};
use qvtrack_core::C64;

const POLICIES: [(&str, bool); 2] = [("parallel", true), ("sequential", false)];

fn statevector_ops(c: &mut Criterion) {
    let mut group = c.benchmark_group("statevector");
    group.sample_size(10);
    let layout = Layout::of(&[("hi", 10), ("lo", 10)]).unwrap();
    let base = StateVector::zero(layout);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]];
    for (name, parallel) in POLICIES {
        exec::set_parallel(parallel);
        group.bench_with_input(BenchmarkId::new("hadamard_layer", name), &base, |b, s| {
            b.iter(|| {
                let mut s = s.clone();
                s.hadamard_all("hi").unwrap();
                s.apply_single(hadamard, Qubit { register: "lo", bit: 3 }).unwrap();
                black_box(s)
            })
        });
        group.bench_with_input(BenchmarkId::new("qft", name), &base, |b, s| {
            b.iter(|| {
                let mut s = s.clone();
                s.qft("lo").unwrap();
                black_box(s)
            })
        });
    }
    exec::set_parallel(true);
    group.finish();
}

fn disappearance(c: &mut Criterion) {
    let mut group = c.benchmark_group("disappearance");
    group.sample_size(10);
    let cfg = DisappearanceExperiment { runs: 8, ..Default::default() };
    for (name, parallel) in POLICIES {
        exec::set_parallel(parallel);
        group.bench_function(BenchmarkId::new("runs_8", name), |b| {
            b.iter(|| black_box(run_disappearance_experiment(&cfg).unwrap()))
        });
    }
    exec::set_parallel(true);
    group.finish();
}

criterion_group!(benches, statevector_ops, disappearance);
criterion_main!(benches);
