use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

use scramble::hamiltonian::{build, HamiltonianSpec};
use scramble::hilbert::{product_state, LocalPauli, LocalState, PauliKind};
use scramble::operators::{operator_density_profile, pauli_decompose};
use scramble::propagation::{eigendecompose, krylov_step, HeisenbergEvolver, KrylovConfig, NumericalLimits};

fn hamiltonian_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("hamiltonian_apply");
    for n in [10usize, 14, 18] {
        let h = build(&HamiltonianSpec::powerlaw(n, 1.1, true)).unwrap();
        let psi = product_state(LocalState::YPlus, n).unwrap();
        let mut out = psi.amplitudes().to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| h.apply(psi.amplitudes(), &mut out))
        });
    }
    group.finish();
}

fn krylov(c: &mut Criterion) {
    let mut group = c.benchmark_group("krylov_step_dt0.1");
    let config = KrylovConfig::default();
    for n in [10usize, 14] {
        let h = build(&HamiltonianSpec::powerlaw(n, 1.1, true)).unwrap();
        let psi = product_state(LocalState::YPlus, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| krylov_step(&h, psi.amplitudes(), 0.1, &config).unwrap())
        });
    }
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let limits = NumericalLimits::default();
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    let n = 8;
    let h = build(&HamiltonianSpec::local(n)).unwrap();
    group.bench_function("eigendecompose_8", |b| b.iter(|| eigendecompose(&h, &limits).unwrap()));
    let d = eigendecompose(&h, &limits).unwrap();
    let psi = product_state(LocalState::YPlus, n).unwrap();
    let states = vec![psi; 100];
    let times: Vec<f64> = (0..100).map(|k| 0.1 * k as f64).collect();
    group.bench_function("evolve_each_8x100", |b| {
        b.iter(|| d.evolve_each(&states, &times).unwrap())
    });
    group.finish();
}

fn operator_spreading(c: &mut Criterion) {
    let limits = NumericalLimits::default();
    let mut group = c.benchmark_group("operator_spreading");
    group.sample_size(20);
    for n in [6usize, 7] {
        let h = build(&HamiltonianSpec::local(n)).unwrap();
        let d = eigendecompose(&h, &limits).unwrap();
        let seed = LocalPauli::new(PauliKind::Y, 1).to_matrix(n).unwrap();
        let ev = HeisenbergEvolver::new(&d, seed.as_ref(), &limits).unwrap();
        group.bench_with_input(BenchmarkId::new("heisenberg_at", n), &n, |b, _| b.iter(|| ev.at(3.0)));
        group.bench_with_input(BenchmarkId::new("density_profile", n), &n, |b, _| {
            b.iter_batched(|| ev.at(3.0), |w| operator_density_profile(&w).unwrap(), BatchSize::LargeInput)
        });
        group.bench_with_input(BenchmarkId::new("pauli_decompose", n), &n, |b, _| {
            b.iter_batched(|| ev.at(3.0), |w| pauli_decompose(&w).unwrap(), BatchSize::LargeInput)
        });
    }
    group.finish();
}

criterion_group!(benches, hamiltonian_apply, krylov, spectral, operator_spreading);
criterion_main!(benches);
