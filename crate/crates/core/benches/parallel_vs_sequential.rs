use brst_core::brst::{brst_complex, quantum_brst};
use brst_core::cohomology::{cohomology, extended_complex, sphere_complex, ExtendedComplex};
use brst_core::koszul::build_brst;
use brst_core::linalg::Tolerances;
use brst_core::models;
use brst_core::observables::ObservableAlgebra;
use brst_core::par::Execution;
use brst_core::quantize::generator_ops;
use brst_core::sample::{random_bounded, SampleShape};
use brst_core::states::FockSpace;
use brst_core::verify::product_residuals;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PATHS: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn extended(sys: &models::ModelSystem) -> ExtendedComplex {
    let tol = Tolerances::default();
    let space = FockSpace::with_inner(sys.m(), sys.inner.clone()).unwrap();
    let ops = generator_ops(&space, &sys.g, &sys.constants, &tol).unwrap();
    let charge = build_brst(&ObservableAlgebra::new(sys.constants.clone()), 4).unwrap();
    let omega = quantum_brst(&charge, &ops, &tol).unwrap();
    let complex = brst_complex(&omega.operator.matrix, &space).unwrap();
    extended_complex(&complex, &sphere_complex(sys.m()).unwrap()).unwrap()
}

fn bench_extended_cohomology(c: &mut Criterion) {
    let mut group = c.benchmark_group("extended_cohomology");
    let tol = Tolerances::default();
    for sys in [models::su2_spin_half_plus_trivial(), models::su2_spin_one_plus_trivial()] {
        let ext = extended(&sys);
        for (name, exec) in PATHS {
            group.bench_with_input(BenchmarkId::new(name, &sys.name), &ext, |b, ext| {
                b.iter(|| cohomology(&ext.complex, &tol, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_homomorphism_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("homomorphism_batch");
    let sys = models::abelian_m2();
    let tol = Tolerances::default();
    let space = FockSpace::with_inner(sys.m(), sys.inner.clone()).unwrap();
    let ops = generator_ops(&space, &sys.g, &sys.constants, &tol).unwrap();
    let alg = ObservableAlgebra::new(sys.constants.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shape = SampleShape::default();
    let pairs: Vec<_> = (0..200).map(|_| (random_bounded(&mut rng, 2, 5, shape), random_bounded(&mut rng, 2, 5, shape))).collect();
    for (name, exec) in PATHS {
        group.bench_function(name, |b| b.iter(|| product_residuals(&alg, &ops, &pairs, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_extended_cohomology, bench_homomorphism_batch,
);
criterion_main!(benches);
