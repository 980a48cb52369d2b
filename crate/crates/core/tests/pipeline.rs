use brst_core::brst::{brst_complex, quantum_brst};
use brst_core::cohomology::{cohomology, duality_check, extended_complex, joint_kernel_dim, sphere_complex};
use brst_core::koszul::build_brst;
use brst_core::linalg::Tolerances;
use brst_core::models::{self, ModelSystem};
use brst_core::observables::ObservableAlgebra;
use brst_core::par::Execution;
use brst_core::quantize::generator_ops;
use brst_core::states::FockSpace;

fn cohomology_dims(sys: &ModelSystem, exec: Execution) -> (Vec<usize>, usize) {
    let tol = Tolerances::default();
    let space = FockSpace::with_inner(sys.m(), sys.inner.clone()).unwrap();
    let ops = generator_ops(&space, &sys.g, &sys.constants, &tol).unwrap();
    let charge = build_brst(&ObservableAlgebra::new(sys.constants.clone()), sys.m()).unwrap();
    let q = quantum_brst(&charge, &ops, &tol).unwrap();
    assert!(q.certificate.nilpotent() && q.certificate.self_adjoint());
    let complex = brst_complex(&q.operator.matrix, ops.space()).unwrap();
    let h = cohomology(&complex, &tol, exec).unwrap().dims();
    let ext = extended_complex(&complex, &sphere_complex(sys.m()).unwrap()).unwrap();
    let h0 = cohomology(&ext.complex, &tol, exec).unwrap().degrees[ext.ghost_zero_degree()].cohomology;
    (h, h0)
}

#[test]
fn abelian_systems_end_to_end() {
    assert_eq!(cohomology_dims(&models::abelian_m1(), Execution::default()), (vec![1, 1], 2));
    assert_eq!(cohomology_dims(&models::abelian_m2(), Execution::default()), (vec![1, 2, 1], 2));
}

#[test]
fn su2_systems_end_to_end() {
    for sys in [models::su2_spin_half_plus_trivial(), models::su2_spin_one_plus_trivial()] {
        let (h, h0) = cohomology_dims(&sys, Execution::default());
        assert_eq!(h, vec![1, 0, 0, 1], "{}", sys.name);
        assert_eq!(h0, h[0] + h[3]);
        assert_eq!(joint_kernel_dim(&sys.g, 1e-9), 1);
    }
}

#[test]
fn no_invariants_no_extreme_cohomology() {
    let sys = models::su2_spin_one();
    let tol = Tolerances::default();
    let space = FockSpace::with_inner(3, sys.inner.clone()).unwrap();
    let ops = generator_ops(&space, &sys.g, &sys.constants, &tol).unwrap();
    let charge = build_brst(&ObservableAlgebra::new(sys.constants.clone()), 3).unwrap();
    let omega = quantum_brst(&charge, &ops, &tol).unwrap().operator.matrix;
    let h = cohomology(&brst_complex(&omega, ops.space()).unwrap(), &tol, Execution::default()).unwrap().dims();
    assert_eq!((h[0], h[3]), (0, 0));
    let dual = duality_check(&omega, ops.space(), &tol).unwrap();
    assert_eq!(dual.lambda_rank, 0);
}

#[test]
fn execution_paths_agree() {
    let sys = models::su2_spin_half_plus_trivial();
    assert_eq!(cohomology_dims(&sys, Execution::Parallel), cohomology_dims(&sys, Execution::Sequential));
}
