//! Acceptance criteria 1-9, one PASS/FAIL line each.
//!
//! cargo test -p brst-lab --test acceptance

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use brst_core::brst::{brst_complex, quantum_brst};
use brst_core::cohomology::{cohomology, duality_check, extended_complex, joint_kernel_dim, sphere_complex};
use brst_core::ghostalg::MultiIndex;
use brst_core::koszul::build_brst;
use brst_core::linalg::{hermitian_eigenvalues, kron, max_abs, singular_values, CMatrix, Tolerances};
use brst_core::models::{self, ModelSystem};
use brst_core::observables::{Observable, ObservableAlgebra, StructureConstants};
use brst_core::par::Execution;
use brst_core::quantize::{adjoint, generator_ops, ghost_number_op, GeneratorOps};
use brst_core::sample::{random_bounded, random_homogeneous, random_resolvable_monomial, SampleShape};
use brst_core::states::{binomial, FockSpace};
use brst_core::verify::{adjoint_residuals, bracket_residuals, canonical_residual, koszul_residuals, product_residuals};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ops_for(sys: &ModelSystem) -> GeneratorOps {
    let space = FockSpace::with_inner(sys.m(), sys.inner.clone()).unwrap();
    generator_ops(&space, &sys.g, &sys.constants, &Tolerances::default()).unwrap()
}

/// Every `(m, d)` with `m <= 3`, `d <= 4`, with zero constraints.
fn small_spaces() -> Vec<GeneratorOps> {
    let mut out = Vec::new();
    for m in 1..=3 {
        for d in 1..=4 {
            let sys = ModelSystem {
                name: format!("zero-{m}-{d}"),
                constants: StructureConstants::abelian(m),
                g: vec![CMatrix::zeros(d, d); m],
                inner: CMatrix::identity(d, d),
            };
            out.push(ops_for(&sys));
        }
    }
    out
}

/// Commuting Hermitian constraints with integer spectra in a random basis.
fn random_abelian(rng: &mut ChaCha8Rng, m: usize, d: usize) -> ModelSystem {
    let a = CMatrix::from_fn(d, d, |_, _| cz(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let q = a.qr().q();
    let g = (0..m)
        .map(|_| {
            let diag = nalgebra_diag(d, rng);
            &q * diag * q.adjoint()
        })
        .collect();
    ModelSystem { name: format!("random-abelian-{m}-{d}"), constants: StructureConstants::abelian(m), g, inner: CMatrix::identity(d, d) }
}

fn nalgebra_diag(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut out = CMatrix::zeros(d, d);
    for k in 0..d {
        out[(k, k)] = cz(rng.gen_range(-2i32..=2) as f64, 0.0);
    }
    out
}

/// `G -> T^-1 G T` with inner product `T^dagger T`.
fn skewed(sys: &ModelSystem, rng: &mut ChaCha8Rng) -> ModelSystem {
    let d = sys.d();
    let t = CMatrix::from_fn(d, d, |i, j| cz(if i == j { 2.0 } else { 0.0 } + rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
    let t_inv = t.clone().try_inverse().unwrap();
    ModelSystem {
        name: format!("{}-skewed", sys.name),
        constants: sys.constants.clone(),
        g: sys.g.iter().map(|g| &t_inv * g * &t).collect(),
        inner: t.adjoint() * &t,
    }
}

fn criterion_1() -> Outcome {
    let worst = small_spaces().iter().map(canonical_residual).fold(0.0, f64::max);
    outcome(worst <= 1e-12, format!("12 spaces, max entry residual {worst:.1e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let shape = SampleShape::default();
    let mut systems = vec![models::abelian_m1(), models::abelian_m2()];
    for (m, d) in [(2, 3), (3, 2), (3, 4)] {
        systems.push(random_abelian(&mut rng, m, d));
    }
    let (mut count, mut prod, mut brack) = (0, 0.0f64, 0.0f64);
    for sys in &systems {
        let ops = ops_for(sys);
        let alg = ObservableAlgebra::new(sys.constants.clone());
        // deg F + deg G <= 5, counting ghosts, momenta and constraint symbols
        let pairs: Vec<(Observable, Observable)> = (0..48)
            .map(|_| {
                let split = rng.gen_range(0..=5);
                (random_bounded(&mut rng, sys.m(), split, shape), random_bounded(&mut rng, sys.m(), 5 - split, shape))
            })
            .collect();
        count += pairs.len();
        prod = prod.max(product_residuals(&alg, &ops, &pairs, Execution::default()).unwrap().max);
        brack = brack.max(bracket_residuals(&alg, &ops, &pairs, Execution::default()).unwrap().max);
    }
    // nonabelian bracket pairs of the BRST type, reported alongside
    let sys = models::su2_spin_one_plus_trivial();
    let ops = ops_for(&sys);
    let alg = ObservableAlgebra::new(sys.constants.clone());
    let linear = SampleShape { terms: 3, max_coeff_degree: 1, coeff_bound: 2 };
    let constant = SampleShape { max_coeff_degree: 0, ..linear };
    let su2_pairs: Vec<_> = (0..40)
        .map(|_| {
            let f = random_homogeneous(&mut rng, 3, 1, 0, linear);
            let (r, s) = (rng.gen_range(0..=3), rng.gen_range(0..=2));
            (f, random_homogeneous(&mut rng, 3, r, s, constant))
        })
        .collect();
    let su2 = bracket_residuals(&alg, &ops, &su2_pairs, Execution::default()).unwrap().max;
    outcome(
        count >= 200 && prod < 1e-10 && brack < 1e-10 && su2 < 1e-10,
        format!("{count} abelian pairs: product {prod:.1e}, bracket {brack:.1e}; {} su(2) bracket pairs {su2:.1e}", su2_pairs.len()),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut basis_worst: f64 = 0.0;
    let mut gram_min = f64::INFINITY;
    for base in small_spaces() {
        let (m, d) = (base.space().m(), base.space().d());
        // a non-identity inner product exercises the V part of the pairing
        let zero = ModelSystem {
            name: String::new(),
            constants: StructureConstants::abelian(m),
            g: vec![CMatrix::zeros(d, d); m],
            inner: CMatrix::identity(d, d),
        };
        for sys in [zero.clone(), skewed(&zero, &mut rng)] {
            let ops = ops_for(&sys);
            let space = ops.space();
            let basis: Vec<_> = space.blocks().iter().flat_map(|i| (0..d).map(move |k| (*i, k))).collect();
            let states: Vec<_> = basis.iter().map(|&(i, k)| space.basis_state(i, k)).collect();
            let flat: Vec<_> = states.iter().map(|s| space.to_flat(s).unwrap()).collect();
            for a in 1..=m {
                for (op, sign) in [(ops.eta(a), 1.0), (ops.momentum(a), -1.0)] {
                    let images: Vec<_> = flat.iter().map(|v| space.from_flat(&(&op * v)).unwrap()).collect();
                    for (x, ax) in states.iter().zip(&images) {
                        for (y, ay) in states.iter().zip(&images) {
                            // (x, A y) = sign (A x, y)
                            let lhs = space.scalar_product(x, ay).unwrap();
                            let rhs = space.scalar_product(ax, y).unwrap() * sign;
                            basis_worst = basis_worst.max((lhs - rhs).norm());
                        }
                    }
                }
            }
            for p in 0..=m {
                let sv = singular_values(&space.pairing_gram(p).unwrap());
                gram_min = gram_min.min(sv.iter().copied().fold(f64::INFINITY, f64::min));
            }
        }
    }
    let mut closed_worst: f64 = 0.0;
    let systems = [models::su2_spin_one_plus_trivial(), skewed(&models::su2_spin_half_plus_trivial(), &mut rng)];
    for sys in &systems {
        let ops = ops_for(sys);
        let fs: Vec<_> = (0..25)
            .map(|_| {
                let (r, s) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
                random_homogeneous(&mut rng, 3, r, s, SampleShape::default())
            })
            .collect();
        closed_worst = closed_worst.max(adjoint_residuals(&ops, &fs, &Tolerances::default(), Execution::default()).unwrap().max);
    }
    outcome(
        basis_worst <= 1e-12 && closed_worst < 1e-10 && gram_min > 1e-9,
        format!("basis pairs {basis_worst:.1e}; 50 closed forms {closed_worst:.1e}; min gram singular value {gram_min:.2}"),
    )
}

fn criterion_4() -> Outcome {
    let mut spectrum_ok = true;
    let (mut eig_err, mut adj_err): (f64, f64) = (0.0, 0.0);
    for ops in small_spaces() {
        let (m, d) = (ops.space().m(), ops.space().d());
        let g = ghost_number_op(&ops);
        let ev = hermitian_eigenvalues(&g.matrix);
        let mut expected = Vec::new();
        for s in 0..=m {
            expected.extend(std::iter::repeat(s as f64 - m as f64 / 2.0).take(binomial(m, s) * d));
        }
        spectrum_ok &= ev.len() == expected.len();
        for (x, y) in ev.iter().zip(&expected) {
            eig_err = eig_err.max((x - y).abs());
        }
        let adj = adjoint(&g, ops.space(), &Tolerances::default()).unwrap();
        adj_err = adj_err.max((&adj.matrix + &g.matrix).norm());
    }
    outcome(
        spectrum_ok && eig_err <= 1e-12 && adj_err <= 1e-12,
        format!("eigenvalue error {eig_err:.1e}, |adjoint(G) + G| {adj_err:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for m in 1..=4 {
        let charge = build_brst(&ObservableAlgebra::new(StructureConstants::abelian(m)), 4).unwrap();
        let mut expected = Observable::zero(m);
        for a in 1..=m {
            expected += Observable::monomial(
                MultiIndex::singleton(a, m).unwrap(),
                brst_core::observables::Monomial::symbol(a, m),
                MultiIndex::empty(m),
                cz(1.0, 0.0),
            );
        }
        ok &= charge.total == expected && charge.rank() == 0;
    }
    notes.push("abelian m=1..4 exact".to_string());
    let alg = ObservableAlgebra::new(StructureConstants::su2());
    let charge = build_brst(&alg, 4).unwrap();
    let square = alg.poisson(&charge.total, &charge.total).unwrap();
    let real = alg.conjugate(&charge.total).unwrap() == charge.total;
    ok &= charge.rank() == 1 && square.is_zero() && real;
    notes.push(format!("su(2) rank {}, [Omega,Omega] zero: {}, real: {real}", charge.rank(), square.is_zero()));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fs: Vec<_> = (0..100).map(|_| random_resolvable_monomial(&mut rng, 3, 3)).collect();
    let k = koszul_residuals(&fs, Execution::default()).unwrap();
    ok &= k.square.max == 0.0 && k.homotopy.max <= 1e-12;
    notes.push(format!("100 monomials: delta^2 {:.1e}, homotopy {:.1e}", k.square.max, k.homotopy.max));
    outcome(ok, notes.join("; "))
}

fn criterion_6() -> Outcome {
    let sys = models::su2_spin_one_plus_trivial();
    let ops = ops_for(&sys);
    let charge = build_brst(&ObservableAlgebra::new(sys.constants.clone()), 4).unwrap();
    let q = quantum_brst(&charge, &ops, &Tolerances::default()).unwrap();
    let omega = &q.operator.matrix;
    let square = (omega * omega).norm();
    let adj = adjoint(&q.operator, ops.space(), &Tolerances::default()).unwrap();
    let sa = (&adj.matrix - omega).norm();
    outcome(
        ops.space().dim() == 32 && square < 1e-12 && sa < 1e-10,
        format!("dim {}, |Omega^2| {square:.1e}, |Omega - Omega^dagger| {sa:.1e}", ops.space().dim()),
    )
}

fn quantum_complex(sys: &ModelSystem) -> (GeneratorOps, CMatrix) {
    let ops = ops_for(sys);
    let charge = build_brst(&ObservableAlgebra::new(sys.constants.clone()), 4).unwrap();
    let omega = quantum_brst(&charge, &ops, &Tolerances::default()).unwrap().operator.matrix;
    (ops, omega)
}

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let mut ok = true;
    let mut notes = Vec::new();
    // the trivial summand is the only invariant: one vector with, zero without
    for (sys, expected) in [(models::su2_spin_one_plus_trivial(), 1), (models::su2_spin_one(), 0)] {
        let (ops, omega) = quantum_complex(&sys);
        let h = cohomology(&brst_complex(&omega, ops.space()).unwrap(), &tol, Execution::default()).unwrap().dims();
        let dual = duality_check(&omega, ops.space(), &tol).unwrap();
        let joint = joint_kernel_dim(&sys.g, tol.rank);
        ok &= h[0] == expected && h[3] == expected && joint == expected && dual.holds() && dual.lambda_rank == expected;
        notes.push(format!("{}: H^-3/2 {}, H^+3/2 {}, Lambda rank {}", sys.name, h[0], h[3], dual.lambda_rank));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let tol = Tolerances::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for m in 1..=4 {
        let h = cohomology(&sphere_complex(m).unwrap(), &tol, Execution::default()).unwrap().dims();
        let mut expected = vec![0; m + 1];
        expected[0] = 1;
        expected[m] = 1;
        ok &= h == expected;
    }
    notes.push("sphere m=1..4".to_string());
    for sys in [models::su2_spin_one_plus_trivial(), models::su2_spin_half_plus_trivial()] {
        let (ops, omega) = quantum_complex(&sys);
        let m = sys.m();
        let brst = brst_complex(&omega, ops.space()).unwrap();
        let h = cohomology(&brst, &tol, Execution::default()).unwrap().dims();
        let sphere = sphere_complex(m).unwrap();
        let ext = extended_complex(&brst, &sphere).unwrap();
        let r = cohomology(&ext.complex, &tol, Execution::default()).unwrap();
        let k0 = ext.ghost_zero_degree();
        let h0 = r.degrees[k0].cohomology;
        let top = ext.block(m, 0).unwrap();
        let reps = &r.degrees[k0].representatives;
        let restricted = reps.view((top.offset, 0), (top.len, reps.ncols())).into_owned();
        let d0 = kron(&CMatrix::identity(brst.dims[m], brst.dims[m]), &sphere.differentials[0]);
        let mut annihilated = max_abs(&(&d0 * &restricted));
        let sector = ops.space().sector(m);
        for b in 1..=m {
            let eta = ops.eta(b);
            let eta_top = eta.view((0, sector.start), (eta.nrows(), sector.len())).into_owned();
            annihilated = annihilated.max(max_abs(&(kron(&eta_top, &CMatrix::identity(sphere.dims[0], sphere.dims[0])) * &restricted)));
        }
        ok &= h0 == 2 && h0 == h[0] + h[m] && annihilated <= 1e-10 && max_abs(&restricted) > 0.1;
        notes.push(format!("{}: H^0(ext) {h0} = {} + {}, constraints {annihilated:.1e}", sys.name, h[0], h[m]));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let systems = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems");
    let mut ok = true;
    let mut n = 0;
    for name in ["abelian_m1", "abelian_m2", "su2_spin_half_plus_trivial", "su2_spin_one_plus_trivial"] {
        let path = systems.join(format!("{name}.json"));
        let runs: Vec<_> = (0..2)
            .map(|_| Command::new(env!("CARGO_BIN_EXE_brst-lab")).args(["all", "--system", path.to_str().unwrap(), "--json"]).output().unwrap())
            .collect();
        ok &= runs.iter().all(|o| o.status.success()) && runs[0].stdout == runs[1].stdout && !runs[0].stdout.is_empty();
        n += 1;
    }
    outcome(ok, format!("{n} systems, two runs each, byte-identical"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 9] = [
        ("quantization relations", criterion_1, Some(Duration::from_secs(1))),
        ("homomorphism and bracket correspondence", criterion_2, Some(Duration::from_secs(30))),
        ("adjoint calculus", criterion_3, Some(Duration::from_secs(10))),
        ("ghost number operator", criterion_4, Some(Duration::from_secs(1))),
        ("classical BRST construction", criterion_5, Some(Duration::from_secs(5))),
        ("quantum BRST operator", criterion_6, Some(Duration::from_secs(2))),
        ("duality at extreme ghost numbers", criterion_7, Some(Duration::from_secs(2))),
        ("extended complex", criterion_8, Some(Duration::from_secs(10))),
        ("determinism", criterion_9, None),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.map_or(true, |b| elapsed <= b);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget_note = budget.map_or(String::new(), |b| format!(" / {:.0} s", b.as_secs_f64()));
        println!(
            "criterion {} [{name}]: {} ({}; {:.3} s{budget_note})",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
