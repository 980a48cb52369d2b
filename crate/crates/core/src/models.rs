//! Reference constraint systems: abelian toy models and su(2) acting on
//! small representations.
//!
//! Constraint operators satisfy `[G_a, G_b] = -i C_ab^c G_c`; for su(2) with
//! `C_ab^c = epsilon_abc` this means `G_a = -S_a` for spin matrices `S_a`.

use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::observables::StructureConstants;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSystem {
    pub name: String,
    pub constants: StructureConstants,
    /// Constraint operators on `V`.
    pub g: Vec<CMatrix>,
    /// Inner product on `V`.
    pub inner: CMatrix,
}

impl ModelSystem {
    pub fn m(&self) -> usize {
        self.constants.m()
    }

    pub fn d(&self) -> usize {
        self.inner.nrows()
    }
}

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(entries.len(), entries.iter().map(|&x| cz(x, 0.0))))
}

/// Block-diagonal sum.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(CMatrix::nrows).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    out
}

/// Spin-1/2 matrices `S_a = sigma_a / 2`.
pub fn spin_half() -> [CMatrix; 3] {
    let h = 0.5;
    [
        CMatrix::from_row_slice(2, 2, &[cz(0.0, 0.0), cz(h, 0.0), cz(h, 0.0), cz(0.0, 0.0)]),
        CMatrix::from_row_slice(2, 2, &[cz(0.0, 0.0), cz(0.0, -h), cz(0.0, h), cz(0.0, 0.0)]),
        CMatrix::from_row_slice(2, 2, &[cz(h, 0.0), cz(0.0, 0.0), cz(0.0, 0.0), cz(-h, 0.0)]),
    ]
}

/// Spin-1 matrices in the adjoint basis, `(S_a)_bc = -i epsilon_abc`.
pub fn spin_one() -> [CMatrix; 3] {
    let eps = |a: usize, b: usize, c: usize| -> f64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    std::array::from_fn(|a| CMatrix::from_fn(3, 3, |b, c| cz(0.0, -eps(a, b, c))))
}

fn su2_system(name: &str, spins: &[[CMatrix; 3]], trivial: usize) -> ModelSystem {
    let g = (0..3)
        .map(|a| {
            let mut blocks: Vec<CMatrix> = spins.iter().map(|s| -s[a].clone()).collect();
            if trivial > 0 {
                blocks.push(CMatrix::zeros(trivial, trivial));
            }
            direct_sum(&blocks)
        })
        .collect::<Vec<_>>();
    let d = g[0].nrows();
    ModelSystem { name: name.into(), constants: StructureConstants::su2(), g, inner: CMatrix::identity(d, d) }
}

/// One constraint on `C^2`: `G_1 = diag(1, 0)`.
pub fn abelian_m1() -> ModelSystem {
    ModelSystem {
        name: "abelian_m1".into(),
        constants: StructureConstants::abelian(1),
        g: vec![diag(&[1.0, 0.0])],
        inner: CMatrix::identity(2, 2),
    }
}

/// Two commuting constraints on `C^2` with a one-dimensional joint kernel.
pub fn abelian_m2() -> ModelSystem {
    ModelSystem {
        name: "abelian_m2".into(),
        constants: StructureConstants::abelian(2),
        g: vec![diag(&[1.0, 0.0]), diag(&[2.0, 0.0])],
        inner: CMatrix::identity(2, 2),
    }
}

pub fn su2_spin_half_plus_trivial() -> ModelSystem {
    su2_system("su2_spin_half_plus_trivial", &[spin_half()], 1)
}

pub fn su2_spin_one_plus_trivial() -> ModelSystem {
    su2_system("su2_spin_one_plus_trivial", &[spin_one()], 1)
}

/// No invariant vectors: the joint kernel is zero.
pub fn su2_spin_one() -> ModelSystem {
    su2_system("su2_spin_one", &[spin_one()], 0)
}
