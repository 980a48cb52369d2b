//! Quantization of observables to operators on the extended state space.
//!
//! `eta^a` acts by left exterior multiplication, `P_a = -i d/d eta^a` (left
//! derivative), and a coefficient polynomial acts on `V` only. A term
//! `eta^A f P_B` maps to `eta^A f P_B` with the `P`'s acting first.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ghostalg::{left_derivative, merge_sign, MultiIndex};
use crate::linalg::{commutator, is_hermitian_wrt, kron, max_abs, max_abs_diff, CMatrix, Tolerances, I};
use crate::observables::{CoefficientPoly, Monomial, Observable, StructureConstants};
use crate::states::FockSpace;

/// A matrix on the extended state space with its grading data.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedOperator {
    pub matrix: CMatrix,
    /// `Some(p)` if every nonzero block changes the ghost degree by `p` mod 2.
    pub parity: Option<u8>,
    /// `Some(k)` if every nonzero block maps `S^s` into `S^{s+k}`.
    pub ghost_shift: Option<i32>,
}

impl GradedOperator {
    pub fn new(matrix: CMatrix, parity: Option<u8>, ghost_shift: Option<i32>) -> Self {
        GradedOperator { matrix, parity, ghost_shift }
    }

    /// Reads parity and ghost shift off the block structure.
    pub fn infer(space: &FockSpace, matrix: CMatrix, tol: f64) -> Self {
        let shifts: Vec<i32> = shift_norms(space, &matrix).into_iter().filter(|&(_, v)| v > tol).map(|(k, _)| k).collect();
        let ghost_shift = match shifts.as_slice() {
            [] => Some(0),
            [k] => Some(*k),
            _ => None,
        };
        let parity = match shifts.first() {
            None => Some(0),
            Some(k0) => shifts.iter().all(|k| (k - k0) % 2 == 0).then_some(k0.rem_euclid(2) as u8),
        };
        GradedOperator { matrix, parity, ghost_shift }
    }

    /// Largest entry outside the blocks of shift `k`.
    pub fn off_shift_norm(&self, space: &FockSpace, k: i32) -> f64 {
        shift_norms(space, &self.matrix).into_iter().filter(|&(s, _)| s != k).map(|(_, v)| v).fold(0.0, f64::max)
    }

    /// The block mapping `S^from` into `S^to`.
    pub fn block(&self, space: &FockSpace, from: usize, to: usize) -> CMatrix {
        let (r, c) = (space.sector(to), space.sector(from));
        self.matrix.view((r.start, c.start), (r.len(), c.len())).into_owned()
    }
}

/// Max absolute entry per ghost-degree shift.
pub fn shift_norms(space: &FockSpace, matrix: &CMatrix) -> BTreeMap<i32, f64> {
    let mut out = BTreeMap::new();
    for j in 0..matrix.ncols() {
        let dj = space.degree_of(j) as i32;
        for i in 0..matrix.nrows() {
            let v = matrix[(i, j)].norm();
            if v > 0.0 {
                let e = out.entry(space.degree_of(i) as i32 - dj).or_insert(0.0);
                if v > *e {
                    *e = v;
                }
            }
        }
    }
    out
}

/// Exterior multiplication by `eta^a` on the ghost factor alone.
fn ghost_eta(space: &FockSpace, a: usize) -> CMatrix {
    let n = space.blocks().len();
    let single = MultiIndex::singleton(a, space.m()).expect("index in range");
    let mut e = CMatrix::zeros(n, n);
    for (col, j) in space.blocks().iter().enumerate() {
        let (target, s) = merge_sign(&single, j);
        if s != 0 {
            e[(space.block_position(&target), col)] = Complex64::new(s as f64, 0.0);
        }
    }
    e
}

/// Left derivative by `eta^a` on the ghost factor alone.
fn ghost_derivative(space: &FockSpace, a: usize) -> CMatrix {
    let n = space.blocks().len();
    let mut e = CMatrix::zeros(n, n);
    for (col, j) in space.blocks().iter().enumerate() {
        let (target, s) = left_derivative(a, j);
        if s != 0 {
            e[(space.block_position(&target), col)] = Complex64::new(s as f64, 0.0);
        }
    }
    e
}

/// Generator operators for a constraint system on a given state space.
#[derive(Clone, Debug)]
pub struct GeneratorOps {
    space: FockSpace,
    constants: StructureConstants,
    g_v: Vec<CMatrix>,
    eta_ghost: Vec<CMatrix>,
    deriv_ghost: Vec<CMatrix>,
    /// `max |[G_a, G_b] + i C_ab^c G_c|`.
    pub consistency_residual: f64,
    /// `max |H G_a - G_a^dagger H|`.
    pub hermiticity_residual: f64,
}

/// Builds the generator operators, checking that each `G_a` is self-adjoint
/// on `V` and that `[G_a, G_b] = -i C_ab^c G_c`.
pub fn generator_ops(space: &FockSpace, g_mats: &[CMatrix], constants: &StructureConstants, tol: &Tolerances) -> Result<GeneratorOps> {
    let (m, d) = (space.m(), space.d());
    if constants.m() != m || g_mats.len() != m {
        return Err(Error::Config(format!(
            "{} constraint matrices and {}-index structure constants for m = {m}",
            g_mats.len(),
            constants.m()
        )));
    }
    for (a, g) in g_mats.iter().enumerate() {
        if g.shape() != (d, d) {
            return Err(Error::Config(format!("G_{} has shape {:?}, expected ({d}, {d})", a + 1, g.shape())));
        }
    }
    let hermiticity_residual = g_mats.iter().map(|g| is_hermitian_wrt(g, space.inner())).fold(0.0, f64::max);
    let op_tol = tol.operator_for(d);
    if hermiticity_residual > op_tol {
        return Err(Error::Config(format!("constraint operators are not self-adjoint on V (residual {hermiticity_residual:e})")));
    }
    let mut consistency_residual: f64 = 0.0;
    for a in 1..=m {
        for b in (a + 1)..=m {
            let mut r = commutator(&g_mats[a - 1], &g_mats[b - 1]);
            for c in 1..=m {
                let v = constants.get(a, b, c);
                if v != 0.0 {
                    r += g_mats[c - 1].scale(v) * I;
                }
            }
            consistency_residual = consistency_residual.max(max_abs(&r));
        }
    }
    if consistency_residual > op_tol {
        return Err(Error::Consistency { residual: consistency_residual, tolerance: op_tol });
    }
    Ok(GeneratorOps {
        space: space.clone(),
        constants: constants.clone(),
        g_v: g_mats.to_vec(),
        eta_ghost: (1..=m).map(|a| ghost_eta(space, a)).collect(),
        deriv_ghost: (1..=m).map(|a| ghost_derivative(space, a)).collect(),
        consistency_residual,
        hermiticity_residual,
    })
}

impl GeneratorOps {
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.constants
    }

    pub fn g_matrix(&self, a: usize) -> &CMatrix {
        &self.g_v[a - 1]
    }

    pub fn g_matrices(&self) -> &[CMatrix] {
        &self.g_v
    }

    /// `f` acting on every ghost sector alike.
    pub fn lift(&self, f: &CMatrix) -> CMatrix {
        let n = self.space.blocks().len();
        kron(&CMatrix::identity(n, n), f)
    }

    fn ghost_lift(&self, g: &CMatrix) -> CMatrix {
        kron(g, &CMatrix::identity(self.space.d(), self.space.d()))
    }

    pub fn eta(&self, a: usize) -> CMatrix {
        self.ghost_lift(&self.eta_ghost[a - 1])
    }

    pub fn momentum(&self, a: usize) -> CMatrix {
        self.ghost_lift(&self.deriv_ghost[a - 1]) * (-I)
    }

    pub fn constraint(&self, a: usize) -> CMatrix {
        self.lift(&self.g_v[a - 1])
    }

    /// Fully symmetrized product of the `G` matrices named by a monomial.
    pub fn symmetrized(&self, mono: &Monomial) -> CMatrix {
        let d = self.space.d();
        let mut factors = mono.factors();
        if factors.is_empty() {
            return CMatrix::identity(d, d);
        }
        // distinct orderings of the multiset, each weighted equally
        factors.sort_unstable();
        let mut sum = CMatrix::zeros(d, d);
        let mut count = 0usize;
        loop {
            let mut prod = CMatrix::identity(d, d);
            for &a in &factors {
                prod *= &self.g_v[a - 1];
            }
            sum += prod;
            count += 1;
            if !next_permutation(&mut factors) {
                break;
            }
        }
        sum.unscale(count as f64)
    }

    pub fn coefficient_matrix(&self, f: &CoefficientPoly) -> CMatrix {
        let d = self.space.d();
        let mut out = CMatrix::zeros(d, d);
        for (mono, z) in f.terms() {
            out += self.symmetrized(mono) * *z;
        }
        out
    }

    /// `eta^{a_1} .. eta^{a_r}` on the ghost factor.
    fn ghost_eta_product(&self, a: &MultiIndex) -> CMatrix {
        let n = self.space.blocks().len();
        a.indices().fold(CMatrix::identity(n, n), |acc, k| acc * &self.eta_ghost[k - 1])
    }

    /// `P_{b_1} .. P_{b_s}` on the ghost factor.
    fn ghost_momentum_product(&self, b: &MultiIndex) -> CMatrix {
        let n = self.space.blocks().len();
        let prod = b.indices().fold(CMatrix::identity(n, n), |acc, k| acc * &self.deriv_ghost[k - 1]);
        prod * (-I).powu(b.len() as u32)
    }

    /// `V`-level adjoint `H^-1 f^dagger H`.
    pub fn v_adjoint(&self, f: &CMatrix) -> CMatrix {
        let h = self.space.inner();
        h.clone().lu().solve(&(f.adjoint() * h)).expect("inner product is invertible")
    }
}

/// Lexicographic next permutation; false once the last one is reached.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn term_grading(f: &Observable) -> (Option<u8>, Option<i32>) {
    let shifts: Vec<i32> = f.terms().map(|((a, b), _)| a.len() as i32 - b.len() as i32).collect();
    let shift = match shifts.first() {
        None => Some(0),
        Some(k) => shifts.iter().all(|s| s == k).then_some(*k),
    };
    (f.parity().ok(), shift)
}

/// The quantization map.
pub fn quantize(f: &Observable, ops: &GeneratorOps) -> Result<GradedOperator> {
    if f.m() != ops.space.m() {
        return Err(Error::GhostCountMismatch { left: ops.space.m(), right: f.m() });
    }
    let n = ops.space.dim();
    let mut out = CMatrix::zeros(n, n);
    for ((a, b), poly) in f.terms() {
        let ghost = ops.ghost_eta_product(a) * ops.ghost_momentum_product(b);
        out += kron(&ghost, &ops.coefficient_matrix(poly));
    }
    let (parity, shift) = term_grading(f);
    Ok(GradedOperator::new(out, parity, shift))
}

/// Residuals of the two defining identities of an adjoint `B` of `A`:
/// `P B = A^dagger P` (right) and `P A = B^dagger P` (left).
pub fn adjoint_residuals(space: &FockSpace, a: &CMatrix, b: &CMatrix) -> (f64, f64) {
    let p = space.pairing();
    let right = max_abs_diff(&(&p * b), &(a.adjoint() * &p));
    let left = max_abs_diff(&(&p * a), &(b.adjoint() * &p));
    (right, left)
}

/// The adjoint with respect to the top-coefficient scalar product, by
/// solving against the pairing matrix. Right and left adjoints coincide.
pub fn adjoint(op: &GradedOperator, space: &FockSpace, tol: &Tolerances) -> Result<GradedOperator> {
    let p = space.pairing();
    let rhs = op.matrix.adjoint() * &p;
    let b = p.lu().solve(&rhs).ok_or(Error::NoAdjoint { residual: f64::INFINITY })?;
    let (right, left) = adjoint_residuals(space, &op.matrix, &b);
    let residual = right.max(left);
    if residual > tol.operator_for(space.dim()) * max_abs(&op.matrix).max(1.0) {
        return Err(Error::NoAdjoint { residual });
    }
    Ok(GradedOperator::new(b, op.parity, op.ghost_shift))
}

/// Sign in `(eta^A f P_B)^dagger = sign * P_B f^dagger eta^A`:
/// `(-1)^{|B|} (-1)^{[|A|/2] + [|B|/2]}`.
pub fn monomial_adjoint_sign(r: usize, s: usize) -> f64 {
    if (s + r / 2 + s / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The variant `(-1)^{|B|} (-1)^{[|A|/2] [|B|/2]}` with a product in the
/// exponent. Kept for comparison; it is wrong already for `eta^1 eta^2`.
pub fn product_exponent_adjoint_sign(r: usize, s: usize) -> f64 {
    if (s + (r / 2) * (s / 2)) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Adjoint of a quantized observable from the term-wise closed form.
pub fn closed_form_adjoint(f: &Observable, ops: &GeneratorOps) -> Result<GradedOperator> {
    if f.m() != ops.space.m() {
        return Err(Error::GhostCountMismatch { left: ops.space.m(), right: f.m() });
    }
    let n = ops.space.dim();
    let mut out = CMatrix::zeros(n, n);
    for ((a, b), poly) in f.terms() {
        let sign = monomial_adjoint_sign(a.len(), b.len());
        let ghost = ops.ghost_momentum_product(b) * ops.ghost_eta_product(a);
        let coeff = ops.v_adjoint(&ops.coefficient_matrix(poly));
        out += kron(&ghost, &coeff).scale(sign);
    }
    let (parity, shift) = term_grading(f);
    Ok(GradedOperator::new(out, parity, shift))
}

/// `(i/2) sum_a (eta_a P_a - P_a eta_a)`.
pub fn ghost_number_op(ops: &GeneratorOps) -> GradedOperator {
    let n = ops.space.dim();
    let mut acc = CMatrix::zeros(n, n);
    for a in 1..=ops.space.m() {
        let (e, p) = (ops.eta(a), ops.momentum(a));
        acc += &e * &p - &p * &e;
    }
    GradedOperator::new(acc * (I * 0.5), Some(0), Some(0))
}

/// `A B - (-1)^{e_A e_B} B A`.
pub fn graded_commutator(a: &GradedOperator, b: &GradedOperator) -> Result<GradedOperator> {
    let (pa, pb) = match (a.parity, b.parity) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::MixedParity),
    };
    let sign = if pa * pb == 1 { -1.0 } else { 1.0 };
    let m = &a.matrix * &b.matrix - (&b.matrix * &a.matrix).scale(sign);
    let shift = match (a.ghost_shift, b.ghost_shift) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    };
    Ok(GradedOperator::new(m, Some((pa + pb) % 2), shift))
}
