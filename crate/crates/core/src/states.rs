//! The ghost-extended state space `S = V (x) Lambda(eta^1..eta^m)` and its
//! degenerate top-coefficient scalar product.
//!
//! Basis vectors are `(I, k)` with `I` a multi-index and `k` a basis index of
//! `V`, ordered by `(|I|, lex I, k)`. All matrices in the crate use this order.

use std::collections::BTreeMap;
use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ghostalg::{complement, merge_sign, reversal_sign, MultiIndex, MAX_GHOSTS};
use crate::linalg::{max_abs_diff, min_hermitian_eigenvalue, CMatrix, CVector};

/// Binomial coefficient.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockSpace {
    m: usize,
    d: usize,
    inner: CMatrix,
    blocks: Vec<MultiIndex>,
    position: BTreeMap<MultiIndex, usize>,
}

impl FockSpace {
    /// Space with the standard inner product on `V = C^d`.
    pub fn new(m: usize, d: usize) -> Result<Self> {
        Self::with_inner(m, CMatrix::identity(d, d))
    }

    /// Space whose inner product on `V` is `<x|y> = x^dagger H y`.
    pub fn with_inner(m: usize, inner: CMatrix) -> Result<Self> {
        if m > MAX_GHOSTS {
            return Err(Error::Domain(format!("at most {MAX_GHOSTS} ghosts supported, got {m}")));
        }
        let d = inner.nrows();
        if d == 0 || inner.ncols() != d {
            return Err(Error::Config(format!("inner product must be a nonempty square matrix, got {}x{}", inner.nrows(), inner.ncols())));
        }
        let asym = max_abs_diff(&inner, &inner.adjoint());
        if asym > 1e-12 * inner.norm().max(1.0) {
            return Err(Error::Config(format!("inner product is not Hermitian (max asymmetry {asym:e})")));
        }
        let min_eig = min_hermitian_eigenvalue(&inner);
        if min_eig <= 1e-12 * inner.norm().max(1.0) {
            return Err(Error::Config(format!("inner product is not positive definite (smallest eigenvalue {min_eig:e})")));
        }
        let blocks = MultiIndex::all(m);
        let position = blocks.iter().enumerate().map(|(k, i)| (*i, k)).collect();
        Ok(FockSpace { m, d, inner, blocks, position })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn inner(&self) -> &CMatrix {
        &self.inner
    }

    /// `2^m d`.
    pub fn dim(&self) -> usize {
        self.blocks.len() * self.d
    }

    /// Ghost multi-indices in basis order.
    pub fn blocks(&self) -> &[MultiIndex] {
        &self.blocks
    }

    pub fn block_position(&self, i: &MultiIndex) -> usize {
        self.position[i]
    }

    pub fn index(&self, i: &MultiIndex, k: usize) -> usize {
        self.block_position(i) * self.d + k
    }

    /// Flat index range of the ghost-degree-`s` sector `S^s`.
    pub fn sector(&self, s: usize) -> Range<usize> {
        let start: usize = (0..s).map(|r| binomial(self.m, r)).sum::<usize>() * self.d;
        start..start + binomial(self.m, s) * self.d
    }

    pub fn sector_dim(&self, s: usize) -> usize {
        binomial(self.m, s) * self.d
    }

    /// Ghost degree of a flat index.
    pub fn degree_of(&self, idx: usize) -> usize {
        self.blocks[idx / self.d].len()
    }

    /// `v eta^I` as a state.
    pub fn basis_state(&self, i: MultiIndex, k: usize) -> ExtendedState {
        let mut v = CVector::zeros(self.d);
        v[k] = Complex64::new(1.0, 0.0);
        let mut psi = ExtendedState::zero(self.m, self.d);
        psi.set(i, v);
        psi
    }

    /// `sign(I) <x|y>_H` pairing matrix `P` with `(psi, phi) = psi^dagger P phi`.
    pub fn pairing(&self) -> CMatrix {
        let n = self.dim();
        let mut p = CMatrix::zeros(n, n);
        for i in &self.blocks {
            let ic = complement(i);
            let (_, merge) = merge_sign(i, &ic);
            let sign = (reversal_sign(i) * merge) as f64;
            let (r, c) = (self.block_position(i) * self.d, self.block_position(&ic) * self.d);
            p.view_mut((r, c), (self.d, self.d)).copy_from(&self.inner.scale(sign));
        }
        p
    }

    /// Gram matrix of the scalar product between `S^p` and `S^{m-p}`.
    pub fn pairing_gram(&self, p: usize) -> Result<CMatrix> {
        if p > self.m {
            return Err(Error::Domain(format!("degree {p} outside 0..={}", self.m)));
        }
        let rows = self.sector(p);
        let cols = self.sector(self.m - p);
        Ok(self.pairing().view((rows.start, cols.start), (rows.len(), cols.len())).into_owned())
    }

    pub fn scalar_product(&self, psi: &ExtendedState, phi: &ExtendedState) -> Result<Complex64> {
        self.check(psi)?;
        self.check(phi)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, x) in &psi.components {
            let ic = complement(i);
            if let Some(y) = phi.components.get(&ic) {
                let (_, merge) = merge_sign(i, &ic);
                let sign = (reversal_sign(i) * merge) as f64;
                acc += (x.adjoint() * &self.inner * y)[(0, 0)] * sign;
            }
        }
        Ok(acc)
    }

    /// Top coefficient `psi_{12..m}`.
    pub fn zeta(&self, psi: &ExtendedState) -> Result<CVector> {
        self.check(psi)?;
        let top = MultiIndex::full(self.m);
        if psi.components.keys().any(|i| *i != top) {
            return Err(Error::Domain("zeta requires a state supported on eta^1..eta^m".into()));
        }
        Ok(psi.components.get(&top).cloned().unwrap_or_else(|| CVector::zeros(self.d)))
    }

    pub fn zeta_inverse(&self, v: &CVector) -> Result<ExtendedState> {
        if v.len() != self.d {
            return Err(Error::Domain(format!("vector of length {} in a space with d = {}", v.len(), self.d)));
        }
        let mut psi = ExtendedState::zero(self.m, self.d);
        psi.set(MultiIndex::full(self.m), v.clone());
        Ok(psi)
    }

    pub fn to_flat(&self, psi: &ExtendedState) -> Result<CVector> {
        self.check(psi)?;
        let mut out = CVector::zeros(self.dim());
        for (i, v) in &psi.components {
            let start = self.block_position(i) * self.d;
            out.rows_mut(start, self.d).copy_from(v);
        }
        Ok(out)
    }

    pub fn from_flat(&self, v: &CVector) -> Result<ExtendedState> {
        if v.len() != self.dim() {
            return Err(Error::Domain(format!("flat vector of length {} in a space of dimension {}", v.len(), self.dim())));
        }
        let mut psi = ExtendedState::zero(self.m, self.d);
        for (pos, i) in self.blocks.iter().enumerate() {
            psi.set(*i, v.rows(pos * self.d, self.d).into_owned());
        }
        Ok(psi)
    }

    fn check(&self, psi: &ExtendedState) -> Result<()> {
        if psi.m != self.m || psi.d != self.d {
            return Err(Error::Domain(format!(
                "state over (m={}, d={}) used in space (m={}, d={})",
                psi.m, psi.d, self.m, self.d
            )));
        }
        Ok(())
    }
}

/// `psi = sum_I psi_I eta^I` with `psi_I` in `V`; absent components are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedState {
    m: usize,
    d: usize,
    components: BTreeMap<MultiIndex, CVector>,
}

impl ExtendedState {
    pub fn zero(m: usize, d: usize) -> Self {
        ExtendedState { m, d, components: BTreeMap::new() }
    }

    /// Sets a component; zero vectors are dropped.
    pub fn set(&mut self, i: MultiIndex, v: CVector) {
        assert_eq!(v.len(), self.d, "component length");
        if v.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            self.components.remove(&i);
        } else {
            self.components.insert(i, v);
        }
    }

    pub fn component(&self, i: &MultiIndex) -> Option<&CVector> {
        self.components.get(i)
    }

    pub fn components(&self) -> impl Iterator<Item = (&MultiIndex, &CVector)> {
        self.components.iter()
    }

    /// The single ghost degree if homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut degs = self.components.keys().map(MultiIndex::len);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }
}
