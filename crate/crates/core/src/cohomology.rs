//! Cochain complexes and their cohomology by numerical rank.
//!
//! Also: the duality check at the extreme ghost numbers, the simplicial
//! model of the sphere, and the graded tensor product with it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{column_space, max_abs, null_space, rank, CMatrix, Tolerances};
use crate::par::{map_range, Execution};
use crate::states::{binomial, FockSpace};

/// `C^0 -> C^1 -> ... -> C^n` with `differentials[k]: C^k -> C^{k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainComplex {
    pub dims: Vec<usize>,
    pub differentials: Vec<CMatrix>,
    pub labels: Vec<String>,
}

impl CochainComplex {
    pub fn new(dims: Vec<usize>, differentials: Vec<CMatrix>, labels: Vec<String>) -> Result<Self> {
        if dims.is_empty() || differentials.len() + 1 != dims.len() || labels.len() != dims.len() {
            return Err(Error::Domain(format!(
                "{} sectors, {} differentials, {} labels",
                dims.len(),
                differentials.len(),
                labels.len()
            )));
        }
        for (k, d) in differentials.iter().enumerate() {
            if d.shape() != (dims[k + 1], dims[k]) {
                return Err(Error::Domain(format!(
                    "differential {k} has shape {:?}, expected ({}, {})",
                    d.shape(),
                    dims[k + 1],
                    dims[k]
                )));
            }
        }
        Ok(CochainComplex { dims, differentials, labels })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Largest entry of `d_{k+1} d_k` over all `k`, with the worst degree.
    pub fn square_residual(&self) -> (f64, usize) {
        let mut worst = (0.0, 0);
        for k in 0..self.differentials.len().saturating_sub(1) {
            let r = max_abs(&(&self.differentials[k + 1] * &self.differentials[k]));
            if r > worst.0 {
                worst = (r, k);
            }
        }
        worst
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<f64> {
        let (residual, degree) = self.square_residual();
        let scale = self.differentials.iter().map(max_abs).fold(1.0, f64::max);
        let max_dim = self.dims.iter().copied().max().unwrap_or(1);
        if residual > tol.operator_for(max_dim) * scale * scale {
            return Err(Error::InvalidComplex { residual, degree });
        }
        Ok(residual)
    }

    /// Incoming differential into degree `k` (zero map for `k = 0`).
    fn incoming(&self, k: usize) -> CMatrix {
        if k == 0 {
            CMatrix::zeros(self.dims[0], 0)
        } else {
            self.differentials[k - 1].clone()
        }
    }

    /// Outgoing differential from degree `k` (zero map for the last degree).
    fn outgoing(&self, k: usize) -> CMatrix {
        if k + 1 == self.dims.len() {
            CMatrix::zeros(0, self.dims[k])
        } else {
            self.differentials[k].clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeReport {
    pub label: String,
    pub dim: usize,
    pub kernel: usize,
    /// Rank of the incoming differential.
    pub image: usize,
    pub cohomology: usize,
    /// Orthonormal harmonic representatives, one per column.
    pub representatives: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyReport {
    pub degrees: Vec<DegreeReport>,
    pub rank_tolerance: f64,
    pub square_residual: f64,
}

impl CohomologyReport {
    pub fn dims(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.cohomology).collect()
    }

    /// `sum_k (-1)^k dim H^k`.
    pub fn euler_characteristic(&self) -> i64 {
        self.degrees
            .iter()
            .enumerate()
            .map(|(k, d)| if k % 2 == 0 { d.cohomology as i64 } else { -(d.cohomology as i64) })
            .sum()
    }
}

/// Cohomology dimensions and harmonic representatives. Ranks of the
/// differentials are computed per degree, in parallel when enabled.
pub fn cohomology(complex: &CochainComplex, tol: &Tolerances, exec: Execution) -> Result<CohomologyReport> {
    let square_residual = complex.validate(tol)?;
    let n = complex.len();
    let ranks: Vec<usize> = map_range(exec, complex.differentials.len(), |k| rank(&complex.differentials[k], tol.rank));
    let reps: Vec<CMatrix> = map_range(exec, n, |k| {
        // harmonic space: ker d_k intersected with ker d_{k-1}^dagger
        let out = complex.outgoing(k);
        let inc = complex.incoming(k).adjoint();
        let mut stacked = CMatrix::zeros(out.nrows() + inc.nrows(), complex.dims[k]);
        stacked.view_mut((0, 0), out.shape()).copy_from(&out);
        stacked.view_mut((out.nrows(), 0), inc.shape()).copy_from(&inc);
        null_space(&stacked, tol.rank)
    });
    let mut degrees = Vec::with_capacity(n);
    for (k, representatives) in reps.into_iter().enumerate() {
        let out_rank = if k < ranks.len() { ranks[k] } else { 0 };
        let image = if k == 0 { 0 } else { ranks[k - 1] };
        let kernel = complex.dims[k] - out_rank;
        if image > kernel {
            return Err(Error::InvalidComplex { residual: square_residual, degree: k });
        }
        let cohomology = kernel - image;
        if representatives.ncols() != cohomology {
            return Err(Error::RankAmbiguity { degree: k, harmonic: representatives.ncols(), cohomology });
        }
        degrees.push(DegreeReport {
            label: complex.labels[k].clone(),
            dim: complex.dims[k],
            kernel,
            image,
            cohomology,
            representatives,
        });
    }
    Ok(CohomologyReport { degrees, rank_tolerance: tol.rank, square_residual })
}

/// `"-3/2"`, `"0"`, `"1"` for `numerator / 2`.
pub fn half_integer_label(numerator: i64) -> String {
    if numerator % 2 == 0 {
        format!("{}", numerator / 2)
    } else {
        format!("{numerator}/2")
    }
}

/// Dimension of the common kernel of a family of matrices.
pub fn joint_kernel_dim(mats: &[CMatrix], tol: f64) -> usize {
    let Some(first) = mats.first() else { return 0 };
    let d = first.ncols();
    let rows: usize = mats.iter().map(CMatrix::nrows).sum();
    let mut stacked = CMatrix::zeros(rows, d);
    let mut off = 0;
    for m in mats {
        stacked.view_mut((off, 0), m.shape()).copy_from(m);
        off += m.nrows();
    }
    d - rank(&stacked, tol)
}

/// Isomorphism check between `ker(Omega|S^0)` and `S^m / Omega(S^{m-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub kernel_dim: usize,
    pub quotient_dim: usize,
    /// `Lambda_ij = <k_i | u_j>` for kernel vectors `k_i` and a basis `u_j`
    /// of the orthogonal complement of `zeta(Omega(S^{m-1}))`.
    pub lambda: CMatrix,
    pub lambda_rank: usize,
    pub injective: bool,
    pub surjective: bool,
}

impl DualityReport {
    pub fn holds(&self) -> bool {
        self.kernel_dim == self.quotient_dim && self.injective && self.surjective
    }

    pub fn ensure(&self) -> Result<()> {
        if self.holds() {
            Ok(())
        } else {
            Err(Error::TheoremViolation(format!(
                "duality fails: kernel dimension {}, quotient dimension {}, rank of Lambda {}",
                self.kernel_dim, self.quotient_dim, self.lambda_rank
            )))
        }
    }
}

pub fn duality_check(omega: &CMatrix, space: &FockSpace, tol: &Tolerances) -> Result<DualityReport> {
    let m = space.m();
    if m == 0 {
        return Err(Error::Domain("duality needs at least one ghost".into()));
    }
    let h = space.inner();
    let block = |from: usize, to: usize| -> CMatrix {
        let (r, c) = (space.sector(to), space.sector(from));
        omega.view((r.start, c.start), (r.len(), c.len())).into_owned()
    };
    // S^0 -> S^1
    let kernel = null_space(&block(0, 1), tol.rank);
    // zeta(Omega(S^{m-1})) as a subspace of V
    let image = column_space(&block(m - 1, m), tol.rank);
    let complement = null_space(&(image.adjoint() * h), tol.rank);
    let lambda = kernel.adjoint() * h * &complement;
    let lambda_rank = rank(&lambda, tol.rank);
    Ok(DualityReport {
        kernel_dim: kernel.ncols(),
        quotient_dim: complement.ncols(),
        injective: lambda_rank == kernel.ncols(),
        surjective: lambda_rank == complement.ncols(),
        lambda,
        lambda_rank,
    })
}

/// `(k+1)`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    if size > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - size + i {
                cur[i] += 1;
                for j in i + 1..size {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Simplicial cochains of the boundary of the `(m+1)`-simplex, a model of
/// the `m`-sphere: sector `k` has dimension `C(m+2, k+1)` and
/// `(d phi)(tau) = sum_i (-1)^i phi(tau minus its i-th vertex)`.
pub fn sphere_complex(m: usize) -> Result<CochainComplex> {
    if m < 1 {
        return Err(Error::Domain("sphere model needs m >= 1".into()));
    }
    let n = m + 2;
    let simplices: Vec<Vec<Vec<usize>>> = (0..=m).map(|k| subsets(n, k + 1)).collect();
    let mut differentials = Vec::with_capacity(m);
    for k in 0..m {
        let (src, dst) = (&simplices[k], &simplices[k + 1]);
        let mut d = CMatrix::zeros(dst.len(), src.len());
        for (row, tau) in dst.iter().enumerate() {
            for i in 0..tau.len() {
                let face: Vec<usize> = tau.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                let col = src.binary_search(&face).expect("faces are simplices");
                d[(row, col)] += Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
            }
        }
        differentials.push(d);
    }
    let dims = simplices.iter().map(Vec::len).collect();
    let labels = (0..=m).map(|k| k.to_string()).collect();
    CochainComplex::new(dims, differentials, labels)
}

/// A sector `(p, q)` of the extended complex inside total degree `p + q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub p: usize,
    pub q: usize,
    pub offset: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedComplex {
    pub complex: CochainComplex,
    /// `blocks[k]` lists the sectors of total degree `k`, `p` ascending.
    pub blocks: Vec<Vec<Block>>,
}

impl ExtendedComplex {
    pub fn block(&self, p: usize, q: usize) -> Option<Block> {
        self.blocks.get(p + q)?.iter().copied().find(|b| b.p == p && b.q == q)
    }

    /// Total degree whose ghost number is zero.
    pub fn ghost_zero_degree(&self) -> usize {
        (self.complex.len() - 1) / 2
    }
}

/// Graded tensor product `Omega (x) 1 + (-1)^p 1 (x) d` on sectors `(p, q)`.
/// Total degree `k = p + q`; with `m` ghosts the ghost number is `k - m`.
pub fn extended_complex(brst: &CochainComplex, sphere: &CochainComplex) -> Result<ExtendedComplex> {
    let (np, nq) = (brst.len(), sphere.len());
    let top = np + nq - 2;
    let mut blocks: Vec<Vec<Block>> = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut off = 0;
        let mut row = Vec::new();
        for p in 0..np {
            if k < p || k - p >= nq {
                continue;
            }
            let q = k - p;
            let len = brst.dims[p] * sphere.dims[q];
            row.push(Block { p, q, offset: off, len });
            off += len;
        }
        blocks.push(row);
    }
    let dims: Vec<usize> = blocks.iter().map(|row| row.iter().map(|b| b.len).sum()).collect();
    let mut differentials = Vec::with_capacity(top);
    for k in 0..top {
        let mut d = CMatrix::zeros(dims[k + 1], dims[k]);
        for src in &blocks[k] {
            for dst in &blocks[k + 1] {
                let piece = if dst.p == src.p + 1 && dst.q == src.q {
                    let id = CMatrix::identity(sphere.dims[src.q], sphere.dims[src.q]);
                    brst.differentials[src.p].kronecker(&id)
                } else if dst.p == src.p && dst.q == src.q + 1 {
                    let id = CMatrix::identity(brst.dims[src.p], brst.dims[src.p]);
                    let sign = if src.p % 2 == 0 { 1.0 } else { -1.0 };
                    id.kronecker(&sphere.differentials[src.q]).scale(sign)
                } else {
                    continue;
                };
                d.view_mut((dst.offset, src.offset), (dst.len, src.len)).copy_from(&piece);
            }
        }
        differentials.push(d);
    }
    let m = np as i64 - 1;
    let labels = (0..=top).map(|k| (k as i64 - m).to_string()).collect();
    let complex = CochainComplex::new(dims, differentials, labels)?;
    Ok(ExtendedComplex { complex, blocks })
}

/// Dimension table `C(m, s) d` of the BRST complex.
pub fn brst_sector_dims(m: usize, d: usize) -> Vec<usize> {
    (0..=m).map(|s| binomial(m, s) * d).collect()
}
