//! The quantum BRST operator and its certificate.

use crate::cohomology::{half_integer_label, CochainComplex};
use crate::error::{Error, Result};
use crate::koszul::BrstCharge;
use crate::linalg::{max_abs, max_abs_diff, CMatrix, Tolerances};
use crate::quantize::{adjoint, quantize, GeneratorOps, GradedOperator};
use crate::states::FockSpace;

/// Measured properties of the quantum BRST operator.
#[derive(Clone, Debug, PartialEq)]
pub struct BrstCertificate {
    /// `max |Omega^2|`.
    pub square_norm: f64,
    /// Ghost degree `s` of the block `S^s -> S^{s+2}` where `Omega^2` is largest.
    pub worst_sector: usize,
    /// `max |Omega - Omega^dagger|`.
    pub self_adjoint_residual: f64,
    /// Largest entry outside the `S^s -> S^{s+1}` blocks.
    pub off_block_norm: f64,
    /// Threshold for both the square and the self-adjointness residual.
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumBrst {
    pub operator: GradedOperator,
    pub certificate: BrstCertificate,
}

/// `Omega = sum_p quantize(Omega^(p))` without any checks.
pub fn assemble(charge: &BrstCharge, ops: &GeneratorOps) -> Result<GradedOperator> {
    let n = ops.space().dim();
    let mut matrix = CMatrix::zeros(n, n);
    for piece in &charge.pieces {
        matrix += quantize(piece, ops)?.matrix;
    }
    Ok(GradedOperator::new(matrix, Some(1), Some(1)))
}

/// Measures nilpotency, self-adjointness and grading of a candidate operator.
pub fn certify(operator: &GradedOperator, space: &FockSpace, tol: &Tolerances) -> Result<BrstCertificate> {
    let square = &operator.matrix * &operator.matrix;
    let mut worst = (0.0, 0);
    for s in 0..space.m().saturating_sub(1) {
        let (r, c) = (space.sector(s + 2), space.sector(s));
        let v = max_abs(&square.view((r.start, c.start), (r.len(), c.len())).into_owned());
        if v > worst.0 {
            worst = (v, s);
        }
    }
    let scale = max_abs(&operator.matrix).max(1.0);
    let adj = adjoint(operator, space, tol)?;
    Ok(BrstCertificate {
        square_norm: max_abs(&square),
        worst_sector: worst.1,
        self_adjoint_residual: max_abs_diff(&adj.matrix, &operator.matrix),
        off_block_norm: operator.off_shift_norm(space, 1),
        tolerance: tol.operator_for(space.dim()) * scale * scale,
    })
}

impl BrstCertificate {
    pub fn nilpotent(&self) -> bool {
        self.square_norm <= self.tolerance
    }

    pub fn self_adjoint(&self) -> bool {
        self.self_adjoint_residual <= self.tolerance
    }
}

/// Assembles and certifies the quantum BRST operator; a nonzero square is an error.
pub fn quantum_brst(charge: &BrstCharge, ops: &GeneratorOps, tol: &Tolerances) -> Result<QuantumBrst> {
    let operator = assemble(charge, ops)?;
    let certificate = certify(&operator, ops.space(), tol)?;
    if !certificate.nilpotent() {
        return Err(Error::Nilpotency { residual: certificate.square_norm, sector: certificate.worst_sector });
    }
    Ok(QuantumBrst { operator, certificate })
}

/// The complex `S^0 -> S^1 -> ... -> S^m` of a degree-one operator, labelled
/// by ghost number `-m/2 + s`.
pub fn brst_complex(omega: &CMatrix, space: &FockSpace) -> Result<CochainComplex> {
    let m = space.m();
    if omega.shape() != (space.dim(), space.dim()) {
        return Err(Error::Domain(format!("operator of shape {:?} on a space of dimension {}", omega.shape(), space.dim())));
    }
    let dims: Vec<usize> = (0..=m).map(|s| space.sector_dim(s)).collect();
    let differentials = (0..m)
        .map(|s| {
            let (r, c) = (space.sector(s + 1), space.sector(s));
            omega.view((r.start, c.start), (r.len(), c.len())).into_owned()
        })
        .collect();
    let labels = (0..=m).map(|s| half_integer_label(2 * s as i64 - m as i64)).collect();
    CochainComplex::new(dims, differentials, labels)
}
