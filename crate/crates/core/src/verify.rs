//! Batch residual checks over many observables, run through [`Execution`].
//!
//! Each check returns the per-item residuals in input order together with
//! the worst one, so parallel and sequential runs report identical numbers.
//! Operator residuals are Frobenius norms of the difference.

use crate::error::Result;
use crate::koszul::{contracting_homotopy, koszul_tate};
use crate::linalg::{max_abs, max_abs_diff, CMatrix, Tolerances, I};
use crate::observables::{Observable, ObservableAlgebra};
use crate::par::{map_range, map_slice, Execution};
use crate::quantize::{adjoint, closed_form_adjoint, graded_commutator, quantize, GeneratorOps};

fn frobenius_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    pub values: Vec<f64>,
    pub max: f64,
    /// Index of the largest residual.
    pub worst: usize,
}

impl Residuals {
    pub fn from_values(values: Vec<f64>) -> Self {
        let (worst, max) = values.iter().copied().enumerate().fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        Residuals { values, max, worst }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn below(&self, tol: f64) -> bool {
        self.max < tol
    }
}

fn collect(results: Vec<Result<f64>>) -> Result<Residuals> {
    Ok(Residuals::from_values(results.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Largest deviation from the canonical relations
/// `[P_a, eta^b]_+ = -i delta`, `[eta^a, eta^b]_+ = 0`, `[P_a, P_b]_+ = 0`.
pub fn canonical_residual(ops: &GeneratorOps) -> f64 {
    let m = ops.space().m();
    let n = ops.space().dim();
    let id = CMatrix::identity(n, n);
    let anti = |x: &CMatrix, y: &CMatrix| x * y + y * x;
    let mut worst: f64 = 0.0;
    for a in 1..=m {
        for b in 1..=m {
            let (pa, eb) = (ops.momentum(a), ops.eta(b));
            let target = if a == b { &id * (-I) } else { CMatrix::zeros(n, n) };
            worst = worst
                .max(max_abs_diff(&anti(&pa, &eb), &target))
                .max(max_abs(&anti(&ops.eta(a), &eb)))
                .max(max_abs(&anti(&pa, &ops.momentum(b))));
        }
    }
    worst
}

/// `||quantize(FG) - quantize(F) quantize(G)||` per pair.
pub fn product_residuals(
    alg: &ObservableAlgebra,
    ops: &GeneratorOps,
    pairs: &[(Observable, Observable)],
    exec: Execution,
) -> Result<Residuals> {
    collect(map_slice(exec, pairs, |(f, g)| {
        let lhs = quantize(&alg.multiply(f, g)?, ops)?.matrix;
        let rhs = quantize(f, ops)?.matrix * quantize(g, ops)?.matrix;
        Ok(frobenius_diff(&lhs, &rhs))
    }))
}

/// `||quantize([F, G]) - i [quantize F, quantize G]||` per pair.
pub fn bracket_residuals(
    alg: &ObservableAlgebra,
    ops: &GeneratorOps,
    pairs: &[(Observable, Observable)],
    exec: Execution,
) -> Result<Residuals> {
    collect(map_slice(exec, pairs, |(f, g)| {
        let lhs = quantize(&alg.poisson(f, g)?, ops)?.matrix;
        let comm = graded_commutator(&quantize(f, ops)?, &quantize(g, ops)?)?;
        Ok(frobenius_diff(&lhs, &(comm.matrix * I)))
    }))
}

/// Pairing-solved adjoint against the closed form, per observable.
pub fn adjoint_residuals(ops: &GeneratorOps, fs: &[Observable], tol: &Tolerances, exec: Execution) -> Result<Residuals> {
    collect(map_slice(exec, fs, |f| {
        let solved = adjoint(&quantize(f, ops)?, ops.space(), tol)?;
        let closed = closed_form_adjoint(f, ops)?;
        Ok(frobenius_diff(&solved.matrix, &closed.matrix))
    }))
}

/// Koszul-Tate checks per observable: `|delta^2 f|` and
/// `|(delta s + s delta) f - f|`.
#[derive(Clone, Debug, PartialEq)]
pub struct KoszulResiduals {
    pub square: Residuals,
    pub homotopy: Residuals,
}

pub fn koszul_residuals(fs: &[Observable], exec: Execution) -> Result<KoszulResiduals> {
    let pairs: Vec<Result<(f64, f64)>> = map_range(exec, fs.len(), |i| {
        let f = &fs[i];
        let square = koszul_tate(&koszul_tate(f)).max_abs();
        let back = koszul_tate(&contracting_homotopy(f)?) + contracting_homotopy(&koszul_tate(f))?;
        Ok((square, (back - f.clone()).max_abs()))
    });
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(KoszulResiduals {
        square: Residuals::from_values(pairs.iter().map(|p| p.0).collect()),
        homotopy: Residuals::from_values(pairs.iter().map(|p| p.1).collect()),
    })
}
