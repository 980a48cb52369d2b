//! Koszul-Tate differential, its contracting homotopy, and the perturbative
//! construction of the classical BRST charge.
//!
//! Convention: `delta(P_a) = G_a`, `delta(eta^a) = delta(G_a) = 0`, extended as
//! an odd left derivation. With `[P_a, eta^b] = delta_a^b` this is the sign
//! that makes `delta = [., eta^a G_a]` restricted to the ghost bracket, so the
//! order-zero nilpotency condition closes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ghostalg::{merge_sign, MultiIndex};
use crate::observables::{BracketParts, Monomial, Observable, ObservableAlgebra};

fn parity_sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The Koszul-Tate differential.
pub fn koszul_tate(f: &Observable) -> Observable {
    let m = f.m();
    let mut out = Observable::zero(m);
    for (a, mono, b, z) in f.monomials() {
        // delta(P_{b_1}..P_{b_s}) = sum_k (-1)^{k-1} G_{b_k} P_{B \ b_k}
        for (k, bk) in b.indices().enumerate() {
            let sign = parity_sign(a.len() + k);
            let raised = mono.mul(&Monomial::symbol(bk, m));
            out.add_monomial(a, b.without(bk), raised, z * sign);
        }
    }
    out
}

/// Contracting homotopy: on `eta^A G^alpha P_B` with `N = |alpha| + |B| > 0`,
/// `s = (-1)^{|A|} / N * sum_a alpha_a eta^A G^{alpha - e_a} P_a P_B`.
///
/// `delta s + s delta` is the identity on every monomial with `N > 0`.
pub fn contracting_homotopy(f: &Observable) -> Result<Observable> {
    let m = f.m();
    let mut out = Observable::zero(m);
    for (a, mono, b, z) in f.monomials() {
        let n = mono.degree() as usize + b.len();
        if n == 0 {
            return Err(Error::NotInImage);
        }
        let scale = z * (parity_sign(a.len()) / n as f64);
        for (idx, &e) in mono.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let sym = idx + 1;
            let (pb, s) = merge_sign(&MultiIndex::singleton(sym, m)?, &b);
            if s == 0 {
                continue;
            }
            let mut exps = mono.exponents().to_vec();
            exps[idx] -= 1;
            out.add_monomial(a, pb, Monomial::from_exponents(exps), scale * (e as f64 * s as f64));
        }
    }
    Ok(out)
}

/// The classical BRST charge as a sum of pieces of increasing antighost number.
#[derive(Clone, Debug, PartialEq)]
pub struct BrstCharge {
    /// `pieces[p]` has `p` factors of `P` and `p + 1` factors of `eta` per term.
    pub pieces: Vec<Observable>,
    pub total: Observable,
}

impl BrstCharge {
    pub fn rank(&self) -> usize {
        self.pieces.len() - 1
    }

    /// Every term of piece `p` has degree `(p + 1, p)`.
    pub fn has_antighost_pattern(&self) -> bool {
        self.pieces
            .iter()
            .enumerate()
            .all(|(p, piece)| piece.terms().all(|((a, b), _)| a.len() == p + 1 && b.len() == p))
    }
}

/// `D^(p) = 1/2 { sum_{k=0..p} [O^(p-k), O^(k)]_C + sum_{k=1..p} [O^(p+1-k), O^(k)]_gh }`.
pub fn obstruction(alg: &ObservableAlgebra, pieces: &[Observable], p: usize) -> Result<Observable> {
    let m = alg.m();
    let mut acc = Observable::zero(m);
    for k in 0..=p {
        acc += alg.poisson_parts(&pieces[p - k], &pieces[k], BracketParts::COEFFICIENT)?;
    }
    for k in 1..=p {
        acc += alg.poisson_parts(&pieces[p + 1 - k], &pieces[k], BracketParts::GHOST)?;
    }
    Ok(acc.scale(Complex64::new(0.5, 0.0)))
}

/// `eta^a G_a`.
pub fn leading_piece(m: usize) -> Result<Observable> {
    let mut out = Observable::zero(m);
    for a in 1..=m {
        out.add_monomial(MultiIndex::singleton(a, m)?, MultiIndex::empty(m), Monomial::symbol(a, m), Complex64::new(1.0, 0.0));
    }
    Ok(out)
}

/// Builds `Omega = sum_p Omega^(p)` by homological perturbation, solving
/// `delta Omega^(p+1) = -D^(p)` until the obstruction vanishes.
pub fn build_brst(alg: &ObservableAlgebra, max_rank: usize) -> Result<BrstCharge> {
    if max_rank < 1 {
        return Err(Error::Domain("max_rank must be at least 1".into()));
    }
    let violations = alg.constants().violations(1e-12);
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Config(msgs.join("; ")));
    }
    let m = alg.m();
    let mut pieces = vec![leading_piece(m)?];
    let mut p = 0;
    loop {
        let d = obstruction(alg, &pieces, p)?;
        if d.is_zero() {
            break;
        }
        if p == max_rank {
            return Err(Error::RankOverflow { max_rank, terms: d.num_monomials() });
        }
        let target = -d;
        let raw = contracting_homotopy(&target)?;
        let next = (raw.clone() + alg.conjugate(&raw)?).scale(Complex64::new(0.5, 0.0));
        if koszul_tate(&next) != target {
            return Err(Error::Construction(format!(
                "order {} obstruction is not delta-exact after realification",
                p + 1
            )));
        }
        // Realification can add terms of lower antighost number (for
        // non-unimodular constants, a multiple of C_ab^b eta^a); each goes to
        // the piece of matching degree.
        pieces.push(Observable::zero(m));
        for ((r, s), part) in next.split_homogeneous() {
            if r != s + 1 || s > p + 1 {
                return Err(Error::Construction(format!(
                    "order {} correction has unexpected degree ({r},{s})",
                    p + 1
                )));
            }
            pieces[s] += part;
        }
        p += 1;
    }
    let mut total = Observable::zero(m);
    for piece in &pieces {
        total += piece.clone();
    }
    let square = alg.poisson(&total, &total)?;
    if !square.is_zero() {
        return Err(Error::Construction(format!(
            "[Omega, Omega] does not vanish: {} terms, max coefficient {:e}",
            square.num_monomials(),
            square.max_abs()
        )));
    }
    Ok(BrstCharge { pieces, total })
}
