//! Random observables for property checks.
//!
//! Coefficients are small Gaussian integers so products and brackets stay
//! exactly representable and comparisons can be exact.

use num_complex::Complex64;
use rand::Rng;

use crate::ghostalg::MultiIndex;
use crate::observables::{Monomial, Observable};

#[derive(Clone, Copy, Debug)]
pub struct SampleShape {
    /// Number of monomials drawn (duplicates merge).
    pub terms: usize,
    /// Maximum total degree in the constraint symbols.
    pub max_coeff_degree: u32,
    /// Bound on the real and imaginary parts of each coefficient.
    pub coeff_bound: i32,
}

impl Default for SampleShape {
    fn default() -> Self {
        SampleShape { terms: 3, max_coeff_degree: 2, coeff_bound: 3 }
    }
}

pub fn gaussian_integer<R: Rng + ?Sized>(rng: &mut R, bound: i32) -> Complex64 {
    loop {
        let re = rng.gen_range(-bound..=bound);
        let im = rng.gen_range(-bound..=bound);
        if re != 0 || im != 0 {
            return Complex64::new(re as f64, im as f64);
        }
    }
}

pub fn random_multi_index<R: Rng + ?Sized>(rng: &mut R, m: usize, len: usize) -> MultiIndex {
    let all = MultiIndex::all_of_len(m, len);
    all[rng.gen_range(0..all.len())]
}

pub fn random_monomial<R: Rng + ?Sized>(rng: &mut R, m: usize, max_degree: u32) -> Monomial {
    let degree = rng.gen_range(0..=max_degree);
    let mut exps = vec![0u32; m];
    for _ in 0..degree {
        exps[rng.gen_range(0..m)] += 1;
    }
    Monomial::from_exponents(exps)
}

/// Random observable of fixed degree `(r, s)`.
pub fn random_homogeneous<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    r: usize,
    s: usize,
    shape: SampleShape,
) -> Observable {
    let mut out = Observable::zero(m);
    for _ in 0..shape.terms {
        let a = random_multi_index(rng, m, r);
        let b = random_multi_index(rng, m, s);
        let mono = random_monomial(rng, m, shape.max_coeff_degree);
        out.add_monomial(a, b, mono, gaussian_integer(rng, shape.coeff_bound));
    }
    out
}

/// Random observable of uniform parity with mixed degrees.
pub fn random_of_parity<R: Rng + ?Sized>(rng: &mut R, m: usize, parity: u8, shape: SampleShape) -> Observable {
    let mut out = Observable::zero(m);
    for _ in 0..shape.terms {
        let (r, s) = loop {
            let r = rng.gen_range(0..=m);
            let s = rng.gen_range(0..=m);
            if (r + s) % 2 == parity as usize {
                break (r, s);
            }
        };
        out += random_homogeneous(rng, m, r, s, SampleShape { terms: 1, ..shape });
    }
    out
}

/// Random ghost-free observable (a coefficient polynomial).
pub fn random_coefficient<R: Rng + ?Sized>(rng: &mut R, m: usize, shape: SampleShape) -> Observable {
    random_homogeneous(rng, m, 0, 0, shape)
}

/// Random observable without constraint symbols.
pub fn random_ghost_only<R: Rng + ?Sized>(rng: &mut R, m: usize, parity: u8, shape: SampleShape) -> Observable {
    random_of_parity(rng, m, parity, SampleShape { max_coeff_degree: 0, ..shape })
}

/// Random homogeneous observable whose terms have total degree
/// `|A| + |B| + deg(coefficient) <= max_total`.
pub fn random_bounded<R: Rng + ?Sized>(rng: &mut R, m: usize, max_total: usize, shape: SampleShape) -> Observable {
    let (r, s) = loop {
        let r = rng.gen_range(0..=m);
        let s = rng.gen_range(0..=m);
        if r + s <= max_total {
            break (r, s);
        }
    };
    let room = (max_total - r - s) as u32;
    random_homogeneous(rng, m, r, s, SampleShape { max_coeff_degree: shape.max_coeff_degree.min(room), ..shape })
}

/// Random single monomial `eta^A G^alpha P_B` with `|alpha| + |B| > 0`.
pub fn random_resolvable_monomial<R: Rng + ?Sized>(rng: &mut R, m: usize, max_coeff_degree: u32) -> Observable {
    let shape = SampleShape { terms: 1, max_coeff_degree, coeff_bound: 3 };
    loop {
        let r = rng.gen_range(0..=m);
        let s = rng.gen_range(0..=m);
        let f = random_homogeneous(rng, m, r, s, shape);
        let resolvable = f.monomials().next().is_some_and(|(_, mono, b, _)| mono.degree() as usize + b.len() > 0);
        if resolvable {
            return f;
        }
    }
}
