//! The observable algebra: finite sums of normal-ordered terms
//! `eta^A f(G) P_B`, with `f` a complex polynomial in the commuting
//! constraint symbols `G_1..G_m`.
//!
//! Products are brought back to normal order with the contraction rule
//! `P_a eta^b + eta^b P_a = kappa * delta_a^b`, where `kappa` is fixed by the
//! [`GhostConvention`]. Coefficients are central.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ghostalg::{merge_sign, reversal_sign, MultiIndex};

// ---------------------------------------------------------------------------
// coefficient polynomials

/// Exponent vector of a monomial `G_1^{e_1} ... G_m^{e_m}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(m: usize) -> Self {
        Monomial(vec![0; m])
    }

    pub fn symbol(a: usize, m: usize) -> Self {
        let mut e = vec![0; m];
        e[a - 1] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Symbols with multiplicity, ascending: `G_1^2 G_3 -> [1, 1, 3]`.
    pub fn factors(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(k, &e)| std::iter::repeat(k + 1).take(e as usize))
            .collect()
    }

    fn from_factors(factors: &[usize], m: usize) -> Monomial {
        let mut e = vec![0; m];
        for &a in factors {
            e[a - 1] += 1;
        }
        Monomial(e)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "G{}", k + 1)?;
            } else {
                write!(f, "G{}^{}", k + 1, e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Complex polynomial in the constraint symbols; zero terms are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct CoefficientPoly {
    m: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl CoefficientPoly {
    pub fn zero(m: usize) -> Self {
        CoefficientPoly { m, terms: BTreeMap::new() }
    }

    pub fn constant(z: Complex64, m: usize) -> Self {
        let mut p = Self::zero(m);
        p.add_term(Monomial::one(m), z);
        p
    }

    pub fn symbol(a: usize, m: usize) -> Self {
        let mut p = Self::zero(m);
        p.add_term(Monomial::symbol(a, m), Complex64::new(1.0, 0.0));
        p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: Monomial, z: Complex64) {
        if z == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(z);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += z;
                if *o.get() == Complex64::new(0.0, 0.0) {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = Self::zero(self.m);
        for (mono, c) in &self.terms {
            out.add_term(mono.clone(), c * z);
        }
        out
    }

    pub fn mul(&self, other: &CoefficientPoly) -> Self {
        let mut out = Self::zero(self.m);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn add(&self, other: &CoefficientPoly) -> Self {
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), *c);
        }
        out
    }

    /// Complex conjugate; the symbols `G_a` are real.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.m);
        for (mono, c) in &self.terms {
            out.add_term(mono.clone(), c.conj());
        }
        out
    }

    pub fn real_part(&self) -> Self {
        let mut out = Self::zero(self.m);
        for (mono, c) in &self.terms {
            out.add_term(mono.clone(), Complex64::new(c.re, 0.0));
        }
        out
    }

    pub fn imag_part(&self) -> Self {
        let mut out = Self::zero(self.m);
        for (mono, c) in &self.terms {
            out.add_term(mono.clone(), Complex64::new(c.im, 0.0));
        }
        out
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

impl fmt::Display for CoefficientPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(mono, z)| {
                let zs = fmt_complex(*z);
                if mono.degree() == 0 {
                    zs
                } else if *z == Complex64::new(1.0, 0.0) {
                    mono.to_string()
                } else {
                    format!("{zs} {mono}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else {
        format!("({}{:+}i)", z.re, z.im)
    }
}

// ---------------------------------------------------------------------------
// structure constants

/// Constant structure constants `C_ab^c` of the first-class closure
/// `[G_a, G_b] = C_ab^c G_c`, stored densely and indexed from 1.
#[derive(Clone, PartialEq, Debug)]
pub struct StructureConstants {
    m: usize,
    data: Vec<f64>,
}

/// A violated invariant of the structure constants.
#[derive(Clone, PartialEq, Debug)]
pub enum ConstantsViolation {
    Antisymmetry { a: usize, b: usize, c: usize, value_ab: f64, value_ba: f64 },
    Jacobi { a: usize, b: usize, c: usize, e: usize, residual: f64 },
}

impl fmt::Display for ConstantsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantsViolation::Antisymmetry { a, b, c, value_ab, value_ba } => write!(
                f,
                "antisymmetry violated at ({a},{b},{c}): C_{a}{b}^{c} = {value_ab}, C_{b}{a}^{c} = {value_ba}"
            ),
            ConstantsViolation::Jacobi { a, b, c, e, residual } => {
                write!(f, "Jacobi identity violated at ({a},{b},{c};{e}): residual {residual:e}")
            }
        }
    }
}

impl StructureConstants {
    pub fn abelian(m: usize) -> Self {
        StructureConstants { m, data: vec![0.0; m * m * m] }
    }

    /// `C_ab^c = epsilon_abc`.
    pub fn su2() -> Self {
        let mut s = Self::abelian(3);
        for (a, b, c) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            s.set(a, b, c, 1.0);
            s.set(b, a, c, -1.0);
        }
        s
    }

    /// Unvalidated construction from `(a, b, c, value)` entries.
    pub fn from_entries(m: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut s = Self::abelian(m);
        for &(a, b, c, v) in entries {
            for idx in [a, b, c] {
                if idx < 1 || idx > m {
                    return Err(Error::Config(format!(
                        "structure constant index ({a},{b},{c}) outside 1..={m}"
                    )));
                }
            }
            s.set(a, b, c, s.get(a, b, c) + v);
        }
        Ok(s)
    }

    /// Validated construction; every violation is reported.
    pub fn new_checked(m: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let s = Self::from_entries(m, entries)?;
        let violations = s.violations(1e-12);
        if violations.is_empty() {
            Ok(s)
        } else {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(Error::Config(msgs.join("; ")))
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        ((a - 1) * self.m + (b - 1)) * self.m + (c - 1)
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.idx(a, b, c)]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let k = self.idx(a, b, c);
        self.data[k] = v;
    }

    pub fn is_abelian(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Nonzero entries in lexicographic `(a, b, c)` order.
    pub fn entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let m = self.m;
        let mut out = Vec::new();
        for a in 1..=m {
            for b in 1..=m {
                for c in 1..=m {
                    let v = self.get(a, b, c);
                    if v != 0.0 {
                        out.push((a, b, c, v));
                    }
                }
            }
        }
        out
    }

    /// `[G_a, G_b] = sum_c C_ab^c G_c` as a coefficient polynomial.
    pub fn bracket(&self, a: usize, b: usize) -> CoefficientPoly {
        let mut p = CoefficientPoly::zero(self.m);
        for c in 1..=self.m {
            let v = self.get(a, b, c);
            if v != 0.0 {
                p.add_term(Monomial::symbol(c, self.m), Complex64::new(v, 0.0));
            }
        }
        p
    }

    pub fn violations(&self, tol: f64) -> Vec<ConstantsViolation> {
        let m = self.m;
        let mut out = Vec::new();
        for a in 1..=m {
            for b in a..=m {
                for c in 1..=m {
                    let (x, y) = (self.get(a, b, c), self.get(b, a, c));
                    if (x + y).abs() > tol {
                        out.push(ConstantsViolation::Antisymmetry { a, b, c, value_ab: x, value_ba: y });
                    }
                }
            }
        }
        // [[G_a,G_b],G_c] + cyclic = 0
        for a in 1..=m {
            for b in (a + 1)..=m {
                for c in (b + 1)..=m {
                    for e in 1..=m {
                        let mut r = 0.0;
                        for d in 1..=m {
                            r += self.get(a, b, d) * self.get(d, c, e)
                                + self.get(b, c, d) * self.get(d, a, e)
                                + self.get(c, a, d) * self.get(d, b, e);
                        }
                        if r.abs() > tol {
                            out.push(ConstantsViolation::Jacobi { a, b, c, e, residual: r.abs() });
                        }
                    }
                }
            }
        }
        out
    }

    /// Trace `sum_c C_ac^c`; zero for every `a` iff the algebra is unimodular.
    pub fn trace(&self, a: usize) -> f64 {
        (1..=self.m).map(|c| self.get(a, c, c)).sum()
    }
}

// ---------------------------------------------------------------------------
// conventions

/// Value of the contraction `P_a eta^a + eta^a P_a`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum GhostConvention {
    /// `-i`: matches the anticommutator of the quantized generators, so
    /// quantization is an algebra homomorphism and conjugation is consistent.
    #[default]
    Quantum,
    /// `-1`: the purely classical relation. Kept for comparison; with it the
    /// quantization map is not multiplicative.
    Classical,
}

impl GhostConvention {
    pub fn contraction(self) -> Complex64 {
        match self {
            GhostConvention::Quantum => Complex64::new(0.0, -1.0),
            GhostConvention::Classical => Complex64::new(-1.0, 0.0),
        }
    }
}

/// Which generator brackets are switched on in [`ObservableAlgebra::poisson_parts`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BracketParts {
    pub ghost: bool,
    pub coefficient: bool,
}

impl BracketParts {
    pub const FULL: BracketParts = BracketParts { ghost: true, coefficient: true };
    /// Brackets among the `P`'s and `eta`'s only.
    pub const GHOST: BracketParts = BracketParts { ghost: true, coefficient: false };
    /// Brackets among the constraint symbols only.
    pub const COEFFICIENT: BracketParts = BracketParts { ghost: false, coefficient: true };
}

// ---------------------------------------------------------------------------
// observables

/// A normal-ordered observable `sum eta^A f_A^B P_B`.
#[derive(Clone, PartialEq, Debug)]
pub struct Observable {
    m: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), CoefficientPoly>,
}

impl Observable {
    pub fn zero(m: usize) -> Self {
        Observable { m, terms: BTreeMap::new() }
    }

    pub fn scalar(z: Complex64, m: usize) -> Self {
        Self::term(MultiIndex::empty(m), CoefficientPoly::constant(z, m), MultiIndex::empty(m))
    }

    pub fn one(m: usize) -> Self {
        Self::scalar(Complex64::new(1.0, 0.0), m)
    }

    pub fn eta(a: usize, m: usize) -> Result<Self> {
        Ok(Self::term(MultiIndex::singleton(a, m)?, CoefficientPoly::constant(Complex64::new(1.0, 0.0), m), MultiIndex::empty(m)))
    }

    pub fn ghost_momentum(b: usize, m: usize) -> Result<Self> {
        Ok(Self::term(MultiIndex::empty(m), CoefficientPoly::constant(Complex64::new(1.0, 0.0), m), MultiIndex::singleton(b, m)?))
    }

    /// The constraint symbol `G_a` as an observable.
    pub fn constraint(a: usize, m: usize) -> Result<Self> {
        if a < 1 || a > m {
            return Err(Error::Domain(format!("constraint index {a} outside 1..={m}")));
        }
        Ok(Self::term(MultiIndex::empty(m), CoefficientPoly::symbol(a, m), MultiIndex::empty(m)))
    }

    pub fn coefficient(poly: CoefficientPoly) -> Self {
        let m = poly.m();
        Self::term(MultiIndex::empty(m), poly, MultiIndex::empty(m))
    }

    pub fn term(a: MultiIndex, f: CoefficientPoly, b: MultiIndex) -> Self {
        let m = f.m();
        let mut out = Observable::zero(m);
        out.add_poly(a, b, &f);
        out
    }

    /// `z * eta^A G^mono P_B`.
    pub fn monomial(a: MultiIndex, mono: Monomial, b: MultiIndex, z: Complex64) -> Self {
        let m = a.m();
        let mut out = Observable::zero(m);
        out.add_monomial(a, b, mono, z);
        out
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms keyed by `(A, B)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &CoefficientPoly)> {
        self.terms.iter()
    }

    /// Flattened `(A, monomial, B, coefficient)` terms in canonical order.
    pub fn monomials(&self) -> impl Iterator<Item = (MultiIndex, &Monomial, MultiIndex, Complex64)> + '_ {
        self.terms
            .iter()
            .flat_map(|((a, b), p)| p.terms().map(move |(mono, z)| (*a, mono, *b, *z)))
    }

    pub fn num_monomials(&self) -> usize {
        self.terms.values().map(CoefficientPoly::len).sum()
    }

    pub fn add_monomial(&mut self, a: MultiIndex, b: MultiIndex, mono: Monomial, z: Complex64) {
        debug_assert_eq!(a.m(), self.m);
        let poly = self.terms.entry((a, b)).or_insert_with(|| CoefficientPoly::zero(self.m));
        poly.add_term(mono, z);
        if poly.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn add_poly(&mut self, a: MultiIndex, b: MultiIndex, f: &CoefficientPoly) {
        for (mono, z) in f.terms() {
            self.add_monomial(a, b, mono.clone(), *z);
        }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = Observable::zero(self.m);
        for (a, mono, b, c) in self.monomials() {
            out.add_monomial(a, b, mono.clone(), c * z);
        }
        out
    }

    /// Multiply every term by a central coefficient polynomial.
    pub fn scale_poly(&self, f: &CoefficientPoly) -> Self {
        let mut out = Observable::zero(self.m);
        for ((a, b), p) in &self.terms {
            out.add_poly(*a, *b, &p.mul(f));
        }
        out
    }

    /// Drop monomials with `|coefficient| <= tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = Observable::zero(self.m);
        for (a, mono, b, z) in self.monomials() {
            if z.norm() > tol {
                out.add_monomial(a, b, mono.clone(), z);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, p| acc.max(p.max_abs()))
    }

    pub fn approx_eq(&self, other: &Observable, tol: f64) -> bool {
        (self.clone() - other.clone()).max_abs() <= tol
    }

    /// `(|A| + |B|) mod 2`, if all terms agree.
    pub fn parity(&self) -> Result<u8> {
        let mut parities = self.terms.keys().map(|(a, b)| ((a.len() + b.len()) % 2) as u8);
        match parities.next() {
            None => Ok(0),
            Some(p) if parities.all(|q| q == p) => Ok(p),
            Some(_) => Err(Error::MixedParity),
        }
    }

    /// Pieces of fixed degree `(|A|, |B|)`, ordered by degree.
    pub fn split_homogeneous(&self) -> Vec<((usize, usize), Observable)> {
        let mut pieces: BTreeMap<(usize, usize), Observable> = BTreeMap::new();
        for ((a, b), p) in &self.terms {
            pieces
                .entry((a.len(), b.len()))
                .or_insert_with(|| Observable::zero(self.m))
                .add_poly(*a, *b, p);
        }
        pieces.into_iter().collect()
    }

    /// The unique degree `(r, s)` if homogeneous.
    pub fn degree(&self) -> Option<(usize, usize)> {
        let mut degs = self.terms.keys().map(|(a, b)| (a.len(), b.len()));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    fn check_m(&self, other: &Observable) -> Result<()> {
        if self.m != other.m {
            return Err(Error::GhostCountMismatch { left: self.m, right: other.m });
        }
        Ok(())
    }
}

impl Add for Observable {
    type Output = Observable;
    fn add(mut self, rhs: Observable) -> Observable {
        self += rhs;
        self
    }
}

impl AddAssign for Observable {
    fn add_assign(&mut self, rhs: Observable) {
        assert_eq!(self.m, rhs.m, "ghost count mismatch");
        for ((a, b), p) in rhs.terms {
            self.add_poly(a, b, &p);
        }
    }
}

impl Neg for Observable {
    type Output = Observable;
    fn neg(self) -> Observable {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for Observable {
    type Output = Observable;
    fn sub(self, rhs: Observable) -> Observable {
        self + (-rhs)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .monomials()
            .map(|(a, mono, b, z)| {
                let mut s: Vec<String> = Vec::new();
                if z != Complex64::new(1.0, 0.0) || (a.is_empty() && b.is_empty() && mono.degree() == 0) {
                    s.push(fmt_complex(z));
                }
                s.extend(a.indices().map(|k| format!("η{k}")));
                if mono.degree() > 0 {
                    s.push(mono.to_string());
                }
                s.extend(b.indices().map(|k| format!("P{k}")));
                s.join(" ")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// algebra context

/// One generator of the observable algebra.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Generator {
    Eta(usize),
    Constraint(usize),
    Momentum(usize),
}

impl Generator {
    pub fn parity(self) -> u8 {
        match self {
            Generator::Constraint(_) => 0,
            _ => 1,
        }
    }
}

/// Generators of a normal-ordered monomial, left to right.
pub fn generator_word(a: &MultiIndex, mono: &Monomial, b: &MultiIndex) -> Vec<Generator> {
    a.indices()
        .map(Generator::Eta)
        .chain(mono.factors().into_iter().map(Generator::Constraint))
        .chain(b.indices().map(Generator::Momentum))
        .collect()
}

/// A contiguous piece of a normal-ordered word is itself normal-ordered.
fn word_monomial(word: &[Generator], m: usize) -> Observable {
    let mut a = MultiIndex::empty(m);
    let mut b = MultiIndex::empty(m);
    let mut g = Vec::new();
    for gen in word {
        match *gen {
            Generator::Eta(k) => a = a.with(k),
            Generator::Constraint(k) => g.push(k),
            Generator::Momentum(k) => b = b.with(k),
        }
    }
    Observable::monomial(a, Monomial::from_factors(&g, m), b, Complex64::new(1.0, 0.0))
}

/// Operations of the observable algebra for a fixed constraint system.
#[derive(Clone, Debug)]
pub struct ObservableAlgebra {
    constants: StructureConstants,
    convention: GhostConvention,
}

impl ObservableAlgebra {
    pub fn new(constants: StructureConstants) -> Self {
        ObservableAlgebra { constants, convention: GhostConvention::default() }
    }

    pub fn with_convention(constants: StructureConstants, convention: GhostConvention) -> Self {
        ObservableAlgebra { constants, convention }
    }

    pub fn m(&self) -> usize {
        self.constants.m()
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.constants
    }

    pub fn convention(&self) -> GhostConvention {
        self.convention
    }

    fn check(&self, f: &Observable) -> Result<()> {
        if f.m != self.m() {
            return Err(Error::GhostCountMismatch { left: self.m(), right: f.m });
        }
        Ok(())
    }

    /// Normal order `P_B eta^I` into `sum c eta^{I'} P_{B'}`.
    fn reorder(&self, b: &MultiIndex, i: &MultiIndex) -> BTreeMap<(MultiIndex, MultiIndex), Complex64> {
        let m = self.m();
        let kappa = self.convention.contraction();
        let mut state: BTreeMap<(MultiIndex, MultiIndex), Complex64> = BTreeMap::new();
        state.insert((*i, MultiIndex::empty(m)), Complex64::new(1.0, 0.0));
        // move P_{b_s}, then P_{b_{s-1}}, ... through the eta's
        for bk in b.to_vec().into_iter().rev() {
            let mut next: BTreeMap<(MultiIndex, MultiIndex), Complex64> = BTreeMap::new();
            for ((e, q), z) in state {
                if e.contains(bk) {
                    // P eta^{e_1} .. eta^{e_k} .. : contraction after k-1 crossings
                    let sign = if e.count_below(bk) % 2 == 0 { 1.0 } else { -1.0 };
                    *next.entry((e.without(bk), q)).or_default() += z * kappa * sign;
                }
                let (q2, s) = merge_sign(&MultiIndex::singleton(bk, m).expect("index in range"), &q);
                if s != 0 {
                    let cross = if e.len() % 2 == 0 { 1.0 } else { -1.0 };
                    *next.entry((e, q2)).or_default() += z * (cross * s as f64);
                }
            }
            next.retain(|_, z| *z != Complex64::new(0.0, 0.0));
            state = next;
        }
        state
    }

    /// Associative normal-ordered product.
    pub fn multiply(&self, f: &Observable, g: &Observable) -> Result<Observable> {
        self.check(f)?;
        f.check_m(g)?;
        let mut out = Observable::zero(self.m());
        for ((a, b), fp) in &f.terms {
            for ((i, j), gp) in &g.terms {
                let coeff = fp.mul(gp);
                for ((e, q), z) in self.reorder(b, i) {
                    let (left, s1) = merge_sign(a, &e);
                    if s1 == 0 {
                        continue;
                    }
                    let (right, s2) = merge_sign(&q, j);
                    if s2 == 0 {
                        continue;
                    }
                    let w = z * (s1 * s2) as f64;
                    out.add_poly(left, right, &coeff.scale(w));
                }
            }
        }
        Ok(out)
    }

    /// Product of a list of factors, left to right.
    pub fn product(&self, factors: &[&Observable]) -> Result<Observable> {
        let mut acc = Observable::one(self.m());
        for f in factors {
            acc = self.multiply(&acc, f)?;
        }
        Ok(acc)
    }

    /// Antilinear conjugation with `eta* = eta`, `P* = -P`, `(zw)* = w* z*`.
    pub fn conjugate(&self, f: &Observable) -> Result<Observable> {
        self.check(f)?;
        let m = self.m();
        let one = CoefficientPoly::constant(Complex64::new(1.0, 0.0), m);
        let mut out = Observable::zero(m);
        for ((a, b), p) in &f.terms {
            // (eta^A f P_B)* = (-1)^{|B|} rev(B) rev(A) P_B fbar eta^A
            let sign = (if b.len() % 2 == 0 { 1 } else { -1 }) * reversal_sign(a) * reversal_sign(b);
            let pb = Observable::term(MultiIndex::empty(m), one.clone(), *b);
            let ea = Observable::term(*a, one.clone(), MultiIndex::empty(m));
            let reordered = self.multiply(&pb, &ea)?;
            out += reordered.scale_poly(&p.conj()).scale(Complex64::new(sign as f64, 0.0));
        }
        Ok(out)
    }

    pub fn is_real(&self, f: &Observable, tol: f64) -> Result<bool> {
        Ok(self.conjugate(f)?.approx_eq(f, tol))
    }

    /// Generator bracket `[x, y]` as a central coefficient.
    fn generator_bracket(&self, x: Generator, y: Generator, parts: BracketParts) -> Option<CoefficientPoly> {
        let m = self.m();
        match (x, y) {
            (Generator::Eta(a), Generator::Momentum(b)) | (Generator::Momentum(a), Generator::Eta(b))
                if parts.ghost && a == b =>
            {
                Some(CoefficientPoly::constant(Complex64::new(1.0, 0.0), m))
            }
            (Generator::Constraint(a), Generator::Constraint(b)) if parts.coefficient => {
                let p = self.constants.bracket(a, b);
                (!p.is_zero()).then_some(p)
            }
            _ => None,
        }
    }

    /// Graded Poisson bracket with `[P_a, eta^b] = delta_a^b`,
    /// `[G_a, G_b] = C_ab^c G_c`, extended by the graded Leibniz rule.
    pub fn poisson(&self, f: &Observable, g: &Observable) -> Result<Observable> {
        self.poisson_parts(f, g, BracketParts::FULL)
    }

    /// Poisson bracket restricted to the selected generator brackets.
    ///
    /// The left argument is expanded outermost:
    /// `[x_1..x_n, Y] = sum_i (-1)^{e_Y (e_{i+1}+..+e_n)} x_1..x_{i-1} [x_i, Y] x_{i+1}..x_n`
    /// and `[x, y_1..y_p] = sum_j (-1)^{e_x (e_1+..+e_{j-1})} y_1..y_{j-1} [x, y_j] y_{j+1}..y_p`.
    pub fn poisson_parts(&self, f: &Observable, g: &Observable, parts: BracketParts) -> Result<Observable> {
        self.check(f)?;
        f.check_m(g)?;
        let m = self.m();
        let mut out = Observable::zero(m);
        for (a, fmono, b, fz) in f.monomials() {
            let xs = generator_word(&a, fmono, &b);
            for (i, gmono, j, gz) in g.monomials() {
                let ys = generator_word(&i, gmono, &j);
                let eps_y: usize = ys.iter().map(|y| y.parity() as usize).sum::<usize>() % 2;
                for (xi, x) in xs.iter().enumerate() {
                    let after_x: usize = xs[xi + 1..].iter().map(|t| t.parity() as usize).sum();
                    let mut before_y = 0usize;
                    for (yj, y) in ys.iter().enumerate() {
                        if let Some(value) = self.generator_bracket(*x, *y, parts) {
                            let exponent = eps_y * after_x + x.parity() as usize * before_y;
                            let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
                            let piece = self.product(&[
                                &word_monomial(&xs[..xi], m),
                                &word_monomial(&ys[..yj], m),
                                &word_monomial(&ys[yj + 1..], m),
                                &word_monomial(&xs[xi + 1..], m),
                            ])?;
                            out += piece.scale_poly(&value).scale(fz * gz * sign);
                        }
                        before_y += y.parity() as usize;
                    }
                }
            }
        }
        Ok(out)
    }
}
