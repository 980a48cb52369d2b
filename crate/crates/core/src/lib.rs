//! Symbolic-numeric BRST machinery for a finite-dimensional quantized system
//! with irreducible first-class constraints.
//!
//! The pipeline runs bottom-up:
//!
//! * [`ghostalg`] - multi-indices over the ghost generators and their sign calculus.
//! * [`observables`] - the normal-ordered observable algebra, conjugation and the
//!   graded Poisson bracket.
//! * [`koszul`] - Koszul-Tate differential, contracting homotopy and the
//!   perturbative construction of the classical BRST charge.
//! * [`states`] - the ghost-extended state space with its degenerate top-coefficient pairing.
//! * [`quantize`] - generator operators, quantization of observables, adjoints and
//!   the ghost number operator.
//! * [`brst`] - the quantum BRST operator with its nilpotency/self-adjointness certificate.
//! * [`cohomology`] - graded cohomology, duality at the extreme ghost numbers, the
//!   sphere cochain model and the extended complex.
//!
//! Supporting modules: [`linalg`] (dense complex linear algebra and
//! tolerances), [`par`] (parallel/sequential batch execution), [`models`]
//! (reference constraint systems), [`sample`] (random observables) and
//! [`verify`] (batch residual checks).

pub mod brst;
pub mod cohomology;
pub mod error;
pub mod ghostalg;
pub mod koszul;
pub mod linalg;
pub mod observables;
pub mod models;
pub mod par;
pub mod quantize;
pub mod sample;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
