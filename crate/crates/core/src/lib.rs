//! Exact arithmetic for Drinfeld modules over `A = F_q[t]`, together with the
//! harness used to check local-global statements for their reduction maps.
//!
//! The crate is `no_std` and only needs `alloc`. Everything is exact: finite
//! fields are dense coefficient vectors over `F_p`, polynomials are dense
//! coefficient vectors over `F_q`, and finite `A`-modules are handled through
//! the `F_q`-linear operator realising `phi_t`.
//!
//! Layout:
//!
//! * [`gf`]: prime fields, extension fields, embeddings and relative bases.
//! * [`poly`]: the ring `A = F_q[t]`, factorisation and prime enumeration.
//! * [`skew`]: the twisted polynomial ring `R{tau}`.
//! * [`linalg`]: dense linear algebra over `F_q`.
//! * [`drinfeld`]: Drinfeld modules over `A` and their reductions.
//! * [`finmod`]: the finite module `phi^W(k)` as an operator module.
//! * [`localglobal`]: prime scans, witnesses, counterexamples and densities.
//!
//! The field of definition is always `F_q(t)` with ring of integers `A`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod drinfeld;
pub mod error;
pub mod finmod;
pub mod gf;
pub mod linalg;
pub mod localglobal;
pub mod poly;
mod parse;
pub mod skew;
mod snf;

pub use drinfeld::{Carrier, DrinfeldModule, FiniteDrinfeldModule};
pub use error::{Error, Result};
pub use finmod::{InvariantFactors, OperatorModule, Submodule, TorsionFieldDegree};
pub use gf::{Embedding, FieldElem, FiniteField, RelativeBasis};
pub use linalg::{Matrix, Vector};
pub use poly::{Factorization, Poly, PrimeIdeal, PrimeStream};
pub use skew::{SkewPoly, TwistCoeff};
