//! Maximal surfaces in Lorentz–Minkowski space `L³`: Weierstrass
//! representation, a catalog of classical examples, maximal graphs solved on
//! grids, asymptotic measurements, and finite-difference certificates.

// Range checks are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod catalog;
pub mod error;
pub mod io;
pub mod lorentz;
pub mod maxgraph;
pub mod quadrature;
pub mod verify;
pub mod weierstrass;

pub use error::{Error, Result};
