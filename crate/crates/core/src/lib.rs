//! Construction and verification of entropy solutions whose jump sets are
//! dense.
//!
//! The scalar half builds focusing initial data whose Lax–Oleinik solution
//! reproduces a dyadic staircase at a prescribed time, evaluates the exact
//! solutions in closed form, and checks admissibility, jump gaps and entropy
//! dissipation numerically. The systems half provides wave curves for strictly
//! hyperbolic systems, the staircase-driven state sequences for a genuinely
//! nonlinear or linearly degenerate field, and a single-family front tracker.

pub mod dyadic;
pub mod error;
pub mod flux;
pub mod multid;
pub mod quadrature;
pub mod scalar;
pub mod system;
pub mod verify;
pub mod waves;

pub use error::{Error, Result};
