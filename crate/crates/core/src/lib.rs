//! Generalized Gamma-type positive linear operators.
//!
//! The operators act on functions of `t` in `(0, inf)` through the kernel
//!
//! ```text
//! K_{n,k}(x,t) = (2n-k+1)! x^{n+1} / (n! (n-k)!) * t^{n-k} / (x+t)^{2n-k+2}
//! ```
//!
//! The crate is split into:
//!
//! * [`exact_moments`]: every moment formula in exact rational arithmetic,
//!   with a binomial-sum oracle for the published closed forms.
//! * [`operator_eval`]: floating-point evaluation of `M_{n,k}`, the derivative
//!   operator `M^(r)_{n,k}`, the normalized operator `M*_{n,k,r}` and the
//!   Gamma operator `G_n` by quadrature on a Beta (or Gamma) weight.
//! * [`moduli`]: moduli of continuity / smoothness and a constructive upper
//!   bound for the K-functional.
//! * [`verify`]: the asymptotic (Voronovskaja) limit, the two error bounds and
//!   the central-moment order estimate, as structured reports.
//! * [`cli`]: the experiment runner behind the `gamma-ops` binary.

pub mod builtin;
pub mod cli;
pub mod error;
pub mod exact_moments;
pub mod moduli;
pub mod operator_eval;
pub mod quadrature;
pub mod test_function;
pub mod verify;

pub use error::{Error, Result};
pub use exact_moments::{ExactCoefficient, OperatorParams};
pub use quadrature::{QuadratureConfig, SplitPolicy};
pub use test_function::{FunctionLevel, TestFunction};
