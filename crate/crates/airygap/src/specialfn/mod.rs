//! Self-contained special functions: Airy `Ai`/`Ai'`, complete elliptic
//! integrals `K(k)`/`E(k)` (modulus convention), and genus-g Riemann theta
//! functions with derivatives.

mod airy;
mod elliptic;
mod theta;

pub use airy::{airy_ai, airy_ai_pair, airy_ai_prime};
pub use elliptic::{ellint_e, ellint_k};
pub use theta::ThetaEvaluator;
