//! Steering the probability density of a controlled colloidal self-assembly
//! order parameter between prescribed endpoint distributions.
//!
//! The state `x ∈ [0,6]` follows the Itô SDE
//! `dx = D1(x,u) dt + sqrt(2 D2(x,u)) dw` with drift/diffusion landscapes
//! that are nonlinear in the state and non-affine in the control `u`
//! (an electric field voltage). Minimum-effort steering of the state PDF
//! from `rho_0` at `t = 0` to `rho_T` at `t = T` leads to three coupled
//! optimality PDEs (a generalized Schrödinger bridge system):
//!
//! * an HJB equation for a value function `psi`,
//! * the controlled Fokker-Planck-Kolmogorov equation for the PDF `rho`,
//! * an implicit pointwise equation for the optimal policy `pi`,
//!
//! with `rho` pinned to the endpoint PDFs. The solver trains a small
//! fully-connected network `(x,t) -> (psi, rho, pi)` so that the PDE
//! residuals and boundary mismatches vanish on collocation points, then
//! verifies the learned policy by closed-loop Euler-Maruyama simulation
//! and by an independent finite-difference propagation of the FPK equation.
//!
//! Module map:
//! * [`landscape`] — closed-form free-energy / diffusion / drift landscapes
//!   and their partial derivatives;
//! * [`diffnet`] — the network, exact input-derivative jets, and parameter
//!   gradients of jet-valued losses;
//! * [`residuals`] — pointwise PDE/boundary residuals and the five-term loss;
//! * [`trainer`] — collocation sampling, adaptive refinement, Adam training;
//! * [`prob`] — truncated normals, Metropolis-Hastings, KDE, distances;
//! * [`simulate`] — closed-loop SDE ensembles under the learned policy;
//! * [`fpk_oracle`] — conservative finite-difference FPK propagator used as
//!   a non-neural cross-check;
//! * [`scalar`] — the numeric abstraction (`f32`/`f64`/dual numbers) the
//!   whole core is generic over.

pub mod diffnet;

pub mod landscape;
pub mod numint;
pub mod prob;
pub mod residuals;
pub mod scalar;

pub mod trainer;

pub use scalar::{Dual, Dual1, Scalar};

/// Lower edge of the order-parameter domain.
pub const DOMAIN_LO: f64 = 0.0;
/// Upper edge of the order-parameter domain.
pub const DOMAIN_HI: f64 = 6.0;

/// Double-precision instantiations used by the CLI and most tests.
pub type Landscape64 = landscape::LandscapeParams<f64>;
pub type Network64 = diffnet::NetworkParams<f64>;
pub type FieldJet64 = diffnet::FieldJet<f64>;
pub type TruncNorm64 = prob::TruncNormSpec<f64>;



