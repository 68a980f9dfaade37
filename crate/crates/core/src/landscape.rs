//! Free-energy, diffusion, and drift landscapes of the colloidal
//! self-assembly model, plus every partial derivative the optimality
//! residuals need.
//!
//! Both landscapes depend on state and control only through the shifted
//! coordinate `s = x - b - c*u`:
//!
//! ```text
//! F(x,u)  = a * kB * theta * s^2                     (free energy, Joules)
//! D2(x,u) = d * exp(-s^2) + f                        (diffusion)
//! D1(x,u) = dD2/dx - D2/(kB*theta) * dF/dx           (drift)
//!         = -2 s * ((1+a) d exp(-s^2) + a f)
//! ```
//!
//! The simplified drift form is derived symbolically (the `kB*theta` factor
//! carried by `F` cancels) and is gated behind a finite-difference
//! equivalence test against the defining expression.
//!
//! Units: the state is the dimensionless order parameter on `[0,6]`, time is
//! in seconds, `F` is in Joules, and `D2` is in (order parameter)²/s. The
//! control `u` (volts) is unbounded here; clamping, if any, is a policy
//! concern upstream.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Dual1, Scalar};

/// Landscape constants. Defaults are the benchmark values of the colloidal
/// self-assembly model this solver targets.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct LandscapeParams<R> {
    /// Dimensionless free-energy scale.
    pub a: R,
    /// Landscape center in order-parameter units.
    pub b: R,
    /// Control-to-center coupling, order parameter per volt.
    pub c: R,
    /// Gaussian diffusion amplitude.
    pub d: R,
    /// Diffusion floor; keeps `D2 >= f > 0` (uniform ellipticity).
    pub f: R,
    /// Boltzmann constant, Joules per Kelvin.
    pub k_b: R,
    /// Temperature in Kelvin.
    pub theta: R,
}

impl<R: Scalar> Default for LandscapeParams<R> {
    fn default() -> Self {
        Self {
            a: R::from_f64(10.0),
            b: R::from_f64(2.1),
            c: R::from_f64(0.75),
            d: R::from_f64(4.5e-3),
            f: R::from_f64(0.5e-3),
            k_b: R::from_f64(1.38066e-23),
            theta: R::from_f64(293.0),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LandscapeError {
    #[error("diffusion parameters must be positive: d = {d}, f = {f}")]
    NonPositiveDiffusion { d: f64, f: f64 },
    #[error("thermal parameters must be positive: k_b = {k_b}, theta = {theta}")]
    NonPositiveThermal { k_b: f64, theta: f64 },
}

impl<R: Scalar> LandscapeParams<R> {
    /// Checks the positivity invariants (`d, f, k_b, theta > 0`).
    ///
    /// The evaluation functions themselves are defined for any constants so
    /// that degenerate stubs (e.g. an all-zero landscape) stay usable in
    /// tests; configuration loading is where this gate runs.
    pub fn validate(&self) -> Result<(), LandscapeError> {
        if !(self.d.value() > 0.0) || !(self.f.value() > 0.0) {
            return Err(LandscapeError::NonPositiveDiffusion {
                d: self.d.value(),
                f: self.f.value(),
            });
        }
        if !(self.k_b.value() > 0.0) || !(self.theta.value() > 0.0) {
            return Err(LandscapeError::NonPositiveThermal {
                k_b: self.k_b.value(),
                theta: self.theta.value(),
            });
        }
        Ok(())
    }

    /// Same constants in another scalar type (e.g. lifted to dual numbers).
    pub fn cast<S: Scalar>(&self) -> LandscapeParams<S> {
        LandscapeParams {
            a: S::from_f64(self.a.value()),
            b: S::from_f64(self.b.value()),
            c: S::from_f64(self.c.value()),
            d: S::from_f64(self.d.value()),
            f: S::from_f64(self.f.value()),
            k_b: S::from_f64(self.k_b.value()),
            theta: S::from_f64(self.theta.value()),
        }
    }
}

/// Drift/diffusion values and the partial derivatives used by the residuals.
///
/// First subscript is the variable: `_x` for state, `_u` for control.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LandscapePartials<R> {
    pub d1: R,
    pub d2: R,
    pub d1_x: R,
    pub d1_u: R,
    pub d2_x: R,
    pub d2_u: R,
    pub d2_xx: R,
    pub d2_xu: R,
    pub d2_uu: R,
}

#[inline]
fn shifted<R: Scalar>(x: R, u: R, p: &LandscapeParams<R>) -> R {
    x - p.b - p.c * u
}

/// Free energy `F = a * kB * theta * s^2` (Joules). Nonnegative for real
/// parameters; zero exactly on the symmetry axis `x = b + c*u`.
pub fn free_energy<R: Scalar>(x: R, u: R, p: &LandscapeParams<R>) -> R {
    let s = shifted(x, u, p);
    p.a * p.k_b * p.theta * s * s
}

/// Diffusion `D2 = d * exp(-s^2) + f`, bounded in `(f, d + f]`.
pub fn diffusion<R: Scalar>(x: R, u: R, p: &LandscapeParams<R>) -> R {
    let s = shifted(x, u, p);
    p.d * (-(s * s)).exp() + p.f
}

/// Drift `D1 = -2 s ((1+a) d exp(-s^2) + a f)`.
///
/// Equals `dD2/dx - D2/(kB*theta) * dF/dx`; the thermal factor cancels
/// analytically, so the result is invariant under rescaling `kB*theta`.
pub fn drift<R: Scalar>(x: R, u: R, p: &LandscapeParams<R>) -> R {
    let s = shifted(x, u, p);
    let g = p.d * (-(s * s)).exp();
    let two = R::from_f64(2.0);
    -two * s * ((R::one() + p.a) * g + p.a * p.f)
}

/// All values and partials at `(x, u)` in one evaluation.
///
/// Everything is a closed-form derivative through `s`; in particular
/// `D1_u = -c * D1_x` and `D2_u = -c * D2_x`.
pub fn partials<R: Scalar>(x: R, u: R, p: &LandscapeParams<R>) -> LandscapePartials<R> {
    let one = R::one();
    let two = R::from_f64(2.0);
    let four = R::from_f64(4.0);

    let s = shifted(x, u, p);
    let g = p.d * (-(s * s)).exp();

    let d2 = g + p.f;
    let d2_x = -two * s * g;
    let d2_xx = g * (four * s * s - two);

    let d1 = -two * s * ((one + p.a) * g + p.a * p.f);
    // d/ds of -2s((1+a)g + af) with dg/ds = -2sg.
    let d1_x = (one + p.a) * g * (four * s * s - two) - two * p.a * p.f;

    LandscapePartials {
        d1,
        d2,
        d1_x,
        d1_u: -p.c * d1_x,
        d2_x,
        d2_u: -p.c * d2_x,
        d2_xx,
        d2_xu: -p.c * d2_xx,
        d2_uu: p.c * p.c * d2_xx,
    }
}

/// Partials together with their derivative in the control direction,
/// obtained by evaluating [`partials`] with a dual-valued `u`.
///
/// The FPK residual's gradient with respect to the policy value needs
/// `d/du` of chained coefficients such as `D1_x + D1_u * pi_x`; computing
/// them through a dual number avoids another layer of hand algebra.
pub fn partials_du<R: Scalar>(
    x: R,
    u: R,
    p: &LandscapeParams<R>,
) -> LandscapePartials<Dual1<R>> {
    let pd: LandscapeParams<Dual1<R>> = p.cast_lift();
    partials(Dual1::constant(x), Dual1::variable(u, 0), &pd)
}

impl<R: Scalar> LandscapeParams<R> {
    fn cast_lift<const N: usize>(&self) -> LandscapeParams<crate::scalar::Dual<R, N>> {
        use crate::scalar::Dual;
        LandscapeParams {
            a: Dual::constant(self.a),
            b: Dual::constant(self.b),
            c: Dual::constant(self.c),
            d: Dual::constant(self.d),
            f: Dual::constant(self.f),
            k_b: Dual::constant(self.k_b),
            theta: Dual::constant(self.theta),
        }
    }

    /// Lift constants into `N`-slot duals (as constants).
    pub fn lift<const N: usize>(&self) -> LandscapeParams<crate::scalar::Dual<R, N>> {
        self.cast_lift()
    }
}

/// SDE coefficient interface used by the simulator and the finite-difference
/// FPK propagator; lets tests substitute constant-coefficient stubs.
pub trait Dynamics<R: Scalar>: Sync {
    fn drift(&self, x: R, u: R) -> R;
    fn diffusion(&self, x: R, u: R) -> R;
    /// Global upper bound on the diffusion, for explicit-scheme stability.
    fn diffusion_max(&self) -> R;
}

impl<R: Scalar> Dynamics<R> for LandscapeParams<R> {
    fn drift(&self, x: R, u: R) -> R {
        drift(x, u, self)
    }
    fn diffusion(&self, x: R, u: R) -> R {
        diffusion(x, u, self)
    }
    fn diffusion_max(&self) -> R {
        self.d + self.f
    }
}
