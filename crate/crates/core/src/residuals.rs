//! Pointwise residuals of the three coupled optimality PDEs and the two
//! endpoint boundary conditions, composed into the five-term training loss.
//!
//! With `lp` the landscape values/partials evaluated at `u = pi(x,t)`:
//!
//! ```text
//! HJB:    r = psi_t - pi^2/2 + D1 psi_x + D2 psi_xx
//! FPK:    r = rho_t + d/dx(D1 rho) - d^2/dx^2(D2 rho)
//! policy: r = pi - psi_x dD1/du - psi_xx dD2/du
//! ```
//!
//! The FPK total derivatives chain through the policy field, since `D1`,
//! `D2` depend on `x` both directly and through `pi(x,t)`:
//!
//! ```text
//! dD1/dx   = D1_x + D1_u pi_x
//! dD2/dx   = D2_x + D2_u pi_x
//! d2D2/dx2 = D2_xx + 2 D2_xu pi_x + D2_uu pi_x^2 + D2_u pi_xx
//! ```
//!
//! The HJB and policy residuals need no such chaining: only landscape
//! values and `d/du` at the point itself appear in them.
//!
//! Each loss term is the mean of squared residuals over its own point
//! group (interior for the three PDE terms, the `t = 0` and `t = T` lines
//! for the boundary terms), and the total is their unweighted sum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffnet::{
    BatchLoss, DiffnetError, FieldJet, NetworkParams, Workspace, JET_SLOTS, LOSS_BUCKETS,
};
use crate::landscape::{self, LandscapeParams, LandscapePartials};
use crate::scalar::{Dual, Scalar};
use crate::trainer::CollocationSet;

#[derive(Debug, Error)]
pub enum ResidualError {
    #[error("collocation group `{0}` is empty")]
    EmptyGroup(&'static str),
    #[error(transparent)]
    Net(#[from] DiffnetError),
}

/// The five loss terms and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown<R> {
    pub l_psi: R,
    pub l_rho: R,
    pub l_pi: R,
    pub l_rho0: R,
    pub l_rho_t: R,
    pub total: R,
}

impl<R: Scalar> LossBreakdown<R> {
    pub fn from_buckets(b: [R; LOSS_BUCKETS]) -> Self {
        Self {
            l_psi: b[0],
            l_rho: b[1],
            l_pi: b[2],
            l_rho0: b[3],
            l_rho_t: b[4],
            total: b.into_iter().sum(),
        }
    }

    pub fn terms(&self) -> [R; LOSS_BUCKETS] {
        [self.l_psi, self.l_rho, self.l_pi, self.l_rho0, self.l_rho_t]
    }

    pub fn max_term(&self) -> R {
        self.terms().into_iter().fold(R::zero(), |a, b| a.max(b))
    }
}

/// HJB residual; zero exactly when the jet solves the value-function PDE.
pub fn hjb_residual<S: Scalar>(jet: &FieldJet<S>, lp: &LandscapePartials<S>) -> S {
    let half = S::from_f64(0.5);
    jet.psi.d_dt - half * jet.pi.value * jet.pi.value
        + lp.d1 * jet.psi.d_dx
        + lp.d2 * jet.psi.d_dxx
}

/// Controlled FPK residual, with the total `x`-derivatives of the
/// coefficients chained through the policy jet.
pub fn fpk_residual<S: Scalar>(jet: &FieldJet<S>, lp: &LandscapePartials<S>) -> S {
    let two = S::from_f64(2.0);
    let pi_x = jet.pi.d_dx;
    let pi_xx = jet.pi.d_dxx;
    let d1_total = lp.d1_x + lp.d1_u * pi_x;
    let d2_total = lp.d2_x + lp.d2_u * pi_x;
    let d2_total2 = lp.d2_xx + two * lp.d2_xu * pi_x + lp.d2_uu * pi_x * pi_x + lp.d2_u * pi_xx;

    jet.rho.d_dt + d1_total * jet.rho.value + lp.d1 * jet.rho.d_dx
        - d2_total2 * jet.rho.value
        - two * d2_total * jet.rho.d_dx
        - lp.d2 * jet.rho.d_dxx
}

/// Implicit policy residual; its root in `pi` is the optimal control at the
/// point (the landscapes are control-non-affine, so no explicit form exists).
pub fn policy_residual<S: Scalar>(jet: &FieldJet<S>, lp: &LandscapePartials<S>) -> S {
    jet.pi.value - jet.psi.d_dx * lp.d1_u - jet.psi.d_dxx * lp.d2_u
}

/// Squared boundary mismatch of the learned density against a target value.
pub fn boundary_residual<S: Scalar>(rho_value: S, target: S) -> S {
    let e = rho_value - target;
    e * e
}

/// All three interior residuals at once, with the landscape evaluated at
/// `u = pi(x, t)`.
pub fn interior_residuals<S: Scalar>(
    jet: &FieldJet<S>,
    x: S,
    p: &LandscapeParams<S>,
) -> [S; 3] {
    let lp = landscape::partials(x, jet.pi.value, p);
    [
        hjb_residual(jet, &lp),
        fpk_residual(jet, &lp),
        policy_residual(jet, &lp),
    ]
}

/// The five-term training objective over a collocation set, as a
/// [`BatchLoss`]: interior points contribute the three PDE residuals,
/// boundary points the squared density mismatch. Buckets are
/// `[psi, rho, pi, rho0, rhoT]`, each a mean over its own group.
pub struct PdeLoss<'a, R: Scalar> {
    colloc: &'a CollocationSet<R>,
    params_dual: LandscapeParams<Dual<R, JET_SLOTS>>,
    w_int: R,
    w_0: R,
    w_t: R,
}

impl<'a, R: Scalar> PdeLoss<'a, R> {
    pub fn new(colloc: &'a CollocationSet<R>, p: &LandscapeParams<R>) -> Self {
        Self {
            colloc,
            params_dual: p.lift::<JET_SLOTS>(),
            w_int: R::one() / R::from_f64(colloc.interior.len().max(1) as f64),
            w_0: R::one() / R::from_f64(colloc.initial.len().max(1) as f64),
            w_t: R::one() / R::from_f64(colloc.terminal.len().max(1) as f64),
        }
    }
}

impl<R: Scalar> BatchLoss<R> for PdeLoss<'_, R> {
    fn len(&self) -> usize {
        self.colloc.interior.len() + self.colloc.initial.len() + self.colloc.terminal.len()
    }

    fn point(&self, i: usize) -> (R, R) {
        let n_int = self.colloc.interior.len();
        let n_0 = self.colloc.initial.len();
        if i < n_int {
            self.colloc.interior[i]
        } else if i < n_int + n_0 {
            (self.colloc.initial[i - n_int].x, R::zero())
        } else {
            (
                self.colloc.terminal[i - n_int - n_0].x,
                self.colloc.t_final,
            )
        }
    }

    fn needs_jet(&self, i: usize) -> bool {
        i < self.colloc.interior.len()
    }

    fn contribution(&self, i: usize, jet: &FieldJet<R>) -> ([R; LOSS_BUCKETS], FieldJet<R>) {
        let n_int = self.colloc.interior.len();
        let n_0 = self.colloc.initial.len();
        let two = R::from_f64(2.0);
        let mut buckets = [R::zero(); LOSS_BUCKETS];
        let mut adj = FieldJet::zero();

        if i < n_int {
            let (x, _) = self.colloc.interior[i];
            let d = jet.seed_duals();
            let lp = landscape::partials(Dual::constant(x), d.pi.value, &self.params_dual);
            let rs = [
                hjb_residual(&d, &lp),
                fpk_residual(&d, &lp),
                policy_residual(&d, &lp),
            ];
            for (b, r) in buckets.iter_mut().zip(&rs) {
                *b = self.w_int * r.re * r.re;
            }
            for k in 0..JET_SLOTS {
                let mut g = R::zero();
                for r in &rs {
                    g += r.re * r.eps[k];
                }
                adj.set(k, two * self.w_int * g);
            }
        } else {
            let (bp, bucket, w) = if i < n_int + n_0 {
                (&self.colloc.initial[i - n_int], 3, self.w_0)
            } else {
                (&self.colloc.terminal[i - n_int - n_0], 4, self.w_t)
            };
            let e = jet.rho.value - bp.target;
            buckets[bucket] = w * e * e;
            adj.rho.value = two * w * e;
        }
        (buckets, adj)
    }
}

/// The total loss of a network over a collocation set: each term is the
/// mean of squared residuals over its own point group, and `total` is the
/// unweighted sum of the five terms.
pub fn total_loss<R: Scalar>(
    net: &NetworkParams<R>,
    colloc: &CollocationSet<R>,
    p: &LandscapeParams<R>,
) -> Result<LossBreakdown<R>, ResidualError> {
    total_loss_ws(&mut Workspace::new(), net, colloc, p)
}

/// [`total_loss`] with a caller-held workspace (training-loop form).
pub fn total_loss_ws<R: Scalar>(
    ws: &mut Workspace<R>,
    net: &NetworkParams<R>,
    colloc: &CollocationSet<R>,
    p: &LandscapeParams<R>,
) -> Result<LossBreakdown<R>, ResidualError> {
    colloc.validate_nonempty()?;
    let loss = PdeLoss::new(colloc, p);
    Ok(LossBreakdown::from_buckets(ws.loss_terms(net, &loss)?))
}
