//! Differentiable scalar-field approximant: a fully-connected tanh network
//! mapping `(x, t)` to the three fields `(psi, rho, pi)` together with their
//! first and second input derivatives, and exact parameter gradients of any
//! scalar loss built from those jets.
//!
//! Derivative strategy: a `(value, d/dx, d/dt, d2/dx2)` jet is propagated
//! forward through every layer in closed form (tanh derivatives are
//! analytic), and the whole jet computation is then differentiated with
//! respect to the parameters in a reverse pass. With only two inputs the
//! forward jets are cheap, and no general-purpose autodiff is involved:
//! the jets are exact derivatives of the implemented network function.
//!
//! The `rho` head passes through a softplus so the learned density can never
//! go negative; `psi` and `pi` are raw affine heads. Inputs are affinely
//! scaled (`x` to `[-1,1]`, `t` to `[0,1]`) for conditioning; the scaling
//! constants are part of the network description and the chain rule through
//! them is applied internally, so all jet entries are derivatives with
//! respect to the *unscaled* inputs.

mod batch;
mod checkpoint;

pub use batch::{loss_gradient, loss_terms, BatchLoss, Workspace, LOSS_BUCKETS};
pub use checkpoint::{load_checkpoint, save_checkpoint};

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Dual, Scalar};
use crate::{DOMAIN_HI, DOMAIN_LO};

#[derive(Debug, Error)]
pub enum DiffnetError {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("non-finite parameter at index {index}")]
    NonFiniteParams { index: usize },
    #[error("non-finite input ({x}, {t})")]
    NonFiniteInput { x: f64, t: f64 },
    #[error("non-finite network output at ({x}, {t})")]
    NonFiniteOutput { x: f64, t: f64 },
    #[error("non-finite loss contribution at collocation point {index} = ({x}, {t})")]
    NonFiniteLoss { index: usize, x: f64, t: f64 },
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error("checkpoint sidecar: {0}")]
    Json(#[from] serde_json::Error),
}

/// Hidden-layer activation. Only the hyperbolic tangent is supported; the
/// name survives in configs and checkpoints for forward compatibility.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
}

impl FromStr for Activation {
    type Err = DiffnetError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            other => Err(DiffnetError::InvalidSpec(format!(
                "unsupported activation {other:?} (only \"tanh\")"
            ))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("tanh")
    }
}

/// Network architecture plus the fixed input-scaling constants and the
/// initialization seed. Two inputs and three output heads are structural.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub hidden_layers: usize,
    pub width: usize,
    pub activation: Activation,
    /// Scaled input is `x_scale * x + x_shift`.
    pub x_scale: f64,
    pub x_shift: f64,
    /// Scaled input is `t_scale * t + t_shift`.
    pub t_scale: f64,
    pub t_shift: f64,
    pub seed: u64,
}

pub const NET_INPUTS: usize = 2;
pub const NET_OUTPUTS: usize = 3;

impl NetworkSpec {
    /// Spec with the standard scaling: `[0,6] -> [-1,1]` in `x` and
    /// `[0,t_final] -> [0,1]` in `t`.
    pub fn new(hidden_layers: usize, width: usize, t_final: f64, seed: u64) -> Self {
        Self {
            hidden_layers,
            width,
            activation: Activation::Tanh,
            x_scale: 2.0 / (DOMAIN_HI - DOMAIN_LO),
            x_shift: -(DOMAIN_HI + DOMAIN_LO) / (DOMAIN_HI - DOMAIN_LO),
            t_scale: 1.0 / t_final,
            t_shift: 0.0,
            seed,
        }
    }

    /// Identity input scaling; mostly for tests that pin exact values.
    pub fn with_identity_scaling(mut self) -> Self {
        self.x_scale = 1.0;
        self.x_shift = 0.0;
        self.t_scale = 1.0;
        self.t_shift = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), DiffnetError> {
        if self.hidden_layers == 0 {
            return Err(DiffnetError::InvalidSpec("need at least 1 hidden layer".into()));
        }
        if self.width == 0 {
            return Err(DiffnetError::InvalidSpec("zero-width layer".into()));
        }
        for (name, v) in [
            ("x_scale", self.x_scale),
            ("x_shift", self.x_shift),
            ("t_scale", self.t_scale),
            ("t_shift", self.t_shift),
        ] {
            if !v.is_finite() {
                return Err(DiffnetError::InvalidSpec(format!("{name} is not finite")));
            }
        }
        if self.x_scale == 0.0 || self.t_scale == 0.0 {
            return Err(DiffnetError::InvalidSpec("input scale must be nonzero".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of each affine layer, input to output.
    pub(crate) fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 1);
        dims.push((NET_INPUTS, self.width));
        for _ in 1..self.hidden_layers {
            dims.push((self.width, self.width));
        }
        dims.push((self.width, NET_OUTPUTS));
        dims
    }

    /// Total number of trainable parameters.
    pub fn param_count(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| (i + 1) * o).sum()
    }

    /// Flat-vector offsets of each layer: `(w_offset, b_offset, rows, cols)`.
    pub(crate) fn layer_offsets(&self) -> Vec<LayerSlot> {
        let mut slots = Vec::new();
        let mut off = 0;
        for (fan_in, fan_out) in self.layer_dims() {
            slots.push(LayerSlot {
                w: off,
                b: off + fan_in * fan_out,
                rows: fan_out,
                cols: fan_in,
            });
            off += (fan_in + 1) * fan_out;
        }
        slots
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LayerSlot {
    pub w: usize,
    pub b: usize,
    pub rows: usize,
    pub cols: usize,
}

/// All trainable parameters as one flat vector plus the shape metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams<R> {
    pub spec: NetworkSpec,
    pub theta: Vec<R>,
}

/// Value and input derivatives of one output head at one `(x, t)` point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HeadJet<R> {
    pub value: R,
    pub d_dx: R,
    pub d_dt: R,
    pub d_dxx: R,
}

impl<R: Scalar> HeadJet<R> {
    pub fn zero() -> Self {
        Self {
            value: R::zero(),
            d_dx: R::zero(),
            d_dt: R::zero(),
            d_dxx: R::zero(),
        }
    }

    pub fn constant(value: R) -> Self {
        Self { value, ..Self::zero() }
    }

    #[inline]
    fn axpy(&mut self, w: R, other: &Self) {
        self.value += w * other.value;
        self.d_dx += w * other.d_dx;
        self.d_dt += w * other.d_dt;
        self.d_dxx += w * other.d_dxx;
    }

    /// tanh applied jet-wise: `d2/dx2 tanh(z) = p z_xx + q z_x^2` with
    /// `p = 1 - tanh^2`, `q = -2 tanh p`.
    #[inline]
    fn tanh(&self) -> Self {
        let th = self.value.tanh();
        let p = R::one() - th * th;
        let q = R::from_f64(-2.0) * th * p;
        Self {
            value: th,
            d_dx: p * self.d_dx,
            d_dt: p * self.d_dt,
            d_dxx: p * self.d_dxx + q * self.d_dx * self.d_dx,
        }
    }

    /// Softplus applied jet-wise (the positivity transform of the rho head).
    #[inline]
    fn softplus(&self) -> Self {
        let sp = softplus(self.value);
        let sg = sigmoid(self.value);
        let dsg = sg * (R::one() - sg);
        Self {
            value: sp,
            d_dx: sg * self.d_dx,
            d_dt: sg * self.d_dt,
            d_dxx: sg * self.d_dxx + dsg * self.d_dx * self.d_dx,
        }
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.d_dx.is_finite()
            && self.d_dt.is_finite()
            && self.d_dxx.is_finite()
    }
}

#[inline]
pub(crate) fn softplus<R: Scalar>(v: R) -> R {
    // max(v, 0) + ln(1 + exp(-|v|)), stable on both tails
    v.max(R::zero()) + (-v.abs()).exp().ln_1p()
}

#[inline]
pub(crate) fn sigmoid<R: Scalar>(v: R) -> R {
    let one = R::one();
    if v >= R::zero() {
        one / (one + (-v).exp())
    } else {
        let e = v.exp();
        e / (one + e)
    }
}

/// Values and `(d/dx, d/dt, d2/dx2)` of the three heads at one point.
/// The mixed derivative `d2/dxdt` is not carried; nothing downstream
/// needs it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldJet<R> {
    pub psi: HeadJet<R>,
    pub rho: HeadJet<R>,
    pub pi: HeadJet<R>,
}

/// Number of scalar slots in a [`FieldJet`]; the flat order is
/// `psi.{value,d_dx,d_dt,d_dxx}`, then `rho`, then `pi`.
pub const JET_SLOTS: usize = 12;

impl<R: Scalar> FieldJet<R> {
    pub fn zero() -> Self {
        Self {
            psi: HeadJet::zero(),
            rho: HeadJet::zero(),
            pi: HeadJet::zero(),
        }
    }

    pub fn get(&self, slot: usize) -> R {
        let head = match slot / 4 {
            0 => &self.psi,
            1 => &self.rho,
            _ => &self.pi,
        };
        match slot % 4 {
            0 => head.value,
            1 => head.d_dx,
            2 => head.d_dt,
            _ => head.d_dxx,
        }
    }

    pub fn set(&mut self, slot: usize, v: R) {
        let head = match slot / 4 {
            0 => &mut self.psi,
            1 => &mut self.rho,
            _ => &mut self.pi,
        };
        match slot % 4 {
            0 => head.value = v,
            1 => head.d_dx = v,
            2 => head.d_dt = v,
            _ => head.d_dxx = v,
        }
    }

    /// Each slot as a dual variable seeded in its own derivative slot, so a
    /// scalar function of the jet evaluates to its value plus all twelve
    /// partials at once.
    pub fn seed_duals(&self) -> FieldJet<Dual<R, JET_SLOTS>> {
        let mut out = FieldJet::<Dual<R, JET_SLOTS>>::zero();
        for k in 0..JET_SLOTS {
            out.set(k, Dual::variable(self.get(k), k));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.psi.is_finite() && self.rho.is_finite() && self.pi.is_finite()
    }
}

/// Deterministic initialization: weights from the scaled-uniform fan-in
/// distribution `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`, biases zero.
pub fn init_network<R: Scalar>(spec: &NetworkSpec) -> Result<NetworkParams<R>, DiffnetError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut theta = Vec::with_capacity(spec.param_count());
    for (fan_in, fan_out) in spec.layer_dims() {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        for _ in 0..fan_in * fan_out {
            theta.push(R::from_f64(dist.sample(&mut rng)));
        }
        for _ in 0..fan_out {
            theta.push(R::zero());
        }
    }
    Ok(NetworkParams { spec: *spec, theta })
}

impl<R: Scalar> NetworkParams<R> {
    pub fn param_count(&self) -> usize {
        self.theta.len()
    }

    /// Errors with the first non-finite parameter index, if any.
    pub fn validate(&self) -> Result<(), DiffnetError> {
        if self.theta.len() != self.spec.param_count() {
            return Err(DiffnetError::InvalidSpec(format!(
                "parameter vector has {} entries, spec implies {}",
                self.theta.len(),
                self.spec.param_count()
            )));
        }
        match self.theta.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(DiffnetError::NonFiniteParams { index }),
            None => Ok(()),
        }
    }

    /// Scaled input jets for `(x, t)`; derivative entries carry the chain
    /// constants so everything downstream differentiates in unscaled inputs.
    fn input_jets(&self, x: R, t: R) -> [HeadJet<R>; 2] {
        let s = &self.spec;
        let (xs, xo) = (R::from_f64(s.x_scale), R::from_f64(s.x_shift));
        let (ts, to) = (R::from_f64(s.t_scale), R::from_f64(s.t_shift));
        [
            HeadJet {
                value: xs * x + xo,
                d_dx: xs,
                d_dt: R::zero(),
                d_dxx: R::zero(),
            },
            HeadJet {
                value: ts * t + to,
                d_dx: R::zero(),
                d_dt: ts,
                d_dxx: R::zero(),
            },
        ]
    }

    /// Jet forward pass at one point. Exact derivatives of the implemented
    /// network function (no numerical approximation anywhere).
    pub fn forward_jet(&self, x: R, t: R) -> Result<FieldJet<R>, DiffnetError> {
        if !x.is_finite() || !t.is_finite() {
            return Err(DiffnetError::NonFiniteInput { x: x.value(), t: t.value() });
        }
        let jet = self.forward_jet_unchecked(x, t);
        if !jet.is_finite() {
            return Err(DiffnetError::NonFiniteOutput { x: x.value(), t: t.value() });
        }
        Ok(jet)
    }

    pub(crate) fn forward_jet_unchecked(&self, x: R, t: R) -> FieldJet<R> {
        let slots = self.spec.layer_offsets();
        let mut act: Vec<HeadJet<R>> = self.input_jets(x, t).to_vec();
        let mut next: Vec<HeadJet<R>> = Vec::with_capacity(self.spec.width);
        let last = slots.len() - 1;
        for (l, slot) in slots.iter().enumerate() {
            next.clear();
            for r in 0..slot.rows {
                let mut z = HeadJet::constant(self.theta[slot.b + r]);
                let w_row = &self.theta[slot.w + r * slot.cols..slot.w + (r + 1) * slot.cols];
                for (w, a) in w_row.iter().zip(&act) {
                    z.axpy(*w, a);
                }
                next.push(if l < last { z.tanh() } else { z });
            }
            std::mem::swap(&mut act, &mut next);
        }
        FieldJet {
            psi: act[0],
            rho: act[1].softplus(),
            pi: act[2],
        }
    }

    /// Head values only (`psi`, `rho`, `pi`), cheaper than a full jet.
    pub fn forward_value(&self, x: R, t: R) -> Result<[R; 3], DiffnetError> {
        if !x.is_finite() || !t.is_finite() {
            return Err(DiffnetError::NonFiniteInput { x: x.value(), t: t.value() });
        }
        let out = self.forward_value_unchecked(x, t);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(DiffnetError::NonFiniteOutput { x: x.value(), t: t.value() });
        }
        Ok(out)
    }

    pub(crate) fn forward_value_unchecked(&self, x: R, t: R) -> [R; 3] {
        let s = &self.spec;
        let slots = s.layer_offsets();
        let mut act: Vec<R> = vec![
            R::from_f64(s.x_scale) * x + R::from_f64(s.x_shift),
            R::from_f64(s.t_scale) * t + R::from_f64(s.t_shift),
        ];
        let mut next: Vec<R> = Vec::with_capacity(s.width);
        let last = slots.len() - 1;
        for (l, slot) in slots.iter().enumerate() {
            next.clear();
            for r in 0..slot.rows {
                let mut z = self.theta[slot.b + r];
                let w_row = &self.theta[slot.w + r * slot.cols..slot.w + (r + 1) * slot.cols];
                for (w, a) in w_row.iter().zip(&act) {
                    z += *w * *a;
                }
                next.push(if l < last { z.tanh() } else { z });
            }
            std::mem::swap(&mut act, &mut next);
        }
        [act[0], softplus(act[1]), act[2]]
    }

    /// The policy head value, the only field closed-loop simulation needs.
    pub fn policy(&self, x: R, t: R) -> Result<R, DiffnetError> {
        Ok(self.forward_value(x, t)?[2])
    }
}

/// Spec convenience: `init_network` for callers that have only a spec.
pub fn forward_jet<R: Scalar>(
    params: &NetworkParams<R>,
    x: R,
    t: R,
) -> Result<FieldJet<R>, DiffnetError> {
    params.forward_jet(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;

    fn small_net(seed: u64) -> NetworkParams<f64> {
        init_network(&NetworkSpec::new(2, 16, 200.0, seed)).unwrap()
    }

    #[test]
    fn param_count_matches_shape_arithmetic() {
        let spec = NetworkSpec::new(3, 70, 200.0, 0);
        // Independent summation over the layer shapes.
        let dims = [(2usize, 70usize), (70, 70), (70, 70), (70, 3)];
        let by_hand: usize = dims.iter().map(|(i, o)| i * o + o).sum();
        assert_eq!(by_hand, 10_363);
        assert_eq!(spec.param_count(), by_hand);
        assert_eq!(init_network::<f64>(&spec).unwrap().theta.len(), by_hand);
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let spec = NetworkSpec::new(2, 8, 100.0, 42);
        let a = init_network::<f64>(&spec).unwrap();
        let b = init_network::<f64>(&spec).unwrap();
        assert_eq!(a.theta, b.theta);
        let c = init_network::<f64>(&NetworkSpec { seed: 43, ..spec }).unwrap();
        assert!(a.theta.iter().zip(&c.theta).any(|(x, y)| x != y));
        // biases zero, weights within the fan-in bound
        let slots = spec.layer_offsets();
        for slot in &slots {
            let bound = 1.0 / (slot.cols as f64).sqrt();
            for r in 0..slot.rows {
                assert_eq!(a.theta[slot.b + r], 0.0);
                for c in 0..slot.cols {
                    assert!(a.theta[slot.w + r * slot.cols + c].abs() <= bound);
                }
            }
        }
    }

    #[test]
    fn zero_width_rejected() {
        assert!(init_network::<f64>(&NetworkSpec::new(2, 0, 1.0, 0)).is_err());
        assert!(init_network::<f64>(&NetworkSpec::new(0, 8, 1.0, 0)).is_err());
    }

    #[test]
    fn single_tanh_unit_jet() {
        // One hidden unit wired as y = tanh(x): value 0, slope 1, curvature 0
        // at the origin.
        let spec = NetworkSpec::new(1, 1, 1.0, 0).with_identity_scaling();
        let mut net = init_network::<f64>(&spec).unwrap();
        // layers: (2->1) then (1->3); route x through psi head untouched.
        net.theta = vec![
            1.0, 0.0, // W1 = [1, 0]
            0.0, // b1
            1.0, 0.0, 0.0, // W2 rows for psi, rho, pi
            0.0, 0.0, 0.0, // b2
        ];
        let jet = net.forward_jet(0.0, 0.5).unwrap();
        assert_abs_diff_eq!(jet.psi.value, 0.0);
        assert_abs_diff_eq!(jet.psi.d_dx, 1.0);
        assert_abs_diff_eq!(jet.psi.d_dt, 0.0);
        assert_abs_diff_eq!(jet.psi.d_dxx, 0.0, epsilon = 1e-15);
        // and away from the origin tanh facts still hold
        let jet = net.forward_jet(0.7, 0.0).unwrap();
        let th: f64 = 0.7f64.tanh();
        assert_relative_eq!(jet.psi.value, th, max_relative = 1e-15);
        assert_relative_eq!(jet.psi.d_dx, 1.0 - th * th, max_relative = 1e-14);
        assert_relative_eq!(
            jet.psi.d_dxx,
            -2.0 * th * (1.0 - th * th),
            max_relative = 1e-13
        );
    }

    #[test]
    fn affine_output_layer_jet_is_linear() {
        // With tanh in its linear regime (tiny weights) the map is almost
        // affine; the exact check is the output layer itself: psi is an
        // affine combination of hidden jets, so doubling the output weight
        // doubles every psi jet entry.
        let mut net = small_net(7);
        let jet1 = net.forward_jet(1.0, 2.0).unwrap();
        let slots = net.spec.layer_offsets();
        let out = slots.last().unwrap();
        for c in 0..out.cols {
            net.theta[out.w + c] *= 2.0; // psi row
        }
        net.theta[out.b] *= 2.0;
        let jet2 = net.forward_jet(1.0, 2.0).unwrap();
        assert_relative_eq!(jet2.psi.value, 2.0 * jet1.psi.value, max_relative = 1e-13);
        assert_relative_eq!(jet2.psi.d_dx, 2.0 * jet1.psi.d_dx, max_relative = 1e-13);
        assert_relative_eq!(jet2.psi.d_dt, 2.0 * jet1.psi.d_dt, max_relative = 1e-13);
        assert_relative_eq!(jet2.psi.d_dxx, 2.0 * jet1.psi.d_dxx, max_relative = 1e-13);
    }

    #[test]
    fn jets_match_finite_differences() {
        let net = small_net(11);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let h = 1e-4;
        let rel = |got: f64, want: f64, tol: f64| {
            assert!(
                (got - want).abs() / (want.abs() + 1e-9) < tol,
                "got {got}, fd {want}"
            );
        };
        for _ in 0..50 {
            let x = rng.gen_range(0.2..5.8);
            let t = rng.gen_range(1.0..199.0);
            let jet = net.forward_jet(x, t).unwrap();
            let value = |x: f64, t: f64| net.forward_value(x, t).unwrap();
            for (head, idx) in [(jet.psi, 0), (jet.rho, 1), (jet.pi, 2)] {
                let v0 = value(x, t)[idx];
                assert_relative_eq!(head.value, v0, max_relative = 1e-14);
                let fdx = (value(x + h, t)[idx] - value(x - h, t)[idx]) / (2.0 * h);
                rel(head.d_dx, fdx, 1e-5);
                let fdt = (value(x, t + h)[idx] - value(x, t - h)[idx]) / (2.0 * h);
                rel(head.d_dt, fdt, 1e-5);
                let fdxx = (value(x + h, t)[idx] - 2.0 * v0 + value(x - h, t)[idx]) / (h * h);
                rel(head.d_dxx, fdxx, 1e-3);
            }
        }
    }

    #[test]
    fn rho_head_is_positive_everywhere() {
        for seed in 0..5u64 {
            let net = small_net(seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 100);
            for _ in 0..100 {
                let x = rng.gen_range(-2.0..8.0);
                let t = rng.gen_range(-10.0..300.0);
                assert!(net.forward_jet(x, t).unwrap().rho.value > 0.0);
            }
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let a = small_net(3).forward_jet(1.5, 42.0).unwrap();
        let b = small_net(3).forward_jet(1.5, 42.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_params_and_inputs_error() {
        let mut net = small_net(1);
        assert!(net.forward_jet(f64::NAN, 0.0).is_err());
        assert!(net.forward_jet(0.0, f64::INFINITY).is_err());
        net.theta[5] = f64::NAN;
        assert!(matches!(
            net.validate(),
            Err(DiffnetError::NonFiniteParams { index: 5 })
        ));
        assert!(net.forward_jet(1.0, 1.0).is_err());
    }

    #[test]
    fn jet_slot_roundtrip_and_seeding() {
        let mut jet = FieldJet::<f64>::zero();
        for k in 0..JET_SLOTS {
            jet.set(k, k as f64 + 0.5);
        }
        for k in 0..JET_SLOTS {
            assert_eq!(jet.get(k), k as f64 + 0.5);
        }
        let duals = jet.seed_duals();
        for k in 0..JET_SLOTS {
            assert_eq!(duals.get(k).re, jet.get(k));
            for j in 0..JET_SLOTS {
                assert_eq!(duals.get(k).eps[j], if j == k { 1.0 } else { 0.0 });
            }
        }
    }
}
