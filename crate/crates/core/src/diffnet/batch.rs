//! Batched jet propagation and reverse-mode parameter gradients.
//!
//! A batch of points is laid out as a matrix whose columns are jet
//! components: every collocation point contributes a `[value, d/dx, d/dt,
//! d2/dx2]` column group (or a single value column when no derivatives are
//! needed, e.g. boundary points). All four jet components transform
//! identically under an affine layer, so each layer is one GEMM over the
//! whole batch; only the activations mix components within a column group.
//!
//! The reverse pass mirrors this: adjoints of the head jets are scattered
//! into an output-adjoint matrix, pushed back through the activation
//! transforms in closed form, and the weight gradients accumulate via
//! GEMMs against the cached activations. Points are reduced in index order,
//! so results are independent of any execution interleaving.

use super::{
    sigmoid, softplus, DiffnetError, FieldJet, HeadJet, NetworkParams, NET_INPUTS, NET_OUTPUTS,
};
use crate::scalar::Scalar;

/// Number of accounting buckets a batch loss may split its value into
/// (the five-term PDE/boundary breakdown uses all of them).
pub const LOSS_BUCKETS: usize = 5;

/// A differentiable batch objective: a scalar function of the network jets
/// at a set of points, reported per accounting bucket.
pub trait BatchLoss<R: Scalar>: Sync {
    fn len(&self) -> usize;
    /// Unscaled `(x, t)` of point `i`.
    fn point(&self, i: usize) -> (R, R);
    /// Whether point `i` needs input derivatives. When `false`, the jet
    /// passed to [`BatchLoss::contribution`] carries values only (derivative
    /// slots zero) and the returned adjoint must only seed value slots.
    fn needs_jet(&self, _i: usize) -> bool {
        true
    }
    /// Per-bucket loss contribution of point `i` and the adjoint
    /// `d(contribution)/d(jet)` used by the reverse pass.
    fn contribution(&self, i: usize, jet: &FieldJet<R>) -> ([R; LOSS_BUCKETS], FieldJet<R>);
}

/// Row-major matrix buffer that keeps its allocation across reuse.
struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Scalar> Mat<R> {
    fn empty() -> Self {
        Self { rows: 0, cols: 0, data: Vec::new() }
    }

    fn reset(&mut self, rows: usize, cols: usize) {
        self.rows = rows;
        self.cols = cols;
        self.data.clear();
        self.data.resize(rows * cols, R::zero());
    }

    #[inline]
    fn row(&self, r: usize) -> &[R] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    fn row_mut(&mut self, r: usize) -> &mut [R] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

enum Pass {
    /// 4 columns per point: value, d/dx, d/dt, d2/dx2.
    Jets,
    /// 1 column per point.
    Values,
}

impl Pass {
    fn group(&self) -> usize {
        match self {
            Pass::Jets => 4,
            Pass::Values => 1,
        }
    }
}

/// Reusable buffers for batched forward/backward passes. Create once and
/// reuse across epochs; all methods leave the buffers ready for the next
/// call.
pub struct Workspace<R> {
    a0: Mat<R>,
    /// Pre-activations per affine layer; the last one is the raw head output.
    z: Vec<Mat<R>>,
    /// Post-tanh activations per hidden layer.
    act: Vec<Mat<R>>,
    ybar: Mat<R>,
    ping: Mat<R>,
    pong: Mat<R>,
}

impl<R: Scalar> Default for Workspace<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Scalar> Workspace<R> {
    pub fn new() -> Self {
        Self {
            a0: Mat::empty(),
            z: Vec::new(),
            act: Vec::new(),
            ybar: Mat::empty(),
            ping: Mat::empty(),
            pong: Mat::empty(),
        }
    }

    /// Jet forward for a whole batch; one `FieldJet` per point.
    pub fn batch_jets(
        &mut self,
        net: &NetworkParams<R>,
        points: &[(R, R)],
    ) -> Result<Vec<FieldJet<R>>, DiffnetError> {
        net.validate()?;
        self.forward(net, points, &Pass::Jets)?;
        Ok((0..points.len()).map(|i| self.jet_at(i, &Pass::Jets)).collect())
    }

    /// Value-only forward for a whole batch; `[psi, rho, pi]` per point.
    pub fn batch_values(
        &mut self,
        net: &NetworkParams<R>,
        points: &[(R, R)],
    ) -> Result<Vec<[R; 3]>, DiffnetError> {
        net.validate()?;
        self.forward(net, points, &Pass::Values)?;
        Ok((0..points.len())
            .map(|i| {
                let j = self.jet_at(i, &Pass::Values);
                [j.psi.value, j.rho.value, j.pi.value]
            })
            .collect())
    }

    /// Loss value per bucket, no gradient.
    pub fn loss_terms(
        &mut self,
        net: &NetworkParams<R>,
        loss: &impl BatchLoss<R>,
    ) -> Result<[R; LOSS_BUCKETS], DiffnetError> {
        net.validate()?;
        let (buckets, _) = self.run(net, loss, false)?;
        Ok(buckets)
    }

    /// Loss value per bucket and its exact gradient with respect to every
    /// network parameter. Points are reduced in index order (jet points
    /// first, then value-only points), so reruns are bit-identical.
    pub fn loss_gradient(
        &mut self,
        net: &NetworkParams<R>,
        loss: &impl BatchLoss<R>,
    ) -> Result<([R; LOSS_BUCKETS], Vec<R>), DiffnetError> {
        net.validate()?;
        let (buckets, grad) = self.run(net, loss, true)?;
        Ok((buckets, grad.expect("gradient requested")))
    }

    fn run(
        &mut self,
        net: &NetworkParams<R>,
        loss: &impl BatchLoss<R>,
        with_grad: bool,
    ) -> Result<([R; LOSS_BUCKETS], Option<Vec<R>>), DiffnetError> {
        let n = loss.len();
        let jet_idx: Vec<usize> = (0..n).filter(|&i| loss.needs_jet(i)).collect();
        let val_idx: Vec<usize> = (0..n).filter(|&i| !loss.needs_jet(i)).collect();

        let mut buckets = [R::zero(); LOSS_BUCKETS];
        let mut grad = with_grad.then(|| vec![R::zero(); net.param_count()]);

        for (idx, pass) in [(&jet_idx, Pass::Jets), (&val_idx, Pass::Values)] {
            if idx.is_empty() {
                continue;
            }
            let points: Vec<(R, R)> = idx.iter().map(|&i| loss.point(i)).collect();
            self.forward(net, &points, &pass)?;
            self.ybar.reset(NET_OUTPUTS, points.len() * pass.group());
            for (col, &i) in idx.iter().enumerate() {
                let jet = self.jet_at(col, &pass);
                let (parts, adj) = loss.contribution(i, &jet);
                for (b, p) in buckets.iter_mut().zip(parts) {
                    if !p.is_finite() {
                        let (x, t) = loss.point(i);
                        return Err(DiffnetError::NonFiniteLoss {
                            index: i,
                            x: x.value(),
                            t: t.value(),
                        });
                    }
                    *b += p;
                }
                if with_grad {
                    self.scatter_adjoint(col, &adj, &pass);
                }
            }
            if let Some(g) = grad.as_deref_mut() {
                self.backward(net, &pass, g);
            }
        }
        Ok((buckets, grad))
    }

    fn forward(
        &mut self,
        net: &NetworkParams<R>,
        points: &[(R, R)],
        pass: &Pass,
    ) -> Result<(), DiffnetError> {
        for &(x, t) in points {
            if !x.is_finite() || !t.is_finite() {
                return Err(DiffnetError::NonFiniteInput { x: x.value(), t: t.value() });
            }
        }
        let g = pass.group();
        let cols = points.len() * g;
        let spec = &net.spec;
        let (xs, xo) = (R::from_f64(spec.x_scale), R::from_f64(spec.x_shift));
        let (ts, to) = (R::from_f64(spec.t_scale), R::from_f64(spec.t_shift));

        self.a0.reset(NET_INPUTS, cols);
        for (i, &(x, t)) in points.iter().enumerate() {
            let c = i * g;
            self.a0.row_mut(0)[c] = xs * x + xo;
            self.a0.row_mut(1)[c] = ts * t + to;
            if matches!(pass, Pass::Jets) {
                self.a0.row_mut(0)[c + 1] = xs;
                self.a0.row_mut(1)[c + 2] = ts;
            }
        }

        let slots = spec.layer_offsets();
        let hidden = slots.len() - 1;
        self.z.resize_with(slots.len(), Mat::empty);
        self.act.resize_with(hidden, Mat::empty);

        for (l, slot) in slots.iter().enumerate() {
            let w = &net.theta[slot.w..slot.w + slot.rows * slot.cols];
            let b = &net.theta[slot.b..slot.b + slot.rows];
            let z = &mut self.z[l];
            z.reset(slot.rows, cols);
            {
                let src = if l == 0 { &self.a0 } else { &self.act[l - 1] };
                R::gemm(
                    false, false, slot.rows, cols, slot.cols,
                    R::one(), w, &src.data, R::zero(), &mut z.data,
                );
            }
            for r in 0..slot.rows {
                let row = z.row_mut(r);
                let mut c = 0;
                while c < cols {
                    row[c] += b[r];
                    c += g;
                }
            }
            if l < hidden {
                let a = &mut self.act[l];
                a.reset(slot.rows, cols);
                match pass {
                    Pass::Values => {
                        for r in 0..slot.rows {
                            for (av, zv) in a.row_mut(r).iter_mut().zip(z.row(r)) {
                                *av = zv.tanh();
                            }
                        }
                    }
                    Pass::Jets => {
                        let two = R::from_f64(2.0);
                        for r in 0..slot.rows {
                            let zr = z.row(r);
                            let ar = a.row_mut(r);
                            let mut c = 0;
                            while c < cols {
                                let th = zr[c].tanh();
                                let p = R::one() - th * th;
                                let q = -two * th * p;
                                ar[c] = th;
                                ar[c + 1] = p * zr[c + 1];
                                ar[c + 2] = p * zr[c + 2];
                                ar[c + 3] = p * zr[c + 3] + q * zr[c + 1] * zr[c + 1];
                                c += 4;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Head jets of batch point `i` from the raw output matrix.
    fn jet_at(&self, i: usize, pass: &Pass) -> FieldJet<R> {
        let y = self.z.last().expect("forward ran");
        let g = pass.group();
        let c = i * g;
        let pick = |r: usize| -> HeadJet<R> {
            let row = y.row(r);
            match pass {
                Pass::Values => HeadJet::constant(row[c]),
                Pass::Jets => HeadJet {
                    value: row[c],
                    d_dx: row[c + 1],
                    d_dt: row[c + 2],
                    d_dxx: row[c + 3],
                },
            }
        };
        FieldJet {
            psi: pick(0),
            rho: match pass {
                Pass::Values => HeadJet::constant(softplus(pick(1).value)),
                Pass::Jets => pick(1).softplus(),
            },
            pi: pick(2),
        }
    }

    /// Writes the head adjoints of point `i` into the raw-output adjoint
    /// matrix, back through the rho softplus.
    fn scatter_adjoint(&mut self, i: usize, adj: &FieldJet<R>, pass: &Pass) {
        let g = pass.group();
        let c = i * g;
        let y = self.z.last().expect("forward ran");
        let (yv, yx, yt, yxx) = {
            let row = y.row(1);
            match pass {
                Pass::Values => (row[c], R::zero(), R::zero(), R::zero()),
                Pass::Jets => (row[c], row[c + 1], row[c + 2], row[c + 3]),
            }
        };
        // softplus backward: sg' = sg(1-sg), sg'' = sg'(1-2sg)
        let one = R::one();
        let sg = sigmoid(yv);
        let dsg = sg * (one - sg);
        let ddsg = dsg * (one - R::from_f64(2.0) * sg);
        let rb = &adj.rho;
        let rho_bar = [
            rb.value * sg
                + rb.d_dx * dsg * yx
                + rb.d_dt * dsg * yt
                + rb.d_dxx * (dsg * yxx + ddsg * yx * yx),
            rb.d_dx * sg + rb.d_dxx * R::from_f64(2.0) * dsg * yx,
            rb.d_dt * sg,
            rb.d_dxx * sg,
        ];

        match pass {
            Pass::Values => {
                debug_assert!(
                    [&adj.psi, &adj.rho, &adj.pi]
                        .iter()
                        .all(|h| h.d_dx.is_zero() && h.d_dt.is_zero() && h.d_dxx.is_zero()),
                    "value-only point seeded derivative adjoints"
                );
                self.ybar.row_mut(0)[c] = adj.psi.value;
                self.ybar.row_mut(1)[c] = rho_bar[0];
                self.ybar.row_mut(2)[c] = adj.pi.value;
            }
            Pass::Jets => {
                let psi = [adj.psi.value, adj.psi.d_dx, adj.psi.d_dt, adj.psi.d_dxx];
                let pi = [adj.pi.value, adj.pi.d_dx, adj.pi.d_dt, adj.pi.d_dxx];
                for k in 0..4 {
                    self.ybar.row_mut(0)[c + k] = psi[k];
                    self.ybar.row_mut(1)[c + k] = rho_bar[k];
                    self.ybar.row_mut(2)[c + k] = pi[k];
                }
            }
        }
    }

    /// Reverse pass: consumes `self.ybar`, accumulates into `grad`.
    fn backward(&mut self, net: &NetworkParams<R>, pass: &Pass, grad: &mut [R]) {
        let g = pass.group();
        let slots = net.spec.layer_offsets();
        let hidden = slots.len() - 1;
        let cols = self.ybar.cols;

        // Output layer: gradient and adjoint of the last hidden activation.
        let out = &slots[hidden];
        {
            let src = if hidden == 0 { &self.a0 } else { &self.act[hidden - 1] };
            R::gemm(
                false, true, out.rows, out.cols, cols,
                R::one(), &self.ybar.data, &src.data,
                R::one(), &mut grad[out.w..out.w + out.rows * out.cols],
            );
            for r in 0..out.rows {
                let mut acc = R::zero();
                let row = self.ybar.row(r);
                let mut c = 0;
                while c < cols {
                    acc += row[c];
                    c += g;
                }
                grad[out.b + r] += acc;
            }
        }
        if hidden == 0 {
            return;
        }
        self.ping.reset(out.cols, cols);
        let w_out = &net.theta[out.w..out.w + out.rows * out.cols];
        R::gemm(
            true, false, out.cols, cols, out.rows,
            R::one(), w_out, &self.ybar.data, R::zero(), &mut self.ping.data,
        );

        for l in (0..hidden).rev() {
            // ping holds the adjoint of act[l]; turn it into the adjoint of
            // z[l] in place.
            let two = R::from_f64(2.0);
            let z = &self.z[l];
            let a = &self.act[l];
            for r in 0..z.rows {
                let zr = z.row(r);
                let ar = a.row(r);
                let br = self.ping.row_mut(r);
                match pass {
                    Pass::Values => {
                        for c in 0..cols {
                            let v = ar[c];
                            br[c] *= R::one() - v * v;
                        }
                    }
                    Pass::Jets => {
                        let mut c = 0;
                        while c < cols {
                            let v = ar[c];
                            let p = R::one() - v * v;
                            let q = -two * v * p;
                            let rr = -two * (p * p + v * q);
                            let (av, ax, at, axx) = (br[c], br[c + 1], br[c + 2], br[c + 3]);
                            br[c] = av * p
                                + ax * q * zr[c + 1]
                                + at * q * zr[c + 2]
                                + axx * (q * zr[c + 3] + rr * zr[c + 1] * zr[c + 1]);
                            br[c + 1] = ax * p + axx * two * q * zr[c + 1];
                            br[c + 2] = at * p;
                            br[c + 3] = axx * p;
                            c += 4;
                        }
                    }
                }
            }

            let slot = &slots[l];
            let src = if l == 0 { &self.a0 } else { &self.act[l - 1] };
            R::gemm(
                false, true, slot.rows, slot.cols, cols,
                R::one(), &self.ping.data, &src.data,
                R::one(), &mut grad[slot.w..slot.w + slot.rows * slot.cols],
            );
            for r in 0..slot.rows {
                let mut acc = R::zero();
                let row = self.ping.row(r);
                let mut c = 0;
                while c < cols {
                    acc += row[c];
                    c += g;
                }
                grad[slot.b + r] += acc;
            }
            if l > 0 {
                self.pong.reset(slot.cols, cols);
                let w = &net.theta[slot.w..slot.w + slot.rows * slot.cols];
                R::gemm(
                    true, false, slot.cols, cols, slot.rows,
                    R::one(), w, &self.ping.data, R::zero(), &mut self.pong.data,
                );
                std::mem::swap(&mut self.ping, &mut self.pong);
            }
        }
    }
}

/// One-shot [`Workspace::loss_gradient`]; training loops should hold a
/// workspace instead.
pub fn loss_gradient<R: Scalar>(
    net: &NetworkParams<R>,
    loss: &impl BatchLoss<R>,
) -> Result<([R; LOSS_BUCKETS], Vec<R>), DiffnetError> {
    Workspace::new().loss_gradient(net, loss)
}

/// One-shot [`Workspace::loss_terms`].
pub fn loss_terms<R: Scalar>(
    net: &NetworkParams<R>,
    loss: &impl BatchLoss<R>,
) -> Result<[R; LOSS_BUCKETS], DiffnetError> {
    Workspace::new().loss_terms(net, loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffnet::{init_network, NetworkSpec, JET_SLOTS};
    use crate::scalar::Dual;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn net(seed: u64) -> NetworkParams<f64> {
        init_network(&NetworkSpec::new(2, 16, 200.0, seed)).unwrap()
    }

    fn rand_points(n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (rng.gen_range(0.0..6.0), rng.gen_range(0.0..200.0)))
            .collect()
    }

    #[test]
    fn batch_jets_match_per_point_forward() {
        let net = net(1);
        let pts = rand_points(37, 2);
        let jets = Workspace::new().batch_jets(&net, &pts).unwrap();
        for (jet, &(x, t)) in jets.iter().zip(&pts) {
            let single = net.forward_jet(x, t).unwrap();
            for k in 0..JET_SLOTS {
                assert_relative_eq!(jet.get(k), single.get(k), max_relative = 1e-12, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn batch_values_match_per_point_forward() {
        let net = net(3);
        let pts = rand_points(23, 4);
        let vals = Workspace::new().batch_values(&net, &pts).unwrap();
        for (v, &(x, t)) in vals.iter().zip(&pts) {
            let single = net.forward_value(x, t).unwrap();
            for k in 0..3 {
                assert_relative_eq!(v[k], single[k], max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    /// Loss touching one head value at one point: the gradient must equal
    /// the gradient of a plain forward pass.
    struct PsiAt {
        x: f64,
        t: f64,
    }
    impl BatchLoss<f64> for PsiAt {
        fn len(&self) -> usize {
            1
        }
        fn point(&self, _i: usize) -> (f64, f64) {
            (self.x, self.t)
        }
        fn contribution(&self, _i: usize, jet: &FieldJet<f64>) -> ([f64; 5], FieldJet<f64>) {
            let mut adj = FieldJet::zero();
            adj.psi.value = 1.0;
            ([jet.psi.value, 0.0, 0.0, 0.0, 0.0], adj)
        }
    }

    #[test]
    fn psi_value_gradient_matches_finite_differences() {
        let net0 = net(5);
        let loss = PsiAt { x: 2.5, t: 80.0 };
        let (buckets, grad) = loss_gradient(&net0, &loss).unwrap();
        assert_relative_eq!(
            buckets[0],
            net0.forward_value(2.5, 80.0).unwrap()[0],
            max_relative = 1e-12
        );
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..25 {
            let i = rng.gen_range(0..net0.theta.len());
            let h = 1e-6 * net0.theta[i].abs().max(1.0);
            let mut plus = net0.clone();
            plus.theta[i] += h;
            let mut minus = net0.clone();
            minus.theta[i] -= h;
            let fd = (plus.forward_value(2.5, 80.0).unwrap()[0]
                - minus.forward_value(2.5, 80.0).unwrap()[0])
                / (2.0 * h);
            assert_relative_eq!(grad[i], fd, max_relative = 2e-4, epsilon = 1e-10);
        }
    }

    /// Dead-path check: a psi-only loss must put exactly zero gradient on the
    /// output rows feeding the rho and pi heads.
    #[test]
    fn unused_heads_get_zero_gradient() {
        let net0 = net(6);
        let (_, grad) = loss_gradient(&net0, &PsiAt { x: 1.0, t: 10.0 }).unwrap();
        let slots = net0.spec.layer_offsets();
        let out = slots.last().unwrap();
        for head in 1..3 {
            for c in 0..out.cols {
                assert_eq!(grad[out.w + head * out.cols + c], 0.0);
            }
            assert_eq!(grad[out.b + head], 0.0);
        }
        // and the psi row is not all zero
        assert!((0..out.cols).any(|c| grad[out.w + c] != 0.0));
    }

    /// A synthetic loss touching all twelve jet slots, seeded through dual
    /// numbers exactly the way the PDE residuals are.
    struct AllSlots {
        pts: Vec<(f64, f64)>,
        values_only: bool,
    }
    impl BatchLoss<f64> for AllSlots {
        fn len(&self) -> usize {
            self.pts.len()
        }
        fn point(&self, i: usize) -> (f64, f64) {
            self.pts[i]
        }
        fn needs_jet(&self, _i: usize) -> bool {
            !self.values_only
        }
        fn contribution(&self, _i: usize, jet: &FieldJet<f64>) -> ([f64; 5], FieldJet<f64>) {
            let d = jet.seed_duals();
            let n = Dual::from_f64(self.pts.len() as f64);
            let val = if self.values_only {
                (d.psi.value * d.rho.value + d.pi.value.tanh()).powi(2) / n
            } else {
                let r1 = d.psi.value * d.rho.d_dx - d.pi.d_dxx + d.psi.d_dt * d.rho.d_dt;
                let r2 = d.psi.d_dx.tanh() + d.rho.value.ln() * d.pi.d_dx
                    - d.psi.d_dxx * d.pi.d_dt
                    + d.rho.d_dxx;
                (r1 * r1 + r2 * r2) / n
            };
            let mut adj = FieldJet::zero();
            for k in 0..JET_SLOTS {
                adj.set(k, val.eps[k]);
            }
            ([val.re, 0.0, 0.0, 0.0, 0.0], adj)
        }
    }

    #[test]
    fn jet_loss_gradient_matches_finite_differences() {
        for values_only in [false, true] {
            let net0 = net(7);
            let loss = AllSlots { pts: rand_points(10, 8), values_only };
            let (buckets, grad) = loss_gradient(&net0, &loss).unwrap();
            assert!(buckets[0].is_finite());
            let mut ws = Workspace::new();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
            for _ in 0..25 {
                let i = rng.gen_range(0..net0.theta.len());
                let h = 1e-6 * net0.theta[i].abs().max(1.0);
                let mut plus = net0.clone();
                plus.theta[i] += h;
                let mut minus = net0.clone();
                minus.theta[i] -= h;
                let fd = (ws.loss_terms(&plus, &loss).unwrap()[0]
                    - ws.loss_terms(&minus, &loss).unwrap()[0])
                    / (2.0 * h);
                assert_relative_eq!(grad[i], fd, max_relative = 1e-4, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn gradient_is_deterministic_across_reruns() {
        let net0 = net(11);
        let loss = AllSlots { pts: rand_points(33, 12), values_only: false };
        let (b1, g1) = loss_gradient(&net0, &loss).unwrap();
        let (b2, g2) = Workspace::new().loss_gradient(&net0, &loss).unwrap();
        assert_eq!(b1, b2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn empty_batch_is_fine() {
        let net0 = net(13);
        let loss = AllSlots { pts: vec![], values_only: false };
        let (buckets, grad) = loss_gradient(&net0, &loss).unwrap();
        assert_eq!(buckets, [0.0; 5]);
        assert!(grad.iter().all(|&g| g == 0.0));
    }
}
