//! Collocation sampling, residual-based adaptive refinement, and full-batch
//! Adam training of the coupled-PDE objective.
//!
//! One epoch is one full-batch gradient step over every collocation point;
//! this matches the epoch counting of the reference setup. Training stops
//! early once all five loss terms fall below `residual_target`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffnet::{
    init_network, DiffnetError, NetworkParams, NetworkSpec, Workspace,
};
use crate::landscape::LandscapeParams;
use crate::prob::{truncnorm_pdf, ProbError, TruncNormSpec};
use crate::residuals::{LossBreakdown, PdeLoss, ResidualError};
use crate::scalar::Scalar;
use crate::{DOMAIN_HI, DOMAIN_LO};

/// A boundary collocation point with its precomputed target density, so the
/// endpoint PDFs are evaluated once instead of every epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint<R> {
    pub x: R,
    pub target: R,
}

/// Interior and boundary collocation points over `[0,6] x [0,T]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollocationSet<R> {
    pub interior: Vec<(R, R)>,
    pub initial: Vec<BoundaryPoint<R>>,
    pub terminal: Vec<BoundaryPoint<R>>,
    pub t_final: R,
}

impl<R: Scalar> CollocationSet<R> {
    pub fn validate_nonempty(&self) -> Result<(), ResidualError> {
        if self.interior.is_empty() {
            return Err(ResidualError::EmptyGroup("interior"));
        }
        if self.initial.is_empty() {
            return Err(ResidualError::EmptyGroup("initial"));
        }
        if self.terminal.is_empty() {
            return Err(ResidualError::EmptyGroup("terminal"));
        }
        Ok(())
    }
}

/// Residual-based adaptive refinement settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RarConfig {
    pub enabled: bool,
    /// Refine every this many epochs.
    pub period: usize,
    /// Fresh uniform candidates scored per round.
    pub pool: usize,
    /// Top candidates appended to the interior set per round.
    pub add: usize,
}

impl Default for RarConfig {
    fn default() -> Self {
        Self { enabled: true, period: 1000, pool: 2000, add: 50 }
    }
}

/// Everything a training run needs besides the landscape constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<R> {
    pub network: NetworkSpec,
    pub n_interior: usize,
    pub n_initial: usize,
    pub n_terminal: usize,
    pub epochs: usize,
    pub learning_rate: R,
    pub beta1: R,
    pub beta2: R,
    pub epsilon: R,
    pub rar: RarConfig,
    pub seed: u64,
    pub t_final: R,
    /// Early stop once every loss term is below this.
    pub residual_target: R,
    pub rho0: TruncNormSpec<R>,
    pub rho_t: TruncNormSpec<R>,
    /// History rows are recorded every this many epochs (and on the last).
    pub log_every: usize,
    /// Checkpoint callback fires every this many epochs; 0 disables.
    pub checkpoint_every: usize,
    pub deterministic: bool,
}

impl<R: Scalar> TrainConfig<R> {
    /// The benchmark configuration: 3x70 tanh network, 5000 interior and
    /// 2x1000 boundary points over `[0,6] x [0,200]`, Adam at 1e-3,
    /// 15000 epochs, endpoint PDFs `N(0, 0.2^2)` and `N(5, 0.1^2)`
    /// truncated to `[0,6]`, residual target 1e-3.
    pub fn benchmark(seed: u64) -> Self {
        let t_final = 200.0;
        Self {
            network: NetworkSpec::new(3, 70, t_final, seed),
            n_interior: 5000,
            n_initial: 1000,
            n_terminal: 1000,
            epochs: 15_000,
            learning_rate: R::from_f64(1e-3),
            beta1: R::from_f64(0.9),
            beta2: R::from_f64(0.999),
            epsilon: R::from_f64(1e-8),
            rar: RarConfig::default(),
            seed,
            t_final: R::from_f64(t_final),
            residual_target: R::from_f64(1e-3),
            rho0: TruncNormSpec {
                mu: R::zero(),
                sigma: R::from_f64(0.2),
                lo: R::from_f64(DOMAIN_LO),
                hi: R::from_f64(DOMAIN_HI),
            },
            rho_t: TruncNormSpec {
                mu: R::from_f64(5.0),
                sigma: R::from_f64(0.1),
                lo: R::from_f64(DOMAIN_LO),
                hi: R::from_f64(DOMAIN_HI),
            },
            log_every: 1,
            checkpoint_every: 1000,
            deterministic: true,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError<R>> {
        self.network.validate()?;
        if self.epochs == 0 {
            return Err(TrainError::Invalid("epochs must be >= 1".into()));
        }
        if !(self.learning_rate.value() > 0.0) {
            return Err(TrainError::Invalid("learning rate must be positive".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b.value() > 0.0 && b.value() < 1.0) {
                return Err(TrainError::Invalid(format!("{name} must lie in (0, 1)")));
            }
        }
        if !(self.t_final.value() > 0.0) {
            return Err(TrainError::Invalid("t_final must be positive".into()));
        }
        if self.n_interior == 0 || self.n_initial == 0 || self.n_terminal == 0 {
            return Err(TrainError::Invalid("collocation counts must be positive".into()));
        }
        if self.log_every == 0 {
            return Err(TrainError::Invalid("log_every must be >= 1".into()));
        }
        self.rho0.validate()?;
        self.rho_t.validate()?;
        Ok(())
    }
}

/// Adam moment vectors and step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<R> {
    pub m: Vec<R>,
    pub v: Vec<R>,
    pub step: u64,
}

impl<R: Scalar> AdamState<R> {
    pub fn new(dim: usize) -> Self {
        Self { m: vec![R::zero(); dim], v: vec![R::zero(); dim], step: 0 }
    }
}

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamHyper<R> {
    pub learning_rate: R,
    pub beta1: R,
    pub beta2: R,
    pub epsilon: R,
}

#[derive(Debug, Error)]
pub enum TrainError<R: Scalar> {
    #[error("invalid training config: {0}")]
    Invalid(String),
    #[error("non-finite gradient at coordinate {index}")]
    NonFiniteGradient { index: usize },
    #[error("training diverged at epoch {epoch}: {reason}; last finite parameters retained")]
    Diverged {
        epoch: usize,
        reason: String,
        last_good: Box<NetworkParams<R>>,
        history: Vec<EpochRecord<R>>,
    },
    #[error(transparent)]
    Net(#[from] DiffnetError),
    #[error(transparent)]
    Residual(#[from] ResidualError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// One logged training epoch: the loss of the parameters entering the epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord<R> {
    pub epoch: usize,
    pub loss: LossBreakdown<R>,
    pub elapsed_s: f64,
}

/// Result of a completed training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome<R> {
    pub net: NetworkParams<R>,
    pub history: Vec<EpochRecord<R>>,
    /// Whether the residual target stopped training before the epoch budget.
    pub converged: bool,
    pub epochs_run: usize,
}

/// Training event sink (history streaming, periodic checkpoints).
pub trait TrainObserver<R: Scalar> {
    fn on_epoch(&mut self, _rec: &EpochRecord<R>) {}
    fn on_checkpoint(&mut self, _net: &NetworkParams<R>, _epoch: usize) {}
}

/// No-op observer.
pub struct NoObserver;
impl<R: Scalar> TrainObserver<R> for NoObserver {}

// RNG stream tags; every consumer of `config.seed` gets its own stream.
const STREAM_COLLOCATION: u64 = 1;
const STREAM_RAR_BASE: u64 = 100;

/// Deterministic collocation sampling: interior points uniform over the
/// open domain, boundary points uniform in `x` on each time line, with the
/// endpoint target densities attached.
pub fn sample_collocation<R: Scalar>(
    config: &TrainConfig<R>,
) -> Result<CollocationSet<R>, TrainError<R>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(STREAM_COLLOCATION);
    let t_final = config.t_final;

    let interior = (0..config.n_interior)
        .map(|_| {
            (
                R::from_f64(rng.gen_range(DOMAIN_LO..DOMAIN_HI)),
                R::from_f64(rng.gen_range(0.0..1.0)) * t_final,
            )
        })
        .collect();
    let mut boundary = |n: usize, spec: &TruncNormSpec<R>, rng: &mut ChaCha8Rng| {
        (0..n)
            .map(|_| {
                let x = R::from_f64(rng.gen_range(DOMAIN_LO..DOMAIN_HI));
                BoundaryPoint { x, target: truncnorm_pdf(x, spec) }
            })
            .collect::<Vec<_>>()
    };
    let initial = boundary(config.n_initial, &config.rho0, &mut rng);
    let terminal = boundary(config.n_terminal, &config.rho_t, &mut rng);
    Ok(CollocationSet { interior, initial, terminal, t_final })
}

/// The fresh uniform candidate pool scored in refinement round `round`
/// (1-based). Deterministic in `(seed, round)`.
pub fn rar_candidate_pool<R: Scalar>(config: &TrainConfig<R>, round: u64) -> Vec<(R, R)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(STREAM_RAR_BASE + round);
    (0..config.rar.pool)
        .map(|_| {
            (
                R::from_f64(rng.gen_range(DOMAIN_LO..DOMAIN_HI)),
                R::from_f64(rng.gen_range(0.0..1.0)) * config.t_final,
            )
        })
        .collect()
}

/// Summed PDE residual magnitude `|hjb| + |fpk| + |policy|` per point.
pub fn interior_residual_magnitudes<R: Scalar>(
    ws: &mut Workspace<R>,
    net: &NetworkParams<R>,
    points: &[(R, R)],
    p: &LandscapeParams<R>,
) -> Result<Vec<R>, DiffnetError> {
    let jets = ws.batch_jets(net, points)?;
    Ok(jets
        .iter()
        .zip(points)
        .map(|(jet, &(x, _))| {
            let [h, f, pol] = crate::residuals::interior_residuals(jet, x, p);
            h.abs() + f.abs() + pol.abs()
        })
        .collect())
}

/// Residual-based adaptive refinement: scores a fresh uniform candidate
/// pool under the current parameters and appends the `add` worst candidates
/// to the interior set. Boundary groups are never touched.
pub fn adaptive_refine<R: Scalar>(
    net: &NetworkParams<R>,
    config: &TrainConfig<R>,
    current: &CollocationSet<R>,
    round: u64,
    p: &LandscapeParams<R>,
) -> Result<CollocationSet<R>, TrainError<R>> {
    let mut refined = current.clone();
    if !config.rar.enabled || config.rar.add == 0 || config.rar.pool == 0 {
        return Ok(refined);
    }
    let pool = rar_candidate_pool(config, round);
    let mut ws = Workspace::new();
    let mags = interior_residual_magnitudes(&mut ws, net, &pool, p)?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| mags[b].partial_cmp(&mags[a]).unwrap().then(a.cmp(&b)));
    refined
        .interior
        .extend(order.iter().take(config.rar.add).map(|&i| pool[i]));
    Ok(refined)
}

/// One bias-corrected Adam update, in place. Deterministic; errors on a
/// non-finite gradient without touching the state.
pub fn adam_step<R: Scalar>(
    state: &mut AdamState<R>,
    params: &mut [R],
    grad: &[R],
    hyper: &AdamHyper<R>,
) -> Result<(), TrainError<R>> {
    assert_eq!(params.len(), grad.len(), "shape mismatch");
    assert_eq!(params.len(), state.m.len(), "state shape mismatch");
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(TrainError::NonFiniteGradient { index });
    }
    state.step += 1;
    let one = R::one();
    let t = state.step as i32;
    let bc1 = one - hyper.beta1.powi(t);
    let bc2 = one - hyper.beta2.powi(t);
    for i in 0..params.len() {
        let g = grad[i];
        state.m[i] = hyper.beta1 * state.m[i] + (one - hyper.beta1) * g;
        state.v[i] = hyper.beta2 * state.v[i] + (one - hyper.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= hyper.learning_rate * m_hat / (v_hat.sqrt() + hyper.epsilon);
    }
    Ok(())
}

/// Full training run with the default (no-op) observer.
pub fn train<R: Scalar>(
    config: &TrainConfig<R>,
    p: &LandscapeParams<R>,
) -> Result<TrainOutcome<R>, TrainError<R>> {
    train_observed(config, p, &mut NoObserver)
}

/// Full-batch Adam training of the five-term objective.
///
/// Per epoch: (periodically) refine the interior set, evaluate the loss and
/// its exact gradient over every collocation point, and apply one Adam
/// step. The recorded loss of an epoch is that of the parameters entering
/// it. On divergence the last finite parameters and the history so far ride
/// along in the error.
pub fn train_observed<R: Scalar>(
    config: &TrainConfig<R>,
    p: &LandscapeParams<R>,
    observer: &mut impl TrainObserver<R>,
) -> Result<TrainOutcome<R>, TrainError<R>> {
    config.validate()?;
    let mut net = init_network::<R>(&config.network)?;
    let mut colloc = sample_collocation(config)?;
    colloc.validate_nonempty()?;

    let hyper = AdamHyper {
        learning_rate: config.learning_rate,
        beta1: config.beta1,
        beta2: config.beta2,
        epsilon: config.epsilon,
    };
    let mut adam = AdamState::new(net.param_count());
    let mut ws = Workspace::new();
    let mut history: Vec<EpochRecord<R>> = Vec::new();
    let start = Instant::now();
    let mut converged = false;
    let mut epochs_run = 0;
    let mut round = 0u64;
    // Parameters of the newest epoch whose loss evaluated finite.
    let mut last_good = net.clone();

    for epoch in 1..=config.epochs {
        epochs_run = epoch;
        if config.rar.enabled
            && config.rar.period > 0
            && epoch > 1
            && (epoch - 1) % config.rar.period == 0
        {
            round += 1;
            colloc = adaptive_refine(&net, config, &colloc, round, p)?;
        }

        let loss = PdeLoss::new(&colloc, p);
        let (buckets, grad) = match ws.loss_gradient(&net, &loss) {
            Ok(ok) => ok,
            Err(err) => {
                return Err(TrainError::Diverged {
                    epoch,
                    reason: err.to_string(),
                    last_good: Box::new(last_good),
                    history,
                });
            }
        };
        last_good.theta.copy_from_slice(&net.theta);
        let breakdown = LossBreakdown::from_buckets(buckets);

        if epoch % config.log_every == 0 || epoch == config.epochs {
            let rec = EpochRecord {
                epoch,
                loss: breakdown,
                elapsed_s: start.elapsed().as_secs_f64(),
            };
            observer.on_epoch(&rec);
            history.push(rec);
        }

        if breakdown.max_term() < config.residual_target {
            converged = true;
            // Make sure the stopping epoch is in the history even off-cadence.
            if history.last().map(|r| r.epoch) != Some(epoch) {
                let rec = EpochRecord {
                    epoch,
                    loss: breakdown,
                    elapsed_s: start.elapsed().as_secs_f64(),
                };
                observer.on_epoch(&rec);
                history.push(rec);
            }
            break;
        }

        if let Err(err) = adam_step(&mut adam, &mut net.theta, &grad, &hyper) {
            return Err(TrainError::Diverged {
                epoch,
                reason: err.to_string(),
                last_good: Box::new(last_good),
                history,
            });
        }

        if config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0 {
            observer.on_checkpoint(&net, epoch);
        }
    }

    observer.on_checkpoint(&net, epochs_run);
    Ok(TrainOutcome { net, history, converged, epochs_run })
}
