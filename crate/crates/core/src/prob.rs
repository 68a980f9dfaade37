//! Endpoint distributions and verification statistics: truncated normal
//! PDFs/CDFs, Metropolis-Hastings sampling, Gaussian kernel density
//! estimation, and distribution distances (Wasserstein-1, Kolmogorov-
//! Smirnov).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ProbError {
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("truncation bounds must satisfy lo < hi, got [{lo}, {hi}]")]
    BadBounds { lo: f64, hi: f64 },
    #[error("need at least one sample")]
    Empty,
    #[error("bandwidth must be positive, got {0}")]
    BadBandwidth(f64),
}

/// Normal PDF of the standard Gaussian.
#[inline]
pub fn std_normal_pdf<R: Scalar>(z: R) -> R {
    let inv_sqrt_2pi = R::from_f64(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-(z * z) * R::from_f64(0.5)).exp()
}

/// Normal CDF of the standard Gaussian, via the complementary error
/// function for tail accuracy.
#[inline]
pub fn std_normal_cdf<R: Scalar>(z: R) -> R {
    let half = R::from_f64(0.5);
    half * (-z * R::from_f64(std::f64::consts::FRAC_1_SQRT_2)).erfc()
}

/// Normal distribution truncated to `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncNormSpec<R> {
    pub mu: R,
    pub sigma: R,
    pub lo: R,
    pub hi: R,
}

impl<R: Scalar> TruncNormSpec<R> {
    pub fn new(mu: R, sigma: R, lo: R, hi: R) -> Result<Self, ProbError> {
        let spec = Self { mu, sigma, lo, hi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ProbError> {
        if !(self.sigma.value() > 0.0) {
            return Err(ProbError::NonPositiveSigma(self.sigma.value()));
        }
        if !(self.lo.value() < self.hi.value()) {
            return Err(ProbError::BadBounds {
                lo: self.lo.value(),
                hi: self.hi.value(),
            });
        }
        Ok(())
    }

    /// Normalizing mass `Phi(beta) - Phi(alpha)` of the parent normal on the
    /// truncation window.
    fn window_mass(&self) -> R {
        let alpha = (self.lo - self.mu) / self.sigma;
        let beta = (self.hi - self.mu) / self.sigma;
        std_normal_cdf(beta) - std_normal_cdf(alpha)
    }

    /// Mean of the truncated distribution (closed form).
    pub fn mean(&self) -> R {
        let alpha = (self.lo - self.mu) / self.sigma;
        let beta = (self.hi - self.mu) / self.sigma;
        self.mu + self.sigma * (std_normal_pdf(alpha) - std_normal_pdf(beta)) / self.window_mass()
    }
}

/// Truncated normal density: `phi((x-mu)/sigma) / (sigma * window)` inside
/// `[lo, hi]` (inclusive), exactly zero outside.
pub fn truncnorm_pdf<R: Scalar>(x: R, spec: &TruncNormSpec<R>) -> R {
    if x < spec.lo || x > spec.hi {
        return R::zero();
    }
    let z = (x - spec.mu) / spec.sigma;
    std_normal_pdf(z) / (spec.sigma * spec.window_mass())
}

/// Truncated normal CDF, clamped to `[0, 1]`.
pub fn truncnorm_cdf<R: Scalar>(x: R, spec: &TruncNormSpec<R>) -> R {
    if x <= spec.lo {
        return R::zero();
    }
    if x >= spec.hi {
        return R::one();
    }
    let alpha = (spec.lo - spec.mu) / spec.sigma;
    let z = (x - spec.mu) / spec.sigma;
    let v = (std_normal_cdf(z) - std_normal_cdf(alpha)) / spec.window_mass();
    v.max(R::zero()).min(R::one())
}

/// Quantile function by bisection on the CDF (the support is compact, so
/// bisection is exact to floating-point resolution and has no edge cases).
pub fn truncnorm_ppf<R: Scalar>(q: R, spec: &TruncNormSpec<R>) -> R {
    let q = q.max(R::zero()).min(R::one());
    let mut lo = spec.lo;
    let mut hi = spec.hi;
    for _ in 0..90 {
        let mid = (lo + hi) * R::from_f64(0.5);
        if truncnorm_cdf(mid, spec) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * R::from_f64(0.5)
}

/// Acceptance bookkeeping of one Metropolis-Hastings chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MhStats {
    pub proposals: u64,
    pub accepted: u64,
    /// Proposals that landed outside the support (always rejected).
    pub out_of_support: u64,
    /// In-support proposals that the acceptance ratio rejected.
    pub rejected_in_support: u64,
}

impl MhStats {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposals.max(1) as f64
    }
}

/// Random-walk Metropolis-Hastings sampling of a truncated normal.
///
/// Gaussian proposals; out-of-support proposals are rejected through the
/// zero target density (equivalent to the truncation itself). Deterministic
/// for a fixed seed. Returns `n` samples recorded after `burn_in` steps,
/// one every `thin` steps.
pub fn mh_sample<R: Scalar>(
    spec: &TruncNormSpec<R>,
    n: usize,
    proposal_sigma: R,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<Vec<R>, ProbError> {
    Ok(mh_sample_with_stats(spec, n, proposal_sigma, burn_in, thin, seed)?.0)
}

/// [`mh_sample`] plus acceptance statistics.
pub fn mh_sample_with_stats<R: Scalar>(
    spec: &TruncNormSpec<R>,
    n: usize,
    proposal_sigma: R,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<(Vec<R>, MhStats), ProbError> {
    spec.validate()?;
    if n == 0 {
        return Err(ProbError::Empty);
    }
    let thin = thin.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = MhStats::default();

    // Log of the unnormalized target; truncation handled by the support test.
    let log_target = |x: R| -> R {
        let z = (x - spec.mu) / spec.sigma;
        -(z * z) * R::from_f64(0.5)
    };

    let mut x = spec.mu.max(spec.lo).min(spec.hi);
    let mut lt = log_target(x);
    let mut out = Vec::with_capacity(n);
    let total = burn_in + n * thin;
    for step in 1..=total {
        let z: f64 = standard_normal(&mut rng);
        let prop = x + proposal_sigma * R::from_f64(z);
        stats.proposals += 1;
        if prop < spec.lo || prop > spec.hi {
            stats.out_of_support += 1;
        } else {
            let lt_prop = log_target(prop);
            let log_ratio = (lt_prop - lt).value();
            let u: f64 = rng.gen::<f64>();
            if log_ratio >= 0.0 || u.ln() < log_ratio {
                x = prop;
                lt = lt_prop;
                stats.accepted += 1;
            } else {
                stats.rejected_in_support += 1;
            }
        }
        if step > burn_in && (step - burn_in) % thin == 0 {
            out.push(x);
        }
    }
    debug_assert_eq!(out.len(), n);
    Ok((out, stats))
}

/// Box-Muller standard normal draw; keeps RNG usage identical across
/// scalar types (two uniforms per draw).
pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Silverman's bandwidth: `0.9 * min(sd, iqr/1.34) * n^(-1/5)`.
pub fn silverman_bandwidth<R: Scalar>(samples: &[R]) -> Result<R, ProbError> {
    if samples.is_empty() {
        return Err(ProbError::Empty);
    }
    let n = R::from_f64(samples.len() as f64);
    let mean = samples.iter().copied().sum::<R>() / n;
    let var = samples
        .iter()
        .map(|&s| (s - mean) * (s - mean))
        .sum::<R>()
        / R::from_f64((samples.len().max(2) - 1) as f64);
    let sd = var.sqrt();

    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> R {
        let idx = p * (sorted.len() - 1) as f64;
        let k = idx.floor() as usize;
        let frac = R::from_f64(idx - k as f64);
        if k + 1 < sorted.len() {
            sorted[k] + frac * (sorted[k + 1] - sorted[k])
        } else {
            sorted[k]
        }
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr.value() > 0.0 { sd.min(iqr / R::from_f64(1.34)) } else { sd };
    let h = R::from_f64(0.9) * spread * R::from_f64((samples.len() as f64).powf(-0.2));
    if h.value() > 0.0 {
        Ok(h)
    } else {
        // Degenerate sample set (all points equal); fall back to a token width.
        Ok(R::from_f64(1e-3))
    }
}

/// Gaussian-kernel density estimate evaluated on `grid`: the mean of unit
/// kernels of width `bandwidth` centered at the samples.
pub fn kde<R: Scalar>(samples: &[R], bandwidth: R, grid: &[R]) -> Result<Vec<R>, ProbError> {
    if samples.is_empty() {
        return Err(ProbError::Empty);
    }
    if !(bandwidth.value() > 0.0) {
        return Err(ProbError::BadBandwidth(bandwidth.value()));
    }
    let norm = R::one() / (R::from_f64(samples.len() as f64) * bandwidth);
    Ok(grid
        .iter()
        .map(|&x| {
            let mut acc = R::zero();
            for &s in samples {
                acc += std_normal_pdf((x - s) / bandwidth);
            }
            acc * norm
        })
        .collect())
}

/// Wasserstein-1 and Kolmogorov-Smirnov distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport<R> {
    pub wasserstein1: R,
    pub ks: R,
}

/// Distances between an empirical sample and a truncated normal.
///
/// W1 integrates `|x_(k) - Q(q)|` over each quantile cell `((k-1)/n, k/n]`
/// of the sorted samples against the inverse CDF; KS is the classical
/// empirical-CDF sup gap.
pub fn distance_samples<R: Scalar>(
    samples: &[R],
    spec: &TruncNormSpec<R>,
) -> Result<DistanceReport<R>, ProbError> {
    if samples.is_empty() {
        return Err(ProbError::Empty);
    }
    spec.validate()?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let nf = R::from_f64(n as f64);

    let mut w1 = R::zero();
    for (k, &xk) in sorted.iter().enumerate() {
        let qlo = R::from_f64(k as f64) / nf;
        let qhi = R::from_f64((k + 1) as f64) / nf;
        w1 += crate::numint::adaptive_simpson(
            &|q| (xk - truncnorm_ppf(q, spec)).abs(),
            qlo,
            qhi,
            1e-9,
        );
    }

    Ok(DistanceReport {
        wasserstein1: w1,
        ks: ks_statistic(&sorted, &|x| truncnorm_cdf(x, spec)),
    })
}

/// KS statistic of pre-sorted samples against a CDF.
pub fn ks_statistic<R: Scalar>(sorted: &[R], cdf: &impl Fn(R) -> R) -> R {
    let n = R::from_f64(sorted.len() as f64);
    let mut d = R::zero();
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let hi = R::from_f64((k + 1) as f64) / n - f;
        let lo = f - R::from_f64(k as f64) / n;
        d = d.max(hi.abs()).max(lo.abs());
    }
    d
}

/// Distances between a density sampled on a grid (e.g. a KDE) and a
/// truncated normal, comparing the two CDFs: `W1 = integral |dF|`,
/// `KS = sup |dF|`. The grid is assumed to cover the mass of both.
pub fn distance_grid<R: Scalar>(
    xs: &[R],
    density: &[R],
    spec: &TruncNormSpec<R>,
) -> Result<DistanceReport<R>, ProbError> {
    if xs.len() != density.len() || xs.len() < 2 {
        return Err(ProbError::Empty);
    }
    spec.validate()?;
    let half = R::from_f64(0.5);
    let mut grid_cdf = R::zero();
    let mut w1 = R::zero();
    let mut ks = R::zero();
    for i in 0..xs.len() - 1 {
        let dx = xs[i + 1] - xs[i];
        let gap_l = grid_cdf - truncnorm_cdf(xs[i], spec);
        grid_cdf += half * (density[i] + density[i + 1]) * dx;
        let gap_r = grid_cdf - truncnorm_cdf(xs[i + 1], spec);
        w1 += half * (gap_l.abs() + gap_r.abs()) * dx;
        ks = ks.max(gap_l.abs()).max(gap_r.abs());
    }
    Ok(DistanceReport { wasserstein1: w1, ks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numint::adaptive_simpson;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn rho0() -> TruncNormSpec<f64> {
        TruncNormSpec::new(0.0, 0.2, 0.0, 6.0).unwrap()
    }

    fn rho_t() -> TruncNormSpec<f64> {
        TruncNormSpec::new(5.0, 0.1, 0.0, 6.0).unwrap()
    }

    #[test]
    fn pdf_zero_outside_support_nonnegative_inside() {
        let s = rho0();
        assert_eq!(truncnorm_pdf(-0.1, &s), 0.0);
        assert_eq!(truncnorm_pdf(6.1, &s), 0.0);
        for i in 0..=600 {
            assert!(truncnorm_pdf(i as f64 * 0.01, &s) >= 0.0);
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        for s in [rho0(), rho_t(), TruncNormSpec::new(3.0, 1.5, 1.0, 4.0).unwrap()] {
            let mass = adaptive_simpson(&|x| truncnorm_pdf(x, &s), s.lo, s.hi, 1e-12);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn terminal_peak_height() {
        // Mode of the terminal density: phi(0)/sigma up to negligible
        // truncation mass (bounds sit 50 and 10 sigmas away).
        let got = truncnorm_pdf(5.0, &rho_t());
        assert_relative_eq!(got, 0.3989422804014327 / 0.1, max_relative = 1e-9);
        assert_abs_diff_eq!(got, 3.989, epsilon = 1e-3);
    }

    #[test]
    fn cdf_endpoints_and_symmetry() {
        let s = rho_t();
        assert_eq!(truncnorm_cdf(s.hi, &s), 1.0);
        assert_eq!(truncnorm_cdf(s.lo, &s), 0.0);
        assert_eq!(truncnorm_cdf(7.0, &s), 1.0);
        assert_eq!(truncnorm_cdf(-1.0, &s), 0.0);
        // Symmetric truncation window around mu: median at mu.
        let sym = TruncNormSpec::new(2.0, 0.7, 1.0, 3.0).unwrap();
        assert_abs_diff_eq!(truncnorm_cdf(2.0, &sym), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cdf_derivative_is_pdf() {
        // In the bulk; far in the tail the CDF saturates and central
        // differences lose to cancellation.
        let s = rho0();
        let h = 1e-6;
        for x in [0.05, 0.2, 0.41, 0.6] {
            let fd = (truncnorm_cdf(x + h, &s) - truncnorm_cdf(x - h, &s)) / (2.0 * h);
            assert_relative_eq!(fd, truncnorm_pdf(x, &s), max_relative = 1e-7);
        }
    }

    #[test]
    fn ppf_inverts_cdf() {
        let s = rho_t();
        for q in [0.001, 0.1, 0.5, 0.77, 0.999] {
            let x = truncnorm_ppf(q, &s);
            assert_abs_diff_eq!(truncnorm_cdf(x, &s), q, epsilon = 1e-10);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert_eq!(
            TruncNormSpec::new(0.0, 0.0, 0.0, 1.0).unwrap_err(),
            ProbError::NonPositiveSigma(0.0)
        );
        assert!(TruncNormSpec::new(0.0, -1.0, 0.0, 1.0).is_err());
        assert!(TruncNormSpec::new(0.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn mh_accepts_every_in_support_proposal_for_flat_target() {
        // sigma -> infinity limit: the density ratio is 1 inside the support.
        let flat = TruncNormSpec::new(3.0, 1e9, 0.0, 6.0).unwrap();
        let (samples, stats) = mh_sample_with_stats(&flat, 2000, 1.0, 100, 1, 42).unwrap();
        assert_eq!(stats.rejected_in_support, 0);
        assert!(stats.out_of_support > 0); // the walk does hit the walls
        assert!(samples.iter().all(|&x| (0.0..=6.0).contains(&x)));
    }

    #[test]
    fn mh_samples_stay_in_support_and_pass_ks() {
        let s = rho0();
        let samples = mh_sample(&s, 1000, 0.1, 1000, 10, 7).unwrap();
        assert_eq!(samples.len(), 1000);
        assert!(samples.iter().all(|&x| (0.0..=6.0).contains(&x)));
        let mut sorted = samples;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = ks_statistic(&sorted, &|x| truncnorm_cdf(x, &s));
        // alpha = 0.01 critical value for n = 1000
        assert!(ks < 1.63 / 1000f64.sqrt(), "ks = {ks}");
    }

    #[test]
    fn mh_sample_mean_matches_closed_form() {
        let s = rho_t();
        let samples = mh_sample(&s, 10_000, 0.1, 1000, 10, 3).unwrap();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        // 3 standard errors, inflated for residual chain autocorrelation.
        let se = s.sigma / (samples.len() as f64).sqrt();
        assert_abs_diff_eq!(mean, s.mean(), epsilon = 3.0 * 3.0 * se);
        assert_abs_diff_eq!(s.mean(), 5.0, epsilon = 1e-6);
    }

    #[test]
    fn mh_is_deterministic_per_seed() {
        let s = rho0();
        let a = mh_sample(&s, 50, 0.1, 10, 2, 9).unwrap();
        let b = mh_sample(&s, 50, 0.1, 10, 2, 9).unwrap();
        assert_eq!(a, b);
        let c = mh_sample(&s, 50, 0.1, 10, 2, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn kde_single_sample_is_one_kernel() {
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05 - 3.0).collect();
        let h = 0.4;
        let d = kde(&[1.5], h, &grid).unwrap();
        for (x, v) in grid.iter().zip(&d) {
            let want = std_normal_pdf((x - 1.5) / h) / h;
            assert_relative_eq!(*v, want, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn kde_mass_is_one_and_nonnegative() {
        let samples = mh_sample(&rho0(), 400, 0.1, 500, 5, 21).unwrap();
        let h = silverman_bandwidth(&samples).unwrap();
        // Pad the grid six bandwidths beyond the sample range.
        let lo = -6.0 * h;
        let hi = 6.0 + 6.0 * h;
        let n = 4001;
        let dx = (hi - lo) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|i| lo + i as f64 * dx).collect();
        let d = kde(&samples, h, &grid).unwrap();
        assert!(d.iter().all(|&v| v >= 0.0));
        let mass = crate::numint::trapezoid(&d, dx);
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn kde_is_permutation_symmetric() {
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let samples = [0.4, 2.2, 1.1, 3.3];
        let mut rev = samples;
        rev.reverse();
        let a = kde(&samples, 0.3, &grid).unwrap();
        let b = kde(&rev, 0.3, &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn w1_vanishes_on_quantile_constructed_samples() {
        let s = rho0();
        let n = 1000;
        let samples: Vec<f64> = (1..=n)
            .map(|k| truncnorm_ppf((k as f64 - 0.5) / n as f64, &s))
            .collect();
        let rep = distance_samples(&samples, &s).unwrap();
        assert!(rep.wasserstein1 < 2e-3, "W1 = {}", rep.wasserstein1);
    }

    #[test]
    fn ks_small_for_matching_distribution() {
        let s = rho_t();
        let samples = mh_sample(&s, 1000, 0.1, 1000, 10, 5).unwrap();
        let rep = distance_samples(&samples, &s).unwrap();
        assert!(rep.ks < 0.0515, "ks = {}", rep.ks);
    }

    #[test]
    fn w1_of_point_mass_equals_mean_absolute_deviation() {
        let s = TruncNormSpec::new(3.0, 0.8, 0.0, 6.0).unwrap();
        let rep = distance_samples(&[s.mu; 1000], &s).unwrap();
        let mad = adaptive_simpson(
            &|x: f64| (x - s.mu).abs() * truncnorm_pdf(x, &s),
            s.lo,
            s.hi,
            1e-10,
        );
        assert_relative_eq!(rep.wasserstein1, mad, max_relative = 1e-4);
    }

    #[test]
    fn grid_distance_zero_against_itself() {
        let s = rho_t();
        let n = 2001;
        let dx = 6.0 / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * dx).collect();
        let d: Vec<f64> = xs.iter().map(|&x| truncnorm_pdf(x, &s)).collect();
        let rep = distance_grid(&xs, &d, &s).unwrap();
        assert!(rep.wasserstein1 < 5e-4, "W1 = {}", rep.wasserstein1);
        assert!(rep.ks < 5e-4, "ks = {}", rep.ks);
    }
}
