//! Scalar abstraction for the numerical core.
//!
//! Everything downstream (landscapes, network, residuals, samplers, solvers)
//! is generic over [`Scalar`], so the same code runs in `f32` or `f64` and,
//! where derivatives through a computation are needed, with the forward-mode
//! dual numbers defined here.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

/// Floating-point-like scalar: plain floats and dual numbers implement this.
pub trait Scalar:
    Copy
    + Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    /// Value part as `f64` (for duals: the primal value, derivatives dropped).
    fn value(self) -> f64;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn tanh(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn erf(self) -> Self;
    fn erfc(self) -> Self;
    fn mul_add(self, b: Self, c: Self) -> Self;
    fn max(self, other: Self) -> Self;
    fn min(self, other: Self) -> Self;
    fn is_finite(self) -> bool;

    /// `c = alpha * op(a) * op(b) + beta * c` on row-major buffers.
    ///
    /// `a` is `m x k` and `b` is `k x n` after the optional transposes.
    /// The default is a naive triple loop; `f32`/`f64` dispatch to blocked
    /// kernels so the training hot path does not pay for genericity.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        trans_a: bool,
        trans_b: bool,
        m: usize,
        n: usize,
        k: usize,
        alpha: Self,
        a: &[Self],
        b: &[Self],
        beta: Self,
        c: &mut [Self],
    ) {
        assert_eq!(c.len(), m * n, "gemm: output size mismatch");
        let at = |i: usize, l: usize| if trans_a { a[l * m + i] } else { a[i * k + l] };
        let bt = |l: usize, j: usize| if trans_b { b[j * k + l] } else { b[l * n + j] };
        for i in 0..m {
            for j in 0..n {
                let mut acc = Self::zero();
                for l in 0..k {
                    acc += at(i, l) * bt(l, j);
                }
                c[i * n + j] = alpha * acc + beta * c[i * n + j];
            }
        }
    }
}

macro_rules! impl_scalar_float {
    ($($t:ty, $erf:path, $erfc:path, $gemm:path);* $(;)?) => {$(
        impl Scalar for $t {
            #[inline(always)]
            fn from_f64(v: f64) -> Self { v as $t }
            #[inline(always)]
            fn value(self) -> f64 { self as f64 }
            #[inline(always)]
            fn abs(self) -> Self { <$t>::abs(self) }
            #[inline(always)]
            fn sqrt(self) -> Self { <$t>::sqrt(self) }
            #[inline(always)]
            fn exp(self) -> Self { <$t>::exp(self) }
            #[inline(always)]
            fn ln(self) -> Self { <$t>::ln(self) }
            #[inline(always)]
            fn ln_1p(self) -> Self { <$t>::ln_1p(self) }
            #[inline(always)]
            fn tanh(self) -> Self { <$t>::tanh(self) }
            #[inline(always)]
            fn powi(self, n: i32) -> Self { <$t>::powi(self, n) }
            #[inline(always)]
            fn erf(self) -> Self { $erf(self) }
            #[inline(always)]
            fn erfc(self) -> Self { $erfc(self) }
            #[inline(always)]
            fn mul_add(self, b: Self, c: Self) -> Self { <$t>::mul_add(self, b, c) }
            #[inline(always)]
            fn max(self, other: Self) -> Self { <$t>::max(self, other) }
            #[inline(always)]
            fn min(self, other: Self) -> Self { <$t>::min(self, other) }
            #[inline(always)]
            fn is_finite(self) -> bool { <$t>::is_finite(self) }

            fn gemm(
                trans_a: bool,
                trans_b: bool,
                m: usize,
                n: usize,
                k: usize,
                alpha: Self,
                a: &[Self],
                b: &[Self],
                beta: Self,
                c: &mut [Self],
            ) {
                assert_eq!(c.len(), m * n, "gemm: output size mismatch");
                assert!(a.len() >= m * k && b.len() >= k * n, "gemm: input size mismatch");
                // Row-major strides; a transpose swaps (row, col) strides.
                let (rsa, csa) = if trans_a { (1, m as isize) } else { (k as isize, 1) };
                let (rsb, csb) = if trans_b { (1, k as isize) } else { (n as isize, 1) };
                unsafe {
                    $gemm(
                        m, k, n, alpha,
                        a.as_ptr(), rsa, csa,
                        b.as_ptr(), rsb, csb,
                        beta,
                        c.as_mut_ptr(), n as isize, 1,
                    );
                }
            }
        }
    )*};
}

impl_scalar_float!(
    f32, libm::erff, libm::erfcf, matrixmultiply::sgemm;
    f64, libm::erf, libm::erfc, matrixmultiply::dgemm;
);

/// Forward-mode dual number carrying `N` derivative slots.
///
/// `Dual { re, eps }` represents `re + eps[0]·ε₀ + … + eps[N-1]·ε_{N-1}`
/// with `εᵢεⱼ = 0`. Used to differentiate short scalar compositions (PDE
/// residuals, landscape coefficients) without hand-deriving chain rules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<R, const N: usize> {
    pub re: R,
    pub eps: [R; N],
}

/// Single-derivative dual, enough for d/du of the landscape coefficients.
pub type Dual1<R> = Dual<R, 1>;

impl<R: Scalar, const N: usize> Dual<R, N> {
    /// A constant: value with all derivative slots zero.
    pub fn constant(re: R) -> Self {
        Self { re, eps: [R::zero(); N] }
    }

    /// A variable seeded in derivative slot `slot`.
    pub fn variable(re: R, slot: usize) -> Self {
        let mut eps = [R::zero(); N];
        eps[slot] = R::one();
        Self { re, eps }
    }

    /// Chain rule for a univariate map: `(f(re), f'(re)·eps)`.
    #[inline]
    fn lift(self, f: R, df: R) -> Self {
        let mut eps = [R::zero(); N];
        for i in 0..N {
            eps[i] = df * self.eps[i];
        }
        Self { re: f, eps }
    }
}

impl<R: Scalar, const N: usize> Add for Dual<R, N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for i in 0..N {
            self.eps[i] += rhs.eps[i];
        }
        self
    }
}

impl<R: Scalar, const N: usize> Sub for Dual<R, N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for i in 0..N {
            self.eps[i] -= rhs.eps[i];
        }
        self
    }
}

impl<R: Scalar, const N: usize> Mul for Dual<R, N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [R::zero(); N];
        for i in 0..N {
            eps[i] = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Self { re: self.re * rhs.re, eps }
    }
}

impl<R: Scalar, const N: usize> Div for Dual<R, N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = R::one() / rhs.re;
        let re = self.re * inv;
        let mut eps = [R::zero(); N];
        for i in 0..N {
            eps[i] = (self.eps[i] - re * rhs.eps[i]) * inv;
        }
        Self { re, eps }
    }
}

impl<R: Scalar, const N: usize> Neg for Dual<R, N> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for i in 0..N {
            self.eps[i] = -self.eps[i];
        }
        self
    }
}

impl<R: Scalar, const N: usize> AddAssign for Dual<R, N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}
impl<R: Scalar, const N: usize> SubAssign for Dual<R, N> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}
impl<R: Scalar, const N: usize> MulAssign for Dual<R, N> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}
impl<R: Scalar, const N: usize> DivAssign for Dual<R, N> {
    #[inline]
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl<R: Scalar, const N: usize> PartialOrd for Dual<R, N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<R: Scalar, const N: usize> Display for Dual<R, N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}+ε{:?}", self.re, &self.eps[..])
    }
}

impl<R: Scalar, const N: usize> Zero for Dual<R, N> {
    fn zero() -> Self {
        Self::constant(R::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.iter().all(|e| e.is_zero())
    }
}

impl<R: Scalar, const N: usize> One for Dual<R, N> {
    fn one() -> Self {
        Self::constant(R::one())
    }
}

impl<R: Scalar, const N: usize> Sum for Dual<R, N> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl<R: Scalar, const N: usize> Scalar for Dual<R, N> {
    fn from_f64(v: f64) -> Self {
        Self::constant(R::from_f64(v))
    }

    fn value(self) -> f64 {
        self.re.value()
    }

    fn abs(self) -> Self {
        if self.re < R::zero() {
            -self
        } else {
            self
        }
    }

    fn sqrt(self) -> Self {
        let root = self.re.sqrt();
        self.lift(root, R::from_f64(0.5) / root)
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        self.lift(e, e)
    }

    fn ln(self) -> Self {
        self.lift(self.re.ln(), R::one() / self.re)
    }

    fn ln_1p(self) -> Self {
        self.lift(self.re.ln_1p(), R::one() / (R::one() + self.re))
    }

    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.lift(t, R::one() - t * t)
    }

    fn powi(self, n: i32) -> Self {
        let d = R::from_f64(n as f64) * self.re.powi(n - 1);
        self.lift(self.re.powi(n), d)
    }

    fn erf(self) -> Self {
        // d/dx erf(x) = 2/sqrt(pi) * exp(-x^2)
        let d = R::from_f64(2.0 / SQRT_PI) * (-(self.re * self.re)).exp();
        self.lift(self.re.erf(), d)
    }

    fn erfc(self) -> Self {
        let d = R::from_f64(-2.0 / SQRT_PI) * (-(self.re * self.re)).exp();
        self.lift(self.re.erfc(), d)
    }

    fn mul_add(self, b: Self, c: Self) -> Self {
        self * b + c
    }

    fn max(self, other: Self) -> Self {
        if self.re >= other.re {
            self
        } else {
            other
        }
    }

    fn min(self, other: Self) -> Self {
        if self.re <= other.re {
            self
        } else {
            other
        }
    }

    fn is_finite(self) -> bool {
        self.re.is_finite() && self.eps.iter().all(|e| e.is_finite())
    }
}

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn dual_matches_finite_differences() {
        type D = Dual1<f64>;
        let cases: &[(fn(D) -> D, fn(f64) -> f64, f64)] = &[
            (|x| x.exp(), |x| x.exp(), 0.7),
            (|x| x.ln(), |x| x.ln(), 2.3),
            (|x| x.tanh(), |x| x.tanh(), -0.4),
            (|x| x.sqrt(), |x| x.sqrt(), 1.9),
            (|x| x.erf(), libm::erf, 0.31),
            (|x| x.erfc(), libm::erfc, -1.2),
            (|x| x.ln_1p(), |x| x.ln_1p(), 0.05),
            (|x| x.powi(3), |x| x.powi(3), 1.4),
            (
                |x| (x * x - x.exp() * Dual::from_f64(0.5)) / (x + Dual::from_f64(2.0)),
                |x| (x * x - x.exp() * 0.5) / (x + 2.0),
                0.9,
            ),
        ];
        for (fd_fn, f, x) in cases {
            let d = fd_fn(D::variable(*x, 0));
            assert_relative_eq!(d.re, f(*x), max_relative = 1e-12);
            assert_relative_eq!(d.eps[0], fd(f, *x), max_relative = 1e-6);
        }
    }

    #[test]
    fn dual_multi_slot_partials() {
        // g(x, y) = x * exp(y) + y / x, both partials at once.
        type D2 = Dual<f64, 2>;
        let (x, y) = (1.3, -0.2);
        let dx = D2::variable(x, 0);
        let dy = D2::variable(y, 1);
        let g = dx * dy.exp() + dy / dx;
        assert_relative_eq!(g.re, x * y.exp() + y / x, max_relative = 1e-14);
        assert_relative_eq!(g.eps[0], y.exp() - y / (x * x), max_relative = 1e-12);
        assert_relative_eq!(g.eps[1], x * y.exp() + 1.0 / x, max_relative = 1e-12);
    }

    #[test]
    fn gemm_matches_naive_for_all_transposes() {
        let m = 3;
        let n = 4;
        let k = 5;
        let a: Vec<f64> = (0..m * k).map(|i| (i as f64) * 0.37 - 1.0).collect();
        let b: Vec<f64> = (0..k * n).map(|i| (i as f64) * -0.21 + 0.5).collect();
        // Transposed storage of the same logical matrices.
        let mut a_t = vec![0.0; m * k];
        for i in 0..m {
            for l in 0..k {
                a_t[l * m + i] = a[i * k + l];
            }
        }
        let mut b_t = vec![0.0; k * n];
        for l in 0..k {
            for j in 0..n {
                b_t[j * k + l] = b[l * n + j];
            }
        }

        let mut want = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                for l in 0..k {
                    want[i * n + j] += a[i * k + l] * b[l * n + j];
                }
            }
        }

        for (ta, tb, abuf, bbuf) in [
            (false, false, &a, &b),
            (true, false, &a_t, &b),
            (false, true, &a, &b_t),
            (true, true, &a_t, &b_t),
        ] {
            let mut c = vec![1.0; m * n];
            f64::gemm(ta, tb, m, n, k, 1.0, abuf, bbuf, 0.0, &mut c);
            for (got, want) in c.iter().zip(&want) {
                assert_relative_eq!(*got, *want, max_relative = 1e-13);
            }
            // Accumulating form: c = 2*A*B + c.
            let mut c2 = want.clone();
            f64::gemm(ta, tb, m, n, k, 2.0, abuf, bbuf, 1.0, &mut c2);
            for (got, want) in c2.iter().zip(&want) {
                assert_relative_eq!(*got, 3.0 * want, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn generic_gemm_default_agrees_with_f64_kernel() {
        // Drive the default implementation through a dual type with zero eps.
        let m = 2;
        let n = 3;
        let k = 4;
        let a: Vec<f64> = (0..m * k).map(|i| i as f64 * 0.5 - 1.0).collect();
        let b: Vec<f64> = (0..k * n).map(|i| 1.0 - i as f64 * 0.25).collect();
        let ad: Vec<Dual1<f64>> = a.iter().map(|&v| Dual::constant(v)).collect();
        let bd: Vec<Dual1<f64>> = b.iter().map(|&v| Dual::constant(v)).collect();

        let mut c = vec![0.0; m * n];
        f64::gemm(false, false, m, n, k, 1.0, &a, &b, 0.0, &mut c);
        let mut cd = vec![Dual1::<f64>::zero(); m * n];
        Dual1::<f64>::gemm(
            false,
            false,
            m,
            n,
            k,
            Dual::one(),
            &ad,
            &bd,
            Dual::zero(),
            &mut cd,
        );
        for (d, v) in cd.iter().zip(&c) {
            assert_relative_eq!(d.re, *v, max_relative = 1e-13);
        }
    }
}
