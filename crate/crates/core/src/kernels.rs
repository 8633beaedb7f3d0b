//! Exact polynomial algebra on `[0, 1]`.
//!
//! Everything here works on monomial coefficients in closed form: the
//! convolution kernels `∫₀ˣ tᵘ p(x − t) dt`, the weighted moments
//! `∫₀¹ (1 − x)^{a−1} p(x) dx`, and the ring operations needed to build
//! products of kernels. No quadrature is involved.
//!
//! [`Polynomial`] is generic over the scalar type; the default `f64` is what
//! callers see, and the functionals instantiate it with the double-double
//! type internally.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("non-finite value in {what} (moment {moment}, degree {degree})")]
    NonFinite {
        what: &'static str,
        moment: usize,
        degree: usize,
    },
}

/// A real polynomial `Σ c_j x^j` in the monomial basis.
///
/// Trailing zeros are kept as stored; the reported degree is always
/// `coeffs.len() - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial<T: Real = f64> {
    coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    /// Builds a polynomial from `c_0, c_1, ...`. An empty list is the zero
    /// polynomial of degree 0.
    pub fn new(coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            Self { coeffs: vec![T::zero()] }
        } else {
            Self { coeffs }
        }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![T::zero()] }
    }

    pub fn constant(c: T) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// The same polynomial in another scalar type.
    pub fn cast<U: Real>(&self) -> Polynomial<U> {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| U::from_dd(c.to_dd())).collect(),
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Cauchy product; the degree of the result is `deg p + deg q`.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// `self + s * other`, padded to the longer length.
    pub fn add_scaled(&self, other: &Self, s: T) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![T::zero(); n];
        out[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        for (o, &b) in out.iter_mut().zip(&other.coeffs) {
            *o += s * b;
        }
        Self { coeffs: out }
    }

    /// The moment-convolution kernel `x ↦ ∫₀ˣ tᵘ p(x − t) dt`.
    ///
    /// Using `∫₀ˣ tᵘ (x − t)ʲ dt = u! j! / (u + j + 1)! · x^{u+j+1}`, the
    /// result has degree `M + u + 1` with zero coefficients below `x^{u+1}`.
    pub fn convolution_kernel(&self, u: usize) -> Result<KernelPolynomial<T>, KernelError> {
        let mut out = vec![T::zero(); self.coeffs.len() + u + 1];
        for (j, &c) in self.coeffs.iter().enumerate() {
            out[u + j + 1] = c * beta_integer_t::<T>(u, j);
        }
        let poly = Self { coeffs: out };
        if !poly.is_finite() {
            return Err(KernelError::NonFinite {
                what: "convolution kernel",
                moment: u,
                degree: self.degree(),
            });
        }
        Ok(KernelPolynomial {
            moment: u,
            base_degree: self.degree(),
            poly,
        })
    }

    /// `∫₀¹ (1 − x)^{a−1} p(x) dx = Σ_j c_j (a − 1)! j! / (a + j)!`.
    pub fn beta_moment(&self, a: usize) -> Result<T, KernelError> {
        assert!(a >= 1, "beta_moment requires a >= 1");
        let value = self
            .coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (j, &c)| acc + c * beta_integer_t::<T>(a - 1, j));
        if value.is_finite() {
            Ok(value)
        } else {
            Err(KernelError::NonFinite {
                what: "beta moment",
                moment: a,
                degree: self.degree(),
            })
        }
    }
}

/// `u! v! / (u + v + 1)!`, i.e. the Beta integral `B(u + 1, v + 1)`.
///
/// Evaluated as a product of factors in `(0, 1]` so it never overflows and
/// the rounding error grows only linearly in `min(u, v)`.
pub fn beta_integer(u: usize, v: usize) -> f64 {
    beta_integer_t(u, v)
}

pub(crate) fn beta_integer_t<T: Real>(u: usize, v: usize) -> T {
    let (small, large) = if u < v { (u, v) } else { (v, u) };
    let mut acc = T::one() / (small + large + 1) as f64;
    for k in 1..=small {
        acc = acc * k as f64 / (large + k) as f64;
    }
    acc
}

/// `n!` as a float; exact up to `22!`.
pub fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient `C(n, k)` as a float (zero when `k > n`).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A convolution kernel `∫₀ˣ tᵘ p(x − t) dt` together with the data it was
/// built from.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPolynomial<T: Real = f64> {
    pub moment: usize,
    pub base_degree: usize,
    poly: Polynomial<T>,
}

impl<T: Real> KernelPolynomial<T> {
    pub fn polynomial(&self) -> &Polynomial<T> {
        &self.poly
    }

    pub fn into_polynomial(self) -> Polynomial<T> {
        self.poly
    }

    pub fn eval(&self, x: T) -> T {
        self.poly.eval(x)
    }
}

impl<T: Real> From<KernelPolynomial<T>> for Polynomial<T> {
    fn from(k: KernelPolynomial<T>) -> Self {
        k.poly
    }
}

impl<T: Real> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.add_scaled(rhs, T::one())
    }
}

impl<T: Real> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.add_scaled(rhs, -T::one())
    }
}

impl<T: Real> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self.multiply(rhs)
    }
}

impl<T: Real> Mul<T> for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: T) -> Polynomial<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        self.scale(-T::one())
    }
}

/// Free-function form of [`Polynomial::eval`].
pub fn eval(p: &Polynomial, x: f64) -> f64 {
    p.eval(x)
}

/// Free-function form of [`Polynomial::convolution_kernel`].
pub fn convolution_kernel(p: &Polynomial, u: usize) -> Result<KernelPolynomial, KernelError> {
    p.convolution_kernel(u)
}

/// Free-function form of [`Polynomial::beta_moment`].
pub fn beta_moment(p: &Polynomial, a: usize) -> Result<f64, KernelError> {
    p.beta_moment(a)
}

/// Free-function form of [`Polynomial::multiply`].
pub fn multiply(p: &Polynomial, q: &Polynomial) -> Polynomial {
    p.multiply(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;
    use proptest::prelude::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly(&[1.0]).eval(0.7), 1.0);
        assert_eq!(poly(&[0.0, 1.0]).eval(0.5), 0.5);
        assert_eq!(poly(&[1.0, 1.0]).eval(0.25), 1.25);
    }

    #[test]
    fn degree_counts_trailing_zeros() {
        assert_eq!(poly(&[1.0, 0.0, 0.0]).degree(), 2);
        assert_eq!(Polynomial::<f64>::new(vec![]).degree(), 0);
    }

    #[test]
    fn kernel_examples() {
        let k = poly(&[1.0]).convolution_kernel(2).unwrap();
        assert_eq!(k.polynomial().coeffs(), &[0.0, 0.0, 0.0, 1.0 / 3.0]);
        let k = poly(&[0.0, 1.0]).convolution_kernel(1).unwrap();
        assert!((k.polynomial().coeffs()[3] - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(k.polynomial().degree(), 3);
        let k = poly(&[1.0, 1.0]).convolution_kernel(0).unwrap();
        assert_eq!(k.polynomial().coeffs(), &[0.0, 1.0, 0.5]);
    }

    #[test]
    fn beta_moment_examples() {
        assert!((poly(&[1.0]).beta_moment(4).unwrap() - 0.25).abs() < 1e-16);
        assert!((poly(&[0.0, 1.0]).beta_moment(1).unwrap() - 0.5).abs() < 1e-16);
        assert!((poly(&[0.0, 0.0, 1.0]).beta_moment(2).unwrap() - 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(
            (&poly(&[1.0, 1.0]) * &poly(&[1.0, -1.0])).coeffs(),
            &[1.0, 0.0, -1.0]
        );
        assert_eq!(
            (&poly(&[0.0, 1.0]) * &poly(&[0.0, 1.0])).coeffs(),
            &[0.0, 0.0, 1.0]
        );
        let p = poly(&[3.0, -2.0, 0.5]);
        assert_eq!(&p * &Polynomial::constant(1.0), p);
    }

    #[test]
    fn beta_integer_matches_factorials() {
        for u in 0..12 {
            for v in 0..12 {
                let exact = factorial(u) * factorial(v) / factorial(u + v + 1);
                assert!((beta_integer(u, v) - exact).abs() <= 1e-15 * exact);
            }
        }
        // large arguments stay finite and positive
        let b = beta_integer(80, 40);
        assert!(b.is_finite() && b > 0.0);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(2, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(10, 10), 1.0);
    }

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(-5.0f64..5.0, 1..8).prop_map(Polynomial::new)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn kernel_agrees_with_quadrature(p in small_poly(), u in 0usize..6, xs in prop::collection::vec(0.0f64..=1.0, 20)) {
            let k = p.convolution_kernel(u).unwrap();
            for &x in &xs {
                let direct = adaptive(|t| t.powi(u as i32) * p.eval(x - t), 0.0, x, 1e-15, 1e-13).value;
                let closed = k.eval(x);
                let scale = adaptive(|t| (t.powi(u as i32) * p.eval(x - t)).abs(), 0.0, x, 1e-15, 1e-13).value;
                prop_assert!((closed - direct).abs() <= 1e-10 * scale.max(closed.abs()) + 1e-300,
                    "x={x} u={u} closed={closed} direct={direct}");
            }
        }

        #[test]
        fn beta_moment_of_square_is_nonnegative(p in small_poly(), a in 1usize..40) {
            let sq = &p * &p;
            let m = sq.beta_moment(a).unwrap();
            // closed form sums signed terms; allow rounding at the scale of |p|^2
            let scale: f64 = p.coeffs().iter().map(|c| c * c).sum::<f64>();
            prop_assert!(m >= -1e-13 * scale, "moment {m}");
        }

        #[test]
        fn kernel_is_linear(p in small_poly(), q in small_poly(), a in -3.0f64..3.0, b in -3.0f64..3.0, u in 0usize..10) {
            let lhs = p.scale(a).add_scaled(&q, b).convolution_kernel(u).unwrap();
            let rhs = p.convolution_kernel(u).unwrap().polynomial().scale(a)
                .add_scaled(q.convolution_kernel(u).unwrap().polynomial(), b);
            for (x, y) in lhs.polynomial().coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-14 * (1.0 + y.abs()));
            }
        }
    }
}
