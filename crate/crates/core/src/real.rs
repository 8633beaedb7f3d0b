//! Scalar abstraction shared by the polynomial algebra, the quadrature rules
//! and the functionals.
//!
//! Everything is written once over [`Real`] and instantiated for `f64` and
//! for the double-double type [`Dd`] (about 32 significant digits). The
//! quadratic forms of the optimizer are badly conditioned in the monomial
//! basis, so assembly and the public `h` evaluation run in [`Dd`] and only
//! round to `f64` at the end.

use std::cmp::Ordering;
use std::fmt::{self, Debug};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`: a double-double
/// number with about 106 bits of significand.
///
/// Addition uses the accurate two-sum variant and multiplication relies on
/// fused multiply-add; division is long division with two correction
/// steps, so all four operations are accurate to a few units of 2⁻¹⁰⁴.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const PI: Dd = Dd {
        hi: 3.141_592_653_589_793,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const FRAC_PI_2: Dd = Dd {
        hi: 1.570_796_326_794_896_6,
        lo: 6.123_233_995_736_766e-17,
    };
    pub const NAN: Dd = Dd {
        hi: f64::NAN,
        lo: f64::NAN,
    };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }
}

impl Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renorm(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::from(q3)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        Dd::renorm(s1, s2 + self.lo)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        Dd::renorm(p, e + self.lo * b)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p1, p2) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p1);
        let q2 = (s + (e + self.lo - p2)) / b;
        Dd::renorm(q1, q2)
    }
}

macro_rules! assign_ops {
    ($($tr:ident $f:ident $op:tt),*) => {$(
        impl $tr for Dd {
            fn $f(&mut self, rhs: Dd) {
                *self = *self $op rhs;
            }
        }
        impl $tr<f64> for Dd {
            fn $f(&mut self, rhs: f64) {
                *self = *self $op rhs;
            }
        }
    )*};
}

assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + 'static
{
    /// Unit roundoff of the representation.
    const EPSILON: f64;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn pi() -> Self;
    fn is_finite(self) -> bool;
    fn to_dd(self) -> Dd;
    fn from_dd(v: Dd) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    /// `self^n` by repeated squaring.
    fn powu(self, mut n: usize) -> Self {
        let mut base = self;
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        acc
    }

    fn is_zero(self) -> bool {
        self.to_f64() == 0.0
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn to_dd(self) -> Dd {
        Dd::from(self)
    }
    fn from_dd(v: Dd) -> Self {
        v.hi() + v.lo()
    }
}

impl Real for Dd {
    const EPSILON: f64 = 4.93e-32;

    fn from_f64(v: f64) -> Self {
        Dd::from(v)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(self.hi.sqrt());
        }
        // one Newton step from the f64 root
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let resid = (self - Dd::new(p, e)).hi;
        Dd::from(x) + resid / (2.0 * x)
    }
    fn sin_cos(self) -> (Self, Self) {
        dd_sin_cos(self)
    }
    fn pi() -> Self {
        Dd::PI
    }
    fn is_finite(self) -> bool {
        self.hi().is_finite() && self.lo().is_finite()
    }
    fn to_dd(self) -> Dd {
        self
    }
    fn from_dd(v: Dd) -> Self {
        v
    }
}

/// Full double-double sine and cosine: reduction by multiples of `π/2`
/// followed by Taylor series on `|r| ≤ π/4`.
fn dd_sin_cos(x: Dd) -> (Dd, Dd) {
    if !Real::is_finite(x) {
        return (Dd::NAN, Dd::NAN);
    }
    let half_pi = Dd::FRAC_PI_2;
    let q = (x.hi() / half_pi.hi()).round();
    let r = x - half_pi * q;
    let r2 = r * r;
    // sin r = Σ (−1)^k r^{2k+1}/(2k+1)!, cos r = Σ (−1)^k r^{2k}/(2k)!
    let mut s_term = r;
    let mut c_term = Dd::from(1.0);
    let mut s = s_term;
    let mut c = c_term;
    let mut k = 1.0;
    loop {
        let n = 2.0 * k;
        c_term = -(c_term * r2) / ((n - 1.0) * n);
        s_term = -(s_term * r2) / (n * (n + 1.0));
        c += c_term;
        s += s_term;
        if c_term.hi().abs() < 1e-34 && s_term.hi().abs() < 1e-34 * r.hi().abs().max(1e-300) {
            break;
        }
        if k > 40.0 {
            break;
        }
        k += 1.0;
    }
    match (q as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// `n!` in the scalar type (exact in [`Dd`] through `33!`).
pub fn factorial_t<T: Real>(n: usize) -> T {
    (2..=n).fold(T::one(), |acc, k| acc * k as f64)
}

/// `C(n, k)` in the scalar type, zero when `k > n`.
pub fn binomial_t<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(T::one(), |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(−1)^k` as a float.
pub fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
