//! Fixed-order Gauss–Legendre rules and a globally adaptive 7/15-point
//! Gauss–Kronrod integrator.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::real::{Dd, Real};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T: Real = f64> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Computes the `n`-point rule by Newton iteration on `P_n`: first in
    /// `f64` from Tricomi's initial guess, then polished in `T`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x0 = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x0);
                let dx = p / d;
                x0 -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let mut x = T::from_f64(x0);
            let polish = if T::EPSILON < f64::EPSILON { 3 } else { 1 };
            for _ in 0..polish {
                let (p, d) = legendre_with_derivative(n, x);
                x -= p / d;
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = T::from_f64(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
            let (_, dp) = legendre_with_derivative(n, T::zero());
            weights[n / 2] = T::from_f64(2.0) / (dp * dp);
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let mid = (a + b) * 0.5;
        let half = (b - a) * 0.5;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        self.mapped(a, b).fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }
}

/// Shared double-double rules, built once per order.
pub(crate) fn dd_rule(n: usize) -> Arc<GaussLegendre<Dd>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre<Dd>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = (x * p1 * (2.0 * k - 1.0) - p0 * (k - 1.0)) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = (x * p1 - p0) * n as f64 / (x * x - 1.0);
    (p1, d)
}

/// Values an adaptive rule can accumulate.
pub trait Quadrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Quadrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Quadrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<T: Quadrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod = kronrod + fsum * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + fsum * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    let err = (kronrod - gauss).magnitude();
    (kronrod, err)
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

const MAX_INTERVALS: usize = 2000;

/// Globally adaptive Gauss–Kronrod integration: repeatedly bisects the
/// interval carrying the largest error estimate until the summed estimate
/// is below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive_generic<T: Quadrand, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> AdaptiveResult<T> {
    if a == b {
        return AdaptiveResult {
            value: T::zero(),
            error: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let (v, e) = gauss_kronrod_15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total = pieces.iter().fold(T::zero(), |acc, p| acc + p.2);
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        let tol = abs_tol.max(rel_tol * total.magnitude());
        if err <= tol || pieces.len() >= MAX_INTERVALS {
            return AdaptiveResult {
                value: total,
                error: err,
                intervals: pieces.len(),
                converged: err <= tol,
            };
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
                if p.3 > best.1 {
                    (i, p.3)
                } else {
                    best
                }
            });
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod_15(&mut f, lo, mid);
        let (v2, e2) = gauss_kronrod_15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Real-valued [`adaptive_generic`].
pub fn adaptive<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> AdaptiveResult<f64> {
    adaptive_generic(f, a, b, abs_tol, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_high_degree_monomials() {
        let rule = GaussLegendre::<f64>::new(16);
        for k in 0..32 {
            let v = rule.integrate(|x| x.powi(k), 0.0, 1.0);
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((v - exact).abs() < 1e-14, "k={k} v={v}");
        }
        let w: f64 = GaussLegendre::<f64>::new(64).weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-13);
    }

    #[test]
    fn double_double_rule_is_exact_to_high_precision() {
        let rule = dd_rule(32);
        for k in 0..64usize {
            let v = rule.integrate(|x| x.powu(k), Dd::from(0.0), Dd::from(1.0));
            let exact = Dd::from(1.0) / (k as f64 + 1.0);
            assert!((v - exact).abs().hi() < 1e-30, "k={k}");
        }
    }

    #[test]
    fn odd_order_has_center_node() {
        let rule = GaussLegendre::<f64>::new(5);
        assert_eq!(rule.nodes()[2], 0.0);
        assert!((rule.weights()[2] - 128.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-15);
        let g = 2.0 * (WG[0] + WG[1] + WG[2]) + WG[3];
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let r = adaptive(|x| (50.0 * x).cos(), 0.0, 3.0, 1e-14, 1e-13);
        assert!(r.converged);
        assert!((r.value - (150.0f64).sin() / 50.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_complex() {
        let r = adaptive_generic(|x| Complex64::new(0.0, x).exp(), 0.0, 1.0, 1e-15, 1e-14);
        let exact = (Complex64::new(0.0, 1.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
        assert!((r.value - exact).norm() < 1e-14);
    }
}
