//! Independent checks of the closed forms.
//!
//! * Window oracles: `V1`, `V2`, `V3` recomputed by integrating the discrete
//!   mean-value integrands over the shift variable `η = α log y ∈ [−c/2, c/2]`
//!   with adaptive quadrature, instead of through the sinc/Si kernels and
//!   trigonometric moments the closed forms use. With `ϑ = 1/2` the main
//!   terms depend on `α`, `L`, `y`, `T` only through `η`:
//!   `αL = 2η`, `y^{iαt} = e^{iηt}`, `T^{−iα} = e^{−2iη}`.
//! * Number-theoretic sanity checks: the divisor functions `d_r`, the Euler
//!   product `a_r = Π_p (1 − 1/p)^{r²} Σ_k d_r(p^k)²/p^k`, and the leading
//!   term of `Σ_{k≤y} d_r(k)²/k`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::functionals::{FunctionalError, FunctionalParams};
use crate::kernels::{binomial, factorial, Polynomial};
use crate::quadrature::{adaptive, GaussLegendre};
use crate::real::{Dd, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("the window oracles need theta = 1/2, got {0}")]
    ThetaUnsupported(f64),
    #[error("small-eta expansion and direct evaluation disagree at eta = {eta:e}: {series:e} vs {direct:e}")]
    CancellationFailure { eta: f64, series: f64, direct: f64 },
    #[error("odd-order terms of the B series do not vanish: {0:e}")]
    OddTermsNonzero(f64),
    #[error("B series did not converge within {terms} terms (last term {last_term:e})")]
    SeriesNotConverged { terms: usize, last_term: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("d_{r}(n) overflows u64 for n <= {n}")]
    Overflow { r: usize, n: u64 },
    #[error(transparent)]
    Functional(#[from] FunctionalError),
}

/// Below this `|η|` the pole-cancelling part of the cross term is taken
/// from its Taylor expansion.
pub const SMALL_ETA: f64 = 1e-3;

const INNER_ORDER: usize = 48;
const ETA_REL_TOL: f64 = 1e-11;
const X_REL_TOL: f64 = 1e-10;

/// The `x`-integrands of the discrete mean values at a fixed shift `η`.
#[derive(Debug, Clone)]
pub struct EtaIntegrand {
    pub r: usize,
    pub p1: Polynomial,
    pub p2: Polynomial,
    q_r: Polynomial,
    /// `R_0 .. R_r` of `P2`
    r_kernels: Vec<Polynomial>,
    rule: GaussLegendre,
}

impl EtaIntegrand {
    pub fn new(r: usize, p1: &Polynomial, p2: &Polynomial) -> Result<Self, OracleError> {
        if r < 1 {
            return Err(OracleError::InvalidArgument("r must be >= 1".into()));
        }
        let q_r = p1.convolution_kernel(r).map_err(FunctionalError::from)?.into_polynomial();
        let r_kernels = (0..=r)
            .map(|u| p2.convolution_kernel(u).map(Polynomial::from))
            .collect::<Result<Vec<_>, _>>()
            .map_err(FunctionalError::from)?;
        Ok(Self {
            r,
            p1: p1.clone(),
            p2: p2.clone(),
            q_r,
            r_kernels,
            rule: GaussLegendre::new(INNER_ORDER),
        })
    }

    fn inner<F: FnMut(f64) -> f64>(&self, f: F, x: f64) -> f64 {
        self.rule.integrate(f, 0.0, x)
    }

    fn inner_c<F: FnMut(f64) -> Complex64>(&self, mut f: F, x: f64) -> Complex64 {
        self.rule
            .mapped(0.0, x)
            .fold(Complex64::new(0.0, 0.0), |acc, (t, w)| acc + f(t) * w)
    }

    /// `P1(x)² − (r+1) P1(x) ∫₀ˣ cos(ηt) P1(x−t) dt`: the diagonal mean at
    /// shift `η` (with `2ϑ = 1`).
    pub fn v1_integrand(&self, eta: f64, x: f64) -> f64 {
        let p1x = self.p1.eval(x);
        let conv = self.inner(|t| (eta * t).cos() * self.p1.eval(x - t), x);
        p1x * p1x - (self.r + 1) as f64 * p1x * conv
    }

    /// `F(η) = e^{−2iη} ∫₀ˣ tʳ e^{iηt} P1(x−t) S(η) dt` with
    /// `S(η) = P2(x) + Σ_{n=1}^{r} C(r,n) (iη)ⁿ/(n−1)! R_{n−1}(x)`.
    fn f_term(&self, eta: f64, x: f64) -> Complex64 {
        let i_eta = Complex64::new(0.0, eta);
        let mut s = Complex64::new(self.p2.eval(x), 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for n in 1..=self.r {
            pow *= i_eta;
            s += pow * (binomial(self.r, n) / factorial(n - 1) * self.r_kernels[n - 1].eval(x));
        }
        let r = self.r as i32;
        let integral = self.inner_c(
            |t| Complex64::from_polar(t.powi(r) * self.p1.eval(x - t), eta * t),
            x,
        );
        Complex64::from_polar(1.0, -2.0 * eta) * integral * s
    }

    /// `Im F(η) / η` from the Taylor expansion of `F` about `η = 0`.
    fn im_f_over_eta_series(&self, eta: f64, x: f64) -> f64 {
        const K_MAX: usize = 9;
        let r = self.r as i32;
        // g_m = ∫ tʳ (t−2)^m / m! P1(x−t) dt, s_n = C(r,n) R_{n−1}(x)/(n−1)!, s_0 = P2(x)
        let g: Vec<f64> = (0..=K_MAX)
            .map(|m| {
                self.inner(|t| t.powi(r) * (t - 2.0).powi(m as i32) * self.p1.eval(x - t), x)
                    / factorial(m)
            })
            .collect();
        let s: Vec<f64> = (0..=self.r)
            .map(|n| {
                if n == 0 {
                    self.p2.eval(x)
                } else {
                    binomial(self.r, n) / factorial(n - 1) * self.r_kernels[n - 1].eval(x)
                }
            })
            .collect();
        // F = Σ_k (iη)^k f_k, Im[(iη)^k] = (−1)^{(k−1)/2} η^k for odd k
        let mut acc = 0.0;
        for k in (1..=K_MAX).step_by(2) {
            let f_k: f64 = (0..=k.min(self.r)).map(|n| g[k - n] * s[n]).sum();
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * eta.powi(k as i32 - 1) * f_k;
        }
        acc
    }

    fn im_f_over_eta_direct(&self, eta: f64, x: f64) -> f64 {
        self.f_term(eta, x).im / eta
    }

    /// `A(η; x)` of the cross term, including the pole terms; only valid
    /// for `η ≠ 0`.
    pub fn a_function(&self, eta: f64, x: f64) -> Complex64 {
        let i2eta = Complex64::new(0.0, 2.0 * eta);
        let r = self.r as f64;
        let q = self.q_r.eval(x);
        let p2x = self.p2.eval(x);
        let first = (1.0 - 1.0 / i2eta) * q * p2x;
        let second = self.inner_c(
            |t| Complex64::from_polar(self.q_r.eval(x - t), eta * t),
            x,
        ) * (-0.5 * (r + 1.0) * p2x);
        let third = self.inner_c(
            |t| Complex64::from_polar(self.p2.eval(x - t), -eta * t),
            x,
        ) * (-0.5 * r * q);
        first + second + third + self.f_term(eta, x) / i2eta
    }

    /// `2 Re A(η; x)`, finite at `η = 0`.
    pub fn v2_integrand(&self, eta: f64, x: f64) -> f64 {
        if eta.abs() >= SMALL_ETA {
            return 2.0 * self.a_function(eta, x).re;
        }
        // the 1/(2iη) terms combine to Im F(η)/(2η) after taking 2 Re
        let r = self.r as f64;
        let q = self.q_r.eval(x);
        let p2x = self.p2.eval(x);
        let second = self.inner(|t| (eta * t).cos() * self.q_r.eval(x - t), x);
        let third = self.inner(|t| (eta * t).cos() * self.p2.eval(x - t), x);
        2.0 * q * p2x - (r + 1.0) * p2x * second - r * q * third
            + self.im_f_over_eta_series(eta, x)
    }

    /// Compares the small-`η` expansion with direct evaluation at
    /// `|η| = SMALL_ETA` on a few points of `[0, 1]`.
    pub fn check_cancellation(&self) -> Result<(), OracleError> {
        for &x in &[0.25, 0.5, 0.75, 1.0] {
            for &eta in &[SMALL_ETA, -SMALL_ETA] {
                let series = self.im_f_over_eta_series(eta, x);
                let direct = self.im_f_over_eta_direct(eta, x);
                let scale = series.abs().max(direct.abs()).max(1e-300);
                if (series - direct).abs() > 1e-6 * scale {
                    return Err(OracleError::CancellationFailure { eta, series, direct });
                }
            }
        }
        Ok(())
    }
}

fn require_half(theta: f64) -> Result<(), OracleError> {
    if theta != 0.5 {
        return Err(OracleError::ThetaUnsupported(theta));
    }
    Ok(())
}

/// `∫₀¹ w(x) ∫_{−c/2}^{c/2} f(η, x) dη dx` by nested adaptive quadrature.
fn window_integral<F: Fn(f64, f64) -> f64>(f: F, weight_exp: usize, c: f64) -> f64 {
    let half = 0.5 * c;
    adaptive(
        |x| {
            let inner = adaptive(|eta| f(eta, x), -half, half, 1e-14, ETA_REL_TOL).value;
            (1.0 - x).powi(weight_exp as i32 - 1) * inner
        },
        0.0,
        1.0,
        1e-14,
        X_REL_TOL,
    )
    .value
}

/// `V1` by integrating the diagonal mean over the `η` window.
pub fn v1_by_eta_quadrature(p1: &Polynomial, params: &FunctionalParams) -> Result<f64, OracleError> {
    require_half(params.theta)?;
    params.validate()?;
    if params.c == 0.0 || p1.is_zero() {
        return Ok(0.0);
    }
    let r = params.r;
    let e = EtaIntegrand::new(r, p1, &Polynomial::zero())?;
    let a = (r + 1) * (r + 1);
    Ok(window_integral(|eta, x| e.v1_integrand(eta, x), a, params.c) / factorial(a - 1))
}

/// `V2` by integrating `2 Re A(η; x)` over the `η` window.
pub fn v2_by_eta_quadrature(
    p1: &Polynomial,
    p2: &Polynomial,
    params: &FunctionalParams,
) -> Result<f64, OracleError> {
    require_half(params.theta)?;
    params.validate()?;
    if params.c == 0.0 || p1.is_zero() || p2.is_zero() {
        return Ok(0.0);
    }
    let r = params.r;
    let e = EtaIntegrand::new(r, p1, p2)?;
    e.check_cancellation()?;
    let a = r * (r + 1);
    let norm = factorial(r) * factorial(a - 1);
    Ok(window_integral(|eta, x| e.v2_integrand(eta, x), a, params.c) / norm)
}

/// `B(r, θ, j; u)` from direct `t`-quadrature of its defining integrals
/// (no binomial expansion of `(θ⁻¹ − t)^{j−n}`, no closed-form kernels of
/// kernels).
pub fn b_by_quadrature(r: usize, theta: f64, j: usize, p2: &Polynomial, u: f64) -> Result<f64, OracleError> {
    if r < 1 {
        return Err(OracleError::InvalidArgument("r must be >= 1".into()));
    }
    let rk = |k: usize| -> Result<Polynomial, OracleError> {
        Ok(p2.convolution_kernel(k).map_err(FunctionalError::from)?.into_polynomial())
    };
    let rule = GaussLegendre::<f64>::new(64);
    let (r_lo, r_hi) = (rk(r - 1)?, rk(r)?);
    let jf = factorial(j);
    let ji = j as i32;
    let rf = r as f64;
    let i1 = rule.integrate(|t| t.powi(ji) * r_lo.eval(u - t), 0.0, u);
    let i2 = rule.integrate(|t| t.powi(ji) * r_hi.eval(u - t), 0.0, u);
    let mut b = -rf / jf * r_lo.eval(u) * i1 + theta * rf / jf * (r_hi.eval(u) * i1 + r_lo.eval(u) * i2);
    let n_hi = (j as i64).min(r as i64 - 2);
    for n in -2..=n_hi {
        let k = (j as i64 - n) as i32;
        let outer = rk((r as i64 + n + 1) as usize)?;
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let coef = -theta * factorial(r - 1) * sign * binomial(r, (n + 2) as usize)
            / (factorial(k as usize) * factorial((r as i64 + n + 1) as usize));
        let integral = rule.integrate(
            |t| t.powi(r as i32 - 1) * (1.0 / theta - t).powi(k) * p2.eval(u - t),
            0.0,
            u,
        );
        b += coef * outer.eval(u) * integral;
    }
    Ok(b)
}

/// `V3` by integrating `2 Re Σ_j (iη)^j B(r, 1/2, j; x)` over `η` and `x`.
///
/// Both parities of `j` are summed as complex numbers; the odd-order part
/// must integrate to zero and is checked to `1e−14` of the scale.
pub fn v3_by_eta_quadrature(p2: &Polynomial, params: &FunctionalParams) -> Result<f64, OracleError> {
    require_half(params.theta)?;
    params.validate()?;
    if params.c == 0.0 || p2.is_zero() {
        return Ok(0.0);
    }
    let r = params.r;
    let a = r * r;
    let terms = 2 * params.j_max;
    // b_j = ∫₀¹ (1−x)^{a−1} B_j(x) dx by Gauss–Legendre in x
    let rule = GaussLegendre::<f64>::new(64);
    let half = 0.5 * params.c;
    let mut b = Vec::with_capacity(terms);
    let mut converged = false;
    let mut last = f64::INFINITY;
    for j in 1..=terms {
        let mut acc = 0.0;
        for (x, w) in rule.mapped(0.0, 1.0) {
            acc += w * (1.0 - x).powi(a as i32 - 1) * b_by_quadrature(r, 0.5, j, p2, x)?;
        }
        b.push(acc);
        let scale: f64 = b.iter().enumerate().map(|(k, v)| (v * half.powi(k as i32 + 1)).abs()).sum();
        last = (acc * half.powi(j as i32)).abs();
        if j % 2 == 0 && last <= 1e-17 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OracleError::SeriesNotConverged { terms, last_term: last });
    }
    let series = |eta: f64, parity: usize| -> f64 {
        let ie = Complex64::new(0.0, eta);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        for (k, &bj) in b.iter().enumerate() {
            pow *= ie;
            if (k + 1) % 2 == parity {
                acc += 2.0 * (pow * bj).re;
            }
        }
        acc
    };
    let even = adaptive(|eta| series(eta, 0), -half, half, 1e-15, 1e-13);
    let odd = adaptive(|eta| series(eta, 1), -half, half, 1e-15, 1e-13);
    let scale = adaptive(|eta| series(eta, 0).abs(), -half, half, 1e-15, 1e-13).value;
    if odd.value.abs() > 1e-14 * scale.max(1e-300) {
        return Err(OracleError::OddTermsNonzero(odd.value));
    }
    let norm = factorial(r - 1).powi(2) * factorial(a - 1);
    Ok(even.value / norm)
}

/// `count` reproducible pairs `(P1, P2)` of the given degree with
/// coefficients uniform in `[−1, 1]`.
pub fn seeded_pairs(seed: u64, count: usize, degree: usize) -> Vec<(Polynomial, Polynomial)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Polynomial::new((0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect())
    };
    (0..count)
        .map(|_| {
            let p1 = draw(&mut rng);
            (p1, draw(&mut rng))
        })
        .collect()
}

/// `d_r(n)` for all `n ≤ N`, by a smallest-prime-factor sieve and
/// multiplicativity, with `d_r(p^k) = C(k + r − 1, r − 1)`.
#[derive(Debug, Clone)]
pub struct DivisorSieve {
    pub r: usize,
    pub limit: u64,
    values: Vec<u64>,
}

impl DivisorSieve {
    /// `d_r(n)`; `n` must lie in `1..=limit`.
    pub fn get(&self, n: u64) -> u64 {
        assert!(n >= 1 && n <= self.limit, "n = {n} outside 1..={}", self.limit);
        self.values[n as usize]
    }

    pub fn values(&self) -> &[u64] {
        &self.values[1..]
    }
}

fn binomial_u64(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).ok()
}

/// Builds the table of `d_r(n)`, `n ≤ limit`.
pub fn sieve_divisor(r: usize, limit: u64) -> Result<DivisorSieve, OracleError> {
    if r < 1 || limit < 1 {
        return Err(OracleError::InvalidArgument("need r >= 1 and N >= 1".into()));
    }
    let n = usize::try_from(limit)
        .ok()
        .filter(|&n| n < u32::MAX as usize)
        .ok_or_else(|| OracleError::InvalidArgument(format!("N = {limit} too large")))?;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let m = i * p as usize;
            if p > spf[i] || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    // d_r(p^k) for the largest k with 2^k ≤ N
    let k_max = 64 - limit.leading_zeros() as u64;
    let prime_power: Vec<u64> = (0..=k_max)
        .map(|k| binomial_u64(k + r as u64 - 1, r as u64 - 1).ok_or(OracleError::Overflow { r, n: limit }))
        .collect::<Result<_, _>>()?;
    let mut values = vec![0u64; n + 1];
    values[1] = 1;
    for i in 2..=n {
        let p = spf[i] as usize;
        let mut m = i / p;
        let mut k = 1;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        values[i] = values[m]
            .checked_mul(prime_power[k])
            .ok_or(OracleError::Overflow { r, n: limit })?;
    }
    Ok(DivisorSieve { r, limit, values })
}

fn primes_up_to(n: usize) -> Vec<usize> {
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Truncated Euler product for `a_r` together with an estimate of the
/// omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerProduct {
    pub value: f64,
    /// Estimated `a_r(∞) − a_r(P_cut)`.
    pub tail_estimate: f64,
    pub primes_used: usize,
}

/// `a_r = Π_{p ≤ P} (1 − 1/p)^{r²} Σ_{k ≥ 0} d_r(p^k)² p^{−k}`.
///
/// Local factors and the running product are accumulated in double-double,
/// with each local `k`-series summed until its increments drop below
/// `1e−34`; for `r = 1` every local factor is exactly one and so is the
/// rounded product. The tail uses the leading behaviour of the local factor,
/// `1 + c₂/p² + O(p⁻³)` with `c₂ = (r(r+1)/2)² − r⁴/2 − r²/2`, and
/// `Σ_{p>P} p⁻² ≈ 1/(P log P)`.
pub fn a_r_euler_product(r: usize, p_cut: usize) -> Result<EulerProduct, OracleError> {
    if r < 1 {
        return Err(OracleError::InvalidArgument("r must be >= 1".into()));
    }
    if p_cut < 100 {
        return Err(OracleError::InvalidArgument(format!("P_cut must be >= 100, got {p_cut}")));
    }
    let primes = primes_up_to(p_cut);
    let rr = r * r;
    let mut product = Dd::one();
    for &p in &primes {
        let inv_p = Dd::one() / p as f64;
        let one_minus = Dd::one() - inv_p;
        let mut series = Dd::one();
        let mut pk = Dd::one();
        for k in 1.. {
            pk *= inv_p;
            let d = binomial(k + r - 1, r - 1);
            let inc = pk * (d * d);
            series += inc;
            if inc.to_f64() < 1e-34 * series.to_f64() || k > 400 {
                break;
            }
        }
        product *= one_minus.powu(rr) * series;
    }
    let rf = r as f64;
    let c2 = (rf * (rf + 1.0) / 2.0).powi(2) - rf.powi(4) / 2.0 - rf * rf / 2.0;
    let value = product.to_f64();
    let pc = p_cut as f64;
    Ok(EulerProduct {
        value,
        tail_estimate: value * c2 / (pc * pc.ln()),
        primes_used: primes.len(),
    })
}

/// `Σ_{k≤y} d_r(k)²/k` divided by its leading term `a_r (log y)^{r²}/Γ(r²+1)`,
/// for each `y` in the list.
pub fn divisor_square_trend(r: usize, ys: &[u64]) -> Result<Vec<f64>, OracleError> {
    if ys.is_empty() {
        return Ok(Vec::new());
    }
    if ys.windows(2).any(|w| w[0] >= w[1]) || ys[0] < 2 {
        return Err(OracleError::InvalidArgument("y list must be increasing and >= 2".into()));
    }
    let y_max = *ys.last().expect("non-empty");
    if y_max > 10_000_000 {
        return Err(OracleError::InvalidArgument("max y is 10^7".into()));
    }
    let sieve = sieve_divisor(r, y_max)?;
    let a_r = a_r_euler_product(r, 1_000_000)?.value;
    let lead = |y: u64| a_r * (y as f64).ln().powi((r * r) as i32) / factorial(r * r);
    let mut out = Vec::with_capacity(ys.len());
    let mut sum = Dd::zero();
    let mut next = 0;
    for k in 1..=y_max {
        let d = sieve.get(k) as f64;
        sum += Dd::from(d * d) / k as f64;
        if k == ys[next] {
            out.push(sum.to_f64() / lead(k));
            next += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{compute_b, compute_v1, compute_v2, compute_v3};
    use std::f64::consts::PI;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    fn params(r: usize, c: f64) -> FunctionalParams {
        FunctionalParams::default().with_r(r).with_c(c)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn zero_window_and_zero_polynomials() {
        let p = params(2, 0.0);
        assert_eq!(v1_by_eta_quadrature(&poly(&[1.0]), &p).unwrap(), 0.0);
        assert_eq!(v2_by_eta_quadrature(&poly(&[1.0]), &poly(&[1.0]), &p).unwrap(), 0.0);
        assert_eq!(v3_by_eta_quadrature(&poly(&[1.0]), &p).unwrap(), 0.0);
        assert_eq!(v3_by_eta_quadrature(&poly(&[0.0]), &params(2, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn v1_oracle_examples() {
        let p = params(2, 2.0);
        let p1 = poly(&[1.0]);
        assert!(rel(v1_by_eta_quadrature(&p1, &p).unwrap(), compute_v1(&p1, &p).unwrap()) < 1e-6);
    }

    #[test]
    fn v2_oracle_simple() {
        let p = params(1, PI);
        let (p1, p2) = (poly(&[1.0]), poly(&[1.0]));
        let o = v2_by_eta_quadrature(&p1, &p2, &p).unwrap();
        let c = compute_v2(&p1, &p2, &p).unwrap();
        assert!(rel(o, c) < 1e-5, "{o} vs {c}");
    }

    #[test]
    fn v3_oracle_simple() {
        let p = params(2, PI);
        let p2 = poly(&[1.0, 1.0]);
        let o = v3_by_eta_quadrature(&p2, &p).unwrap();
        let c = compute_v3(&p2, &p).unwrap();
        assert!(rel(o, c) < 1e-6, "{o} vs {c}");
    }

    #[test]
    fn v2_integrand_is_continuous_across_small_eta() {
        let e = EtaIntegrand::new(2, &poly(&[1.0, -2.0, 0.5]), &poly(&[0.3, 1.0, -1.0])).unwrap();
        e.check_cancellation().unwrap();
        for &x in &[0.3, 0.9] {
            let inside = e.v2_integrand(0.999_999 * SMALL_ETA, x);
            let outside = e.v2_integrand(1.000_001 * SMALL_ETA, x);
            assert!((inside - outside).abs() < 1e-9 * inside.abs().max(1.0));
        }
        assert!(e.v2_integrand(0.0, 0.5).is_finite());
    }

    #[test]
    fn b_quadrature_matches_closed_form() {
        let p2 = poly(&[0.5, -1.0, 2.0, 0.25]);
        for r in 1..=3 {
            for j in [0usize, 1, 2, 5, 8] {
                let closed = compute_b(r, 0.5, j, &p2).unwrap();
                for &u in &[0.2, 0.7, 1.0] {
                    let q = b_by_quadrature(r, 0.5, j, &p2, u).unwrap();
                    let c = closed.eval(u);
                    assert!((q - c).abs() <= 1e-11 * c.abs().max(1e-6), "r={r} j={j} u={u}: {q} vs {c}");
                }
            }
        }
    }

    #[test]
    fn divisor_examples() {
        let s2 = sieve_divisor(2, 100).unwrap();
        assert_eq!(s2.get(6), 4);
        assert_eq!(s2.values().iter().sum::<u64>(), 482);
        let s3 = sieve_divisor(3, 100).unwrap();
        assert_eq!(s3.get(4), 6);
        assert_eq!(s3.get(1), 1);
        let s1 = sieve_divisor(1, 50).unwrap();
        assert!(s1.values().iter().all(|&d| d == 1));
    }

    #[test]
    fn divisor_prime_powers_and_multiplicativity() {
        let s = sieve_divisor(3, 200_000).unwrap();
        for p in [2u64, 3, 5, 7, 11, 97] {
            let mut pk = 1u64;
            for k in 1..=5u64 {
                pk *= p;
                if pk > s.limit {
                    break;
                }
                assert_eq!(s.get(pk), binomial_u64(k + 2, 2).unwrap(), "p={p} k={k}");
            }
        }
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        for a in 1..300u64 {
            for b in (1..300u64).step_by(7) {
                if gcd(a, b) == 1 && a * b <= s.limit {
                    assert_eq!(s.get(a * b), s.get(a) * s.get(b));
                }
            }
        }
    }

    #[test]
    fn divisor_overflow_is_detected() {
        assert!(matches!(sieve_divisor(200, 1 << 20), Err(OracleError::Overflow { .. })));
    }

    #[test]
    fn euler_product_constants() {
        assert_eq!(a_r_euler_product(1, 1000).unwrap().value, 1.0);
        let a2 = a_r_euler_product(2, 100_000).unwrap();
        let exact = 6.0 / (PI * PI);
        assert!((a2.value + a2.tail_estimate - exact).abs() < 0.2 * a2.tail_estimate.abs());
        assert!(a_r_euler_product(2, 50).is_err());
    }

    #[test]
    fn divisor_square_trend_small_cases() {
        // r = 2, y = 10: Σ d(k)²/k by hand = 1 + 4/2 + 4/3 + 9/4 + 4/5 + 16/6 + 4/7 + 16/8 + 9/9 + 16/10
        let by_hand = 1.0 + 2.0 + 4.0 / 3.0 + 2.25 + 0.8 + 16.0 / 6.0 + 4.0 / 7.0 + 2.0 + 1.0 + 1.6;
        let a2 = a_r_euler_product(2, 1_000_000).unwrap().value;
        let lead = a2 * 10f64.ln().powi(4) / 24.0;
        let got = divisor_square_trend(2, &[10]).unwrap()[0];
        assert!((got - by_hand / lead).abs() < 1e-12);
        let r1 = divisor_square_trend(1, &[1_000_000]).unwrap()[0];
        assert!((r1 - 1.0418).abs() < 1e-4, "{r1}");
    }
}
