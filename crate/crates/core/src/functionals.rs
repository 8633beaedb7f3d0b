//! The normalized mean values `U`, `V1`, `V2`, `V3` of the composite
//! mollifier `H = H1 + ζ·H2` and the ratio `h(c) = (V1 + V2 + V3) / (π U)`.
//!
//! `U` is the plain mean square of `H` on the critical line and the `V`
//! terms are the mean square over the zeros, integrated across the shift
//! window `|η| ≤ c/2` (with `η = α log y`). All four are quadratic in the
//! coefficients of `P1`, `P2`.
//!
//! `U` and `V3` are exact polynomial algebra. `V1` and `V2` need the
//! sinc-type kernels `sin(ct/2)/t` and `Si`, and are evaluated with a
//! nested fixed-order Gauss–Legendre rule on `x ∈ [0, 1]`, `t ∈ [0, x]`.
//!
//! The public entry points take and return `f64` but evaluate in
//! double-double; the generic `*_t` forms are shared with the optimizer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::{beta_integer_t, KernelError, Polynomial};
use crate::quadrature::{dd_rule, GaussLegendre};
use crate::real::{binomial_t, factorial_t, sign, Dd, Real};
use crate::special::{cos_moment, half_sinc, si, sin_moment};

/// Largest Taylor order `j` of the `B` series that can be expanded.
pub const MAX_B_ORDER: usize = 150;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("theta = {0} is not supported here (the window functionals need theta = 1/2)")]
    ThetaUnsupported(f64),
    #[error("degenerate mollifier: U = {u:e}")]
    ZeroMollifier { u: f64 },
    #[error("V3 series did not converge after {j_max} terms (last term {last_term:e}, partial sum {partial:e})")]
    SeriesNotConverged {
        j_max: usize,
        last_term: f64,
        partial: f64,
    },
    #[error("B series order j = {0} exceeds the supported range")]
    OrderTooLarge(usize),
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Which instance of `h` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    /// Divisor order `r ≥ 1` of the mollifier.
    pub r: usize,
    /// Length exponent `ϑ` with `y = T^ϑ`.
    pub theta: f64,
    /// Window half-width in units of `1/L`.
    pub c: f64,
    /// Number of even terms of the `V3` series.
    pub j_max: usize,
    /// Gauss–Legendre order for both nesting levels.
    pub quad_order: usize,
    /// Relative size below which a `V3` term ends the series.
    pub tail_tol: f64,
}

impl Default for FunctionalParams {
    fn default() -> Self {
        Self {
            r: 2,
            theta: 0.5,
            c: 0.0,
            j_max: 40,
            quad_order: 64,
            tail_tol: 1e-15,
        }
    }
}

impl FunctionalParams {
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_r(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    pub fn validate(&self) -> Result<(), FunctionalError> {
        let bad = |m: String| Err(FunctionalError::InvalidParams(m));
        if self.r < 1 {
            return bad(format!("r must be >= 1, got {}", self.r));
        }
        if !(self.theta > 0.0 && self.theta <= 0.5) {
            return bad(format!("theta must lie in (0, 1/2], got {}", self.theta));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return bad(format!("c must be finite and >= 0, got {}", self.c));
        }
        if self.j_max < 1 {
            return bad("j_max must be >= 1".into());
        }
        if 2 * self.j_max + 2 > MAX_B_ORDER {
            return bad(format!("j_max must be <= {}", (MAX_B_ORDER - 2) / 2));
        }
        if self.quad_order < 8 {
            return bad(format!("quad_order must be >= 8, got {}", self.quad_order));
        }
        if !(self.tail_tol > 0.0) {
            return bad("tail_tol must be positive".into());
        }
        Ok(())
    }

    fn require_half_theta(&self) -> Result<(), FunctionalError> {
        self.validate()?;
        if self.theta != 0.5 {
            return Err(FunctionalError::ThetaUnsupported(self.theta));
        }
        Ok(())
    }
}

/// `U`, `V1`, `V2`, `V3` and `h`, with the individual summands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalBreakdown {
    pub u: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub h: f64,
    /// `P1²`, cross and `(ζH2)²` summands of `U`.
    pub u_terms: [f64; 3],
    /// The six summands of `V2`, prefactor included.
    pub v2_terms: [f64; 6],
    pub series_terms_used: usize,
    /// `|h(quad_order) − h(quad_order/2)|`.
    pub quadrature_error_estimate: f64,
}

/// Normalizing constants of the three quadratic pieces.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Weights<T: Real = f64> {
    /// exponent `(r+1)²` and `1/Γ((r+1)²)`
    pub a11: usize,
    pub n11: T,
    /// exponent `r(r+1)` and `1/(Γ(r+1)Γ(r(r+1)))`
    pub a12: usize,
    pub n12: T,
    /// exponent `r²` and `1/(Γ(r)²Γ(r²))`
    pub a22: usize,
    pub n22: T,
}

impl<T: Real> Weights<T> {
    pub(crate) fn new(r: usize) -> Self {
        let a11 = (r + 1) * (r + 1);
        let a12 = r * (r + 1);
        let a22 = r * r;
        let g = factorial_t::<T>;
        Self {
            a11,
            n11: T::one() / g(a11 - 1),
            a12,
            n12: T::one() / (g(r) * g(a12 - 1)),
            a22,
            n22: T::one() / (g(r - 1) * g(r - 1) * g(a22 - 1)),
        }
    }
}

fn weight<T: Real>(x: T, a: usize) -> T {
    (T::one() - x).powu(a - 1)
}

fn finite<T: Real>(v: T, what: &'static str) -> Result<T, FunctionalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FunctionalError::NonFinite(what))
    }
}

fn to_dd(p: &Polynomial) -> Polynomial<Dd> {
    p.cast()
}

/// The three summands of `U`.
pub fn compute_u_terms(
    p1: &Polynomial,
    p2: &Polynomial,
    params: &FunctionalParams,
) -> Result<[f64; 3], FunctionalError> {
    params.validate()?;
    Ok(u_terms_t(&to_dd(p1), &to_dd(p2), params)?.map(|t| t.to_f64()))
}

pub(crate) fn u_terms_t<T: Real>(
    p1: &Polynomial<T>,
    p2: &Polynomial<T>,
    params: &FunctionalParams,
) -> Result<[T; 3], FunctionalError> {
    let r = params.r;
    let w = Weights::<T>::new(r);
    let q_r = p1.convolution_kernel(r)?.into_polynomial();
    let r_lo = p2.convolution_kernel(r - 1)?.into_polynomial();
    let r_hi = p2.convolution_kernel(r)?.into_polynomial();

    let t1 = w.n11 * (p1 * p1).beta_moment(w.a11)?;
    let t2 = w.n12 * (&q_r * p2).beta_moment(w.a12)? * 2.0;
    let sq = (&r_lo * &r_lo)
        .scale(T::one() / params.theta)
        .add_scaled(&(&r_hi * &r_lo), T::from_f64(-2.0));
    let t3 = w.n22 * sq.beta_moment(w.a22)?;
    Ok([t1, t2, t3])
}

/// `U`: the normalized mean square of `H` on the critical line.
pub fn compute_u(
    p1: &Polynomial,
    p2: &Polynomial,
    params: &FunctionalParams,
) -> Result<f64, FunctionalError> {
    let t = compute_u_terms(p1, p2, params)?;
    finite(t[0] + t[1] + t[2], "U")
}

/// `V1`: the `|H1|²` part of the window mean over the zeros.
pub fn compute_v1(p1: &Polynomial, params: &FunctionalParams) -> Result<f64, FunctionalError> {
    params.require_half_theta()?;
    let rule = dd_rule(params.quad_order);
    let p1 = to_dd(p1);
    let tables = WindowTables::build(params, p1.degree(), None, &rule)?;
    Ok(tables.v1(&p1)?.to_f64())
}

/// The six summands of `V2` (prefactor included).
pub fn compute_v2_terms(
    p1: &Polynomial,
    p2: &Polynomial,
    params: &FunctionalParams,
) -> Result<[f64; 6], FunctionalError> {
    params.require_half_theta()?;
    let rule = dd_rule(params.quad_order);
    let (p1, p2) = (to_dd(p1), to_dd(p2));
    let tables = WindowTables::build(params, p1.degree(), Some(p2.degree()), &rule)?;
    Ok(tables.v2_terms(&p1, &p2).map(|t| t.to_f64()))
}

/// `V2`: twice the real part of the `ζH2 · H1` cross term over the zeros.
pub fn compute_v2(
    p1: &Polynomial,
    p2: &Polynomial,
    params: &FunctionalParams,
) -> Result<f64, FunctionalError> {
    let t = compute_v2_terms(p1, p2, params)?;
    finite(t.iter().sum(), "V2")
}

fn sum<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a + b)
}

/// Dense row-major square matrix of scalars.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Table<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Table<T> {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn at(&self, i: usize, k: usize) -> T {
        self.data[i * self.cols + k]
    }

    fn add(&mut self, i: usize, k: usize, v: T) {
        self.data[i * self.cols + k] += v;
    }

    /// `aᵀ M b`.
    pub fn contract(&self, a: &[T], b: &[T]) -> T {
        let mut acc = T::zero();
        for (i, &ai) in a.iter().enumerate().take(self.rows) {
            if ai.is_zero() {
                continue;
            }
            let mut row = T::zero();
            for (k, &bk) in b.iter().enumerate().take(self.cols) {
                row += self.at(i, k) * bk;
            }
            acc += ai * row;
        }
        acc
    }
}

/// The window functionals `V1` and `V2` on monomials.
///
/// `v1[i][i']` satisfies `V1(P1) = Σ a_i a_i' v1[i][i']` for
/// `P1 = Σ a_i xⁱ` (a symmetric matrix), and `v2[τ][i][k]` is summand `τ`
/// of `V2(xⁱ, xᵏ)`, prefactor included; `V2` is bilinear in `(P1, P2)`.
/// One pass over the nested quadrature nodes fills every entry, so the
/// transcendental kernels are evaluated once per node rather than once per
/// coefficient pair.
#[derive(Debug, Clone)]
pub(crate) struct WindowTables<T: Real> {
    pub v1: Table<T>,
    pub v2: Option<[Table<T>; 6]>,
}

impl<T: Real> WindowTables<T> {
    /// Tables for `deg P1 ≤ m1` and, when given, `deg P2 ≤ m2`.
    pub fn build(
        params: &FunctionalParams,
        m1: usize,
        m2: Option<usize>,
        rule: &GaussLegendre<T>,
    ) -> Result<Self, FunctionalError> {
        let (n1, n2) = (m1 + 1, m2.map_or(0, |m| m + 1));
        let mut v1 = Table::zeros(n1, n1);
        let mut v2 = m2.map(|_| std::array::from_fn(|_| Table::zeros(n1, n2)));
        if params.c == 0.0 {
            return Ok(Self { v1, v2 });
        }
        let c = T::from_f64(params.c);
        let r = params.r;
        let w = Weights::<T>::new(r);
        let half_window = c * 0.5;
        let zero = T::zero();
        let beta = beta_integer_t::<T>;

        // V1: n11 [c β(a11−1, i+i') − (r+1)(C + Cᵀ)], C[i][i'] = ∫ w xⁱ ∫ s(t) (x−t)^{i'}
        // V2 uses S[p] = ∫ s(t) (x−t)^p up to p = m1 + r + 1 (from Q_r of xⁱ).
        let p_max = n1.max(n2).max(if m2.is_some() { m1 + r + 2 } else { 0 });
        let even: Vec<(usize, T)> = (0..)
            .take_while(|j| 2 * j + 1 <= r)
            .map(|j| (j, binomial_t::<T>(r, 2 * j + 1) * sign(j) / factorial_t::<T>(2 * j)))
            .collect();
        let odd: Vec<(usize, T)> = (0..)
            .take_while(|j| 2 * j + 2 <= r)
            .map(|j| (j, binomial_t::<T>(r, 2 * j + 2) * -sign(j) / factorial_t::<T>(2 * j + 1)))
            .collect();
        let q_coef: Vec<T> = (0..n1).map(|i| beta(r, i)).collect();

        let mut pows = vec![zero; p_max];
        let mut s_acc = vec![zero; p_max];
        let mut g4 = vec![zero; n1];
        let mut g5 = vec![vec![zero; n1]; even.len()];
        let mut g6 = vec![vec![zero; n1]; odd.len()];
        let mut xp = vec![zero; p_max.max(n2 + r + 2)];
        for (x, wx) in rule.mapped(zero, T::one()) {
            s_acc.iter_mut().for_each(|v| *v = zero);
            g4.iter_mut().for_each(|v| *v = zero);
            g5.iter_mut().flatten().for_each(|v| *v = zero);
            g6.iter_mut().flatten().for_each(|v| *v = zero);
            for (t, wt) in rule.mapped(zero, x) {
                let u = x - t;
                let mut pw = T::one();
                for p in pows.iter_mut() {
                    *p = pw;
                    pw *= u;
                }
                let s = wt * half_sinc(c, t);
                for (acc, &p) in s_acc.iter_mut().zip(&pows) {
                    *acc += s * p;
                }
                if v2.is_none() {
                    continue;
                }
                let base = wt * t.powu(r);
                let omega = t - 2.0;
                let si_w = base * si(omega * half_window) * 2.0;
                for (acc, &p) in g4.iter_mut().zip(&pows) {
                    *acc += si_w * p;
                }
                for (row, &(j, _)) in g5.iter_mut().zip(&even) {
                    let m = base * cos_moment(2 * j, omega, half_window);
                    for (acc, &p) in row.iter_mut().zip(&pows) {
                        *acc += m * p;
                    }
                }
                for (row, &(j, _)) in g6.iter_mut().zip(&odd) {
                    let m = base * sin_moment(2 * j + 1, omega, half_window);
                    for (acc, &p) in row.iter_mut().zip(&pows) {
                        *acc += m * p;
                    }
                }
            }
            let mut pw = T::one();
            for p in xp.iter_mut() {
                *p = pw;
                pw *= x;
            }
            let w11 = wx * weight(x, w.a11);
            for i in 0..n1 {
                for i2 in 0..n1 {
                    v1.add(i, i2, w11 * xp[i] * s_acc[i2]);
                }
            }
            let Some(tabs) = v2.as_mut() else { continue };
            let w12 = wx * weight(x, w.a12);
            for i in 0..n1 {
                let q_at_x = q_coef[i] * xp[r + i + 1];
                let q_conv = q_coef[i] * s_acc[r + i + 1];
                for k in 0..n2 {
                    tabs[1].add(i, k, -(w12 * xp[k] * q_conv * (2 * (r + 1)) as f64));
                    tabs[2].add(i, k, -(w12 * q_at_x * s_acc[k] * (2 * r) as f64));
                    tabs[3].add(i, k, w12 * xp[k] * g4[i]);
                    for (&(j, coef), row) in even.iter().zip(&g5) {
                        let rk = beta(2 * j, k) * xp[2 * j + k + 1];
                        tabs[4].add(i, k, w12 * coef * rk * row[i]);
                    }
                    for (&(j, coef), row) in odd.iter().zip(&g6) {
                        let rk = beta(2 * j + 1, k) * xp[2 * j + k + 2];
                        tabs[5].add(i, k, w12 * coef * rk * row[i]);
                    }
                }
            }
        }

        // symmetrize V1 and add the diagonal term
        let mut sym = Table::zeros(n1, n1);
        for i in 0..n1 {
            for i2 in 0..n1 {
                let coupled = (v1.at(i, i2) + v1.at(i2, i)) * (r + 1) as f64;
                sym.data[i * n1 + i2] = w.n11 * (c * beta(w.a11 - 1, i + i2) - coupled);
            }
        }
        if let Some(tabs) = v2.as_mut() {
            for i in 0..n1 {
                for k in 0..n2 {
                    tabs[0].add(i, k, c * q_coef[i] * beta(w.a12 - 1, r + i + 1 + k) * 2.0);
                }
            }
            for tab in tabs.iter_mut() {
                tab.data.iter_mut().for_each(|v| *v = *v * w.n12);
            }
        }
        let out = Self { v1: sym, v2 };
        let all_finite = out.v1.data.iter().all(|v| v.is_finite())
            && out.v2.iter().flatten().all(|t| t.data.iter().all(|v| v.is_finite()));
        if !all_finite {
            return Err(FunctionalError::NonFinite("window tables"));
        }
        Ok(out)
    }

    pub fn v1(&self, p1: &Polynomial<T>) -> Result<T, FunctionalError> {
        finite(self.v1.contract(p1.coeffs(), p1.coeffs()), "V1")
    }

    /// The six `V2` summands; zero when the tables were built without `P2`.
    pub fn v2_terms(&self, p1: &Polynomial<T>, p2: &Polynomial<T>) -> [T; 6] {
        match &self.v2 {
            Some(tabs) => std::array::from_fn(|k| tabs[k].contract(p1.coeffs(), p2.coeffs())),
            None => [T::zero(); 6],
        }
    }
}

/// Lazily extended table of the kernels `R_u = ∫₀ˣ tᵘ P2(x − t) dt`.
struct KernelTable<'a, T: Real> {
    base: &'a Polynomial<T>,
    cache: Vec<Polynomial<T>>,
}

impl<'a, T: Real> KernelTable<'a, T> {
    fn new(base: &'a Polynomial<T>) -> Self {
        Self {
            base,
            cache: Vec::new(),
        }
    }

    fn get(&mut self, u: usize) -> Result<&Polynomial<T>, KernelError> {
        while self.cache.len() <= u {
            let k = self.base.convolution_kernel(self.cache.len())?;
            self.cache.push(k.into_polynomial());
        }
        Ok(&self.cache[u])
    }
}

/// The Taylor coefficient `B(r, θ, j; u)` of the `|ζH2|²` discrete mean, as
/// a polynomial in `u`.
pub fn compute_b(
    r: usize,
    theta: f64,
    j: usize,
    p2: &Polynomial,
) -> Result<Polynomial, FunctionalError> {
    if r < 1 {
        return Err(FunctionalError::InvalidParams("r must be >= 1".into()));
    }
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(FunctionalError::InvalidParams(format!(
            "theta must lie in (0, 1/2], got {theta}"
        )));
    }
    let p2 = to_dd(p2);
    let mut table = KernelTable::new(&p2);
    Ok(b_with_table(r, theta, j, &mut table)?.cast())
}

fn b_with_table<T: Real>(
    r: usize,
    theta: f64,
    j: usize,
    table: &mut KernelTable<'_, T>,
) -> Result<Polynomial<T>, FunctionalError> {
    if j + 2 > MAX_B_ORDER {
        return Err(FunctionalError::OrderTooLarge(j));
    }
    if table.base.is_zero() {
        return Ok(Polynomial::zero());
    }
    let theta_t = T::from_f64(theta);
    let inv_jfact = T::one() / factorial_t::<T>(j);
    let r_lo = table.get(r - 1)?.clone();
    let r_hi = table.get(r)?.clone();
    let conv_lo = r_lo.convolution_kernel(j)?.into_polynomial();
    let conv_hi = r_hi.convolution_kernel(j)?.into_polynomial();

    let mut b = (&r_lo * &conv_lo).scale(-(inv_jfact * r as f64));
    b = b.add_scaled(&(&r_hi * &conv_lo), theta_t * inv_jfact * r as f64);
    b = b.add_scaled(&(&r_lo * &conv_hi), theta_t * inv_jfact * r as f64);

    // −θ Γ(r) Σ_n (−1)^n C(r, n+2) / ((j−n)! (r+n+1)!) · R_{r+n+1}(u) ∫₀ᵘ t^{r−1}(θ⁻¹ − t)^{j−n} P2(u − t) dt
    let gamma_r = factorial_t::<T>(r - 1);
    let inv_theta = T::one() / theta_t;
    let n_hi = (j as i64).min(r as i64 - 2);
    for n in -2..=n_hi {
        let k = (j as i64 - n) as usize;
        let outer_idx = (r as i64 + n + 1) as usize;
        let binom = binomial_t::<T>(r, (n + 2) as usize);
        if binom.is_zero() {
            continue;
        }
        let coef = -(theta_t * gamma_r * binom * sign(n.rem_euclid(2) as usize))
            / (factorial_t::<T>(k) * factorial_t::<T>(outer_idx));
        // (θ⁻¹ − t)^k = Σ_m C(k, m) θ^{−(k−m)} (−t)^m, and ∫ t^{r−1+m} P2(u − t) dt = R_{r−1+m}(u)
        let mut inner = Polynomial::zero();
        for m in 0..=k {
            let s = binomial_t::<T>(k, m) * inv_theta.powu(k - m) * sign(m);
            inner = inner.add_scaled(table.get(r - 1 + m)?, s);
        }
        let outer = table.get(outer_idx)?;
        b = b.add_scaled(&(outer * &inner), coef);
    }
    if !b.is_finite() {
        return Err(FunctionalError::NonFinite("B"));
    }
    Ok(b)
}

/// `V3` together with the number of series terms used.
pub fn compute_v3_with_terms(
    p2: &Polynomial,
    params: &FunctionalParams,
) -> Result<(f64, usize), FunctionalError> {
    params.require_half_theta()?;
    let (v, n) = v3_t(&to_dd(p2), params)?;
    Ok((v.to_f64(), n))
}

pub(crate) fn v3_t<T: Real>(
    p2: &Polynomial<T>,
    params: &FunctionalParams,
) -> Result<(T, usize), FunctionalError> {
    if params.c == 0.0 || p2.is_zero() {
        return Ok((T::zero(), 0));
    }
    let c = T::from_f64(params.c);
    let r = params.r;
    let w = Weights::<T>::new(r);
    let mut table = KernelTable::new(p2);
    let mut partial = T::zero();
    let mut last = f64::INFINITY;
    let half_c_sq = (c * 0.5) * (c * 0.5);
    let mut power = T::one(); // (c/2)^{2j}
    for j in 1..=params.j_max {
        power *= half_c_sq;
        let b = b_with_table(r, 0.5, 2 * j, &mut table)?;
        // (−1)^j c^{2j+1} / (2^{2j−1} (2j+1)) = 2 (−1)^j (c/2)^{2j} c / (2j+1)
        let window = power * c * (2.0 * sign(j)) / (2 * j + 1) as f64;
        let term = window * w.n22 * b.beta_moment(w.a22)?;
        partial += term;
        last = term.to_f64();
        if term.abs().to_f64() <= params.tail_tol * partial.abs().to_f64() {
            return Ok((finite(partial, "V3")?, j));
        }
    }
    Err(FunctionalError::SeriesNotConverged {
        j_max: params.j_max,
        last_term: last,
        partial: partial.to_f64(),
    })
}

/// `V3`: the `|ζH2|²` part of the window mean over the zeros.
pub fn compute_v3(p2: &Polynomial, params: &FunctionalParams) -> Result<f64, FunctionalError> {
    compute_v3_with_terms(p2, params).map(|(v, _)| v)
}

/// `V1 + V2 + V3`, the numerator of `π h`.
pub fn compute_numerator(
    p1: &Polynomial,
    p2: &Polynomial,
    params: &FunctionalParams,
) -> Result<f64, FunctionalError> {
    params.require_half_theta()?;
    let rule = dd_rule(params.quad_order);
    let (p1, p2) = (to_dd(p1), to_dd(p2));
    let tables = WindowTables::build(params, p1.degree(), Some(p2.degree()), &rule)?;
    let v1 = tables.v1(&p1)?;
    let v2 = sum(&tables.v2_terms(&p1, &p2));
    let (v3, _) = v3_t(&p2, params)?;
    Ok(finite(v1 + v2 + v3, "numerator")?.to_f64())
}

/// `U` of each coordinate monomial `x^k` of `P1` and `P2`, i.e. the diagonal
/// of the `U` quadratic form; this is the scale that decides when `U` is
/// numerically zero.
pub(crate) fn u_diagonal_scale<T: Real>(
    p1: &Polynomial<T>,
    p2: &Polynomial<T>,
    params: &FunctionalParams,
) -> Result<T, FunctionalError> {
    let mut scale = T::zero();
    let zero = Polynomial::<T>::zero();
    for (k, &a) in p1.coeffs().iter().enumerate() {
        if !a.is_zero() {
            let [u, _, _] = u_terms_t(&Polynomial::monomial(k), &zero, params)?;
            scale += a * a * u.abs();
        }
    }
    for (k, &a) in p2.coeffs().iter().enumerate() {
        if !a.is_zero() {
            let [_, _, u] = u_terms_t(&zero, &Polynomial::monomial(k), params)?;
            scale += a * a * u.abs();
        }
    }
    Ok(scale)
}

/// `U` below this fraction of its diagonal scale counts as zero.
pub const ZERO_MOLLIFIER_RELATIVE: f64 = 1e-24;

/// The full breakdown of `h(c) = (V1 + V2 + V3) / (π U)`.
///
/// The arithmetic is carried out in double-double and rounded at the end.
/// Optimal mollifiers have large coefficients of alternating sign, and in
/// plain `f64` the cancellation costs about seven digits of `h`.
pub fn compute_h(
    p1: &Polynomial,
    p2: &Polynomial,
    params: &FunctionalParams,
) -> Result<FunctionalBreakdown, FunctionalError> {
    params.require_half_theta()?;
    let (p1, p2) = (to_dd(p1), to_dd(p2));
    if p1.is_zero() && p2.is_zero() {
        return Err(FunctionalError::ZeroMollifier { u: 0.0 });
    }
    let u_terms = u_terms_t(&p1, &p2, params)?;
    let u = sum(&u_terms);
    let scale = u_diagonal_scale(&p1, &p2, params)?;
    if !(u.to_f64() > ZERO_MOLLIFIER_RELATIVE * scale.to_f64()) {
        return Err(FunctionalError::ZeroMollifier { u: u.to_f64() });
    }

    let (m1, m2) = (p1.degree(), Some(p2.degree()));
    let tables = WindowTables::build(params, m1, m2, &dd_rule(params.quad_order))?;
    let v1 = tables.v1(&p1)?;
    let v2_terms = tables.v2_terms(&p1, &p2);
    let v2 = sum(&v2_terms);
    let (v3, series_terms_used) = v3_t(&p2, params)?;
    let pi = Dd::pi();
    let h = (v1 + v2 + v3) / (pi * u);

    let coarse = WindowTables::build(params, m1, m2, &dd_rule((params.quad_order / 2).max(4)))?;
    let v1c = coarse.v1(&p1)?;
    let v2c = sum(&coarse.v2_terms(&p1, &p2));
    let hc = (v1c + v2c + v3) / (pi * u);

    Ok(FunctionalBreakdown {
        u: u.to_f64(),
        v1: v1.to_f64(),
        v2: v2.to_f64(),
        v3: v3.to_f64(),
        h: finite(h, "h")?.to_f64(),
        u_terms: u_terms.map(|t| t.to_f64()),
        v2_terms: v2_terms.map(|t| t.to_f64()),
        series_terms_used,
        quadrature_error_estimate: (h - hc).abs().to_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    fn params(r: usize, c: f64) -> FunctionalParams {
        FunctionalParams::default().with_r(r).with_c(c)
    }

    #[test]
    fn u_examples() {
        let p = params(1, 0.0);
        let u = compute_u(&poly(&[1.0]), &poly(&[0.0]), &p).unwrap();
        assert!((u - 1.0 / 24.0).abs() < 1e-14);
        let u = compute_u(&poly(&[0.0]), &poly(&[1.0]), &p).unwrap();
        assert!((u - 5.0 / 12.0).abs() < 1e-14);
        let u = compute_u(&poly(&[1.0]), &poly(&[1.0]), &p).unwrap();
        assert!((u - 13.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn u_general_theta() {
        // r=1, P2=1: R0 = x, R1 = x²/2; ∫ (x²/θ − x³) dx = 1/(3θ) − 1/4
        let mut p = params(1, 0.0);
        p.theta = 0.25;
        let u = compute_u(&poly(&[0.0]), &poly(&[1.0]), &p).unwrap();
        assert!((u - (4.0 / 3.0 - 0.25)).abs() < 1e-14);
    }

    #[test]
    fn window_terms_vanish_at_zero_width() {
        let p1 = poly(&[1.0, -2.0, 0.5]);
        let p2 = poly(&[0.3, 1.0]);
        let p = params(2, 0.0);
        assert_eq!(compute_v1(&p1, &p).unwrap(), 0.0);
        assert_eq!(compute_v2(&p1, &p2, &p).unwrap(), 0.0);
        assert_eq!(compute_v3(&p2, &p).unwrap(), 0.0);
        assert_eq!(compute_h(&p1, &p2, &p).unwrap().h, 0.0);
    }

    #[test]
    fn v2_and_v3_vanish_without_p2() {
        let p1 = poly(&[1.0, 2.0, -1.0]);
        for r in 1..=3 {
            let p = params(r, PI);
            assert_eq!(compute_v2(&p1, &Polynomial::zero(), &p).unwrap(), 0.0);
            assert_eq!(compute_v3(&Polynomial::zero(), &p).unwrap(), 0.0);
            assert!(compute_b(r, 0.5, 0, &Polynomial::zero()).unwrap().is_zero());
        }
    }

    #[test]
    fn zero_mollifier_rejected() {
        let err = compute_h(&poly(&[0.0]), &poly(&[0.0]), &params(2, 1.0)).unwrap_err();
        assert!(matches!(err, FunctionalError::ZeroMollifier { .. }));
    }

    #[test]
    fn theta_other_than_half_rejected_for_window_terms() {
        let mut p = params(2, 1.0);
        p.theta = 0.4;
        assert!(compute_u(&poly(&[1.0]), &poly(&[1.0]), &p).is_ok());
        assert_eq!(
            compute_v1(&poly(&[1.0]), &p).unwrap_err(),
            FunctionalError::ThetaUnsupported(0.4)
        );
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params(2, 1.0);
        p.quad_order = 4;
        assert!(matches!(p.validate(), Err(FunctionalError::InvalidParams(_))));
        let p = params(0, 1.0);
        assert!(p.validate().is_err());
        let p = params(2, -1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn b_rejects_huge_order() {
        assert_eq!(
            compute_b(2, 0.5, MAX_B_ORDER, &poly(&[1.0])).unwrap_err(),
            FunctionalError::OrderTooLarge(MAX_B_ORDER)
        );
    }

    #[test]
    fn v3_reports_non_convergence() {
        let mut p = params(2, 3.0 * PI);
        p.j_max = 2;
        let err = compute_v3(&poly(&[1.0, 1.0]), &p).unwrap_err();
        assert!(matches!(err, FunctionalError::SeriesNotConverged { j_max: 2, .. }));
    }

    #[test]
    fn scale_invariance() {
        let p1 = poly(&[1.0, -3.0, 2.0, 0.5]);
        let p2 = poly(&[-0.5, 4.0, -1.0, 0.25]);
        let p = params(2, 2.0 * PI);
        let h0 = compute_h(&p1, &p2, &p).unwrap().h;
        for s in [-3.7, 0.01, 250.0] {
            let hs = compute_h(&p1.scale(s), &p2.scale(s), &p).unwrap().h;
            assert!((hs - h0).abs() <= 1e-12 * h0.abs(), "s={s}: {hs} vs {h0}");
        }
    }

    #[test]
    fn breakdown_is_consistent() {
        let p1 = poly(&[1.0, -3.0, 2.0]);
        let p2 = poly(&[-0.5, 4.0, -1.0]);
        let b = compute_h(&p1, &p2, &params(2, PI)).unwrap();
        assert!((b.u - b.u_terms.iter().sum::<f64>()).abs() < 1e-15);
        assert!((b.v2 - b.v2_terms.iter().sum::<f64>()).abs() < 1e-15);
        assert!((b.h - (b.v1 + b.v2 + b.v3) / (PI * b.u)).abs() < 1e-15);
        assert!(b.quadrature_error_estimate < 1e-10);
        assert!(b.series_terms_used >= 1);
    }
}
