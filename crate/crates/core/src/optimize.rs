//! Minimizing `h(c)` over coefficient vectors.
//!
//! Both `V1 + V2 + V3` and `U` are quadratic forms in the joint vector
//! `v = (c_0..c_M, d_0..d_M)` of `(P1, P2)`, so
//! `min_v h = λ_min(N, D) / π` for the symmetric pencil `(N, D)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::functionals::{u_terms_t, v3_t, FunctionalError, FunctionalParams, WindowTables};
use crate::kernels::Polynomial;
use crate::quadrature::dd_rule;
use crate::real::{Dd, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("denominator form is not positive definite")]
    NotPositiveDefinite,
    #[error("bracket [{c_lo}, {c_hi}] does not straddle h_min = 1 (h_min = {h_lo}, {h_hi})")]
    Bracket {
        c_lo: f64,
        c_hi: f64,
        h_lo: f64,
        h_hi: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
}

/// `N` and `D` with `vᵀNv = V1 + V2 + V3` and `vᵀDv = U`.
///
/// The public matrices are the `f64` roundings; the forms themselves are
/// kept in double-double. In the monomial basis the diagonally equilibrated
/// `D` has condition number near `10¹⁵` at degree 10, so rounding the
/// entries to `f64` already moves the smallest eigenvalues by O(1).
#[derive(Debug, Clone)]
pub struct QuadraticForms {
    pub numerator: DMatrix<f64>,
    pub denominator: DMatrix<f64>,
    pub params: FunctionalParams,
    pub degree: usize,
    num: SquareDd,
    den: SquareDd,
}

impl QuadraticForms {
    /// Forms given directly in `f64` (mainly for tests and external input).
    pub fn from_matrices(
        numerator: DMatrix<f64>,
        denominator: DMatrix<f64>,
        params: FunctionalParams,
        degree: usize,
    ) -> Result<Self, OptimizeError> {
        let n = 2 * degree + 2;
        if numerator.shape() != (n, n) || denominator.shape() != (n, n) {
            return Err(OptimizeError::InvalidArgument(format!(
                "matrices must be {n}x{n} for degree {degree}"
            )));
        }
        let num = SquareDd::from_f64(&numerator);
        let den = SquareDd::from_f64(&denominator);
        Ok(Self {
            numerator,
            denominator,
            params,
            degree,
            num,
            den,
        })
    }

    fn from_dd(num: SquareDd, den: SquareDd, params: FunctionalParams, degree: usize) -> Self {
        Self {
            numerator: num.to_f64(),
            denominator: den.to_f64(),
            params,
            degree,
            num,
            den,
        }
    }

    pub fn c(&self) -> f64 {
        self.params.c
    }

    pub fn dim(&self) -> usize {
        2 * self.degree + 2
    }

    /// `vᵀNv / (π vᵀDv)`, evaluated in double-double.
    pub fn ratio(&self, v: &DVector<f64>) -> f64 {
        let v: Vec<Dd> = v.iter().map(|&x| Dd::from(x)).collect();
        self.ratio_dd(&v).to_f64()
    }

    fn ratio_dd(&self, v: &[Dd]) -> Dd {
        self.num.quadratic(v) / (self.den.quadratic(v) * Dd::pi())
    }

    /// Smallest squared pivot of the Cholesky factorization of the
    /// equilibrated `D` (double-double), or `None` when a pivot is not
    /// positive, i.e. `D` is not positive definite.
    pub fn denominator_min_pivot(&self) -> Option<f64> {
        Whitening::new(&self.den).ok().map(|w| w.min_pivot)
    }

    /// Smallest eigenvalue of the diagonally equilibrated `D`
    /// (`S D S` with `S = diag(D)^{−1/2}`), or `None` when the Cholesky
    /// factorization breaks down.
    pub fn denominator_min_eigenvalue(&self) -> Option<f64> {
        let w = Whitening::new(&self.den).ok()?;
        let largest = SymmetricEigen::new(w.inverse())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        (largest > 0.0).then(|| 1.0 / largest)
    }
}

/// Dense symmetric-use square matrix in double-double, row-major.
#[derive(Debug, Clone, PartialEq)]
struct SquareDd {
    n: usize,
    a: Vec<Dd>,
}

impl SquareDd {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![Dd::zero(); n * n],
        }
    }

    fn from_f64(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self {
            n,
            a: (0..n * n).map(|k| Dd::from(m[(k / n, k % n)])).collect(),
        }
    }

    fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_f64())
    }

    fn get(&self, i: usize, j: usize) -> Dd {
        self.a[i * self.n + j]
    }

    fn set_sym(&mut self, i: usize, j: usize, v: Dd) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    fn quadratic(&self, v: &[Dd]) -> Dd {
        let mut acc = Dd::zero();
        for i in 0..self.n {
            let mut row = Dd::zero();
            for j in 0..self.n {
                row += self.get(i, j) * v[j];
            }
            acc += v[i] * row;
        }
        acc
    }
}

/// Splits a joint coefficient vector into `(P1, P2)`.
pub fn split_vector(v: &[f64], degree: usize) -> (Polynomial, Polynomial) {
    assert_eq!(v.len(), 2 * degree + 2, "vector length does not match degree");
    (
        Polynomial::new(v[..=degree].to_vec()),
        Polynomial::new(v[degree + 1..].to_vec()),
    )
}

/// Series tolerance and length used for the `V3` block during assembly.
pub const ASSEMBLY_TAIL_TOL: f64 = 1e-31;
pub const ASSEMBLY_J_MAX: usize = 74;

/// Builds `N`, `D` in double-double.
///
/// `D` and the `V3` block of `N` come from polarization,
/// `q(e_i + e_j) − q(e_i) − q(e_j)`, of the closed-form functionals on unit
/// coefficient vectors. The `V1` and `V2` blocks are read off the monomial
/// window tables that the functionals themselves contract.
pub fn assemble(params: &FunctionalParams, degree: usize) -> Result<QuadraticForms, OptimizeError> {
    params.validate()?;
    if params.theta != 0.5 {
        return Err(FunctionalError::ThetaUnsupported(params.theta).into());
    }
    let m = degree + 1;
    let n = 2 * m;
    let unit = |i: usize, j: Option<usize>| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        if let Some(j) = j {
            v[j] += 1.0;
        }
        let (p1, p2) = split_vector(&v, degree);
        (p1.cast::<Dd>(), p2.cast::<Dd>())
    };
    let u_of = |v: (Polynomial<Dd>, Polynomial<Dd>)| -> Result<Dd, FunctionalError> {
        let t = u_terms_t(&v.0, &v.1, params)?;
        Ok(t[0] + t[1] + t[2])
    };
    // The V3 series of a single monomial is truncated relative to that
    // monomial's own value; entries then combine with cancellation of many
    // orders of magnitude, so assembly sums the series to double-double
    // resolution instead of the caller's tolerance.
    let series = FunctionalParams {
        tail_tol: params.tail_tol.min(ASSEMBLY_TAIL_TOL),
        j_max: params.j_max.max(ASSEMBLY_J_MAX),
        ..*params
    };
    let v3_of = |v: (Polynomial<Dd>, Polynomial<Dd>)| -> Result<Dd, FunctionalError> {
        Ok(v3_t(&v.1, &series)?.0)
    };

    let mut den = SquareDd::zeros(n);
    let diag_u: Vec<Dd> = (0..n).map(|i| u_of(unit(i, None))).collect::<Result<_, _>>()?;
    for i in 0..n {
        den.set_sym(i, i, diag_u[i]);
        for j in (i + 1)..n {
            let q = u_of(unit(i, Some(j)))?;
            den.set_sym(i, j, (q - diag_u[i] - diag_u[j]) * 0.5);
        }
    }

    let mut num = SquareDd::zeros(n);
    let rule = dd_rule(params.quad_order);
    let tables = WindowTables::<Dd>::build(params, degree, Some(degree), &rule)?;
    let v2 = tables.v2.as_ref().expect("built with P2");
    for i in 0..m {
        for i2 in i..m {
            num.set_sym(i, i2, tables.v1.at(i, i2));
        }
        for k in 0..m {
            let total = v2.iter().fold(Dd::zero(), |acc, t| acc + t.at(i, k));
            num.set_sym(i, m + k, total * 0.5);
        }
    }
    // V3 block over P2 pairs, in parallel
    let diag_v3: Vec<Dd> = (m..n)
        .into_par_iter()
        .map(|i| v3_of(unit(i, None)))
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (m..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let off: Vec<Dd> = pairs
        .par_iter()
        .map(|&(i, j)| v3_of(unit(i, Some(j))))
        .collect::<Result<_, _>>()?;
    for i in m..n {
        num.set_sym(i, i, diag_v3[i - m]);
    }
    for (&(i, j), &q) in pairs.iter().zip(&off) {
        num.set_sym(i, j, (q - diag_v3[i - m] - diag_v3[j - m]) * 0.5);
    }
    Ok(QuadraticForms::from_dd(num, den, *params, degree))
}

/// Cholesky factor of `D` after symmetric diagonal equilibration,
/// `S D S = L Lᵀ` with `S = diag(D_ii^{-1/2})`, all in double-double.
#[derive(Debug, Clone)]
struct Whitening {
    n: usize,
    scale: Vec<Dd>,
    /// row-major lower triangle
    lower: Vec<Dd>,
    min_pivot: f64,
}

impl Whitening {
    fn new(d: &SquareDd) -> Result<Self, OptimizeError> {
        let n = d.n;
        let mut scale = Vec::with_capacity(n);
        for i in 0..n {
            let dii = d.get(i, i);
            if !(dii.to_f64() > 0.0) {
                return Err(OptimizeError::NotPositiveDefinite);
            }
            scale.push(Dd::one() / dii.sqrt());
        }
        let mut l = vec![Dd::zero(); n * n];
        let mut min_pivot = f64::INFINITY;
        for j in 0..n {
            let mut diag = scale[j] * d.get(j, j) * scale[j];
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag.to_f64() > 0.0) {
                return Err(OptimizeError::NotPositiveDefinite);
            }
            min_pivot = min_pivot.min(diag.to_f64());
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut v = scale[i] * d.get(i, j) * scale[j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / ljj;
            }
        }
        Ok(Self {
            n,
            scale,
            lower: l,
            min_pivot,
        })
    }

    fn l(&self, i: usize, j: usize) -> Dd {
        self.lower[i * self.n + j]
    }

    /// `L⁻¹ b` in place.
    fn solve_lower(&self, b: &mut [Dd]) {
        for i in 0..self.n {
            let mut v = b[i];
            for k in 0..i {
                v -= self.l(i, k) * b[k];
            }
            b[i] = v / self.l(i, i);
        }
    }

    /// `(L Lᵀ)⁻¹ = L⁻ᵀ L⁻¹` rounded to `f64`. Its largest eigenvalue is
    /// the reciprocal of the smallest eigenvalue of the equilibrated matrix,
    /// and largest eigenvalues survive the rounding.
    fn inverse(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut inv = vec![Dd::zero(); n * n];
        let mut col = vec![Dd::zero(); n];
        for j in 0..n {
            col.iter_mut().enumerate().for_each(|(i, c)| *c = if i == j { Dd::one() } else { Dd::zero() });
            self.solve_lower(&mut col);
            self.solve_upper_transposed(&mut col);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        DMatrix::from_fn(n, n, |i, j| ((inv[i * n + j] + inv[j * n + i]) * 0.5).to_f64())
    }

    /// `L⁻ᵀ b` in place.
    fn solve_upper_transposed(&self, b: &mut [Dd]) {
        for i in (0..self.n).rev() {
            let mut v = b[i];
            for k in (i + 1)..self.n {
                v -= self.l(k, i) * b[k];
            }
            b[i] = v / self.l(i, i);
        }
    }

    /// `C = L⁻¹ S A S L⁻ᵀ`, computed in double-double, symmetrized and
    /// rounded. Its eigenvalues are those of the pencil `(A, D)`.
    fn congruence(&self, a: &SquareDd) -> DMatrix<f64> {
        let n = self.n;
        // X = L⁻¹ (S A S), column by column
        let mut x = vec![Dd::zero(); n * n];
        let mut col = vec![Dd::zero(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = self.scale[i] * a.get(i, j) * self.scale[j];
            }
            self.solve_lower(&mut col);
            for i in 0..n {
                x[i * n + j] = col[i];
            }
        }
        // C = L⁻¹ Xᵀ
        let mut c = vec![Dd::zero(); n * n];
        for j in 0..n {
            for i in 0..n {
                col[i] = x[j * n + i];
            }
            self.solve_lower(&mut col);
            for i in 0..n {
                c[i * n + j] = col[i];
            }
        }
        DMatrix::from_fn(n, n, |i, j| ((c[i * n + j] + c[j * n + i]) * 0.5).to_f64())
    }

    /// Maps whitened coordinates back to the monomial basis: `v = S L⁻ᵀ w`.
    fn to_original(&self, w: &DVector<f64>) -> Vec<Dd> {
        let mut y: Vec<Dd> = w.iter().map(|&x| Dd::from(x)).collect();
        self.solve_upper_transposed(&mut y);
        y.iter().zip(&self.scale).map(|(&a, &s)| a * s).collect()
    }
}

fn round_vec(v: &[Dd]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|x| x.to_f64()))
}

/// Scales `v` so its largest-magnitude entry is `+1`.
pub fn normalize_max_entry(v: &DVector<f64>) -> DVector<f64> {
    let (idx, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |best, (i, &x)| if x.abs() > best.1 { (i, x.abs()) } else { best });
    let pivot = v[idx];
    if pivot == 0.0 {
        v.clone()
    } else {
        v / pivot
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn smallest_eigenvalue(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub h_min: f64,
    pub vector: DVector<f64>,
}

impl Minimum {
    pub fn polynomials(&self, degree: usize) -> (Polynomial, Polynomial) {
        split_vector(self.vector.as_slice(), degree)
    }
}

/// Exact minimum of `h` over all coefficient vectors, from the smallest
/// eigenvalue of the pencil `(N, D)`.
///
/// The pencil is reduced to the standard symmetric problem `C w = λ w` in
/// double-double; `C` is well conditioned, so its eigen-decomposition runs
/// in `f64`. The returned vector is mapped back in double-double and scaled
/// so that its largest entry is `+1`.
pub fn min_h(forms: &QuadraticForms) -> Result<Minimum, OptimizeError> {
    let white = Whitening::new(&forms.den)?;
    let c = white.congruence(&forms.num);
    let eig = SymmetricEigen::new(c);
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &l)| if l < best.1 { (i, l) } else { best });
    let w = eig.eigenvectors.column(k).into_owned();
    let v = normalize_max_entry(&round_vec(&white.to_original(&w)));
    Ok(Minimum {
        h_min: lambda / PI,
        vector: v,
    })
}

/// Derivative-free cross-check of [`min_h`]: Nelder–Mead on the Rayleigh
/// ratio from `starts` seeded random points of the unit sphere.
///
/// The simplex moves in coordinates whitened by the Cholesky factor of
/// `D`; the objective is always the double-double ratio of the original
/// forms.
pub fn direct_search(
    forms: &QuadraticForms,
    starts: usize,
    seed: u64,
) -> Result<Minimum, OptimizeError> {
    if starts == 0 {
        return Err(OptimizeError::InvalidArgument("starts must be >= 1".into()));
    }
    let white = Whitening::new(&forms.den)?;
    let n = forms.dim();
    let objective = |w: &DVector<f64>| forms.ratio_dd(&white.to_original(w)).to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for _ in 0..starts {
        let mut x0 = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = x0.norm();
        if norm > 0.0 {
            x0 /= norm;
        }
        let (f, x) = nelder_mead_restarted(&objective, x0, 200_000);
        if best.as_ref().map_or(true, |(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    let (f, w) = best.expect("at least one start");
    Ok(Minimum {
        h_min: f,
        vector: normalize_max_entry(&round_vec(&white.to_original(&w))),
    })
}

fn nelder_mead_restarted<F: Fn(&DVector<f64>) -> f64>(
    f: &F,
    mut x: DVector<f64>,
    max_evals: usize,
) -> (f64, DVector<f64>) {
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = 0.5;
    while evals < max_evals {
        let (fy, y, used) = nelder_mead(f, &x, step, max_evals - evals);
        evals += used;
        let improved = fx - fy;
        if fy < fx {
            fx = fy;
            x = &y / y.norm();
        }
        if improved <= 1e-15 * fx.abs().max(1e-300) {
            if step < 1e-6 {
                break;
            }
            step *= 0.1;
        }
    }
    (fx, x)
}

/// One Nelder–Mead run with dimension-adaptive coefficients.
fn nelder_mead<F: Fn(&DVector<f64>) -> f64>(
    f: &F,
    x0: &DVector<f64>,
    step: f64,
    budget: usize,
) -> (f64, DVector<f64>, usize) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut simplex: Vec<(f64, DVector<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((f(x0), x0.clone()));
    for i in 0..n {
        let mut v = x0.clone();
        v[i] += step;
        simplex.push((f(&v), v));
    }
    let mut evals = n + 1;
    while evals < budget {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spread = simplex[n].0 - simplex[0].0;
        if spread <= 1e-15 * simplex[0].0.abs() + 1e-300 {
            break;
        }
        let mut centroid = DVector::zeros(n);
        for (_, v) in &simplex[..n] {
            centroid += v;
        }
        centroid /= nf;
        let worst = simplex[n].1.clone();
        let xr = &centroid + (&centroid - &worst) * alpha;
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].0 {
            let xe = &centroid + (&xr - &centroid) * gamma;
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
        } else {
            let (xc, fc) = if fr < simplex[n].0 {
                let xc = &centroid + (&xr - &centroid) * rho;
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = &centroid + (&worst - &centroid) * rho;
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < simplex[n].0.min(fr) {
                simplex[n] = (fc, xc);
            } else {
                let best = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v = &best + (&entry.1 - &best) * sigma;
                    *entry = (f(&v), v);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (fb, xb) = simplex.swap_remove(0);
    (fb, xb, evals)
}

/// A certified lower bound `λ > c*/π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult {
    pub r: usize,
    pub degree: usize,
    pub c_star: f64,
    pub lambda_bound: f64,
    pub h_at_c_star: f64,
    /// Upper end of the final bracket, where `h_min ≥ 1`.
    pub c_upper: f64,
    pub h_at_c_upper: f64,
    pub p1: Polynomial,
    pub p2: Polynomial,
    pub iterations: usize,
    /// Direct-search minimum minus the eigen minimum at `c*`.
    pub eigen_simplex_gap: f64,
}

/// `h_min` at the given window width.
pub fn min_h_at(base: &FunctionalParams, degree: usize, c: f64) -> Result<Minimum, OptimizeError> {
    let forms = assemble(&base.with_c(c), degree)?;
    min_h(&forms)
}

/// `(c, h_min(c))` over a grid, for plotting.
pub fn min_h_grid(
    base: &FunctionalParams,
    degree: usize,
    cs: &[f64],
) -> Result<Vec<(f64, f64)>, OptimizeError> {
    cs.iter()
        .map(|&c| min_h_at(base, degree, c).map(|m| (c, m.h_min)))
        .collect()
}

/// Bisects the window `c` until the bracket is narrower than `tol_c`,
/// keeping `h_min(c_lo) < 1 ≤ h_min(c_hi)`.
pub fn certify(
    base: &FunctionalParams,
    degree: usize,
    c_lo: f64,
    c_hi: f64,
    tol_c: f64,
) -> Result<CertificationResult, OptimizeError> {
    if !(tol_c > 0.0) || !(c_lo < c_hi) {
        return Err(OptimizeError::InvalidArgument(format!(
            "need c_lo < c_hi and tol_c > 0, got [{c_lo}, {c_hi}], tol {tol_c}"
        )));
    }
    let mut lo = min_h_at(base, degree, c_lo)?;
    let mut hi = min_h_at(base, degree, c_hi)?;
    if !(lo.h_min < 1.0 && hi.h_min >= 1.0) {
        return Err(OptimizeError::Bracket {
            c_lo,
            c_hi,
            h_lo: lo.h_min,
            h_hi: hi.h_min,
        });
    }
    let (mut a, mut b) = (c_lo, c_hi);
    let mut iterations = 0;
    while b - a > tol_c {
        let mid = 0.5 * (a + b);
        let m = min_h_at(base, degree, mid)?;
        if m.h_min < 1.0 {
            a = mid;
            lo = m;
        } else {
            b = mid;
            hi = m;
        }
        iterations += 1;
    }
    let forms = assemble(&base.with_c(a), degree)?;
    let simplex = direct_search(&forms, 4, 0)?;
    let (p1, p2) = lo.polynomials(degree);
    Ok(CertificationResult {
        r: base.r,
        degree,
        c_star: a,
        lambda_bound: a / PI,
        h_at_c_star: lo.h_min,
        c_upper: b,
        h_at_c_upper: hi.h_min,
        p1,
        p2,
        iterations,
        eigen_simplex_gap: simplex.h_min - lo.h_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(r: usize, c: f64, degree: usize) -> QuadraticForms {
        let params = FunctionalParams::default().with_r(r).with_c(c);
        assemble(&params, degree).unwrap()
    }

    #[test]
    fn assemble_examples_degree_zero() {
        let f = small(1, 0.0, 0);
        assert!((f.denominator[(0, 0)] - 1.0 / 24.0).abs() < 1e-15);
        let v = DVector::from_vec(vec![1.0, 1.0]);
        let q = v.dot(&(&f.denominator * &v));
        assert!((q - 13.0 / 24.0).abs() < 1e-14);
        assert!(f.numerator.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn equilibrated_min_eigenvalue_small_case() {
        // well conditioned at degree 1, so plain f64 is a valid reference
        let f = small(1, 0.0, 1);
        let d = &f.denominator;
        let s = DMatrix::from_diagonal(&d.diagonal().map(|x| 1.0 / x.sqrt()));
        let expected = smallest_eigenvalue(&(&s * d * &s));
        let got = f.denominator_min_eigenvalue().unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.max(1e-3), "{got} vs {expected}");
    }

    #[test]
    fn forms_are_symmetric() {
        let f = small(2, 2.0, 2);
        assert_eq!(f.numerator, f.numerator.transpose());
        assert_eq!(f.denominator, f.denominator.transpose());
    }

    #[test]
    fn zero_window_gives_zero_minimum() {
        let f = small(2, 0.0, 2);
        let m = min_h(&f).unwrap();
        assert_eq!(m.h_min, 0.0);
        let s = direct_search(&f, 2, 1).unwrap();
        assert_eq!(s.h_min, 0.0);
    }

    #[test]
    fn singular_denominator_rejected() {
        let f = small(1, 1.0, 1);
        let f = QuadraticForms::from_matrices(
            f.numerator.clone(),
            DMatrix::from_element(4, 4, 1.0),
            f.params,
            1,
        )
        .unwrap();
        assert_eq!(min_h(&f).unwrap_err(), OptimizeError::NotPositiveDefinite);
        assert_eq!(f.denominator_min_pivot(), None);
        assert_eq!(f.denominator_min_eigenvalue(), None);
    }

    #[test]
    fn normalization_sets_largest_entry_to_one() {
        let v = normalize_max_entry(&DVector::from_vec(vec![0.5, -4.0, 2.0]));
        assert_eq!(v.as_slice(), &[-0.125, 1.0, -0.5]);
    }

    #[test]
    fn bad_bracket_reported() {
        let params = FunctionalParams::default().with_r(1);
        let err = certify(&params, 1, 0.1, 0.2, 1e-3).unwrap_err();
        assert!(matches!(err, OptimizeError::Bracket { .. }));
    }

    #[test]
    fn direct_search_is_never_below_eigen_minimum() {
        let f = small(1, std::f64::consts::PI, 2);
        let e = min_h(&f).unwrap();
        let s = direct_search(&f, 3, 7).unwrap();
        assert!(s.h_min >= e.h_min - 1e-9);
        assert!((s.h_min - e.h_min).abs() < 1e-6);
    }
}
