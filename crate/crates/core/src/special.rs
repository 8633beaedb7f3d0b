//! Special functions used by the window integrals: the sine integral, the
//! windowed sinc kernel, and the trigonometric moments
//! `∫_{−a}^{a} ηᵏ cos(ωη) dη`, `∫_{−a}^{a} ηᵏ sin(ωη) dη`.
//!
//! All functions are generic over [`Real`]; the double-double instances use
//! longer series so they keep close to full precision.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::real::Real;

fn is_extended<T: Real>() -> bool {
    T::EPSILON < 1e-20
}

/// Sine integral `Si(x) = ∫₀ˣ sin(t)/t dt`.
///
/// Power series for `|x| ≤ 4` (`|x| ≤ 20` in double-double, where the
/// cancellation in the alternating series still leaves ~24 digits); beyond
/// that the continued fraction for `E₁(ix)` evaluated in `f64` by the
/// modified Lentz method, which reaches full double precision for every
/// `|x| > 2`.
pub fn si<T: Real>(x: T) -> T {
    let ax = x.abs();
    let limit = if is_extended::<T>() { 20.0 } else { 4.0 };
    let v = if ax.to_f64() <= limit {
        si_series(ax)
    } else {
        T::from_f64(si_continued_fraction(ax.to_f64()))
    };
    if x.to_f64() < 0.0 {
        -v
    } else {
        v
    }
}

fn si_series<T: Real>(x: T) -> T {
    // Σ (−1)^k x^{2k+1} / ((2k+1)(2k+1)!)
    let x2 = x * x;
    let mut term = x; // x^{2k+1}/(2k+1)!
    let mut sum = x;
    let tol = 0.01 * T::EPSILON;
    let mut k = 0usize;
    loop {
        k += 1;
        let n = (2 * k) as f64;
        term = -(term * x2) / (n * (n + 1.0));
        let add = term / (n + 1.0);
        sum += add;
        if add.abs().to_f64() <= tol * sum.abs().to_f64() || k > 200 {
            break;
        }
    }
    sum
}

fn si_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 2..200 {
        let a = -((i - 1) * (i - 1)) as f64;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    let h = Complex64::new(x.cos(), -x.sin()) * h;
    FRAC_PI_2 + h.im
}

/// `sin(c t / 2) / t`, continuous at `t = 0` where it equals `c / 2`.
pub fn half_sinc<T: Real>(c: T, t: T) -> T {
    let z = c * t;
    if z.abs().to_f64() < 1e-4 {
        // (c/2) Σ (−1)^k (z/2)^{2k} / (2k+1)!, five terms
        let w = z * z * 0.25;
        let one = T::one();
        c * 0.5 * (one - w / 6.0 * (one - w / 20.0 * (one - w / 42.0 * (one - w / 72.0))))
    } else {
        (z * 0.5).sin() / t
    }
}

/// Below this `|ω a|` the moments are summed from their Taylor series.
const MOMENT_SERIES_LIMIT: f64 = 1.0;

/// `∫_{−a}^{a} ηᵏ cos(ωη) dη`.
pub fn cos_moment<T: Real>(k: usize, omega: T, a: T) -> T {
    if k % 2 == 1 {
        return T::zero();
    }
    if (omega * a).abs().to_f64() < MOMENT_SERIES_LIMIT {
        return moment_series(k, omega, a, false);
    }
    trig_moments(k, omega, a).0
}

/// `∫_{−a}^{a} ηᵏ sin(ωη) dη`.
pub fn sin_moment<T: Real>(k: usize, omega: T, a: T) -> T {
    if k % 2 == 0 {
        return T::zero();
    }
    if (omega * a).abs().to_f64() < MOMENT_SERIES_LIMIT {
        return moment_series(k, omega, a, true);
    }
    trig_moments(k, omega, a).1
}

/// Integration by parts, ascending in k:
/// `C_k = [ηᵏ sin(ωη)/ω] − (k/ω) S_{k−1}`, `S_k = [−ηᵏ cos(ωη)/ω] + (k/ω) C_{k−1}`.
fn trig_moments<T: Real>(k: usize, omega: T, a: T) -> (T, T) {
    let (s, c) = (omega * a).sin_cos();
    let two = T::from_f64(2.0);
    let mut cm = two * s / omega;
    let mut sm = T::zero();
    let mut ak = T::one();
    for n in 1..=k {
        ak *= a;
        let nf = n as f64;
        // boundary terms: even n doubles the sin part of C, odd n doubles cos part of S
        let (bc, bs) = if n % 2 == 0 {
            (two * ak * s / omega, T::zero())
        } else {
            (T::zero(), -(two * ak * c / omega))
        };
        let new_c = bc - sm * nf / omega;
        let new_s = bs + cm * nf / omega;
        cm = new_c;
        sm = new_s;
    }
    (cm, sm)
}

fn moment_series<T: Real>(k: usize, omega: T, a: T, odd: bool) -> T {
    // cos: Σ_m (−1)^m ω^{2m}/(2m)! · 2 a^{k+2m+1}/(k+2m+1)
    // sin: Σ_m (−1)^m ω^{2m+1}/(2m+1)! · 2 a^{k+2m+2}/(k+2m+2)
    let wa = omega * a;
    let base = a.powu(k + 1) * 2.0;
    let mut coef = if odd { wa } else { T::one() }; // (ωa)^p / p!
    let mut p = usize::from(odd);
    let mut sum = T::zero();
    let tol = 0.01 * T::EPSILON;
    loop {
        let add = base * coef / (k + p + 1) as f64;
        sum += add;
        if add.abs().to_f64() <= tol * sum.abs().to_f64() || p > 200 {
            break;
        }
        coef = -(coef * wa * wa) / ((p + 1) * (p + 2)) as f64;
        p += 2;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    #[test]
    fn si_reference_values() {
        // Abramowitz & Stegun table 5.1 / DLMF
        let cases = [
            (0.5, 0.493_107_418_043_066_7),
            (1.0, 0.946_083_070_367_183_0),
            (2.0, 1.605_412_976_802_694_8),
            (4.0, 1.758_203_138_949_053_1),
            (5.0, 1.549_931_244_944_674_1),
            (10.0, 1.658_347_594_218_874_0),
            (20.0, 1.548_241_701_043_439_8),
        ];
        for (x, want) in cases {
            assert!((si(x) - want).abs() < 2e-15, "Si({x}) = {} want {want}", si(x));
            assert!((si(-x) + want).abs() < 2e-15);
        }
        assert_eq!(si(0.0), 0.0);
    }

    #[test]
    fn si_branches_agree_with_quadrature() {
        for &x in &[3.9, 4.0, 4.1, 6.5, 9.5, 15.0] {
            let q = adaptive(|t| half_sinc(2.0, t), 0.0, x, 1e-16, 1e-15).value;
            assert!((si(x) - q).abs() < 1e-14, "x={x}: {} vs {q}", si(x));
        }
    }

    #[test]
    fn double_double_si_reference() {
        use crate::real::Dd;
        // the series branch against a high-order rule, both in double-double
        let rule = crate::quadrature::dd_rule(48);
        let x = Dd::from(9.5);
        let q = rule.integrate(|t| half_sinc(Dd::from(2.0), t), Dd::from(0.0), x);
        assert!((si(x) - q).abs().hi() < 1e-27, "{:e}", (si(x) - q).abs().hi());
    }

    #[test]
    fn half_sinc_is_continuous_at_branch_point() {
        let c = 3.0;
        for &t in &[0.0, 1e-7, 3.33e-5, 3.34e-5, 1e-3] {
            let direct = if t == 0.0 { c / 2.0 } else { (c * t / 2.0).sin() / t };
            assert!((half_sinc(c, t) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn trig_moments_match_quadrature() {
        for &omega in &[-2.0, -1.3, -1e-4, 0.7, 3.0] {
            for &a in &[0.01, 0.5, 1.57, 4.76] {
                for k in 0..6 {
                    let qc = adaptive(|e| e.powi(k as i32) * (omega * e).cos(), -a, a, 1e-17, 1e-14).value;
                    let qs = adaptive(|e| e.powi(k as i32) * (omega * e).sin(), -a, a, 1e-17, 1e-14).value;
                    let scale = 2.0 * a.powi(k as i32 + 1);
                    assert!((cos_moment(k, omega, a) - qc).abs() < 1e-13 * scale, "cos k={k} w={omega} a={a}");
                    assert!((sin_moment(k, omega, a) - qs).abs() < 1e-13 * scale, "sin k={k} w={omega} a={a}");
                }
            }
        }
    }

    #[test]
    fn moment_series_and_recurrence_agree_at_switch() {
        let a = 1.0;
        for k in 0..5 {
            let below = 0.999_999_9;
            let above = 1.000_000_1;
            let c_lo = cos_moment(k, below, a);
            let c_hi = cos_moment(k, above, a);
            let s_lo = sin_moment(k, below, a);
            let s_hi = sin_moment(k, above, a);
            assert!((c_lo - c_hi).abs() < 1e-6, "k={k}");
            assert!((s_lo - s_hi).abs() < 1e-6, "k={k}");
        }
    }
}
