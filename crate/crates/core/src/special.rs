//! Special functions used by the distribution families: log-gamma, digamma,
//! trigamma, the regularized incomplete gamma and beta functions, the error
//! function and the standard normal quantile.
//!
//! The public functions check their domain and return [`DomainError`]; the
//! crate-internal variants (`lgamma`, `psi`, ...) assume the caller already
//! validated the arguments.

use crate::math::{abs, exp, ln, ln_1p, sq, sqrt, PI};

/// An argument fell outside the function's domain.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("{function}: argument {value} outside domain")]
pub struct DomainError {
    pub function: &'static str,
    pub value: f64,
}

fn check(function: &'static str, value: f64, ok: bool) -> Result<(), DomainError> {
    if ok {
        Ok(())
    } else {
        Err(DomainError { function, value })
    }
}

/// Natural logarithm of the gamma function, `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64, DomainError> {
    check("ln_gamma", x, x > 0.0 && x.is_finite())?;
    Ok(lgamma(x))
}

/// Digamma function ψ(x) = d/dx ln Γ(x), `x > 0`.
pub fn digamma(x: f64) -> Result<f64, DomainError> {
    check("digamma", x, x > 0.0 && x.is_finite())?;
    Ok(psi(x))
}

/// Trigamma function ψ'(x), `x > 0`.
pub fn trigamma(x: f64) -> Result<f64, DomainError> {
    check("trigamma", x, x > 0.0 && x.is_finite())?;
    Ok(psi1(x))
}

/// Regularized lower incomplete gamma function P(a, x), `a > 0`, `x >= 0`.
pub fn reg_inc_gamma_lower(a: f64, x: f64) -> Result<f64, DomainError> {
    check("reg_inc_gamma_lower", a, a > 0.0 && a.is_finite())?;
    check("reg_inc_gamma_lower", x, x >= 0.0)?;
    Ok(gamma_p(a, x))
}

/// Regularized upper incomplete gamma function Q(a, x) = 1 − P(a, x).
pub fn reg_inc_gamma_upper(a: f64, x: f64) -> Result<f64, DomainError> {
    check("reg_inc_gamma_upper", a, a > 0.0 && a.is_finite())?;
    check("reg_inc_gamma_upper", x, x >= 0.0)?;
    Ok(gamma_q(a, x))
}

/// Regularized incomplete beta function I_x(a, b), `a, b > 0`, `0 <= x <= 1`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64, DomainError> {
    check("reg_inc_beta", a, a > 0.0 && a.is_finite())?;
    check("reg_inc_beta", b, b > 0.0 && b.is_finite())?;
    check("reg_inc_beta", x, (0.0..=1.0).contains(&x))?;
    Ok(beta_i(a, b, x))
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Quantile of the standard normal distribution, `0 < p < 1`.
pub fn normal_quantile(p: f64) -> Result<f64, DomainError> {
    check("normal_quantile", p, p > 0.0 && p < 1.0)?;
    Ok(ndtri(p))
}

pub(crate) fn lgamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

pub(crate) fn psi(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0
                        - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    acc + ln(x) - 0.5 / x - series
}

pub(crate) fn psi1(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = 1.0 / 6.0
        - r * (1.0 / 30.0
            - r * (1.0 / 42.0 - r * (1.0 / 30.0 - r * (5.0 / 66.0 - r * (691.0 / 2730.0 - r * 7.0 / 6.0)))));
    acc + 1.0 / x + 0.5 * r + series * r / x
}

const MAX_ITER: usize = 10_000;

/// ln of x^a e^{-x} / Γ(a), the common prefactor of P and Q.
fn gamma_prefactor_ln(a: f64, x: f64) -> f64 {
    a * ln(x) - x - lgamma(a)
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if abs(term) < abs(sum) * 1e-17 {
            break;
        }
    }
    sum * exp(gamma_prefactor_ln(a, x))
}

fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if abs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if abs(del - 1.0) < 1e-16 {
            break;
        }
    }
    exp(gamma_prefactor_ln(a, x)) * h
}

pub(crate) fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else if x < a + 1.0 {
        gamma_series(a, x).min(1.0)
    } else {
        (1.0 - gamma_cont_frac(a, x)).max(0.0)
    }
}

pub(crate) fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else if x < a + 1.0 {
        (1.0 - gamma_series(a, x)).max(0.0)
    } else {
        gamma_cont_frac(a, x).min(1.0)
    }
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if abs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if abs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if abs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if abs(del - 1.0) < 1e-16 {
            break;
        }
    }
    h
}

pub(crate) fn beta_i(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = exp(a * ln(x) + b * ln_1p(-x) - ln_beta(a, b));
    if x < (a + 1.0) / (a + b + 2.0) {
        (front * beta_cont_frac(a, b, x) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b).clamp(0.0, 1.0)
    }
}

/// Standard normal CDF.
pub(crate) fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// ln Φ(z), accurate deep in the lower tail.
pub(crate) fn ln_phi(z: f64) -> f64 {
    if z > -30.0 {
        ln(phi(z))
    } else {
        // Asymptotic expansion of the Mills ratio.
        let r = 1.0 / (z * z);
        -0.5 * z * z - ln(-z) - 0.5 * ln(2.0 * PI) + ln(1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r)))
    }
}

/// Wichura's AS 241 (PPND16), relative accuracy about 1e-16.
pub(crate) fn ndtri(p: f64) -> f64 {
    let q = p - 0.5;
    if abs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_812_8e4) * r
                + 6.726_577_092_700_870_1e4)
                * r
                + 4.592_195_393_154_987_1e4)
                * r
                + 1.373_169_376_550_946e4)
                * r
                + 1.971_590_950_306_551_3e3)
                * r
                + 1.331_416_678_917_843_8e2)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5.226_495_278_852_545_5e3 * r + 2.872_908_573_572_194_3e4) * r
                + 3.930_789_580_009_271e4)
                * r
                + 2.121_379_430_158_659_7e4)
                * r
                + 5.394_196_021_424_751e3)
                * r
                + 6.871_870_074_920_579e2)
                * r
                + 4.231_333_070_160_091e1)
                * r
                + 1.0);
    }
    let r0 = if q < 0.0 { p } else { 1.0 - p };
    let r = sqrt(-ln(r0));
    let val = if r <= 5.0 {
        let r = r - 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 1.519_866_656_361_645_7e-2)
                * r
                + 1.481_039_764_274_800_8e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_758_8)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114_4)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 1.369_298_809_227_358e-1)
                * r
                + 5.998_322_065_558_88e-1)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Solves ln k − ψ(k) = s for k > 0 (s > 0). This is the profile score
/// equation shared by the gamma and Nakagami shape parameters.
pub(crate) fn solve_ln_minus_digamma(s: f64) -> f64 {
    // Minka's closed-form start, then Newton in k.
    let mut k = (3.0 - s + sqrt(sq(s - 3.0) + 24.0 * s)) / (12.0 * s);
    for _ in 0..100 {
        let f = ln(k) - psi(k) - s;
        let df = 1.0 / k - psi1(k);
        let mut next = k - f / df;
        if next <= 0.0 {
            next = 0.5 * k;
        }
        let done = abs(next - k) <= 1e-15 * k;
        k = next;
        if done {
            break;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ln_gamma_identities() {
        assert!(close(ln_gamma(0.5).unwrap(), 0.5723649429247001, 1e-12));
        assert!(close(ln_gamma(5.0).unwrap(), libm::log(24.0), 1e-12));
        assert!(close(ln_gamma(1.0).unwrap(), 0.0, 1e-12));
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.0).is_err());
    }

    // Oracle: ψ(1) = −γ and the recurrence ψ(n) = −γ + H_{n−1}.
    #[test]
    fn digamma_matches_harmonic_numbers() {
        assert!(close(digamma(1.0).unwrap(), -0.5772156649015329, 1e-10));
        let mut h = 0.0;
        for n in 1..30 {
            assert!(close(digamma(n as f64).unwrap(), -0.5772156649015329 + h, 1e-10));
            h += 1.0 / n as f64;
        }
        // ψ(1/2) = −γ − 2 ln 2
        assert!(close(digamma(0.5).unwrap(), -0.5772156649015329 - 2.0 * core::f64::consts::LN_2, 1e-10));
        assert!(digamma(0.0).is_err());
    }

    #[test]
    fn trigamma_known_values() {
        let pi2_6 = core::f64::consts::PI * core::f64::consts::PI / 6.0;
        assert!(close(trigamma(1.0).unwrap(), pi2_6, 1e-10));
        assert!(close(trigamma(0.5).unwrap(), 3.0 * pi2_6, 1e-10));
    }

    #[test]
    fn incomplete_gamma_exponential_identity() {
        for &x in &[0.0, 1e-6, 0.3, 1.0, 2.5, 10.0, 40.0] {
            let want = -libm::expm1(-x);
            assert!(close(reg_inc_gamma_lower(1.0, x).unwrap(), want, 1e-12), "x={x}");
            assert!(close(reg_inc_gamma_upper(1.0, x).unwrap(), libm::exp(-x), 1e-12));
        }
        assert!(reg_inc_gamma_lower(0.0, 1.0).is_err());
        assert!(reg_inc_gamma_lower(1.0, -1.0).is_err());
    }

    // Oracle: P(1/2, x) = erf(√x).
    #[test]
    fn incomplete_gamma_half_is_erf() {
        for &x in &[0.01, 0.2, 1.0, 1.5, 3.0, 8.0] {
            let got = reg_inc_gamma_lower(0.5, x).unwrap();
            assert!(close(got, libm::erf(libm::sqrt(x)), 1e-12), "x={x}");
        }
    }

    // Oracle: P(n, x) = 1 − e^{−x} Σ_{k<n} x^k/k! for integer n.
    #[test]
    fn incomplete_gamma_integer_shape_poisson_sum() {
        for n in 1..15 {
            for &x in &[0.5, 3.0, 9.0, 17.0] {
                let mut term = 1.0;
                let mut sum = 1.0;
                for k in 1..n {
                    term *= x / k as f64;
                    sum += term;
                }
                let want = 1.0 - libm::exp(-x) * sum;
                let got = reg_inc_gamma_lower(n as f64, x).unwrap();
                assert!(close(got, want, 1e-10), "n={n} x={x} got={got} want={want}");
            }
        }
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, b) = 1 − (1−x)^b ; I_x(a, 1) = x^a
        for &x in &[0.05, 0.3, 0.5, 0.9] {
            assert!(close(reg_inc_beta(1.0, 3.5, x).unwrap(), 1.0 - libm::pow(1.0 - x, 3.5), 1e-12));
            assert!(close(reg_inc_beta(2.5, 1.0, x).unwrap(), libm::pow(x, 2.5), 1e-12));
        }
        assert!(close(reg_inc_beta(2.0, 2.0, 0.5).unwrap(), 0.5, 1e-14));
    }

    #[test]
    fn normal_quantile_inverts_phi() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let z = normal_quantile(p).unwrap();
            assert!(close(phi(z), p, 1e-14), "p={p}");
        }
        assert!(close(normal_quantile(0.975).unwrap(), 1.959963984540054, 1e-13));
        assert!(normal_quantile(0.0).is_err());
    }

    #[test]
    fn ln_phi_tail_continuity() {
        let a = ln_phi(-29.999);
        let b = ln_phi(-30.001);
        assert!((a - b).abs() < 0.1);
        assert!(close(ln_phi(0.0), -core::f64::consts::LN_2, 1e-15));
    }

    #[test]
    fn shape_equation_solver() {
        for &k in &[0.05, 0.5, 1.0, 1.9, 7.727, 50.0, 400.0] {
            let s = libm::log(k) - psi(k);
            let got = solve_ln_minus_digamma(s);
            assert!((got - k).abs() < 1e-9 * k, "k={k} got={got}");
        }
    }
}
