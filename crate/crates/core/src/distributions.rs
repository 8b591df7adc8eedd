//! Probability families: densities, CDFs, quantiles and maximum-likelihood
//! estimation.
//!
//! Every family has at most two parameters. Parameter conventions:
//!
//! | family            | parameters          | support        |
//! |-------------------|---------------------|----------------|
//! | exponential       | rate                | x ≥ 0          |
//! | gamma             | shape, rate         | x > 0          |
//! | weibull           | shape, scale        | x > 0          |
//! | lognormal         | meanlog, sdlog      | x > 0          |
//! | gumbel            | mu, sigma           | all reals      |
//! | nakagami          | shape, scale (Ω = E[X²]) | x > 0     |
//! | normal            | mean, sd            | all reals      |
//! | logistic          | location, scale     | all reals      |
//! | cauchy            | location, scale     | all reals      |
//! | rayleigh          | sigma               | x > 0          |
//! | inverse-gamma     | shape, scale        | x > 0          |
//! | inverse-gaussian  | mean, shape         | x > 0          |
//! | inverse-weibull   | shape, scale        | x > 0          |
//! | log-logistic      | shape, scale        | x > 0          |
//! | lomax             | shape, scale        | x ≥ 0          |
//! | laplace           | location, scale     | all reals      |
//! | uniform           | min, max            | [min, max]     |
//! | beta              | shape1, shape2      | 0 < x < 1      |
//!
//! Fits use closed forms where they exist, profile-likelihood root finding
//! for gamma, Nakagami, Weibull and Gumbel (and their reciprocal
//! counterparts), and simplex descent on the negative log-likelihood for the
//! remaining families.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::math::{abs, atan, exp, expm1, ln, ln_1p, powf, sq, sqrt, tan, LN_2, PI};
use crate::optim::{brent_root, expand_bracket, nelder_mead, SimplexOptions};
use crate::special::{beta_i, gamma_p, gamma_q, lgamma, ln_beta, ln_phi, ndtri, phi, solve_ln_minus_digamma};
use crate::stats;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Identifier of a supported probability family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Family {
    Exponential,
    Gamma,
    Weibull,
    Lognormal,
    Gumbel,
    Nakagami,
    Normal,
    Logistic,
    Cauchy,
    Rayleigh,
    InverseGamma,
    InverseGaussian,
    InverseWeibull,
    LogLogistic,
    Lomax,
    Laplace,
    Uniform,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Support {
    AllReals,
    PositiveReals,
    NonNegativeReals,
    UnitInterval,
    /// The interval spanned by the parameters themselves (uniform).
    DataDependent,
}

impl Support {
    /// Whether an observation can be fitted by a family with this support.
    pub fn admits(self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            Support::AllReals | Support::DataDependent => true,
            Support::PositiveReals => x > 0.0,
            Support::NonNegativeReals => x >= 0.0,
            Support::UnitInterval => x > 0.0 && x < 1.0,
        }
    }
}

/// Static description of a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilySpec {
    pub id: Family,
    pub param_names: &'static [&'static str],
    pub support: Support,
}

impl FamilySpec {
    pub fn param_count(&self) -> usize {
        self.param_names.len()
    }
}

impl Family {
    pub const ALL: [Family; 18] = [
        Family::Exponential,
        Family::Gamma,
        Family::Weibull,
        Family::Lognormal,
        Family::Gumbel,
        Family::Nakagami,
        Family::Normal,
        Family::Logistic,
        Family::Cauchy,
        Family::Rayleigh,
        Family::InverseGamma,
        Family::InverseGaussian,
        Family::InverseWeibull,
        Family::LogLogistic,
        Family::Lomax,
        Family::Laplace,
        Family::Uniform,
        Family::Beta,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Gamma => "gamma",
            Family::Weibull => "weibull",
            Family::Lognormal => "lognormal",
            Family::Gumbel => "gumbel",
            Family::Nakagami => "nakagami",
            Family::Normal => "normal",
            Family::Logistic => "logistic",
            Family::Cauchy => "cauchy",
            Family::Rayleigh => "rayleigh",
            Family::InverseGamma => "inverse-gamma",
            Family::InverseGaussian => "inverse-gaussian",
            Family::InverseWeibull => "inverse-weibull",
            Family::LogLogistic => "log-logistic",
            Family::Lomax => "lomax",
            Family::Laplace => "laplace",
            Family::Uniform => "uniform",
            Family::Beta => "beta",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Exponential => &["rate"],
            Family::Gamma => &["shape", "rate"],
            Family::Weibull | Family::InverseWeibull | Family::LogLogistic | Family::Lomax => {
                &["shape", "scale"]
            }
            Family::InverseGamma | Family::Nakagami => &["shape", "scale"],
            Family::Lognormal => &["meanlog", "sdlog"],
            Family::Gumbel => &["mu", "sigma"],
            Family::Normal => &["mean", "sd"],
            Family::Logistic | Family::Cauchy | Family::Laplace => &["location", "scale"],
            Family::Rayleigh => &["sigma"],
            Family::InverseGaussian => &["mean", "shape"],
            Family::Uniform => &["min", "max"],
            Family::Beta => &["shape1", "shape2"],
        }
    }

    pub fn param_count(self) -> usize {
        self.param_names().len()
    }

    pub fn support(self) -> Support {
        match self {
            Family::Gumbel
            | Family::Normal
            | Family::Logistic
            | Family::Cauchy
            | Family::Laplace => Support::AllReals,
            Family::Exponential | Family::Lomax => Support::NonNegativeReals,
            Family::Uniform => Support::DataDependent,
            Family::Beta => Support::UnitInterval,
            _ => Support::PositiveReals,
        }
    }

    pub fn spec(self) -> FamilySpec {
        FamilySpec { id: self, param_names: self.param_names(), support: self.support() }
    }

    /// Looks a family up by id or by one of the short aliases used by
    /// common R tooling (`exp`, `lnorm`, `naka`, `pareto`, ...).
    pub fn from_id(s: &str) -> Option<Family> {
        let s = s.trim();
        if let Some(f) = Family::ALL.iter().find(|f| s.eq_ignore_ascii_case(f.id())) {
            return Some(*f);
        }
        const ALIASES: [(&str, Family); 13] = [
            ("exp", Family::Exponential),
            ("lnorm", Family::Lognormal),
            ("naka", Family::Nakagami),
            ("norm", Family::Normal),
            ("logis", Family::Logistic),
            ("invgamma", Family::InverseGamma),
            ("invgauss", Family::InverseGaussian),
            ("invweibull", Family::InverseWeibull),
            ("llogis", Family::LogLogistic),
            ("pareto", Family::Lomax),
            ("unif", Family::Uniform),
            ("gum", Family::Gumbel),
            ("lognorm", Family::Lognormal),
        ];
        ALIASES.iter().find(|(a, _)| s.eq_ignore_ascii_case(a)).map(|(_, f)| *f)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("unknown distribution family `{0}`")]
pub struct UnknownFamily(pub String);

impl FromStr for Family {
    type Err = UnknownFamily;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::from_id(s).ok_or_else(|| UnknownFamily(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistError {
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams { family: Family, reason: &'static str },
    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("{family}: datum {value} at index {index} is outside the support")]
    UnsupportedData { family: Family, index: usize, value: f64 },
    #[error("{family}: no convergence after {iterations} iterations (last iterate {params:?}, gradient norm {gradient_norm:.3e})")]
    NonConvergence { family: Family, iterations: usize, params: Vec<f64>, gradient_norm: f64 },
    #[error("{family}: degenerate data ({reason})")]
    DegenerateData { family: Family, reason: &'static str },
    #[error("{family}: too few values (need {needed}, got {got})")]
    TooFewValues { family: Family, needed: usize, got: usize },
    #[error("datum {value} at index {index} has zero density")]
    ZeroDensityDatum { index: usize, value: f64 },
}

/// A family together with a validated parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    family: Family,
    p: [f64; 2],
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl Model {
    pub fn new(family: Family, params: &[f64]) -> Result<Self, DistError> {
        let invalid = |reason| Err(DistError::InvalidParams { family, reason });
        if params.len() != family.param_count() {
            return invalid("wrong number of parameters");
        }
        if params.iter().any(|v| !v.is_finite()) {
            return invalid("parameters must be finite");
        }
        let a = params[0];
        let b = params.get(1).copied().unwrap_or(0.0);
        let ok = match family {
            Family::Exponential | Family::Rayleigh => positive(a),
            Family::Lognormal
            | Family::Gumbel
            | Family::Normal
            | Family::Logistic
            | Family::Cauchy
            | Family::Laplace => positive(b),
            Family::Uniform => a < b,
            _ => positive(a) && positive(b),
        };
        if !ok {
            return invalid(match family {
                Family::Uniform => "min must be below max",
                _ => "scale and shape parameters must be positive",
            });
        }
        Ok(Self { family, p: [a, b] })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.p[..self.family.param_count()]
    }

    pub fn in_support(&self, x: f64) -> bool {
        match self.family {
            Family::Uniform => x.is_finite() && x >= self.p[0] && x <= self.p[1],
            f => f.support().admits(x),
        }
    }

    /// Log density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let [a, b] = self.p;
        let ninf = f64::NEG_INFINITY;
        if x.is_nan() {
            return f64::NAN;
        }
        match self.family {
            Family::Exponential => {
                if x < 0.0 {
                    ninf
                } else {
                    ln(a) - a * x
                }
            }
            Family::Gamma => {
                if x < 0.0 {
                    ninf
                } else if x == 0.0 {
                    if a < 1.0 {
                        f64::INFINITY
                    } else if a == 1.0 {
                        ln(b)
                    } else {
                        ninf
                    }
                } else {
                    a * ln(b) + (a - 1.0) * ln(x) - b * x - lgamma(a)
                }
            }
            Family::Weibull => {
                if x < 0.0 {
                    ninf
                } else if x == 0.0 {
                    if a < 1.0 {
                        f64::INFINITY
                    } else if a == 1.0 {
                        -ln(b)
                    } else {
                        ninf
                    }
                } else {
                    let lz = ln(x / b);
                    ln(a / b) + (a - 1.0) * lz - exp(a * lz)
                }
            }
            Family::Lognormal => {
                if x <= 0.0 {
                    ninf
                } else {
                    let lx = ln(x);
                    -lx - ln(b) - LN_SQRT_2PI - 0.5 * sq((lx - a) / b)
                }
            }
            Family::Gumbel => {
                let z = (x - a) / b;
                -ln(b) - z - exp(-z)
            }
            Family::Nakagami => {
                if x <= 0.0 {
                    ninf
                } else {
                    LN_2 + a * ln(a) - lgamma(a) - a * ln(b) + (2.0 * a - 1.0) * ln(x) - a * x * x / b
                }
            }
            Family::Normal => -ln(b) - LN_SQRT_2PI - 0.5 * sq((x - a) / b),
            Family::Logistic => {
                let z = abs((x - a) / b);
                -z - ln(b) - 2.0 * ln_1p(exp(-z))
            }
            Family::Cauchy => -ln(PI * b) - ln_1p(sq((x - a) / b)),
            Family::Rayleigh => {
                if x <= 0.0 {
                    ninf
                } else {
                    ln(x) - 2.0 * ln(a) - x * x / (2.0 * a * a)
                }
            }
            Family::InverseGamma => {
                if x <= 0.0 {
                    ninf
                } else {
                    a * ln(b) - lgamma(a) - (a + 1.0) * ln(x) - b / x
                }
            }
            Family::InverseGaussian => {
                if x <= 0.0 {
                    ninf
                } else {
                    0.5 * (ln(b) - 2.0 * LN_SQRT_2PI - 3.0 * ln(x)) - b * sq(x - a) / (2.0 * a * a * x)
                }
            }
            Family::InverseWeibull => {
                if x <= 0.0 {
                    ninf
                } else {
                    let lz = ln(x / b);
                    ln(a / b) - (1.0 + a) * lz - exp(-a * lz)
                }
            }
            Family::LogLogistic => {
                if x <= 0.0 {
                    ninf
                } else {
                    let t = a * ln(x / b);
                    ln(a / b) + (a - 1.0) * ln(x / b) - 2.0 * softplus(t)
                }
            }
            Family::Lomax => {
                if x < 0.0 {
                    ninf
                } else {
                    ln(a / b) - (a + 1.0) * ln_1p(x / b)
                }
            }
            Family::Laplace => -ln(2.0 * b) - abs(x - a) / b,
            Family::Uniform => {
                if x < a || x > b {
                    ninf
                } else {
                    -ln(b - a)
                }
            }
            Family::Beta => {
                if x <= 0.0 || x >= 1.0 {
                    ninf
                } else {
                    (a - 1.0) * ln(x) + (b - 1.0) * ln_1p(-x) - ln_beta(a, b)
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        exp(self.ln_pdf(x))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let [a, b] = self.p;
        if x.is_nan() {
            return f64::NAN;
        }
        match self.family {
            Family::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -expm1(-a * x)
                }
            }
            Family::Gamma => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_p(a, b * x)
                }
            }
            Family::Weibull => {
                if x <= 0.0 {
                    0.0
                } else {
                    -expm1(-powf(x / b, a))
                }
            }
            Family::Lognormal => {
                if x <= 0.0 {
                    0.0
                } else {
                    phi((ln(x) - a) / b)
                }
            }
            Family::Gumbel => exp(-exp(-(x - a) / b)),
            Family::Nakagami => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_p(a, a * x * x / b)
                }
            }
            Family::Normal => phi((x - a) / b),
            Family::Logistic => {
                let z = (x - a) / b;
                if z >= 0.0 {
                    1.0 / (1.0 + exp(-z))
                } else {
                    let e = exp(z);
                    e / (1.0 + e)
                }
            }
            Family::Cauchy => 0.5 + atan((x - a) / b) / PI,
            Family::Rayleigh => {
                if x <= 0.0 {
                    0.0
                } else {
                    -expm1(-x * x / (2.0 * a * a))
                }
            }
            Family::InverseGamma => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_q(a, b / x)
                }
            }
            Family::InverseGaussian => {
                if x <= 0.0 {
                    0.0
                } else {
                    let r = sqrt(b / x);
                    let first = phi(r * (x / a - 1.0));
                    let second = exp(2.0 * b / a + ln_phi(-r * (x / a + 1.0)));
                    (first + second).min(1.0)
                }
            }
            Family::InverseWeibull => {
                if x <= 0.0 {
                    0.0
                } else {
                    exp(-powf(x / b, -a))
                }
            }
            Family::LogLogistic => {
                if x <= 0.0 {
                    0.0
                } else {
                    let t = a * ln(x / b);
                    if t >= 0.0 {
                        1.0 / (1.0 + exp(-t))
                    } else {
                        let e = exp(t);
                        e / (1.0 + e)
                    }
                }
            }
            Family::Lomax => {
                if x <= 0.0 {
                    0.0
                } else {
                    -expm1(-a * ln_1p(x / b))
                }
            }
            Family::Laplace => {
                if x < a {
                    0.5 * exp((x - a) / b)
                } else {
                    1.0 - 0.5 * exp(-(x - a) / b)
                }
            }
            Family::Uniform => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Family::Beta => beta_i(a, b, x.clamp(0.0, 1.0)),
        }
    }

    /// Inverse CDF. Closed forms where available, otherwise Brent's method
    /// on the CDF.
    pub fn quantile(&self, p: f64) -> Result<f64, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::ProbabilityOutOfRange(p));
        }
        let [a, b] = self.p;
        let x = match self.family {
            Family::Exponential => -ln_1p(-p) / a,
            Family::Weibull => b * powf(-ln_1p(-p), 1.0 / a),
            Family::Lognormal => exp(a + b * ndtri(p)),
            Family::Gumbel => a - b * ln(-ln(p)),
            Family::Normal => a + b * ndtri(p),
            Family::Logistic => a + b * (ln(p) - ln_1p(-p)),
            Family::Cauchy => a + b * tan(PI * (p - 0.5)),
            Family::Rayleigh => a * sqrt(-2.0 * ln_1p(-p)),
            Family::InverseWeibull => b * powf(-ln(p), -1.0 / a),
            Family::LogLogistic => b * exp((ln(p) - ln_1p(-p)) / a),
            Family::Lomax => b * expm1(-ln_1p(-p) / a),
            Family::Laplace => {
                if p < 0.5 {
                    a + b * ln(2.0 * p)
                } else {
                    a - b * ln(2.0 * (1.0 - p))
                }
            }
            Family::Uniform => a + p * (b - a),
            Family::Gamma => self.invert_positive(p, gamma_guess(a, p) / b),
            Family::Nakagami => self.invert_positive(p, sqrt(gamma_guess(a, p) * b / a)),
            Family::InverseGamma => self.invert_positive(p, b / gamma_guess(a, 1.0 - p)),
            Family::InverseGaussian => self.invert_positive(p, a),
            Family::Beta => self.invert_unit(p),
        };
        Ok(x)
    }

    fn invert_positive(&self, p: f64, guess: f64) -> f64 {
        let guess = if positive(guess) { guess } else { 1.0 };
        let f = |x: f64| self.cdf(x) - p;
        let (lo, hi) = expand_bracket(f, 0.5 * guess, 2.0 * guess, true)
            .unwrap_or((f64::MIN_POSITIVE, f64::MAX));
        brent_root(f, lo, hi, 0.0, 400).unwrap_or(guess)
    }

    fn invert_unit(&self, p: f64) -> f64 {
        let f = |x: f64| self.cdf(x) - p;
        brent_root(f, 0.0, 1.0, 0.0, 400).unwrap_or(0.5)
    }

    /// Σ ln pdf(xᵢ). A datum with zero density is an error rather than `-inf`.
    pub fn loglik(&self, data: &[f64]) -> Result<f64, DistError> {
        let mut total = 0.0;
        for (index, &value) in data.iter().enumerate() {
            let l = self.ln_pdf(value);
            if l == f64::NEG_INFINITY || l.is_nan() {
                return Err(DistError::ZeroDensityDatum { index, value });
            }
            total += l;
        }
        Ok(total)
    }

    /// Draws one variate by inverse-transform sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                if let Ok(x) = self.quantile(u) {
                    return x;
                }
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + ln_1p(exp(-t))
    } else {
        ln_1p(exp(t))
    }
}

/// Wilson-Hilferty approximation to the unit-rate gamma quantile.
fn gamma_guess(shape: f64, p: f64) -> f64 {
    let z = ndtri(p);
    let c = 1.0 / (9.0 * shape);
    let w = 1.0 - c + z * sqrt(c);
    let g = shape * w * w * w;
    if g > 0.0 {
        g
    } else {
        // Small-shape lower tail: P(a, x) ≈ x^a / Γ(a + 1).
        exp((ln(p) + lgamma(shape + 1.0)) / shape)
    }
}

pub fn pdf(family: Family, params: &[f64], x: f64) -> Result<f64, DistError> {
    Ok(Model::new(family, params)?.pdf(x))
}

pub fn cdf(family: Family, params: &[f64], x: f64) -> Result<f64, DistError> {
    Ok(Model::new(family, params)?.cdf(x))
}

pub fn quantile(family: Family, params: &[f64], p: f64) -> Result<f64, DistError> {
    Model::new(family, params)?.quantile(p)
}

pub fn loglik(family: Family, params: &[f64], data: &[f64]) -> Result<f64, DistError> {
    Model::new(family, params)?.loglik(data)
}

/// A maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "repr::FittedRepr", try_from = "repr::FittedRepr"))]
pub struct FittedDistribution {
    pub family: Family,
    pub params: Vec<f64>,
    pub n: usize,
    pub log_likelihood: f64,
}

impl FittedDistribution {
    pub fn model(&self) -> Model {
        Model::new(self.family, &self.params).expect("fitted parameters are valid")
    }

    pub fn param_count(&self) -> usize {
        self.family.param_count()
    }

    /// Parameters paired with their names.
    pub fn named_params(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.family.param_names().iter().copied().zip(self.params.iter().copied())
    }
}

#[cfg(feature = "serde")]
mod repr {
    use super::{Family, FittedDistribution, Model};
    use alloc::collections::BTreeMap;
    use alloc::string::{String, ToString};
    use alloc::vec::Vec;

    #[derive(serde::Serialize, serde::Deserialize)]
    #[serde(rename_all = "camelCase")]
    pub struct FittedRepr {
        family: Family,
        params: BTreeMap<String, f64>,
        n: usize,
        log_likelihood: f64,
    }

    impl From<FittedDistribution> for FittedRepr {
        fn from(f: FittedDistribution) -> Self {
            let params = f.named_params().map(|(k, v)| (k.to_string(), v)).collect();
            Self { family: f.family, params, n: f.n, log_likelihood: f.log_likelihood }
        }
    }

    impl TryFrom<FittedRepr> for FittedDistribution {
        type Error = String;

        fn try_from(r: FittedRepr) -> Result<Self, Self::Error> {
            let params: Vec<f64> = r
                .family
                .param_names()
                .iter()
                .map(|name| {
                    r.params.get(*name).copied().ok_or_else(|| alloc::format!("missing parameter `{name}`"))
                })
                .collect::<Result<_, _>>()?;
            if r.params.len() != params.len() {
                return Err("unexpected parameters".into());
            }
            Model::new(r.family, &params).map_err(|e| e.to_string())?;
            Ok(Self { family: r.family, params, n: r.n, log_likelihood: r.log_likelihood })
        }
    }
}

/// Maximum-likelihood fit of `family` to `data`.
pub fn fit_mle(family: Family, data: &[f64]) -> Result<FittedDistribution, DistError> {
    let needed = family.param_count() + 1;
    if data.len() < needed {
        return Err(DistError::TooFewValues { family, needed, got: data.len() });
    }
    let support = family.support();
    if let Some(index) = data.iter().position(|&x| !support.admits(x)) {
        return Err(DistError::UnsupportedData { family, index, value: data[index] });
    }
    let params = estimate(family, data)?;
    let model = Model::new(family, &params)
        .map_err(|_| DistError::DegenerateData { family, reason: "estimate left the parameter space" })?;
    let log_likelihood = model.loglik(data)?;
    Ok(FittedDistribution { family, params: model.params().to_vec(), n: data.len(), log_likelihood })
}

fn degenerate(family: Family, reason: &'static str) -> DistError {
    DistError::DegenerateData { family, reason }
}

fn estimate(family: Family, data: &[f64]) -> Result<Vec<f64>, DistError> {
    let n = data.len() as f64;
    let mean = stats::mean(data);
    match family {
        Family::Exponential => {
            if mean <= 0.0 {
                return Err(degenerate(family, "all values are zero"));
            }
            Ok(vec![1.0 / mean])
        }
        Family::Normal => {
            let sd = stats::population_sd(data);
            if sd <= 0.0 {
                return Err(degenerate(family, "zero variance"));
            }
            Ok(vec![mean, sd])
        }
        Family::Lognormal => {
            let logs: Vec<f64> = data.iter().map(|&x| ln(x)).collect();
            let sd = stats::population_sd(&logs);
            if sd <= 0.0 {
                return Err(degenerate(family, "zero variance of logs"));
            }
            Ok(vec![stats::mean(&logs), sd])
        }
        Family::Rayleigh => Ok(vec![sqrt(data.iter().map(|x| x * x).sum::<f64>() / (2.0 * n))]),
        Family::Uniform => {
            let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo >= hi {
                return Err(degenerate(family, "all values identical"));
            }
            Ok(vec![lo, hi])
        }
        Family::Laplace => {
            let m = stats::median(data);
            let b = data.iter().map(|x| abs(x - m)).sum::<f64>() / n;
            if b <= 0.0 {
                return Err(degenerate(family, "all values identical"));
            }
            Ok(vec![m, b])
        }
        Family::InverseGaussian => {
            let inv_dev: f64 = data.iter().map(|&x| 1.0 / x - 1.0 / mean).sum();
            if !(inv_dev > 0.0) {
                return Err(degenerate(family, "all values identical"));
            }
            Ok(vec![mean, n / inv_dev])
        }
        Family::Gamma => fit_gamma(family, data),
        Family::InverseGamma => {
            let inv: Vec<f64> = data.iter().map(|&x| 1.0 / x).collect();
            fit_gamma(family, &inv)
        }
        Family::Nakagami => {
            let squares: Vec<f64> = data.iter().map(|x| x * x).collect();
            let omega = stats::mean(&squares);
            let s = ln(omega) - squares.iter().map(|&y| ln(y)).sum::<f64>() / n;
            if !(s > 0.0) {
                return Err(degenerate(family, "all values identical"));
            }
            Ok(vec![solve_ln_minus_digamma(s), omega])
        }
        Family::Weibull => fit_weibull(family, data),
        Family::InverseWeibull => {
            let inv: Vec<f64> = data.iter().map(|&x| 1.0 / x).collect();
            let p = fit_weibull(family, &inv)?;
            Ok(vec![p[0], 1.0 / p[1]])
        }
        Family::Gumbel => fit_gumbel(family, data),
        Family::Logistic => fit_location_scale(family, data),
        Family::Cauchy => fit_location_scale(family, data),
        Family::LogLogistic => {
            let logs: Vec<f64> = data.iter().map(|&x| ln(x)).collect();
            let p = fit_location_scale(family, &logs)?;
            Ok(vec![1.0 / p[1], exp(p[0])])
        }
        Family::Lomax => fit_lomax(data),
        Family::Beta => fit_beta(data),
    }
}

/// Gamma (shape, rate) via the profile equation ln k − ψ(k) = ln x̄ − mean(ln x);
/// the rate is then k / x̄ exactly.
fn fit_gamma(family: Family, data: &[f64]) -> Result<Vec<f64>, DistError> {
    let mean = stats::mean(data);
    let mean_ln = data.iter().map(|&x| ln(x)).sum::<f64>() / data.len() as f64;
    let s = ln(mean) - mean_ln;
    if !(s > 0.0) {
        return Err(degenerate(family, "all values identical"));
    }
    let shape = solve_ln_minus_digamma(s);
    Ok(vec![shape, shape / mean])
}

/// Weibull (shape, scale) via the profile score in the shape parameter.
fn fit_weibull(family: Family, data: &[f64]) -> Result<Vec<f64>, DistError> {
    let n = data.len() as f64;
    let max = data.iter().copied().fold(0.0, f64::max);
    let logs: Vec<f64> = data.iter().map(|&x| ln(x / max)).collect();
    let mean_ln = logs.iter().sum::<f64>() / n;
    let sd_ln = stats::population_sd(&logs);
    if !(sd_ln > 0.0) {
        return Err(degenerate(family, "all values identical"));
    }
    // h(k) = Σ yᵏ ln y / Σ yᵏ − 1/k − mean(ln y), increasing in k, with y = x / max.
    let score = |k: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for &l in &logs {
            let w = exp(k * l);
            num += w * l;
            den += w;
        }
        num / den - 1.0 / k - mean_ln
    };
    let k0 = 1.2 / sd_ln;
    let (lo, hi) = expand_bracket(score, 0.5 * k0, 2.0 * k0, true)
        .ok_or_else(|| degenerate(family, "shape equation has no root"))?;
    let k = brent_root(score, lo, hi, 1e-14 * k0, 500)
        .ok_or_else(|| degenerate(family, "shape equation has no root"))?;
    let mean_pow = logs.iter().map(|&l| exp(k * l)).sum::<f64>() / n;
    Ok(vec![k, max * powf(mean_pow, 1.0 / k)])
}

/// Gumbel (mu, sigma): σ solves σ = x̄ − Σ xᵢwᵢ / Σ wᵢ with wᵢ = e^{−xᵢ/σ},
/// then μ = −σ ln(mean wᵢ).
fn fit_gumbel(family: Family, data: &[f64]) -> Result<Vec<f64>, DistError> {
    let n = data.len() as f64;
    let mean = stats::mean(data);
    let sd = stats::population_sd(data);
    if !(sd > 0.0) {
        return Err(degenerate(family, "zero variance"));
    }
    let min = data.iter().copied().fold(f64::INFINITY, f64::min);
    let weights = |s: f64| data.iter().map(move |&x| (x, exp(-(x - min) / s)));
    let score = |s: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for (x, w) in weights(s) {
            num += (x - mean) * w;
            den += w;
        }
        -num / den - s
    };
    let s0 = sd * sqrt(6.0) / PI;
    let (lo, hi) = expand_bracket(score, 0.5 * s0, 2.0 * s0, true)
        .ok_or_else(|| degenerate(family, "scale equation has no root"))?;
    let sigma = brent_root(score, lo, hi, 1e-14 * s0, 500)
        .ok_or_else(|| degenerate(family, "scale equation has no root"))?;
    let mean_w = weights(sigma).map(|(_, w)| w).sum::<f64>() / n;
    Ok(vec![min - sigma * ln(mean_w), sigma])
}

fn finite_diff_gradient_norm(family: Family, data: &[f64], params: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..params.len() {
        let h = 1e-5 * abs(params[i]).max(1e-8);
        let mut up = params.to_vec();
        let mut down = params.to_vec();
        up[i] += h;
        down[i] -= h;
        let f = |p: &[f64]| loglik(family, p, data).unwrap_or(f64::NAN);
        sum += sq((f(&up) - f(&down)) / (2.0 * h));
    }
    sqrt(sum)
}

/// Runs simplex descent on −loglik over the unconstrained vector `start`,
/// mapping it to parameters with `to_params`.
fn simplex_fit<F>(family: Family, data: &[f64], start: [f64; 2], to_params: F) -> Result<[f64; 2], DistError>
where
    F: Fn(&[f64]) -> [f64; 2],
{
    let objective = |v: &[f64]| match Model::new(family, &to_params(v)) {
        Ok(m) => {
            let mut total = 0.0;
            for &x in data {
                total -= m.ln_pdf(x);
            }
            total
        }
        Err(_) => f64::INFINITY,
    };
    let min = nelder_mead(objective, &start, SimplexOptions::default());
    let params = to_params(&min.x);
    if !min.converged || !min.value.is_finite() {
        return Err(DistError::NonConvergence {
            family,
            iterations: min.iterations,
            gradient_norm: finite_diff_gradient_norm(family, data, &params),
            params: params.to_vec(),
        });
    }
    Ok(params)
}

/// Logistic or Cauchy fit on standardized data; both are location-scale
/// families, so the MLE maps back exactly.
fn fit_location_scale(family: Family, data: &[f64]) -> Result<Vec<f64>, DistError> {
    let target = match family {
        Family::LogLogistic => Family::Logistic,
        f => f,
    };
    let sorted = stats::sorted(data);
    let (center, spread, start_scale) = match target {
        Family::Cauchy => {
            let iqr = stats::quantile_sorted(&sorted, 0.75) - stats::quantile_sorted(&sorted, 0.25);
            let spread = if iqr > 0.0 { iqr } else { stats::population_sd(data) };
            (stats::quantile_sorted(&sorted, 0.5), spread, 0.5)
        }
        _ => (stats::mean(data), stats::population_sd(data), sqrt(3.0) / PI),
    };
    if !(spread > 0.0) {
        return Err(degenerate(family, "zero spread"));
    }
    let z: Vec<f64> = data.iter().map(|x| (x - center) / spread).collect();
    let p = simplex_fit(target, &z, [0.0, ln(start_scale)], |v| [v[0], exp(v[1])])
        .map_err(|e| relabel(e, family))?;
    Ok(vec![center + spread * p[0], spread * p[1]])
}

fn relabel(e: DistError, family: Family) -> DistError {
    match e {
        DistError::NonConvergence { iterations, params, gradient_norm, .. } => {
            DistError::NonConvergence { family, iterations, params, gradient_norm }
        }
        other => other,
    }
}

/// Lomax fit on data scaled by its mean (scale equivariance). When the
/// likelihood keeps improving towards the exponential limit (shape → ∞) the
/// fit is reported as non-convergent.
fn fit_lomax(data: &[f64]) -> Result<Vec<f64>, DistError> {
    let family = Family::Lomax;
    let mean = stats::mean(data);
    if !(mean > 0.0) {
        return Err(degenerate(family, "all values are zero"));
    }
    let z: Vec<f64> = data.iter().map(|x| x / mean).collect();
    let v = stats::sample_variance(&z);
    let shape0 = if v > 1.0 { 2.0 * v / (v - 1.0) } else { 10.0 };
    let scale0 = shape0 - 1.0;
    let p = simplex_fit(family, &z, [ln(shape0), ln(scale0)], |v| [exp(v[0]), exp(v[1])]);
    match p {
        Ok(p) if p[0] < 1e6 => Ok(vec![p[0], p[1] * mean]),
        Ok(p) => Err(DistError::NonConvergence {
            family,
            iterations: SimplexOptions::default().max_iterations,
            gradient_norm: finite_diff_gradient_norm(family, data, &[p[0], p[1] * mean]),
            params: vec![p[0], p[1] * mean],
        }),
        Err(DistError::NonConvergence { iterations, params, .. }) => {
            let params = vec![params[0], params[1] * mean];
            Err(DistError::NonConvergence {
                family,
                iterations,
                gradient_norm: finite_diff_gradient_norm(family, data, &params),
                params,
            })
        }
        Err(e) => Err(e),
    }
}

fn fit_beta(data: &[f64]) -> Result<Vec<f64>, DistError> {
    let family = Family::Beta;
    let m = stats::mean(data);
    let v = stats::sample_variance(data);
    if !(v > 0.0) {
        return Err(degenerate(family, "zero variance"));
    }
    let common = m * (1.0 - m) / v - 1.0;
    let (a0, b0) = if common > 0.0 { (m * common, (1.0 - m) * common) } else { (1.0, 1.0) };
    let p = simplex_fit(family, data, [ln(a0), ln(b0)], |v| [exp(v[0]), exp(v[1])])?;
    Ok(p.to_vec())
}

/// Moment-matching starting values, used as the baseline in optimality
/// checks: the fitted log-likelihood must not fall below the one at these
/// parameters.
pub fn moment_estimate(family: Family, data: &[f64]) -> Option<Vec<f64>> {
    let m = stats::mean(data);
    let v = stats::sample_variance(data);
    let sd = sqrt(v);
    let p = match family {
        Family::Exponential => vec![1.0 / m],
        Family::Gamma => vec![m * m / v, m / v],
        Family::Weibull => {
            let logs: Vec<f64> = data.iter().map(|&x| ln(x)).collect();
            vec![1.2 / sqrt(stats::sample_variance(&logs)), m]
        }
        Family::Lognormal => {
            let s2 = ln_1p(v / (m * m));
            vec![ln(m) - 0.5 * s2, sqrt(s2)]
        }
        Family::Gumbel => {
            let s = sd * sqrt(6.0) / PI;
            vec![m - crate::math::EULER_GAMMA * s, s]
        }
        Family::Nakagami => {
            let omega = data.iter().map(|x| x * x).sum::<f64>() / data.len() as f64;
            vec![omega * omega / (stats::sample_variance(&data.iter().map(|x| x * x).collect::<Vec<_>>())), omega]
        }
        Family::Normal => vec![m, sd],
        Family::Logistic => vec![m, sd * sqrt(3.0) / PI],
        Family::Cauchy => vec![stats::median(data), sd],
        Family::Rayleigh => vec![m * sqrt(2.0 / PI)],
        Family::InverseGamma => {
            let shape = m * m / v + 2.0;
            vec![shape, m * (shape - 1.0)]
        }
        Family::InverseGaussian => vec![m, m * m * m / v],
        Family::InverseWeibull => vec![1.2 / sqrt(stats::sample_variance(&data.iter().map(|&x| ln(x)).collect::<Vec<_>>())), m],
        Family::LogLogistic => {
            let logs: Vec<f64> = data.iter().map(|&x| ln(x)).collect();
            vec![PI / (sqrt(3.0) * sqrt(stats::sample_variance(&logs))), exp(stats::median(&logs))]
        }
        Family::Lomax => {
            let shape = if v > m * m { 2.0 * v / (v - m * m) } else { 10.0 };
            vec![shape, m * (shape - 1.0)]
        }
        Family::Laplace => vec![stats::median(data), sd / sqrt(2.0)],
        Family::Uniform => {
            let h = sqrt(3.0) * sd;
            vec![m - h, m + h]
        }
        Family::Beta => {
            let c = m * (1.0 - m) / v - 1.0;
            vec![m * c, (1.0 - m) * c]
        }
    };
    Model::new(family, &p).ok().map(|m| m.params().to_vec())
}
