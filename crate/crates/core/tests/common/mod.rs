#![allow(dead_code)]

use rainshift_core::Family;
use rand::Rng;

/// A random, well-conditioned parameter vector for `family`.
pub fn random_params<R: Rng>(family: Family, rng: &mut R) -> Vec<f64> {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    match family {
        Family::Exponential => vec![u(0.001, 2.0)],
        Family::Gamma => vec![u(0.3, 20.0), u(0.001, 2.0)],
        Family::Weibull | Family::InverseWeibull => vec![u(0.5, 8.0), u(1.0, 500.0)],
        Family::Lognormal => vec![u(-2.0, 6.0), u(0.1, 2.0)],
        Family::Gumbel => vec![u(-100.0, 300.0), u(1.0, 100.0)],
        Family::Nakagami => vec![u(0.5, 10.0), u(1.0, 1e5)],
        Family::Normal | Family::Logistic | Family::Cauchy | Family::Laplace => {
            vec![u(-100.0, 300.0), u(0.5, 100.0)]
        }
        Family::Rayleigh => vec![u(0.5, 300.0)],
        Family::InverseGamma => vec![u(0.5, 15.0), u(1.0, 500.0)],
        Family::InverseGaussian => vec![u(1.0, 500.0), u(1.0, 2000.0)],
        Family::LogLogistic => vec![u(0.8, 10.0), u(1.0, 500.0)],
        Family::Lomax => vec![u(0.5, 10.0), u(1.0, 500.0)],
        Family::Uniform => {
            let a = u(-100.0, 100.0);
            vec![a, a + u(0.5, 300.0)]
        }
        Family::Beta => vec![u(0.3, 10.0), u(0.3, 10.0)],
    }
}
