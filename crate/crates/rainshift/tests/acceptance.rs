//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rainshift::table::parse_csv;
use rainshift_core::cluster::{agglomerate, distance_matrix, Linkage, Metric, Standardize};
use rainshift_core::distributions::{fit_mle, Family, Model};
use rainshift_core::gof::{ks_statistic, ks_test};
use rainshift_core::ingest::{decadal_profiles, month_series};
use rainshift_core::selection::{aic, bic, fit_all, Criterion, ZeroPolicy};
use rainshift_core::{RainfallRecord, RainfallSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_1901_2022.csv")
}

fn bundled_series() -> RainfallSeries {
    parse_csv(&std::fs::read_to_string(bundled()).unwrap(), "synthetic").unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Rescales `raw` affinely to the given mean and population variance.
fn with_moments(raw: &[f64], mean: f64, variance: f64) -> Vec<f64> {
    let n = raw.len() as f64;
    let m = raw.iter().sum::<f64>() / n;
    let v = raw.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    let k = (variance / v).sqrt();
    raw.iter().map(|x| mean + (x - m) * k).collect()
}

fn exponential_identity(rate: f64, published_ll: f64, tol: f64) -> Outcome {
    let n = 122;
    let closed_form = n as f64 * (rate.ln() - 1.0);
    ensure!((closed_form - published_ll).abs() <= tol, "n(ln r - 1) = {closed_form}, published {published_ll}");

    // A sample whose mean is 1/rate must be fitted to that rate with the same
    // log-likelihood.
    let mut rng = ChaCha8Rng::seed_from_u64(rate.to_bits());
    let raw = Model::new(Family::Exponential, &[rate]).unwrap().sample_n(&mut rng, n);
    let scale = (1.0 / rate) / (raw.iter().sum::<f64>() / n as f64);
    let data: Vec<f64> = raw.iter().map(|x| x * scale).collect();
    let fit = fit_mle(Family::Exponential, &data).map_err(|e| e.to_string())?;
    ensure!(rel(fit.params[0], rate) < 1e-12, "fitted rate {}", fit.params[0]);
    ensure!((fit.log_likelihood - published_ll).abs() <= tol, "fitted LL {} vs {published_ll}", fit.log_likelihood);
    Ok(format!("LL {:.4} vs published {published_ll} (|d| {:.4})", fit.log_likelihood, (fit.log_likelihood - published_ll).abs()))
}

fn c1() -> Outcome {
    exponential_identity(0.05172944, -483.3308, 0.01)
}

fn c2() -> Outcome {
    exponential_identity(0.05581314, -474.061, 0.005)
}

fn c3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = Model::new(Family::Gamma, &[7.72732458, 0.02589706]).unwrap();
    for _ in 0..20 {
        let data = truth.sample_n(&mut rng, 122);
        let mean = data.iter().sum::<f64>() / 122.0;
        let fit = fit_mle(Family::Gamma, &data).map_err(|e| e.to_string())?;
        let ratio = fit.params[0] / fit.params[1];
        ensure!(rel(ratio, mean) < 1e-9, "shape/rate {ratio} vs mean {mean}");
    }
    let published: f64 = 7.72732458 / 0.02589706;
    ensure!((published - 298.39).abs() <= 0.01, "published ratio {published}");
    Ok(format!("shape/rate = mean at every fit; published ratio {published:.3} vs 298.39"))
}

fn c4() -> Outcome {
    let (mean, sd) = (285.84_f64, 107.18_f64);
    let omega = mean * mean + 121.0 / 122.0 * sd * sd;
    let published = 93098.633771;
    ensure!(rel(omega, published) <= 1e-4, "closed form {omega} vs {published}");

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let raw = Model::new(Family::Gamma, &[7.0, 1.0]).unwrap().sample_n(&mut rng, 122);
    let data = with_moments(&raw, mean, 121.0 / 122.0 * sd * sd);
    ensure!(data.iter().all(|&x| x > 0.0), "constructed sample is not positive");
    let fit = fit_mle(Family::Nakagami, &data).map_err(|e| e.to_string())?;
    let mean_sq = data.iter().map(|x| x * x).sum::<f64>() / 122.0;
    ensure!(rel(fit.params[1], mean_sq) < 1e-12, "fitted scale {} vs mean of squares {mean_sq}", fit.params[1]);
    ensure!(rel(fit.params[1], published) <= 1e-4, "fitted scale {} vs {published}", fit.params[1]);
    Ok(format!("scale {:.3} vs published {published} (rel {:.2e})", fit.params[1], rel(fit.params[1], published)))
}

fn c5() -> Outcome {
    let truth = Model::new(Family::Gumbel, &[140.07695, 69.19052]).unwrap();
    let mut within = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + trial);
        let data = truth.sample_n(&mut rng, 122);
        let mean = data.iter().sum::<f64>() / 122.0;
        let fit = fit_mle(Family::Gumbel, &data).map_err(|e| e.to_string())?;
        if rel(fit.params[0] + 0.57722 * fit.params[1], mean) <= 0.01 {
            within += 1;
        }
    }
    ensure!(within >= 90, "{within}/100 trials within 1%");
    Ok(format!("{within}/100 trials within 1%"))
}

fn c6() -> Outcome {
    let start = Instant::now();
    let cases: [(Family, [f64; 2]); 5] = [
        (Family::Gamma, [7.727, 0.0259]),
        (Family::Weibull, [2.0, 300.0]),
        (Family::Gumbel, [140.0, 69.0]),
        (Family::Nakagami, [1.9, 93000.0]),
        (Family::Lognormal, [5.0, 0.5]),
    ];
    let mut worst: f64 = 0.0;
    for (i, (family, params)) in cases.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + i as u64);
        let data = Model::new(*family, params).unwrap().sample_n(&mut rng, 10_000);
        let fit = fit_mle(*family, &data).map_err(|e| e.to_string())?;
        for (got, want) in fit.params.iter().zip(params) {
            let e = rel(*got, *want);
            worst = worst.max(e);
            ensure!(e <= 0.05, "{family}: {got} vs {want}");
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("worst relative error {:.2}%, {elapsed:.2?}", 100.0 * worst))
}

fn c7() -> Outcome {
    let series = bundled_series();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut samples: Vec<Vec<f64>> = (1..=12).map(|m| month_series(&series, m).unwrap().values).collect();
    for family in [Family::Gamma, Family::Weibull, Family::Normal, Family::Beta] {
        let params = match family {
            Family::Beta => vec![2.0, 5.0],
            Family::Normal => vec![50.0, 10.0],
            _ => vec![2.0, 0.1],
        };
        samples.push(Model::new(family, &params).unwrap().sample_n(&mut rng, 80));
    }
    let mut checked = 0;
    for (i, data) in samples.iter().enumerate() {
        for policy in [ZeroPolicy::SkipFamily, ZeroPolicy::DropZeros] {
            let Ok(ranking) = fit_all(&i.to_string(), data, &Family::ALL, Criterion::Aic, policy) else { continue };
            for r in &ranking.results {
                let (k, n, ll) = (r.fitted.param_count(), r.fitted.n, r.fitted.log_likelihood);
                ensure!(r.aic.to_bits() == aic(k, ll).to_bits(), "{}: AIC {} vs {}", r.fitted.family, r.aic, aic(k, ll));
                ensure!(r.bic.to_bits() == bic(k, n, ll).to_bits(), "{}: BIC {} vs {}", r.fitted.family, r.bic, bic(k, n, ll));
                checked += 1;
            }
        }
    }
    let example = aic(2, -738.1478);
    ensure!((example - 1480.2956).abs() < 1e-9, "gamma-August AIC {example}");
    Ok(format!("{checked} fit results bit-exact; gamma-August AIC {example:.4}"))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn centroid(rows: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; rows[0].len()];
    for &m in members {
        for (ci, x) in c.iter_mut().zip(&rows[m]) {
            *ci += x;
        }
    }
    c.iter().map(|v| v / members.len() as f64).collect()
}

fn linkage_distance(rows: &[Vec<f64>], a: &[usize], b: &[usize], linkage: Linkage) -> f64 {
    let pairs = || a.iter().flat_map(|&i| b.iter().map(move |&j| euclid(&rows[i], &rows[j])));
    match linkage {
        Linkage::Single => pairs().fold(f64::INFINITY, f64::min),
        Linkage::Complete => pairs().fold(0.0, f64::max),
        Linkage::Average => pairs().sum::<f64>() / (a.len() * b.len()) as f64,
        Linkage::Ward => {
            let (na, nb) = (a.len() as f64, b.len() as f64);
            (2.0 * na * nb / (na + nb)).sqrt() * euclid(&centroid(rows, a), &centroid(rows, b))
        }
    }
}

/// Brute-force agglomeration recomputing every cluster pair from the raw
/// vectors at every step.
fn cluster_oracle(rows: &[Vec<f64>], linkage: Linkage) -> Vec<(usize, usize, f64)> {
    let n = rows.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, (usize, usize))> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let d = linkage_distance(rows, &clusters[i].1, &clusters[j].1, linkage);
                let ids = (clusters[i].0.min(clusters[j].0), clusters[i].0.max(clusters[j].0));
                if best.as_ref().is_none_or(|b| d < b.0 || (d == b.0 && ids < b.3)) {
                    best = Some((d, i, j, ids));
                }
            }
        }
        let (d, i, j, (lo, hi)) = best.unwrap();
        out.push((lo, hi, d));
        let mut merged = clusters[i].1.clone();
        merged.extend_from_slice(&clusters[j].1);
        clusters.remove(j);
        clusters[i] = (n + step, merged);
    }
    out
}

fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let rows: Vec<Vec<f64>> = (0..10).map(|_| (0..12).map(|_| rng.random_range(0.0..300.0)).collect()).collect();
        let items: Vec<(String, Vec<f64>)> = rows.iter().enumerate().map(|(i, r)| (i.to_string(), r.clone())).collect();
        let dm = distance_matrix(&items, Metric::Euclidean, Standardize::None).map_err(|e| e.to_string())?;
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward] {
            let tree = agglomerate(&dm, linkage);
            let expected = cluster_oracle(&rows, linkage);
            ensure!(tree.steps.len() == expected.len(), "case {case} {linkage}: step count");
            for (s, (lo, hi, h)) in tree.steps.iter().zip(&expected) {
                let got = (s.left.min(s.right), s.left.max(s.right));
                ensure!(got == (*lo, *hi), "case {case} {linkage}: merged {got:?}, oracle ({lo}, {hi})");
                worst = worst.max((s.height - h).abs());
                ensure!((s.height - h).abs() <= 1e-10, "case {case} {linkage}: height {} vs {h}", s.height);
            }
            ensure!(tree.steps.windows(2).all(|w| w[0].height <= w[1].height), "case {case} {linkage}: not monotone");
        }
    }
    Ok(format!("2000 trees identical, max height error {worst:.1e}, all monotone"))
}

fn ks_oracle(model: &Model, data: &[f64]) -> f64 {
    let n = data.len() as f64;
    let mut d: f64 = 0.0;
    for &x in data {
        let at = data.iter().filter(|&&y| y <= x).count() as f64 / n;
        let before = data.iter().filter(|&&y| y < x).count() as f64 / n;
        let f = model.cdf(x);
        d = d.max((at - f).abs()).max((before - f).abs());
    }
    d
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    let mut attempt = 0;
    while pairs < 1000 {
        let family = Family::ALL[attempt % Family::ALL.len()];
        attempt += 1;
        let truth = Model::new(family, &random_params(family, &mut rng)).unwrap();
        let n = rng.random_range(5..150);
        let data = truth.sample_n(&mut rng, n);
        let Ok(fit) = fit_mle(family, &data) else { continue };
        let model = fit.model();
        let e = (ks_statistic(&model, &data) - ks_oracle(&model, &data)).abs();
        worst = worst.max(e);
        ensure!(e <= 1e-12, "{family} n={n}: |d| = {e:e}");
        pairs += 1;
    }
    let uniform = Model::new(Family::Uniform, &[0.0, 4.0]).unwrap();
    let d = ks_statistic(&uniform, &[1.0, 2.0, 3.0, 4.0]);
    ensure!(d == 0.25, "hand case D = {d}");
    Ok(format!("{pairs} fitted pairs, max |d| {worst:.1e}; hand case D = {d}"))
}

fn random_params<R: Rng>(family: Family, rng: &mut R) -> Vec<f64> {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    match family {
        Family::Exponential => vec![u(0.001, 2.0)],
        Family::Gamma => vec![u(0.3, 20.0), u(0.001, 2.0)],
        Family::Weibull | Family::InverseWeibull => vec![u(0.5, 8.0), u(1.0, 500.0)],
        Family::Lognormal => vec![u(-2.0, 6.0), u(0.1, 2.0)],
        Family::Gumbel => vec![u(-100.0, 300.0), u(1.0, 100.0)],
        Family::Nakagami => vec![u(0.5, 10.0), u(1.0, 1e5)],
        Family::Normal | Family::Logistic | Family::Cauchy | Family::Laplace => vec![u(-100.0, 300.0), u(0.5, 100.0)],
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

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for family in Family::ALL {
        for _ in 0..20 {
            let model = Model::new(family, &random_params(family, &mut rng)).unwrap();
            for i in 1..=99 {
                let p = i as f64 / 100.0;
                let x = model.quantile(p).map_err(|e| format!("{family} quantile({p}): {e}"))?;
                let e = (model.cdf(x) - p).abs();
                worst = worst.max(e);
                ensure!(e < 1e-9, "{family} {:?} p={p}: |cdf(q(p)) - p| = {e:e}", model.params());
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} roundtrips, max error {worst:.1e}"))
}

fn c11() -> Outcome {
    let series = bundled_series();
    ensure!(series.len() == 122, "bundled series has {} years", series.len());
    let profiles = decadal_profiles(&series, 10).map_err(|e| e.to_string())?;
    ensure!(profiles.len() == 13, "{} profiles", profiles.len());
    let last = profiles.last().unwrap();
    ensure!(last.year_count == 2 && (last.start_year, last.end_year) == (2021, 2022), "last profile {last:?}");

    let records = (1..=122).map(|y| RainfallRecord { year: 1900 + y, depths: [y as f64; 12] }).collect();
    let plain = RainfallSeries::new("plain", records).unwrap();
    let again = decadal_profiles(&plain, 10).map_err(|e| e.to_string())?;
    ensure!(again.len() == 13 && again[12].year_count == 2, "generated series");
    Ok(format!("13 profiles, last {}-{} spans {} years", last.start_year, last.end_year, last.year_count))
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn c12() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    let mut longest = Duration::ZERO;
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let start = Instant::now();
        let o = Command::new(env!("CARGO_BIN_EXE_rainshift"))
            .args(["report", "--seed", "0", "--input"])
            .arg(bundled())
            .arg("--out")
            .arg(&out)
            .env_remove("RAINSHIFT_OUT")
            .output()
            .map_err(|e| e.to_string())?;
        longest = longest.max(start.elapsed());
        ensure!(o.status.success(), "run {run} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
        trees.push(tree(&out));
    }
    ensure!(longest < Duration::from_secs(30), "slowest run {longest:?}");
    ensure!(!trees[0].is_empty(), "no files written");
    ensure!(trees[0].keys().eq(trees[1].keys()), "file lists differ");
    for (name, bytes) in &trees[0] {
        ensure!(*bytes == trees[1][name], "{name} differs between runs");
    }
    ensure!(trees[0].keys().any(|k| k.ends_with(".report.json")), "no report.json");
    Ok(format!("{} files byte-identical, slowest run {longest:.2?}", trees[0].len()))
}

fn c13() -> Outcome {
    let model = Model::new(Family::Gamma, &[7.727, 0.0259]).unwrap();
    let mut rejections = 0;
    for trial in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(13_000 + trial);
        let data = model.sample_n(&mut rng, 122);
        if ks_test(&model, &data).map_err(|e| e.to_string())?.p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / 10.0;
    ensure!((30..=80).contains(&rejections), "rejection rate {rate}%");
    Ok(format!("rejection rate {rate}%"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("exponential log-likelihood identity, January", c1),
        ("exponential log-likelihood identity, February", c2),
        ("gamma MLE mean identity", c3),
        ("nakagami scale identity", c4),
        ("gumbel moment sanity band", c5),
        ("parameter recovery at n = 10000", c6),
        ("AIC/BIC arithmetic", c7),
        ("clustering oracle", c8),
        ("KS oracle", c9),
        ("quantile/CDF roundtrip", c10),
        ("decadal structure", c11),
        ("report determinism", c12),
        ("GOF calibration", c13),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
