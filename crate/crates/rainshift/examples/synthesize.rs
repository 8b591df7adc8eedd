//! Writes the bundled synthetic rainfall table to stdout.
//!
//! Each month is a zero-inflated gamma whose mean and standard deviation
//! match the long-term monthly climatology of a monsoon station; values are
//! rounded to 0.01 mm. The output is fully determined by the seed.
//!
//! ```text
//! cargo run -p rainshift --example synthesize > crates/rainshift/data/synthetic_1901_2022.csv
//! ```

use rainshift_core::distributions::{Family, Model};
use rainshift_core::{RainfallRecord, RainfallSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 1901_2022;

/// (mean, sd, probability of a dry month) for January through December.
const CLIMATOLOGY: [(f64, f64, f64); 12] = [
    (19.33, 18.52, 0.08),
    (17.92, 17.98, 0.10),
    (12.16, 15.34, 0.15),
    (5.04, 7.44, 0.20),
    (11.78, 17.32, 0.12),
    (102.08, 71.8, 0.0),
    (285.84, 107.18, 0.0),
    (298.39, 105.83, 0.0),
    (179.41, 87.45, 0.0),
    (34.02, 32.57, 0.05),
    (10.06, 19.03, 0.40),
    (3.85, 5.85, 0.30),
];

fn wet_model(mean: f64, sd: f64, p_dry: f64) -> Model {
    let wet_mean = mean / (1.0 - p_dry);
    let wet_var = (sd * sd + mean * mean) / (1.0 - p_dry) - wet_mean * wet_mean;
    let shape = wet_mean * wet_mean / wet_var;
    Model::new(Family::Gamma, &[shape, shape / wet_mean]).expect("climatology gives valid gamma parameters")
}

fn main() {
    let models: Vec<Model> = CLIMATOLOGY.iter().map(|&(m, s, p)| wet_model(m, s, p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let records = (1901..=2022)
        .map(|year| {
            let mut depths = [0.0; 12];
            for (m, d) in depths.iter_mut().enumerate() {
                let dry = rng.random::<f64>() < CLIMATOLOGY[m].2;
                let v = models[m].sample(&mut rng);
                *d = if dry { 0.0 } else { (v * 100.0).round() / 100.0 };
            }
            RainfallRecord { year, depths }
        })
        .collect();
    let series = RainfallSeries::new("synthetic", records).expect("122 years");
    print!("{}", rainshift::table::to_csv(&series));
}
