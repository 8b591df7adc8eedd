//! Numerical core for detecting shifts in monthly rainfall patterns.
//!
//! The crate is `no_std` and needs only `alloc`. It covers the whole
//! analysis pipeline that does not touch the filesystem:
//!
//! - [`ingest`]: validated per-year monthly records, month columns, annual
//!   totals and decadal profiles.
//! - [`stats`]: descriptive statistics, box-whisker summaries and OLS trends.
//! - [`distributions`]: the probability-family registry with densities,
//!   CDFs, quantiles and maximum-likelihood fits.
//! - [`selection`]: fit every applicable family, rank by AIC/BIC/log-likelihood,
//!   and compute Cullen-Frey moment-plane coordinates.
//! - [`gof`]: Kolmogorov-Smirnov and chi-squared goodness-of-fit.
//! - [`cluster`]: agglomerative clustering with Lance-Williams updates.
//!
//! CSV parsing, report emission and the command line live in the companion
//! `rainshift` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod math;

pub mod cluster;
pub mod distributions;
pub mod gof;
pub mod ingest;
pub mod optim;
pub mod selection;
pub mod special;
pub mod stats;

pub use distributions::{Family, FittedDistribution, Model, Support};
pub use ingest::{RainfallRecord, RainfallSeries};
