//! Elementary functions routed through `libm`, so the crate builds without
//! `std` and every platform computes the same bits.

pub(crate) use libm::{
    atan, ceil, exp, expm1, fabs as abs, log as ln, log1p as ln_1p, pow as powf, sqrt, tan,
};

pub(crate) const PI: f64 = core::f64::consts::PI;
pub(crate) const LN_2: f64 = core::f64::consts::LN_2;
pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[inline]
pub(crate) fn sq(x: f64) -> f64 {
    x * x
}
