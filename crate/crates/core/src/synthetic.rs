//! Synthetic two-channel climate-style record with planted regimes.
//!
//! Stands in for ice-core data (`age,temp,co2`, age descending). Three
//! regimes alternate: a stationary one (noise around a fixed state), one with
//! small lagged temperature/CO2 cycles riding on a slow trend, and one with
//! large cycles. The regime of every row is written alongside the data.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::rng::seeded_rng;

pub const STATIONARY: usize = 0;
pub const SMALL_LOOPS: usize = 1;
pub const LARGE_LOOPS: usize = 2;

/// Planted regime sequence as `(regime, rows)`.
pub const SEGMENTS: [(usize, usize); 9] = [
    (STATIONARY, 120),
    (SMALL_LOOPS, 100),
    (LARGE_LOOPS, 120),
    (STATIONARY, 100),
    (LARGE_LOOPS, 100),
    (SMALL_LOOPS, 120),
    (STATIONARY, 100),
    (SMALL_LOOPS, 100),
    (LARGE_LOOPS, 140),
];

/// Years between consecutive rows.
pub const AGE_STEP: f64 = 400.0;

pub struct Record {
    /// Ascending age; written in reverse.
    pub age: Vec<f64>,
    pub temp: Vec<f64>,
    pub co2: Vec<f64>,
    pub regime: Vec<usize>,
}

/// Deterministic for a given seed. Cycles last 10 rows with a jittered phase
/// step; CO2 lags temperature by a fixed phase.
pub fn vostok_like(seed: u64) -> Record {
    let mut rng = seeded_rng(seed);
    let noise = Normal::new(0.0, 0.08).expect("valid sd");
    let n: usize = SEGMENTS.iter().map(|s| s.1).sum();
    let mut rec = Record { age: Vec::with_capacity(n), temp: Vec::with_capacity(n), co2: Vec::with_capacity(n), regime: Vec::with_capacity(n) };
    let lag = std::f64::consts::FRAC_PI_3;
    let mut phase: f64 = 0.0;
    let mut i = 0usize;
    for &(regime, rows) in &SEGMENTS {
        for j in 0..rows {
            phase += std::f64::consts::TAU / 10.0 * rng.random_range(0.85..1.15);
            let (amp, trend) = match regime {
                STATIONARY => (0.0, 0.0),
                SMALL_LOOPS => (1.0, 0.004 * j as f64),
                _ => (3.0, 0.0),
            };
            rec.age.push(i as f64 * AGE_STEP);
            rec.temp.push(-4.0 + trend + amp * phase.cos() + noise.sample(&mut rng));
            rec.co2.push(2.0 + trend + 1.2 * amp * (phase - lag).cos() + noise.sample(&mut rng));
            rec.regime.push(regime);
            i += 1;
        }
    }
    rec
}

/// CSV text `age,temp,co2,regime`, oldest row first.
pub fn vostok_like_csv(seed: u64) -> String {
    let rec = vostok_like(seed);
    let mut out = String::from("age,temp,co2,regime\n");
    for i in (0..rec.age.len()).rev() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            rec.age[i],
            crate::io::fmt_real(rec.temp[i]),
            crate::io::fmt_real(rec.co2[i]),
            rec.regime[i]
        ));
    }
    out
}

/// Majority planted regime of each window of `window_len` rows, `stride`
/// apart, over the ascending-age record.
pub fn window_regimes(regime: &[usize], window_len: usize, stride: usize) -> Result<Vec<usize>> {
    let count = crate::embed::window_count(regime.len(), window_len, stride);
    Ok((0..count)
        .map(|w| {
            let mut votes = [0usize; 3];
            for &r in &regime[w * stride..w * stride + window_len] {
                votes[r] += 1;
            }
            (0..3).max_by_key(|&r| (votes[r], std::cmp::Reverse(r))).unwrap_or(0)
        })
        .collect())
}
