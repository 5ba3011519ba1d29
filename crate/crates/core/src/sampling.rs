//! Deterministic point sampling.
//!
//! Points are always drawn sequentially from a seeded generator before any
//! parallel work starts, so results never depend on scheduling.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::metric::{MetricSpec, PAIRS};
use crate::Error;

/// Largest denominator of a random rational coordinate.
pub const MAX_DENOMINATOR: i64 = 64;
/// Redraws allowed per rational point before giving up.
pub const RATIONAL_RETRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePlan {
    pub samples: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(samples: usize, seed: u64) -> Self {
        SamplePlan { samples, seed }
    }

    /// Draw budget: rejected points count against it.
    pub fn max_attempts(&self) -> usize {
        self.samples.saturating_mul(100).max(1000)
    }
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan { samples: 100, seed: 42 }
    }
}

/// Uniform draw from the spec's sampling boxes.
pub fn draw_point(rng: &mut impl Rng, boxes: &[(f64, f64); 4]) -> [f64; 4] {
    std::array::from_fn(|i| {
        let (lo, hi) = boxes[i];
        if lo == hi {
            lo
        } else {
            rng.gen_range(lo..hi)
        }
    })
}

/// Up to `plan.samples` admissible points from the spec's boxes.
pub fn sample_points(spec: &MetricSpec, plan: &SamplePlan) -> Result<Vec<[f64; 4]>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut out = Vec::with_capacity(plan.samples);
    let attempts = plan.max_attempts();
    for _ in 0..attempts {
        if out.len() == plan.samples {
            break;
        }
        let p = draw_point(&mut rng, &spec.domain.boxes);
        if spec.admissible(&p).ok {
            out.push(p);
        }
    }
    if out.is_empty() && plan.samples > 0 {
        return Err(Error::NoAdmissiblePoints { attempts });
    }
    Ok(out)
}

/// Order-preserving parallel map.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

/// Lexicographic grid over the boxes; `n` points per axis including both
/// ends (a single point sits at the box centre).
pub fn grid_points(boxes: &[(f64, f64); 4], n: [usize; 4]) -> Vec<[f64; 4]> {
    let axis = |i: usize| -> Vec<f64> {
        let (lo, hi) = boxes[i];
        match n[i] {
            0 => Vec::new(),
            1 => vec![0.5 * (lo + hi)],
            k => (0..k).map(|t| lo + (hi - lo) * t as f64 / (k - 1) as f64).collect(),
        }
    };
    let axes: Vec<Vec<f64>> = (0..4).map(axis).collect();
    let mut out = Vec::new();
    for &a in &axes[0] {
        for &b in &axes[1] {
            for &c in &axes[2] {
                for &d in &axes[3] {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// A uniformly chosen rational in `[lo, hi]` with denominator at most
/// [`MAX_DENOMINATOR`].
fn draw_rational(rng: &mut impl Rng, lo: &BigRational, hi: &BigRational) -> BigRational {
    let d = rng.gen_range(1..=MAX_DENOMINATOR);
    let db = BigInt::from(d);
    let lo_n = -floor_div(&-(lo.numer() * &db), lo.denom());
    let hi_n = floor_div(&(hi.numer() * &db), hi.denom());
    if lo_n > hi_n {
        return lo.clone();
    }
    let span = (&hi_n - &lo_n).to_u64().unwrap_or(u64::MAX - 1);
    let k = rng.gen_range(0..=span);
    BigRational::new(lo_n + BigInt::from(k), db)
}

/// Deterministic rational point for `(seed, index)` with pairwise distinct
/// coordinates; `index` selects an independent generator stream.
pub fn random_rational_point(
    seed: u64,
    index: u64,
    boxes: &[(BigRational, BigRational); 4],
) -> Result<[BigRational; 4], Error> {
    for (lo, hi) in boxes {
        if lo > hi {
            return Err(Error::InvalidMetric(format!("empty box [{lo}, {hi}]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    for _ in 0..RATIONAL_RETRIES {
        let p: [BigRational; 4] = std::array::from_fn(|i| draw_rational(&mut rng, &boxes[i].0, &boxes[i].1));
        if PAIRS.iter().all(|&(i, j)| p[i] != p[j]) {
            return Ok(p);
        }
    }
    Err(Error::RetriesExhausted(RATIONAL_RETRIES))
}
