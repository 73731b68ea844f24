//! One-dimensional Lloyd design under an absolute-error distortion.
//!
//! Range sets are designed in the inverse-range domain `s = 1/r`, angle sets
//! directly on `θ`. With absolute error the best codeword for a cell is the
//! cell median, and nearest-neighbour cells are intervals, so each iteration
//! is a handful of binary searches over the sorted data.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{geometric_range_samples, uniform_angle_samples, AngleSamplingSet, RangeSamplingSet};
use crate::distribution::PolarRegion;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub enum LloydInit {
    /// Geometric range samples or uniform angle samples over the data span.
    #[default]
    ClosedForm,
    /// Distinct data points drawn with the given seed.
    Random { seed: u64 },
    /// Explicit starting codewords in the original units.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydOptions {
    /// Stop once no codeword moves more than this (meters or angle units).
    pub tolerance: f64,
    pub max_iters: usize,
    pub init: LloydInit,
}

impl Default for LloydOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iters: 500,
            init: LloydInit::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydOutcome {
    /// Ascending codewords in the original units.
    pub samples: Vec<f64>,
    /// Mean distortion before the first update and after every iteration.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

fn median(s: &[f64]) -> f64 {
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Start index of each codeword's cell in `data` (plus a final `data.len()`).
fn cells(data: &[f64], code: &[f64]) -> Vec<usize> {
    let mut bounds = Vec::with_capacity(code.len() + 1);
    bounds.push(0);
    for w in code.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        // ties go to the lower codeword
        bounds.push(data.partition_point(|&x| x <= mid));
    }
    bounds.push(data.len());
    bounds
}

fn distortion(data: &[f64], code: &[f64]) -> f64 {
    let b = cells(data, code);
    let mut total = 0.0;
    for (k, c) in code.iter().enumerate() {
        total += data[b[k]..b[k + 1]]
            .iter()
            .map(|x| (x - c).abs())
            .sum::<f64>();
    }
    total / data.len() as f64
}

/// Core loop on sorted data; `orig` maps the working domain back to the
/// original units for the stopping rule.
fn run(
    data: &[f64],
    mut code: Vec<f64>,
    opts: &LloydOptions,
    orig: impl Fn(f64) -> f64,
) -> Result<LloydOutcome> {
    code.sort_by(f64::total_cmp);
    let mut objective = vec![distortion(data, &code)];
    for it in 1..=opts.max_iters {
        let b = cells(data, &code);
        let mut next: Vec<f64> = (0..code.len())
            .map(|k| {
                if b[k] < b[k + 1] {
                    median(&data[b[k]..b[k + 1]])
                } else {
                    f64::NAN
                }
            })
            .collect();
        // re-seed empty cells by splitting the most populated one at its median
        let mut span: Vec<(usize, usize)> = (0..code.len()).map(|k| (b[k], b[k + 1])).collect();
        while let Some(empty) = next.iter().position(|c| c.is_nan()) {
            let big = (0..code.len())
                .filter(|&k| !next[k].is_nan())
                .max_by(|&x, &y| {
                    (span[x].1 - span[x].0)
                        .cmp(&(span[y].1 - span[y].0))
                        .then(y.cmp(&x))
                })
                .expect("at least one populated cell");
            let (s, e) = span[big];
            if e - s < 2 {
                next[empty] = next[big];
                span[empty] = (e, e);
                continue;
            }
            let mid = s + (e - s) / 2;
            next[big] = median(&data[s..mid]);
            next[empty] = median(&data[mid..e]);
            span[big] = (s, mid);
            span[empty] = (mid, e);
        }
        next.sort_by(f64::total_cmp);
        let moved = code
            .iter()
            .zip(&next)
            .map(|(a, b)| (orig(*a) - orig(*b)).abs())
            .fold(0.0, f64::max);
        code = next;
        objective.push(distortion(data, &code));
        if moved < opts.tolerance {
            return Ok(LloydOutcome {
                samples: code,
                objective,
                iterations: it,
            });
        }
    }
    let partial = code.iter().map(|&c| orig(c)).collect();
    Err(Error::NotConverged {
        iterations: opts.max_iters,
        partial,
    })
}

fn check(data: &[f64], bits: u32, opts: &LloydOptions) -> Result<usize> {
    if bits > 24 {
        return Err(Error::InvalidArgument(format!("{bits} bits is too many")));
    }
    let n = 1usize << bits;
    if data.len() < n {
        return Err(Error::InvalidArgument(format!(
            "need at least {n} data points, got {}",
            data.len()
        )));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be > 0".into()));
    }
    Ok(n)
}

fn random_init(data: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, data.len(), n)
        .into_iter()
        .map(|i| data[i])
        .collect()
}

/// Range codewords minimizing the mean of `|1/r − 1/r̂|` over `data`.
pub fn lloyd_range(data: &[f64], q: u32, opts: &LloydOptions) -> Result<LloydOutcome> {
    let n = check(data, q, opts)?;
    if data.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument(
            "range data must be finite and positive".into(),
        ));
    }
    let mut inv: Vec<f64> = data.iter().map(|r| 1.0 / r).collect();
    inv.sort_by(f64::total_cmp);
    let (lo, hi) = (1.0 / inv[inv.len() - 1], 1.0 / inv[0]);
    let init: Vec<f64> = match &opts.init {
        LloydInit::ClosedForm if hi > lo => {
            let reg = PolarRegion {
                theta_min: -1.0,
                theta_max: 1.0,
                r_min: lo,
                r_max: hi,
            };
            geometric_range_samples(&reg, q)?.samples().to_vec()
        }
        LloydInit::ClosedForm => vec![lo; n],
        LloydInit::Random { seed } => random_init(data, n, *seed),
        LloydInit::Given(v) if v.len() == n => v.clone(),
        LloydInit::Given(v) => {
            return Err(Error::InvalidArgument(format!(
                "expected {n} initial codewords, got {}",
                v.len()
            )))
        }
    };
    let code = init.iter().map(|r| 1.0 / r).collect();
    let mut out = run(&inv, code, opts, |s| 1.0 / s).map_err(|e| match e {
        Error::NotConverged {
            iterations,
            mut partial,
        } => {
            partial.sort_by(f64::total_cmp);
            Error::NotConverged {
                iterations,
                partial,
            }
        }
        e => e,
    })?;
    out.samples = out.samples.iter().rev().map(|s| 1.0 / s).collect();
    Ok(out)
}

pub fn lloyd_range_samples(data: &[f64], q: u32, tolerance: f64) -> Result<RangeSamplingSet> {
    let opts = LloydOptions {
        tolerance,
        ..LloydOptions::default()
    };
    RangeSamplingSet::new(lloyd_range(data, q, &opts)?.samples)
}

/// Angle codewords minimizing the mean of `|θ − θ̂|` over `data`.
pub fn lloyd_angle(data: &[f64], p: u32, opts: &LloydOptions) -> Result<LloydOutcome> {
    let n = check(data, p, opts)?;
    if data.iter().any(|t| !(t.abs() <= 1.0)) {
        return Err(Error::InvalidArgument(
            "angle data must lie in [-1, 1]".into(),
        ));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let init = match &opts.init {
        LloydInit::ClosedForm if hi > lo => {
            let reg = PolarRegion {
                theta_min: lo,
                theta_max: hi,
                r_min: 1.0,
                r_max: 2.0,
            };
            uniform_angle_samples(&reg, p)?.samples().to_vec()
        }
        LloydInit::ClosedForm => vec![lo; n],
        LloydInit::Random { seed } => random_init(data, n, *seed),
        LloydInit::Given(v) if v.len() == n => v.clone(),
        LloydInit::Given(v) => {
            return Err(Error::InvalidArgument(format!(
                "expected {n} initial codewords, got {}",
                v.len()
            )))
        }
    };
    run(&sorted, init, opts, |t| t)
}

pub fn lloyd_angle_samples(data: &[f64], p: u32, tolerance: f64) -> Result<AngleSamplingSet> {
    let opts = LloydOptions {
        tolerance,
        ..LloydOptions::default()
    };
    AngleSamplingSet::new(lloyd_angle(data, p, &opts)?.samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn constant_data_collapses() {
        let data = vec![10.0; 50];
        let out = lloyd_range(&data, 2, &LloydOptions::default()).unwrap();
        assert!(out.samples.iter().all(|r| (r - 10.0).abs() < 1e-12));
        assert!(out.iterations <= 2);
        let a = lloyd_angle(&[0.2; 9], 3, &LloydOptions::default()).unwrap();
        assert!(a.samples.iter().all(|t| (t - 0.2).abs() < 1e-15));
    }

    #[test]
    fn uniform_angles_converge_to_equal_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..200_000).map(|_| rng.random_range(-0.5..0.5)).collect();
        let out = lloyd_angle(&data, 2, &LloydOptions::default()).unwrap();
        let want = [-0.375, -0.125, 0.125, 0.375];
        for (g, w) in out.samples.iter().zip(want) {
            assert!((g - w).abs() < 0.01, "{:?}", out.samples);
        }
        assert!(out.objective.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn random_init_still_descends() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data: Vec<f64> = (0..50_000).map(|_| rng.random_range(4.0..120.0)).collect();
        let opts = LloydOptions {
            init: LloydInit::Random { seed: 1 },
            max_iters: 2000,
            ..Default::default()
        };
        let out = lloyd_range(&data, 2, &opts).unwrap();
        assert!(out.objective.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert_eq!(out.samples.len(), 4);
    }

    #[test]
    fn too_little_data_is_rejected() {
        assert!(lloyd_range(&[5.0, 6.0], 2, &LloydOptions::default()).is_err());
        let bad = LloydOptions {
            tolerance: 0.0,
            ..Default::default()
        };
        assert!(lloyd_range(&[5.0; 8], 2, &bad).is_err());
    }

    #[test]
    fn non_convergence_reports_partial_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<f64> = (0..10_000).map(|_| rng.random_range(4.0..120.0)).collect();
        let opts = LloydOptions {
            init: LloydInit::Given(vec![4.0, 4.1, 4.2, 4.3]),
            max_iters: 1,
            tolerance: 1e-12,
        };
        match lloyd_range(&data, 2, &opts) {
            Err(Error::NotConverged { partial, .. }) => assert_eq!(partial.len(), 4),
            other => panic!("{other:?}"),
        }
    }
}
