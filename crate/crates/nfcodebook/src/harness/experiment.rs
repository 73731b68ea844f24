//! Monte-Carlo experiment runner. Every trial draws its randomness from a
//! seed derived from `(base seed, trial index)`, and results are reduced in
//! trial order, so output does not depend on the thread count.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ChannelKind, ExperimentConfig, Metric, SchemeChoice, SweepAxis};
use crate::array::{ArrayConfig, PolarCoord};
use crate::channel::{
    db_to_linear, los_channel, multipath_channel, multipath_channel_equal, ChannelRealization,
};
use crate::codebook::{PolarCodebook, Scheme};
use crate::distribution::{sample_locations, DistributionSpec, PolarRegion};
use crate::error::{Error, Result};
use crate::feedback::{
    multipath_feedback, phase1_select_with, run_protocol_with, rvq_generate, AnalogStage,
    DigitalStage, RvqCodebook, ZfPolicy,
};
use crate::numerics::mean_stderr;
use crate::seed::{derive, stream};

/// Training-set size for Lloyd-designed codebooks.
pub const TRAINING_SIZE: usize = 100_000;

/// Regularization used when a trial's quantized channel is singular.
const FALLBACK: ZfPolicy = ZfPolicy::Regularize { factor: 1e-3 };

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub scheme: &'static str,
    pub metric: &'static str,
    pub mean: f64,
    pub stderr: f64,
    pub n_trials: usize,
    pub seed: u64,
}

pub fn write_results<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "sweep_value",
        "scheme",
        "metric",
        "mean",
        "stderr",
        "n_trials",
        "seed",
    ])?;
    for r in rows {
        out.write_record([
            r.sweep_value.to_string(),
            r.scheme.to_string(),
            r.metric.to_string(),
            r.mean.to_string(),
            r.stderr.to_string(),
            r.n_trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Noise variance that makes `snr_db` the receive SNR of a unit-power path
/// after normalizing out the array gain `M`.
pub fn noise_variance(cfg: &ArrayConfig) -> f64 {
    cfg.num_antennas() as f64
}

/// Everything fixed at one sweep point except the SNR.
struct Point {
    array: ArrayConfig,

    dist: DistributionSpec,
    codebooks: Vec<(SchemeChoice, Option<PolarCodebook>)>,
    rvq: RvqCodebook,
    /// `(sweep value, snr dB)` pairs evaluated at this point.
    snrs: Vec<(f64, f64)>,
}

fn build_point(
    cfg: &ExperimentConfig,
    antennas: usize,
    region: PolarRegion,
    p: u32,
    q: u32,
    snrs: Vec<(f64, f64)>,
) -> Result<Point> {
    let array = ExperimentConfig {
        antennas,
        ..cfg.clone()
    }
    .array()?;
    let dist = cfg.distribution_for(&region)?;
    let training: Option<Vec<f64>> = if cfg.codebook_schemes().any(|s| s == Scheme::Extended) {
        let seed = derive(cfg.seed, stream::TRAINING, 0);
        Some(
            sample_locations(&dist, TRAINING_SIZE, seed)?
                .iter()
                .map(|u| u.range)
                .collect(),
        )
    } else {
        None
    };
    let mut codebooks = Vec::new();
    for &s in &cfg.schemes {
        let cb = match s {
            SchemeChoice::Codebook(sc) => {
                Some(sc.build(&array, &region, p, q, training.as_deref())?)
            }
            SchemeChoice::FullCsi => None,
        };
        codebooks.push((s, cb));
    }
    let dim = if cfg.metric == Metric::Correlation {
        cfg.paths
    } else {
        cfg.users
    };
    let rvq = rvq_generate(dim, cfg.b2, cfg.rvq, derive(cfg.seed, stream::RVQ, 0))?;
    Ok(Point {
        array,
        dist,
        codebooks,
        rvq,
        snrs,
    })
}

fn points(cfg: &ExperimentConfig) -> Result<Vec<Point>> {
    let base = |v: f64| vec![(v, cfg.snr_db)];
    match cfg.sweep {
        SweepAxis::None => Ok(vec![build_point(
            cfg,
            cfg.antennas,
            cfg.region,
            cfg.p,
            cfg.q,
            base(0.0),
        )?]),
        SweepAxis::Snr => {
            let snrs = cfg.sweep_values.iter().map(|&v| (v, v)).collect();
            Ok(vec![build_point(
                cfg,
                cfg.antennas,
                cfg.region,
                cfg.p,
                cfg.q,
                snrs,
            )?])
        }
        SweepAxis::Q => cfg
            .sweep_values
            .iter()
            .map(|&v| build_point(cfg, cfg.antennas, cfg.region, cfg.p, v as u32, base(v)))
            .collect(),
        SweepAxis::M => cfg
            .sweep_values
            .iter()
            .map(|&v| build_point(cfg, v as usize, cfg.region, cfg.p, cfg.q, base(v)))
            .collect(),
        SweepAxis::RMax => cfg
            .sweep_values
            .iter()
            .map(|&v| {
                let region = PolarRegion {
                    r_max: v,
                    ..cfg.region
                };
                region
                    .validate()
                    .map_err(|e| Error::Config(e.to_string()))?;
                build_point(cfg, cfg.antennas, region, cfg.p, cfg.q, base(v))
            })
            .collect(),
        SweepAxis::Allocation => cfg
            .sweep_values
            .iter()
            .map(|&v| {
                build_point(
                    cfg,
                    cfg.antennas,
                    cfg.region,
                    v as u32,
                    cfg.b1 - v as u32,
                    base(v),
                )
            })
            .collect(),
    }
}

fn draw_users(
    cfg: &ExperimentConfig,
    pt: &Point,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ChannelRealization>> {
    let one = Complex64::new(1.0, 0.0);
    (0..cfg.users)
        .map(|_| {
            let loc = pt.dist.sample(rng);
            Ok(match cfg.channel {
                ChannelKind::Los => los_channel(&pt.array, loc, one),
                ChannelKind::Rician => {
                    let sc: Vec<PolarCoord> = (1..cfg.paths).map(|_| pt.dist.sample(rng)).collect();
                    multipath_channel(&pt.array, loc, &sc, cfg.kappa_db, rng)
                }
                ChannelKind::Equal => {
                    let mut locs = vec![loc];
                    locs.extend((1..cfg.paths).map(|_| pt.dist.sample(rng)));
                    multipath_channel_equal(&pt.array, &locs, rng)?
                }
            })
        })
        .collect()
}

/// Metric values of one trial, indexed `[snr][scheme]`.
fn trial(cfg: &ExperimentConfig, pt: &Point, t: usize) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(cfg.seed, stream::USERS, t as u64));
    let n_s = pt.codebooks.len();
    match cfg.metric {
        Metric::Gain => {
            let u = pt.dist.sample(&mut rng);
            let h = los_channel(&pt.array, u, Complex64::new(1.0, 0.0));
            let mut row = Vec::with_capacity(n_s);
            for (_, cb) in &pt.codebooks {
                row.push(match cb {
                    Some(cb) => phase1_select_with(&h, cb, cfg.search)?.gain,
                    None => 1.0,
                });
            }
            Ok(vec![row; pt.snrs.len()])
        }
        Metric::Correlation => {
            let locs: Vec<PolarCoord> = (0..cfg.paths).map(|_| pt.dist.sample(&mut rng)).collect();
            let h = multipath_channel_equal(&pt.array, &locs, &mut rng)?;
            let mut row = Vec::with_capacity(n_s);
            for (_, cb) in &pt.codebooks {
                row.push(match cb {
                    Some(cb) => multipath_feedback(&pt.array, &h, cb, &pt.rvq)?.correlation,
                    None => 1.0,
                });
            }
            Ok(vec![row; pt.snrs.len()])
        }
        Metric::SumRate => {
            let users = draw_users(cfg, pt, &mut rng)?;
            let noise = noise_variance(&pt.array);
            let mut out = vec![Vec::with_capacity(n_s); pt.snrs.len()];
            for (_, cb) in &pt.codebooks {
                let (analog, digital) = match cb {
                    Some(cb) => (
                        AnalogStage::Codebook {
                            cb,
                            search: cfg.search,
                        },
                        DigitalStage::Rvq(&pt.rvq),
                    ),
                    None => (AnalogStage::FullCsi, DigitalStage::Exact),
                };
                let p0 = db_to_linear(pt.snrs[0].1);
                let fo =
                    run_protocol_with(&pt.array, &users, analog, digital, p0, noise, FALLBACK)?;
                for (slot, &(_, snr)) in out.iter_mut().zip(&pt.snrs) {
                    slot.push(fo.rates_at(&users, db_to_linear(snr), noise)?.iter().sum());
                }
            }
            Ok(out)
        }
    }
}

/// Run every sweep point and scheme. Parallelism comes from the ambient
/// rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for pt in points(cfg)? {
        let per_trial: Vec<Vec<Vec<f64>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial(cfg, &pt, t))
            .collect::<Result<_>>()?;
        for (si, &(sweep_value, _)) in pt.snrs.iter().enumerate() {
            for (ci, (scheme, _)) in pt.codebooks.iter().enumerate() {
                let vals: Vec<f64> = per_trial.iter().map(|t| t[si][ci]).collect();
                let (mean, stderr) = mean_stderr(&vals);
                rows.push(ResultRow {
                    sweep_value,
                    scheme: scheme.name(),
                    metric: cfg.metric.name(),
                    mean,
                    stderr,
                    n_trials: cfg.trials,
                    seed: cfg.seed,
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.scheme.cmp(b.scheme))
    });
    Ok(rows)
}

/// Run on a dedicated pool of `threads` workers (0 = rayon default).
pub fn run_experiment_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<ResultRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}
