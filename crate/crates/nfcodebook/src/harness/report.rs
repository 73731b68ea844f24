//! Codebook emission and the formula-versus-oracle theory table.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{CodebookFormat, ExperimentConfig, SchemeChoice};
use super::experiment::{run_experiment, ResultRow};
use crate::allocation::estimate_gain;
use crate::channel::db_to_linear;
use crate::codebook::{geometric_range_samples, uniform_angle_samples, PolarCodebook, Scheme};
use crate::distribution::sample_locations;
use crate::error::{Error, Result};
use crate::feedback::Phase1Search;
use crate::numerics::{integrate_pieces, mean_stderr};
use crate::seed::{derive, stream};
use crate::theory;

/// The codebook selected by the config: its first codebook scheme.
pub fn configured_codebook(cfg: &ExperimentConfig) -> Result<(Scheme, PolarCodebook)> {
    let scheme = cfg
        .codebook_schemes()
        .next()
        .ok_or_else(|| Error::Config("no codebook scheme listed in `schemes`".into()))?;
    let array = cfg.array()?;
    let training: Option<Vec<f64>> = if scheme == Scheme::Extended {
        let dist = cfg.distribution_for(&cfg.region)?;
        let seed = derive(cfg.seed, stream::TRAINING, 0);
        Some(
            sample_locations(&dist, super::experiment::TRAINING_SIZE, seed)?
                .iter()
                .map(|u| u.range)
                .collect(),
        )
    } else {
        None
    };
    Ok((
        scheme,
        scheme.build(&array, &cfg.region, cfg.p, cfg.q, training.as_deref())?,
    ))
}

/// Write the configured codebook; returns the files written.
pub fn emit_codebook(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let (_, cb) = configured_codebook(cfg)?;
    let mut written = Vec::new();
    let bin_path = if cfg.codebook_format == CodebookFormat::Both {
        out.with_extension("bin")
    } else {
        out.to_path_buf()
    };
    if matches!(
        cfg.codebook_format,
        CodebookFormat::Csv | CodebookFormat::Both
    ) {
        cb.save_csv(out)?;
        written.push(out.to_path_buf());
    }
    if matches!(
        cfg.codebook_format,
        CodebookFormat::Binary | CodebookFormat::Both
    ) {
        cb.save_binary(&bin_path)?;
        written.push(bin_path);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub quantity: String,
    pub formula: f64,
    pub oracle: f64,
}

impl TheoryRow {
    fn new(q: &str, formula: f64, oracle: f64) -> Self {
        Self {
            quantity: q.to_string(),
            formula,
            oracle,
        }
    }
    pub fn rel_diff(&self) -> f64 {
        (self.formula - self.oracle).abs() / self.oracle.abs()
    }
}

pub fn write_theory<W: Write>(rows: &[TheoryRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["quantity", "formula", "oracle", "rel_diff"])?;
    for r in rows {
        out.write_record([
            r.quantity.clone(),
            r.formula.to_string(),
            r.oracle.to_string(),
            r.rel_diff().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Mean of `min_i |1/r − 1/r̂_i|` for `r` uniform on the range interval, by
/// quadrature split at the samples and their inverse-range midpoints.
pub fn nearest_range_error_quadrature(r_min: f64, r_max: f64, samples: &[f64]) -> f64 {
    let mut breaks = vec![r_min, r_max];
    breaks.extend(samples.iter().copied().filter(|r| *r > r_min && *r < r_max));
    for w in samples.windows(2) {
        let mid = 2.0 / (1.0 / w[0] + 1.0 / w[1]);
        if mid > r_min && mid < r_max {
            breaks.push(mid);
        }
    }
    breaks.sort_by(f64::total_cmp);
    let f = |r: f64| {
        samples
            .iter()
            .map(|c| (1.0 / r - 1.0 / c).abs())
            .fold(f64::INFINITY, f64::min)
    };
    integrate_pieces(f, &breaks, 1e-15) / (r_max - r_min)
}

pub fn theory_report(cfg: &ExperimentConfig) -> Result<Vec<TheoryRow>> {
    let array = cfg.array()?;
    let reg = cfg.region;
    let mut rows = Vec::new();

    let (th, tr) = theory::gain_thresholds(&array);
    rows.push(TheoryRow::new("threshold_angle", th, 0.0058));
    rows.push(TheoryRow::new("threshold_range", tr, 0.027));

    let (a, b) = (reg.r_min, reg.r_max);
    let c = 0.5 * (a + b);
    let quad = integrate_pieces(|r| (1.0 / r - 1.0 / c).abs(), &[a, c, b], 1e-15) / (b - a);
    rows.push(TheoryRow::new(
        "cell_range_error",
        theory::cell_range_error(a, b)?,
        quad,
    ));

    let geo = geometric_range_samples(&reg, cfg.q)?;
    rows.push(TheoryRow::new(
        "expected_range_error",
        theory::expected_range_error(&reg, cfg.q),
        nearest_range_error_quadrature(a, b, geo.samples()),
    ));

    let p_small = cfg.p.min(4);
    let ang = uniform_angle_samples(&reg, p_small)?;
    let s = ang.samples();
    if s.len() >= 3 {
        let i = s.len() / 2;
        let (lo, hi) = (0.5 * (s[i - 2] + s[i - 1]), 0.5 * (s[i - 1] + s[i]));
        let x = s[i - 1];
        let quad = integrate_pieces(|t| (t - x).abs(), &[lo, x, hi], 1e-15) / (hi - lo);
        rows.push(TheoryRow::new(
            "voronoi_interior_cell",
            theory::voronoi_cell_angle_error(s, &reg, i)?,
            quad,
        ));
    }

    let angles = uniform_angle_samples(&reg, cfg.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive(cfg.seed, stream::USERS, u64::MAX));
    let errs: Vec<f64> = (0..100_000)
        .map(|_| {
            let t = rng.random_range(reg.theta_min..reg.theta_max);
            (t - angles.samples()[angles.nearest(t)]).abs()
        })
        .collect();
    rows.push(TheoryRow::new(
        "expected_angle_error",
        theory::expected_angle_error(&reg, cfg.p),
        mean_stderr(&errs).0,
    ));

    let dist = cfg.distribution_for(&reg)?;
    let users = sample_locations(&dist, cfg.trials, derive(cfg.seed, stream::USERS, 0))?;
    let cb = Scheme::Geometric.build(&array, &reg, cfg.p, cfg.q, None)?;
    let (gamma, _) = estimate_gain(&cb, &users, Phase1Search::Local)?;
    let approx = theory::expected_gain_approx(
        &array,
        theory::expected_angle_error(&reg, cfg.p),
        reg.mean_vartheta() * theory::expected_range_error(&reg, cfg.q),
    );
    rows.push(TheoryRow::new("expected_gain", approx, gamma));

    let cal = theory::CalibrationPoint::solve(&array, &reg, cfg.gamma0, cfg.m0)?;
    let m = cfg.antennas;
    let p1 = theory::required_angle_bits(m, cfg.gamma0, &reg, &cal)?;
    let p2 = theory::required_angle_bits(2 * m, cfg.gamma0, &reg, &cal)?;
    rows.push(TheoryRow::new("angle_bits", p1, f64::NAN));
    rows.push(TheoryRow::new(
        "angle_bits_doubling_increment",
        p2 - p1,
        1.0,
    ));
    let q1 = theory::required_range_bits(m, cfg.gamma0, &reg, &cal)?;
    let q2 = theory::required_range_bits(2 * m, cfg.gamma0, &reg, &cal)?;
    rows.push(TheoryRow::new("range_bits", q1, f64::NAN));
    rows.push(TheoryRow::new(
        "range_bits_doubling_increment",
        q2 - q1,
        2.0,
    ));

    // rate gap: bound at the measured gain vs a short end-to-end run
    let mut sim = cfg.clone();
    sim.metric = super::config::Metric::SumRate;
    sim.sweep = super::config::SweepAxis::None;
    sim.sweep_values.clear();
    sim.schemes = vec![
        SchemeChoice::Codebook(Scheme::Geometric),
        SchemeChoice::FullCsi,
    ];
    let res: Vec<ResultRow> = run_experiment(&sim)?;
    let full = res
        .iter()
        .find(|r| r.scheme == "full_csi")
        .map(|r| r.mean)
        .unwrap_or(f64::NAN);
    let lim = res
        .iter()
        .find(|r| r.scheme == "geometric")
        .map(|r| r.mean)
        .unwrap_or(f64::NAN);
    let measured = (full - lim) / cfg.users as f64;
    if cfg.users >= 2 {
        let bound = theory::rate_gap_bound(gamma, db_to_linear(cfg.snr_db), cfg.users, cfg.b2)?;
        rows.push(TheoryRow::new("rate_gap_per_user", bound, measured));
    }
    Ok(rows)
}
