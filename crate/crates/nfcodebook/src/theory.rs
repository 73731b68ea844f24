//! Closed-form theory for polar codebooks: the half-array gain surrogate,
//! its thresholds, angle/range quantization errors, the bit-scaling laws
//! and the feedback rate-gap bound.
//!
//! Errors follow one convention throughout: `eps_theta = |θ − θ̂|`,
//! `eps_r = |1/r − 1/r̂|` in 1/m, and `u = (1 − θ²)·eps_r`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::ArrayConfig;
use crate::distribution::PolarRegion;
use crate::error::{Error, Result};
use crate::numerics::{bisect, mean_stderr};

/// Gain surrogate
/// `f = (2/M)|Σ_{m=0}^{(M−1)/2} exp(j k d0 m eps_theta) exp(j k m² d0² u / 2)|`.
/// `f(0, 0) = (M+1)/M`.
pub fn f_gain(cfg: &ArrayConfig, eps_theta: f64, u: f64) -> f64 {
    f_gain_m(
        cfg.num_antennas(),
        cfg.wavenumber(),
        cfg.spacing(),
        eps_theta,
        u,
    )
}

fn f_gain_m(m_ant: usize, k: f64, d0: f64, eps_theta: f64, u: f64) -> f64 {
    let lin = k * d0 * eps_theta;
    let quad = 0.5 * k * d0 * d0 * u;
    let n = (m_ant - 1) / 2;
    let s: Complex64 = (0..=n)
        .map(|m| {
            let m = m as f64;
            Complex64::from_polar(1.0, lin * m + quad * m * m)
        })
        .sum();
    2.0 / m_ant as f64 * s.norm()
}

/// The surrogate evaluated for a reference array of `m0` antennas that shares
/// the wavelength and spacing of `cfg`.
pub fn f_gain_ref(cfg: &ArrayConfig, m0: usize, eps_theta: f64, u: f64) -> f64 {
    f_gain_m(m0, cfg.wavenumber(), cfg.spacing(), eps_theta, u)
}

/// Natural scales of the two axes (first null of the angle pattern, and the
/// curvature error giving a quarter-turn of phase at the array edge).
fn axis_scales(cfg: &ArrayConfig, m0: usize) -> (f64, f64) {
    let half = (m0 as f64 + 1.0) / 2.0;
    let k = cfg.wavenumber();
    let d0 = cfg.spacing();
    let theta_scale = 2.0 * std::f64::consts::PI / (k * d0 * half);
    let u_scale = 2.0 * std::f64::consts::PI / (0.5 * k * d0 * d0 * half * half);
    (theta_scale, u_scale)
}

fn first_stationary(g: impl Fn(f64) -> f64, scale: f64) -> Option<f64> {
    let h = scale * 1e-6;
    let deriv = |x: f64| (g(x + h) - g(x - h)) / (2.0 * h);
    let step = scale / 400.0;
    let mut a = step;
    let mut da = deriv(a);
    for i in 2..40_000 {
        let b = step * i as f64;
        let db = deriv(b);
        if da < 0.0 && db >= 0.0 {
            return bisect(deriv, a, b, scale * 1e-12);
        }
        a = b;
        da = db;
    }
    None
}

/// First stationary point of the surrogate along each axis, `(eps_theta, eps_r)`
/// with `1 − θ² = 1`.
pub fn gain_thresholds(cfg: &ArrayConfig) -> (f64, f64) {
    let (ts, us) = axis_scales(cfg, cfg.num_antennas());
    let th = first_stationary(|e| f_gain(cfg, e, 0.0), ts).unwrap_or(f64::NAN);
    let r = first_stationary(|u| f_gain(cfg, 0.0, u), us).unwrap_or(f64::NAN);
    (th, r)
}

/// Gain at the mean errors.
pub fn expected_gain_approx(cfg: &ArrayConfig, mean_eps_theta: f64, mean_u: f64) -> f64 {
    f_gain(cfg, mean_eps_theta, mean_u)
}

/// Conditional mean angle error of cell `i` (1-based) from the padded
/// neighbour formula. Exact for interior cells only.
pub fn voronoi_cell_angle_error(samples: &[f64], region: &PolarRegion, i: usize) -> Result<f64> {
    if i == 0 || i > samples.len() {
        return Err(Error::InvalidArgument(format!(
            "cell index {i} outside 1..={}",
            samples.len()
        )));
    }
    let at = |k: usize| -> f64 {
        if k == 0 {
            region.theta_min
        } else if k == samples.len() + 1 {
            region.theta_max
        } else {
            samples[k - 1]
        }
    };
    let (lo, mid, hi) = (at(i - 1), at(i), at(i + 1));
    Ok(((mid - lo).powi(2) + (hi - mid).powi(2)) / (4.0 * (hi - lo)))
}

/// Mean angle error of `2^p` equal cells.
pub fn expected_angle_error(region: &PolarRegion, p: u32) -> f64 {
    region.angle_width() / (4.0 * 2f64.powi(p as i32))
}

/// `E|1/r − 1/r̂|` for `r ~ U(a, b)` and the midpoint sample.
pub fn cell_range_error(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidArgument(format!(
            "cell [{a}, {b}] must satisfy 0 < a < b"
        )));
    }
    let xi = (b / a).sqrt();
    Ok(2.0 / (b - a) * ((xi + 1.0 / xi) / 2.0).ln())
}

/// Mean inverse-range error of the geometric partition with `2^q` cells under
/// a uniform range density.
pub fn expected_range_error(region: &PolarRegion, q: u32) -> f64 {
    let n = 2f64.powi(q as i32);
    let x = 0.5 * (region.r_max / region.r_min).ln() / n;
    2.0 * n / region.range_width() * x.cosh().ln()
}

/// `∫_a^b |1/r − 1/c| dr` for any `c > 0`.
pub fn abs_inverse_integral(a: f64, b: f64, c: f64) -> f64 {
    let piece = |lo: f64, hi: f64| (hi / lo).ln() - (hi - lo) / c;
    if c <= a {
        -piece(a, b)
    } else if c >= b {
        piece(a, b)
    } else {
        piece(a, c) - piece(c, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateCheck {
    /// Monte-Carlo mean of `min_i |1/r − 1/r̂_i|`.
    pub lhs: f64,
    pub lhs_stderr: f64,
    /// Partition sum `Σ_i Pr(cell i)·E[|1/r − 1/r̂_i| | cell i]`.
    pub rhs: f64,
}

/// Compare the nearest-sample error with the per-cell surrogate for a
/// partition of the range interval (`boundaries` has one more entry than
/// `samples`; sample `i` belongs to cell `[boundaries[i], boundaries[i+1]]`).
pub fn surrogate_bound_check(
    region: &PolarRegion,
    boundaries: &[f64],
    samples: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<SurrogateCheck> {
    if boundaries.len() != samples.len() + 1 || samples.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: samples.len() + 1,
            got: boundaries.len(),
        });
    }
    if n_mc == 0 {
        return Err(Error::InvalidArgument("n_mc must be >= 1".into()));
    }
    let d = region.range_width();
    let rhs = samples
        .iter()
        .enumerate()
        .map(|(i, &c)| abs_inverse_integral(boundaries[i], boundaries[i + 1], c) / d)
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let errs: Vec<f64> = (0..n_mc)
        .map(|_| {
            let r = rng.random_range(region.r_min..region.r_max);
            samples
                .iter()
                .map(|c| (1.0 / r - 1.0 / c).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (lhs, lhs_stderr) = mean_stderr(&errs);
    Ok(SurrogateCheck {
        lhs,
        lhs_stderr,
        rhs,
    })
}

/// Errors at which the reference-array surrogate reaches a target gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub gamma0: f64,
    pub m0: usize,
    /// Solves `f̌(eps, 0, m0) = gamma0`.
    pub eps_theta_cal: f64,
    /// Solves `f̌(0, ϑ̌·eps, m0) = gamma0` with `ϑ̌ = E[1 − θ²]`.
    pub eps_r_cal: f64,
}

impl CalibrationPoint {
    /// Bisection on each axis of the reference surrogate, inside its main lobe.
    pub fn solve(cfg: &ArrayConfig, region: &PolarRegion, gamma0: f64, m0: usize) -> Result<Self> {
        if !(gamma0 > 0.0 && gamma0 < 1.0) {
            return Err(Error::Calibration(format!(
                "target gain {gamma0} must lie in (0, 1)"
            )));
        }
        if m0 == 0 || m0 % 2 == 0 {
            return Err(Error::Calibration(format!(
                "reference antenna count {m0} must be odd"
            )));
        }
        let peak = f_gain_ref(cfg, m0, 0.0, 0.0);
        if gamma0 >= peak {
            return Err(Error::Calibration(format!(
                "target gain {gamma0} not below the peak {peak}"
            )));
        }
        let (ts, us) = axis_scales(cfg, m0);
        let th_edge = first_stationary(|e| f_gain_ref(cfg, m0, e, 0.0), ts).unwrap_or(ts);
        let u_edge = first_stationary(|u| f_gain_ref(cfg, m0, 0.0, u), us).unwrap_or(us);
        let eps_theta_cal = bisect(
            |e| f_gain_ref(cfg, m0, e, 0.0) - gamma0,
            0.0,
            th_edge,
            ts * 1e-14,
        )
        .ok_or_else(|| {
            Error::Calibration(format!("gain {gamma0} not reached on the angle axis"))
        })?;
        let u = bisect(
            |u| f_gain_ref(cfg, m0, 0.0, u) - gamma0,
            0.0,
            u_edge,
            us * 1e-14,
        )
        .ok_or_else(|| {
            Error::Calibration(format!("gain {gamma0} not reached on the range axis"))
        })?;
        Ok(Self {
            gamma0,
            m0,
            eps_theta_cal,
            eps_r_cal: u / region.mean_vartheta(),
        })
    }
}

fn check_cal(gamma0: f64, cal: &CalibrationPoint) -> Result<()> {
    if (gamma0 - cal.gamma0).abs() > 1e-12 {
        return Err(Error::Calibration(format!(
            "calibration solved for {} but {gamma0} requested",
            cal.gamma0
        )));
    }
    Ok(())
}

/// Angle bits needed for mean gain `gamma0`:
/// `log2 M − log2 D(Q) − log2(M0·ε̃_θ) − 2`.
pub fn required_angle_bits(
    m: usize,
    gamma0: f64,
    region: &PolarRegion,
    cal: &CalibrationPoint,
) -> Result<f64> {
    check_cal(gamma0, cal)?;
    Ok((m as f64).log2()
        - region.angle_width().log2()
        - (cal.m0 as f64 * cal.eps_theta_cal).log2()
        - 2.0)
}

/// Range bits needed for mean gain `gamma0`:
/// `2 log2 M + log2(ln²ξ / D(R)) − log2(M0²·ε̃_r) − (1 + log2 ln 2)`, `ξ = √(r_max/r_min)`.
pub fn required_range_bits(
    m: usize,
    gamma0: f64,
    region: &PolarRegion,
    cal: &CalibrationPoint,
) -> Result<f64> {
    check_cal(gamma0, cal)?;
    let xi = (region.r_max / region.r_min).sqrt();
    let m0 = cal.m0 as f64;
    Ok(
        2.0 * (m as f64).log2() + (xi.ln().powi(2) / region.range_width()).log2()
            - (m0 * m0 * cal.eps_r_cal).log2()
            - (1.0 + std::f64::consts::LN_2.log2()),
    )
}

/// Upper bound on the per-user rate loss against full CSI:
/// `−2 log2 Γ + log2(1 + snr/K · 2^{−B2/(K−1)})`, `snr = P/σ²` (linear).
pub fn rate_gap_bound(gamma: f64, snr: f64, k: usize, b2: u32) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gain {gamma} must be > 0")));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("rate-gap bound needs K >= 2".into()));
    }
    let quant = 2f64.powf(-(b2 as f64) / (k as f64 - 1.0));
    Ok(-2.0 * gamma.log2() + (1.0 + snr / k as f64 * quant).log2())
}
