//! Uniform linear array geometry and near-field array responses.
//!
//! Antennas sit at `δ_m · d0` along the array axis with `δ_m = m − (M−1)/2`,
//! so the center element is the phase reference. A location is a
//! [`PolarCoord`]: spatial angle `θ = sin φ` and range in meters. Infinite
//! range selects the far-field (planar wavefront) response.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Which propagation model builds the steering vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseModel {
    /// Exact spherical wavefront.
    #[default]
    Exact,
    /// Second-order (Fresnel) expansion of the per-antenna distance.
    Fresnel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    num_antennas: usize,
    wavelength: f64,
    spacing: f64,
    model: ResponseModel,
}

impl ArrayConfig {
    /// Half-wavelength array at the given carrier frequency.
    pub fn from_carrier(num_antennas: usize, carrier_hz: f64) -> Result<Self> {
        if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
            return Err(Error::InvalidArray(format!(
                "carrier frequency {carrier_hz}"
            )));
        }
        let wavelength = SPEED_OF_LIGHT / carrier_hz;
        Self::new(num_antennas, wavelength, wavelength / 2.0)
    }

    pub fn new(num_antennas: usize, wavelength: f64, spacing: f64) -> Result<Self> {
        if num_antennas == 0 || num_antennas % 2 == 0 {
            return Err(Error::InvalidArray(format!(
                "antenna count must be odd and positive, got {num_antennas}"
            )));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidArray(format!("wavelength {wavelength}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidArray(format!("spacing {spacing}")));
        }
        Ok(Self {
            num_antennas,
            wavelength,
            spacing,
            model: ResponseModel::Exact,
        })
    }

    pub fn with_model(mut self, model: ResponseModel) -> Self {
        self.model = model;
        self
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn model(&self) -> ResponseModel {
        self.model
    }
    pub fn carrier_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }
    /// Aperture `(M−1)·d0`.
    pub fn aperture(&self) -> f64 {
        (self.num_antennas - 1) as f64 * self.spacing
    }
    pub fn rayleigh_distance(&self) -> f64 {
        let d = self.aperture();
        2.0 * d * d / self.wavelength
    }

    /// Steering vector under the configured response model.
    pub fn steering(&self, p: PolarCoord) -> SteeringVector {
        match self.model {
            ResponseModel::Exact => exact_unchecked(self, p),
            ResponseModel::Fresnel => fresnel_unchecked(self, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCoord {
    pub theta: f64,
    pub range: f64,
}

impl PolarCoord {
    /// Validated constructor. `range` may be `+∞` (far field).
    pub fn new(theta: f64, range: f64) -> Result<Self> {
        if !(theta.abs() <= 1.0) {
            return Err(Error::InvalidCoord(format!(
                "|theta| must be <= 1, got {theta}"
            )));
        }
        if !(range > 0.0) {
            return Err(Error::InvalidCoord(format!(
                "range must be > 0, got {range}"
            )));
        }
        Ok(Self { theta, range })
    }

    pub fn far_field(theta: f64) -> Self {
        Self {
            theta,
            range: f64::INFINITY,
        }
    }

    /// Physical angle `asin θ` in radians.
    pub fn physical_angle(&self) -> f64 {
        self.theta.asin()
    }
}

/// Unit-norm array response with constant per-entry modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Vec<Complex64>);

impl SteeringVector {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `δ_m = m − (M−1)/2` for `m = 0..M`.
pub fn antenna_offsets(cfg: &ArrayConfig) -> Vec<f64> {
    let half = (cfg.num_antennas - 1) as f64 / 2.0;
    (0..cfg.num_antennas).map(|m| m as f64 - half).collect()
}

fn check_range(p: PolarCoord) -> Result<()> {
    if !(p.range > 0.0) {
        return Err(Error::InvalidCoord(format!(
            "range must be > 0, got {}",
            p.range
        )));
    }
    if !(p.theta.abs() <= 1.0) {
        return Err(Error::InvalidCoord(format!(
            "|theta| must be <= 1, got {}",
            p.theta
        )));
    }
    Ok(())
}

fn from_path_difference(cfg: &ArrayConfig, diff: impl Fn(f64) -> f64) -> SteeringVector {
    let k = cfg.wavenumber();
    let scale = 1.0 / (cfg.num_antennas as f64).sqrt();
    let half = (cfg.num_antennas - 1) as f64 / 2.0;
    let v = (0..cfg.num_antennas)
        .map(|m| {
            let x = (m as f64 - half) * cfg.spacing;
            Complex64::from_polar(scale, -k * diff(x))
        })
        .collect();
    SteeringVector(v)
}

fn exact_unchecked(cfg: &ArrayConfig, p: PolarCoord) -> SteeringVector {
    if p.range.is_infinite() {
        return far_field_unchecked(cfg, p.theta);
    }
    let (r, th) = (p.range, p.theta);
    // r_m − r written as (r_m² − r²)/(r_m + r) to avoid cancellation at long range
    from_path_difference(cfg, |x| {
        let num = x * x - 2.0 * r * th * x;
        let rm = (r * r + num).sqrt();
        num / (rm + r)
    })
}

fn fresnel_unchecked(cfg: &ArrayConfig, p: PolarCoord) -> SteeringVector {
    if p.range.is_infinite() {
        return far_field_unchecked(cfg, p.theta);
    }
    let (r, th) = (p.range, p.theta);
    let curv = (1.0 - th * th) / (2.0 * r);
    from_path_difference(cfg, |x| -x * th + x * x * curv)
}

fn far_field_unchecked(cfg: &ArrayConfig, theta: f64) -> SteeringVector {
    from_path_difference(cfg, |x| -x * theta)
}

/// Exact spherical-wavefront response; `+∞` range gives the far-field response.
pub fn steering_vector_exact(cfg: &ArrayConfig, p: PolarCoord) -> Result<SteeringVector> {
    check_range(p)?;
    Ok(exact_unchecked(cfg, p))
}

/// Fresnel (quadratic-phase) response.
pub fn steering_vector_fresnel(cfg: &ArrayConfig, p: PolarCoord) -> Result<SteeringVector> {
    check_range(p)?;
    Ok(fresnel_unchecked(cfg, p))
}

/// Far-field response `e^{jπδθ}/√M` for half-wavelength spacing.
pub fn steering_vector_far_field(cfg: &ArrayConfig, theta: f64) -> Result<SteeringVector> {
    check_range(PolarCoord::far_field(theta))?;
    Ok(far_field_unchecked(cfg, theta))
}

/// `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `|a^H b|`.
pub fn beamforming_gain(a: &SteeringVector, b: &SteeringVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(inner(&a.0, &b.0).norm())
}
