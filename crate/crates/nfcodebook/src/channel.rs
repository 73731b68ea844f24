//! Near-field channels built from path locations and complex gains.
//!
//! `h = √M · Σ_ℓ β_ℓ · a(θ_ℓ, r_ℓ)`. The LoS-dominant model fixes the LoS
//! gain at `√(κ/(1+κ))` and draws each scattered gain as `CN(0, (1/(1+κ))/(L−1))`,
//! so `E[Σ|β|²] = 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::array::{inner, ArrayConfig, PolarCoord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParam {
    pub coord: PolarCoord,
    pub gain: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub vector: Vec<Complex64>,
    pub paths: Vec<PathParam>,
}

impl ChannelRealization {
    pub fn from_paths(cfg: &ArrayConfig, paths: Vec<PathParam>) -> Self {
        let scale = (cfg.num_antennas() as f64).sqrt();
        let mut vector = vec![Complex64::new(0.0, 0.0); cfg.num_antennas()];
        for p in &paths {
            let a = cfg.steering(p.coord);
            for (h, e) in vector.iter_mut().zip(a.as_slice()) {
                *h += scale * p.gain * e;
            }
        }
        Self { vector, paths }
    }

    pub fn norm(&self) -> f64 {
        crate::array::norm(&self.vector)
    }

    /// The strongest path's location (the LoS path for LoS-dominant channels).
    pub fn dominant_coord(&self) -> Option<PolarCoord> {
        self.paths
            .iter()
            .max_by(|a, b| a.gain.norm_sqr().total_cmp(&b.gain.norm_sqr()))
            .map(|p| p.coord)
    }
}

/// Circularly-symmetric complex Gaussian with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn los_channel(cfg: &ArrayConfig, coord: PolarCoord, beta: Complex64) -> ChannelRealization {
    ChannelRealization::from_paths(cfg, vec![PathParam { coord, gain: beta }])
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// LoS path plus one path per scatterer, Rician-style gains.
/// `kappa_db = +∞` removes the scattered power.
pub fn multipath_channel<R: Rng + ?Sized>(
    cfg: &ArrayConfig,
    user: PolarCoord,
    scatterers: &[PolarCoord],
    kappa_db: f64,
    rng: &mut R,
) -> ChannelRealization {
    let (los, nlos_var) = if kappa_db == f64::INFINITY {
        (1.0, 0.0)
    } else {
        let k = db_to_linear(kappa_db);
        let var = if scatterers.is_empty() {
            0.0
        } else {
            1.0 / (1.0 + k) / scatterers.len() as f64
        };
        ((k / (1.0 + k)).sqrt(), var)
    };
    let mut paths = vec![PathParam {
        coord: user,
        gain: Complex64::new(los, 0.0),
    }];
    for &s in scatterers {
        paths.push(PathParam {
            coord: s,
            gain: complex_gaussian(rng, nlos_var),
        });
    }
    ChannelRealization::from_paths(cfg, paths)
}

/// Every path gain i.i.d. `CN(0, 1/L)`.
pub fn multipath_channel_equal<R: Rng + ?Sized>(
    cfg: &ArrayConfig,
    paths: &[PolarCoord],
    rng: &mut R,
) -> Result<ChannelRealization> {
    if paths.is_empty() {
        return Err(Error::InvalidArgument(
            "multipath channel needs at least one path".into(),
        ));
    }
    let var = 1.0 / paths.len() as f64;
    let params = paths
        .iter()
        .map(|&coord| PathParam {
            coord,
            gain: complex_gaussian(rng, var),
        })
        .collect();
    Ok(ChannelRealization::from_paths(cfg, params))
}

/// `K×K` matrix whose row `k` is `h_k^H F_RF`.
pub fn effective_channel(
    h: &[ChannelRealization],
    f_rf: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    if f_rf.ncols() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: f_rf.ncols(),
        });
    }
    let k = h.len();
    let mut g = DMatrix::zeros(k, k);
    for (row, ch) in h.iter().enumerate() {
        if ch.vector.len() != f_rf.nrows() {
            return Err(Error::DimensionMismatch {
                expected: f_rf.nrows(),
                got: ch.vector.len(),
            });
        }
        for col in 0..k {
            g[(row, col)] = inner(&ch.vector, f_rf.column(col).as_slice());
        }
    }
    Ok(g)
}
