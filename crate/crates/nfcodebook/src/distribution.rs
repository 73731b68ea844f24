//! User-location distributions over a bounded polar region.
//!
//! Range-only variants keep the angle uniform on `[theta_min, theta_max]`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StatNormal};

use crate::array::PolarCoord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRegion {
    pub theta_min: f64,
    pub theta_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl PolarRegion {
    pub fn new(theta_min: f64, theta_max: f64, r_min: f64, r_max: f64) -> Result<Self> {
        let reg = Self {
            theta_min,
            theta_max,
            r_min,
            r_max,
        };
        reg.validate()?;
        Ok(reg)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_theta =
            self.theta_min >= -1.0 && self.theta_max <= 1.0 && self.theta_min < self.theta_max;
        if !ok_theta {
            return Err(Error::InvalidRegion(format!(
                "angle interval [{}, {}] must be increasing inside [-1, 1]",
                self.theta_min, self.theta_max
            )));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "range interval [{}, {}] must satisfy 0 < r_min < r_max < inf",
                self.r_min, self.r_max
            )));
        }
        Ok(())
    }

    pub fn angle_width(&self) -> f64 {
        self.theta_max - self.theta_min
    }
    pub fn range_width(&self) -> f64 {
        self.r_max - self.r_min
    }
    pub fn contains(&self, p: PolarCoord) -> bool {
        p.theta >= self.theta_min
            && p.theta <= self.theta_max
            && p.range >= self.r_min
            && p.range <= self.r_max
    }
    /// `E[1 − θ²]` for θ uniform on the angle interval.
    pub fn mean_vartheta(&self) -> f64 {
        let (a, b) = (self.theta_min, self.theta_max);
        1.0 - (a * a + a * b + b * b) / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    UniformPolar(PolarRegion),
    /// `hot_mass` of the users uniform on `hot`, the rest uniform on the
    /// remainder of the range interval.
    HotSpotRange {
        region: PolarRegion,
        hot: (f64, f64),
        hot_mass: f64,
    },
    TruncatedGaussianRange {
        region: PolarRegion,
        mean: f64,
        std: f64,
    },
    GaussianMixtureRange {
        region: PolarRegion,
        components: Vec<GaussianComponent>,
    },
    Empirical(Vec<PolarCoord>),
}

impl DistributionSpec {
    /// The footnote hot-spot layout: 90% of users in `[10, 20]`.
    pub fn hot_spot(region: PolarRegion, hot: (f64, f64), hot_mass: f64) -> Result<Self> {
        let s = DistributionSpec::HotSpotRange {
            region,
            hot,
            hot_mass,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn region(&self) -> Option<&PolarRegion> {
        match self {
            DistributionSpec::UniformPolar(r)
            | DistributionSpec::HotSpotRange { region: r, .. }
            | DistributionSpec::TruncatedGaussianRange { region: r, .. }
            | DistributionSpec::GaussianMixtureRange { region: r, .. } => Some(r),
            DistributionSpec::Empirical(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        if let Some(r) = self.region() {
            r.validate()?;
        }
        match self {
            DistributionSpec::UniformPolar(_) => Ok(()),
            DistributionSpec::HotSpotRange {
                region,
                hot,
                hot_mass,
            } => {
                if !(hot.0 >= region.r_min && hot.1 <= region.r_max && hot.0 < hot.1) {
                    return bad(format!("hot interval {hot:?} outside the range interval"));
                }
                if !(0.0..=1.0).contains(hot_mass) {
                    return bad(format!("hot mass {hot_mass} not in [0, 1]"));
                }
                let rest = region.range_width() - (hot.1 - hot.0);
                if *hot_mass < 1.0 && rest <= 0.0 {
                    return bad("no room for the complement mass".into());
                }
                Ok(())
            }
            DistributionSpec::TruncatedGaussianRange { mean, std, .. } => {
                if !(std.is_finite() && *std > 0.0 && mean.is_finite()) {
                    return bad(format!("gaussian mean {mean}, std {std}"));
                }
                Ok(())
            }
            DistributionSpec::GaussianMixtureRange { components, .. } => {
                if components.is_empty() {
                    return bad("mixture has no components".into());
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 || components.iter().any(|c| c.weight < 0.0) {
                    return bad(format!("mixture weights sum to {total}"));
                }
                if components
                    .iter()
                    .any(|c| !(c.std > 0.0 && c.std.is_finite() && c.mean.is_finite()))
                {
                    return bad("mixture component with invalid mean or std".into());
                }
                Ok(())
            }
            DistributionSpec::Empirical(pts) => {
                if pts.is_empty() {
                    return bad("empirical distribution is empty".into());
                }
                if pts
                    .iter()
                    .any(|p| PolarCoord::new(p.theta, p.range).is_err() || p.range.is_infinite())
                {
                    return bad("empirical point outside the valid domain".into());
                }
                Ok(())
            }
        }
    }

    /// Draw one location.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PolarCoord {
        let angle =
            |rng: &mut R, reg: &PolarRegion| rng.random_range(reg.theta_min..=reg.theta_max);
        match self {
            DistributionSpec::UniformPolar(reg) => {
                let theta = angle(rng, reg);
                PolarCoord {
                    theta,
                    range: rng.random_range(reg.r_min..=reg.r_max),
                }
            }
            DistributionSpec::HotSpotRange {
                region,
                hot,
                hot_mass,
            } => {
                let theta = angle(rng, region);
                let range = if rng.random::<f64>() < *hot_mass {
                    rng.random_range(hot.0..=hot.1)
                } else {
                    // uniform over the two outer pieces, proportional to length
                    let lo = hot.0 - region.r_min;
                    let hi = region.r_max - hot.1;
                    let u = rng.random::<f64>() * (lo + hi);
                    if u < lo {
                        region.r_min + u
                    } else {
                        hot.1 + (u - lo)
                    }
                };
                PolarCoord { theta, range }
            }
            DistributionSpec::TruncatedGaussianRange { region, mean, std } => {
                let theta = angle(rng, region);
                let n = Normal::new(*mean, *std).expect("validated std");
                let range = loop {
                    let r = n.sample(rng);
                    if r >= region.r_min && r <= region.r_max {
                        break r;
                    }
                };
                PolarCoord { theta, range }
            }
            DistributionSpec::GaussianMixtureRange { region, components } => {
                let theta = angle(rng, region);
                let range = loop {
                    let u = rng.random::<f64>();
                    let mut acc = 0.0;
                    let mut pick = components.len() - 1;
                    for (i, c) in components.iter().enumerate() {
                        acc += c.weight;
                        if u < acc {
                            pick = i;
                            break;
                        }
                    }
                    let c = components[pick];
                    let r = c.mean + c.std * rng.sample::<f64, _>(rand_distr::StandardNormal);
                    if r >= region.r_min && r <= region.r_max {
                        break r;
                    }
                };
                PolarCoord { theta, range }
            }
            DistributionSpec::Empirical(pts) => pts[rng.random_range(0..pts.len())],
        }
    }
}

/// `count` locations, deterministic in `seed`.
pub fn sample_locations(
    spec: &DistributionSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<PolarCoord>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| spec.sample(&mut rng)).collect())
}

/// Marginal density of the range in 1/m.
pub fn range_pdf(spec: &DistributionSpec, r: f64) -> Result<f64> {
    spec.validate()?;
    let inside = |reg: &PolarRegion| r >= reg.r_min && r <= reg.r_max;
    match spec {
        DistributionSpec::Empirical(_) => Err(Error::Unsupported(
            "empirical distributions have no density".into(),
        )),
        DistributionSpec::UniformPolar(reg) => Ok(if inside(reg) {
            1.0 / reg.range_width()
        } else {
            0.0
        }),
        DistributionSpec::HotSpotRange {
            region,
            hot,
            hot_mass,
        } => {
            if !inside(region) {
                return Ok(0.0);
            }
            let hot_w = hot.1 - hot.0;
            if r >= hot.0 && r <= hot.1 {
                Ok(hot_mass / hot_w)
            } else {
                Ok((1.0 - hot_mass) / (region.range_width() - hot_w))
            }
        }
        DistributionSpec::TruncatedGaussianRange { region, mean, std } => {
            if !inside(region) {
                return Ok(0.0);
            }
            let n = StatNormal::new(*mean, *std).expect("validated std");
            let mass = n.cdf(region.r_max) - n.cdf(region.r_min);
            Ok(n.pdf(r) / mass)
        }
        DistributionSpec::GaussianMixtureRange { region, components } => {
            if !inside(region) {
                return Ok(0.0);
            }
            let (mut dens, mut mass) = (0.0, 0.0);
            for c in components {
                let n = StatNormal::new(c.mean, c.std).expect("validated std");
                dens += c.weight * n.pdf(r);
                mass += c.weight * (n.cdf(region.r_max) - n.cdf(region.r_min));
            }
            Ok(dens / mass)
        }
    }
}

/// Load an empirical distribution from a CSV with header `theta,r_m`.
pub fn load_empirical_csv(path: &Path) -> Result<DistributionSpec> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    if cols != ["theta", "r_m"] {
        return Err(Error::InvalidDistribution(format!(
            "expected header `theta,r_m`, found `{}`",
            cols.join(",")
        )));
    }
    let mut pts = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    Error::InvalidDistribution(format!(
                        "row {}: bad number in column {i}",
                        line + 2
                    ))
                })
        };
        pts.push(PolarCoord::new(parse(0)?, parse(1)?)?);
    }
    let spec = DistributionSpec::Empirical(pts);
    spec.validate()?;
    Ok(spec)
}
