//! Flat `key = value` experiment configuration. Blank lines and `#`
//! comments are ignored; unknown keys are rejected.

use std::path::{Path, PathBuf};

use crate::array::ArrayConfig;
use crate::codebook::Scheme;
use crate::distribution::{load_empirical_csv, DistributionSpec, GaussianComponent, PolarRegion};
use crate::error::{Error, Result};
use crate::feedback::{Phase1Search, RvqMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeChoice {
    Codebook(Scheme),
    FullCsi,
}

impl SchemeChoice {
    pub fn name(self) -> &'static str {
        match self {
            SchemeChoice::Codebook(s) => s.name(),
            SchemeChoice::FullCsi => "full_csi",
        }
    }
    fn parse(s: &str) -> Option<Self> {
        if s == "full_csi" {
            Some(SchemeChoice::FullCsi)
        } else {
            Scheme::parse(s).map(SchemeChoice::Codebook)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Sum rate of the K-user protocol, bps/Hz.
    SumRate,
    /// Best Phase-1 normalized gain for one LoS user.
    Gain,
    /// Correlation of the per-path multipath reconstruction.
    Correlation,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::SumRate => "sum_rate",
            Metric::Gain => "gain",
            Metric::Correlation => "correlation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    None,
    Snr,
    Q,
    M,
    RMax,
    /// Angle bits `p` with `q = b1 − p`.
    Allocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Los,
    Rician,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    Uniform,
    HotSpot,
    Gaussian,
    Mixture,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub antennas: usize,
    pub carrier_hz: f64,
    pub region: PolarRegion,
    pub dist_kind: DistKind,
    pub hot: (f64, f64),
    pub hot_mass: f64,
    pub gauss: Option<(f64, f64)>,
    pub mixture: Vec<GaussianComponent>,
    pub empirical_csv: Option<PathBuf>,
    pub schemes: Vec<SchemeChoice>,
    pub p: u32,
    pub q: u32,
    pub users: usize,
    pub paths: usize,
    pub channel: ChannelKind,
    pub kappa_db: f64,
    pub snr_db: f64,
    pub b2: u32,
    pub rvq: RvqMode,
    pub trials: usize,
    pub seed: u64,
    pub metric: Metric,
    pub sweep: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub b1: u32,
    pub n_mc: usize,
    pub search: Phase1Search,
    pub output: Option<PathBuf>,
    pub codebook_format: CodebookFormat,
    pub gamma0: f64,
    pub m0: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookFormat {
    Csv,
    Binary,
    Both,
}

impl Default for ExperimentConfig {
    /// 387 antennas at 30 GHz, four users uniform on `[-0.5, 0.5] × [4, 120]`,
    /// `p = 12`, `q = 3`, `B2 = 12`, 22 dB, 1000 trials.
    fn default() -> Self {
        Self {
            antennas: 387,
            carrier_hz: 30e9,
            region: PolarRegion {
                theta_min: -0.5,
                theta_max: 0.5,
                r_min: 4.0,
                r_max: 120.0,
            },
            dist_kind: DistKind::Uniform,
            hot: (10.0, 20.0),
            hot_mass: 0.9,
            gauss: None,
            mixture: Vec::new(),
            empirical_csv: None,
            schemes: vec![
                SchemeChoice::Codebook(Scheme::Geometric),
                SchemeChoice::Codebook(Scheme::Hyperbolic),
                SchemeChoice::Codebook(Scheme::Uniform),
                SchemeChoice::Codebook(Scheme::Dft),
                SchemeChoice::Codebook(Scheme::Hybrid),
                SchemeChoice::FullCsi,
            ],
            p: 12,
            q: 3,
            users: 4,
            paths: 3,
            channel: ChannelKind::Rician,
            kappa_db: 9.54,
            snr_db: 22.0,
            b2: 12,
            rvq: RvqMode::Isotropic,
            trials: 1000,
            seed: 1,
            metric: Metric::SumRate,
            sweep: SweepAxis::None,
            sweep_values: Vec::new(),
            b1: 16,
            n_mc: crate::allocation::DEFAULT_N_MC,
            search: Phase1Search::Local,
            output: None,
            codebook_format: CodebookFormat::Csv,
            gamma0: 0.95,
            m0: 129,
        }
    }
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(p), Some(dir)) = (cfg.empirical_csv.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, val)) = line.split_once('=') else {
                return cfg_err(format!("line {}: expected `key = value`", n + 1));
            };
            let (key, v) = (key.trim(), val.trim());
            if !seen.insert(key.to_string()) {
                return cfg_err(format!("line {}: duplicate key `{key}`", n + 1));
            }
            match key {
                "antennas" => c.antennas = num(key, v)?,
                "carrier_hz" => c.carrier_hz = num(key, v)?,
                "theta_min" => c.region.theta_min = num(key, v)?,
                "theta_max" => c.region.theta_max = num(key, v)?,
                "r_min" => c.region.r_min = num(key, v)?,
                "r_max" => c.region.r_max = num(key, v)?,
                "distribution" => {
                    c.dist_kind = match v {
                        "uniform" => DistKind::Uniform,
                        "hotspot" => DistKind::HotSpot,
                        "gaussian" => DistKind::Gaussian,
                        "mixture" => DistKind::Mixture,
                        "empirical" => DistKind::Empirical,
                        _ => return cfg_err(format!("distribution: unknown `{v}`")),
                    }
                }
                "hot_lo" => c.hot.0 = num(key, v)?,
                "hot_hi" => c.hot.1 = num(key, v)?,
                "hot_mass" => c.hot_mass = num(key, v)?,
                "gauss_mean" => c.gauss = Some((num(key, v)?, c.gauss.map_or(f64::NAN, |g| g.1))),
                "gauss_std" => c.gauss = Some((c.gauss.map_or(f64::NAN, |g| g.0), num(key, v)?)),
                "mixture" => {
                    c.mixture = list(v)
                        .map(|item| {
                            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
                            if parts.len() != 3 {
                                return cfg_err(format!(
                                    "mixture: `{item}` is not weight:mean:std"
                                ));
                            }
                            Ok(GaussianComponent {
                                weight: num(key, parts[0])?,
                                mean: num(key, parts[1])?,
                                std: num(key, parts[2])?,
                            })
                        })
                        .collect::<Result<_>>()?
                }
                "empirical_csv" => c.empirical_csv = Some(PathBuf::from(v)),
                "schemes" => {
                    c.schemes = list(v)
                        .map(|s| {
                            SchemeChoice::parse(s)
                                .ok_or_else(|| Error::Config(format!("schemes: unknown `{s}`")))
                        })
                        .collect::<Result<_>>()?
                }
                "p" => c.p = num(key, v)?,
                "q" => c.q = num(key, v)?,
                "users" => c.users = num(key, v)?,
                "paths" => c.paths = num(key, v)?,
                "channel" => {
                    c.channel = match v {
                        "los" => ChannelKind::Los,
                        "rician" => ChannelKind::Rician,
                        "equal" => ChannelKind::Equal,
                        _ => return cfg_err(format!("channel: unknown `{v}`")),
                    }
                }
                "kappa_db" => c.kappa_db = num(key, v)?,
                "snr_db" => c.snr_db = num(key, v)?,
                "b2" => c.b2 = num(key, v)?,
                "rvq" => {
                    c.rvq = match v {
                        "isotropic" => RvqMode::Isotropic,
                        "matched" => RvqMode::Matched { leakage: f64::NAN },
                        _ => return cfg_err(format!("rvq: unknown `{v}`")),
                    }
                }
                "trials" => c.trials = num(key, v)?,
                "seed" => c.seed = num(key, v)?,
                "metric" => {
                    c.metric = match v {
                        "sum_rate" => Metric::SumRate,
                        "gain" => Metric::Gain,
                        "correlation" => Metric::Correlation,
                        _ => return cfg_err(format!("metric: unknown `{v}`")),
                    }
                }
                "sweep" => {
                    c.sweep = match v {
                        "none" => SweepAxis::None,
                        "snr" => SweepAxis::Snr,
                        "q" => SweepAxis::Q,
                        "m" => SweepAxis::M,
                        "r_max" => SweepAxis::RMax,
                        "allocation" => SweepAxis::Allocation,
                        _ => return cfg_err(format!("sweep: unknown `{v}`")),
                    }
                }
                "sweep_values" => {
                    c.sweep_values = list(v).map(|s| num(key, s)).collect::<Result<_>>()?
                }
                "b1" => c.b1 = num(key, v)?,
                "n_mc" => c.n_mc = num(key, v)?,
                "search" => {
                    c.search = match v {
                        "local" => Phase1Search::Local,
                        "exhaustive" => Phase1Search::Exhaustive,
                        _ => return cfg_err(format!("search: unknown `{v}`")),
                    }
                }
                "output" => c.output = Some(PathBuf::from(v)),
                "codebook_format" => {
                    c.codebook_format = match v {
                        "csv" => CodebookFormat::Csv,
                        "binary" => CodebookFormat::Binary,
                        "both" => CodebookFormat::Both,
                        _ => return cfg_err(format!("codebook_format: unknown `{v}`")),
                    }
                }
                "gamma0" => c.gamma0 = num(key, v)?,
                "m0" => c.m0 = num(key, v)?,
                _ => return cfg_err(format!("line {}: unknown key `{key}`", n + 1)),
            }
        }
        if let RvqMode::Matched { .. } = c.rvq {
            c.rvq = RvqMode::Matched {
                leakage: 1.0 / c.antennas as f64,
            };
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.array()?;
        self.region
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.trials == 0 {
            return cfg_err("trials must be >= 1");
        }
        if self.users == 0 {
            return cfg_err("users must be >= 1");
        }
        if self.paths == 0 {
            return cfg_err("paths must be >= 1");
        }
        if self.schemes.is_empty() {
            return cfg_err("schemes must not be empty");
        }
        if self.p > 20 || self.q > 12 || self.p + self.q > 24 || self.b2 > 20 || self.b1 > 24 {
            return cfg_err(
                "bit counts out of range (p <= 20, q <= 12, p + q <= 24, b2 <= 20, b1 <= 24)",
            );
        }
        if self.n_mc == 0 {
            return cfg_err("n_mc must be >= 1");
        }
        match self.sweep {
            SweepAxis::None => {
                if !self.sweep_values.is_empty() {
                    return cfg_err("sweep_values given without a sweep axis");
                }
            }
            _ => {
                if self.sweep_values.is_empty() {
                    return cfg_err("sweep axis needs sweep_values");
                }
                if !self.sweep_values.windows(2).all(|w| w[0] < w[1]) {
                    return cfg_err("sweep_values must be strictly increasing");
                }
            }
        }
        let integral = matches!(
            self.sweep,
            SweepAxis::Q | SweepAxis::M | SweepAxis::Allocation
        );
        if integral
            && self
                .sweep_values
                .iter()
                .any(|v| v.fract() != 0.0 || *v < 0.0)
        {
            return cfg_err("this sweep axis takes non-negative integers");
        }
        if self.sweep == SweepAxis::Allocation
            && self.sweep_values.iter().any(|v| *v > self.b1 as f64)
        {
            return cfg_err("allocation sweep values must not exceed b1");
        }
        self.distribution_for(&self.region)?;
        Ok(())
    }

    pub fn array(&self) -> Result<ArrayConfig> {
        ArrayConfig::from_carrier(self.antennas, self.carrier_hz)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// The user distribution over `region`.
    pub fn distribution_for(&self, region: &PolarRegion) -> Result<DistributionSpec> {
        let region = *region;
        let spec = match self.dist_kind {
            DistKind::Uniform => DistributionSpec::UniformPolar(region),
            DistKind::HotSpot => DistributionSpec::HotSpotRange {
                region,
                hot: self.hot,
                hot_mass: self.hot_mass,
            },
            DistKind::Gaussian => {
                let Some((mean, std)) = self.gauss else {
                    return cfg_err("gaussian distribution needs gauss_mean and gauss_std");
                };
                DistributionSpec::TruncatedGaussianRange { region, mean, std }
            }
            DistKind::Mixture => DistributionSpec::GaussianMixtureRange {
                region,
                components: self.mixture.clone(),
            },
            DistKind::Empirical => {
                let Some(path) = &self.empirical_csv else {
                    return cfg_err("empirical distribution needs empirical_csv");
                };
                load_empirical_csv(path).map_err(|e| Error::Config(e.to_string()))?
            }
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn codebook_schemes(&self) -> impl Iterator<Item = Scheme> + '_ {
        self.schemes.iter().filter_map(|s| match s {
            SchemeChoice::Codebook(c) => Some(*c),
            SchemeChoice::FullCsi => None,
        })
    }
}
