//! Angle and range sampling sets and the polar codebooks built from them.
//!
//! A [`PolarCodebook`] is the Cartesian product of an angle set and a range
//! set. Codewords are computed on demand: a 15-bit codebook for 387 antennas
//! would need about 200 MB if stored, and the selection search only touches
//! a small neighbourhood of it. [`PolarCodebook::materialize`] builds the full
//! array when it is really wanted.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::array::{ArrayConfig, PolarCoord, SteeringVector};
use crate::distribution::PolarRegion;
use crate::error::{Error, Result};

mod lloyd;

pub use lloyd::{
    lloyd_angle, lloyd_angle_samples, lloyd_range, lloyd_range_samples, LloydInit, LloydOptions,
    LloydOutcome,
};

fn check_sorted(samples: &[f64]) -> bool {
    samples.windows(2).all(|w| w[0] <= w[1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSamplingSet {
    samples: Vec<f64>,
}

impl AngleSamplingSet {
    /// Ascending angles inside `[-1, 1]`.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if !check_sorted(&samples) || samples.iter().any(|t| !(t.abs() <= 1.0)) {
            return Err(Error::InvalidArgument(
                "angle samples must be ascending inside [-1, 1]".into(),
            ));
        }
        Ok(Self { samples })
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    /// Index of the sample closest to `theta`, lowest index on ties.
    pub fn nearest(&self, theta: f64) -> usize {
        nearest_sorted(&self.samples, theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeSamplingSet {
    samples: Vec<f64>,
}

impl RangeSamplingSet {
    /// Ascending ranges; `+∞` allowed (far-field entry).
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if !check_sorted(&samples) || samples.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidArgument(
                "range samples must be ascending and positive".into(),
            ));
        }
        Ok(Self { samples })
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    /// Index of the sample closest in inverse range (`1/∞ = 0`).
    pub fn nearest(&self, range: f64) -> usize {
        // inverse ranges are descending in index; search on the negated values
        let inv: Vec<f64> = self.samples.iter().map(|r| -1.0 / r).collect();
        nearest_sorted(&inv, -1.0 / range)
    }
}

fn nearest_sorted(xs: &[f64], x: f64) -> usize {
    let pos = xs.partition_point(|&v| v < x);
    if pos == 0 {
        return 0;
    }
    if pos == xs.len() {
        return xs.len() - 1;
    }
    if (x - xs[pos - 1]).abs() <= (xs[pos] - x).abs() {
        pos - 1
    } else {
        pos
    }
}

fn bits_count(bits: u32) -> Result<usize> {
    if bits > 30 {
        return Err(Error::InvalidArgument(format!("{bits} bits is too many")));
    }
    Ok(1usize << bits)
}

/// `θ_min + i·D/(2^p+1)` for `i = 1..=2^p`.
pub fn uniform_angle_samples(region: &PolarRegion, p: u32) -> Result<AngleSamplingSet> {
    region.validate()?;
    let n = bits_count(p)?;
    let step = region.angle_width() / (n as f64 + 1.0);
    AngleSamplingSet::new(
        (1..=n)
            .map(|i| region.theta_min + i as f64 * step)
            .collect(),
    )
}

/// Midpoints of `2^q` log-uniform cells: `(r_min/2)(ρ⁻¹+1)ρ^i`, `ρ = (r_max/r_min)^{1/2^q}`.
pub fn geometric_range_samples(region: &PolarRegion, q: u32) -> Result<RangeSamplingSet> {
    region.validate()?;
    let n = bits_count(q)?;
    let ratio = (region.r_max / region.r_min).powf(1.0 / n as f64);
    let base = region.r_min / 2.0 * (1.0 / ratio + 1.0);
    RangeSamplingSet::new((1..=n).map(|i| base * ratio.powi(i as i32)).collect())
}

/// Samples uniform in inverse range: `2^q r_max / (i(ξ²−1) + 2^q)`, `ξ² = r_max/r_min`.
pub fn hyperbolic_range_samples(region: &PolarRegion, q: u32) -> Result<RangeSamplingSet> {
    region.validate()?;
    let n = bits_count(q)?;
    let xi2 = region.r_max / region.r_min;
    let mut v: Vec<f64> = (1..=n)
        .map(|i| n as f64 * region.r_max / (i as f64 * (xi2 - 1.0) + n as f64))
        .collect();
    v.reverse();
    RangeSamplingSet::new(v)
}

/// Midpoints of `2^q` equal-width range cells.
pub fn uniform_range_samples(region: &PolarRegion, q: u32) -> Result<RangeSamplingSet> {
    region.validate()?;
    let n = bits_count(q)?;
    let w = region.range_width() / n as f64;
    RangeSamplingSet::new(
        (0..n)
            .map(|i| region.r_min + (i as f64 + 0.5) * w)
            .collect(),
    )
}

/// Hyperbolic set with its longest-range sample (index 1) replaced by `+∞`.
pub fn hybrid_field_range_samples(region: &PolarRegion, q: u32) -> Result<RangeSamplingSet> {
    if q == 0 {
        return Err(Error::InvalidArgument(
            "hybrid-field sampling needs q >= 1".into(),
        ));
    }
    let hy = hyperbolic_range_samples(region, q)?;
    let mut v = hy.samples().to_vec();
    // ascending order puts hyperbolic index 1 last
    *v.last_mut().expect("nonempty") = f64::INFINITY;
    RangeSamplingSet::new(v)
}

#[derive(Debug, Clone)]
pub struct PolarCodebook {
    cfg: ArrayConfig,
    angles: AngleSamplingSet,
    ranges: RangeSamplingSet,
}

pub fn assemble_codebook(
    cfg: &ArrayConfig,
    angles: AngleSamplingSet,
    ranges: RangeSamplingSet,
) -> PolarCodebook {
    PolarCodebook {
        cfg: cfg.clone(),
        angles,
        ranges,
    }
}

/// `2^total_bits` far-field codewords over the angle interval.
pub fn dft_angle_codebook(
    cfg: &ArrayConfig,
    region: &PolarRegion,
    total_bits: u32,
) -> Result<PolarCodebook> {
    let angles = uniform_angle_samples(region, total_bits)?;
    let ranges = RangeSamplingSet::new(vec![f64::INFINITY])?;
    Ok(assemble_codebook(cfg, angles, ranges))
}

impl PolarCodebook {
    pub fn config(&self) -> &ArrayConfig {
        &self.cfg
    }
    pub fn angles(&self) -> &AngleSamplingSet {
        &self.angles
    }
    pub fn ranges(&self) -> &RangeSamplingSet {
        &self.ranges
    }
    pub fn len(&self) -> usize {
        self.angles.len() * self.ranges.len()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Flat index of `(angle i, range j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ranges.len() + j
    }
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        (index / self.ranges.len(), index % self.ranges.len())
    }
    pub fn coord(&self, i: usize, j: usize) -> PolarCoord {
        PolarCoord {
            theta: self.angles.samples[i],
            range: self.ranges.samples[j],
        }
    }
    pub fn codeword(&self, i: usize, j: usize) -> SteeringVector {
        self.cfg.steering(self.coord(i, j))
    }
    /// Every codeword in flat-index order.
    pub fn materialize(&self) -> Vec<SteeringVector> {
        (0..self.len())
            .map(|k| {
                let (i, j) = self.split_index(k);
                self.codeword(i, j)
            })
            .collect()
    }

    /// Rows `index,theta,range_m`; far-field entries print `inf`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "theta", "range_m"])?;
        for k in 0..self.len() {
            let (i, j) = self.split_index(k);
            let c = self.coord(i, j);
            out.write_record([k.to_string(), c.theta.to_string(), c.range.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Header `M, p, q` as little-endian u64, then each codeword as
    /// interleaved little-endian f64 `re, im`.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        let p = log2_exact(self.angles.len())?;
        let q = log2_exact(self.ranges.len())?;
        for v in [self.cfg.num_antennas() as u64, p as u64, q as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        for k in 0..self.len() {
            let (i, j) = self.split_index(k);
            for z in self.codeword(i, j).as_slice() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        self.write_binary(std::fs::File::create(path)?)
    }
}

fn log2_exact(n: usize) -> Result<u32> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::Unsupported(format!(
            "binary format needs power-of-two set sizes, got {n}"
        )))
    }
}

/// Codewords read back from the binary format.
#[derive(Debug, Clone, PartialEq)]
pub struct CodewordFile {
    pub num_antennas: usize,
    pub p: u32,
    pub q: u32,
    pub codewords: Vec<Vec<Complex64>>,
}

pub fn read_binary<R: Read>(r: R) -> Result<CodewordFile> {
    let mut r = std::io::BufReader::new(r);
    let mut word = [0u8; 8];
    let mut next = |r: &mut std::io::BufReader<R>| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let m = u64::from_le_bytes(next(&mut r)?) as usize;
    let p = u64::from_le_bytes(next(&mut r)?) as u32;
    let q = u64::from_le_bytes(next(&mut r)?) as u32;
    let count = bits_count(p)? * bits_count(q)?;
    let mut codewords = Vec::with_capacity(count);
    for _ in 0..count {
        let mut cw = Vec::with_capacity(m);
        for _ in 0..m {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            cw.push(Complex64::new(re, im));
        }
        codewords.push(cw);
    }
    Ok(CodewordFile {
        num_antennas: m,
        p,
        q,
        codewords,
    })
}

/// Named codebook constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Geometric,
    Hyperbolic,
    Uniform,
    Dft,
    Hybrid,
    /// Lloyd-designed range samples from training data, uniform angles.
    Extended,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Geometric,
        Scheme::Hyperbolic,
        Scheme::Uniform,
        Scheme::Dft,
        Scheme::Hybrid,
        Scheme::Extended,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Geometric => "geometric",
            Scheme::Hyperbolic => "hyperbolic",
            Scheme::Uniform => "uniform",
            Scheme::Dft => "dft",
            Scheme::Hybrid => "hybrid",
            Scheme::Extended => "extended",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Build with `p` angle bits and `q` range bits. `training` ranges are
    /// required by [`Scheme::Extended`] only.
    pub fn build(
        self,
        cfg: &ArrayConfig,
        region: &PolarRegion,
        p: u32,
        q: u32,
        training: Option<&[f64]>,
    ) -> Result<PolarCodebook> {
        let ranges = match self {
            Scheme::Dft => return dft_angle_codebook(cfg, region, p + q),
            Scheme::Geometric => geometric_range_samples(region, q)?,
            Scheme::Hyperbolic => hyperbolic_range_samples(region, q)?,
            Scheme::Uniform => uniform_range_samples(region, q)?,
            Scheme::Hybrid => hybrid_field_range_samples(region, q)?,
            Scheme::Extended => {
                let data = training.ok_or_else(|| {
                    Error::InvalidArgument("the extended scheme needs training ranges".into())
                })?;
                let opts = LloydOptions {
                    tolerance: 1e-6 * region.r_min,
                    ..LloydOptions::default()
                };
                RangeSamplingSet::new(lloyd_range(data, q, &opts)?.samples)?
            }
        };
        Ok(assemble_codebook(
            cfg,
            uniform_angle_samples(region, p)?,
            ranges,
        ))
    }
}
