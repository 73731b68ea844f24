//! Three-phase FDD feedback: polar-codebook selection for the analog stage,
//! RVQ quantization of the effective channel, zero-forcing digital
//! precoding and rate evaluation on the true channels.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::array::{inner, norm, ArrayConfig, PolarCoord};
use crate::channel::{complex_gaussian, effective_channel, ChannelRealization};
use crate::codebook::PolarCodebook;
use crate::error::{Error, Result};

/// Largest condition number accepted by [`zf_beamformer`].
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Phase1Search {
    /// Scan every codeword.
    #[default]
    Exhaustive,
    /// Start next to each path's location and climb the codeword grid.
    /// Agrees with the exhaustive scan on LoS-dominant channels and costs a
    /// few hundred codewords instead of `2^{p+q}`.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase1Choice {
    pub angle: usize,
    pub range: usize,
    pub index: usize,
    /// `|h^H b| / ‖h‖`.
    pub gain: f64,
}

struct Scorer<'a> {
    cb: &'a PolarCodebook,
    h: &'a [Complex64],
    inv_norm: f64,
    memo: HashMap<usize, f64>,
}

impl Scorer<'_> {
    fn score(&mut self, i: usize, j: usize) -> f64 {
        let idx = self.cb.index(i, j);
        if let Some(v) = self.memo.get(&idx) {
            return *v;
        }
        let v = inner(self.h, self.cb.codeword(i, j).as_slice()).norm() * self.inv_norm;
        self.memo.insert(idx, v);
        v
    }
}

fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Exhaustive Phase-1 selection, ties to the lowest index.
pub fn phase1_select(h: &ChannelRealization, cb: &PolarCodebook) -> Result<Phase1Choice> {
    phase1_select_with(h, cb, Phase1Search::Exhaustive)
}

pub fn phase1_select_with(
    h: &ChannelRealization,
    cb: &PolarCodebook,
    search: Phase1Search,
) -> Result<Phase1Choice> {
    if cb.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    let n = norm(&h.vector);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    if h.vector.len() != cb.config().num_antennas() {
        return Err(Error::DimensionMismatch {
            expected: cb.config().num_antennas(),
            got: h.vector.len(),
        });
    }
    let mut sc = Scorer {
        cb,
        h: &h.vector,
        inv_norm: 1.0 / n,
        memo: HashMap::new(),
    };
    let best = match search {
        Phase1Search::Local if !h.paths.is_empty() => local(
            &mut sc,
            &h.paths.iter().map(|p| p.coord).collect::<Vec<_>>(),
        ),
        _ => exhaustive(&mut sc),
    };
    let (angle, range) = cb.split_index(best.1);
    Ok(Phase1Choice {
        angle,
        range,
        index: best.1,
        gain: best.0,
    })
}

fn exhaustive(sc: &mut Scorer) -> (f64, usize) {
    let cb = sc.cb;
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for i in 0..cb.angles().len() {
        for j in 0..cb.ranges().len() {
            let v = inner(sc.h, cb.codeword(i, j).as_slice()).norm() * sc.inv_norm;
            let cand = (v, cb.index(i, j));
            if better(cand, best) {
                best = cand;
            }
        }
    }
    best
}

fn local(sc: &mut Scorer, seeds: &[PolarCoord]) -> (f64, usize) {
    let cb = sc.cb;
    let na = cb.angles().len();
    let nr = cb.ranges().len();
    let angles = cb.angles().samples();
    let step = if na > 1 {
        (angles[na - 1] - angles[0]) / (na - 1) as f64
    } else {
        1.0
    };
    let m = cb.config().num_antennas() as f64;
    let aperture = cb.config().aperture();
    // angle stride of about a quarter main lobe
    let coarse = ((0.25 / m / step).floor() as usize).max(1);
    let wr = 2usize;
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for s in seeds {
        let i0 = cb.angles().nearest(s.theta);
        let j0 = cb.ranges().nearest(s.range);
        for j in j0.saturating_sub(wr)..=(j0 + wr).min(nr - 1) {
            // a range mismatch u spreads the beam over ±D·u/2 in angle
            let u =
                (1.0 - s.theta * s.theta) * (1.0 / s.range - 1.0 / cb.ranges().samples()[j]).abs();
            let half = 2.0 / m + 0.6 * aperture * u;
            let wa = ((half / step).ceil() as usize).max(2);
            let lo = i0.saturating_sub(wa);
            let hi = (i0 + wa).min(na - 1);
            for i in (lo..=hi).step_by(coarse).chain([i0]) {
                let cand = (sc.score(i, j), cb.index(i, j));
                if better(cand, best) {
                    best = cand;
                }
            }
        }
    }
    // pattern search: long strides first, ending on the 8-neighbourhood
    let mut stride = (coarse as i64).max(64);
    while stride >= 1 {
        loop {
            let (ci, cj) = cb.split_index(best.1);
            let mut moved = false;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (i, j) = (ci as i64 + stride * di, cj as i64 + stride * dj);
                    if i < 0 || j < 0 || i >= na as i64 || j >= nr as i64 || (di == 0 && dj == 0) {
                        continue;
                    }
                    let (i, j) = (i as usize, j as usize);
                    let cand = (sc.score(i, j), cb.index(i, j));
                    if better(cand, best) {
                        best = cand;
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
        stride /= 2;
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RvqMode {
    /// Normalized i.i.d. complex Gaussian vectors.
    Isotropic,
    /// Directions shaped like beam-focused effective channels: one dominant
    /// entry plus `CN(0, leakage)` entries elsewhere.
    Matched { leakage: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RvqCodebook {
    pub dim: usize,
    pub codewords: Vec<Vec<Complex64>>,
    pub mode: RvqMode,
    pub seed: u64,
}

pub fn rvq_generate(dim: usize, b2: u32, mode: RvqMode, seed: u64) -> Result<RvqCodebook> {
    if dim == 0 {
        return Err(Error::InvalidArgument("RVQ dimension must be >= 1".into()));
    }
    if b2 > 24 {
        return Err(Error::InvalidArgument(format!("{b2} RVQ bits is too many")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1usize << b2;
    let mut codewords = Vec::with_capacity(n);
    while codewords.len() < n {
        let v: Vec<Complex64> = match mode {
            RvqMode::Isotropic => (0..dim).map(|_| complex_gaussian(&mut rng, 1.0)).collect(),
            RvqMode::Matched { leakage } => {
                let lead = codewords.len() % dim;
                (0..dim)
                    .map(|k| {
                        let e = complex_gaussian(&mut rng, leakage);
                        if k == lead {
                            e + Complex64::new(1.0, 0.0)
                        } else {
                            e
                        }
                    })
                    .collect()
            }
        };
        let nv = norm(&v);
        if nv > 0.0 {
            codewords.push(v.into_iter().map(|z| z / nv).collect());
        }
    }
    Ok(RvqCodebook {
        dim,
        codewords,
        mode,
        seed,
    })
}

/// Codeword maximizing `|g^H b|²`, ties to the lowest index. Returns the index.
pub fn phase2_select(g: &[Complex64], cb: &RvqCodebook) -> Result<usize> {
    if g.len() != cb.dim {
        return Err(Error::DimensionMismatch {
            expected: cb.dim,
            got: g.len(),
        });
    }
    if norm(g) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (idx, b) in cb.codewords.iter().enumerate() {
        let v = inner(g, b).norm_sqr();
        if v > best.0 {
            best = (v, idx);
        }
    }
    Ok(best.1)
}

/// Zero-forcing precoder for a `K×K` channel whose rows are the users'
/// (quantized) effective channels: columns of `Ĝ^H(ĜĜ^H)^{-1}`, each scaled
/// to unit norm, so `row_v(Ĝ)·f_k = 0` for `v ≠ k`.
pub fn zf_beamformer(ghat: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if ghat.nrows() != ghat.ncols() || ghat.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            expected: ghat.nrows(),
            got: ghat.ncols(),
        });
    }
    let sv = ghat.clone().svd(false, false).singular_values;
    let (hi, lo) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(h, l), &s| (h.max(s), l.min(s)));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond < MAX_CONDITION) {
        return Err(Error::Singular(cond));
    }
    let gh = ghat.adjoint();
    let gram = ghat * &gh;
    let inv = gram.try_inverse().ok_or(Error::Singular(cond))?;
    let mut f = gh * inv;
    for mut col in f.column_iter_mut() {
        let n = col.norm();
        col /= Complex64::new(n, 0.0);
    }
    Ok(f)
}

/// Rate of user `k` in bps/Hz with equal power `p_total/K` per stream.
pub fn user_rate(
    h: &[Complex64],
    f_rf: &DMatrix<Complex64>,
    f_bb: &DMatrix<Complex64>,
    k: usize,
    p_total: f64,
    noise_var: f64,
) -> Result<f64> {
    if h.len() != f_rf.nrows() {
        return Err(Error::DimensionMismatch {
            expected: f_rf.nrows(),
            got: h.len(),
        });
    }
    if f_rf.ncols() != f_bb.nrows() || k >= f_bb.ncols() {
        return Err(Error::DimensionMismatch {
            expected: f_rf.ncols(),
            got: f_bb.nrows(),
        });
    }
    let users = f_bb.ncols() as f64;
    let hv = DVector::from_column_slice(h);
    let z = hv.adjoint() * f_rf * f_bb;
    let per = p_total / users;
    let signal = per * z[(0, k)].norm_sqr();
    let interference: f64 = (0..f_bb.ncols())
        .filter(|&i| i != k)
        .map(|i| per * z[(0, i)].norm_sqr())
        .sum();
    Ok((1.0 + signal / (interference + noise_var)).log2())
}

/// How the analog beamformer is chosen.
#[derive(Debug, Clone, Copy)]
pub enum AnalogStage<'a> {
    Codebook {
        cb: &'a PolarCodebook,
        search: Phase1Search,
    },
    /// Exact steering vector at each user's own location.
    FullCsi,
}

/// How the effective channel reaches the transmitter.
#[derive(Debug, Clone, Copy)]
pub enum DigitalStage<'a> {
    Rvq(&'a RvqCodebook),
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackOutcome {
    pub phase1: Vec<Option<Phase1Choice>>,
    pub f_rf: DMatrix<Complex64>,
    /// Exact effective channel, row `k` = `h_k^H F_RF`.
    pub g: DMatrix<Complex64>,
    /// Channel the precoder was designed on.
    pub ghat: DMatrix<Complex64>,
    /// Precoder scaled so that `‖F_RF f_k‖ = 1`.
    pub f_bb: DMatrix<Complex64>,
    pub rates: Vec<f64>,
}

impl FeedbackOutcome {
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Per-user rates for another power/noise level with the same beamformers.
    pub fn rates_at(
        &self,
        users: &[ChannelRealization],
        p_total: f64,
        noise_var: f64,
    ) -> Result<Vec<f64>> {
        users
            .iter()
            .enumerate()
            .map(|(k, u)| user_rate(&u.vector, &self.f_rf, &self.f_bb, k, p_total, noise_var))
            .collect()
    }
}

/// What to do when the designed-on channel is (nearly) singular.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ZfPolicy {
    /// Surface [`Error::Singular`].
    #[default]
    Strict,
    /// Fall back to regularized ZF `Ĝ^H(ĜĜ^H + εI)^{-1}` with
    /// `ε = factor · tr(ĜĜ^H)/K`.
    Regularize { factor: f64 },
}

/// Regularized ZF with unit-norm columns.
pub fn zf_regularized(ghat: &DMatrix<Complex64>, eps: f64) -> Result<DMatrix<Complex64>> {
    let k = ghat.nrows();
    let gh = ghat.adjoint();
    let gram = ghat * &gh + DMatrix::<Complex64>::identity(k, k) * Complex64::new(eps, 0.0);
    let inv = gram.try_inverse().ok_or(Error::Singular(f64::INFINITY))?;
    let mut f = gh * inv;
    for mut col in f.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= Complex64::new(n, 0.0);
        }
    }
    Ok(f)
}

pub fn run_protocol(
    cfg: &ArrayConfig,
    users: &[ChannelRealization],
    analog: AnalogStage,
    digital: DigitalStage,
    p_total: f64,
    noise_var: f64,
) -> Result<FeedbackOutcome> {
    run_protocol_with(
        cfg,
        users,
        analog,
        digital,
        p_total,
        noise_var,
        ZfPolicy::Strict,
    )
}

pub fn run_protocol_with(
    cfg: &ArrayConfig,
    users: &[ChannelRealization],
    analog: AnalogStage,
    digital: DigitalStage,
    p_total: f64,
    noise_var: f64,
    policy: ZfPolicy,
) -> Result<FeedbackOutcome> {
    if users.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one user is required".into(),
        ));
    }
    let m = cfg.num_antennas();
    let k = users.len();
    let mut f_rf = DMatrix::zeros(m, k);
    let mut phase1 = Vec::with_capacity(k);
    for (col, u) in users.iter().enumerate() {
        let (choice, a) = match analog {
            AnalogStage::Codebook { cb, search } => {
                let c = phase1_select_with(u, cb, search)?;
                (Some(c), cb.codeword(c.angle, c.range))
            }
            AnalogStage::FullCsi => {
                let loc = u.paths.first().map(|p| p.coord).ok_or_else(|| {
                    Error::InvalidArgument("full-CSI beamforming needs the user location".into())
                })?;
                (None, cfg.steering(loc))
            }
        };
        f_rf.set_column(col, &DVector::from_column_slice(a.as_slice()));
        phase1.push(choice);
    }
    let g = effective_channel(users, &f_rf)?;
    let ghat = match digital {
        DigitalStage::Exact => g.clone(),
        DigitalStage::Rvq(cb) => {
            let mut q = DMatrix::zeros(k, k);
            for row in 0..k {
                let gk: Vec<Complex64> = g.row(row).iter().copied().collect();
                let idx = phase2_select(&gk, cb)?;
                for (c, z) in cb.codewords[idx].iter().enumerate() {
                    q[(row, c)] = *z;
                }
            }
            q
        }
    };
    let mut f_bb = match (zf_beamformer(&ghat), policy) {
        (Ok(f), _) => f,
        (Err(Error::Singular(_)), ZfPolicy::Regularize { factor }) => {
            let tr: f64 = ghat.iter().map(|z| z.norm_sqr()).sum();
            zf_regularized(&ghat, factor * tr / k as f64)?
        }
        (Err(e), _) => return Err(e),
    };
    for col in 0..k {
        let p = (&f_rf * f_bb.column(col)).norm();
        if p > 0.0 {
            let mut c = f_bb.column_mut(col);
            c /= Complex64::new(p, 0.0);
        }
    }
    let mut out = FeedbackOutcome {
        phase1,
        f_rf,
        g,
        ghat,
        f_bb,
        rates: Vec::new(),
    };
    out.rates = out.rates_at(users, p_total, noise_var)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipathFeedback {
    pub reconstructed: Vec<Complex64>,
    /// `|ĥ^H h| / (‖ĥ‖‖h‖)`.
    pub correlation: f64,
}

/// Per-path feedback: each path location snaps to the nearest angle and
/// inverse-range sample, and the path-gain direction is RVQ-quantized.
pub fn multipath_feedback(
    cfg: &ArrayConfig,
    h: &ChannelRealization,
    cb1: &PolarCodebook,
    gain_cb: &RvqCodebook,
) -> Result<MultipathFeedback> {
    let gains: Vec<Complex64> = h.paths.iter().map(|p| p.gain).collect();
    let idx = phase2_select(&gains, gain_cb)?;
    let beta_hat = &gain_cb.codewords[idx];
    let scale = (cfg.num_antennas() as f64).sqrt();
    let mut rec = vec![Complex64::new(0.0, 0.0); cfg.num_antennas()];
    for (p, b) in h.paths.iter().zip(beta_hat) {
        let i = cb1.angles().nearest(p.coord.theta);
        let j = cb1.ranges().nearest(p.coord.range);
        let a = cb1.codeword(i, j);
        for (r, e) in rec.iter_mut().zip(a.as_slice()) {
            *r += scale * b * e;
        }
    }
    let denom = norm(&rec) * norm(&h.vector);
    let correlation = if denom > 0.0 {
        inner(&rec, &h.vector).norm() / denom
    } else {
        0.0
    };
    Ok(MultipathFeedback {
        reconstructed: rec,
        correlation,
    })
}
